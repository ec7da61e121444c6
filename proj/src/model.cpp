#include "coevo/model.hpp"

#include <algorithm>

#include <nlohmann/json.hpp>

namespace coevo::model {

using metamodel::kUnbounded;
using metamodel::OwnedFeature;
using nlohmann::json;
using nlohmann::ordered_json;

Value Value::single(Scalar s) {
    Value v;
    v.many = false;
    v.items.push_back(std::move(s));
    return v;
}

Value Value::list(std::vector<Scalar> items) {
    Value v;
    v.many = true;
    v.items = std::move(items);
    return v;
}

const char* to_string(ViolationKind kind) {
    switch (kind) {
    case ViolationKind::TypeMismatch: return "TYPE_MISMATCH";
    case ViolationKind::Multiplicity: return "MULTIPLICITY";
    case ViolationKind::UnknownFeature: return "UNKNOWN_FEATURE";
    case ViolationKind::UnknownClass: return "UNKNOWN_CLASS";
    case ViolationKind::AbstractInstance: return "ABSTRACT_INSTANCE";
    case ViolationKind::DanglingRef: return "DANGLING_REF";
    case ViolationKind::ContainmentCycle: return "CONTAINMENT_CYCLE";
    case ViolationKind::MultiContainer: return "MULTI_CONTAINER";
    }
    return "?";
}

std::string to_string(const Violation& v) {
    return std::string(to_string(v.kind)) + " at " + v.where + ": " + v.message;
}

std::vector<std::string> toStrings(const std::vector<Violation>& vs) {
    std::vector<std::string> out;
    out.reserve(vs.size());
    for (const auto& v : vs) out.push_back(to_string(v));
    return out;
}

const Obj* Repository::find(std::string_view id) const {
    auto it = objects.find(std::string(id));
    return it == objects.end() ? nullptr : &it->second;
}

Obj* Repository::find(std::string_view id) {
    return const_cast<Obj*>(std::as_const(*this).find(id));
}

const Obj& Repository::get(std::string_view id) const {
    if (const Obj* o = find(id)) return *o;
    throw UnknownObjectError("no object with id '" + std::string(id) + "'");
}

Obj& Repository::get(std::string_view id) {
    return const_cast<Obj&>(std::as_const(*this).get(id));
}

Resource& Repository::ensureResource(const std::string& name) {
    auto [it, inserted] = resources.try_emplace(name);
    if (inserted) it->second.name = name;
    return it->second;
}

std::string Repository::freshId() {
    std::string id = "o" + std::to_string(nextId);
    while (objects.count(id)) id = "o" + std::to_string(++nextId);
    ++nextId;
    return id;
}

namespace {

void eraseRoot(Resource& res, std::string_view id) {
    std::erase(res.roots, std::string(id));
}

bool isRoot(const Repository& repo, const Obj& o) {
    auto it = repo.resources.find(o.resource);
    if (it == repo.resources.end()) return false;
    const auto& roots = it->second.roots;
    return std::find(roots.begin(), roots.end(), o.id) != roots.end();
}

std::vector<std::string> refIds(const Value* v) {
    std::vector<std::string> out;
    if (!v) return out;
    for (const auto& s : v->items)
        if (const Ref* r = std::get_if<Ref>(&s)) out.push_back(r->id);
    return out;
}

// Containment features visible on an object's class; empty when the class is
// unknown to mm.
std::vector<OwnedFeature> containmentFeatures(const Metamodel& mm, const Obj& o) {
    std::vector<OwnedFeature> out;
    if (!mm.findClass(o.className)) return out;
    for (const auto& f : metamodel::allFeatures(mm, o.className))
        if (f.isReference() && f.reference->containment && o.slots.count(f.name()))
            out.push_back(f);
    return out;
}

// Removes the first slot occurrence of Ref(childId) under (ownerId, feature),
// normalizing an emptied list to an absent slot.
void rawRemoveRef(Repository& repo, const std::string& ownerId, const std::string& feature,
                  const std::string& childId) {
    Obj& owner = repo.get(ownerId);
    auto it = owner.slots.find(feature);
    if (it == owner.slots.end()) return;
    Value& v = it->second;
    auto pos = std::find(v.items.begin(), v.items.end(), Scalar(Ref{childId}));
    if (pos == v.items.end()) return;
    v.items.erase(pos);
    if (v.items.empty()) owner.slots.erase(it);
}

// Applies the new resource to obj and its containment subtree.
void rehomeSubtree(Repository& repo, const Metamodel& mm, const std::string& objId,
                   const std::string& resource) {
    std::vector<std::string> stack{objId};
    std::set<std::string> visited;
    while (!stack.empty()) {
        std::string id = std::move(stack.back());
        stack.pop_back();
        if (!visited.insert(id).second) continue;
        Obj* o = repo.find(id);
        if (!o) continue;
        o->resource = resource;
        for (const auto& f : containmentFeatures(mm, *o))
            for (const auto& child : refIds(&o->slots.at(f.name()))) stack.push_back(child);
    }
}

bool containsTransitively(const Repository& repo, const Metamodel& mm,
                          std::string_view ancestor, std::string_view objId) {
    std::set<std::string> visited;
    std::string cur(objId);
    while (true) {
        auto container = containerOf(repo, mm, cur);
        if (!container) return false;
        if (container->first == ancestor) return true;
        if (!visited.insert(container->first).second) return false; // cycle guard
        cur = container->first;
    }
}

} // namespace

std::string newInstance(Repository& repo, const Metamodel& mm, const std::string& resource,
                        const std::string& className) {
    if (!mm.findClass(className))
        throw UnknownClassError("no class named '" + className + "'");
    std::string id = repo.freshId();
    Obj o;
    o.id = id;
    o.className = className;
    o.resource = resource;
    repo.objects.emplace(id, std::move(o));
    repo.ensureResource(resource).roots.push_back(id);
    return id;
}

std::optional<Value> getSlot(const Repository& repo, const Metamodel& mm,
                             std::string_view objId, std::string_view feature) {
    const Obj& o = repo.get(objId);
    auto it = o.slots.find(std::string(feature));
    if (it != o.slots.end()) return it->second;
    if (auto f = metamodel::findFeature(mm, o.className, feature); f && f->isMany())
        return Value::list({});
    return std::nullopt;
}

const Value* storedSlot(const Repository& repo, std::string_view objId,
                        std::string_view feature) {
    const Obj& o = repo.get(objId);
    auto it = o.slots.find(std::string(feature));
    return it == o.slots.end() ? nullptr : &it->second;
}

WriteResult writeSlot(Repository& repo, const Metamodel& mm, const std::string& objId,
                      const std::string& feature, WriteMode mode, std::optional<Value> value) {
    WriteResult result;
    Obj& obj = repo.get(objId);

    const Value* storedBefore = storedSlot(repo, objId, feature);
    std::vector<std::string> oldRefs = refIds(storedBefore);

    // Compute the post-write value without touching the repository yet.
    std::optional<Value> next;
    switch (mode) {
    case WriteMode::Set:
        if (!value) throw BadArgumentsError("SET requires a value");
        next = *value;
        break;
    case WriteMode::Add: {
        if (!value || value->many) throw BadArgumentsError("ADD requires a single value");
        Value v = storedBefore ? *storedBefore : Value::list({});
        v.many = true;
        v.items.push_back(value->items.front());
        next = std::move(v);
        break;
    }
    case WriteMode::Remove: {
        if (!value || value->many) throw BadArgumentsError("REMOVE requires a single value");
        if (!storedBefore) {
            result.warnings.push_back("REMOVE on " + objId + "." + feature +
                                      ": value absent, nothing removed");
            return result;
        }
        Value v = *storedBefore;
        auto pos = std::find(v.items.begin(), v.items.end(), value->items.front());
        if (pos == v.items.end()) {
            result.warnings.push_back("REMOVE on " + objId + "." + feature +
                                      ": value absent, nothing removed");
            return result;
        }
        v.items.erase(pos);
        if (!v.items.empty() || v.many) next = std::move(v);
        if (next && next->items.empty()) next = std::nullopt; // empty list normalizes away
        break;
    }
    case WriteMode::Unset:
        next = std::nullopt;
        break;
    }
    if (next && next->many && next->items.empty()) next = std::nullopt;

    std::vector<std::string> newRefs = refIds(next ? &*next : nullptr);

    auto feat = metamodel::findFeature(mm, obj.className, feature);
    const bool isContainment = feat && feat->isReference() && feat->reference->containment;

    std::set<std::string> oldSet(oldRefs.begin(), oldRefs.end());
    std::set<std::string> newSet(newRefs.begin(), newRefs.end());
    std::vector<std::string> acquired, released;
    for (const auto& id : newSet)
        if (!oldSet.count(id)) acquired.push_back(id);
    for (const auto& id : oldSet)
        if (!newSet.count(id)) released.push_back(id);

    if (isContainment) {
        for (const auto& child : acquired) {
            if (child == objId || containsTransitively(repo, mm, child, objId))
                throw ContainmentCycleError("containment write " + objId + "." + feature +
                                            " <- " + child + " would create a cycle");
        }
    }

    // Commit the slot.
    if (next)
        obj.slots[feature] = std::move(*next);
    else
        obj.slots.erase(feature);

    if (isContainment) {
        for (const auto& child : acquired) {
            Obj* c = repo.find(child);
            if (!c) continue; // dangling; conformance will flag it
            if (auto prev = containerOf(repo, mm, child);
                prev && !(prev->first == objId && prev->second == feature))
                rawRemoveRef(repo, prev->first, prev->second, child);
            eraseRoot(repo.ensureResource(c->resource), child);
            rehomeSubtree(repo, mm, child, obj.resource);
        }
        for (const auto& child : released) {
            Obj* c = repo.find(child);
            if (!c) continue;
            if (!containerOf(repo, mm, child) && !isRoot(repo, *c))
                repo.ensureResource(c->resource).roots.push_back(child);
        }
    }

    // Keep opposite references mutually consistent.
    if (feat && feat->isReference() && feat->reference->opposite) {
        const std::string opp = *feat->reference->opposite;
        const std::string targetClass = feat->reference->target;
        auto oppFeat = metamodel::findFeature(mm, targetClass, opp);
        for (const auto& id : released)
            if (repo.find(id)) rawRemoveRef(repo, id, opp, objId);
        for (const auto& id : acquired) {
            Obj* t = repo.find(id);
            if (!t) continue;
            const bool oppMany = oppFeat && oppFeat->isMany();
            auto it = t->slots.find(opp);
            if (!oppMany) {
                // Single-valued back-pointer: displace the old link.
                if (it != t->slots.end())
                    for (const auto& wid : refIds(&it->second))
                        if (wid != objId) rawRemoveRef(repo, wid, feature, id);
                t->slots[opp] = Value::single(Ref{objId});
            } else {
                Value v = it != t->slots.end() ? it->second : Value::list({});
                v.many = true;
                if (std::find(v.items.begin(), v.items.end(), Scalar(Ref{objId})) ==
                    v.items.end())
                    v.items.push_back(Ref{objId});
                t->slots[opp] = std::move(v);
            }
        }
    }

    return result;
}

void deleteInstance(Repository& repo, const Metamodel& mm, const std::string& objId) {
    repo.get(objId);

    // Containment closure under the deleted object.
    std::set<std::string> doomed;
    std::vector<std::string> stack{objId};
    while (!stack.empty()) {
        std::string id = std::move(stack.back());
        stack.pop_back();
        if (!doomed.insert(id).second) continue;
        const Obj* o = repo.find(id);
        if (!o) continue;
        for (const auto& f : containmentFeatures(mm, *o))
            for (const auto& child : refIds(&o->slots.at(f.name()))) stack.push_back(child);
    }

    // Scrub every mention of the doomed objects from surviving slots.
    for (auto& [id, o] : repo.objects) {
        if (doomed.count(id)) continue;
        for (auto it = o.slots.begin(); it != o.slots.end();) {
            Value& v = it->second;
            std::erase_if(v.items, [&](const Scalar& s) {
                const Ref* r = std::get_if<Ref>(&s);
                return r && doomed.count(r->id);
            });
            if (v.items.empty())
                it = o.slots.erase(it);
            else
                ++it;
        }
    }

    for (auto& [name, res] : repo.resources)
        std::erase_if(res.roots, [&](const std::string& id) { return doomed.count(id) > 0; });
    for (const auto& id : doomed) repo.objects.erase(id);
}

std::vector<std::string> getInverse(const Repository& repo, const Metamodel& mm,
                                    std::string_view objId, const QualifiedName& feature) {
    auto resolved = metamodel::resolve(mm, feature);
    if (resolved.kind != metamodel::ResolvedElement::Kind::Reference)
        throw NotFoundError("'" + feature.str() + "' is not a reference");
    repo.get(objId);

    std::vector<std::string> out;
    Scalar needle = Ref{std::string(objId)};
    for (const auto& [id, o] : repo.objects) {
        if (!mm.findClass(o.className) || !metamodel::isSubtypeOf(mm, o.className, feature.type))
            continue;
        auto it = o.slots.find(feature.feature);
        if (it == o.slots.end()) continue;
        if (std::find(it->second.items.begin(), it->second.items.end(), needle) !=
            it->second.items.end())
            out.push_back(id);
    }
    return out; // map iteration is already id-ordered
}

std::vector<std::string> allInstances(const Repository& repo, const Metamodel& mm,
                                      const std::string& className, bool includeSubtypes) {
    if (!mm.findClass(className))
        throw UnknownClassError("no class named '" + className + "'");
    std::vector<std::string> out;
    for (const auto& [id, o] : repo.objects) {
        bool match = o.className == className;
        if (!match && includeSubtypes && mm.findClass(o.className))
            match = metamodel::isSubtypeOf(mm, o.className, className);
        if (match) out.push_back(id);
    }
    return out;
}

std::optional<std::pair<std::string, std::string>> containerOf(const Repository& repo,
                                                               const Metamodel& mm,
                                                               std::string_view objId) {
    for (const auto& [id, o] : repo.objects) {
        if (id == objId) continue;
        for (const auto& f : containmentFeatures(mm, o)) {
            for (const auto& child : refIds(&o.slots.at(f.name())))
                if (child == objId) return std::make_pair(id, f.name());
        }
    }
    return std::nullopt;
}

namespace {

bool scalarMatchesType(const Metamodel& mm, const Scalar& s, const std::string& type) {
    if (type == "String") return std::holds_alternative<std::string>(s);
    if (type == "Int") return std::holds_alternative<std::int64_t>(s);
    if (type == "Bool") return std::holds_alternative<bool>(s);
    if (type == "Float")
        return std::holds_alternative<double>(s) || std::holds_alternative<std::int64_t>(s);
    if (const auto* e = mm.findEnum(type)) {
        const auto* lit = std::get_if<std::string>(&s);
        return lit && e->hasLiteral(*lit);
    }
    return false;
}

std::string scalarKindName(const Scalar& s) {
    switch (s.index()) {
    case 0: return "Bool";
    case 1: return "Int";
    case 2: return "Float";
    case 3: return "String";
    default: return "reference";
    }
}

} // namespace

std::vector<Violation> checkConformance(const Repository& repo, const Metamodel& mm) {
    std::vector<Violation> out;

    // Dangling resource roots.
    for (const auto& [name, res] : repo.resources)
        for (const auto& root : res.roots)
            if (!repo.find(root))
                out.push_back({ViolationKind::DanglingRef, root,
                               "root of resource '" + name + "' does not exist"});

    // Global dangling-reference pass over every slot.
    for (const auto& [id, o] : repo.objects)
        for (const auto& [feature, v] : o.slots)
            for (const auto& s : v.items)
                if (const Ref* r = std::get_if<Ref>(&s))
                    if (!repo.find(r->id))
                        out.push_back({ViolationKind::DanglingRef, id,
                                       "slot '" + feature + "' references missing object '" +
                                           r->id + "'"});

    // Per-object class/feature/type/multiplicity checks.
    for (const auto& [id, o] : repo.objects) {
        const metamodel::Class* cls = mm.findClass(o.className);
        if (!cls) {
            out.push_back({ViolationKind::UnknownClass, id,
                           "class '" + o.className + "' is not declared"});
            continue;
        }
        if (cls->abstract_)
            out.push_back({ViolationKind::AbstractInstance, id,
                           "class '" + o.className + "' is abstract"});

        auto features = metamodel::allFeatures(mm, o.className);
        auto featureOf = [&](const std::string& name) -> const OwnedFeature* {
            for (const auto& f : features)
                if (f.name() == name) return &f;
            return nullptr;
        };

        for (const auto& [slotName, v] : o.slots) {
            (void)v;
            if (!featureOf(slotName))
                out.push_back({ViolationKind::UnknownFeature, id,
                               "class '" + o.className + "' has no feature '" + slotName + "'"});
        }

        for (const auto& f : features) {
            const Value* v = nullptr;
            if (auto it = o.slots.find(f.name()); it != o.slots.end()) v = &it->second;
            const std::size_t n = v ? v->count() : 0;

            if (v && v->many && f.upper() != kUnbounded && f.upper() <= 1)
                out.push_back({ViolationKind::TypeMismatch, id,
                               "feature '" + f.name() + "' is single-valued but holds a list"});
            if (v && !v->many && f.isMany())
                out.push_back({ViolationKind::TypeMismatch, id,
                               "feature '" + f.name() + "' is many-valued but holds a scalar"});

            if (n < static_cast<std::size_t>(f.lower()) ||
                (f.upper() != kUnbounded && n > static_cast<std::size_t>(f.upper())))
                out.push_back({ViolationKind::Multiplicity, id,
                               "feature '" + f.name() + "' holds " + std::to_string(n) +
                                   " values, bounds are " + std::to_string(f.lower()) + ".." +
                                   (f.upper() == kUnbounded ? std::string("*")
                                                            : std::to_string(f.upper()))});
            if (!v) continue;

            for (const auto& s : v->items) {
                if (f.isReference()) {
                    const Ref* r = std::get_if<Ref>(&s);
                    if (!r) {
                        out.push_back({ViolationKind::TypeMismatch, id,
                                       "feature '" + f.name() + "' expects a reference, got " +
                                           scalarKindName(s)});
                        continue;
                    }
                    const Obj* target = repo.find(r->id);
                    if (!target) continue; // reported by the dangling pass
                    if (mm.findClass(target->className) &&
                        !metamodel::isSubtypeOf(mm, target->className, f.reference->target))
                        out.push_back({ViolationKind::TypeMismatch, id,
                                       "feature '" + f.name() + "' expects " +
                                           f.reference->target + ", got " + target->className +
                                           " ('" + r->id + "')"});
                } else if (!scalarMatchesType(mm, s, f.attribute->type)) {
                    out.push_back({ViolationKind::TypeMismatch, id,
                                   "feature '" + f.name() + "' expects " + f.attribute->type +
                                       ", got " + scalarKindName(s)});
                }
            }
        }
    }

    // Containment forest over objects of known classes.
    std::map<std::string, std::vector<std::string>> containers; // child -> container ids
    std::map<std::string, std::vector<std::string>> children;   // container -> child ids
    for (const auto& [id, o] : repo.objects) {
        for (const auto& f : containmentFeatures(mm, o))
            for (const auto& child : refIds(&o.slots.at(f.name()))) {
                if (!repo.find(child)) continue;
                containers[child].push_back(id);
                children[id].push_back(child);
            }
    }
    for (const auto& [id, o] : repo.objects) {
        if (!mm.findClass(o.className)) continue;
        const auto it = containers.find(id);
        const std::size_t n = it == containers.end() ? 0 : it->second.size();
        const bool root = isRoot(repo, o);
        if (n > 1) {
            std::string who;
            for (const auto& c : it->second) who += (who.empty() ? "" : ", ") + c;
            out.push_back({ViolationKind::MultiContainer, id,
                           "object has " + std::to_string(n) + " containers: " + who});
        } else if (root && n == 1) {
            out.push_back({ViolationKind::MultiContainer, id,
                           "object is both a resource root and contained by '" +
                               it->second.front() + "'"});
        } else if (!root && n == 0) {
            out.push_back({ViolationKind::MultiContainer, id,
                           "object has no container and is not a resource root"});
        }
    }
    // Cycle detection over containment edges.
    {
        std::map<std::string, int> color; // 0 white, 1 gray, 2 black
        std::set<std::string> reported;
        std::function<void(const std::string&)> dfs = [&](const std::string& id) {
            color[id] = 1;
            if (auto it = children.find(id); it != children.end())
                for (const auto& child : it->second) {
                    if (color[child] == 1) {
                        if (reported.insert(child).second)
                            out.push_back({ViolationKind::ContainmentCycle, child,
                                           "containment cycle through '" + child + "'"});
                    } else if (color[child] == 0) {
                        dfs(child);
                    }
                }
            color[id] = 2;
        };
        for (const auto& [id, o] : repo.objects)
            if (color[id] == 0) dfs(id);
    }

    return out;
}

namespace {

ordered_json scalarToJson(const Scalar& s) {
    switch (s.index()) {
    case 0: return std::get<bool>(s);
    case 1: return std::get<std::int64_t>(s);
    case 2: return std::get<double>(s);
    case 3: return std::get<std::string>(s);
    default: {
        ordered_json j;
        j["ref"] = std::get<Ref>(s).id;
        return j;
    }
    }
}

Scalar scalarFromJson(const json& j, const std::string& context) {
    if (j.is_boolean()) return j.get<bool>();
    if (j.is_number_integer() || j.is_number_unsigned()) return j.get<std::int64_t>();
    if (j.is_number_float()) return j.get<double>();
    if (j.is_string()) return j.get<std::string>();
    if (j.is_object()) {
        if (j.size() != 1 || !j.contains("ref") || !j.at("ref").is_string())
            throw ParseError(context + ": reference must be exactly {\"ref\": id}");
        return Ref{j.at("ref").get<std::string>()};
    }
    throw ParseError(context + ": unsupported slot value");
}

} // namespace

ordered_json toJson(const Repository& repo) {
    ordered_json j;
    j["metamodel"] = repo.metamodelName;
    j["release"] = repo.release;
    j["resources"] = ordered_json::array();
    for (const auto& [name, res] : repo.resources) {
        ordered_json jr;
        jr["name"] = name;
        jr["roots"] = res.roots;
        jr["objects"] = ordered_json::array();
        for (const auto& [id, o] : repo.objects) {
            if (o.resource != name) continue;
            ordered_json jo;
            jo["id"] = id;
            jo["class"] = o.className;
            ordered_json slots = ordered_json::object();
            for (const auto& [feature, v] : o.slots) {
                if (v.many) {
                    ordered_json arr = ordered_json::array();
                    for (const auto& s : v.items) arr.push_back(scalarToJson(s));
                    slots[feature] = std::move(arr);
                } else {
                    slots[feature] = scalarToJson(v.items.front());
                }
            }
            jo["slots"] = std::move(slots);
            jr["objects"].push_back(std::move(jo));
        }
        j["resources"].push_back(std::move(jr));
    }
    return j;
}

Repository modelFromJson(const json& j) {
    if (!j.is_object()) throw ParseError("model must be a JSON object");
    for (auto it = j.begin(); it != j.end(); ++it)
        if (it.key() != "metamodel" && it.key() != "release" && it.key() != "resources")
            throw ParseError("unexpected key '" + it.key() + "' in model");
    for (const char* k : {"metamodel", "release", "resources"})
        if (!j.contains(k)) throw ParseError(std::string("model missing key '") + k + "'");

    Repository repo;
    if (!j.at("metamodel").is_string()) throw ParseError("model key 'metamodel' must be a string");
    repo.metamodelName = j.at("metamodel").get<std::string>();
    if (!j.at("release").is_number_integer() && !j.at("release").is_number_unsigned())
        throw ParseError("model key 'release' must be an integer");
    repo.release = j.at("release").get<int>();
    if (!j.at("resources").is_array()) throw ParseError("model key 'resources' must be an array");

    for (const auto& jr : j.at("resources")) {
        if (!jr.is_object()) throw ParseError("resource must be a JSON object");
        for (auto it = jr.begin(); it != jr.end(); ++it)
            if (it.key() != "name" && it.key() != "roots" && it.key() != "objects")
                throw ParseError("unexpected key '" + it.key() + "' in resource");
        for (const char* k : {"name", "roots", "objects"})
            if (!jr.contains(k)) throw ParseError(std::string("resource missing key '") + k + "'");
        const std::string name = jr.at("name").get<std::string>();
        if (repo.resources.count(name)) throw ParseError("duplicate resource '" + name + "'");
        Resource& res = repo.ensureResource(name);

        for (const auto& jo : jr.at("objects")) {
            if (!jo.is_object()) throw ParseError("object must be a JSON object");
            for (auto it = jo.begin(); it != jo.end(); ++it)
                if (it.key() != "id" && it.key() != "class" && it.key() != "slots")
                    throw ParseError("unexpected key '" + it.key() + "' in object");
            for (const char* k : {"id", "class", "slots"})
                if (!jo.contains(k))
                    throw ParseError(std::string("object missing key '") + k + "'");
            Obj o;
            o.id = jo.at("id").get<std::string>();
            o.className = jo.at("class").get<std::string>();
            o.resource = name;
            if (repo.objects.count(o.id)) throw ParseError("duplicate object id '" + o.id + "'");
            if (!jo.at("slots").is_object())
                throw ParseError("object '" + o.id + "' slots must be an object");
            for (auto it = jo.at("slots").begin(); it != jo.at("slots").end(); ++it) {
                const std::string context = "slot " + o.id + "." + it.key();
                if (it.value().is_array()) {
                    std::vector<Scalar> items;
                    for (const auto& el : it.value()) {
                        if (el.is_array()) throw ParseError(context + ": nested lists not allowed");
                        items.push_back(scalarFromJson(el, context));
                    }
                    if (!items.empty()) o.slots[it.key()] = Value::list(std::move(items));
                } else {
                    o.slots[it.key()] = Value::single(scalarFromJson(it.value(), context));
                }
            }
            repo.objects.emplace(o.id, std::move(o));
        }

        for (const auto& root : jr.at("roots")) {
            if (!root.is_string()) throw ParseError("roots must be object ids");
            const std::string id = root.get<std::string>();
            const Obj* o = repo.find(id);
            if (!o || o->resource != name)
                throw ParseError("root '" + id + "' is not an object of resource '" + name + "'");
            res.roots.push_back(id);
        }
    }

    // Fresh-id counter continues after the largest parsed "o<n>" id.
    for (const auto& [id, o] : repo.objects) {
        (void)o;
        if (id.size() > 1 && id[0] == 'o' &&
            std::all_of(id.begin() + 1, id.end(), [](char c) { return c >= '0' && c <= '9'; })) {
            errno = 0;
            long long n = std::strtoll(id.c_str() + 1, nullptr, 10);
            if (errno == 0 && n >= repo.nextId) repo.nextId = n + 1;
        }
    }
    return repo;
}

std::string printModel(const Repository& repo) {
    return toJson(repo).dump(2) + "\n";
}

Repository parseModel(std::string_view text) {
    json j;
    try {
        j = json::parse(text);
    } catch (const json::exception& e) {
        throw ParseError(std::string("invalid JSON: ") + e.what());
    }
    return modelFromJson(j);
}

} // namespace coevo::model
