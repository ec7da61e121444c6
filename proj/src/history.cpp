#include "coevo/history.hpp"

#include <algorithm>

#include <nlohmann/json.hpp>

namespace coevo::history {

using metamodel::Class;
using metamodel::Metamodel;
using metamodel::QualifiedName;
using nlohmann::json;
using nlohmann::ordered_json;

const char* to_string(PrimitiveKind kind) {
    switch (kind) {
    case PrimitiveKind::CreateClass: return "CREATE_CLASS";
    case PrimitiveKind::DeleteClass: return "DELETE_CLASS";
    case PrimitiveKind::CreateAttribute: return "CREATE_ATTRIBUTE";
    case PrimitiveKind::CreateReference: return "CREATE_REFERENCE";
    case PrimitiveKind::DeleteFeature: return "DELETE_FEATURE";
    case PrimitiveKind::Rename: return "RENAME";
    case PrimitiveKind::SetProperty: return "SET_PROPERTY";
    case PrimitiveKind::AddSuper: return "ADD_SUPER";
    case PrimitiveKind::RemoveSuper: return "REMOVE_SUPER";
    case PrimitiveKind::CreateEnum: return "CREATE_ENUM";
    case PrimitiveKind::DeleteEnum: return "DELETE_ENUM";
    }
    return "?";
}

PrimitiveKind primitiveKindFromString(std::string_view text) {
    static const std::pair<const char*, PrimitiveKind> table[] = {
        {"CREATE_CLASS", PrimitiveKind::CreateClass},
        {"DELETE_CLASS", PrimitiveKind::DeleteClass},
        {"CREATE_ATTRIBUTE", PrimitiveKind::CreateAttribute},
        {"CREATE_REFERENCE", PrimitiveKind::CreateReference},
        {"DELETE_FEATURE", PrimitiveKind::DeleteFeature},
        {"RENAME", PrimitiveKind::Rename},
        {"SET_PROPERTY", PrimitiveKind::SetProperty},
        {"ADD_SUPER", PrimitiveKind::AddSuper},
        {"REMOVE_SUPER", PrimitiveKind::RemoveSuper},
        {"CREATE_ENUM", PrimitiveKind::CreateEnum},
        {"DELETE_ENUM", PrimitiveKind::DeleteEnum},
    };
    for (const auto& [name, kind] : table)
        if (text == name) return kind;
    throw ParseError("unknown primitive change kind '" + std::string(text) + "'");
}

namespace {

[[noreturn]] void inapplicable(const std::string& message) {
    throw InapplicableChangeError(message, {});
}

std::string changeArgString(const PrimitiveChange& c, const std::string& name) {
    auto it = c.args.find(name);
    if (it == c.args.end())
        inapplicable(std::string(to_string(c.kind)) + " requires argument '" + name + "'");
    const auto* s = std::get_if<std::string>(&it->second);
    if (!s) inapplicable("argument '" + name + "' must be a string");
    return *s;
}

std::optional<std::string> changeArgStringOpt(const PrimitiveChange& c, const std::string& name) {
    auto it = c.args.find(name);
    if (it == c.args.end()) return std::nullopt;
    const auto* s = std::get_if<std::string>(&it->second);
    if (!s) inapplicable("argument '" + name + "' must be a string");
    return *s;
}

std::int64_t changeArgInt(const PrimitiveChange& c, const std::string& name) {
    auto it = c.args.find(name);
    if (it == c.args.end())
        inapplicable(std::string(to_string(c.kind)) + " requires argument '" + name + "'");
    const auto* v = std::get_if<std::int64_t>(&it->second);
    if (!v) inapplicable("argument '" + name + "' must be an integer");
    return *v;
}

bool changeArgBool(const PrimitiveChange& c, const std::string& name, bool fallback) {
    auto it = c.args.find(name);
    if (it == c.args.end()) return fallback;
    const auto* v = std::get_if<bool>(&it->second);
    if (!v) inapplicable("argument '" + name + "' must be a boolean");
    return *v;
}

std::vector<std::string> changeArgStrings(const PrimitiveChange& c, const std::string& name) {
    auto it = c.args.find(name);
    if (it == c.args.end())
        inapplicable(std::string(to_string(c.kind)) + " requires argument '" + name + "'");
    const auto* v = std::get_if<std::vector<std::string>>(&it->second);
    if (!v) inapplicable("argument '" + name + "' must be a list of strings");
    return *v;
}

Class* requireClass(Metamodel& mm, const QualifiedName& target) {
    if (!target.feature.empty())
        inapplicable("'" + target.str() + "' does not name a class");
    Class* c = mm.findClass(target.type);
    if (!c) inapplicable("no class named '" + target.type + "'");
    return c;
}

} // namespace

void applyPrimitive(Metamodel& mm, const PrimitiveChange& change) {
    switch (change.kind) {
    case PrimitiveKind::CreateClass: {
        if (!change.target.feature.empty())
            inapplicable("'" + change.target.str() + "' is not a plain class name");
        if (mm.findClass(change.target.type) || mm.findEnum(change.target.type))
            inapplicable("a type named '" + change.target.type + "' already exists");
        Class c;
        c.name = change.target.type;
        c.abstract_ = changeArgBool(change, "abstract", false);
        mm.classes.push_back(std::move(c));
        return;
    }
    case PrimitiveKind::DeleteClass: {
        requireClass(mm, change.target);
        std::erase_if(mm.classes, [&](const Class& c) { return c.name == change.target.type; });
        return;
    }
    case PrimitiveKind::CreateAttribute: {
        Class* c = requireClass(mm, change.target);
        metamodel::Attribute a;
        a.name = changeArgString(change, "name");
        a.type = changeArgString(change, "type");
        a.lower = static_cast<int>(changeArgInt(change, "lower"));
        a.upper = static_cast<int>(changeArgInt(change, "upper"));
        c->attributes.push_back(std::move(a));
        return;
    }
    case PrimitiveKind::CreateReference: {
        Class* c = requireClass(mm, change.target);
        metamodel::Reference r;
        r.name = changeArgString(change, "name");
        r.target = changeArgString(change, "target");
        r.containment = changeArgBool(change, "containment", false);
        r.lower = static_cast<int>(changeArgInt(change, "lower"));
        r.upper = static_cast<int>(changeArgInt(change, "upper"));
        r.opposite = changeArgStringOpt(change, "opposite");
        c->references.push_back(std::move(r));
        return;
    }
    case PrimitiveKind::DeleteFeature: {
        if (change.target.feature.empty())
            inapplicable("DELETE_FEATURE target must be Class.feature");
        Class* c = mm.findClass(change.target.type);
        if (!c) inapplicable("no class named '" + change.target.type + "'");
        if (metamodel::Reference* r = c->findReference(change.target.feature); r && r->opposite) {
            // Unhook the partner's back-pointer before the reference goes away.
            if (Class* t = mm.findClass(r->target))
                if (metamodel::Reference* opp = t->findReference(*r->opposite))
                    if (opp->opposite && *opp->opposite == r->name) opp->opposite = std::nullopt;
        }
        const std::size_t before = c->attributes.size() + c->references.size();
        std::erase_if(c->attributes, [&](const metamodel::Attribute& a) {
            return a.name == change.target.feature;
        });
        std::erase_if(c->references, [&](const metamodel::Reference& r) {
            return r.name == change.target.feature;
        });
        if (c->attributes.size() + c->references.size() == before)
            inapplicable("class '" + change.target.type + "' declares no feature '" +
                         change.target.feature + "'");
        return;
    }
    case PrimitiveKind::Rename: {
        try {
            metamodel::renameElement(mm, change.target, changeArgString(change, "newName"));
        } catch (const NotFoundError& e) {
            inapplicable(e.what());
        }
        return;
    }
    case PrimitiveKind::SetProperty: {
        metamodel::ResolvedElement el;
        try {
            el = metamodel::resolve(mm, change.target);
        } catch (const NotFoundError& e) {
            inapplicable(e.what());
        }
        for (const auto& [key, value] : change.args) {
            (void)value;
            if (el.kind == metamodel::ResolvedElement::Kind::Class) {
                Class* c = mm.findClass(el.cls->name);
                if (key == "abstract")
                    c->abstract_ = changeArgBool(change, key, c->abstract_);
                else
                    inapplicable("class has no settable property '" + key + "'");
            } else if (el.kind == metamodel::ResolvedElement::Kind::Attribute) {
                auto* a = mm.findClass(el.cls->name)->findAttribute(el.attribute->name);
                if (key == "type")
                    a->type = changeArgString(change, key);
                else if (key == "lower")
                    a->lower = static_cast<int>(changeArgInt(change, key));
                else if (key == "upper")
                    a->upper = static_cast<int>(changeArgInt(change, key));
                else
                    inapplicable("attribute has no settable property '" + key + "'");
            } else if (el.kind == metamodel::ResolvedElement::Kind::Reference) {
                auto* r = mm.findClass(el.cls->name)->findReference(el.reference->name);
                if (key == "target")
                    r->target = changeArgString(change, key);
                else if (key == "containment")
                    r->containment = changeArgBool(change, key, r->containment);
                else if (key == "lower")
                    r->lower = static_cast<int>(changeArgInt(change, key));
                else if (key == "upper")
                    r->upper = static_cast<int>(changeArgInt(change, key));
                else if (key == "opposite") {
                    auto v = changeArgString(change, key);
                    r->opposite = v.empty() ? std::nullopt : std::optional<std::string>(v);
                } else
                    inapplicable("reference has no settable property '" + key + "'");
            } else {
                inapplicable("SET_PROPERTY target must be a class, attribute or reference");
            }
        }
        return;
    }
    case PrimitiveKind::AddSuper: {
        Class* c = requireClass(mm, change.target);
        const std::string super = changeArgString(change, "super");
        if (std::find(c->superTypes.begin(), c->superTypes.end(), super) != c->superTypes.end())
            inapplicable("'" + super + "' is already a supertype of '" + c->name + "'");
        c->superTypes.push_back(super);
        return;
    }
    case PrimitiveKind::RemoveSuper: {
        Class* c = requireClass(mm, change.target);
        const std::string super = changeArgString(change, "super");
        auto it = std::find(c->superTypes.begin(), c->superTypes.end(), super);
        if (it == c->superTypes.end())
            inapplicable("'" + super + "' is not a supertype of '" + c->name + "'");
        c->superTypes.erase(it);
        return;
    }
    case PrimitiveKind::CreateEnum: {
        if (!change.target.feature.empty())
            inapplicable("'" + change.target.str() + "' is not a plain enumeration name");
        if (mm.findClass(change.target.type) || mm.findEnum(change.target.type))
            inapplicable("a type named '" + change.target.type + "' already exists");
        metamodel::Enumeration e;
        e.name = change.target.type;
        e.literals = changeArgStrings(change, "literals");
        mm.enumerations.push_back(std::move(e));
        return;
    }
    case PrimitiveKind::DeleteEnum: {
        if (!change.target.feature.empty() || !mm.findEnum(change.target.type))
            inapplicable("no enumeration named '" + change.target.str() + "'");
        std::erase_if(mm.enumerations, [&](const metamodel::Enumeration& e) {
            return e.name == change.target.type;
        });
        return;
    }
    }
}

std::string describeChange(const Change& change) {
    if (const auto* p = std::get_if<PrimitiveChange>(&change))
        return std::string(to_string(p->kind)) + " " + p->target.str();
    if (const auto* op = std::get_if<OperationApplication>(&change))
        return op->operationName;
    const auto& c = std::get<CompositeChange>(change);
    std::string out = "composite[" + std::to_string(c.children.size()) + " changes";
    if (c.migration) out += ", migration=" + *c.migration;
    return out + "]";
}

History createHistory(const Metamodel& mm) {
    auto violations = metamodel::validateMetamodel(mm);
    if (!violations.empty())
        throw InvalidMetamodelError("cannot create a history for an invalid metamodel",
                                    metamodel::toStrings(violations));
    History h;
    h.metamodelName = mm.name;
    h.baseline = mm;
    h.releases.push_back(Release{});
    return h;
}

Metamodel reconstructMetamodel(const History& h, std::size_t releaseCount) {
    if (releaseCount > h.releases.size())
        throw Error("release index " + std::to_string(releaseCount) + " out of range (0.." +
                    std::to_string(h.releases.size()) + ")");
    Metamodel mm = h.baseline;
    for (std::size_t k = 0; k < releaseCount; ++k) {
        for (const auto& change : h.releases[k].changes) {
            try {
                if (const auto* p = std::get_if<PrimitiveChange>(&change)) {
                    applyPrimitive(mm, *p);
                } else if (const auto* op = std::get_if<OperationApplication>(&change)) {
                    auto violations =
                        operations::checkApplicability(op->operationName, op->args, mm);
                    if (!violations.empty())
                        throw CorruptHistoryError("recorded operation no longer applies: " +
                                                  operations::to_string(violations.front()));
                    operations::standardOperations().find(op->operationName)->adapt(mm, op->args);
                } else {
                    for (const auto& child : std::get<CompositeChange>(change).children)
                        applyPrimitive(mm, child);
                }
            } catch (const CorruptHistoryError&) {
                throw;
            } catch (const std::exception& e) {
                throw CorruptHistoryError("release " + std::to_string(k) + ", " +
                                          describeChange(change) + ": " + e.what());
            }
        }
    }
    return mm;
}

Metamodel headMetamodel(const History& h) { return reconstructMetamodel(h, h.releases.size()); }

void recordChange(History& h, Change change) {
    if (h.releases.empty() || h.releases.back().released)
        throw ClosedReleaseError("the head release is closed");

    Metamodel head = headMetamodel(h);
    if (const auto* p = std::get_if<PrimitiveChange>(&change)) {
        Metamodel scratch = head;
        applyPrimitive(scratch, *p); // throws InapplicableChangeError
        auto violations = metamodel::validateMetamodel(scratch);
        if (!violations.empty())
            throw InapplicableChangeError("change would invalidate the metamodel",
                                          metamodel::toStrings(violations));
    } else if (const auto* op = std::get_if<OperationApplication>(&change)) {
        auto violations = operations::checkApplicability(op->operationName, op->args, head);
        if (!violations.empty())
            throw InapplicableChangeError("operation constraints violated",
                                          operations::toStrings(violations));
    } else {
        const auto& composite = std::get<CompositeChange>(change);
        Metamodel scratch = head;
        for (const auto& child : composite.children) applyPrimitive(scratch, child);
        auto violations = metamodel::validateMetamodel(scratch);
        if (!violations.empty())
            throw InapplicableChangeError("composite change would invalidate the metamodel",
                                          metamodel::toStrings(violations));
    }
    h.releases.back().changes.push_back(std::move(change));
}

void attachMigration(History& h, std::size_t releaseIndex, std::size_t start, std::size_t length,
                     const std::string& migrationName) {
    if (releaseIndex >= h.releases.size())
        throw SpanError("no release with index " + std::to_string(releaseIndex));
    Release& release = h.releases[releaseIndex];
    if (release.released)
        throw ClosedReleaseError("release " + std::to_string(releaseIndex) + " is closed");
    if (start > release.changes.size() || start + length > release.changes.size())
        throw SpanError("span " + std::to_string(start) + "+" + std::to_string(length) +
                        " exceeds the release's " + std::to_string(release.changes.size()) +
                        " changes");
    CompositeChange composite;
    composite.migration = migrationName;
    for (std::size_t i = start; i < start + length; ++i) {
        const auto* p = std::get_if<PrimitiveChange>(&release.changes[i]);
        if (!p)
            throw SpanError("span member " + std::to_string(i) +
                            " is not a primitive change; spans must be contiguous primitives");
        composite.children.push_back(*p);
    }
    release.changes.erase(release.changes.begin() + start,
                          release.changes.begin() + start + length);
    release.changes.insert(release.changes.begin() + start, Change(std::move(composite)));
}

int releaseHead(History& h) {
    if (h.releases.empty() || h.releases.back().released)
        throw ClosedReleaseError("the head release is already closed");
    Metamodel head = headMetamodel(h);
    auto violations = metamodel::validateMetamodel(head);
    if (!violations.empty())
        throw InvalidMetamodelError("refusing to release an invalid metamodel",
                                    metamodel::toStrings(violations));
    h.releases.back().released = true;
    h.releases.push_back(Release{});
    return static_cast<int>(h.releases.size()) - 2;
}

namespace {

ordered_json argScalarToJson(const ArgScalar& v) {
    switch (v.index()) {
    case 0: return std::get<bool>(v);
    case 1: return std::get<std::int64_t>(v);
    case 2: return std::get<std::string>(v);
    default: return std::get<std::vector<std::string>>(v);
    }
}

ArgScalar argScalarFromJson(const json& j, const std::string& context) {
    if (j.is_boolean()) return j.get<bool>();
    if (j.is_number_integer() || j.is_number_unsigned()) return j.get<std::int64_t>();
    if (j.is_string()) return j.get<std::string>();
    if (j.is_array()) {
        std::vector<std::string> xs;
        for (const auto& el : j) {
            if (!el.is_string()) throw ParseError(context + ": lists must contain strings");
            xs.push_back(el.get<std::string>());
        }
        return xs;
    }
    throw ParseError(context + ": unsupported argument value");
}

ordered_json opArgToJson(const operations::ArgValue& v) {
    switch (v.index()) {
    case 0: return std::get<bool>(v);
    case 1: return std::get<std::string>(v);
    default: return std::get<std::vector<std::string>>(v);
    }
}

operations::ArgValue opArgFromJson(const json& j, const std::string& context) {
    if (j.is_boolean()) return j.get<bool>();
    if (j.is_string()) return j.get<std::string>();
    if (j.is_array()) {
        std::vector<std::string> xs;
        for (const auto& el : j) {
            if (!el.is_string()) throw ParseError(context + ": lists must contain strings");
            xs.push_back(el.get<std::string>());
        }
        return xs;
    }
    throw ParseError(context + ": unsupported argument value");
}

ordered_json primitiveToJson(const PrimitiveChange& p, bool withType) {
    ordered_json j;
    if (withType) j["type"] = "primitive";
    j["kind"] = to_string(p.kind);
    j["target"] = p.target.str();
    ordered_json args = ordered_json::object();
    for (const auto& [name, v] : p.args) args[name] = argScalarToJson(v);
    j["args"] = std::move(args);
    return j;
}

PrimitiveChange primitiveFromJson(const json& j) {
    PrimitiveChange p;
    p.kind = primitiveKindFromString(j.at("kind").get<std::string>());
    p.target = QualifiedName::parse(j.at("target").get<std::string>());
    if (j.contains("args"))
        for (auto it = j.at("args").begin(); it != j.at("args").end(); ++it)
            p.args[it.key()] = argScalarFromJson(it.value(), "change argument " + it.key());
    return p;
}

} // namespace

ordered_json toJson(const History& h) {
    ordered_json j;
    j["metamodel"] = h.metamodelName;
    j["baseline"] = metamodel::toJson(h.baseline);
    j["releases"] = ordered_json::array();
    for (const auto& release : h.releases) {
        ordered_json jr;
        jr["released"] = release.released;
        jr["changes"] = ordered_json::array();
        for (const auto& change : release.changes) {
            if (const auto* p = std::get_if<PrimitiveChange>(&change)) {
                jr["changes"].push_back(primitiveToJson(*p, true));
            } else if (const auto* op = std::get_if<OperationApplication>(&change)) {
                ordered_json jc;
                jc["type"] = "operation";
                jc["name"] = op->operationName;
                ordered_json args = ordered_json::object();
                for (const auto& [name, v] : op->args) args[name] = opArgToJson(v);
                jc["args"] = std::move(args);
                jr["changes"].push_back(std::move(jc));
            } else {
                const auto& composite = std::get<CompositeChange>(change);
                ordered_json jc;
                jc["type"] = "composite";
                if (composite.migration)
                    jc["migration"] = *composite.migration;
                else
                    jc["migration"] = nullptr;
                jc["children"] = ordered_json::array();
                for (const auto& child : composite.children)
                    jc["children"].push_back(primitiveToJson(child, false));
                jr["changes"].push_back(std::move(jc));
            }
        }
        j["releases"].push_back(std::move(jr));
    }
    return j;
}

History historyFromJson(const json& j) {
    if (!j.is_object()) throw ParseError("history must be a JSON object");
    for (auto it = j.begin(); it != j.end(); ++it)
        if (it.key() != "metamodel" && it.key() != "baseline" && it.key() != "releases")
            throw ParseError("unexpected key '" + it.key() + "' in history");
    for (const char* k : {"metamodel", "baseline", "releases"})
        if (!j.contains(k)) throw ParseError(std::string("history missing key '") + k + "'");

    History h;
    h.metamodelName = j.at("metamodel").get<std::string>();
    h.baseline = metamodel::metamodelFromJson(j.at("baseline"));
    if (!j.at("releases").is_array()) throw ParseError("history 'releases' must be an array");
    for (const auto& jr : j.at("releases")) {
        Release release;
        if (!jr.is_object() || !jr.contains("released") || !jr.contains("changes"))
            throw ParseError("release must carry 'released' and 'changes'");
        release.released = jr.at("released").get<bool>();
        for (const auto& jc : jr.at("changes")) {
            const std::string type = jc.at("type").get<std::string>();
            if (type == "primitive") {
                release.changes.push_back(primitiveFromJson(jc));
            } else if (type == "operation") {
                OperationApplication op;
                op.operationName = jc.at("name").get<std::string>();
                if (jc.contains("args"))
                    for (auto it = jc.at("args").begin(); it != jc.at("args").end(); ++it)
                        op.args[it.key()] =
                            opArgFromJson(it.value(), "operation argument " + it.key());
                release.changes.push_back(std::move(op));
            } else if (type == "composite") {
                CompositeChange composite;
                if (jc.contains("migration") && !jc.at("migration").is_null())
                    composite.migration = jc.at("migration").get<std::string>();
                if (jc.contains("children"))
                    for (const auto& child : jc.at("children"))
                        composite.children.push_back(primitiveFromJson(child));
                release.changes.push_back(std::move(composite));
            } else {
                throw ParseError("unknown change type '" + type + "'");
            }
        }
        h.releases.push_back(std::move(release));
    }
    // Only the last release may be open.
    for (std::size_t i = 0; i + 1 < h.releases.size(); ++i)
        if (!h.releases[i].released)
            throw ParseError("release " + std::to_string(i) + " is open but not the last");
    return h;
}

std::string printHistory(const History& h) { return toJson(h).dump(2) + "\n"; }

History parseHistory(std::string_view text) {
    json j;
    try {
        j = json::parse(text);
    } catch (const json::exception& e) {
        throw ParseError(std::string("invalid JSON: ") + e.what());
    }
    return historyFromJson(j);
}

} // namespace coevo::history
