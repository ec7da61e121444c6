#include "coevo/metamodel.hpp"

#include <algorithm>
#include <map>
#include <set>

#include <nlohmann/json.hpp>

namespace coevo::metamodel {

using nlohmann::json;
using nlohmann::ordered_json;

bool isPrimitiveType(std::string_view name) {
    return name == "String" || name == "Int" || name == "Bool" || name == "Float";
}

const Attribute* Class::findAttribute(std::string_view n) const {
    for (const auto& a : attributes)
        if (a.name == n) return &a;
    return nullptr;
}

const Reference* Class::findReference(std::string_view n) const {
    for (const auto& r : references)
        if (r.name == n) return &r;
    return nullptr;
}

Attribute* Class::findAttribute(std::string_view n) {
    return const_cast<Attribute*>(std::as_const(*this).findAttribute(n));
}

Reference* Class::findReference(std::string_view n) {
    return const_cast<Reference*>(std::as_const(*this).findReference(n));
}

bool Enumeration::hasLiteral(std::string_view n) const {
    return std::find(literals.begin(), literals.end(), n) != literals.end();
}

const Class* Metamodel::findClass(std::string_view n) const {
    for (const auto& c : classes)
        if (c.name == n) return &c;
    return nullptr;
}

Class* Metamodel::findClass(std::string_view n) {
    return const_cast<Class*>(std::as_const(*this).findClass(n));
}

const Enumeration* Metamodel::findEnum(std::string_view n) const {
    for (const auto& e : enumerations)
        if (e.name == n) return &e;
    return nullptr;
}

Enumeration* Metamodel::findEnum(std::string_view n) {
    return const_cast<Enumeration*>(std::as_const(*this).findEnum(n));
}

QualifiedName QualifiedName::parse(std::string_view text) {
    auto dot = text.find('.');
    if (text.empty() || dot == 0 || dot == text.size() - 1)
        throw ParseError("malformed qualified name: '" + std::string(text) + "'");
    if (dot == std::string_view::npos) return {std::string(text), ""};
    std::string_view rest = text.substr(dot + 1);
    if (rest.find('.') != std::string_view::npos)
        throw ParseError("malformed qualified name: '" + std::string(text) + "'");
    return {std::string(text.substr(0, dot)), std::string(rest)};
}

std::string QualifiedName::str() const {
    return feature.empty() ? type : type + "." + feature;
}

std::string to_string(const Violation& v) {
    return v.where.str() + ": " + v.message;
}

std::vector<std::string> toStrings(const std::vector<Violation>& vs) {
    std::vector<std::string> out;
    out.reserve(vs.size());
    for (const auto& v : vs) out.push_back(to_string(v));
    return out;
}

const std::string& OwnedFeature::name() const {
    return attribute ? attribute->name : reference->name;
}

int OwnedFeature::lower() const { return attribute ? attribute->lower : reference->lower; }
int OwnedFeature::upper() const { return attribute ? attribute->upper : reference->upper; }

namespace {

void checkBounds(std::vector<Violation>& out, const QualifiedName& where, int lower, int upper) {
    if (lower < 0)
        out.push_back({where, "lower bound must be non-negative"});
    if (upper != kUnbounded && upper < 1)
        out.push_back({where, "upper bound must be positive or UNBOUNDED"});
    if (upper != kUnbounded && lower > upper)
        out.push_back({where, "lower bound exceeds upper bound"});
}

// Collects visible feature names of a class, tolerating broken inheritance
// (unknown supers skipped, cycles cut by the visited set).
void collectFeatureOwners(const Metamodel& mm, const Class& cls,
                          std::set<std::string>& visitedClasses,
                          std::multimap<std::string, std::string>& namesToOwners) {
    if (!visitedClasses.insert(cls.name).second) return;
    for (const auto& super : cls.superTypes)
        if (const Class* sc = mm.findClass(super))
            collectFeatureOwners(mm, *sc, visitedClasses, namesToOwners);
    for (const auto& a : cls.attributes) namesToOwners.insert({a.name, cls.name});
    for (const auto& r : cls.references) namesToOwners.insert({r.name, cls.name});
}

} // namespace

std::vector<Violation> validateMetamodel(const Metamodel& mm) {
    std::vector<Violation> out;

    if (mm.name.empty())
        out.push_back({{"<metamodel>", ""}, "metamodel name must not be empty"});

    std::set<std::string> typeNames;
    for (const auto& c : mm.classes) {
        if (c.name.empty())
            out.push_back({{"<class>", ""}, "class name must not be empty"});
        else if (!typeNames.insert(c.name).second)
            out.push_back({{c.name, ""}, "duplicate type name"});
    }
    for (const auto& e : mm.enumerations) {
        if (e.name.empty())
            out.push_back({{"<enumeration>", ""}, "enumeration name must not be empty"});
        else if (!typeNames.insert(e.name).second)
            out.push_back({{e.name, ""}, "duplicate type name"});
    }

    for (const auto& e : mm.enumerations) {
        if (e.literals.empty())
            out.push_back({{e.name, ""}, "enumeration must declare at least one literal"});
        std::set<std::string> seen;
        for (const auto& lit : e.literals)
            if (!seen.insert(lit).second)
                out.push_back({{e.name, lit}, "duplicate enumeration literal"});
    }

    for (const auto& c : mm.classes) {
        for (const auto& super : c.superTypes)
            if (!mm.findClass(super))
                out.push_back({{c.name, ""}, "unresolved supertype '" + super + "'"});

        for (const auto& a : c.attributes) {
            QualifiedName qn{c.name, a.name};
            if (!isPrimitiveType(a.type) && !mm.findEnum(a.type))
                out.push_back({qn, "unresolved attribute type '" + a.type + "'"});
            checkBounds(out, qn, a.lower, a.upper);
        }
        for (const auto& r : c.references) {
            QualifiedName qn{c.name, r.name};
            const Class* target = mm.findClass(r.target);
            if (!target)
                out.push_back({qn, "unresolved reference target '" + r.target + "'"});
            checkBounds(out, qn, r.lower, r.upper);
            if (r.opposite && target) {
                const Reference* opp = target->findReference(*r.opposite);
                if (!opp) {
                    out.push_back({qn, "opposite '" + *r.opposite +
                                           "' not declared on target class '" + r.target + "'"});
                } else {
                    if (opp->target != c.name || !opp->opposite || *opp->opposite != r.name)
                        out.push_back({qn, "opposite '" + r.target + "." + *r.opposite +
                                               "' does not point back"});
                    if (r.containment && opp == &r)
                        out.push_back({qn, "containment reference must not be its own opposite"});
                }
            }
        }
    }

    // Inheritance cycles: peel classes whose supers are all settled; whatever
    // remains participates in a cycle. One violation per remaining group.
    {
        std::set<std::string> settled;
        bool progress = true;
        while (progress) {
            progress = false;
            for (const auto& c : mm.classes) {
                if (settled.count(c.name)) continue;
                bool ready = true;
                for (const auto& super : c.superTypes) {
                    if (mm.findClass(super) && !settled.count(super) && super != c.name) {
                        ready = false;
                        break;
                    }
                    if (super == c.name) ready = false;
                }
                if (ready) {
                    settled.insert(c.name);
                    progress = true;
                }
            }
        }
        std::set<std::string> cyclic;
        for (const auto& c : mm.classes)
            if (!settled.count(c.name)) cyclic.insert(c.name);
        std::set<std::string> reported;
        for (const auto& c : mm.classes) {
            if (!cyclic.count(c.name) || reported.count(c.name)) continue;
            // Gather the cycle reachable from c through cyclic classes.
            std::vector<std::string> group{c.name};
            reported.insert(c.name);
            for (std::size_t i = 0; i < group.size(); ++i) {
                const Class* g = mm.findClass(group[i]);
                if (!g) continue;
                for (const auto& super : g->superTypes)
                    if (cyclic.count(super) && !reported.count(super)) {
                        reported.insert(super);
                        group.push_back(super);
                    }
            }
            std::string names;
            for (const auto& n : group) names += (names.empty() ? "" : ", ") + n;
            out.push_back({{c.name, ""}, "inheritance cycle involving: " + names});
        }
    }

    // Feature name uniqueness per class, including inherited features.
    for (const auto& c : mm.classes) {
        std::set<std::string> visited;
        std::multimap<std::string, std::string> owners;
        collectFeatureOwners(mm, c, visited, owners);
        std::set<std::string> flagged;
        for (auto it = owners.begin(); it != owners.end(); ++it) {
            if (owners.count(it->first) > 1 && flagged.insert(it->first).second)
                out.push_back({{c.name, it->first},
                               "duplicate feature name (including inherited features)"});
        }
    }

    return out;
}

ResolvedElement resolve(const Metamodel& mm, const QualifiedName& qn) {
    if (const Class* c = mm.findClass(qn.type)) {
        if (qn.feature.empty()) return {ResolvedElement::Kind::Class, c, nullptr, nullptr, nullptr, ""};
        auto feature = findFeature(mm, qn.type, qn.feature);
        if (!feature)
            throw NotFoundError("no feature '" + qn.feature + "' on class '" + qn.type + "'");
        const Class* owner = mm.findClass(feature->owner);
        if (feature->attribute)
            return {ResolvedElement::Kind::Attribute, owner, nullptr, feature->attribute, nullptr, ""};
        return {ResolvedElement::Kind::Reference, owner, nullptr, nullptr, feature->reference, ""};
    }
    if (const Enumeration* e = mm.findEnum(qn.type)) {
        if (qn.feature.empty()) return {ResolvedElement::Kind::Enum, nullptr, e, nullptr, nullptr, ""};
        if (!e->hasLiteral(qn.feature))
            throw NotFoundError("no literal '" + qn.feature + "' in enumeration '" + qn.type + "'");
        return {ResolvedElement::Kind::Literal, nullptr, e, nullptr, nullptr, qn.feature};
    }
    throw NotFoundError("no class or enumeration named '" + qn.type + "'");
}

bool isSubtypeOf(const Metamodel& mm, std::string_view sub, std::string_view sup) {
    if (!mm.findClass(sub))
        throw NotFoundError("no class named '" + std::string(sub) + "'");
    if (!mm.findClass(sup))
        throw NotFoundError("no class named '" + std::string(sup) + "'");
    std::set<std::string, std::less<>> visited;
    std::vector<std::string> stack{std::string(sub)};
    while (!stack.empty()) {
        std::string cur = std::move(stack.back());
        stack.pop_back();
        if (cur == sup) return true;
        if (!visited.insert(cur).second) continue;
        if (const Class* c = mm.findClass(cur))
            for (const auto& super : c->superTypes) stack.push_back(super);
    }
    return false;
}

namespace {

void collectAllFeatures(const Metamodel& mm, const Class& cls,
                        std::set<std::string>& visitedClasses,
                        std::vector<OwnedFeature>& out) {
    if (!visitedClasses.insert(cls.name).second) return;
    for (const auto& super : cls.superTypes)
        if (const Class* sc = mm.findClass(super))
            collectAllFeatures(mm, *sc, visitedClasses, out);
    auto known = [&](std::string_view owner, std::string_view name) {
        return std::any_of(out.begin(), out.end(), [&](const OwnedFeature& f) {
            return f.owner == owner && f.name() == name;
        });
    };
    for (const auto& a : cls.attributes)
        if (!known(cls.name, a.name)) out.push_back({cls.name, &a, nullptr});
    for (const auto& r : cls.references)
        if (!known(cls.name, r.name)) out.push_back({cls.name, nullptr, &r});
}

} // namespace

std::vector<OwnedFeature> allFeatures(const Metamodel& mm, std::string_view className) {
    const Class* c = mm.findClass(className);
    if (!c) throw NotFoundError("no class named '" + std::string(className) + "'");
    std::set<std::string> visited;
    std::vector<OwnedFeature> out;
    collectAllFeatures(mm, *c, visited, out);
    return out;
}

std::optional<OwnedFeature> findFeature(const Metamodel& mm, std::string_view className,
                                        std::string_view featureName) {
    if (!mm.findClass(className)) return std::nullopt;
    for (const auto& f : allFeatures(mm, className))
        if (f.name() == featureName) return f;
    return std::nullopt;
}

void renameElement(Metamodel& mm, const QualifiedName& element, const std::string& newName) {
    ResolvedElement el = resolve(mm, element);
    switch (el.kind) {
    case ResolvedElement::Kind::Class: {
        const std::string oldName = el.cls->name;
        for (auto& c : mm.classes) {
            for (auto& super : c.superTypes)
                if (super == oldName) super = newName;
            for (auto& r : c.references)
                if (r.target == oldName) r.target = newName;
        }
        mm.findClass(oldName)->name = newName;
        return;
    }
    case ResolvedElement::Kind::Enum: {
        const std::string oldName = el.enm->name;
        for (auto& c : mm.classes)
            for (auto& a : c.attributes)
                if (a.type == oldName) a.type = newName;
        mm.findEnum(oldName)->name = newName;
        return;
    }
    case ResolvedElement::Kind::Attribute:
        mm.findClass(el.cls->name)->findAttribute(el.attribute->name)->name = newName;
        return;
    case ResolvedElement::Kind::Reference: {
        Class* owner = mm.findClass(el.cls->name);
        Reference* ref = owner->findReference(el.reference->name);
        const std::string oldName = ref->name;
        // Fix the back-pointer on the opposite side before renaming.
        if (ref->opposite) {
            if (Class* target = mm.findClass(ref->target))
                if (Reference* opp = target->findReference(*ref->opposite))
                    if (opp->opposite && *opp->opposite == oldName) opp->opposite = newName;
        }
        ref->name = newName;
        return;
    }
    case ResolvedElement::Kind::Literal: {
        Enumeration* e = mm.findEnum(el.enm->name);
        for (auto& lit : e->literals)
            if (lit == el.literal) lit = newName;
        return;
    }
    }
}

ordered_json toJson(const Metamodel& mm) {
    ordered_json j;
    j["name"] = mm.name;
    j["classes"] = ordered_json::array();
    for (const auto& c : mm.classes) {
        ordered_json jc;
        jc["name"] = c.name;
        jc["abstract"] = c.abstract_;
        jc["superTypes"] = c.superTypes;
        jc["attributes"] = ordered_json::array();
        for (const auto& a : c.attributes) {
            ordered_json ja;
            ja["name"] = a.name;
            ja["type"] = a.type;
            ja["lower"] = a.lower;
            ja["upper"] = a.upper;
            jc["attributes"].push_back(std::move(ja));
        }
        jc["references"] = ordered_json::array();
        for (const auto& r : c.references) {
            ordered_json jr;
            jr["name"] = r.name;
            jr["target"] = r.target;
            jr["containment"] = r.containment;
            jr["lower"] = r.lower;
            jr["upper"] = r.upper;
            if (r.opposite)
                jr["opposite"] = *r.opposite;
            else
                jr["opposite"] = nullptr;
            jc["references"].push_back(std::move(jr));
        }
        j["classes"].push_back(std::move(jc));
    }
    j["enumerations"] = ordered_json::array();
    for (const auto& e : mm.enumerations) {
        ordered_json je;
        je["name"] = e.name;
        je["literals"] = e.literals;
        j["enumerations"].push_back(std::move(je));
    }
    return j;
}

namespace {

[[noreturn]] void badKey(const std::string& context, const std::string& key) {
    throw ParseError("unexpected key '" + key + "' in " + context);
}

void requireKeys(const json& j, const std::string& context,
                 std::initializer_list<const char*> keys) {
    if (!j.is_object()) throw ParseError(context + " must be a JSON object");
    for (auto it = j.begin(); it != j.end(); ++it) {
        bool ok = false;
        for (const char* k : keys)
            if (it.key() == k) ok = true;
        if (!ok) badKey(context, it.key());
    }
    for (const char* k : keys)
        if (!j.contains(k)) throw ParseError(context + " missing key '" + std::string(k) + "'");
}

std::string getString(const json& j, const char* key, const std::string& context) {
    if (!j.at(key).is_string())
        throw ParseError(context + " key '" + std::string(key) + "' must be a string");
    return j.at(key).get<std::string>();
}

int getInt(const json& j, const char* key, const std::string& context) {
    if (!j.at(key).is_number_integer() && !j.at(key).is_number_unsigned())
        throw ParseError(context + " key '" + std::string(key) + "' must be an integer");
    return j.at(key).get<int>();
}

bool getBool(const json& j, const char* key, const std::string& context) {
    if (!j.at(key).is_boolean())
        throw ParseError(context + " key '" + std::string(key) + "' must be a boolean");
    return j.at(key).get<bool>();
}

std::vector<std::string> getStringArray(const json& j, const char* key,
                                        const std::string& context) {
    if (!j.at(key).is_array())
        throw ParseError(context + " key '" + std::string(key) + "' must be an array");
    std::vector<std::string> out;
    for (const auto& v : j.at(key)) {
        if (!v.is_string()) throw ParseError(context + " key '" + std::string(key) +
                                             "' must contain only strings");
        out.push_back(v.get<std::string>());
    }
    return out;
}

} // namespace

Metamodel metamodelFromJson(const json& j) {
    requireKeys(j, "metamodel", {"name", "classes", "enumerations"});
    Metamodel mm;
    mm.name = getString(j, "name", "metamodel");
    for (const auto& jc : j.at("classes")) {
        requireKeys(jc, "class", {"name", "abstract", "superTypes", "attributes", "references"});
        Class c;
        c.name = getString(jc, "name", "class");
        c.abstract_ = getBool(jc, "abstract", "class " + c.name);
        c.superTypes = getStringArray(jc, "superTypes", "class " + c.name);
        for (const auto& ja : jc.at("attributes")) {
            requireKeys(ja, "attribute", {"name", "type", "lower", "upper"});
            Attribute a;
            a.name = getString(ja, "name", "attribute");
            a.type = getString(ja, "type", "attribute " + a.name);
            a.lower = getInt(ja, "lower", "attribute " + a.name);
            a.upper = getInt(ja, "upper", "attribute " + a.name);
            c.attributes.push_back(std::move(a));
        }
        for (const auto& jr : jc.at("references")) {
            requireKeys(jr, "reference",
                        {"name", "target", "containment", "lower", "upper", "opposite"});
            Reference r;
            r.name = getString(jr, "name", "reference");
            r.target = getString(jr, "target", "reference " + r.name);
            r.containment = getBool(jr, "containment", "reference " + r.name);
            r.lower = getInt(jr, "lower", "reference " + r.name);
            r.upper = getInt(jr, "upper", "reference " + r.name);
            if (jr.at("opposite").is_null())
                r.opposite = std::nullopt;
            else
                r.opposite = getString(jr, "opposite", "reference " + r.name);
            c.references.push_back(std::move(r));
        }
        mm.classes.push_back(std::move(c));
    }
    for (const auto& je : j.at("enumerations")) {
        requireKeys(je, "enumeration", {"name", "literals"});
        Enumeration e;
        e.name = getString(je, "name", "enumeration");
        e.literals = getStringArray(je, "literals", "enumeration " + e.name);
        mm.enumerations.push_back(std::move(e));
    }
    return mm;
}

std::string printMetamodel(const Metamodel& mm) {
    return toJson(mm).dump(2) + "\n";
}

Metamodel parseMetamodel(std::string_view text) {
    json j;
    try {
        j = json::parse(text);
    } catch (const json::exception& e) {
        throw ParseError(std::string("invalid JSON: ") + e.what());
    }
    return metamodelFromJson(j);
}

} // namespace coevo::metamodel
