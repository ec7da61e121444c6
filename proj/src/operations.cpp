#include "coevo/operations.hpp"

#include <algorithm>
#include <set>

namespace coevo::operations {

using metamodel::Class;
using metamodel::kUnbounded;
using metamodel::Metamodel;
using metamodel::QualifiedName;
using metamodel::Reference;
using metamodel::ResolvedElement;
using model::Obj;
using model::Ref;
using model::Repository;
using model::Scalar;
using model::Value;

const char* to_string(ParamKind kind) {
    switch (kind) {
    case ParamKind::Element: return "ELEMENT";
    case ParamKind::ElementList: return "ELEMENT_LIST";
    case ParamKind::String: return "STRING";
    case ParamKind::Flag: return "FLAG";
    }
    return "?";
}

std::string OperationSignature::str() const {
    std::string out = name + "(";
    for (std::size_t i = 0; i < parameters.size(); ++i) {
        if (i) out += ",";
        out += parameters[i].name + ":" + to_string(parameters[i].kind);
    }
    return out + ")";
}

std::string to_string(const ConstraintViolation& v) {
    std::string out = v.operationName + " [" + v.constraintId + "]";
    if (!v.offending.type.empty()) out += " at " + v.offending.str();
    return out + ": " + v.message;
}

std::vector<std::string> toStrings(const std::vector<ConstraintViolation>& vs) {
    std::vector<std::string> out;
    out.reserve(vs.size());
    for (const auto& v : vs) out.push_back(to_string(v));
    return out;
}

void OperationRegistry::add(CoupledOperation op) { ops_.push_back(std::move(op)); }

const CoupledOperation* OperationRegistry::find(std::string_view name) const {
    for (const auto& op : ops_)
        if (op.signature.name == name) return &op;
    return nullptr;
}

namespace {

const ArgValue& requireArg(const Args& args, const std::string& name) {
    auto it = args.find(name);
    if (it == args.end()) throw BadArgumentsError("missing argument '" + name + "'");
    return it->second;
}

} // namespace

QualifiedName argElement(const Args& args, const std::string& name) {
    const auto* s = std::get_if<std::string>(&requireArg(args, name));
    if (!s) throw BadArgumentsError("argument '" + name + "' must be a qualified name");
    return QualifiedName::parse(*s);
}

std::vector<QualifiedName> argElementList(const Args& args, const std::string& name) {
    const auto* xs = std::get_if<std::vector<std::string>>(&requireArg(args, name));
    if (!xs) throw BadArgumentsError("argument '" + name + "' must be a list of qualified names");
    std::vector<QualifiedName> out;
    for (const auto& s : *xs) out.push_back(QualifiedName::parse(s));
    return out;
}

std::string argString(const Args& args, const std::string& name) {
    const auto* s = std::get_if<std::string>(&requireArg(args, name));
    if (!s) throw BadArgumentsError("argument '" + name + "' must be a string");
    return *s;
}

bool argFlag(const Args& args, const std::string& name, bool fallback) {
    auto it = args.find(name);
    if (it == args.end()) return fallback;
    const auto* b = std::get_if<bool>(&it->second);
    if (!b) throw BadArgumentsError("argument '" + name + "' must be a flag");
    return *b;
}

namespace {

bool isIdentifier(const std::string& s) {
    return !s.empty() && s.find('.') == std::string::npos;
}

ConstraintViolation violation(const std::string& op, const std::string& id,
                              const std::string& message, QualifiedName where = {}) {
    return {op, id, message, std::move(where)};
}

// Subtypes of `sup` in declaration order, excluding `sup` itself.
std::vector<std::string> subtypesOf(const Metamodel& mm, const std::string& sup) {
    std::vector<std::string> out;
    for (const auto& c : mm.classes)
        if (c.name != sup && metamodel::isSubtypeOf(mm, c.name, sup)) out.push_back(c.name);
    return out;
}

std::vector<std::string> directSubclassesOf(const Metamodel& mm, const std::string& sup) {
    std::vector<std::string> out;
    for (const auto& c : mm.classes)
        if (std::find(c.superTypes.begin(), c.superTypes.end(), sup) != c.superTypes.end())
            out.push_back(c.name);
    return out;
}

// A feature name is free on a class hierarchy when neither the class nor any
// of its subtypes can see a feature of that name; `ignore` lists features
// that are about to be deleted and do not count as clashes.
bool featureNameFree(const Metamodel& mm, const std::string& className, const std::string& name,
                     const std::vector<QualifiedName>& ignore = {}) {
    std::vector<std::string> classes{className};
    auto subs = subtypesOf(mm, className);
    classes.insert(classes.end(), subs.begin(), subs.end());
    for (const auto& cls : classes) {
        if (auto f = metamodel::findFeature(mm, cls, name)) {
            bool ignored = false;
            for (const auto& qn : ignore)
                if (qn.type == f->owner && qn.feature == f->name()) ignored = true;
            if (!ignored) return false;
        }
    }
    return true;
}

// Instances whose class is `cls` or a subtype of it, in id order.
std::vector<std::string> instancesOfTree(const Repository& repo, const Metamodel& mm,
                                         const std::string& cls) {
    std::vector<std::string> out;
    for (const auto& [id, o] : repo.objects)
        if (mm.findClass(o.className) && metamodel::isSubtypeOf(mm, o.className, cls))
            out.push_back(id);
    return out;
}

} // namespace

void applyRenameMigration(Repository& repo, const Metamodel& before,
                          const QualifiedName& element, const std::string& newName) {
    ResolvedElement el = metamodel::resolve(before, element);
    switch (el.kind) {
    case ResolvedElement::Kind::Class: {
        for (auto& [id, o] : repo.objects)
            if (o.className == el.cls->name) o.className = newName;
        return;
    }
    case ResolvedElement::Kind::Attribute:
    case ResolvedElement::Kind::Reference: {
        const std::string owner = el.cls->name;
        const std::string oldName = el.attribute ? el.attribute->name : el.reference->name;
        for (const auto& id : instancesOfTree(repo, before, owner)) {
            Obj& o = repo.get(id);
            auto it = o.slots.find(oldName);
            if (it == o.slots.end()) continue;
            Value v = std::move(it->second);
            o.slots.erase(it);
            o.slots[newName] = std::move(v);
        }
        return;
    }
    case ResolvedElement::Kind::Literal: {
        // Remap stored literal values of every attribute typed by the enum.
        const std::string enumName = el.enm->name;
        for (const auto& c : before.classes) {
            for (const auto& a : c.attributes) {
                if (a.type != enumName) continue;
                for (const auto& id : instancesOfTree(repo, before, c.name)) {
                    Obj& o = repo.get(id);
                    auto it = o.slots.find(a.name);
                    if (it == o.slots.end()) continue;
                    for (auto& s : it->second.items)
                        if (auto* lit = std::get_if<std::string>(&s); lit && *lit == el.literal)
                            *lit = newName;
                }
            }
        }
        return;
    }
    case ResolvedElement::Kind::Enum:
        return; // slot values carry literal names only
    }
}

namespace {

// ---- Rename ---------------------------------------------------------------

std::vector<ConstraintViolation> renameConstraints(const Metamodel& mm, const Args& args) {
    const std::string op = "Rename";
    std::vector<ConstraintViolation> out;
    QualifiedName element = argElement(args, "element");
    const std::string newName = argString(args, "newName");

    ResolvedElement el;
    try {
        el = metamodel::resolve(mm, element);
    } catch (const NotFoundError& e) {
        out.push_back(violation(op, "element-not-found", e.what(), element));
        return out;
    }
    if (!isIdentifier(newName)) {
        out.push_back(violation(op, "new-name-invalid",
                                "'" + newName + "' is not a valid name", element));
        return out;
    }

    const std::string oldName = element.feature.empty() ? element.type : element.feature;
    if (newName == oldName) {
        out.push_back(
            violation(op, "identical-rename", "new name equals the current name", element));
        return out;
    }

    switch (el.kind) {
    case ResolvedElement::Kind::Class:
    case ResolvedElement::Kind::Enum:
        if (mm.findClass(newName) || mm.findEnum(newName))
            out.push_back(violation(op, "name-in-use",
                                    "a type named '" + newName + "' already exists", element));
        break;
    case ResolvedElement::Kind::Attribute:
    case ResolvedElement::Kind::Reference:
        if (!featureNameFree(mm, el.cls->name, newName, {element}))
            out.push_back(violation(op, "name-in-use",
                                    "feature name '" + newName +
                                        "' is already visible on the class hierarchy",
                                    element));
        break;
    case ResolvedElement::Kind::Literal:
        if (el.enm->hasLiteral(newName))
            out.push_back(violation(op, "name-in-use",
                                    "literal '" + newName + "' already exists", element));
        break;
    }
    return out;
}

// ---- ExtractSuperClass ----------------------------------------------------

std::vector<ConstraintViolation> extractSuperClassConstraints(const Metamodel& mm,
                                                              const Args& args) {
    const std::string op = "ExtractSuperClass";
    std::vector<ConstraintViolation> out;
    auto subClasses = argElementList(args, "subClasses");
    const std::string superName = argString(args, "superName");

    if (subClasses.empty())
        out.push_back(violation(op, "no-subclasses", "at least one subclass is required"));
    std::set<std::string> seen;
    for (const auto& qn : subClasses) {
        if (!qn.feature.empty() || !mm.findClass(qn.type)) {
            out.push_back(violation(op, "not-a-class",
                                    "'" + qn.str() + "' does not name a class", qn));
            continue;
        }
        if (!seen.insert(qn.type).second)
            out.push_back(violation(op, "duplicate-subclass",
                                    "class '" + qn.type + "' listed twice", qn));
    }
    if (!isIdentifier(superName))
        out.push_back(violation(op, "new-name-invalid", "'" + superName + "' is not a valid name"));
    else if (mm.findClass(superName) || mm.findEnum(superName))
        out.push_back(violation(op, "name-in-use",
                                "a type named '" + superName + "' already exists",
                                {superName, ""}));
    return out;
}

void extractSuperClassAdapt(Metamodel& mm, const Args& args) {
    auto subClasses = argElementList(args, "subClasses");
    const std::string superName = argString(args, "superName");
    Class super;
    super.name = superName;
    super.abstract_ = true;
    mm.classes.push_back(std::move(super));
    for (const auto& qn : subClasses) mm.findClass(qn.type)->superTypes.push_back(superName);
}

// ---- UniteReferences --------------------------------------------------------

std::vector<ConstraintViolation> uniteReferencesConstraints(const Metamodel& mm,
                                                            const Args& args) {
    const std::string op = "UniteReferences";
    std::vector<ConstraintViolation> out;
    auto refs = argElementList(args, "references");
    const std::string unitedName = argString(args, "unitedName");

    if (refs.size() < 2) {
        out.push_back(violation(op, "too-few-references", "at least two references are required"));
        return out;
    }
    std::vector<const Reference*> resolved;
    std::string owner;
    std::set<std::string> seen;
    for (const auto& qn : refs) {
        ResolvedElement el;
        try {
            el = metamodel::resolve(mm, qn);
        } catch (const NotFoundError& e) {
            out.push_back(violation(op, "reference-not-found", e.what(), qn));
            continue;
        }
        if (el.kind != ResolvedElement::Kind::Reference) {
            out.push_back(
                violation(op, "not-a-reference", "'" + qn.str() + "' is not a reference", qn));
            continue;
        }
        if (!seen.insert(qn.str()).second)
            out.push_back(violation(op, "duplicate-reference",
                                    "reference '" + qn.str() + "' listed twice", qn));
        if (owner.empty())
            owner = el.cls->name;
        else if (owner != el.cls->name)
            out.push_back(violation(op, "different-classes",
                                    "references must be declared on the same class", qn));
        resolved.push_back(el.reference);
    }
    if (!out.empty()) return out;

    for (const auto* r : resolved)
        if (r->containment != resolved.front()->containment) {
            out.push_back(violation(op, "mixed-containment",
                                    "references disagree on containment", refs.front()));
            return out;
        }

    // Most specific common supertype of the targets.
    std::vector<std::string> candidates;
    for (const auto& c : mm.classes) {
        bool common = true;
        for (const auto* r : resolved)
            if (!metamodel::isSubtypeOf(mm, r->target, c.name)) common = false;
        if (common) candidates.push_back(c.name);
    }
    if (candidates.empty()) {
        out.push_back(violation(op, "no-common-supertype",
                                "reference targets share no common supertype", refs.front()));
        return out;
    }
    std::vector<std::string> minimal;
    for (const auto& c : candidates) {
        bool hasLower = false;
        for (const auto& d : candidates)
            if (d != c && metamodel::isSubtypeOf(mm, d, c)) hasLower = true;
        if (!hasLower) minimal.push_back(c);
    }
    if (minimal.size() > 1) {
        std::string names;
        for (const auto& n : minimal) names += (names.empty() ? "" : ", ") + n;
        out.push_back(violation(op, "ambiguous-common-supertype",
                                "most specific common supertype is ambiguous: " + names,
                                refs.front()));
    }

    if (!isIdentifier(unitedName))
        out.push_back(violation(op, "new-name-invalid", "'" + unitedName + "' is not a valid name"));
    else if (!featureNameFree(mm, owner, unitedName, refs))
        out.push_back(violation(op, "name-in-use",
                                "feature name '" + unitedName +
                                    "' is already visible on the class hierarchy",
                                {owner, unitedName}));
    return out;
}

std::string uniteTarget(const Metamodel& mm, const std::vector<QualifiedName>& refs) {
    std::vector<const Reference*> resolved;
    for (const auto& qn : refs) resolved.push_back(metamodel::resolve(mm, qn).reference);
    std::vector<std::string> candidates;
    for (const auto& c : mm.classes) {
        bool common = true;
        for (const auto* r : resolved)
            if (!metamodel::isSubtypeOf(mm, r->target, c.name)) common = false;
        if (common) candidates.push_back(c.name);
    }
    for (const auto& c : candidates) {
        bool hasLower = false;
        for (const auto& d : candidates)
            if (d != c && metamodel::isSubtypeOf(mm, d, c)) hasLower = true;
        if (!hasLower) return c;
    }
    throw Error("no common supertype"); // unreachable after constraints
}

void uniteReferencesAdapt(Metamodel& mm, const Args& args) {
    auto refs = argElementList(args, "references");
    const std::string unitedName = argString(args, "unitedName");
    const std::string owner = metamodel::resolve(mm, refs.front()).cls->name;
    const std::string target = uniteTarget(mm, refs);
    const bool containment = metamodel::resolve(mm, refs.front()).reference->containment;

    Class* cls = mm.findClass(owner);
    for (const auto& qn : refs)
        std::erase_if(cls->references, [&](const Reference& r) { return r.name == qn.feature; });
    Reference united;
    united.name = unitedName;
    united.target = target;
    united.containment = containment;
    united.lower = 0;
    united.upper = kUnbounded;
    cls->references.push_back(std::move(united));
}

void uniteReferencesMigrate(Repository& repo, const Metamodel& before, const Metamodel& after,
                            const Args& args, std::vector<std::string>&) {
    (void)after;
    auto refs = argElementList(args, "references");
    const std::string unitedName = argString(args, "unitedName");
    const std::string owner = metamodel::resolve(before, refs.front()).cls->name;

    for (const auto& id : instancesOfTree(repo, before, owner)) {
        Obj& o = repo.get(id);
        std::vector<Scalar> united;
        for (const auto& qn : refs) {
            auto it = o.slots.find(qn.feature);
            if (it == o.slots.end()) continue;
            united.insert(united.end(), it->second.items.begin(), it->second.items.end());
            o.slots.erase(it);
        }
        if (!united.empty()) o.slots[unitedName] = Value::list(std::move(united));
    }
}

// ---- PullUpFeature ----------------------------------------------------------

// Identical shape: same kind and same type/target/bounds/containment/opposite.
bool sameFeatureShape(const metamodel::OwnedFeature& a, const metamodel::OwnedFeature& b) {
    if (a.isReference() != b.isReference()) return false;
    if (a.isReference()) {
        const auto& x = *a.reference;
        const auto& y = *b.reference;
        return x.target == y.target && x.containment == y.containment && x.lower == y.lower &&
               x.upper == y.upper && x.opposite == y.opposite;
    }
    const auto& x = *a.attribute;
    const auto& y = *b.attribute;
    return x.type == y.type && x.lower == y.lower && x.upper == y.upper;
}

std::vector<ConstraintViolation> pullUpFeatureConstraints(const Metamodel& mm, const Args& args) {
    const std::string op = "PullUpFeature";
    std::vector<ConstraintViolation> out;
    QualifiedName featureQn = argElement(args, "feature");
    QualifiedName superQn = argElement(args, "superClass");

    ResolvedElement el;
    try {
        el = metamodel::resolve(mm, featureQn);
    } catch (const NotFoundError& e) {
        out.push_back(violation(op, "feature-not-found", e.what(), featureQn));
        return out;
    }
    if (el.kind != ResolvedElement::Kind::Attribute &&
        el.kind != ResolvedElement::Kind::Reference) {
        out.push_back(
            violation(op, "not-a-feature", "'" + featureQn.str() + "' is not a feature",
                      featureQn));
        return out;
    }
    if (!superQn.feature.empty() || !mm.findClass(superQn.type)) {
        out.push_back(violation(op, "not-a-class",
                                "'" + superQn.str() + "' does not name a class", superQn));
        return out;
    }
    const std::string declaring = el.cls->name;
    const std::string super = superQn.type;
    const std::string fname = featureQn.feature;
    if (declaring == super || !metamodel::isSubtypeOf(mm, declaring, super)) {
        out.push_back(violation(op, "not-a-subtype",
                                "'" + declaring + "' is not a proper subtype of '" + super + "'",
                                featureQn));
        return out;
    }
    if (metamodel::findFeature(mm, super, fname)) {
        out.push_back(violation(op, "name-in-use-on-super",
                                "'" + super + "' already sees a feature named '" + fname + "'",
                                superQn));
        return out;
    }

    // Merge mode: every direct subclass declares an identically-shaped
    // feature of that name. Otherwise the feature moves alone, which needs a
    // lower bound of 0 and no other declaring subtype.
    auto pulled = metamodel::findFeature(mm, declaring, fname);
    auto direct = directSubclassesOf(mm, super);
    bool merge = !direct.empty();
    for (const auto& sub : direct) {
        const Class* c = mm.findClass(sub);
        const bool declares = c->findAttribute(fname) || c->findReference(fname);
        if (!declares) {
            merge = false;
            continue;
        }
        auto f = metamodel::findFeature(mm, sub, fname);
        if (f->owner != sub || !sameFeatureShape(*pulled, *f)) merge = false;
    }
    if (merge) return out;

    if (pulled->lower() != 0) {
        out.push_back(violation(op, "lower-bound-requires-merge",
                                "feature has lower bound " + std::to_string(pulled->lower()) +
                                    " but not every subclass of '" + super + "' declares it",
                                featureQn));
    }
    for (const auto& sub : subtypesOf(mm, super)) {
        if (sub == declaring) continue;
        const Class* c = mm.findClass(sub);
        if (c->findAttribute(fname) || c->findReference(fname))
            out.push_back(violation(op, "sibling-declares-feature",
                                    "subclass '" + sub + "' declares a different feature named '" +
                                        fname + "'",
                                    {sub, fname}));
    }
    return out;
}

void pullUpFeatureAdapt(Metamodel& mm, const Args& args) {
    QualifiedName featureQn = argElement(args, "feature");
    QualifiedName superQn = argElement(args, "superClass");
    ResolvedElement el = metamodel::resolve(mm, featureQn);
    const std::string declaring = el.cls->name;
    const std::string fname = featureQn.feature;
    const std::string super = superQn.type;

    // In the merge case every direct subclass declaring the feature loses
    // its copy; the declaring class's copy moves up either way.
    const bool isRef = el.kind == ResolvedElement::Kind::Reference;
    metamodel::Attribute pulledAttr;
    Reference pulledRef;
    if (isRef)
        pulledRef = *el.reference;
    else
        pulledAttr = *el.attribute;

    std::vector<std::string> owners{declaring};
    for (const auto& sub : subtypesOf(mm, super)) {
        if (sub == declaring) continue;
        const Class* c = mm.findClass(sub);
        if (c->findAttribute(fname) || c->findReference(fname)) owners.push_back(sub);
    }
    for (const auto& owner : owners) {
        Class* c = mm.findClass(owner);
        std::erase_if(c->attributes, [&](const metamodel::Attribute& a) { return a.name == fname; });
        std::erase_if(c->references, [&](const Reference& r) { return r.name == fname; });
    }
    Class* s = mm.findClass(super);
    if (isRef)
        s->references.push_back(std::move(pulledRef));
    else
        s->attributes.push_back(std::move(pulledAttr));
}

// ---- ClassToAssociation -----------------------------------------------------

struct ClassToAssociationPlan {
    std::string cls;
    std::string sourceRef;
    std::string targetRef;
    std::string newRefName;
    std::string sourceClass;     // target of sourceRef
    std::string targetClass;     // target of targetRef
    std::string containerClass;  // owner of the containment reference to cls
    std::string containerRef;    // its name
};

std::vector<ConstraintViolation> classToAssociationCheck(const Metamodel& mm, const Args& args,
                                                         ClassToAssociationPlan* plan) {
    const std::string op = "ClassToAssociation";
    std::vector<ConstraintViolation> out;
    QualifiedName clsQn = argElement(args, "cls");
    const std::string sourceRef = argString(args, "sourceRef");
    const std::string targetRef = argString(args, "targetRef");
    const std::string newRefName = argString(args, "newRefName");

    if (!clsQn.feature.empty() || !mm.findClass(clsQn.type)) {
        out.push_back(
            violation(op, "not-a-class", "'" + clsQn.str() + "' does not name a class", clsQn));
        return out;
    }
    const std::string cls = clsQn.type;
    auto features = metamodel::allFeatures(mm, cls);
    const Reference* src = nullptr;
    const Reference* trg = nullptr;
    bool shapeOk = features.size() == 2;
    for (const auto& f : features) {
        if (!f.isReference()) {
            shapeOk = false;
            continue;
        }
        if (f.name() == sourceRef) src = f.reference;
        else if (f.name() == targetRef) trg = f.reference;
    }
    if (!shapeOk || !src || !trg || sourceRef == targetRef) {
        out.push_back(violation(op, "wrong-feature-shape",
                                "class '" + cls + "' must have exactly the two references '" +
                                    sourceRef + "' and '" + targetRef + "'",
                                clsQn));
        return out;
    }
    for (const Reference* r : {src, trg})
        if (r->upper != 1 || r->containment)
            out.push_back(violation(op, "endpoint-shape",
                                    "reference '" + r->name +
                                        "' must be single-valued and non-containment",
                                    {cls, r->name}));

    // Exactly one containment reference in the metamodel targets the class.
    std::vector<std::pair<std::string, std::string>> incoming;
    for (const auto& c : mm.classes)
        for (const auto& r : c.references)
            if (r.containment && r.target == cls) incoming.push_back({c.name, r.name});
    if (incoming.size() != 1)
        out.push_back(violation(op, "containment-count",
                                "expected exactly one containment reference targeting '" + cls +
                                    "', found " + std::to_string(incoming.size()),
                                clsQn));

    if (!isIdentifier(newRefName))
        out.push_back(
            violation(op, "new-name-invalid", "'" + newRefName + "' is not a valid name"));
    else if (!featureNameFree(mm, src->target, newRefName))
        out.push_back(violation(op, "name-in-use",
                                "feature name '" + newRefName + "' is already visible on '" +
                                    src->target + "'",
                                {src->target, newRefName}));

    if (out.empty() && plan) {
        plan->cls = cls;
        plan->sourceRef = sourceRef;
        plan->targetRef = targetRef;
        plan->newRefName = newRefName;
        plan->sourceClass = src->target;
        plan->targetClass = trg->target;
        plan->containerClass = incoming.front().first;
        plan->containerRef = incoming.front().second;
    }
    return out;
}

std::vector<ConstraintViolation> classToAssociationConstraints(const Metamodel& mm,
                                                               const Args& args) {
    return classToAssociationCheck(mm, args, nullptr);
}

ClassToAssociationPlan classToAssociationPlan(const Metamodel& mm, const Args& args) {
    ClassToAssociationPlan plan;
    auto violations = classToAssociationCheck(mm, args, &plan);
    if (!violations.empty()) throw Error("ClassToAssociation misapplied: " + to_string(violations.front()));
    return plan;
}

void classToAssociationAdapt(Metamodel& mm, const Args& args) {
    ClassToAssociationPlan plan = classToAssociationPlan(mm, args);
    Reference assoc;
    assoc.name = plan.newRefName;
    assoc.target = plan.targetClass;
    assoc.containment = false;
    assoc.lower = 0;
    assoc.upper = kUnbounded;
    mm.findClass(plan.sourceClass)->references.push_back(std::move(assoc));
    Class* container = mm.findClass(plan.containerClass);
    std::erase_if(container->references,
                  [&](const Reference& r) { return r.name == plan.containerRef; });
    std::erase_if(mm.classes, [&](const Class& c) { return c.name == plan.cls; });
}

void classToAssociationMigrate(Repository& repo, const Metamodel& before, const Metamodel& after,
                               const Args& args, std::vector<std::string>& warnings) {
    ClassToAssociationPlan plan = classToAssociationPlan(before, args);

    // Process instances in the containment order of their containers, then
    // any uncontained stragglers in id order.
    std::vector<std::string> ordered;
    std::set<std::string> listed;
    for (const auto& [id, o] : repo.objects) {
        if (!before.findClass(o.className) ||
            !metamodel::isSubtypeOf(before, o.className, plan.containerClass))
            continue;
        auto it = o.slots.find(plan.containerRef);
        if (it == o.slots.end()) continue;
        for (const auto& s : it->second.items)
            if (const Ref* r = std::get_if<Ref>(&s)) {
                const Obj* e = repo.find(r->id);
                if (e && e->className == plan.cls && listed.insert(r->id).second)
                    ordered.push_back(r->id);
            }
    }
    for (const auto& id : model::allInstances(repo, before, plan.cls, false))
        if (listed.insert(id).second) ordered.push_back(id);

    for (const auto& id : ordered) {
        const Obj& e = repo.get(id);
        const Value* src = model::storedSlot(repo, id, plan.sourceRef);
        const Value* trg = model::storedSlot(repo, id, plan.targetRef);
        const Ref* srcRef = src && !src->items.empty() ? std::get_if<Ref>(&src->items.front()) : nullptr;
        const Ref* trgRef = trg && !trg->items.empty() ? std::get_if<Ref>(&trg->items.front()) : nullptr;
        if (srcRef && trgRef && repo.find(srcRef->id) && repo.find(trgRef->id)) {
            model::writeSlot(repo, after, srcRef->id, plan.newRefName, model::WriteMode::Add,
                             Value::single(Ref{trgRef->id}));
        } else {
            warnings.push_back("dangling " + plan.cls + " instance '" + e.id +
                               "' dropped without creating a link");
        }
    }
    for (const auto& id : ordered) model::deleteInstance(repo, before, id);
}

// ---- EnumerationToSubClasses ------------------------------------------------

std::vector<ConstraintViolation> enumToSubClassesConstraints(const Metamodel& mm,
                                                             const Args& args) {
    const std::string op = "EnumerationToSubClasses";
    std::vector<ConstraintViolation> out;
    QualifiedName attrQn = argElement(args, "attribute");

    ResolvedElement el;
    try {
        el = metamodel::resolve(mm, attrQn);
    } catch (const NotFoundError& e) {
        out.push_back(violation(op, "attribute-not-found", e.what(), attrQn));
        return out;
    }
    if (el.kind != ResolvedElement::Kind::Attribute) {
        out.push_back(violation(op, "not-an-attribute",
                                "'" + attrQn.str() + "' is not an attribute", attrQn));
        return out;
    }
    const metamodel::Enumeration* e = mm.findEnum(el.attribute->type);
    if (!e) {
        out.push_back(violation(op, "not-an-enumeration",
                                "attribute type '" + el.attribute->type + "' is not an enumeration",
                                attrQn));
        return out;
    }
    if (el.attribute->lower != 1 || el.attribute->upper != 1)
        out.push_back(violation(op, "bounds-not-1-1",
                                "attribute bounds must be exactly 1..1", attrQn));
    const std::string declaring = el.cls->name;
    for (const auto& sub : directSubclassesOf(mm, declaring))
        out.push_back(violation(op, "has-subclasses",
                                "class '" + declaring + "' has subclass '" + sub + "'",
                                {declaring, ""}));
    for (const auto& lit : e->literals)
        if (mm.findClass(lit) || mm.findEnum(lit))
            out.push_back(violation(op, "literal-name-in-use",
                                    "literal '" + lit + "' clashes with an existing type",
                                    {e->name, lit}));
    return out;
}

void enumToSubClassesAdapt(Metamodel& mm, const Args& args) {
    QualifiedName attrQn = argElement(args, "attribute");
    ResolvedElement el = metamodel::resolve(mm, attrQn);
    const std::string declaring = el.cls->name;
    const std::string enumName = el.attribute->type;
    const auto literals = mm.findEnum(enumName)->literals;

    Class* d = mm.findClass(declaring);
    d->abstract_ = true;
    std::erase_if(d->attributes,
                  [&](const metamodel::Attribute& a) { return a.name == attrQn.feature; });
    for (const auto& lit : literals) {
        Class sub;
        sub.name = lit;
        sub.superTypes.push_back(declaring);
        mm.classes.push_back(std::move(sub));
    }
    bool used = false;
    for (const auto& c : mm.classes)
        for (const auto& a : c.attributes)
            if (a.type == enumName) used = true;
    if (!used)
        std::erase_if(mm.enumerations,
                      [&](const metamodel::Enumeration& en) { return en.name == enumName; });
}

void enumToSubClassesMigrate(Repository& repo, const Metamodel& before, const Metamodel& after,
                             const Args& args, std::vector<std::string>&) {
    (void)after;
    QualifiedName attrQn = argElement(args, "attribute");
    ResolvedElement el = metamodel::resolve(before, attrQn);
    const std::string declaring = el.cls->name;
    const metamodel::Enumeration* e = before.findEnum(el.attribute->type);

    for (const auto& id : model::allInstances(repo, before, declaring, false)) {
        Obj& o = repo.get(id);
        auto it = o.slots.find(attrQn.feature);
        const std::string* lit =
            it != o.slots.end() && !it->second.items.empty()
                ? std::get_if<std::string>(&it->second.items.front())
                : nullptr;
        if (!lit || !e->hasLiteral(*lit))
            throw Error("instance '" + id + "' has no valid '" + attrQn.feature +
                        "' literal to retype by");
        o.className = *lit;
        o.slots.erase(it);
    }
}

// ---- SubClassesToEnumeration --------------------------------------------------

std::vector<ConstraintViolation> subClassesToEnumConstraints(const Metamodel& mm,
                                                             const Args& args) {
    const std::string op = "SubClassesToEnumeration";
    std::vector<ConstraintViolation> out;
    QualifiedName superQn = argElement(args, "superClass");
    const std::string attributeName = argString(args, "attributeName");

    if (!superQn.feature.empty() || !mm.findClass(superQn.type)) {
        out.push_back(violation(op, "not-a-class",
                                "'" + superQn.str() + "' does not name a class", superQn));
        return out;
    }
    const Class* s = mm.findClass(superQn.type);
    if (!s->abstract_)
        out.push_back(violation(op, "not-abstract",
                                "class '" + s->name + "' must be abstract", superQn));

    auto subs = subtypesOf(mm, s->name);
    if (subs.empty())
        out.push_back(violation(op, "no-subclasses",
                                "class '" + s->name + "' has no subclasses", superQn));
    for (const auto& sub : subs) {
        const Class* c = mm.findClass(sub);
        if (c->superTypes != std::vector<std::string>{s->name})
            out.push_back(violation(op, "subclass-not-leaf",
                                    "subclass '" + sub + "' must extend exactly '" + s->name + "'",
                                    {sub, ""}));
        if (!c->attributes.empty() || !c->references.empty())
            out.push_back(violation(op, "subclass-declares-features",
                                    "subclass '" + sub + "' must not declare features",
                                    {sub, ""}));
        if (!directSubclassesOf(mm, sub).empty())
            out.push_back(violation(op, "subclass-not-leaf",
                                    "subclass '" + sub + "' has subclasses of its own",
                                    {sub, ""}));
    }
    const std::string enumName = s->name + "Kind";
    if (mm.findClass(enumName) || mm.findEnum(enumName))
        out.push_back(violation(op, "enum-name-in-use",
                                "a type named '" + enumName + "' already exists",
                                {enumName, ""}));
    if (!isIdentifier(attributeName))
        out.push_back(
            violation(op, "new-name-invalid", "'" + attributeName + "' is not a valid name"));
    else if (metamodel::findFeature(mm, s->name, attributeName))
        out.push_back(violation(op, "name-in-use",
                                "'" + s->name + "' already sees a feature named '" +
                                    attributeName + "'",
                                {s->name, attributeName}));
    return out;
}

void subClassesToEnumAdapt(Metamodel& mm, const Args& args) {
    QualifiedName superQn = argElement(args, "superClass");
    const std::string attributeName = argString(args, "attributeName");
    const std::string super = superQn.type;
    auto subs = subtypesOf(mm, super); // declaration order

    metamodel::Enumeration e;
    e.name = super + "Kind";
    e.literals = subs;
    mm.enumerations.push_back(std::move(e));

    Class* s = mm.findClass(super);
    metamodel::Attribute a;
    a.name = attributeName;
    a.type = super + "Kind";
    a.lower = 1;
    a.upper = 1;
    s->attributes.push_back(std::move(a));
    s->abstract_ = false;
    std::erase_if(mm.classes, [&](const Class& c) {
        return std::find(subs.begin(), subs.end(), c.name) != subs.end();
    });
}

void subClassesToEnumMigrate(Repository& repo, const Metamodel& before, const Metamodel& after,
                             const Args& args, std::vector<std::string>&) {
    (void)after;
    QualifiedName superQn = argElement(args, "superClass");
    const std::string attributeName = argString(args, "attributeName");
    auto subs = subtypesOf(before, superQn.type);
    std::set<std::string> subSet(subs.begin(), subs.end());

    for (auto& [id, o] : repo.objects) {
        (void)id;
        if (!subSet.count(o.className)) continue;
        o.slots[attributeName] = Value::single(o.className);
        o.className = superQn.type;
    }
}

OperationRegistry buildStandardRegistry() {
    OperationRegistry reg;

    reg.add({{"Rename",
              {{"element", ParamKind::Element}, {"newName", ParamKind::String}},
              "renames a class, feature, enumeration or literal; instance data follows"},
             renameConstraints,
             [](Metamodel& mm, const Args& args) {
                 metamodel::renameElement(mm, argElement(args, "element"),
                                          argString(args, "newName"));
             },
             [](Repository& repo, const Metamodel& before, const Metamodel&, const Args& args,
                std::vector<std::string>&) {
                 applyRenameMigration(repo, before, argElement(args, "element"),
                                      argString(args, "newName"));
             }});

    reg.add({{"ExtractSuperClass",
              {{"subClasses", ParamKind::ElementList}, {"superName", ParamKind::String}},
              "creates a new abstract common super class for the given classes"},
             extractSuperClassConstraints, extractSuperClassAdapt,
             [](Repository&, const Metamodel&, const Metamodel&, const Args&,
                std::vector<std::string>&) {}});

    reg.add({{"UniteReferences",
              {{"references", ParamKind::ElementList}, {"unitedName", ParamKind::String}},
              "unites references of one class into a single reference to their common supertype"},
             uniteReferencesConstraints, uniteReferencesAdapt, uniteReferencesMigrate});

    reg.add({{"PullUpFeature",
              {{"feature", ParamKind::Element}, {"superClass", ParamKind::Element}},
              "moves a feature from a subclass to a superclass, merging identical siblings"},
             pullUpFeatureConstraints, pullUpFeatureAdapt,
             [](Repository&, const Metamodel&, const Metamodel&, const Args&,
                std::vector<std::string>&) {}});

    reg.add({{"ClassToAssociation",
              {{"cls", ParamKind::Element},
               {"sourceRef", ParamKind::String},
               {"targetRef", ParamKind::String},
               {"newRefName", ParamKind::String}},
              "replaces a link class by a direct association between its endpoints"},
             classToAssociationConstraints, classToAssociationAdapt, classToAssociationMigrate});

    reg.add({{"EnumerationToSubClasses",
              {{"attribute", ParamKind::Element}},
              "replaces an enumeration attribute with one subclass per literal"},
             enumToSubClassesConstraints, enumToSubClassesAdapt, enumToSubClassesMigrate});

    reg.add({{"SubClassesToEnumeration",
              {{"superClass", ParamKind::Element}, {"attributeName", ParamKind::String}},
              "replaces leaf subclasses with an enumeration attribute on the superclass"},
             subClassesToEnumConstraints, subClassesToEnumAdapt, subClassesToEnumMigrate});

    return reg;
}

} // namespace

const OperationRegistry& standardOperations() {
    static const OperationRegistry registry = buildStandardRegistry();
    return registry;
}

namespace {

void validateArgs(const OperationSignature& sig, const Args& args) {
    for (const auto& p : sig.parameters) {
        auto it = args.find(p.name);
        if (it == args.end()) {
            if (p.required) throw BadArgumentsError("missing argument '" + p.name + "'");
            continue;
        }
        switch (p.kind) {
        case ParamKind::Element:
            if (!std::holds_alternative<std::string>(it->second))
                throw BadArgumentsError("argument '" + p.name + "' must be a qualified name");
            metamodel::QualifiedName::parse(std::get<std::string>(it->second));
            break;
        case ParamKind::ElementList: {
            const auto* xs = std::get_if<std::vector<std::string>>(&it->second);
            if (!xs)
                throw BadArgumentsError("argument '" + p.name +
                                        "' must be a list of qualified names");
            for (const auto& s : *xs) metamodel::QualifiedName::parse(s);
            break;
        }
        case ParamKind::String:
            if (!std::holds_alternative<std::string>(it->second))
                throw BadArgumentsError("argument '" + p.name + "' must be a string");
            break;
        case ParamKind::Flag:
            if (!std::holds_alternative<bool>(it->second))
                throw BadArgumentsError("argument '" + p.name + "' must be a flag");
            break;
        }
    }
    for (const auto& [name, v] : args) {
        (void)v;
        bool known = false;
        for (const auto& p : sig.parameters)
            if (p.name == name) known = true;
        if (!known) throw BadArgumentsError("unknown argument '" + name + "'");
    }
}

} // namespace

std::vector<ConstraintViolation> checkApplicability(const std::string& opName, const Args& args,
                                                    const Metamodel& mm) {
    const CoupledOperation* op = standardOperations().find(opName);
    if (!op) throw UnknownOperationError("no operation named '" + opName + "'");
    validateArgs(op->signature, args);

    auto violations = op->constraints(mm, args);
    if (!violations.empty()) return violations;

    // Dry-run the adaptation; any invalidity of the result is a guard miss
    // reported as a violation rather than silently producing a broken
    // metamodel.
    Metamodel scratch = mm;
    try {
        op->adapt(scratch, args);
    } catch (const std::exception& e) {
        violations.push_back({opName, "adaptation-failed", e.what(), {}});
        return violations;
    }
    for (const auto& v : metamodel::validateMetamodel(scratch))
        violations.push_back({opName, "adapted-metamodel-invalid", metamodel::to_string(v), v.where});
    return violations;
}

} // namespace coevo::operations
