// Structural metamodeling kernel: metamodel definition, lookup and validity.
//
// A Metamodel is a flat package of classes and enumerations over a fixed
// primitive type set {String, Int, Bool, Float}. Metamodels are plain values;
// after construction or an adaptation step they are treated as immutable and
// may be shared read-only across threads.

#pragma once

#include <compare>
#include <cstdint>
#include <optional>
#include <string>
#include <string_view>
#include <vector>

#include "coevo/errors.hpp"

#include <nlohmann/json_fwd.hpp>

namespace coevo::metamodel {

// Distinguished upper bound meaning "no limit"; serialized as -1.
inline constexpr int kUnbounded = -1;

bool isPrimitiveType(std::string_view name); // String, Int, Bool, Float

struct Attribute {
    std::string name;
    std::string type; // primitive or enumeration name
    int lower = 0;
    int upper = 1;

    friend bool operator==(const Attribute&, const Attribute&) = default;
};

struct Reference {
    std::string name;
    std::string target; // class name
    bool containment = false;
    int lower = 0;
    int upper = 1;
    std::optional<std::string> opposite; // reference name on the target class

    friend bool operator==(const Reference&, const Reference&) = default;
};

struct Class {
    std::string name;
    bool abstract_ = false;
    std::vector<std::string> superTypes;
    std::vector<Attribute> attributes;
    std::vector<Reference> references;

    const Attribute* findAttribute(std::string_view name) const;
    const Reference* findReference(std::string_view name) const;
    Attribute* findAttribute(std::string_view name);
    Reference* findReference(std::string_view name);

    friend bool operator==(const Class&, const Class&) = default;
};

struct Enumeration {
    std::string name;
    std::vector<std::string> literals;

    bool hasLiteral(std::string_view name) const;

    friend bool operator==(const Enumeration&, const Enumeration&) = default;
};

struct Metamodel {
    std::string name;
    std::vector<Class> classes;
    std::vector<Enumeration> enumerations;

    const Class* findClass(std::string_view name) const;
    Class* findClass(std::string_view name);
    const Enumeration* findEnum(std::string_view name) const;
    Enumeration* findEnum(std::string_view name);

    friend bool operator==(const Metamodel&, const Metamodel&) = default;
};

// Dotted path "Class" or "Class.feature" (also "Enum" / "Enum.literal").
struct QualifiedName {
    std::string type;    // class or enumeration name
    std::string feature; // feature or literal name; empty for type-level names

    static QualifiedName parse(std::string_view text); // ParseError on bad shape
    std::string str() const;

    friend bool operator==(const QualifiedName&, const QualifiedName&) = default;
    friend auto operator<=>(const QualifiedName&, const QualifiedName&) = default;
};

struct Violation {
    QualifiedName where;
    std::string message;
};

std::string to_string(const Violation& v);
std::vector<std::string> toStrings(const std::vector<Violation>& vs);

// Empty iff all structural invariants hold (unique names, acyclic
// inheritance, resolvable targets/types, bounds, unique feature names
// including inherited ones, opposite consistency).
std::vector<Violation> validateMetamodel(const Metamodel& mm);

struct ResolvedElement {
    enum class Kind { Class, Enum, Attribute, Reference, Literal };
    Kind kind;
    const Class* cls = nullptr;       // Class, or declaring class for features
    const Enumeration* enm = nullptr; // Enum, or owning enum for literals
    const Attribute* attribute = nullptr;
    const Reference* reference = nullptr;
    std::string literal; // Literal only
};

// Features resolve including inherited ones; cls is the declaring class.
// Throws NotFoundError naming the unresolved segment.
ResolvedElement resolve(const Metamodel& mm, const QualifiedName& qn);

// Reflexive-transitive closure of superTypes. Throws NotFoundError.
bool isSubtypeOf(const Metamodel& mm, std::string_view sub, std::string_view sup);

// One entry per attribute or reference visible on a class.
struct OwnedFeature {
    std::string owner; // declaring class
    const Attribute* attribute = nullptr; // exactly one of attribute/reference set
    const Reference* reference = nullptr;

    const std::string& name() const;
    bool isReference() const { return reference != nullptr; }
    int lower() const;
    int upper() const;
    bool isMany() const { return upper() == kUnbounded || upper() > 1; }
};

// Inherited-first, declaration order, no duplicates. Throws NotFoundError.
std::vector<OwnedFeature> allFeatures(const Metamodel& mm, std::string_view className);

// Find a visible feature by name; nullopt when the class has no such feature
// (or the class itself is unknown).
std::optional<OwnedFeature> findFeature(const Metamodel& mm, std::string_view className,
                                        std::string_view featureName);

// Renames a class, feature, enumeration or literal, fixing every mention of
// the old name inside the metamodel (reference targets, superTypes, attribute
// types, opposite back-pointers). Throws NotFoundError. Shared by the Rename
// reusable operation and the RENAME primitive change.
void renameElement(Metamodel& mm, const QualifiedName& element, const std::string& newName);

// Canonical JSON: fixed key order, arrays in declaration order,
// UNBOUNDED as -1, unset opposite as null.
nlohmann::ordered_json toJson(const Metamodel& mm);
Metamodel metamodelFromJson(const nlohmann::json& j);
std::string printMetamodel(const Metamodel& mm); // dump(2) + trailing newline
Metamodel parseMetamodel(std::string_view text);

} // namespace coevo::metamodel
