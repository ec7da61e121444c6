// Reflective instance-model layer: objects with slots, navigation (including
// inverse), deletion, and conformance checking against a metamodel.
//
// Conformance is NOT enforced on individual writes, only at transaction
// boundaries; coupled operations pass through nonconforming intermediate
// states. A Repository is a plain value: copy it to snapshot, assign to
// restore.

#pragma once

#include <cstdint>
#include <map>
#include <optional>
#include <set>
#include <string>
#include <string_view>
#include <variant>
#include <vector>

#include "coevo/errors.hpp"
#include "coevo/metamodel.hpp"

#include <nlohmann/json_fwd.hpp>

namespace coevo::model {

using metamodel::Metamodel;
using metamodel::QualifiedName;

// An object id stored in a slot. Wrapped so references are distinguishable
// from plain strings, mirroring the {"ref": id} JSON encoding.
struct Ref {
    std::string id;
    friend bool operator==(const Ref&, const Ref&) = default;
    friend auto operator<=>(const Ref&, const Ref&) = default;
};

using Scalar = std::variant<bool, std::int64_t, double, std::string, Ref>;

// A slot value: one scalar, or an ordered list for many-valued features.
// An empty list is never stored; it normalizes to an absent slot.
struct Value {
    bool many = false;
    std::vector<Scalar> items; // exactly one element when !many

    static Value single(Scalar s);
    static Value list(std::vector<Scalar> items);
    std::size_t count() const { return items.size(); }

    friend bool operator==(const Value&, const Value&) = default;
};

struct Obj {
    std::string id;
    std::string className;
    std::string resource; // owning resource name
    std::map<std::string, Value> slots;

    friend bool operator==(const Obj&, const Obj&) = default;
};

struct Resource {
    std::string name;
    std::vector<std::string> roots; // objects not contained anywhere

    friend bool operator==(const Resource&, const Resource&) = default;
};

enum class ViolationKind {
    TypeMismatch,
    Multiplicity,
    UnknownFeature,
    UnknownClass,
    AbstractInstance,
    DanglingRef,
    ContainmentCycle,
    MultiContainer,
};

const char* to_string(ViolationKind kind); // TYPE_MISMATCH, ...

struct Violation {
    ViolationKind kind;
    std::string where; // object id or qualified name
    std::string message;
};

std::string to_string(const Violation& v);
std::vector<std::string> toStrings(const std::vector<Violation>& vs);

struct Repository {
    std::string metamodelName;
    int release = 0;
    std::map<std::string, Resource> resources; // keyed by resource name
    std::map<std::string, Obj> objects;        // keyed by id, repository-wide unique
    std::int64_t nextId = 1;                   // fresh-id counter ("o<n>")

    const Obj* find(std::string_view id) const;
    Obj* find(std::string_view id);
    const Obj& get(std::string_view id) const; // UnknownObjectError
    Obj& get(std::string_view id);
    Resource& ensureResource(const std::string& name);
    std::string freshId();

    friend bool operator==(const Repository&, const Repository&) = default;
};

enum class WriteMode { Set, Add, Remove, Unset };

struct WriteResult {
    std::vector<std::string> warnings;
};

// Creates an object with empty slots; it becomes a root of `resource` until
// placed under a containment slot. Abstractness is not checked here.
std::string newInstance(Repository& repo, const Metamodel& mm, const std::string& resource,
                        const std::string& className);

// Stored value, or the empty list for unset many-valued features, or nullopt.
std::optional<Value> getSlot(const Repository& repo, const Metamodel& mm,
                             std::string_view objId, std::string_view feature);

// Raw stored slot without metamodel-aware defaulting; nullptr when unset.
const Value* storedSlot(const Repository& repo, std::string_view objId, std::string_view feature);

// Set replaces, Add appends, Remove drops the first occurrence (absent value
// is a warned no-op), Unset clears. When a containment slot acquires an
// object, that object ceases to be a resource root and leaves any previous
// container; a write that would make an object contain one of its own
// containers throws ContainmentCycleError. Opposite references are kept
// mutually consistent.
WriteResult writeSlot(Repository& repo, const Metamodel& mm, const std::string& objId,
                      const std::string& feature, WriteMode mode,
                      std::optional<Value> value = std::nullopt);

// Removes the object, its containment subtree, every slot mention of the
// deleted objects, and their root entries.
void deleteInstance(Repository& repo, const Metamodel& mm, const std::string& objId);

// All objects o (id order) with objId among o.slots[feature.feature], where
// o's class is a subtype of feature.type. Throws NotFoundError unless the
// qualified name resolves to a Reference.
std::vector<std::string> getInverse(const Repository& repo, const Metamodel& mm,
                                    std::string_view objId, const QualifiedName& feature);

std::vector<std::string> allInstances(const Repository& repo, const Metamodel& mm,
                                      const std::string& className, bool includeSubtypes);

// (containerId, featureName) of the containment slot holding objId, if any.
std::optional<std::pair<std::string, std::string>> containerOf(const Repository& repo,
                                                               const Metamodel& mm,
                                                               std::string_view objId);

// Empty iff every object instantiates a known non-abstract class, slots name
// known features with type-correct values, multiplicities are within bounds,
// no reference dangles, and containment forms a forest.
std::vector<Violation> checkConformance(const Repository& repo, const Metamodel& mm);

// Canonical JSON: resources sorted by name, objects by id, slot keys sorted;
// references wrapped in {"ref": id}; absent slots omitted.
nlohmann::ordered_json toJson(const Repository& repo);
Repository modelFromJson(const nlohmann::json& j);
std::string printModel(const Repository& repo); // dump(2) + trailing newline
Repository parseModel(std::string_view text);

} // namespace coevo::model
