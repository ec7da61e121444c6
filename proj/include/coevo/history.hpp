// Explicit history model: releases of recorded changes (primitive metamodel
// changes, reusable-operation applications, custom-migration attachments) and
// reconstruction of the metamodel at any release.
//
// Release indexing: reconstructMetamodel(h, k) applies the changes of the
// first k releases to the baseline snapshot, so k counts applied releases
// (0 = baseline, releases.size() = head including an open release). A model
// stamped with release k conforms to reconstructMetamodel(h, k).

#pragma once

#include <cstdint>
#include <map>
#include <optional>
#include <string>
#include <string_view>
#include <variant>
#include <vector>

#include "coevo/metamodel.hpp"
#include "coevo/operations.hpp"

#include <nlohmann/json_fwd.hpp>

namespace coevo::history {

enum class PrimitiveKind {
    CreateClass,
    DeleteClass,
    CreateAttribute,
    CreateReference,
    DeleteFeature,
    Rename,
    SetProperty,
    AddSuper,
    RemoveSuper,
    CreateEnum,
    DeleteEnum,
};

const char* to_string(PrimitiveKind kind); // CREATE_CLASS, ...
PrimitiveKind primitiveKindFromString(std::string_view text);

using ArgScalar = std::variant<bool, std::int64_t, std::string, std::vector<std::string>>;

// Argument conventions per kind:
//   CREATE_CLASS      target=<name>            args: abstract?
//   DELETE_CLASS      target=<class>
//   CREATE_ATTRIBUTE  target=<class>           args: name, type, lower, upper
//   CREATE_REFERENCE  target=<class>           args: name, target, containment, lower, upper,
//                                                    opposite?
//   DELETE_FEATURE    target=<class>.<feature>
//   RENAME            target=<element>         args: newName
//   SET_PROPERTY      target=<element>         args: any of abstract/type/target/containment/
//                                                    lower/upper/opposite
//   ADD_SUPER         target=<class>           args: super
//   REMOVE_SUPER      target=<class>           args: super
//   CREATE_ENUM       target=<name>            args: literals
//   DELETE_ENUM       target=<enum>
struct PrimitiveChange {
    PrimitiveKind kind;
    metamodel::QualifiedName target;
    std::map<std::string, ArgScalar> args;
};

struct OperationApplication {
    std::string operationName;
    operations::Args args;
};

// A span of primitive changes (possibly empty) with an attached custom
// migration; the degenerate empty-adaptation form carries only the hook name.
struct CompositeChange {
    std::vector<PrimitiveChange> children;
    std::optional<std::string> migration;
};

using Change = std::variant<PrimitiveChange, OperationApplication, CompositeChange>;

struct Release {
    std::vector<Change> changes;
    bool released = false;
};

struct History {
    std::string metamodelName;
    metamodel::Metamodel baseline;
    std::vector<Release> releases; // only the last release may be open
};

// History with mm as baseline snapshot and one open, empty release.
// Throws InvalidMetamodelError.
History createHistory(const metamodel::Metamodel& mm);

// Appends to the open head release after validating that the change applies
// to the head metamodel. Throws ClosedReleaseError, InapplicableChangeError,
// UnknownOperationError, BadArgumentsError.
void recordChange(History& h, Change change);

// Wraps changes [start, start+length) of the open release releaseIndex
// (all primitive, possibly length 0) into a CompositeChange carrying
// migrationName. Throws ClosedReleaseError (span closed) or SpanError.
void attachMigration(History& h, std::size_t releaseIndex, std::size_t start, std::size_t length,
                     const std::string& migrationName);

// Validates the head metamodel, closes the head, appends a fresh open
// release, and returns the closed index. Throws InvalidMetamodelError.
int releaseHead(History& h);

// Baseline with the changes of the first releaseCount releases applied.
// Throws CorruptHistoryError when a recorded change fails to apply.
metamodel::Metamodel reconstructMetamodel(const History& h, std::size_t releaseCount);

metamodel::Metamodel headMetamodel(const History& h);

// Applies one primitive change in place. Throws InapplicableChangeError.
void applyPrimitive(metamodel::Metamodel& mm, const PrimitiveChange& change);

std::string describeChange(const Change& change);

nlohmann::ordered_json toJson(const History& h);
History historyFromJson(const nlohmann::json& j);
std::string printHistory(const History& h); // dump(2) + trailing newline
History parseHistory(std::string_view text);

} // namespace coevo::history
