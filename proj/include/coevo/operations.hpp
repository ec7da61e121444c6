// Registry of reusable coupled operations: parameterized, constraint-guarded
// metamodel adaptations paired with model migrations.
//
// checkApplicability is the guard: when it returns no violations, the
// adaptation is guaranteed to produce a valid metamodel, and the coupled
// migration repairs any conforming model of the old metamodel into a
// conforming model of the new one. The engine wraps each application in a
// transaction.

#pragma once

#include <functional>
#include <map>
#include <string>
#include <string_view>
#include <variant>
#include <vector>

#include "coevo/metamodel.hpp"
#include "coevo/model.hpp"

namespace coevo::operations {

enum class ParamKind { Element, ElementList, String, Flag };

const char* to_string(ParamKind kind); // ELEMENT, ELEMENT_LIST, STRING, FLAG

struct Param {
    std::string name;
    ParamKind kind;
    bool required = true;
};

struct OperationSignature {
    std::string name;
    std::vector<Param> parameters;
    std::string description;

    std::string str() const; // "Name(param:KIND,...)"
};

// ELEMENT arguments carry qualified names as strings; ELEMENT_LIST a string
// vector; FLAG a bool.
using ArgValue = std::variant<bool, std::string, std::vector<std::string>>;
using Args = std::map<std::string, ArgValue>;

struct ConstraintViolation {
    std::string operationName;
    std::string constraintId;
    std::string message;
    metamodel::QualifiedName offending;
};

std::string to_string(const ConstraintViolation& v);
std::vector<std::string> toStrings(const std::vector<ConstraintViolation>& vs);

struct CoupledOperation {
    OperationSignature signature;
    // Empty result iff the adaptation may run. Never mutates anything.
    std::function<std::vector<ConstraintViolation>(const metamodel::Metamodel&, const Args&)>
        constraints;
    // In-place metamodel edit; assumes constraints passed.
    std::function<void(metamodel::Metamodel&, const Args&)> adapt;
    // In-place model migration from `before` to `after`.
    std::function<void(model::Repository&, const metamodel::Metamodel& before,
                       const metamodel::Metamodel& after, const Args&,
                       std::vector<std::string>& warnings)>
        migrateModel;
};

class OperationRegistry {
public:
    void add(CoupledOperation op);
    const CoupledOperation* find(std::string_view name) const;
    const std::vector<CoupledOperation>& all() const { return ops_; }

private:
    std::vector<CoupledOperation> ops_;
};

// The built-in library: Rename, ExtractSuperClass, UniteReferences,
// PullUpFeature, ClassToAssociation, EnumerationToSubClasses,
// SubClassesToEnumeration. Immutable after first use.
const OperationRegistry& standardOperations();

// Validates argument kinds against the signature (BadArgumentsError,
// UnknownOperationError), then evaluates the operation's constraints, then
// dry-runs the adaptation on a scratch copy and reports any resulting
// metamodel invalidity as violations.
std::vector<ConstraintViolation> checkApplicability(const std::string& opName, const Args& args,
                                                    const metamodel::Metamodel& mm);

// Typed argument access (BadArgumentsError on absence or wrong kind).
metamodel::QualifiedName argElement(const Args& args, const std::string& name);
std::vector<metamodel::QualifiedName> argElementList(const Args& args, const std::string& name);
std::string argString(const Args& args, const std::string& name);
bool argFlag(const Args& args, const std::string& name, bool fallback);

// Model-side effect of renaming: feature renames re-key instance slots,
// class renames retype instances, literal renames remap enum-valued slots.
// Shared by op_Rename and the RENAME primitive's default migration.
void applyRenameMigration(model::Repository& repo, const metamodel::Metamodel& before,
                          const metamodel::QualifiedName& element, const std::string& newName);

} // namespace coevo::operations
