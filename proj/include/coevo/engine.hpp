// Transactional migrator: replays a history over a repository, running
// reusable-operation migrations and registered custom migrations, enforcing
// conformance only at coupled-operation boundaries.

#pragma once

#include <functional>
#include <map>
#include <optional>
#include <string>
#include <vector>

#include "coevo/history.hpp"
#include "coevo/metamodel.hpp"
#include "coevo/model.hpp"

namespace coevo::engine {

struct MigrateOptions {
    std::string resultResource = "result";
    std::string inputResource = "graph";
    std::string outputResource = "out";
    std::map<std::string, std::string> taskArgs;
};

// Helper context handed to custom migrations; wraps the repository together
// with the metamodels on both sides of the adaptation. Hooks must not retain
// it beyond their invocation.
class MigrationContext {
public:
    MigrationContext(model::Repository& repo, const metamodel::Metamodel& before,
                     const metamodel::Metamodel& after, const MigrateOptions& options,
                     std::vector<std::string>& warnings)
        : repo_(repo), before_(before), after_(after), options_(options), warnings_(warnings) {}

    std::vector<std::string> allInstances(const std::string& className,
                                          bool includeSubtypes = true) const;
    std::optional<model::Value> getSlot(const std::string& objId,
                                        const std::string& feature) const;
    model::WriteResult writeSlot(const std::string& objId, const std::string& feature,
                                 model::WriteMode mode,
                                 std::optional<model::Value> value = std::nullopt);
    std::string newInstance(const std::string& resource, const std::string& className);
    void deleteInstance(const std::string& objId);
    std::vector<std::string> getInverse(const std::string& objId,
                                        const metamodel::QualifiedName& feature) const;
    // Creates an instance as a root of `resource` with the given slots set.
    std::string storeResult(const std::string& resource, const std::string& className,
                            const std::map<std::string, model::Value>& slots);
    void warn(std::string message) { warnings_.push_back(std::move(message)); }

    model::Repository& repository() { return repo_; }
    const model::Repository& repository() const { return repo_; }
    const metamodel::Metamodel& metamodelBefore() const { return before_; }
    const metamodel::Metamodel& metamodelAfter() const { return after_; }
    const MigrateOptions& options() const { return options_; }
    std::string taskArg(const std::string& name, const std::string& fallback) const;

private:
    model::Repository& repo_;
    const metamodel::Metamodel& before_;
    const metamodel::Metamodel& after_;
    const MigrateOptions& options_;
    std::vector<std::string>& warnings_;
};

using HookBody = std::function<void(MigrationContext&)>;

class HookRegistry {
public:
    void registerHook(const std::string& name, HookBody body); // DuplicateHookError
    const HookBody* find(const std::string& name) const;

private:
    std::map<std::string, HookBody> hooks_;
};

enum class StepStatus { Ok, RolledBack };

struct MigrationStep {
    std::string changeRef;
    StepStatus status = StepStatus::Ok;
    std::vector<std::string> warnings;
    std::vector<model::Violation> violations; // populated on rollback
    std::string failure;                      // body exception, if any
};

struct MigrationReport {
    std::vector<MigrationStep> steps;
    int finalRelease = 0;

    bool rolledBack() const;
};

nlohmann::ordered_json toJson(const MigrationReport& report);
std::string printReport(const MigrationReport& report);

struct TransactionResult {
    bool committed = false;
    std::vector<model::Violation> violations;
    std::string failure;
};

// Runs body with conformance checks suspended, then checks the repository
// against mmAfter: commit on success, or restore the repository byte-
// identically to its starting state. A throwing body also rolls back, with
// the failure recorded.
TransactionResult runTransaction(model::Repository& repo, const metamodel::Metamodel& mmBefore,
                                 const metamodel::Metamodel& mmAfter,
                                 const std::function<void()>& body);

// Replays each change of releases (fromRelease, toRelease] in order, one
// transaction per coupled operation. PrimitiveChanges get the default
// migration (deletions drop slots/instances, renames re-key/retype),
// OperationApplications run their coupled migration, CompositeChanges apply
// their primitives to the metamodel and then run the named custom migration.
// A rollback aborts the run. Throws NonconformingInputError when the input
// repository does not conform to reconstruct(history, fromRelease), and
// UnknownHookError (before any mutation) for unregistered migration names.
MigrationReport migrate(model::Repository& repo, const history::History& h, int fromRelease,
                        int toRelease, const HookRegistry& hooks,
                        const MigrateOptions& options = {});

} // namespace coevo::engine
