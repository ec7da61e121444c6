#include "coevo/engine.hpp"

#include <nlohmann/json.hpp>

namespace coevo::engine {

using history::Change;
using history::CompositeChange;
using history::History;
using history::OperationApplication;
using history::PrimitiveChange;
using history::PrimitiveKind;
using metamodel::Metamodel;
using model::Repository;
using nlohmann::ordered_json;

std::vector<std::string> MigrationContext::allInstances(const std::string& className,
                                                        bool includeSubtypes) const {
    return model::allInstances(repo_, before_, className, includeSubtypes);
}

namespace {

// Feature semantics (bounds, containment) are looked up in whichever
// metamodel knows the feature; mid-migration both old and new names are in
// play, so prefer the post-adaptation view.
const Metamodel& pickMetamodel(const Metamodel& before, const Metamodel& after,
                               const Repository& repo, const std::string& objId,
                               const std::string& feature) {
    if (const model::Obj* o = repo.find(objId))
        if (!metamodel::findFeature(after, o->className, feature) &&
            metamodel::findFeature(before, o->className, feature))
            return before;
    return after;
}

} // namespace

std::optional<model::Value> MigrationContext::getSlot(const std::string& objId,
                                                      const std::string& feature) const {
    return model::getSlot(repo_, pickMetamodel(before_, after_, repo_, objId, feature), objId,
                          feature);
}

model::WriteResult MigrationContext::writeSlot(const std::string& objId,
                                               const std::string& feature, model::WriteMode mode,
                                               std::optional<model::Value> value) {
    auto result = model::writeSlot(repo_, pickMetamodel(before_, after_, repo_, objId, feature),
                                   objId, feature, mode, std::move(value));
    for (auto& w : result.warnings) warnings_.push_back(w);
    return result;
}

std::string MigrationContext::newInstance(const std::string& resource,
                                          const std::string& className) {
    const Metamodel& mm = after_.findClass(className) ? after_ : before_;
    return model::newInstance(repo_, mm, resource, className);
}

void MigrationContext::deleteInstance(const std::string& objId) {
    const Metamodel& mm =
        repo_.find(objId) && after_.findClass(repo_.get(objId).className) ? after_ : before_;
    model::deleteInstance(repo_, mm, objId);
}

std::vector<std::string> MigrationContext::getInverse(
    const std::string& objId, const metamodel::QualifiedName& feature) const {
    const Metamodel& mm = after_.findClass(feature.type) ? after_ : before_;
    return model::getInverse(repo_, mm, objId, feature);
}

std::string MigrationContext::storeResult(const std::string& resource,
                                          const std::string& className,
                                          const std::map<std::string, model::Value>& slots) {
    if (!after_.findClass(className))
        throw UnknownClassError("result class '" + className +
                                "' is not part of the history's metamodel");
    std::string id = model::newInstance(repo_, after_, resource, className);
    for (const auto& [feature, value] : slots)
        model::writeSlot(repo_, after_, id, feature, model::WriteMode::Set, value);
    return id;
}

std::string MigrationContext::taskArg(const std::string& name, const std::string& fallback) const {
    auto it = options_.taskArgs.find(name);
    return it == options_.taskArgs.end() ? fallback : it->second;
}

void HookRegistry::registerHook(const std::string& name, HookBody body) {
    if (hooks_.count(name))
        throw DuplicateHookError("a hook named '" + name + "' is already registered");
    hooks_.emplace(name, std::move(body));
}

const HookBody* HookRegistry::find(const std::string& name) const {
    auto it = hooks_.find(name);
    return it == hooks_.end() ? nullptr : &it->second;
}

bool MigrationReport::rolledBack() const {
    return !steps.empty() && steps.back().status == StepStatus::RolledBack;
}

ordered_json toJson(const MigrationReport& report) {
    ordered_json j;
    j["steps"] = ordered_json::array();
    for (const auto& step : report.steps) {
        ordered_json js;
        js["change"] = step.changeRef;
        js["status"] = step.status == StepStatus::Ok ? "OK" : "ROLLED_BACK";
        js["warnings"] = step.warnings;
        js["violations"] = model::toStrings(step.violations);
        if (!step.failure.empty()) js["failure"] = step.failure;
        j["steps"].push_back(std::move(js));
    }
    j["finalRelease"] = report.finalRelease;
    return j;
}

std::string printReport(const MigrationReport& report) { return toJson(report).dump(2) + "\n"; }

TransactionResult runTransaction(Repository& repo, const Metamodel& mmBefore,
                                 const Metamodel& mmAfter, const std::function<void()>& body) {
    (void)mmBefore; // conformance is suspended inside the transaction
    const Repository snapshot = repo;
    TransactionResult result;
    try {
        body();
    } catch (const std::exception& e) {
        repo = snapshot;
        result.failure = e.what();
        return result;
    }
    result.violations = model::checkConformance(repo, mmAfter);
    if (!result.violations.empty()) {
        repo = snapshot;
        return result;
    }
    result.committed = true;
    return result;
}

namespace {

// Model-side effect of a bare primitive change. CREATE_* and inheritance
// edits are identity; deletions drop the corresponding slots/instances;
// renames behave like op_Rename's migration.
void defaultMigration(Repository& repo, const Metamodel& before, const PrimitiveChange& change) {
    switch (change.kind) {
    case PrimitiveKind::DeleteFeature: {
        if (!before.findClass(change.target.type)) return;
        for (const auto& id : model::allInstances(repo, before, change.target.type, true))
            repo.get(id).slots.erase(change.target.feature);
        return;
    }
    case PrimitiveKind::DeleteClass: {
        if (!before.findClass(change.target.type)) return;
        for (const auto& id : model::allInstances(repo, before, change.target.type, false))
            if (repo.find(id)) model::deleteInstance(repo, before, id);
        return;
    }
    case PrimitiveKind::Rename: {
        auto it = change.args.find("newName");
        if (it == change.args.end()) return;
        const auto* newName = std::get_if<std::string>(&it->second);
        if (!newName) return;
        operations::applyRenameMigration(repo, before, change.target, *newName);
        return;
    }
    default:
        return;
    }
}

std::string changeRefOf(int release, std::size_t ordinal, const Change& change) {
    return "release " + std::to_string(release) + ", change " + std::to_string(ordinal) + ": " +
           history::describeChange(change);
}

} // namespace

MigrationReport migrate(Repository& repo, const History& h, int fromRelease, int toRelease,
                        const HookRegistry& hooks, const MigrateOptions& options) {
    if (fromRelease < 0 || fromRelease > toRelease ||
        toRelease > static_cast<int>(h.releases.size()))
        throw BadArgumentsError("release range " + std::to_string(fromRelease) + ".." +
                                std::to_string(toRelease) + " is not valid for a history with " +
                                std::to_string(h.releases.size()) + " releases");
    if (repo.metamodelName != h.metamodelName)
        throw NonconformingInputError("model is stamped for metamodel '" + repo.metamodelName +
                                          "', history evolves '" + h.metamodelName + "'",
                                      {});

    // Resolve every hook and operation up front; nothing may mutate before
    // an unknown name is reported.
    for (int k = fromRelease; k < toRelease; ++k) {
        for (const auto& change : h.releases[k].changes) {
            if (const auto* composite = std::get_if<CompositeChange>(&change)) {
                if (composite->migration && !hooks.find(*composite->migration))
                    throw UnknownHookError("no custom migration registered as '" +
                                           *composite->migration + "'");
            } else if (const auto* op = std::get_if<OperationApplication>(&change)) {
                if (!operations::standardOperations().find(op->operationName))
                    throw UnknownOperationError("no operation named '" + op->operationName + "'");
            }
        }
    }

    Metamodel current = history::reconstructMetamodel(h, fromRelease);
    auto inputViolations = model::checkConformance(repo, current);
    if (!inputViolations.empty())
        throw NonconformingInputError("input model does not conform to release " +
                                          std::to_string(fromRelease),
                                      model::toStrings(inputViolations));

    MigrationReport report;
    for (int k = fromRelease; k < toRelease; ++k) {
        for (std::size_t i = 0; i < h.releases[k].changes.size(); ++i) {
            const Change& change = h.releases[k].changes[i];

            Metamodel next = current;
            MigrationStep step;
            step.changeRef = changeRefOf(k, i, change);

            std::vector<std::string> warnings;
            std::function<void()> body;
            if (const auto* p = std::get_if<PrimitiveChange>(&change)) {
                try {
                    history::applyPrimitive(next, *p);
                } catch (const std::exception& e) {
                    throw CorruptHistoryError(step.changeRef + ": " + e.what());
                }
                body = [&] { defaultMigration(repo, current, *p); };
            } else if (const auto* op = std::get_if<OperationApplication>(&change)) {
                const auto* coupled = operations::standardOperations().find(op->operationName);
                auto violations = operations::checkApplicability(op->operationName, op->args,
                                                                 current);
                if (!violations.empty())
                    throw CorruptHistoryError(step.changeRef +
                                              ": recorded operation no longer applies: " +
                                              operations::to_string(violations.front()));
                coupled->adapt(next, op->args);
                body = [&, coupled] {
                    coupled->migrateModel(repo, current, next, op->args, warnings);
                };
            } else {
                const auto* composite = std::get_if<CompositeChange>(&change);
                try {
                    for (const auto& child : composite->children)
                        history::applyPrimitive(next, child);
                } catch (const std::exception& e) {
                    throw CorruptHistoryError(step.changeRef + ": " + e.what());
                }
                body = [&, composite] {
                    if (composite->migration) {
                        MigrationContext ctx(repo, current, next, options, warnings);
                        (*hooks.find(*composite->migration))(ctx);
                    }
                };
            }

            TransactionResult tx = runTransaction(repo, current, next, body);
            step.warnings = std::move(warnings);
            if (!tx.committed) {
                step.status = StepStatus::RolledBack;
                step.violations = std::move(tx.violations);
                step.failure = std::move(tx.failure);
                report.steps.push_back(std::move(step));
                report.finalRelease = repo.release;
                return report;
            }
            report.steps.push_back(std::move(step));
            current = std::move(next);
        }
        repo.release = k + 1;
    }
    repo.release = toRelease;
    report.finalRelease = repo.release;
    return report;
}

} // namespace coevo::engine
