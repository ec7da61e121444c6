// The Hello World task pack: graph fixtures (metamodels, models, histories)
// and the task suite implemented as custom migration hooks plus two
// reusable-operation histories.

#pragma once

#include <filesystem>
#include <map>
#include <optional>
#include <set>
#include <string>
#include <vector>

#include "coevo/engine.hpp"
#include "coevo/history.hpp"
#include "coevo/metamodel.hpp"
#include "coevo/model.hpp"

namespace coevo::helloworld {

// ---- Fixtures ---------------------------------------------------------------

// Graph{nodes: Node 0..* containment, edges: Edge 0..* containment},
// Node{name: String 0..1}, Edge{src: Node 0..1, trg: Node 0..1}.
metamodel::Metamodel graph1Metamodel();

// The Graph1 release after ExtractSuperClass/UniteReferences/PullUpFeature/
// Rename: Graph{gcs}, abstract GraphComponent{text}, Node, Edge.
metamodel::Metamodel graphEvolvedMetamodel();

// The Graph1 release after ClassToAssociation + Rename:
// Graph{nodes}, Node{text, linksTo}.
metamodel::Metamodel graph2Metamodel();

// IntResult, StringResult, Greeting, GreetingMessage, Person.
metamodel::Metamodel resultMetamodel();

// Shape{kind: Kind 1..1}, enum Kind{CIRCLE, SQUARE}.
metamodel::Metamodel shapesMetamodel();

// Nodes n1..n4 (named "n1".."n4"), edges e1:n1->n2, e2:n2->n3, e3:n3->n1,
// e4:n2->n2, e5: src=n3 with trg absent; all contained in Graph instance g.
model::Repository modelGA();

// Baseline plus the Result classes, so custom migrations can store results.
metamodel::Metamodel withResultClasses(const metamodel::Metamodel& mm);

// Fig. 4 history: the four reusable operations plus the MoveResult custom
// migration, released.
history::History histSimple();

// Fig. 5 history: ClassToAssociation plus Rename, released.
history::History histTopology();

// Canonical fixture file contents keyed by file name (graph1.metamodel.json,
// g_a.model.json, hist_simple.history.json, ...).
const std::map<std::string, std::string>& fixtureFiles();

// ---- Helpers ----------------------------------------------------------------

// Nodes reachable from `node` by a directed walk of length >= minLen over
// edges whose endpoints are both present; src navigation uses getInverse.
std::set<std::string> getReachable(const model::Repository& repo, const metamodel::Metamodel& mm,
                                   const std::string& nodeId, int minLen);
std::set<std::string> getReachable(engine::MigrationContext& ctx, const std::string& nodeId,
                                   int minLen);

// Registers every task hook: ConstantTransformation,
// ConstantTransformationReferences, ModelToText, CountNodes,
// CountLoopingEdges, CountIsolatedNodes, CountCircles, CountDanglingEdges,
// ReverseEdges, DeleteNodeWithName, InsertTransitiveEdges, MoveResult.
void registerHooks(engine::HookRegistry& hooks);

// ---- Task driver ------------------------------------------------------------

enum class TaskOutputKind { ModelJson, ResultJson, Text };

struct TaskSpec {
    std::string name;      // kebab-case task name
    std::string hook;      // custom migration, empty for history-driven tasks
    std::string historyFile; // fixture history, empty for hook-driven tasks
    bool needsInputModel = true;
    TaskOutputKind output = TaskOutputKind::ModelJson;
    // Hook tasks run over an empty metamodel adaptation; the release stamp of
    // the input is kept since the metamodel did not change.
    bool preserveRelease = true;
};

const std::vector<TaskSpec>& taskList();
const TaskSpec* findTask(const std::string& name);

struct TaskRun {
    model::Repository repo;
    engine::MigrationReport report;
    TaskOutputKind output;
    std::string primaryOutput; // file content: model JSON, result JSON, or text
};

// Runs a task end to end. Hook tasks build the degenerate one-composite
// history on the fly; migration tasks replay hist_simple/hist_topology
// (loaded from fixturesDir when given, built in otherwise). Throws
// NotFoundError for unknown tasks and BadArgumentsError when a required
// input model is missing. A rolled-back run returns with the report; the
// caller decides what to do with it.
TaskRun runTask(const std::string& taskName, std::optional<model::Repository> input,
                const std::map<std::string, std::string>& args,
                const std::optional<std::filesystem::path>& fixturesDir = std::nullopt);

} // namespace coevo::helloworld
