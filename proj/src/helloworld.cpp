#include "coevo/helloworld.hpp"

#include <algorithm>
#include <fstream>
#include <sstream>

namespace coevo::helloworld {

using engine::MigrationContext;
using metamodel::Attribute;
using metamodel::Class;
using metamodel::kUnbounded;
using metamodel::Metamodel;
using metamodel::QualifiedName;
using metamodel::Reference;
using model::Obj;
using model::Ref;
using model::Repository;
using model::Scalar;
using model::Value;
using model::WriteMode;

namespace {

Reference makeRef(std::string name, std::string target, bool containment, int lower, int upper) {
    Reference r;
    r.name = std::move(name);
    r.target = std::move(target);
    r.containment = containment;
    r.lower = lower;
    r.upper = upper;
    return r;
}

Attribute makeAttr(std::string name, std::string type, int lower, int upper) {
    Attribute a;
    a.name = std::move(name);
    a.type = std::move(type);
    a.lower = lower;
    a.upper = upper;
    return a;
}

Class makeClass(std::string name, bool abstract, std::vector<std::string> supers,
                std::vector<Attribute> attrs, std::vector<Reference> refs) {
    Class c;
    c.name = std::move(name);
    c.abstract_ = abstract;
    c.superTypes = std::move(supers);
    c.attributes = std::move(attrs);
    c.references = std::move(refs);
    return c;
}

} // namespace

Metamodel graph1Metamodel() {
    Metamodel mm;
    mm.name = "Graph1";
    mm.classes.push_back(makeClass("Graph", false, {}, {},
                                   {makeRef("nodes", "Node", true, 0, kUnbounded),
                                    makeRef("edges", "Edge", true, 0, kUnbounded)}));
    mm.classes.push_back(makeClass("Node", false, {}, {makeAttr("name", "String", 0, 1)}, {}));
    mm.classes.push_back(makeClass("Edge", false, {},
                                   {},
                                   {makeRef("src", "Node", false, 0, 1),
                                    makeRef("trg", "Node", false, 0, 1)}));
    return mm;
}

Metamodel graphEvolvedMetamodel() {
    Metamodel mm;
    mm.name = "Graph1";
    mm.classes.push_back(makeClass("Graph", false, {}, {},
                                   {makeRef("gcs", "GraphComponent", true, 0, kUnbounded)}));
    mm.classes.push_back(makeClass("Node", false, {"GraphComponent"}, {}, {}));
    mm.classes.push_back(makeClass("Edge", false, {"GraphComponent"}, {},
                                   {makeRef("src", "Node", false, 0, 1),
                                    makeRef("trg", "Node", false, 0, 1)}));
    mm.classes.push_back(
        makeClass("GraphComponent", true, {}, {makeAttr("text", "String", 0, 1)}, {}));
    return mm;
}

Metamodel graph2Metamodel() {
    Metamodel mm;
    mm.name = "Graph1";
    mm.classes.push_back(makeClass("Graph", false, {}, {},
                                   {makeRef("nodes", "Node", true, 0, kUnbounded)}));
    mm.classes.push_back(makeClass("Node", false, {}, {makeAttr("text", "String", 0, 1)},
                                   {makeRef("linksTo", "Node", false, 0, kUnbounded)}));
    return mm;
}

Metamodel resultMetamodel() {
    Metamodel mm;
    mm.name = "Result";
    mm.classes.push_back(makeClass("IntResult", false, {}, {makeAttr("value", "Int", 1, 1)}, {}));
    mm.classes.push_back(
        makeClass("StringResult", false, {}, {makeAttr("value", "String", 1, 1)}, {}));
    mm.classes.push_back(makeClass("Greeting", false, {}, {makeAttr("text", "String", 0, 1)},
                                   {makeRef("message", "GreetingMessage", true, 0, 1),
                                    makeRef("person", "Person", true, 0, 1)}));
    mm.classes.push_back(
        makeClass("GreetingMessage", false, {}, {makeAttr("text", "String", 1, 1)}, {}));
    mm.classes.push_back(makeClass("Person", false, {}, {makeAttr("name", "String", 1, 1)}, {}));
    return mm;
}

Metamodel shapesMetamodel() {
    Metamodel mm;
    mm.name = "Shapes";
    mm.classes.push_back(makeClass("Shape", false, {}, {makeAttr("kind", "Kind", 1, 1)}, {}));
    mm.enumerations.push_back({"Kind", {"CIRCLE", "SQUARE"}});
    return mm;
}

Metamodel withResultClasses(const Metamodel& mm) {
    Metamodel merged = mm;
    const Metamodel result = resultMetamodel();
    merged.classes.insert(merged.classes.end(), result.classes.begin(), result.classes.end());
    merged.enumerations.insert(merged.enumerations.end(), result.enumerations.begin(),
                               result.enumerations.end());
    return merged;
}

namespace {

void addObject(Repository& repo, const std::string& id, const std::string& className,
               const std::string& resource, std::map<std::string, Value> slots) {
    Obj o;
    o.id = id;
    o.className = className;
    o.resource = resource;
    o.slots = std::move(slots);
    repo.objects.emplace(id, std::move(o));
}

Scalar refTo(const std::string& id) { return Ref{id}; }

} // namespace

Repository modelGA() {
    Repository repo;
    repo.metamodelName = "Graph1";
    repo.release = 0;
    repo.ensureResource("graph").roots = {"g"};

    addObject(repo, "g", "Graph", "graph",
              {{"nodes", Value::list({refTo("n1"), refTo("n2"), refTo("n3"), refTo("n4")})},
               {"edges",
                Value::list({refTo("e1"), refTo("e2"), refTo("e3"), refTo("e4"), refTo("e5")})}});
    for (int i = 1; i <= 4; ++i) {
        const std::string id = "n" + std::to_string(i);
        addObject(repo, id, "Node", "graph", {{"name", Value::single(std::string(id))}});
    }
    auto edge = [&](const std::string& id, const std::string& src,
                    const std::string& trg) {
        std::map<std::string, Value> slots;
        if (!src.empty()) slots.emplace("src", Value::single(refTo(src)));
        if (!trg.empty()) slots.emplace("trg", Value::single(refTo(trg)));
        addObject(repo, id, "Edge", "graph", std::move(slots));
    };
    edge("e1", "n1", "n2");
    edge("e2", "n2", "n3");
    edge("e3", "n3", "n1");
    edge("e4", "n2", "n2");
    edge("e5", "n3", "");
    return repo;
}

history::History histSimple() {
    history::History h = history::createHistory(graph1Metamodel());
    history::recordChange(
        h, history::OperationApplication{
               "ExtractSuperClass",
               {{"subClasses", std::vector<std::string>{"Node", "Edge"}},
                {"superName", std::string("GraphComponent")}}});
    history::recordChange(
        h, history::OperationApplication{
               "UniteReferences",
               {{"references", std::vector<std::string>{"Graph.nodes", "Graph.edges"}},
                {"unitedName", std::string("gcs")}}});
    history::recordChange(h, history::OperationApplication{
                                 "PullUpFeature",
                                 {{"feature", std::string("Node.name")},
                                  {"superClass", std::string("GraphComponent")}}});
    history::recordChange(h, history::OperationApplication{
                                 "Rename",
                                 {{"element", std::string("GraphComponent.name")},
                                  {"newName", std::string("text")}}});
    history::attachMigration(h, 0, 4, 0, "MoveResult");
    history::releaseHead(h);
    return h;
}

history::History histTopology() {
    history::History h = history::createHistory(graph1Metamodel());
    history::recordChange(h, history::OperationApplication{"ClassToAssociation",
                                                           {{"cls", std::string("Edge")},
                                                            {"sourceRef", std::string("src")},
                                                            {"targetRef", std::string("trg")},
                                                            {"newRefName", std::string("linksTo")}}});
    history::recordChange(h, history::OperationApplication{"Rename",
                                                           {{"element", std::string("Node.name")},
                                                            {"newName", std::string("text")}}});
    history::releaseHead(h);
    return h;
}

const std::map<std::string, std::string>& fixtureFiles() {
    static const std::map<std::string, std::string> files = [] {
        std::map<std::string, std::string> out;
        out["graph1.metamodel.json"] = metamodel::printMetamodel(graph1Metamodel());
        out["graph_evolved.metamodel.json"] = metamodel::printMetamodel(graphEvolvedMetamodel());
        out["graph2.metamodel.json"] = metamodel::printMetamodel(graph2Metamodel());
        out["result.metamodel.json"] = metamodel::printMetamodel(resultMetamodel());
        out["g_a.model.json"] = model::printModel(modelGA());
        out["hist_simple.history.json"] = history::printHistory(histSimple());
        out["hist_topology.history.json"] = history::printHistory(histTopology());
        return out;
    }();
    return files;
}

// ---- Helpers ------------------------------------------------------------------

namespace {

// Successor nodes of `node` over fully-connected edges.
std::vector<std::string> successors(const Repository& repo, const Metamodel& mm,
                                    const std::string& node) {
    std::set<std::string> out;
    for (const auto& edge : model::getInverse(repo, mm, node, {"Edge", "src"})) {
        const Value* trg = model::storedSlot(repo, edge, "trg");
        if (!trg || trg->items.empty()) continue;
        if (const Ref* r = std::get_if<Ref>(&trg->items.front()))
            if (repo.find(r->id)) out.insert(r->id);
    }
    return {out.begin(), out.end()};
}

} // namespace

std::set<std::string> getReachable(const Repository& repo, const Metamodel& mm,
                                   const std::string& nodeId, int minLen) {
    const Obj& node = repo.get(nodeId);
    if (!mm.findClass(node.className) || !metamodel::isSubtypeOf(mm, node.className, "Node"))
        throw BadArgumentsError("'" + nodeId + "' is not a Node");
    if (minLen < 1) throw BadArgumentsError("minLen must be positive");

    // Walk lengths saturate at minLen: state (node, min(len, minLen)).
    std::set<std::pair<std::string, int>> visited;
    std::vector<std::pair<std::string, int>> stack{{nodeId, 0}};
    std::set<std::string> out;
    while (!stack.empty()) {
        auto [cur, len] = stack.back();
        stack.pop_back();
        if (!visited.insert({cur, len}).second) continue;
        if (len == minLen) out.insert(cur);
        for (const auto& next : successors(repo, mm, cur))
            stack.push_back({next, std::min(len + 1, minLen)});
    }
    return out;
}

std::set<std::string> getReachable(MigrationContext& ctx, const std::string& nodeId, int minLen) {
    return getReachable(ctx.repository(), ctx.metamodelBefore(), nodeId, minLen);
}

// ---- Hooks --------------------------------------------------------------------

namespace {

void storeIntResult(MigrationContext& ctx, std::int64_t value) {
    ctx.storeResult(ctx.options().resultResource, "IntResult",
                    {{"value", Value::single(value)}});
}

std::optional<std::string> scalarRefId(const Repository& repo, const std::string& obj,
                                       const std::string& feature) {
    const Value* v = model::storedSlot(repo, obj, feature);
    if (!v || v->items.empty()) return std::nullopt;
    if (const Ref* r = std::get_if<Ref>(&v->items.front())) return r->id;
    return std::nullopt;
}

void hookConstantTransformation(MigrationContext& ctx) {
    ctx.storeResult(ctx.options().resultResource, "Greeting",
                    {{"text", Value::single(std::string("Hello World"))}});
}

void hookConstantTransformationReferences(MigrationContext& ctx) {
    const std::string& res = ctx.options().resultResource;
    std::string greeting = ctx.storeResult(res, "Greeting", {});
    std::string message = ctx.storeResult(res, "GreetingMessage",
                                          {{"text", Value::single(std::string("Hello"))}});
    std::string person = ctx.storeResult(
        res, "Person", {{"name", Value::single(std::string("TTC Participants"))}});
    ctx.writeSlot(greeting, "message", WriteMode::Set, Value::single(Ref{message}));
    ctx.writeSlot(greeting, "person", WriteMode::Set, Value::single(Ref{person}));
}

void hookModelToText(MigrationContext& ctx) {
    ctx.storeResult(ctx.options().resultResource, "StringResult",
                    {{"value", Value::single(std::string("Hello World!"))}});
}

void hookCountNodes(MigrationContext& ctx) {
    storeIntResult(ctx, static_cast<std::int64_t>(ctx.allInstances("Node").size()));
}

void hookCountLoopingEdges(MigrationContext& ctx) {
    std::int64_t count = 0;
    for (const auto& e : ctx.allInstances("Edge")) {
        auto src = scalarRefId(ctx.repository(), e, "src");
        auto trg = scalarRefId(ctx.repository(), e, "trg");
        if (src && trg && *src == *trg) ++count;
    }
    storeIntResult(ctx, count);
}

void hookCountIsolatedNodes(MigrationContext& ctx) {
    std::int64_t count = 0;
    for (const auto& n : ctx.allInstances("Node"))
        if (ctx.getInverse(n, {"Edge", "src"}).empty() &&
            ctx.getInverse(n, {"Edge", "trg"}).empty())
            ++count;
    storeIntResult(ctx, count);
}

void hookCountCircles(MigrationContext& ctx) {
    // Directed 3-cycles counted up to rotation: fix the smallest id as the
    // cycle's anchor, so each orientation is counted exactly once.
    std::set<std::pair<std::string, std::string>> links;
    for (const auto& e : ctx.allInstances("Edge")) {
        auto src = scalarRefId(ctx.repository(), e, "src");
        auto trg = scalarRefId(ctx.repository(), e, "trg");
        if (src && trg) links.insert({*src, *trg});
    }
    auto nodes = ctx.allInstances("Node");
    std::int64_t count = 0;
    for (const auto& a : nodes)
        for (const auto& b : nodes) {
            if (b <= a || !links.count({a, b})) continue;
            for (const auto& c : nodes) {
                if (c <= a || c == b) continue;
                if (links.count({b, c}) && links.count({c, a})) ++count;
            }
        }
    storeIntResult(ctx, count);
}

void hookCountDanglingEdges(MigrationContext& ctx) {
    std::int64_t count = 0;
    for (const auto& e : ctx.allInstances("Edge")) {
        const Value* src = model::storedSlot(ctx.repository(), e, "src");
        const Value* trg = model::storedSlot(ctx.repository(), e, "trg");
        if (!src || !trg) ++count;
    }
    storeIntResult(ctx, count);
}

void hookReverseEdges(MigrationContext& ctx) {
    for (const auto& e : ctx.allInstances("Edge")) {
        const Value* src = model::storedSlot(ctx.repository(), e, "src");
        const Value* trg = model::storedSlot(ctx.repository(), e, "trg");
        std::optional<Value> oldSrc = src ? std::optional<Value>(*src) : std::nullopt;
        std::optional<Value> oldTrg = trg ? std::optional<Value>(*trg) : std::nullopt;
        if (oldTrg)
            ctx.writeSlot(e, "src", WriteMode::Set, *oldTrg);
        else
            ctx.writeSlot(e, "src", WriteMode::Unset);
        if (oldSrc)
            ctx.writeSlot(e, "trg", WriteMode::Set, *oldSrc);
        else
            ctx.writeSlot(e, "trg", WriteMode::Unset);
    }
}

void hookDeleteNodeWithName(MigrationContext& ctx) {
    const std::string name = ctx.taskArg("name", "n1");
    for (const auto& n : ctx.allInstances("Node")) {
        const Value* v = model::storedSlot(ctx.repository(), n, "name");
        const std::string* stored =
            v && !v->items.empty() ? std::get_if<std::string>(&v->items.front()) : nullptr;
        if (!stored || *stored != name) continue;
        std::vector<std::string> incident = ctx.getInverse(n, {"Edge", "src"});
        for (const auto& e : ctx.getInverse(n, {"Edge", "trg"})) incident.push_back(e);
        for (const auto& e : incident)
            if (ctx.repository().find(e)) ctx.deleteInstance(e);
        ctx.deleteInstance(n);
    }
}

void hookInsertTransitiveEdges(MigrationContext& ctx) {
    // Phase 1: the pairs to connect, computed over pre-existing edges only.
    std::set<std::pair<std::string, std::string>> links;
    for (const auto& e : ctx.allInstances("Edge")) {
        auto src = scalarRefId(ctx.repository(), e, "src");
        auto trg = scalarRefId(ctx.repository(), e, "trg");
        if (src && trg) links.insert({*src, *trg});
    }
    std::vector<std::pair<std::string, std::string>> pairs;
    for (const auto& a : ctx.allInstances("Node"))
        for (const auto& c : getReachable(ctx, a, 2))
            if (!links.count({a, c})) pairs.push_back({a, c});
    std::sort(pairs.begin(), pairs.end());

    // Phase 2: one new edge per pair, contained next to its source node.
    for (const auto& [a, c] : pairs) {
        const std::string resource = ctx.repository().get(a).resource;
        std::string edge = ctx.newInstance(resource, "Edge");
        ctx.writeSlot(edge, "src", WriteMode::Set, Value::single(Ref{a}));
        ctx.writeSlot(edge, "trg", WriteMode::Set, Value::single(Ref{c}));
        if (auto container = model::containerOf(ctx.repository(), ctx.metamodelBefore(), a))
            ctx.writeSlot(container->first, "edges", WriteMode::Add,
                          Value::single(Ref{edge}));
    }
}

// Re-homes an object and its containment subtree to `resource`.
void rehome(Repository& repo, const Metamodel& mm, const std::string& objId,
            const std::string& resource) {
    std::vector<std::string> stack{objId};
    std::set<std::string> visited;
    while (!stack.empty()) {
        std::string id = std::move(stack.back());
        stack.pop_back();
        if (!visited.insert(id).second) continue;
        Obj* o = repo.find(id);
        if (!o) continue;
        o->resource = resource;
        if (!mm.findClass(o->className)) continue;
        for (const auto& f : metamodel::allFeatures(mm, o->className)) {
            if (!f.isReference() || !f.reference->containment) continue;
            const Value* v = model::storedSlot(repo, id, f.name());
            if (!v) continue;
            for (const auto& s : v->items)
                if (const Ref* r = std::get_if<Ref>(&s)) stack.push_back(r->id);
        }
    }
}

void hookMoveResult(MigrationContext& ctx) {
    Repository& repo = ctx.repository();
    const std::string& from = ctx.options().inputResource;
    const std::string& to = ctx.options().outputResource;
    auto it = repo.resources.find(from);
    if (it == repo.resources.end())
        throw UnknownResourceError("no resource named '" + from + "'");
    std::vector<std::string> roots = std::move(it->second.roots);
    it->second.roots.clear();
    model::Resource& target = repo.ensureResource(to);
    for (const auto& id : roots) {
        target.roots.push_back(id);
        rehome(repo, ctx.metamodelAfter(), id, to);
    }
}

} // namespace

void registerHooks(engine::HookRegistry& hooks) {
    hooks.registerHook("ConstantTransformation", hookConstantTransformation);
    hooks.registerHook("ConstantTransformationReferences", hookConstantTransformationReferences);
    hooks.registerHook("ModelToText", hookModelToText);
    hooks.registerHook("CountNodes", hookCountNodes);
    hooks.registerHook("CountLoopingEdges", hookCountLoopingEdges);
    hooks.registerHook("CountIsolatedNodes", hookCountIsolatedNodes);
    hooks.registerHook("CountCircles", hookCountCircles);
    hooks.registerHook("CountDanglingEdges", hookCountDanglingEdges);
    hooks.registerHook("ReverseEdges", hookReverseEdges);
    hooks.registerHook("DeleteNodeWithName", hookDeleteNodeWithName);
    hooks.registerHook("InsertTransitiveEdges", hookInsertTransitiveEdges);
    hooks.registerHook("MoveResult", hookMoveResult);
}

// ---- Task driver ----------------------------------------------------------------

const std::vector<TaskSpec>& taskList() {
    static const std::vector<TaskSpec> tasks = {
        {"hello", "ConstantTransformation", "", false, TaskOutputKind::ResultJson, true},
        {"hello-refs", "ConstantTransformationReferences", "", false, TaskOutputKind::ResultJson,
         true},
        {"hello-text", "ModelToText", "", false, TaskOutputKind::Text, true},
        {"count-nodes", "CountNodes", "", true, TaskOutputKind::ResultJson, true},
        {"count-looping-edges", "CountLoopingEdges", "", true, TaskOutputKind::ResultJson, true},
        {"count-isolated-nodes", "CountIsolatedNodes", "", true, TaskOutputKind::ResultJson, true},
        {"count-circles", "CountCircles", "", true, TaskOutputKind::ResultJson, true},
        {"count-dangling-edges", "CountDanglingEdges", "", true, TaskOutputKind::ResultJson, true},
        {"reverse-edges", "ReverseEdges", "", true, TaskOutputKind::ModelJson, true},
        {"delete-node", "DeleteNodeWithName", "", true, TaskOutputKind::ModelJson, true},
        {"insert-transitive-edges", "InsertTransitiveEdges", "", true, TaskOutputKind::ModelJson,
         true},
        {"simple-migration", "", "hist_simple.history.json", true, TaskOutputKind::ModelJson,
         false},
        {"topology-migration", "", "hist_topology.history.json", true, TaskOutputKind::ModelJson,
         false},
    };
    return tasks;
}

const TaskSpec* findTask(const std::string& name) {
    for (const auto& t : taskList())
        if (t.name == name) return &t;
    return nullptr;
}

namespace {

std::string readTextFile(const std::filesystem::path& path) {
    std::ifstream in(path, std::ios::binary);
    if (!in) throw IoError("cannot read '" + path.string() + "'");
    std::ostringstream out;
    out << in.rdbuf();
    return out.str();
}

history::History taskHistory(const TaskSpec& spec,
                             const std::optional<std::filesystem::path>& fixturesDir) {
    if (!spec.historyFile.empty()) {
        if (fixturesDir) return history::parseHistory(readTextFile(*fixturesDir / spec.historyFile));
        return spec.historyFile == "hist_simple.history.json" ? histSimple() : histTopology();
    }
    // The degenerate shape: one empty metamodel adaptation carrying the hook.
    Metamodel baseline =
        spec.needsInputModel ? withResultClasses(graph1Metamodel()) : resultMetamodel();
    history::History h = history::createHistory(baseline);
    history::attachMigration(h, 0, 0, 0, spec.hook);
    history::releaseHead(h);
    return h;
}

Repository filterToResource(const Repository& repo, const std::string& resource) {
    Repository out;
    out.metamodelName = repo.metamodelName;
    out.release = repo.release;
    out.nextId = repo.nextId;
    auto it = repo.resources.find(resource);
    out.ensureResource(resource).roots = it != repo.resources.end() ? it->second.roots
                                                                    : std::vector<std::string>{};
    for (const auto& [id, o] : repo.objects)
        if (o.resource == resource) out.objects.emplace(id, o);
    return out;
}

std::string extractText(const Repository& repo, const std::string& resource) {
    for (const auto& [id, o] : repo.objects) {
        (void)id;
        if (o.resource != resource || o.className != "StringResult") continue;
        auto it = o.slots.find("value");
        if (it == o.slots.end() || it->second.items.empty()) continue;
        if (const auto* s = std::get_if<std::string>(&it->second.items.front())) return *s + "\n";
    }
    throw Error("task produced no StringResult to print");
}

} // namespace

TaskRun runTask(const std::string& taskName, std::optional<Repository> input,
                const std::map<std::string, std::string>& args,
                const std::optional<std::filesystem::path>& fixturesDir) {
    const TaskSpec* spec = findTask(taskName);
    if (!spec) throw NotFoundError("unknown task '" + taskName + "'");

    history::History h = taskHistory(*spec, fixturesDir);
    Repository repo;
    if (spec->needsInputModel) {
        if (!input) throw BadArgumentsError("task '" + taskName + "' requires an input model");
        repo = std::move(*input);
    } else {
        repo.metamodelName = h.metamodelName;
    }
    const int inputRelease = repo.release;

    engine::HookRegistry hooks;
    registerHooks(hooks);
    engine::MigrateOptions options;
    options.taskArgs = args;

    TaskRun run;
    run.report = engine::migrate(repo, h, 0, 1, hooks, options);
    if (spec->preserveRelease) repo.release = inputRelease;
    run.output = spec->output;
    if (!run.report.rolledBack()) {
        switch (spec->output) {
        case TaskOutputKind::ModelJson:
            run.primaryOutput = model::printModel(repo);
            break;
        case TaskOutputKind::ResultJson:
            run.primaryOutput = model::printModel(filterToResource(repo, options.resultResource));
            break;
        case TaskOutputKind::Text:
            run.primaryOutput = extractText(repo, options.resultResource);
            break;
        }
    }
    run.repo = std::move(repo);
    return run;
}

} // namespace coevo::helloworld
