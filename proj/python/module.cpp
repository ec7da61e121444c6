// Python bindings for the co-evolution engine. The API works on canonical
// JSON strings (metamodel/model/history documents) so scripts can drive
// validation, history recording, migration and the Hello World tasks without
// mirroring the C++ object model.

#include <pybind11/pybind11.h>
#include <pybind11/stl.h>

#include "coevo/engine.hpp"
#include "coevo/helloworld.hpp"
#include "coevo/history.hpp"
#include "coevo/metamodel.hpp"
#include "coevo/model.hpp"
#include "coevo/operations.hpp"

namespace py = pybind11;

namespace {

coevo::operations::Args argsFromDict(const py::dict& d) {
    coevo::operations::Args args;
    for (auto item : d) {
        const std::string key = py::cast<std::string>(item.first);
        if (py::isinstance<py::bool_>(item.second))
            args[key] = py::cast<bool>(item.second);
        else if (py::isinstance<py::str>(item.second))
            args[key] = py::cast<std::string>(item.second);
        else if (py::isinstance<py::list>(item.second) || py::isinstance<py::tuple>(item.second))
            args[key] = py::cast<std::vector<std::string>>(item.second);
        else
            throw coevo::BadArgumentsError("argument '" + key +
                                           "' must be a bool, string, or list of strings");
    }
    return args;
}

} // namespace

PYBIND11_MODULE(coevo, m) {
    m.doc() = "metamodel/model co-evolution engine";

    py::register_exception<coevo::ParseError>(m, "CoevoParseError", PyExc_ValueError);
    py::register_exception<coevo::Error>(m, "CoevoError", PyExc_RuntimeError);

    m.def("validate_metamodel", [](const std::string& mmJson) {
        auto mm = coevo::metamodel::parseMetamodel(mmJson);
        return coevo::metamodel::toStrings(coevo::metamodel::validateMetamodel(mm));
    });

    m.def("check_conformance", [](const std::string& modelJson, const std::string& mmJson) {
        auto repo = coevo::model::parseModel(modelJson);
        auto mm = coevo::metamodel::parseMetamodel(mmJson);
        return coevo::model::toStrings(coevo::model::checkConformance(repo, mm));
    });

    m.def("is_subtype_of", [](const std::string& mmJson, const std::string& sub,
                              const std::string& sup) {
        auto mm = coevo::metamodel::parseMetamodel(mmJson);
        return coevo::metamodel::isSubtypeOf(mm, sub, sup);
    });

    m.def("reconstruct_metamodel", [](const std::string& historyJson, std::size_t release) {
        auto h = coevo::history::parseHistory(historyJson);
        return coevo::metamodel::printMetamodel(coevo::history::reconstructMetamodel(h, release));
    });

    m.def("check_applicability", [](const std::string& historyJson, const std::string& op,
                                    const py::dict& args) {
        auto h = coevo::history::parseHistory(historyJson);
        return coevo::operations::toStrings(coevo::operations::checkApplicability(
            op, argsFromDict(args), coevo::history::headMetamodel(h)));
    });

    m.def(
        "apply_operation",
        [](const std::string& historyJson, const std::string& op, const py::dict& args,
           bool release) {
            auto h = coevo::history::parseHistory(historyJson);
            coevo::history::recordChange(
                h, coevo::history::OperationApplication{op, argsFromDict(args)});
            if (release) coevo::history::releaseHead(h);
            return coevo::history::printHistory(h);
        },
        py::arg("history"), py::arg("op"), py::arg("args"), py::arg("release") = false);

    m.def(
        "migrate",
        [](const std::string& modelJson, const std::string& historyJson, int fromRelease,
           int toRelease) {
            auto repo = coevo::model::parseModel(modelJson);
            auto h = coevo::history::parseHistory(historyJson);
            coevo::engine::HookRegistry hooks;
            coevo::helloworld::registerHooks(hooks);
            auto report = coevo::engine::migrate(repo, h, fromRelease, toRelease, hooks);
            py::dict out;
            out["report"] = coevo::engine::printReport(report);
            out["model"] = report.rolledBack() ? py::object(py::none())
                                               : py::object(py::str(coevo::model::printModel(repo)));
            return out;
        },
        py::arg("model"), py::arg("history"), py::arg("from_release"), py::arg("to_release"));

    m.def(
        "run_task",
        [](const std::string& task, const py::object& modelJson,
           const std::map<std::string, std::string>& args) {
            std::optional<coevo::model::Repository> input;
            if (!modelJson.is_none())
                input = coevo::model::parseModel(py::cast<std::string>(modelJson));
            auto run = coevo::helloworld::runTask(task, std::move(input), args);
            py::dict out;
            out["report"] = coevo::engine::printReport(run.report);
            out["rolled_back"] = run.report.rolledBack();
            out["output"] = run.report.rolledBack() ? py::object(py::none())
                                                    : py::object(py::str(run.primaryOutput));
            switch (run.output) {
            case coevo::helloworld::TaskOutputKind::ModelJson: out["kind"] = "model"; break;
            case coevo::helloworld::TaskOutputKind::ResultJson: out["kind"] = "result"; break;
            case coevo::helloworld::TaskOutputKind::Text: out["kind"] = "text"; break;
            }
            return out;
        },
        py::arg("task"), py::arg("model") = py::none(),
        py::arg("args") = std::map<std::string, std::string>{});

    m.def("list_operations", [] {
        std::vector<std::string> out;
        for (const auto& op : coevo::operations::standardOperations().all())
            out.push_back(op.signature.str() + " — " + op.signature.description);
        return out;
    });

    m.def("list_tasks", [] {
        std::vector<std::string> out;
        for (const auto& t : coevo::helloworld::taskList()) out.push_back(t.name);
        return out;
    });

    m.def("fixture", [](const std::string& name) {
        const auto& files = coevo::helloworld::fixtureFiles();
        auto it = files.find(name);
        if (it == files.end()) throw coevo::NotFoundError("no fixture named '" + name + "'");
        return it->second;
    });

    m.def("fixture_names", [] {
        std::vector<std::string> out;
        for (const auto& [name, content] : coevo::helloworld::fixtureFiles()) {
            (void)content;
            out.push_back(name);
        }
        return out;
    });
}
