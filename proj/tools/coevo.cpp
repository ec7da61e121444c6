// coevo: command-line front end for metamodel validation, history recording,
// model migration, and the Hello World task suite.
//
// Exit codes: 0 success, 1 conformance/validation failure, 2 constraint
// violation or inapplicable change, 3 IO/parse/usage error, 4 rolled-back
// migration. Violations go to stderr one per line, reports to stdout, and
// artifacts to files (written atomically).

#include <cstdlib>
#include <filesystem>
#include <fstream>
#include <iostream>
#include <optional>
#include <sstream>

#include <CLI11.hpp>

#include "coevo/engine.hpp"
#include "coevo/helloworld.hpp"
#include "coevo/history.hpp"
#include "coevo/metamodel.hpp"
#include "coevo/model.hpp"
#include "coevo/operations.hpp"

namespace {

namespace fs = std::filesystem;

constexpr int kOk = 0;
constexpr int kConformance = 1;
constexpr int kConstraint = 2;
constexpr int kIo = 3;
constexpr int kRolledBack = 4;

std::string readTextFile(const std::string& path) {
    std::ifstream in(path, std::ios::binary);
    if (!in) throw coevo::IoError("cannot read '" + path + "'");
    std::ostringstream out;
    out << in.rdbuf();
    return out.str();
}

void writeTextFileAtomic(const std::string& path, const std::string& content) {
    const std::string tmp = path + ".tmp";
    {
        std::ofstream out(tmp, std::ios::binary | std::ios::trunc);
        if (!out) throw coevo::IoError("cannot write '" + tmp + "'");
        out << content;
        if (!out) throw coevo::IoError("short write to '" + tmp + "'");
    }
    std::error_code ec;
    fs::rename(tmp, path, ec);
    if (ec) {
        fs::remove(tmp, ec);
        throw coevo::IoError("cannot rename into '" + path + "'");
    }
}

void printLines(const std::vector<std::string>& lines) {
    for (const auto& line : lines) std::cerr << line << "\n";
}

std::optional<fs::path> fixturesOverride() {
    if (const char* dir = std::getenv("COEVO_FIXTURES")) return fs::path(dir);
    return std::nullopt;
}

// --arg key=value, lists comma-separated per the parameter kind.
coevo::operations::Args parseOpArgs(const std::vector<std::string>& raw,
                                    const coevo::operations::OperationSignature& sig) {
    coevo::operations::Args args;
    for (const auto& kv : raw) {
        auto eq = kv.find('=');
        if (eq == std::string::npos)
            throw coevo::BadArgumentsError("--arg expects key=value, got '" + kv + "'");
        const std::string key = kv.substr(0, eq);
        const std::string value = kv.substr(eq + 1);
        const coevo::operations::Param* param = nullptr;
        for (const auto& p : sig.parameters)
            if (p.name == key) param = &p;
        if (!param) throw coevo::BadArgumentsError("unknown argument '" + key + "'");
        switch (param->kind) {
        case coevo::operations::ParamKind::ElementList: {
            std::vector<std::string> items;
            std::stringstream ss(value);
            std::string item;
            while (std::getline(ss, item, ',')) items.push_back(item);
            args[key] = items;
            break;
        }
        case coevo::operations::ParamKind::Flag:
            args[key] = value == "true" || value == "1";
            break;
        default:
            args[key] = value;
        }
    }
    return args;
}

int cmdValidate(const std::string& metamodelPath, const std::string& modelPath) {
    auto mm = coevo::metamodel::parseMetamodel(readTextFile(metamodelPath));
    auto violations = coevo::metamodel::validateMetamodel(mm);
    if (!violations.empty()) {
        printLines(coevo::metamodel::toStrings(violations));
        return kConformance;
    }
    if (!modelPath.empty()) {
        auto repo = coevo::model::parseModel(readTextFile(modelPath));
        auto modelViolations = coevo::model::checkConformance(repo, mm);
        if (!modelViolations.empty()) {
            printLines(coevo::model::toStrings(modelViolations));
            return kConformance;
        }
    }
    return kOk;
}

int cmdApply(const std::string& historyPath, const std::string& opName,
             const std::vector<std::string>& rawArgs, bool release) {
    auto h = coevo::history::parseHistory(readTextFile(historyPath));
    const auto* op = coevo::operations::standardOperations().find(opName);
    if (!op) {
        std::cerr << "no operation named '" << opName << "'\n";
        return kConstraint;
    }
    auto args = parseOpArgs(rawArgs, op->signature);
    auto violations =
        coevo::operations::checkApplicability(opName, args, coevo::history::headMetamodel(h));
    if (!violations.empty()) {
        printLines(coevo::operations::toStrings(violations));
        return kConstraint;
    }
    coevo::history::recordChange(h, coevo::history::OperationApplication{opName, args});
    if (release) coevo::history::releaseHead(h);
    writeTextFileAtomic(historyPath, coevo::history::printHistory(h));
    return kOk;
}

int cmdMigrate(const std::string& historyPath, const std::string& modelPath, int from, int to,
               const std::string& outPath) {
    if (from > to) {
        std::cerr << "--from must not exceed --to\n";
        return kIo;
    }
    auto h = coevo::history::parseHistory(readTextFile(historyPath));
    auto repo = coevo::model::parseModel(readTextFile(modelPath));
    coevo::engine::HookRegistry hooks;
    coevo::helloworld::registerHooks(hooks);
    auto report = coevo::engine::migrate(repo, h, from, to, hooks);
    std::cout << coevo::engine::printReport(report);
    if (report.rolledBack()) {
        printLines(coevo::model::toStrings(report.steps.back().violations));
        return kRolledBack;
    }
    writeTextFileAtomic(outPath, coevo::model::printModel(repo));
    return kOk;
}

int cmdTask(const std::string& taskName, const std::string& modelPath, const std::string& outPath,
            const std::vector<std::string>& rawArgs) {
    const auto* spec = coevo::helloworld::findTask(taskName);
    if (!spec) {
        std::cerr << "unknown task '" << taskName << "'; available tasks:\n";
        for (const auto& t : coevo::helloworld::taskList()) std::cerr << "  " << t.name << "\n";
        return kIo;
    }
    std::optional<coevo::model::Repository> input;
    if (spec->needsInputModel) {
        if (modelPath.empty()) {
            std::cerr << "task '" << taskName << "' requires --model\n";
            return kIo;
        }
        input = coevo::model::parseModel(readTextFile(modelPath));
    }
    std::map<std::string, std::string> args;
    for (const auto& kv : rawArgs) {
        auto eq = kv.find('=');
        if (eq == std::string::npos)
            throw coevo::BadArgumentsError("--arg expects key=value, got '" + kv + "'");
        args[kv.substr(0, eq)] = kv.substr(eq + 1);
    }
    auto run = coevo::helloworld::runTask(taskName, std::move(input), args, fixturesOverride());
    std::cout << coevo::engine::printReport(run.report);
    if (run.report.rolledBack()) {
        printLines(coevo::model::toStrings(run.report.steps.back().violations));
        return kRolledBack;
    }
    writeTextFileAtomic(outPath, run.primaryOutput);
    return kOk;
}

int cmdListOps() {
    for (const auto& op : coevo::operations::standardOperations().all())
        std::cout << op.signature.str() << " — " << op.signature.description << "\n";
    return kOk;
}

} // namespace

int main(int argc, char** argv) {
    CLI::App app{"metamodel/model co-evolution engine"};
    app.require_subcommand(1);

    std::string metamodelPath, modelPath, historyPath, outPath, opName, taskName;
    std::vector<std::string> rawArgs;
    int from = 0, to = 0;
    bool release = false;

    auto* validate = app.add_subcommand("validate", "validate a metamodel and optionally a model");
    validate->add_option("--metamodel", metamodelPath)->required();
    validate->add_option("--model", modelPath);

    auto* apply = app.add_subcommand("apply", "record a reusable operation in a history");
    apply->add_option("--history", historyPath)->required();
    apply->add_option("--op", opName)->required();
    apply->add_option("--arg", rawArgs, "key=value (lists comma-separated)");
    apply->add_flag("--release", release, "close the head release afterwards");

    auto* migrate = app.add_subcommand("migrate", "replay a history over a model");
    migrate->add_option("--history", historyPath)->required();
    migrate->add_option("--model", modelPath)->required();
    migrate->add_option("--from", from)->required();
    migrate->add_option("--to", to)->required();
    migrate->add_option("--out", outPath)->required();

    auto* task = app.add_subcommand("task", "run a Hello World task");
    task->add_option("--task", taskName)->required();
    task->add_option("--model", modelPath);
    task->add_option("--out", outPath)->required();
    task->add_option("--arg", rawArgs, "key=value");

    auto* listOps = app.add_subcommand("list-ops", "list the reusable coupled operations");

    try {
        app.parse(argc, argv);
    } catch (const CLI::ParseError& e) {
        if (e.get_exit_code() == 0) return app.exit(e); // --help
        app.exit(e);
        return kIo;
    }

    try {
        if (validate->parsed()) return cmdValidate(metamodelPath, modelPath);
        if (apply->parsed()) return cmdApply(historyPath, opName, rawArgs, release);
        if (migrate->parsed()) return cmdMigrate(historyPath, modelPath, from, to, outPath);
        if (task->parsed()) return cmdTask(taskName, modelPath, outPath, rawArgs);
        if (listOps->parsed()) return cmdListOps();
    } catch (const coevo::NonconformingInputError& e) {
        std::cerr << e.what() << "\n";
        printLines(e.details());
        return kConformance;
    } catch (const coevo::InvalidMetamodelError& e) {
        std::cerr << e.what() << "\n";
        printLines(e.details());
        return kConformance;
    } catch (const coevo::InapplicableChangeError& e) {
        std::cerr << e.what() << "\n";
        printLines(e.details());
        return kConstraint;
    } catch (const coevo::UnknownOperationError& e) {
        std::cerr << e.what() << "\n";
        return kConstraint;
    } catch (const coevo::BadArgumentsError& e) {
        std::cerr << e.what() << "\n";
        return kConstraint;
    } catch (const coevo::ClosedReleaseError& e) {
        std::cerr << e.what() << "\n";
        return kConstraint;
    } catch (const coevo::ParseError& e) {
        std::cerr << e.what() << "\n";
        return kIo;
    } catch (const coevo::IoError& e) {
        std::cerr << e.what() << "\n";
        return kIo;
    } catch (const std::exception& e) {
        std::cerr << e.what() << "\n";
        return kIo;
    }
    return kIo;
}
