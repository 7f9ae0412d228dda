// qaplan: answer natural-language requests by translating them into an
// ASP intermediate representation, materializing it with domain rules,
// compiling a PDDL task and planning over the API domain.
//
// Exit codes:
//   0  success
//   1  pipeline failure (translation, transport, no fixture, no plan)
//   2  domain-constraint violation derived by the rules
//   64 usage error (bad flags, empty query)
//   65 input data is malformed
//   66 an input file cannot be opened

#include <cstdio>
#include <iostream>
#include <map>
#include <string>
#include <vector>

#include <CLI11.hpp>
#include <nlohmann/json.hpp>

#include "qaplan/asp.hpp"
#include "qaplan/catalog.hpp"
#include "qaplan/errors.hpp"
#include "qaplan/eval.hpp"
#include "qaplan/executor.hpp"
#include "qaplan/pddl.hpp"
#include "qaplan/pipeline.hpp"
#include "qaplan/planner.hpp"
#include "qaplan/rules.hpp"
#include "qaplan/taskgen.hpp"
#include "qaplan/translator.hpp"
#include "qaplan/translator_http.hpp"

namespace {

#ifndef QAPLAN_DATA_DIR
#define QAPLAN_DATA_DIR "data"
#endif

constexpr int kExitOk = 0;
constexpr int kExitPipeline = 1;
constexpr int kExitConstraint = 2;
constexpr int kExitUsage = 64;
constexpr int kExitDataFormat = 65;
constexpr int kExitNoInput = 66;

struct Options {
    std::string catalog = std::string(QAPLAN_DATA_DIR) + "/catalog.json";
    std::string rules = std::string(QAPLAN_DATA_DIR) + "/rules.lp";
    std::string domain = std::string(QAPLAN_DATA_DIR) + "/domain.pddl";
    std::string fixtures = std::string(QAPLAN_DATA_DIR) + "/fixtures.json";
    std::string costs;
    std::string translator = "fixture";
    std::string format = "text";
    std::string llm_endpoint;
    std::string llm_model;
    double temperature = 0.0;
    int max_retries = 2;
    double llm_timeout_s = 30.0;
    std::string strategy = "greedy";
    double time_limit_s = 1.0;
};

qaplan::pipeline::Pipeline make_pipeline(const Options& opt) {
    qaplan::pipeline::PipelineConfig config;
    config.catalog_path = opt.catalog;
    config.rules_path = opt.rules;
    config.domain_path = opt.domain;
    config.fixtures_path = opt.fixtures;
    config.costs_path = opt.costs;
    config.translator_config.backend =
        opt.translator == "llm" ? qaplan::translator::TranslatorConfig::Backend::Llm
                                : qaplan::translator::TranslatorConfig::Backend::Fixture;
    config.translator_config.endpoint = opt.llm_endpoint;
    config.translator_config.model = opt.llm_model;
    config.translator_config.temperature = opt.temperature;
    config.translator_config.max_retries = opt.max_retries;
    config.translator_config.timeout_s = opt.llm_timeout_s;
    if (opt.strategy == "astar")
        config.solve_config.strategy = qaplan::planner::Strategy::AstarHadd;
    else if (opt.strategy == "bfs")
        config.solve_config.strategy = qaplan::planner::Strategy::Bfs;
    else
        config.solve_config.strategy = qaplan::planner::Strategy::GreedyHadd;
    config.solve_config.time_limit_s = opt.time_limit_s;

    qaplan::pipeline::Pipeline p = qaplan::pipeline::load_pipeline(config);
    if (p.translator_config.backend == qaplan::translator::TranslatorConfig::Backend::Llm)
        p.chat = qaplan::translator::llm_chat;
    return p;
}

int require_query(const std::string& query) {
    if (query.find_first_not_of(" \t\r\n") == std::string::npos) {
        std::cerr << "error: query must not be empty\n";
        return kExitUsage;
    }
    return kExitOk;
}

// Maps the planner's non-success statuses onto process exit codes; prints
// the status to stderr.
int report_solve_failure(qaplan::planner::SolveStatus status) {
    switch (status) {
        case qaplan::planner::SolveStatus::Unsolvable:
            std::cerr << "error: no plan exists for this task\n";
            break;
        case qaplan::planner::SolveStatus::Timeout:
            std::cerr << "error: planner timed out\n";
            break;
        default:
            std::cerr << "error: planner hit its search limit\n";
            break;
    }
    return kExitPipeline;
}

nlohmann::json plan_to_json(const qaplan::planner::GroundProblem& problem,
                            const qaplan::planner::Plan& plan) {
    nlohmann::json steps = nlohmann::json::array();
    for (int step : plan.steps) {
        const auto& a = problem.actions[step];
        steps.push_back({{"schema", a.schema}, {"args", a.args}, {"cost", a.cost}});
    }
    return steps;
}

int print_constraint_errors(const std::vector<std::string>& errors) {
    for (const auto& msg : errors) std::cout << "constraint violated: " << msg << "\n";
    return kExitConstraint;
}

bool help_only(const qaplan::asp::FactSet& materialized) {
    bool any = false;
    for (const auto& atom : materialized) {
        if (atom.predicate != "goal" || atom.terms.size() != 2) continue;
        any = true;
        if (atom.terms[1].text != "help") return false;
    }
    return any;
}

int cmd_translate(const Options& opt, const std::string& query) {
    if (int rc = require_query(query)) return rc;
    auto pipe = make_pipeline(opt);
    auto result = pipe.translate(query);
    if (opt.format == "json") {
        nlohmann::json facts = nlohmann::json::array();
        for (const auto& atom : result.facts) facts.push_back(qaplan::asp::to_string(atom));
        std::cout << nlohmann::json{{"facts", facts}, {"attempts", result.attempts}}.dump(2)
                  << "\n";
    } else {
        std::cout << qaplan::asp::render_facts(result.facts);
    }
    return kExitOk;
}

int cmd_materialize(const Options& opt, const std::string& query,
                    const std::string& facts_file) {
    auto pipe = make_pipeline(opt);
    qaplan::asp::FactSet intermediate;
    if (!facts_file.empty()) {
        intermediate = qaplan::asp::parse_facts(qaplan::pipeline::read_file(facts_file));
    } else {
        if (int rc = require_query(query)) return rc;
        intermediate = pipe.translate(query).facts;
    }
    qaplan::asp::FactSet materialized = pipe.materialize(intermediate);
    auto errors = qaplan::rules::extract_errors(materialized);
    if (opt.format == "json") {
        nlohmann::json facts = nlohmann::json::array();
        for (const auto& atom : materialized) facts.push_back(qaplan::asp::to_string(atom));
        std::cout << nlohmann::json{{"facts", facts}, {"errors", errors}}.dump(2) << "\n";
    } else {
        std::cout << qaplan::asp::render_facts(materialized);
    }
    if (!errors.empty()) {
        if (opt.format != "json")
            for (const auto& msg : errors) std::cout << "constraint violated: " << msg << "\n";
        return kExitConstraint;
    }
    return kExitOk;
}

int cmd_gen_task(const Options& opt, const std::string& query) {
    if (int rc = require_query(query)) return rc;
    auto pipe = make_pipeline(opt);
    auto r = qaplan::pipeline::answer(pipe, query);
    if (!r.errors.empty()) return print_constraint_errors(r.errors);
    if (opt.format == "json") {
        std::cout << nlohmann::json{{"task", qaplan::pddl::render_task(r.task)},
                                    {"bindings", r.bindings}}
                         .dump(2)
                  << "\n";
    } else {
        std::cout << qaplan::pddl::render_task(r.task);
        for (const auto& [obj, value] : r.bindings)
            std::cout << "; " << obj << " = \"" << value << "\"\n";
    }
    return kExitOk;
}

int cmd_plan(const Options& opt, const std::string& query) {
    if (int rc = require_query(query)) return rc;
    auto pipe = make_pipeline(opt);
    auto r = qaplan::pipeline::answer(pipe, query);
    if (!r.errors.empty()) return print_constraint_errors(r.errors);
    if (r.solve.status != qaplan::planner::SolveStatus::Solved)
        return report_solve_failure(r.solve.status);
    if (opt.format == "json") {
        std::cout << nlohmann::json{{"plan", plan_to_json(r.problem, r.solve.plan)},
                                    {"total_cost", r.solve.plan.total_cost},
                                    {"expanded", r.solve.expanded}}
                         .dump(2)
                  << "\n";
    } else {
        std::cout << qaplan::executor::render_plan(r.problem, r.solve.plan, r.bindings,
                                                   pipe.catalog);
    }
    return kExitOk;
}

int cmd_answer(const Options& opt, const std::string& query, bool execute,
               const std::string& answers_file, bool interactive) {
    if (int rc = require_query(query)) return rc;
    auto pipe = make_pipeline(opt);
    auto r = qaplan::pipeline::answer(pipe, query);
    if (!r.errors.empty()) return print_constraint_errors(r.errors);
    if (r.solve.status != qaplan::planner::SolveStatus::Solved)
        return report_solve_failure(r.solve.status);

    nlohmann::json out;
    if (opt.format == "json") {
        nlohmann::json facts = nlohmann::json::array();
        for (const auto& atom : r.materialized) facts.push_back(qaplan::asp::to_string(atom));
        out = {{"intermediate", qaplan::asp::render_facts(r.intermediate)},
               {"materialized", facts},
               {"bindings", r.bindings},
               {"plan", plan_to_json(r.problem, r.solve.plan)}};
    } else {
        std::cout << "-- intermediate representation --\n"
                  << qaplan::asp::render_facts(r.intermediate)
                  << "-- plan --\n"
                  << qaplan::executor::render_plan(r.problem, r.solve.plan, r.bindings,
                                                   pipe.catalog);
    }

    if (execute) {
        if (help_only(r.materialized)) {
            if (opt.format != "json")
                std::cout << "-- execution skipped: the plan only retrieves how-to "
                             "instructions --\n";
        } else {
            qaplan::executor::InfoSource info;
            if (interactive) {
                info.mode = qaplan::executor::InfoSource::Mode::InteractiveTerminal;
            } else if (!answers_file.empty()) {
                auto doc = nlohmann::json::parse(qaplan::pipeline::read_file(answers_file));
                for (auto it = doc.begin(); it != doc.end(); ++it)
                    info.answers[it.key()] = it.value().get<std::string>();
            }
            auto trace = qaplan::executor::execute(r.problem, r.solve.plan, r.bindings,
                                                   info, pipe.catalog);
            if (opt.format == "json") {
                nlohmann::json records = nlohmann::json::array();
                for (const auto& rec : trace.records)
                    records.push_back({{"step", rec.step},
                                       {"action", rec.action},
                                       {"inputs", rec.inputs},
                                       {"output", rec.output}});
                out["execution"] = {{"completed", trace.completed},
                                    {"aborted_step", trace.aborted_step},
                                    {"abort_reason", trace.abort_reason},
                                    {"records", records}};
            } else {
                std::cout << "-- execution --\n";
                for (const auto& rec : trace.records)
                    std::cout << rec.action << " -> " << rec.output << "\n";
                if (!trace.completed)
                    std::cout << "aborted at step " << trace.aborted_step << ": "
                              << trace.abort_reason << "\n";
            }
            if (!trace.completed) {
                if (opt.format == "json") std::cout << out.dump(2) << "\n";
                return kExitPipeline;
            }
        }
    }
    if (opt.format == "json") std::cout << out.dump(2) << "\n";
    return kExitOk;
}

int cmd_eval(const Options& opt, const std::string& dataset_path, int runs) {
    auto pipe = make_pipeline(opt);
    auto dataset = qaplan::eval::load_dataset(qaplan::pipeline::read_file(dataset_path));
    auto report = qaplan::eval::run_eval(dataset, pipe, runs);
    if (opt.format == "json")
        std::cout << qaplan::eval::report_to_json(report).dump(2) << "\n";
    else
        std::cout << qaplan::eval::render_report_text(report);
    return kExitOk;
}

}  // namespace

int main(int argc, char** argv) {
    Options opt;
    CLI::App app{"natural-language query answering via ASP materialization and planning"};
    app.require_subcommand(1);
    app.set_help_all_flag("--help-all");
    app.add_option("--catalog", opt.catalog, "goal catalog JSON");
    app.add_option("--rules", opt.rules, "domain rules file");
    app.add_option("--domain", opt.domain, "PDDL domain file");
    app.add_option("--fixtures", opt.fixtures, "translation fixtures JSON");
    app.add_option("--costs", opt.costs, "per-action cost table JSON");
    app.add_option("--translator", opt.translator, "translator backend")
        ->check(CLI::IsMember({"fixture", "llm"}));
    app.add_option("--format", opt.format, "output format")
        ->check(CLI::IsMember({"text", "json"}));
    // The API key is read from the QAPLAN_LLM_API_KEY environment
    // variable; it is deliberately not accepted as a flag.
    app.add_option("--llm-endpoint", opt.llm_endpoint, "chat completions base URL");
    app.add_option("--llm-model", opt.llm_model, "chat model name");
    app.add_option("--temperature", opt.temperature, "sampling temperature");
    app.add_option("--max-retries", opt.max_retries, "translation retries");
    app.add_option("--llm-timeout", opt.llm_timeout_s, "HTTP timeout in seconds");
    app.add_option("--strategy", opt.strategy, "search strategy")
        ->check(CLI::IsMember({"greedy", "astar", "bfs"}));
    app.add_option("--time-limit", opt.time_limit_s, "planner time limit in seconds");

    std::string query, facts_file, dataset_path, answers_file;
    bool execute = false, interactive = false;
    int runs = 1;

    auto* translate = app.add_subcommand("translate", "query -> intermediate facts");
    translate->add_option("query", query)->required();

    auto* materialize = app.add_subcommand("materialize", "query -> materialized facts");
    materialize->add_option("query", query);
    materialize->add_option("--facts-file", facts_file,
                            "read intermediate facts from a file instead of translating");

    auto* gen_task = app.add_subcommand("gen-task", "query -> task PDDL");
    gen_task->add_option("query", query)->required();

    auto* plan = app.add_subcommand("plan", "query -> plan");
    plan->add_option("query", query)->required();

    auto* answer = app.add_subcommand("answer", "full pipeline for one query");
    answer->add_option("query", query)->required();
    answer->add_flag("--execute", execute, "run the plan against stub APIs");
    answer->add_option("--answers", answers_file,
                       "JSON map of answers for get_info steps");
    answer->add_flag("--interactive", interactive,
                     "prompt on the terminal for get_info steps");

    auto* eval = app.add_subcommand("eval", "score a JSONL dataset");
    eval->add_option("--dataset", dataset_path)->required();
    eval->add_option("--runs", runs, "number of repeated runs");

    try {
        app.parse(argc, argv);
    } catch (const CLI::ParseError& e) {
        int rc = app.exit(e);
        return rc == 0 ? 0 : kExitUsage;
    }

    try {
        if (*translate) return cmd_translate(opt, query);
        if (*materialize) {
            if (facts_file.empty() && query.empty()) {
                std::cerr << "error: materialize needs a query or --facts-file\n";
                return kExitUsage;
            }
            return cmd_materialize(opt, query, facts_file);
        }
        if (*gen_task) return cmd_gen_task(opt, query);
        if (*plan) return cmd_plan(opt, query);
        if (*answer) return cmd_answer(opt, query, execute, answers_file, interactive);
        if (*eval) return cmd_eval(opt, dataset_path, runs);
    } catch (const qaplan::SyntaxError& e) {
        std::cerr << "error: " << e.what() << "\n";
        return kExitDataFormat;
    } catch (const qaplan::SchemaError& e) {
        std::cerr << "error: " << e.what() << "\n";
        return kExitDataFormat;
    } catch (const qaplan::DanglingReference& e) {
        std::cerr << "error: " << e.what() << "\n";
        return kExitDataFormat;
    } catch (const qaplan::TranslationFailed& e) {
        std::cerr << "error: " << e.what() << "\n";
        return kExitPipeline;
    } catch (const qaplan::TransportError& e) {
        std::cerr << "error: " << e.what() << "\n";
        return kExitPipeline;
    } catch (const qaplan::FixtureMiss& e) {
        std::cerr << "error: " << e.what() << "\n";
        return kExitPipeline;
    } catch (const std::runtime_error& e) {
        std::string msg = e.what();
        std::cerr << "error: " << msg << "\n";
        return msg.starts_with("cannot open file") ? kExitNoInput : kExitDataFormat;
    } catch (const std::exception& e) {
        std::cerr << "error: " << e.what() << "\n";
        return kExitDataFormat;
    }
    return kExitUsage;
}
