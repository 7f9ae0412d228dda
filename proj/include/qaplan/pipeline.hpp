#pragma once

// Wires the stages together: translate -> materialize -> task PDDL ->
// ground -> solve. Shared by the CLI and the evaluation harness.

#include <fstream>
#include <map>
#include <optional>
#include <sstream>
#include <string>
#include <vector>

#include "qaplan/asp.hpp"
#include "qaplan/catalog.hpp"
#include "qaplan/errors.hpp"
#include "qaplan/pddl.hpp"
#include "qaplan/planner.hpp"
#include "qaplan/rules.hpp"
#include "qaplan/taskgen.hpp"
#include "qaplan/translator.hpp"

namespace qaplan::pipeline {

inline std::string read_file(const std::string& path) {
    std::ifstream in(path, std::ios::binary);
    if (!in) throw std::runtime_error("cannot open file: " + path);
    std::ostringstream out;
    out << in.rdbuf();
    return out.str();
}

struct Pipeline {
    catalog::Catalog catalog;
    std::vector<rules::Rule> domain_rules;
    rules::BuiltinRegistry builtins;
    pddl::Domain domain;
    std::vector<translator::FixtureEntry> fixtures;
    translator::TranslatorConfig translator_config;
    planner::SolveConfig solve_config;
    std::map<std::string, int> costs;
    translator::ChatFn chat;  // set for the llm backend

    translator::TranslationResult translate(const std::string& query) const {
        if (translator_config.backend == translator::TranslatorConfig::Backend::Fixture)
            return translator::translate_fixture(query, fixtures);
        return translator::translate_llm(query, catalog, translator_config, chat);
    }

    asp::FactSet materialize(const asp::FactSet& intermediate) const {
        return rules::materialize(intermediate, domain_rules, builtins);
    }
};

struct PipelineConfig {
    std::string catalog_path;
    std::string rules_path;
    std::string domain_path;
    std::string fixtures_path;
    std::string costs_path;
    translator::TranslatorConfig translator_config;
    planner::SolveConfig solve_config;
};

/// Loads and validates every referenced file up front.
inline Pipeline load_pipeline(const PipelineConfig& config) {
    Pipeline p;
    p.catalog = catalog::load_catalog(read_file(config.catalog_path));
    p.builtins = rules::default_builtins();
    p.domain_rules = rules::parse_rules(read_file(config.rules_path), p.builtins);
    p.domain = pddl::parse_domain(read_file(config.domain_path));
    p.translator_config = config.translator_config;
    p.solve_config = config.solve_config;
    if (p.translator_config.backend == translator::TranslatorConfig::Backend::Fixture) {
        p.translator_config.fixtures_path = config.fixtures_path;
        p.fixtures = translator::load_fixtures(read_file(config.fixtures_path));
    }
    p.translator_config.check();
    if (!config.costs_path.empty()) {
        auto doc = nlohmann::json::parse(read_file(config.costs_path));
        for (auto it = doc.begin(); it != doc.end(); ++it)
            p.costs[it.key()] = it.value().get<int>();
    }
    return p;
}

struct AnswerResult {
    asp::FactSet intermediate;
    asp::FactSet materialized;
    std::vector<std::string> errors;  // domain-constraint errors, if any
    pddl::TaskProblem task;
    taskgen::BindingEnv bindings;
    planner::GroundProblem problem;
    planner::SolveResult solve;
};

/// Full flow for one query. Stops at the error path when materialization
/// derives error atoms; the planner stage is reached otherwise.
inline AnswerResult answer(const Pipeline& p, const std::string& query,
                           const std::string& problem_name = "query") {
    AnswerResult r;
    r.intermediate = p.translate(query).facts;
    r.materialized = p.materialize(r.intermediate);
    r.errors = rules::extract_errors(r.materialized);
    if (!r.errors.empty()) return r;
    auto [task, bindings] = taskgen::generate_task(r.materialized, p.catalog, problem_name);
    r.task = std::move(task);
    r.bindings = std::move(bindings);
    r.problem = planner::ground(p.domain, r.task, p.costs.empty() ? nullptr : &p.costs);
    r.solve = planner::solve(r.problem, p.solve_config);
    return r;
}

}  // namespace qaplan::pipeline
