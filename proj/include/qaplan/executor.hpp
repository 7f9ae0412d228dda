#pragma once

// Renders plans in the step syntax used throughout the docs and executes
// them against stub APIs, pulling missing information from a terminal
// prompt or a scripted answer map.

#include <iostream>
#include <map>
#include <optional>
#include <string>
#include <vector>

#include "qaplan/catalog.hpp"
#include "qaplan/errors.hpp"
#include "qaplan/planner.hpp"
#include "qaplan/taskgen.hpp"

namespace qaplan::executor {

using taskgen::BindingEnv;

struct InfoSource {
    enum class Mode { InteractiveTerminal, AnswerMap };

    Mode mode = Mode::AnswerMap;
    std::map<std::string, std::string> answers;  // object name or arg label -> value
};

struct TraceRecord {
    int step = 0;
    std::string action;
    std::vector<std::string> inputs;  // resolved input values/tokens
    std::string output;               // produced token or gathered value
};

struct ExecutionTrace {
    std::vector<TraceRecord> records;
    bool completed = false;
    int aborted_step = -1;
    std::string abort_reason;
};

namespace detail {

inline bool is_get_info(const planner::GroundAction& a) {
    return a.schema == "get_info_api";
}

// By domain convention the output variable is the last parameter.
inline const std::string& output_object(const planner::GroundAction& a) {
    return a.args.back();
}

inline std::vector<std::string> input_objects(const planner::GroundAction& a) {
    return {a.args.begin(), a.args.end() - 1};
}

// Human label for a get_info target: the catalog mapping whose
// materialized-predicate name suffixes the object name (x_start_date ->
// "start date").
inline std::string arg_label(const std::string& object, const catalog::Catalog& cat) {
    for (const auto& goal : cat.goals)
        for (const auto& arg : goal.args)
            for (const auto& m : arg.materialized)
                if (object.ends_with("_" + m.predicate)) return m.label;
    return object;
}

}  // namespace detail

/// One line per semantic step: value bindings first (ordered by first use
/// as an action input), then the plan's actions. get_info steps print the
/// argument's human label and its type.
inline std::string render_plan(const planner::GroundProblem& problem,
                               const planner::Plan& plan, const BindingEnv& bindings,
                               const catalog::Catalog& cat) {
    std::vector<std::string> lines;

    // binding lines in first-use order, unused bindings last
    std::vector<std::string> ordered;
    auto enqueue = [&](const std::string& obj) {
        if (bindings.count(obj) &&
            std::find(ordered.begin(), ordered.end(), obj) == ordered.end())
            ordered.push_back(obj);
    };
    for (int step : plan.steps) {
        const auto& a = problem.actions[step];
        if (detail::is_get_info(a)) continue;
        for (const auto& obj : detail::input_objects(a)) enqueue(obj);
    }
    for (const auto& [obj, value] : bindings) enqueue(obj);
    for (const auto& obj : ordered)
        lines.push_back(obj + " = \"" + bindings.at(obj) + "\";");

    for (int step : plan.steps) {
        const auto& a = problem.actions[step];
        if (detail::is_get_info(a)) {
            lines.push_back(a.args[0] + " = get_info_api(\"" +
                            detail::arg_label(a.args[0], cat) + "\", " + a.args[1] +
                            ");");
        } else {
            std::string call = detail::output_object(a) + " = " + a.schema + "(";
            auto inputs = detail::input_objects(a);
            for (std::size_t i = 0; i < inputs.size(); ++i) {
                if (i) call += ", ";
                call += inputs[i];
            }
            call += ");";
            lines.push_back(call);
        }
    }

    std::string out;
    for (std::size_t i = 0; i < lines.size(); ++i)
        out += "Step " + std::to_string(i + 1) + ". " + lines[i] + "\n";
    return out;
}

/// Runs the plan in order. get_info_api pulls a value from the info
/// source; other actions are stubs returning opaque tokens <action>#<n>.
inline ExecutionTrace execute(const planner::GroundProblem& problem,
                              const planner::Plan& plan, const BindingEnv& bindings,
                              const InfoSource& info, const catalog::Catalog& cat,
                              std::istream& in = std::cin, std::ostream& out = std::cout) {
    ExecutionTrace trace;
    std::map<std::string, std::string> values = bindings;
    int token_counter = 0;

    for (std::size_t i = 0; i < plan.steps.size(); ++i) {
        const auto& a = problem.actions[plan.steps[i]];
        TraceRecord rec;
        rec.step = static_cast<int>(i);
        rec.action = a.signature();

        if (detail::is_get_info(a)) {
            const std::string& obj = a.args[0];
            std::string label = detail::arg_label(obj, cat);
            std::string value;
            if (info.mode == InfoSource::Mode::AnswerMap) {
                auto it = info.answers.find(obj);
                if (it == info.answers.end()) it = info.answers.find(label);
                if (it == info.answers.end()) {
                    trace.aborted_step = static_cast<int>(i);
                    trace.abort_reason = "no answer for " + label;
                    return trace;
                }
                value = it->second;
            } else {
                out << "? " << label << " (" << a.args[1] << "): " << std::flush;
                if (!std::getline(in, value)) {
                    trace.aborted_step = static_cast<int>(i);
                    trace.abort_reason = "user aborted";
                    return trace;
                }
            }
            values[obj] = value;
            rec.output = value;
            trace.records.push_back(std::move(rec));
            continue;
        }

        for (const auto& obj : detail::input_objects(a)) {
            auto it = values.find(obj);
            if (it == values.end()) {
                trace.aborted_step = static_cast<int>(i);
                trace.abort_reason = "unresolved input " + obj + " for " + a.signature();
                return trace;
            }
            rec.inputs.push_back(it->second);
        }
        std::string token = a.schema + "#" + std::to_string(++token_counter);
        values[detail::output_object(a)] = token;
        rec.output = token;
        trace.records.push_back(std::move(rec));
    }
    trace.completed = true;
    return trace;
}

}  // namespace qaplan::executor
