#pragma once

// Materialized representation -> task PDDL. Concrete argument values are
// kept out of PDDL state: init gets a unary (has_value o) and the value
// itself goes into the binding environment side table.

#include <map>
#include <set>
#include <string>
#include <utility>
#include <vector>

#include "qaplan/asp.hpp"
#include "qaplan/catalog.hpp"
#include "qaplan/errors.hpp"
#include "qaplan/pddl.hpp"

namespace qaplan::taskgen {

using asp::FactSet;
using asp::Term;

/// Task object name -> concrete value text.
using BindingEnv = std::map<std::string, std::string>;

inline bool free_of_errors(const FactSet& materialized) {
    for (const auto& atom : materialized)
        if (atom.predicate == "error") return false;
    return true;
}

/// Compiles a materialized representation (no error atoms) into a task
/// problem plus the value bindings of its objects.
///
/// Per goal atom goal(x, t): object `x - var`, init (has_type x t). Per
/// argument predicate p of t with domain predicate P and value type vt:
///   - value present as quoted string v: object x_p, init (has_type x_p vt)
///     and (has_value x_p), goal (P x x_p), bindings[x_p] = v;
///   - value is another goal variable y (dataflow): goal (P x y) plus an
///     extra init (has_type y vt), no fresh object;
///   - value absent: object x_p, init (has_type x_p vt), goal (P x x_p) —
///     the planner closes the gap with get_info_api.
/// Goals without arguments get the goal atom (has_value x) so their API
/// still appears in the plan.
inline std::pair<pddl::TaskProblem, BindingEnv> generate_task(
    const FactSet& materialized, const catalog::Catalog& cat,
    const std::string& problem_name) {
    if (!free_of_errors(materialized))
        throw std::invalid_argument("materialized representation contains error atoms");

    pddl::TaskProblem task;
    task.name = problem_name;
    task.domain_name = "gen-orch-planner";
    BindingEnv bindings;

    // goal variable -> concept
    std::map<std::string, std::string> goal_vars;
    for (const auto& atom : materialized) {
        if (atom.predicate != "goal" || atom.terms.size() != 2) continue;
        if (atom.terms[0].kind != Term::Kind::Symbol ||
            atom.terms[1].kind != Term::Kind::Symbol)
            throw UnknownConcept("malformed goal atom " + asp::to_string(atom));
        const std::string& var = atom.terms[0].text;
        const std::string& concept_name = atom.terms[1].text;
        if (!cat.find_concept(concept_name))
            throw UnknownConcept("goal concept " + concept_name + " not in catalog");
        auto [it, inserted] = goal_vars.emplace(var, concept_name);
        if (!inserted && it->second != concept_name)
            throw ConflictingValue("goal variable " + var + " has two concepts");
    }

    std::set<std::string> var_types;
    auto add_var_object = [&](const std::string& name) {
        task.objects.push_back({name, "var"});
    };

    for (const auto& [var, concept_name] : goal_vars) {
        const catalog::GoalDef* goal = cat.find_concept(concept_name);
        add_var_object(var);
        task.init.insert({"has_type", {var, concept_name}});
        var_types.insert(concept_name);
        for (const auto& arg : goal->args) {
            for (const auto& mapping : arg.materialized) {
                // find p(var, v, vt) in the materialized rep
                const Term* value = nullptr;
                for (const auto& atom : materialized) {
                    if (atom.predicate != mapping.predicate || atom.terms.size() != 3)
                        continue;
                    if (atom.terms[0].kind != Term::Kind::Symbol ||
                        atom.terms[0].text != var)
                        continue;
                    if (value && !(*value == atom.terms[1]))
                        throw ConflictingValue("two values for " + mapping.predicate +
                                               " of " + var);
                    value = &atom.terms[1];
                }
                if (value && value->kind == Term::Kind::Symbol) {
                    // dataflow: the argument is another goal's output
                    if (!goal_vars.count(value->text))
                        throw UnknownConcept("argument " + mapping.predicate + " of " +
                                             var + " references unknown variable " +
                                             value->text);
                    task.goal.insert({mapping.pddl_predicate, {var, value->text}});
                    task.init.insert({"has_type", {value->text, arg.pddl_value_type}});
                    var_types.insert(arg.pddl_value_type);
                    continue;
                }
                std::string obj = var + "_" + mapping.predicate;
                add_var_object(obj);
                task.init.insert({"has_type", {obj, arg.pddl_value_type}});
                var_types.insert(arg.pddl_value_type);
                task.goal.insert({mapping.pddl_predicate, {var, obj}});
                if (value) {
                    if (value->kind != Term::Kind::String)
                        throw ConflictingValue("argument " + mapping.predicate + " of " +
                                               var + " has a non-string value");
                    task.init.insert({"has_value", {obj}});
                    bindings[obj] = value->text;
                }
            }
        }
        if (goal->args.empty()) task.goal.insert({"has_value", {var}});
    }

    for (const auto& t : var_types) task.objects.push_back({t, "var_type"});
    task.normalize();
    return {std::move(task), std::move(bindings)};
}

}  // namespace qaplan::taskgen
