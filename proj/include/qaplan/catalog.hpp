#pragma once

// Machine-readable catalog of supported goals: argument types, required
// arguments, and the mapping from materialized predicates to domain-PDDL
// predicate and value-type names. Also builds the translation prompt.

#include <map>
#include <optional>
#include <set>
#include <string>
#include <vector>

#include <nlohmann/json.hpp>

#include "qaplan/errors.hpp"

namespace qaplan::catalog {

struct ArgType {
    std::string name;
    std::string kind;  // "examples" or "possible_values"
    // surface text -> normalized value (single string or tuple of strings)
    std::vector<std::pair<std::string, std::vector<std::string>>> examples;
    std::vector<std::string> possible_values;
};

// One (materialized predicate, domain predicate) mapping of an argument.
// A single surface argument may fan out into several of these, e.g.
// report_period -> start_date/report_start_date + end_date/report_end_date.
struct PredicateMapping {
    std::string predicate;       // name in the materialized representation
    std::string pddl_predicate;  // goal-condition predicate in domain PDDL
    std::string label;           // human label used by get_info_api rendering
};

struct ArgSpec {
    std::string name;
    std::string arg_type;        // reference into Catalog::arg_types
    std::string pddl_value_type; // var_type of the argument object
    std::vector<PredicateMapping> materialized;
};

struct GoalDef {
    std::string goal_id;      // goal_1 .. goal_9
    std::string concept_name;      // PDDL var_type of the goal object
    std::string api;          // action schema implementing the goal
    std::string description;
    bool mention_significant = false;  // third _goal argument is load-bearing
    std::vector<ArgSpec> args;
};

struct InContextExample {
    std::string goals;
    std::string text;
    std::string answer;
};

struct Catalog {
    std::vector<GoalDef> goals;
    std::vector<ArgType> arg_types;
    std::vector<InContextExample> in_context_examples;

    const GoalDef* find_goal(const std::string& goal_id) const {
        for (const auto& g : goals)
            if (g.goal_id == goal_id) return &g;
        return nullptr;
    }

    const GoalDef* find_concept(const std::string& concept_name) const {
        for (const auto& g : goals)
            if (g.concept_name == concept_name) return &g;
        return nullptr;
    }

    const GoalDef* find_api(const std::string& api) const {
        for (const auto& g : goals)
            if (g.api == api) return &g;
        return nullptr;
    }

    const ArgType* find_arg_type(const std::string& name) const {
        for (const auto& t : arg_types)
            if (t.name == name) return &t;
        return nullptr;
    }
};

namespace detail {

inline std::string path_str(const std::string& base, const std::string& key) {
    return base + "." + key;
}

template <typename T>
T get_field(const nlohmann::json& obj, const std::string& key, const std::string& path) {
    if (!obj.contains(key))
        throw SchemaError("missing field " + path_str(path, key));
    try {
        return obj.at(key).get<T>();
    } catch (const nlohmann::json::exception&) {
        throw SchemaError("wrong type at " + path_str(path, key));
    }
}

}  // namespace detail

/// Parses and validates a catalog document (see data/catalog.json for the
/// bundled example).
inline Catalog load_catalog(const nlohmann::json& doc) {
    if (!doc.is_object()) throw SchemaError("catalog document must be an object");
    Catalog cat;

    for (const auto& jt : detail::get_field<nlohmann::json>(doc, "arg_types", "$")) {
        ArgType at;
        at.name = detail::get_field<std::string>(jt, "name", "arg_types[]");
        at.kind = detail::get_field<std::string>(jt, "kind", "arg_types[]");
        if (at.kind == "examples") {
            auto ex = detail::get_field<nlohmann::json>(jt, "examples", "arg_types[]");
            for (auto it = ex.begin(); it != ex.end(); ++it) {
                std::vector<std::string> vals;
                if (it.value().is_array())
                    vals = it.value().get<std::vector<std::string>>();
                else
                    vals.push_back(it.value().get<std::string>());
                at.examples.emplace_back(it.key(), std::move(vals));
            }
        } else if (at.kind == "possible_values") {
            at.possible_values = detail::get_field<std::vector<std::string>>(
                jt, "possible_values", "arg_types[]");
        } else {
            throw SchemaError("arg_types[].kind must be examples or possible_values: " +
                              at.name);
        }
        if (cat.find_arg_type(at.name))
            throw SchemaError("duplicate arg type " + at.name);
        cat.arg_types.push_back(std::move(at));
    }

    for (const auto& jg : detail::get_field<nlohmann::json>(doc, "goals", "$")) {
        GoalDef g;
        g.goal_id = detail::get_field<std::string>(jg, "goal_id", "goals[]");
        g.concept_name = detail::get_field<std::string>(jg, "concept", "goals[]");
        g.api = detail::get_field<std::string>(jg, "api", "goals[]");
        g.description = detail::get_field<std::string>(jg, "description", "goals[]");
        if (jg.contains("mention_significant"))
            g.mention_significant = jg.at("mention_significant").get<bool>();
        if (cat.find_goal(g.goal_id))
            throw SchemaError("duplicate goal id " + g.goal_id);
        if (cat.find_concept(g.concept_name))
            throw SchemaError("duplicate goal concept " + g.concept_name);
        std::set<std::string> arg_names;
        if (jg.contains("args")) {
            for (const auto& ja : jg.at("args")) {
                ArgSpec spec;
                spec.name = detail::get_field<std::string>(ja, "name", "goals[].args[]");
                spec.arg_type =
                    detail::get_field<std::string>(ja, "arg_type", "goals[].args[]");
                spec.pddl_value_type = detail::get_field<std::string>(
                    ja, "pddl_value_type", "goals[].args[]");
                if (!cat.find_arg_type(spec.arg_type))
                    throw DanglingReference("goal " + g.goal_id +
                                            " references unknown arg type " +
                                            spec.arg_type);
                if (!arg_names.insert(spec.name).second)
                    throw SchemaError("duplicate arg " + spec.name + " in " + g.goal_id);
                for (const auto& jm : detail::get_field<nlohmann::json>(
                         ja, "materialized", "goals[].args[]")) {
                    PredicateMapping m;
                    m.predicate = detail::get_field<std::string>(
                        jm, "predicate", "goals[].args[].materialized[]");
                    m.pddl_predicate = detail::get_field<std::string>(
                        jm, "pddl_predicate", "goals[].args[].materialized[]");
                    if (jm.contains("label"))
                        m.label = jm.at("label").get<std::string>();
                    else {
                        m.label = m.predicate;
                        for (auto& c : m.label)
                            if (c == '_') c = ' ';
                    }
                    spec.materialized.push_back(std::move(m));
                }
                if (spec.materialized.empty())
                    throw SchemaError("arg " + spec.name + " of " + g.goal_id +
                                      " has no materialized predicates");
                g.args.push_back(std::move(spec));
            }
        }
        cat.goals.push_back(std::move(g));
    }

    if (doc.contains("in_context_examples")) {
        for (const auto& je : doc.at("in_context_examples")) {
            InContextExample ex;
            ex.goals = detail::get_field<std::string>(je, "goals", "in_context_examples[]");
            ex.text = detail::get_field<std::string>(je, "text", "in_context_examples[]");
            ex.answer =
                detail::get_field<std::string>(je, "answer", "in_context_examples[]");
            cat.in_context_examples.push_back(std::move(ex));
        }
    }
    return cat;
}

inline Catalog load_catalog(const std::string& text) {
    nlohmann::json doc;
    try {
        doc = nlohmann::json::parse(text);
    } catch (const nlohmann::json::parse_error& e) {
        throw SchemaError(std::string("catalog is not valid JSON: ") + e.what());
    }
    return load_catalog(doc);
}

/// ArgSpecs of a goal in declaration order.
inline const std::vector<ArgSpec>& required_args(const Catalog& cat,
                                                 const std::string& goal_id) {
    const GoalDef* g = cat.find_goal(goal_id);
    if (!g) throw UnknownGoal("unknown goal " + goal_id);
    return g->args;
}

namespace detail {

inline std::string serialize_arg_type(const ArgType& t) {
    std::string out = t.name + " = {";
    if (t.kind == "examples") {
        out += "'examples': {";
        bool first = true;
        for (const auto& [surface, vals] : t.examples) {
            if (!first) out += ", ";
            first = false;
            out += "'" + surface + "': ";
            if (vals.size() == 1) {
                out += "'" + vals[0] + "'";
            } else {
                out += "(";
                for (std::size_t i = 0; i < vals.size(); ++i) {
                    if (i) out += ", ";
                    out += "'" + vals[i] + "'";
                }
                out += ")";
            }
        }
        out += "}";
    } else {
        out += "'possible_values': [";
        for (std::size_t i = 0; i < t.possible_values.size(); ++i) {
            if (i) out += ", ";
            out += "'" + t.possible_values[i] + "'";
        }
        out += "]";
    }
    out += "}";
    return out;
}

inline std::string serialize_goals_block(const Catalog& cat) {
    std::string out;
    for (const auto& t : cat.arg_types) {
        out += serialize_arg_type(t);
        out += "\n\n";
    }
    out += "[";
    for (std::size_t i = 0; i < cat.goals.size(); ++i) {
        const auto& g = cat.goals[i];
        if (i) out += ",\n";
        out += "{'type': '" + g.goal_id + "', 'description': '" + g.description +
               "', 'required information': [";
        for (std::size_t j = 0; j < g.args.size(); ++j) {
            if (j) out += ", ";
            out += "{'name': '" + g.args[j].name + "', 'type': " + g.args[j].arg_type + "}";
        }
        out += "]}";
    }
    out += "]";
    return out;
}

}  // namespace detail

inline constexpr const char* kPromptInstructions =
    "Given goal types with their required information. Extract from the\n"
    "provided user query:\n"
    "1. The one or more goals of the query from the given set of goals.\n"
    "Represent each extracted goal <x> of type <T> as \"_goal(<x>, <T>).\".\n"
    "2. If the user query contains any required information for the extracted\n"
    "goal, then extract that too. While doing so, if possible values\n"
    "are defined for the argument, then choose one from them if applicable.\n";

/// Deterministic translation prompt: instructions, in-context examples,
/// the domain goals block, then the query.
inline std::string build_prompt(const Catalog& cat, const std::string& query) {
    std::string out = kPromptInstructions;
    out += "\nBelow a few examples of goals, text and the answer.\n\n";
    for (const auto& ex : cat.in_context_examples) {
        out += "Goals: \"\"\"" + ex.goals + "\"\"\"\n\n";
        out += "Text: \"\"\"" + ex.text + "\"\"\"\n\n";
        out += "Answer:\n" + ex.answer + "\n\n";
    }
    out += "Goals: \"\"\"" + detail::serialize_goals_block(cat) + "\"\"\"\n\n";
    out += "Text: \"\"\"" + query + "\"\"\"\n";
    out += "Answer:";
    return out;
}

}  // namespace qaplan::catalog
