#pragma once

// Evaluation harness: annotated query datasets, plan scoring against
// ground truth (API orchestration + entity extraction), aggregated
// success-rate reports.

#include <algorithm>
#include <functional>
#include <map>
#include <numeric>
#include <optional>
#include <set>
#include <sstream>
#include <string>
#include <vector>

#include <nlohmann/json.hpp>

#include "qaplan/catalog.hpp"
#include "qaplan/errors.hpp"
#include "qaplan/pipeline.hpp"
#include "qaplan/planner.hpp"
#include "qaplan/taskgen.hpp"

namespace qaplan::eval {

struct GtEntity {
    enum class Kind { Value, Missing, Ref };

    std::string name;  // materialized predicate name, e.g. start_date
    Kind kind = Kind::Value;
    std::string value;
    int ref = -1;  // index of the producing gt call for dataflow
};

struct GtCall {
    std::string api;
    std::vector<GtEntity> entities;
};

struct DatasetCase {
    std::string id;
    std::string query;
    std::string category;
    bool complete = true;
    bool expect_error = false;
    std::vector<GtCall> gt_calls;
};

struct CaseResult {
    std::string case_id;
    bool orchestration_correct = false;
    bool entities_correct = false;
    bool success = false;
    std::string diagnostics;
};

struct ReportRow {
    std::string category;
    bool complete = true;
    int total = 0;
    int success = 0;
    int orchestration = 0;
    int entities = 0;
};

struct Report {
    std::vector<ReportRow> rows;  // one per (category x completeness), per run totals
    int runs = 1;
    std::vector<CaseResult> case_results;  // last run

    double overall_success_rate() const {
        long total = 0, success = 0;
        for (const auto& r : rows) {
            total += r.total;
            success += r.success;
        }
        return total ? static_cast<double>(success) / total : 0.0;
    }
};

// --- value normalization -------------------------------------------------

/// Dates become MM/DD/YYYY (two-digit years resolve to 20YY), amounts
/// become plain digits with two decimals; anything else is unchanged.
inline std::string normalize_value(const std::string& raw) {
    // date-ish: 1-2 digits / 1-2 digits / 2 or 4 digits
    {
        int part = 0;
        std::string fields[3];
        bool datelike = !raw.empty();
        for (char c : raw) {
            if (c == '/') {
                if (++part > 2) {
                    datelike = false;
                    break;
                }
            } else if (c >= '0' && c <= '9') {
                fields[part] += c;
            } else {
                datelike = false;
                break;
            }
        }
        if (datelike && part == 2 && !fields[0].empty() && fields[0].size() <= 2 &&
            !fields[1].empty() && fields[1].size() <= 2 &&
            (fields[2].size() == 2 || fields[2].size() == 4)) {
            auto pad = [](const std::string& s) { return s.size() == 1 ? "0" + s : s; };
            std::string year = fields[2].size() == 2 ? "20" + fields[2] : fields[2];
            return pad(fields[0]) + "/" + pad(fields[1]) + "/" + year;
        }
    }
    // amount-ish: optional $, digits and commas, optional decimals
    {
        std::string digits, cents;
        bool amountlike = !raw.empty();
        bool in_cents = false;
        std::size_t start = raw.starts_with("$") ? 1 : 0;
        if (start >= raw.size()) amountlike = false;
        for (std::size_t i = start; i < raw.size() && amountlike; ++i) {
            char c = raw[i];
            if (c == ',') continue;
            if (c == '.') {
                if (in_cents) amountlike = false;
                in_cents = true;
            } else if (c >= '0' && c <= '9') {
                (in_cents ? cents : digits) += c;
            } else {
                amountlike = false;
            }
        }
        if (amountlike && !digits.empty() && cents.size() <= 2) {
            while (cents.size() < 2) cents += '0';
            return digits + "." + cents;
        }
    }
    return raw;
}

// --- dataset loading -------------------------------------------------------

inline std::vector<DatasetCase> load_dataset(const std::string& text) {
    std::vector<DatasetCase> cases;
    std::istringstream in(text);
    std::string line;
    int lineno = 0;
    while (std::getline(in, line)) {
        ++lineno;
        if (line.find_first_not_of(" \t\r") == std::string::npos) continue;
        nlohmann::json j;
        try {
            j = nlohmann::json::parse(line);
        } catch (const nlohmann::json::parse_error& e) {
            throw SchemaError("dataset line " + std::to_string(lineno) +
                              " is not valid JSON: " + e.what());
        }
        auto fail = [&](const std::string& msg) {
            throw SchemaError("dataset line " + std::to_string(lineno) + ": " + msg);
        };
        DatasetCase c;
        try {
            c.id = j.at("id").get<std::string>();
            c.query = j.at("query").get<std::string>();
            c.category = j.at("category").get<std::string>();
            c.complete = j.at("complete").get<bool>();
            if (j.contains("expect_error")) c.expect_error = j.at("expect_error").get<bool>();
            for (const auto& jc : j.at("gt_calls")) {
                GtCall call;
                call.api = jc.at("api").get<std::string>();
                if (jc.contains("entities")) {
                    for (const auto& je : jc.at("entities")) {
                        GtEntity e;
                        e.name = je.at("name").get<std::string>();
                        if (je.contains("missing") && je.at("missing").get<bool>())
                            e.kind = GtEntity::Kind::Missing;
                        else if (je.contains("ref")) {
                            e.kind = GtEntity::Kind::Ref;
                            e.ref = je.at("ref").get<int>();
                        } else {
                            e.kind = GtEntity::Kind::Value;
                            e.value = je.at("value").get<std::string>();
                        }
                        call.entities.push_back(std::move(e));
                    }
                }
                c.gt_calls.push_back(std::move(call));
            }
        } catch (const nlohmann::json::exception& e) {
            fail(e.what());
        }
        if (c.gt_calls.empty()) fail("case needs at least one gt call");
        for (const auto& call : c.gt_calls) {
            for (const auto& e : call.entities) {
                if (e.kind == GtEntity::Kind::Missing && c.complete)
                    fail("MISSING entity in a complete case");
                if (e.kind == GtEntity::Kind::Ref &&
                    (e.ref < 0 || e.ref >= static_cast<int>(c.gt_calls.size())))
                    fail("REF index out of range");
            }
        }
        cases.push_back(std::move(c));
    }
    return cases;
}

// --- scoring ---------------------------------------------------------------

namespace detail {

struct PlanView {
    // non-get_info actions: (schema, args)
    std::vector<const planner::GroundAction*> api_steps;
    // get_info steps: (object, type)
    std::vector<std::pair<std::string, std::string>> get_info;
};

inline PlanView view_plan(const planner::GroundProblem& problem,
                          const planner::Plan& plan) {
    PlanView v;
    for (int step : plan.steps) {
        const auto& a = problem.actions[step];
        if (a.schema == "get_info_api")
            v.get_info.emplace_back(a.args[0], a.args[1]);
        else
            v.api_steps.push_back(&a);
    }
    return v;
}

// flattened (mapping, argspec) list of a goal's input positions
struct InputSlot {
    const catalog::PredicateMapping* mapping;
    const catalog::ArgSpec* arg;
};

inline std::vector<InputSlot> input_slots(const catalog::GoalDef& goal) {
    std::vector<InputSlot> slots;
    for (const auto& arg : goal.args)
        for (const auto& m : arg.materialized) slots.push_back({&m, &arg});
    return slots;
}

}  // namespace detail

/// Scores one case. orchestration: the plan's non-get_info actions match
/// the ground-truth API multiset and every REF dataflow edge is realized.
/// entities: every concrete ground-truth value matches the bound value of
/// the corresponding argument object, every MISSING entity is covered by
/// exactly one matching get_info step, and the plan has no surplus
/// get_info steps.
inline CaseResult score(const DatasetCase& c, const planner::GroundProblem* problem,
                        const planner::Plan* plan, const taskgen::BindingEnv& bindings,
                        const catalog::Catalog& cat) {
    CaseResult result;
    result.case_id = c.id;
    if (!problem || !plan) {
        result.diagnostics = "no plan generated";
        return result;
    }
    detail::PlanView v = detail::view_plan(*problem, *plan);

    // multiset comparison of API names
    std::multiset<std::string> gt_apis, plan_apis;
    for (const auto& call : c.gt_calls) gt_apis.insert(call.api);
    for (const auto* a : v.api_steps) plan_apis.insert(a->schema);
    if (gt_apis != plan_apis) {
        result.diagnostics = "api multiset mismatch";
        return result;
    }

    int missing_entities = 0;
    for (const auto& call : c.gt_calls)
        for (const auto& e : call.entities)
            if (e.kind == GtEntity::Kind::Missing) ++missing_entities;

    // candidate plan actions per gt call (same api name)
    std::vector<std::vector<int>> candidates(c.gt_calls.size());
    for (std::size_t i = 0; i < c.gt_calls.size(); ++i)
        for (std::size_t j = 0; j < v.api_steps.size(); ++j)
            if (v.api_steps[j]->schema == c.gt_calls[i].api)
                candidates[i].push_back(static_cast<int>(j));

    // checks one full gt-call -> plan-action assignment
    auto check_assignment = [&](const std::vector<int>& assign, bool& refs_ok,
                                bool& entities_ok, std::string& diag) {
        refs_ok = true;
        entities_ok = static_cast<int>(v.get_info.size()) == missing_entities;
        if (!entities_ok) diag = "surplus or missing get_info steps";
        for (std::size_t i = 0; i < c.gt_calls.size(); ++i) {
            const auto& call = c.gt_calls[i];
            const auto* action = v.api_steps[assign[i]];
            const catalog::GoalDef* goal = cat.find_api(call.api);
            if (!goal) {
                refs_ok = entities_ok = false;
                diag = "api " + call.api + " not in catalog";
                return;
            }
            auto slots = detail::input_slots(*goal);
            for (const auto& e : call.entities) {
                int pos = -1;
                for (std::size_t k = 0; k < slots.size(); ++k)
                    if (slots[k].mapping->predicate == e.name) pos = static_cast<int>(k);
                if (pos < 0 || pos + 1 >= static_cast<int>(action->args.size())) {
                    refs_ok = entities_ok = false;
                    diag = "entity " + e.name + " has no input slot on " + call.api;
                    return;
                }
                const std::string& obj = action->args[pos];
                switch (e.kind) {
                    case GtEntity::Kind::Value: {
                        auto it = bindings.find(obj);
                        if (it == bindings.end() ||
                            normalize_value(it->second) != normalize_value(e.value)) {
                            entities_ok = false;
                            diag = "entity " + e.name + " value mismatch";
                        }
                        break;
                    }
                    case GtEntity::Kind::Missing: {
                        int hits = 0;
                        for (const auto& [gobj, gtype] : v.get_info)
                            if (gobj == obj && gtype == slots[pos].arg->pddl_value_type)
                                ++hits;
                        if (hits != 1 || bindings.count(obj)) {
                            entities_ok = false;
                            diag = "entity " + e.name + " not gathered via get_info";
                        }
                        break;
                    }
                    case GtEntity::Kind::Ref: {
                        const auto* producer = v.api_steps[assign[e.ref]];
                        if (obj != producer->args.back()) {
                            refs_ok = false;
                            diag = "dataflow edge for " + e.name + " not realized";
                        }
                        break;
                    }
                }
            }
        }
    };

    // enumerate assignments (duplicate APIs are rare and groups tiny)
    bool best_refs = false, best_entities = false, best_both = false;
    std::string diag;
    std::vector<int> assign(c.gt_calls.size(), -1);
    std::vector<bool> used(v.api_steps.size(), false);
    std::function<void(std::size_t)> enumerate = [&](std::size_t i) {
        if (best_both) return;
        if (i == c.gt_calls.size()) {
            bool refs_ok = false, entities_ok = false;
            std::string d;
            check_assignment(assign, refs_ok, entities_ok, d);
            if (refs_ok && entities_ok) best_both = true;
            best_refs = best_refs || refs_ok;
            best_entities = best_entities || entities_ok;
            if (diag.empty()) diag = d;
            return;
        }
        for (int cand : candidates[i]) {
            if (used[cand]) continue;
            used[cand] = true;
            assign[i] = cand;
            enumerate(i + 1);
            used[cand] = false;
        }
    };
    enumerate(0);

    result.orchestration_correct = best_refs;
    result.entities_correct = best_entities;
    result.success = best_both;
    if (!result.success) result.diagnostics = diag.empty() ? "no valid assignment" : diag;
    return result;
}

// --- harness -----------------------------------------------------------------

/// Runs the full pipeline per case per run. Per-case pipeline errors are
/// recorded as failures with diagnostics, never aborting the run.
inline Report run_eval(const std::vector<DatasetCase>& dataset,
                       const pipeline::Pipeline& pipe, int runs = 1) {
    Report report;
    report.runs = runs;
    std::map<std::pair<std::string, bool>, ReportRow> rows;

    for (int run = 0; run < runs; ++run) {
        report.case_results.clear();
        for (const auto& c : dataset) {
            CaseResult cr;
            cr.case_id = c.id;
            try {
                pipeline::AnswerResult r = pipeline::answer(pipe, c.query, c.id);
                if (!r.errors.empty()) {
                    if (c.expect_error) {
                        cr.orchestration_correct = cr.entities_correct = cr.success = true;
                        cr.diagnostics = "expected constraint violation reported";
                    } else {
                        cr.diagnostics = "constraint violation: " + r.errors.front();
                    }
                } else if (c.expect_error) {
                    cr.diagnostics = "expected a constraint violation, got none";
                } else if (r.solve.status != planner::SolveStatus::Solved) {
                    cr.diagnostics = "planner failed to find a plan";
                } else {
                    cr = score(c, &r.problem, &r.solve.plan, r.bindings, pipe.catalog);
                }
            } catch (const std::exception& e) {
                cr.diagnostics = std::string("pipeline error: ") + e.what();
            }
            auto& row = rows[{c.category, c.complete}];
            row.category = c.category;
            row.complete = c.complete;
            ++row.total;
            if (cr.success) ++row.success;
            if (cr.orchestration_correct) ++row.orchestration;
            if (cr.entities_correct) ++row.entities;
            report.case_results.push_back(std::move(cr));
        }
    }
    for (auto& [key, row] : rows) report.rows.push_back(row);
    return report;
}

inline std::string render_report_text(const Report& report) {
    std::ostringstream out;
    out << "category                        complete   n  success%  orch%  entity%\n";
    auto pct = [](int num, int den) {
        char buf[16];
        std::snprintf(buf, sizeof buf, "%6.2f", den ? 100.0 * num / den : 0.0);
        return std::string(buf);
    };
    for (const auto& r : report.rows) {
        char line[160];
        std::snprintf(line, sizeof line, "%-30s  %-8s %4d  %s   %s  %s\n",
                      r.category.c_str(), r.complete ? "yes" : "no",
                      r.total / report.runs, pct(r.success, r.total).c_str(),
                      pct(r.orchestration, r.total).c_str(),
                      pct(r.entities, r.total).c_str());
        out << line;
    }
    out << "overall success rate: " << pct(static_cast<int>(report.overall_success_rate() * 10000), 10000)
        << "%\n";
    return out.str();
}

inline nlohmann::json report_to_json(const Report& report) {
    nlohmann::json rows = nlohmann::json::array();
    for (const auto& r : report.rows) {
        rows.push_back({{"category", r.category},
                        {"complete", r.complete},
                        {"total", r.total / report.runs},
                        {"success_rate", r.total ? double(r.success) / r.total : 0.0},
                        {"orchestration_rate",
                         r.total ? double(r.orchestration) / r.total : 0.0},
                        {"entity_rate", r.total ? double(r.entities) / r.total : 0.0}});
    }
    nlohmann::json cases = nlohmann::json::array();
    for (const auto& c : report.case_results) {
        cases.push_back({{"id", c.case_id},
                         {"orchestration_correct", c.orchestration_correct},
                         {"entities_correct", c.entities_correct},
                         {"success", c.success},
                         {"diagnostics", c.diagnostics}});
    }
    return {{"rows", rows},
            {"overall_success_rate", report.overall_success_rate()},
            {"runs", report.runs},
            {"cases", cases}};
}

}  // namespace qaplan::eval
