#pragma once

// Grounding of a typed-STRIPS domain+task into a propositional problem,
// heuristic forward search (greedy / A* over the additive heuristic of
// the delete relaxation), a breadth-first oracle and a plan validator.
// Negative preconditions are handled natively under closed world.

#include <algorithm>
#include <chrono>
#include <cstdint>
#include <functional>
#include <limits>
#include <map>
#include <queue>
#include <set>
#include <string>
#include <unordered_map>
#include <vector>

#include "qaplan/pddl.hpp"

namespace qaplan::planner {

struct GroundAction {
    std::string schema;
    std::vector<std::string> args;
    std::vector<int> pre_pos;
    std::vector<int> pre_neg;
    std::vector<int> add;
    std::vector<int> del;
    int cost = 1;

    std::string signature() const {
        std::string out = schema + "(";
        for (std::size_t i = 0; i < args.size(); ++i) {
            if (i) out += ", ";
            out += args[i];
        }
        out += ")";
        return out;
    }
};

struct GroundProblem {
    std::vector<pddl::GroundAtom> atoms;  // id -> atom
    std::vector<int> init;
    std::vector<int> goal;
    std::vector<GroundAction> actions;    // canonical order by (schema, args)
};

struct Plan {
    std::vector<int> steps;  // indices into GroundProblem::actions
    int total_cost = 0;
};

enum class SolveStatus { Solved, Unsolvable, Timeout, LimitExceeded };

struct SolveResult {
    SolveStatus status = SolveStatus::Unsolvable;
    Plan plan;
    std::uint64_t expanded = 0;
};

enum class Strategy { GreedyHadd, AstarHadd, Bfs };

struct SolveConfig {
    double time_limit_s = 1.0;
    Strategy strategy = Strategy::GreedyHadd;
};

struct ValidationResult {
    bool valid = false;
    int failing_step = -1;  // -1: goal check (or success)
    std::string reason;
};

// --- grounding ----------------------------------------------------------

namespace detail {

class AtomInterner {
public:
    int intern(const pddl::GroundAtom& atom, std::vector<pddl::GroundAtom>& atoms) {
        std::string key = pddl::to_string(atom);
        auto it = ids_.find(key);
        if (it != ids_.end()) return it->second;
        int id = static_cast<int>(atoms.size());
        atoms.push_back(atom);
        ids_.emplace(std::move(key), id);
        return id;
    }

private:
    std::unordered_map<std::string, int> ids_;
};

}  // namespace detail

/// One ground action per type-consistent parameter assignment, with
/// static pruning: predicates that never occur in effects are evaluated
/// against init at grounding time and dropped from the action.
inline GroundProblem ground(const pddl::Domain& domain, const pddl::TaskProblem& task,
                            const std::map<std::string, int>* costs = nullptr) {
    pddl::validate_task(domain, task);

    GroundProblem problem;
    detail::AtomInterner interner;

    // objects by type (domain constants + task objects, deduplicated)
    std::map<std::string, std::vector<std::string>> by_type;
    std::set<std::string> seen;
    for (const auto& c : domain.constants)
        if (seen.insert(c.name).second) by_type[c.type].push_back(c.name);
    for (const auto& o : task.objects)
        if (seen.insert(o.name).second) by_type[o.type].push_back(o.name);
    for (auto& [t, objs] : by_type) std::sort(objs.begin(), objs.end());

    std::set<std::string> fluent_preds;
    for (const auto& action : domain.actions)
        for (const auto& eff : action.effects) fluent_preds.insert(eff.predicate);

    std::set<int> init_ids;
    for (const auto& a : task.init)
        init_ids.insert(interner.intern(a, problem.atoms));
    std::set<pddl::GroundAtom> init_set(task.init.begin(), task.init.end());

    for (const auto& schema : domain.actions) {
        int cost = 1;
        if (costs) {
            auto it = costs->find(schema.name);
            if (it != costs->end()) cost = it->second;
        }
        std::vector<std::string> assignment(schema.parameters.size());
        std::vector<GroundAction> grounded;

        auto instantiate = [&](const pddl::Literal& lit) {
            pddl::GroundAtom atom;
            atom.predicate = lit.predicate;
            for (const auto& arg : lit.args) {
                if (arg.starts_with("?")) {
                    for (std::size_t k = 0; k < schema.parameters.size(); ++k)
                        if (schema.parameters[k].name == arg) {
                            atom.args.push_back(assignment[k]);
                            break;
                        }
                } else {
                    atom.args.push_back(arg);
                }
            }
            return atom;
        };

        std::function<void(std::size_t)> assign = [&](std::size_t idx) {
            if (idx == schema.parameters.size()) {
                GroundAction ga;
                ga.schema = schema.name;
                ga.args = assignment;
                ga.cost = cost;
                for (const auto& lit : schema.preconditions) {
                    pddl::GroundAtom atom = instantiate(lit);
                    if (!fluent_preds.count(atom.predicate)) {
                        bool holds = init_set.count(atom) > 0;
                        if (holds == lit.negated) return;  // statically false
                        continue;
                    }
                    int id = interner.intern(atom, problem.atoms);
                    (lit.negated ? ga.pre_neg : ga.pre_pos).push_back(id);
                }
                for (const auto& lit : schema.effects) {
                    int id = interner.intern(instantiate(lit), problem.atoms);
                    (lit.negated ? ga.del : ga.add).push_back(id);
                }
                auto uniq = [](std::vector<int>& v) {
                    std::sort(v.begin(), v.end());
                    v.erase(std::unique(v.begin(), v.end()), v.end());
                };
                uniq(ga.pre_pos);
                uniq(ga.pre_neg);
                uniq(ga.add);
                uniq(ga.del);
                grounded.push_back(std::move(ga));
                return;
            }
            auto it = by_type.find(schema.parameters[idx].type);
            if (it == by_type.end()) return;
            for (const auto& obj : it->second) {
                assignment[idx] = obj;
                assign(idx + 1);
            }
        };
        assign(0);
        for (auto& ga : grounded) problem.actions.push_back(std::move(ga));
    }

    std::sort(problem.actions.begin(), problem.actions.end(),
              [](const GroundAction& a, const GroundAction& b) {
                  return std::tie(a.schema, a.args) < std::tie(b.schema, b.args);
              });

    problem.init.assign(init_ids.begin(), init_ids.end());
    for (const auto& a : task.goal)
        problem.goal.push_back(interner.intern(a, problem.atoms));
    std::sort(problem.goal.begin(), problem.goal.end());
    problem.goal.erase(std::unique(problem.goal.begin(), problem.goal.end()),
                       problem.goal.end());
    return problem;
}

// --- state handling -----------------------------------------------------

namespace detail {

using State = std::vector<std::uint64_t>;

inline State make_state(std::size_t n_atoms, const std::vector<int>& ids) {
    State s((n_atoms + 63) / 64, 0);
    for (int id : ids) s[id / 64] |= std::uint64_t(1) << (id % 64);
    return s;
}

inline bool test(const State& s, int id) {
    return (s[id / 64] >> (id % 64)) & 1;
}

inline void set_bit(State& s, int id) { s[id / 64] |= std::uint64_t(1) << (id % 64); }
inline void clear_bit(State& s, int id) { s[id / 64] &= ~(std::uint64_t(1) << (id % 64)); }

inline bool applicable(const State& s, const GroundAction& a) {
    for (int id : a.pre_pos)
        if (!test(s, id)) return false;
    for (int id : a.pre_neg)
        if (test(s, id)) return false;
    return true;
}

inline State apply(const State& s, const GroundAction& a) {
    State next = s;
    for (int id : a.del) clear_bit(next, id);
    for (int id : a.add) set_bit(next, id);
    return next;
}

inline bool goal_satisfied(const State& s, const std::vector<int>& goal) {
    for (int id : goal)
        if (!test(s, id)) return false;
    return true;
}

struct StateHash {
    std::size_t operator()(const State& s) const {
        std::size_t h = 14695981039346656037ull;
        for (auto w : s) {
            h ^= w;
            h *= 1099511628211ull;
        }
        return h;
    }
};

constexpr int kInf = std::numeric_limits<int>::max() / 4;

// Additive heuristic over the delete relaxation. Negative preconditions
// are treated as free, which keeps the relaxation an over-approximation
// of reachability (h == inf implies the goal is truly unreachable).
inline int hadd(const GroundProblem& problem, const State& s) {
    std::vector<int> cost(problem.atoms.size(), kInf);
    for (std::size_t id = 0; id < problem.atoms.size(); ++id)
        if (test(s, static_cast<int>(id))) cost[id] = 0;
    bool changed = true;
    while (changed) {
        changed = false;
        for (const auto& a : problem.actions) {
            long pre = 0;
            bool reachable = true;
            for (int id : a.pre_pos) {
                if (cost[id] >= kInf) {
                    reachable = false;
                    break;
                }
                pre += cost[id];
            }
            if (!reachable) continue;
            long through = pre + a.cost;
            for (int id : a.add) {
                if (through < cost[id]) {
                    cost[id] = static_cast<int>(through);
                    changed = true;
                }
            }
        }
    }
    long h = 0;
    for (int id : problem.goal) {
        if (cost[id] >= kInf) return kInf;
        h += cost[id];
    }
    return static_cast<int>(std::min<long>(h, kInf));
}

}  // namespace detail

// --- validator ----------------------------------------------------------

/// Simulates the plan from init; delete-then-add state update, then the
/// goal check. Failure is a return value, never an exception.
inline ValidationResult validate(const GroundProblem& problem, const Plan& plan) {
    detail::State state =
        detail::make_state(problem.atoms.size(), problem.init);
    for (std::size_t i = 0; i < plan.steps.size(); ++i) {
        const GroundAction& a = problem.actions[plan.steps[i]];
        for (int id : a.pre_pos)
            if (!detail::test(state, id))
                return {false, static_cast<int>(i),
                        "precondition " + pddl::to_string(problem.atoms[id]) +
                            " not satisfied for " + a.signature()};
        for (int id : a.pre_neg)
            if (detail::test(state, id))
                return {false, static_cast<int>(i),
                        "negative precondition (not " +
                            pddl::to_string(problem.atoms[id]) + ") violated for " +
                            a.signature()};
        state = detail::apply(state, a);
    }
    if (!detail::goal_satisfied(state, problem.goal))
        return {false, -1, "goal not satisfied after final step"};
    return {true, -1, ""};
}

// --- search ---------------------------------------------------------------

namespace detail {

struct Node {
    State state;
    int parent = -1;
    int action = -1;
    int g = 0;
};

inline Plan extract_plan(const std::vector<Node>& nodes, int idx,
                         const GroundProblem& problem) {
    Plan plan;
    while (idx >= 0 && nodes[idx].action >= 0) {
        plan.steps.push_back(nodes[idx].action);
        idx = nodes[idx].parent;
    }
    std::reverse(plan.steps.begin(), plan.steps.end());
    for (int step : plan.steps) plan.total_cost += problem.actions[step].cost;
    return plan;
}

}  // namespace detail

/// Breadth-first search over states; returns a shortest plan (by step
/// count). Independent oracle for solve().
inline SolveResult bfs_solve(const GroundProblem& problem,
                             std::size_t node_limit = 1000000) {
    SolveResult result;
    detail::State init = detail::make_state(problem.atoms.size(), problem.init);
    std::vector<detail::Node> nodes;
    nodes.push_back({init, -1, -1, 0});
    std::unordered_map<detail::State, int, detail::StateHash> visited;
    visited.emplace(init, 0);
    std::queue<int> open;
    open.push(0);
    while (!open.empty()) {
        int idx = open.front();
        open.pop();
        detail::State state = nodes[idx].state;
        if (detail::goal_satisfied(state, problem.goal)) {
            result.status = SolveStatus::Solved;
            result.plan = detail::extract_plan(nodes, idx, problem);
            result.expanded = nodes.size();
            return result;
        }
        ++result.expanded;
        if (nodes.size() > node_limit) {
            result.status = SolveStatus::LimitExceeded;
            return result;
        }
        for (std::size_t ai = 0; ai < problem.actions.size(); ++ai) {
            const auto& a = problem.actions[ai];
            if (!detail::applicable(state, a)) continue;
            detail::State next = detail::apply(state, a);
            if (visited.count(next)) continue;
            int nidx = static_cast<int>(nodes.size());
            nodes.push_back({next, idx, static_cast<int>(ai), nodes[idx].g + 1});
            visited.emplace(std::move(next), nidx);
            open.push(nidx);
        }
    }
    result.status = SolveStatus::Unsolvable;
    return result;
}

/// Heuristic forward search. Deterministic: ties break on heuristic
/// value, then cost-so-far, then canonical action order (successors are
/// generated in that order), then FIFO.
inline SolveResult solve(const GroundProblem& problem, const SolveConfig& config = {}) {
    if (config.strategy == Strategy::Bfs) return bfs_solve(problem);

    SolveResult result;
    auto deadline = std::chrono::steady_clock::now() +
                    std::chrono::duration_cast<std::chrono::steady_clock::duration>(
                        std::chrono::duration<double>(config.time_limit_s));

    detail::State init = detail::make_state(problem.atoms.size(), problem.init);
    int h0 = detail::hadd(problem, init);
    if (h0 >= detail::kInf) {
        result.status = SolveStatus::Unsolvable;
        return result;
    }

    std::vector<detail::Node> nodes;
    nodes.push_back({init, -1, -1, 0});

    const bool astar = config.strategy == Strategy::AstarHadd;
    // (priority, h, seq, node index); priority = h for greedy, g+h for A*
    using Entry = std::tuple<int, int, std::uint64_t, int>;
    std::priority_queue<Entry, std::vector<Entry>, std::greater<>> open;
    std::uint64_t seq = 0;
    open.emplace(astar ? h0 : h0, h0, seq++, 0);

    // best g seen per state (A* may reopen; greedy uses it as closed set)
    std::unordered_map<detail::State, int, detail::StateHash> best_g;
    best_g.emplace(init, 0);

    while (!open.empty()) {
        if (std::chrono::steady_clock::now() > deadline) {
            result.status = SolveStatus::Timeout;
            return result;
        }
        auto [prio, h, s, idx] = open.top();
        open.pop();
        const detail::State state = nodes[idx].state;
        auto it = best_g.find(state);
        if (it != best_g.end() && nodes[idx].g > it->second) continue;  // stale entry
        if (detail::goal_satisfied(state, problem.goal)) {
            result.status = SolveStatus::Solved;
            result.plan = detail::extract_plan(nodes, idx, problem);
            return result;
        }
        ++result.expanded;
        for (std::size_t ai = 0; ai < problem.actions.size(); ++ai) {
            const auto& a = problem.actions[ai];
            if (!detail::applicable(state, a)) continue;
            detail::State next = detail::apply(state, a);
            int g = nodes[idx].g + a.cost;
            auto nit = best_g.find(next);
            if (nit != best_g.end() && (!astar || nit->second <= g)) continue;
            int nh = detail::hadd(problem, next);
            if (nh >= detail::kInf) continue;  // dead end under relaxation
            int nidx = static_cast<int>(nodes.size());
            nodes.push_back({next, idx, static_cast<int>(ai), g});
            best_g[std::move(next)] = g;
            open.emplace(astar ? g + nh : nh, nh, seq++, nidx);
        }
    }
    result.status = SolveStatus::Unsolvable;
    return result;
}

}  // namespace qaplan::planner
