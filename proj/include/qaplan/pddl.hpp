#pragma once

// Typed-STRIPS PDDL subset: flat types, optional constants, predicates,
// actions with and-conjunctions of (possibly negated) literals. No ADL,
// no conditional effects, no numeric fluents.

#include <algorithm>
#include <map>
#include <set>
#include <string>
#include <string_view>
#include <vector>

#include "qaplan/errors.hpp"

namespace qaplan::pddl {

struct TypedName {
    std::string name;
    std::string type;
    auto operator<=>(const TypedName&) const = default;
};

struct Predicate {
    std::string name;
    std::vector<TypedName> params;
    bool operator==(const Predicate&) const = default;
};

// Literal over action parameters (leading '?') and constants.
struct Literal {
    bool negated = false;
    std::string predicate;
    std::vector<std::string> args;
    bool operator==(const Literal&) const = default;
};

struct ActionSchema {
    std::string name;
    std::vector<TypedName> parameters;
    std::vector<Literal> preconditions;
    std::vector<Literal> effects;  // negated entries are delete effects
    bool operator==(const ActionSchema&) const = default;
};

struct Domain {
    std::string name;
    std::vector<std::string> types;
    std::vector<TypedName> constants;
    std::vector<Predicate> predicates;
    std::vector<ActionSchema> actions;

    const Predicate* find_predicate(const std::string& name) const {
        for (const auto& p : predicates)
            if (p.name == name) return &p;
        return nullptr;
    }
    const ActionSchema* find_action(const std::string& name) const {
        for (const auto& a : actions)
            if (a.name == name) return &a;
        return nullptr;
    }
    bool has_type(const std::string& t) const {
        return std::find(types.begin(), types.end(), t) != types.end();
    }
};

struct GroundAtom {
    std::string predicate;
    std::vector<std::string> args;
    auto operator<=>(const GroundAtom&) const = default;
};

inline std::string to_string(const GroundAtom& a) {
    std::string out = "(" + a.predicate;
    for (const auto& arg : a.args) out += " " + arg;
    out += ")";
    return out;
}

struct TaskProblem {
    std::string name;
    std::string domain_name;
    std::vector<TypedName> objects;  // kept sorted by (type, name)
    std::set<GroundAtom> init;
    std::set<GroundAtom> goal;

    void normalize() {
        std::sort(objects.begin(), objects.end(),
                  [](const TypedName& a, const TypedName& b) {
                      return std::tie(a.type, a.name) < std::tie(b.type, b.name);
                  });
        objects.erase(std::unique(objects.begin(), objects.end()), objects.end());
    }

    bool operator==(const TaskProblem&) const = default;
};

// --- s-expression scanning ---------------------------------------------

namespace detail {

struct Sexp {
    bool is_atom = false;
    std::string atom;
    std::vector<Sexp> items;
    int line = 1, col = 1;
};

class SexpParser {
public:
    explicit SexpParser(std::string_view text) : text_(text) {}

    std::vector<Sexp> parse_all() {
        std::vector<Sexp> out;
        skip_ws();
        while (!at_end()) {
            out.push_back(parse_one());
            skip_ws();
        }
        return out;
    }

private:
    std::string_view text_;
    std::size_t pos_ = 0;
    int line_ = 1, col_ = 1;

    bool at_end() const { return pos_ >= text_.size(); }
    char peek() const { return text_[pos_]; }
    void advance() {
        if (text_[pos_] == '\n') {
            ++line_;
            col_ = 1;
        } else {
            ++col_;
        }
        ++pos_;
    }
    [[noreturn]] void fail(const std::string& msg) const {
        throw SyntaxError(msg, line_, col_);
    }

    void skip_ws() {
        while (!at_end()) {
            char c = peek();
            if (c == ';') {
                while (!at_end() && peek() != '\n') advance();
            } else if (c == ' ' || c == '\t' || c == '\r' || c == '\n') {
                advance();
            } else {
                break;
            }
        }
    }

    Sexp parse_one() {
        Sexp s;
        s.line = line_;
        s.col = col_;
        if (peek() == '(') {
            advance();
            skip_ws();
            while (!at_end() && peek() != ')') {
                s.items.push_back(parse_one());
                skip_ws();
            }
            if (at_end()) fail("unbalanced parenthesis");
            advance();
            return s;
        }
        if (peek() == ')') fail("unexpected ')'");
        s.is_atom = true;
        while (!at_end() && peek() != '(' && peek() != ')' && peek() != ';' &&
               peek() != ' ' && peek() != '\t' && peek() != '\r' && peek() != '\n') {
            s.atom += peek();
            advance();
        }
        return s;
    }
};

[[noreturn]] inline void fail_at(const Sexp& s, const std::string& msg) {
    throw SyntaxError(msg, s.line, s.col);
}

inline bool is_kw(const Sexp& s, const char* kw) { return s.is_atom && s.atom == kw; }

// Parses "name1 name2 - type name3 - type2 ..." lists.
inline std::vector<TypedName> parse_typed_list(const std::vector<Sexp>& items,
                                               std::size_t start, const Sexp& ctx) {
    std::vector<TypedName> out;
    std::vector<std::string> pending;
    for (std::size_t i = start; i < items.size(); ++i) {
        if (!items[i].is_atom) fail_at(items[i], "expected name in typed list");
        if (items[i].atom == "-") {
            if (++i >= items.size() || !items[i].is_atom)
                fail_at(ctx, "expected type after '-'");
            for (auto& n : pending) out.push_back({std::move(n), items[i].atom});
            pending.clear();
        } else {
            pending.push_back(items[i].atom);
        }
    }
    if (!pending.empty()) fail_at(ctx, "names without type in typed list");
    return out;
}

inline Literal parse_literal(const Sexp& s) {
    if (s.is_atom || s.items.empty() || !s.items[0].is_atom)
        fail_at(s, "expected literal");
    Literal lit;
    const Sexp* body = &s;
    if (is_kw(s.items[0], "not")) {
        if (s.items.size() != 2 || s.items[1].is_atom)
            fail_at(s, "malformed negated literal");
        lit.negated = true;
        body = &s.items[1];
        if (body->items.empty() || !body->items[0].is_atom)
            fail_at(s, "expected literal");
    }
    lit.predicate = body->items[0].atom;
    for (std::size_t i = 1; i < body->items.size(); ++i) {
        if (!body->items[i].is_atom) fail_at(body->items[i], "expected argument name");
        lit.args.push_back(body->items[i].atom);
    }
    return lit;
}

inline std::vector<Literal> parse_conjunction(const Sexp& s) {
    std::vector<Literal> out;
    if (!s.is_atom && !s.items.empty() && is_kw(s.items[0], "and")) {
        for (std::size_t i = 1; i < s.items.size(); ++i)
            out.push_back(parse_literal(s.items[i]));
    } else {
        out.push_back(parse_literal(s));
    }
    return out;
}

inline void check_action_literals(const Domain& dom, const ActionSchema& action,
                                  const std::vector<Literal>& lits, bool effects) {
    std::set<std::string> params;
    for (const auto& p : action.parameters) params.insert(p.name);
    std::set<std::string> constants;
    for (const auto& c : dom.constants) constants.insert(c.name);
    for (const auto& lit : lits) {
        const Predicate* pred = dom.find_predicate(lit.predicate);
        if (!pred)
            throw UndeclaredPredicate("action " + action.name +
                                      " uses undeclared predicate " + lit.predicate);
        if (pred->params.size() != lit.args.size())
            throw ArityMismatch("predicate " + lit.predicate + " used with arity " +
                                std::to_string(lit.args.size()) + " in action " +
                                action.name);
        for (const auto& arg : lit.args) {
            if (arg.starts_with("?")) {
                if (!params.count(arg))
                    throw UndeclaredType("action " + action.name +
                                         " references undeclared parameter " + arg);
            } else if (!constants.count(arg)) {
                throw UndeclaredType("action " + action.name +
                                     " references undeclared constant " + arg);
            }
        }
        (void)effects;
    }
}

}  // namespace detail

inline Domain parse_domain(std::string_view text) {
    auto top = detail::SexpParser(text).parse_all();
    if (top.size() != 1 || top[0].is_atom || top[0].items.empty() ||
        !detail::is_kw(top[0].items[0], "define"))
        throw SyntaxError("expected single (define (domain ...)) form", 1, 1);
    const auto& forms = top[0].items;
    Domain dom;
    bool named = false;
    for (std::size_t i = 1; i < forms.size(); ++i) {
        const auto& f = forms[i];
        if (f.is_atom || f.items.empty() || !f.items[0].is_atom)
            detail::fail_at(f, "expected (:section ...)");
        const std::string& kw = f.items[0].atom;
        if (kw == "domain") {
            if (f.items.size() != 2 || !f.items[1].is_atom)
                detail::fail_at(f, "malformed (domain name)");
            dom.name = f.items[1].atom;
            named = true;
        } else if (kw == ":requirements") {
            // accepted and ignored; the subset implies typing and
            // negative preconditions
        } else if (kw == ":types") {
            for (auto tn : detail::parse_typed_list(f.items, 1, f)) {
                if (dom.has_type(tn.name))
                    detail::fail_at(f, "duplicate type " + tn.name);
                dom.types.push_back(tn.name);
            }
        } else if (kw == ":constants") {
            for (auto tn : detail::parse_typed_list(f.items, 1, f)) {
                if (!dom.has_type(tn.type))
                    throw UndeclaredType("constant " + tn.name + " has undeclared type " +
                                         tn.type);
                dom.constants.push_back(std::move(tn));
            }
        } else if (kw == ":predicates") {
            for (std::size_t j = 1; j < f.items.size(); ++j) {
                const auto& p = f.items[j];
                if (p.is_atom || p.items.empty() || !p.items[0].is_atom)
                    detail::fail_at(p, "malformed predicate declaration");
                Predicate pred;
                pred.name = p.items[0].atom;
                pred.params = detail::parse_typed_list(p.items, 1, p);
                for (const auto& tp : pred.params)
                    if (!dom.has_type(tp.type))
                        throw UndeclaredType("predicate " + pred.name +
                                             " parameter has undeclared type " + tp.type);
                dom.predicates.push_back(std::move(pred));
            }
        } else if (kw == ":action") {
            if (f.items.size() < 2 || !f.items[1].is_atom)
                detail::fail_at(f, "expected action name");
            ActionSchema action;
            action.name = f.items[1].atom;
            for (std::size_t j = 2; j + 1 < f.items.size(); j += 2) {
                if (!f.items[j].is_atom) detail::fail_at(f.items[j], "expected :keyword");
                const std::string& akw = f.items[j].atom;
                const auto& val = f.items[j + 1];
                if (akw == ":parameters") {
                    if (val.is_atom) detail::fail_at(val, "expected parameter list");
                    action.parameters = detail::parse_typed_list(val.items, 0, val);
                    for (const auto& p : action.parameters) {
                        if (!p.name.starts_with("?"))
                            detail::fail_at(val, "parameter names must start with '?'");
                        if (!dom.has_type(p.type))
                            throw UndeclaredType("parameter " + p.name +
                                                 " has undeclared type " + p.type);
                    }
                } else if (akw == ":precondition") {
                    action.preconditions = detail::parse_conjunction(val);
                } else if (akw == ":effect") {
                    action.effects = detail::parse_conjunction(val);
                } else {
                    detail::fail_at(f.items[j], "unsupported action section " + akw);
                }
            }
            detail::check_action_literals(dom, action, action.preconditions, false);
            detail::check_action_literals(dom, action, action.effects, true);
            dom.actions.push_back(std::move(action));
        } else {
            detail::fail_at(f, "unsupported domain section " + kw);
        }
    }
    if (!named) throw SyntaxError("missing (domain name)", 1, 1);
    return dom;
}

inline TaskProblem parse_task(std::string_view text) {
    auto top = detail::SexpParser(text).parse_all();
    if (top.size() != 1 || top[0].is_atom || top[0].items.empty() ||
        !detail::is_kw(top[0].items[0], "define"))
        throw SyntaxError("expected single (define (problem ...)) form", 1, 1);
    const auto& forms = top[0].items;
    TaskProblem task;
    bool named = false, domain_named = false;
    for (std::size_t i = 1; i < forms.size(); ++i) {
        const auto& f = forms[i];
        if (f.is_atom || f.items.empty() || !f.items[0].is_atom)
            detail::fail_at(f, "expected (:section ...)");
        const std::string& kw = f.items[0].atom;
        if (kw == "problem") {
            if (f.items.size() != 2 || !f.items[1].is_atom)
                detail::fail_at(f, "malformed (problem name)");
            task.name = f.items[1].atom;
            named = true;
        } else if (kw == ":domain") {
            if (f.items.size() != 2 || !f.items[1].is_atom)
                detail::fail_at(f, "malformed (:domain name)");
            task.domain_name = f.items[1].atom;
            domain_named = true;
        } else if (kw == ":objects") {
            task.objects = detail::parse_typed_list(f.items, 1, f);
        } else if (kw == ":init") {
            for (std::size_t j = 1; j < f.items.size(); ++j) {
                Literal lit = detail::parse_literal(f.items[j]);
                if (lit.negated) detail::fail_at(f.items[j], "negated init atom");
                task.init.insert({lit.predicate, lit.args});
            }
        } else if (kw == ":goal") {
            if (f.items.size() != 2) detail::fail_at(f, "malformed (:goal ...)");
            for (auto lit : detail::parse_conjunction(f.items[1])) {
                if (lit.negated) detail::fail_at(f, "negated goal atom unsupported");
                task.goal.insert({lit.predicate, lit.args});
            }
        } else {
            detail::fail_at(f, "unsupported problem section " + kw);
        }
    }
    if (!named) throw SyntaxError("missing (problem name)", 1, 1);
    if (!domain_named) throw SyntaxError("missing (:domain ...)", 1, 1);
    task.normalize();
    return task;
}

/// Checks a task against its domain: object types declared, atoms use
/// declared predicates at the right arity.
inline void validate_task(const Domain& dom, const TaskProblem& task) {
    std::set<std::string> known;
    for (const auto& c : dom.constants) known.insert(c.name);
    for (const auto& o : task.objects) {
        if (!dom.has_type(o.type))
            throw UndeclaredType("object " + o.name + " has undeclared type " + o.type);
        known.insert(o.name);
    }
    auto check = [&](const std::set<GroundAtom>& atoms, const char* what) {
        for (const auto& a : atoms) {
            const Predicate* pred = dom.find_predicate(a.predicate);
            if (!pred)
                throw UndeclaredPredicate(std::string(what) +
                                          " uses undeclared predicate " + a.predicate);
            if (pred->params.size() != a.args.size())
                throw ArityMismatch(std::string(what) + " atom " + to_string(a) +
                                    " has wrong arity");
            for (const auto& arg : a.args)
                if (!known.count(arg))
                    throw UndeclaredType(std::string(what) + " atom " + to_string(a) +
                                         " references unknown object " + arg);
        }
    };
    check(task.init, "init");
    check(task.goal, "goal");
}

namespace detail {

inline std::string render_typed_list(const std::vector<TypedName>& names,
                                     const std::string& indent) {
    // group consecutive names of the same type on one line
    std::string out;
    std::map<std::string, std::vector<std::string>> by_type;
    for (const auto& n : names) by_type[n.type].push_back(n.name);
    for (auto& [type, group] : by_type) {
        std::sort(group.begin(), group.end());
        out += indent;
        for (const auto& n : group) out += n + " ";
        out += "- " + type + "\n";
    }
    return out;
}

}  // namespace detail

/// Canonical problem text; parse_task(render_task(t)) == t.
inline std::string render_task(const TaskProblem& task) {
    std::string out = "(define (problem " + task.name + ")\n";
    out += "    (:domain " + task.domain_name + ")\n";
    out += "    (:objects\n";
    out += detail::render_typed_list(task.objects, "        ");
    out += "    )\n";
    out += "    (:init\n";
    for (const auto& a : task.init) out += "        " + to_string(a) + "\n";
    out += "    )\n";
    out += "    (:goal (and\n";
    for (const auto& a : task.goal) out += "        " + to_string(a) + "\n";
    out += "    ))\n";
    out += ")\n";
    return out;
}

}  // namespace qaplan::pddl
