#pragma once

// Positive Horn rules with equality guards and external builtins,
// evaluated bottom-up to a least fixpoint. This is the fragment needed
// by the bundled domain rules; no negation, aggregates or choice.

#include <functional>
#include <map>
#include <optional>
#include <set>
#include <string>
#include <string_view>
#include <variant>
#include <vector>

#include "qaplan/asp.hpp"
#include "qaplan/errors.hpp"

namespace qaplan::rules {

using asp::Atom;
using asp::FactSet;
using asp::Term;

// Term pattern: a ground term, a logic variable, a wildcard, or a tuple
// of patterns.
struct TermPattern {
    enum class Kind { Const, Var, Wildcard, Tuple };

    Kind kind = Kind::Const;
    Term constant;
    std::string var;
    std::vector<TermPattern> items;

    static TermPattern make_const(Term t) {
        TermPattern p;
        p.kind = Kind::Const;
        p.constant = std::move(t);
        return p;
    }
    static TermPattern make_var(std::string name) {
        TermPattern p;
        p.kind = Kind::Var;
        p.var = std::move(name);
        return p;
    }
    static TermPattern make_wildcard() {
        TermPattern p;
        p.kind = Kind::Wildcard;
        return p;
    }
    static TermPattern make_tuple(std::vector<TermPattern> items) {
        TermPattern p;
        p.kind = Kind::Tuple;
        p.items = std::move(items);
        return p;
    }
};

struct AtomPattern {
    std::string predicate;
    std::vector<TermPattern> args;
};

// One side of a guard: a variable, a ground term, or a builtin call over
// variables and ground terms.
struct GuardOperand {
    enum class Kind { Const, Var, Builtin };

    Kind kind = Kind::Const;
    Term constant;
    std::string var;
    std::string builtin;
    std::vector<GuardOperand> args;
};

struct Guard {
    GuardOperand lhs;
    GuardOperand rhs;
    bool negated = false;  // true for !=
};

using BodyElement = std::variant<AtomPattern, Guard>;

struct Rule {
    AtomPattern head;
    std::vector<BodyElement> body;
};

using Builtin = std::function<Term(const std::vector<Term>&)>;

class BuiltinRegistry {
public:
    void add(std::string name, Builtin fn) { fns_[std::move(name)] = std::move(fn); }

    bool contains(const std::string& name) const { return fns_.count(name) > 0; }

    Term call(const std::string& name, const std::vector<Term>& args) const {
        auto it = fns_.find(name);
        if (it == fns_.end()) throw UnknownBuiltin("unknown builtin @" + name);
        return it->second(args);
    }

private:
    std::map<std::string, Builtin> fns_;
};

// --- date builtin -----------------------------------------------------

namespace detail {

inline bool leap_year(int y) { return (y % 4 == 0 && y % 100 != 0) || y % 400 == 0; }

inline int days_in_month(int y, int m) {
    static const int lens[] = {31, 28, 31, 30, 31, 30, 31, 31, 30, 31, 30, 31};
    if (m == 2 && leap_year(y)) return 29;
    return lens[m - 1];
}

struct Date {
    int year, month, day;
    auto operator<=>(const Date&) const = default;
};

inline Date parse_date(const std::string& s) {
    auto bad = [&] { throw BuiltinDomainError("not a valid MM/DD/YYYY date: \"" + s + "\""); };
    if (s.size() != 10 || s[2] != '/' || s[5] != '/') bad();
    for (std::size_t i : {0, 1, 3, 4, 6, 7, 8, 9})
        if (s[i] < '0' || s[i] > '9') bad();
    Date d;
    d.month = (s[0] - '0') * 10 + (s[1] - '0');
    d.day = (s[3] - '0') * 10 + (s[4] - '0');
    d.year = std::stoi(s.substr(6, 4));
    if (d.month < 1 || d.month > 12) bad();
    if (d.day < 1 || d.day > days_in_month(d.year, d.month)) bad();
    return d;
}

}  // namespace detail

/// Calendar comparison, inclusive. Both arguments must be valid
/// MM/DD/YYYY dates (Gregorian, leap years respected).
inline bool lte_dates(const std::string& d1, const std::string& d2) {
    return detail::parse_date(d1) <= detail::parse_date(d2);
}

inline BuiltinRegistry default_builtins() {
    BuiltinRegistry reg;
    reg.add("lte_dates", [](const std::vector<Term>& args) {
        if (args.size() != 2 || args[0].kind != Term::Kind::String ||
            args[1].kind != Term::Kind::String)
            throw BuiltinDomainError("@lte_dates expects two date strings");
        return Term::symbol(lte_dates(args[0].text, args[1].text) ? "true" : "false");
    });
    return reg;
}

// --- parser -----------------------------------------------------------

namespace detail {

class RuleParser {
public:
    RuleParser(std::string_view text, const BuiltinRegistry& builtins)
        : text_(text), builtins_(builtins) {}

    std::vector<Rule> parse() {
        std::vector<Rule> out;
        skip_ws();
        while (!at_end()) {
            out.push_back(parse_rule());
            skip_ws();
        }
        return out;
    }

private:
    std::string_view text_;
    const BuiltinRegistry& builtins_;
    std::size_t pos_ = 0;
    int line_ = 1;
    int col_ = 1;

    bool at_end() const { return pos_ >= text_.size(); }
    char peek() const { return text_[pos_]; }
    bool peek2(const char* s) const {
        return pos_ + 1 < text_.size() && text_[pos_] == s[0] && text_[pos_ + 1] == s[1];
    }

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
            if (c == '%') {
                while (!at_end() && peek() != '\n') advance();
            } else if (c == ' ' || c == '\t' || c == '\r' || c == '\n') {
                advance();
            } else {
                break;
            }
        }
    }

    static bool lower(char c) { return c >= 'a' && c <= 'z'; }
    static bool upper(char c) { return c >= 'A' && c <= 'Z'; }
    static bool ident_char(char c) {
        return lower(c) || upper(c) || (c >= '0' && c <= '9') || c == '_';
    }

    std::string take_ident() {
        std::string out;
        while (!at_end() && ident_char(peek())) {
            out += peek();
            advance();
        }
        return out;
    }

    Rule parse_rule() {
        Rule rule;
        rule.head = parse_atom_pattern();
        skip_ws();
        if (!at_end() && peek2(":-")) {
            advance();
            advance();
            skip_ws();
            rule.body.push_back(parse_body_element());
            skip_ws();
            while (!at_end() && peek() == ',') {
                advance();
                skip_ws();
                rule.body.push_back(parse_body_element());
                skip_ws();
            }
        }
        if (at_end() || peek() != '.') fail("expected '.' terminating rule");
        advance();
        check_safety(rule);
        return rule;
    }

    BodyElement parse_body_element() {
        GuardOperand lhs = parse_operand(/*allow_atom=*/true);
        skip_ws();
        if (!at_end() && (peek2("==") || peek2("!="))) {
            bool negated = peek() == '!';
            advance();
            advance();
            skip_ws();
            Guard g;
            g.lhs = std::move(lhs);
            g.rhs = parse_operand(/*allow_atom=*/false);
            g.negated = negated;
            return g;
        }
        // Not a guard: the operand must have been a plain atom pattern.
        if (lhs.kind != GuardOperand::Kind::Builtin || lhs.builtin != "\x01atom")
            fail("expected atom or comparison in rule body");
        return pending_atom_;
    }

    // parse_operand doubles as a lookahead for body atoms: a lowercase
    // identifier followed by '(' could be either an atom pattern or (as a
    // bare symbol) a guard operand. We parse the full atom pattern and
    // stash it; if no comparison operator follows, the caller takes it.
    AtomPattern pending_atom_;

    GuardOperand parse_operand(bool allow_atom) {
        if (at_end()) fail("expected operand");
        char c = peek();
        GuardOperand op;
        if (c == '@') {
            advance();
            op.kind = GuardOperand::Kind::Builtin;
            op.builtin = take_ident();
            if (op.builtin.empty()) fail("expected builtin name after '@'");
            if (!builtins_.contains(op.builtin))
                throw UnknownBuiltin("unknown builtin @" + op.builtin);
            skip_ws();
            if (at_end() || peek() != '(') fail("expected '(' after builtin name");
            advance();
            skip_ws();
            op.args.push_back(parse_operand(false));
            skip_ws();
            while (!at_end() && peek() == ',') {
                advance();
                skip_ws();
                op.args.push_back(parse_operand(false));
                skip_ws();
            }
            if (at_end() || peek() != ')') fail("unbalanced parenthesis in builtin call");
            advance();
            return op;
        }
        if (c == '"') {
            op.kind = GuardOperand::Kind::Const;
            op.constant = parse_quoted();
            return op;
        }
        if (upper(c)) {
            op.kind = GuardOperand::Kind::Var;
            op.var = take_ident();
            return op;
        }
        if (lower(c) || c == '_') {
            std::string ident = take_ident();
            if (allow_atom) {
                std::size_t save_pos = pos_;
                int save_line = line_, save_col = col_;
                skip_ws();
                if (!at_end() && peek() == '(') {
                    // atom pattern with arguments
                    pending_atom_.predicate = ident;
                    pending_atom_.args = parse_arg_list();
                    op.kind = GuardOperand::Kind::Builtin;
                    op.builtin = "\x01atom";
                    return op;
                }
                pos_ = save_pos;
                line_ = save_line;
                col_ = save_col;
                // 0-ary atom or symbol constant; treat as atom unless a
                // comparison follows (decided by caller via marker below).
                std::size_t probe = pos_;
                while (probe < text_.size() &&
                       (text_[probe] == ' ' || text_[probe] == '\t')) ++probe;
                bool cmp_follows = probe + 1 < text_.size() &&
                                   ((text_[probe] == '=' && text_[probe + 1] == '=') ||
                                    (text_[probe] == '!' && text_[probe + 1] == '='));
                if (!cmp_follows) {
                    pending_atom_.predicate = ident;
                    pending_atom_.args.clear();
                    op.kind = GuardOperand::Kind::Builtin;
                    op.builtin = "\x01atom";
                    return op;
                }
            }
            op.kind = GuardOperand::Kind::Const;
            op.constant = Term::symbol(std::move(ident));
            return op;
        }
        fail("expected operand");
    }

    std::vector<TermPattern> parse_arg_list() {
        // positioned at '('
        advance();
        skip_ws();
        std::vector<TermPattern> args;
        args.push_back(parse_term_pattern());
        skip_ws();
        while (!at_end() && peek() == ',') {
            advance();
            skip_ws();
            args.push_back(parse_term_pattern());
            skip_ws();
        }
        if (at_end() || peek() != ')') fail("unbalanced parenthesis in atom");
        advance();
        return args;
    }

    AtomPattern parse_atom_pattern() {
        AtomPattern atom;
        if (at_end() || !(lower(peek()) || peek() == '_'))
            fail("expected predicate name");
        atom.predicate = take_ident();
        skip_ws();
        if (!at_end() && peek() == '(') atom.args = parse_arg_list();
        return atom;
    }

    TermPattern parse_term_pattern() {
        if (at_end()) fail("expected term");
        char c = peek();
        if (c == '"') return TermPattern::make_const(parse_quoted());
        if (c == '(') {
            advance();
            skip_ws();
            std::vector<TermPattern> items;
            items.push_back(parse_term_pattern());
            skip_ws();
            while (!at_end() && peek() == ',') {
                advance();
                skip_ws();
                items.push_back(parse_term_pattern());
                skip_ws();
            }
            if (at_end() || peek() != ')') fail("unbalanced parenthesis in tuple");
            advance();
            return TermPattern::make_tuple(std::move(items));
        }
        if (upper(c)) return TermPattern::make_var(take_ident());
        if (c == '_') {
            std::string ident = take_ident();
            if (ident == "_") return TermPattern::make_wildcard();
            return TermPattern::make_const(Term::symbol(std::move(ident)));
        }
        if (lower(c)) return TermPattern::make_const(Term::symbol(take_ident()));
        fail("expected term");
    }

    Term parse_quoted() {
        advance();  // opening quote
        std::string out;
        while (!at_end() && peek() != '"') {
            if (peek() == '\n') fail("unterminated string");
            out += peek();
            advance();
        }
        if (at_end()) fail("unterminated string");
        advance();
        return Term::string(std::move(out));
    }

    // Range restriction plus left-to-right guard safety.
    void check_safety(const Rule& rule) const {
        std::set<std::string> bound;
        for (const auto& elem : rule.body) {
            if (const auto* atom = std::get_if<AtomPattern>(&elem)) {
                collect_vars(atom->args, bound);
            } else {
                const auto& guard = std::get<Guard>(elem);
                check_operand_bound(guard.lhs, bound);
                check_operand_bound(guard.rhs, bound);
            }
        }
        std::set<std::string> head_vars;
        collect_vars(rule.head.args, head_vars);
        for (const auto& v : head_vars)
            if (!bound.count(v))
                throw SafetyError("unbound variable " + v + " in head of rule " +
                                  rule.head.predicate);
    }

    static void collect_vars(const std::vector<TermPattern>& pats,
                             std::set<std::string>& out) {
        for (const auto& p : pats) {
            if (p.kind == TermPattern::Kind::Var) out.insert(p.var);
            if (p.kind == TermPattern::Kind::Tuple) collect_vars(p.items, out);
        }
    }

    static void check_operand_bound(const GuardOperand& op,
                                    const std::set<std::string>& bound) {
        if (op.kind == GuardOperand::Kind::Var && !bound.count(op.var))
            throw SafetyError("guard variable " + op.var +
                              " not bound by an earlier body atom");
        for (const auto& a : op.args) check_operand_bound(a, bound);
    }
};

}  // namespace detail

inline std::vector<Rule> parse_rules(std::string_view text,
                                     const BuiltinRegistry& builtins) {
    return detail::RuleParser(text, builtins).parse();
}

// --- evaluation -------------------------------------------------------

namespace detail {

using Bindings = std::map<std::string, Term>;

inline bool match_term(const TermPattern& pat, const Term& term, Bindings& env) {
    switch (pat.kind) {
        case TermPattern::Kind::Wildcard:
            return true;
        case TermPattern::Kind::Const:
            return pat.constant == term;
        case TermPattern::Kind::Var: {
            auto it = env.find(pat.var);
            if (it != env.end()) return it->second == term;
            env[pat.var] = term;
            return true;
        }
        case TermPattern::Kind::Tuple: {
            if (term.kind != Term::Kind::Tuple || term.items.size() != pat.items.size())
                return false;
            for (std::size_t i = 0; i < pat.items.size(); ++i)
                if (!match_term(pat.items[i], term.items[i], env)) return false;
            return true;
        }
    }
    return false;
}

inline bool match_atom(const AtomPattern& pat, const Atom& atom, Bindings& env) {
    if (pat.predicate != atom.predicate || pat.args.size() != atom.terms.size())
        return false;
    for (std::size_t i = 0; i < pat.args.size(); ++i)
        if (!match_term(pat.args[i], atom.terms[i], env)) return false;
    return true;
}

inline Term eval_operand(const GuardOperand& op, const Bindings& env,
                         const BuiltinRegistry& builtins) {
    switch (op.kind) {
        case GuardOperand::Kind::Const:
            return op.constant;
        case GuardOperand::Kind::Var:
            return env.at(op.var);
        case GuardOperand::Kind::Builtin: {
            std::vector<Term> args;
            args.reserve(op.args.size());
            for (const auto& a : op.args) args.push_back(eval_operand(a, env, builtins));
            return builtins.call(op.builtin, args);
        }
    }
    return {};
}

inline bool eval_guard(const Guard& g, const Bindings& env,
                       const BuiltinRegistry& builtins) {
    Term lhs = eval_operand(g.lhs, env, builtins);
    Term rhs = eval_operand(g.rhs, env, builtins);
    return g.negated ? !(lhs == rhs) : lhs == rhs;
}

inline Term instantiate_term(const TermPattern& pat, const Bindings& env) {
    switch (pat.kind) {
        case TermPattern::Kind::Const:
            return pat.constant;
        case TermPattern::Kind::Var:
            return env.at(pat.var);
        case TermPattern::Kind::Tuple: {
            std::vector<Term> items;
            items.reserve(pat.items.size());
            for (const auto& p : pat.items) items.push_back(instantiate_term(p, env));
            return Term::tuple(std::move(items));
        }
        case TermPattern::Kind::Wildcard:
            break;
    }
    throw std::logic_error("wildcard in rule head");
}

inline Atom instantiate_head(const AtomPattern& head, const Bindings& env) {
    Atom atom;
    atom.predicate = head.predicate;
    atom.terms.reserve(head.args.size());
    for (const auto& p : head.args) atom.terms.push_back(instantiate_term(p, env));
    return atom;
}

// Joins rule body left-to-right; atom at position `delta_pos` (if >= 0)
// is matched against the delta set, everything else against the total.
template <typename Emit>
inline void fire_rule(const Rule& rule, const FactSet& total, const FactSet& delta,
                      int delta_pos, const BuiltinRegistry& builtins, Emit&& emit) {
    std::function<void(std::size_t, int, const Bindings&)> walk =
        [&](std::size_t elem, int atom_idx, const Bindings& env) {
            if (elem == rule.body.size()) {
                emit(instantiate_head(rule.head, env));
                return;
            }
            const auto& be = rule.body[elem];
            if (const auto* pat = std::get_if<AtomPattern>(&be)) {
                const FactSet& source = (atom_idx == delta_pos) ? delta : total;
                for (const auto& fact : source) {
                    Bindings next = env;
                    if (match_atom(*pat, fact, next)) walk(elem + 1, atom_idx + 1, next);
                }
            } else {
                if (eval_guard(std::get<Guard>(be), env, builtins))
                    walk(elem + 1, atom_idx, env);
            }
        };
    walk(0, 0, {});
}

inline int count_body_atoms(const Rule& rule) {
    int n = 0;
    for (const auto& be : rule.body)
        if (std::holds_alternative<AtomPattern>(be)) ++n;
    return n;
}

}  // namespace detail

/// Least fixpoint of `rules` over `facts` (semi-naive evaluation).
/// Returns input plus derived atoms in canonical order.
inline FactSet materialize(const FactSet& facts, const std::vector<Rule>& rules,
                           const BuiltinRegistry& builtins) {
    FactSet total = facts;
    FactSet delta = facts;
    // Rules without body atoms (facts, guard-only bodies) fire once up front.
    for (const auto& rule : rules) {
        if (detail::count_body_atoms(rule) == 0) {
            detail::fire_rule(rule, total, total, -1, builtins, [&](Atom a) {
                if (!total.contains(a)) {
                    delta.insert(a);
                    total.insert(std::move(a));
                }
            });
        }
    }
    while (!delta.empty()) {
        FactSet fresh;
        for (const auto& rule : rules) {
            int n_atoms = detail::count_body_atoms(rule);
            for (int pos = 0; pos < n_atoms; ++pos) {
                detail::fire_rule(rule, total, delta, pos, builtins,
                                  [&](Atom a) {
                                      if (!total.contains(a)) fresh.insert(std::move(a));
                                  });
            }
        }
        for (const auto& a : fresh) total.insert(a);
        delta = std::move(fresh);
    }
    return total;
}

/// Naive fixpoint iteration; reference implementation for tests.
inline FactSet materialize_naive(const FactSet& facts, const std::vector<Rule>& rules,
                                 const BuiltinRegistry& builtins) {
    FactSet total = facts;
    bool changed = true;
    while (changed) {
        changed = false;
        for (const auto& rule : rules) {
            detail::fire_rule(rule, total, total, -1, builtins, [&](Atom a) {
                if (total.insert(std::move(a))) changed = true;
            });
        }
    }
    return total;
}

/// String arguments of all error/1 atoms, in canonical order.
inline std::vector<std::string> extract_errors(const FactSet& materialized) {
    std::vector<std::string> out;
    for (const auto& a : materialized) {
        if (a.predicate == "error" && a.terms.size() == 1 &&
            a.terms[0].kind == Term::Kind::String)
            out.push_back(a.terms[0].text);
    }
    return out;
}

}  // namespace qaplan::rules
