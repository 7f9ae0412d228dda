#pragma once

// Ground ASP fact syntax shared by the intermediate and materialized
// representations of a user query. Restricted to atoms over symbol
// constants, quoted strings and tuples; rules live in rules.hpp.

#include <algorithm>
#include <compare>
#include <cstddef>
#include <string>
#include <string_view>
#include <tuple>
#include <vector>

#include "qaplan/errors.hpp"

namespace qaplan::asp {

struct Term {
    enum class Kind { Symbol, String, Tuple };

    Kind kind = Kind::Symbol;
    std::string text;          // symbol name or string contents
    std::vector<Term> items;   // tuple elements, non-empty for Kind::Tuple

    static Term symbol(std::string s) { return {Kind::Symbol, std::move(s), {}}; }
    static Term string(std::string s) { return {Kind::String, std::move(s), {}}; }
    static Term tuple(std::vector<Term> ts) { return {Kind::Tuple, "", std::move(ts)}; }

    bool operator==(const Term&) const = default;
};

inline std::string to_string(const Term& t) {
    switch (t.kind) {
        case Term::Kind::Symbol:
            return t.text;
        case Term::Kind::String:
            return "\"" + t.text + "\"";
        case Term::Kind::Tuple: {
            std::string out = "(";
            for (std::size_t i = 0; i < t.items.size(); ++i) {
                if (i) out += ", ";
                out += to_string(t.items[i]);
            }
            out += ")";
            return out;
        }
    }
    return {};
}

struct Atom {
    std::string predicate;
    std::vector<Term> terms;

    bool operator==(const Atom&) const = default;
};

inline std::string to_string(const Atom& a) {
    std::string out = a.predicate;
    if (!a.terms.empty()) {
        out += "(";
        for (std::size_t i = 0; i < a.terms.size(); ++i) {
            if (i) out += ", ";
            out += to_string(a.terms[i]);
        }
        out += ")";
    }
    return out;
}

// Canonical order: (predicate, arity, rendered term text).
inline bool atom_less(const Atom& a, const Atom& b) {
    if (a.predicate != b.predicate) return a.predicate < b.predicate;
    if (a.terms.size() != b.terms.size()) return a.terms.size() < b.terms.size();
    return to_string(a) < to_string(b);
}

/// Deduplicated set of ground atoms kept in canonical order.
class FactSet {
public:
    FactSet() = default;

    bool insert(Atom a) {
        auto it = std::lower_bound(atoms_.begin(), atoms_.end(), a, atom_less);
        if (it != atoms_.end() && *it == a) return false;
        atoms_.insert(it, std::move(a));
        return true;
    }

    bool contains(const Atom& a) const {
        auto it = std::lower_bound(atoms_.begin(), atoms_.end(), a, atom_less);
        return it != atoms_.end() && *it == a;
    }

    std::size_t size() const { return atoms_.size(); }
    bool empty() const { return atoms_.empty(); }

    auto begin() const { return atoms_.begin(); }
    auto end() const { return atoms_.end(); }

    const std::vector<Atom>& atoms() const { return atoms_; }

    bool operator==(const FactSet&) const = default;

private:
    std::vector<Atom> atoms_;
};

namespace detail {

class FactParser {
public:
    explicit FactParser(std::string_view text) : text_(text) {}

    FactSet parse() {
        FactSet facts;
        skip_ws();
        while (!at_end()) {
            facts.insert(parse_atom());
            skip_ws();
            if (at_end() || peek() != '.') fail("expected '.' terminating atom");
            advance();
            skip_ws();
        }
        return facts;
    }

private:
    std::string_view text_;
    std::size_t pos_ = 0;
    int line_ = 1;
    int col_ = 1;

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
            if (c == '%') {
                while (!at_end() && peek() != '\n') advance();
            } else if (c == ' ' || c == '\t' || c == '\r' || c == '\n') {
                advance();
            } else {
                break;
            }
        }
    }

    static bool ident_start(char c) { return c >= 'a' && c <= 'z'; }
    static bool ident_char(char c) {
        return (c >= 'a' && c <= 'z') || (c >= 'A' && c <= 'Z') ||
               (c >= '0' && c <= '9') || c == '_';
    }

    std::string parse_identifier() {
        std::string out;
        if (!at_end() && peek() == '_') {
            out += '_';
            advance();
        }
        if (at_end() || !ident_start(peek())) fail("expected lowercase identifier");
        while (!at_end() && ident_char(peek())) {
            out += peek();
            advance();
        }
        return out;
    }

    Atom parse_atom() {
        Atom atom;
        atom.predicate = parse_identifier();
        skip_ws();
        if (!at_end() && peek() == '(') {
            advance();
            skip_ws();
            atom.terms.push_back(parse_term());
            skip_ws();
            while (!at_end() && peek() == ',') {
                advance();
                skip_ws();
                atom.terms.push_back(parse_term());
                skip_ws();
            }
            if (at_end() || peek() != ')') fail("unbalanced parenthesis in atom");
            advance();
        }
        return atom;
    }

    Term parse_term() {
        if (at_end()) fail("expected term");
        char c = peek();
        if (c == '"') return parse_string();
        if (c == '(') return parse_tuple();
        if (ident_start(c)) return Term::symbol(parse_identifier());
        fail("expected term");
    }

    Term parse_string() {
        advance();  // opening quote
        std::string out;
        while (!at_end() && peek() != '"') {
            if (peek() == '\n') fail("unterminated string");
            out += peek();
            advance();
        }
        if (at_end()) fail("unterminated string");
        advance();  // closing quote
        return Term::string(std::move(out));
    }

    Term parse_tuple() {
        advance();  // '('
        skip_ws();
        std::vector<Term> items;
        items.push_back(parse_term());
        skip_ws();
        while (!at_end() && peek() == ',') {
            advance();
            skip_ws();
            items.push_back(parse_term());
            skip_ws();
        }
        if (at_end() || peek() != ')') fail("unbalanced parenthesis in tuple");
        advance();
        return Term::tuple(std::move(items));
    }
};

}  // namespace detail

/// Parses zero or more period-terminated ground atoms. `%` comments and
/// whitespace are allowed between tokens.
inline FactSet parse_facts(std::string_view text) {
    return detail::FactParser(text).parse();
}

/// Canonical text: one atom per line in canonical order.
inline std::string render_facts(const FactSet& facts) {
    std::string out;
    for (const auto& a : facts) {
        out += to_string(a);
        out += ".\n";
    }
    return out;
}

}  // namespace qaplan::asp
