#include <catch2/catch_amalgamated.hpp>

#include <random>
#include <string>
#include <vector>

#include "qaplan/asp.hpp"
#include "qaplan/errors.hpp"

using namespace qaplan;
using asp::Atom;
using asp::FactSet;
using asp::Term;

TEST_CASE("parses symbols, strings and tuples") {
    FactSet facts = asp::parse_facts(
        "_goal(x, goal_1). _report_period(x, (\"01/01/2021\", \"12/31/2021\")).");
    REQUIRE(facts.size() == 2);
    REQUIRE(facts.contains({"_goal", {Term::symbol("x"), Term::symbol("goal_1")}}));
    REQUIRE(facts.contains(
        {"_report_period",
         {Term::symbol("x"),
          Term::tuple({Term::string("01/01/2021"), Term::string("12/31/2021")})}}));
}

TEST_CASE("zero-arity atoms and comments") {
    FactSet facts = asp::parse_facts("% leading comment\nfoo. bar(a). % trailing\n");
    REQUIRE(facts.size() == 2);
    REQUIRE(facts.contains({"foo", {}}));
    REQUIRE(facts.contains({"bar", {Term::symbol("a")}}));
}

TEST_CASE("empty input parses to an empty set") {
    REQUIRE(asp::parse_facts("").empty());
    REQUIRE(asp::parse_facts("  % only a comment\n").empty());
}

TEST_CASE("duplicate atoms are deduplicated") {
    FactSet facts = asp::parse_facts("p(a). p(a). p(b).");
    REQUIRE(facts.size() == 2);
}

TEST_CASE("canonical order is (predicate, arity, text)") {
    FactSet facts = asp::parse_facts("zeta(a). alpha(b, c). alpha(a). alpha.");
    std::vector<std::string> rendered;
    for (const auto& a : facts) rendered.push_back(asp::to_string(a));
    REQUIRE(rendered == std::vector<std::string>{"alpha", "alpha(a)", "alpha(b, c)",
                                                 "zeta(a)"});
}

TEST_CASE("render/parse round trip is the identity on canonical text") {
    const std::string canonical =
        "_contact_channel(y, \"phone\").\n"
        "_goal(x, goal_1).\n"
        "_goal(y, goal_6).\n"
        "_report_period(x, (\"07/01/2024\", \"09/30/2024\")).\n";
    FactSet facts = asp::parse_facts(canonical);
    REQUIRE(asp::render_facts(facts) == canonical);
    REQUIRE(asp::parse_facts(asp::render_facts(facts)) == facts);
}

TEST_CASE("property: parse(render(s)) == s for random fact sets") {
    std::mt19937 rng(20240817);
    auto random_term = [&](auto&& self, int depth) -> Term {
        int pick = std::uniform_int_distribution<int>(0, depth > 0 ? 2 : 1)(rng);
        if (pick == 0)
            return Term::symbol("s" + std::to_string(rng() % 20));
        if (pick == 1)
            return Term::string("v " + std::to_string(rng() % 20));
        std::vector<Term> items;
        int n = 1 + static_cast<int>(rng() % 3);
        for (int i = 0; i < n; ++i) items.push_back(self(self, depth - 1));
        return Term::tuple(std::move(items));
    };
    for (int trial = 0; trial < 200; ++trial) {
        FactSet facts;
        int n = static_cast<int>(rng() % 8);
        for (int i = 0; i < n; ++i) {
            Atom a;
            a.predicate = (rng() % 2 ? "_p" : "p") + std::to_string(rng() % 5);
            int arity = static_cast<int>(rng() % 4);
            for (int k = 0; k < arity; ++k)
                a.terms.push_back(random_term(random_term, 2));
            facts.insert(std::move(a));
        }
        REQUIRE(asp::parse_facts(asp::render_facts(facts)) == facts);
    }
}

TEST_CASE("syntax errors carry a message and location") {
    auto expect_error = [](const std::string& text, const std::string& needle) {
        try {
            asp::parse_facts(text);
            FAIL("expected SyntaxError for: " << text);
        } catch (const SyntaxError& e) {
            REQUIRE(std::string(e.what()).find(needle) != std::string::npos);
            REQUIRE(e.line() >= 1);
            REQUIRE(e.column() >= 1);
        }
    };
    expect_error("p(a)", "expected '.' terminating atom");
    expect_error("p(a", "unbalanced parenthesis in atom");
    expect_error("p((a, b).", "unbalanced parenthesis in atom");
    expect_error("p((a, b.", "unbalanced parenthesis in tuple");
    expect_error("p(\"oops).", "unterminated string");
    expect_error("p(\"two\nlines\").", "unterminated string");
    expect_error("Goal(x).", "expected lowercase identifier");
    expect_error("p(a,).", "expected term");
}

TEST_CASE("error location points at the offending line") {
    try {
        asp::parse_facts("p(a).\nq(b)\n");
        FAIL("expected SyntaxError");
    } catch (const SyntaxError& e) {
        REQUIRE(e.line() == 3);  // '.' expected after consuming the newline
    }
}

TEST_CASE("strings keep spaces and special characters verbatim") {
    FactSet facts = asp::parse_facts("p(\"a, (b). %c\").");
    REQUIRE(facts.contains({"p", {Term::string("a, (b). %c")}}));
}
