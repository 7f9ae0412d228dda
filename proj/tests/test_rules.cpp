#include <catch2/catch_amalgamated.hpp>

#include <algorithm>
#include <random>
#include <string>
#include <vector>

#include "qaplan/asp.hpp"
#include "qaplan/errors.hpp"
#include "qaplan/pipeline.hpp"
#include "qaplan/rules.hpp"

using namespace qaplan;
using asp::Atom;
using asp::FactSet;
using asp::Term;

namespace {

std::vector<rules::Rule> domain_rules() {
    static auto builtins = rules::default_builtins();
    static auto parsed = rules::parse_rules(
        pipeline::read_file(std::string(QAPLAN_DATA_DIR) + "/rules.lp"), builtins);
    return parsed;
}

// Atoms derived by materialization: everything that is neither an input
// atom nor an underscore-prefixed intermediate predicate.
FactSet derived(const std::string& intermediate_text) {
    auto builtins = rules::default_builtins();
    FactSet in = asp::parse_facts(intermediate_text);
    FactSet out = rules::materialize(in, domain_rules(), builtins);
    FactSet result;
    for (const auto& a : out)
        if (!a.predicate.starts_with("_")) result.insert(a);
    return result;
}

// Independent date oracle: serial day count from 01/01/1900, computed by
// plain accumulation rather than field-wise comparison.
long serial_day(int month, int day, int year) {
    auto leap = [](int y) { return (y % 4 == 0 && y % 100 != 0) || y % 400 == 0; };
    static const int lens[] = {31, 28, 31, 30, 31, 30, 31, 31, 30, 31, 30, 31};
    long total = 0;
    for (int y = 1900; y < year; ++y) total += leap(y) ? 366 : 365;
    for (int m = 1; m < month; ++m) total += (m == 2 && leap(year)) ? 29 : lens[m - 1];
    return total + day;
}

std::string mmddyyyy(int month, int day, int year) {
    char buf[32];
    std::snprintf(buf, sizeof buf, "%02d/%02d/%04d", month, day, year);
    return buf;
}

}  // namespace

TEST_CASE("complete single-goal query materializes dates and types") {
    REQUIRE(asp::render_facts(derived(
                "_goal(x, goal_2). _report_period(x, (\"01/01/2023\", \"03/31/2023\")).")) ==
            "end_date(x, \"03/31/2023\", date).\n"
            "goal(x, expense_spend_report).\n"
            "start_date(x, \"01/01/2023\", date).\n");
}

TEST_CASE("two goals with dataflow keep the variable reference") {
    REQUIRE(asp::render_facts(derived(
                "_goal(x, goal_1). _report_period(x, (\"07/01/2024\", \"09/30/2024\")). "
                "_goal(y, goal_6). _contact_topic(y, x). _contact_channel(y, \"phone\").")) ==
            "contact_channel(y, \"phone\", string).\n"
            "contact_topic(y, x, string).\n"
            "end_date(x, \"09/30/2024\", date).\n"
            "goal(x, profit_loss_report).\n"
            "goal(y, contact_us).\n"
            "start_date(x, \"07/01/2024\", date).\n");
}

TEST_CASE("incomplete query derives only the goal atom") {
    REQUIRE(asp::render_facts(derived("_goal(x, goal_1).")) ==
            "goal(x, profit_loss_report).\n");
}

TEST_CASE("incomplete contact query keeps the provided channel") {
    REQUIRE(asp::render_facts(derived(
                "_goal(x, goal_6). _contact_channel(x, \"chat\").")) ==
            "contact_channel(x, \"chat\", string).\n"
            "goal(x, contact_us).\n");
}

TEST_CASE("inverted report period derives the canonical error atom") {
    FactSet d = derived(
        "_goal(x, goal_2). _report_period(x, (\"07/01/2024\", \"01/31/2024\")).");
    REQUIRE(asp::render_facts(d) ==
            "end_date(x, \"01/31/2024\", date).\n"
            "error(\"end date must be after start date\").\n"
            "goal(x, expense_spend_report).\n"
            "start_date(x, \"07/01/2024\", date).\n");
    REQUIRE(rules::extract_errors(d) ==
            std::vector<std::string>{"end date must be after start date"});
}

TEST_CASE("three-ary goal atoms with a mention are accepted for every goal") {
    for (const char* g : {"goal_1", "goal_2", "goal_3", "goal_4", "goal_5", "goal_6",
                          "goal_7", "goal_8", "goal_9"}) {
        FactSet two = derived("_goal(x, " + std::string(g) + ").");
        FactSet three = derived("_goal(x, " + std::string(g) + ", mention).");
        REQUIRE(two == three);
        REQUIRE(two.size() == 1);  // exactly one goal/2 atom
    }
}

TEST_CASE("non-catalog channel words are dropped by the channel rules") {
    REQUIRE(asp::render_facts(derived(
                "_goal(x, goal_6). _contact_topic(x, \"account\"). "
                "_contact_channel(x, \"speak\").")) ==
            "contact_topic(x, \"account\", string).\n"
            "goal(x, contact_us).\n");
}

TEST_CASE("materialize is idempotent and monotone on the bundled rules") {
    auto builtins = rules::default_builtins();
    FactSet base = asp::parse_facts(
        "_goal(x, goal_4). _date_of_charge(x, \"04/15/2022\"). "
        "_amount_of_charge(x, \"75.00\").");
    FactSet once = rules::materialize(base, domain_rules(), builtins);
    REQUIRE(rules::materialize(once, domain_rules(), builtins) == once);

    FactSet more = base;
    more.insert({"_goal", {Term::symbol("y"), Term::symbol("goal_7")}});
    FactSet bigger = rules::materialize(more, domain_rules(), builtins);
    for (const auto& a : once) REQUIRE(bigger.contains(a));
}

TEST_CASE("semi-naive agrees with the naive reference on random programs") {
    rules::BuiltinRegistry builtins;
    auto program = rules::parse_rules(
        "path(X, Y) :- edge(X, Y)."
        "path(X, Z) :- edge(X, Y), path(Y, Z)."
        "cyclic :- path(X, X)."
        "labeled(X, \"seen\") :- path(X, _).",
        builtins);
    std::mt19937 rng(7);
    for (int trial = 0; trial < 300; ++trial) {
        FactSet facts;
        int n_edges = static_cast<int>(rng() % 10);
        for (int i = 0; i < n_edges; ++i) {
            facts.insert({"edge", {Term::symbol("n" + std::to_string(rng() % 5)),
                                   Term::symbol("n" + std::to_string(rng() % 5))}});
        }
        FactSet semi = rules::materialize(facts, program, builtins);
        FactSet naive = rules::materialize_naive(facts, program, builtins);
        REQUIRE(semi == naive);
        // rule order must not matter
        auto shuffled = program;
        std::shuffle(shuffled.begin(), shuffled.end(), rng);
        REQUIRE(rules::materialize(facts, shuffled, builtins) == semi);
    }
}

TEST_CASE("guard-only and body-less rules fire exactly once") {
    rules::BuiltinRegistry builtins;
    auto program = rules::parse_rules("axiom(a). marked :- a == a.", builtins);
    FactSet out = rules::materialize({}, program, builtins);
    REQUIRE(out.size() == 2);
    REQUIRE(out.contains({"axiom", {Term::symbol("a")}}));
    REQUIRE(out.contains({"marked", {}}));
}

TEST_CASE("inequality guards and tuple patterns") {
    rules::BuiltinRegistry builtins;
    auto program = rules::parse_rules(
        "diff(X, Y) :- pair((X, Y)), X != Y.", builtins);
    FactSet facts = asp::parse_facts("pair((a, b)). pair((c, c)).");
    FactSet out = rules::materialize(facts, program, builtins);
    REQUIRE(out.contains({"diff", {Term::symbol("a"), Term::symbol("b")}}));
    REQUIRE(!out.contains({"diff", {Term::symbol("c"), Term::symbol("c")}}));
}

TEST_CASE("lte_dates agrees with an independent serial-day oracle") {
    std::mt19937 rng(99);
    auto leap = [](int y) { return (y % 4 == 0 && y % 100 != 0) || y % 400 == 0; };
    static const int lens[] = {31, 28, 31, 30, 31, 30, 31, 31, 30, 31, 30, 31};
    auto random_date = [&](int& m, int& d, int& y) {
        y = 1900 + static_cast<int>(rng() % 201);
        m = 1 + static_cast<int>(rng() % 12);
        int len = (m == 2 && leap(y)) ? 29 : lens[m - 1];
        d = 1 + static_cast<int>(rng() % len);
    };
    for (int trial = 0; trial < 5000; ++trial) {
        int m1, d1, y1, m2, d2, y2;
        random_date(m1, d1, y1);
        random_date(m2, d2, y2);
        bool expected = serial_day(m1, d1, y1) <= serial_day(m2, d2, y2);
        REQUIRE(rules::lte_dates(mmddyyyy(m1, d1, y1), mmddyyyy(m2, d2, y2)) == expected);
    }
    // equality is inclusive
    REQUIRE(rules::lte_dates("06/15/2021", "06/15/2021"));
}

TEST_CASE("lte_dates rejects malformed and non-Gregorian dates") {
    auto expect_bad = [](const std::string& s) {
        try {
            rules::lte_dates(s, "01/01/2020");
            FAIL("expected BuiltinDomainError for " << s);
        } catch (const BuiltinDomainError& e) {
            REQUIRE(std::string(e.what()) == "not a valid MM/DD/YYYY date: \"" + s + "\"");
        }
    };
    expect_bad("02/29/2023");
    expect_bad("02/29/1900");  // century non-leap
    expect_bad("13/01/2020");
    expect_bad("00/10/2020");
    expect_bad("04/31/2021");
    expect_bad("2023-01-01");
    expect_bad("1/1/2020");
    expect_bad("01/01/20");
    REQUIRE(rules::lte_dates("02/29/2000", "02/29/2024"));  // both valid leap days
}

TEST_CASE("safety violations are rejected at parse time") {
    rules::BuiltinRegistry builtins = rules::default_builtins();
    REQUIRE_THROWS_AS(rules::parse_rules("head(X) :- body(Y).", builtins), SafetyError);
    REQUIRE_THROWS_AS(rules::parse_rules("head(X) :- X == a, body(X).", builtins),
                      SafetyError);
    REQUIRE_THROWS_AS(
        rules::parse_rules("e(\"msg\") :- true == @lte_dates(D1, D2), d(D1, D2).",
                           builtins),
        SafetyError);
    // same rules become safe once the binding atom comes first
    REQUIRE_NOTHROW(rules::parse_rules("head(X) :- body(X), X == a.", builtins));
}

TEST_CASE("unknown builtins are rejected at parse time") {
    rules::BuiltinRegistry builtins;
    REQUIRE_THROWS_AS(rules::parse_rules("p :- q(X), a == @nope(X).", builtins),
                      UnknownBuiltin);
}

TEST_CASE("rule syntax errors report a location") {
    rules::BuiltinRegistry builtins;
    REQUIRE_THROWS_AS(rules::parse_rules("p(X) :- q(X)", builtins), SyntaxError);
    REQUIRE_THROWS_AS(rules::parse_rules("p(X) q(X).", builtins), SyntaxError);
}

TEST_CASE("extract_errors returns messages in canonical order") {
    FactSet facts = asp::parse_facts("error(\"zebra\"). error(\"apple\"). other(\"x\").");
    REQUIRE(rules::extract_errors(facts) == std::vector<std::string>{"apple", "zebra"});
}
