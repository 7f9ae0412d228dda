#include <catch2/catch_amalgamated.hpp>

#include <cstdio>
#include <cstdlib>
#include <filesystem>
#include <fstream>
#include <string>

#include <nlohmann/json.hpp>

#include <sys/wait.h>

namespace {

struct RunResult {
    int exit_code = -1;
    std::string output;  // stdout and stderr interleaved
};

// Runs the CLI with the given argument string through the shell.
RunResult run(const std::string& args) {
    std::string cmd = std::string(QAPLAN_CLI_PATH) + " " + args + " 2>&1";
    FILE* p = popen(cmd.c_str(), "r");
    REQUIRE(p != nullptr);
    RunResult r;
    char buf[4096];
    std::size_t n;
    while ((n = std::fread(buf, 1, sizeof buf, p)) > 0) r.output.append(buf, n);
    int status = pclose(p);
    r.exit_code = WIFEXITED(status) ? WEXITSTATUS(status) : -1;
    return r;
}

std::filesystem::path temp_file(const std::string& name, const std::string& content) {
    auto path = std::filesystem::temp_directory_path() / name;
    std::ofstream(path) << content;
    return path;
}

}  // namespace

TEST_CASE("translate prints the intermediate representation") {
    auto r = run("translate 'Show me my profit and loss report for fy21'");
    REQUIRE(r.exit_code == 0);
    REQUIRE(r.output ==
            "_goal(x, goal_1).\n"
            "_report_period(x, (\"01/01/2021\", \"12/31/2021\")).\n");
}

TEST_CASE("materialize derives catalog-level facts") {
    auto r = run("materialize 'Profit and loss report'");
    REQUIRE(r.exit_code == 0);
    REQUIRE(r.output ==
            "_goal(x, goal_1).\n"
            "goal(x, profit_loss_report).\n");
}

TEST_CASE("materialize can read intermediate facts from a file") {
    auto facts = temp_file("qaplan_cli_facts.lp", "_goal(x, goal_7).\n");
    auto r = run("materialize --facts-file " + facts.string());
    REQUIRE(r.exit_code == 0);
    REQUIRE(r.output ==
            "_goal(x, goal_7).\n"
            "goal(x, advice).\n");
}

TEST_CASE("plan fills information gaps with get_info steps") {
    auto r = run("plan 'Profit and loss report'");
    REQUIRE(r.exit_code == 0);
    REQUIRE(r.output ==
            "Step 1. x_end_date = get_info_api(\"end date\", date);\n"
            "Step 2. x_start_date = get_info_api(\"start date\", date);\n"
            "Step 3. x = profit_loss_api(x_start_date, x_end_date);\n");
}

TEST_CASE("answer prints intermediate facts and the plan") {
    auto r = run("answer 'I want to chat with a representative'");
    REQUIRE(r.exit_code == 0);
    REQUIRE(r.output ==
            "-- intermediate representation --\n"
            "_contact_channel(x, \"chat\").\n"
            "_goal(x, goal_6).\n"
            "-- plan --\n"
            "Step 1. x_contact_channel = \"chat\";\n"
            "Step 2. x_contact_topic = get_info_api(\"contact topic\", contact_topic);\n"
            "Step 3. x = contact_us_api(x_contact_topic, x_contact_channel);\n");
}

TEST_CASE("answer --execute runs the plan against stub apis") {
    auto r = run("answer 'Show me my profit and loss report for fy21' --execute");
    REQUIRE(r.exit_code == 0);
    REQUIRE(r.output.find("-- execution --\n"
                          "profit_loss_api(x_start_date, x_end_date, x) "
                          "-> profit_loss_api#1\n") != std::string::npos);
}

TEST_CASE("answer --execute --answers resolves get_info from a JSON map") {
    auto answers = temp_file("qaplan_cli_answers.json",
                             R"({"x_start_date": "01/01/2024", "end date": "03/31/2024"})");
    auto r = run("answer 'Profit and loss report' --execute --answers " +
                 answers.string());
    REQUIRE(r.exit_code == 0);
    REQUIRE(r.output.find("get_info_api(x_end_date, date) -> 03/31/2024") !=
            std::string::npos);
    REQUIRE(r.output.find("get_info_api(x_start_date, date) -> 01/01/2024") !=
            std::string::npos);

    // without answers the execution aborts at the first get_info
    auto aborted = run("answer 'Profit and loss report' --execute");
    REQUIRE(aborted.exit_code == 1);
    REQUIRE(aborted.output.find("aborted at step 0: no answer for end date") !=
            std::string::npos);
}

TEST_CASE("how-to queries skip execution") {
    auto r = run("answer 'How do I set up payroll?' --execute");
    REQUIRE(r.exit_code == 0);
    REQUIRE(r.output.find("-- execution skipped") != std::string::npos);
    REQUIRE(r.output.find("help_api(x_help_topic)") != std::string::npos);
}

TEST_CASE("json output is machine readable") {
    auto r = run("--format json answer 'Profit and loss report'");
    REQUIRE(r.exit_code == 0);
    auto doc = nlohmann::json::parse(r.output);
    REQUIRE(doc.at("intermediate") == "_goal(x, goal_1).\n");
    REQUIRE(doc.at("plan").size() == 3);
    REQUIRE(doc.at("plan")[0].at("schema") == "get_info_api");

    auto plan = run("--format json plan 'Profit and loss report'");
    REQUIRE(plan.exit_code == 0);
    auto pdoc = nlohmann::json::parse(plan.output);
    REQUIRE(pdoc.at("plan").size() == 3);
    REQUIRE(pdoc.at("total_cost") == 3);
}

TEST_CASE("eval scores the bundled dataset perfectly") {
    std::string data = QAPLAN_DATA_DIR;
    auto r = run("eval --dataset " + data + "/dataset.jsonl");
    REQUIRE(r.exit_code == 0);
    REQUIRE(r.output.find("overall success rate: 100.00%") != std::string::npos);

    auto j = run("--format json eval --dataset " + data + "/dataset.jsonl");
    REQUIRE(j.exit_code == 0);
    auto doc = nlohmann::json::parse(j.output);
    REQUIRE(doc.at("overall_success_rate") == 1.0);
    REQUIRE(doc.at("cases").size() == 60);
}

TEST_CASE("constraint violations exit with code 2") {
    auto r = run("plan 'Show me expense report from July 2024 to Jan 2024'");
    REQUIRE(r.exit_code == 2);
    REQUIRE(r.output == "constraint violated: end date must be after start date\n");
}

TEST_CASE("usage errors exit with code 64") {
    auto empty = run("plan '   '");
    REQUIRE(empty.exit_code == 64);
    REQUIRE(empty.output.find("query must not be empty") != std::string::npos);

    REQUIRE(run("plan x --bogus").exit_code == 64);
    REQUIRE(run("").exit_code == 64);  // a subcommand is required
    REQUIRE(run("materialize").exit_code == 64);  // needs query or --facts-file
}

TEST_CASE("pipeline failures exit with code 1") {
    auto miss = run("plan 'make me a sandwich'");
    REQUIRE(miss.exit_code == 1);
    REQUIRE(miss.output.find("no fixture for query") != std::string::npos);

    // llm backend with nothing listening
    auto llm = run("--translator llm --llm-endpoint http://127.0.0.1:1/v1 "
                   "--llm-model m --max-retries 0 --llm-timeout 1 translate 'hi'");
    REQUIRE(llm.exit_code == 1);
    REQUIRE(llm.output.find("unreachable") != std::string::npos);
}

TEST_CASE("malformed data files exit with code 65") {
    auto bad = temp_file("qaplan_cli_bad_rules.lp", "not a rule");
    auto r = run("--rules " + bad.string() + " plan 'Profit and loss report'");
    REQUIRE(r.exit_code == 65);

    auto badcat = temp_file("qaplan_cli_bad_catalog.json", "{]");
    REQUIRE(run("--catalog " + badcat.string() + " plan 'x'").exit_code == 65);
}

TEST_CASE("unreadable input files exit with code 66") {
    auto r = run("--catalog /nonexistent/catalog.json plan 'x'");
    REQUIRE(r.exit_code == 66);
    REQUIRE(r.output.find("cannot open file") != std::string::npos);
}

TEST_CASE("planner strategies are selectable") {
    for (const char* strategy : {"greedy", "astar", "bfs"}) {
        auto r = run(std::string("--strategy ") + strategy +
                     " plan 'Profit and loss report'");
        REQUIRE(r.exit_code == 0);
        REQUIRE(r.output.find("x = profit_loss_api(x_start_date, x_end_date);") !=
                std::string::npos);
    }
}
