#include <catch2/catch_amalgamated.hpp>

#include <sstream>
#include <string>

#include "qaplan/catalog.hpp"
#include "qaplan/executor.hpp"
#include "qaplan/pipeline.hpp"
#include "qaplan/planner.hpp"

using namespace qaplan;

namespace {

const pipeline::Pipeline& pipe() {
    static pipeline::Pipeline p = [] {
        pipeline::PipelineConfig config;
        std::string data = QAPLAN_DATA_DIR;
        config.catalog_path = data + "/catalog.json";
        config.rules_path = data + "/rules.lp";
        config.domain_path = data + "/domain.pddl";
        config.fixtures_path = data + "/fixtures.json";
        return pipeline::load_pipeline(config);
    }();
    return p;
}

pipeline::AnswerResult solved(const std::string& query) {
    auto r = pipeline::answer(pipe(), query);
    REQUIRE(r.errors.empty());
    REQUIRE(r.solve.status == planner::SolveStatus::Solved);
    return r;
}

}  // namespace

TEST_CASE("incomplete report query renders get_info steps with labels") {
    auto r = solved("Profit and loss report");
    REQUIRE(executor::render_plan(r.problem, r.solve.plan, r.bindings, pipe().catalog) ==
            "Step 1. x_end_date = get_info_api(\"end date\", date);\n"
            "Step 2. x_start_date = get_info_api(\"start date\", date);\n"
            "Step 3. x = profit_loss_api(x_start_date, x_end_date);\n");
}

TEST_CASE("bound values render first, in first-use order") {
    auto r = solved("Why was I charged $75?");
    REQUIRE(executor::render_plan(r.problem, r.solve.plan, r.bindings, pipe().catalog) ==
            "Step 1. x_charge_amount = \"75.00\";\n"
            "Step 2. x_charge_date = get_info_api(\"charge date\", date);\n"
            "Step 3. x = charge_lookup_api(x_charge_date, x_charge_amount);\n");
}

TEST_CASE("chat query renders the contact_us pipeline") {
    auto r = solved("I want to chat with a representative");
    REQUIRE(executor::render_plan(r.problem, r.solve.plan, r.bindings, pipe().catalog) ==
            "Step 1. x_contact_channel = \"chat\";\n"
            "Step 2. x_contact_topic = get_info_api(\"contact topic\", contact_topic);\n"
            "Step 3. x = contact_us_api(x_contact_topic, x_contact_channel);\n");
}

TEST_CASE("dataflow renders the producing output as a consuming input") {
    auto r = solved(
        "Provide me with the profit and loss statement for the previous quarter and "
        "put me on a phone call with a representative to discuss it");
    REQUIRE(executor::render_plan(r.problem, r.solve.plan, r.bindings, pipe().catalog) ==
            "Step 1. x_start_date = \"07/01/2024\";\n"
            "Step 2. x_end_date = \"09/30/2024\";\n"
            "Step 3. y_contact_channel = \"phone\";\n"
            "Step 4. x = profit_loss_api(x_start_date, x_end_date);\n"
            "Step 5. y = contact_us_api(x, y_contact_channel);\n");
}

TEST_CASE("answer-map execution fills gaps and completes") {
    auto r = solved("Profit and loss report");
    executor::InfoSource info;
    info.answers = {{"x_start_date", "01/01/2024"}, {"end date", "03/31/2024"}};
    auto trace = executor::execute(r.problem, r.solve.plan, r.bindings, info,
                                   pipe().catalog);
    REQUIRE(trace.completed);
    REQUIRE(trace.records.size() == 3);
    // answers resolve by object name or by human label
    REQUIRE(trace.records[0].output == "03/31/2024");
    REQUIRE(trace.records[1].output == "01/01/2024");
    // the api stub consumes both values and produces a token
    REQUIRE(trace.records[2].inputs ==
            std::vector<std::string>{"01/01/2024", "03/31/2024"});
    REQUIRE(trace.records[2].output == "profit_loss_api#1");
}

TEST_CASE("dataflow execution passes the produced token downstream") {
    auto r = solved(
        "Can I see my profit and loss statement from March to May 2023? I would like "
        "to discuss my profits further over chat");
    executor::InfoSource info;
    auto trace = executor::execute(r.problem, r.solve.plan, r.bindings, info,
                                   pipe().catalog);
    REQUIRE(trace.completed);
    REQUIRE(trace.records.back().action == "contact_us_api(x, y_contact_channel, y)");
    REQUIRE(trace.records.back().inputs ==
            std::vector<std::string>{"profit_loss_api#1", "chat"});
    REQUIRE(trace.records.back().output == "contact_us_api#2");
}

TEST_CASE("missing answers abort the trace") {
    auto r = solved("Profit and loss report");
    executor::InfoSource info;  // empty answer map
    auto trace = executor::execute(r.problem, r.solve.plan, r.bindings, info,
                                   pipe().catalog);
    REQUIRE_FALSE(trace.completed);
    REQUIRE(trace.aborted_step == 0);
    REQUIRE(trace.abort_reason.find("no answer for") != std::string::npos);
}

TEST_CASE("interactive execution prompts with label and type") {
    auto r = solved("I want to chat with a representative");
    executor::InfoSource info;
    info.mode = executor::InfoSource::Mode::InteractiveTerminal;
    std::istringstream in("Billing\n");
    std::ostringstream out;
    auto trace = executor::execute(r.problem, r.solve.plan, r.bindings, info,
                                   pipe().catalog, in, out);
    REQUIRE(trace.completed);
    REQUIRE(out.str() == "? contact topic (contact_topic): ");
    REQUIRE(trace.records[0].output == "Billing");

    // closing the input stream aborts
    std::istringstream closed;
    std::ostringstream out2;
    auto aborted = executor::execute(r.problem, r.solve.plan, r.bindings, info,
                                     pipe().catalog, closed, out2);
    REQUIRE_FALSE(aborted.completed);
    REQUIRE(aborted.abort_reason == "user aborted");
}

TEST_CASE("execution is deterministic for a fixed answer map") {
    auto r = solved("Why am I being charged $30.00?");
    executor::InfoSource info;
    info.answers = {{"charge date", "02/21/2018"}};
    auto a = executor::execute(r.problem, r.solve.plan, r.bindings, info, pipe().catalog);
    auto b = executor::execute(r.problem, r.solve.plan, r.bindings, info, pipe().catalog);
    REQUIRE(a.completed);
    REQUIRE(a.records.size() == b.records.size());
    for (std::size_t i = 0; i < a.records.size(); ++i) {
        REQUIRE(a.records[i].action == b.records[i].action);
        REQUIRE(a.records[i].output == b.records[i].output);
    }
}
