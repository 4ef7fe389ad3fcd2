#include <string>

#include "doctest.h"

#include "eeplan/planner.hpp"
#include "support/fixtures.hpp"

using namespace eeplan;
using nlohmann::json;

namespace {

PlannerOptions quiet_options() {
    PlannerOptions opt;
    opt.workers = 1;
    return opt;
}

}  // namespace

TEST_CASE("speech-style end-to-end plan: 6 enumerated, backbone latency-pruned") {
    auto report = run_search(fx::speech_model(), fx::speech_platform(), fx::speech_records(),
                             quiet_options());
    CHECK(report.at("schema") == "eeplan-plan/1");
    CHECK(report.at("model").at("blocks") == 6);
    CHECK(report.at("model").at("exit_boundaries") == 5);
    CHECK(report.at("model").at("num_classes") == 11);
    CHECK(report.at("stats").at("architectures_enumerated") == 6);

    // Only the backbone-only mapping exceeds the 2.5 s budget.
    const auto& pruned = report.at("pruned");
    REQUIRE(pruned.size() == 1);
    CHECK(pruned[0].at("architecture") == "backbone");
    CHECK(pruned[0].at("reason") == "latency");
    CHECK(report.at("ranking").size() == 5);

    const auto& chosen = report.at("chosen");
    CHECK(chosen.at("exit_blocks").size() == 1);  // two processors -> one exit
    CHECK(chosen.at("worst_case_latency_s").get<double>() <= 2.5);
    CHECK(chosen.at("mapping").size() == 2);
    CHECK(chosen.at("mapping")[0].at("processor") == "m0");
    CHECK(chosen.at("mapping")[1].at("processor") == "m4f");
    // Early exits must actually pay off against the backbone baseline.
    CHECK(chosen.at("efficiency_gain").get<double>() > 0.0);
    CHECK(chosen.at("predicted").at("termination_rates").size() == 2);
    CHECK(chosen.at("simulated").at("n_samples") == 200);
    // Validation records: no correction, corrected == raw.
    CHECK(chosen.at("thresholds").at("raw") == chosen.at("thresholds").at("corrected"));

    // The ranking is sorted by scalar cost.
    double prev = -1;
    for (const auto& row : report.at("ranking")) {
        double c = row.at("scalar_cost").get<double>();
        CHECK(c >= prev);
        prev = c;
    }
}

TEST_CASE("training-source records scale the chosen thresholds by the correction factor") {
    PlannerOptions opt = quiet_options();
    opt.records_source = ProfileSource::TrainingWithCorrection;
    opt.correction = 0.9;
    auto report = run_search(fx::speech_model(), fx::speech_platform(), fx::speech_records(), opt);
    const auto& th = report.at("chosen").at("thresholds");
    auto raw = th.at("raw").get<std::vector<double>>();
    auto corrected = th.at("corrected").get<std::vector<double>>();
    REQUIRE(raw.size() == corrected.size());
    for (std::size_t i = 0; i < raw.size(); ++i)
        CHECK(corrected[i] == doctest::Approx(0.9 * raw[i]).epsilon(1e-12));
    CHECK(report.at("config").at("correction_factor") == 0.9);

    // Validation source ignores the factor even when set.
    opt.records_source = ProfileSource::Validation;
    auto v = run_search(fx::speech_model(), fx::speech_platform(), fx::speech_records(), opt);
    CHECK(v.at("config").at("correction_factor") == 1.0);
}

TEST_CASE("locations without records or below the viability floor are excluded") {
    // Drop every b2 row: that boundary must be reported as having no records.
    std::string csv = fx::speech_records();
    std::string filtered = "sample_id,location_id,confidence,correct\n";
    std::istringstream in(csv);
    std::string line;
    std::getline(in, line);  // header
    while (std::getline(in, line))
        if (line.find(",b2,") == std::string::npos) filtered += line + "\n";

    auto report =
        run_search(fx::speech_model(), fx::speech_platform(), filtered, quiet_options());
    CHECK(report.at("model").at("candidate_locations") == 4);
    const auto& excluded = report.at("model").at("excluded_locations");
    REQUIRE(excluded.size() == 1);
    CHECK(excluded[0].at("location") == "b2");
    CHECK(excluded[0].at("reason") == "no-records");
    CHECK(report.at("stats").at("architectures_enumerated") == 5);  // backbone + 4 singles

    // A floor above every exit's standalone accuracy excludes them all and
    // leaves no feasible plan (the backbone itself misses the deadline).
    PlannerOptions opt = quiet_options();
    opt.viability_floor = 0.999;
    CHECK_THROWS_AS(
        run_search(fx::speech_model(), fx::speech_platform(), fx::speech_records(), opt),
        InfeasibleError);
}

TEST_CASE("missing reserved final location is invalid input") {
    std::string csv = "sample_id,location_id,confidence,correct\n0,b0,0.5,1\n1,b0,0.9,1\n";
    CHECK_THROWS_AS(run_search(fx::speech_model(), fx::speech_platform(), csv, quiet_options()),
                    ValidationError);
}

TEST_CASE("infeasible platform names the binding constraint") {
    auto hw = fx::speech_platform();
    hw["latency_budget_s"] = 0.001;  // nothing fits
    try {
        run_search(fx::speech_model(), hw, fx::speech_records(), quiet_options());
        FAIL("expected InfeasibleError");
    } catch (const InfeasibleError& e) {
        CHECK(std::string(e.what()).find("latency") != std::string::npos);
    }
}

TEST_CASE("budget-violating branches knock out all early-exit architectures") {
    auto hw = fx::speech_platform();
    hw["latency_budget_s"] = 100.0;  // keep the backbone feasible
    // The tiny fixture's branches exceed 0.5% of its backbone MACs.
    std::string csv =
        "sample_id,location_id,confidence,correct\n"
        "0,b0,0.9,1\n1,b0,0.4,1\n0,b1,0.9,1\n1,b1,0.5,1\n"
        "0,final,1.0,1\n1,final,1.0,0\n";
    auto report = run_search(fx::budget_violating_model(), hw, csv, quiet_options());
    CHECK(report.at("chosen").at("architecture") == "backbone");
    for (const auto& row : report.at("pruned")) CHECK(row.at("reason") == "budget");
    CHECK(report.at("pruned").size() == 2);  // ee[0] and ee[1]
}

TEST_CASE("report is byte-identical across repeated and multi-worker runs") {
    PlannerOptions opt = quiet_options();
    opt.seed = 17;
    auto a = run_search(fx::speech_model(), fx::speech_platform(), fx::speech_records(), opt);
    auto b = run_search(fx::speech_model(), fx::speech_platform(), fx::speech_records(), opt);
    CHECK(a.dump() == b.dump());
    opt.workers = 4;
    auto c = run_search(fx::speech_model(), fx::speech_platform(), fx::speech_records(), opt);
    CHECK(a.dump() == c.dump());
}

TEST_CASE("replay reproduces the plan's own simulation") {
    auto report = run_search(fx::speech_model(), fx::speech_platform(), fx::speech_records(),
                             quiet_options());
    auto replay = replay_plan(fx::speech_model(), fx::speech_platform(), fx::speech_records(),
                              report);
    CHECK(replay.at("architecture") == report.at("chosen").at("architecture"));
    CHECK(replay.at("simulated").at("accuracy") ==
          report.at("chosen").at("simulated").at("accuracy"));
    CHECK(replay.at("simulated").at("termination_histogram") ==
          report.at("chosen").at("simulated").at("termination_histogram"));
    // Divergence against the stored prediction matches the plan's record.
    CHECK(replay.at("divergence").at("termination_rate_linf") ==
          report.at("chosen").at("divergence").at("termination_rate_linf"));
}

TEST_CASE("refinement pass reports thresholds off the coarse grid when it helps") {
    PlannerOptions opt = quiet_options();
    opt.refine = 33;
    auto refined = run_search(fx::speech_model(), fx::speech_platform(), fx::speech_records(), opt);
    opt.refine = 0;
    auto coarse = run_search(fx::speech_model(), fx::speech_platform(), fx::speech_records(), opt);
    CHECK(refined.at("chosen").at("scalar_cost").get<double>() <=
          coarse.at("chosen").at("scalar_cost").get<double>() + 1e-12);
    CHECK(refined.at("config").at("refine") == 33);
}

TEST_CASE("summary table renders the headline metrics") {
    auto report = run_search(fx::speech_model(), fx::speech_platform(), fx::speech_records(),
                             quiet_options());
    auto text = summarize_plan(report);
    CHECK(text.find("Chosen architecture") != std::string::npos);
    CHECK(text.find("Efficiency gain") != std::string::npos);
    CHECK(text.find("Early termination") != std::string::npos);
}

TEST_CASE("residual74 three-processor search covers the full threshold budget") {
    PlannerOptions opt = quiet_options();
    auto report = run_search(fx::residual74_model(), fx::iot3_platform(),
                             fx::residual74_records(), opt);
    CHECK(report.at("model").at("blocks") == 75);
    CHECK(report.at("model").at("exit_boundaries") == 74);
    CHECK(report.at("model").at("candidate_locations") == 74);
    CHECK(report.at("stats").at("architectures_enumerated") == 2776);
    // 1 (backbone) + 74 * 13 (single exits) + C(74,2) * 169 (pairs).
    CHECK(report.at("stats").at("threshold_configs_considered").get<double>() == 457432.0);
    CHECK(report.at("chosen").at("exit_blocks").size() <= 2);
}
