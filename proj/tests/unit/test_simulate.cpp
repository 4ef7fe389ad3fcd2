#include <sstream>

#include "doctest.h"

#include "eeplan/simulate.hpp"
#include "eeplan/synth.hpp"

using namespace eeplan;

namespace {

RecordSet records_from_csv(const std::string& csv) { return load_records(csv); }

CascadeCosts two_stage_costs() {
    CascadeCosts c;
    c.inc_macs = {10, 90};
    c.inc_latency_s = {1.0, 2.0};
    c.energy_at_stage_mj = {3.0, 8.0};
    c.full_model_macs = 100;
    return c;
}

}  // namespace

TEST_CASE("per-sample replay terminates at the first confidence >= threshold") {
    std::ostringstream csv;
    csv << "sample_id,location_id,confidence,correct\n";
    // Sample 0 exits early (tie with the threshold), 1 and 2 fall through.
    csv << "0,b0,0.600000,1\n1,b0,0.599999,0\n2,b0,0.100000,1\n";
    csv << "0,final,0.900000,0\n1,final,0.900000,1\n2,final,0.900000,0\n";
    auto rs = records_from_csv(csv.str());

    auto sim = simulate_cascade({"b0", "final"}, ThresholdConfig{{0.6}}, rs, two_stage_costs());
    CHECK(sim.n_samples == 3);
    CHECK(sim.termination_histogram == std::vector<std::int64_t>{1, 2});
    CHECK(sim.termination_rates[0] == doctest::Approx(1.0 / 3.0));
    // Sample 0 correct at the exit; samples 1 and 2 judged by the final head.
    CHECK(sim.accuracy == doctest::Approx(2.0 / 3.0));
    CHECK(sim.mean_macs == doctest::Approx((10 + 100 + 100) / 3.0));
    CHECK(sim.mean_latency_s == doctest::Approx((1.0 + 3.0 + 3.0) / 3.0));
    CHECK(sim.mean_energy_mj == doctest::Approx((3.0 + 8.0 + 8.0) / 3.0));

    SUBCASE("missing location") {
        CHECK_THROWS_AS(simulate_cascade({"b9", "final"}, ThresholdConfig{{0.6}}, rs,
                                         two_stage_costs()),
                        ValidationError);
    }
    SUBCASE("threshold/stage mismatch") {
        CHECK_THROWS_AS(simulate_cascade({"b0", "final"}, ThresholdConfig{{0.6, 0.7}}, rs,
                                         two_stage_costs()),
                        ValidationError);
    }
}

TEST_CASE("predictor equals the simulator on factorial (independent) records") {
    GeneratorSpec spec;
    spec.mode = GeneratorSpec::Mode::Factorial;
    spec.samples_per_cell = 1;
    FactorialExitSpec e0{"b0", {{0.31, true, 1}, {0.62, true, 2}, {0.58, false, 1}, {0.97, true, 1}}};
    FactorialExitSpec e1{"b1", {{0.44, false, 1}, {0.71, true, 3}, {0.93, true, 1}}};
    FactorialExitSpec fin{"final", {{1.0, true, 9}, {1.0, false, 1}}};
    spec.factorial_exits = {e0, e1, fin};
    auto rs = load_records(generate_synthetic_profiles(spec, 0));
    CHECK(rs.sample_ids.size() == 5 * 5 * 10);

    ExitProfile p0("b0", rs.by_location.at("b0"));
    ExitProfile p1("b1", rs.by_location.at("b1"));
    ExitProfile pf("final", rs.by_location.at("final"));

    CascadeCosts costs;
    costs.inc_macs = {10, 25, 65};
    costs.inc_latency_s = {0.1, 0.3, 0.8};
    costs.energy_at_stage_mj = {1.0, 2.5, 7.0};
    costs.full_model_macs = 100;

    auto grid = ThresholdGrid::default_grid();
    for (double t0 : grid.values) {
        for (double t1 : grid.values) {
            ThresholdConfig cfg{{t0, t1}};
            auto pred = predict_cascade({&p0, &p1, &pf}, cfg, costs);
            auto sim = simulate_cascade({"b0", "b1", "final"}, cfg, rs, costs);
            auto d = compare(pred, sim);
            CHECK(d.accuracy.absolute <= 1e-9);
            CHECK(d.mean_macs.absolute <= 1e-9);
            CHECK(d.mean_latency_s.absolute <= 1e-9);
            CHECK(d.mean_energy_mj.absolute <= 1e-9);
            CHECK(d.termination_rate_linf <= 1e-9);
        }
    }
}

TEST_CASE("correlated records produce measurable divergence") {
    GeneratorSpec spec;
    spec.mode = GeneratorSpec::Mode::SharedNoise;
    spec.n_samples = 400;
    spec.shared_weight = 0.9;  // strongly correlated exits
    spec.noise_exits = {
        {"b0", 0.2, 1.0, 0.5, 0.95},
        {"b1", 0.3, 1.0, 0.6, 0.97},
        {"final", 0.5, 1.0, 0.9, 0.99},
    };
    auto rs = load_records(generate_synthetic_profiles(spec, 3));
    ExitProfile p0("b0", rs.by_location.at("b0"));
    ExitProfile p1("b1", rs.by_location.at("b1"));
    ExitProfile pf("final", rs.by_location.at("final"));

    CascadeCosts costs;
    costs.inc_macs = {10, 25, 65};
    costs.inc_latency_s = {0.1, 0.3, 0.8};
    costs.energy_at_stage_mj = {1.0, 2.5, 7.0};
    costs.full_model_macs = 100;

    ThresholdConfig cfg{{0.7, 0.7}};
    auto pred = predict_cascade({&p0, &p1, &pf}, cfg, costs);
    auto sim = simulate_cascade({"b0", "b1", "final"}, cfg, rs, costs);
    auto d = compare(pred, sim);
    // With w=0.9 shared noise, the independence assumption must visibly
    // mispredict how much mass reaches the second exit.
    CHECK(d.termination_rate_linf > 1e-3);
    CHECK(d.max_relative > 0.0);
}

TEST_CASE("divergence report arithmetic") {
    PredictedMetrics p;
    p.accuracy = 0.9;
    p.mean_macs = 50;
    p.mean_latency_s = 1.0;
    p.mean_energy_mj = 2.0;
    p.termination_rates = {0.6, 0.4};
    SimulatedMetrics s;
    s.accuracy = 0.8;
    s.mean_macs = 40;
    s.mean_latency_s = 1.0;
    s.mean_energy_mj = 0.0;
    s.termination_rates = {0.5, 0.5};
    auto d = compare(p, s);
    CHECK(d.accuracy.absolute == doctest::Approx(0.1));
    CHECK(d.accuracy.relative == doctest::Approx(0.1 / 0.8));
    CHECK(d.mean_macs.relative == doctest::Approx(10.0 / 40.0));
    CHECK(d.mean_latency_s.absolute == 0.0);
    CHECK(d.mean_energy_mj.relative == 1.0);  // simulated reference is zero
    CHECK(d.termination_rate_linf == doctest::Approx(0.1));
    CHECK(d.max_relative == doctest::Approx(1.0));
}
