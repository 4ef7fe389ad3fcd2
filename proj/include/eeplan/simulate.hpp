#pragma once

#include <cstdint>
#include <string>
#include <vector>

#include "eeplan/decision_search.hpp"
#include "eeplan/profiles.hpp"

namespace eeplan {

/// Measured cascade metrics from replaying joint records (the
/// correlation-aware oracle for the independence-based predictor).
struct SimulatedMetrics {
    double accuracy = 0;
    double mean_macs = 0;
    double mean_latency_s = 0;
    double mean_energy_mj = 0;
    std::vector<double> termination_rates;
    std::vector<std::int64_t> termination_histogram;  // per classifier, sums to n
    std::int64_t n_samples = 0;
};

/// Replays every sample through the cascade: it terminates at the first
/// classifier whose confidence >= its threshold (final always terminates).
/// stage_locations names the record group per classifier, last = "final".
SimulatedMetrics simulate_cascade(const std::vector<std::string>& stage_locations,
                                  const ThresholdConfig& config, const RecordSet& records,
                                  const CascadeCosts& costs);

struct MetricDelta {
    double absolute = 0;
    double relative = 0;  // absolute / |reference|, 0 when reference is 0
};

struct DivergenceReport {
    MetricDelta accuracy;
    MetricDelta mean_macs;
    MetricDelta mean_latency_s;
    MetricDelta mean_energy_mj;
    double termination_rate_linf = 0;
    double max_relative = 0;
};

DivergenceReport compare(const PredictedMetrics& pred, const SimulatedMetrics& sim);

}  // namespace eeplan
