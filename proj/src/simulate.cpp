#include "eeplan/simulate.hpp"

#include <cmath>

namespace eeplan {

SimulatedMetrics simulate_cascade(const std::vector<std::string>& stage_locations,
                                  const ThresholdConfig& config, const RecordSet& records,
                                  const CascadeCosts& costs) {
    const std::size_t m = stage_locations.size();
    if (m == 0 || config.early.size() != m - 1)
        throw ValidationError("config/stage count mismatch");
    if (costs.inc_macs.size() != m)
        throw ValidationError("cost/stage count mismatch");

    std::vector<const std::vector<CalibrationRecord>*> recs(m);
    for (std::size_t i = 0; i < m; ++i) {
        auto it = records.by_location.find(stage_locations[i]);
        if (it == records.by_location.end())
            throw ValidationError("missing records for location '" + stage_locations[i] + "'");
        recs[i] = &it->second;
    }

    // Cumulative cost through each stage.
    std::vector<double> cum_macs(m, 0), cum_lat(m, 0);
    for (std::size_t i = 0; i < m; ++i) {
        cum_macs[i] = (i ? cum_macs[i - 1] : 0) + costs.inc_macs[i];
        cum_lat[i] = (i ? cum_lat[i - 1] : 0) + costs.inc_latency_s[i];
    }

    SimulatedMetrics out;
    out.termination_histogram.assign(m, 0);
    out.n_samples = static_cast<std::int64_t>(records.sample_ids.size());
    std::int64_t correct = 0;
    for (std::size_t s = 0; s < records.sample_ids.size(); ++s) {
        std::size_t stop = m - 1;
        for (std::size_t i = 0; i + 1 < m; ++i) {
            if ((*recs[i])[s].confidence >= config.early[i]) {
                stop = i;
                break;
            }
        }
        ++out.termination_histogram[stop];
        correct += (*recs[stop])[s].correct ? 1 : 0;
        out.mean_macs += cum_macs[stop];
        out.mean_latency_s += cum_lat[stop];
        out.mean_energy_mj += costs.energy_at_stage_mj[stop];
    }
    const double n = static_cast<double>(out.n_samples);
    out.accuracy = correct / n;
    out.mean_macs /= n;
    out.mean_latency_s /= n;
    out.mean_energy_mj /= n;
    out.termination_rates.resize(m);
    for (std::size_t i = 0; i < m; ++i)
        out.termination_rates[i] = out.termination_histogram[i] / n;
    return out;
}

namespace {

MetricDelta delta(double predicted, double simulated) {
    MetricDelta d;
    d.absolute = std::abs(predicted - simulated);
    d.relative = simulated != 0 ? d.absolute / std::abs(simulated) : (predicted != 0 ? 1.0 : 0.0);
    return d;
}

}  // namespace

DivergenceReport compare(const PredictedMetrics& pred, const SimulatedMetrics& sim) {
    DivergenceReport r;
    r.accuracy = delta(pred.accuracy, sim.accuracy);
    r.mean_macs = delta(pred.mean_macs, sim.mean_macs);
    r.mean_latency_s = delta(pred.mean_latency_s, sim.mean_latency_s);
    r.mean_energy_mj = delta(pred.mean_energy_mj, sim.mean_energy_mj);
    const std::size_t m = std::min(pred.termination_rates.size(), sim.termination_rates.size());
    for (std::size_t i = 0; i < m; ++i)
        r.termination_rate_linf = std::max(
            r.termination_rate_linf, std::abs(pred.termination_rates[i] - sim.termination_rates[i]));
    r.max_relative = std::max({r.accuracy.relative, r.mean_macs.relative,
                               r.mean_latency_s.relative, r.mean_energy_mj.relative});
    return r;
}

}  // namespace eeplan
