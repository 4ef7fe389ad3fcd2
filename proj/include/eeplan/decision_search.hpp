#pragma once

#include <cstdint>
#include <string>
#include <vector>

#include "eeplan/hw_model.hpp"
#include "eeplan/profiles.hpp"
#include "eeplan/search_space.hpp"

namespace eeplan {

struct ThresholdGrid {
    std::vector<double> values;  // strictly increasing, within [0, 1]

    static ThresholdGrid make(double lo, double hi, int n);
    /// 13 values {0.40, 0.45, ..., 1.00}.
    static ThresholdGrid default_grid() { return make(0.40, 1.00, 13); }
};

/// Layered threshold search graph: one input node, one candidate-threshold
/// layer per early exit, one final-classifier node at threshold 0. Layers
/// are fully connected in order.
struct SearchGraph {
    std::vector<std::vector<double>> layers;  // per early exit

    int early_exit_count() const { return static_cast<int>(layers.size()); }
    std::size_t node_count() const;
    double config_count() const;  // product of layer sizes
};

SearchGraph build_search_graph(const Architecture& a, const ThresholdGrid& grid);

struct PredictedMetrics {
    double accuracy = 0;
    double mean_macs = 0;
    double mean_latency_s = 0;
    double mean_energy_mj = 0;
    std::vector<double> termination_rates;  // per classifier, sums to 1
    double scalar_cost = 0;                 // filled by scalar_cost()
};

/// Per-classifier incremental loads for one architecture: stage i holds the
/// cost paid by every sample that reaches classifier i (backbone blocks
/// since the previous classifier, that exit's branch, and the transfer onto
/// its processor). energy_at_stage_mj[i] is the total energy of an inference
/// terminating at classifier i.
struct CascadeCosts {
    std::vector<double> inc_macs;
    std::vector<double> inc_latency_s;
    std::vector<double> energy_at_stage_mj;
    double full_model_macs = 0;  // backbone + all branches of this architecture
};

struct BaselineMetrics {
    double macs = 0;
    double accuracy = 0;
};

struct CostWeights {
    double efficiency = 0.9;
    double accuracy = 0.1;
};

/// Independence-model cascade prediction: marginal pass rates become
/// termination rates r_i = p_i * prod_{j<i} (1 - p_j), metrics are the
/// rate-weighted sums.
PredictedMetrics predict_cascade(const std::vector<const ExitProfile*>& stages,
                                 const ThresholdConfig& config, const CascadeCosts& costs);

double scalar_cost(const PredictedMetrics& m, const BaselineMetrics& base, const CostWeights& w);

struct SolveResult {
    ThresholdConfig config;
    PredictedMetrics metrics;
};

/// Raised when no grid configuration has defined accuracy everywhere.
class NoViableConfigError : public std::runtime_error {
public:
    using std::runtime_error::runtime_error;
};

/// Optimal per-exit thresholds by backward relaxation over the layered DAG;
/// exact under the independence model, validated against
/// exhaustive_thresholds. Tie-break: lowest thresholds, earliest exits first.
SolveResult solve_thresholds(const SearchGraph& graph,
                             const std::vector<const ExitProfile*>& stages,
                             const CascadeCosts& costs, const BaselineMetrics& base,
                             const CostWeights& weights);

/// Brute-force oracle over every grid configuration (k <= 5 enforced).
SolveResult exhaustive_thresholds(const SearchGraph& graph,
                                  const std::vector<const ExitProfile*>& stages,
                                  const CascadeCosts& costs, const BaselineMetrics& base,
                                  const CostWeights& weights);

/// Second pass on a finer grid spanning +/- one coarse step around each
/// chosen threshold, `resolution` points per exit. Never increases the cost.
SolveResult refine_thresholds(const SolveResult& best, const SearchGraph& coarse_graph,
                              const std::vector<const ExitProfile*>& stages,
                              const CascadeCosts& costs, const BaselineMetrics& base,
                              const CostWeights& weights, int resolution);

}  // namespace eeplan
