#include "eeplan/decision_search.hpp"

#include <algorithm>
#include <cmath>

namespace eeplan {

ThresholdGrid ThresholdGrid::make(double lo, double hi, int n) {
    if (n < 1) throw ValidationError("grid needs at least one point");
    if (!(lo >= 0.0 && hi <= 1.0 && lo <= hi)) throw ValidationError("grid range must be within [0, 1]");
    if (n > 1 && lo == hi) throw ValidationError("degenerate grid range");
    ThresholdGrid g;
    g.values.reserve(n);
    if (n == 1) {
        g.values.push_back(lo);
        return g;
    }
    for (int i = 0; i < n; ++i) g.values.push_back(lo + (hi - lo) * i / (n - 1));
    return g;
}

std::size_t SearchGraph::node_count() const {
    std::size_t n = 2;  // input + final classifier
    for (const auto& l : layers) n += l.size();
    return n;
}

double SearchGraph::config_count() const {
    double c = 1;
    for (const auto& l : layers) c *= static_cast<double>(l.size());
    return c;
}

SearchGraph build_search_graph(const Architecture& a, const ThresholdGrid& grid) {
    SearchGraph g;
    g.layers.assign(a.early_exit_count(), grid.values);
    return g;
}

PredictedMetrics predict_cascade(const std::vector<const ExitProfile*>& stages,
                                 const ThresholdConfig& config, const CascadeCosts& costs) {
    const std::size_t m = stages.size();
    if (m == 0 || config.early.size() != m - 1)
        throw ValidationError("config/stage count mismatch");
    if (costs.inc_macs.size() != m || costs.inc_latency_s.size() != m ||
        costs.energy_at_stage_mj.size() != m)
        throw ValidationError("cost/stage count mismatch");

    PredictedMetrics out;
    out.termination_rates.assign(m, 0.0);
    double survive = 1.0;
    for (std::size_t i = 0; i < m; ++i) {
        const bool is_final = (i + 1 == m);
        const double t = is_final ? 0.0 : config.early[i];
        const double p = is_final ? 1.0 : stages[i]->pass_rate(t);
        const double r = survive * p;
        out.termination_rates[i] = r;
        out.mean_macs += survive * costs.inc_macs[i];
        out.mean_latency_s += survive * costs.inc_latency_s[i];
        out.mean_energy_mj += r * costs.energy_at_stage_mj[i];
        if (r > 0) {
            auto acc = stages[i]->conditional_accuracy(t);
            if (!acc)
                throw ValidationError("undefined conditional accuracy reached with nonzero mass");
            out.accuracy += r * *acc;
        }
        survive *= (1.0 - p);
    }
    return out;
}

double scalar_cost(const PredictedMetrics& m, const BaselineMetrics& base, const CostWeights& w) {
    if (w.efficiency < 0 || w.accuracy < 0) throw ValidationError("weights must be non-negative");
    return w.efficiency * (m.mean_macs / base.macs) +
           w.accuracy * std::max(0.0, base.accuracy - m.accuracy);
}

namespace {

// Usable node indices per layer; a node is usable iff some calibration
// sample passes its threshold (otherwise conditional accuracy is undefined).
std::vector<std::vector<int>> usable_nodes(const SearchGraph& graph,
                                           const std::vector<const ExitProfile*>& stages) {
    std::vector<std::vector<int>> usable(graph.layers.size());
    for (std::size_t i = 0; i < graph.layers.size(); ++i) {
        for (std::size_t j = 0; j < graph.layers[i].size(); ++j)
            if (stages[i]->pass_rate(graph.layers[i][j]) > 0)
                usable[i].push_back(static_cast<int>(j));
        if (usable[i].empty())
            throw NoViableConfigError("no usable threshold at exit layer " + std::to_string(i));
    }
    return usable;
}

ThresholdConfig config_from_indices(const SearchGraph& graph, const std::vector<int>& idx) {
    ThresholdConfig c;
    c.early.reserve(idx.size());
    for (std::size_t i = 0; i < idx.size(); ++i) c.early.push_back(graph.layers[i][idx[i]]);
    return c;
}

}  // namespace

SolveResult exhaustive_thresholds(const SearchGraph& graph,
                                  const std::vector<const ExitProfile*>& stages,
                                  const CascadeCosts& costs, const BaselineMetrics& base,
                                  const CostWeights& weights) {
    const int k = graph.early_exit_count();
    if (k > 5) throw ValidationError("exhaustive search limited to k <= 5 exits");
    if (static_cast<int>(stages.size()) != k + 1) throw ValidationError("stage count mismatch");

    auto usable = usable_nodes(graph, stages);

    SolveResult best;
    bool have_best = false;
    std::vector<int> pos(k, 0);  // positions within the usable lists
    while (true) {
        std::vector<int> idx(k);
        for (int i = 0; i < k; ++i) idx[i] = usable[i][pos[i]];
        auto cfg = config_from_indices(graph, idx);
        auto metrics = predict_cascade(stages, cfg, costs);
        metrics.scalar_cost = scalar_cost(metrics, base, weights);
        if (!have_best || metrics.scalar_cost < best.metrics.scalar_cost) {
            best = {cfg, metrics};
            have_best = true;
        }
        // Odometer: last exit fastest, so configs appear in lexicographic
        // order of the threshold vector (the declared tie-break).
        int d = k - 1;
        while (d >= 0 && ++pos[d] == static_cast<int>(usable[d].size())) pos[d--] = 0;
        if (d < 0) break;
    }
    if (!have_best) throw NoViableConfigError("no viable threshold configuration");
    return best;
}

namespace {

struct ParetoPoint {
    double macs;  // expected additional MACs per sample reaching this layer
    double acc;   // expected accuracy mass per sample reaching this layer
    std::vector<int> cfg;  // node indices for this layer onward
};

// A prunes B when it is at least as good on both coordinates and not
// lexicographically later; the lex condition keeps the declared tie-break
// reachable when coordinates coincide.
bool prunes(const ParetoPoint& a, const ParetoPoint& b) {
    if (a.macs > b.macs || a.acc < b.acc) return false;
    return a.cfg <= b.cfg && a.cfg != b.cfg;
}

}  // namespace

SolveResult solve_thresholds(const SearchGraph& graph,
                             const std::vector<const ExitProfile*>& stages,
                             const CascadeCosts& costs, const BaselineMetrics& base,
                             const CostWeights& weights) {
    const int k = graph.early_exit_count();
    if (static_cast<int>(stages.size()) != k + 1) throw ValidationError("stage count mismatch");

    if (k == 0) {
        SolveResult res;
        res.metrics = predict_cascade(stages, {}, costs);
        res.metrics.scalar_cost = scalar_cost(res.metrics, base, weights);
        return res;
    }

    auto usable = usable_nodes(graph, stages);

    // Backward per-survivor relaxation over the layered DAG. Each point is
    // an expected (macs, accuracy) pair per survivor; both propagate
    // linearly, so dominated points can never become optimal upstream.
    std::vector<ParetoPoint> frontier;
    {
        auto final_acc = stages[k]->conditional_accuracy(0.0);
        if (!final_acc) throw NoViableConfigError("final classifier has no calibration records");
        frontier.push_back({costs.inc_macs[k], *final_acc, {}});
    }

    for (int layer = k - 1; layer >= 0; --layer) {
        std::vector<ParetoPoint> candidates;
        candidates.reserve(usable[layer].size() * frontier.size());
        for (int node : usable[layer]) {
            const double t = graph.layers[layer][node];
            const double p = stages[layer]->pass_rate(t);
            const double acc_here = *stages[layer]->conditional_accuracy(t);
            for (const auto& q : frontier) {
                ParetoPoint c;
                c.macs = costs.inc_macs[layer] + (1.0 - p) * q.macs;
                c.acc = p * acc_here + (1.0 - p) * q.acc;
                c.cfg.reserve(q.cfg.size() + 1);
                c.cfg.push_back(node);
                c.cfg.insert(c.cfg.end(), q.cfg.begin(), q.cfg.end());
                candidates.push_back(std::move(c));
            }
        }
        std::vector<ParetoPoint> kept;
        for (std::size_t i = 0; i < candidates.size(); ++i) {
            bool dead = false;
            for (std::size_t j = 0; j < candidates.size() && !dead; ++j)
                if (j != i && prunes(candidates[j], candidates[i])) dead = true;
            if (!dead) kept.push_back(std::move(candidates[i]));
        }
        frontier = std::move(kept);
    }

    // Final ranking goes through the same prediction path the exhaustive
    // oracle uses, so matching configurations report matching costs.
    SolveResult best;
    std::vector<int> best_cfg;
    bool have_best = false;
    for (const auto& pt : frontier) {
        auto cfg = config_from_indices(graph, pt.cfg);
        auto metrics = predict_cascade(stages, cfg, costs);
        metrics.scalar_cost = scalar_cost(metrics, base, weights);
        bool better = !have_best || metrics.scalar_cost < best.metrics.scalar_cost ||
                      (metrics.scalar_cost == best.metrics.scalar_cost && pt.cfg < best_cfg);
        if (better) {
            best = {cfg, metrics};
            best_cfg = pt.cfg;
            have_best = true;
        }
    }
    if (!have_best) throw NoViableConfigError("no viable threshold configuration");
    return best;
}

SolveResult refine_thresholds(const SolveResult& best, const SearchGraph& coarse_graph,
                              const std::vector<const ExitProfile*>& stages,
                              const CascadeCosts& costs, const BaselineMetrics& base,
                              const CostWeights& weights, int resolution) {
    if (resolution < 1) throw ValidationError("refine resolution must be >= 1");
    const int k = coarse_graph.early_exit_count();
    if (k == 0 || resolution == 1) return best;

    SearchGraph fine;
    fine.layers.resize(k);
    for (int i = 0; i < k; ++i) {
        const auto& coarse = coarse_graph.layers[i];
        double step = coarse.size() > 1 ? coarse[1] - coarse[0] : 0.0;
        const double t = best.config.early[i];
        double lo = std::max(0.0, t - step);
        double hi = std::min(1.0, t + step);
        std::vector<double> vals;
        for (int j = 0; j < resolution; ++j)
            vals.push_back(resolution == 1 ? t : lo + (hi - lo) * j / (resolution - 1));
        vals.push_back(t);  // keep the coarse optimum reachable
        std::sort(vals.begin(), vals.end());
        vals.erase(std::unique(vals.begin(), vals.end()), vals.end());
        fine.layers[i] = std::move(vals);
    }
    auto refined = solve_thresholds(fine, stages, costs, base, weights);
    return refined.metrics.scalar_cost <= best.metrics.scalar_cost ? refined : best;
}

}  // namespace eeplan
