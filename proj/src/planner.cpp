#include "eeplan/planner.hpp"

#include <algorithm>
#include <atomic>
#include <map>
#include <optional>
#include <sstream>
#include <thread>

#include "eeplan/exit_factory.hpp"
#include "eeplan/graph_ir.hpp"
#include "eeplan/hw_model.hpp"
#include "eeplan/search_space.hpp"
#include "eeplan/simulate.hpp"

namespace eeplan {

namespace {

struct CandidateLocation {
    int block_index = 0;
    std::string block_id;
    ExitCandidate branch;
    ExitProfile profile;
};

struct ModelContext {
    LayerGraph layers;
    BlockGraph blocks;
    Blueprint blueprint;
    std::vector<std::int64_t> cum_block_macs;  // inclusive prefix sums
    std::int64_t backbone_macs = 0;
};

ModelContext build_model_context(const nlohmann::json& model_doc) {
    ModelContext ctx;
    ctx.layers = parse_model_graph(model_doc);
    ctx.blocks = fuse_blocks(ctx.layers);
    ctx.blueprint = extract_classifier_blueprint(ctx.layers);
    ctx.backbone_macs = ctx.blocks.total_macs();
    std::int64_t cum = 0;
    for (const auto& b : ctx.blocks.blocks()) {
        cum += b.macs;
        ctx.cum_block_macs.push_back(cum);
    }
    return ctx;
}

std::vector<SegmentCost> segment_costs(const Architecture& a, const Mapping& mapping,
                                       const ModelContext& ctx,
                                       const std::vector<CandidateLocation>& locations) {
    std::vector<SegmentCost> segs;
    segs.reserve(mapping.assignments.size());
    for (std::size_t k = 0; k < mapping.assignments.size(); ++k) {
        const auto& span = mapping.assignments[k];
        SegmentCost s;
        for (int b = span.first_block; b <= span.last_block; ++b) {
            const auto& blk = ctx.blocks[b];
            s.macs += blk.macs;
            s.params_bytes += blk.params_bytes;
            s.peak_activation_bytes = std::max(s.peak_activation_bytes, blk.activation_bytes);
        }
        if (k + 1 < mapping.assignments.size()) {
            const auto& branch = locations[a.exit_locations[k]].branch;
            s.macs += branch.branch_macs;
            s.params_bytes += branch.branch_params_bytes;
            s.peak_activation_bytes = std::max(s.peak_activation_bytes, branch.branch_activation_bytes);
            s.boundary_bytes = ctx.blocks[span.last_block].ofm_bytes;
        }
        segs.push_back(s);
    }
    return segs;
}

CascadeCosts cascade_costs(const Architecture& a, const Mapping& mapping, const ModelContext& ctx,
                           const std::vector<CandidateLocation>& locations, const Platform& plat) {
    auto segs = segment_costs(a, mapping, ctx, locations);
    const std::size_t m = segs.size();
    CascadeCosts c;
    c.inc_macs.resize(m);
    c.inc_latency_s.resize(m);
    c.energy_at_stage_mj.resize(m);
    std::vector<double> seg_lat(m);
    for (std::size_t i = 0; i < m; ++i) {
        seg_lat[i] = segment_latency(segs[i].macs, plat.processors[i]);
        c.inc_macs[i] = static_cast<double>(segs[i].macs);
        c.inc_latency_s[i] = seg_lat[i];
        if (i > 0) c.inc_latency_s[i] += transfer_latency(segs[i - 1].boundary_bytes, plat.links[i - 1]);
        c.full_model_macs += c.inc_macs[i];
    }
    for (std::size_t i = 0; i < m; ++i) {
        std::vector<double> prefix(seg_lat.begin(), seg_lat.begin() + i + 1);
        c.energy_at_stage_mj[i] = energy_estimate(prefix, plat, i + 1);
    }
    return c;
}

nlohmann::ordered_json metrics_json(const PredictedMetrics& m) {
    nlohmann::ordered_json j;
    j["accuracy"] = m.accuracy;
    j["mean_macs"] = m.mean_macs;
    j["mean_latency_s"] = m.mean_latency_s;
    j["mean_energy_mj"] = m.mean_energy_mj;
    j["termination_rates"] = m.termination_rates;
    return j;
}

nlohmann::ordered_json metrics_json(const SimulatedMetrics& m) {
    nlohmann::ordered_json j;
    j["accuracy"] = m.accuracy;
    j["mean_macs"] = m.mean_macs;
    j["mean_latency_s"] = m.mean_latency_s;
    j["mean_energy_mj"] = m.mean_energy_mj;
    j["termination_rates"] = m.termination_rates;
    j["termination_histogram"] = m.termination_histogram;
    j["n_samples"] = m.n_samples;
    return j;
}

nlohmann::ordered_json divergence_json(const DivergenceReport& d) {
    auto delta = [](const MetricDelta& x) {
        nlohmann::ordered_json j;
        j["abs"] = x.absolute;
        j["rel"] = x.relative;
        return j;
    };
    nlohmann::ordered_json j;
    j["accuracy"] = delta(d.accuracy);
    j["mean_macs"] = delta(d.mean_macs);
    j["mean_latency_s"] = delta(d.mean_latency_s);
    j["mean_energy_mj"] = delta(d.mean_energy_mj);
    j["termination_rate_linf"] = d.termination_rate_linf;
    return j;
}

struct ArchEvaluation {
    std::size_t canonical_index = 0;
    Architecture arch;
    ThresholdConfig raw;
    ThresholdConfig corrected;
    PredictedMetrics metrics;
    double configs_considered = 0;
    bool viable = true;
};

}  // namespace

nlohmann::ordered_json run_search(const nlohmann::json& model_doc, const nlohmann::json& hw_doc,
                                  const std::string& records_csv, const PlannerOptions& opt) {
    ModelContext ctx = build_model_context(model_doc);
    Platform plat = parse_platform(hw_doc);
    RecordSet records = load_records(records_csv);

    auto final_it = records.by_location.find(kFinalLocationId);
    if (final_it == records.by_location.end())
        throw ValidationError("records must include the reserved 'final' location");
    ExitProfile final_profile(kFinalLocationId, final_it->second, opt.records_source);

    const double floor = opt.viability_floor >= 0
                             ? opt.viability_floor
                             : default_viability_floor(ctx.blueprint.num_classes);

    // Candidate locations: interior block boundaries that have calibration
    // records and clear the viability floor.
    auto boundaries = enumerate_exit_locations(ctx.blocks);
    std::vector<CandidateLocation> locations;
    nlohmann::ordered_json excluded = nlohmann::ordered_json::array();
    for (std::size_t i = 0; i < boundaries.size(); ++i) {
        const auto& block_id = boundaries[i];
        auto rit = records.by_location.find(block_id);
        if (rit == records.by_location.end()) {
            excluded.push_back({{"location", block_id}, {"reason", "no-records"}});
            continue;
        }
        ExitProfile prof(block_id, rit->second, opt.records_source);
        if (!viability_filter(prof, floor)) {
            excluded.push_back({{"location", block_id}, {"reason", "non-viable"}});
            continue;
        }
        CandidateLocation loc;
        loc.block_index = static_cast<int>(i);
        loc.block_id = block_id;
        loc.branch = build_exit_branch(ctx.blueprint, ctx.blocks[i].ofm_shape, block_id,
                                       ctx.cum_block_macs[i]);
        loc.profile = std::move(prof);
        locations.push_back(std::move(loc));
    }

    std::vector<int> exit_block_indices;
    for (const auto& l : locations) exit_block_indices.push_back(l.block_index);

    auto archs = enumerate_architectures(static_cast<int>(locations.size()), plat);
    const std::size_t n_enumerated = archs.size();

    // Budget gate, then latency/memory pruning.
    std::vector<PruneRecord> rejected;
    std::vector<Architecture> budget_ok;
    for (const auto& a : archs) {
        std::vector<ExitCandidate> branches;
        for (int loc : a.exit_locations) branches.push_back(locations[loc].branch);
        if (check_budget(branches, ctx.backbone_macs, opt.budget_fraction))
            budget_ok.push_back(a);
        else
            rejected.push_back({a.id, "budget"});
    }
    auto cost_fn = [&](const Architecture& a) {
        auto mapping = map_to_processors(a, exit_block_indices,
                                         static_cast<int>(ctx.blocks.size()), plat);
        return segment_costs(a, mapping, ctx, locations);
    };
    auto pruned = prune(budget_ok, plat, cost_fn);
    rejected.insert(rejected.end(), pruned.rejected.begin(), pruned.rejected.end());

    // Baseline: the unmodified backbone on the first processor, evaluated
    // whether or not it survives the constraints.
    Architecture backbone_only{{}, architecture_id({})};
    auto backbone_mapping = map_to_processors(backbone_only, exit_block_indices,
                                              static_cast<int>(ctx.blocks.size()), plat);
    auto backbone_costs = cascade_costs(backbone_only, backbone_mapping, ctx, locations, plat);
    std::vector<const ExitProfile*> backbone_stages{&final_profile};
    PredictedMetrics baseline = predict_cascade(backbone_stages, {}, backbone_costs);
    BaselineMetrics base{baseline.mean_macs, baseline.accuracy};

    // Per-architecture threshold solve, fan-out over a bounded worker pool;
    // results land at their canonical index so merging is order-independent.
    const double correction_factor =
        opt.records_source == ProfileSource::TrainingWithCorrection ? opt.correction : 1.0;
    ThresholdGrid grid = ThresholdGrid::make(opt.grid_min, opt.grid_max, opt.grid_points);

    const auto& survivors = pruned.survivors;
    std::vector<ArchEvaluation> evals(survivors.size());
    std::vector<std::string> eval_errors(survivors.size());
    auto evaluate_one = [&](std::size_t idx) {
        const Architecture& a = survivors[idx];
        ArchEvaluation ev;
        ev.canonical_index = idx;
        ev.arch = a;
        try {
            auto mapping = map_to_processors(a, exit_block_indices,
                                             static_cast<int>(ctx.blocks.size()), plat);
            auto costs = cascade_costs(a, mapping, ctx, locations, plat);
            std::vector<const ExitProfile*> stages;
            for (int loc : a.exit_locations) stages.push_back(&locations[loc].profile);
            stages.push_back(&final_profile);
            auto graph = build_search_graph(a, grid);
            ev.configs_considered = graph.config_count();
            auto solved = solve_thresholds(graph, stages, costs, base, opt.weights);
            ev.raw = solved.config;
            ev.corrected = apply_correction(solved.config, correction_factor);
            ev.metrics = predict_cascade(stages, ev.corrected, costs);
            ev.metrics.scalar_cost = scalar_cost(ev.metrics, base, opt.weights);
        } catch (const NoViableConfigError& e) {
            ev.viable = false;
            eval_errors[idx] = e.what();
        }
        evals[idx] = std::move(ev);
    };

    unsigned n_workers = opt.workers > 0 ? static_cast<unsigned>(opt.workers)
                                         : std::max(1u, std::thread::hardware_concurrency());
    n_workers = std::min<std::size_t>(n_workers, std::max<std::size_t>(1, survivors.size()));
    if (n_workers <= 1 || survivors.size() < 2) {
        for (std::size_t i = 0; i < survivors.size(); ++i) evaluate_one(i);
    } else {
        std::atomic<std::size_t> next{0};
        std::vector<std::thread> pool;
        for (unsigned w = 0; w < n_workers; ++w)
            pool.emplace_back([&] {
                for (std::size_t i = next.fetch_add(1); i < survivors.size();
                     i = next.fetch_add(1))
                    evaluate_one(i);
            });
        for (auto& t : pool) t.join();
    }

    std::vector<const ArchEvaluation*> ranked;
    double configs_considered_total = 0;
    for (std::size_t i = 0; i < evals.size(); ++i) {
        if (!evals[i].viable) {
            rejected.push_back({survivors[i].id, "no-viable-thresholds"});
            continue;
        }
        configs_considered_total += evals[i].configs_considered;
        ranked.push_back(&evals[i]);
    }
    std::sort(ranked.begin(), ranked.end(), [](const ArchEvaluation* a, const ArchEvaluation* b) {
        if (a->metrics.scalar_cost != b->metrics.scalar_cost)
            return a->metrics.scalar_cost < b->metrics.scalar_cost;
        return a->canonical_index < b->canonical_index;
    });

    if (ranked.empty()) {
        std::map<std::string, std::size_t> reasons;
        for (const auto& r : rejected) ++reasons[r.reason];
        std::string binding = "constraints";
        std::size_t most = 0;
        for (const auto& [reason, count] : reasons)
            if (count > most) { most = count; binding = reason; }
        throw InfeasibleError("no architecture satisfies the constraints (binding constraint: " +
                              binding + ")");
    }

    const ArchEvaluation& winner = *ranked.front();
    auto winner_mapping = map_to_processors(winner.arch, exit_block_indices,
                                            static_cast<int>(ctx.blocks.size()), plat);
    auto winner_costs = cascade_costs(winner.arch, winner_mapping, ctx, locations, plat);
    std::vector<const ExitProfile*> winner_stages;
    std::vector<std::string> winner_locs;
    for (int loc : winner.arch.exit_locations) {
        winner_stages.push_back(&locations[loc].profile);
        winner_locs.push_back(locations[loc].block_id);
    }
    winner_stages.push_back(&final_profile);
    winner_locs.push_back(kFinalLocationId);

    ThresholdConfig final_raw = winner.raw;
    ThresholdConfig final_corrected = winner.corrected;
    PredictedMetrics final_metrics = winner.metrics;
    if (opt.refine > 1 && winner.arch.early_exit_count() > 0) {
        auto graph = build_search_graph(winner.arch, grid);
        SolveResult coarse{winner.raw, predict_cascade(winner_stages, winner.raw, winner_costs)};
        coarse.metrics.scalar_cost = scalar_cost(coarse.metrics, base, opt.weights);
        auto refined = refine_thresholds(coarse, graph, winner_stages, winner_costs, base,
                                         opt.weights, opt.refine);
        final_raw = refined.config;
        final_corrected = apply_correction(refined.config, correction_factor);
        final_metrics = predict_cascade(winner_stages, final_corrected, winner_costs);
        final_metrics.scalar_cost = scalar_cost(final_metrics, base, opt.weights);
    }

    auto simulated = simulate_cascade(winner_locs, final_corrected, records, winner_costs);
    auto divergence = compare(final_metrics, simulated);

    // Report assembly.
    nlohmann::ordered_json report;
    report["schema"] = "eeplan-plan/1";
    report["config"] = {
        {"weights", {{"efficiency", opt.weights.efficiency}, {"accuracy", opt.weights.accuracy}}},
        {"grid", {{"min", opt.grid_min}, {"max", opt.grid_max}, {"points", opt.grid_points}}},
        {"records_source",
         opt.records_source == ProfileSource::Validation ? "validation" : "training"},
        {"correction_factor", correction_factor},
        {"refine", opt.refine},
        {"seed", opt.seed},
        {"budget_fraction", opt.budget_fraction},
        {"viability_floor", floor},
    };
    report["model"] = {
        {"name", ctx.layers.name()},
        {"layers", ctx.layers.nodes().size()},
        {"blocks", ctx.blocks.size()},
        {"backbone_macs", ctx.backbone_macs},
        {"num_classes", ctx.blueprint.num_classes},
        {"exit_boundaries", boundaries.size()},
        {"candidate_locations", locations.size()},
        {"excluded_locations", excluded},
    };
    {
        nlohmann::ordered_json procs = nlohmann::ordered_json::array();
        for (const auto& p : plat.processors) procs.push_back(p.id);
        report["platform"] = {{"processors", procs},
                              {"latency_budget_s", plat.latency_budget_s}};
    }
    report["baseline"] = metrics_json(baseline);

    {
        nlohmann::ordered_json chosen;
        chosen["architecture"] = winner.arch.id;
        nlohmann::ordered_json blocks = nlohmann::ordered_json::array();
        for (std::size_t i = 0; i + 1 < winner_locs.size(); ++i) blocks.push_back(winner_locs[i]);
        chosen["exit_blocks"] = blocks;
        nlohmann::ordered_json mapping = nlohmann::ordered_json::array();
        for (const auto& span : winner_mapping.assignments)
            mapping.push_back({{"processor", span.processor_id},
                               {"first_block", span.first_block},
                               {"last_block", span.last_block}});
        chosen["mapping"] = mapping;
        chosen["thresholds"] = {{"raw", final_raw.early}, {"corrected", final_corrected.early}};
        chosen["predicted"] = metrics_json(final_metrics);
        chosen["simulated"] = metrics_json(simulated);
        chosen["divergence"] = divergence_json(divergence);
        chosen["scalar_cost"] = final_metrics.scalar_cost;
        chosen["efficiency_gain"] = 1.0 - final_metrics.mean_macs / base.macs;
        chosen["worst_case_latency_s"] = worst_case_latency(
            segment_costs(winner.arch, winner_mapping, ctx, locations), plat);
        report["chosen"] = chosen;
    }

    {
        nlohmann::ordered_json ranking = nlohmann::ordered_json::array();
        for (const auto* ev : ranked) {
            nlohmann::ordered_json row;
            row["architecture"] = ev->arch.id;
            row["scalar_cost"] = ev->metrics.scalar_cost;
            row["thresholds"] = ev->corrected.early;
            row["accuracy"] = ev->metrics.accuracy;
            row["mean_macs"] = ev->metrics.mean_macs;
            row["efficiency_gain"] = 1.0 - ev->metrics.mean_macs / base.macs;
            ranking.push_back(std::move(row));
        }
        report["ranking"] = ranking;
    }
    {
        nlohmann::ordered_json prunes = nlohmann::ordered_json::array();
        for (const auto& r : rejected)
            prunes.push_back({{"architecture", r.architecture_id}, {"reason", r.reason}});
        report["pruned"] = prunes;
    }
    report["stats"] = {
        {"architectures_enumerated", n_enumerated},
        {"architectures_rejected", rejected.size()},
        {"architectures_ranked", ranked.size()},
        {"threshold_configs_considered", configs_considered_total},
    };
    return report;
}

nlohmann::ordered_json replay_plan(const nlohmann::json& model_doc, const nlohmann::json& hw_doc,
                                   const std::string& records_csv, const nlohmann::json& plan) {
    ModelContext ctx = build_model_context(model_doc);
    Platform plat = parse_platform(hw_doc);
    RecordSet records = load_records(records_csv);

    std::vector<std::string> exit_blocks =
        plan.at("chosen").at("exit_blocks").get<std::vector<std::string>>();
    ThresholdConfig config;
    config.early = plan.at("chosen").at("thresholds").at("corrected").get<std::vector<double>>();
    if (config.early.size() != exit_blocks.size())
        throw ValidationError("plan thresholds/exits mismatch");

    std::vector<CandidateLocation> locations;
    std::vector<int> exit_block_indices;
    std::vector<int> arch_locations;
    for (const auto& bid : exit_blocks) {
        int idx = -1;
        for (std::size_t i = 0; i < ctx.blocks.size(); ++i)
            if (ctx.blocks[i].id == bid) idx = static_cast<int>(i);
        if (idx < 0) throw ValidationError("plan references unknown block '" + bid + "'");
        CandidateLocation loc;
        loc.block_index = idx;
        loc.block_id = bid;
        loc.branch =
            build_exit_branch(ctx.blueprint, ctx.blocks[idx].ofm_shape, bid, ctx.cum_block_macs[idx]);
        locations.push_back(std::move(loc));
        exit_block_indices.push_back(idx);
        arch_locations.push_back(static_cast<int>(arch_locations.size()));
    }
    Architecture arch{arch_locations, architecture_id(arch_locations)};
    auto mapping =
        map_to_processors(arch, exit_block_indices, static_cast<int>(ctx.blocks.size()), plat);
    auto costs = cascade_costs(arch, mapping, ctx, locations, plat);

    std::vector<std::string> stage_locs = exit_blocks;
    stage_locs.push_back(kFinalLocationId);
    auto sim = simulate_cascade(stage_locs, config, records, costs);

    nlohmann::ordered_json out;
    out["architecture"] = plan.at("chosen").at("architecture");
    out["thresholds"] = config.early;
    out["simulated"] = metrics_json(sim);
    if (plan.at("chosen").contains("predicted")) {
        PredictedMetrics pred;
        const auto& jp = plan.at("chosen").at("predicted");
        pred.accuracy = jp.at("accuracy").get<double>();
        pred.mean_macs = jp.at("mean_macs").get<double>();
        pred.mean_latency_s = jp.at("mean_latency_s").get<double>();
        pred.mean_energy_mj = jp.at("mean_energy_mj").get<double>();
        pred.termination_rates = jp.at("termination_rates").get<std::vector<double>>();
        out["divergence"] = divergence_json(compare(pred, sim));
    }
    return out;
}

std::string summarize_plan(const nlohmann::json& plan) {
    const auto& chosen = plan.at("chosen");
    const auto& baseline = plan.at("baseline");
    const auto& pred = chosen.at("predicted");
    std::ostringstream os;
    auto pct = [](double x) {
        std::ostringstream s;
        s.precision(2);
        s << std::fixed << 100.0 * x << "%";
        return s.str();
    };
    double base_acc = baseline.at("accuracy").get<double>();
    double acc = pred.at("accuracy").get<double>();
    double base_macs = baseline.at("mean_macs").get<double>();
    double macs = pred.at("mean_macs").get<double>();
    double base_lat = baseline.at("mean_latency_s").get<double>();
    double lat = pred.at("mean_latency_s").get<double>();
    double base_e = baseline.at("mean_energy_mj").get<double>();
    double e = pred.at("mean_energy_mj").get<double>();
    double early = 0;
    auto rates = pred.at("termination_rates").get<std::vector<double>>();
    for (std::size_t i = 0; i + 1 < rates.size(); ++i) early += rates[i];

    os << "Chosen architecture : " << chosen.at("architecture").get<std::string>() << "\n";
    os << "Exit blocks         : ";
    bool first = true;
    for (const auto& b : chosen.at("exit_blocks")) {
        if (!first) os << ", ";
        os << b.get<std::string>();
        first = false;
    }
    if (first) os << "(none)";
    os << "\n";
    os << "Thresholds          : ";
    first = true;
    for (const auto& t : chosen.at("thresholds").at("corrected")) {
        if (!first) os << ", ";
        os << t.get<double>();
        first = false;
    }
    if (first) os << "(none)";
    os << "\n";
    os << "Accuracy            : " << pct(acc) << " (" << pct(acc - base_acc) << " vs baseline)\n";
    os << "Mean MACs           : " << macs << " (" << pct(macs / base_macs - 1.0) << ")\n";
    os << "Mean latency        : " << lat << " s (" << pct(base_lat != 0 ? lat / base_lat - 1.0 : 0)
       << ")\n";
    os << "Mean energy         : " << e << " mJ ("
       << pct(base_e != 0 ? e / base_e - 1.0 : 0) << ")\n";
    os << "Early termination   : " << pct(early) << "\n";
    os << "Efficiency gain     : " << pct(chosen.at("efficiency_gain").get<double>()) << "\n";
    return os.str();
}

}  // namespace eeplan
