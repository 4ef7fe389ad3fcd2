#include <fstream>
#include <iostream>
#include <sstream>
#include <string>

#include "CLI11.hpp"
#include "json.hpp"

#include "eeplan/planner.hpp"
#include "eeplan/synth.hpp"

namespace {

constexpr int kExitInvalidInput = 2;
constexpr int kExitInfeasible = 3;

std::string read_file(const std::string& path) {
    std::ifstream in(path, std::ios::binary);
    if (!in) throw eeplan::ValidationError("cannot open '" + path + "'");
    std::ostringstream os;
    os << in.rdbuf();
    return os.str();
}

nlohmann::json read_json(const std::string& path) {
    try {
        return nlohmann::json::parse(read_file(path));
    } catch (const nlohmann::json::parse_error& e) {
        throw eeplan::ValidationError("invalid JSON in '" + path + "': " + e.what());
    }
}

void write_output(const std::string& path, const std::string& text) {
    if (path.empty() || path == "-") {
        std::cout << text;
        return;
    }
    std::ofstream out(path, std::ios::binary);
    if (!out) throw eeplan::ValidationError("cannot write '" + path + "'");
    out << text;
}

}  // namespace

int main(int argc, char** argv) {
    CLI::App app{"Early-exit augmentation planner for heterogeneous/distributed targets"};
    app.require_subcommand(1);

    // plan
    auto* plan_cmd = app.add_subcommand("plan", "Run the full architecture + threshold search");
    std::string model_path, hw_path, records_path, out_path, weights_arg = "0.9,0.1";
    std::string records_source = "validation";
    eeplan::PlannerOptions opt;
    bool summary = false;
    plan_cmd->add_option("--model", model_path, "Model-graph JSON document")->required();
    plan_cmd->add_option("--hardware", hw_path, "Hardware description JSON")->required();
    plan_cmd->add_option("--records", records_path, "Calibration records CSV")->required();
    plan_cmd->add_option("--weights", weights_arg, "Efficiency,accuracy cost weights");
    plan_cmd->add_option("--grid-min", opt.grid_min, "Lowest grid threshold");
    plan_cmd->add_option("--grid-max", opt.grid_max, "Highest grid threshold");
    plan_cmd->add_option("--grid-points", opt.grid_points, "Thresholds per early exit");
    plan_cmd->add_option("--correction", opt.correction, "Training-set correction factor");
    plan_cmd->add_option("--records-source", records_source,
                         "Where the records came from: validation|training");
    plan_cmd->add_option("--refine", opt.refine, "Refinement grid resolution (0 = off)");
    plan_cmd->add_option("--seed", opt.seed, "Seed echoed into the report");
    plan_cmd->add_option("--workers", opt.workers, "Worker threads (0 = auto)");
    plan_cmd->add_option("--budget-fraction", opt.budget_fraction,
                         "Max added branch MACs as a fraction of the backbone");
    plan_cmd->add_option("--viability-floor", opt.viability_floor,
                         "Standalone accuracy floor for exits (<0 = 2x random guess)");
    plan_cmd->add_option("--out", out_path, "Report path (default stdout)");
    plan_cmd->add_flag("--summary", summary, "Print a human-readable summary table");

    // synth
    auto* synth_cmd = app.add_subcommand("synth", "Generate synthetic calibration records");
    std::string synth_spec_path, synth_out;
    std::uint64_t synth_seed = 0;
    synth_cmd->add_option("--spec", synth_spec_path, "Generator spec JSON")->required();
    synth_cmd->add_option("--seed", synth_seed, "RNG seed");
    synth_cmd->add_option("--out", synth_out, "CSV path (default stdout)");

    // simulate
    auto* sim_cmd = app.add_subcommand("simulate", "Replay a saved plan against records");
    std::string sim_plan, sim_model, sim_hw, sim_records, sim_out;
    sim_cmd->add_option("--plan", sim_plan, "Plan report JSON")->required();
    sim_cmd->add_option("--model", sim_model, "Model-graph JSON document")->required();
    sim_cmd->add_option("--hardware", sim_hw, "Hardware description JSON")->required();
    sim_cmd->add_option("--records", sim_records, "Calibration records CSV")->required();
    sim_cmd->add_option("--out", sim_out, "Metrics path (default stdout)");

    CLI11_PARSE(app, argc, argv);

    try {
        if (plan_cmd->parsed()) {
            auto comma = weights_arg.find(',');
            if (comma == std::string::npos)
                throw eeplan::ValidationError("--weights expects 'w_eff,w_acc'");
            opt.weights.efficiency = std::stod(weights_arg.substr(0, comma));
            opt.weights.accuracy = std::stod(weights_arg.substr(comma + 1));
            if (records_source == "validation")
                opt.records_source = eeplan::ProfileSource::Validation;
            else if (records_source == "training")
                opt.records_source = eeplan::ProfileSource::TrainingWithCorrection;
            else
                throw eeplan::ValidationError("--records-source must be validation|training");

            auto report = eeplan::run_search(read_json(model_path), read_json(hw_path),
                                             read_file(records_path), opt);
            write_output(out_path, report.dump(2) + "\n");
            if (summary) std::cout << eeplan::summarize_plan(report);
        } else if (synth_cmd->parsed()) {
            auto spec = eeplan::parse_generator_spec(read_json(synth_spec_path));
            write_output(synth_out, eeplan::generate_synthetic_profiles(spec, synth_seed));
        } else if (sim_cmd->parsed()) {
            auto result = eeplan::replay_plan(read_json(sim_model), read_json(sim_hw),
                                              read_file(sim_records), read_json(sim_plan));
            write_output(sim_out, result.dump(2) + "\n");
        }
    } catch (const eeplan::InfeasibleError& e) {
        std::cerr << "error: " << e.what() << "\n";
        return kExitInfeasible;
    } catch (const std::exception& e) {
        std::cerr << "error: " << e.what() << "\n";
        return kExitInvalidInput;
    }
    return 0;
}
