#pragma once

#include <cstdint>
#include <string>

#include "json.hpp"

#include "eeplan/decision_search.hpp"
#include "eeplan/profiles.hpp"

namespace eeplan {

/// Raised when no architecture survives the constraints; message names the
/// binding constraint.
class InfeasibleError : public std::runtime_error {
public:
    using std::runtime_error::runtime_error;
};

struct PlannerOptions {
    CostWeights weights;
    double grid_min = 0.40;
    double grid_max = 1.00;
    int grid_points = 13;
    double correction = 0.9;
    ProfileSource records_source = ProfileSource::Validation;
    int refine = 0;  // 0 = no refinement pass
    std::uint64_t seed = 0;
    int workers = 0;  // 0 = hardware concurrency
    double budget_fraction = 0.005;
    double viability_floor = -1;  // < 0 = default rule (2x random guess)
};

/// Full search: enumerate -> prune -> per-architecture threshold solve ->
/// scalar-cost ranking -> report. Deterministic for identical inputs,
/// options and seed.
nlohmann::ordered_json run_search(const nlohmann::json& model_doc, const nlohmann::json& hw_doc,
                                  const std::string& records_csv, const PlannerOptions& opt);

/// Replays a saved plan's chosen configuration against calibration records
/// and returns the measured metrics plus divergence from the plan's
/// prediction.
nlohmann::ordered_json replay_plan(const nlohmann::json& model_doc, const nlohmann::json& hw_doc,
                                   const std::string& records_csv, const nlohmann::json& plan);

/// Human-readable summary of a plan report (one metric per row, chosen vs
/// baseline).
std::string summarize_plan(const nlohmann::json& plan);

}  // namespace eeplan
