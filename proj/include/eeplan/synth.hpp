#pragma once

#include <cstdint>
#include <string>
#include <vector>

#include "json.hpp"

namespace eeplan {

/// Synthetic calibration-record generation for testing the planner without
/// trained models.
///
/// Factorial mode: each exit has weighted (confidence, correct) strata; the
/// sample set is the full cross product, so the empirical joint distribution
/// equals the product of the marginals and the independence-based predictor
/// is exact on it.
///
/// Shared-noise mode: a per-sample latent shifts every exit's confidence
/// jointly, producing correlated exits and measurable predictor/simulator
/// divergence.
struct StratumSpec {
    double confidence = 0;
    bool correct = false;
    int weight = 1;
};

struct FactorialExitSpec {
    std::string location_id;
    std::vector<StratumSpec> strata;
};

struct SharedNoiseExitSpec {
    std::string location_id;
    double conf_lo = 0;
    double conf_hi = 1;
    double accuracy_lo = 0;  // P(correct) at conf_lo
    double accuracy_hi = 1;  // P(correct) at conf_hi
};

struct GeneratorSpec {
    enum class Mode { Factorial, SharedNoise } mode = Mode::Factorial;
    int samples_per_cell = 1;                      // factorial
    std::int64_t n_samples = 0;                    // shared-noise
    double shared_weight = 0.5;                    // shared-noise: latent vs private mix
    std::vector<FactorialExitSpec> factorial_exits;
    std::vector<SharedNoiseExitSpec> noise_exits;
};

GeneratorSpec parse_generator_spec(const nlohmann::json& doc);

/// Reproducible calibration CSV; a fixed seed yields byte-identical output.
std::string generate_synthetic_profiles(const GeneratorSpec& spec, std::uint64_t seed);

}  // namespace eeplan
