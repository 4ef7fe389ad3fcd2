#pragma once

#include <cstdint>
#include <string>

#include "json.hpp"

// Shared test fixtures: synthetic model graphs, hardware descriptions and
// calibration record sets used across the unit and acceptance suites.
namespace fx {

/// input -> dense(10 -> 11 classes) -> softmax; three nodes, no explicit
/// output marker.
nlohmann::json tiny_dense_model();

/// Image-style residual backbone: stem conv + 73 residual units over three
/// stages (32x32x16, 16x16x32, 8x8x64) + global-pool/dense(10)/softmax head.
/// Fuses into 75 blocks, i.e. 74 interior exit boundaries.
nlohmann::json residual74_model();

/// Speech-style chain: five feature blocks followed by an
/// (intentionally heavy) dense head over 11 classes; 6 blocks, 5 boundaries.
nlohmann::json speech_model();

/// Tiny backbone whose synthesized exit branches exceed the 0.5% MAC budget.
nlohmann::json budget_violating_model();

/// Three-processor chain with roomy memory and a 10 s budget; fits every
/// architecture of the residual74 fixture.
nlohmann::json iot3_platform();

/// Two-processor chain (10 MMAC/s + 75 MMAC/s, 1 MB/s link, 2.5 s budget)
/// sized so only the backbone-only mapping of the speech fixture misses the
/// deadline.
nlohmann::json speech_platform();

/// Correlated (shared-noise) calibration records for speech_model locations
/// b0..b4 plus "final"; 200 samples.
std::string speech_records(std::uint64_t seed = 7);

/// Correlated calibration records for every residual74 boundary b0..b73 plus
/// "final"; 48 samples, all locations viable.
std::string residual74_records(std::uint64_t seed = 11);

}  // namespace fx
