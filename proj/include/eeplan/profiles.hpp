#pragma once

#include <cstdint>
#include <map>
#include <optional>
#include <string>
#include <vector>

namespace eeplan {

/// Reserved location id for the backbone's own classifier. Calibration
/// records must include it so cascade accuracy can be evaluated.
inline constexpr const char* kFinalLocationId = "final";

struct CalibrationRecord {
    std::int64_t sample_id = 0;
    std::string location_id;
    double confidence = 0;
    bool correct = false;
};

/// Records grouped by location, sample order identical across locations.
struct RecordSet {
    std::vector<std::int64_t> sample_ids;                       // ascending
    std::map<std::string, std::vector<CalibrationRecord>> by_location;  // aligned with sample_ids
};

/// Parses the calibration CSV (header: sample_id,location_id,confidence,correct).
RecordSet load_records(const std::string& csv_text);

enum class ProfileSource { Validation, TrainingWithCorrection };

/// Empirical pass-rate / conditional-accuracy curves for one exit location.
class ExitProfile {
public:
    ExitProfile() = default;
    ExitProfile(std::string location_id, const std::vector<CalibrationRecord>& records,
                ProfileSource source = ProfileSource::Validation);

    const std::string& location_id() const { return location_id_; }
    std::size_t n_samples() const { return confidences_.size(); }
    ProfileSource source() const { return source_; }

    /// Fraction of samples with confidence >= t.
    double pass_rate(double t) const;
    /// Accuracy among samples with confidence >= t; empty when none pass.
    std::optional<double> conditional_accuracy(double t) const;
    double standalone_accuracy() const;

private:
    std::string location_id_;
    ProfileSource source_ = ProfileSource::Validation;
    std::vector<double> confidences_;          // ascending
    std::vector<std::int64_t> correct_suffix_; // correct count among confidences_[i..]
};

ExitProfile profile_exit(const std::string& location_id,
                         const std::vector<CalibrationRecord>& records,
                         ProfileSource source = ProfileSource::Validation);

/// Per-early-exit thresholds; the final classifier is always at 0.
struct ThresholdConfig {
    std::vector<double> early;
};

/// Scales every early-exit threshold by factor (final stays 0). Results may
/// fall below the grid's lower boundary.
ThresholdConfig apply_correction(const ThresholdConfig& thresholds, double factor);

/// True iff the exit clears the standalone-accuracy floor. Pass floor < 0 to
/// use the default rule: twice random-guess accuracy, capped at 1.
bool viability_filter(const ExitProfile& p, double floor);
double default_viability_floor(int num_classes);

}  // namespace eeplan
