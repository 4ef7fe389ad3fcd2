#include "eeplan/profiles.hpp"

#include <algorithm>
#include <charconv>
#include <sstream>

#include "eeplan/graph_ir.hpp"  // ValidationError

namespace eeplan {

namespace {

std::vector<std::string> split_csv_line(const std::string& line) {
    std::vector<std::string> out;
    std::stringstream ss(line);
    std::string field;
    while (std::getline(ss, field, ',')) out.push_back(field);
    if (!line.empty() && line.back() == ',') out.push_back("");
    return out;
}

}  // namespace

RecordSet load_records(const std::string& csv_text) {
    std::istringstream in(csv_text);
    std::string line;
    if (!std::getline(in, line)) throw ValidationError("empty records document");
    if (!line.empty() && line.back() == '\r') line.pop_back();
    if (line != "sample_id,location_id,confidence,correct")
        throw ValidationError("bad records header: '" + line + "'");

    std::map<std::string, std::map<std::int64_t, CalibrationRecord>> grouped;
    std::size_t lineno = 1;
    while (std::getline(in, line)) {
        ++lineno;
        if (!line.empty() && line.back() == '\r') line.pop_back();
        if (line.empty()) continue;
        auto fields = split_csv_line(line);
        if (fields.size() != 4)
            throw ValidationError("malformed row at line " + std::to_string(lineno));
        CalibrationRecord r;
        try {
            r.sample_id = std::stoll(fields[0]);
            r.location_id = fields[1];
            r.confidence = std::stod(fields[2]);
        } catch (const std::exception&) {
            throw ValidationError("malformed row at line " + std::to_string(lineno));
        }
        if (fields[3] == "0") r.correct = false;
        else if (fields[3] == "1") r.correct = true;
        else throw ValidationError("malformed 'correct' at line " + std::to_string(lineno));
        if (r.location_id.empty())
            throw ValidationError("empty location_id at line " + std::to_string(lineno));
        if (!(r.confidence >= 0.0 && r.confidence <= 1.0))
            throw ValidationError("confidence out of range at line " + std::to_string(lineno));
        auto& loc = grouped[r.location_id];
        if (!loc.emplace(r.sample_id, r).second)
            throw ValidationError("duplicate (sample, location) at line " + std::to_string(lineno));
    }
    if (grouped.empty()) throw ValidationError("records document has no rows");

    RecordSet rs;
    const auto& ref = grouped.begin()->second;
    for (const auto& [sid, _] : ref) rs.sample_ids.push_back(sid);
    for (const auto& [loc, samples] : grouped) {
        if (samples.size() != rs.sample_ids.size())
            throw ValidationError("mismatched sample sets across locations (location '" + loc + "')");
        std::vector<CalibrationRecord> recs;
        recs.reserve(samples.size());
        std::size_t i = 0;
        for (const auto& [sid, rec] : samples) {
            if (sid != rs.sample_ids[i++])
                throw ValidationError("mismatched sample sets across locations (location '" + loc + "')");
            recs.push_back(rec);
        }
        rs.by_location.emplace(loc, std::move(recs));
    }
    return rs;
}

ExitProfile::ExitProfile(std::string location_id, const std::vector<CalibrationRecord>& records,
                         ProfileSource source)
    : location_id_(std::move(location_id)), source_(source) {
    if (records.empty()) throw ValidationError("empty record set for location '" + location_id_ + "'");
    std::vector<std::pair<double, bool>> rows;
    rows.reserve(records.size());
    for (const auto& r : records) rows.emplace_back(r.confidence, r.correct);
    std::sort(rows.begin(), rows.end());
    confidences_.reserve(rows.size());
    for (const auto& [c, _] : rows) confidences_.push_back(c);
    correct_suffix_.assign(rows.size() + 1, 0);
    for (std::size_t i = rows.size(); i-- > 0;)
        correct_suffix_[i] = correct_suffix_[i + 1] + (rows[i].second ? 1 : 0);
}

double ExitProfile::pass_rate(double t) const {
    auto it = std::lower_bound(confidences_.begin(), confidences_.end(), t);
    auto passing = static_cast<double>(confidences_.end() - it);
    return passing / static_cast<double>(confidences_.size());
}

std::optional<double> ExitProfile::conditional_accuracy(double t) const {
    auto it = std::lower_bound(confidences_.begin(), confidences_.end(), t);
    auto n_pass = confidences_.end() - it;
    if (n_pass == 0) return std::nullopt;
    auto first = static_cast<std::size_t>(it - confidences_.begin());
    return static_cast<double>(correct_suffix_[first]) / static_cast<double>(n_pass);
}

double ExitProfile::standalone_accuracy() const {
    return *conditional_accuracy(0.0);
}

ExitProfile profile_exit(const std::string& location_id,
                         const std::vector<CalibrationRecord>& records, ProfileSource source) {
    return ExitProfile(location_id, records, source);
}

ThresholdConfig apply_correction(const ThresholdConfig& thresholds, double factor) {
    if (!(factor > 0.0 && factor <= 1.0))
        throw ValidationError("correction factor must be in (0, 1]");
    ThresholdConfig out = thresholds;
    for (auto& t : out.early) t *= factor;
    return out;
}

double default_viability_floor(int num_classes) {
    if (num_classes <= 0) throw ValidationError("num_classes must be positive");
    return std::min(1.0, 2.0 / static_cast<double>(num_classes));
}

bool viability_filter(const ExitProfile& p, double floor) {
    return p.standalone_accuracy() >= floor;
}

}  // namespace eeplan
