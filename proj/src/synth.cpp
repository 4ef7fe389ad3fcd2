#include "eeplan/synth.hpp"

#include <algorithm>
#include <cmath>
#include <random>
#include <sstream>

#include "eeplan/graph_ir.hpp"  // ValidationError

namespace eeplan {

namespace {

double clamp01(double x) { return std::min(1.0, std::max(0.0, x)); }

// Uniform in [0, 1) from the engine's raw output; avoids the
// implementation-defined std::uniform_real_distribution.
double next_uniform(std::mt19937_64& rng) {
    return static_cast<double>(rng() >> 11) * 0x1.0p-53;
}

void append_row(std::string& out, std::int64_t sample, const std::string& loc, double conf,
                bool correct) {
    char buf[64];
    std::snprintf(buf, sizeof(buf), "%lld,%s,%.6f,%d", static_cast<long long>(sample), loc.c_str(),
                  conf, correct ? 1 : 0);
    out += buf;
    out += '\n';
}

}  // namespace

GeneratorSpec parse_generator_spec(const nlohmann::json& doc) {
    GeneratorSpec spec;
    std::string mode = doc.at("mode").get<std::string>();
    if (mode == "factorial") {
        spec.mode = GeneratorSpec::Mode::Factorial;
        spec.samples_per_cell = doc.value("samples_per_cell", 1);
        for (const auto& je : doc.at("exits")) {
            FactorialExitSpec e;
            e.location_id = je.at("location_id").get<std::string>();
            for (const auto& js : je.at("strata")) {
                StratumSpec s;
                s.confidence = js.at("confidence").get<double>();
                s.correct = js.at("correct").get<int>() != 0;
                s.weight = js.value("weight", 1);
                e.strata.push_back(s);
            }
            spec.factorial_exits.push_back(std::move(e));
        }
    } else if (mode == "shared-noise") {
        spec.mode = GeneratorSpec::Mode::SharedNoise;
        spec.n_samples = doc.at("n_samples").get<std::int64_t>();
        spec.shared_weight = doc.value("shared_weight", 0.5);
        for (const auto& je : doc.at("exits")) {
            SharedNoiseExitSpec e;
            e.location_id = je.at("location_id").get<std::string>();
            e.conf_lo = je.at("conf_lo").get<double>();
            e.conf_hi = je.at("conf_hi").get<double>();
            e.accuracy_lo = je.at("accuracy_lo").get<double>();
            e.accuracy_hi = je.at("accuracy_hi").get<double>();
            spec.noise_exits.push_back(std::move(e));
        }
    } else {
        throw ValidationError("unknown generator mode '" + mode + "'");
    }
    return spec;
}

std::string generate_synthetic_profiles(const GeneratorSpec& spec, std::uint64_t seed) {
    std::string out = "sample_id,location_id,confidence,correct\n";

    if (spec.mode == GeneratorSpec::Mode::Factorial) {
        if (spec.factorial_exits.empty()) throw ValidationError("generator spec has no exits");
        if (spec.samples_per_cell < 1) throw ValidationError("samples_per_cell must be >= 1");
        for (const auto& e : spec.factorial_exits) {
            if (e.strata.empty())
                throw ValidationError("exit '" + e.location_id + "' has no strata");
            for (const auto& s : e.strata) {
                if (!(s.confidence >= 0 && s.confidence <= 1))
                    throw ValidationError("stratum confidence out of range");
                if (s.weight < 1) throw ValidationError("stratum weight must be >= 1");
            }
        }
        // Expand weights into repeated strata, then take the full cross
        // product: the empirical joint is exactly the product of marginals.
        std::vector<std::vector<const StratumSpec*>> expanded;
        for (const auto& e : spec.factorial_exits) {
            std::vector<const StratumSpec*> col;
            for (const auto& s : e.strata)
                for (int w = 0; w < s.weight; ++w) col.push_back(&s);
            expanded.push_back(std::move(col));
        }
        std::vector<std::size_t> pos(expanded.size(), 0);
        std::int64_t sample = 0;
        while (true) {
            for (int rep = 0; rep < spec.samples_per_cell; ++rep) {
                for (std::size_t i = 0; i < expanded.size(); ++i) {
                    const auto* s = expanded[i][pos[i]];
                    append_row(out, sample, spec.factorial_exits[i].location_id, s->confidence,
                               s->correct);
                }
                ++sample;
            }
            int d = static_cast<int>(expanded.size()) - 1;
            while (d >= 0 && ++pos[d] == expanded[d].size()) pos[d--] = 0;
            if (d < 0) break;
        }
        return out;
    }

    // Shared-noise mode.
    if (spec.noise_exits.empty()) throw ValidationError("generator spec has no exits");
    if (spec.n_samples < 1) throw ValidationError("n_samples must be >= 1");
    if (!(spec.shared_weight >= 0 && spec.shared_weight <= 1))
        throw ValidationError("shared_weight must be in [0, 1]");
    for (const auto& e : spec.noise_exits) {
        if (!(e.conf_lo >= 0 && e.conf_hi <= 1 && e.conf_lo <= e.conf_hi))
            throw ValidationError("confidence range invalid for exit '" + e.location_id + "'");
        if (!(e.accuracy_lo >= 0 && e.accuracy_lo <= 1 && e.accuracy_hi >= 0 && e.accuracy_hi <= 1))
            throw ValidationError("accuracy range invalid for exit '" + e.location_id + "'");
    }
    std::mt19937_64 rng(seed);
    for (std::int64_t sample = 0; sample < spec.n_samples; ++sample) {
        const double shared = next_uniform(rng);
        for (const auto& e : spec.noise_exits) {
            const double priv = next_uniform(rng);
            const double u = spec.shared_weight * shared + (1.0 - spec.shared_weight) * priv;
            const double conf = clamp01(e.conf_lo + (e.conf_hi - e.conf_lo) * u);
            const double frac =
                e.conf_hi > e.conf_lo ? (conf - e.conf_lo) / (e.conf_hi - e.conf_lo) : 0.0;
            const double p_correct = clamp01(e.accuracy_lo + (e.accuracy_hi - e.accuracy_lo) * frac);
            const bool correct = next_uniform(rng) < p_correct;
            append_row(out, sample, e.location_id, conf, correct);
        }
    }
    return out;
}

}  // namespace eeplan
