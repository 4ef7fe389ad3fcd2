#include "support/fixtures.hpp"

#include "eeplan/synth.hpp"

namespace fx {

using nlohmann::json;

json tiny_dense_model() {
    return json{
        {"name", "tiny-dense"},
        {"layers",
         json::array({
             {{"id", "input"}, {"kind", "input"}, {"shape", {10}}},
             {{"id", "fc"}, {"kind", "dense"}, {"shape", {11}}, {"inputs", {"input"}}},
             {{"id", "sm"}, {"kind", "softmax"}, {"shape", {11}}, {"inputs", {"fc"}}},
         })},
    };
}

namespace {

json conv(const std::string& id, const json& shape, const std::string& in, int k = 3) {
    return {{"id", id}, {"kind", "conv"}, {"shape", shape}, {"inputs", {in}}, {"kernel", {k, k}}};
}

json act(const std::string& id, const json& shape, const std::string& in) {
    return {{"id", id}, {"kind", "activation"}, {"shape", shape}, {"inputs", {in}}};
}

}  // namespace

json residual74_model() {
    json layers = json::array();
    layers.push_back({{"id", "input"}, {"kind", "input"}, {"shape", {32, 32, 3}}});
    layers.push_back(conv("stem", {32, 32, 16}, "input"));
    layers.push_back({{"id", "stem_bn"}, {"kind", "batchnorm"}, {"shape", {32, 32, 16}},
                      {"inputs", {"stem"}}});
    layers.push_back(act("stem_act", {32, 32, 16}, "stem_bn"));

    std::string prev = "stem_act";
    json prev_shape = {32, 32, 16};
    for (int u = 0; u < 73; ++u) {
        json shape = u < 24 ? json{32, 32, 16} : (u < 48 ? json{16, 16, 32} : json{8, 8, 64});
        const bool down = (u == 24 || u == 48);
        const std::string p = "u" + std::to_string(u) + "_";
        layers.push_back(conv(p + "c1", shape, prev));
        layers.push_back(act(p + "a1", shape, p + "c1"));
        layers.push_back(conv(p + "c2", shape, p + "a1"));
        std::string skip = prev;
        if (down) {
            layers.push_back(conv(p + "proj", shape, prev, 1));
            skip = p + "proj";
        }
        layers.push_back({{"id", p + "add"}, {"kind", "add"}, {"shape", shape},
                          {"inputs", {skip, p + "c2"}}});
        layers.push_back(act(p + "out", shape, p + "add"));
        prev = p + "out";
        prev_shape = shape;
    }

    layers.push_back({{"id", "gpool"}, {"kind", "pool"}, {"shape", {64}}, {"inputs", {prev}}});
    layers.push_back({{"id", "fc"}, {"kind", "dense"}, {"shape", {10}}, {"inputs", {"gpool"}}});
    layers.push_back({{"id", "sm"}, {"kind", "softmax"}, {"shape", {10}}, {"inputs", {"fc"}}});
    layers.push_back({{"id", "out"}, {"kind", "output"}, {"shape", {10}}, {"inputs", {"sm"}}});
    return json{{"name", "residual74"}, {"layers", layers}};
}

json speech_model() {
    json layers = json::array();
    layers.push_back({{"id", "input"}, {"kind", "input"}, {"shape", {49, 10, 1}}});
    layers.push_back({{"id", "c0"}, {"kind", "conv"}, {"shape", {25, 5, 64}},
                      {"inputs", {"input"}}, {"macs", 9679900}});
    std::string prev = "c0";
    for (int i = 1; i <= 4; ++i) {
        std::string id = "c" + std::to_string(i);
        layers.push_back({{"id", id}, {"kind", "conv"}, {"shape", {25, 5, 64}},
                          {"inputs", {prev}}, {"macs", 2500000}});
        prev = id;
    }
    layers.push_back({{"id", "gpool"}, {"kind", "pool"}, {"shape", {64}}, {"inputs", {prev}}});
    layers.push_back({{"id", "fc"}, {"kind", "dense"}, {"shape", {11}}, {"inputs", {"gpool"}},
                      {"macs", 27075000}});
    layers.push_back({{"id", "sm"}, {"kind", "softmax"}, {"shape", {11}}, {"inputs", {"fc"}}});
    layers.push_back({{"id", "out"}, {"kind", "output"}, {"shape", {11}}, {"inputs", {"sm"}}});
    return json{{"name", "speech5"}, {"layers", layers}};
}

json budget_violating_model() {
    return json{
        {"name", "tiny-budget-breaker"},
        {"layers",
         json::array({
             {{"id", "input"}, {"kind", "input"}, {"shape", {8, 8, 8}}},
             {{"id", "c1"}, {"kind", "conv"}, {"shape", {8, 8, 8}}, {"inputs", {"input"}},
              {"kernel", {1, 1}}},
             {{"id", "c2"}, {"kind", "conv"}, {"shape", {8, 8, 8}}, {"inputs", {"c1"}},
              {"kernel", {1, 1}}},
             {{"id", "gpool"}, {"kind", "pool"}, {"shape", {8}}, {"inputs", {"c2"}}},
             {{"id", "fc"}, {"kind", "dense"}, {"shape", {10}}, {"inputs", {"gpool"}}},
             {{"id", "sm"}, {"kind", "softmax"}, {"shape", {10}}, {"inputs", {"fc"}}},
         })},
    };
}

json iot3_platform() {
    return json{
        {"processors",
         json::array({
             {{"id", "mcu"}, {"macs_per_second", 1e9}, {"mem_bytes", 1000000000},
              {"storage_bytes", 1000000000}, {"active_power_mw", 10.0}, {"sleep_power_mw", 0.1}},
             {{"id", "edge"}, {"macs_per_second", 2e9}, {"mem_bytes", 1000000000},
              {"storage_bytes", 1000000000}, {"active_power_mw", 50.0}, {"sleep_power_mw", 0.5}},
             {{"id", "hub"}, {"macs_per_second", 5e9}, {"mem_bytes", 1000000000},
              {"storage_bytes", 1000000000}, {"active_power_mw", 200.0}, {"sleep_power_mw", 1.0}},
         })},
        {"links",
         json::array({
             {{"from", "mcu"}, {"to", "edge"}, {"bytes_per_second", 1e7}},
             {{"from", "edge"}, {"to", "hub"}, {"bytes_per_second", 1e7}},
         })},
        {"latency_budget_s", 10.0},
    };
}

json speech_platform() {
    return json{
        {"processors",
         json::array({
             {{"id", "m0"}, {"macs_per_second", 1e7}, {"mem_bytes", 100000000},
              {"storage_bytes", 100000000}, {"active_power_mw", 5.0}, {"sleep_power_mw", 0.05}},
             {{"id", "m4f"}, {"macs_per_second", 7.5e7}, {"mem_bytes", 100000000},
              {"storage_bytes", 100000000}, {"active_power_mw", 50.0}, {"sleep_power_mw", 0.5}},
         })},
        {"links", json::array({{{"from", "m0"}, {"to", "m4f"}, {"bytes_per_second", 1e6}}})},
        {"latency_budget_s", 2.5},
    };
}

std::string speech_records(std::uint64_t seed) {
    eeplan::GeneratorSpec spec;
    spec.mode = eeplan::GeneratorSpec::Mode::SharedNoise;
    spec.n_samples = 200;
    spec.shared_weight = 0.4;
    auto add = [&](const std::string& loc, double clo, double chi, double alo, double ahi) {
        spec.noise_exits.push_back({loc, clo, chi, alo, ahi});
    };
    add("b0", 0.25, 0.95, 0.45, 0.90);
    add("b1", 0.30, 0.97, 0.50, 0.92);
    add("b2", 0.30, 0.98, 0.55, 0.94);
    add("b3", 0.35, 0.99, 0.60, 0.95);
    add("b4", 0.35, 1.00, 0.65, 0.97);
    add("final", 0.50, 1.00, 0.90, 0.99);
    return eeplan::generate_synthetic_profiles(spec, seed);
}

std::string residual74_records(std::uint64_t seed) {
    eeplan::GeneratorSpec spec;
    spec.mode = eeplan::GeneratorSpec::Mode::SharedNoise;
    spec.n_samples = 48;
    spec.shared_weight = 0.3;
    for (int i = 0; i < 74; ++i) {
        const double depth = static_cast<double>(i) / 73.0;
        spec.noise_exits.push_back({"b" + std::to_string(i), 0.30, 1.00, 0.50 + 0.30 * depth,
                                    0.90 + 0.08 * depth});
    }
    spec.noise_exits.push_back({"final", 0.60, 1.00, 0.85, 0.995});
    return eeplan::generate_synthetic_profiles(spec, seed);
}

}  // namespace fx
