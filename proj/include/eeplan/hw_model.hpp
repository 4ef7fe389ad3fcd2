#pragma once

#include <cstdint>
#include <string>
#include <vector>

#include "json.hpp"

#include "eeplan/graph_ir.hpp"

namespace eeplan {

struct ProcessorSpec {
    std::string id;
    double macs_per_second = 0;
    std::int64_t mem_bytes = 0;
    std::int64_t storage_bytes = 0;
    double active_power_mw = 0;
    double sleep_power_mw = 0;
};

struct Link {
    std::string from;
    std::string to;
    double bytes_per_second = 0;
};

/// Ordered heterogeneous processor chain; processors[i] hands off to
/// processors[i+1] over links[i].
struct Platform {
    std::vector<ProcessorSpec> processors;
    std::vector<Link> links;
    double latency_budget_s = 0;
};

Platform parse_platform(const nlohmann::json& doc);

double segment_latency(std::int64_t macs, const ProcessorSpec& p);
double transfer_latency(std::int64_t bytes, const Link& l);

/// Per-subgraph load figures as seen by the hardware model.
struct SegmentCost {
    std::int64_t macs = 0;
    std::int64_t params_bytes = 0;
    std::int64_t peak_activation_bytes = 0;
    std::int64_t boundary_bytes = 0;  // output tensor shipped to the next processor
};

/// Full-depth execution time: every segment runs, every boundary tensor is
/// transferred; no early-termination credit.
double worst_case_latency(const std::vector<SegmentCost>& segments, const Platform& plat);

/// Energy for executing segments [0, executed_up_to]; the active segment's
/// processor draws active power, all other processors sleep for that span.
double energy_estimate(const std::vector<double>& segment_latencies_s, const Platform& plat,
                       std::size_t executed_up_to);

bool memory_fit(const SegmentCost& seg, const ProcessorSpec& p);

}  // namespace eeplan
