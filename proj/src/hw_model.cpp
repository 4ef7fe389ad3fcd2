#include "eeplan/hw_model.hpp"

namespace eeplan {

Platform parse_platform(const nlohmann::json& doc) {
    if (!doc.is_object()) throw ValidationError("hardware document must be a JSON object");
    for (auto it = doc.begin(); it != doc.end(); ++it)
        if (it.key() != "processors" && it.key() != "links" && it.key() != "latency_budget_s")
            throw ValidationError("unknown hardware field '" + it.key() + "'");
    Platform plat;
    if (!doc.contains("processors") || !doc["processors"].is_array() || doc["processors"].empty())
        throw ValidationError("hardware document needs a non-empty 'processors' array");
    for (const auto& jp : doc["processors"]) {
        ProcessorSpec p;
        p.id = jp.at("id").get<std::string>();
        p.macs_per_second = jp.at("macs_per_second").get<double>();
        p.mem_bytes = jp.at("mem_bytes").get<std::int64_t>();
        p.storage_bytes = jp.at("storage_bytes").get<std::int64_t>();
        p.active_power_mw = jp.at("active_power_mw").get<double>();
        p.sleep_power_mw = jp.at("sleep_power_mw").get<double>();
        if (p.macs_per_second <= 0)
            throw ValidationError("processor '" + p.id + "' needs macs_per_second > 0");
        if (p.mem_bytes <= 0 || p.storage_bytes <= 0)
            throw ValidationError("processor '" + p.id + "' needs positive memory/storage");
        if (p.sleep_power_mw > p.active_power_mw || p.sleep_power_mw < 0)
            throw ValidationError("processor '" + p.id + "' power states inconsistent");
        plat.processors.push_back(std::move(p));
    }
    if (doc.contains("links")) {
        for (const auto& jl : doc["links"]) {
            Link l;
            l.from = jl.at("from").get<std::string>();
            l.to = jl.at("to").get<std::string>();
            l.bytes_per_second = jl.at("bytes_per_second").get<double>();
            if (l.bytes_per_second <= 0)
                throw ValidationError("link " + l.from + "->" + l.to + " needs bytes_per_second > 0");
            plat.links.push_back(std::move(l));
        }
    }
    if (plat.links.size() + 1 != plat.processors.size())
        throw ValidationError("expected |links| = |processors| - 1");
    for (std::size_t i = 0; i < plat.links.size(); ++i)
        if (plat.links[i].from != plat.processors[i].id ||
            plat.links[i].to != plat.processors[i + 1].id)
            throw ValidationError("links must connect consecutive processors in order");
    plat.latency_budget_s = doc.value("latency_budget_s", 0.0);
    if (plat.latency_budget_s <= 0)
        throw ValidationError("hardware document needs latency_budget_s > 0");
    return plat;
}

double segment_latency(std::int64_t macs, const ProcessorSpec& p) {
    if (macs < 0) throw ValidationError("negative mac count");
    return static_cast<double>(macs) / p.macs_per_second;
}

double transfer_latency(std::int64_t bytes, const Link& l) {
    if (bytes < 0) throw ValidationError("negative transfer size");
    return static_cast<double>(bytes) / l.bytes_per_second;
}

double worst_case_latency(const std::vector<SegmentCost>& segments, const Platform& plat) {
    if (segments.size() > plat.processors.size())
        throw ValidationError("more subgraphs than processors");
    double total = 0;
    for (std::size_t i = 0; i < segments.size(); ++i) {
        total += segment_latency(segments[i].macs, plat.processors[i]);
        if (i + 1 < segments.size())
            total += transfer_latency(segments[i].boundary_bytes, plat.links[i]);
    }
    return total;
}

double energy_estimate(const std::vector<double>& segment_latencies_s, const Platform& plat,
                       std::size_t executed_up_to) {
    if (executed_up_to > segment_latencies_s.size() || segment_latencies_s.size() > plat.processors.size())
        throw ValidationError("energy_estimate: segment/processor mismatch");
    double mj = 0;
    for (std::size_t i = 0; i < executed_up_to; ++i) {
        double t = segment_latencies_s[i];
        mj += t * plat.processors[i].active_power_mw;
        for (std::size_t q = 0; q < plat.processors.size(); ++q)
            if (q != i) mj += t * plat.processors[q].sleep_power_mw;
    }
    return mj;
}

bool memory_fit(const SegmentCost& seg, const ProcessorSpec& p) {
    return seg.params_bytes <= p.storage_bytes &&
           seg.peak_activation_bytes + seg.params_bytes <= p.mem_bytes;
}

}  // namespace eeplan
