#include "eeplan/search_space.hpp"

#include <sstream>

namespace eeplan {

std::string architecture_id(const std::vector<int>& exit_locations) {
    if (exit_locations.empty()) return "backbone";
    std::ostringstream os;
    os << "ee[";
    for (std::size_t i = 0; i < exit_locations.size(); ++i) {
        if (i) os << ',';
        os << exit_locations[i];
    }
    os << ']';
    return os.str();
}

namespace {

void emit_subsets(int n, int k, std::vector<int>& cur, int start,
                  std::vector<Architecture>& out) {
    if (static_cast<int>(cur.size()) == k) {
        out.push_back({cur, architecture_id(cur)});
        return;
    }
    for (int i = start; i < n; ++i) {
        cur.push_back(i);
        emit_subsets(n, k, cur, i + 1, out);
        cur.pop_back();
    }
}

}  // namespace

std::vector<Architecture> enumerate_architectures(int n_locations, const Platform& plat) {
    if (n_locations < 0) throw ValidationError("negative location count");
    const int max_exits = static_cast<int>(plat.processors.size()) - 1;
    std::vector<Architecture> out;
    out.push_back({{}, architecture_id({})});
    std::vector<int> cur;
    for (int k = 1; k <= max_exits; ++k) emit_subsets(n_locations, k, cur, 0, out);
    return out;
}

Mapping map_to_processors(const Architecture& a, const std::vector<int>& exit_block_indices,
                          int n_blocks, const Platform& plat) {
    if (a.classifier_count() > static_cast<int>(plat.processors.size()))
        throw ValidationError("more classifiers than processors");
    Mapping m;
    int first = 0;
    for (std::size_t k = 0; k < a.exit_locations.size(); ++k) {
        int loc = a.exit_locations[k];
        if (loc < 0 || loc >= static_cast<int>(exit_block_indices.size()))
            throw ValidationError("exit location index out of range");
        SubgraphSpan s;
        s.first_block = first;
        s.last_block = exit_block_indices[loc];
        s.processor_id = plat.processors[k].id;
        if (s.last_block < s.first_block)
            throw ValidationError("exit locations not strictly increasing");
        first = s.last_block + 1;
        m.assignments.push_back(std::move(s));
    }
    SubgraphSpan tail;
    tail.first_block = first;
    tail.last_block = n_blocks - 1;
    tail.processor_id = plat.processors[a.exit_locations.size()].id;
    m.assignments.push_back(std::move(tail));
    return m;
}

PruneResult prune(const std::vector<Architecture>& archs, const Platform& plat,
                  const std::function<std::vector<SegmentCost>(const Architecture&)>& cost_fn) {
    PruneResult res;
    for (const auto& a : archs) {
        auto segments = cost_fn(a);
        bool fits_mem = true;
        for (std::size_t i = 0; i < segments.size(); ++i) {
            if (!memory_fit(segments[i], plat.processors[i])) {
                fits_mem = false;
                break;
            }
        }
        if (!fits_mem) {
            res.rejected.push_back({a.id, "memory"});
            continue;
        }
        double wcl = worst_case_latency(segments, plat);
        if (wcl > plat.latency_budget_s) {
            res.rejected.push_back({a.id, "latency"});
            continue;
        }
        res.survivors.push_back(a);
    }
    return res;
}

}  // namespace eeplan
