#pragma once

#include <cstdint>
#include <functional>
#include <string>
#include <vector>

#include "eeplan/hw_model.hpp"

namespace eeplan {

/// One EENN candidate: which exit locations (by index into the candidate
/// location list) it uses. Empty = backbone only.
struct Architecture {
    std::vector<int> exit_locations;  // strictly increasing
    std::string id;

    int classifier_count() const { return static_cast<int>(exit_locations.size()) + 1; }
    int early_exit_count() const { return static_cast<int>(exit_locations.size()); }
};

std::string architecture_id(const std::vector<int>& exit_locations);

/// Backbone-only plus every location subset of size 1..(processors-1), in
/// canonical order (by size, then lexicographic).
std::vector<Architecture> enumerate_architectures(int n_locations, const Platform& plat);

/// Span of consecutive blocks assigned to one processor.
struct SubgraphSpan {
    int first_block = 0;
    int last_block = 0;  // inclusive; for subgraph i < k this is exit i's block
    std::string processor_id;
};

struct Mapping {
    std::vector<SubgraphSpan> assignments;  // platform order; prefix of processors
};

/// Subgraph k ends at exit k's block (final subgraph ends at the output
/// block); processors are used as a prefix of the platform order.
Mapping map_to_processors(const Architecture& a, const std::vector<int>& exit_block_indices,
                          int n_blocks, const Platform& plat);

struct PruneRecord {
    std::string architecture_id;
    std::string reason;
};

struct PruneResult {
    std::vector<Architecture> survivors;  // input order preserved
    std::vector<PruneRecord> rejected;
};

/// Keeps architectures whose worst-case latency fits the budget and whose
/// every subgraph fits its processor's memory. cost_fn supplies the
/// per-subgraph loads for an architecture (in mapping order).
PruneResult prune(const std::vector<Architecture>& archs, const Platform& plat,
                  const std::function<std::vector<SegmentCost>(const Architecture&)>& cost_fn);

}  // namespace eeplan
