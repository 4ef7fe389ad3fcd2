#pragma once

#include <cstdint>
#include <string>
#include <vector>

#include "eeplan/graph_ir.hpp"

namespace eeplan {

/// A synthesized early-exit branch attached at a block boundary.
struct ExitCandidate {
    std::string location_block_id;
    std::vector<LayerNode> branch_layers;  // downsampling prefix + blueprint body
    std::int64_t branch_macs = 0;
    std::int64_t branch_params_bytes = 0;
    std::int64_t branch_activation_bytes = 0;  // peak over branch layers
    Shape ifm_shape;
    std::int64_t cum_backbone_macs = 0;  // backbone MACs up to and including the location block
};

/// Interior block boundaries in topological order; the final classifier
/// block is excluded (its output is the backbone's own classifier).
std::vector<std::string> enumerate_exit_locations(const BlockGraph& bg);

ExitCandidate build_exit_branch(const Blueprint& bp, const Shape& ifm_shape,
                                const std::string& location_block_id,
                                std::int64_t cum_backbone_macs);

/// True iff the added branches stay strictly below max_fraction of the
/// backbone's MAC operations.
bool check_budget(const std::vector<ExitCandidate>& exits, std::int64_t backbone_macs,
                  double max_fraction = 0.005);

}  // namespace eeplan
