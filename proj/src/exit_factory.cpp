#include "eeplan/exit_factory.hpp"

#include <algorithm>

namespace eeplan {

std::vector<std::string> enumerate_exit_locations(const BlockGraph& bg) {
    std::vector<std::string> out;
    if (bg.size() <= 1) return out;
    out.reserve(bg.size() - 1);
    for (std::size_t i = 0; i + 1 < bg.size(); ++i) out.push_back(bg[i].id);
    return out;
}

ExitCandidate build_exit_branch(const Blueprint& bp, const Shape& ifm_shape,
                                const std::string& location_block_id,
                                std::int64_t cum_backbone_macs) {
    ExitCandidate c;
    c.location_block_id = location_block_id;
    c.ifm_shape = ifm_shape;
    c.cum_backbone_macs = cum_backbone_macs;

    std::string prefix = location_block_id + "_ee_";
    Shape cur = ifm_shape;
    std::string prev_id = location_block_id;  // attachment point
    int pool_idx = 0;

    auto push = [&](LayerNode n) {
        n.predecessors = {prev_id};
        n.activation_bytes = n.output_shape.elements() * 4;
        prev_id = n.id;
        c.branch_macs += n.macs;
        c.branch_params_bytes += n.params_bytes;
        c.branch_activation_bytes = std::max(c.branch_activation_bytes, n.activation_bytes);
        c.branch_layers.push_back(std::move(n));
    };

    // Downsample aggressively: average pool (kernel 2, stride 2) until the
    // feature map is no larger than the blueprint's native input area.
    while (cur.dims.size() > 1 && cur.spatial_area() > bp.native_input_area) {
        Shape next = cur;
        bool shrank = false;
        for (std::size_t i = 0; i + 1 < next.dims.size(); ++i) {
            if (next.dims[i] > 1) {
                next.dims[i] /= 2;
                shrank = true;
            }
        }
        if (!shrank) break;
        LayerNode pool;
        pool.id = prefix + "pool" + std::to_string(pool_idx++);
        pool.kind = LayerKind::Pool;
        pool.output_shape = next;
        push(std::move(pool));
        cur = next;
    }

    for (const auto& op : bp.ops) {
        LayerNode n;
        switch (op.kind) {
            case BlueprintOpKind::GlobalPool: {
                n.id = prefix + "gpool";
                n.kind = LayerKind::Pool;
                n.output_shape = Shape{{cur.channels()}};
                break;
            }
            case BlueprintOpKind::Reshape: {
                n.id = prefix + "reshape" + std::to_string(c.branch_layers.size());
                n.kind = LayerKind::Reshape;
                n.output_shape = Shape{{cur.elements()}};
                break;
            }
            case BlueprintOpKind::Dense: {
                n.id = prefix + "dense";
                n.kind = LayerKind::Dense;
                n.output_shape = Shape{{bp.num_classes}};
                n.macs = cur.elements() * bp.num_classes;
                n.params_bytes = 4 * cur.elements() * bp.num_classes;
                break;
            }
            case BlueprintOpKind::Activation: {
                n.id = prefix + "act" + std::to_string(c.branch_layers.size());
                n.kind = LayerKind::Activation;
                n.output_shape = cur;
                break;
            }
            case BlueprintOpKind::Softmax: {
                n.id = prefix + "softmax";
                n.kind = LayerKind::Softmax;
                n.output_shape = cur;
                break;
            }
        }
        cur = n.output_shape;
        push(std::move(n));
    }
    return c;
}

bool check_budget(const std::vector<ExitCandidate>& exits, std::int64_t backbone_macs,
                  double max_fraction) {
    if (backbone_macs <= 0) throw ValidationError("backbone_macs must be positive");
    std::int64_t total = 0;
    for (const auto& e : exits) total += e.branch_macs;
    return static_cast<double>(total) < max_fraction * static_cast<double>(backbone_macs);
}

}  // namespace eeplan
