#include "eeplan/graph_ir.hpp"

#include <algorithm>
#include <deque>
#include <numeric>
#include <sstream>

namespace eeplan {

bool is_compute_kind(LayerKind k) {
    return k == LayerKind::Conv || k == LayerKind::DepthwiseConv || k == LayerKind::Dense;
}

bool is_fusable_postprocessing(LayerKind k) {
    switch (k) {
        case LayerKind::Activation:
        case LayerKind::Batchnorm:
        case LayerKind::Pool:
        case LayerKind::Reshape:
        case LayerKind::Softmax:
            return true;
        default:
            return false;
    }
}

const char* to_string(LayerKind k) {
    switch (k) {
        case LayerKind::Input: return "input";
        case LayerKind::Output: return "output";
        case LayerKind::Conv: return "conv";
        case LayerKind::DepthwiseConv: return "depthwise-conv";
        case LayerKind::Dense: return "dense";
        case LayerKind::Pool: return "pool";
        case LayerKind::Add: return "add";
        case LayerKind::Activation: return "activation";
        case LayerKind::Batchnorm: return "batchnorm";
        case LayerKind::Reshape: return "reshape";
        case LayerKind::Softmax: return "softmax";
    }
    return "?";
}

LayerKind layer_kind_from_string(const std::string& s) {
    static const std::unordered_map<std::string, LayerKind> table = {
        {"input", LayerKind::Input},
        {"output", LayerKind::Output},
        {"conv", LayerKind::Conv},
        {"depthwise-conv", LayerKind::DepthwiseConv},
        {"dense", LayerKind::Dense},
        {"pool", LayerKind::Pool},
        {"add", LayerKind::Add},
        {"activation", LayerKind::Activation},
        {"batchnorm", LayerKind::Batchnorm},
        {"reshape", LayerKind::Reshape},
        {"softmax", LayerKind::Softmax},
    };
    auto it = table.find(s);
    if (it == table.end()) throw ValidationError("unknown layer kind '" + s + "'");
    return it->second;
}

std::int64_t Shape::elements() const {
    return std::accumulate(dims.begin(), dims.end(), std::int64_t{1}, std::multiplies<>());
}

std::int64_t Shape::spatial_area() const {
    if (dims.size() <= 1) return 1;
    std::int64_t a = 1;
    for (std::size_t i = 0; i + 1 < dims.size(); ++i) a *= dims[i];
    return a;
}

std::int64_t Shape::channels() const {
    return dims.empty() ? 0 : dims.back();
}

std::string Shape::str() const {
    std::ostringstream os;
    for (std::size_t i = 0; i < dims.size(); ++i) {
        if (i) os << 'x';
        os << dims[i];
    }
    return os.str();
}

LayerGraph::LayerGraph(std::vector<LayerNode> nodes, std::string name)
    : name_(std::move(name)), nodes_(std::move(nodes)) {
    validate_and_sort();
}

const LayerNode& LayerGraph::node(const std::string& id) const {
    return nodes_[index_of(id)];
}

std::size_t LayerGraph::index_of(const std::string& id) const {
    auto it = index_.find(id);
    if (it == index_.end()) throw ValidationError("unknown layer id '" + id + "'");
    return it->second;
}

std::int64_t LayerGraph::total_macs() const {
    std::int64_t s = 0;
    for (const auto& n : nodes_) s += n.macs;
    return s;
}

void LayerGraph::validate_and_sort() {
    if (nodes_.empty()) throw ValidationError("model has no layers");

    std::unordered_map<std::string, std::size_t> idx;
    for (std::size_t i = 0; i < nodes_.size(); ++i) {
        if (!idx.emplace(nodes_[i].id, i).second)
            throw ValidationError("duplicate layer id '" + nodes_[i].id + "'");
    }

    // Exactly one source and one sink. An explicit input/output kind node is
    // optional; when present it must be that source/sink.
    std::size_t n_in = 0, n_out = 0, n_sources = 0;
    for (const auto& n : nodes_) {
        if (n.kind == LayerKind::Input) ++n_in;
        if (n.kind == LayerKind::Output) ++n_out;
        if (n.predecessors.empty()) ++n_sources;
        if (n.macs < 0 || n.params_bytes < 0 || n.activation_bytes < 0)
            throw ValidationError("negative cost field on layer '" + n.id + "'");
        if (!is_compute_kind(n.kind) && n.macs != 0)
            throw ValidationError("non-compute layer '" + n.id + "' with nonzero macs");
        if (n.kind == LayerKind::Input && !n.predecessors.empty())
            throw ValidationError("input node '" + n.id + "' must not have predecessors");
        for (const auto& p : n.predecessors)
            if (!idx.count(p))
                throw ValidationError("dangling predecessor '" + p + "' on layer '" + n.id + "'");
        if (n.output_shape.dims.empty())
            throw ValidationError("layer '" + n.id + "' has empty shape");
        for (auto d : n.output_shape.dims)
            if (d <= 0) throw ValidationError("non-positive shape dim on layer '" + n.id + "'");
    }
    if (n_in > 1 || n_out > 1 || n_sources != 1)
        throw ValidationError("model must have exactly one input and one output node");

    // Kahn topological sort; detects cycles.
    std::vector<std::size_t> indeg(nodes_.size(), 0);
    std::vector<std::vector<std::size_t>> succ(nodes_.size());
    for (std::size_t i = 0; i < nodes_.size(); ++i) {
        indeg[i] = nodes_[i].predecessors.size();
        for (const auto& p : nodes_[i].predecessors) succ[idx.at(p)].push_back(i);
    }
    std::deque<std::size_t> ready;
    for (std::size_t i = 0; i < nodes_.size(); ++i)
        if (indeg[i] == 0) ready.push_back(i);
    std::vector<std::size_t> order;
    order.reserve(nodes_.size());
    auto work = indeg;
    while (!ready.empty()) {
        // Deterministic order: lowest original index first.
        std::sort(ready.begin(), ready.end());
        std::size_t cur = ready.front();
        ready.pop_front();
        order.push_back(cur);
        for (auto s : succ[cur])
            if (--work[s] == 0) ready.push_back(s);
    }
    if (order.size() != nodes_.size()) throw ValidationError("cycle detected in model graph");

    std::vector<LayerNode> sorted;
    sorted.reserve(nodes_.size());
    for (auto i : order) sorted.push_back(std::move(nodes_[i]));
    nodes_ = std::move(sorted);

    index_.clear();
    for (std::size_t i = 0; i < nodes_.size(); ++i) index_[nodes_[i].id] = i;
    successors_.assign(nodes_.size(), {});
    for (std::size_t i = 0; i < nodes_.size(); ++i)
        for (const auto& p : nodes_[i].predecessors) successors_[index_[p]].push_back(i);
    for (auto& s : successors_) std::sort(s.begin(), s.end());

    std::size_t n_sinks = 0;
    for (std::size_t i = 0; i < nodes_.size(); ++i) {
        if (nodes_[i].predecessors.empty()) input_idx_ = i;
        if (successors_[i].empty()) {
            ++n_sinks;
            output_idx_ = i;
        }
    }
    if (n_sinks != 1)
        throw ValidationError("model must have exactly one input and one output node");
    for (std::size_t i = 0; i < nodes_.size(); ++i) {
        if (nodes_[i].kind == LayerKind::Input && i != input_idx_)
            throw ValidationError("explicit input node '" + nodes_[i].id + "' is not the graph source");
        if (nodes_[i].kind == LayerKind::Output && i != output_idx_)
            throw ValidationError("explicit output node '" + nodes_[i].id + "' is not the graph sink");
    }

    // Connectivity: every node reachable from the input and reaching the output.
    std::vector<bool> fwd(nodes_.size(), false);
    std::deque<std::size_t> q{input_idx_};
    fwd[input_idx_] = true;
    while (!q.empty()) {
        auto cur = q.front();
        q.pop_front();
        for (auto s : successors_[cur])
            if (!fwd[s]) { fwd[s] = true; q.push_back(s); }
    }
    std::vector<bool> bwd(nodes_.size(), false);
    q = {output_idx_};
    bwd[output_idx_] = true;
    while (!q.empty()) {
        auto cur = q.front();
        q.pop_front();
        for (const auto& p : nodes_[cur].predecessors) {
            auto pi = index_[p];
            if (!bwd[pi]) { bwd[pi] = true; q.push_back(pi); }
        }
    }
    for (std::size_t i = 0; i < nodes_.size(); ++i)
        if (!fwd[i] || !bwd[i])
            throw ValidationError("layer '" + nodes_[i].id + "' is disconnected from the input/output path");

    // Branch structure: only residual fork-joins are supported. Every fork
    // (out-degree 2) must reconverge at a single add node; adds take exactly
    // two predecessors; anything wider is rejected.
    for (std::size_t i = 0; i < nodes_.size(); ++i) {
        const auto& n = nodes_[i];
        if (n.kind == LayerKind::Add) {
            if (n.predecessors.size() != 2)
                throw ValidationError("add node '" + n.id + "' must have exactly two predecessors");
        } else if (n.predecessors.size() > 1) {
            throw ValidationError("layer '" + n.id + "' has multiple predecessors but is not an add node");
        }
        if (successors_[i].size() > 2)
            throw ValidationError("layer '" + n.id + "' forks into more than two branches");
        if (successors_[i].size() == 2) {
            // Walk both arms forward along single-successor chains to an add.
            std::size_t joins[2];
            for (int a = 0; a < 2; ++a) {
                std::size_t cur = successors_[i][a];
                std::size_t steps = 0;
                while (nodes_[cur].kind != LayerKind::Add) {
                    if (successors_[cur].size() != 1 || ++steps > nodes_.size())
                        throw ValidationError("fork at '" + n.id + "' does not reconverge at an add node");
                    cur = successors_[cur][0];
                }
                joins[a] = cur;
            }
            if (joins[0] != joins[1])
                throw ValidationError("fork at '" + n.id + "' joins at two different add nodes");
        }
    }
}

namespace {

std::int64_t require_nonneg_int(const nlohmann::json& v, const std::string& field,
                                const std::string& layer) {
    if (!v.is_number_integer() || v.get<std::int64_t>() < 0) {
        if (v.is_number() && v.get<double>() < 0)
            throw ValidationError("negative cost field '" + field + "' on layer '" + layer + "'");
        throw ValidationError("field '" + field + "' on layer '" + layer + "' must be a non-negative integer");
    }
    return v.get<std::int64_t>();
}

}  // namespace

LayerGraph parse_model_graph(const nlohmann::json& doc) {
    if (!doc.is_object()) throw ValidationError("model document must be a JSON object");
    for (auto it = doc.begin(); it != doc.end(); ++it)
        if (it.key() != "name" && it.key() != "layers")
            throw ValidationError("unknown model field '" + it.key() + "'");
    if (!doc.contains("layers") || !doc["layers"].is_array())
        throw ValidationError("model document needs a 'layers' array");
    std::string name = doc.value("name", "");

    static const std::vector<std::string> allowed = {
        "id", "kind", "shape", "macs", "params_bytes", "activation_bytes", "inputs", "kernel"};

    std::vector<LayerNode> nodes;
    nodes.reserve(doc["layers"].size());
    for (const auto& jl : doc["layers"]) {
        if (!jl.is_object()) throw ValidationError("layer entries must be objects");
        for (auto it = jl.begin(); it != jl.end(); ++it)
            if (std::find(allowed.begin(), allowed.end(), it.key()) == allowed.end())
                throw ValidationError("unknown layer field '" + it.key() + "'");
        LayerNode n;
        if (!jl.contains("id") || !jl["id"].is_string())
            throw ValidationError("layer without a string 'id'");
        n.id = jl["id"].get<std::string>();
        if (!jl.contains("kind") || !jl["kind"].is_string())
            throw ValidationError("layer '" + n.id + "' without a 'kind'");
        n.kind = layer_kind_from_string(jl["kind"].get<std::string>());
        if (!jl.contains("shape") || !jl["shape"].is_array())
            throw ValidationError("layer '" + n.id + "' without a 'shape' array");
        for (const auto& d : jl["shape"]) {
            if (!d.is_number_integer())
                throw ValidationError("non-integer shape dim on layer '" + n.id + "'");
            n.output_shape.dims.push_back(d.get<std::int64_t>());
        }
        if (jl.contains("inputs")) {
            if (!jl["inputs"].is_array())
                throw ValidationError("'inputs' on layer '" + n.id + "' must be an array");
            for (const auto& p : jl["inputs"]) n.predecessors.push_back(p.get<std::string>());
        }
        if (jl.contains("kernel")) {
            if (n.kind != LayerKind::Conv && n.kind != LayerKind::DepthwiseConv)
                throw ValidationError("'kernel' only valid on conv layers ('" + n.id + "')");
            if (!jl["kernel"].is_array() || jl["kernel"].size() != 2)
                throw ValidationError("'kernel' on layer '" + n.id + "' must be [kh, kw]");
            n.kernel = {jl["kernel"][0].get<int>(), jl["kernel"][1].get<int>()};
        }
        if (jl.contains("params_bytes"))
            n.params_bytes = require_nonneg_int(jl["params_bytes"], "params_bytes", n.id);
        if (jl.contains("activation_bytes"))
            n.activation_bytes = require_nonneg_int(jl["activation_bytes"], "activation_bytes", n.id);
        else
            n.activation_bytes = n.output_shape.elements() * 4;
        if (jl.contains("macs")) {
            n.macs = require_nonneg_int(jl["macs"], "macs", n.id);
        } else {
            n.macs = -1;  // recompute below, once predecessor shapes are known
        }
        nodes.push_back(std::move(n));
    }

    // MAC / params recomputation needs predecessor shapes.
    std::unordered_map<std::string, const LayerNode*> by_id;
    for (const auto& n : nodes) by_id[n.id] = &n;
    for (auto& n : nodes) {
        const Shape* in_shape = nullptr;
        if (!n.predecessors.empty()) {
            auto it = by_id.find(n.predecessors.front());
            if (it != by_id.end()) in_shape = &it->second->output_shape;
        }
        if (n.macs < 0) {
            switch (n.kind) {
                case LayerKind::Conv: {
                    if (!n.kernel || !in_shape)
                        throw ValidationError("cannot recompute macs for conv '" + n.id +
                                              "' without 'kernel' and input shape");
                    n.macs = n.output_shape.spatial_area() * n.output_shape.channels() *
                             (*n.kernel)[0] * (*n.kernel)[1] * in_shape->channels();
                    break;
                }
                case LayerKind::DepthwiseConv: {
                    if (!n.kernel)
                        throw ValidationError("cannot recompute macs for depthwise-conv '" + n.id +
                                              "' without 'kernel'");
                    n.macs = n.output_shape.spatial_area() * n.output_shape.channels() *
                             (*n.kernel)[0] * (*n.kernel)[1];
                    break;
                }
                case LayerKind::Dense: {
                    if (!in_shape)
                        throw ValidationError("dense layer '" + n.id + "' without input shape");
                    n.macs = in_shape->elements() * n.output_shape.elements();
                    break;
                }
                default:
                    n.macs = 0;
            }
        }
        if (n.params_bytes == 0) {
            if (n.kind == LayerKind::Conv && n.kernel && in_shape)
                n.params_bytes = std::int64_t{4} * (*n.kernel)[0] * (*n.kernel)[1] *
                                 in_shape->channels() * n.output_shape.channels();
            else if (n.kind == LayerKind::DepthwiseConv && n.kernel)
                n.params_bytes = std::int64_t{4} * (*n.kernel)[0] * (*n.kernel)[1] *
                                 n.output_shape.channels();
            else if (n.kind == LayerKind::Dense && in_shape)
                n.params_bytes = std::int64_t{4} * in_shape->elements() * n.output_shape.elements();
        }
    }

    return LayerGraph(std::move(nodes), std::move(name));
}

const char* to_string(BlockKind k) {
    switch (k) {
        case BlockKind::Plain: return "plain";
        case BlockKind::Residual: return "residual";
        case BlockKind::FusedCompute: return "fused-compute";
    }
    return "?";
}

std::int64_t BlockGraph::total_macs() const {
    std::int64_t s = 0;
    for (const auto& b : blocks_) s += b.macs;
    return s;
}

BlockGraph fuse_blocks(const LayerGraph& g) {
    const auto& nodes = g.nodes();
    const std::size_t n = nodes.size();

    // Residual grouping: for each add node, everything strictly between the
    // fork and the add (both arms) plus the add itself forms one group. The
    // fork source stays outside so its output remains a valid cut.
    std::vector<int> group(n, -1);
    int n_groups = 0;
    for (std::size_t i = 0; i < n; ++i) {
        if (nodes[i].kind != LayerKind::Add) continue;
        int gid = n_groups++;
        group[i] = gid;
        for (const auto& pid : nodes[i].predecessors) {
            std::size_t cur = g.index_of(pid);
            // Walk each arm backwards until the fork source (out-degree 2).
            while (g.successors(cur).size() == 1) {
                group[cur] = gid;
                cur = g.index_of(nodes[cur].predecessors.front());
            }
        }
    }

    std::vector<Block> blocks;
    std::vector<std::size_t> pending;  // leading input / pre-compute layers awaiting a block
    int open_group = -1;

    auto open_block = [&](BlockKind kind) -> Block& {
        Block b;
        b.kind = kind;
        blocks.push_back(std::move(b));
        return blocks.back();
    };
    auto absorb = [&](Block& b, std::size_t idx) {
        const auto& ln = nodes[idx];
        b.member_layers.push_back(ln.id);
        b.macs += ln.macs;
        b.params_bytes += ln.params_bytes;
        b.activation_bytes = std::max(b.activation_bytes, ln.activation_bytes);
        b.ofm_shape = ln.output_shape;
        b.ofm_bytes = ln.activation_bytes;
    };

    for (std::size_t i = 0; i < n; ++i) {
        const auto& ln = nodes[i];
        if (group[i] >= 0) {
            if (group[i] != open_group) {
                auto& b = open_block(BlockKind::Residual);
                for (auto p : pending) absorb(b, p);
                pending.clear();
                open_group = group[i];
            }
            absorb(blocks.back(), i);
            continue;
        }
        if (is_compute_kind(ln.kind)) {
            auto& b = open_block(BlockKind::Plain);
            for (auto p : pending) absorb(b, p);
            pending.clear();
            absorb(b, i);
            open_group = -1;
            continue;
        }
        if (ln.kind == LayerKind::Output) {
            if (blocks.empty()) {
                auto& b = open_block(BlockKind::Plain);
                for (auto p : pending) absorb(b, p);
                pending.clear();
            }
            absorb(blocks.back(), i);
            continue;
        }
        // Post-processing fuses into the open block when it directly follows
        // it; otherwise (leading input / pre-compute chain) it waits for the
        // next block.
        if (!blocks.empty() && is_fusable_postprocessing(ln.kind) &&
            blocks.back().member_layers.size() > 0 &&
            std::find(blocks.back().member_layers.begin(), blocks.back().member_layers.end(),
                      ln.predecessors.front()) != blocks.back().member_layers.end()) {
            absorb(blocks.back(), i);
        } else {
            pending.push_back(i);
        }
    }
    if (!pending.empty()) {
        // Graph with no compute layer at all; collapse the leftovers.
        auto& b = blocks.empty() ? open_block(BlockKind::Plain) : blocks.back();
        for (auto p : pending) absorb(b, p);
    }

    for (std::size_t i = 0; i < blocks.size(); ++i) {
        blocks[i].id = "b" + std::to_string(i);
        if (blocks[i].kind == BlockKind::Plain && blocks[i].member_layers.size() > 1)
            blocks[i].kind = BlockKind::FusedCompute;
    }
    return BlockGraph(std::move(blocks));
}

Blueprint extract_classifier_blueprint(const LayerGraph& g) {
    // Walk back from the output through the classifier head.
    Blueprint bp;
    std::vector<BlueprintOp> rev;
    std::size_t cur = g.output_index();
    if (g.nodes()[cur].kind == LayerKind::Output)
        cur = g.index_of(g.nodes()[cur].predecessors.front());

    while (true) {
        LayerKind k = g.nodes()[cur].kind;
        if (k == LayerKind::Softmax) rev.push_back({BlueprintOpKind::Softmax});
        else if (k == LayerKind::Activation) rev.push_back({BlueprintOpKind::Activation});
        else if (k == LayerKind::Reshape) rev.push_back({BlueprintOpKind::Reshape});
        else break;
        cur = g.index_of(g.nodes()[cur].predecessors.front());
    }

    const auto& head = g.nodes()[cur];
    bool dense_like = head.kind == LayerKind::Dense ||
                      (head.kind == LayerKind::Conv && head.kernel &&
                       (*head.kernel)[0] == 1 && (*head.kernel)[1] == 1);
    if (!dense_like)
        throw ValidationError("no recognizable classifier head (no dense/conv-1x1 before output)");
    rev.push_back({BlueprintOpKind::Dense});
    bp.num_classes = static_cast<int>(head.output_shape.elements());
    cur = g.index_of(head.predecessors.front());

    // Optional flatten and global pool feeding the classifier.
    while (g.nodes()[cur].kind == LayerKind::Reshape) {
        rev.push_back({BlueprintOpKind::Reshape});
        cur = g.index_of(g.nodes()[cur].predecessors.front());
    }
    if (g.nodes()[cur].kind == LayerKind::Pool && g.nodes()[cur].output_shape.spatial_area() == 1) {
        rev.push_back({BlueprintOpKind::GlobalPool});
        cur = g.index_of(g.nodes()[cur].predecessors.front());
    }

    bp.native_input_area = g.nodes()[cur].output_shape.spatial_area();
    bp.ops.assign(rev.rbegin(), rev.rend());
    return bp;
}

}  // namespace eeplan
