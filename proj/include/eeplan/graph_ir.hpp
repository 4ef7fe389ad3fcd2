#pragma once

#include <array>
#include <cstdint>
#include <optional>
#include <stdexcept>
#include <string>
#include <unordered_map>
#include <vector>

#include "json.hpp"

namespace eeplan {

/// Raised for any malformed or contract-violating input document.
class ValidationError : public std::runtime_error {
public:
    using std::runtime_error::runtime_error;
};

enum class LayerKind {
    Input,
    Output,
    Conv,
    DepthwiseConv,
    Dense,
    Pool,
    Add,
    Activation,
    Batchnorm,
    Reshape,
    Softmax,
};

bool is_compute_kind(LayerKind k);
bool is_fusable_postprocessing(LayerKind k);
const char* to_string(LayerKind k);
LayerKind layer_kind_from_string(const std::string& s);

/// Tensor shape, spatial dims first, channels last. A 1-D shape is a
/// feature vector (spatial area 1).
struct Shape {
    std::vector<std::int64_t> dims;

    std::int64_t elements() const;
    std::int64_t spatial_area() const;
    std::int64_t channels() const;
    bool operator==(const Shape&) const = default;
    std::string str() const;
};

struct LayerNode {
    std::string id;
    LayerKind kind = LayerKind::Activation;
    Shape output_shape;
    std::int64_t macs = 0;
    std::int64_t params_bytes = 0;
    std::int64_t activation_bytes = 0;
    std::vector<std::string> predecessors;
    std::optional<std::array<int, 2>> kernel;  // conv/depthwise only
};

class LayerGraph {
public:
    LayerGraph() = default;
    explicit LayerGraph(std::vector<LayerNode> nodes, std::string name = "");

    const std::string& name() const { return name_; }
    const std::vector<LayerNode>& nodes() const { return nodes_; }  // topological order
    const LayerNode& node(const std::string& id) const;
    std::size_t index_of(const std::string& id) const;
    const std::vector<std::size_t>& successors(std::size_t idx) const { return successors_[idx]; }
    std::size_t input_index() const { return input_idx_; }
    std::size_t output_index() const { return output_idx_; }
    std::int64_t total_macs() const;

private:
    void validate_and_sort();

    std::string name_;
    std::vector<LayerNode> nodes_;
    std::unordered_map<std::string, std::size_t> index_;
    std::vector<std::vector<std::size_t>> successors_;
    std::size_t input_idx_ = 0;
    std::size_t output_idx_ = 0;
};

/// Parses and validates a model-graph document. Recomputes MAC counts for
/// conv/dense nodes when the document omits them; rejects unknown fields,
/// cycles, dangling predecessors and non fork-join branching.
LayerGraph parse_model_graph(const nlohmann::json& doc);

enum class BlockKind { Plain, Residual, FusedCompute };

const char* to_string(BlockKind k);

struct Block {
    std::string id;
    std::vector<std::string> member_layers;  // layer-graph topological order
    BlockKind kind = BlockKind::Plain;
    std::int64_t macs = 0;
    Shape ofm_shape;
    std::int64_t params_bytes = 0;      // sum over members
    std::int64_t activation_bytes = 0;  // max over members (peak)
    std::int64_t ofm_bytes = 0;         // output tensor of the block's tail layer
};

/// Coarse-grained chain of fused blocks; boundaries between consecutive
/// blocks are the candidate exit locations.
class BlockGraph {
public:
    BlockGraph() = default;
    explicit BlockGraph(std::vector<Block> blocks) : blocks_(std::move(blocks)) {}

    const std::vector<Block>& blocks() const { return blocks_; }
    std::size_t size() const { return blocks_.size(); }
    const Block& operator[](std::size_t i) const { return blocks_[i]; }
    std::size_t interior_boundaries() const { return blocks_.empty() ? 0 : blocks_.size() - 1; }
    std::int64_t total_macs() const;

private:
    std::vector<Block> blocks_;
};

BlockGraph fuse_blocks(const LayerGraph& g);

enum class BlueprintOpKind { GlobalPool, Reshape, Dense, Activation, Softmax };

struct BlueprintOp {
    BlueprintOpKind kind;
};

/// The backbone classifier head pattern, reused to synthesize exit branches.
struct Blueprint {
    std::vector<BlueprintOp> ops;
    int num_classes = 0;
    std::int64_t native_input_area = 1;  // spatial area feeding the head in the backbone
};

Blueprint extract_classifier_blueprint(const LayerGraph& g);

}  // namespace eeplan
