#pragma once

#include "attx/attx_block.hpp"

#include <array>
#include <map>
#include <memory>
#include <optional>

namespace attx {

struct StreamConfig {
    std::vector<std::size_t> widths{16, 32, 64};  // stage output channels, before any doubling
    std::size_t kernel = 7;
    std::vector<int> strides{2, 2, 2};
    std::size_t se_reduction = 4;
    std::size_t stage1_blocks = 1;  // ECG stream only
    std::size_t stage4_width = 64;  // EDA stream only
};

enum class ModelMode { multimodal, unimodal_ecg, unimodal_eda };
enum class MergeMode { concat, add };

struct ModelSpec {
    StreamConfig ecg, eda;
    std::optional<AttXSpec> attx;  // nullopt = feature-level fusion baseline
    std::size_t embedding_dim = 64;
    std::size_t head_dim = 128;
    std::size_t n_classes = 2;
    ModelMode mode = ModelMode::multimodal;
    MergeMode merge = MergeMode::concat;
};

// Filled during forward() when requested; shapes are post-connection.
struct StageTrace {
    std::array<std::vector<std::size_t>, 3> ecg_stage, eda_stage;
};

// SE-ResNet stream: Conv Block stage, then SE Conv + 2x SE ID, then
// SE Conv + SE ID, then GAP and two 64-wide FC+ReLU projections.
class EcgStream {
public:
    EcgStream(const StreamConfig& cfg, const std::array<std::size_t, 3>& stage_in,
              std::size_t embed_in, std::size_t embedding_dim);
    Tensor run_stage(Tape& tape, int stage, const Tensor& x, bool training);
    Tensor embed(Tape& tape, const Tensor& x, bool training);
    void collect(const std::string& prefix, std::vector<NamedParam>& out);
    void collect_state(const std::string& prefix, std::vector<NamedState>& out);

private:
    std::vector<ConvBlock> stage1_;
    std::vector<SEResBlock> stage2_, stage3_;
    DenseLayer fc1_, fc2_;
};

// Plain CNN stream: one Conv Block, two stages of two Conv Blocks, then a
// fourth stage of two Conv Blocks + SE Block + GAP, then the FC projections.
class EdaStream {
public:
    EdaStream(const StreamConfig& cfg, const std::array<std::size_t, 3>& stage_in,
              std::size_t stage4_in, std::size_t embedding_dim);
    Tensor run_stage(Tape& tape, int stage, const Tensor& x, bool training);
    // stage-4 blocks + SE gate + GAP + FC projections
    Tensor embed(Tape& tape, const Tensor& x, bool training);
    void collect(const std::string& prefix, std::vector<NamedParam>& out);
    void collect_state(const std::string& prefix, std::vector<NamedState>& out);

private:
    std::vector<ConvBlock> stage1_, stage2_, stage3_, stage4_;
    SEBlock se4_;
    DenseLayer fc1_, fc2_;
};

class MultimodalModel {
public:
    explicit MultimodalModel(const ModelSpec& spec);

    void init_params(std::uint64_t seed);

    // ecg, eda: [batch, time, 1]; unimodal modes ignore the unused stream.
    Tensor forward(Tape& tape, const Tensor& ecg, const Tensor& eda, bool training,
                   StageTrace* trace = nullptr);

    std::vector<NamedParam> parameters();
    std::vector<NamedState> state();

    const ModelSpec& spec() const { return spec_; }

private:
    ModelSpec spec_;
    std::optional<EcgStream> ecg_;
    std::optional<EdaStream> eda_;
    std::map<int, std::unique_ptr<AttXConnection>> conns_;
    std::optional<DenseLayer> head1_, head2_, head_out_;
};

}  // namespace attx
