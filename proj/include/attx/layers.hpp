#pragma once

#include "attx/ops.hpp"
#include "attx/params.hpp"

#include <optional>
#include <string>
#include <vector>

namespace attx {

class Conv1dLayer {
public:
    Conv1dLayer(std::size_t k, std::size_t ch_in, std::size_t ch_out, int stride,
                ops::Padding padding = ops::Padding::same);
    Tensor forward(Tape& tape, const Tensor& x) const;
    void collect(const std::string& prefix, std::vector<NamedParam>& out);
    std::size_t out_channels() const { return kernel.extent(2); }

    Tensor kernel, bias;
    int stride;
    ops::Padding padding;
};

class BatchNorm1dLayer {
public:
    explicit BatchNorm1dLayer(std::size_t ch, double momentum = 0.1, double eps = 1e-5);
    Tensor forward(Tape& tape, const Tensor& x, bool training);
    void collect(const std::string& prefix, std::vector<NamedParam>& out);
    void collect_state(const std::string& prefix, std::vector<NamedState>& out);

    Tensor gamma, beta;
    ops::BatchNormState running;
    double momentum, eps;
};

class DenseLayer {
public:
    DenseLayer(std::size_t n_in, std::size_t n_out);
    Tensor forward(Tape& tape, const Tensor& x) const;
    void collect(const std::string& prefix, std::vector<NamedParam>& out);

    Tensor w, b;
};

// Conv-BatchNorm-ReLU
class ConvBlock {
public:
    ConvBlock(std::size_t k, std::size_t ch_in, std::size_t ch_out, int stride);
    Tensor forward(Tape& tape, const Tensor& x, bool training);
    void collect(const std::string& prefix, std::vector<NamedParam>& out);
    void collect_state(const std::string& prefix, std::vector<NamedState>& out);

    Conv1dLayer conv;
    BatchNorm1dLayer bn;
};

// Channel gate: global average pool -> bottleneck MLP -> sigmoid -> rescale.
class SEBlock {
public:
    SEBlock(std::size_t ch, std::size_t reduction);
    Tensor forward(Tape& tape, const Tensor& x) const;
    void collect(const std::string& prefix, std::vector<NamedParam>& out);

    DenseLayer fc1, fc2;
};

// Residual block with SE gating on the branch. The projection variant puts a
// strided 1x1 Conv-BN on the shortcut; the identity variant requires matching
// channels and stride 1.
class SEResBlock {
public:
    SEResBlock(std::size_t k, std::size_t ch_in, std::size_t ch_out, int stride,
               std::size_t reduction, bool with_projection);
    Tensor forward(Tape& tape, const Tensor& x, bool training);
    void collect(const std::string& prefix, std::vector<NamedParam>& out);
    void collect_state(const std::string& prefix, std::vector<NamedState>& out);

    Conv1dLayer conv1;
    BatchNorm1dLayer bn1;
    Conv1dLayer conv2;
    BatchNorm1dLayer bn2;
    SEBlock se;
    std::optional<Conv1dLayer> proj;
    std::optional<BatchNorm1dLayer> proj_bn;
};

}  // namespace attx
