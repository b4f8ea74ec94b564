#include "attx/layers.hpp"

#include <stdexcept>

namespace attx {

using namespace ops;

Conv1dLayer::Conv1dLayer(std::size_t k, std::size_t ch_in, std::size_t ch_out, int stride,
                         ops::Padding padding)
    : kernel(Tensor::zeros({k, ch_in, ch_out}, true)),
      bias(Tensor::zeros({ch_out}, true)),
      stride(stride),
      padding(padding) {}

Tensor Conv1dLayer::forward(Tape& tape, const Tensor& x) const {
    return conv1d(tape, x, kernel, bias, stride, padding);
}

void Conv1dLayer::collect(const std::string& prefix, std::vector<NamedParam>& out) {
    out.push_back({prefix + ".kernel", kernel, InitKind::he_uniform,
                   kernel.extent(0) * kernel.extent(1)});
    out.push_back({prefix + ".bias", bias, InitKind::zeros, 1});
}

BatchNorm1dLayer::BatchNorm1dLayer(std::size_t ch, double momentum, double eps)
    : gamma(Tensor::zeros({ch}, true)),
      beta(Tensor::zeros({ch}, true)),
      momentum(momentum),
      eps(eps) {
    running.mean.assign(ch, 0.0);
    running.var.assign(ch, 1.0);
}

Tensor BatchNorm1dLayer::forward(Tape& tape, const Tensor& x, bool training) {
    return batchnorm1d(tape, x, gamma, beta, running, training, momentum, eps);
}

void BatchNorm1dLayer::collect(const std::string& prefix, std::vector<NamedParam>& out) {
    out.push_back({prefix + ".gamma", gamma, InitKind::ones, 1});
    out.push_back({prefix + ".beta", beta, InitKind::zeros, 1});
}

void BatchNorm1dLayer::collect_state(const std::string& prefix, std::vector<NamedState>& out) {
    out.push_back({prefix + ".running_mean", &running.mean});
    out.push_back({prefix + ".running_var", &running.var});
}

DenseLayer::DenseLayer(std::size_t n_in, std::size_t n_out)
    : w(Tensor::zeros({n_in, n_out}, true)), b(Tensor::zeros({n_out}, true)) {}

Tensor DenseLayer::forward(Tape& tape, const Tensor& x) const { return dense(tape, x, w, b); }

void DenseLayer::collect(const std::string& prefix, std::vector<NamedParam>& out) {
    out.push_back({prefix + ".w", w, InitKind::he_uniform, w.extent(0)});
    out.push_back({prefix + ".b", b, InitKind::zeros, 1});
}

ConvBlock::ConvBlock(std::size_t k, std::size_t ch_in, std::size_t ch_out, int stride)
    : conv(k, ch_in, ch_out, stride), bn(ch_out) {}

Tensor ConvBlock::forward(Tape& tape, const Tensor& x, bool training) {
    return relu(tape, bn.forward(tape, conv.forward(tape, x), training));
}

void ConvBlock::collect(const std::string& prefix, std::vector<NamedParam>& out) {
    conv.collect(prefix + ".conv", out);
    bn.collect(prefix + ".bn", out);
}

void ConvBlock::collect_state(const std::string& prefix, std::vector<NamedState>& out) {
    bn.collect_state(prefix + ".bn", out);
}

namespace {
std::size_t bottleneck(std::size_t ch, std::size_t reduction) {
    return ch < reduction ? 1 : ch / reduction;
}
}  // namespace

SEBlock::SEBlock(std::size_t ch, std::size_t reduction)
    : fc1(ch, bottleneck(ch, reduction)), fc2(bottleneck(ch, reduction), ch) {}

Tensor SEBlock::forward(Tape& tape, const Tensor& x) const {
    Tensor squeeze = global_avg_pool(tape, x);
    Tensor gate = sigmoid(tape, fc2.forward(tape, relu(tape, fc1.forward(tape, squeeze))));
    return scale_channels(tape, x, gate);
}

void SEBlock::collect(const std::string& prefix, std::vector<NamedParam>& out) {
    fc1.collect(prefix + ".fc1", out);
    fc2.collect(prefix + ".fc2", out);
}

SEResBlock::SEResBlock(std::size_t k, std::size_t ch_in, std::size_t ch_out, int stride,
                       std::size_t reduction, bool with_projection)
    : conv1(k, ch_in, ch_out, stride),
      bn1(ch_out),
      conv2(k, ch_out, ch_out, 1),
      bn2(ch_out),
      se(ch_out, reduction) {
    if (with_projection) {
        proj.emplace(1, ch_in, ch_out, stride);
        proj_bn.emplace(ch_out);
    } else if (ch_in != ch_out || stride != 1) {
        throw std::invalid_argument("SE identity block requires matching channels and stride 1");
    }
}

Tensor SEResBlock::forward(Tape& tape, const Tensor& x, bool training) {
    Tensor branch = relu(tape, bn1.forward(tape, conv1.forward(tape, x), training));
    branch = bn2.forward(tape, conv2.forward(tape, branch), training);
    branch = se.forward(tape, branch);
    Tensor shortcut = proj ? proj_bn->forward(tape, proj->forward(tape, x), training) : x;
    return relu(tape, add(tape, branch, shortcut));
}

void SEResBlock::collect(const std::string& prefix, std::vector<NamedParam>& out) {
    conv1.collect(prefix + ".conv1", out);
    bn1.collect(prefix + ".bn1", out);
    conv2.collect(prefix + ".conv2", out);
    bn2.collect(prefix + ".bn2", out);
    se.collect(prefix + ".se", out);
    if (proj) {
        proj->collect(prefix + ".proj", out);
        proj_bn->collect(prefix + ".proj_bn", out);
    }
}

void SEResBlock::collect_state(const std::string& prefix, std::vector<NamedState>& out) {
    bn1.collect_state(prefix + ".bn1", out);
    bn2.collect_state(prefix + ".bn2", out);
    if (proj_bn) proj_bn->collect_state(prefix + ".proj_bn", out);
}

}  // namespace attx
