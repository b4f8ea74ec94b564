#pragma once

#include "attx/tensor.hpp"

#include <utility>
#include <vector>

namespace attx::ops {

enum class Padding { same, valid };

// x: [batch, time, ch_in], kernel: [k, ch_in, ch_out], bias: [ch_out].
// `same` zero-pads so time_out = ceil(time/stride); `valid` requires k <= time.
Tensor conv1d(Tape& tape, const Tensor& x, const Tensor& kernel, const Tensor& bias,
              int stride, Padding padding);

struct BatchNormState {
    std::vector<double> mean;
    std::vector<double> var;
};

// x: [batch, time, ch]. Training mode normalizes over (batch, time) per
// channel and updates `running`; eval mode normalizes with `running`.
Tensor batchnorm1d(Tape& tape, const Tensor& x, const Tensor& gamma, const Tensor& beta,
                   BatchNormState& running, bool training, double momentum, double eps);

Tensor relu(Tape& tape, const Tensor& x);
Tensor sigmoid(Tape& tape, const Tensor& x);
Tensor softmax(Tape& tape, const Tensor& x, int axis);

// x: [batch, n_in], w: [n_in, n_out], b: [n_out]
Tensor dense(Tape& tape, const Tensor& x, const Tensor& w, const Tensor& b);

// [batch, time, ch] -> [batch, ch], mean over time
Tensor global_avg_pool(Tape& tape, const Tensor& x);

Tensor concat(Tape& tape, const Tensor& a, const Tensor& b, int axis);

// Shapes must be identical, or the smaller operand's shape must equal the
// trailing extents of the larger (broadcast over the leading axes).
Tensor add(Tape& tape, const Tensor& a, const Tensor& b);
Tensor mul(Tape& tape, const Tensor& a, const Tensor& b);

// logits: [batch, n_class]; mean of -log softmax(logits)[label], stabilized.
Tensor cross_entropy(Tape& tape, const Tensor& logits, const std::vector<int>& labels);

Tensor reduce_sum(Tape& tape, const Tensor& x);
Tensor reshape(Tape& tape, const Tensor& x, std::vector<std::size_t> shape);

// a, b: same shape [...]; result [..., 2] with a in slice 0, b in slice 1.
Tensor stack_last(Tape& tape, const Tensor& a, const Tensor& b);
// [..., p, q] -> [..., q, p]
Tensor transpose_last2(Tape& tape, const Tensor& x);
// Remove `axis`, keeping the `index` slice.
Tensor select_axis(Tape& tape, const Tensor& x, int axis, std::size_t index);
// s: [..., f], w: [f, e] -> out[..., e] = sum_f s[..., f] * w[f, e]
Tensor contract_last(Tape& tape, const Tensor& s, const Tensor& w);
// x: [batch, time, ch] scaled per channel by g: [batch, ch]
Tensor scale_channels(Tape& tape, const Tensor& x, const Tensor& g);
// x: [batch, rows, cols] scaled per row by g: [batch, rows]
Tensor scale_rows(Tape& tape, const Tensor& x, const Tensor& g);

}  // namespace attx::ops
