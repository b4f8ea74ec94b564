#pragma once

#include "attx/tensor.hpp"

#include <cstdint>
#include <string>
#include <vector>

namespace attx {

// eye_plus_uniform (square matrices): identity plus U(-0.5, 0.5) noise. Used
// for the attention mixing matrix, whose inputs are post-relu and therefore
// non-negative; a column with no positive entry would leave its relu dead and
// the parameters without gradient.
enum class InitKind { he_uniform, zeros, ones, eye_plus_uniform };

// A trainable tensor with its stable name. The init draw is seeded from
// (seed, name), so the set of parameters present never influences the values
// any one of them receives.
struct NamedParam {
    std::string name;
    Tensor tensor;
    InitKind init = InitKind::he_uniform;
    std::size_t fan_in = 1;
};

// Non-trainable per-layer state (batchnorm running statistics).
struct NamedState {
    std::string name;
    std::vector<double>* values = nullptr;
};

void init_params(std::vector<NamedParam>& params, std::uint64_t seed);

}  // namespace attx
