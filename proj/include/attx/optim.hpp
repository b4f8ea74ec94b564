#pragma once

#include "attx/tensor.hpp"

#include <cstdint>
#include <vector>

namespace attx {

struct AdamConfig {
    double lr = 1e-3;
    double beta1 = 0.9;
    double beta2 = 0.999;
    double eps = 1e-8;
};

// Adam with bias correction over a fixed parameter list. Moment buffers are
// allocated per parameter on construction; the step counter is shared.
class Adam {
public:
    Adam(std::vector<Tensor> params, AdamConfig cfg = {});

    // One update from the parameters' current gradients. Throws on NaN
    // gradients without touching any state.
    void step();
    void zero_grad();

    std::int64_t steps() const { return t_; }
    const AdamConfig& config() const { return cfg_; }
    const std::vector<double>& first_moment(std::size_t i) const { return m_[i]; }
    const std::vector<double>& second_moment(std::size_t i) const { return v_[i]; }

private:
    std::vector<Tensor> params_;
    std::vector<std::vector<double>> m_, v_;
    AdamConfig cfg_;
    std::int64_t t_ = 0;
};

}  // namespace attx
