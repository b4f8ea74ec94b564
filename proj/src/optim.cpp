#include "attx/optim.hpp"

#include "attx/kernels.hpp"

#include <cmath>
#include <stdexcept>

namespace attx {

Adam::Adam(std::vector<Tensor> params, AdamConfig cfg)
    : params_(std::move(params)), cfg_(cfg) {
    m_.reserve(params_.size());
    v_.reserve(params_.size());
    for (const Tensor& p : params_) {
        m_.emplace_back(p.numel(), 0.0);
        v_.emplace_back(p.numel(), 0.0);
    }
}

void Adam::step() {
    for (Tensor& p : params_) {
        if (!p.has_grad()) continue;
        for (double g : p.grad_vec())
            if (std::isnan(g)) throw std::runtime_error("adam: NaN gradient, step rejected");
    }
    ++t_;
    const double bc1 = 1.0 / (1.0 - std::pow(cfg_.beta1, static_cast<double>(t_)));
    const double bc2 = 1.0 / (1.0 - std::pow(cfg_.beta2, static_cast<double>(t_)));
    const auto& K = kernels::active();
    for (std::size_t i = 0; i < params_.size(); ++i) {
        Tensor& p = params_[i];
        // untouched gradient buffer means grad = 0; moments still decay
        K.adam_update(p.data(), p.grad(), m_[i].data(), v_[i].data(), p.numel(),
                      cfg_.lr, cfg_.beta1, cfg_.beta2, cfg_.eps, bc1, bc2);
    }
}

void Adam::zero_grad() {
    for (Tensor& p : params_) p.zero_grad();
}

}  // namespace attx
