#pragma once

#include "attx/gradcheck.hpp"
#include "attx/rng.hpp"
#include "attx/tensor.hpp"

#include <functional>
#include <vector>

namespace testutil {

inline attx::Tensor rand_tensor(std::vector<std::size_t> shape, attx::Rng& rng,
                                double lo = -1.0, double hi = 1.0, bool requires_grad = false) {
    attx::Tensor t = attx::Tensor::zeros(std::move(shape), requires_grad);
    for (double& v : t.vec()) v = rng.uniform(lo, hi);
    return t;
}

// Keeps values away from the relu kink at 0 so finite differences stay valid.
inline attx::Tensor rand_tensor_off_kink(std::vector<std::size_t> shape, attx::Rng& rng,
                                         bool requires_grad = false, double margin = 5e-3) {
    attx::Tensor t = rand_tensor(std::move(shape), rng, -1.0, 1.0, requires_grad);
    for (double& v : t.vec())
        if (v > -margin && v < margin) v = v < 0 ? v - margin : v + margin;
    return t;
}

// Compares reverse-mode gradients of `forward` (which must rebuild the whole
// graph each call and return the scalar loss) against central differences for
// every element of `wrt`. Returns the max relative error.
inline double check_grads(const std::function<double()>& forward, attx::Tensor wrt,
                          const std::vector<double>& analytic, double step = 1e-5) {
    double worst = 0.0;
    for (std::size_t i = 0; i < wrt.numel(); ++i) {
        const double num = attx::numeric_gradient(forward, wrt.data() + i, step);
        worst = std::max(worst, attx::grad_rel_err(analytic[i], num));
    }
    return worst;
}

}  // namespace testutil
