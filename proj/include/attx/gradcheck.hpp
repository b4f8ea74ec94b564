#pragma once

#include "attx/tensor.hpp"

#include <algorithm>
#include <cmath>
#include <functional>
#include <string>
#include <vector>

namespace attx {

// Central finite difference of a forward-only evaluation with respect to one
// storage slot. The callback must rebuild the computation from scratch; it
// never touches the reverse path it is used to check.
inline double numeric_gradient(const std::function<double()>& forward, double* slot,
                               double step) {
    const double saved = *slot;
    *slot = saved + step;
    const double hi = forward();
    *slot = saved - step;
    const double lo = forward();
    *slot = saved;
    return (hi - lo) / (2.0 * step);
}

inline double grad_rel_err(double analytic, double numeric) {
    const double denom = std::max({std::fabs(analytic), std::fabs(numeric), 1e-6});
    return std::fabs(analytic - numeric) / denom;
}

struct GradCheckResult {
    std::string name;
    double max_rel_err = 0.0;
    double threshold = 1e-3;
    bool pass = false;
};

// Per-op reverse-mode checks against central differences on small seeded
// inputs. `only` filters by op name; empty runs everything.
std::vector<GradCheckResult> gradcheck_ops(const std::string& only = "");

// End-to-end: loss of a small full model (attentive cross-modal connections
// enabled) checked per parameter group, sampling elements of each group.
std::vector<GradCheckResult> gradcheck_model();

}  // namespace attx
