#pragma once

#include <array>
#include <vector>

namespace attx {

struct Metrics {
    double accuracy = 0.0;
    double macro_f1 = 0.0;
    double weighted_f1 = 0.0;
    // confusion[true][pred], classes 0 = non-stress, 1 = stress
    std::array<std::array<long, 2>, 2> confusion{{{0, 0}, {0, 0}}};
};

// Binary classification metrics. A class absent from both predictions and
// labels contributes F1 = 0 to the macro average, with a warning.
Metrics compute_metrics(const std::vector<int>& preds, const std::vector<int>& labels);

Metrics metrics_from_confusion(const std::array<std::array<long, 2>, 2>& confusion);

}  // namespace attx
