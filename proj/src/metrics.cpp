#include "attx/metrics.hpp"

#include "attx/diag.hpp"

#include <stdexcept>

namespace attx {

Metrics metrics_from_confusion(const std::array<std::array<long, 2>, 2>& cm) {
    Metrics m;
    m.confusion = cm;
    const long total = cm[0][0] + cm[0][1] + cm[1][0] + cm[1][1];
    if (total == 0) throw std::invalid_argument("compute_metrics: empty input");
    m.accuracy = static_cast<double>(cm[0][0] + cm[1][1]) / static_cast<double>(total);

    double f1[2];
    double support[2];
    for (int c = 0; c < 2; ++c) {
        const long tp = cm[c][c];
        const long fn = cm[c][1 - c];
        const long fp = cm[1 - c][c];
        support[c] = static_cast<double>(tp + fn);
        if (tp + fn == 0 && fp == 0)
            warn("compute_metrics: class absent from labels and predictions, F1 = 0");
        f1[c] = (2 * tp + fp + fn) > 0
                    ? 2.0 * static_cast<double>(tp) / static_cast<double>(2 * tp + fp + fn)
                    : 0.0;
    }
    m.macro_f1 = 0.5 * (f1[0] + f1[1]);
    m.weighted_f1 = (f1[0] * support[0] + f1[1] * support[1]) / static_cast<double>(total);
    return m;
}

Metrics compute_metrics(const std::vector<int>& preds, const std::vector<int>& labels) {
    if (preds.size() != labels.size())
        throw std::invalid_argument("compute_metrics: length mismatch");
    if (preds.empty()) throw std::invalid_argument("compute_metrics: empty input");
    std::array<std::array<long, 2>, 2> cm{{{0, 0}, {0, 0}}};
    for (std::size_t i = 0; i < preds.size(); ++i) {
        if (preds[i] < 0 || preds[i] > 1 || labels[i] < 0 || labels[i] > 1)
            throw std::invalid_argument("compute_metrics: class index out of range");
        ++cm[static_cast<std::size_t>(labels[i])][static_cast<std::size_t>(preds[i])];
    }
    return metrics_from_confusion(cm);
}

}  // namespace attx
