#include "attx/train.hpp"

#include "attx/optim.hpp"
#include "attx/rng.hpp"

#include <numeric>
#include <stdexcept>

namespace attx {

std::pair<Tensor, Tensor> batch_tensors(const std::vector<WindowPair>& windows,
                                        const std::vector<std::size_t>& index,
                                        std::size_t begin, std::size_t end) {
    const std::size_t bs = end - begin;
    const std::size_t len = windows[index[begin]].ecg.size();
    Tensor ecg = Tensor::zeros({bs, len, 1});
    Tensor eda = Tensor::zeros({bs, len, 1});
    for (std::size_t b = 0; b < bs; ++b) {
        const WindowPair& w = windows[index[begin + b]];
        if (w.ecg.size() != len || w.eda.size() != len)
            throw std::invalid_argument("train: windows have inconsistent lengths");
        std::copy(w.ecg.begin(), w.ecg.end(), ecg.vec().begin() + static_cast<std::ptrdiff_t>(b * len));
        std::copy(w.eda.begin(), w.eda.end(), eda.vec().begin() + static_cast<std::ptrdiff_t>(b * len));
    }
    return {ecg, eda};
}

TrainResult train(MultimodalModel& model, const std::vector<WindowPair>& windows,
                  const TrainConfig& cfg) {
    if (windows.empty()) throw std::invalid_argument("train: empty training set");
    bool has[2] = {false, false};
    for (const auto& w : windows) has[static_cast<int>(w.label)] = true;
    if (!has[0] || !has[1])
        throw std::invalid_argument("train: training set contains a single class");
    if (cfg.batch_size == 0) throw std::invalid_argument("train: batch size must be positive");

    AdamConfig acfg;
    acfg.lr = cfg.lr;
    Adam opt(
        [&] {
            std::vector<Tensor> ps;
            for (auto& p : model.parameters()) ps.push_back(p.tensor);
            return ps;
        }(),
        acfg);

    Rng shuffle_rng(cfg.seed, "shuffle");
    std::vector<std::size_t> order(windows.size());
    std::iota(order.begin(), order.end(), 0);

    TrainResult result;
    for (std::size_t epoch = 0; epoch < cfg.epochs; ++epoch) {
        if (cfg.shuffle) shuffle_rng.shuffle(order);
        double loss_sum = 0.0;
        for (std::size_t start = 0; start < order.size(); start += cfg.batch_size) {
            const std::size_t stop = std::min(order.size(), start + cfg.batch_size);
            auto [ecg, eda] = batch_tensors(windows, order, start, stop);
            std::vector<int> labels;
            for (std::size_t i = start; i < stop; ++i)
                labels.push_back(static_cast<int>(windows[order[i]].label));

            Tape tape;
            Tensor logits = model.forward(tape, ecg, eda, true);
            Tensor loss = ops::cross_entropy(tape, logits, labels);
            opt.zero_grad();
            tape.backward(loss);
            opt.step();
            loss_sum += loss.value() * static_cast<double>(stop - start);
        }
        result.epoch_loss.push_back(loss_sum / static_cast<double>(order.size()));
    }
    return result;
}

std::vector<int> predict(MultimodalModel& model, const std::vector<WindowPair>& windows,
                         std::size_t batch_size) {
    std::vector<std::size_t> index(windows.size());
    std::iota(index.begin(), index.end(), 0);
    std::vector<int> preds;
    preds.reserve(windows.size());
    for (std::size_t start = 0; start < windows.size(); start += batch_size) {
        const std::size_t stop = std::min(windows.size(), start + batch_size);
        auto [ecg, eda] = batch_tensors(windows, index, start, stop);
        Tape tape;
        tape.set_recording(false);
        Tensor logits = model.forward(tape, ecg, eda, false);
        for (std::size_t b = 0; b < stop - start; ++b) {
            const double* row = logits.data() + b * model.spec().n_classes;
            int best = 0;
            for (std::size_t c = 1; c < model.spec().n_classes; ++c)
                if (row[c] > row[best]) best = static_cast<int>(c);
            preds.push_back(best);
        }
    }
    return preds;
}

Metrics evaluate(MultimodalModel& model, const std::vector<WindowPair>& windows) {
    std::vector<int> labels;
    labels.reserve(windows.size());
    for (const auto& w : windows) labels.push_back(static_cast<int>(w.label));
    return compute_metrics(predict(model, windows), labels);
}

}  // namespace attx
