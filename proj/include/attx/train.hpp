#pragma once

#include "attx/metrics.hpp"
#include "attx/model.hpp"
#include "attx/pipeline.hpp"

#include <cstdint>
#include <vector>

namespace attx {

struct TrainConfig {
    double lr = 1e-3;
    std::size_t batch_size = 16;
    std::size_t epochs = 100;
    std::uint64_t seed = 0;
    bool shuffle = true;
};

struct TrainResult {
    std::vector<double> epoch_loss;  // mean loss per epoch
};

// Seeded shuffle per epoch, minibatches with the last partial batch kept, one
// Adam step per batch. Requires both classes in the training set.
TrainResult train(MultimodalModel& model, const std::vector<WindowPair>& windows,
                  const TrainConfig& cfg);

// Eval-mode argmax predictions, in batches.
std::vector<int> predict(MultimodalModel& model, const std::vector<WindowPair>& windows,
                         std::size_t batch_size = 32);

Metrics evaluate(MultimodalModel& model, const std::vector<WindowPair>& windows);

// [batch, time, 1] tensors for a span of windows.
std::pair<Tensor, Tensor> batch_tensors(const std::vector<WindowPair>& windows,
                                        const std::vector<std::size_t>& index,
                                        std::size_t begin, std::size_t end);

}  // namespace attx
