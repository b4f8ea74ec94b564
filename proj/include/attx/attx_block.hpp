#pragma once

#include "attx/layers.hpp"

#include <optional>
#include <utility>
#include <vector>

namespace attx {

// Direction of sharing. Table labels in the literature disagree on the arrow
// for I/II, so everything user-facing prints the direction explicitly.
enum class ConnType { I, II, III };  // I: ecg->eda, II: eda->ecg, III: both

enum class AttnMode { learned, fixed_one };
enum class ReduceMode { scale, contract };

struct AttXSpec {
    ConnType type = ConnType::III;
    std::vector<int> stages{1, 2};
    AttnMode attention = AttnMode::learned;
    ReduceMode reduce = ReduceMode::scale;
};

const char* conn_type_name(ConnType t);        // "I" / "II" / "III"
const char* conn_type_direction(ConnType t);   // "ecg->eda" / "eda->ecg" / "ecg<->eda"

// W mixes the two modality slices (d = 2); w_u weights channels before the
// modality softmax.
struct AttXParams {
    Tensor W;    // [2, 2]
    Tensor w_u;  // [m]
};

// z_ecg, z_eda: [batch, n, m] with identical shapes -> [batch, n, m, 2],
// ECG in slice 0, EDA in slice 1.
Tensor stack_modalities(Tape& tape, const Tensor& z_ecg, const Tensor& z_eda);

// U = ReLU(S W) contracting the modality axis; transpose the last two axes;
// weight channels by w_u; softmax over the modality axis. `scale` keeps the
// per-channel resolution ([batch, n, 2, m]); `contract` reduces channels away
// ([batch, n, 2]). Either way the two modality weights sum to 1.
Tensor attention_weights(Tape& tape, const Tensor& s, const AttXParams& p,
                         ReduceMode reduce = ReduceMode::scale);

// Weight each stream by its attention slice.
std::pair<Tensor, Tensor> apply_attention(Tape& tape, const Tensor& theta, const Tensor& z_ecg,
                                          const Tensor& z_eda, ReduceMode reduce = ReduceMode::scale);

// One cross-modal connection at a stage boundary: the receiving stream gets
// concat(own, weighted other) batch-normalized (channels double); the
// non-receiving stream passes through unchanged.
class AttXConnection {
public:
    AttXConnection(std::size_t channels, ConnType type, AttnMode mode, ReduceMode reduce);

    std::pair<Tensor, Tensor> forward(Tape& tape, const Tensor& z_ecg, const Tensor& z_eda,
                                      bool training);

    void collect(const std::string& prefix, std::vector<NamedParam>& out);
    void collect_state(const std::string& prefix, std::vector<NamedState>& out);

    ConnType type() const { return type_; }
    std::size_t channels() const { return channels_; }
    bool ecg_receives() const { return type_ != ConnType::I; }
    bool eda_receives() const { return type_ != ConnType::II; }

    AttXParams params;

private:
    ConnType type_;
    AttnMode mode_;
    ReduceMode reduce_;
    std::size_t channels_;
    std::optional<BatchNorm1dLayer> bn_ecg_, bn_eda_;
};

}  // namespace attx
