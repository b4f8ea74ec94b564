#include "attx/attx_block.hpp"

#include <stdexcept>

namespace attx {

using namespace ops;

const char* conn_type_name(ConnType t) {
    switch (t) {
        case ConnType::I: return "I";
        case ConnType::II: return "II";
        case ConnType::III: return "III";
    }
    return "?";
}

const char* conn_type_direction(ConnType t) {
    switch (t) {
        case ConnType::I: return "ecg->eda";
        case ConnType::II: return "eda->ecg";
        case ConnType::III: return "ecg<->eda";
    }
    return "?";
}

Tensor stack_modalities(Tape& tape, const Tensor& z_ecg, const Tensor& z_eda) {
    if (z_ecg.shape() != z_eda.shape())
        throw std::invalid_argument("stack_modalities: streams are not stage-aligned");
    if (z_ecg.ndim() != 3)
        throw std::invalid_argument("stack_modalities: expected [batch, n, m] inputs");
    return stack_last(tape, z_ecg, z_eda);
}

Tensor attention_weights(Tape& tape, const Tensor& s, const AttXParams& p, ReduceMode reduce) {
    if (s.ndim() != 4 || s.extent(3) != 2)
        throw std::invalid_argument("attention_weights: expected stacked [batch, n, m, 2]");
    const std::size_t m = s.extent(2);
    if (p.w_u.numel() != m)
        throw std::invalid_argument("attention_weights: w_u length does not match channels");

    Tensor u = relu(tape, contract_last(tape, s, p.W));  // [B, n, m, 2]
    Tensor ut = transpose_last2(tape, u);                // [B, n, 2, m]
    if (reduce == ReduceMode::scale) {
        // per-channel weighting, softmax over the modality axis
        Tensor v = mul(tape, ut, p.w_u);
        return softmax(tape, v, 2);  // [B, n, 2, m]
    }
    // contraction reading: channels reduce away before the softmax
    Tensor wu_col = reshape(tape, p.w_u, {m, 1});
    Tensor t = contract_last(tape, ut, wu_col);  // [B, n, 2, 1]
    Tensor t3 = reshape(tape, t, {s.extent(0), s.extent(1), std::size_t{2}});
    return softmax(tape, t3, 2);  // [B, n, 2]
}

std::pair<Tensor, Tensor> apply_attention(Tape& tape, const Tensor& theta, const Tensor& z_ecg,
                                          const Tensor& z_eda, ReduceMode reduce) {
    Tensor th_ecg = select_axis(tape, theta, 2, 0);
    Tensor th_eda = select_axis(tape, theta, 2, 1);
    if (reduce == ReduceMode::scale)
        return {mul(tape, th_ecg, z_ecg), mul(tape, th_eda, z_eda)};
    return {scale_rows(tape, z_ecg, th_ecg), scale_rows(tape, z_eda, th_eda)};
}

AttXConnection::AttXConnection(std::size_t channels, ConnType type, AttnMode mode,
                               ReduceMode reduce)
    : type_(type), mode_(mode), reduce_(reduce), channels_(channels) {
    if (mode_ == AttnMode::learned) {
        params.W = Tensor::zeros({2, 2}, true);
        params.w_u = Tensor::zeros({channels}, true);
    }
    if (ecg_receives()) bn_ecg_.emplace(2 * channels);
    if (eda_receives()) bn_eda_.emplace(2 * channels);
}

std::pair<Tensor, Tensor> AttXConnection::forward(Tape& tape, const Tensor& z_ecg,
                                                  const Tensor& z_eda, bool training) {
    if (z_ecg.shape() != z_eda.shape())
        throw std::invalid_argument("attx connection: streams are not stage-aligned");
    if (z_ecg.extent(2) != channels_)
        throw std::invalid_argument("attx connection: unexpected channel count");

    Tensor zhat_ecg = z_ecg, zhat_eda = z_eda;  // fixed_one: weights are exactly 1
    if (mode_ == AttnMode::learned) {
        Tensor s = stack_modalities(tape, z_ecg, z_eda);
        Tensor theta = attention_weights(tape, s, params, reduce_);
        std::tie(zhat_ecg, zhat_eda) = apply_attention(tape, theta, z_ecg, z_eda, reduce_);
    }

    Tensor next_ecg = z_ecg, next_eda = z_eda;
    if (ecg_receives())
        next_ecg = bn_ecg_->forward(tape, concat(tape, z_ecg, zhat_eda, 2), training);
    if (eda_receives())
        next_eda = bn_eda_->forward(tape, concat(tape, z_eda, zhat_ecg, 2), training);
    return {next_ecg, next_eda};
}

void AttXConnection::collect(const std::string& prefix, std::vector<NamedParam>& out) {
    if (mode_ == AttnMode::learned) {
        out.push_back({prefix + ".W", params.W, InitKind::eye_plus_uniform, 2});
        out.push_back({prefix + ".w_u", params.w_u, InitKind::he_uniform, channels_});
    }
    if (bn_ecg_) bn_ecg_->collect(prefix + ".bn_ecg", out);
    if (bn_eda_) bn_eda_->collect(prefix + ".bn_eda", out);
}

void AttXConnection::collect_state(const std::string& prefix, std::vector<NamedState>& out) {
    if (bn_ecg_) bn_ecg_->collect_state(prefix + ".bn_ecg", out);
    if (bn_eda_) bn_eda_->collect_state(prefix + ".bn_eda", out);
}

}  // namespace attx
