#include "attx/model.hpp"

#include <algorithm>
#include <stdexcept>

namespace attx {

using namespace ops;

EcgStream::EcgStream(const StreamConfig& cfg, const std::array<std::size_t, 3>& stage_in,
                     std::size_t embed_in, std::size_t embedding_dim)
    : fc1_(embed_in, embedding_dim), fc2_(embedding_dim, embedding_dim) {
    const std::size_t k = cfg.kernel;
    stage1_.emplace_back(k, stage_in[0], cfg.widths[0], cfg.strides[0]);
    for (std::size_t i = 1; i < cfg.stage1_blocks; ++i)
        stage1_.emplace_back(k, cfg.widths[0], cfg.widths[0], 1);

    stage2_.emplace_back(k, stage_in[1], cfg.widths[1], cfg.strides[1], cfg.se_reduction, true);
    stage2_.emplace_back(k, cfg.widths[1], cfg.widths[1], 1, cfg.se_reduction, false);
    stage2_.emplace_back(k, cfg.widths[1], cfg.widths[1], 1, cfg.se_reduction, false);

    stage3_.emplace_back(k, stage_in[2], cfg.widths[2], cfg.strides[2], cfg.se_reduction, true);
    stage3_.emplace_back(k, cfg.widths[2], cfg.widths[2], 1, cfg.se_reduction, false);
}

Tensor EcgStream::run_stage(Tape& tape, int stage, const Tensor& x, bool training) {
    Tensor h = x;
    switch (stage) {
        case 1:
            for (auto& b : stage1_) h = b.forward(tape, h, training);
            return h;
        case 2:
            for (auto& b : stage2_) h = b.forward(tape, h, training);
            return h;
        case 3:
            for (auto& b : stage3_) h = b.forward(tape, h, training);
            return h;
        default:
            throw std::logic_error("ecg stream has stages 1..3");
    }
}

Tensor EcgStream::embed(Tape& tape, const Tensor& x, bool training) {
    (void)training;
    Tensor h = global_avg_pool(tape, x);
    h = relu(tape, fc1_.forward(tape, h));
    return relu(tape, fc2_.forward(tape, h));
}

void EcgStream::collect(const std::string& prefix, std::vector<NamedParam>& out) {
    for (std::size_t i = 0; i < stage1_.size(); ++i)
        stage1_[i].collect(prefix + ".stage1.block" + std::to_string(i), out);
    for (std::size_t i = 0; i < stage2_.size(); ++i)
        stage2_[i].collect(prefix + ".stage2.block" + std::to_string(i), out);
    for (std::size_t i = 0; i < stage3_.size(); ++i)
        stage3_[i].collect(prefix + ".stage3.block" + std::to_string(i), out);
    fc1_.collect(prefix + ".fc1", out);
    fc2_.collect(prefix + ".fc2", out);
}

void EcgStream::collect_state(const std::string& prefix, std::vector<NamedState>& out) {
    for (std::size_t i = 0; i < stage1_.size(); ++i)
        stage1_[i].collect_state(prefix + ".stage1.block" + std::to_string(i), out);
    for (std::size_t i = 0; i < stage2_.size(); ++i)
        stage2_[i].collect_state(prefix + ".stage2.block" + std::to_string(i), out);
    for (std::size_t i = 0; i < stage3_.size(); ++i)
        stage3_[i].collect_state(prefix + ".stage3.block" + std::to_string(i), out);
}

EdaStream::EdaStream(const StreamConfig& cfg, const std::array<std::size_t, 3>& stage_in,
                     std::size_t stage4_in, std::size_t embedding_dim)
    : se4_(cfg.stage4_width, cfg.se_reduction),
      fc1_(cfg.stage4_width, embedding_dim),
      fc2_(embedding_dim, embedding_dim) {
    const std::size_t k = cfg.kernel;
    stage1_.emplace_back(k, stage_in[0], cfg.widths[0], cfg.strides[0]);

    stage2_.emplace_back(k, stage_in[1], cfg.widths[1], cfg.strides[1]);
    stage2_.emplace_back(k, cfg.widths[1], cfg.widths[1], 1);

    stage3_.emplace_back(k, stage_in[2], cfg.widths[2], cfg.strides[2]);
    stage3_.emplace_back(k, cfg.widths[2], cfg.widths[2], 1);

    stage4_.emplace_back(k, stage4_in, cfg.stage4_width, 1);
    stage4_.emplace_back(k, cfg.stage4_width, cfg.stage4_width, 1);
}

Tensor EdaStream::run_stage(Tape& tape, int stage, const Tensor& x, bool training) {
    Tensor h = x;
    switch (stage) {
        case 1:
            for (auto& b : stage1_) h = b.forward(tape, h, training);
            return h;
        case 2:
            for (auto& b : stage2_) h = b.forward(tape, h, training);
            return h;
        case 3:
            for (auto& b : stage3_) h = b.forward(tape, h, training);
            return h;
        default:
            throw std::logic_error("eda stream has stages 1..3 before the SE stage");
    }
}

Tensor EdaStream::embed(Tape& tape, const Tensor& x, bool training) {
    Tensor h = x;
    for (auto& b : stage4_) h = b.forward(tape, h, training);
    h = se4_.forward(tape, h);
    h = global_avg_pool(tape, h);
    h = relu(tape, fc1_.forward(tape, h));
    return relu(tape, fc2_.forward(tape, h));
}

void EdaStream::collect(const std::string& prefix, std::vector<NamedParam>& out) {
    auto stage = [&](const char* name, std::vector<ConvBlock>& blocks) {
        for (std::size_t i = 0; i < blocks.size(); ++i)
            blocks[i].collect(prefix + "." + name + ".block" + std::to_string(i), out);
    };
    stage("stage1", stage1_);
    stage("stage2", stage2_);
    stage("stage3", stage3_);
    stage("stage4", stage4_);
    se4_.collect(prefix + ".stage4.se", out);
    fc1_.collect(prefix + ".fc1", out);
    fc2_.collect(prefix + ".fc2", out);
}

void EdaStream::collect_state(const std::string& prefix, std::vector<NamedState>& out) {
    auto stage = [&](const char* name, std::vector<ConvBlock>& blocks) {
        for (std::size_t i = 0; i < blocks.size(); ++i)
            blocks[i].collect_state(prefix + "." + name + ".block" + std::to_string(i), out);
    };
    stage("stage1", stage1_);
    stage("stage2", stage2_);
    stage("stage3", stage3_);
    stage("stage4", stage4_);
}

namespace {

void validate(const ModelSpec& spec) {
    for (const StreamConfig* cfg : {&spec.ecg, &spec.eda}) {
        if (cfg->widths.size() != 3 || cfg->strides.size() != 3)
            throw std::invalid_argument("stream config needs exactly 3 widths and 3 strides");
        if (cfg->kernel % 2 == 0) throw std::invalid_argument("kernel size must be odd");
        if (cfg->stage1_blocks < 1)
            throw std::invalid_argument("stage 1 needs at least one block");
    }
    if (spec.attx) {
        if (spec.mode != ModelMode::multimodal)
            throw std::invalid_argument("cross-modal connections need both streams");
        if (spec.attx->stages.empty())
            throw std::invalid_argument("attx enabled but no stages configured");
        std::vector<int> seen;
        for (int s : spec.attx->stages) {
            if (s < 1 || s > 3) throw std::invalid_argument("attx stages must be within 1..3");
            if (std::count(seen.begin(), seen.end(), s))
                throw std::invalid_argument("duplicate attx stage");
            seen.push_back(s);
        }
        if (spec.ecg.widths != spec.eda.widths || spec.ecg.strides != spec.eda.strides)
            throw std::invalid_argument(
                "attx connections require stage-aligned stream widths and strides");
    }
}

}  // namespace

MultimodalModel::MultimodalModel(const ModelSpec& spec) : spec_(spec) {
    validate(spec_);

    const bool want_ecg = spec_.mode != ModelMode::unimodal_eda;
    const bool want_eda = spec_.mode != ModelMode::unimodal_ecg;

    auto has_conn = [&](int stage) {
        return spec_.attx && std::count(spec_.attx->stages.begin(), spec_.attx->stages.end(), stage);
    };

    std::array<std::size_t, 3> ecg_in{1, spec_.ecg.widths[0], spec_.ecg.widths[1]};
    std::array<std::size_t, 3> eda_in{1, spec_.eda.widths[0], spec_.eda.widths[1]};
    std::size_t ecg_embed_in = spec_.ecg.widths[2];
    std::size_t eda_stage4_in = spec_.eda.widths[2];

    for (int stage = 1; stage <= 3; ++stage) {
        if (!has_conn(stage)) continue;
        const std::size_t m = spec_.ecg.widths[static_cast<std::size_t>(stage - 1)];
        auto conn = std::make_unique<AttXConnection>(m, spec_.attx->type, spec_.attx->attention,
                                                     spec_.attx->reduce);
        if (conn->ecg_receives()) {
            if (stage < 3)
                ecg_in[static_cast<std::size_t>(stage)] = 2 * m;
            else
                ecg_embed_in = 2 * m;
        }
        if (conn->eda_receives()) {
            if (stage < 3)
                eda_in[static_cast<std::size_t>(stage)] = 2 * m;
            else
                eda_stage4_in = 2 * m;
        }
        conns_[stage] = std::move(conn);
    }

    if (want_ecg) ecg_.emplace(spec_.ecg, ecg_in, ecg_embed_in, spec_.embedding_dim);
    if (want_eda) eda_.emplace(spec_.eda, eda_in, eda_stage4_in, spec_.embedding_dim);

    std::size_t head_in = spec_.embedding_dim;
    if (spec_.mode == ModelMode::multimodal && spec_.merge == MergeMode::concat)
        head_in = 2 * spec_.embedding_dim;
    head1_.emplace(head_in, spec_.head_dim);
    head2_.emplace(spec_.head_dim, spec_.head_dim);
    head_out_.emplace(spec_.head_dim, spec_.n_classes);
}

Tensor MultimodalModel::forward(Tape& tape, const Tensor& ecg, const Tensor& eda, bool training,
                                StageTrace* trace) {
    Tensor emb;
    if (spec_.mode == ModelMode::unimodal_ecg) {
        Tensor h = ecg;
        for (int s = 1; s <= 3; ++s) {
            h = ecg_->run_stage(tape, s, h, training);
            if (trace) trace->ecg_stage[static_cast<std::size_t>(s - 1)] = h.shape();
        }
        emb = ecg_->embed(tape, h, training);
    } else if (spec_.mode == ModelMode::unimodal_eda) {
        Tensor h = eda;
        for (int s = 1; s <= 3; ++s) {
            h = eda_->run_stage(tape, s, h, training);
            if (trace) trace->eda_stage[static_cast<std::size_t>(s - 1)] = h.shape();
        }
        emb = eda_->embed(tape, h, training);
    } else {
        Tensor he = ecg, hd = eda;
        for (int s = 1; s <= 3; ++s) {
            he = ecg_->run_stage(tape, s, he, training);
            hd = eda_->run_stage(tape, s, hd, training);
            auto it = conns_.find(s);
            if (it != conns_.end()) std::tie(he, hd) = it->second->forward(tape, he, hd, training);
            if (trace) {
                trace->ecg_stage[static_cast<std::size_t>(s - 1)] = he.shape();
                trace->eda_stage[static_cast<std::size_t>(s - 1)] = hd.shape();
            }
        }
        Tensor ye = ecg_->embed(tape, he, training);
        Tensor yd = eda_->embed(tape, hd, training);
        emb = spec_.merge == MergeMode::concat ? concat(tape, ye, yd, 1) : add(tape, ye, yd);
    }
    Tensor h = relu(tape, head1_->forward(tape, emb));
    h = relu(tape, head2_->forward(tape, h));
    return head_out_->forward(tape, h);
}

std::vector<NamedParam> MultimodalModel::parameters() {
    std::vector<NamedParam> out;
    if (ecg_) ecg_->collect("ecg", out);
    if (eda_) eda_->collect("eda", out);
    for (auto& [stage, conn] : conns_) conn->collect("attx.stage" + std::to_string(stage), out);
    head1_->collect("head.fc1", out);
    head2_->collect("head.fc2", out);
    head_out_->collect("head.out", out);
    return out;
}

std::vector<NamedState> MultimodalModel::state() {
    std::vector<NamedState> out;
    if (ecg_) ecg_->collect_state("ecg", out);
    if (eda_) eda_->collect_state("eda", out);
    for (auto& [stage, conn] : conns_)
        conn->collect_state("attx.stage" + std::to_string(stage), out);
    return out;
}

void MultimodalModel::init_params(std::uint64_t seed) {
    auto params = parameters();
    attx::init_params(params, seed);
}

}  // namespace attx
