#include "attx/config.hpp"

#include <cstdlib>
#include <fstream>
#include <stdexcept>

namespace attx {

namespace {

using nlohmann::json;

json stream_to_json(const StreamConfig& c) {
    return {{"widths", c.widths},           {"kernel", c.kernel},
            {"strides", c.strides},         {"se_reduction", c.se_reduction},
            {"stage1_blocks", c.stage1_blocks}, {"stage4_width", c.stage4_width}};
}

StreamConfig stream_from_json(const json& j, const StreamConfig& base = {}) {
    StreamConfig c = base;
    c.widths = j.value("widths", c.widths);
    c.kernel = j.value("kernel", c.kernel);
    c.strides = j.value("strides", c.strides);
    c.se_reduction = j.value("se_reduction", c.se_reduction);
    c.stage1_blocks = j.value("stage1_blocks", c.stage1_blocks);
    c.stage4_width = j.value("stage4_width", c.stage4_width);
    return c;
}

ConnType conn_type_from_string(const std::string& s) {
    if (s == "I") return ConnType::I;
    if (s == "II") return ConnType::II;
    if (s == "III") return ConnType::III;
    throw std::invalid_argument("unknown attx type: " + s + " (expected I, II or III)");
}

ModelMode mode_from_string(const std::string& s) {
    if (s == "multimodal") return ModelMode::multimodal;
    if (s == "unimodal_ecg") return ModelMode::unimodal_ecg;
    if (s == "unimodal_eda") return ModelMode::unimodal_eda;
    throw std::invalid_argument("unknown model mode: " + s);
}

const char* mode_to_string(ModelMode m) {
    switch (m) {
        case ModelMode::multimodal: return "multimodal";
        case ModelMode::unimodal_ecg: return "unimodal_ecg";
        case ModelMode::unimodal_eda: return "unimodal_eda";
    }
    return "?";
}

}  // namespace

json model_spec_to_json(const ModelSpec& spec) {
    json j = {
        {"ecg", stream_to_json(spec.ecg)},
        {"eda", stream_to_json(spec.eda)},
        {"embedding_dim", spec.embedding_dim},
        {"head_dim", spec.head_dim},
        {"n_classes", spec.n_classes},
        {"mode", mode_to_string(spec.mode)},
        {"merge", spec.merge == MergeMode::concat ? "concat" : "add"},
    };
    if (spec.attx) {
        j["attx"] = {
            {"type", conn_type_name(spec.attx->type)},
            {"stages", spec.attx->stages},
            {"attention", spec.attx->attention == AttnMode::learned ? "learned" : "fixed_one"},
            {"reduce", spec.attx->reduce == ReduceMode::scale ? "scale" : "contract"},
        };
    } else {
        j["attx"] = nullptr;
    }
    return j;
}

ModelSpec model_spec_from_json(const json& j) {
    ModelSpec spec;
    if (j.contains("ecg")) spec.ecg = stream_from_json(j.at("ecg"));
    if (j.contains("eda")) spec.eda = stream_from_json(j.at("eda"), spec.eda);
    spec.embedding_dim = j.value("embedding_dim", spec.embedding_dim);
    spec.head_dim = j.value("head_dim", spec.head_dim);
    spec.n_classes = j.value("n_classes", spec.n_classes);
    spec.mode = mode_from_string(j.value("mode", "multimodal"));
    const std::string merge = j.value("merge", "concat");
    if (merge != "concat" && merge != "add")
        throw std::invalid_argument("unknown merge mode: " + merge);
    spec.merge = merge == "concat" ? MergeMode::concat : MergeMode::add;

    if (j.contains("attx") && !j.at("attx").is_null()) {
        const json& a = j.at("attx");
        AttXSpec ax;
        ax.type = conn_type_from_string(a.value("type", "III"));
        ax.stages = a.value("stages", std::vector<int>{1, 2});
        const std::string attn = a.value("attention", "learned");
        if (attn != "learned" && attn != "fixed_one")
            throw std::invalid_argument("unknown attention mode: " + attn);
        ax.attention = attn == "learned" ? AttnMode::learned : AttnMode::fixed_one;
        const std::string reduce = a.value("reduce", "scale");
        if (reduce != "scale" && reduce != "contract")
            throw std::invalid_argument("unknown attx reduce mode: " + reduce);
        ax.reduce = reduce == "scale" ? ReduceMode::scale : ReduceMode::contract;
        spec.attx = ax;
    } else {
        spec.attx.reset();
    }
    return spec;
}

json config_to_json(const ExperimentConfig& cfg) {
    return {
        {"seed", cfg.seed},
        {"train",
         {{"lr", cfg.train.lr},
          {"batch_size", cfg.train.batch_size},
          {"epochs", cfg.train.epochs},
          {"shuffle", cfg.train.shuffle}}},
        {"model", model_spec_to_json(cfg.model)},
        {"pipeline",
         {{"ecg_band_hz", cfg.pipeline.ecg_band_hz},
          {"eda_cutoff_hz", cfg.pipeline.eda_cutoff_hz},
          {"filter_order", cfg.pipeline.filter_order},
          {"zero_phase", cfg.pipeline.zero_phase},
          {"resample_to_hz", cfg.pipeline.resample_to_hz},
          {"antialias_order", cfg.pipeline.antialias_order},
          {"antialias_frac", cfg.pipeline.antialias_frac},
          {"window_s", cfg.pipeline.window_s},
          {"overlap", cfg.pipeline.overlap}}},
    };
}

ExperimentConfig config_from_json(const json& j) {
    ExperimentConfig cfg;
    cfg.seed = j.value("seed", cfg.seed);
    if (const char* env = std::getenv("ATTX_SEED")) cfg.seed = std::strtoull(env, nullptr, 10);
    if (j.contains("train")) {
        const json& t = j.at("train");
        cfg.train.lr = t.value("lr", cfg.train.lr);
        cfg.train.batch_size = t.value("batch_size", cfg.train.batch_size);
        cfg.train.epochs = t.value("epochs", cfg.train.epochs);
        cfg.train.shuffle = t.value("shuffle", cfg.train.shuffle);
    }
    cfg.train.seed = cfg.seed;
    if (j.contains("model")) cfg.model = model_spec_from_json(j.at("model"));
    if (j.contains("pipeline")) {
        const json& p = j.at("pipeline");
        cfg.pipeline.ecg_band_hz = p.value("ecg_band_hz", cfg.pipeline.ecg_band_hz);
        cfg.pipeline.eda_cutoff_hz = p.value("eda_cutoff_hz", cfg.pipeline.eda_cutoff_hz);
        cfg.pipeline.filter_order = p.value("filter_order", cfg.pipeline.filter_order);
        cfg.pipeline.zero_phase = p.value("zero_phase", cfg.pipeline.zero_phase);
        cfg.pipeline.resample_to_hz = p.value("resample_to_hz", cfg.pipeline.resample_to_hz);
        cfg.pipeline.antialias_order = p.value("antialias_order", cfg.pipeline.antialias_order);
        cfg.pipeline.antialias_frac = p.value("antialias_frac", cfg.pipeline.antialias_frac);
        cfg.pipeline.window_s = p.value("window_s", cfg.pipeline.window_s);
        cfg.pipeline.overlap = p.value("overlap", cfg.pipeline.overlap);
    }
    return cfg;
}

ExperimentConfig load_config(const std::string& path) {
    std::ifstream f(path);
    if (!f) throw std::runtime_error("cannot open config " + path);
    return config_from_json(json::parse(f));
}

json synthetic_spec_to_json(const SyntheticSpec& spec) {
    return {{"n_subjects", spec.n_subjects},
            {"duration_s", spec.duration_s},
            {"fs_hz", spec.fs_hz},
            {"class_balance", spec.class_balance},
            {"snr_db", spec.snr_db},
            {"cross_modal_mode", cross_modal_mode_name(spec.cross_modal_mode)},
            {"seed", spec.seed}};
}

SyntheticSpec synthetic_spec_from_json(const json& j) {
    SyntheticSpec spec;
    spec.n_subjects = j.value("n_subjects", spec.n_subjects);
    spec.duration_s = j.value("duration_s", spec.duration_s);
    spec.fs_hz = j.value("fs_hz", spec.fs_hz);
    spec.class_balance = j.value("class_balance", spec.class_balance);
    spec.snr_db = j.value("snr_db", spec.snr_db);
    if (j.contains("cross_modal_mode"))
        spec.cross_modal_mode = cross_modal_mode_from_name(j.at("cross_modal_mode"));
    spec.seed = j.value("seed", spec.seed);
    return spec;
}

SyntheticSpec load_synthetic_spec(const std::string& path) {
    std::ifstream f(path);
    if (!f) throw std::runtime_error("cannot open synthetic spec " + path);
    return synthetic_spec_from_json(json::parse(f));
}

}  // namespace attx
