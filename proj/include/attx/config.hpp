#pragma once

#include "attx/model.hpp"
#include "attx/pipeline.hpp"
#include "attx/synth.hpp"
#include "attx/train.hpp"

#include <json.hpp>

#include <string>

namespace attx {

struct ExperimentConfig {
    std::uint64_t seed = 42;
    TrainConfig train;
    ModelSpec model;
    PipelineConfig pipeline;
};

nlohmann::json model_spec_to_json(const ModelSpec& spec);
ModelSpec model_spec_from_json(const nlohmann::json& j);

nlohmann::json config_to_json(const ExperimentConfig& cfg);
ExperimentConfig config_from_json(const nlohmann::json& j);
ExperimentConfig load_config(const std::string& path);

nlohmann::json synthetic_spec_to_json(const SyntheticSpec& spec);
SyntheticSpec synthetic_spec_from_json(const nlohmann::json& j);
SyntheticSpec load_synthetic_spec(const std::string& path);

}  // namespace attx
