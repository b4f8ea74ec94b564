#pragma once

#include "attx/train.hpp"

#include <string>
#include <vector>

namespace attx {

struct FoldReport {
    std::string held_out_subject;
    Metrics metrics;
    std::vector<double> loss_curve;
};

struct LosoResult {
    std::vector<FoldReport> folds;
    Metrics mean_folds;  // unweighted mean over folds (confusion = summed counts)
    Metrics pooled;      // recomputed from the pooled confusion
};

// Trains a fresh model (fold_seed) on `train_set` and evaluates on `test_set`.
// Throws if any training window carries a held-out subject id.
FoldReport run_fold(const std::vector<WindowPair>& train_set,
                    const std::vector<WindowPair>& test_set, const ModelSpec& spec,
                    const TrainConfig& cfg, std::uint64_t fold_seed);

// One fold per subject, fresh init per fold (seed = cfg.seed + fold index),
// folds optionally in parallel (each fold single-threaded).
LosoResult loso_evaluate(const std::vector<WindowPair>& dataset, const ModelSpec& spec,
                         const TrainConfig& cfg, int threads = 1);

struct AblationRow {
    std::string key;           // filesystem-safe identifier
    std::string type_label;    // connection type with explicit direction, or baseline name
    std::string stages_label;  // "1+2" style, or "-"
    ModelSpec spec;
};

struct AblationEntry {
    AblationRow row;
    LosoResult result;
};

struct AblationTable {
    std::vector<AblationEntry> entries;
};

// Table-1 style grid: feature-level fusion + all 21 type x stage configs.
std::vector<AblationRow> grid_table1(const ModelSpec& base);
// Table-3 style ablation ladder: unimodal EDA/ECG, feature fusion,
// connections without attention (theta = 1), full attention.
std::vector<AblationRow> grid_table3(const ModelSpec& base);

AblationTable ablation_run(const std::vector<WindowPair>& dataset,
                           const std::vector<AblationRow>& grid, const TrainConfig& cfg,
                           int threads = 1);

// ablation.csv, ablation_pooled.csv, ablation.txt and per-fold JSON reports
// under <out_dir>/folds/<row>/fold_<subject>.json. Deterministic bytes.
void write_ablation_outputs(const std::string& out_dir, const AblationTable& table);

std::vector<std::string> subjects_of(const std::vector<WindowPair>& dataset);

}  // namespace attx
