#include "attx/loso.hpp"

#include "attx/diag.hpp"

#include <json.hpp>

#include <algorithm>
#include <atomic>
#include <cstdio>
#include <filesystem>
#include <fstream>
#include <mutex>
#include <set>
#include <sstream>
#include <stdexcept>
#include <thread>

namespace attx {

std::vector<std::string> subjects_of(const std::vector<WindowPair>& dataset) {
    std::set<std::string> s;
    for (const auto& w : dataset) s.insert(w.subject_id);
    return {s.begin(), s.end()};
}

FoldReport run_fold(const std::vector<WindowPair>& train_set,
                    const std::vector<WindowPair>& test_set, const ModelSpec& spec,
                    const TrainConfig& cfg, std::uint64_t fold_seed) {
    if (test_set.empty()) throw std::invalid_argument("run_fold: empty test set");
    std::set<std::string> held_out;
    for (const auto& w : test_set) held_out.insert(w.subject_id);
    if (held_out.size() != 1)
        throw std::invalid_argument("run_fold: test set must hold out exactly one subject");
    for (const auto& w : train_set)
        if (held_out.count(w.subject_id))
            throw std::logic_error("run_fold: subject leakage, held-out subject '" +
                                   w.subject_id + "' appears in the training set");

    MultimodalModel model(spec);
    model.init_params(fold_seed);
    TrainConfig fold_cfg = cfg;
    fold_cfg.seed = fold_seed;
    TrainResult tr = train(model, train_set, fold_cfg);

    FoldReport report;
    report.held_out_subject = *held_out.begin();
    report.loss_curve = std::move(tr.epoch_loss);
    report.metrics = evaluate(model, test_set);
    return report;
}

namespace {

Metrics mean_over_folds(const std::vector<FoldReport>& folds) {
    Metrics m;
    for (const FoldReport& f : folds) {
        m.accuracy += f.metrics.accuracy;
        m.macro_f1 += f.metrics.macro_f1;
        m.weighted_f1 += f.metrics.weighted_f1;
        for (int i = 0; i < 2; ++i)
            for (int j = 0; j < 2; ++j) m.confusion[i][j] += f.metrics.confusion[i][j];
    }
    const auto n = static_cast<double>(folds.size());
    m.accuracy /= n;
    m.macro_f1 /= n;
    m.weighted_f1 /= n;
    return m;
}

}  // namespace

LosoResult loso_evaluate(const std::vector<WindowPair>& dataset, const ModelSpec& spec,
                         const TrainConfig& cfg, int threads) {
    const std::vector<std::string> subjects = subjects_of(dataset);
    if (subjects.size() < 2) throw std::invalid_argument("loso_evaluate: need >= 2 subjects");

    LosoResult result;
    result.folds.resize(subjects.size());
    std::atomic<std::size_t> next{0};
    std::atomic<bool> failed{false};
    std::string error;
    std::mutex error_mu;

    auto worker = [&]() {
        for (;;) {
            const std::size_t i = next.fetch_add(1);
            if (i >= subjects.size() || failed.load()) return;
            const std::string& held = subjects[i];
            std::vector<WindowPair> train_set, test_set;
            for (const auto& w : dataset)
                (w.subject_id == held ? test_set : train_set).push_back(w);
            try {
                result.folds[i] = run_fold(train_set, test_set, spec, cfg, cfg.seed + i);
            } catch (const std::exception& e) {
                std::lock_guard<std::mutex> lk(error_mu);
                failed.store(true);
                if (error.empty()) error = "fold " + held + ": " + e.what();
            }
        }
    };

    const int n_workers = std::max(1, std::min<int>(threads, static_cast<int>(subjects.size())));
    if (n_workers == 1) {
        worker();
    } else {
        std::vector<std::thread> pool;
        for (int t = 0; t < n_workers; ++t) pool.emplace_back(worker);
        for (auto& t : pool) t.join();
    }
    if (failed.load()) throw std::runtime_error("loso_evaluate: " + error);

    result.mean_folds = mean_over_folds(result.folds);
    result.pooled = metrics_from_confusion(result.mean_folds.confusion);
    return result;
}

namespace {

std::string stages_label(const std::vector<int>& stages) {
    std::string s;
    for (std::size_t i = 0; i < stages.size(); ++i) {
        if (i) s += "+";
        s += std::to_string(stages[i]);
    }
    return s.empty() ? "-" : s;
}

std::string type_with_direction(ConnType t) {
    return std::string(conn_type_name(t)) + "(" + conn_type_direction(t) + ")";
}

}  // namespace

std::vector<AblationRow> grid_table1(const ModelSpec& base) {
    std::vector<AblationRow> rows;
    ModelSpec fusion = base;
    fusion.attx.reset();
    fusion.mode = ModelMode::multimodal;
    rows.push_back({"feature_fusion", "feature_fusion", "-", fusion});

    const std::vector<std::vector<int>> stage_sets{{1},    {2},    {3},      {1, 2},
                                                   {1, 3}, {2, 3}, {1, 2, 3}};
    for (ConnType type : {ConnType::I, ConnType::II, ConnType::III}) {
        for (const auto& stages : stage_sets) {
            ModelSpec spec = base;
            spec.mode = ModelMode::multimodal;
            spec.attx = AttXSpec{type, stages, AttnMode::learned, ReduceMode::scale};
            AblationRow row;
            row.key = std::string("type_") + conn_type_name(type) + "_stages_" +
                      stages_label(stages);
            std::replace(row.key.begin(), row.key.end(), '+', '_');
            row.type_label = type_with_direction(type);
            row.stages_label = stages_label(stages);
            row.spec = spec;
            rows.push_back(row);
        }
    }
    return rows;
}

std::vector<AblationRow> grid_table3(const ModelSpec& base) {
    std::vector<AblationRow> rows;
    const AttXSpec best = base.attx.value_or(AttXSpec{ConnType::III, {1, 2}});

    ModelSpec uni_eda = base;
    uni_eda.attx.reset();
    uni_eda.mode = ModelMode::unimodal_eda;
    rows.push_back({"unimodal_eda", "unimodal_eda", "-", uni_eda});

    ModelSpec uni_ecg = base;
    uni_ecg.attx.reset();
    uni_ecg.mode = ModelMode::unimodal_ecg;
    rows.push_back({"unimodal_ecg", "unimodal_ecg", "-", uni_ecg});

    ModelSpec fusion = base;
    fusion.attx.reset();
    fusion.mode = ModelMode::multimodal;
    rows.push_back({"feature_fusion", "feature_fusion", "-", fusion});

    ModelSpec no_attn = base;
    no_attn.mode = ModelMode::multimodal;
    no_attn.attx = best;
    no_attn.attx->attention = AttnMode::fixed_one;
    rows.push_back({"no_attention",
                    "no_attention[" + type_with_direction(best.type) + "]",
                    stages_label(best.stages), no_attn});

    ModelSpec full = base;
    full.mode = ModelMode::multimodal;
    full.attx = best;
    full.attx->attention = AttnMode::learned;
    rows.push_back({"attx", "attx[" + type_with_direction(best.type) + "]",
                    stages_label(best.stages), full});
    return rows;
}

AblationTable ablation_run(const std::vector<WindowPair>& dataset,
                           const std::vector<AblationRow>& grid, const TrainConfig& cfg,
                           int threads) {
    AblationTable table;
    for (const AblationRow& row : grid)
        table.entries.push_back({row, loso_evaluate(dataset, row.spec, cfg, threads)});
    return table;
}

namespace {

void atomic_write_text(const std::string& path, const std::string& content) {
    const std::string tmp = path + ".tmp";
    {
        std::ofstream f(tmp, std::ios::binary | std::ios::trunc);
        if (!f) throw std::runtime_error("cannot write " + tmp);
        f << content;
    }
    if (std::rename(tmp.c_str(), path.c_str()) != 0)
        throw std::runtime_error("rename failed: " + path);
}

std::string fmt(double v) {
    char buf[32];
    std::snprintf(buf, sizeof buf, "%.6f", v);
    return buf;
}

std::string csv_of(const AblationTable& table, bool pooled) {
    std::string out = "type,stages,accuracy,macro_f1,weighted_f1,n_folds\n";
    for (const auto& e : table.entries) {
        const Metrics& m = pooled ? e.result.pooled : e.result.mean_folds;
        out += e.row.type_label + "," + e.row.stages_label + "," + fmt(m.accuracy) + "," +
               fmt(m.macro_f1) + "," + fmt(m.weighted_f1) + "," +
               std::to_string(e.result.folds.size()) + "\n";
    }
    return out;
}

}  // namespace

void write_ablation_outputs(const std::string& out_dir, const AblationTable& table) {
    namespace fs = std::filesystem;
    fs::create_directories(out_dir);
    atomic_write_text(out_dir + "/ablation.csv", csv_of(table, false));
    atomic_write_text(out_dir + "/ablation_pooled.csv", csv_of(table, true));

    std::ostringstream txt;
    txt << "configuration                              stages   accuracy  macro_f1  weighted_f1\n";
    for (const auto& e : table.entries) {
        char line[160];
        std::snprintf(line, sizeof line, "%-42s %-8s %8.4f  %8.4f  %10.4f\n",
                      e.row.type_label.c_str(), e.row.stages_label.c_str(),
                      e.result.mean_folds.accuracy, e.result.mean_folds.macro_f1,
                      e.result.mean_folds.weighted_f1);
        txt << line;
    }
    atomic_write_text(out_dir + "/ablation.txt", txt.str());

    for (const auto& e : table.entries) {
        const std::string row_dir = out_dir + "/folds/" + e.row.key;
        fs::create_directories(row_dir);
        for (const FoldReport& f : e.result.folds) {
            nlohmann::json j = {
                {"held_out_subject", f.held_out_subject},
                {"accuracy", f.metrics.accuracy},
                {"macro_f1", f.metrics.macro_f1},
                {"weighted_f1", f.metrics.weighted_f1},
                {"confusion",
                 {{f.metrics.confusion[0][0], f.metrics.confusion[0][1]},
                  {f.metrics.confusion[1][0], f.metrics.confusion[1][1]}}},
                {"loss_curve", f.loss_curve},
            };
            atomic_write_text(row_dir + "/fold_" + f.held_out_subject + ".json", j.dump(2) + "\n");
        }
    }
}

}  // namespace attx
