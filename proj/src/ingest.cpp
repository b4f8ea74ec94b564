#include "attx/ingest.hpp"

#include "attx/diag.hpp"

#include <json.hpp>

#include <charconv>
#include <cstdio>
#include <filesystem>
#include <fstream>
#include <map>
#include <stdexcept>

namespace attx {

namespace {

std::vector<double> read_column(const std::string& path) {
    std::ifstream f(path);
    if (!f) throw std::runtime_error("cannot open " + path);
    std::vector<double> out;
    std::string line;
    while (std::getline(f, line)) {
        if (line.empty()) continue;
        out.push_back(std::stod(line));
    }
    return out;
}

Condition condition_from_code(long code, const std::string& subject, bool& warned) {
    switch (code) {
        case 0: return Condition::other;
        case 1: return Condition::neutral;
        case 2: return Condition::stress;
        case 3: return Condition::amusement;
        default:
            if (!warned) {
                warn("subject " + subject + ": unknown condition code " + std::to_string(code) +
                     ", treating as `other`");
                warned = true;
            }
            return Condition::other;
    }
}

std::string resolve(const std::string& base_dir, const std::string& path) {
    if (path.empty() || path.front() == '/') return path;
    return base_dir.empty() ? path : base_dir + "/" + path;
}

}  // namespace

IngestManifest load_manifest(const std::string& path) {
    std::ifstream f(path);
    if (!f) throw std::runtime_error("cannot open manifest " + path);
    nlohmann::json j = nlohmann::json::parse(f);

    IngestManifest m;
    m.dataset_name = j.value("dataset_name", "dataset");
    m.base_dir = std::filesystem::path(path).parent_path().string();
    for (const auto& s : j.at("subjects")) {
        SubjectFiles sf;
        sf.subject_id = s.at("subject_id").get<std::string>();
        sf.ecg_file = s.at("ecg_file").get<std::string>();
        sf.eda_file = s.at("eda_file").get<std::string>();
        sf.labels_file = s.at("labels_file").get<std::string>();
        sf.fs_hz = s.value("fs_hz", 700.0);
        m.subjects.push_back(std::move(sf));
    }
    return m;
}

std::vector<SignalRecord> ingest(const IngestManifest& manifest) {
    std::vector<SignalRecord> out;
    for (const SubjectFiles& s : manifest.subjects) {
        const std::vector<double> ecg = read_column(resolve(manifest.base_dir, s.ecg_file));
        const std::vector<double> eda = read_column(resolve(manifest.base_dir, s.eda_file));
        const std::vector<double> raw_labels =
            read_column(resolve(manifest.base_dir, s.labels_file));

        if (ecg.size() != raw_labels.size() || eda.size() != raw_labels.size())
            throw std::runtime_error("subject " + s.subject_id +
                                     ": signal and label lengths disagree (ecg " +
                                     std::to_string(ecg.size()) + ", eda " +
                                     std::to_string(eda.size()) + ", labels " +
                                     std::to_string(raw_labels.size()) + ")");

        std::vector<Condition> labels(raw_labels.size());
        bool warned = false;
        for (std::size_t i = 0; i < raw_labels.size(); ++i)
            labels[i] = condition_from_code(static_cast<long>(raw_labels[i]), s.subject_id, warned);

        SignalRecord re{s.subject_id, Modality::ecg, s.fs_hz, ecg, labels};
        SignalRecord rd{s.subject_id, Modality::eda, s.fs_hz, eda, std::move(labels)};
        out.push_back(std::move(re));
        out.push_back(std::move(rd));
    }
    return out;
}

void write_ingest_tree(const std::string& dir, const std::string& dataset_name,
                       const std::vector<SignalRecord>& records) {
    namespace fs = std::filesystem;
    fs::create_directories(dir);

    std::map<std::string, std::pair<const SignalRecord*, const SignalRecord*>> by_subject;
    for (const SignalRecord& r : records) {
        auto& slot = by_subject[r.subject_id];
        (r.modality == Modality::ecg ? slot.first : slot.second) = &r;
    }

    auto write_signal = [&](const std::string& path, const std::vector<double>& x) {
        std::ofstream f(path, std::ios::trunc);
        if (!f) throw std::runtime_error("cannot write " + path);
        char buf[40];
        for (double v : x) {
            std::snprintf(buf, sizeof buf, "%.17g\n", v);
            f << buf;
        }
    };

    nlohmann::json subjects = nlohmann::json::array();
    for (const auto& [sid, pair] : by_subject) {
        if (!pair.first || !pair.second)
            throw std::runtime_error("write_ingest_tree: subject " + sid + " lacks a modality");
        write_signal(dir + "/" + sid + "_ecg.csv", pair.first->samples);
        write_signal(dir + "/" + sid + "_eda.csv", pair.second->samples);
        {
            std::ofstream f(dir + "/" + sid + "_labels.csv", std::ios::trunc);
            for (Condition c : pair.first->condition_labels)
                f << static_cast<int>(c) << "\n";
        }
        subjects.push_back({{"subject_id", sid},
                            {"ecg_file", sid + "_ecg.csv"},
                            {"eda_file", sid + "_eda.csv"},
                            {"labels_file", sid + "_labels.csv"},
                            {"fs_hz", pair.first->fs_hz}});
    }
    nlohmann::json manifest = {{"dataset_name", dataset_name}, {"subjects", subjects}};
    std::ofstream f(dir + "/manifest.json", std::ios::trunc);
    f << manifest.dump(2) << "\n";
}

}  // namespace attx
