#pragma once

#include "attx/pipeline.hpp"

#include <string>
#include <vector>

namespace attx {

struct SubjectFiles {
    std::string subject_id;
    std::string ecg_file;
    std::string eda_file;
    std::string labels_file;
    double fs_hz = 700.0;
};

struct IngestManifest {
    std::string dataset_name;
    std::vector<SubjectFiles> subjects;
    std::string base_dir;  // directory of the manifest file; file paths resolve against it
};

IngestManifest load_manifest(const std::string& path);

// Signal files: one real per line. Labels: one integer condition code per
// line (0 = other/transient, 1 = neutral, 2 = stress, 3 = amusement; unknown
// codes map to `other` with a warning). Length mismatches are per-subject
// errors.
std::vector<SignalRecord> ingest(const IngestManifest& manifest);

// Writes per-subject CSV signal/label files plus a manifest.json for records
// produced by the synthetic generator.
void write_ingest_tree(const std::string& dir, const std::string& dataset_name,
                       const std::vector<SignalRecord>& records);

}  // namespace attx
