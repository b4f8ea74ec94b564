#pragma once

#include <array>
#include <cstdint>
#include <string>
#include <vector>

namespace attx {

enum class Condition : std::uint8_t { other = 0, neutral = 1, stress = 2, amusement = 3 };
enum class BinaryLabel : std::uint8_t { non_stress = 0, stress = 1 };
enum class Modality { ecg, eda };

// One subject's continuous recording for one modality, with per-sample
// condition codes aligned to the samples.
struct SignalRecord {
    std::string subject_id;
    Modality modality = Modality::ecg;
    double fs_hz = 0.0;
    std::vector<double> samples;
    std::vector<Condition> condition_labels;
};

inline constexpr std::size_t kWindowSamples = 2560;  // 10 s at 256 Hz

// Aligned 10 s ECG/EDA windows with one binary label: the training unit.
struct WindowPair {
    std::string subject_id;
    std::vector<double> ecg, eda;
    BinaryLabel label = BinaryLabel::non_stress;
};

struct PipelineConfig {
    std::array<double, 2> ecg_band_hz{5.0, 15.0};
    double eda_cutoff_hz = 3.0;
    int filter_order = 4;
    bool zero_phase = false;
    double resample_to_hz = 256.0;
    int antialias_order = 8;
    double antialias_frac = 0.45;  // anti-alias cutoff as a fraction of the target rate
    double window_s = 10.0;
    double overlap = 0.5;
};

// (x - mean) / max(std, 1e-8), population std over the whole recording.
// A constant signal maps to zeros with a warning.
std::vector<double> zscore_subject(const std::vector<double>& x);

// Anti-alias lowpass then linear interpolation at the new instants.
// Output length = floor(len * to_hz / from_hz).
std::vector<double> resample(const std::vector<double>& x, double from_hz, double to_hz,
                             int antialias_order = 8, double antialias_frac = 0.45);
// Nearest-neighbour label pick at the same instants as resample().
std::vector<Condition> resample_labels(const std::vector<Condition>& labels, double from_hz,
                                       double to_hz);

struct Window {
    std::size_t start = 0;
    Condition majority = Condition::other;
};

// Window starts plus the majority condition code per window; hop is
// window*(1-overlap). Ties resolve in the order stress, neutral, amusement,
// other.
std::vector<Window> segment(const std::vector<Condition>& labels, double fs_hz, double window_s,
                            double overlap);

std::size_t window_count(std::size_t n, std::size_t window, std::size_t hop);

// stress -> stress; neutral, amusement -> non_stress; `other` must have been
// discarded upstream and throws here.
BinaryLabel binarize(Condition c);

// Full per-subject chain: filter -> z-score -> resample -> segment, ECG and
// EDA windows paired by start index. Subjects missing a modality are skipped
// with a warning; length mismatches truncate to the common span.
std::vector<WindowPair> build_dataset(const std::vector<SignalRecord>& records,
                                      const PipelineConfig& cfg = {});

}  // namespace attx
