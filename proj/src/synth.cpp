#include "attx/synth.hpp"

#include "attx/rng.hpp"

#include <algorithm>
#include <cmath>
#include <stdexcept>

namespace attx {

namespace {

constexpr double kSegmentSeconds = 48.0;

// ECG pulse train
constexpr double kPulseSigma = 0.022;     // s, gaussian-derivative wavelet width
constexpr double kHrvJitter = 0.03;       // per-beat gap jitter
constexpr double kRateStressGain = 0.10;  // heart-rate bump under stress
constexpr double kRateJitter = 0.09;      // per-segment lognormal rate jitter
constexpr double kAmpGain = 0.4;          // latent-bit amplitude swing (both modalities)
constexpr double kBeatAmpJitter = 0.02;

// EDA skin-conductance responses
constexpr double kScrRateNon = 0.32;     // events/s
constexpr double kScrRateStress = 0.40;  // events/s when the rate cue is on
constexpr double kScrRateFlat = 0.36;    // events/s when the cue is disabled
constexpr double kScrRateJitter = 0.19;  // per-segment lognormal jitter
constexpr double kScrRise = 0.7;         // s
constexpr double kScrDecay = 4.0;        // s
constexpr double kScrHeight = 0.8;
constexpr double kScrHeightJitter = 0.05;

double scr_peak_norm() {
    double peak = 0.0;
    for (double t = 0.0; t < 6.0; t += 1e-3)
        peak = std::max(peak, (1.0 - std::exp(-t / kScrRise)) * std::exp(-t / kScrDecay));
    return peak;
}

struct Segment {
    Condition condition;
    bool u, v;       // amplitude bits
    double rate_mul; // ECG rate multiplier including jitter
    double scr_rate; // EDA event rate including jitter
};

std::vector<Segment> plan_segments(const SyntheticSpec& spec, std::size_t subject_index,
                                   Rng& rng) {
    const auto n_seg =
        static_cast<std::size_t>(std::ceil(spec.duration_s / kSegmentSeconds));
    // alternate floor/ceil across subjects so the aggregate matches the balance
    const double want = static_cast<double>(n_seg) * spec.class_balance;
    const std::size_t n_stress = subject_index % 2 == 0
                                     ? static_cast<std::size_t>(std::floor(want))
                                     : std::min<std::size_t>(
                                           n_seg, static_cast<std::size_t>(std::ceil(want)));

    std::vector<Condition> conditions;
    for (std::size_t i = 0; i < n_seg; ++i) {
        if (i < n_stress)
            conditions.push_back(Condition::stress);
        else
            conditions.push_back((i - n_stress) % 2 == 0 ? Condition::neutral
                                                         : Condition::amusement);
    }
    rng.shuffle(conditions);

    const bool ecg_cue = spec.cross_modal_mode != CrossModalMode::eda_only;
    const bool eda_cue = spec.cross_modal_mode != CrossModalMode::ecg_only;

    std::vector<Segment> out;
    for (Condition c : conditions) {
        Segment s;
        s.condition = c;
        const bool stress = c == Condition::stress;
        switch (spec.cross_modal_mode) {
            case CrossModalMode::redundant:
                s.u = s.v = stress;
                break;
            case CrossModalMode::complementary: {
                // u is a fair coin, v = u XOR class: either bit alone is noise
                s.u = rng.uniform() < 0.5;
                s.v = s.u != stress;
                break;
            }
            case CrossModalMode::ecg_only:
                s.u = stress;
                s.v = rng.uniform() < 0.5;
                break;
            case CrossModalMode::eda_only:
                s.v = stress;
                s.u = rng.uniform() < 0.5;
                break;
        }
        s.rate_mul = (ecg_cue && stress ? 1.0 + kRateStressGain : 1.0) *
                     std::exp(kRateJitter * rng.normal());
        const double base_rate =
            eda_cue ? (stress ? kScrRateStress : kScrRateNon) : kScrRateFlat;
        s.scr_rate = base_rate * std::exp(kScrRateJitter * rng.normal());
        out.push_back(s);
    }
    return out;
}

void add_noise(std::vector<double>& x, double snr_db, Rng& rng) {
    double power = 0.0;
    for (double v : x) power += v * v;
    power /= static_cast<double>(x.size());
    const double sigma = std::sqrt(power / std::pow(10.0, snr_db / 10.0));
    for (double& v : x) v += sigma * rng.normal();
}

std::vector<double> make_ecg(const SyntheticSpec& spec, const std::vector<Segment>& segments,
                             double base_rate_hz, std::size_t n, Rng& rng) {
    std::vector<double> x(n, 0.0);
    const double fs = spec.fs_hz;
    auto segment_at = [&](double t) {
        auto idx = static_cast<std::size_t>(t / kSegmentSeconds);
        return std::min(idx, segments.size() - 1);
    };
    double t = 0.25 / base_rate_hz;
    while (t < spec.duration_s) {
        const Segment& seg = segments[segment_at(t)];
        const double amp = (1.0 + kAmpGain * (seg.u ? 1.0 : -1.0)) *
                           (1.0 + kBeatAmpJitter * rng.normal());
        // gaussian-derivative wavelet centered on the beat
        const auto center = static_cast<long>(t * fs);
        const auto span = static_cast<long>(5.0 * kPulseSigma * fs);
        for (long i = center - span; i <= center + span; ++i) {
            if (i < 0 || i >= static_cast<long>(n)) continue;
            const double tau = (static_cast<double>(i) / fs) - t;
            x[static_cast<std::size_t>(i)] +=
                amp * -(tau / kPulseSigma) * std::exp(0.5 - tau * tau / (2.0 * kPulseSigma * kPulseSigma));
        }
        const double rate = base_rate_hz * seg.rate_mul;
        t += (1.0 / rate) * (1.0 + kHrvJitter * rng.normal());
    }
    add_noise(x, spec.snr_db, rng);
    return x;
}

std::vector<double> make_eda(const SyntheticSpec& spec, const std::vector<Segment>& segments,
                             double drift_phase, std::size_t n, Rng& rng) {
    const double fs = spec.fs_hz;
    std::vector<double> x(n);
    for (std::size_t i = 0; i < n; ++i) {
        const double t = static_cast<double>(i) / fs;
        x[i] = 2.0 + 0.3 * std::sin(2.0 * M_PI * 0.03 * t + drift_phase);
    }
    auto segment_at = [&](double t) {
        auto idx = static_cast<std::size_t>(t / kSegmentSeconds);
        return std::min(idx, segments.size() - 1);
    };
    const double norm = scr_peak_norm();
    double t = 0.5;
    while (t < spec.duration_s) {
        const Segment& seg = segments[segment_at(t)];
        const double h = kScrHeight * (1.0 + kAmpGain * (seg.v ? 1.0 : -1.0)) *
                         (1.0 + kScrHeightJitter * rng.normal());
        const auto start = static_cast<long>(t * fs);
        const auto span = static_cast<long>(20.0 * fs);
        for (long i = start; i < start + span && i < static_cast<long>(n); ++i) {
            const double tau = (static_cast<double>(i) / fs) - t;
            if (tau < 0) continue;
            x[static_cast<std::size_t>(i)] +=
                h / norm * (1.0 - std::exp(-tau / kScrRise)) * std::exp(-tau / kScrDecay);
        }
        // quasi-periodic arrivals: every window holds at least one event
        t += (1.0 / seg.scr_rate) * (0.7 + 0.6 * rng.uniform());
    }
    add_noise(x, spec.snr_db + 10.0, rng);
    return x;
}

}  // namespace

const char* cross_modal_mode_name(CrossModalMode m) {
    switch (m) {
        case CrossModalMode::redundant: return "redundant";
        case CrossModalMode::complementary: return "complementary";
        case CrossModalMode::ecg_only: return "ecg_only";
        case CrossModalMode::eda_only: return "eda_only";
    }
    return "?";
}

CrossModalMode cross_modal_mode_from_name(const std::string& name) {
    if (name == "redundant") return CrossModalMode::redundant;
    if (name == "complementary") return CrossModalMode::complementary;
    if (name == "ecg_only") return CrossModalMode::ecg_only;
    if (name == "eda_only") return CrossModalMode::eda_only;
    throw std::invalid_argument("unknown cross_modal_mode: " + name);
}

std::vector<SignalRecord> generate_synthetic(const SyntheticSpec& spec) {
    if (spec.n_subjects == 0 || spec.duration_s <= 0 || spec.fs_hz <= 0)
        throw std::invalid_argument("generate_synthetic: invalid spec");
    if (spec.class_balance < 0.0 || spec.class_balance > 1.0)
        throw std::invalid_argument("generate_synthetic: class_balance must be in [0,1]");

    std::vector<SignalRecord> out;
    const auto n = static_cast<std::size_t>(spec.duration_s * spec.fs_hz);
    for (std::size_t s = 0; s < spec.n_subjects; ++s) {
        char sid[16];
        std::snprintf(sid, sizeof sid, "synth%02zu", s + 1);

        Rng seg_rng(spec.seed, std::string("synth/") + sid + "/segments");
        const std::vector<Segment> segments = plan_segments(spec, s, seg_rng);

        Rng ecg_rng(spec.seed, std::string("synth/") + sid + "/ecg");
        const double base_rate = 0.9 + 0.35 * ecg_rng.uniform();  // 54..75 bpm
        Rng eda_rng(spec.seed, std::string("synth/") + sid + "/eda");
        const double drift_phase = 2.0 * M_PI * eda_rng.uniform();

        std::vector<Condition> labels(n);
        for (std::size_t i = 0; i < n; ++i) {
            const double t = static_cast<double>(i) / spec.fs_hz;
            auto idx = std::min(static_cast<std::size_t>(t / kSegmentSeconds),
                                segments.size() - 1);
            labels[i] = segments[idx].condition;
        }

        SignalRecord ecg;
        ecg.subject_id = sid;
        ecg.modality = Modality::ecg;
        ecg.fs_hz = spec.fs_hz;
        ecg.samples = make_ecg(spec, segments, base_rate, n, ecg_rng);
        ecg.condition_labels = labels;

        SignalRecord eda;
        eda.subject_id = sid;
        eda.modality = Modality::eda;
        eda.fs_hz = spec.fs_hz;
        eda.samples = make_eda(spec, segments, drift_phase, n, eda_rng);
        eda.condition_labels = std::move(labels);

        out.push_back(std::move(ecg));
        out.push_back(std::move(eda));
    }
    return out;
}

}  // namespace attx
