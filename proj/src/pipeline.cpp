#include "attx/pipeline.hpp"

#include "attx/biquad.hpp"
#include "attx/diag.hpp"

#include <algorithm>
#include <cmath>
#include <map>
#include <stdexcept>

namespace attx {

std::vector<double> zscore_subject(const std::vector<double>& x) {
    if (x.size() < 2) throw std::invalid_argument("zscore_subject: need at least 2 samples");
    const double n = static_cast<double>(x.size());
    double mean = 0.0;
    for (double v : x) mean += v;
    mean /= n;
    double var = 0.0;
    for (double v : x) var += (v - mean) * (v - mean);
    const double sd = std::sqrt(var / n);
    if (sd < 1e-8) warn("zscore_subject: constant signal, returning zeros");
    const double denom = std::max(sd, 1e-8);
    std::vector<double> out(x.size());
    for (std::size_t i = 0; i < x.size(); ++i) out[i] = (x[i] - mean) / denom;
    if (sd < 1e-8) std::fill(out.begin(), out.end(), 0.0);
    return out;
}

std::vector<double> resample(const std::vector<double>& x, double from_hz, double to_hz,
                             int antialias_order, double antialias_frac) {
    if (x.empty()) return {};
    if (from_hz <= 0 || to_hz <= 0) throw std::invalid_argument("resample: rates must be positive");
    if (to_hz >= from_hz) throw std::invalid_argument("resample: expects a decimation path");

    const BiquadCascade aa = design_butterworth(FilterKind::lowpass, antialias_order,
                                                {antialias_frac * to_hz}, from_hz);
    const std::vector<double> filtered = filter_signal(x, aa);

    const std::size_t out_len =
        static_cast<std::size_t>(std::floor(static_cast<double>(x.size()) * to_hz / from_hz));
    std::vector<double> out(out_len);
    const double ratio = from_hz / to_hz;
    const std::size_t last = filtered.size() - 1;
    for (std::size_t k = 0; k < out_len; ++k) {
        const double pos = static_cast<double>(k) * ratio;
        std::size_t i0 = static_cast<std::size_t>(pos);
        if (i0 >= last) {
            out[k] = filtered[last];
            continue;
        }
        const double frac = pos - static_cast<double>(i0);
        out[k] = filtered[i0] + frac * (filtered[i0 + 1] - filtered[i0]);
    }
    return out;
}

std::vector<Condition> resample_labels(const std::vector<Condition>& labels, double from_hz,
                                       double to_hz) {
    if (labels.empty()) return {};
    const std::size_t out_len =
        static_cast<std::size_t>(std::floor(static_cast<double>(labels.size()) * to_hz / from_hz));
    std::vector<Condition> out(out_len);
    const double ratio = from_hz / to_hz;
    for (std::size_t k = 0; k < out_len; ++k) {
        auto idx = static_cast<std::size_t>(std::llround(static_cast<double>(k) * ratio));
        out[k] = labels[std::min(idx, labels.size() - 1)];
    }
    return out;
}

std::size_t window_count(std::size_t n, std::size_t window, std::size_t hop) {
    return n >= window ? (n - window) / hop + 1 : 0;
}

std::vector<Window> segment(const std::vector<Condition>& labels, double fs_hz, double window_s,
                            double overlap) {
    const auto w = static_cast<std::size_t>(std::llround(window_s * fs_hz));
    const auto h = static_cast<std::size_t>(std::llround(static_cast<double>(w) * (1.0 - overlap)));
    if (w == 0 || h == 0) throw std::invalid_argument("segment: empty window or hop");

    std::vector<Window> out;
    const std::size_t count = window_count(labels.size(), w, h);
    for (std::size_t i = 0; i < count; ++i) {
        const std::size_t start = i * h;
        std::size_t counts[4] = {0, 0, 0, 0};
        for (std::size_t j = start; j < start + w; ++j)
            ++counts[static_cast<std::size_t>(labels[j])];
        // tie priority: stress, neutral, amusement, other
        const Condition order[4] = {Condition::stress, Condition::neutral, Condition::amusement,
                                    Condition::other};
        Condition best = Condition::stress;
        std::size_t best_count = 0;
        for (Condition c : order) {
            const std::size_t cc = counts[static_cast<std::size_t>(c)];
            if (cc > best_count) {
                best = c;
                best_count = cc;
            }
        }
        out.push_back({start, best});
    }
    return out;
}

BinaryLabel binarize(Condition c) {
    switch (c) {
        case Condition::stress:
            return BinaryLabel::stress;
        case Condition::neutral:
        case Condition::amusement:
            return BinaryLabel::non_stress;
        case Condition::other:
            break;
    }
    throw std::invalid_argument("binarize: `other` windows must be discarded upstream");
}

namespace {

std::vector<double> clean(const std::vector<double>& x, Modality m, double fs,
                          const PipelineConfig& cfg) {
    BiquadCascade f =
        m == Modality::ecg
            ? design_butterworth(FilterKind::bandpass, cfg.filter_order,
                                 {cfg.ecg_band_hz[0], cfg.ecg_band_hz[1]}, fs)
            : design_butterworth(FilterKind::lowpass, cfg.filter_order, {cfg.eda_cutoff_hz}, fs);
    std::vector<double> y = cfg.zero_phase ? filtfilt(x, f) : filter_signal(x, f);
    y = zscore_subject(y);
    return resample(y, fs, cfg.resample_to_hz, cfg.antialias_order, cfg.antialias_frac);
}

}  // namespace

std::vector<WindowPair> build_dataset(const std::vector<SignalRecord>& records,
                                      const PipelineConfig& cfg) {
    std::map<std::string, std::pair<const SignalRecord*, const SignalRecord*>> by_subject;
    for (const SignalRecord& r : records) {
        auto& slot = by_subject[r.subject_id];
        (r.modality == Modality::ecg ? slot.first : slot.second) = &r;
    }

    std::vector<WindowPair> out;
    for (const auto& [sid, pair] : by_subject) {
        const SignalRecord* ecg = pair.first;
        const SignalRecord* eda = pair.second;
        if (!ecg || !eda) {
            warn("subject " + sid + " is missing a modality, skipped");
            continue;
        }
        if (ecg->fs_hz != eda->fs_hz)
            throw std::invalid_argument("subject " + sid + ": modality sample rates differ");
        if (ecg->samples.size() != ecg->condition_labels.size() ||
            eda->samples.size() != eda->condition_labels.size())
            throw std::invalid_argument("subject " + sid + ": labels not aligned to samples");

        const std::size_t n = std::min(ecg->samples.size(), eda->samples.size());
        if (n < 2) continue;

        std::vector<double> ecg_raw(ecg->samples.begin(), ecg->samples.begin() + n);
        std::vector<double> eda_raw(eda->samples.begin(), eda->samples.begin() + n);
        std::vector<Condition> labels(ecg->condition_labels.begin(),
                                      ecg->condition_labels.begin() + n);

        const std::vector<double> ecg_rs = clean(ecg_raw, Modality::ecg, ecg->fs_hz, cfg);
        const std::vector<double> eda_rs = clean(eda_raw, Modality::eda, eda->fs_hz, cfg);
        const std::vector<Condition> lab_rs = resample_labels(labels, ecg->fs_hz, cfg.resample_to_hz);

        const auto w = static_cast<std::size_t>(std::llround(cfg.window_s * cfg.resample_to_hz));
        for (const Window& win : segment(lab_rs, cfg.resample_to_hz, cfg.window_s, cfg.overlap)) {
            if (win.majority == Condition::other) continue;
            if (win.start + w > ecg_rs.size() || win.start + w > eda_rs.size()) break;
            WindowPair wp;
            wp.subject_id = sid;
            wp.ecg.assign(ecg_rs.begin() + static_cast<std::ptrdiff_t>(win.start),
                          ecg_rs.begin() + static_cast<std::ptrdiff_t>(win.start + w));
            wp.eda.assign(eda_rs.begin() + static_cast<std::ptrdiff_t>(win.start),
                          eda_rs.begin() + static_cast<std::ptrdiff_t>(win.start + w));
            wp.label = binarize(win.majority);
            out.push_back(std::move(wp));
        }
    }
    return out;
}

}  // namespace attx
