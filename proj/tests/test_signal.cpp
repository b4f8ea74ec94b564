#define DOCTEST_CONFIG_IMPLEMENT_WITH_MAIN
#include <doctest.h>

#include "attx/biquad.hpp"
#include "attx/diag.hpp"
#include "attx/pipeline.hpp"
#include "attx/rng.hpp"

#include <cmath>
#include <complex>
#include <numeric>

using namespace attx;

namespace {

double db(double mag) { return 20.0 * std::log10(mag); }

// Periodogram power at one frequency (white-noise band-power oracle).
double power_at(const std::vector<double>& x, double f_hz, double fs_hz) {
    std::complex<double> acc(0, 0);
    for (std::size_t n = 0; n < x.size(); ++n)
        acc += x[n] * std::exp(std::complex<double>(0, -2.0 * M_PI * f_hz * n / fs_hz));
    return std::norm(acc) / static_cast<double>(x.size());
}

double band_power(const std::vector<double>& x, double lo, double hi, double fs, int probes) {
    double acc = 0;
    for (int i = 0; i < probes; ++i)
        acc += power_at(x, lo + (hi - lo) * (i + 0.5) / probes, fs);
    return acc / probes;
}

}  // namespace

TEST_CASE("butterworth lowpass: DC gain is 1") {
    auto f = design_butterworth(FilterKind::lowpass, 4, {3.0}, 700.0);
    CHECK(std::abs(std::abs(f.response(0.0, 700.0)) - 1.0) < 1e-9);
    CHECK(f.stable());
    // -3 dB at the cutoff
    CHECK(std::abs(std::abs(f.response(3.0, 700.0)) - std::sqrt(0.5)) < 1e-6);
}

TEST_CASE("butterworth bandpass: blocks DC and Nyquist") {
    auto f = design_butterworth(FilterKind::bandpass, 4, {5.0, 15.0}, 700.0);
    CHECK(std::abs(f.response(0.0, 700.0)) < 1e-9);
    CHECK(std::abs(f.response(350.0, 700.0)) < 1e-9);
    CHECK(f.stable());
}

TEST_CASE("butterworth bandpass: unit-circle response at center and stopband") {
    auto f = design_butterworth(FilterKind::bandpass, 4, {5.0, 15.0}, 700.0);
    const double center = std::abs(f.response(std::sqrt(75.0), 700.0));
    CHECK(std::abs(db(center)) < 1.0);
    CHECK(db(std::abs(f.response(1.0, 700.0))) < -20.0);
}

TEST_CASE("butterworth: cutoff at or above Nyquist is a design error") {
    CHECK_THROWS_AS(design_butterworth(FilterKind::lowpass, 4, {350.0}, 700.0),
                    std::invalid_argument);
    CHECK_THROWS_AS(design_butterworth(FilterKind::lowpass, 4, {400.0}, 700.0),
                    std::invalid_argument);
    CHECK_THROWS_AS(design_butterworth(FilterKind::bandpass, 4, {15.0, 5.0}, 700.0),
                    std::invalid_argument);
    CHECK_THROWS_AS(design_butterworth(FilterKind::lowpass, 4, {-1.0}, 700.0),
                    std::invalid_argument);
}

TEST_CASE("butterworth: every designed filter is stable (property sweep)") {
    for (int order : {1, 2, 3, 4, 5, 6, 8}) {
        for (double cut : {0.5, 3.0, 40.0, 115.2, 300.0}) {
            auto f = design_butterworth(FilterKind::lowpass, order, {cut}, 700.0);
            CHECK(f.stable());
        }
        for (auto band : {std::pair{0.5, 4.0}, {5.0, 15.0}, {20.0, 120.0}}) {
            auto f = design_butterworth(FilterKind::bandpass, order, {band.first, band.second},
                                        700.0);
            CHECK(f.stable());
        }
    }
}

TEST_CASE("filter_signal: identity cascade passes an impulse through") {
    BiquadCascade ident;
    ident.sections.push_back({});  // b0=1, everything else 0
    std::vector<double> x(16, 0.0);
    x[0] = 1.0;
    CHECK(filter_signal(x, ident) == x);
}

TEST_CASE("filter_signal: DC through the 3 Hz lowpass converges to the input level") {
    auto f = design_butterworth(FilterKind::lowpass, 4, {3.0}, 700.0);
    std::vector<double> x(7000, 2.5);
    auto y = filter_signal(x, f);
    REQUIRE(y.size() == x.size());
    CHECK(std::abs(y.back() - 2.5) < 1e-6);
}

TEST_CASE("filter_signal: bandpass attenuates out-of-band noise by >= 20 dB") {
    auto f = design_butterworth(FilterKind::bandpass, 4, {5.0, 15.0}, 700.0);
    Rng rng(31);
    std::vector<double> x(16384);
    for (double& v : x) v = rng.normal();
    auto y = filter_signal(x, f);

    const double pass = band_power(y, 6.0, 14.0, 700.0, 160);
    const double low_stop = band_power(y, 0.2, 2.0, 700.0, 80);
    const double high_stop = band_power(y, 30.0, 340.0, 700.0, 160);
    CHECK(10.0 * std::log10(pass / low_stop) >= 20.0);
    CHECK(10.0 * std::log10(pass / high_stop) >= 20.0);
}

TEST_CASE("zscore_subject") {
    CHECK(zscore_subject({-1.0, 1.0}) == std::vector<double>{-1.0, 1.0});

    const long before = warning_count();
    CHECK(zscore_subject({3.0, 3.0, 3.0}) == std::vector<double>{0.0, 0.0, 0.0});
    CHECK(warning_count() == before + 1);

    CHECK_THROWS_AS(zscore_subject({1.0}), std::invalid_argument);

    Rng rng(32);
    std::vector<double> x(5000);
    for (double& v : x) v = 3.0 + 2.0 * rng.normal();
    auto z = zscore_subject(x);
    double mean = std::accumulate(z.begin(), z.end(), 0.0) / z.size();
    double var = 0;
    for (double v : z) var += (v - mean) * (v - mean);
    var /= z.size();
    CHECK(std::abs(mean) < 1e-9);
    CHECK(std::abs(std::sqrt(var) - 1.0) < 1e-9);
}

TEST_CASE("resample: exact length arithmetic") {
    std::vector<double> x(7000, 1.0);
    auto y = resample(x, 700.0, 256.0);
    CHECK(y.size() == 2560);
    CHECK(resample({}, 700.0, 256.0).empty());
    // constant stays constant once the filter settles
    for (std::size_t i = y.size() / 2; i < y.size(); ++i)
        CHECK(y[i] == doctest::Approx(1.0).epsilon(1e-6));
}

TEST_CASE("resample: 8 Hz sinusoid amplitude preserved within 2%") {
    const double fs = 700.0, f0 = 8.0;
    std::vector<double> x(7000);
    for (std::size_t n = 0; n < x.size(); ++n) x[n] = std::sin(2.0 * M_PI * f0 * n / fs);
    auto y = resample(x, fs, 256.0);
    REQUIRE(y.size() == 2560);
    // quadrature amplitude estimate on the steady-state tail (skip 1 s)
    std::complex<double> acc(0, 0);
    const std::size_t skip = 256;
    for (std::size_t n = skip; n < y.size(); ++n)
        acc += y[n] * std::exp(std::complex<double>(0, -2.0 * M_PI * f0 * n / 256.0));
    const double amp = 2.0 * std::abs(acc) / static_cast<double>(y.size() - skip);
    CHECK(std::abs(amp - 1.0) < 0.02);
}

TEST_CASE("segment: counts and labels") {
    {
        std::vector<Condition> labels(2560, Condition::stress);
        auto w = segment(labels, 256.0, 10.0, 0.5);
        REQUIRE(w.size() == 1);
        CHECK(w[0].start == 0);
        CHECK(w[0].majority == Condition::stress);
    }
    {
        std::vector<Condition> labels(15360, Condition::stress);  // 60 s
        auto w = segment(labels, 256.0, 10.0, 0.5);
        CHECK(w.size() == 11);
        for (const auto& win : w) CHECK(win.majority == Condition::stress);
    }
    {
        // half/half window ties toward stress
        std::vector<Condition> labels(2560, Condition::neutral);
        std::fill(labels.begin() + 1280, labels.end(), Condition::stress);
        auto w = segment(labels, 256.0, 10.0, 0.5);
        REQUIRE(w.size() == 1);
        CHECK(w[0].majority == Condition::stress);
    }
}

TEST_CASE("segment: closed-form count over a sweep of lengths") {
    for (std::size_t n : {0u, 100u, 2559u, 2560u, 2561u, 3839u, 3840u, 10000u, 76800u}) {
        std::vector<Condition> labels(n, Condition::neutral);
        auto w = segment(labels, 256.0, 10.0, 0.5);
        CHECK(w.size() == window_count(n, 2560, 1280));
        const std::size_t expect = n >= 2560 ? (n - 2560) / 1280 + 1 : 0;
        CHECK(w.size() == expect);
    }
}

TEST_CASE("binarize") {
    CHECK(binarize(Condition::stress) == BinaryLabel::stress);
    CHECK(binarize(Condition::neutral) == BinaryLabel::non_stress);
    CHECK(binarize(Condition::amusement) == BinaryLabel::non_stress);
    CHECK_THROWS_AS(binarize(Condition::other), std::invalid_argument);
}

namespace {

SignalRecord make_record(const std::string& sid, Modality m, double fs, double seconds,
                         Condition c, std::uint64_t seed) {
    SignalRecord r;
    r.subject_id = sid;
    r.modality = m;
    r.fs_hz = fs;
    const auto n = static_cast<std::size_t>(seconds * fs);
    Rng rng(seed);
    r.samples.resize(n);
    for (std::size_t i = 0; i < n; ++i)
        r.samples[i] = std::sin(2.0 * M_PI * 7.0 * i / fs) + 0.1 * rng.normal();
    r.condition_labels.assign(n, c);
    return r;
}

}  // namespace

TEST_CASE("build_dataset: one subject, 60 s -> 11 pairs") {
    std::vector<SignalRecord> recs{make_record("s1", Modality::ecg, 700, 60, Condition::stress, 1),
                                   make_record("s1", Modality::eda, 700, 60, Condition::stress, 2)};
    auto ds = build_dataset(recs);
    CHECK(ds.size() == 11);
    for (const auto& wp : ds) {
        CHECK(wp.subject_id == "s1");
        CHECK(wp.ecg.size() == kWindowSamples);
        CHECK(wp.eda.size() == kWindowSamples);
        CHECK(wp.label == BinaryLabel::stress);
    }
}

TEST_CASE("build_dataset: zero-length recording yields nothing") {
    SignalRecord a, b;
    a.subject_id = b.subject_id = "s1";
    a.modality = Modality::ecg;
    b.modality = Modality::eda;
    a.fs_hz = b.fs_hz = 700;
    CHECK(build_dataset({a, b}).empty());
}

TEST_CASE("build_dataset: duration mismatch truncates to the common span") {
    std::vector<SignalRecord> recs{make_record("s1", Modality::ecg, 700, 60, Condition::neutral, 3),
                                   make_record("s1", Modality::eda, 700, 70, Condition::neutral, 4)};
    auto ds = build_dataset(recs);
    CHECK(ds.size() == 11);  // computed on 60 s for both
    for (const auto& wp : ds) CHECK(wp.label == BinaryLabel::non_stress);
}

TEST_CASE("build_dataset: subject missing a modality is skipped with a warning") {
    const long before = warning_count();
    std::vector<SignalRecord> recs{make_record("s1", Modality::ecg, 700, 30, Condition::stress, 5),
                                   make_record("s2", Modality::ecg, 700, 60, Condition::stress, 6),
                                   make_record("s2", Modality::eda, 700, 60, Condition::stress, 7)};
    auto ds = build_dataset(recs);
    CHECK(warning_count() > before);
    for (const auto& wp : ds) CHECK(wp.subject_id == "s2");
    CHECK(ds.size() == 11);
}

TEST_CASE("build_dataset: mixed segments discard majority-`other` windows") {
    auto ecg = make_record("s1", Modality::ecg, 700, 60, Condition::stress, 8);
    auto eda = make_record("s1", Modality::eda, 700, 60, Condition::stress, 9);
    // first 30 s are non-study time
    const std::size_t half = ecg.samples.size() / 2;
    std::fill(ecg.condition_labels.begin(), ecg.condition_labels.begin() + half, Condition::other);
    std::fill(eda.condition_labels.begin(), eda.condition_labels.begin() + half, Condition::other);
    auto ds = build_dataset({ecg, eda});
    CHECK(ds.size() < 11);
    for (const auto& wp : ds) CHECK(wp.label == BinaryLabel::stress);
}

TEST_CASE("pipeline normalizes after filtering (order is filter -> z-score)") {
    // A huge 100 Hz carrier rides on a small in-band tone. The EDA lowpass
    // removes the carrier before z-scoring, so windows come out O(0.1..1);
    // scoring first would leave them ~4 orders of magnitude smaller.
    SignalRecord ecg, eda;
    ecg.subject_id = eda.subject_id = "s1";
    ecg.modality = Modality::ecg;
    eda.modality = Modality::eda;
    ecg.fs_hz = eda.fs_hz = 700;
    const std::size_t n = 700 * 30;
    for (std::size_t i = 0; i < n; ++i) {
        const double t = static_cast<double>(i) / 700.0;
        ecg.samples.push_back(0.01 * std::sin(2 * M_PI * 7 * t) + 50.0 * std::sin(2 * M_PI * 100 * t));
        eda.samples.push_back(0.01 * std::sin(2 * M_PI * 1 * t) + 50.0 * std::sin(2 * M_PI * 100 * t));
    }
    ecg.condition_labels.assign(n, Condition::stress);
    eda.condition_labels.assign(n, Condition::stress);
    auto ds = build_dataset({ecg, eda});
    REQUIRE(!ds.empty());
    double peak = 0;
    for (double v : ds.back().eda) peak = std::max(peak, std::abs(v));
    CHECK(peak > 0.1);
    CHECK(peak < 3.0);
}
