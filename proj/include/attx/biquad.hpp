#pragma once

#include <complex>
#include <vector>

namespace attx {

struct Biquad {
    double b0 = 1.0, b1 = 0.0, b2 = 0.0;  // numerator
    double a1 = 0.0, a2 = 0.0;            // denominator, a0 normalized to 1
};

// Cascade of second-order sections with one overall gain.
struct BiquadCascade {
    std::vector<Biquad> sections;
    double gain = 1.0;

    std::complex<double> response(double freq_hz, double fs_hz) const;
    // all poles strictly inside the unit circle
    bool stable() const;
};

enum class FilterKind { lowpass, bandpass };

// Butterworth design: analog prototype -> frequency pre-warp -> bilinear
// transform -> conjugate-paired second-order sections. `order` is the
// prototype order (a bandpass of order N has 2N poles).
BiquadCascade design_butterworth(FilterKind kind, int order, const std::vector<double>& cutoffs_hz,
                                 double fs_hz);

// Causal forward filtering, zero initial state, output length == input length.
std::vector<double> filter_signal(const std::vector<double>& x, const BiquadCascade& f);

// Forward-backward pass for zero phase; squares the magnitude response.
std::vector<double> filtfilt(const std::vector<double>& x, const BiquadCascade& f);

}  // namespace attx
