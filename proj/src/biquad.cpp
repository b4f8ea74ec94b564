#include "attx/biquad.hpp"

#include <algorithm>
#include <cmath>
#include <stdexcept>

namespace attx {

namespace {

using cplx = std::complex<double>;

struct Zpk {
    std::vector<cplx> zeros, poles;
    double gain = 1.0;
};

// Analog Butterworth prototype, cutoff 1 rad/s: poles on the left unit
// semicircle, no finite zeros, gain 1.
Zpk prototype(int order) {
    Zpk f;
    for (int k = 1; k <= order; ++k) {
        const double theta = M_PI * (2.0 * k + order - 1.0) / (2.0 * order);
        f.poles.emplace_back(std::cos(theta), std::sin(theta));
    }
    return f;
}

void lp_to_lp(Zpk& f, double wo) {
    for (auto& p : f.poles) p *= wo;
    f.gain *= std::pow(wo, static_cast<double>(f.poles.size() - f.zeros.size()));
}

void lp_to_bp(Zpk& f, double wo, double bw) {
    const std::size_t degree = f.poles.size() - f.zeros.size();
    std::vector<cplx> poles;
    for (const cplx& p : f.poles) {
        const cplx ps = p * (bw / 2.0);
        const cplx d = std::sqrt(ps * ps - wo * wo);
        poles.push_back(ps + d);
        poles.push_back(ps - d);
    }
    f.poles = std::move(poles);
    // prototype zeros at infinity map to `degree` zeros at s = 0
    f.zeros.assign(degree, cplx(0.0, 0.0));
    f.gain *= std::pow(bw, static_cast<double>(degree));
}

void bilinear(Zpk& f, double fs_hz) {
    const double fs2 = 2.0 * fs_hz;
    cplx num(1.0, 0.0), den(1.0, 0.0);
    for (const cplx& z : f.zeros) num *= (fs2 - z);
    for (const cplx& p : f.poles) den *= (fs2 - p);
    const std::size_t degree = f.poles.size() - f.zeros.size();
    for (auto& z : f.zeros) z = (fs2 + z) / (fs2 - z);
    for (auto& p : f.poles) p = (fs2 + p) / (fs2 - p);
    // zeros at infinity land at z = -1
    f.zeros.insert(f.zeros.end(), degree, cplx(-1.0, 0.0));
    f.gain *= (num / den).real();
}

// Group complex roots into conjugate pairs and real roots into pairs (one
// may remain single). Returns pairs as (first, second, is_single).
struct RootPair {
    cplx a, b;
    bool single = false;
};

std::vector<RootPair> pair_roots(std::vector<cplx> roots) {
    std::vector<RootPair> out;
    std::vector<cplx> reals, complexes;
    for (const cplx& r : roots)
        (std::fabs(r.imag()) < 1e-12 ? reals : complexes).push_back(r);

    std::sort(complexes.begin(), complexes.end(),
              [](const cplx& x, const cplx& y) { return x.imag() < y.imag(); });
    std::vector<cplx> upper;
    for (const cplx& c : complexes)
        if (c.imag() > 0) upper.push_back(c);
    if (2 * upper.size() != complexes.size())
        throw std::runtime_error("filter design: complex roots not in conjugate pairs");
    for (const cplx& c : upper) out.push_back({c, std::conj(c), false});

    std::sort(reals.begin(), reals.end(),
              [](const cplx& x, const cplx& y) { return x.real() < y.real(); });
    for (std::size_t i = 0; i + 1 < reals.size(); i += 2) out.push_back({reals[i], reals[i + 1], false});
    if (reals.size() % 2 == 1) out.push_back({reals.back(), 0.0, true});
    return out;
}

BiquadCascade zpk_to_sos(const Zpk& f) {
    auto poles = pair_roots(f.poles);
    auto zeros = pair_roots(f.zeros);
    if (zeros.size() > poles.size())
        throw std::runtime_error("filter design: more zero pairs than pole pairs");

    BiquadCascade c;
    c.gain = f.gain;
    for (std::size_t i = 0; i < poles.size(); ++i) {
        Biquad s;
        const RootPair& pp = poles[i];
        if (pp.single) {
            s.a1 = -pp.a.real();
            s.a2 = 0.0;
        } else {
            s.a1 = -2.0 * pp.a.real();
            s.a2 = std::norm(pp.a);
        }
        if (i < zeros.size()) {
            const RootPair& zp = zeros[i];
            if (zp.single) {
                s.b0 = 1.0;
                s.b1 = -zp.a.real();
                s.b2 = 0.0;
            } else {
                s.b0 = 1.0;
                s.b1 = -(zp.a + zp.b).real();
                s.b2 = (zp.a * zp.b).real();
            }
        }
        c.sections.push_back(s);
    }
    return c;
}

}  // namespace

std::complex<double> BiquadCascade::response(double freq_hz, double fs_hz) const {
    const double w = 2.0 * M_PI * freq_hz / fs_hz;
    const cplx zinv = std::exp(cplx(0.0, -w));
    cplx h(gain, 0.0);
    for (const Biquad& s : sections) {
        const cplx num = s.b0 + s.b1 * zinv + s.b2 * zinv * zinv;
        const cplx den = 1.0 + s.a1 * zinv + s.a2 * zinv * zinv;
        h *= num / den;
    }
    return h;
}

bool BiquadCascade::stable() const {
    for (const Biquad& s : sections) {
        // poles of z^2 + a1 z + a2 inside unit circle iff |a2| < 1, |a1| < 1 + a2
        if (!(std::fabs(s.a2) < 1.0 && std::fabs(s.a1) < 1.0 + s.a2)) return false;
    }
    return true;
}

BiquadCascade design_butterworth(FilterKind kind, int order, const std::vector<double>& cutoffs_hz,
                                 double fs_hz) {
    if (order < 1) throw std::invalid_argument("filter order must be >= 1");
    if (fs_hz <= 0) throw std::invalid_argument("sample rate must be positive");
    const double nyq = fs_hz / 2.0;
    for (double c : cutoffs_hz)
        if (c <= 0.0 || c >= nyq)
            throw std::invalid_argument("cutoff must lie strictly between 0 and Nyquist");

    auto warp = [&](double f_hz) { return 2.0 * fs_hz * std::tan(M_PI * f_hz / fs_hz); };

    Zpk f = prototype(order);
    if (kind == FilterKind::lowpass) {
        if (cutoffs_hz.size() != 1) throw std::invalid_argument("lowpass takes one cutoff");
        lp_to_lp(f, warp(cutoffs_hz[0]));
    } else {
        if (cutoffs_hz.size() != 2 || cutoffs_hz[0] >= cutoffs_hz[1])
            throw std::invalid_argument("bandpass takes cutoffs low < high");
        const double w1 = warp(cutoffs_hz[0]), w2 = warp(cutoffs_hz[1]);
        lp_to_bp(f, std::sqrt(w1 * w2), w2 - w1);
    }
    bilinear(f, fs_hz);
    BiquadCascade c = zpk_to_sos(f);
    if (!c.stable()) throw std::runtime_error("filter design produced unstable sections");
    return c;
}

std::vector<double> filter_signal(const std::vector<double>& x, const BiquadCascade& f) {
    std::vector<double> y = x;
    for (const Biquad& s : f.sections) {
        double s1 = 0.0, s2 = 0.0;  // direct form II transposed
        for (double& v : y) {
            const double in = v;
            const double out = s.b0 * in + s1;
            s1 = s.b1 * in - s.a1 * out + s2;
            s2 = s.b2 * in - s.a2 * out;
            v = out;
        }
    }
    for (double& v : y) v *= f.gain;
    return y;
}

std::vector<double> filtfilt(const std::vector<double>& x, const BiquadCascade& f) {
    std::vector<double> y = filter_signal(x, f);
    std::reverse(y.begin(), y.end());
    y = filter_signal(y, f);
    std::reverse(y.begin(), y.end());
    return y;
}

}  // namespace attx
