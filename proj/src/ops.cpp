#include "attx/ops.hpp"

#include "attx/kernels.hpp"

#include <algorithm>
#include <cmath>
#include <stdexcept>
#include <string>

namespace attx::ops {

namespace {

using kernels::active;

bool want_grad(Tape& tape, std::initializer_list<const Tensor*> ins) {
    if (!tape.recording()) return false;
    for (const Tensor* t : ins)
        if (t->requires_grad()) return true;
    return false;
}

void check_ndim(const Tensor& t, std::size_t n, const char* what) {
    if (t.ndim() != n)
        throw std::invalid_argument(std::string(what) + ": expected rank " + std::to_string(n) +
                                    ", got " + std::to_string(t.ndim()));
}

std::size_t normalize_axis(int axis, std::size_t ndim) {
    const int n = static_cast<int>(ndim);
    if (axis < -n || axis >= n) throw std::invalid_argument("axis out of range");
    return static_cast<std::size_t>(axis < 0 ? axis + n : axis);
}

}  // namespace

// ---------------------------------------------------------------------------
// conv1d

Tensor conv1d(Tape& tape, const Tensor& x, const Tensor& kernel, const Tensor& bias,
              int stride, Padding padding) {
    check_ndim(x, 3, "conv1d input");
    check_ndim(kernel, 3, "conv1d kernel");
    check_ndim(bias, 1, "conv1d bias");
    if (stride < 1) throw std::invalid_argument("conv1d: stride must be >= 1");

    const std::size_t batch = x.extent(0), time = x.extent(1), ch_in = x.extent(2);
    const std::size_t k = kernel.extent(0), ch_out = kernel.extent(2);
    if (kernel.extent(1) != ch_in)
        throw std::invalid_argument("conv1d: kernel ch_in " + std::to_string(kernel.extent(1)) +
                                    " does not match input ch_in " + std::to_string(ch_in));
    if (bias.extent(0) != ch_out) throw std::invalid_argument("conv1d: bias/ch_out mismatch");

    const auto s = static_cast<std::size_t>(stride);
    std::size_t time_out;
    std::size_t pad_left = 0;
    if (padding == Padding::same) {
        time_out = (time + s - 1) / s;
        const std::size_t span = (time_out - 1) * s + k;
        const std::size_t pad_total = span > time ? span - time : 0;
        pad_left = pad_total / 2;
    } else {
        if (k > time) throw std::invalid_argument("conv1d: kernel longer than input (valid)");
        time_out = (time - k) / s + 1;
    }

    Tensor out = Tensor::zeros({batch, time_out, ch_out},
                               want_grad(tape, {&x, &kernel, &bias}));

    const auto& K = active();
    const double* xd = x.data();
    const double* kd = kernel.data();
    double* od = out.vec().data();
    for (std::size_t b = 0; b < batch; ++b) {
        const double* xb = xd + b * time * ch_in;
        double* ob = od + b * time_out * ch_out;
        for (std::size_t to = 0; to < time_out; ++to) {
            double* orow = ob + to * ch_out;
            for (std::size_t c = 0; c < ch_out; ++c) orow[c] = bias.data()[c];
            for (std::size_t kk = 0; kk < k; ++kk) {
                const std::size_t tpad = to * s + kk;
                if (tpad < pad_left) continue;
                const std::size_t ti = tpad - pad_left;
                if (ti >= time) continue;
                const double* xrow = xb + ti * ch_in;
                const double* krow = kd + kk * ch_in * ch_out;
                for (std::size_t ci = 0; ci < ch_in; ++ci)
                    K.axpy(xrow[ci], krow + ci * ch_out, orow, ch_out);
            }
        }
    }

    if (out.requires_grad()) {
        Tensor xi = x, ki = kernel, bi = bias, oi = out;
        tape.record([xi, ki, bi, oi, batch, time, ch_in, k, ch_out, time_out, s,
                     pad_left]() mutable {
            if (!oi.has_grad()) return;
            const auto& K = active();
            const double* og = oi.grad();
            const bool gx = xi.requires_grad(), gk = ki.requires_grad(), gb = bi.requires_grad();
            double* xg = gx ? xi.grad() : nullptr;
            double* kg = gk ? ki.grad() : nullptr;
            double* bg = gb ? bi.grad() : nullptr;
            const double* xd = xi.data();
            const double* kd = ki.data();
            for (std::size_t b = 0; b < batch; ++b) {
                const double* xb = xd + b * time * ch_in;
                const double* ogb = og + b * time_out * ch_out;
                for (std::size_t to = 0; to < time_out; ++to) {
                    const double* grow = ogb + to * ch_out;
                    if (gb) K.add(bg, grow, bg, ch_out);
                    for (std::size_t kk = 0; kk < k; ++kk) {
                        const std::size_t tpad = to * s + kk;
                        if (tpad < pad_left) continue;
                        const std::size_t ti = tpad - pad_left;
                        if (ti >= time) continue;
                        const double* xrow = xb + ti * ch_in;
                        const double* krow = kd + kk * ch_in * ch_out;
                        for (std::size_t ci = 0; ci < ch_in; ++ci) {
                            if (gx)
                                xg[(b * time + ti) * ch_in + ci] +=
                                    K.dot(grow, krow + ci * ch_out, ch_out);
                            if (gk)
                                K.axpy(xrow[ci], grow, kg + (kk * ch_in + ci) * ch_out, ch_out);
                        }
                    }
                }
            }
        });
    }
    return out;
}

// ---------------------------------------------------------------------------
// batchnorm1d

Tensor batchnorm1d(Tape& tape, const Tensor& x, const Tensor& gamma, const Tensor& beta,
                   BatchNormState& running, bool training, double momentum, double eps) {
    check_ndim(x, 3, "batchnorm1d input");
    const std::size_t batch = x.extent(0), time = x.extent(1), ch = x.extent(2);
    if (gamma.numel() != ch || beta.numel() != ch)
        throw std::invalid_argument("batchnorm1d: gamma/beta channel mismatch");
    if (running.mean.size() != ch) running.mean.assign(ch, 0.0);
    if (running.var.size() != ch) running.var.assign(ch, 1.0);

    const std::size_t rows = batch * time;
    if (training && rows < 2)
        throw std::invalid_argument("batchnorm1d: needs batch*time >= 2 in train mode");

    const auto& K = active();
    std::vector<double> mean(ch, 0.0), var(ch, 0.0);
    if (training) {
        for (std::size_t r = 0; r < rows; ++r) K.add(mean.data(), x.data() + r * ch, mean.data(), ch);
        for (std::size_t c = 0; c < ch; ++c) mean[c] /= static_cast<double>(rows);
        std::vector<double> centered(ch);
        for (std::size_t r = 0; r < rows; ++r) {
            K.sub(x.data() + r * ch, mean.data(), centered.data(), ch);
            K.fmadd(centered.data(), centered.data(), var.data(), ch);
        }
        for (std::size_t c = 0; c < ch; ++c) var[c] /= static_cast<double>(rows);
        for (std::size_t c = 0; c < ch; ++c) {
            running.mean[c] = (1.0 - momentum) * running.mean[c] + momentum * mean[c];
            running.var[c] = (1.0 - momentum) * running.var[c] + momentum * var[c];
        }
    } else {
        mean = running.mean;
        var = running.var;
    }

    std::vector<double> invstd(ch);
    for (std::size_t c = 0; c < ch; ++c) invstd[c] = 1.0 / std::sqrt(var[c] + eps);

    // y = xhat * gamma + beta with xhat = (x - mean) * invstd; fold into one
    // affine pass per row: y = x * a + t, a = gamma*invstd, t = beta - mean*a.
    std::vector<double> a(ch), t(ch);
    for (std::size_t c = 0; c < ch; ++c) {
        a[c] = gamma.data()[c] * invstd[c];
        t[c] = beta.data()[c] - mean[c] * a[c];
    }
    Tensor out = Tensor::zeros({batch, time, ch}, want_grad(tape, {&x, &gamma, &beta}));
    for (std::size_t r = 0; r < rows; ++r)
        K.affine(x.data() + r * ch, a.data(), t.data(), out.vec().data() + r * ch, ch);

    if (out.requires_grad()) {
        Tensor xi = x, gi = gamma, bi = beta, oi = out;
        tape.record([xi, gi, bi, oi, mean = std::move(mean), invstd = std::move(invstd), rows, ch,
                     training]() mutable {
            if (!oi.has_grad()) return;
            const auto& K = active();
            const double* og = oi.grad();
            const double* xd = xi.data();
            const double n = static_cast<double>(rows);

            // per-channel sums: sg = sum(gout), sgx = sum(gout * xhat)
            std::vector<double> sg(ch, 0.0), sgx(ch, 0.0), xhat(ch);
            for (std::size_t r = 0; r < rows; ++r) {
                const double* grow = og + r * ch;
                const double* xrow = xd + r * ch;
                K.add(sg.data(), grow, sg.data(), ch);
                K.sub(xrow, mean.data(), xhat.data(), ch);
                K.mul(xhat.data(), invstd.data(), xhat.data(), ch);
                K.fmadd(grow, xhat.data(), sgx.data(), ch);
            }
            if (gi.requires_grad()) K.add(gi.grad(), sgx.data(), gi.grad(), ch);
            if (bi.requires_grad()) K.add(bi.grad(), sg.data(), bi.grad(), ch);

            if (xi.requires_grad()) {
                double* xg = xi.grad();
                std::vector<double> c1(ch), c2(ch), c3(ch), row(ch);
                const double* gd = gi.data();
                if (training) {
                    // dx = (gamma*invstd) * (g - sg/n - xhat*sgx/n)
                    for (std::size_t c = 0; c < ch; ++c) {
                        c1[c] = gd[c] * invstd[c];
                        c2[c] = sg[c] / n;
                        c3[c] = sgx[c] / n;
                    }
                    for (std::size_t r = 0; r < rows; ++r) {
                        const double* grow = og + r * ch;
                        const double* xrow = xd + r * ch;
                        K.sub(xrow, mean.data(), xhat.data(), ch);
                        K.mul(xhat.data(), invstd.data(), xhat.data(), ch);
                        for (std::size_t c = 0; c < ch; ++c)
                            row[c] = c1[c] * (grow[c] - c2[c] - xhat[c] * c3[c]);
                        K.add(xg + r * ch, row.data(), xg + r * ch, ch);
                    }
                } else {
                    for (std::size_t c = 0; c < ch; ++c) c1[c] = gd[c] * invstd[c];
                    for (std::size_t r = 0; r < rows; ++r)
                        K.fmadd(og + r * ch, c1.data(), xg + r * ch, ch);
                }
            }
        });
    }
    return out;
}

// ---------------------------------------------------------------------------
// element-wise activations

Tensor relu(Tape& tape, const Tensor& x) {
    Tensor out = Tensor::zeros(x.shape(), want_grad(tape, {&x}));
    active().relu(x.data(), out.vec().data(), x.numel());
    if (out.requires_grad()) {
        Tensor xi = x, oi = out;
        tape.record([xi, oi]() mutable {
            if (!oi.has_grad()) return;
            active().relu_bwd(xi.data(), oi.grad(), xi.grad(), xi.numel());
        });
    }
    return out;
}

Tensor sigmoid(Tape& tape, const Tensor& x) {
    Tensor out = Tensor::zeros(x.shape(), want_grad(tape, {&x}));
    double* od = out.vec().data();
    const double* xd = x.data();
    for (std::size_t i = 0; i < x.numel(); ++i) od[i] = 1.0 / (1.0 + std::exp(-xd[i]));
    if (out.requires_grad()) {
        Tensor xi = x, oi = out;
        tape.record([xi, oi]() mutable {
            if (!oi.has_grad()) return;
            const double* y = oi.data();
            const double* g = oi.grad();
            double* xg = xi.grad();
            for (std::size_t i = 0; i < xi.numel(); ++i) xg[i] += g[i] * y[i] * (1.0 - y[i]);
        });
    }
    return out;
}

Tensor softmax(Tape& tape, const Tensor& x, int axis) {
    const std::size_t ax = normalize_axis(axis, x.ndim());
    const std::size_t extent = x.extent(ax);
    std::size_t outer = 1, inner = 1;
    for (std::size_t i = 0; i < ax; ++i) outer *= x.extent(i);
    for (std::size_t i = ax + 1; i < x.ndim(); ++i) inner *= x.extent(i);

    Tensor out = Tensor::zeros(x.shape(), want_grad(tape, {&x}));
    const double* xd = x.data();
    double* od = out.vec().data();
    for (std::size_t o = 0; o < outer; ++o) {
        for (std::size_t in = 0; in < inner; ++in) {
            const std::size_t base = o * extent * inner + in;
            double mx = xd[base];
            for (std::size_t e = 1; e < extent; ++e)
                mx = std::max(mx, xd[base + e * inner]);
            double sum = 0.0;
            for (std::size_t e = 0; e < extent; ++e) {
                const double v = std::exp(xd[base + e * inner] - mx);
                od[base + e * inner] = v;
                sum += v;
            }
            for (std::size_t e = 0; e < extent; ++e) od[base + e * inner] /= sum;
        }
    }

    if (out.requires_grad()) {
        Tensor xi = x, oi = out;
        tape.record([xi, oi, outer, inner, extent]() mutable {
            if (!oi.has_grad()) return;
            const double* y = oi.data();
            const double* g = oi.grad();
            double* xg = xi.grad();
            for (std::size_t o = 0; o < outer; ++o) {
                for (std::size_t in = 0; in < inner; ++in) {
                    const std::size_t base = o * extent * inner + in;
                    double dotgy = 0.0;
                    for (std::size_t e = 0; e < extent; ++e)
                        dotgy += g[base + e * inner] * y[base + e * inner];
                    for (std::size_t e = 0; e < extent; ++e) {
                        const std::size_t i = base + e * inner;
                        xg[i] += y[i] * (g[i] - dotgy);
                    }
                }
            }
        });
    }
    return out;
}

// ---------------------------------------------------------------------------
// dense / pooling

Tensor dense(Tape& tape, const Tensor& x, const Tensor& w, const Tensor& b) {
    check_ndim(x, 2, "dense input");
    check_ndim(w, 2, "dense weight");
    check_ndim(b, 1, "dense bias");
    const std::size_t batch = x.extent(0), n_in = x.extent(1), n_out = w.extent(1);
    if (w.extent(0) != n_in)
        throw std::invalid_argument("dense: weight rows " + std::to_string(w.extent(0)) +
                                    " do not match input features " + std::to_string(n_in));
    if (b.extent(0) != n_out) throw std::invalid_argument("dense: bias/n_out mismatch");

    Tensor out = Tensor::zeros({batch, n_out}, want_grad(tape, {&x, &w, &b}));
    const auto& K = active();
    for (std::size_t r = 0; r < batch; ++r) {
        double* orow = out.vec().data() + r * n_out;
        std::copy(b.data(), b.data() + n_out, orow);
        const double* xrow = x.data() + r * n_in;
        for (std::size_t i = 0; i < n_in; ++i)
            K.axpy(xrow[i], w.data() + i * n_out, orow, n_out);
    }

    if (out.requires_grad()) {
        Tensor xi = x, wi = w, bi = b, oi = out;
        tape.record([xi, wi, bi, oi, batch, n_in, n_out]() mutable {
            if (!oi.has_grad()) return;
            const auto& K = active();
            const double* og = oi.grad();
            for (std::size_t r = 0; r < batch; ++r) {
                const double* grow = og + r * n_out;
                const double* xrow = xi.data() + r * n_in;
                if (bi.requires_grad()) K.add(bi.grad(), grow, bi.grad(), n_out);
                for (std::size_t i = 0; i < n_in; ++i) {
                    if (xi.requires_grad())
                        xi.grad()[r * n_in + i] += K.dot(grow, wi.data() + i * n_out, n_out);
                    if (wi.requires_grad()) K.axpy(xrow[i], grow, wi.grad() + i * n_out, n_out);
                }
            }
        });
    }
    return out;
}

Tensor global_avg_pool(Tape& tape, const Tensor& x) {
    check_ndim(x, 3, "global_avg_pool input");
    const std::size_t batch = x.extent(0), time = x.extent(1), ch = x.extent(2);
    Tensor out = Tensor::zeros({batch, ch}, want_grad(tape, {&x}));
    const auto& K = active();
    const double inv = 1.0 / static_cast<double>(time);
    for (std::size_t b = 0; b < batch; ++b) {
        double* orow = out.vec().data() + b * ch;
        for (std::size_t t = 0; t < time; ++t)
            K.add(orow, x.data() + (b * time + t) * ch, orow, ch);
        K.scale(inv, orow, orow, ch);
    }
    if (out.requires_grad()) {
        Tensor xi = x, oi = out;
        tape.record([xi, oi, batch, time, ch, inv]() mutable {
            if (!oi.has_grad()) return;
            const auto& K = active();
            double* xg = xi.grad();
            for (std::size_t b = 0; b < batch; ++b) {
                const double* grow = oi.grad() + b * ch;
                for (std::size_t t = 0; t < time; ++t)
                    K.axpy(inv, grow, xg + (b * time + t) * ch, ch);
            }
        });
    }
    return out;
}

// ---------------------------------------------------------------------------
// concat / add / mul

Tensor concat(Tape& tape, const Tensor& a, const Tensor& b, int axis) {
    if (a.ndim() != b.ndim()) throw std::invalid_argument("concat: rank mismatch");
    const std::size_t ax = normalize_axis(axis, a.ndim());
    for (std::size_t i = 0; i < a.ndim(); ++i)
        if (i != ax && a.extent(i) != b.extent(i))
            throw std::invalid_argument("concat: non-concat extents differ at axis " +
                                        std::to_string(i));

    std::vector<std::size_t> shape = a.shape();
    shape[ax] = a.extent(ax) + b.extent(ax);
    std::size_t outer = 1, inner = 1;
    for (std::size_t i = 0; i < ax; ++i) outer *= a.extent(i);
    for (std::size_t i = ax + 1; i < a.ndim(); ++i) inner *= a.extent(i);
    const std::size_t blk_a = a.extent(ax) * inner, blk_b = b.extent(ax) * inner;

    Tensor out = Tensor::zeros(shape, want_grad(tape, {&a, &b}));
    double* od = out.vec().data();
    for (std::size_t o = 0; o < outer; ++o) {
        std::copy(a.data() + o * blk_a, a.data() + (o + 1) * blk_a, od + o * (blk_a + blk_b));
        std::copy(b.data() + o * blk_b, b.data() + (o + 1) * blk_b,
                  od + o * (blk_a + blk_b) + blk_a);
    }

    if (out.requires_grad()) {
        Tensor ai = a, bi = b, oi = out;
        tape.record([ai, bi, oi, outer, blk_a, blk_b]() mutable {
            if (!oi.has_grad()) return;
            const auto& K = active();
            const double* og = oi.grad();
            for (std::size_t o = 0; o < outer; ++o) {
                const double* src = og + o * (blk_a + blk_b);
                if (ai.requires_grad())
                    K.add(ai.grad() + o * blk_a, src, ai.grad() + o * blk_a, blk_a);
                if (bi.requires_grad())
                    K.add(bi.grad() + o * blk_b, src + blk_a, bi.grad() + o * blk_b, blk_b);
            }
        });
    }
    return out;
}

namespace {

// Validates identical or trailing-broadcast shapes; returns true if b is the
// broadcast (smaller) side. Throws when incompatible.
bool broadcast_layout(const Tensor& a, const Tensor& b, std::size_t& reps, std::size_t& blk) {
    if (a.ndim() < b.ndim()) throw std::invalid_argument("broadcast: larger operand must be first");
    const std::size_t off = a.ndim() - b.ndim();
    for (std::size_t i = 0; i < b.ndim(); ++i)
        if (a.extent(off + i) != b.extent(i))
            throw std::invalid_argument("broadcast: trailing extents differ");
    blk = b.numel();
    reps = a.numel() / blk;
    return reps > 1 || a.ndim() != b.ndim();
}

}  // namespace

Tensor add(Tape& tape, const Tensor& a, const Tensor& b) {
    const Tensor& big = a.ndim() >= b.ndim() ? a : b;
    const Tensor& small = a.ndim() >= b.ndim() ? b : a;
    std::size_t reps, blk;
    broadcast_layout(big, small, reps, blk);

    Tensor out = Tensor::zeros(big.shape(), want_grad(tape, {&a, &b}));
    const auto& K = active();
    for (std::size_t r = 0; r < reps; ++r)
        K.add(big.data() + r * blk, small.data(), out.vec().data() + r * blk, blk);

    if (out.requires_grad()) {
        Tensor bigi = big, smalli = small, oi = out;
        tape.record([bigi, smalli, oi, reps, blk]() mutable {
            if (!oi.has_grad()) return;
            const auto& K = active();
            if (bigi.requires_grad())
                K.add(bigi.grad(), oi.grad(), bigi.grad(), bigi.numel());
            if (smalli.requires_grad())
                for (std::size_t r = 0; r < reps; ++r)
                    K.add(smalli.grad(), oi.grad() + r * blk, smalli.grad(), blk);
        });
    }
    return out;
}

Tensor mul(Tape& tape, const Tensor& a, const Tensor& b) {
    const Tensor& big = a.ndim() >= b.ndim() ? a : b;
    const Tensor& small = a.ndim() >= b.ndim() ? b : a;
    std::size_t reps, blk;
    broadcast_layout(big, small, reps, blk);

    Tensor out = Tensor::zeros(big.shape(), want_grad(tape, {&a, &b}));
    const auto& K = active();
    for (std::size_t r = 0; r < reps; ++r)
        K.mul(big.data() + r * blk, small.data(), out.vec().data() + r * blk, blk);

    if (out.requires_grad()) {
        Tensor bigi = big, smalli = small, oi = out;
        tape.record([bigi, smalli, oi, reps, blk]() mutable {
            if (!oi.has_grad()) return;
            const auto& K = active();
            const double* og = oi.grad();
            if (bigi.requires_grad())
                for (std::size_t r = 0; r < reps; ++r)
                    K.fmadd(og + r * blk, smalli.data(), bigi.grad() + r * blk, blk);
            if (smalli.requires_grad())
                for (std::size_t r = 0; r < reps; ++r)
                    K.fmadd(og + r * blk, bigi.data() + r * blk, smalli.grad(), blk);
        });
    }
    return out;
}

// ---------------------------------------------------------------------------
// loss / reductions / shape

Tensor cross_entropy(Tape& tape, const Tensor& logits, const std::vector<int>& labels) {
    check_ndim(logits, 2, "cross_entropy logits");
    const std::size_t batch = logits.extent(0), n_class = logits.extent(1);
    if (labels.size() != batch) throw std::invalid_argument("cross_entropy: label count mismatch");
    for (int l : labels)
        if (l < 0 || static_cast<std::size_t>(l) >= n_class)
            throw std::invalid_argument("cross_entropy: label out of range");

    std::vector<double> probs(batch * n_class);
    double loss = 0.0;
    const double* ld = logits.data();
    for (std::size_t b = 0; b < batch; ++b) {
        const double* row = ld + b * n_class;
        double mx = row[0];
        for (std::size_t c = 1; c < n_class; ++c) mx = std::max(mx, row[c]);
        double sum = 0.0;
        for (std::size_t c = 0; c < n_class; ++c) {
            probs[b * n_class + c] = std::exp(row[c] - mx);
            sum += probs[b * n_class + c];
        }
        for (std::size_t c = 0; c < n_class; ++c) probs[b * n_class + c] /= sum;
        loss += mx + std::log(sum) - row[static_cast<std::size_t>(labels[b])];
    }
    loss /= static_cast<double>(batch);

    Tensor out = Tensor::scalar(loss, want_grad(tape, {&logits}));
    if (out.requires_grad()) {
        Tensor li = logits, oi = out;
        tape.record([li, oi, probs = std::move(probs), labels, batch, n_class]() mutable {
            if (!oi.has_grad()) return;
            const double g = oi.grad()[0] / static_cast<double>(batch);
            double* lg = li.grad();
            for (std::size_t b = 0; b < batch; ++b) {
                for (std::size_t c = 0; c < n_class; ++c)
                    lg[b * n_class + c] += g * probs[b * n_class + c];
                lg[b * n_class + static_cast<std::size_t>(labels[b])] -= g;
            }
        });
    }
    return out;
}

Tensor reduce_sum(Tape& tape, const Tensor& x) {
    Tensor out = Tensor::scalar(active().sum(x.data(), x.numel()), want_grad(tape, {&x}));
    if (out.requires_grad()) {
        Tensor xi = x, oi = out;
        tape.record([xi, oi]() mutable {
            if (!oi.has_grad()) return;
            const double g = oi.grad()[0];
            double* xg = xi.grad();
            for (std::size_t i = 0; i < xi.numel(); ++i) xg[i] += g;
        });
    }
    return out;
}

Tensor reshape(Tape& tape, const Tensor& x, std::vector<std::size_t> shape) {
    if (shape_numel(shape) != x.numel()) throw std::invalid_argument("reshape: numel mismatch");
    Tensor out = Tensor::from_data(std::move(shape), x.vec(), want_grad(tape, {&x}));
    if (out.requires_grad()) {
        Tensor xi = x, oi = out;
        tape.record([xi, oi]() mutable {
            if (!oi.has_grad()) return;
            active().add(xi.grad(), oi.grad(), xi.grad(), xi.numel());
        });
    }
    return out;
}

// ---------------------------------------------------------------------------
// stacking / axis manipulation

Tensor stack_last(Tape& tape, const Tensor& a, const Tensor& b) {
    if (a.shape() != b.shape()) throw std::invalid_argument("stack_last: shape mismatch");
    std::vector<std::size_t> shape = a.shape();
    shape.push_back(2);
    Tensor out = Tensor::zeros(shape, want_grad(tape, {&a, &b}));
    double* od = out.vec().data();
    const std::size_t n = a.numel();
    for (std::size_t i = 0; i < n; ++i) {
        od[2 * i] = a.data()[i];
        od[2 * i + 1] = b.data()[i];
    }
    if (out.requires_grad()) {
        Tensor ai = a, bi = b, oi = out;
        tape.record([ai, bi, oi, n]() mutable {
            if (!oi.has_grad()) return;
            const double* og = oi.grad();
            double* ag = ai.requires_grad() ? ai.grad() : nullptr;
            double* bg = bi.requires_grad() ? bi.grad() : nullptr;
            for (std::size_t i = 0; i < n; ++i) {
                if (ag) ag[i] += og[2 * i];
                if (bg) bg[i] += og[2 * i + 1];
            }
        });
    }
    return out;
}

Tensor transpose_last2(Tape& tape, const Tensor& x) {
    if (x.ndim() < 2) throw std::invalid_argument("transpose_last2: need rank >= 2");
    const std::size_t p = x.extent(x.ndim() - 2), q = x.extent(x.ndim() - 1);
    std::vector<std::size_t> shape = x.shape();
    std::swap(shape[x.ndim() - 2], shape[x.ndim() - 1]);
    const std::size_t outer = x.numel() / (p * q);

    Tensor out = Tensor::zeros(shape, want_grad(tape, {&x}));
    double* od = out.vec().data();
    const double* xd = x.data();
    for (std::size_t o = 0; o < outer; ++o)
        for (std::size_t i = 0; i < p; ++i)
            for (std::size_t j = 0; j < q; ++j)
                od[o * p * q + j * p + i] = xd[o * p * q + i * q + j];

    if (out.requires_grad()) {
        Tensor xi = x, oi = out;
        tape.record([xi, oi, outer, p, q]() mutable {
            if (!oi.has_grad()) return;
            const double* og = oi.grad();
            double* xg = xi.grad();
            for (std::size_t o = 0; o < outer; ++o)
                for (std::size_t i = 0; i < p; ++i)
                    for (std::size_t j = 0; j < q; ++j)
                        xg[o * p * q + i * q + j] += og[o * p * q + j * p + i];
        });
    }
    return out;
}

Tensor select_axis(Tape& tape, const Tensor& x, int axis, std::size_t index) {
    const std::size_t ax = normalize_axis(axis, x.ndim());
    const std::size_t extent = x.extent(ax);
    if (index >= extent) throw std::invalid_argument("select_axis: index out of range");
    std::size_t outer = 1, inner = 1;
    for (std::size_t i = 0; i < ax; ++i) outer *= x.extent(i);
    for (std::size_t i = ax + 1; i < x.ndim(); ++i) inner *= x.extent(i);

    std::vector<std::size_t> shape;
    for (std::size_t i = 0; i < x.ndim(); ++i)
        if (i != ax) shape.push_back(x.extent(i));
    if (shape.empty()) shape.push_back(1);

    Tensor out = Tensor::zeros(shape, want_grad(tape, {&x}));
    double* od = out.vec().data();
    for (std::size_t o = 0; o < outer; ++o)
        std::copy(x.data() + (o * extent + index) * inner, x.data() + (o * extent + index + 1) * inner,
                  od + o * inner);

    if (out.requires_grad()) {
        Tensor xi = x, oi = out;
        tape.record([xi, oi, outer, inner, extent, index]() mutable {
            if (!oi.has_grad()) return;
            const auto& K = active();
            double* xg = xi.grad();
            for (std::size_t o = 0; o < outer; ++o)
                K.add(xg + (o * extent + index) * inner, oi.grad() + o * inner,
                      xg + (o * extent + index) * inner, inner);
        });
    }
    return out;
}

Tensor contract_last(Tape& tape, const Tensor& s, const Tensor& w) {
    check_ndim(w, 2, "contract_last weight");
    const std::size_t f = w.extent(0), e = w.extent(1);
    if (s.extent(s.ndim() - 1) != f)
        throw std::invalid_argument("contract_last: inner extents disagree");
    const std::size_t rows = s.numel() / f;

    std::vector<std::size_t> shape = s.shape();
    shape.back() = e;
    Tensor out = Tensor::zeros(shape, want_grad(tape, {&s, &w}));
    const auto& K = active();
    for (std::size_t r = 0; r < rows; ++r) {
        const double* srow = s.data() + r * f;
        double* orow = out.vec().data() + r * e;
        for (std::size_t i = 0; i < f; ++i) K.axpy(srow[i], w.data() + i * e, orow, e);
    }

    if (out.requires_grad()) {
        Tensor si = s, wi = w, oi = out;
        tape.record([si, wi, oi, rows, f, e]() mutable {
            if (!oi.has_grad()) return;
            const auto& K = active();
            const double* og = oi.grad();
            for (std::size_t r = 0; r < rows; ++r) {
                const double* grow = og + r * e;
                const double* srow = si.data() + r * f;
                for (std::size_t i = 0; i < f; ++i) {
                    if (si.requires_grad())
                        si.grad()[r * f + i] += K.dot(grow, wi.data() + i * e, e);
                    if (wi.requires_grad()) K.axpy(srow[i], grow, wi.grad() + i * e, e);
                }
            }
        });
    }
    return out;
}

Tensor scale_channels(Tape& tape, const Tensor& x, const Tensor& g) {
    check_ndim(x, 3, "scale_channels input");
    check_ndim(g, 2, "scale_channels gate");
    const std::size_t batch = x.extent(0), time = x.extent(1), ch = x.extent(2);
    if (g.extent(0) != batch || g.extent(1) != ch)
        throw std::invalid_argument("scale_channels: gate shape mismatch");

    Tensor out = Tensor::zeros(x.shape(), want_grad(tape, {&x, &g}));
    const auto& K = active();
    for (std::size_t b = 0; b < batch; ++b)
        for (std::size_t t = 0; t < time; ++t)
            K.mul(x.data() + (b * time + t) * ch, g.data() + b * ch,
                  out.vec().data() + (b * time + t) * ch, ch);

    if (out.requires_grad()) {
        Tensor xi = x, gi = g, oi = out;
        tape.record([xi, gi, oi, batch, time, ch]() mutable {
            if (!oi.has_grad()) return;
            const auto& K = active();
            const double* og = oi.grad();
            for (std::size_t b = 0; b < batch; ++b) {
                for (std::size_t t = 0; t < time; ++t) {
                    const std::size_t r = (b * time + t) * ch;
                    if (xi.requires_grad()) K.fmadd(og + r, gi.data() + b * ch, xi.grad() + r, ch);
                    if (gi.requires_grad()) K.fmadd(og + r, xi.data() + r, gi.grad() + b * ch, ch);
                }
            }
        });
    }
    return out;
}

Tensor scale_rows(Tape& tape, const Tensor& x, const Tensor& g) {
    check_ndim(x, 3, "scale_rows input");
    check_ndim(g, 2, "scale_rows gate");
    const std::size_t batch = x.extent(0), rows = x.extent(1), cols = x.extent(2);
    if (g.extent(0) != batch || g.extent(1) != rows)
        throw std::invalid_argument("scale_rows: gate shape mismatch");

    Tensor out = Tensor::zeros(x.shape(), want_grad(tape, {&x, &g}));
    const auto& K = active();
    for (std::size_t b = 0; b < batch; ++b)
        for (std::size_t r = 0; r < rows; ++r)
            K.scale(g.at({b, r}), x.data() + (b * rows + r) * cols,
                    out.vec().data() + (b * rows + r) * cols, cols);

    if (out.requires_grad()) {
        Tensor xi = x, gi = g, oi = out;
        tape.record([xi, gi, oi, batch, rows, cols]() mutable {
            if (!oi.has_grad()) return;
            const auto& K = active();
            const double* og = oi.grad();
            for (std::size_t b = 0; b < batch; ++b) {
                for (std::size_t r = 0; r < rows; ++r) {
                    const std::size_t base = (b * rows + r) * cols;
                    if (xi.requires_grad())
                        K.axpy(gi.data()[b * rows + r], og + base, xi.grad() + base, cols);
                    if (gi.requires_grad())
                        gi.grad()[b * rows + r] += K.dot(og + base, xi.data() + base, cols);
                }
            }
        });
    }
    return out;
}

}  // namespace attx::ops
