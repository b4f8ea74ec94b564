#include "attx/gradcheck.hpp"

#include "attx/attx_block.hpp"
#include "attx/model.hpp"
#include "attx/ops.hpp"
#include "attx/rng.hpp"

#include <algorithm>
#include <cmath>
#include <functional>

namespace attx {

namespace {

using namespace ops;

Tensor rand_tensor(std::vector<std::size_t> shape, Rng& rng, double lo, double hi,
                   bool requires_grad) {
    Tensor t = Tensor::zeros(std::move(shape), requires_grad);
    for (double& v : t.vec()) v = rng.uniform(lo, hi);
    return t;
}

Tensor rand_off_kink(std::vector<std::size_t> shape, Rng& rng, bool requires_grad) {
    Tensor t = rand_tensor(std::move(shape), rng, -1.0, 1.0, requires_grad);
    for (double& v : t.vec())
        if (std::fabs(v) < 5e-3) v = v < 0 ? v - 5e-3 : v + 5e-3;
    return t;
}

// Runs `build` twice: once on a recording tape for reverse-mode grads, then
// repeatedly forward-only for the central differences, element by element.
GradCheckResult check(const std::string& name, double threshold,
                      const std::function<Tensor(Tape&)>& build,
                      const std::vector<Tensor>& wrt, double step = 1e-5) {
    GradCheckResult r;
    r.name = name;
    r.threshold = threshold;

    for (const Tensor& t : wrt) const_cast<Tensor&>(t).zero_grad();
    Tape tape;
    Tensor loss = build(tape);
    tape.backward(loss);

    auto forward = [&]() {
        Tape t;
        t.set_recording(false);
        return build(t).value();
    };
    for (Tensor t : wrt) {
        if (!t.has_grad()) continue;
        for (std::size_t i = 0; i < t.numel(); ++i) {
            const double numeric = numeric_gradient(forward, t.data() + i, step);
            r.max_rel_err = std::max(r.max_rel_err, grad_rel_err(t.grad_vec()[i], numeric));
        }
    }
    r.pass = r.max_rel_err < r.threshold;
    return r;
}

}  // namespace

std::vector<GradCheckResult> gradcheck_ops(const std::string& only) {
    std::vector<GradCheckResult> out;
    auto want = [&](const std::string& name) { return only.empty() || only == name; };

    if (want("conv1d")) {
        Rng rng(101);
        Tensor x = rand_tensor({2, 16, 3}, rng, -1, 1, true);
        Tensor k = rand_tensor({5, 3, 4}, rng, -1, 1, true);
        Tensor b = rand_tensor({4}, rng, -1, 1, true);
        Tensor mask = rand_tensor({2, 8, 4}, rng, -1, 1, false);
        out.push_back(check(
            "conv1d", 1e-4,
            [&](Tape& t) {
                return reduce_sum(t, mul(t, conv1d(t, x, k, b, 2, Padding::same), mask));
            },
            {x, k, b}));
    }
    if (want("batchnorm1d")) {
        Rng rng(102);
        Tensor x = rand_tensor({3, 5, 2}, rng, -2, 2, true);
        Tensor g = rand_tensor({2}, rng, 0.5, 1.5, true);
        Tensor be = rand_tensor({2}, rng, -0.5, 0.5, true);
        Tensor mask = rand_tensor({3, 5, 2}, rng, -1, 1, false);
        out.push_back(check(
            "batchnorm1d", 1e-4,
            [&](Tape& t) {
                BatchNormState st;
                return reduce_sum(
                    t, mul(t, batchnorm1d(t, x, g, be, st, true, 0.1, 1e-5), mask));
            },
            {x, g, be}));
    }
    if (want("relu")) {
        Rng rng(103);
        Tensor x = rand_off_kink({4, 6}, rng, true);
        Tensor mask = rand_tensor({4, 6}, rng, -1, 1, false);
        out.push_back(check(
            "relu", 1e-4,
            [&](Tape& t) { return reduce_sum(t, mul(t, relu(t, x), mask)); }, {x}));
    }
    if (want("sigmoid")) {
        Rng rng(104);
        Tensor x = rand_tensor({4, 6}, rng, -2, 2, true);
        Tensor mask = rand_tensor({4, 6}, rng, -1, 1, false);
        out.push_back(check(
            "sigmoid", 1e-4,
            [&](Tape& t) { return reduce_sum(t, mul(t, sigmoid(t, x), mask)); }, {x}));
    }
    if (want("softmax")) {
        Rng rng(105);
        Tensor x = rand_tensor({3, 4, 5}, rng, -3, 3, true);
        Tensor mask = rand_tensor({3, 4, 5}, rng, -1, 1, false);
        out.push_back(check(
            "softmax", 1e-4,
            [&](Tape& t) { return reduce_sum(t, mul(t, softmax(t, x, 1), mask)); }, {x}));
    }
    if (want("dense")) {
        Rng rng(106);
        Tensor x = rand_tensor({3, 5}, rng, -1, 1, true);
        Tensor w = rand_tensor({5, 7}, rng, -1, 1, true);
        Tensor b = rand_tensor({7}, rng, -1, 1, true);
        Tensor mask = rand_tensor({3, 7}, rng, -1, 1, false);
        out.push_back(check(
            "dense", 1e-4,
            [&](Tape& t) { return reduce_sum(t, mul(t, dense(t, x, w, b), mask)); }, {x, w, b}));
    }
    if (want("global_avg_pool")) {
        Rng rng(107);
        Tensor x = rand_tensor({2, 10, 4}, rng, -1, 1, true);
        Tensor mask = rand_tensor({2, 4}, rng, -1, 1, false);
        out.push_back(check(
            "global_avg_pool", 1e-4,
            [&](Tape& t) { return reduce_sum(t, mul(t, global_avg_pool(t, x), mask)); }, {x}));
    }
    if (want("concat")) {
        Rng rng(108);
        Tensor a = rand_tensor({2, 3, 2}, rng, -1, 1, true);
        Tensor b = rand_tensor({2, 3, 3}, rng, -1, 1, true);
        Tensor mask = rand_tensor({2, 3, 5}, rng, -1, 1, false);
        out.push_back(check(
            "concat", 1e-4,
            [&](Tape& t) { return reduce_sum(t, mul(t, concat(t, a, b, 2), mask)); }, {a, b}));
    }
    if (want("add")) {
        Rng rng(109);
        Tensor a = rand_tensor({2, 4, 3}, rng, -1, 1, true);
        Tensor b = rand_tensor({3}, rng, -1, 1, true);
        Tensor mask = rand_tensor({2, 4, 3}, rng, -1, 1, false);
        out.push_back(check(
            "add", 1e-4, [&](Tape& t) { return reduce_sum(t, mul(t, add(t, a, b), mask)); },
            {a, b}));
    }
    if (want("mul")) {
        Rng rng(110);
        Tensor a = rand_tensor({2, 4, 3}, rng, -1, 1, true);
        Tensor b = rand_tensor({4, 3}, rng, -1, 1, true);
        Tensor mask = rand_tensor({2, 4, 3}, rng, -1, 1, false);
        out.push_back(check(
            "mul", 1e-4, [&](Tape& t) { return reduce_sum(t, mul(t, mul(t, a, b), mask)); },
            {a, b}));
    }
    if (want("cross_entropy")) {
        Rng rng(111);
        Tensor logits = rand_tensor({4, 3}, rng, -2, 2, true);
        const std::vector<int> labels{0, 2, 1, 2};
        out.push_back(check(
            "cross_entropy", 1e-4, [&](Tape& t) { return cross_entropy(t, logits, labels); },
            {logits}));
    }
    if (want("stack_transpose_select")) {
        Rng rng(112);
        Tensor a = rand_tensor({2, 3}, rng, -1, 1, true);
        Tensor b = rand_tensor({2, 3}, rng, -1, 1, true);
        Tensor mask = rand_tensor({2, 3}, rng, -1, 1, false);
        out.push_back(check(
            "stack_transpose_select", 1e-4,
            [&](Tape& t) {
                Tensor s = stack_last(t, a, b);            // [2,3,2]
                Tensor tr = transpose_last2(t, s);         // [2,2,3]
                Tensor sel = select_axis(t, tr, 1, 1);     // [2,3] = b
                return reduce_sum(t, mul(t, sel, mask));
            },
            {a, b}));
    }
    if (want("contract_last")) {
        Rng rng(113);
        Tensor s = rand_tensor({2, 3, 2}, rng, -1, 1, true);
        Tensor w = rand_tensor({2, 2}, rng, -1, 1, true);
        Tensor mask = rand_tensor({2, 3, 2}, rng, -1, 1, false);
        out.push_back(check(
            "contract_last", 1e-4,
            [&](Tape& t) { return reduce_sum(t, mul(t, contract_last(t, s, w), mask)); },
            {s, w}));
    }
    if (want("scale_channels")) {
        Rng rng(114);
        Tensor x = rand_tensor({2, 4, 3}, rng, -1, 1, true);
        Tensor g = rand_tensor({2, 3}, rng, -1, 1, true);
        Tensor mask = rand_tensor({2, 4, 3}, rng, -1, 1, false);
        out.push_back(check(
            "scale_channels", 1e-4,
            [&](Tape& t) { return reduce_sum(t, mul(t, scale_channels(t, x, g), mask)); },
            {x, g}));
    }
    if (want("scale_rows")) {
        Rng rng(115);
        Tensor x = rand_tensor({2, 4, 3}, rng, -1, 1, true);
        Tensor g = rand_tensor({2, 4}, rng, -1, 1, true);
        Tensor mask = rand_tensor({2, 4, 3}, rng, -1, 1, false);
        out.push_back(check(
            "scale_rows", 1e-4,
            [&](Tape& t) { return reduce_sum(t, mul(t, scale_rows(t, x, g), mask)); }, {x, g}));
    }
    if (want("attention")) {
        Rng rng(116);
        Tensor ze = rand_tensor({1, 2, 3}, rng, 0.1, 1.0, true);
        Tensor zd = rand_tensor({1, 2, 3}, rng, 0.1, 1.0, true);
        AttXParams p;
        p.W = rand_tensor({2, 2}, rng, 0.2, 1.0, true);
        p.w_u = rand_tensor({3}, rng, 0.2, 1.0, true);
        Tensor me = rand_tensor({1, 2, 3}, rng, -1, 1, false);
        Tensor md = rand_tensor({1, 2, 3}, rng, -1, 1, false);
        out.push_back(check(
            "attention", 1e-3,
            [&](Tape& t) {
                Tensor s = stack_modalities(t, ze, zd);
                Tensor theta = attention_weights(t, s, p);
                auto [he, hd] = apply_attention(t, theta, ze, zd);
                return reduce_sum(t, add(t, mul(t, he, me), mul(t, hd, md)));
            },
            {ze, zd, p.W, p.w_u}));
    }
    if (want("se_block")) {
        Rng rng(117);
        Tensor x = rand_tensor({2, 6, 8}, rng, -1, 1, true);
        SEBlock se(8, 4);
        std::vector<NamedParam> ps;
        se.collect("se", ps);
        init_params(ps, 23);
        Tensor mask = rand_tensor({2, 6, 8}, rng, -1, 1, false);
        std::vector<Tensor> wrt{x, se.fc1.w, se.fc1.b, se.fc2.w, se.fc2.b};
        out.push_back(check(
            "se_block", 1e-3,
            [&](Tape& t) { return reduce_sum(t, mul(t, se.forward(t, x), mask)); }, wrt));
    }
    return out;
}

std::vector<GradCheckResult> gradcheck_model() {
    ModelSpec spec;
    spec.ecg.widths = {3, 4, 5};
    spec.ecg.kernel = 3;
    spec.ecg.strides = {2, 2, 2};
    spec.ecg.se_reduction = 4;
    spec.eda = spec.ecg;
    spec.eda.stage4_width = 5;
    spec.attx = AttXSpec{ConnType::III, {1, 2, 3}, AttnMode::learned, ReduceMode::scale};
    MultimodalModel model(spec);
    model.init_params(7);

    Rng rng(118);
    Tensor ecg = rand_tensor({2, 32, 1}, rng, -1, 1, false);
    Tensor eda = rand_tensor({2, 32, 1}, rng, -1, 1, false);
    const std::vector<int> labels{0, 1};

    auto params = model.parameters();
    for (auto& p : params) p.tensor.zero_grad();
    Tape tape;
    Tensor loss = ops::cross_entropy(tape, model.forward(tape, ecg, eda, true), labels);
    tape.backward(loss);

    auto forward = [&]() {
        Tape t;
        t.set_recording(false);
        return ops::cross_entropy(t, model.forward(t, ecg, eda, true), labels).value();
    };

    // sample a few elements per parameter group; the reverse pass is shared
    std::vector<GradCheckResult> out;
    Rng pick(119);
    for (auto& p : params) {
        GradCheckResult r;
        r.name = "model/" + p.name;
        r.threshold = 1e-3;
        const std::size_t n = p.tensor.numel();
        const std::size_t samples = std::min<std::size_t>(n, 6);
        for (std::size_t k = 0; k < samples; ++k) {
            const std::size_t i =
                samples == n ? k : static_cast<std::size_t>(pick.uniform_int(0, static_cast<std::int64_t>(n - 1)));
            const double analytic = p.tensor.has_grad() ? p.tensor.grad_vec()[i] : 0.0;
            const double numeric = numeric_gradient(forward, p.tensor.data() + i, 1e-4);
            r.max_rel_err = std::max(r.max_rel_err, grad_rel_err(analytic, numeric));
        }
        r.pass = r.max_rel_err < r.threshold;
        out.push_back(r);
    }
    return out;
}

}  // namespace attx
