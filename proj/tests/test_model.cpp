#define DOCTEST_CONFIG_IMPLEMENT_WITH_MAIN
#include <doctest.h>

#include "attx/model.hpp"
#include "attx/optim.hpp"
#include "attx/rng.hpp"

#include "testutil.hpp"

#include <cmath>

using namespace attx;
using testutil::rand_tensor;

namespace {

ModelSpec tiny_spec() {
    ModelSpec s;
    s.ecg.widths = {4, 6, 8};
    s.ecg.kernel = 3;
    s.ecg.strides = {2, 2, 2};
    s.ecg.se_reduction = 4;
    s.eda = s.ecg;
    s.eda.stage4_width = 8;
    s.attx.reset();
    return s;
}

}  // namespace

TEST_CASE("se_block: zero weights gate at 0.5, saturated gate passes through") {
    Rng rng(61);
    Tensor x = rand_tensor({2, 5, 8}, rng);
    Tape tape;

    SEBlock se(8, 4);  // weights default to zero -> sigmoid(0) = 0.5
    Tensor y = se.forward(tape, x);
    for (std::size_t i = 0; i < x.numel(); ++i)
        CHECK(y.vec()[i] == doctest::Approx(0.5 * x.vec()[i]).epsilon(1e-12));

    for (double& b : se.fc2.b.vec()) b = 40.0;  // saturate the sigmoid
    Tensor y1 = se.forward(tape, x);
    for (std::size_t i = 0; i < x.numel(); ++i)
        CHECK(y1.vec()[i] == doctest::Approx(x.vec()[i]).epsilon(1e-9));
}

TEST_CASE("se_block: gate matches a standalone recomputation") {
    Rng rng(62);
    Tensor x = rand_tensor({2, 6, 8}, rng);
    SEBlock se(8, 4);
    std::vector<NamedParam> ps;
    se.collect("se", ps);
    init_params(ps, 11);

    Tape tape;
    Tensor y = se.forward(tape, x);

    // independent recomputation of the per-channel gains
    for (std::size_t b = 0; b < 2; ++b) {
        std::vector<double> squeeze(8, 0.0);
        for (std::size_t t = 0; t < 6; ++t)
            for (std::size_t c = 0; c < 8; ++c) squeeze[c] += x.at({b, t, c}) / 6.0;
        std::vector<double> hidden(2, 0.0);
        for (std::size_t h = 0; h < 2; ++h) {
            double acc = se.fc1.b.vec()[h];
            for (std::size_t c = 0; c < 8; ++c) acc += squeeze[c] * se.fc1.w.at({c, h});
            hidden[h] = std::max(0.0, acc);
        }
        for (std::size_t c = 0; c < 8; ++c) {
            double acc = se.fc2.b.vec()[c];
            for (std::size_t h = 0; h < 2; ++h) acc += hidden[h] * se.fc2.w.at({h, c});
            const double gain = 1.0 / (1.0 + std::exp(-acc));
            for (std::size_t t = 0; t < 6; ++t)
                CHECK(y.at({b, t, c}) == doctest::Approx(gain * x.at({b, t, c})).epsilon(1e-9));
        }
    }
}

TEST_CASE("se_block: channels below the reduction fall back to bottleneck 1") {
    SEBlock se(2, 4);
    CHECK(se.fc1.w.shape() == std::vector<std::size_t>{2, 1});
    CHECK(se.fc2.w.shape() == std::vector<std::size_t>{1, 2});
}

TEST_CASE("se residual blocks: identity path and shape arithmetic") {
    Rng rng(63);
    Tensor x = rand_tensor({2, 10, 6}, rng);
    Tape tape;

    // all-zero branch weights and 0.5 gate leave relu(x) on the identity path
    SEResBlock id_block(3, 6, 6, 1, 4, false);
    Tensor y = id_block.forward(tape, x, true);
    for (std::size_t i = 0; i < x.numel(); ++i)
        CHECK(y.vec()[i] == doctest::Approx(std::max(0.0, x.vec()[i])).epsilon(1e-12));

    // projection variant with stride 2 halves time (ceil)
    SEResBlock conv_block(3, 6, 12, 2, 4, true);
    std::vector<NamedParam> ps;
    conv_block.collect("b", ps);
    init_params(ps, 5);
    Tensor y2 = conv_block.forward(tape, x, true);
    CHECK(y2.shape() == std::vector<std::size_t>{2, 5, 12});

    Tensor x11 = rand_tensor({1, 11, 6}, rng);
    CHECK(conv_block.forward(tape, x11, true).extent(1) == 6);  // ceil(11/2)

    CHECK_THROWS_AS(SEResBlock(3, 6, 12, 1, 4, false), std::invalid_argument);
}

TEST_CASE("se conv block equals a hand-composed sequence of tested primitives") {
    Rng rng(64);
    Tensor x = rand_tensor({2, 8, 4}, rng);
    SEResBlock blk(3, 4, 6, 2, 2, true);
    std::vector<NamedParam> ps;
    blk.collect("b", ps);
    init_params(ps, 17);

    Tape tape;
    Tensor got = blk.forward(tape, x, true);

    Tape t;
    using namespace ops;
    BatchNormState s1, s2, s3;
    Tensor branch = conv1d(t, x, blk.conv1.kernel, blk.conv1.bias, 2, Padding::same);
    branch = relu(t, batchnorm1d(t, branch, blk.bn1.gamma, blk.bn1.beta, s1, true, 0.1, 1e-5));
    branch = conv1d(t, branch, blk.conv2.kernel, blk.conv2.bias, 1, Padding::same);
    branch = batchnorm1d(t, branch, blk.bn2.gamma, blk.bn2.beta, s2, true, 0.1, 1e-5);
    Tensor squeeze = global_avg_pool(t, branch);
    Tensor gate = sigmoid(
        t, dense(t, relu(t, dense(t, squeeze, blk.se.fc1.w, blk.se.fc1.b)), blk.se.fc2.w,
                 blk.se.fc2.b));
    branch = scale_channels(t, branch, gate);
    Tensor shortcut = conv1d(t, x, blk.proj->kernel, blk.proj->bias, 2, Padding::same);
    shortcut = batchnorm1d(t, shortcut, blk.proj_bn->gamma, blk.proj_bn->beta, s3, true, 0.1, 1e-5);
    Tensor expect = relu(t, add(t, branch, shortcut));

    CHECK(got.vec() == expect.vec());
}

TEST_CASE("streams produce 64-wide embeddings on 2560-sample windows") {
    ModelSpec spec;  // paper-scale defaults: widths 16/32/64, kernel 7
    spec.attx.reset();
    MultimodalModel model(spec);
    model.init_params(1);
    Tape tape;
    Rng rng(65);
    Tensor ecg = rand_tensor({2, 2560, 1}, rng);
    Tensor eda = rand_tensor({2, 2560, 1}, rng);
    StageTrace trace;
    Tensor logits = model.forward(tape, ecg, eda, true, &trace);
    CHECK(logits.shape() == std::vector<std::size_t>{2, 2});
    // stage outputs stay shape-aligned between the streams
    for (int s = 0; s < 3; ++s) CHECK(trace.ecg_stage[s] == trace.eda_stage[s]);
    CHECK(trace.ecg_stage[0] == std::vector<std::size_t>{2, 1280, 16});
    CHECK(trace.ecg_stage[1] == std::vector<std::size_t>{2, 640, 32});
    CHECK(trace.ecg_stage[2] == std::vector<std::size_t>{2, 320, 64});

    // softmax over logits behaves like probabilities
    Tensor probs = ops::softmax(tape, logits, 1);
    for (std::size_t b = 0; b < 2; ++b)
        CHECK(probs.at({b, 0}) + probs.at({b, 1}) == doctest::Approx(1.0).epsilon(1e-9));
}

TEST_CASE("parameter count matches the closed-form audit for default widths") {
    ModelSpec spec;
    spec.attx.reset();
    MultimodalModel model(spec);
    std::size_t total = 0;
    for (auto& p : model.parameters()) total += p.tensor.numel();

    auto conv_n = [](std::size_t k, std::size_t ci, std::size_t co) { return k * ci * co + co; };
    auto bn_n = [](std::size_t c) { return 2 * c; };
    auto dense_n = [](std::size_t i, std::size_t o) { return i * o + o; };
    auto se_n = [&](std::size_t c, std::size_t r) {
        const std::size_t mid = c < r ? 1 : c / r;
        return dense_n(c, mid) + dense_n(mid, c);
    };
    auto conv_block = [&](std::size_t k, std::size_t ci, std::size_t co) {
        return conv_n(k, ci, co) + bn_n(co);
    };
    auto se_res = [&](std::size_t k, std::size_t ci, std::size_t co, bool proj) {
        std::size_t n = conv_n(k, ci, co) + bn_n(co) + conv_n(k, co, co) + bn_n(co) + se_n(co, 4);
        if (proj) n += conv_n(1, ci, co) + bn_n(co);
        return n;
    };

    std::size_t expect = 0;
    // ecg: conv block; SE conv + 2 SE id; SE conv + SE id; 2 fc
    expect += conv_block(7, 1, 16);
    expect += se_res(7, 16, 32, true) + 2 * se_res(7, 32, 32, false);
    expect += se_res(7, 32, 64, true) + se_res(7, 64, 64, false);
    expect += dense_n(64, 64) + dense_n(64, 64);
    // eda: 1 + 2 + 2 conv blocks; stage 4: 2 conv blocks + SE; 2 fc
    expect += conv_block(7, 1, 16);
    expect += conv_block(7, 16, 32) + conv_block(7, 32, 32);
    expect += conv_block(7, 32, 64) + conv_block(7, 64, 64);
    expect += conv_block(7, 64, 64) + conv_block(7, 64, 64) + se_n(64, 4);
    expect += dense_n(64, 64) + dense_n(64, 64);
    // head
    expect += dense_n(128, 128) + dense_n(128, 128) + dense_n(128, 2);

    CHECK(total == expect);
}

TEST_CASE("full type x stage grid builds and runs forward/backward") {
    Rng rng(66);
    Tensor ecg = rand_tensor({4, 64, 1}, rng);
    Tensor eda = rand_tensor({4, 64, 1}, rng);
    const std::vector<int> labels_v{0, 1, 0, 1};

    const std::vector<std::vector<int>> stage_sets{{1}, {2}, {3}, {1, 2}, {1, 3}, {2, 3}, {1, 2, 3}};
    int built = 0;
    for (ConnType type : {ConnType::I, ConnType::II, ConnType::III}) {
        for (const auto& stages : stage_sets) {
            ModelSpec spec = tiny_spec();
            spec.attx = AttXSpec{type, stages, AttnMode::learned, ReduceMode::scale};
            MultimodalModel model(spec);
            model.init_params(100 + built);

            Tape tape;
            StageTrace trace;
            Tensor logits = model.forward(tape, ecg, eda, true, &trace);
            REQUIRE(logits.shape() == std::vector<std::size_t>{4, 2});
            Tensor loss = ops::cross_entropy(tape, logits, labels_v);
            tape.backward(loss);

            // channel-doubling contract at every connected stage
            for (int s = 1; s <= 3; ++s) {
                const auto m = spec.ecg.widths[static_cast<std::size_t>(s - 1)];
                const bool connected =
                    std::count(stages.begin(), stages.end(), s) > 0;
                const std::size_t ecg_ch = trace.ecg_stage[s - 1].back();
                const std::size_t eda_ch = trace.eda_stage[s - 1].back();
                if (connected && type != ConnType::I) CHECK(ecg_ch == 2 * m);
                if (connected && type == ConnType::I) CHECK(ecg_ch == m);
                if (connected && type != ConnType::II) CHECK(eda_ch == 2 * m);
                if (connected && type == ConnType::II) CHECK(eda_ch == m);
                if (!connected) {
                    CHECK(ecg_ch == m);
                    CHECK(eda_ch == m);
                }
            }

            // gradient reaches every connection's attention parameters
            for (auto& p : model.parameters()) {
                if (p.name.find("attx.") == std::string::npos) continue;
                if (p.name.find(".W") == std::string::npos &&
                    p.name.find(".w_u") == std::string::npos)
                    continue;
                REQUIRE(p.tensor.has_grad());
                double norm = 0;
                for (double g : p.tensor.grad_vec()) norm += g * g;
                CHECK(norm > 0.0);
            }
            ++built;
        }
    }
    CHECK(built == 21);

    // the no-connection baseline builds and runs too
    ModelSpec base = tiny_spec();
    MultimodalModel model(base);
    model.init_params(7);
    Tape tape;
    Tensor logits = model.forward(tape, ecg, eda, true);
    Tensor loss = ops::cross_entropy(tape, logits, labels_v);
    tape.backward(loss);
    CHECK(std::isfinite(loss.value()));
}

TEST_CASE("attx disabled reproduces the feature-fusion baseline bit-identically") {
    ModelSpec with_none = tiny_spec();
    with_none.attx.reset();
    ModelSpec baseline = tiny_spec();

    MultimodalModel a(with_none), b(baseline);
    a.init_params(42);
    b.init_params(42);

    Rng rng(67);
    Tensor ecg = rand_tensor({3, 64, 1}, rng);
    Tensor eda = rand_tensor({3, 64, 1}, rng);
    Tape t1, t2;
    Tensor la = a.forward(t1, ecg, eda, false);
    Tensor lb = b.forward(t2, ecg, eda, false);
    CHECK(la.vec() == lb.vec());
}

TEST_CASE("unimodal models ignore the other modality entirely") {
    ModelSpec spec = tiny_spec();
    spec.mode = ModelMode::unimodal_ecg;
    MultimodalModel model(spec);
    model.init_params(9);

    Rng rng(68);
    Tensor ecg = rand_tensor({2, 64, 1}, rng);
    Tensor eda1 = rand_tensor({2, 64, 1}, rng);
    Tensor eda2 = rand_tensor({2, 64, 1}, rng);
    Tape t1, t2;
    Tensor l1 = model.forward(t1, ecg, eda1, false);
    Tensor l2 = model.forward(t2, ecg, eda2, false);
    CHECK(l1.vec() == l2.vec());

    // connections with a single stream are a build error
    ModelSpec bad = tiny_spec();
    bad.mode = ModelMode::unimodal_eda;
    bad.attx = AttXSpec{};
    CHECK_THROWS_AS(MultimodalModel{bad}, std::invalid_argument);
}

TEST_CASE("misaligned stream configs are a build error when connections exist") {
    ModelSpec spec = tiny_spec();
    spec.attx = AttXSpec{};
    spec.eda.widths = {4, 6, 10};
    CHECK_THROWS_AS(MultimodalModel{spec}, std::invalid_argument);

    ModelSpec spec2 = tiny_spec();
    spec2.attx = AttXSpec{};
    spec2.attx->stages = {};
    CHECK_THROWS_AS(MultimodalModel{spec2}, std::invalid_argument);

    ModelSpec spec3 = tiny_spec();
    spec3.attx = AttXSpec{};
    spec3.attx->stages = {4};
    CHECK_THROWS_AS(MultimodalModel{spec3}, std::invalid_argument);
}

TEST_CASE("end-to-end gradients including attention params match finite differences") {
    ModelSpec spec = tiny_spec();
    spec.ecg.widths = {3, 4, 5};
    spec.eda.widths = {3, 4, 5};
    spec.eda.stage4_width = 5;
    spec.attx = AttXSpec{ConnType::III, {2}, AttnMode::learned, ReduceMode::scale};
    MultimodalModel model(spec);
    model.init_params(3);

    Rng rng(69);
    Tensor ecg = rand_tensor({2, 32, 1}, rng);
    Tensor eda = rand_tensor({2, 32, 1}, rng);
    const std::vector<int> labels{0, 1};

    auto forward = [&]() {
        Tape t;
        t.set_recording(false);
        return ops::cross_entropy(t, model.forward(t, ecg, eda, true), labels).value();
    };
    Tape tape;
    Tensor loss = ops::cross_entropy(tape, model.forward(tape, ecg, eda, true), labels);
    tape.backward(loss);

    double worst = 0;
    for (auto& p : model.parameters()) {
        if (p.name.find("attx.") != 0) continue;
        REQUIRE(p.tensor.has_grad());
        worst = std::max(worst, testutil::check_grads(forward, p.tensor, p.tensor.grad_vec(), 1e-4));
    }
    CHECK(worst < 1e-3);
}
