#define DOCTEST_CONFIG_IMPLEMENT_WITH_MAIN
#include <doctest.h>

#include "attx/attx_block.hpp"
#include "attx/rng.hpp"

#include "testutil.hpp"

#include <cmath>

using namespace attx;
using testutil::check_grads;
using testutil::rand_tensor;

namespace {

AttXParams make_params(std::size_t m, Rng& rng) {
    AttXParams p;
    p.W = Tensor::zeros({2, 2}, true);
    p.w_u = Tensor::zeros({m}, true);
    for (double& v : p.W.vec()) v = rng.uniform(-1, 1);
    for (double& v : p.w_u.vec()) v = rng.uniform(-1, 1);
    return p;
}

}  // namespace

TEST_CASE("stack_modalities places ecg in slice 0, eda in slice 1") {
    Tape tape;
    Tensor ze = Tensor::zeros({1, 2, 3});
    Tensor zd = Tensor::full({1, 2, 3}, 1.0);
    Tensor s = stack_modalities(tape, ze, zd);
    REQUIRE(s.shape() == std::vector<std::size_t>{1, 2, 3, 2});
    for (std::size_t i = 0; i < 6; ++i) {
        CHECK(s.vec()[2 * i] == 0.0);
        CHECK(s.vec()[2 * i + 1] == 1.0);
    }

    Tensor a = Tensor::from_data({1, 1, 1}, {4.25});
    Tensor b = Tensor::from_data({1, 1, 1}, {-7.5});
    Tensor s2 = stack_modalities(tape, a, b);
    CHECK(s2.vec() == std::vector<double>{4.25, -7.5});

    CHECK_THROWS_AS(stack_modalities(tape, ze, Tensor::zeros({1, 2, 4})), std::invalid_argument);
}

TEST_CASE("stack round-trip returns the originals exactly") {
    Tape tape;
    Rng rng(41);
    Tensor ze = rand_tensor({2, 4, 5}, rng);
    Tensor zd = rand_tensor({2, 4, 5}, rng);
    Tensor s = stack_modalities(tape, ze, zd);
    Tensor back_e = ops::select_axis(tape, s, 3, 0);
    Tensor back_d = ops::select_axis(tape, s, 3, 1);
    CHECK(back_e.vec() == ze.vec());
    CHECK(back_d.vec() == zd.vec());
}

TEST_CASE("attention_weights: identical slices give theta = 0.5") {
    // Equal slices feed both modality logits the same value whenever W's
    // column sums agree (any c*identity qualifies); the softmax then splits
    // evenly. A general W mixes the modalities asymmetrically even for equal
    // slices, so the symmetry is scoped to this class.
    Tape tape;
    Rng rng(42);
    Tensor z = rand_tensor({2, 3, 4}, rng);
    Tensor s = stack_modalities(tape, z, z);

    for (double c : {1.0, 0.37, -2.0}) {
        AttXParams p = make_params(4, rng);
        p.W = Tensor::from_data({2, 2}, {c, 0, 0, c});
        Tensor theta = attention_weights(tape, s, p);
        REQUIRE(theta.shape() == std::vector<std::size_t>{2, 3, 2, 4});
        for (double v : theta.vec()) CHECK(std::fabs(v - 0.5) < 1e-9);
    }
    {
        // random W with equalized column sums
        AttXParams p = make_params(4, rng);
        p.W.vec()[2] = p.W.vec()[1] + p.W.vec()[3] - p.W.vec()[0];  // col0 sum == col1 sum
        Tensor theta = attention_weights(tape, s, p);
        for (double v : theta.vec()) CHECK(std::fabs(v - 0.5) < 1e-9);
    }
}

TEST_CASE("attention_weights: W = 0 gives theta = 0.5 everywhere") {
    Tape tape;
    Rng rng(43);
    Tensor ze = rand_tensor({1, 3, 4}, rng);
    Tensor zd = rand_tensor({1, 3, 4}, rng);
    AttXParams p = make_params(4, rng);
    for (double& v : p.W.vec()) v = 0.0;
    Tensor theta = attention_weights(tape, stack_modalities(tape, ze, zd), p);
    for (double v : theta.vec()) CHECK(v == 0.5);
}

TEST_CASE("attention_weights: closed-form softmax at n=m=1") {
    Tape tape;
    // W = identity, w_u = [1]; positive inputs pass relu untouched
    AttXParams p;
    p.W = Tensor::from_data({2, 2}, {1, 0, 0, 1});
    p.w_u = Tensor::from_data({1}, {1.0});
    const double u1 = 1.0, u2 = 1.0 + std::log(3.0);
    Tensor s = stack_modalities(tape, Tensor::from_data({1, 1, 1}, {u1}),
                                Tensor::from_data({1, 1, 1}, {u2}));
    Tensor theta = attention_weights(tape, s, p);
    CHECK(theta.vec()[0] == doctest::Approx(0.25).epsilon(1e-12));
    CHECK(theta.vec()[1] == doctest::Approx(0.75).epsilon(1e-12));
}

TEST_CASE("attention normalization invariant over random inputs") {
    Rng rng(44);
    for (int trial = 0; trial < 50; ++trial) {
        Tape tape;
        const std::size_t n = 1 + static_cast<std::size_t>(rng.uniform_int(1, 6));
        const std::size_t m = 1 + static_cast<std::size_t>(rng.uniform_int(1, 8));
        Tensor ze = rand_tensor({1, n, m}, rng, -3, 3);
        Tensor zd = rand_tensor({1, n, m}, rng, -3, 3);
        AttXParams p = make_params(m, rng);
        Tensor theta = attention_weights(tape, stack_modalities(tape, ze, zd), p);
        for (std::size_t i = 0; i < n; ++i)
            for (std::size_t c = 0; c < m; ++c) {
                const double t0 = theta.at({0, i, 0, c});
                const double t1 = theta.at({0, i, 1, c});
                CHECK(std::fabs(t0 + t1 - 1.0) < 1e-9);
                CHECK(t0 > 0.0);
                CHECK(t0 < 1.0);
            }
    }
}

TEST_CASE("attention symmetry: swapping slices with W = c*I swaps theta") {
    Tape tape;
    Rng rng(45);
    Tensor ze = rand_tensor({1, 2, 3}, rng);
    Tensor zd = rand_tensor({1, 2, 3}, rng);
    AttXParams p;
    p.W = Tensor::from_data({2, 2}, {0.7, 0, 0, 0.7});
    p.w_u = rand_tensor({3}, rng, 0.1, 1.0);
    Tensor th = attention_weights(tape, stack_modalities(tape, ze, zd), p);
    Tensor th_sw = attention_weights(tape, stack_modalities(tape, zd, ze), p);
    for (std::size_t i = 0; i < 2; ++i)
        for (std::size_t c = 0; c < 3; ++c) {
            CHECK(th.at({0, i, 0, c}) == doctest::Approx(th_sw.at({0, i, 1, c})).epsilon(1e-12));
            CHECK(th.at({0, i, 1, c}) == doctest::Approx(th_sw.at({0, i, 0, c})).epsilon(1e-12));
        }
}

TEST_CASE("apply_attention: unit, zero, and half weights") {
    Tape tape;
    Rng rng(46);
    Tensor ze = rand_tensor({1, 2, 3}, rng);
    Tensor zd = rand_tensor({1, 2, 3}, rng);

    Tensor ones = Tensor::full({1, 2, 2, 3}, 1.0);
    auto [e1, d1] = apply_attention(tape, ones, ze, zd);
    CHECK(e1.vec() == ze.vec());
    CHECK(d1.vec() == zd.vec());

    Tensor zeros = Tensor::zeros({1, 2, 2, 3});
    auto [e0, d0] = apply_attention(tape, zeros, ze, zd);
    for (double v : e0.vec()) CHECK(v == 0.0);
    for (double v : d0.vec()) CHECK(v == 0.0);

    Tensor half = Tensor::full({1, 2, 2, 3}, 0.5);
    auto [eh, dh] = apply_attention(tape, half, ze, zd);
    for (std::size_t i = 0; i < ze.numel(); ++i)
        CHECK(eh.vec()[i] + dh.vec()[i] ==
              doctest::Approx(0.5 * (ze.vec()[i] + zd.vec()[i])).epsilon(1e-12));
}

TEST_CASE("gradients flow through theta to W and w_u (finite differences)") {
    Rng rng(47);
    Tensor ze = rand_tensor({1, 2, 3}, rng, 0.1, 1.0, true);
    Tensor zd = rand_tensor({1, 2, 3}, rng, 0.1, 1.0, true);
    AttXParams p = make_params(3, rng);
    Tensor mask_e = rand_tensor({1, 2, 3}, rng);
    Tensor mask_d = rand_tensor({1, 2, 3}, rng);

    auto forward = [&]() {
        Tape t;
        t.set_recording(false);
        Tensor s = stack_modalities(t, ze, zd);
        Tensor theta = attention_weights(t, s, p);
        auto [he, hd] = apply_attention(t, theta, ze, zd);
        return ops::reduce_sum(t, ops::add(t, ops::mul(t, he, mask_e), ops::mul(t, hd, mask_d)))
            .value();
    };
    Tape tape;
    {
        Tensor s = stack_modalities(tape, ze, zd);
        Tensor theta = attention_weights(tape, s, p);
        auto [he, hd] = apply_attention(tape, theta, ze, zd);
        Tensor loss = ops::reduce_sum(
            tape, ops::add(tape, ops::mul(tape, he, mask_e), ops::mul(tape, hd, mask_d)));
        tape.backward(loss);
    }
    CHECK(check_grads(forward, p.W, p.W.grad_vec(), 1e-5) < 1e-3);
    CHECK(check_grads(forward, p.w_u, p.w_u.grad_vec(), 1e-5) < 1e-3);
    CHECK(check_grads(forward, ze, ze.grad_vec(), 1e-5) < 1e-3);
    CHECK(check_grads(forward, zd, zd.grad_vec(), 1e-5) < 1e-3);
}

TEST_CASE("contract reduce mode: theta loses the channel axis but still normalizes") {
    Tape tape;
    Rng rng(48);
    Tensor ze = rand_tensor({2, 3, 4}, rng);
    Tensor zd = rand_tensor({2, 3, 4}, rng);
    AttXParams p = make_params(4, rng);
    Tensor theta = attention_weights(tape, stack_modalities(tape, ze, zd), p, ReduceMode::contract);
    REQUIRE(theta.shape() == std::vector<std::size_t>{2, 3, 2});
    for (std::size_t b = 0; b < 2; ++b)
        for (std::size_t i = 0; i < 3; ++i)
            CHECK(std::fabs(theta.at({b, i, 0}) + theta.at({b, i, 1}) - 1.0) < 1e-9);
    auto [he, hd] = apply_attention(tape, theta, ze, zd, ReduceMode::contract);
    CHECK(he.shape() == ze.shape());
    CHECK(hd.shape() == zd.shape());
}

TEST_CASE("cross connection: channel arithmetic per type") {
    Rng rng(49);
    Tensor ze = rand_tensor({1, 8, 16}, rng);
    Tensor zd = rand_tensor({1, 8, 16}, rng);

    {
        Tape tape;
        AttXConnection conn(16, ConnType::III, AttnMode::learned, ReduceMode::scale);
        auto params = std::vector<NamedParam>{};
        conn.collect("c", params);
        init_params(params, 7);
        auto [ne, nd] = conn.forward(tape, ze, zd, true);
        CHECK(ne.shape() == std::vector<std::size_t>{1, 8, 32});
        CHECK(nd.shape() == std::vector<std::size_t>{1, 8, 32});
    }
    {
        Tape tape;
        AttXConnection conn(16, ConnType::I, AttnMode::learned, ReduceMode::scale);
        auto params = std::vector<NamedParam>{};
        conn.collect("c", params);
        init_params(params, 7);
        auto [ne, nd] = conn.forward(tape, ze, zd, true);
        CHECK(ne.shape() == std::vector<std::size_t>{1, 8, 16});  // ecg unchanged
        CHECK(ne.vec() == ze.vec());
        CHECK(nd.shape() == std::vector<std::size_t>{1, 8, 32});
    }
    {
        Tape tape;
        AttXConnection conn(16, ConnType::II, AttnMode::learned, ReduceMode::scale);
        auto params = std::vector<NamedParam>{};
        conn.collect("c", params);
        init_params(params, 7);
        auto [ne, nd] = conn.forward(tape, ze, zd, true);
        CHECK(ne.shape() == std::vector<std::size_t>{1, 8, 32});
        CHECK(nd.shape() == std::vector<std::size_t>{1, 8, 16});
        CHECK(nd.vec() == zd.vec());
    }
}

TEST_CASE("cross connection with theta = 0.5 concatenates the half-weighted stream") {
    // W = 0 forces theta = 0.5; check the pre-batchnorm composition directly.
    Tape tape;
    Rng rng(50);
    Tensor ze = rand_tensor({1, 4, 3}, rng);
    Tensor zd = rand_tensor({1, 4, 3}, rng);
    AttXParams p;
    p.W = Tensor::zeros({2, 2});
    p.w_u = rand_tensor({3}, rng);
    Tensor theta = attention_weights(tape, stack_modalities(tape, ze, zd), p);
    auto [he, hd] = apply_attention(tape, theta, ze, zd);
    Tensor next_ecg_pre_bn = ops::concat(tape, ze, hd, 2);
    for (std::size_t i = 0; i < 4; ++i)
        for (std::size_t c = 0; c < 3; ++c) {
            CHECK(next_ecg_pre_bn.at({0, i, c}) == ze.at({0, i, c}));
            CHECK(next_ecg_pre_bn.at({0, i, c + 3}) ==
                  doctest::Approx(0.5 * zd.at({0, i, c})).epsilon(1e-12));
        }
    (void)he;
}

TEST_CASE("fixed-one connection equals an independently assembled concat + batchnorm") {
    Rng rng(51);
    Tensor ze = rand_tensor({2, 5, 4}, rng);
    Tensor zd = rand_tensor({2, 5, 4}, rng);

    AttXConnection conn(4, ConnType::III, AttnMode::fixed_one, ReduceMode::scale);
    std::vector<NamedParam> params;
    conn.collect("c", params);
    init_params(params, 3);

    Tape tape;
    auto [ne, nd] = conn.forward(tape, ze, zd, true);

    // oracle: raw concat fed through a batchnorm with the same parameters
    auto bn_like = [&](const std::string& which, Tape& t, const Tensor& x) {
        Tensor gamma, beta;
        for (auto& p : params) {
            if (p.name == "c." + which + ".gamma") gamma = p.tensor;
            if (p.name == "c." + which + ".beta") beta = p.tensor;
        }
        ops::BatchNormState st;
        return ops::batchnorm1d(t, x, gamma, beta, st, true, 0.1, 1e-5);
    };
    Tape t2;
    Tensor expect_e = bn_like("bn_ecg", t2, ops::concat(t2, ze, zd, 2));
    Tensor expect_d = bn_like("bn_eda", t2, ops::concat(t2, zd, ze, 2));
    CHECK(ne.vec() == expect_e.vec());
    CHECK(nd.vec() == expect_d.vec());
}
