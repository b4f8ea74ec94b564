#define DOCTEST_CONFIG_IMPLEMENT_WITH_MAIN
#include <doctest.h>

#include "attx/kernels.hpp"
#include "attx/rng.hpp"

#include <cmath>
#include <vector>

using namespace attx;

namespace {

std::vector<double> rand_vec(std::size_t n, Rng& rng, double lo = -2.0, double hi = 2.0) {
    std::vector<double> v(n);
    for (double& x : v) x = rng.uniform(lo, hi);
    return v;
}

}  // namespace

TEST_CASE("scalar kernel basics") {
    const auto& K = kernels::scalar_backend();
    std::vector<double> a{1, 2, 3}, b{4, 5, 6}, out(3);
    K.add(a.data(), b.data(), out.data(), 3);
    CHECK(out == std::vector<double>{5, 7, 9});
    K.sub(a.data(), b.data(), out.data(), 3);
    CHECK(out == std::vector<double>{-3, -3, -3});
    K.mul(a.data(), b.data(), out.data(), 3);
    CHECK(out == std::vector<double>{4, 10, 18});
    CHECK(K.dot(a.data(), b.data(), 3) == 32.0);
    CHECK(K.sum(a.data(), 3) == 6.0);

    std::vector<double> x{-1.0, 0.0, 2.5};
    K.relu(x.data(), out.data(), 3);
    CHECK(out == std::vector<double>{0, 0, 2.5});

    std::vector<double> g{10, 20, 30}, acc(3, 1.0);
    K.relu_bwd(x.data(), g.data(), acc.data(), 3);
    CHECK(acc == std::vector<double>{1, 1, 31});
}

TEST_CASE("element-wise kernels are bit-identical across backends") {
    if (!kernels::avx2_available()) return;
    const auto& S = kernels::scalar_backend();
    const auto& V = kernels::avx2_backend();
    Rng rng(7);

    for (std::size_t n : {1u, 3u, 4u, 7u, 8u, 64u, 129u}) {
        auto a = rand_vec(n, rng), b = rand_vec(n, rng), s = rand_vec(n, rng),
             t = rand_vec(n, rng);
        std::vector<double> o1(n), o2(n);

        S.add(a.data(), b.data(), o1.data(), n);
        V.add(a.data(), b.data(), o2.data(), n);
        CHECK(o1 == o2);
        S.sub(a.data(), b.data(), o1.data(), n);
        V.sub(a.data(), b.data(), o2.data(), n);
        CHECK(o1 == o2);
        S.mul(a.data(), b.data(), o1.data(), n);
        V.mul(a.data(), b.data(), o2.data(), n);
        CHECK(o1 == o2);
        S.scale(1.7, a.data(), o1.data(), n);
        V.scale(1.7, a.data(), o2.data(), n);
        CHECK(o1 == o2);
        S.affine(a.data(), s.data(), t.data(), o1.data(), n);
        V.affine(a.data(), s.data(), t.data(), o2.data(), n);
        CHECK(o1 == o2);
        S.relu(a.data(), o1.data(), n);
        V.relu(a.data(), o2.data(), n);
        CHECK(o1 == o2);

        auto y1 = rand_vec(n, rng);
        auto y2 = y1;
        S.fmadd(a.data(), b.data(), y1.data(), n);
        V.fmadd(a.data(), b.data(), y2.data(), n);
        CHECK(y1 == y2);
        y2 = y1;
        S.axpy(-0.3, a.data(), y1.data(), n);
        V.axpy(-0.3, a.data(), y2.data(), n);
        CHECK(y1 == y2);
        y2 = y1;
        S.relu_bwd(a.data(), b.data(), y1.data(), n);
        V.relu_bwd(a.data(), b.data(), y2.data(), n);
        CHECK(y1 == y2);
    }
}

TEST_CASE("reduction kernels agree across backends within tolerance") {
    if (!kernels::avx2_available()) return;
    const auto& S = kernels::scalar_backend();
    const auto& V = kernels::avx2_backend();
    Rng rng(11);
    for (std::size_t n : {1u, 5u, 31u, 256u, 1000u}) {
        auto a = rand_vec(n, rng), b = rand_vec(n, rng);
        const double d1 = S.dot(a.data(), b.data(), n);
        const double d2 = V.dot(a.data(), b.data(), n);
        CHECK(std::fabs(d1 - d2) <= 1e-12 * (1.0 + std::fabs(d1)) * static_cast<double>(n));
        const double s1 = S.sum(a.data(), n);
        const double s2 = V.sum(a.data(), n);
        CHECK(std::fabs(s1 - s2) <= 1e-12 * (1.0 + std::fabs(s1)) * static_cast<double>(n));
    }
}

TEST_CASE("adam kernel is bit-identical across backends") {
    if (!kernels::avx2_available()) return;
    const auto& S = kernels::scalar_backend();
    const auto& V = kernels::avx2_backend();
    Rng rng(13);
    const std::size_t n = 37;
    auto g = rand_vec(n, rng);
    auto p1 = rand_vec(n, rng), m1 = rand_vec(n, rng, 0, 1), v1 = rand_vec(n, rng, 0, 1);
    auto p2 = p1, m2 = m1, v2 = v1;
    S.adam_update(p1.data(), g.data(), m1.data(), v1.data(), n, 1e-3, 0.9, 0.999, 1e-8, 1.5, 1.2);
    V.adam_update(p2.data(), g.data(), m2.data(), v2.data(), n, 1e-3, 0.9, 0.999, 1e-8, 1.5, 1.2);
    CHECK(p1 == p2);
    CHECK(m1 == m2);
    CHECK(v1 == v2);
}

TEST_CASE("backend selection") {
    CHECK(std::string(kernels::active().name) ==
          (kernels::avx2_available() ? "avx2" : "scalar"));
    kernels::select_backend("scalar");
    CHECK(std::string(kernels::active().name) == "scalar");
    if (kernels::avx2_available()) {
        kernels::select_backend("avx2");
        CHECK(std::string(kernels::active().name) == "avx2");
    }
    CHECK_THROWS(kernels::select_backend("sse9"));
}
