// Copyright 2026 The adfg Authors
// SPDX-License-Identifier: Apache-2.0

#include <cmath>
#include <functional>
#include <limits>
#include <random>

#include "doctest.h"

#include "adfg/common/error.hpp"
#include "adfg/numerics/grad_check.hpp"
#include "adfg/numerics/linalg.hpp"
#include "adfg/numerics/ops.hpp"

using namespace adfg;
using namespace adfg::numerics;

namespace {

Tensor<double> random_tensor(Shape shape, std::uint64_t seed, double scale = 1.0) {
    Tensor<double> t(std::move(shape));
    std::mt19937_64 rng(seed);
    std::uniform_real_distribution<double> d(-scale, scale);
    for (double& x : t.values()) x = d(rng);
    return t;
}

/// Reduces any output to a scalar through a fixed random linear functional.
Var probe(Graph<double>& g, Var out, std::uint64_t seed) {
    const Var w = g.constant(random_tensor(g.value(out).shape(), seed));
    return sum(g, hadamard(g, out, w));
}

double check(const ScalarFunction& f, std::vector<Tensor<double>>& params) {
    std::vector<Tensor<double>*> ptrs;
    for (auto& p : params) ptrs.push_back(&p);
    return grad_check(f, ptrs, {.epsilon = 1e-6, .tolerance = 1e-6}).max_relative_error;
}

ErrorKind kind_of(const std::function<void()>& f) {
    try {
        f();
    } catch (const Error& e) {
        return e.kind();
    }
    FAIL("expected an adfg::Error");
    return ErrorKind::input;
}

}  // namespace

TEST_CASE("tensor construction and element access") {
    auto m = Tensor<double>::matrix({{1, 2, 3}, {4, 5, 6}});
    CHECK(m.rows() == 2);
    CHECK(m.cols() == 3);
    CHECK(m(1, 2) == 6);
    CHECK(m.numel() == 6);
    auto id = Tensor<double>::identity(3);
    CHECK(id(0, 0) == 1);
    CHECK(id(0, 1) == 0);
    CHECK(shape_numel({2, 3, 4}) == 24);
    CHECK(kind_of([] { (void)Tensor<double>::vector({1, 2}).cols(); }) == ErrorKind::dimension);
}

TEST_CASE("matmul and linear agree with naive loops") {
    const auto a = random_tensor({5, 7}, 1);
    const auto b = random_tensor({7, 3}, 2);
    const auto w = random_tensor({4, 7}, 3);
    Graph<double> g;
    const Var va = g.constant(a), vb = g.constant(b), vw = g.constant(w);
    const auto& mm = g.value(matmul(g, va, vb));
    const auto& lin = g.value(linear(g, va, vw));
    for (int i = 0; i < 5; ++i) {
        for (int j = 0; j < 3; ++j) {
            double s = 0;
            for (int k = 0; k < 7; ++k) s += a(i, k) * b(k, j);
            CHECK(mm(i, j) == doctest::Approx(s).epsilon(1e-12));
        }
        for (int j = 0; j < 4; ++j) {
            double s = 0;
            for (int k = 0; k < 7; ++k) s += a(i, k) * w(j, k);
            CHECK(lin(i, j) == doctest::Approx(s).epsilon(1e-12));
        }
    }
}

TEST_CASE("elementwise ops pass finite-difference checks") {
    std::vector<Tensor<double>> p{random_tensor({3, 4}, 11), random_tensor({3, 4}, 12)};
    SUBCASE("add") {
        CHECK(check([](Graph<double>& g, std::span<const Var> v) { return probe(g, add(g, v[0], v[1]), 1); }, p) < 1e-6);
    }
    SUBCASE("sub") {
        CHECK(check([](Graph<double>& g, std::span<const Var> v) { return probe(g, sub(g, v[0], v[1]), 2); }, p) < 1e-6);
    }
    SUBCASE("scale") {
        CHECK(check([](Graph<double>& g, std::span<const Var> v) { return probe(g, scale(g, v[0], 0.7), 3); }, p) < 1e-6);
    }
    SUBCASE("hadamard") {
        CHECK(check([](Graph<double>& g, std::span<const Var> v) { return probe(g, hadamard(g, v[0], v[1]), 4); }, p) <
              1e-6);
    }
    SUBCASE("transpose") {
        CHECK(check([](Graph<double>& g, std::span<const Var> v) { return probe(g, transpose(g, v[0]), 5); }, p) < 1e-6);
    }
    SUBCASE("silu") {
        CHECK(check([](Graph<double>& g, std::span<const Var> v) { return probe(g, silu(g, v[0]), 6); }, p) < 1e-6);
    }
    SUBCASE("softmax_rows") {
        CHECK(check([](Graph<double>& g, std::span<const Var> v) { return probe(g, softmax_rows(g, v[0]), 7); }, p) <
              1e-6);
    }
}

TEST_CASE("matrix ops pass finite-difference checks") {
    SUBCASE("matmul") {
        std::vector<Tensor<double>> p{random_tensor({3, 4}, 21), random_tensor({4, 2}, 22)};
        CHECK(check([](Graph<double>& g, std::span<const Var> v) { return probe(g, matmul(g, v[0], v[1]), 1); }, p) <
              1e-6);
    }
    SUBCASE("linear") {
        std::vector<Tensor<double>> p{random_tensor({3, 4}, 23), random_tensor({5, 4}, 24)};
        CHECK(check([](Graph<double>& g, std::span<const Var> v) { return probe(g, linear(g, v[0], v[1]), 2); }, p) <
              1e-6);
    }
    SUBCASE("kron") {
        std::vector<Tensor<double>> p{random_tensor({2, 3}, 25), random_tensor({3, 2}, 26)};
        CHECK(check([](Graph<double>& g, std::span<const Var> v) { return probe(g, kron(g, v[0], v[1]), 3); }, p) < 1e-6);
    }
    SUBCASE("scale_cols") {
        std::vector<Tensor<double>> p{random_tensor({3, 4}, 27), random_tensor({4}, 28)};
        CHECK(check([](Graph<double>& g, std::span<const Var> v) { return probe(g, scale_cols(g, v[0], v[1]), 4); },
                    p) < 1e-6);
    }
    SUBCASE("rms_norm") {
        std::vector<Tensor<double>> p{random_tensor({3, 6}, 29), random_tensor({6}, 30)};
        CHECK(check([](Graph<double>& g, std::span<const Var> v) { return probe(g, rms_norm(g, v[0], v[1], 1e-5), 5); },
                    p) < 1e-6);
    }
    SUBCASE("cayley") {
        std::vector<Tensor<double>> p{random_tensor({4, 4}, 31, 0.3)};
        CHECK(check([](Graph<double>& g, std::span<const Var> v) { return probe(g, cayley(g, v[0]), 6); }, p) < 1e-6);
    }
    SUBCASE("block_diag") {
        std::vector<Tensor<double>> p{random_tensor({2, 2}, 32), random_tensor({3, 3}, 33)};
        CHECK(check([](Graph<double>& g, std::span<const Var> v) {
                  return probe(g, block_diag(g, std::vector<Var>{v[0], v[1]}), 7);
              },
                    p) < 1e-6);
    }
}

TEST_CASE("sequence ops pass finite-difference checks") {
    SUBCASE("embedding") {
        std::vector<Tensor<double>> p{random_tensor({6, 4}, 41)};
        CHECK(check([](Graph<double>& g, std::span<const Var> v) {
                  const std::vector<std::int32_t> ids{3, 0, 3, 5};
                  return probe(g, embedding(g, v[0], std::span<const std::int32_t>(ids)), 1);
              },
                    p) < 1e-6);
    }
    SUBCASE("cross_entropy") {
        std::vector<Tensor<double>> p{random_tensor({4, 5}, 42, 2.0)};
        CHECK(check([](Graph<double>& g, std::span<const Var> v) {
                  const std::vector<std::int32_t> t{1, 4, 0, 2};
                  const std::vector<double> w{1.0, 0.0, 0.5, 1.0};
                  return cross_entropy<double>(g, v[0], t, w, 2.5);
              },
                    p) < 1e-6);
    }
    SUBCASE("rope") {
        std::vector<Tensor<double>> p{random_tensor({5, 8}, 43)};
        CHECK(check([](Graph<double>& g, std::span<const Var> v) { return probe(g, rope(g, v[0], 2, 4, 10000.0), 2); },
                    p) < 1e-6);
    }
    SUBCASE("grouped causal attention") {
        std::vector<Tensor<double>> p{random_tensor({5, 8}, 44), random_tensor({5, 4}, 45),
                                      random_tensor({5, 4}, 46)};
        CHECK(check([](Graph<double>& g, std::span<const Var> v) {
                  return probe(g, causal_attention(g, v[0], v[1], v[2], 2, 1), 3);
              },
                    p) < 1e-6);
    }
}

TEST_CASE("cross entropy matches a hand log-softmax") {
    const auto l = Tensor<double>::matrix({{1.0, 2.0, 3.0}, {0.5, -1.0, 0.0}});
    Graph<double> g;
    const std::vector<std::int32_t> t{2, 0};
    const std::vector<double> w{1.0, 3.0};
    const double got = g.value(cross_entropy<double>(g, g.constant(l), t, w, 4.0))[0];
    const double nll0 = std::log(std::exp(1.0) + std::exp(2.0) + std::exp(3.0)) - 3.0;
    const double nll1 = std::log(std::exp(0.5) + std::exp(-1.0) + std::exp(0.0)) - 0.5;
    CHECK(got == doctest::Approx((nll0 + 3.0 * nll1) / 4.0).epsilon(1e-12));
}

TEST_CASE("causal attention does not look ahead") {
    auto q = random_tensor({6, 8}, 51), k = random_tensor({6, 4}, 52), v = random_tensor({6, 4}, 53);
    Graph<double> g1;
    const Tensor<double> before = g1.value(causal_attention(g1, g1.constant(q), g1.constant(k), g1.constant(v), 2, 1));
    for (int j = 0; j < 4; ++j) {
        k(5, j) += 3.0;
        v(5, j) -= 2.0;
    }
    Graph<double> g2;
    const Tensor<double> after = g2.value(causal_attention(g2, g2.constant(q), g2.constant(k), g2.constant(v), 2, 1));
    for (int i = 0; i < 5; ++i) {
        for (int j = 0; j < 8; ++j) CHECK(before(i, j) == after(i, j));
    }
    bool last_changed = false;
    for (int j = 0; j < 8; ++j) last_changed |= before(5, j) != after(5, j);
    CHECK(last_changed);
}

TEST_CASE("gradients accumulate when a value is reused") {
    const auto x = random_tensor({2, 3}, 61);
    Graph<double> g;
    const Var vx = g.parameter(x);
    g.backward(sum(g, hadamard(g, vx, vx)));
    const auto dx = g.grad(vx);
    for (std::size_t i = 0; i < x.numel(); ++i) CHECK(dx[i] == doctest::Approx(2.0 * x[i]));
}

TEST_CASE("kron_values follows the block definition") {
    const auto a = random_tensor({2, 3}, 71), b = random_tensor({4, 2}, 72);
    const auto k = kron_values(a, b);
    REQUIRE(k.rows() == 8);
    REQUIRE(k.cols() == 6);
    for (int i = 0; i < 2; ++i)
        for (int j = 0; j < 3; ++j)
            for (int r = 0; r < 4; ++r)
                for (int s = 0; s < 2; ++s) CHECK(k(i * 4 + r, j * 2 + s) == a(i, j) * b(r, s));
}

TEST_CASE("cayley of a skew matrix is orthogonal and matches an explicit inverse") {
    const auto u = random_tensor({6, 6}, 81, 0.5);
    const auto s = skew_from(u);
    for (int i = 0; i < 6; ++i)
        for (int j = 0; j < 6; ++j) CHECK(s(i, j) == doctest::Approx(-s(j, i)));
    const auto r = cayley_values(s);
    CHECK(orthogonality_error(r) < 1e-12);
    using M = Eigen::MatrixXd;
    M sm(6, 6);
    for (int i = 0; i < 6; ++i)
        for (int j = 0; j < 6; ++j) sm(i, j) = s(i, j);
    const M want = (M::Identity(6, 6) + sm) * (M::Identity(6, 6) - sm).inverse();
    for (int i = 0; i < 6; ++i)
        for (int j = 0; j < 6; ++j) CHECK(r(i, j) == doctest::Approx(want(i, j)).epsilon(1e-10));
}

TEST_CASE("solve_small agrees with the residual and rejects singular systems") {
    auto a = random_tensor({5, 5}, 91);
    for (int i = 0; i < 5; ++i) a(i, i) += 3.0;
    const auto rhs = random_tensor({5, 2}, 92);
    const auto x = solve_small(a, rhs);
    for (int i = 0; i < 5; ++i) {
        for (int c = 0; c < 2; ++c) {
            double s = 0;
            for (int k = 0; k < 5; ++k) s += a(i, k) * x(k, c);
            CHECK(s == doctest::Approx(rhs(i, c)).epsilon(1e-10));
        }
    }
    auto sing = Tensor<double>::matrix({{1, 2}, {2, 4}});
    CHECK(kind_of([&] { (void)solve_small(sing, Tensor<double>::identity(2)); }) == ErrorKind::singularity);
    CHECK(kind_of([&] { (void)solve_small(random_tensor({70, 70}, 93), Tensor<double>::identity(70)); }) ==
          ErrorKind::dimension);
}

TEST_CASE("shape mismatches raise dimension errors") {
    Graph<double> g;
    const Var a = g.constant(random_tensor({2, 3}, 1));
    const Var b = g.constant(random_tensor({3, 2}, 2));
    CHECK(kind_of([&] { (void)add(g, a, b); }) == ErrorKind::dimension);
    CHECK(kind_of([&] { (void)matmul(g, a, a); }) == ErrorKind::dimension);
    CHECK(kind_of([&] { (void)linear(g, a, b); }) == ErrorKind::dimension);
}

TEST_CASE("non-finite values are reported as numeric errors") {
    Graph<double> g;
    auto t = Tensor<double>::vector({1.0, std::numeric_limits<double>::infinity()});
    const Var a = g.constant(t);
    CHECK(kind_of([&] { (void)scale(g, a, 2.0); }) == ErrorKind::numeric);
}
