// Copyright 2026 The adfg Authors
// SPDX-License-Identifier: Apache-2.0

#include "adfg/numerics/ops.hpp"

#include <algorithm>
#include <cmath>
#include <limits>
#include <memory>

#include "adfg/common/error.hpp"
#include "adfg/numerics/linalg.hpp"

namespace adfg::numerics {
namespace {

template <typename T>
using Mat = typename Tensor<T>::Matrix;

template <typename T>
using StridedMap = Eigen::Map<Mat<T>, 0, Eigen::OuterStride<>>;

template <typename T>
using ConstStridedMap = Eigen::Map<const Mat<T>, 0, Eigen::OuterStride<>>;

void check_same_shape(const Shape& a, const Shape& b, const char* op) {
    ADFG_REQUIRE(a == b, ErrorKind::dimension,
            std::string(op) + ": shape mismatch " + shape_string(a) + " vs " + shape_string(b));
}

void check_matrix(const Shape& a, const char* op) {
    ADFG_REQUIRE(a.size() == 2, ErrorKind::dimension, std::string(op) + ": expected a matrix, got " + shape_string(a));
}

}  // namespace

template <typename T>
Var add(Graph<T>& g, Var a, Var b) {
    const auto& av = g.value(a);
    const auto& bv = g.value(b);
    check_same_shape(av.shape(), bv.shape(), "add");
    Tensor<T> out(av.shape());
    for (std::size_t i = 0; i < out.numel(); ++i) out[i] = av[i] + bv[i];
    return g.push(std::move(out), {a, b}, [a, b](Graph<T>& gr, const Tensor<T>& dy) {
        gr.accumulate(a, dy);
        gr.accumulate(b, dy);
    }, "add");
}

template <typename T>
Var sub(Graph<T>& g, Var a, Var b) {
    const auto& av = g.value(a);
    const auto& bv = g.value(b);
    check_same_shape(av.shape(), bv.shape(), "sub");
    Tensor<T> out(av.shape());
    for (std::size_t i = 0; i < out.numel(); ++i) out[i] = av[i] - bv[i];
    return g.push(std::move(out), {a, b}, [a, b](Graph<T>& gr, const Tensor<T>& dy) {
        gr.accumulate(a, dy);
        if (gr.requires_grad(b)) {
            auto& acc = gr.grad_accumulator(b);
            for (std::size_t i = 0; i < acc.numel(); ++i) acc[i] -= dy[i];
        }
    }, "sub");
}

template <typename T>
Var scale(Graph<T>& g, Var a, T factor) {
    const auto& av = g.value(a);
    Tensor<T> out(av.shape());
    for (std::size_t i = 0; i < out.numel(); ++i) out[i] = av[i] * factor;
    return g.push(std::move(out), {a}, [a, factor](Graph<T>& gr, const Tensor<T>& dy) {
        auto& acc = gr.grad_accumulator(a);
        for (std::size_t i = 0; i < acc.numel(); ++i) acc[i] += dy[i] * factor;
    }, "scale");
}

template <typename T>
Var hadamard(Graph<T>& g, Var a, Var b) {
    const auto& av = g.value(a);
    const auto& bv = g.value(b);
    check_same_shape(av.shape(), bv.shape(), "hadamard");
    Tensor<T> out(av.shape());
    for (std::size_t i = 0; i < out.numel(); ++i) out[i] = av[i] * bv[i];
    return g.push(std::move(out), {a, b}, [a, b](Graph<T>& gr, const Tensor<T>& dy) {
        const auto& av = gr.value(a);
        const auto& bv = gr.value(b);
        if (gr.requires_grad(a)) {
            auto& acc = gr.grad_accumulator(a);
            for (std::size_t i = 0; i < acc.numel(); ++i) acc[i] += dy[i] * bv[i];
        }
        if (gr.requires_grad(b)) {
            auto& acc = gr.grad_accumulator(b);
            for (std::size_t i = 0; i < acc.numel(); ++i) acc[i] += dy[i] * av[i];
        }
    }, "hadamard");
}

template <typename T>
Var sum(Graph<T>& g, Var a) {
    const auto& av = g.value(a);
    T total = 0;
    for (T v : av.values()) total += v;
    return g.push(Tensor<T>({1}, {total}), {a}, [a](Graph<T>& gr, const Tensor<T>& dy) {
        auto& acc = gr.grad_accumulator(a);
        for (std::size_t i = 0; i < acc.numel(); ++i) acc[i] += dy[0];
    }, "sum");
}

template <typename T>
Var transpose(Graph<T>& g, Var a) {
    const auto& av = g.value(a);
    check_matrix(av.shape(), "transpose");
    Tensor<T> out({av.cols(), av.rows()});
    out.mat() = av.mat().transpose();
    return g.push(std::move(out), {a}, [a](Graph<T>& gr, const Tensor<T>& dy) {
        gr.grad_accumulator(a).mat() += dy.mat().transpose();
    }, "transpose");
}

template <typename T>
Var matmul(Graph<T>& g, Var a, Var b) {
    const auto& av = g.value(a);
    const auto& bv = g.value(b);
    check_matrix(av.shape(), "matmul");
    check_matrix(bv.shape(), "matmul");
    ADFG_REQUIRE(av.cols() == bv.rows(), ErrorKind::dimension,
            "matmul: inner dimensions disagree " + shape_string(av.shape()) + " · " + shape_string(bv.shape()));
    Tensor<T> out({av.rows(), bv.cols()});
    out.mat().noalias() = av.mat() * bv.mat();
    return g.push(std::move(out), {a, b}, [a, b](Graph<T>& gr, const Tensor<T>& dy) {
        if (gr.requires_grad(a)) gr.grad_accumulator(a).mat().noalias() += dy.mat() * gr.value(b).mat().transpose();
        if (gr.requires_grad(b)) gr.grad_accumulator(b).mat().noalias() += gr.value(a).mat().transpose() * dy.mat();
    }, "matmul");
}

template <typename T>
Var linear(Graph<T>& g, Var x, Var w) {
    const auto& xv = g.value(x);
    const auto& wv = g.value(w);
    check_matrix(xv.shape(), "linear");
    check_matrix(wv.shape(), "linear");
    ADFG_REQUIRE(xv.cols() == wv.cols(), ErrorKind::dimension,
            "linear: input " + shape_string(xv.shape()) + " does not fit weight " + shape_string(wv.shape()));
    Tensor<T> out({xv.rows(), wv.rows()});
    out.mat().noalias() = xv.mat() * wv.mat().transpose();
    return g.push(std::move(out), {x, w}, [x, w](Graph<T>& gr, const Tensor<T>& dy) {
        if (gr.requires_grad(x)) gr.grad_accumulator(x).mat().noalias() += dy.mat() * gr.value(w).mat();
        if (gr.requires_grad(w)) gr.grad_accumulator(w).mat().noalias() += dy.mat().transpose() * gr.value(x).mat();
    }, "linear");
}

template <typename T>
Var kron(Graph<T>& g, Var a, Var b) {
    Tensor<T> out = kron_values(g.value(a), g.value(b));
    return g.push(std::move(out), {a, b}, [a, b](Graph<T>& gr, const Tensor<T>& dy) {
        const auto& av = gr.value(a);
        const auto& bv = gr.value(b);
        const std::int64_t p = av.rows(), q = av.cols(), r = bv.rows(), s = bv.cols();
        const std::int64_t width = q * s;
        const bool need_a = gr.requires_grad(a);
        const bool need_b = gr.requires_grad(b);
        Tensor<T>* da = need_a ? &gr.grad_accumulator(a) : nullptr;
        Tensor<T>* db = need_b ? &gr.grad_accumulator(b) : nullptr;
        for (std::int64_t i = 0; i < p; ++i) {
            for (std::int64_t j = 0; j < q; ++j) {
                const T aij = av(i, j);
                T acc = 0;
                for (std::int64_t ii = 0; ii < r; ++ii) {
                    const T* grow = dy.data() + (i * r + ii) * width + j * s;
                    const T* brow = bv.data() + ii * s;
                    for (std::int64_t jj = 0; jj < s; ++jj) {
                        acc += grow[jj] * brow[jj];
                        if (db) (*db)(ii, jj) += grow[jj] * aij;
                    }
                }
                if (da) (*da)(i, j) += acc;
            }
        }
    }, "kron");
}

template <typename T>
Var scale_cols(Graph<T>& g, Var x, Var v) {
    const auto& xv = g.value(x);
    const auto& vv = g.value(v);
    check_matrix(xv.shape(), "scale_cols");
    ADFG_REQUIRE(vv.rank() == 1 && vv.dim(0) == xv.cols(), ErrorKind::dimension,
            "scale_cols: vector " + shape_string(vv.shape()) + " does not match " + shape_string(xv.shape()));
    const std::int64_t n = xv.rows(), m = xv.cols();
    Tensor<T> out(xv.shape());
    for (std::int64_t i = 0; i < n; ++i)
        for (std::int64_t j = 0; j < m; ++j) out(i, j) = xv(i, j) * vv[static_cast<std::size_t>(j)];
    return g.push(std::move(out), {x, v}, [x, v, n, m](Graph<T>& gr, const Tensor<T>& dy) {
        const auto& xv = gr.value(x);
        const auto& vv = gr.value(v);
        if (gr.requires_grad(x)) {
            auto& acc = gr.grad_accumulator(x);
            for (std::int64_t i = 0; i < n; ++i)
                for (std::int64_t j = 0; j < m; ++j) acc(i, j) += dy(i, j) * vv[static_cast<std::size_t>(j)];
        }
        if (gr.requires_grad(v)) {
            auto& acc = gr.grad_accumulator(v);
            for (std::int64_t i = 0; i < n; ++i)
                for (std::int64_t j = 0; j < m; ++j) acc[static_cast<std::size_t>(j)] += dy(i, j) * xv(i, j);
        }
    }, "scale_cols");
}

template <typename T>
Var softmax_rows(Graph<T>& g, Var a) {
    const auto& av = g.value(a);
    check_matrix(av.shape(), "softmax_rows");
    Tensor<T> out(av.shape());
    const std::int64_t n = av.rows(), m = av.cols();
    for (std::int64_t i = 0; i < n; ++i) {
        T mx = -std::numeric_limits<T>::infinity();
        for (std::int64_t j = 0; j < m; ++j) mx = std::max(mx, av(i, j));
        T z = 0;
        for (std::int64_t j = 0; j < m; ++j) z += (out(i, j) = std::exp(av(i, j) - mx));
        for (std::int64_t j = 0; j < m; ++j) out(i, j) /= z;
    }
    const Var self{static_cast<std::uint32_t>(g.size())};
    return g.push(std::move(out), {a}, [a, self, n, m](Graph<T>& gr, const Tensor<T>& dy) {
        const auto& y = gr.value(self);
        auto& acc = gr.grad_accumulator(a);
        for (std::int64_t i = 0; i < n; ++i) {
            T dot = 0;
            for (std::int64_t j = 0; j < m; ++j) dot += dy(i, j) * y(i, j);
            for (std::int64_t j = 0; j < m; ++j) acc(i, j) += y(i, j) * (dy(i, j) - dot);
        }
    }, "softmax_rows");
}

template <typename T>
Var silu(Graph<T>& g, Var a) {
    const auto& av = g.value(a);
    Tensor<T> out(av.shape());
    for (std::size_t i = 0; i < out.numel(); ++i) out[i] = av[i] / (T(1) + std::exp(-av[i]));
    return g.push(std::move(out), {a}, [a](Graph<T>& gr, const Tensor<T>& dy) {
        const auto& av = gr.value(a);
        auto& acc = gr.grad_accumulator(a);
        for (std::size_t i = 0; i < acc.numel(); ++i) {
            const T s = T(1) / (T(1) + std::exp(-av[i]));
            acc[i] += dy[i] * s * (T(1) + av[i] * (T(1) - s));
        }
    }, "silu");
}

template <typename T>
Var rms_norm(Graph<T>& g, Var x, Var gain, T eps) {
    const auto& xv = g.value(x);
    const auto& gv = g.value(gain);
    check_matrix(xv.shape(), "rms_norm");
    const std::int64_t n = xv.rows(), d = xv.cols();
    ADFG_REQUIRE(gv.rank() == 1 && gv.dim(0) == d, ErrorKind::dimension, "rms_norm: gain does not match width");
    auto inv = std::make_shared<std::vector<T>>(static_cast<std::size_t>(n));
    Tensor<T> out(xv.shape());
    for (std::int64_t i = 0; i < n; ++i) {
        T ms = 0;
        for (std::int64_t j = 0; j < d; ++j) ms += xv(i, j) * xv(i, j);
        const T r = T(1) / std::sqrt(ms / static_cast<T>(d) + eps);
        (*inv)[static_cast<std::size_t>(i)] = r;
        for (std::int64_t j = 0; j < d; ++j) out(i, j) = xv(i, j) * r * gv[static_cast<std::size_t>(j)];
    }
    return g.push(std::move(out), {x, gain}, [x, gain, inv, n, d](Graph<T>& gr, const Tensor<T>& dy) {
        const auto& xv = gr.value(x);
        const auto& gv = gr.value(gain);
        Tensor<T>* dx = gr.requires_grad(x) ? &gr.grad_accumulator(x) : nullptr;
        Tensor<T>* dg = gr.requires_grad(gain) ? &gr.grad_accumulator(gain) : nullptr;
        for (std::int64_t i = 0; i < n; ++i) {
            const T r = (*inv)[static_cast<std::size_t>(i)];
            T dot = 0;
            for (std::int64_t j = 0; j < d; ++j) {
                const auto jj = static_cast<std::size_t>(j);
                dot += gv[jj] * dy(i, j) * xv(i, j);
                if (dg) (*dg)[jj] += dy(i, j) * xv(i, j) * r;
            }
            if (dx) {
                const T coef = r * r * r * dot / static_cast<T>(d);
                for (std::int64_t j = 0; j < d; ++j)
                    (*dx)(i, j) += r * gv[static_cast<std::size_t>(j)] * dy(i, j) - coef * xv(i, j);
            }
        }
    }, "rms_norm");
}

template <typename T>
Var embedding(Graph<T>& g, Var table, std::span<const std::int32_t> ids) {
    const auto& tv = g.value(table);
    check_matrix(tv.shape(), "embedding");
    const std::int64_t vocab = tv.rows(), d = tv.cols();
    const auto n = static_cast<std::int64_t>(ids.size());
    Tensor<T> out({n, d});
    for (std::int64_t i = 0; i < n; ++i) {
        const std::int32_t id = ids[static_cast<std::size_t>(i)];
        ADFG_REQUIRE(id >= 0 && id < vocab, ErrorKind::input, "embedding: token id " + std::to_string(id) + " out of range");
        std::copy_n(tv.data() + id * d, d, out.data() + i * d);
    }
    std::vector<std::int32_t> saved(ids.begin(), ids.end());
    return g.push(std::move(out), {table}, [table, saved = std::move(saved), d](Graph<T>& gr, const Tensor<T>& dy) {
        auto& acc = gr.grad_accumulator(table);
        for (std::size_t i = 0; i < saved.size(); ++i) {
            T* row = acc.data() + saved[i] * d;
            const T* src = dy.data() + static_cast<std::int64_t>(i) * d;
            for (std::int64_t j = 0; j < d; ++j) row[j] += src[j];
        }
    }, "embedding");
}

template <typename T>
Var cross_entropy(Graph<T>& g, Var logits, std::span<const std::int32_t> targets, std::span<const T> weights,
                  T normalizer) {
    const auto& lv = g.value(logits);
    check_matrix(lv.shape(), "cross_entropy");
    const std::int64_t n = lv.rows(), vocab = lv.cols();
    ADFG_REQUIRE(static_cast<std::int64_t>(targets.size()) == n && static_cast<std::int64_t>(weights.size()) == n,
            ErrorKind::dimension, "cross_entropy: targets/weights length must equal logit rows");
    ADFG_REQUIRE(normalizer > T(0), ErrorKind::input, "cross_entropy: normalizer must be positive");
    auto probs = std::make_shared<Tensor<T>>(lv.shape());
    T loss = 0;
    for (std::int64_t i = 0; i < n; ++i) {
        T mx = -std::numeric_limits<T>::infinity();
        for (std::int64_t j = 0; j < vocab; ++j) mx = std::max(mx, lv(i, j));
        T z = 0;
        for (std::int64_t j = 0; j < vocab; ++j) z += ((*probs)(i, j) = std::exp(lv(i, j) - mx));
        for (std::int64_t j = 0; j < vocab; ++j) (*probs)(i, j) /= z;
        const T w = weights[static_cast<std::size_t>(i)];
        if (w == T(0)) continue;
        const std::int32_t t = targets[static_cast<std::size_t>(i)];
        ADFG_REQUIRE(t >= 0 && t < vocab, ErrorKind::input, "cross_entropy: target out of range");
        loss += w * (std::log(z) + mx - lv(i, t));
    }
    std::vector<std::int32_t> tcopy(targets.begin(), targets.end());
    std::vector<T> wcopy(weights.begin(), weights.end());
    return g.push(Tensor<T>({1}, {loss / normalizer}), {logits},
                  [logits, probs, tcopy = std::move(tcopy), wcopy = std::move(wcopy), normalizer, n, vocab](
                      Graph<T>& gr, const Tensor<T>& dy) {
                      auto& acc = gr.grad_accumulator(logits);
                      for (std::int64_t i = 0; i < n; ++i) {
                          const T w = wcopy[static_cast<std::size_t>(i)];
                          if (w == T(0)) continue;
                          const T c = dy[0] * w / normalizer;
                          for (std::int64_t j = 0; j < vocab; ++j) acc(i, j) += c * (*probs)(i, j);
                          acc(i, tcopy[static_cast<std::size_t>(i)]) -= c;
                      }
                  },
                  "cross_entropy");
}

template <typename T>
Var rope(Graph<T>& g, Var x, std::int64_t n_heads, std::int64_t d_head, double theta) {
    const auto& xv = g.value(x);
    check_matrix(xv.shape(), "rope");
    ADFG_REQUIRE(xv.cols() == n_heads * d_head && d_head % 2 == 0, ErrorKind::dimension,
            "rope: width must be heads·d_head with even d_head");
    const std::int64_t n = xv.rows(), half = d_head / 2;
    auto cos_t = std::make_shared<std::vector<T>>(static_cast<std::size_t>(n * half));
    auto sin_t = std::make_shared<std::vector<T>>(static_cast<std::size_t>(n * half));
    for (std::int64_t p = 0; p < n; ++p) {
        for (std::int64_t i = 0; i < half; ++i) {
            const double freq = std::pow(theta, -2.0 * static_cast<double>(i) / static_cast<double>(d_head));
            const double angle = static_cast<double>(p) * freq;
            (*cos_t)[static_cast<std::size_t>(p * half + i)] = static_cast<T>(std::cos(angle));
            (*sin_t)[static_cast<std::size_t>(p * half + i)] = static_cast<T>(std::sin(angle));
        }
    }
    Tensor<T> out(xv.shape());
    for (std::int64_t p = 0; p < n; ++p) {
        for (std::int64_t h = 0; h < n_heads; ++h) {
            const T* src = xv.data() + p * xv.cols() + h * d_head;
            T* dst = out.data() + p * xv.cols() + h * d_head;
            for (std::int64_t i = 0; i < half; ++i) {
                const T c = (*cos_t)[static_cast<std::size_t>(p * half + i)];
                const T s = (*sin_t)[static_cast<std::size_t>(p * half + i)];
                dst[i] = src[i] * c - src[i + half] * s;
                dst[i + half] = src[i] * s + src[i + half] * c;
            }
        }
    }
    return g.push(std::move(out), {x},
                  [x, cos_t, sin_t, n, n_heads, d_head, half](Graph<T>& gr, const Tensor<T>& dy) {
                      auto& acc = gr.grad_accumulator(x);
                      const std::int64_t width = n_heads * d_head;
                      for (std::int64_t p = 0; p < n; ++p) {
                          for (std::int64_t h = 0; h < n_heads; ++h) {
                              const T* src = dy.data() + p * width + h * d_head;
                              T* dst = acc.data() + p * width + h * d_head;
                              for (std::int64_t i = 0; i < half; ++i) {
                                  const T c = (*cos_t)[static_cast<std::size_t>(p * half + i)];
                                  const T s = (*sin_t)[static_cast<std::size_t>(p * half + i)];
                                  dst[i] += src[i] * c + src[i + half] * s;
                                  dst[i + half] += -src[i] * s + src[i + half] * c;
                              }
                          }
                      }
                  },
                  "rope");
}

template <typename T>
Var causal_attention(Graph<T>& g, Var q, Var k, Var v, std::int64_t n_heads, std::int64_t n_kv_heads) {
    const auto& qv = g.value(q);
    const auto& kv = g.value(k);
    const auto& vv = g.value(v);
    check_matrix(qv.shape(), "causal_attention");
    ADFG_REQUIRE(n_heads > 0 && n_kv_heads > 0 && n_heads % n_kv_heads == 0, ErrorKind::dimension,
            "causal_attention: query heads must be a multiple of key/value heads");
    const std::int64_t n = qv.rows();
    ADFG_REQUIRE(qv.cols() % n_heads == 0, ErrorKind::dimension, "causal_attention: width not divisible by heads");
    const std::int64_t d = qv.cols() / n_heads;
    ADFG_REQUIRE((kv.shape() == Shape{n, n_kv_heads * d}) && vv.shape() == kv.shape(), ErrorKind::dimension,
            "causal_attention: key/value shapes " + shape_string(kv.shape()) + ", " + shape_string(vv.shape()) +
                " do not match " + shape_string(qv.shape()));
    const std::int64_t group = n_heads / n_kv_heads;
    const std::int64_t qw = n_heads * d, kw = n_kv_heads * d;
    const T sc = T(1) / std::sqrt(static_cast<T>(d));

    // Attention probabilities per head, kept for the backward pass.
    auto probs = std::make_shared<std::vector<Mat<T>>>(static_cast<std::size_t>(n_heads));
    Tensor<T> out({n, qw});
    for (std::int64_t h = 0; h < n_heads; ++h) {
        const std::int64_t gidx = h / group;
        ConstStridedMap<T> qh(qv.data() + h * d, n, d, Eigen::OuterStride<>(qw));
        ConstStridedMap<T> kh(kv.data() + gidx * d, n, d, Eigen::OuterStride<>(kw));
        ConstStridedMap<T> vh(vv.data() + gidx * d, n, d, Eigen::OuterStride<>(kw));
        Mat<T>& p = (*probs)[static_cast<std::size_t>(h)];
        p.noalias() = (qh * kh.transpose()) * sc;
        for (std::int64_t i = 0; i < n; ++i) {
            T mx = -std::numeric_limits<T>::infinity();
            for (std::int64_t j = 0; j <= i; ++j) mx = std::max(mx, p(i, j));
            T z = 0;
            for (std::int64_t j = 0; j <= i; ++j) z += (p(i, j) = std::exp(p(i, j) - mx));
            for (std::int64_t j = 0; j <= i; ++j) p(i, j) /= z;
            for (std::int64_t j = i + 1; j < n; ++j) p(i, j) = T(0);
        }
        StridedMap<T> oh(out.data() + h * d, n, d, Eigen::OuterStride<>(qw));
        oh.noalias() = p * vh;
    }
    return g.push(
        std::move(out), {q, k, v},
        [q, k, v, probs, n, d, n_heads, group, qw, kw, sc](Graph<T>& gr, const Tensor<T>& dy) {
            const auto& qv = gr.value(q);
            const auto& kv = gr.value(k);
            const auto& vv = gr.value(v);
            Tensor<T>* dq = gr.requires_grad(q) ? &gr.grad_accumulator(q) : nullptr;
            Tensor<T>* dk = gr.requires_grad(k) ? &gr.grad_accumulator(k) : nullptr;
            Tensor<T>* dv = gr.requires_grad(v) ? &gr.grad_accumulator(v) : nullptr;
            Mat<T> dp, ds;
            for (std::int64_t h = 0; h < n_heads; ++h) {
                const std::int64_t gidx = h / group;
                ConstStridedMap<T> qh(qv.data() + h * d, n, d, Eigen::OuterStride<>(qw));
                ConstStridedMap<T> kh(kv.data() + gidx * d, n, d, Eigen::OuterStride<>(kw));
                ConstStridedMap<T> vh(vv.data() + gidx * d, n, d, Eigen::OuterStride<>(kw));
                ConstStridedMap<T> doh(dy.data() + h * d, n, d, Eigen::OuterStride<>(qw));
                const Mat<T>& p = (*probs)[static_cast<std::size_t>(h)];
                if (dv) {
                    StridedMap<T> dvh(dv->data() + gidx * d, n, d, Eigen::OuterStride<>(kw));
                    dvh.noalias() += p.transpose() * doh;
                }
                if (!dq && !dk) continue;
                dp.noalias() = doh * vh.transpose();
                ds.resize(n, n);
                for (std::int64_t i = 0; i < n; ++i) {
                    T dot = 0;
                    for (std::int64_t j = 0; j <= i; ++j) dot += dp(i, j) * p(i, j);
                    for (std::int64_t j = 0; j <= i; ++j) ds(i, j) = p(i, j) * (dp(i, j) - dot) * sc;
                    for (std::int64_t j = i + 1; j < n; ++j) ds(i, j) = T(0);
                }
                if (dq) {
                    StridedMap<T> dqh(dq->data() + h * d, n, d, Eigen::OuterStride<>(qw));
                    dqh.noalias() += ds * kh;
                }
                if (dk) {
                    StridedMap<T> dkh(dk->data() + gidx * d, n, d, Eigen::OuterStride<>(kw));
                    dkh.noalias() += ds.transpose() * qh;
                }
            }
        },
        "causal_attention");
}

template <typename T>
Var cayley(Graph<T>& g, Var s) {
    const auto& sv = g.value(s);
    ADFG_REQUIRE(sv.rank() == 2 && sv.rows() == sv.cols(), ErrorKind::dimension,
            "cayley needs a square matrix, got " + shape_string(sv.shape()));
    const std::int64_t n = sv.rows();
    Tensor<T> minus = Tensor<T>::identity(n);
    for (std::size_t i = 0; i < sv.numel(); ++i) minus[i] -= sv[i];
    auto inv = std::make_shared<Tensor<T>>(solve_small(minus, Tensor<T>::identity(n)));
    Tensor<T> out({n, n});
    out.mat().noalias() = (Mat<T>::Identity(n, n) + sv.mat()) * inv->mat();
    const Var self{static_cast<std::uint32_t>(g.size())};
    // R = (I + S)M with M = (I − S)⁻¹ gives dL/dS = (I + Rᵀ)·G·Mᵀ.
    return g.push(std::move(out), {s}, [s, self, inv](Graph<T>& gr, const Tensor<T>& dy) {
        const auto& r = gr.value(self);
        const Mat<T> gm = dy.mat() * inv->mat().transpose();
        gr.grad_accumulator(s).mat().noalias() += gm + r.mat().transpose() * gm;
    }, "cayley");
}

template <typename T>
Var block_diag(Graph<T>& g, const std::vector<Var>& blocks) {
    ADFG_REQUIRE(!blocks.empty(), ErrorKind::input, "block_diag: no blocks");
    std::int64_t total = 0;
    std::vector<std::int64_t> offsets;
    for (Var b : blocks) {
        const auto& bv = g.value(b);
        ADFG_REQUIRE(bv.rank() == 2 && bv.rows() == bv.cols(), ErrorKind::dimension, "block_diag: blocks must be square");
        offsets.push_back(total);
        total += bv.rows();
    }
    Tensor<T> out({total, total});
    for (std::size_t i = 0; i < blocks.size(); ++i) {
        const auto& bv = g.value(blocks[i]);
        out.mat().block(offsets[i], offsets[i], bv.rows(), bv.cols()) = bv.mat();
    }
    return g.push(std::move(out), blocks, [blocks, offsets](Graph<T>& gr, const Tensor<T>& dy) {
        for (std::size_t i = 0; i < blocks.size(); ++i) {
            if (!gr.requires_grad(blocks[i])) continue;
            auto& acc = gr.grad_accumulator(blocks[i]);
            acc.mat() += dy.mat().block(offsets[i], offsets[i], acc.rows(), acc.cols());
        }
    }, "block_diag");
}

#define ADFG_INSTANTIATE(T)                                                                                     \
    template Var add<T>(Graph<T>&, Var, Var);                                                                   \
    template Var sub<T>(Graph<T>&, Var, Var);                                                                   \
    template Var scale<T>(Graph<T>&, Var, T);                                                                   \
    template Var hadamard<T>(Graph<T>&, Var, Var);                                                              \
    template Var sum<T>(Graph<T>&, Var);                                                                        \
    template Var transpose<T>(Graph<T>&, Var);                                                                  \
    template Var matmul<T>(Graph<T>&, Var, Var);                                                                \
    template Var linear<T>(Graph<T>&, Var, Var);                                                                \
    template Var kron<T>(Graph<T>&, Var, Var);                                                                  \
    template Var scale_cols<T>(Graph<T>&, Var, Var);                                                            \
    template Var softmax_rows<T>(Graph<T>&, Var);                                                               \
    template Var silu<T>(Graph<T>&, Var);                                                                       \
    template Var rms_norm<T>(Graph<T>&, Var, Var, T);                                                           \
    template Var embedding<T>(Graph<T>&, Var, std::span<const std::int32_t>);                                   \
    template Var cross_entropy<T>(Graph<T>&, Var, std::span<const std::int32_t>, std::span<const T>, T);        \
    template Var rope<T>(Graph<T>&, Var, std::int64_t, std::int64_t, double);                                   \
    template Var causal_attention<T>(Graph<T>&, Var, Var, Var, std::int64_t, std::int64_t);                     \
    template Var cayley<T>(Graph<T>&, Var);                                                                     \
    template Var block_diag<T>(Graph<T>&, const std::vector<Var>&);

ADFG_INSTANTIATE(float)
ADFG_INSTANTIATE(double)
#undef ADFG_INSTANTIATE

}  // namespace adfg::numerics
