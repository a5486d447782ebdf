// Copyright 2026 The adfg Authors
// SPDX-License-Identifier: Apache-2.0

#include "adfg/numerics/linalg.hpp"

#include <algorithm>
#include <cmath>
#include <limits>
#include <sstream>

#include "adfg/common/error.hpp"

namespace adfg::numerics {

template <typename T>
Tensor<T> solve_small(const Tensor<T>& a, const Tensor<T>& rhs, std::int64_t block_limit) {
    ADFG_REQUIRE(a.rank() == 2 && a.rows() == a.cols(), ErrorKind::dimension,
            "solve_small needs a square matrix, got " + shape_string(a.shape()));
    const std::int64_t n = a.rows();
    ADFG_REQUIRE(n <= block_limit, ErrorKind::dimension,
            "block of size " + std::to_string(n) + " exceeds limit " + std::to_string(block_limit));
    ADFG_REQUIRE(rhs.rank() == 2 && rhs.rows() == n, ErrorKind::dimension,
            "rhs shape " + shape_string(rhs.shape()) + " does not match " + shape_string(a.shape()));
    const std::int64_t m = rhs.cols();

    Tensor<T> lu = a;
    Tensor<T> x = rhs;
    double largest_pivot = 0.0;

    for (std::int64_t k = 0; k < n; ++k) {
        std::int64_t p = k;
        for (std::int64_t i = k + 1; i < n; ++i) {
            if (std::abs(lu(i, k)) > std::abs(lu(p, k))) p = i;
        }
        const double pivot = std::abs(static_cast<double>(lu(p, k)));
        largest_pivot = std::max(largest_pivot, pivot);
        if (pivot < kPivotFloor) {
            std::ostringstream os;
            os << "pivot " << pivot << " below " << kPivotFloor << " at column " << k
               << " (condition estimate >= " << (pivot > 0 ? largest_pivot / pivot : INFINITY) << ")";
            fail(ErrorKind::singularity, os.str());
        }
        if (p != k) {
            for (std::int64_t j = 0; j < n; ++j) std::swap(lu(k, j), lu(p, j));
            for (std::int64_t j = 0; j < m; ++j) std::swap(x(k, j), x(p, j));
        }
        for (std::int64_t i = k + 1; i < n; ++i) {
            const T f = lu(i, k) / lu(k, k);
            if (f == T(0)) continue;
            for (std::int64_t j = k; j < n; ++j) lu(i, j) -= f * lu(k, j);
            for (std::int64_t j = 0; j < m; ++j) x(i, j) -= f * x(k, j);
        }
    }
    for (std::int64_t i = n; i-- > 0;) {
        for (std::int64_t j = 0; j < m; ++j) {
            T acc = x(i, j);
            for (std::int64_t c = i + 1; c < n; ++c) acc -= lu(i, c) * x(c, j);
            x(i, j) = acc / lu(i, i);
        }
    }
    return x;
}

template <typename T>
Tensor<T> kron_values(const Tensor<T>& a, const Tensor<T>& b) {
    ADFG_REQUIRE(a.rank() == 2 && b.rank() == 2, ErrorKind::dimension,
            "kron needs matrices, got " + shape_string(a.shape()) + " and " + shape_string(b.shape()));
    const std::int64_t p = a.rows(), q = a.cols(), r = b.rows(), s = b.cols();
    Tensor<T> out({p * r, q * s});
    for (std::int64_t i = 0; i < p; ++i) {
        for (std::int64_t j = 0; j < q; ++j) {
            const T aij = a(i, j);
            for (std::int64_t ii = 0; ii < r; ++ii) {
                T* row = out.data() + (i * r + ii) * (q * s) + j * s;
                const T* brow = b.data() + ii * s;
                for (std::int64_t jj = 0; jj < s; ++jj) row[jj] = aij * brow[jj];
            }
        }
    }
    return out;
}

template <typename T>
Tensor<T> cayley_values(const Tensor<T>& s, std::int64_t block_limit) {
    ADFG_REQUIRE(s.rank() == 2 && s.rows() == s.cols(), ErrorKind::dimension,
            "cayley needs a square matrix, got " + shape_string(s.shape()));
    const std::int64_t n = s.rows();
    Tensor<T> minus = Tensor<T>::identity(n);
    Tensor<T> plus = Tensor<T>::identity(n);
    for (std::size_t i = 0; i < s.numel(); ++i) {
        minus[i] -= s[i];
        plus[i] += s[i];
    }
    const Tensor<T> inv = solve_small(minus, Tensor<T>::identity(n), block_limit);
    Tensor<T> r({n, n});
    r.mat().noalias() = plus.mat() * inv.mat();
    return r;
}

template <typename T>
Tensor<T> skew_from(const Tensor<T>& u) {
    ADFG_REQUIRE(u.rank() == 2 && u.rows() == u.cols(), ErrorKind::dimension, "skew generator must be square");
    Tensor<T> s({u.rows(), u.cols()});
    s.mat() = u.mat() - u.mat().transpose();
    return s;
}

template <typename T>
T orthogonality_error(const Tensor<T>& r) {
    const auto n = r.rows();
    const typename Tensor<T>::Matrix gram = r.mat().transpose() * r.mat();
    return (gram - Tensor<T>::Matrix::Identity(n, n)).cwiseAbs().maxCoeff();
}

#define ADFG_INSTANTIATE(T)                                                              \
    template Tensor<T> solve_small<T>(const Tensor<T>&, const Tensor<T>&, std::int64_t); \
    template Tensor<T> kron_values<T>(const Tensor<T>&, const Tensor<T>&);              \
    template Tensor<T> cayley_values<T>(const Tensor<T>&, std::int64_t);                 \
    template Tensor<T> skew_from<T>(const Tensor<T>&);                                   \
    template T orthogonality_error<T>(const Tensor<T>&);

ADFG_INSTANTIATE(float)
ADFG_INSTANTIATE(double)
#undef ADFG_INSTANTIATE

}  // namespace adfg::numerics
