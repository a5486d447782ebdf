// Copyright 2026 The adfg Authors
// SPDX-License-Identifier: Apache-2.0

#include "adfg/numerics/tensor.hpp"

#include <algorithm>
#include <cmath>
#include <sstream>

#include "adfg/common/error.hpp"

namespace adfg::numerics {

std::string shape_string(const Shape& shape) {
    std::ostringstream os;
    os << '[';
    for (std::size_t i = 0; i < shape.size(); ++i) {
        if (i) os << 'x';
        os << shape[i];
    }
    os << ']';
    return os.str();
}

std::int64_t shape_numel(const Shape& shape) {
    std::int64_t n = 1;
    for (auto d : shape) {
        ADFG_REQUIRE(d >= 0, ErrorKind::dimension, "negative dimension in " + shape_string(shape));
        n *= d;
    }
    return n;
}

template <typename T>
Tensor<T>::Tensor(Shape shape)
    : shape_(std::move(shape)), data_(static_cast<std::size_t>(shape_numel(shape_)), T(0)) {}

template <typename T>
Tensor<T>::Tensor(Shape shape, std::vector<T> data) : shape_(std::move(shape)), data_(std::move(data)) {
    ADFG_REQUIRE(static_cast<std::int64_t>(data_.size()) == shape_numel(shape_), ErrorKind::dimension,
            "data length " + std::to_string(data_.size()) + " does not match shape " + shape_string(shape_));
}

template <typename T>
Tensor<T> Tensor<T>::full(Shape shape, T value) {
    Tensor t(std::move(shape));
    t.fill(value);
    return t;
}

template <typename T>
Tensor<T> Tensor<T>::identity(std::int64_t n) {
    Tensor t({n, n});
    for (std::int64_t i = 0; i < n; ++i) t(i, i) = T(1);
    return t;
}

template <typename T>
Tensor<T> Tensor<T>::matrix(std::initializer_list<std::initializer_list<T>> rows) {
    const auto r = static_cast<std::int64_t>(rows.size());
    const auto c = r ? static_cast<std::int64_t>(rows.begin()->size()) : 0;
    std::vector<T> data;
    data.reserve(static_cast<std::size_t>(r * c));
    for (const auto& row : rows) {
        ADFG_REQUIRE(static_cast<std::int64_t>(row.size()) == c, ErrorKind::dimension, "ragged matrix literal");
        data.insert(data.end(), row.begin(), row.end());
    }
    return Tensor({r, c}, std::move(data));
}

template <typename T>
Tensor<T> Tensor<T>::vector(std::initializer_list<T> values) {
    return Tensor({static_cast<std::int64_t>(values.size())}, std::vector<T>(values));
}

template <typename T>
std::int64_t Tensor<T>::rows() const {
    ADFG_REQUIRE(rank() == 2, ErrorKind::dimension, "expected a matrix, got shape " + shape_string(shape_));
    return shape_[0];
}

template <typename T>
std::int64_t Tensor<T>::cols() const {
    ADFG_REQUIRE(rank() == 2, ErrorKind::dimension, "expected a matrix, got shape " + shape_string(shape_));
    return shape_[1];
}

template <typename T>
typename Tensor<T>::MatrixMap Tensor<T>::mat() {
    if (rank() == 1) return MatrixMap(data_.data(), 1, shape_[0]);
    return MatrixMap(data_.data(), rows(), cols());
}

template <typename T>
typename Tensor<T>::ConstMatrixMap Tensor<T>::mat() const {
    if (rank() == 1) return ConstMatrixMap(data_.data(), 1, shape_[0]);
    return ConstMatrixMap(data_.data(), rows(), cols());
}

template <typename T>
void Tensor<T>::fill(T value) {
    std::fill(data_.begin(), data_.end(), value);
}

template <typename T>
bool Tensor<T>::all_finite() const {
    return std::all_of(data_.begin(), data_.end(), [](T v) { return std::isfinite(v); });
}

template <typename T>
T Tensor<T>::max_abs() const {
    T m = 0;
    for (T v : data_) m = std::max(m, std::abs(v));
    return m;
}

template <typename T>
Tensor<T> from_matrix(const typename Tensor<T>::Matrix& m) {
    Tensor<T> t({static_cast<std::int64_t>(m.rows()), static_cast<std::int64_t>(m.cols())});
    t.mat() = m;
    return t;
}

template <typename T>
T max_abs_diff(const Tensor<T>& a, const Tensor<T>& b) {
    ADFG_REQUIRE(a.shape() == b.shape(), ErrorKind::dimension,
            "shape mismatch " + shape_string(a.shape()) + " vs " + shape_string(b.shape()));
    T m = 0;
    for (std::size_t i = 0; i < a.numel(); ++i) m = std::max(m, std::abs(a[i] - b[i]));
    return m;
}

template class Tensor<float>;
template class Tensor<double>;
template Tensor<float> from_matrix<float>(const Tensor<float>::Matrix&);
template Tensor<double> from_matrix<double>(const Tensor<double>::Matrix&);
template float max_abs_diff<float>(const Tensor<float>&, const Tensor<float>&);
template double max_abs_diff<double>(const Tensor<double>&, const Tensor<double>&);

}  // namespace adfg::numerics
