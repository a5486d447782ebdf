// Copyright 2026 The adfg Authors
// SPDX-License-Identifier: Apache-2.0

#pragma once

#include <cstddef>
#include <cstdint>
#include <initializer_list>
#include <span>
#include <string>
#include <vector>

#include <Eigen/Dense>

namespace adfg::numerics {

using Shape = std::vector<std::int64_t>;

std::string shape_string(const Shape& shape);
std::int64_t shape_numel(const Shape& shape);

/// Dense row-major tensor. Rank 1 and rank 2 cover everything the model and
/// the adapters need; higher ranks are storable but no op consumes them.
template <typename T>
class Tensor {
public:
    using value_type = T;
    using Matrix = Eigen::Matrix<T, Eigen::Dynamic, Eigen::Dynamic, Eigen::RowMajor>;
    using MatrixMap = Eigen::Map<Matrix>;
    using ConstMatrixMap = Eigen::Map<const Matrix>;

    Tensor() = default;
    explicit Tensor(Shape shape);
    Tensor(Shape shape, std::vector<T> data);

    static Tensor zeros(Shape shape) { return Tensor(std::move(shape)); }
    static Tensor full(Shape shape, T value);
    static Tensor identity(std::int64_t n);
    static Tensor matrix(std::initializer_list<std::initializer_list<T>> rows);
    static Tensor vector(std::initializer_list<T> values);

    const Shape& shape() const noexcept { return shape_; }
    int rank() const noexcept { return static_cast<int>(shape_.size()); }
    std::size_t numel() const noexcept { return data_.size(); }
    bool empty() const noexcept { return data_.empty(); }

    std::int64_t rows() const;
    std::int64_t cols() const;
    std::int64_t dim(int axis) const { return shape_.at(static_cast<std::size_t>(axis)); }

    T* data() noexcept { return data_.data(); }
    const T* data() const noexcept { return data_.data(); }
    std::span<T> values() noexcept { return data_; }
    std::span<const T> values() const noexcept { return data_; }
    std::vector<T>& storage() noexcept { return data_; }
    const std::vector<T>& storage() const noexcept { return data_; }

    T& operator[](std::size_t i) { return data_[i]; }
    const T& operator[](std::size_t i) const { return data_[i]; }
    T& operator()(std::int64_t i, std::int64_t j) { return data_[static_cast<std::size_t>(i * cols() + j)]; }
    const T& operator()(std::int64_t i, std::int64_t j) const {
        return data_[static_cast<std::size_t>(i * cols() + j)];
    }

    MatrixMap mat();
    ConstMatrixMap mat() const;

    void fill(T value);
    bool all_finite() const;
    T max_abs() const;

    template <typename U>
    Tensor<U> cast() const {
        std::vector<U> out(data_.begin(), data_.end());
        return Tensor<U>(shape_, std::move(out));
    }

    bool operator==(const Tensor& other) const = default;

private:
    Shape shape_;
    std::vector<T> data_;
};

template <typename T>
Tensor<T> from_matrix(const typename Tensor<T>::Matrix& m);

/// Largest |a - b| over all elements; shapes must agree.
template <typename T>
T max_abs_diff(const Tensor<T>& a, const Tensor<T>& b);

extern template class Tensor<float>;
extern template class Tensor<double>;

}  // namespace adfg::numerics
