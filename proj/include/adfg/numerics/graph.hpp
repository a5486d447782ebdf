// Copyright 2026 The adfg Authors
// SPDX-License-Identifier: Apache-2.0

#pragma once

#include <cstdint>
#include <functional>
#include <initializer_list>
#include <limits>
#include <deque>
#include <optional>
#include <string_view>
#include <vector>

#include "adfg/numerics/tensor.hpp"

namespace adfg::numerics {

/// Handle to a node recorded on a Graph.
struct Var {
    static constexpr std::uint32_t invalid = std::numeric_limits<std::uint32_t>::max();
    std::uint32_t id = invalid;

    bool valid() const noexcept { return id != invalid; }
    bool operator==(const Var&) const = default;
};

/// Reverse-mode tape. Every op appends one node holding its value and, when
/// any input requires a gradient, a closure that pushes the node's incoming
/// gradient back to its inputs. Nodes are immutable once pushed.
template <typename T>
class Graph {
public:
    using BackwardFn = std::function<void(Graph&, const Tensor<T>& out_grad)>;

    Graph();
    Graph(const Graph&) = delete;
    Graph& operator=(const Graph&) = delete;

    /// Owned value that never receives a gradient.
    Var constant(Tensor<T> value);
    /// Borrowed value; the caller keeps `value` alive for the graph's lifetime.
    Var constant_ref(const Tensor<T>& value);
    /// Borrowed leaf that accumulates a gradient.
    Var parameter(const Tensor<T>& value);
    /// Owned leaf that accumulates a gradient.
    Var parameter_owned(Tensor<T> value);

    Var push(Tensor<T> value, std::initializer_list<Var> inputs, BackwardFn backward, std::string_view op);
    Var push(Tensor<T> value, const std::vector<Var>& inputs, BackwardFn backward, std::string_view op);

    const Tensor<T>& value(Var v) const;
    bool requires_grad(Var v) const;

    /// Gradient accumulated for `v`; a zero tensor when nothing flowed there.
    Tensor<T> grad(Var v) const;
    /// Mutable accumulator (lazily zero-initialized) for use inside backward closures.
    Tensor<T>& grad_accumulator(Var v);
    void accumulate(Var v, const Tensor<T>& g);

    /// Seeds d(out)/d(out) = 1 and runs every recorded closure in reverse order.
    void backward(Var scalar_output);

    std::size_t size() const noexcept { return nodes_.size(); }
    /// Process-unique id; distinguishes graphs that reuse an address.
    std::uint64_t serial() const noexcept { return serial_; }

    /// Non-finite values are an error state; disable only in tests that probe it.
    void set_check_finite(bool on) noexcept { check_finite_ = on; }

private:
    struct Node {
        std::optional<Tensor<T>> owned;
        const Tensor<T>* borrowed = nullptr;
        std::optional<Tensor<T>> grad;
        bool requires_grad = false;
        BackwardFn backward;

        const Tensor<T>& value() const { return owned ? *owned : *borrowed; }
    };

    Node& node(Var v);
    const Node& node(Var v) const;
    Var append(Node n);

    std::deque<Node> nodes_;  // push_back keeps references to earlier values valid
    bool check_finite_ = true;
    std::uint64_t serial_;
};

extern template class Graph<float>;
extern template class Graph<double>;

}  // namespace adfg::numerics
