// Copyright 2026 The adfg Authors
// SPDX-License-Identifier: Apache-2.0

#include "adfg/numerics/graph.hpp"

#include <atomic>
#include <string>

#include "adfg/common/error.hpp"

namespace adfg::numerics {

namespace {
std::atomic<std::uint64_t> next_serial{1};
}  // namespace

template <typename T>
Graph<T>::Graph() : serial_(next_serial.fetch_add(1, std::memory_order_relaxed)) {}

template <typename T>
typename Graph<T>::Node& Graph<T>::node(Var v) {
    ADFG_REQUIRE(v.valid() && v.id < nodes_.size(), ErrorKind::input, "variable does not belong to this graph");
    return nodes_[v.id];
}

template <typename T>
const typename Graph<T>::Node& Graph<T>::node(Var v) const {
    ADFG_REQUIRE(v.valid() && v.id < nodes_.size(), ErrorKind::input, "variable does not belong to this graph");
    return nodes_[v.id];
}

template <typename T>
Var Graph<T>::append(Node n) {
    nodes_.push_back(std::move(n));
    return Var{static_cast<std::uint32_t>(nodes_.size() - 1)};
}

template <typename T>
Var Graph<T>::constant(Tensor<T> value) {
    Node n;
    n.owned = std::move(value);
    return append(std::move(n));
}

template <typename T>
Var Graph<T>::constant_ref(const Tensor<T>& value) {
    Node n;
    n.borrowed = &value;
    return append(std::move(n));
}

template <typename T>
Var Graph<T>::parameter(const Tensor<T>& value) {
    Node n;
    n.borrowed = &value;
    n.requires_grad = true;
    return append(std::move(n));
}

template <typename T>
Var Graph<T>::parameter_owned(Tensor<T> value) {
    Node n;
    n.owned = std::move(value);
    n.requires_grad = true;
    return append(std::move(n));
}

template <typename T>
Var Graph<T>::push(Tensor<T> value, std::initializer_list<Var> inputs, BackwardFn backward, std::string_view op) {
    return push(std::move(value), std::vector<Var>(inputs), std::move(backward), op);
}

template <typename T>
Var Graph<T>::push(Tensor<T> value, const std::vector<Var>& inputs, BackwardFn backward, std::string_view op) {
    if (check_finite_ && !value.all_finite()) {
        fail(ErrorKind::numeric, "non-finite value produced by " + std::string(op));
    }
    Node n;
    n.owned = std::move(value);
    for (Var in : inputs) {
        if (node(in).requires_grad) {
            n.requires_grad = true;
            break;
        }
    }
    if (n.requires_grad) n.backward = std::move(backward);
    return append(std::move(n));
}

template <typename T>
const Tensor<T>& Graph<T>::value(Var v) const {
    return node(v).value();
}

template <typename T>
bool Graph<T>::requires_grad(Var v) const {
    return node(v).requires_grad;
}

template <typename T>
Tensor<T> Graph<T>::grad(Var v) const {
    const Node& n = node(v);
    if (n.grad) return *n.grad;
    return Tensor<T>(n.value().shape());
}

template <typename T>
Tensor<T>& Graph<T>::grad_accumulator(Var v) {
    Node& n = node(v);
    if (!n.grad) n.grad.emplace(n.value().shape());
    return *n.grad;
}

template <typename T>
void Graph<T>::accumulate(Var v, const Tensor<T>& g) {
    if (!requires_grad(v)) return;
    Tensor<T>& acc = grad_accumulator(v);
    ADFG_REQUIRE(acc.shape() == g.shape(), ErrorKind::dimension,
            "gradient shape " + shape_string(g.shape()) + " does not match value " + shape_string(acc.shape()));
    for (std::size_t i = 0; i < acc.numel(); ++i) acc[i] += g[i];
}

template <typename T>
void Graph<T>::backward(Var scalar_output) {
    Node& out = node(scalar_output);
    ADFG_REQUIRE(out.value().numel() == 1, ErrorKind::dimension, "backward() needs a scalar output");
    if (!out.requires_grad) return;
    grad_accumulator(scalar_output)[0] += T(1);
    for (std::size_t i = scalar_output.id + 1; i-- > 0;) {
        Node& n = nodes_[i];
        if (!n.backward || !n.grad) continue;
        // Closures only touch their inputs' gradients, which live in other nodes.
        n.backward(*this, *n.grad);
    }
}

template class Graph<float>;
template class Graph<double>;

}  // namespace adfg::numerics
