// Copyright 2026 The adfg Authors
// SPDX-License-Identifier: Apache-2.0

#include "adfg/numerics/grad_check.hpp"

#include <algorithm>
#include <cmath>
#include <numeric>
#include <random>

#include "adfg/common/error.hpp"

namespace adfg::numerics {
namespace {

double evaluate(const ScalarFunction& f, std::span<Tensor<double>* const> params) {
    Graph<double> g;
    std::vector<Var> vars;
    vars.reserve(params.size());
    for (Tensor<double>* p : params) vars.push_back(g.constant_ref(*p));
    const double value = g.value(f(g, vars))[0];
    ADFG_REQUIRE(std::isfinite(value), ErrorKind::numeric, "grad_check: function evaluated to a non-finite value");
    return value;
}

}  // namespace

GradCheckReport grad_check(const ScalarFunction& f, std::span<Tensor<double>* const> params,
                           const GradCheckOptions& options) {
    ADFG_REQUIRE(options.epsilon >= 1e-7 && options.epsilon <= 1e-4, ErrorKind::config,
            "grad_check: epsilon must lie in [1e-7, 1e-4]");

    std::vector<Tensor<double>> analytic;
    {
        Graph<double> g;
        std::vector<Var> vars;
        for (Tensor<double>* p : params) vars.push_back(g.parameter(*p));
        const Var out = f(g, vars);
        ADFG_REQUIRE(std::isfinite(g.value(out)[0]), ErrorKind::numeric,
                "grad_check: function evaluated to a non-finite value");
        g.backward(out);
        for (Var v : vars) analytic.push_back(g.grad(v));
    }

    std::mt19937_64 rng(options.seed);
    GradCheckReport report;
    for (std::size_t t = 0; t < params.size(); ++t) {
        Tensor<double>& p = *params[t];
        std::vector<std::size_t> entries(p.numel());
        std::iota(entries.begin(), entries.end(), std::size_t{0});
        const auto limit = static_cast<std::size_t>(options.max_entries_per_tensor);
        if (limit > 0 && entries.size() > limit) {
            std::shuffle(entries.begin(), entries.end(), rng);
            entries.resize(limit);
            std::sort(entries.begin(), entries.end());
        }
        for (std::size_t i : entries) {
            const double saved = p[i];
            p[i] = saved + options.epsilon;
            const double up = evaluate(f, params);
            p[i] = saved - options.epsilon;
            const double down = evaluate(f, params);
            p[i] = saved;
            const double fd = (up - down) / (2.0 * options.epsilon);
            const double ad = analytic[t][i];
            const double rel = std::abs(ad - fd) / std::max(1e-8, std::abs(ad) + std::abs(fd));
            report.max_relative_error = std::max(report.max_relative_error, rel);
            ++report.parameter_count_checked;
        }
    }
    report.pass = report.max_relative_error <= options.tolerance;
    return report;
}

}  // namespace adfg::numerics
