// SPDX-License-Identifier: Apache-2.0
//
// pinchsense - Bayesian CRB analysis and optimization for pinching-antenna sensing
// Copyright (C) 2026 The pinchsense authors
//
// Licensed under the Apache License, Version 2.0 (the "License");
// you may not use this file except in compliance with the License.
// You may obtain a copy of the License at
// http://www.apache.org/licenses/LICENSE-2.0
//
// Unless required by applicable law or agreed to in writing, software
// distributed under the License is distributed on an "AS IS" BASIS,
// WITHOUT WARRANTIES OR CONDITIONS OF ANY KIND, either express or implied.
// See the License for the specific language governing permissions and
// limitations under the License.
// ------------------------------------------------------------------------

#pragma once

#include "errors.hpp"
#include "scenario.hpp"

#include <Eigen/Eigenvalues>

#include <algorithm>
#include <cmath>
#include <numbers>
#include <sstream>
#include <string>
#include <vector>

namespace pinchsense
{
    /// Gauss-Hermite rule for the weight exp(-b^2): integral f(b) e^{-b^2} db ~ sum w_i f(b_i).
    struct GhRule
    {
        std::size_t order = 0;
        std::vector<double> nodes;   // ascending
        std::vector<double> weights; // positive, sum to sqrt(pi)
    };

    inline constexpr std::size_t max_gh_order = 200;

    namespace detail
    {
        // Orthonormal Hermite recurrence (weight e^{-x^2}) evaluated at x.
        // Returns p_n(x), p_{n-1}(x) and sum_{k<n} p_k(x)^2.
        struct HermiteEval
        {
            double pn = 0.0;
            double pn1 = 0.0;
            double sumsq = 0.0;
        };

        inline HermiteEval orthonormal_hermite(std::size_t n, double x)
        {
            double pm1 = 0.0;
            double p = 1.0 / std::pow(std::numbers::pi, 0.25);
            double sumsq = 0.0;
            for (std::size_t k = 1; k <= n; ++k)
            {
                sumsq += p * p;
                const double kk = static_cast<double>(k);
                const double next = std::sqrt(2.0 / kk) * x * p - std::sqrt((kk - 1.0) / kk) * pm1;
                pm1 = p;
                p = next;
            }
            return {p, pm1, sumsq};
        }
    }

    /// Golub-Welsch: nodes are the eigenvalues of the symmetric tridiagonal
    /// Jacobi matrix (zero diagonal, off-diagonal sqrt(k/2)). Each node is then
    /// polished by Newton steps on the orthonormal recurrence and the weight is
    /// taken from the Christoffel function 1 / sum_k p_k(b_i)^2, which keeps the
    /// tail weights accurate to full relative precision.
    inline GhRule gauss_hermite(std::size_t order)
    {
        if (order < 1 || order > max_gh_order)
            throw InvalidArgument("gauss_hermite: order must be in [1, " + std::to_string(max_gh_order) + "]");

        GhRule rule;
        rule.order = order;
        rule.nodes.resize(order);
        rule.weights.resize(order);

        if (order == 1)
        {
            rule.nodes[0] = 0.0;
            rule.weights[0] = std::sqrt(std::numbers::pi);
            return rule;
        }

        Eigen::VectorXd diag = Eigen::VectorXd::Zero(static_cast<Eigen::Index>(order));
        Eigen::VectorXd sub(static_cast<Eigen::Index>(order - 1));
        for (std::size_t k = 1; k < order; ++k)
            sub[static_cast<Eigen::Index>(k - 1)] = std::sqrt(static_cast<double>(k) / 2.0);

        Eigen::SelfAdjointEigenSolver<Eigen::MatrixXd> solver;
        solver.computeFromTridiagonal(diag, sub, Eigen::EigenvaluesOnly);
        if (solver.info() != Eigen::Success)
            throw NumericalError("gauss_hermite: tridiagonal eigensolver failed");

        const double n = static_cast<double>(order);
        for (std::size_t i = 0; i < order; ++i)
        {
            double x = solver.eigenvalues()[static_cast<Eigen::Index>(i)];
            for (int it = 0; it < 3; ++it)
            {
                const auto h = detail::orthonormal_hermite(order, x);
                const double dp = std::sqrt(2.0 * n) * h.pn1;
                if (dp == 0.0)
                    break;
                const double step = h.pn / dp;
                x -= step;
                if (std::abs(step) <= 1e-16 * std::max(1.0, std::abs(x)))
                    break;
            }
            rule.nodes[i] = x;
            rule.weights[i] = 1.0 / detail::orthonormal_hermite(order, x).sumsq;
        }

        // Enforce exact mirror symmetry.
        for (std::size_t i = 0; i < order / 2; ++i)
        {
            const std::size_t j = order - 1 - i;
            const double b = 0.5 * (rule.nodes[j] - rule.nodes[i]);
            const double w = 0.5 * (rule.weights[i] + rule.weights[j]);
            rule.nodes[i] = -b;
            rule.nodes[j] = b;
            rule.weights[i] = w;
            rule.weights[j] = w;
        }
        if (order % 2 == 1)
            rule.nodes[order / 2] = 0.0;
        return rule;
    }

    // Below this variance an axis component is treated as a point mass.
    inline constexpr double point_mass_variance = 1e-10;

    /// Sample points and probability weights for one prior axis after the
    /// change of variables x = sqrt(2) sigma b + u per mixture component.
    struct AxisNodes
    {
        std::vector<double> values;
        std::vector<double> weights; // phi_l * w_i / sqrt(pi); sum to 1
    };

    /// `prune` drops nodes whose weight is below prune * (largest weight);
    /// zero keeps the full tensor rule.
    inline AxisNodes axis_nodes(const AxisMixture &axis, const GhRule &rule, double prune = 0.0)
    {
        AxisNodes out;
        const double inv_sqrt_pi = 1.0 / std::sqrt(std::numbers::pi);
        for (const auto &c : axis)
        {
            if (c.weight == 0.0)
                continue;
            if (c.variance < point_mass_variance)
            {
                out.values.push_back(c.mean);
                out.weights.push_back(c.weight);
                continue;
            }
            const double scale = std::sqrt(2.0 * c.variance);
            for (std::size_t i = 0; i < rule.order; ++i)
            {
                out.values.push_back(scale * rule.nodes[i] + c.mean);
                out.weights.push_back(c.weight * rule.weights[i] * inv_sqrt_pi);
            }
        }
        if (prune > 0.0 && !out.weights.empty())
        {
            const double wmax = *std::max_element(out.weights.begin(), out.weights.end());
            AxisNodes kept;
            for (std::size_t i = 0; i < out.values.size(); ++i)
                if (out.weights[i] >= prune * wmax)
                {
                    kept.values.push_back(out.values[i]);
                    kept.weights.push_back(out.weights[i]);
                }
            return kept;
        }
        return out;
    }

    /// Flattened 2D tensor rule over a target prior (x outer, y inner).
    struct NodeGrid
    {
        std::vector<double> rx;
        std::vector<double> ry;
        std::vector<double> weight;

        std::size_t size() const { return weight.size(); }

        static NodeGrid build(const TargetPrior &prior, const GhRule &rule_x, const GhRule &rule_y,
                              double prune = 0.0)
        {
            const auto ax = axis_nodes(prior.x, rule_x, prune);
            const auto ay = axis_nodes(prior.y, rule_y, prune);
            NodeGrid g;
            const std::size_t n = ax.values.size() * ay.values.size();
            g.rx.reserve(n);
            g.ry.reserve(n);
            g.weight.reserve(n);
            for (std::size_t i = 0; i < ax.values.size(); ++i)
                for (std::size_t j = 0; j < ay.values.size(); ++j)
                {
                    g.rx.push_back(ax.values[i]);
                    g.ry.push_back(ay.values[j]);
                    g.weight.push_back(ax.weights[i] * ay.weights[j]);
                }
            return g;
        }
    };

    namespace detail
    {
        [[noreturn]] inline void non_finite_sample(const char *who, double x, double y, bool two_d)
        {
            std::ostringstream os;
            os.precision(17);
            os << who << ": integrand is not finite at ";
            if (two_d)
                os << "(" << x << ", " << y << ")";
            else
                os << x;
            throw NumericalDomainError(os.str());
        }
    }

    /// E{f(X)} for X following a 1D Gaussian mixture.
    template <typename F>
    double expect_gmm_1d(F &&f, const AxisMixture &axis, const GhRule &rule)
    {
        const auto nodes = axis_nodes(axis, rule);
        double acc = 0.0;
        for (std::size_t i = 0; i < nodes.values.size(); ++i)
        {
            const double v = f(nodes.values[i]);
            if (!std::isfinite(v))
                detail::non_finite_sample("expect_gmm_1d", nodes.values[i], 0.0, false);
            acc += nodes.weights[i] * v;
        }
        return acc;
    }

    /// E{f(X, Y)} for independent per-axis Gaussian mixtures.
    template <typename F>
    double expect_gmm_2d(F &&f, const TargetPrior &prior, const GhRule &rule_x, const GhRule &rule_y)
    {
        const auto grid = NodeGrid::build(prior, rule_x, rule_y);
        double acc = 0.0;
        for (std::size_t n = 0; n < grid.size(); ++n)
        {
            const double v = f(grid.rx[n], grid.ry[n]);
            if (!std::isfinite(v))
                detail::non_finite_sample("expect_gmm_2d", grid.rx[n], grid.ry[n], true);
            acc += grid.weight[n] * v;
        }
        return acc;
    }
}
