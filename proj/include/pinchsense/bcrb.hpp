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

#include "channel.hpp"
#include "errors.hpp"
#include "quadrature.hpp"
#include "scenario.hpp"

#include <algorithm>
#include <cmath>
#include <limits>
#include <numbers>
#include <string>
#include <vector>

namespace pinchsense
{
    /// Real symmetric 2x2 information matrix, entries in 1/m^2.
    struct Fim2
    {
        double xx = 0.0;
        double xy = 0.0;
        double yx = 0.0;
        double yy = 0.0;

        double det() const { return xx * yy - xy * yx; }
        double trace() const { return xx + yy; }
    };

    // Expected observation FIM without the 2P/sigma^2 scale.
    using ObsFim = Fim2;

    // Prior FIM; the cross terms vanish for independent axes.
    struct PriorFim
    {
        double xx = 0.0;
        double yy = 0.0;

        double prior_only_bcrb() const { return 1.0 / xx + 1.0 / yy; }
    };

    struct Bfim
    {
        Fim2 matrix;
        double power = 0.0; // W
        double noise = 0.0; // sigma^2, W
    };

    struct BcrbResult
    {
        Bfim bfim;
        double value = 0.0; // m^2
    };

    // Default relative weight floor for the tensor GH rule inside the FIM
    // engine. GH-150 weights span ~120 decades; nodes below 1e-22 of the
    // largest weight change no entry by more than rounding.
    inline constexpr double default_node_prune = 1e-22;

    // ---------------------------------------------------------------- prior

    // d/dr ln p(r) for a 1D mixture, evaluated with log-sum-exp responsibilities.
    inline double mixture_score(const AxisMixture &axis, double r)
    {
        double max_log = -std::numeric_limits<double>::infinity();
        std::vector<double> logs(axis.size(), -std::numeric_limits<double>::infinity());
        for (std::size_t l = 0; l < axis.size(); ++l)
        {
            const auto &c = axis[l];
            if (c.weight <= 0.0)
                continue;
            const double z = r - c.mean;
            logs[l] = std::log(c.weight) - 0.5 * std::log(2.0 * std::numbers::pi * c.variance) -
                      0.5 * z * z / c.variance;
            max_log = std::max(max_log, logs[l]);
        }
        if (!std::isfinite(max_log))
        {
            throw NumericalDomainError("mixture_score: prior density underflows at r = " + std::to_string(r));
        }
        double norm = 0.0;
        double num = 0.0;
        for (std::size_t l = 0; l < axis.size(); ++l)
        {
            if (!std::isfinite(logs[l]))
                continue;
            const double g = std::exp(logs[l] - max_log);
            norm += g;
            num += g * (axis[l].mean - r) / axis[l].variance;
        }
        return num / norm;
    }

    inline double prior_fim_axis(const AxisMixture &axis, const GhRule &rule)
    {
        std::size_t active = 0;
        const GaussianComponent *only = nullptr;
        for (const auto &c : axis)
            if (c.weight > 0.0)
            {
                ++active;
                only = &c;
            }
        if (active == 1)
            return 1.0 / only->variance;
        return expect_gmm_1d([&](double r) {
            const double s = mixture_score(axis, r);
            return s * s;
        }, axis, rule);
    }

    inline PriorFim prior_fim(const TargetPrior &prior, const GhRule &rule)
    {
        prior.validate();
        return {prior_fim_axis(prior.x, rule), prior_fim_axis(prior.y, rule)};
    }

    // ---------------------------------------------------------- observation

    /// Unscaled per-position FIM Re{(df/db_i)^* (df/db_j)}.
    inline Fim2 observation_fim_at(const Aperture &ap, const Position &target, const Scenario &s)
    {
        const auto d = channel_derivative(ap, target, s);
        Fim2 j;
        j.xx = std::norm(d.df_dx);
        j.yy = std::norm(d.df_dy);
        j.xy = (std::conj(d.df_dx) * d.df_dy).real();
        j.yx = (std::conj(d.df_dy) * d.df_dx).real();
        return j;
    }

    inline Fim2 observation_fim_at(const PinchLayout &layout, const Position &target, const Scenario &s)
    {
        return observation_fim_at(Aperture::pass(layout, s), target, s);
    }

    /// Prior-expected observation FIM for one target, evaluated on a fixed
    /// tensor GH grid. Besides full evaluation it supports the coordinate scans
    /// of the layout searches: `partial(ap, m)` caches the contribution of every
    /// element except m, after which each candidate (position, weight) for
    /// element m costs one kernel evaluation per node.
    class FimEngine
    {
    public:
        FimEngine(const TargetPrior &prior, const Scenario &s, const GhRule &rule_x, const GhRule &rule_y,
                  double prune = default_node_prune)
            : grid_(NodeGrid::build(prior, rule_x, rule_y, prune)),
              k0_(s.free_wavenumber()), eta_(s.pathloss_factor())
        {
            prior.validate();
            rho2_.resize(grid_.size());
            for (std::size_t n = 0; n < grid_.size(); ++n)
                rho2_[n] = grid_.ry[n] * grid_.ry[n] + s.height() * s.height();
        }

        const NodeGrid &grid() const { return grid_; }

        ObsFim evaluate(const Aperture &ap) const
        {
            ObsFim acc;
            const std::size_t m_count = ap.size();
            for (std::size_t n = 0; n < grid_.size(); ++n)
            {
                cplx sx = 0.0;
                cplx sy = 0.0;
                for (std::size_t m = 0; m < m_count; ++m)
                {
                    const double dx = ap.positions[m] - grid_.rx[n];
                    const double r = std::sqrt(dx * dx + rho2_[n]);
                    const cplx t = detail::derivative_kernel(ap.weights[m], r, k0_, eta_);
                    sx += t * dx;
                    sy += t;
                }
                accumulate(acc, n, sx, sy);
            }
            check(acc);
            return acc;
        }

        class Partial
        {
        public:
            /// FIM with element m moved to `position` and weighted by `weight`.
            ObsFim with_element(double position, cplx weight) const
            {
                ObsFim acc;
                const auto &g = engine_->grid_;
                for (std::size_t n = 0; n < g.size(); ++n)
                {
                    const double dx = position - g.rx[n];
                    const double r = std::sqrt(dx * dx + engine_->rho2_[n]);
                    const cplx t = detail::derivative_kernel(weight, r, engine_->k0_, engine_->eta_);
                    engine_->accumulate(acc, n, rest_x_[n] + t * dx, rest_y_[n] + t);
                }
                engine_->check(acc);
                return acc;
            }

        private:
            friend class FimEngine;
            const FimEngine *engine_ = nullptr;
            std::vector<cplx> rest_x_;
            std::vector<cplx> rest_y_;
        };

        Partial partial(const Aperture &ap, std::size_t skip) const
        {
            Partial p;
            p.engine_ = this;
            p.rest_x_.assign(grid_.size(), cplx{});
            p.rest_y_.assign(grid_.size(), cplx{});
            for (std::size_t n = 0; n < grid_.size(); ++n)
            {
                cplx sx = 0.0;
                cplx sy = 0.0;
                for (std::size_t m = 0; m < ap.size(); ++m)
                {
                    if (m == skip)
                        continue;
                    const double dx = ap.positions[m] - grid_.rx[n];
                    const double r = std::sqrt(dx * dx + rho2_[n]);
                    const cplx t = detail::derivative_kernel(ap.weights[m], r, k0_, eta_);
                    sx += t * dx;
                    sy += t;
                }
                p.rest_x_[n] = sx;
                p.rest_y_[n] = sy;
            }
            return p;
        }

    private:
        // sy holds sum_m t_m; the y-derivative is -r_y * sy.
        void accumulate(ObsFim &acc, std::size_t n, cplx sx, cplx sy) const
        {
            const double w = grid_.weight[n];
            const double ry = grid_.ry[n];
            const double cross = -ry * (sx.real() * sy.real() + sx.imag() * sy.imag());
            acc.xx += w * std::norm(sx);
            acc.xy += w * cross;
            acc.yy += w * ry * ry * std::norm(sy);
        }

        static void check(ObsFim &acc)
        {
            acc.yx = acc.xy;
            if (!std::isfinite(acc.xx) || !std::isfinite(acc.xy) || !std::isfinite(acc.yy))
                throw NumericalDomainError("FimEngine: observation FIM is not finite");
        }

        NodeGrid grid_;
        std::vector<double> rho2_;
        double k0_;
        double eta_;
    };

    inline ObsFim expected_observation_fim(const Aperture &ap, const TargetPrior &prior, const Scenario &s,
                                           const GhRule &rule_x, const GhRule &rule_y)
    {
        return FimEngine(prior, s, rule_x, rule_y).evaluate(ap);
    }

    inline ObsFim expected_observation_fim(const PinchLayout &layout, const TargetPrior &prior, const Scenario &s,
                                           const GhRule &rule_x, const GhRule &rule_y)
    {
        return expected_observation_fim(Aperture::pass(layout, s), prior, s, rule_x, rule_y);
    }

    // ------------------------------------------------------------------ BCRB

    inline Bfim make_bfim(const ObsFim &obs, const PriorFim &prior, double power, double noise)
    {
        const double scale = 2.0 * power / noise;
        Bfim b;
        b.power = power;
        b.noise = noise;
        b.matrix.xx = scale * obs.xx + prior.xx;
        b.matrix.xy = scale * obs.xy;
        b.matrix.yx = scale * obs.yx;
        b.matrix.yy = scale * obs.yy + prior.yy;
        return b;
    }

    /// tr{J^{-1}} = (J_22 + J_11) / (J_11 J_22 - J_12 J_21).
    inline double bcrb_closed_form(const Fim2 &j)
    {
        const double det = j.det();
        if (!(j.xx > 0.0) || !(j.yy > 0.0) || !(det > 0.0) || !std::isfinite(det))
            throw SingularityError("BFIM is not positive definite (det = " + std::to_string(det) + ")");
        return (j.yy + j.xx) / det;
    }

    inline BcrbResult bcrb_from(const ObsFim &obs, const PriorFim &prior, double power, double noise)
    {
        if (!(power >= 0.0))
            throw InvalidArgument("bcrb: power must be non-negative");
        BcrbResult r;
        r.bfim = make_bfim(obs, prior, power, noise);
        r.value = bcrb_closed_form(r.bfim.matrix);
        return r;
    }

    inline BcrbResult bcrb(const PinchLayout &layout, const TargetPrior &prior, double power, const Scenario &s,
                           const GhRule &rule_x, const GhRule &rule_y)
    {
        const auto obs = expected_observation_fim(layout, prior, s, rule_x, rule_y);
        return bcrb_from(obs, prior_fim(prior, rule_x), power, s.total_noise());
    }

    // ------------------------------------------------------ single pinch

    enum class SinglePinchMode
    {
        exact_ghq,     // full modulus |(c - x)(1 + j k0 r)|^2 / r^6
        far_field_ghq, // k0^2 r^2 >> 1 applied inside the GH sum
        three_sigma,   // three-term closed form with weights 2/3, 1/6, 1/6
    };

    /// C = 2 P eta^2 k0^2 / sigma^2, the scale that single_pinch_fi divides out.
    inline double single_pinch_scale(double power, const Scenario &s)
    {
        const double ek = s.pathloss_factor() * s.free_wavenumber();
        return 2.0 * power * ek * ek / s.total_noise();
    }

    namespace detail
    {
        // z^2 / (z^2 + D^2)^2 written as 1 / (z^2 + 2 D^2 + D^4 / z^2); the
        // removable singularity at z = 0 takes its limit 0.
        inline double three_sigma_term(double z, double delta2)
        {
            if (std::abs(z) < 1e-9)
                return 0.0;
            const double z2 = z * z;
            return 1.0 / (z2 + 2.0 * delta2 + delta2 * delta2 / z2);
        }
    }

    /// Normalized Fisher information F(x) / C of a single PA at `x` for a
    /// target with Gaussian x-prior and known r_y.
    inline double single_pinch_fi(double x, const GaussianComponent &prior_x, double r_y, const Scenario &s,
                                  SinglePinchMode mode, const GhRule &rule)
    {
        const double delta2 = s.height() * s.height() + r_y * r_y;
        const double sigma = std::sqrt(prior_x.variance);
        if (mode == SinglePinchMode::three_sigma)
        {
            const double u = prior_x.mean;
            const double off = std::sqrt(3.0) * sigma;
            return (2.0 / 3.0) * detail::three_sigma_term(x - u, delta2) +
                   (1.0 / 6.0) * detail::three_sigma_term(x - (u + off), delta2) +
                   (1.0 / 6.0) * detail::three_sigma_term(x - (u - off), delta2);
        }
        const double k0 = s.free_wavenumber();
        const AxisMixture axis{prior_x};
        return expect_gmm_1d([&](double c) {
            const double z = c - x;
            const double r2 = z * z + delta2;
            if (mode == SinglePinchMode::far_field_ghq)
                return z * z / (r2 * r2);
            return z * z * (1.0 + k0 * k0 * r2) / (k0 * k0 * r2 * r2 * r2);
        }, axis, rule);
    }

    /// Sensing-sensitive centroid u_x +- sqrt(d^2 + r_y^2) restricted to the waveguide.
    inline double optimal_single_pinch(const GaussianComponent &prior_x, double r_y, const Scenario &s,
                                       const GhRule &rule)
    {
        const double delta = std::sqrt(s.height() * s.height() + r_y * r_y);
        const double lo = prior_x.mean - delta;
        const double hi = prior_x.mean + delta;
        const double x_max = s.waveguide_length();
        auto fi = [&](double x) { return single_pinch_fi(x, prior_x, r_y, s, SinglePinchMode::exact_ghq, rule); };
        auto pick = [&](double a, double b) {
            const double fa = fi(a);
            const double fb = fi(b);
            if (std::abs(fa - fb) <= 1e-12 * std::max(std::abs(fa), std::abs(fb)))
                return std::min(a, b);
            return fa > fb ? a : b;
        };
        const bool lo_ok = lo >= 0.0 && lo <= x_max;
        const bool hi_ok = hi >= 0.0 && hi <= x_max;
        if (lo_ok && hi_ok)
            return pick(lo, hi);
        if (lo_ok)
            return lo;
        if (hi_ok)
            return hi;
        return pick(0.0, x_max);
    }
}
