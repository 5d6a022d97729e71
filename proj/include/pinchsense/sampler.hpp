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
#include "protocols.hpp"
#include "scenario.hpp"

#include <cstdint>
#include <random>
#include <string>
#include <vector>

namespace pinchsense
{
    // Random target generation. Means are uniform over the region R, variances
    // uniform over [var_lo, var_hi]; every axis is a single Gaussian.
    struct SamplerConfig
    {
        std::size_t num_targets = 5;
        double x_lo = -5.0; // region R along the waveguide, m
        double x_hi = 15.0;
        double y_lo = -15.0; // and across it, m
        double y_hi = 15.0;
        double var_lo = 0.01; // m^2
        double var_hi = 0.5;

        void validate() const
        {
            if (num_targets < 1)
                throw InvalidArgument("sampler: num_targets must be at least 1");
            if (!(x_lo <= x_hi) || !(y_lo <= y_hi))
                throw InvalidArgument("sampler: region bounds are inverted");
            if (!(var_lo > 0.0) || !(var_lo <= var_hi))
                throw InvalidArgument("sampler: variance range must be positive and ordered");
        }

        /// R = [-5, x_max + 5] x [-15, 15] for the given waveguide.
        static SamplerConfig for_waveguide(double x_max, std::size_t k)
        {
            SamplerConfig c;
            c.num_targets = k;
            c.x_lo = -5.0;
            c.x_hi = x_max + 5.0;
            return c;
        }
    };

    inline constexpr const char *sampler_prng = "mt19937_64";

    /// Draws in [a, b] from the top 53 bits of one generator output.
    inline double draw_uniform(std::mt19937_64 &gen, double a, double b)
    {
        const double u = static_cast<double>(gen() >> 11) * 0x1.0p-53;
        return a + (b - a) * u;
    }

    /// Targets are drawn in order; each takes u_x, u_y, var_x, var_y.
    inline std::vector<TargetPrior> sample_priors(const SamplerConfig &cfg, std::uint64_t seed)
    {
        cfg.validate();
        std::mt19937_64 gen(seed);
        std::vector<TargetPrior> priors;
        priors.reserve(cfg.num_targets);
        for (std::size_t k = 0; k < cfg.num_targets; ++k)
        {
            const double ux = draw_uniform(gen, cfg.x_lo, cfg.x_hi);
            const double uy = draw_uniform(gen, cfg.y_lo, cfg.y_hi);
            const double vx = draw_uniform(gen, cfg.var_lo, cfg.var_hi);
            const double vy = draw_uniform(gen, cfg.var_lo, cfg.var_hi);
            priors.push_back(TargetPrior::gaussian(ux, vx, uy, vy));
        }
        return priors;
    }

    inline MultiTargetScenario sample_scenario(const Scenario &s, const SamplerConfig &cfg, std::uint64_t seed)
    {
        return {s, sample_priors(cfg, seed)};
    }
}
