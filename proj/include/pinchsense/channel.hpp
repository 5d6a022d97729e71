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

#include "scenario.hpp"

#include <cmath>
#include <complex>
#include <span>
#include <vector>

namespace pinchsense
{
    using cplx = std::complex<double>;

    /// Element positions (on the line y = 0, z = d) and the complex weight each
    /// element applies before the single RF chain. For a pinching-antenna
    /// layout the weight is the in-waveguide phase e^{-j k_w x_m}; a fixed
    /// array carries free unit-modulus phase shifts instead.
    struct Aperture
    {
        std::vector<double> positions;
        std::vector<cplx> weights;

        std::size_t size() const { return positions.size(); }

        static cplx guided_phase(double x, const Scenario &s)
        {
            return std::polar(1.0, -s.guided_wavenumber() * x);
        }

        static Aperture pass(const PinchLayout &layout, const Scenario &s)
        {
            Aperture a;
            a.positions = layout.positions;
            a.weights.reserve(layout.size());
            for (double x : layout.positions)
                a.weights.push_back(guided_phase(x, s));
            return a;
        }

        static Aperture phased(std::vector<double> positions, std::span<const double> phases)
        {
            Aperture a;
            a.positions = std::move(positions);
            a.weights.reserve(phases.size());
            for (double th : phases)
                a.weights.push_back(std::polar(1.0, th));
            return a;
        }
    };

    struct ChannelSample
    {
        std::vector<cplx> free_space; // h_m = eta e^{-j k0 r_m} / r_m
        std::vector<cplx> guided;     // g_m
        cplx effective;               // f = sum_m g_m h_m
        std::vector<double> distances;
    };

    // Partial derivatives of the effective gain f with respect to the target
    // coordinates (r_x, r_y).
    struct ChannelDerivative
    {
        cplx df_dx;
        cplx df_dy;
    };

    namespace detail
    {
        // eta (1 + j k0 r) e^{-j k0 r} / r^3: the common factor of d/db (e^{-j k0 r}/r),
        // multiplied by the element weight.
        inline cplx derivative_kernel(cplx weight, double r, double k0, double eta)
        {
            const double inv_r3 = 1.0 / (r * r * r);
            return weight * cplx(eta * inv_r3, eta * k0 * r * inv_r3) * std::polar(1.0, -k0 * r);
        }
    }

    inline ChannelSample sample_channel(const Aperture &ap, const Position &target, const Scenario &s)
    {
        ChannelSample out;
        const std::size_t m_count = ap.size();
        out.free_space.resize(m_count);
        out.guided = ap.weights;
        out.distances.resize(m_count);
        const double rho2 = target.y * target.y + s.height() * s.height();
        cplx f = 0.0;
        for (std::size_t m = 0; m < m_count; ++m)
        {
            const double dx = ap.positions[m] - target.x;
            const double r = std::sqrt(dx * dx + rho2);
            out.distances[m] = r;
            out.free_space[m] = std::polar(s.pathloss_factor() / r, -s.free_wavenumber() * r);
            f += ap.weights[m] * out.free_space[m];
        }
        out.effective = f;
        return out;
    }

    inline ChannelSample sample_channel(const PinchLayout &layout, const Position &target, const Scenario &s)
    {
        return sample_channel(Aperture::pass(layout, s), target, s);
    }

    // d r_m / d r_x = (r_x - x_m) / r_m and d r_m / d r_y = r_y / r_m, so the
    // chain rule yields numerators (x_m - r_x) and (0 - r_y).
    inline ChannelDerivative channel_derivative(const Aperture &ap, const Position &target, const Scenario &s)
    {
        const double rho2 = target.y * target.y + s.height() * s.height();
        cplx sx = 0.0;
        cplx sy = 0.0;
        for (std::size_t m = 0; m < ap.size(); ++m)
        {
            const double dx = ap.positions[m] - target.x;
            const double r = std::sqrt(dx * dx + rho2);
            const cplx t = detail::derivative_kernel(ap.weights[m], r, s.free_wavenumber(), s.pathloss_factor());
            sx += t * dx;
            sy += t;
        }
        return {sx, -target.y * sy};
    }

    inline ChannelDerivative channel_derivative(const PinchLayout &layout, const Position &target, const Scenario &s)
    {
        return channel_derivative(Aperture::pass(layout, s), target, s);
    }
}
