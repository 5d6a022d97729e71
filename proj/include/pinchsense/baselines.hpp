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

#include "bcrb.hpp"
#include "channel.hpp"
#include "errors.hpp"
#include "optimizer.hpp"
#include "protocols.hpp"
#include "scenario.hpp"

#include <algorithm>
#include <cmath>
#include <complex>
#include <numbers>
#include <optional>
#include <vector>

namespace pinchsense
{
    enum class Baseline
    {
        uniform,  // evenly spread PAs
        centered, // compact subarray around the prior centroid
        fpa,      // fixed half-wavelength array with optimized phase shifts
    };

    inline const char *to_string(Baseline b)
    {
        switch (b)
        {
        case Baseline::uniform:
            return "uniform";
        case Baseline::centered:
            return "centered";
        case Baseline::fpa:
            return "fpa";
        }
        return "?";
    }

    /// M PAs spaced max(lambda/2, min_spacing) apart around `center`, shifted as
    /// a block to lie inside [0, x_max].
    inline PinchLayout compact_layout(const Scenario &s, double center)
    {
        const std::size_t m_count = s.num_pas();
        const double spacing = std::max(0.5 * s.wavelength(), s.min_spacing());
        const double half = 0.5 * static_cast<double>(m_count - 1) * spacing;
        const double first = std::clamp(center - half, 0.0, std::max(0.0, s.waveguide_length() - 2.0 * half));
        PinchLayout layout;
        layout.positions.resize(m_count);
        for (std::size_t m = 0; m < m_count; ++m)
            layout.positions[m] = std::min(first + static_cast<double>(m) * spacing, s.waveguide_length());
        return layout;
    }

    /// Compact subarray centered on the target-averaged mixture mean of the x-priors.
    inline PinchLayout centered_layout(const Scenario &s, const std::vector<TargetPrior> &priors)
    {
        if (priors.empty())
            throw InvalidArgument("centered_layout: no priors");
        double c = 0.0;
        for (const auto &p : priors)
            c += TargetPrior::axis_mean(p.x);
        return compact_layout(s, c / static_cast<double>(priors.size()));
    }

    /// One centered layout per slot under PS (each on its own target), a single
    /// one on the average centroid under PM.
    inline std::vector<PinchLayout> centered_layouts(const MultiTargetScenario &mts, Protocol protocol)
    {
        if (protocol == Protocol::pm)
            return {centered_layout(mts.scenario, mts.priors)};
        std::vector<PinchLayout> out;
        for (const auto &p : mts.priors)
            out.push_back(centered_layout(mts.scenario, {p}));
        return out;
    }

    struct FpaConfig
    {
        std::optional<double> center; // array center along x; defaults to x_max / 2
        std::size_t phase_grid = 64;  // phases 2 pi q / Q, q = 0..Q-1
    };

    /// Fixed positions, unit-modulus phases as coordinates.
    struct PhaseCoordinates
    {
        std::vector<double> positions;
        std::size_t grid_size = 64;

        Aperture aperture(const std::vector<double> &theta) const { return Aperture::phased(positions, theta); }

        std::pair<double, cplx> element(std::size_t m, double theta) const
        {
            return {positions[m], std::polar(1.0, theta)};
        }

        std::vector<double> candidates(const std::vector<double> &, std::size_t, const SearchConfig &) const
        {
            std::vector<double> out(grid_size);
            for (std::size_t q = 0; q < grid_size; ++q)
                out[q] = 2.0 * std::numbers::pi * static_cast<double>(q) / static_cast<double>(grid_size);
            return out;
        }

        void store(ProtocolSolution &sol, const std::vector<double> &theta) const
        {
            sol.layouts.push_back(PinchLayout{positions});
            sol.phases.push_back(theta);
        }
    };

    inline std::vector<double> fpa_positions(const Scenario &s, double center)
    {
        const std::size_t m_count = s.num_pas();
        const double spacing = 0.5 * s.wavelength();
        std::vector<double> x(m_count);
        for (std::size_t m = 0; m < m_count; ++m)
            x[m] = center + (static_cast<double>(m) - 0.5 * static_cast<double>(m_count - 1)) * spacing;
        return x;
    }

    /// Block-coordinate descent on the FPA phase shifts for the given protocol
    /// and problem; phases start at zero.
    inline ProtocolSolution fpa_bcd(const MultiTargetScenario &mts, Protocol protocol, Problem problem,
                                    double target, bool high_snr = false, const FpaConfig &fpa = {},
                                    const ProtocolConfig &cfg = {})
    {
        if (fpa.phase_grid < 8)
            throw InvalidArgument("fpa_bcd: phase grid needs at least 8 points");
        const TargetModels tm(mts, cfg.gh_order, cfg.node_prune);
        const PhaseCoordinates param{fpa_positions(mts.scenario, fpa.center.value_or(0.5 * mts.scenario.waveguide_length())),
                                     fpa.phase_grid};
        const std::size_t slots = protocol == Protocol::ps ? mts.num_targets() : 1;
        std::vector<std::vector<double>> init(slots, std::vector<double>(mts.scenario.num_pas(), 0.0));
        return detail::solve(tm, param, protocol, problem, target, high_snr, std::move(init), cfg);
    }

    /// Uniform and centered layouts are evaluated as-is; FPA runs its phase search.
    inline ProtocolSolution run_baseline(const MultiTargetScenario &mts, Baseline kind, Protocol protocol,
                                         Problem problem, double target, bool high_snr = false,
                                         const ProtocolConfig &cfg = {}, const FpaConfig &fpa = {})
    {
        switch (kind)
        {
        case Baseline::uniform:
            return evaluate_layouts(mts, protocol, problem, target, high_snr, {uniform_layout(mts.scenario)}, cfg);
        case Baseline::centered:
            return evaluate_layouts(mts, protocol, problem, target, high_snr, centered_layouts(mts, protocol), cfg);
        case Baseline::fpa:
            return fpa_bcd(mts, protocol, problem, target, high_snr, fpa, cfg);
        }
        throw InvalidArgument("run_baseline: unknown baseline");
    }
}
