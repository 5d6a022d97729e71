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

#include <cmath>
#include <cstddef>
#include <numbers>
#include <optional>
#include <string>
#include <vector>

namespace pinchsense
{
    // Exact SI value; every derived quantity is computed from it.
    inline constexpr double speed_of_light = 2.99792458e8; // m/s

    inline double dbm_to_watts(double dbm)
    {
        return std::pow(10.0, (dbm - 30.0) / 10.0);
    }

    inline double watts_to_dbm(double watts)
    {
        return 10.0 * std::log10(watts) + 30.0;
    }

    // User-facing scenario parameters. Everything is SI.
    struct ScenarioParams
    {
        double carrier_frequency = 28e9;  // Hz
        double effective_index = 1.4;     // waveguide effective refractive index
        double waveguide_length = 10.0;   // x_max, m
        double waveguide_height = 3.0;    // d, m
        std::size_t num_pas = 5;          // M
        std::optional<double> min_spacing{}; // m, defaults to half a free-space wavelength
        double per_antenna_noise = 1e-12; // W (-90 dBm)
    };

    /// Physical constants and waveguide geometry shared by every model.
    /// Derived quantities are fixed at construction; the object is immutable.
    class Scenario
    {
    public:
        explicit Scenario(const ScenarioParams &p = {})
            : params_(p)
        {
            if (!(p.carrier_frequency > 0.0) || !std::isfinite(p.carrier_frequency))
                throw InvalidArgument("Scenario: carrier frequency must be positive");
            if (!(p.effective_index > 0.0))
                throw InvalidArgument("Scenario: effective index must be positive");
            if (!(p.waveguide_length > 0.0))
                throw InvalidArgument("Scenario: waveguide length must be positive");
            if (!(p.waveguide_height > 0.0))
                throw InvalidArgument("Scenario: waveguide height must be positive");
            if (p.num_pas < 1)
                throw InvalidArgument("Scenario: at least one pinching antenna is required");
            if (!(p.per_antenna_noise > 0.0))
                throw InvalidArgument("Scenario: noise power must be positive");

            wavelength_ = speed_of_light / p.carrier_frequency;
            k0_ = 2.0 * std::numbers::pi / wavelength_;
            guided_wavelength_ = wavelength_ / p.effective_index;
            kw_ = 2.0 * std::numbers::pi / guided_wavelength_;
            eta_ = wavelength_ / (4.0 * std::numbers::pi);
            min_spacing_ = p.min_spacing.value_or(wavelength_ / 2.0);
            total_noise_ = static_cast<double>(p.num_pas) * p.per_antenna_noise;

            if (!(min_spacing_ >= 0.0))
                throw InvalidArgument("Scenario: minimum spacing must be non-negative");
            if (static_cast<double>(p.num_pas - 1) * min_spacing_ > p.waveguide_length)
                throw InvalidArgument("Scenario: (M-1) * min_spacing exceeds the waveguide length");
        }

        const ScenarioParams &params() const { return params_; }

        double carrier_frequency() const { return params_.carrier_frequency; }
        double wavelength() const { return wavelength_; }
        double free_wavenumber() const { return k0_; }
        double effective_index() const { return params_.effective_index; }
        double guided_wavelength() const { return guided_wavelength_; }
        double guided_wavenumber() const { return kw_; }
        double pathloss_factor() const { return eta_; }
        double waveguide_length() const { return params_.waveguide_length; }
        double height() const { return params_.waveguide_height; }
        std::size_t num_pas() const { return params_.num_pas; }
        double min_spacing() const { return min_spacing_; }
        double per_antenna_noise() const { return params_.per_antenna_noise; }
        double total_noise() const { return total_noise_; } // sigma^2 = M * per-antenna noise

        Scenario with_num_pas(std::size_t m) const
        {
            auto p = params_;
            p.num_pas = m;
            return Scenario(p);
        }

        Scenario with_waveguide_length(double x_max) const
        {
            auto p = params_;
            p.waveguide_length = x_max;
            return Scenario(p);
        }

    private:
        ScenarioParams params_;
        double wavelength_ = 0.0;
        double k0_ = 0.0;
        double guided_wavelength_ = 0.0;
        double kw_ = 0.0;
        double eta_ = 0.0;
        double min_spacing_ = 0.0;
        double total_noise_ = 0.0;
    };

    // Target location on the z = 0 plane.
    struct Position
    {
        double x = 0.0;
        double y = 0.0;
    };

    // Ordered x-coordinates of the pinching antennas on the waveguide.
    struct PinchLayout
    {
        std::vector<double> positions;

        std::size_t size() const { return positions.size(); }
        double operator[](std::size_t m) const { return positions[m]; }
        double &operator[](std::size_t m) { return positions[m]; }
        bool operator==(const PinchLayout &) const = default;
    };

    struct GaussianComponent
    {
        double weight = 1.0;
        double mean = 0.0;
        double variance = 1.0; // m^2
    };

    using AxisMixture = std::vector<GaussianComponent>;

    inline void validate_axis(const AxisMixture &axis, const char *name)
    {
        if (axis.empty())
            throw InvalidArgument(std::string("TargetPrior: empty mixture on axis ") + name);
        double total = 0.0;
        for (const auto &c : axis)
        {
            if (!(c.weight >= 0.0 && c.weight <= 1.0))
                throw InvalidArgument(std::string("TargetPrior: weight outside [0,1] on axis ") + name);
            if (!(c.variance > 0.0) || !std::isfinite(c.mean))
                throw InvalidArgument(std::string("TargetPrior: variances must be positive on axis ") + name);
            total += c.weight;
        }
        if (std::abs(total - 1.0) > 1e-12)
            throw InvalidArgument(std::string("TargetPrior: weights do not sum to one on axis ") + name);
    }

    /// Independent per-axis Gaussian-mixture prior over a target's (x, y).
    struct TargetPrior
    {
        AxisMixture x;
        AxisMixture y;

        static TargetPrior gaussian(double mean_x, double var_x, double mean_y, double var_y)
        {
            return TargetPrior{{{1.0, mean_x, var_x}}, {{1.0, mean_y, var_y}}};
        }

        void validate() const
        {
            validate_axis(x, "x");
            validate_axis(y, "y");
        }

        // Weighted mean of the component means on one axis.
        static double axis_mean(const AxisMixture &axis)
        {
            double s = 0.0;
            for (const auto &c : axis)
                s += c.weight * c.mean;
            return s;
        }
    };

    enum class LayoutViolation
    {
        none,
        wrong_size,
        below_start,
        beyond_end,
        spacing,
        not_finite,
    };

    struct LayoutCheck
    {
        LayoutViolation violation = LayoutViolation::none;
        std::size_t index = 0; // 1-based PA index of the first violation
        std::string message;

        bool ok() const { return violation == LayoutViolation::none; }
        explicit operator bool() const { return ok(); }
    };

    /// Checks the feasibility set: every PA on [0, x_max] and consecutive
    /// spacing of at least the scenario's minimum spacing.
    inline LayoutCheck validate_layout(const PinchLayout &layout, const Scenario &scenario)
    {
        auto fail = [](LayoutViolation v, std::size_t m, std::string msg) {
            return LayoutCheck{v, m, std::move(msg)};
        };
        if (layout.size() != scenario.num_pas())
            return fail(LayoutViolation::wrong_size, layout.size(),
                        "layout has " + std::to_string(layout.size()) + " positions, scenario expects " +
                            std::to_string(scenario.num_pas()));

        // Tiny slack for coordinates produced as k * step on a grid.
        const double slack = 1e-12 * std::max(1.0, scenario.waveguide_length());
        for (std::size_t m = 0; m < layout.size(); ++m)
        {
            const double x = layout[m];
            const auto idx = m + 1;
            if (!std::isfinite(x))
                return fail(LayoutViolation::not_finite, idx, "x_" + std::to_string(idx) + " is not finite");
            if (x < -slack)
                return fail(LayoutViolation::below_start, idx, "x_" + std::to_string(idx) + " < 0");
            if (x > scenario.waveguide_length() + slack)
                return fail(LayoutViolation::beyond_end, idx, "x_" + std::to_string(idx) + " > x_max");
            if (m > 0 && x - layout[m - 1] < scenario.min_spacing() - slack)
                return fail(LayoutViolation::spacing, idx,
                            "x_" + std::to_string(idx) + " - x_" + std::to_string(m) + " < min spacing");
        }
        return {};
    }
}
