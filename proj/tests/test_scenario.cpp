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

#include <pinchsense/scenario.hpp>

#include <gtest/gtest.h>

#include <cmath>
#include <numbers>

using namespace pinchsense;

TEST(Units, DbmToWatts)
{
    EXPECT_DOUBLE_EQ(dbm_to_watts(30.0), 1.0);
    EXPECT_DOUBLE_EQ(dbm_to_watts(0.0), 1e-3);
    EXPECT_NEAR(dbm_to_watts(-90.0), 1e-12, 1e-26);
    EXPECT_NEAR(watts_to_dbm(dbm_to_watts(12.5)), 12.5, 1e-12);
}

TEST(Scenario, DerivedQuantities)
{
    const Scenario s;
    const double lambda = speed_of_light / 28e9;
    EXPECT_DOUBLE_EQ(s.wavelength(), lambda);
    EXPECT_DOUBLE_EQ(s.free_wavenumber(), 2.0 * std::numbers::pi / lambda);
    EXPECT_DOUBLE_EQ(s.guided_wavelength(), lambda / 1.4);
    EXPECT_DOUBLE_EQ(s.guided_wavenumber(), 2.0 * std::numbers::pi * 1.4 / lambda);
    EXPECT_DOUBLE_EQ(s.pathloss_factor(), lambda / (4.0 * std::numbers::pi));
    EXPECT_DOUBLE_EQ(s.min_spacing(), lambda / 2.0);
    EXPECT_DOUBLE_EQ(s.total_noise(), 5e-12);
    EXPECT_EQ(s.with_num_pas(3).num_pas(), 3u);
    EXPECT_DOUBLE_EQ(s.with_num_pas(3).total_noise(), 3e-12);
    EXPECT_DOUBLE_EQ(s.with_waveguide_length(20.0).waveguide_length(), 20.0);
}

TEST(Scenario, RejectsInvalidParameters)
{
    ScenarioParams p;
    p.waveguide_height = 0.0;
    EXPECT_THROW(Scenario{p}, InvalidArgument);
    p = {};
    p.num_pas = 0;
    EXPECT_THROW(Scenario{p}, InvalidArgument);
    p = {};
    p.num_pas = 3;
    p.waveguide_length = 1.0;
    p.min_spacing = 0.6;
    EXPECT_THROW(Scenario{p}, InvalidArgument);
}

TEST(ValidateLayout, AcceptsUniformDefaultLayout)
{
    ScenarioParams p;
    p.min_spacing = 0.0054;
    const Scenario s(p);
    EXPECT_TRUE(validate_layout(PinchLayout{{0, 2.5, 5, 7.5, 10}}, s).ok());
}

TEST(ValidateLayout, ReportsFirstViolation)
{
    ScenarioParams p;
    p.num_pas = 2;
    p.min_spacing = 0.0054;
    const Scenario s(p);
    const auto dup = validate_layout(PinchLayout{{5, 5}}, s);
    EXPECT_EQ(dup.violation, LayoutViolation::spacing);
    EXPECT_EQ(dup.index, 2u);
    const auto neg = validate_layout(PinchLayout{{-0.1, 3}}, s);
    EXPECT_EQ(neg.violation, LayoutViolation::below_start);
    EXPECT_EQ(neg.index, 1u);
    const auto far = validate_layout(PinchLayout{{1, 10.5}}, s);
    EXPECT_EQ(far.violation, LayoutViolation::beyond_end);
    EXPECT_EQ(far.index, 2u);
    EXPECT_EQ(validate_layout(PinchLayout{{1}}, s).violation, LayoutViolation::wrong_size);
    EXPECT_EQ(validate_layout(PinchLayout{{1, NAN}}, s).violation, LayoutViolation::not_finite);
}

TEST(TargetPrior, Validation)
{
    EXPECT_NO_THROW(TargetPrior::gaussian(1, 0.1, 2, 0.2).validate());
    TargetPrior bad{{{0.5, 0, 1}, {0.4, 1, 1}}, {{1, 0, 1}}};
    EXPECT_THROW(bad.validate(), InvalidArgument);
    TargetPrior neg{{{1, 0, -1}}, {{1, 0, 1}}};
    EXPECT_THROW(neg.validate(), InvalidArgument);
    EXPECT_DOUBLE_EQ(TargetPrior::axis_mean({{0.25, 0, 1}, {0.75, 4, 1}}), 3.0);
}
