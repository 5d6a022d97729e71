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

#include <stdexcept>
#include <string>

namespace pinchsense
{
    // Error taxonomy. The CLI maps these onto exit codes:
    //   InvalidArgument / CapacityError          -> 2 (configuration)
    //   InfeasibleError                          -> 3 (infeasible problem)
    //   everything derived from NumericalError   -> 4 (numerical failure)

    struct InvalidArgument : std::invalid_argument
    {
        using std::invalid_argument::invalid_argument;
    };

    // Exhaustive search guard exceeded.
    struct CapacityError : std::length_error
    {
        using std::length_error::length_error;
    };

    // The requested sensing threshold cannot be reached at any power.
    struct InfeasibleError : std::runtime_error
    {
        InfeasibleError(const std::string &what, double achievable_floor)
            : std::runtime_error(what), floor(achievable_floor) {}
        double floor; // m^2, smallest BCRB reachable as P -> infinity
    };

    struct NumericalError : std::runtime_error
    {
        using std::runtime_error::runtime_error;
    };

    // Non-finite value produced by an integrand or objective.
    struct NumericalDomainError : NumericalError
    {
        using NumericalError::NumericalError;
    };

    // Bayesian FIM is not positive definite.
    struct SingularityError : NumericalError
    {
        using NumericalError::NumericalError;
    };

    // Observation FIM singular where its inverse is required (high-SNR mode).
    struct DegenerateGeometryError : NumericalError
    {
        using NumericalError::NumericalError;
    };

    struct BracketingError : NumericalError
    {
        using NumericalError::NumericalError;
    };

    // Guard for conditions that valid inputs cannot produce.
    struct ConsistencyError : NumericalError
    {
        using NumericalError::NumericalError;
    };
}
