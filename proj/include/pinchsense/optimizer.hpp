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

#include <algorithm>
#include <cmath>
#include <concepts>
#include <exception>
#include <functional>
#include <limits>
#include <mutex>
#include <sstream>
#include <string>
#include <thread>
#include <vector>

namespace pinchsense
{
    struct SearchConfig
    {
        double step = 0.1;                // grid resolution, m
        double convergence_tol = 1e-4;    // fractional decrease that ends the outer loop
        std::size_t max_outer_iters = 50;
        std::size_t threads = 1;          // workers for the per-coordinate grid scan

        void validate() const
        {
            if (!(step > 0.0))
                throw InvalidArgument("SearchConfig: step must be positive");
            if (!(convergence_tol > 0.0))
                throw InvalidArgument("SearchConfig: convergence tolerance must be positive");
            if (max_outer_iters < 1)
                throw InvalidArgument("SearchConfig: max_outer_iters must be at least 1");
        }
    };

    /// Runs f(0..n-1) on up to `threads` workers with a fixed strided
    /// assignment. Results must be written to per-index slots by f; any
    /// reduction happens afterwards on the caller's thread.
    template <typename F>
    void parallel_for(std::size_t n, std::size_t threads, F &&f)
    {
        if (threads <= 1 || n < 2)
        {
            for (std::size_t i = 0; i < n; ++i)
                f(i);
            return;
        }
        threads = std::min(threads, n);
        std::exception_ptr error;
        std::mutex error_mutex;
        {
            std::vector<std::jthread> pool;
            pool.reserve(threads);
            for (std::size_t t = 0; t < threads; ++t)
                pool.emplace_back([&, t] {
                    try
                    {
                        for (std::size_t i = t; i < n; i += threads)
                            f(i);
                    }
                    catch (...)
                    {
                        std::lock_guard lock(error_mutex);
                        if (!error)
                            error = std::current_exception();
                    }
                });
        }
        if (error)
            std::rethrow_exception(error);
    }

    /// An objective that can be scanned one coordinate at a time.
    /// `coordinate(params, m)` returns a callable v -> objective(params with
    /// params[m] = v). It is invoked concurrently and must not mutate state.
    template <typename O>
    concept CoordinateObjective = requires(const O &o, const std::vector<double> &params, std::size_t m) {
        { o.value(params) } -> std::convertible_to<double>;
        { o.coordinate(params, m)(0.0) } -> std::convertible_to<double>;
    };

    /// Adapts a plain layout objective to the coordinate interface.
    template <typename F>
    struct LayoutObjective
    {
        F f;

        double value(const std::vector<double> &params) const { return f(PinchLayout{params}); }

        auto coordinate(const std::vector<double> &params, std::size_t m) const
        {
            return [this, params, m](double v) {
                auto p = params;
                p[m] = v;
                return f(PinchLayout{std::move(p)});
            };
        }
    };

    struct CoordinateSearchResult
    {
        std::vector<double> params;
        double value = 0.0;
        std::vector<double> trace; // initial value, then the value after each outer iteration
        std::size_t evaluations = 0;
        std::size_t outer_iterations = 0;
    };

    namespace detail
    {
        [[noreturn]] inline void non_finite_objective(const std::vector<double> &params, double value)
        {
            std::ostringstream os;
            os.precision(17);
            os << "objective returned " << value << " at [";
            for (std::size_t i = 0; i < params.size(); ++i)
                os << (i ? ", " : "") << params[i];
            os << "]";
            throw NumericalDomainError(os.str());
        }
    }

    /// Cyclic coordinate search: for m = 1..M, scan the candidate values of
    /// coordinate m with the others frozen and keep the minimizer (ties go to
    /// the smaller value; the current value is kept unless a candidate is
    /// strictly better or equal and smaller). A candidate scored +inf is
    /// skipped; NaN aborts the search. Stops once an outer iteration
    /// reduces the objective by less than convergence_tol (fractionally).
    template <CoordinateObjective Obj, typename Candidates>
    CoordinateSearchResult coordinate_search(const Obj &obj, std::vector<double> params, Candidates &&candidates,
                                             const SearchConfig &cfg)
    {
        cfg.validate();
        CoordinateSearchResult res;
        double value = obj.value(params);
        ++res.evaluations;
        if (!std::isfinite(value))
            detail::non_finite_objective(params, value);
        res.trace.push_back(value);

        std::vector<double> vals;
        for (std::size_t it = 0; it < cfg.max_outer_iters; ++it)
        {
            const double prev = value;
            for (std::size_t m = 0; m < params.size(); ++m)
            {
                const std::vector<double> cands = candidates(params, m);
                if (cands.empty())
                    continue;
                const auto eval = obj.coordinate(params, m);
                vals.assign(cands.size(), 0.0);
                parallel_for(cands.size(), cfg.threads, [&](std::size_t i) { vals[i] = eval(cands[i]); });
                res.evaluations += cands.size();

                double best_x = params[m];
                double best_v = value;
                for (std::size_t i = 0; i < cands.size(); ++i)
                {
                    if (vals[i] == std::numeric_limits<double>::infinity())
                        continue; // candidate rejected by the objective
                    if (!std::isfinite(vals[i]))
                    {
                        auto p = params;
                        p[m] = cands[i];
                        detail::non_finite_objective(p, vals[i]);
                    }
                    if (vals[i] < best_v || (vals[i] == best_v && cands[i] < best_x))
                    {
                        best_v = vals[i];
                        best_x = cands[i];
                    }
                }
                params[m] = best_x;
                value = best_v;
            }
            ++res.outer_iterations;
            res.trace.push_back(value);
            if (prev - value <= cfg.convergence_tol * std::abs(prev))
                break;
        }
        res.params = std::move(params);
        res.value = value;
        return res;
    }

    /// Grid points k * step in [lo, hi], clipped to [0, x_max].
    inline std::vector<double> grid_points(double lo, double hi, double x_max, double step)
    {
        std::vector<double> out;
        lo = std::max(lo, 0.0);
        hi = std::min(hi, x_max);
        if (hi < lo)
            return out;
        const double eps = 1e-9;
        const auto k_lo = static_cast<long long>(std::ceil(lo / step - eps));
        const auto k_hi = static_cast<long long>(std::floor(hi / step + eps));
        for (long long k = std::max(0LL, k_lo); k <= k_hi; ++k)
        {
            const double x = std::min(static_cast<double>(k) * step, x_max);
            if (x >= lo - eps * step && x <= hi + eps * step)
                out.push_back(x);
        }
        return out;
    }

    /// Feasible grid for PA m with its neighbours frozen: the scan range is
    /// [x_{m-1} + min_spacing, x_{m+1} - min_spacing] intersected with [0, x_max].
    inline std::vector<double> feasible_candidates(const std::vector<double> &x, std::size_t m, const Scenario &s,
                                                   double step)
    {
        const double lo = m == 0 ? 0.0 : x[m - 1] + s.min_spacing();
        const double hi = m + 1 == x.size() ? s.waveguide_length() : x[m + 1] - s.min_spacing();
        return grid_points(lo, hi, s.waveguide_length(), step);
    }

    /// Evenly spread layout x_m = (m - 1) x_max / (M - 1); a single PA sits at x_max / 2.
    inline PinchLayout uniform_layout(const Scenario &s)
    {
        const std::size_t m_count = s.num_pas();
        PinchLayout layout;
        layout.positions.resize(m_count);
        if (m_count == 1)
        {
            layout.positions[0] = 0.5 * s.waveguide_length();
            return layout;
        }
        for (std::size_t m = 0; m < m_count; ++m)
            layout.positions[m] = static_cast<double>(m) * s.waveguide_length() / static_cast<double>(m_count - 1);
        layout.positions.back() = s.waveguide_length();
        return layout;
    }

    /// Grid points at least min_spacing away from every position in `x`.
    inline std::vector<double> insertion_candidates(const std::vector<double> &x, const Scenario &s, double step)
    {
        const double slack = 1e-12 * std::max(1.0, s.waveguide_length());
        std::vector<double> out;
        for (double c : grid_points(0.0, s.waveguide_length(), s.waveguide_length(), step))
        {
            bool ok = true;
            for (double e : x)
                ok = ok && std::abs(c - e) >= s.min_spacing() - slack;
            if (ok)
                out.push_back(c);
        }
        return out;
    }

    /// Adds one coordinate to a layout of M - 1 positions at the feasible grid
    /// point that minimizes the objective, keeping the result sorted.
    template <CoordinateObjective Obj>
    std::vector<double> insert_coordinate(const Obj &obj, std::vector<double> x, const Scenario &s,
                                          const SearchConfig &cfg)
    {
        const auto cands = insertion_candidates(x, s, cfg.step);
        if (cands.empty())
            throw InvalidArgument("insert_coordinate: no feasible position for an additional PA");
        auto ext = x;
        ext.push_back(cands.front());
        const auto eval = obj.coordinate(ext, ext.size() - 1);
        std::vector<double> vals(cands.size());
        parallel_for(cands.size(), cfg.threads, [&](std::size_t i) { vals[i] = eval(cands[i]); });
        std::size_t best = cands.size();
        for (std::size_t i = 0; i < cands.size(); ++i)
        {
            if (std::isnan(vals[i]))
            {
                ext.back() = cands[i];
                detail::non_finite_objective(ext, vals[i]);
            }
            if (vals[i] == std::numeric_limits<double>::infinity())
                continue;
            if (best == cands.size() || vals[i] < vals[best])
                best = i;
        }
        if (best == cands.size())
            throw InvalidArgument("insert_coordinate: every insertion point was rejected by the objective");
        x.push_back(cands[best]);
        std::sort(x.begin(), x.end());
        return x;
    }

    struct SearchResult
    {
        PinchLayout layout;
        double value = 0.0;
        std::vector<double> trace;
        std::size_t evaluations = 0;
        std::size_t outer_iterations = 0;
    };

    /// Element-wise layout search over the grid {0, step, 2 step, ..., x_max}.
    template <CoordinateObjective Obj>
    SearchResult element_wise_minimize(const Obj &obj, const Scenario &s, const PinchLayout &init,
                                       const SearchConfig &cfg)
    {
        if (const auto chk = validate_layout(init, s); !chk)
            throw InvalidArgument("element_wise_minimize: infeasible initial layout: " + chk.message);
        auto r = coordinate_search(obj, init.positions,
                                   [&](const std::vector<double> &x, std::size_t m) {
                                       return feasible_candidates(x, m, s, cfg.step);
                                   },
                                   cfg);
        return {PinchLayout{std::move(r.params)}, r.value, std::move(r.trace), r.evaluations, r.outer_iterations};
    }

    template <typename F>
        requires std::invocable<const F &, const PinchLayout &>
    SearchResult element_wise_minimize(F f, const Scenario &s, const PinchLayout &init, const SearchConfig &cfg)
    {
        return element_wise_minimize(LayoutObjective<F>{std::move(f)}, s, init, cfg);
    }

    inline constexpr double exhaustive_guard = 1e7;

    /// Global optimum over all feasible grid M-tuples (test oracle); ties go
    /// to the lexicographically smallest layout.
    template <typename F>
    SearchResult exhaustive_grid_minimize(F &&f, const Scenario &s, const SearchConfig &cfg)
    {
        cfg.validate();
        const auto grid = grid_points(0.0, s.waveguide_length(), s.waveguide_length(), cfg.step);
        const auto m_count = s.num_pas();
        if (std::pow(static_cast<double>(grid.size()), static_cast<double>(m_count)) > exhaustive_guard)
            throw CapacityError("exhaustive_grid_minimize: J^M exceeds " + std::to_string(exhaustive_guard));

        SearchResult best;
        best.value = std::numeric_limits<double>::infinity();
        bool found = false;
        std::vector<double> x(m_count);
        const double slack = 1e-12 * std::max(1.0, s.waveguide_length());

        std::function<void(std::size_t, std::size_t)> rec = [&](std::size_t m, std::size_t start) {
            if (m == m_count)
            {
                const PinchLayout layout{x};
                const double v = f(layout);
                ++best.evaluations;
                if (!std::isfinite(v))
                    detail::non_finite_objective(x, v);
                if (!found || v < best.value)
                {
                    found = true;
                    best.value = v;
                    best.layout = layout;
                }
                return;
            }
            for (std::size_t j = start; j < grid.size(); ++j)
            {
                if (m > 0 && grid[j] - x[m - 1] < s.min_spacing() - slack)
                    continue;
                x[m] = grid[j];
                rec(m + 1, j);
            }
        };
        rec(0, 0);
        if (!found)
            throw InvalidArgument("exhaustive_grid_minimize: no feasible grid layout");
        best.trace = {best.value};
        return best;
    }
}
