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
#include "quadrature.hpp"
#include "scenario.hpp"

#include <algorithm>
#include <cmath>
#include <cstdio>
#include <limits>
#include <numeric>
#include <string>
#include <utility>
#include <vector>

namespace pinchsense
{
    enum class Protocol
    {
        ps, // pinching switching: one layout per time slot
        pm, // pinching multiplexing: one shared layout
    };

    enum class Problem
    {
        power_min, // minimize total power s.t. BCRB_k <= gamma
        min_max,   // minimize max_k BCRB_k s.t. sum_k P_k <= P_max
    };

    inline const char *to_string(Protocol p) { return p == Protocol::ps ? "ps" : "pm"; }
    inline const char *to_string(Problem p) { return p == Problem::power_min ? "power-min" : "min-max"; }

    struct MultiTargetScenario
    {
        Scenario scenario;
        std::vector<TargetPrior> priors;

        std::size_t num_targets() const { return priors.size(); }

        void validate() const
        {
            if (priors.empty())
                throw InvalidArgument("MultiTargetScenario: at least one target prior is required");
            for (const auto &p : priors)
                p.validate();
        }
    };

    // ------------------------------------------------------------ KKT power

    /// A1 P^2 + A2 P + A3 = 0 is the condition BCRB(P) = gamma.
    struct KktCoefficients
    {
        double a1 = 0.0;
        double a2 = 0.0;
        double a3 = 0.0;
        bool rank_deficient = false; // observation FIM singular to working precision
        double floor = 0.0;          // lim_{P->inf} BCRB(P), m^2
    };

    // det J below this fraction of J_xx J_yy counts as singular.
    inline constexpr double rank_tolerance = 1e-12;

    inline KktCoefficients kkt_coefficients(const ObsFim &j, const PriorFim &f, double gamma, double noise)
    {
        const double alpha = 2.0 / noise;
        const double det = j.det();
        const double mixed = j.xx * f.yy + f.xx * j.yy;
        KktCoefficients c;
        c.rank_deficient = !(det > rank_tolerance * j.xx * j.yy);
        c.a1 = c.rank_deficient ? 0.0 : alpha * alpha * gamma * det;
        c.a2 = alpha * gamma * mixed - alpha * j.trace();
        c.a3 = f.xx * f.yy * (gamma - f.prior_only_bcrb());
        if (!c.rank_deficient)
            c.floor = 0.0;
        else if (mixed > 0.0)
            c.floor = j.trace() / mixed;
        else
            c.floor = f.prior_only_bcrb();
        return c;
    }

    /// Smallest P >= 0 satisfying the KKT condition; +inf when no power suffices.
    inline double positive_root(const KktCoefficients &c)
    {
        if (c.a3 >= 0.0)
            return 0.0;
        if (c.a1 == 0.0)
        {
            if (!(c.a2 > 0.0))
                return std::numeric_limits<double>::infinity();
            return -c.a3 / c.a2;
        }
        double disc = c.a2 * c.a2 - 4.0 * c.a1 * c.a3;
        if (!(disc >= 0.0))
            throw ConsistencyError("positive_root: negative discriminant with a1 > 0 and a3 < 0");
        const double sq = std::sqrt(disc);
        if (c.a2 >= 0.0)
            return -2.0 * c.a3 / (c.a2 + sq);
        return (-c.a2 + sq) / (2.0 * c.a1);
    }

    inline double power_for_threshold(const ObsFim &j, const PriorFim &f, double gamma, double noise)
    {
        if (!(gamma > 0.0))
            throw InvalidArgument("power_for_threshold: gamma must be positive");
        const auto c = kkt_coefficients(j, f, gamma, noise);
        const double p = positive_root(c);
        if (!std::isfinite(p))
        {
            char msg[128];
            std::snprintf(msg, sizeof msg, "BCRB threshold %.6g m^2 is below the achievable floor %.6g m^2", gamma,
                          c.floor);
            throw InfeasibleError(msg, c.floor);
        }
        return p;
    }

    inline double power_for_threshold(const PinchLayout &layout, const TargetPrior &prior, double gamma,
                                      const Scenario &s, const GhRule &rule_x, const GhRule &rule_y)
    {
        const auto j = expected_observation_fim(layout, prior, s, rule_x, rule_y);
        return power_for_threshold(j, prior_fim(prior, rule_x), gamma, s.total_noise());
    }

    // -------------------------------------------------------- common level

    struct LevelSolution
    {
        double level = 0.0;         // u*, m^2
        std::vector<double> powers; // P_k(u*), W
        std::size_t iterations = 0;
    };

    namespace detail
    {
        inline double power_at_level(const ObsFim &j, const PriorFim &f, double u, double noise)
        {
            return positive_root(kkt_coefficients(j, f, u, noise));
        }

        inline double total_power_at(const std::vector<ObsFim> &j, const std::vector<PriorFim> &f, double u,
                                     double noise)
        {
            double total = 0.0;
            for (std::size_t k = 0; k < j.size(); ++k)
                total += power_at_level(j[k], f[k], u, noise);
            return total;
        }

        // tr{J^{-1}}; +inf when J is singular.
        inline double inverse_trace(const ObsFim &j)
        {
            const double det = j.det();
            if (!(det > rank_tolerance * j.xx * j.yy) || !(j.xx > 0.0) || !(j.yy > 0.0))
                return std::numeric_limits<double>::infinity();
            return j.trace() / det;
        }
    }

    /// Solves sum_k P_k(u) = P_max for the common BCRB level u by geometric
    /// bisection. P_k(u) is the KKT power that brings target k to level u.
    inline LevelSolution minmax_level_solve(const std::vector<ObsFim> &j, const std::vector<PriorFim> &f,
                                            double pmax, double noise)
    {
        if (!(pmax > 0.0))
            throw InvalidArgument("minmax_level_solve: P_max must be positive");
        if (j.empty() || j.size() != f.size())
            throw InvalidArgument("minmax_level_solve: FIM lists must be non-empty and of equal length");

        double hi = 0.0;
        for (const auto &pf : f)
            hi = std::max(hi, pf.prior_only_bcrb());
        hi *= 10.0;

        double est = 0.0;
        for (const auto &jk : j)
            est += detail::inverse_trace(jk);
        double lo = std::isfinite(est) ? noise / (2.0 * pmax) * est * 1e-3 : hi * 1e-6;
        lo = std::min(lo, hi * 0.5);

        int doublings = 0;
        while (detail::total_power_at(j, f, hi, noise) > pmax)
        {
            hi *= 2.0;
            if (++doublings > 60)
                throw BracketingError("minmax_level_solve: upper bracket expansion failed");
        }
        doublings = 0;
        while (detail::total_power_at(j, f, lo, noise) < pmax)
        {
            lo *= 0.5;
            if (++doublings > 60)
                throw BracketingError("minmax_level_solve: lower bracket expansion failed");
        }

        LevelSolution sol;
        for (; sol.iterations < 400; ++sol.iterations)
        {
            if (hi - lo <= 1e-15 * hi)
                break;
            const double mid = std::sqrt(lo * hi);
            if (!(mid > lo && mid < hi))
                break;
            if (detail::total_power_at(j, f, mid, noise) > pmax)
                lo = mid;
            else
                hi = mid;
        }
        sol.level = hi;
        sol.powers.resize(j.size());
        for (std::size_t k = 0; k < j.size(); ++k)
            sol.powers[k] = detail::power_at_level(j[k], f[k], hi, noise);
        return sol;
    }

    // ------------------------------------------------------------ solutions

    struct ProtocolSolution
    {
        Protocol protocol = Protocol::ps;
        Problem problem = Problem::power_min;
        bool high_snr = false;
        std::vector<PinchLayout> layouts;       // K for PS, one for PM
        std::vector<std::vector<double>> phases; // fixed-position arrays only
        std::vector<double> powers;             // W, per target
        std::vector<double> bcrbs;              // m^2, per target
        double objective = 0.0;                 // total power (W) or max BCRB (m^2)
        double level = 0.0;                     // min-max common level u
        std::vector<std::vector<double>> traces; // per searched slot (or one shared)
        std::size_t evaluations = 0;
    };

    struct ProtocolConfig
    {
        SearchConfig search;
        std::size_t gh_order = 150;
        double node_prune = default_node_prune;
        std::size_t ao_max_rounds = 20;
        double ao_tol = 1e-4;
        // Starting layouts: empty (uniform), one (every slot) or one per slot.
        std::vector<PinchLayout> init;
    };

    /// Per-target GH engines and prior FIMs shared by every solver call.
    class TargetModels
    {
    public:
        TargetModels(const MultiTargetScenario &mts, std::size_t gh_order, double prune = default_node_prune)
            : noise_(mts.scenario.total_noise())
        {
            mts.validate();
            const auto rule = gauss_hermite(gh_order);
            engines_.reserve(mts.num_targets());
            for (const auto &p : mts.priors)
            {
                engines_.emplace_back(p, mts.scenario, rule, rule, prune);
                priors_.push_back(prior_fim(p, rule));
            }
        }

        std::size_t size() const { return engines_.size(); }
        const FimEngine &engine(std::size_t k) const { return engines_[k]; }
        const PriorFim &prior(std::size_t k) const { return priors_[k]; }
        const std::vector<PriorFim> &priors() const { return priors_; }
        double noise() const { return noise_; }

    private:
        std::vector<FimEngine> engines_;
        std::vector<PriorFim> priors_;
        double noise_;
    };

    // Coordinates = PA positions on the waveguide.
    struct PassCoordinates
    {
        const Scenario *scenario;

        Aperture aperture(const std::vector<double> &x) const { return Aperture::pass(PinchLayout{x}, *scenario); }

        std::pair<double, cplx> element(std::size_t, double x) const
        {
            return {x, Aperture::guided_phase(x, *scenario)};
        }

        std::vector<double> candidates(const std::vector<double> &x, std::size_t m, const SearchConfig &cfg) const
        {
            return feasible_candidates(x, m, *scenario, cfg.step);
        }

        void store(ProtocolSolution &sol, const std::vector<double> &x) const
        {
            sol.layouts.push_back(PinchLayout{x});
        }
    };

    /// Scans one coordinate of an aperture parameterization against a set of
    /// FIM engines; `reduce` maps the engines' FIMs to the objective.
    template <typename Param, typename Reduce>
    struct FimObjective
    {
        const Param *param;
        std::vector<const FimEngine *> engines;
        Reduce reduce;

        double value(const std::vector<double> &params) const
        {
            const auto ap = param->aperture(params);
            std::vector<ObsFim> fims;
            fims.reserve(engines.size());
            for (const auto *e : engines)
                fims.push_back(e->evaluate(ap));
            return reduce(fims);
        }

        auto coordinate(const std::vector<double> &params, std::size_t m) const
        {
            const auto ap = param->aperture(params);
            std::vector<FimEngine::Partial> parts;
            parts.reserve(engines.size());
            for (const auto *e : engines)
                parts.push_back(e->partial(ap, m));
            return [this, m, parts = std::move(parts)](double v) {
                const auto [pos, w] = param->element(m, v);
                std::vector<ObsFim> fims;
                fims.reserve(parts.size());
                for (const auto &p : parts)
                    fims.push_back(p.with_element(pos, w));
                return reduce(fims);
            };
        }
    };

    template <typename Param, typename Reduce>
    FimObjective<Param, Reduce> make_fim_objective(const Param &param, std::vector<const FimEngine *> engines,
                                                   Reduce reduce)
    {
        return {&param, std::move(engines), std::move(reduce)};
    }

    namespace detail
    {
        inline std::string slot_name(std::size_t k) { return "target " + std::to_string(k + 1); }

        inline std::vector<const FimEngine *> all_engines(const TargetModels &tm)
        {
            std::vector<const FimEngine *> e;
            for (std::size_t k = 0; k < tm.size(); ++k)
                e.push_back(&tm.engine(k));
            return e;
        }

        // Per-slot FIMs: PS pairs slot k with target k, PM evaluates every
        // target on the single shared aperture.
        template <typename Param>
        std::vector<ObsFim> slot_fims(const TargetModels &tm, const Param &param,
                                      const std::vector<std::vector<double>> &params)
        {
            std::vector<ObsFim> fims(tm.size());
            if (params.size() == 1)
            {
                const auto ap = param.aperture(params[0]);
                for (std::size_t k = 0; k < tm.size(); ++k)
                    fims[k] = tm.engine(k).evaluate(ap);
            }
            else
            {
                for (std::size_t k = 0; k < tm.size(); ++k)
                    fims[k] = tm.engine(k).evaluate(param.aperture(params[k]));
            }
            return fims;
        }

        inline void check_power_feasible(const std::vector<ObsFim> &fims, const TargetModels &tm, double gamma)
        {
            for (std::size_t k = 0; k < fims.size(); ++k)
            {
                try
                {
                    (void)power_for_threshold(fims[k], tm.prior(k), gamma, tm.noise());
                }
                catch (const InfeasibleError &e)
                {
                    throw InfeasibleError(slot_name(k) + ": " + e.what(), e.floor);
                }
            }
        }

        inline void check_invertible(const std::vector<ObsFim> &fims)
        {
            for (std::size_t k = 0; k < fims.size(); ++k)
                if (!std::isfinite(inverse_trace(fims[k])))
                    throw DegenerateGeometryError(slot_name(k) +
                                                  ": observation FIM is singular, high-SNR allocation undefined");
        }

        // Infeasible candidates score +inf so the search skips them.
        inline double power_or_inf(const ObsFim &j, const PriorFim &f, double gamma, double noise)
        {
            return positive_root(kkt_coefficients(j, f, gamma, noise));
        }

        /// Powers, BCRBs and objective for fixed apertures.
        inline void finalize(ProtocolSolution &sol, const std::vector<ObsFim> &fims, const TargetModels &tm,
                             Problem problem, double target, bool high_snr)
        {
            const std::size_t k_count = tm.size();
            sol.powers.assign(k_count, 0.0);
            sol.bcrbs.assign(k_count, 0.0);
            if (problem == Problem::power_min)
            {
                check_power_feasible(fims, tm, target);
                for (std::size_t k = 0; k < k_count; ++k)
                {
                    sol.powers[k] = power_for_threshold(fims[k], tm.prior(k), target, tm.noise());
                    sol.bcrbs[k] = bcrb_from(fims[k], tm.prior(k), sol.powers[k], tm.noise()).value;
                }
                sol.objective = std::accumulate(sol.powers.begin(), sol.powers.end(), 0.0);
                return;
            }
            if (high_snr)
            {
                check_invertible(fims);
                double total = 0.0;
                for (const auto &j : fims)
                    total += inverse_trace(j);
                for (std::size_t k = 0; k < k_count; ++k)
                    sol.powers[k] = target * inverse_trace(fims[k]) / total;
                sol.level = tm.noise() / (2.0 * target) * total;
            }
            else
            {
                auto lvl = minmax_level_solve(fims, tm.priors(), target, tm.noise());
                sol.powers = std::move(lvl.powers);
                sol.level = lvl.level;
            }
            for (std::size_t k = 0; k < k_count; ++k)
                sol.bcrbs[k] = bcrb_from(fims[k], tm.prior(k), sol.powers[k], tm.noise()).value;
            sol.objective = *std::max_element(sol.bcrbs.begin(), sol.bcrbs.end());
        }

        template <typename Param>
        CoordinateSearchResult run_search(const Param &param, const auto &obj, std::vector<double> init,
                                          const SearchConfig &cfg)
        {
            return coordinate_search(obj, std::move(init),
                                     [&](const std::vector<double> &x, std::size_t m) {
                                         return param.candidates(x, m, cfg);
                                     },
                                     cfg);
        }

        // Warm starts from a smaller array carry one PA fewer than the
        // scenario; the missing PA is placed by an insertion scan on a
        // per-slot objective (the min-max slots use an even power split).
        template <typename Param>
        void complete_layouts(const TargetModels &, const Param &, Protocol, Problem, double,
                              std::vector<std::vector<double>> &, const SearchConfig &)
        {
        }

        inline void complete_layouts(const TargetModels &tm, const PassCoordinates &param, Protocol protocol,
                                     Problem problem, double target, std::vector<std::vector<double>> &params,
                                     const SearchConfig &cfg)
        {
            const std::size_t m_count = param.scenario->num_pas();
            const double noise = tm.noise();
            for (std::size_t slot = 0; slot < params.size(); ++slot)
            {
                if (params[slot].size() + 1 != m_count)
                    continue;
                const bool shared = protocol == Protocol::pm;
                std::vector<const FimEngine *> engines =
                    shared ? all_engines(tm) : std::vector<const FimEngine *>{&tm.engine(slot)};
                auto obj = make_fim_objective(param, engines, [&, slot, shared](const std::vector<ObsFim> &j) {
                    double v = 0.0;
                    for (std::size_t i = 0; i < j.size(); ++i)
                    {
                        const std::size_t k = shared ? i : slot;
                        if (problem == Problem::power_min)
                            v += power_or_inf(j[i], tm.prior(k), target, noise);
                        else
                            v = std::max(v, bcrb_from(j[i], tm.prior(k), target / static_cast<double>(tm.size()),
                                                      noise)
                                                .value);
                    }
                    return v;
                });
                params[slot] = insert_coordinate(obj, std::move(params[slot]), *param.scenario, cfg);
            }
        }

        /// Protocol solver over any aperture parameterization. `init` holds one
        /// parameter vector for PM or K of them for PS.
        template <typename Param>
        ProtocolSolution solve(const TargetModels &tm, const Param &param, Protocol protocol, Problem problem,
                               double target, bool high_snr, std::vector<std::vector<double>> init,
                               const ProtocolConfig &cfg)
        {
            if (!(target > 0.0))
                throw InvalidArgument(problem == Problem::power_min ? "gamma must be positive"
                                                                    : "P_max must be positive");
            const std::size_t k_count = tm.size();
            const double noise = tm.noise();
            ProtocolSolution sol;
            sol.protocol = protocol;
            sol.problem = problem;
            sol.high_snr = high_snr && problem == Problem::min_max;

            auto params = std::move(init);
            complete_layouts(tm, param, protocol, problem, target, params, cfg.search);
            auto fims = slot_fims(tm, param, params);
            if (problem == Problem::power_min)
                check_power_feasible(fims, tm, target);
            else if (sol.high_snr)
                check_invertible(fims);

            if (problem == Problem::power_min && protocol == Protocol::ps)
            {
                for (std::size_t k = 0; k < k_count; ++k)
                {
                    auto obj = make_fim_objective(param, {&tm.engine(k)}, [&, k](const std::vector<ObsFim> &j) {
                        return power_or_inf(j[0], tm.prior(k), target, noise);
                    });
                    auto r = run_search(param, obj, params[k], cfg.search);
                    params[k] = std::move(r.params);
                    sol.traces.push_back(std::move(r.trace));
                    sol.evaluations += r.evaluations;
                }
            }
            else if (problem == Problem::power_min)
            {
                auto obj = make_fim_objective(param, all_engines(tm), [&](const std::vector<ObsFim> &j) {
                    double total = 0.0;
                    for (std::size_t k = 0; k < j.size(); ++k)
                        total += power_or_inf(j[k], tm.prior(k), target, noise);
                    return total;
                });
                auto r = run_search(param, obj, params[0], cfg.search);
                params[0] = std::move(r.params);
                sol.traces.push_back(std::move(r.trace));
                sol.evaluations += r.evaluations;
            }
            else if (protocol == Protocol::pm)
            {
                auto level_of = [&](const std::vector<ObsFim> &j) {
                    if (sol.high_snr)
                    {
                        double total = 0.0;
                        for (const auto &jk : j)
                            total += inverse_trace(jk);
                        return noise / (2.0 * target) * total;
                    }
                    return minmax_level_solve(j, tm.priors(), target, noise).level;
                };
                auto obj = make_fim_objective(param, all_engines(tm), level_of);
                auto r = run_search(param, obj, params[0], cfg.search);
                params[0] = std::move(r.params);
                sol.traces.push_back(std::move(r.trace));
                sol.evaluations += r.evaluations;
            }
            else
            {
                // Alternating optimization: each round makes one element-wise
                // pass per slot with the other slots frozen.
                SearchConfig pass_cfg = cfg.search;
                pass_cfg.max_outer_iters = 1;
                auto level_of = [&](const std::vector<ObsFim> &all) {
                    if (sol.high_snr)
                    {
                        double total = 0.0;
                        for (const auto &jk : all)
                            total += inverse_trace(jk);
                        return noise / (2.0 * target) * total;
                    }
                    return minmax_level_solve(all, tm.priors(), target, noise).level;
                };
                double level = level_of(fims);
                std::vector<double> trace{level};
                for (std::size_t round = 0; round < cfg.ao_max_rounds; ++round)
                {
                    const double prev = level;
                    for (std::size_t k = 0; k < k_count; ++k)
                    {
                        auto obj = make_fim_objective(param, {&tm.engine(k)}, [&, k](const std::vector<ObsFim> &j) {
                            auto all = fims;
                            all[k] = j[0];
                            return level_of(all);
                        });
                        auto r = run_search(param, obj, params[k], pass_cfg);
                        params[k] = std::move(r.params);
                        fims[k] = tm.engine(k).evaluate(param.aperture(params[k]));
                        sol.evaluations += r.evaluations;
                    }
                    level = level_of(fims);
                    trace.push_back(level);
                    if (prev - level <= cfg.ao_tol * std::abs(prev))
                        break;
                }
                sol.traces.push_back(std::move(trace));
            }

            for (const auto &p : params)
                param.store(sol, p);
            finalize(sol, slot_fims(tm, param, params), tm, problem, target, high_snr);
            return sol;
        }

        inline std::vector<std::vector<double>> initial_layouts(const MultiTargetScenario &mts, Protocol protocol,
                                                                const ProtocolConfig &cfg, bool allow_short = false)
        {
            const std::size_t slots = protocol == Protocol::ps ? mts.num_targets() : 1;
            std::vector<PinchLayout> init = cfg.init;
            if (init.empty())
                init.push_back(uniform_layout(mts.scenario));
            if (init.size() == 1 && slots > 1)
                init.assign(slots, init[0]);
            if (init.size() != slots)
                throw InvalidArgument("initial layouts: expected " + std::to_string(slots) + ", got " +
                                      std::to_string(init.size()));
            std::vector<std::vector<double>> out;
            const std::size_t m_count = mts.scenario.num_pas();
            for (const auto &l : init)
            {
                // One PA short is accepted as a warm start from a smaller array.
                const bool short_one = allow_short && m_count > 1 && l.size() + 1 == m_count;
                const Scenario ref = short_one ? mts.scenario.with_num_pas(m_count - 1) : mts.scenario;
                if (const auto chk = validate_layout(l, ref); !chk)
                    throw InvalidArgument("initial layout: " + chk.message);
                out.push_back(l.positions);
            }
            return out;
        }
    }

    /// Dispatches to the PS / PM solvers; `target` is gamma (power-min) or P_max (min-max).
    inline ProtocolSolution solve_protocol(const MultiTargetScenario &mts, Protocol protocol, Problem problem,
                                           double target, bool high_snr = false, const ProtocolConfig &cfg = {})
    {
        const TargetModels tm(mts, cfg.gh_order, cfg.node_prune);
        const PassCoordinates param{&mts.scenario};
        return detail::solve(tm, param, protocol, problem, target, high_snr,
                             detail::initial_layouts(mts, protocol, cfg, true), cfg);
    }

    inline ProtocolSolution ps_power_min(const MultiTargetScenario &mts, double gamma, const ProtocolConfig &cfg = {})
    {
        return solve_protocol(mts, Protocol::ps, Problem::power_min, gamma, false, cfg);
    }

    inline ProtocolSolution pm_power_min(const MultiTargetScenario &mts, double gamma, const ProtocolConfig &cfg = {})
    {
        return solve_protocol(mts, Protocol::pm, Problem::power_min, gamma, false, cfg);
    }

    inline ProtocolSolution ps_minmax(const MultiTargetScenario &mts, double pmax, bool high_snr = false,
                                      const ProtocolConfig &cfg = {})
    {
        return solve_protocol(mts, Protocol::ps, Problem::min_max, pmax, high_snr, cfg);
    }

    inline ProtocolSolution pm_minmax(const MultiTargetScenario &mts, double pmax, bool high_snr = false,
                                      const ProtocolConfig &cfg = {})
    {
        return solve_protocol(mts, Protocol::pm, Problem::min_max, pmax, high_snr, cfg);
    }

    /// Powers and BCRBs of fixed layouts (K for PS, one for PM) without searching.
    inline ProtocolSolution evaluate_layouts(const MultiTargetScenario &mts, Protocol protocol, Problem problem,
                                             double target, bool high_snr, const std::vector<PinchLayout> &layouts,
                                             const ProtocolConfig &cfg = {})
    {
        ProtocolConfig c = cfg;
        c.init = layouts;
        const TargetModels tm(mts, cfg.gh_order, cfg.node_prune);
        const PassCoordinates param{&mts.scenario};
        const auto params = detail::initial_layouts(mts, protocol, c);
        ProtocolSolution sol;
        sol.protocol = protocol;
        sol.problem = problem;
        sol.high_snr = high_snr && problem == Problem::min_max;
        for (const auto &p : params)
            param.store(sol, p);
        detail::finalize(sol, detail::slot_fims(tm, param, params), tm, problem, target, sol.high_snr);
        return sol;
    }
}
