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

#include "baselines.hpp"
#include "bcrb.hpp"
#include "config.hpp"
#include "errors.hpp"
#include "optimizer.hpp"
#include "protocols.hpp"
#include "sampler.hpp"
#include "scenario.hpp"

#include <algorithm>
#include <chrono>
#include <cmath>
#include <cstdio>
#include <numeric>
#include <optional>
#include <ostream>
#include <sstream>
#include <string>
#include <utility>
#include <vector>

namespace pinchsense
{
    struct RunRecord
    {
        std::string config_hash;
        std::uint64_t seed = 0;
        std::string prng = sampler_prng;
        std::string command;
        std::string protocol;
        std::string problem;
        bool high_snr = false;
        std::string baseline; // empty unless command == baseline
        std::string sweep_parameter;
        double sweep_value = 0.0;
        std::size_t trial = 0;
        std::vector<PinchLayout> layouts;
        std::vector<std::vector<double>> phases;
        std::vector<double> powers; // W
        std::vector<double> bcrbs;  // m^2
        double objective = 0.0;
        std::string objective_unit;
        double level = 0.0; // m^2, min-max only
        std::vector<std::vector<double>> traces;
        std::size_t evaluations = 0;
        double wall_time_s = 0.0;

        double total_power() const { return std::accumulate(powers.begin(), powers.end(), 0.0); }
        double max_bcrb() const { return bcrbs.empty() ? 0.0 : *std::max_element(bcrbs.begin(), bcrbs.end()); }
    };

    inline json to_json(const RunRecord &r, bool with_trace = true)
    {
        json layouts = json::array();
        for (const auto &l : r.layouts)
            layouts.push_back(l.positions);
        std::vector<double> root(r.bcrbs.size());
        std::transform(r.bcrbs.begin(), r.bcrbs.end(), root.begin(), [](double b) { return std::sqrt(b); });
        json j = {{"config_hash", r.config_hash},
                  {"seed", r.seed},
                  {"prng", r.prng},
                  {"command", r.command},
                  {"protocol", r.protocol},
                  {"problem", r.problem},
                  {"high_snr", r.high_snr},
                  {"baseline", r.baseline},
                  {"trial", r.trial},
                  {"layouts_m", layouts},
                  {"powers_w", r.powers},
                  {"bcrbs_m2", r.bcrbs},
                  {"root_bcrbs_m", root},
                  {"objective", r.objective},
                  {"objective_unit", r.objective_unit},
                  {"level_m2", r.level},
                  {"evaluations", r.evaluations},
                  {"wall_time_s", r.wall_time_s}};
        if (!r.phases.empty())
            j["phases_rad"] = r.phases;
        if (!r.sweep_parameter.empty())
        {
            j["sweep_parameter"] = r.sweep_parameter;
            j["sweep_value"] = r.sweep_value;
        }
        if (with_trace)
            j["traces"] = r.traces;
        return j;
    }

    /// Equality of every field except wall time.
    inline bool same_result(const RunRecord &a, const RunRecord &b)
    {
        auto ja = to_json(a);
        auto jb = to_json(b);
        ja.erase("wall_time_s");
        jb.erase("wall_time_s");
        return ja == jb;
    }

    namespace detail
    {
        inline std::string fmt(double v)
        {
            char buf[40];
            std::snprintf(buf, sizeof buf, "%.17g", v);
            return buf;
        }

        inline std::string join(const std::vector<double> &v, const char *sep = " ")
        {
            std::string s;
            for (std::size_t i = 0; i < v.size(); ++i)
                s += (i ? sep : "") + fmt(v[i]);
            return s;
        }

        /// Re-throws the active pinchsense error with `ctx` prepended, keeping its type.
        template <typename F>
        auto with_context(const std::string &ctx, F &&f) -> decltype(f())
        {
            try
            {
                return f();
            }
            catch (const InfeasibleError &e)
            {
                throw InfeasibleError(ctx + ": " + e.what(), e.floor);
            }
            catch (const CapacityError &e)
            {
                throw CapacityError(ctx + ": " + e.what());
            }
            catch (const InvalidArgument &e)
            {
                throw InvalidArgument(ctx + ": " + e.what());
            }
            catch (const DegenerateGeometryError &e)
            {
                throw DegenerateGeometryError(ctx + ": " + e.what());
            }
            catch (const SingularityError &e)
            {
                throw SingularityError(ctx + ": " + e.what());
            }
            catch (const BracketingError &e)
            {
                throw BracketingError(ctx + ": " + e.what());
            }
            catch (const NumericalDomainError &e)
            {
                throw NumericalDomainError(ctx + ": " + e.what());
            }
            catch (const NumericalError &e)
            {
                throw NumericalError(ctx + ": " + e.what());
            }
        }

        inline ProtocolConfig protocol_config(const SolverSettings &v)
        {
            ProtocolConfig c;
            c.search = v.search;
            c.gh_order = v.gh_order;
            c.ao_max_rounds = v.ao_max_rounds;
            c.ao_tol = v.ao_tol;
            c.init = v.layouts;
            return c;
        }

        inline void copy_solution(RunRecord &r, ProtocolSolution &&sol)
        {
            r.layouts = std::move(sol.layouts);
            r.phases = std::move(sol.phases);
            r.powers = std::move(sol.powers);
            r.bcrbs = std::move(sol.bcrbs);
            r.objective = sol.objective;
            r.level = sol.level;
            r.traces = std::move(sol.traces);
            r.evaluations = sol.evaluations;
        }
    }

    inline MultiTargetScenario build_targets(const ExperimentConfig &cfg)
    {
        const Scenario s = cfg.build_scenario();
        if (cfg.priors)
            return {s, *cfg.priors};
        return sample_scenario(s, cfg.sampler->resolve(s.waveguide_length()), cfg.seed);
    }

    /// Single-target layout search at a fixed per-target power, one slot per target.
    inline ProtocolSolution optimize_single(const MultiTargetScenario &mts, double power, const ProtocolConfig &cfg)
    {
        const TargetModels tm(mts, cfg.gh_order, cfg.node_prune);
        const PassCoordinates param{&mts.scenario};
        auto params = detail::initial_layouts(mts, Protocol::ps, cfg, true);
        detail::complete_layouts(tm, param, Protocol::ps, Problem::min_max,
                                 power * static_cast<double>(tm.size()), params, cfg.search);
        ProtocolSolution sol;
        sol.protocol = Protocol::ps;
        for (std::size_t k = 0; k < tm.size(); ++k)
        {
            auto obj = make_fim_objective(param, {&tm.engine(k)}, [&, k](const std::vector<ObsFim> &j) {
                return bcrb_from(j[0], tm.prior(k), power, tm.noise()).value;
            });
            auto r = detail::run_search(param, obj, params[k], cfg.search);
            param.store(sol, r.params);
            sol.traces.push_back(std::move(r.trace));
            sol.evaluations += r.evaluations;
            sol.powers.push_back(power);
            sol.bcrbs.push_back(bcrb_from(tm.engine(k).evaluate(param.aperture(r.params)), tm.prior(k), power,
                                          tm.noise())
                                    .value);
        }
        sol.objective = *std::max_element(sol.bcrbs.begin(), sol.bcrbs.end());
        return sol;
    }

    /// BCRB of every target at fixed layouts (one shared or one per target).
    inline ProtocolSolution evaluate_bcrb(const MultiTargetScenario &mts, double power,
                                          const std::vector<PinchLayout> &layouts, const ProtocolConfig &cfg)
    {
        ProtocolConfig c = cfg;
        c.init = layouts;
        const TargetModels tm(mts, cfg.gh_order, cfg.node_prune);
        const PassCoordinates param{&mts.scenario};
        const auto protocol = layouts.size() > 1 ? Protocol::ps : Protocol::pm;
        const auto params = detail::initial_layouts(mts, protocol, c);
        const auto fims = detail::slot_fims(tm, param, params);
        ProtocolSolution sol;
        sol.protocol = protocol;
        for (const auto &p : params)
            param.store(sol, p);
        for (std::size_t k = 0; k < tm.size(); ++k)
        {
            sol.powers.push_back(power);
            sol.bcrbs.push_back(bcrb_from(fims[k], tm.prior(k), power, tm.noise()).value);
        }
        sol.objective = *std::max_element(sol.bcrbs.begin(), sol.bcrbs.end());
        return sol;
    }

    /// Runs one command. `warm` replaces the configured start layouts.
    inline RunRecord run(const ExperimentConfig &cfg, Command cmd, const std::vector<PinchLayout> *warm = nullptr)
    {
        cfg.validate();
        cfg.require(cmd);
        const auto t0 = std::chrono::steady_clock::now();
        const auto mts = build_targets(cfg);
        auto pcfg = detail::protocol_config(cfg.solver);
        if (warm)
            pcfg.init = *warm;
        const auto &v = cfg.solver;

        RunRecord r;
        r.config_hash = config_hash(cfg);
        r.seed = cfg.seed;
        r.command = to_string(cmd);
        r.protocol = to_string(v.protocol);
        r.problem = to_string(v.problem);
        r.high_snr = v.high_snr;

        const std::string ctx = std::string(to_string(cmd)) + " (seed " + std::to_string(cfg.seed) + ")";
        detail::with_context(ctx, [&] {
            switch (cmd)
            {
            case Command::eval_bcrb:
                r.problem = "bcrb";
                r.objective_unit = "m^2";
                detail::copy_solution(r, evaluate_bcrb(mts, dbm_to_watts(*v.pmax_dbm),
                                                       v.layouts.empty() ? std::vector{uniform_layout(mts.scenario)}
                                                                         : v.layouts,
                                                       pcfg));
                r.protocol = r.layouts.size() > 1 ? "ps" : "pm";
                break;
            case Command::optimize_single:
                r.protocol = "ps";
                r.problem = "bcrb";
                r.objective_unit = "m^2";
                detail::copy_solution(r, optimize_single(mts, dbm_to_watts(*v.pmax_dbm), pcfg));
                break;
            case Command::power_min:
                r.problem = to_string(Problem::power_min);
                r.high_snr = false;
                r.objective_unit = "W";
                detail::copy_solution(r, solve_protocol(mts, v.protocol, Problem::power_min, *v.gamma_sen, false, pcfg));
                break;
            case Command::min_max:
                r.problem = to_string(Problem::min_max);
                r.objective_unit = "m^2";
                detail::copy_solution(
                    r, solve_protocol(mts, v.protocol, Problem::min_max, dbm_to_watts(*v.pmax_dbm), v.high_snr, pcfg));
                break;
            case Command::baseline:
            {
                r.baseline = to_string(v.baseline);
                const bool pmin = v.problem == Problem::power_min;
                r.objective_unit = pmin ? "W" : "m^2";
                if (pmin)
                    r.high_snr = false;
                const double target = pmin ? *v.gamma_sen : dbm_to_watts(*v.pmax_dbm);
                FpaConfig fpa;
                fpa.phase_grid = v.fpa_phase_grid;
                fpa.center = v.fpa_center;
                detail::copy_solution(r, run_baseline(mts, v.baseline, v.protocol, v.problem, target, r.high_snr, pcfg, fpa));
                break;
            }
            }
            return 0;
        });
        r.wall_time_s = std::chrono::duration<double>(std::chrono::steady_clock::now() - t0).count();
        return r;
    }

    // ------------------------------------------------------------- sweeps

    inline const std::vector<std::string> &sweep_parameters()
    {
        static const std::vector<std::string> names{"gamma_sen", "pmax_dbm", "num_pas",
                                                    "waveguide_length", "num_targets", "step"};
        return names;
    }

    /// Copy of `cfg` with one named parameter set to `value`.
    inline ExperimentConfig with_parameter(const ExperimentConfig &cfg, const std::string &name, double value)
    {
        ExperimentConfig c = cfg;
        auto as_count = [&](double v) {
            if (!(v >= 1.0) || v != std::floor(v))
                throw InvalidArgument("sweep: " + name + " must be a positive integer");
            return static_cast<std::size_t>(v);
        };
        if (name == "gamma_sen")
            c.solver.gamma_sen = value;
        else if (name == "pmax_dbm")
            c.solver.pmax_dbm = value;
        else if (name == "num_pas")
        {
            c.scenario.num_pas = as_count(value);
            c.solver.layouts.clear();
        }
        else if (name == "waveguide_length")
        {
            c.scenario.waveguide_length = value;
            c.solver.layouts.clear();
        }
        else if (name == "num_targets")
        {
            if (!c.sampler)
                throw InvalidArgument("sweep: num_targets requires a sampler block");
            c.sampler->num_targets = as_count(value);
            if (c.solver.layouts.size() > 1)
                c.solver.layouts.clear();
        }
        else if (name == "step")
            c.solver.search.step = value;
        else
            throw InvalidArgument("sweep: unknown parameter '" + name + "'");
        return c;
    }

    namespace detail
    {
        // Sweeps over nested feasible sets are solved in ascending order,
        // each point starting from the previous point's layouts. A larger
        // threshold, budget or waveguide never needs more power or a larger
        // bound from the same start, so those sweeps are monotone by
        // construction. An M sweep adds the new PA by an insertion scan.
        inline bool warm_startable(const std::string &name, Command cmd)
        {
            const bool searches = cmd == Command::power_min || cmd == Command::min_max ||
                                  cmd == Command::optimize_single;
            return searches && (name == "gamma_sen" || name == "pmax_dbm" || name == "waveguide_length" ||
                                name == "num_pas");
        }
    }

    struct SweepSummary
    {
        double value = 0.0;
        std::size_t trials = 0;
        double mean_objective = 0.0;
        double stderr_objective = 0.0;
        double mean_max_root_bcrb = 0.0;
        double stderr_max_root_bcrb = 0.0;
        double mean_total_power = 0.0;
        double stderr_total_power = 0.0;
    };

    struct SweepResult
    {
        std::vector<RunRecord> records; // sorted by (value, trial)
        std::vector<SweepSummary> summary;
    };

    /// Trials (seed, seed + 1, ...) run on the worker pool; points within a
    /// trial run in ascending order of the swept value.
    inline SweepResult sweep(const ExperimentConfig &cfg, Command cmd, const std::string &parameter,
                             std::vector<double> values, std::size_t trials = 1)
    {
        if (std::find(sweep_parameters().begin(), sweep_parameters().end(), parameter) == sweep_parameters().end())
            throw InvalidArgument("sweep: unknown parameter '" + parameter + "'");
        if (values.empty())
            throw InvalidArgument("sweep: no values");
        if (trials < 1)
            throw InvalidArgument("sweep: trials must be at least 1");
        std::sort(values.begin(), values.end());
        const std::string hash = config_hash(cfg);
        const std::size_t threads = std::max<std::size_t>(1, cfg.solver.search.threads);

        std::vector<std::vector<RunRecord>> per_trial(trials);
        parallel_for(trials, threads, [&](std::size_t t) {
            ExperimentConfig base = cfg;
            base.seed = cfg.seed + t;
            if (trials > 1)
                base.solver.search.threads = 1;
            std::optional<std::vector<PinchLayout>> warm;
            for (double v : values)
            {
                const auto point = with_parameter(base, parameter, v);
                const std::string ctx = "sweep " + parameter + " = " + detail::fmt(v) + ", trial " + std::to_string(t);
                auto rec = detail::with_context(ctx, [&] {
                    return run(point, cmd, warm ? &*warm : nullptr);
                });
                if (detail::warm_startable(parameter, cmd))
                    warm = rec.layouts;
                rec.config_hash = hash;
                rec.sweep_parameter = parameter;
                rec.sweep_value = v;
                rec.trial = t;
                per_trial[t].push_back(std::move(rec));
            }
        });

        SweepResult out;
        for (std::size_t i = 0; i < values.size(); ++i)
        {
            SweepSummary s;
            s.value = values[i];
            s.trials = trials;
            std::vector<double> obj, rb, tp;
            for (std::size_t t = 0; t < trials; ++t)
            {
                const auto &r = per_trial[t][i];
                obj.push_back(r.objective);
                rb.push_back(std::sqrt(r.max_bcrb()));
                tp.push_back(r.total_power());
                out.records.push_back(r);
            }
            auto stats = [&](const std::vector<double> &x) {
                const double n = static_cast<double>(x.size());
                const double mean = std::accumulate(x.begin(), x.end(), 0.0) / n;
                double ss = 0.0;
                for (double e : x)
                    ss += (e - mean) * (e - mean);
                const double se = x.size() > 1 ? std::sqrt(ss / (n - 1.0) / n) : 0.0;
                return std::pair{mean, se};
            };
            std::tie(s.mean_objective, s.stderr_objective) = stats(obj);
            std::tie(s.mean_max_root_bcrb, s.stderr_max_root_bcrb) = stats(rb);
            std::tie(s.mean_total_power, s.stderr_total_power) = stats(tp);
            out.summary.push_back(s);
        }
        return out;
    }

    // ------------------------------------------------------------- output

    inline std::string csv_header()
    {
        return "config_hash,seed,prng,trial,command,protocol,problem,high_snr,baseline,sweep_parameter,sweep_value,"
               "objective,objective_unit,level_m2,total_power_w,total_power_dbm,max_bcrb_m2,max_root_bcrb_m,"
               "powers_w,bcrbs_m2,root_bcrbs_m,layouts_m,evaluations,wall_time_s";
    }

    inline std::string csv_row(const RunRecord &r)
    {
        using detail::fmt;
        std::vector<double> root(r.bcrbs.size());
        std::transform(r.bcrbs.begin(), r.bcrbs.end(), root.begin(), [](double b) { return std::sqrt(b); });
        std::string layouts;
        for (std::size_t i = 0; i < r.layouts.size(); ++i)
            layouts += (i ? ";" : "") + detail::join(r.layouts[i].positions);
        const double tp = r.total_power();
        std::ostringstream os;
        os << r.config_hash << ',' << r.seed << ',' << r.prng << ',' << r.trial << ',' << r.command << ','
           << r.protocol << ',' << r.problem << ',' << (r.high_snr ? 1 : 0) << ',' << r.baseline << ','
           << r.sweep_parameter << ',' << (r.sweep_parameter.empty() ? "" : fmt(r.sweep_value)) << ','
           << fmt(r.objective) << ',' << r.objective_unit << ',' << fmt(r.level) << ',' << fmt(tp) << ','
           << (tp > 0.0 ? fmt(watts_to_dbm(tp)) : "-inf") << ',' << fmt(r.max_bcrb()) << ','
           << fmt(std::sqrt(r.max_bcrb())) << ',' << detail::join(r.powers) << ',' << detail::join(r.bcrbs) << ','
           << detail::join(root) << ',' << layouts << ',' << r.evaluations << ',' << fmt(r.wall_time_s);
        return os.str();
    }

    inline void write_csv(std::ostream &os, const std::vector<RunRecord> &records,
                          const std::vector<SweepSummary> &summary = {})
    {
        os << csv_header() << '\n';
        for (const auto &r : records)
            os << csv_row(r) << '\n';
        if (summary.empty() || summary.front().trials < 2)
            return;
        os << '\n'
           << "sweep_value,trials,mean_objective,stderr_objective,mean_max_root_bcrb_m,stderr_max_root_bcrb_m,"
              "mean_total_power_w,stderr_total_power_w\n";
        for (const auto &s : summary)
            os << detail::fmt(s.value) << ',' << s.trials << ',' << detail::fmt(s.mean_objective) << ','
               << detail::fmt(s.stderr_objective) << ',' << detail::fmt(s.mean_max_root_bcrb) << ','
               << detail::fmt(s.stderr_max_root_bcrb) << ',' << detail::fmt(s.mean_total_power) << ','
               << detail::fmt(s.stderr_total_power) << '\n';
    }

    inline void write_json(std::ostream &os, const std::vector<RunRecord> &records, bool with_trace,
                           const std::vector<SweepSummary> &summary = {})
    {
        json j;
        j["records"] = json::array();
        for (const auto &r : records)
            j["records"].push_back(to_json(r, with_trace));
        if (!summary.empty())
        {
            j["summary"] = json::array();
            for (const auto &s : summary)
                j["summary"].push_back({{"sweep_value", s.value},
                                        {"trials", s.trials},
                                        {"mean_objective", s.mean_objective},
                                        {"stderr_objective", s.stderr_objective},
                                        {"mean_max_root_bcrb_m", s.mean_max_root_bcrb},
                                        {"stderr_max_root_bcrb_m", s.stderr_max_root_bcrb},
                                        {"mean_total_power_w", s.mean_total_power},
                                        {"stderr_total_power_w", s.stderr_total_power}});
        }
        os << j.dump(2) << '\n';
    }
}
