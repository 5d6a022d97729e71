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
#include "errors.hpp"
#include "optimizer.hpp"
#include "protocols.hpp"
#include "sampler.hpp"
#include "scenario.hpp"

#include <json.hpp>

#include <cstdint>
#include <cstdio>
#include <fstream>
#include <optional>
#include <set>
#include <sstream>
#include <string>
#include <vector>

namespace pinchsense
{
    using json = nlohmann::json;

    enum class Command
    {
        eval_bcrb,
        optimize_single,
        power_min,
        min_max,
        baseline,
    };

    inline const char *to_string(Command c)
    {
        switch (c)
        {
        case Command::eval_bcrb:
            return "eval-bcrb";
        case Command::optimize_single:
            return "optimize-single";
        case Command::power_min:
            return "power-min";
        case Command::min_max:
            return "min-max";
        case Command::baseline:
            return "baseline";
        }
        return "?";
    }

    struct SamplerBlock
    {
        std::size_t num_targets = 5;
        std::optional<std::pair<double, double>> region_x; // default [-5, x_max + 5]
        std::pair<double, double> region_y{-15.0, 15.0};
        std::pair<double, double> variance{0.01, 0.5};

        SamplerConfig resolve(double x_max) const
        {
            SamplerConfig c = SamplerConfig::for_waveguide(x_max, num_targets);
            if (region_x)
            {
                c.x_lo = region_x->first;
                c.x_hi = region_x->second;
            }
            c.y_lo = region_y.first;
            c.y_hi = region_y.second;
            c.var_lo = variance.first;
            c.var_hi = variance.second;
            return c;
        }
    };

    struct SolverSettings
    {
        Protocol protocol = Protocol::ps;
        Problem problem = Problem::min_max;
        std::optional<double> gamma_sen; // m^2
        std::optional<double> pmax_dbm;  // total budget (min-max) or per-target power (eval/optimize-single)
        bool high_snr = false;
        SearchConfig search;
        std::size_t gh_order = 150;
        std::size_t ao_max_rounds = 20;
        double ao_tol = 1e-4;
        Baseline baseline = Baseline::uniform;
        std::size_t fpa_phase_grid = 64;
        std::optional<double> fpa_center;
        std::vector<PinchLayout> layouts; // evaluation layout or search start
    };

    struct OutputSettings
    {
        std::string format = "csv";
        std::optional<std::string> path;
        bool trace = false;
    };

    struct SweepSettings
    {
        std::string parameter;
        std::vector<double> values;
        std::size_t trials = 1;
        std::optional<Command> command; // defaults to the solver problem
    };

    struct ExperimentConfig
    {
        ScenarioParams scenario;
        std::optional<std::vector<TargetPrior>> priors;
        std::optional<SamplerBlock> sampler = SamplerBlock{};
        std::uint64_t seed = 0;
        SolverSettings solver;
        OutputSettings output;
        std::optional<SweepSettings> sweep;

        Scenario build_scenario() const { return Scenario(scenario); }

        void validate() const
        {
            if (priors.has_value() == sampler.has_value())
                throw InvalidArgument("config: give exactly one of 'priors' and 'sampler'");
            (void)build_scenario();
            solver.search.validate();
            if (output.format != "csv" && output.format != "json")
                throw InvalidArgument("config: output.format must be csv or json");
            if (sweep && sweep->trials < 1)
                throw InvalidArgument("config: sweep.trials must be at least 1");
        }

        /// Required problem inputs for a command.
        void require(Command c) const
        {
            const bool needs_gamma = c == Command::power_min ||
                                     ((c == Command::baseline) && solver.problem == Problem::power_min);
            if (needs_gamma && !solver.gamma_sen)
                throw InvalidArgument("config: solver.gamma_sen_m2 is required for power-min");
            if (!needs_gamma && !solver.pmax_dbm)
                throw InvalidArgument(std::string("config: solver.pmax_dbm is required for ") + to_string(c));
        }
    };

    // ------------------------------------------------------------ parsing

    namespace detail
    {
        inline void check_keys(const json &j, const char *block, std::initializer_list<const char *> allowed)
        {
            if (!j.is_object())
                throw InvalidArgument(std::string("config: '") + block + "' must be an object");
            const std::set<std::string> ok(allowed.begin(), allowed.end());
            for (const auto &[k, v] : j.items())
                if (!ok.count(k))
                    throw InvalidArgument(std::string("config: unknown key '") + k + "' in '" + block + "'");
        }

        template <typename T>
        T get_or(const json &j, const char *key, T fallback)
        {
            if (!j.contains(key) || j.at(key).is_null())
                return fallback;
            try
            {
                return j.at(key).get<T>();
            }
            catch (const json::exception &e)
            {
                throw InvalidArgument(std::string("config: bad value for '") + key + "': " + e.what());
            }
        }

        inline std::pair<double, double> get_range(const json &j, const char *key, std::pair<double, double> fb)
        {
            if (!j.contains(key))
                return fb;
            const auto v = get_or<std::vector<double>>(j, key, {});
            if (v.size() != 2)
                throw InvalidArgument(std::string("config: '") + key + "' must be [lo, hi]");
            return {v[0], v[1]};
        }

        inline Protocol parse_protocol(const std::string &s)
        {
            if (s == "ps")
                return Protocol::ps;
            if (s == "pm")
                return Protocol::pm;
            throw InvalidArgument("unknown protocol '" + s + "' (ps|pm)");
        }

        inline Problem parse_problem(const std::string &s)
        {
            if (s == "power-min")
                return Problem::power_min;
            if (s == "min-max")
                return Problem::min_max;
            throw InvalidArgument("unknown problem '" + s + "' (power-min|min-max)");
        }

        inline Baseline parse_baseline(const std::string &s)
        {
            if (s == "uniform")
                return Baseline::uniform;
            if (s == "centered")
                return Baseline::centered;
            if (s == "fpa")
                return Baseline::fpa;
            throw InvalidArgument("unknown baseline '" + s + "' (uniform|centered|fpa)");
        }

        inline Command parse_command(const std::string &s)
        {
            for (auto c : {Command::eval_bcrb, Command::optimize_single, Command::power_min, Command::min_max,
                           Command::baseline})
                if (s == to_string(c))
                    return c;
            throw InvalidArgument("unknown command '" + s + "'");
        }

        inline AxisMixture parse_axis(const json &j)
        {
            AxisMixture axis;
            if (!j.is_array())
                throw InvalidArgument("config: prior axis must be an array of components");
            for (const auto &c : j)
            {
                check_keys(c, "component", {"weight", "mean", "variance"});
                if (!c.contains("mean") || !c.contains("variance"))
                    throw InvalidArgument("config: prior component needs mean and variance");
                axis.push_back({get_or(c, "weight", 1.0), get_or(c, "mean", 0.0), get_or(c, "variance", 1.0)});
            }
            return axis;
        }

        inline json axis_to_json(const AxisMixture &axis)
        {
            json a = json::array();
            for (const auto &c : axis)
                a.push_back({{"weight", c.weight}, {"mean", c.mean}, {"variance", c.variance}});
            return a;
        }

        inline std::vector<PinchLayout> parse_layouts(const json &j)
        {
            std::vector<PinchLayout> out;
            if (!j.is_array())
                throw InvalidArgument("config: solver.layout must be an array");
            if (!j.empty() && j.front().is_number())
                out.push_back(PinchLayout{j.get<std::vector<double>>()});
            else
                for (const auto &l : j)
                    out.push_back(PinchLayout{l.get<std::vector<double>>()});
            return out;
        }
    }

    inline ExperimentConfig config_from_json(const json &j)
    {
        using namespace detail;
        ExperimentConfig cfg;
        check_keys(j, "config", {"scenario", "priors", "sampler", "seed", "solver", "output", "sweep"});

        if (j.contains("scenario"))
        {
            const auto &s = j.at("scenario");
            check_keys(s, "scenario", {"carrier_frequency_hz", "effective_index", "waveguide_length_m",
                                       "waveguide_height_m", "num_pas", "min_spacing_m", "noise_dbm"});
            auto &p = cfg.scenario;
            p.carrier_frequency = get_or(s, "carrier_frequency_hz", p.carrier_frequency);
            p.effective_index = get_or(s, "effective_index", p.effective_index);
            p.waveguide_length = get_or(s, "waveguide_length_m", p.waveguide_length);
            p.waveguide_height = get_or(s, "waveguide_height_m", p.waveguide_height);
            p.num_pas = get_or(s, "num_pas", p.num_pas);
            if (s.contains("min_spacing_m") && !s.at("min_spacing_m").is_null())
                p.min_spacing = get_or(s, "min_spacing_m", 0.0);
            p.per_antenna_noise = dbm_to_watts(get_or(s, "noise_dbm", watts_to_dbm(p.per_antenna_noise)));
        }

        if (j.contains("priors"))
        {
            std::vector<TargetPrior> priors;
            for (const auto &t : j.at("priors"))
            {
                check_keys(t, "priors[]", {"x", "y"});
                if (!t.contains("x") || !t.contains("y"))
                    throw InvalidArgument("config: each prior needs 'x' and 'y'");
                priors.push_back({parse_axis(t.at("x")), parse_axis(t.at("y"))});
            }
            cfg.priors = std::move(priors);
            cfg.sampler.reset();
        }
        if (j.contains("sampler"))
        {
            const auto &s = j.at("sampler");
            check_keys(s, "sampler", {"num_targets", "region_x_m", "region_y_m", "variance_m2", "seed"});
            SamplerBlock b;
            b.num_targets = get_or(s, "num_targets", b.num_targets);
            if (s.contains("region_x_m"))
                b.region_x = get_range(s, "region_x_m", {0.0, 0.0});
            b.region_y = get_range(s, "region_y_m", b.region_y);
            b.variance = get_range(s, "variance_m2", b.variance);
            cfg.seed = get_or<std::uint64_t>(s, "seed", cfg.seed);
            if (cfg.priors)
                throw InvalidArgument("config: give exactly one of 'priors' and 'sampler'");
            cfg.sampler = b;
        }
        cfg.seed = get_or<std::uint64_t>(j, "seed", cfg.seed);

        if (j.contains("solver"))
        {
            const auto &s = j.at("solver");
            check_keys(s, "solver", {"protocol", "problem", "gamma_sen_m2", "pmax_dbm", "high_snr", "step_m",
                                     "convergence_tol", "max_outer_iters", "threads", "gh_order", "ao_max_rounds",
                                     "ao_tol", "baseline", "fpa_phase_grid", "fpa_center_m", "layout"});
            auto &v = cfg.solver;
            if (s.contains("protocol"))
                v.protocol = parse_protocol(get_or<std::string>(s, "protocol", "ps"));
            if (s.contains("problem"))
                v.problem = parse_problem(get_or<std::string>(s, "problem", "min-max"));
            if (s.contains("gamma_sen_m2"))
                v.gamma_sen = get_or(s, "gamma_sen_m2", 0.0);
            if (s.contains("pmax_dbm"))
                v.pmax_dbm = get_or(s, "pmax_dbm", 0.0);
            v.high_snr = get_or(s, "high_snr", v.high_snr);
            v.search.step = get_or(s, "step_m", v.search.step);
            v.search.convergence_tol = get_or(s, "convergence_tol", v.search.convergence_tol);
            v.search.max_outer_iters = get_or(s, "max_outer_iters", v.search.max_outer_iters);
            v.search.threads = get_or(s, "threads", v.search.threads);
            v.gh_order = get_or(s, "gh_order", v.gh_order);
            v.ao_max_rounds = get_or(s, "ao_max_rounds", v.ao_max_rounds);
            v.ao_tol = get_or(s, "ao_tol", v.ao_tol);
            if (s.contains("baseline"))
                v.baseline = parse_baseline(get_or<std::string>(s, "baseline", "uniform"));
            v.fpa_phase_grid = get_or(s, "fpa_phase_grid", v.fpa_phase_grid);
            if (s.contains("fpa_center_m"))
                v.fpa_center = get_or(s, "fpa_center_m", 0.0);
            if (s.contains("layout"))
                v.layouts = parse_layouts(s.at("layout"));
        }

        if (j.contains("output"))
        {
            const auto &o = j.at("output");
            check_keys(o, "output", {"format", "path", "trace"});
            cfg.output.format = get_or<std::string>(o, "format", cfg.output.format);
            if (o.contains("path") && !o.at("path").is_null())
                cfg.output.path = get_or<std::string>(o, "path", "");
            cfg.output.trace = get_or(o, "trace", cfg.output.trace);
        }

        if (j.contains("sweep"))
        {
            const auto &s = j.at("sweep");
            check_keys(s, "sweep", {"parameter", "values", "trials", "command"});
            SweepSettings w;
            w.parameter = get_or<std::string>(s, "parameter", "");
            w.values = get_or<std::vector<double>>(s, "values", {});
            w.trials = get_or<std::size_t>(s, "trials", 1);
            if (s.contains("command"))
                w.command = parse_command(get_or<std::string>(s, "command", ""));
            cfg.sweep = w;
        }
        return cfg;
    }

    inline ExperimentConfig load_config(const std::string &path)
    {
        std::ifstream in(path);
        if (!in)
            throw InvalidArgument("config: cannot open '" + path + "'");
        json j;
        try
        {
            j = json::parse(in, nullptr, true, true);
        }
        catch (const json::parse_error &e)
        {
            throw InvalidArgument("config: " + path + ": " + e.what());
        }
        return config_from_json(j);
    }

    /// Fully resolved configuration. Thread count and output settings are
    /// left out: they do not change results.
    inline json canonical_json(const ExperimentConfig &cfg)
    {
        const auto &p = cfg.scenario;
        const Scenario s(p);
        json j;
        j["scenario"] = {{"carrier_frequency_hz", p.carrier_frequency},
                         {"effective_index", p.effective_index},
                         {"waveguide_length_m", p.waveguide_length},
                         {"waveguide_height_m", p.waveguide_height},
                         {"num_pas", p.num_pas},
                         {"min_spacing_m", s.min_spacing()},
                         {"noise_w", p.per_antenna_noise}};
        if (cfg.priors)
        {
            json a = json::array();
            for (const auto &t : *cfg.priors)
                a.push_back({{"x", detail::axis_to_json(t.x)}, {"y", detail::axis_to_json(t.y)}});
            j["priors"] = a;
        }
        if (cfg.sampler)
        {
            const auto r = cfg.sampler->resolve(p.waveguide_length);
            j["sampler"] = {{"num_targets", r.num_targets},
                            {"region_x_m", {r.x_lo, r.x_hi}},
                            {"region_y_m", {r.y_lo, r.y_hi}},
                            {"variance_m2", {r.var_lo, r.var_hi}},
                            {"prng", sampler_prng}};
        }
        j["seed"] = cfg.seed;
        const auto &v = cfg.solver;
        json solver = {{"protocol", to_string(v.protocol)},
                       {"problem", to_string(v.problem)},
                       {"high_snr", v.high_snr},
                       {"step_m", v.search.step},
                       {"convergence_tol", v.search.convergence_tol},
                       {"max_outer_iters", v.search.max_outer_iters},
                       {"gh_order", v.gh_order},
                       {"ao_max_rounds", v.ao_max_rounds},
                       {"ao_tol", v.ao_tol},
                       {"baseline", to_string(v.baseline)},
                       {"fpa_phase_grid", v.fpa_phase_grid}};
        solver["gamma_sen_m2"] = v.gamma_sen ? json(*v.gamma_sen) : json(nullptr);
        solver["pmax_dbm"] = v.pmax_dbm ? json(*v.pmax_dbm) : json(nullptr);
        solver["fpa_center_m"] = v.fpa_center ? json(*v.fpa_center) : json(nullptr);
        json layouts = json::array();
        for (const auto &l : v.layouts)
            layouts.push_back(l.positions);
        solver["layout"] = layouts;
        j["solver"] = solver;
        if (cfg.sweep)
        {
            j["sweep"] = {{"parameter", cfg.sweep->parameter},
                          {"values", cfg.sweep->values},
                          {"trials", cfg.sweep->trials},
                          {"command", cfg.sweep->command ? json(to_string(*cfg.sweep->command)) : json(nullptr)}};
        }
        return j;
    }

    /// FNV-1a (64-bit) over the canonical JSON text, as 16 hex digits.
    inline std::string config_hash(const ExperimentConfig &cfg)
    {
        std::uint64_t h = 0xcbf29ce484222325ULL;
        for (unsigned char c : canonical_json(cfg).dump())
        {
            h ^= c;
            h *= 0x100000001b3ULL;
        }
        char buf[17];
        std::snprintf(buf, sizeof buf, "%016llx", static_cast<unsigned long long>(h));
        return buf;
    }
}
