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

#include <pinchsense/pinchsense.hpp>

#include <CLI11.hpp>

#include <cmath>
#include <cstdio>
#include <fstream>
#include <iostream>
#include <numbers>
#include <optional>
#include <string>
#include <vector>

using namespace pinchsense;

namespace
{
    struct Overrides
    {
        std::string config;
        std::optional<std::uint64_t> seed;
        std::optional<std::string> protocol;
        std::optional<std::string> problem;
        std::optional<double> gamma_sen;
        std::optional<double> pmax_dbm;
        bool high_snr = false;
        std::optional<double> step;
        std::optional<std::size_t> gh_order;
        std::optional<std::size_t> threads;
        std::optional<std::string> out;
        std::optional<std::string> format;
        std::optional<std::size_t> trials;
        std::optional<std::string> baseline;
        std::optional<std::string> parameter;
        std::vector<double> values;
        std::optional<std::string> sweep_command;
        bool trace = false;
    };

    void add_common(CLI::App *sc, Overrides &o)
    {
        sc->add_option("--config", o.config, "JSON experiment configuration");
        sc->add_option("--seed", o.seed, "sampler seed");
        sc->add_option("--protocol", o.protocol, "ps | pm");
        sc->add_option("--problem", o.problem, "power-min | min-max");
        sc->add_option("--gamma-sen", o.gamma_sen, "BCRB threshold, m^2");
        sc->add_option("--pmax-dbm", o.pmax_dbm, "power budget, dBm");
        sc->add_flag("--high-snr", o.high_snr, "closed-form high-SNR min-max allocation");
        sc->add_option("--step", o.step, "layout grid step, m");
        sc->add_option("--gh-order", o.gh_order, "Gauss-Hermite order per axis");
        sc->add_option("--threads", o.threads, "worker threads");
        sc->add_option("--out", o.out, "output file (default stdout)");
        sc->add_option("--format", o.format, "csv | json");
        sc->add_flag("--trace", o.trace, "include iteration traces in JSON output");
    }

    ExperimentConfig resolve(const Overrides &o)
    {
        ExperimentConfig cfg = o.config.empty() ? ExperimentConfig{} : load_config(o.config);
        if (o.seed)
            cfg.seed = *o.seed;
        if (o.protocol)
            cfg.solver.protocol = detail::parse_protocol(*o.protocol);
        if (o.problem)
            cfg.solver.problem = detail::parse_problem(*o.problem);
        if (o.gamma_sen)
            cfg.solver.gamma_sen = *o.gamma_sen;
        if (o.pmax_dbm)
            cfg.solver.pmax_dbm = *o.pmax_dbm;
        if (o.high_snr)
            cfg.solver.high_snr = true;
        if (o.step)
            cfg.solver.search.step = *o.step;
        if (o.gh_order)
            cfg.solver.gh_order = *o.gh_order;
        if (o.threads)
            cfg.solver.search.threads = *o.threads;
        if (o.out)
            cfg.output.path = *o.out;
        if (o.format)
            cfg.output.format = *o.format;
        if (o.trace)
            cfg.output.trace = true;
        if (o.baseline)
            cfg.solver.baseline = detail::parse_baseline(*o.baseline);
        if (o.trials || o.parameter || !o.values.empty() || o.sweep_command)
        {
            if (!cfg.sweep)
                cfg.sweep = SweepSettings{};
            if (o.trials)
                cfg.sweep->trials = *o.trials;
            if (o.parameter)
                cfg.sweep->parameter = *o.parameter;
            if (!o.values.empty())
                cfg.sweep->values = o.values;
            if (o.sweep_command)
                cfg.sweep->command = detail::parse_command(*o.sweep_command);
        }
        cfg.validate();
        return cfg;
    }

    void emit(const ExperimentConfig &cfg, const std::vector<RunRecord> &records,
              const std::vector<SweepSummary> &summary = {})
    {
        std::ofstream file;
        std::ostream *os = &std::cout;
        if (cfg.output.path)
        {
            file.open(*cfg.output.path);
            if (!file)
                throw InvalidArgument("cannot write '" + *cfg.output.path + "'");
            os = &file;
        }
        if (cfg.output.format == "json")
            write_json(*os, records, cfg.output.trace, summary);
        else
            write_csv(*os, records, summary);
    }

    // Closed-form rules for orders 1-3 and exactness on monomials up to degree 2I - 1.
    int gh_selftest()
    {
        const double sp = std::sqrt(std::numbers::pi);
        bool ok = true;
        auto check = [&](const char *what, double got, double want, double tol) {
            const double err = std::abs(got - want) / std::max(1.0, std::abs(want));
            const bool pass = err <= tol;
            ok = ok && pass;
            std::printf("%-36s %-4s err=%.3e\n", what, pass ? "PASS" : "FAIL", err);
        };
        const auto r1 = gauss_hermite(1);
        check("order 1 node", r1.nodes[0], 0.0, 1e-10);
        check("order 1 weight", r1.weights[0], sp, 1e-10);
        const auto r2 = gauss_hermite(2);
        check("order 2 node", r2.nodes[1], 1.0 / std::sqrt(2.0), 1e-10);
        check("order 2 weight", r2.weights[1], sp / 2.0, 1e-10);
        const auto r3 = gauss_hermite(3);
        check("order 3 outer node", r3.nodes[2], std::sqrt(1.5), 1e-10);
        check("order 3 centre weight", r3.weights[1], 2.0 * sp / 3.0, 1e-10);
        check("order 3 outer weight", r3.weights[2], sp / 6.0, 1e-10);

        for (std::size_t order : {1, 2, 3, 5, 10, 20, 40})
        {
            const auto rule = gauss_hermite(order);
            double worst = 0.0;
            for (std::size_t n = 0; n + 1 <= 2 * order; ++n)
            {
                long double q = 0.0L;
                for (std::size_t i = 0; i < order; ++i)
                    q += static_cast<long double>(rule.weights[i]) * std::pow(static_cast<long double>(rule.nodes[i]), n);
                const double exact = n % 2 ? 0.0 : std::tgamma((static_cast<double>(n) + 1.0) / 2.0);
                const double scale = std::tgamma((static_cast<double>(n) + 2.0) / 2.0);
                worst = std::max(worst, static_cast<double>(std::abs(q - exact)) / std::max(exact, scale));
            }
            const std::string label = "order " + std::to_string(order) + " moments <= 2I-1";
            check(label.c_str(), worst, 0.0, 1e-9);
        }
        std::printf("%s\n", ok ? "gh-selftest: PASS" : "gh-selftest: FAIL");
        return ok ? 0 : 4;
    }
}

int main(int argc, char **argv)
{
    CLI::App app{"pinchsense: Bayesian CRB analysis and optimization for pinching-antenna sensing"};
    app.require_subcommand(1);
    Overrides o;

    struct Sub
    {
        const char *name;
        const char *help;
    };
    const Sub subs[] = {
        {"eval-bcrb", "BCRB of every target at a fixed layout"},
        {"optimize-single", "per-target layout minimizing its BCRB at fixed power"},
        {"power-min", "minimize total power subject to BCRB thresholds"},
        {"min-max", "minimize the largest BCRB under a power budget"},
        {"baseline", "uniform / centered / fixed-array benchmark"},
        {"sweep", "vary one parameter over a list of values"},
    };
    std::vector<CLI::App *> commands;
    for (const auto &s : subs)
    {
        auto *sc = app.add_subcommand(s.name, s.help);
        add_common(sc, o);
        commands.push_back(sc);
    }
    commands[4]->add_option("--kind", o.baseline, "uniform | centered | fpa");
    auto *sw = commands[5];
    sw->add_option("--param", o.parameter, "gamma_sen | pmax_dbm | num_pas | waveguide_length | num_targets | step");
    sw->add_option("--values", o.values, "values of the swept parameter")->delimiter(',');
    sw->add_option("--trials", o.trials, "independent seeds per point");
    sw->add_option("--command", o.sweep_command, "command run at each point");
    sw->add_option("--kind", o.baseline, "baseline kind when --command baseline");
    auto *self = app.add_subcommand("gh-selftest", "check the Gauss-Hermite rules");

    try
    {
        app.parse(argc, argv);
    }
    catch (const CLI::ParseError &e)
    {
        const int rc = app.exit(e);
        return rc == 0 ? 0 : 2;
    }

    try
    {
        if (self->parsed())
            return gh_selftest();
        const auto cfg = resolve(o);
        if (sw->parsed())
        {
            if (!cfg.sweep || cfg.sweep->parameter.empty() || cfg.sweep->values.empty())
                throw InvalidArgument("sweep: parameter and values are required");
            const Command cmd = cfg.sweep->command.value_or(
                cfg.solver.problem == Problem::power_min ? Command::power_min : Command::min_max);
            auto res = sweep(cfg, cmd, cfg.sweep->parameter, cfg.sweep->values, cfg.sweep->trials);
            emit(cfg, res.records, res.summary);
            return 0;
        }
        const Command table[] = {Command::eval_bcrb, Command::optimize_single, Command::power_min,
                                 Command::min_max, Command::baseline};
        for (std::size_t i = 0; i < 5; ++i)
            if (commands[i]->parsed())
            {
                emit(cfg, {run(cfg, table[i])});
                return 0;
            }
        return 2;
    }
    catch (const InfeasibleError &e)
    {
        std::cerr << "infeasible: " << e.what() << " (floor " << e.floor << " m^2)\n";
        return 3;
    }
    catch (const NumericalError &e)
    {
        std::cerr << "numerical failure: " << e.what() << '\n';
        return 4;
    }
    catch (const InvalidArgument &e)
    {
        std::cerr << "configuration error: " << e.what() << '\n';
        return 2;
    }
    catch (const CapacityError &e)
    {
        std::cerr << "configuration error: " << e.what() << '\n';
        return 2;
    }
    catch (const json::exception &e)
    {
        std::cerr << "configuration error: " << e.what() << '\n';
        return 2;
    }
}
