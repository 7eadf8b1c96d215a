// SPDX-License-Identifier: Apache-2.0
//
// cbf - coordinated mmWave beamforming simulator and beam prediction library
// Copyright (C) 2026 The cbf contributors
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

// Command-line front end: generate, train, evaluate, sweep, ablate.

#include "cbf/experiment.hpp"

#include <CLI11.hpp>

#include <filesystem>
#include <iostream>
#include <optional>

namespace
{

struct Common
{
    std::string config;
    std::optional<std::uint64_t> seed;
    std::string out = "out";
};

void add_common(CLI::App* cmd, Common& c)
{
    cmd->add_option("--config", c.config, "Scenario config (JSON); desk defaults when omitted");
    cmd->add_option("--seed", c.seed, "Override the config seed");
    cmd->add_option("--out", c.out, "Output directory")->capture_default_str();
}

cbf::ScenarioConfig resolve(const Common& c)
{
    cbf::ScenarioConfig cfg = c.config.empty() ? cbf::default_config() : cbf::load_config(c.config);
    if (c.seed)
        cfg.seed = *c.seed;
    return cfg;
}

void report(const std::vector<std::string>& files)
{
    for (const auto& f : files)
        std::cout << f << '\n';
}

} // namespace

int main(int argc, char** argv)
{
    CLI::App app{"cbf: coordinated mmWave beamforming simulator and beam predictor"};
    app.require_subcommand(1);

    Common g_opt, t_opt, e_opt, s_opt, a_opt;
    std::string t_dataset, e_dataset, e_models, axis, mode;
    bool oracle = false;

    auto* gen = app.add_subcommand("generate", "Ray-trace the user grid and write a dataset");
    add_common(gen, g_opt);

    auto* train = app.add_subcommand("train", "Train one beam predictor per BS");
    add_common(train, t_opt);
    train->add_option("--dataset", t_dataset, "Dataset file (default <out>/dataset.cbf)");

    auto* eval = app.add_subcommand("evaluate", "Score predictors on the held-out samples");
    add_common(eval, e_opt);
    eval->add_option("--dataset", e_dataset, "Dataset file (default <out>/dataset.cbf)");
    eval->add_option("--models", e_models, "Checkpoint directory (default <out>)");
    eval->add_flag("--oracle", oracle, "Use the true beam ranking instead of trained models");

    auto* sweep = app.add_subcommand("sweep", "Sweep one system parameter");
    add_common(sweep, s_opt);
    sweep->add_option("axis,--axis", axis, "dataset_size | speed | antennas | power")
        ->required()
        ->check(CLI::IsMember({"dataset_size", "speed", "antennas", "power"}));

    auto* ablate = app.add_subcommand("ablate", "Run an ablation study");
    add_common(ablate, a_opt);
    ablate->add_option("mode,--mode", mode, "normalization | sync | rssi | adaptability")
        ->required()
        ->check(CLI::IsMember({"normalization", "sync", "rssi", "adaptability"}));

    try
    {
        app.parse(argc, argv);
    }
    catch (const CLI::ParseError& e)
    {
        const int rc = app.exit(e);
        return rc == 0 ? 0 : 2;
    }

    namespace fs = std::filesystem;
    try
    {
        if (*gen)
            report(cbf::cmd_generate(resolve(g_opt), g_opt.out));
        else if (*train)
        {
            const std::string ds = t_dataset.empty() ? (fs::path(t_opt.out) / "dataset.cbf").string() : t_dataset;
            report(cbf::cmd_train(resolve(t_opt), ds, t_opt.out));
        }
        else if (*eval)
        {
            const std::string ds = e_dataset.empty() ? (fs::path(e_opt.out) / "dataset.cbf").string() : e_dataset;
            const std::string models = e_models.empty() ? e_opt.out : e_models;
            report(cbf::cmd_evaluate(resolve(e_opt), ds, models, e_opt.out, oracle));
        }
        else if (*sweep)
            report(cbf::cmd_sweep(resolve(s_opt), axis, s_opt.out));
        else if (*ablate)
            report(cbf::cmd_ablate(resolve(a_opt), mode, a_opt.out));
    }
    catch (const std::exception& e)
    {
        std::cerr << "error: " << e.what() << '\n';
        return cbf::exit_code_for(e);
    }
    return 0;
}
