/*
   Copyright 2026 The ramsey-sync Authors

   Licensed under the Apache License, Version 2.0 (the "License");
   you may not use this file except in compliance with the License.
   You may obtain a copy of the License at

       http://www.apache.org/licenses/LICENSE-2.0

   Unless required by applicable law or agreed to in writing, software
   distributed under the License is distributed on an "AS IS" BASIS,
   WITHOUT WARRANTIES OR CONDITIONS OF ANY KIND, either express or implied.
   See the License for the specific language governing permissions and
   limitations under the License.
*/

#include <cstdint>
#include <iostream>
#include <optional>
#include <string>
#include <vector>

#include "CLI11.hpp"
#include "ramsey/cli_io.hpp"

int main(int argc, char** argv) {
    using namespace ramsey;
    CLI::App app{"Ramsey spectroscopy of a cavity-synchronized atomic ensemble"};
    app.set_version_flag("--version", std::string(cli::version()));
    app.require_subcommand(1);

    std::string config, backend = "dicke", out = "out", axis, values;

    auto* ramsey = app.add_subcommand("ramsey", "simulate and fit one Ramsey fringe");
    ramsey->add_option("-c,--config", config, "config JSON")->required();
    ramsey->add_option("-b,--backend", backend, "dense | dicke | cumulant | trajectory")
        ->capture_default_str();
    ramsey->add_option("-o,--out", out, "output directory")->capture_default_str();

    auto* sweep = app.add_subcommand("sweep", "decay rate against repump rate or atom number");
    sweep->add_option("-c,--config", config, "config JSON")->required();
    sweep->add_option("-a,--axis", axis, "w | n_atoms")->required();
    sweep->add_option("-v,--values", values, "comma separated values")->required();
    sweep->add_option("-b,--backend", backend, "dense | dicke | cumulant | trajectory")
        ->capture_default_str();
    sweep->add_option("-o,--out", out, "output directory")->capture_default_str();

    std::optional<int> n_trials;
    std::optional<std::uint64_t> base_seed;
    auto* traj = app.add_subcommand("trajectories", "homodyne trajectory ensemble and crossing statistics");
    traj->add_option("-c,--config", config, "config JSON")->required();
    traj->add_option("-n,--n-trials", n_trials, "overrides run.n_trials");
    traj->add_option("-s,--base-seed", base_seed, "overrides run.base_seed");
    traj->add_option("-o,--out", out, "output directory")->capture_default_str();

    validation::SuiteOptions suite;
    auto* validate = app.add_subcommand("validate", "cross-check the solvers against each other");
    validate->add_option("-o,--out", out, "output directory")->capture_default_str();
    validate->add_option("--threads", suite.threads, "worker threads, 0 for all cores")->capture_default_str();

    try {
        app.parse(argc, argv);
    } catch (const CLI::ParseError& e) {
        const int code = app.exit(e);
        return code == 0 ? 0 : cli::config_error;
    }

    if (*ramsey) return cli::cmd_ramsey(config, backend, out, std::cerr);
    if (*sweep) return cli::cmd_sweep(config, axis, values, backend, out, std::cerr);
    if (*traj) return cli::cmd_trajectories(config, n_trials, base_seed, out, std::cerr);
    return cli::cmd_validate(out, std::cerr, suite);
}
