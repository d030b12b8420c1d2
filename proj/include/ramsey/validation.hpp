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

#pragma once

#include <cstdint>
#include <functional>
#include <string>
#include <vector>

#include "ramsey/dicke.hpp"
#include "ramsey/params.hpp"

/// Cross-checks of the solvers against each other.
namespace ramsey::validation {

struct CheckResult {
    std::string name;
    bool passed = false;
    double max_deviation = 0.0;
    double tolerance = 0.0;
    std::string detail;
    double seconds = 0.0;
};

struct Report {
    std::vector<CheckResult> checks;
    bool passed() const;
};

/// Applied to the Dicke generator before it is used; lets a test corrupt a
/// coupling coefficient and watch the equivalence check fail.
using GeneratorMutation = std::function<void(dicke::Generator&)>;

/// Every channel switched on, rates of order one.
ModelParams equivalence_params(int n_atoms);

/// <sigma_z>, <sigma_j+ sigma_k-> and <J+ J-> of the full Dicke solver against
/// the dense oracle on t in [0, 5 T1].
CheckResult check_dense_vs_dicke(int n_atoms, double tolerance = 1e-8,
                                 const GeneratorMutation& mutate = {});

struct CavityCheckOptions {
    double coupling_ratio = 0.05;  ///< sqrt(N) g / kappa
    int n_photon_max = 5;
    double cooperativity = 0.2;
    double w = 1.0;
    double tolerance = 1e-3;
    int samples = 200;
};

/// Two atoms with and without an explicit cavity mode, compared on
/// <sigma_z>, <sigma+> and <J+ J-> over t in [0, 2/gamma_s]. The cavity keeps
/// g = ratio kappa / sqrt(N) and kappa = C N / ratio^2, so both models share
/// gamma_c = g^2 / kappa.
CheckResult check_cavity_elimination(const CavityCheckOptions& options = {});

struct TrajectoryCheckOptions {
    int n_atoms = 4;
    int n_trials = 200;
    std::uint64_t base_seed = 1000;
    double t_max = 3.0;
    int samples = 30;
    double sigmas = 3.0;
    int threads = 0;
};

/// Ensemble-mean <sigma_z> of the trajectories within `sigmas` standard
/// errors of the Dicke solver at every sample after t = 0.
CheckResult check_trajectory_mean(const TrajectoryCheckOptions& options = {});

/// Gamma_C = w = 0: fitted decay rate against (1/T1 + 1/T2)/2.
CheckResult check_conventional_limit(double t2_over_t1, double tolerance = 0.01);

struct SuiteOptions {
    /// The suite runs the elimination check well inside the bad-cavity
    /// regime, where the stored photon number is negligible.
    double cavity_ratio = 0.02;
    int threads = 0;
    GeneratorMutation mutate;
};

/// Dense vs Dicke for N = 2..4, cavity elimination, trajectory mean and the
/// conventional limit for T2/T1 in {0.5, 1, 2}.
Report run_suite(const SuiteOptions& options = {});

}  // namespace ramsey::validation
