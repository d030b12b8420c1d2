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
#include <string>
#include <vector>

#include "ramsey/params.hpp"

/// Conditional pure-state evolution under homodyne monitoring of the
/// collective decay channel.
namespace ramsey::trajectories {

inline constexpr int kMaxTrajectoryAtoms = 14;

/// Philox stream ids; every trial uses its seed as the key.
enum class Channel : std::uint32_t { homodyne = 0, jumps = 1 };

struct TrajectoryOptions {
    int record_stride = 1;  ///< keep every k-th step
    double hysteresis = 0.05;  ///< for the crossing detector
};

struct TrajectoryRecord {
    std::uint64_t seed = 0;
    std::vector<double> times;
    std::vector<double> conditional_signal;  ///< 2 Im<J+>/N
    std::vector<double> sz;  ///< 2 <Jz>/N
    std::vector<double> crossings;
    double final_norm_drift = 0.0;  ///< largest |norm - 1| after renormalization
    long jumps = 0;
    bool failed = false;
    std::string error;
};

/// Largest step allowed for a parameter set: 0.01 / gamma_t.
double max_dt(const ModelParams& params);

/// Starts from every atom in (|g> + |e>)/sqrt2. Per step: exact detuning
/// phase, Euler-Maruyama for sqrt(gamma_c) J- with homodyne current
/// <L + L^dagger>, then a jump/no-jump decision for the local channels
/// w sigma+, sigma-/T1 and sigma_z/(4 T2). Throws ConfigError for N > 14
/// or dt > max_dt, SolverError when the state norm degenerates.
TrajectoryRecord run_trajectory(const ModelParams& params, double t_max, double dt,
                                std::uint64_t seed, const TrajectoryOptions& options = {});

/// Trials with seeds base_seed + i, run on `threads` workers (0: hardware
/// concurrency). Failed trials are kept with failed = true; more than 10 %
/// failures throws SolverError.
std::vector<TrajectoryRecord> ensemble_run(const ModelParams& params, double t_max, double dt,
                                           int n_trials, std::uint64_t base_seed,
                                           const TrajectoryOptions& options = {}, int threads = 0);

struct EnsembleMean {
    std::vector<double> times;
    std::vector<double> signal, signal_stderr;
    std::vector<double> sz, sz_stderr;
    int trials = 0;
};

/// Mean and standard error over the successful records.
EnsembleMean ensemble_mean(const std::vector<TrajectoryRecord>& records);

struct CrossingStatistics {
    int crossing_index = 0;
    double mean_time = 0.0;
    double variance = 0.0;  ///< of the crossing time
    int trial_count = 0;
    bool low_confidence = false;  ///< fewer than 30 trials
    double skewness = 0.0;
    double excess_kurtosis = 0.0;
    /// skewness and kurtosis inside their 1 % normal-theory bounds
    bool gaussian_at_1pct = false;
};

struct DiffusionFit {
    double slope = 0.0;  ///< d(phase variance)/dT
    double slope_stderr = 0.0;
    double intercept = 0.0;
    int points = 0;
};

struct CrossingReport {
    std::vector<CrossingStatistics> rows;
    int excluded = 0;  ///< records lacking one of the requested indices
    /// Weighted fit of delta_nu^2 * variance against mean_time.
    DiffusionFit diffusion;
};

/// Indices 0, stride, 2 stride, ... of the crossings that at least `coverage`
/// of the successful records reach.
std::vector<int> common_crossing_indices(const std::vector<TrajectoryRecord>& records,
                                         double coverage = 0.9, int stride = 1);

/// Statistics over records that contain every requested index.
CrossingReport crossing_statistics(const std::vector<TrajectoryRecord>& records,
                                   const std::vector<int>& crossing_indices, double delta_nu);

}  // namespace ramsey::trajectories
