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
#include <optional>
#include <stdexcept>
#include <string>
#include <vector>

#include "ramsey/params.hpp"

/// Ramsey sequence over the solver backends, fringe fitting and sweeps.
namespace ramsey::protocol {

/// Raised when a fringe cannot be fitted.
class FitError : public std::runtime_error {
public:
    using std::runtime_error::runtime_error;
};

enum class Backend { dense, dicke, cumulant, trajectory };

/// shortcut: 2 Im<sigma+>(t). second_pulse: pi/2 about x, then <sigma_z>.
enum class Readout { shortcut, second_pulse };

Backend parse_backend(const std::string& name);
std::string to_string(Backend backend);

struct RunOptions {
    Readout readout = Readout::shortcut;
    double tol = 1e-10;
    // trajectory backend
    double dt = 0.0;  ///< 0 picks 0.01 / gamma_t
    int n_trials = 200;
    std::uint64_t base_seed = 1;
    /// Record <sigma_z>, cross-pair correlation and alpha along the run.
    bool record_expectations = false;
};

struct FringeSeries {
    std::vector<double> times;
    std::vector<double> signal;  ///< per-atom fringe value
    Backend backend = Backend::dicke;
    ModelParams params;
    // filled when RunOptions::record_expectations is set (NaN where undefined)
    std::vector<double> sz;
    std::vector<double> spsm;
    std::vector<double> alpha_abs;
};

/// Ground state, pi/2 pulse about -y (Bloch vector onto +x), free evolution.
/// Samples at t_max * k / n_samples for k = 0 .. n_samples. Throws ConfigError
/// for a backend that cannot handle the parameters or readout.
FringeSeries run_ramsey(const ModelParams& params, Backend backend, double t_max, int n_samples,
                        const RunOptions& options = {});

struct FitOptions {
    bool pin_delta_nu = false;  ///< hold the angular frequency at params.delta_nu
    int max_iterations = 400;
    double min_periods = 5.0;
    /// extrema smaller than this fraction of the largest are ignored in stage 1
    double extremum_floor = 1e-6;
};

struct FitResult {
    double amplitude = 0.0;  ///< extrapolated to t = 0
    double lambda = 0.0;
    double lambda_stderr = 0.0;
    double delta_nu_fit = 0.0;
    double phase = 0.0;
    double rms_residual = 0.0;
    double transient_cut = 0.0;
    int extrema_used = 0;
    bool converged = false;  ///< false: stage-1 estimate returned
};

/// min(5/w, 1/gamma_s); 1/gamma_s when w = 0.
double default_transient_cut(const ModelParams& params);

/// A exp(-lambda t) sin(omega t + phi) on the samples after transient_cut:
/// log-extrema regression, then Levenberg-Marquardt on all four parameters.
/// Throws FitError with fewer than three usable extrema or fewer than
/// min_periods oscillations in the window.
FitResult fit_fringe(const FringeSeries& series, double transient_cut,
                     const FitOptions& options = {});

/// Sign changes located by linear interpolation. With hysteresis > 0 a
/// crossing only counts once the signal has travelled beyond -h..h between
/// consecutive crossings; the reported time is the last sign change inside
/// that excursion.
std::vector<double> zero_crossings(const FringeSeries& series, double hysteresis = 0.0);
std::vector<double> zero_crossings(const std::vector<double>& times,
                                   const std::vector<double>& signal, double hysteresis = 0.0);

enum class SweepAxis { repump, atom_number };

SweepAxis parse_sweep_axis(const std::string& name);

struct SweepOptions {
    Backend backend = Backend::dicke;
    double tol = 1e-9;
    std::optional<double> transient_cut;
    /// fit window in e-folds of the estimated decay
    double efolds = 6.0;
    double max_window = 30.0;
    double periods = 8.0;  ///< minimum oscillations in the fit window
    int samples_per_period = 32;
    int threads = 0;  ///< 0: hardware concurrency
};

enum class FailureKind { none, config, solver, fit };

struct SweepRow {
    double value = 0.0;
    bool ok = false;
    FailureKind failure = FailureKind::none;
    std::string error;
    double lambda_master = 0.0;
    double lambda_stderr = 0.0;
    std::optional<double> lambda_semiclassical;
    std::optional<double> sz_ss;
    std::optional<double> spsm_ss;
    double gamma_s = 0.0;
    double gamma_c = 0.0;
    double delta_nu_used = 0.0;
    double t_max_used = 0.0;
    FitResult fit;
};

/// Run parameters chosen for one sweep point. The decay rate does not depend
/// on the detuning, so the detuning is raised when needed to fit enough
/// oscillations into a window of `efolds` decay times.
struct RunPlan {
    ModelParams params;
    double transient_cut = 0.0;
    double t_max = 0.0;
    int n_samples = 0;
};

RunPlan plan_run(const ModelParams& params, const SweepOptions& options);

/// Points run in parallel; rows come back in input order. A failed point is
/// recorded in its row and the sweep continues.
std::vector<SweepRow> sweep_lambda(const ModelParams& base, SweepAxis axis,
                                   const std::vector<double>& values,
                                   const SweepOptions& options = {});

}  // namespace ramsey::protocol
