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

#include <optional>
#include <stdexcept>
#include <string>

namespace ramsey {

/// Raised for invalid model or run configuration.
class ConfigError : public std::runtime_error {
public:
    using std::runtime_error::runtime_error;
};

/// Raised when a solver cannot complete (step-size underflow, norm blow-up, ...).
class SolverError : public std::runtime_error {
public:
    SolverError(const std::string& what, double time_reached)
        : std::runtime_error(what), time_reached_(time_reached) {}
    double time_reached() const noexcept { return time_reached_; }

private:
    double time_reached_;
};

/// Physical parameters of the atom ensemble (and optionally the cavity).
///
/// Times and rates share one unit; the CLI and all shipped configs use T1 = 1.
/// A dephasing time of +infinity switches the dephasing channel off.
struct ModelParams {
    int n_atoms = 1;
    double delta_nu = 10.0;  ///< atom/local-oscillator detuning (angular)
    double t1 = 1.0;
    double t2 = 1.0;
    double w = 0.0;  ///< incoherent repump rate
    double cooperativity = 0.0;
    // Cavity model only.
    std::optional<double> g;
    std::optional<double> kappa;
    std::optional<int> n_photon_max;

    double gamma_c() const { return cooperativity / t1; }
    double decay_rate() const { return 1.0 / t1; }
    double dephasing_rate() const { return 1.0 / (4.0 * t2); }

    /// Throws ConfigError when an invariant is violated.
    void validate() const;
    /// Additionally requires g, kappa and a photon cutoff.
    void validate_cavity() const;
};

struct Rates {
    double gamma_c = 0.0;  ///< collective decay C/T1
    double gamma_s = 0.0;  ///< single-atom decoherence (1/T1 + 1/T2)/2
    double gamma_t = 0.0;  ///< total coherence decay 2 gamma_s + w + gamma_c
};

Rates derive_rates(const ModelParams& params);

/// Advisory regime diagnostics; never used to reject a run.
struct RegimeReport {
    bool bad_cavity = false;  ///< sqrt(N) g < kappa / 10
    bool synchronizing = false;  ///< w > gamma_s and gamma_s > gamma_c
    std::optional<double> vacuum_rabi_over_kappa;  ///< sqrt(N) g / kappa
    double w_over_gamma_s = 0.0;
    double gamma_s_over_gamma_c = 0.0;  ///< +inf when gamma_c == 0
};

RegimeReport validate_regime(const ModelParams& params);

}  // namespace ramsey
