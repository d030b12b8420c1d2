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

#include <complex>

#include <Eigen/Dense>

#include "ramsey/params.hpp"

/// Large-N reductions: cumulant closure, mean-field single-atom equation and
/// the Kuramoto phase model.
namespace ramsey::semiclassical {

using Complex = std::complex<double>;

/// Second-order cumulant variables shared by all atoms.
struct CumulantState {
    double sz = 0.0;  ///< <sigma_z>
    double spsm = 0.0;  ///< <sigma_j+ sigma_k->, j != k
};

/// Closed pair with <sz_j sz_k> ~ <sz>^2 and <s+_j s-_k sz_l> ~ <s+_j s-_k><sz>.
CumulantState cumulant_rhs(const CumulantState& state, const ModelParams& params);

/// Physical fixed point of cumulant_rhs. Eliminating spsm leaves a quadratic
/// in sz; the root is followed by continuation in gamma_c from the decoupled
/// value and must be real with |sz| <= 1 and spsm >= -1/4. Below inversion
/// spsm is negative. Requires gamma_c > 0 and N >= 2; throws
/// SolverError when no root qualifies.
CumulantState cumulant_steady_state(const ModelParams& params);

/// Largest residual of the two steady-state equations.
double steady_state_residual(const CumulantState& state, const ModelParams& params);

/// Fringe-visibility decay rate 1/2 [gamma_t - (N-1) gamma_c alpha sz_ss].
/// Without collective decay this is gamma_t / 2.
double lambda_semiclassical(const ModelParams& params, double alpha_ss = 1.0);

/// Coherence, inversion and pair correlation integrated together; the
/// coherence obeys d s+/dt = (i dnu - gamma_t/2) s+ + gamma_c/2 (N-1) alpha s+ sz.
struct CoherentCumulantState {
    Complex splus;
    CumulantState cumulants;
};

CoherentCumulantState coherent_cumulant_rhs(const CoherentCumulantState& state,
                                            const ModelParams& params, double alpha = 1.0);

/// Single-atom mean-field equation with order parameter O = sum_{m != j} <s+_m>.
/// Basis {|g>, |e>}.
Eigen::Matrix2cd meanfield_rhs(const Eigen::Matrix2cd& rho, Complex order_param,
                               const ModelParams& params);

struct MeanFieldSummary {
    double sz = 0.0;
    double splus_abs = 0.0;
    double order_abs = 0.0;  ///< |O| with O = (N - 1) <s+>
};

/// Self-consistent evolution of N identical atoms (O = (N-1)<s+>) in the
/// frame rotating at the detuning, from a weakly coherent state.
MeanFieldSummary meanfield_self_consistent(const ModelParams& params, double duration,
                                           double seed_coherence = 0.05);

/// Phase model: <s+_j> = amplitude_j exp(-i phase_j), common inversion.
struct KuramotoEnsemble {
    Eigen::VectorXd phases;
    Eigen::VectorXd amplitudes;
    double inversion = 0.0;
};

/// One explicit Euler step of
///   d phi_j/dt = -dnu + gamma_c/2 (sz/alpha_j) sum_m alpha_m sin(phi_m - phi_j).
/// Amplitudes are frozen. Throws std::invalid_argument on a zero amplitude.
KuramotoEnsemble kuramoto_step(const KuramotoEnsemble& ensemble, const ModelParams& params,
                               double dt);

/// O = sum_j alpha_j exp(-i phi_j).
Complex order_parameter(const KuramotoEnsemble& ensemble);

/// Width of the phase distribution measured around the circular mean.
double phase_spread(const KuramotoEnsemble& ensemble);

}  // namespace ramsey::semiclassical
