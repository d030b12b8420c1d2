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
#include <filesystem>
#include <string_view>

#include <Eigen/Dense>
#include <Eigen/SparseCore>

#include "ramsey/params.hpp"

/// Brute-force solvers on the full 2^N (x photon) Hilbert space.
///
/// Tensor order is atom 1 (most significant) ... atom N, then the photon
/// factor. Single-atom basis: |g> = 0, |e> = 1. Density matrices are
/// vectorised column-stacked, so vec(A rho B) = (B^T kron A) vec(rho).
namespace ramsey::dense {

using Complex = std::complex<double>;
using SparseMatrix = Eigen::SparseMatrix<Complex>;

inline constexpr int kMaxAtomsAtoms = 8;
inline constexpr int kMaxAtomsCavity = 4;
inline constexpr int kMaxPhotonCutoff = 10;

enum class StateKind { density_matrix, pure_state };

struct Dims {
    int n_atoms = 1;
    int photon_dim = 1;  ///< n_photon_max + 1, or 1 without a cavity
    Eigen::Index hilbert() const { return (Eigen::Index(1) << n_atoms) * photon_dim; }
    bool operator==(const Dims&) const = default;
};

struct DenseState {
    StateKind kind = StateKind::density_matrix;
    Dims dims;
    /// psi for pure states, vec(rho) otherwise.
    Eigen::VectorXcd amplitudes;

    Eigen::MatrixXcd density() const;
    Complex trace() const;
};

/// Linear map rho -> d rho/dt acting on vec(rho).
struct LinearGenerator {
    Dims dims;
    SparseMatrix matrix;
};

enum class Axis { x, y };

DenseState ground_state(Dims dims, StateKind kind = StateKind::density_matrix);
DenseState product_state(int n_atoms, const Eigen::Vector2cd& single_atom,
                         StateKind kind = StateKind::density_matrix);
DenseState from_density(Dims dims, const Eigen::MatrixXcd& rho);
DenseState to_density_matrix(const DenseState& state);

// Operators on the full Hilbert space. Sites are 0-based.
SparseMatrix embed_site(const Eigen::Matrix2cd& op, int site, Dims dims);
SparseMatrix sigma_minus(int site, Dims dims);
SparseMatrix sigma_plus(int site, Dims dims);
SparseMatrix sigma_z(int site, Dims dims);
SparseMatrix collective_minus(Dims dims);
SparseMatrix collective_plus(Dims dims);
SparseMatrix collective_z(Dims dims);
SparseMatrix annihilation(Dims dims);
SparseMatrix identity(Dims dims);
/// Permutation operator exchanging atoms a and b.
SparseMatrix swap_atoms(int a, int b, Dims dims);

/// Collective rotation exp(-i angle J_axis) applied as rho -> U rho U^dagger
/// (or psi -> U psi), built as a product of single-atom rotations.
DenseState rotate(const DenseState& state, Axis axis, double angle);

/// Equation without the cavity: detuning, gamma_c L[J-], and the local
/// repump / decay / dephasing channels. Requires N <= 8.
LinearGenerator build_generator_atoms(const ModelParams& params);

/// Atom-cavity model with explicit photon mode (Tavis-Cummings coupling and
/// cavity decay kappa L[a]). Requires N <= 4 and cutoff <= 10.
LinearGenerator build_generator_cavity(const ModelParams& params);

/// Adaptive Dormand-Prince propagation. Throws SolverError on step underflow,
/// on trace drift above 1e-8, or when the top Fock level holds more than 1e-6.
DenseState evolve_dense(const DenseState& state, const LinearGenerator& generator,
                        double duration, double tol);

enum class Observable {
    sigma_z_single,
    sigma_plus_single,
    jz,
    jplus,
    jplus_jminus,
    jplus_jz,
    photon_number,
};

/// Throws std::invalid_argument for unknown names.
Observable parse_observable(std::string_view name);

SparseMatrix observable_matrix(Observable observable, Dims dims);
Complex expect_operator(const DenseState& state, const SparseMatrix& op);
Complex expect_dense(const DenseState& state, Observable observable);

/// Population of the highest Fock level (0 without a cavity).
double top_fock_population(const DenseState& state);

/// Reduced density matrix of the atoms (photon traced out).
Eigen::MatrixXcd atomic_marginal(const DenseState& state);

/// Debug dump: "RSDS" magic, uint32 kind, uint32 n_atoms, uint32 photon_dim,
/// uint64 element count, then interleaved little-endian float64 re/im pairs in
/// row-major order of the state (rho row-major, or psi).
void dump_binary(const DenseState& state, const std::filesystem::path& path);

}  // namespace ramsey::dense
