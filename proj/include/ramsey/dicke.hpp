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
#include <memory>
#include <optional>
#include <vector>

#include <Eigen/Dense>
#include <Eigen/SparseCore>

#include "ramsey/ode.hpp"
#include "ramsey/params.hpp"

/// Permutation-invariant density matrices in the Dicke basis.
///
/// A symmetric state of N spin-1/2 atoms is rho = sum_j sum_{m,m'} p[j][m][m']
/// sum_alpha |j m alpha><j m' alpha|, with alpha running over the d_N(j) copies
/// of spin j. Storage per block is the sector weight q = d_N(j) p, which keeps
/// all coefficients O(1) even where d_N(j) ~ 1e58. Spins are carried as doubled
/// integers (two_j = 2j, two_m = 2m) throughout.
namespace ramsey::dicke {

using Complex = std::complex<double>;

/// log d_N(j), the multiplicity of spin j among N spin-1/2 particles.
double log_degeneracy(int n_atoms, int two_j);
double degeneracy(int n_atoms, int two_j);

/// Number of stored coefficients sum_j (2j+1)^2 for a full layout.
std::size_t full_coefficient_count(int n_atoms);

/// Enumerates the (j, m, m') entries kept in a coefficient vector.
///
/// max_order bounds the coherence order |m - m'|. Every channel of the model
/// preserves m - m', so a banded layout evolves exactly and is sufficient for
/// observables of order <= max_order (populations: 0; <J+>: 1).
class Layout {
public:
    Layout(int n_atoms, int max_order);

    static std::shared_ptr<const Layout> full(int n_atoms);
    static std::shared_ptr<const Layout> banded(int n_atoms, int max_order);

    int n_atoms() const { return n_atoms_; }
    int max_order() const { return max_order_; }
    bool is_full() const { return max_order_ >= n_atoms_; }
    std::size_t size() const { return size_; }

    /// two_j values, descending from N.
    const std::vector<int>& two_js() const { return two_js_; }
    int block_index(int two_j) const { return (n_atoms_ - two_j) / 2; }

    /// Row/column indices are k = m + j in [0, 2j].
    bool contains(int two_j, int row, int col) const;
    /// Flat index; precondition contains(...).
    Eigen::Index index(int two_j, int row, int col) const;

    int row_begin(int two_j, int row) const;
    int row_end(int two_j, int row) const;

private:
    int n_atoms_;
    int max_order_;
    std::size_t size_ = 0;
    std::vector<int> two_js_;
    std::vector<std::vector<Eigen::Index>> row_offsets_;  // per block, dim + 1 entries
};

class DickeDensityMatrix {
public:
    DickeDensityMatrix(std::shared_ptr<const Layout> layout, Eigen::VectorXcd weights);

    int n_atoms() const { return layout_->n_atoms(); }
    const Layout& layout() const { return *layout_; }
    std::shared_ptr<const Layout> layout_ptr() const { return layout_; }

    Eigen::VectorXcd& weights() { return weights_; }
    const Eigen::VectorXcd& weights() const { return weights_; }

    /// Sector weight q[j](row, col); zero outside the layout.
    Complex weight(int two_j, int row, int col) const;
    /// Per-copy coefficient p[j][m][m'] = q / d_N(j).
    Complex p(int two_j, int two_m, int two_mp) const;
    /// Sector-weighted block (entries outside a banded layout are zero).
    Eigen::MatrixXcd weighted_block(int two_j) const;

    Complex trace() const;
    /// Largest |q(a,b) - conj q(b,a)| over stored pairs.
    double hermiticity_defect() const;
    /// Sector populations d_N(j) tr p[j].
    Eigen::VectorXd sector_populations() const;

    /// Drops coherences of order above max_order.
    DickeDensityMatrix restricted(int max_order) const;

private:
    std::shared_ptr<const Layout> layout_;
    Eigen::VectorXcd weights_;
};

/// All weight on j = N/2, m = m' = -N/2.
DickeDensityMatrix ground_state(int n_atoms);

/// Builds a symmetric state from a full dense density matrix that is
/// invariant under atom permutations. Dense ordering as in dense_oracle.
DickeDensityMatrix from_dense_symmetric(int n_atoms, const Eigen::MatrixXcd& rho);
/// Inverse embedding into the 2^N dimensional space (small N only).
Eigen::MatrixXcd to_dense(const DickeDensityMatrix& state);

enum class Axis { x, y };

/// rho -> U rho U^dagger with U = exp(-i angle J_axis), block by block.
/// Requires a full layout.
DickeDensityMatrix collective_rotation(const DickeDensityMatrix& state, Axis axis, double angle);

/// exp(-i angle J_y) applied to the ground state, written straight into a
/// banded layout. Avoids the full-layout rotation at large N.
DickeDensityMatrix rotated_ground_state(int n_atoms, int max_order, double angle);

/// Liouvillian on a coefficient layout, assembled once as a sparse matrix.
class Generator {
public:
    using SparseMatrix = Eigen::SparseMatrix<Complex, Eigen::RowMajor>;

    Generator(const ModelParams& params, std::shared_ptr<const Layout> layout);

    const Layout& layout() const { return *layout_; }
    const SparseMatrix& matrix() const { return matrix_; }
    /// For mutation tests of the validation suite.
    SparseMatrix& mutable_matrix() { return matrix_; }

    void apply(const Eigen::VectorXcd& weights, Eigen::VectorXcd& derivative) const {
        derivative.noalias() = matrix_ * weights;
    }

private:
    std::shared_ptr<const Layout> layout_;
    SparseMatrix matrix_;
};

/// d rho / dt for the atom-only master equation.
DickeDensityMatrix apply_generator(const DickeDensityMatrix& state, const ModelParams& params);

/// Stateful propagator: reuses the generator and the step-size history
/// across consecutive sample intervals.
class Evolver {
public:
    Evolver(const ModelParams& params, std::shared_ptr<const Layout> layout, double tol);
    Evolver(Generator generator, double tol);

    /// Advances the state by duration; throws SolverError on underflow.
    void advance(DickeDensityMatrix& state, double duration);
    const Generator& generator() const { return generator_; }
    const IntegratorStats& stats() const { return stepper_.stats(); }

private:
    Generator generator_;
    Dopri5<Eigen::VectorXcd> stepper_;
};

DickeDensityMatrix evolve_dicke(const DickeDensityMatrix& state, const ModelParams& params,
                                double duration, double tol);

/// Per-atom and pair expectation values of a symmetric state.
struct ExpectationSet {
    double sz = 0.0;  ///< <sigma_z>
    Complex splus;  ///< <sigma+>
    double spsm_cross = 0.0;  ///< <sigma_j+ sigma_k->, j != k
    Complex spsz_cross;  ///< <sigma_j+ sigma_k^z>, j != k
    double jz = 0.0;
    Complex jplus;
    double jplusjminus = 0.0;
    Complex jplusjz;
    std::optional<Complex> alpha;  ///< empty when |<sigma+><sigma_z>| < 1e-12
};

/// Needs a layout with max_order >= 1 for the coherence entries.
ExpectationSet expectations(const DickeDensityMatrix& state);

/// {n_atoms, max_order, blocks: [{j, degeneracy, matrix_real, matrix_imag}]},
/// matrices hold per-copy p[j][m][m'] with rows ordered m = -j .. j.
void export_json(const DickeDensityMatrix& state, const std::filesystem::path& path);

}  // namespace ramsey::dicke
