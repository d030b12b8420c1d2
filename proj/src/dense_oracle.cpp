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

#include "ramsey/dense_oracle.hpp"

#include <cmath>
#include <cstdint>
#include <cstring>
#include <fstream>
#include <stdexcept>
#include <string>
#include <vector>

#include <unsupported/Eigen/KroneckerProduct>

#include "ramsey/ode.hpp"

namespace ramsey::dense {

namespace {

using Triplet = Eigen::Triplet<Complex>;
constexpr Complex kI{0.0, 1.0};

int atom_bit(Eigen::Index index, int site, Dims dims) {
    const Eigen::Index atoms = index / dims.photon_dim;
    return int((atoms >> (dims.n_atoms - 1 - site)) & 1);
}

Eigen::Index with_atom_bit(Eigen::Index index, int site, int bit, Dims dims) {
    const Eigen::Index photon = index % dims.photon_dim;
    Eigen::Index atoms = index / dims.photon_dim;
    const Eigen::Index mask = Eigen::Index(1) << (dims.n_atoms - 1 - site);
    atoms = bit ? (atoms | mask) : (atoms & ~mask);
    return atoms * dims.photon_dim + photon;
}

Eigen::Matrix2cd single_sigma_minus() {
    Eigen::Matrix2cd m = Eigen::Matrix2cd::Zero();
    m(0, 1) = 1.0;  // |g><e|
    return m;
}

Eigen::Matrix2cd single_sigma_z() {
    Eigen::Matrix2cd m = Eigen::Matrix2cd::Zero();
    m(0, 0) = -1.0;
    m(1, 1) = 1.0;
    return m;
}

Eigen::Matrix2cd single_rotation(Axis axis, double angle) {
    // exp(-i angle sigma_axis / 2) in the {|g>, |e>} basis, where
    // sigma_x = |e><g| + |g><e| and sigma_y = -i|e><g| + i|g><e|.
    const double c = std::cos(0.5 * angle);
    const double s = std::sin(0.5 * angle);
    Eigen::Matrix2cd u;
    if (axis == Axis::x) {
        u << c, -kI * s, -kI * s, c;
    } else {
        // -i s sigma_y: (g,e) entry -i s (i) = s, (e,g) entry -i s (-i) = -s
        u << c, s, -s, c;
    }
    return u;
}

SparseMatrix identity_sparse(Eigen::Index n) {
    SparseMatrix id(n, n);
    id.setIdentity();
    return id;
}

/// conj(O) kron O - 1/2 I kron O^dag O - 1/2 (O^dag O)^T kron I
SparseMatrix dissipator(const SparseMatrix& op) {
    const Eigen::Index n = op.rows();
    const SparseMatrix id = identity_sparse(n);
    const SparseMatrix ada = SparseMatrix(op.adjoint()) * op;
    SparseMatrix jump = Eigen::kroneckerProduct(SparseMatrix(op.conjugate()), op);
    SparseMatrix left = Eigen::kroneckerProduct(id, ada);
    SparseMatrix right = Eigen::kroneckerProduct(SparseMatrix(ada.transpose()), id);
    return jump - 0.5 * left - 0.5 * right;
}

/// -i (I kron H - H^T kron I)
SparseMatrix commutator(const SparseMatrix& h) {
    const SparseMatrix id = identity_sparse(h.rows());
    SparseMatrix left = Eigen::kroneckerProduct(id, h);
    SparseMatrix right = Eigen::kroneckerProduct(SparseMatrix(h.transpose()), id);
    return -kI * (left - right);
}

SparseMatrix local_channels(const ModelParams& params, Dims dims) {
    const Eigen::Index n = dims.hilbert();
    SparseMatrix total(n * n, n * n);
    for (int site = 0; site < dims.n_atoms; ++site) {
        if (params.w > 0.0) total += params.w * dissipator(sigma_plus(site, dims));
        if (params.decay_rate() > 0.0)
            total += params.decay_rate() * dissipator(sigma_minus(site, dims));
        if (params.dephasing_rate() > 0.0)
            total += params.dephasing_rate() * dissipator(sigma_z(site, dims));
    }
    return total;
}

}  // namespace

Eigen::MatrixXcd DenseState::density() const {
    const Eigen::Index n = dims.hilbert();
    if (kind == StateKind::pure_state) return amplitudes * amplitudes.adjoint();
    return Eigen::Map<const Eigen::MatrixXcd>(amplitudes.data(), n, n);
}

Complex DenseState::trace() const {
    if (kind == StateKind::pure_state) return amplitudes.squaredNorm();
    return density().trace();
}

DenseState ground_state(Dims dims, StateKind kind) {
    const Eigen::Index n = dims.hilbert();
    DenseState s;
    s.kind = kind;
    s.dims = dims;
    if (kind == StateKind::pure_state) {
        s.amplitudes = Eigen::VectorXcd::Zero(n);
        s.amplitudes[0] = 1.0;
    } else {
        s.amplitudes = Eigen::VectorXcd::Zero(n * n);
        s.amplitudes[0] = 1.0;
    }
    return s;
}

DenseState product_state(int n_atoms, const Eigen::Vector2cd& single_atom, StateKind kind) {
    Eigen::VectorXcd psi(1);
    psi[0] = 1.0;
    for (int k = 0; k < n_atoms; ++k) {
        Eigen::VectorXcd next(psi.size() * 2);
        for (Eigen::Index i = 0; i < psi.size(); ++i) {
            next[2 * i] = psi[i] * single_atom[0];
            next[2 * i + 1] = psi[i] * single_atom[1];
        }
        psi = std::move(next);
    }
    psi.normalize();
    DenseState s;
    s.kind = StateKind::pure_state;
    s.dims = Dims{n_atoms, 1};
    s.amplitudes = std::move(psi);
    return kind == StateKind::pure_state ? s : to_density_matrix(s);
}

DenseState from_density(Dims dims, const Eigen::MatrixXcd& rho) {
    const Eigen::Index n = dims.hilbert();
    if (rho.rows() != n || rho.cols() != n)
        throw std::invalid_argument("density matrix has wrong dimensions");
    DenseState s;
    s.kind = StateKind::density_matrix;
    s.dims = dims;
    s.amplitudes = Eigen::Map<const Eigen::VectorXcd>(rho.data(), n * n);
    return s;
}

DenseState to_density_matrix(const DenseState& state) {
    if (state.kind == StateKind::density_matrix) return state;
    return from_density(state.dims, state.density());
}

SparseMatrix embed_site(const Eigen::Matrix2cd& op, int site, Dims dims) {
    if (site < 0 || site >= dims.n_atoms) throw std::out_of_range("atom index out of range");
    const Eigen::Index n = dims.hilbert();
    std::vector<Triplet> trips;
    trips.reserve(std::size_t(n) * 2);
    for (Eigen::Index col = 0; col < n; ++col) {
        const int b = atom_bit(col, site, dims);
        for (int r = 0; r < 2; ++r) {
            const Complex v = op(r, b);
            if (v != Complex(0.0)) trips.emplace_back(with_atom_bit(col, site, r, dims), col, v);
        }
    }
    SparseMatrix m(n, n);
    m.setFromTriplets(trips.begin(), trips.end());
    return m;
}

SparseMatrix sigma_minus(int site, Dims dims) { return embed_site(single_sigma_minus(), site, dims); }

SparseMatrix sigma_plus(int site, Dims dims) {
    return embed_site(single_sigma_minus().transpose(), site, dims);
}

SparseMatrix sigma_z(int site, Dims dims) { return embed_site(single_sigma_z(), site, dims); }

SparseMatrix collective_minus(Dims dims) {
    SparseMatrix j(dims.hilbert(), dims.hilbert());
    for (int k = 0; k < dims.n_atoms; ++k) j += sigma_minus(k, dims);
    return j;
}

SparseMatrix collective_plus(Dims dims) { return SparseMatrix(collective_minus(dims).adjoint()); }

SparseMatrix collective_z(Dims dims) {
    SparseMatrix j(dims.hilbert(), dims.hilbert());
    for (int k = 0; k < dims.n_atoms; ++k) j += 0.5 * sigma_z(k, dims);
    return j;
}

SparseMatrix annihilation(Dims dims) {
    const Eigen::Index n = dims.hilbert();
    std::vector<Triplet> trips;
    for (Eigen::Index col = 0; col < n; ++col) {
        const Eigen::Index photons = col % dims.photon_dim;
        if (photons > 0) trips.emplace_back(col - 1, col, std::sqrt(double(photons)));
    }
    SparseMatrix a(n, n);
    a.setFromTriplets(trips.begin(), trips.end());
    return a;
}

SparseMatrix identity(Dims dims) { return identity_sparse(dims.hilbert()); }

SparseMatrix swap_atoms(int a, int b, Dims dims) {
    const Eigen::Index n = dims.hilbert();
    std::vector<Triplet> trips;
    trips.reserve(std::size_t(n));
    for (Eigen::Index col = 0; col < n; ++col) {
        const int ba = atom_bit(col, a, dims);
        const int bb = atom_bit(col, b, dims);
        const Eigen::Index row = with_atom_bit(with_atom_bit(col, a, bb, dims), b, ba, dims);
        trips.emplace_back(row, col, 1.0);
    }
    SparseMatrix p(n, n);
    p.setFromTriplets(trips.begin(), trips.end());
    return p;
}

DenseState rotate(const DenseState& state, Axis axis, double angle) {
    const Eigen::Matrix2cd u1 = single_rotation(axis, angle);
    SparseMatrix u = identity(state.dims);
    for (int k = 0; k < state.dims.n_atoms; ++k) u = embed_site(u1, k, state.dims) * u;
    DenseState out = state;
    if (state.kind == StateKind::pure_state) {
        out.amplitudes = u * state.amplitudes;
    } else {
        const Eigen::MatrixXcd rho = state.density();
        const Eigen::MatrixXcd rotated = u * rho * SparseMatrix(u.adjoint());
        out = from_density(state.dims, rotated);
    }
    return out;
}

LinearGenerator build_generator_atoms(const ModelParams& params) {
    params.validate();
    if (params.n_atoms > kMaxAtomsAtoms)
        throw ConfigError("dense atom-only generator supports at most 8 atoms");
    const Dims dims{params.n_atoms, 1};
    LinearGenerator gen;
    gen.dims = dims;
    gen.matrix = commutator(params.delta_nu * collective_z(dims));
    if (params.gamma_c() > 0.0) gen.matrix += params.gamma_c() * dissipator(collective_minus(dims));
    gen.matrix += local_channels(params, dims);
    gen.matrix.prune(Complex(0.0));
    return gen;
}

LinearGenerator build_generator_cavity(const ModelParams& params) {
    params.validate_cavity();
    if (params.n_atoms > kMaxAtomsCavity)
        throw ConfigError("dense cavity generator supports at most 4 atoms");
    if (*params.n_photon_max > kMaxPhotonCutoff)
        throw ConfigError("photon cutoff above 10 is not supported");
    const Dims dims{params.n_atoms, *params.n_photon_max + 1};
    const SparseMatrix a = annihilation(dims);
    const SparseMatrix jm = collective_minus(dims);
    const SparseMatrix coupling = SparseMatrix(a.adjoint()) * jm + a * SparseMatrix(jm.adjoint());
    const SparseMatrix h = params.delta_nu * collective_z(dims) + (0.5 * *params.g) * coupling;

    LinearGenerator gen;
    gen.dims = dims;
    gen.matrix = commutator(h) + *params.kappa * dissipator(a) + local_channels(params, dims);
    gen.matrix.prune(Complex(0.0));
    return gen;
}

DenseState evolve_dense(const DenseState& state, const LinearGenerator& generator, double duration,
                        double tol) {
    if (state.kind != StateKind::density_matrix)
        throw std::invalid_argument("evolve_dense needs a density matrix");
    if (!(state.dims == generator.dims))
        throw std::invalid_argument("state and generator dimensions differ");
    if (!(duration >= 0.0)) throw std::invalid_argument("duration must be >= 0");

    DenseState out = state;
    Dopri5<Eigen::VectorXcd> stepper(tol);
    double t = 0.0;
    const auto rhs = [&](const Eigen::VectorXcd& y, Eigen::VectorXcd& dy) {
        dy.noalias() = generator.matrix * y;
    };
    stepper.advance(rhs, out.amplitudes, t, duration);

    const double drift = std::abs(out.trace() - 1.0);
    if (drift > 1e-8) throw SolverError("trace drift " + std::to_string(drift), t);
    if (top_fock_population(out) > 1e-6)
        throw SolverError("photon cutoff too small: top Fock level populated", t);
    return out;
}

Observable parse_observable(std::string_view name) {
    if (name == "sigma_z_single") return Observable::sigma_z_single;
    if (name == "sigma_plus_single") return Observable::sigma_plus_single;
    if (name == "Jz") return Observable::jz;
    if (name == "Jplus") return Observable::jplus;
    if (name == "JplusJminus") return Observable::jplus_jminus;
    if (name == "JplusJz") return Observable::jplus_jz;
    if (name == "photon_number") return Observable::photon_number;
    throw std::invalid_argument("unknown observable: " + std::string(name));
}

SparseMatrix observable_matrix(Observable observable, Dims dims) {
    switch (observable) {
        case Observable::sigma_z_single: return sigma_z(0, dims);
        case Observable::sigma_plus_single: return sigma_plus(0, dims);
        case Observable::jz: return collective_z(dims);
        case Observable::jplus: return collective_plus(dims);
        case Observable::jplus_jminus: return collective_plus(dims) * collective_minus(dims);
        case Observable::jplus_jz: return collective_plus(dims) * collective_z(dims);
        case Observable::photon_number: {
            const SparseMatrix a = annihilation(dims);
            return SparseMatrix(a.adjoint()) * a;
        }
    }
    throw std::invalid_argument("unknown observable");
}

Complex expect_operator(const DenseState& state, const SparseMatrix& op) {
    const Eigen::Index n = state.dims.hilbert();
    if (state.kind == StateKind::pure_state)
        return state.amplitudes.dot(op * state.amplitudes);
    // tr(O rho) = sum_{ij} O_ij rho_ji, rho_ji stored at j + i n.
    Complex acc = 0.0;
    for (Eigen::Index col = 0; col < op.outerSize(); ++col)
        for (SparseMatrix::InnerIterator it(op, col); it; ++it)
            acc += it.value() * state.amplitudes[col + it.row() * n];
    return acc;
}

Complex expect_dense(const DenseState& state, Observable observable) {
    return expect_operator(state, observable_matrix(observable, state.dims));
}

double top_fock_population(const DenseState& state) {
    if (state.dims.photon_dim == 1) return 0.0;
    const Eigen::Index n = state.dims.hilbert();
    const int top = state.dims.photon_dim - 1;
    double pop = 0.0;
    for (Eigen::Index i = top; i < n; i += state.dims.photon_dim) {
        if (state.kind == StateKind::pure_state) pop += std::norm(state.amplitudes[i]);
        else pop += state.amplitudes[i + i * n].real();
    }
    return pop;
}

Eigen::MatrixXcd atomic_marginal(const DenseState& state) {
    const Eigen::MatrixXcd rho = state.density();
    const int p = state.dims.photon_dim;
    const Eigen::Index na = Eigen::Index(1) << state.dims.n_atoms;
    Eigen::MatrixXcd out = Eigen::MatrixXcd::Zero(na, na);
    for (Eigen::Index i = 0; i < na; ++i)
        for (Eigen::Index j = 0; j < na; ++j)
            for (int k = 0; k < p; ++k) out(i, j) += rho(i * p + k, j * p + k);
    return out;
}

void dump_binary(const DenseState& state, const std::filesystem::path& path) {
    std::ofstream os(path, std::ios::binary);
    if (!os) throw std::runtime_error("cannot open " + path.string());
    const auto put_u32 = [&](std::uint32_t v) {
        for (int b = 0; b < 4; ++b) os.put(char((v >> (8 * b)) & 0xff));
    };
    const auto put_u64 = [&](std::uint64_t v) {
        for (int b = 0; b < 8; ++b) os.put(char((v >> (8 * b)) & 0xff));
    };
    const auto put_f64 = [&](double d) {
        std::uint64_t bits;
        static_assert(sizeof bits == sizeof d);
        std::memcpy(&bits, &d, sizeof d);
        put_u64(bits);
    };
    os.write("RSDS", 4);
    put_u32(state.kind == StateKind::pure_state ? 1u : 0u);
    put_u32(std::uint32_t(state.dims.n_atoms));
    put_u32(std::uint32_t(state.dims.photon_dim));
    if (state.kind == StateKind::pure_state) {
        put_u64(std::uint64_t(state.amplitudes.size()));
        for (const Complex& z : state.amplitudes) {
            put_f64(z.real());
            put_f64(z.imag());
        }
    } else {
        const Eigen::MatrixXcd rho = state.density();
        put_u64(std::uint64_t(rho.size()));
        for (Eigen::Index i = 0; i < rho.rows(); ++i)
            for (Eigen::Index j = 0; j < rho.cols(); ++j) {
                put_f64(rho(i, j).real());
                put_f64(rho(i, j).imag());
            }
    }
}

}  // namespace ramsey::dense
