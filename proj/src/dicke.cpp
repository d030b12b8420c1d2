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

#include "ramsey/dicke.hpp"

#include <algorithm>
#include <cmath>
#include <fstream>
#include <stdexcept>
#include <utility>

#include "json.hpp"

#include "ramsey/wigner.hpp"

namespace ramsey::dicke {

namespace {

using Triplet = Eigen::Triplet<Complex>;
constexpr Complex kI{0.0, 1.0};
const Complex kPowersOfI[4] = {{1.0, 0.0}, {0.0, 1.0}, {-1.0, 0.0}, {0.0, -1.0}};

bool valid_two_j(int n_atoms, int two_j) {
    return two_j >= 0 && two_j <= n_atoms && (n_atoms - two_j) % 2 == 0;
}

/// <j' (K - u); 1/2 u | J K> for J = j' +- 1/2, Condon-Shortley phases.
double cg_half(int two_jp, int two_J, int two_K, int two_u) {
    if (two_jp < 0 || std::abs(two_K) > two_J || std::abs(two_K - two_u) > two_jp) return 0.0;
    const double den = 2.0 * (two_jp + 1);
    if (two_J == two_jp + 1) {
        return two_u > 0 ? std::sqrt((two_jp + two_K + 1) / den)
                         : std::sqrt((two_jp - two_K + 1) / den);
    }
    if (two_J == two_jp - 1) {
        return two_u > 0 ? -std::sqrt((two_jp - two_K + 1) / den)
                         : std::sqrt((two_jp + two_K + 1) / den);
    }
    return 0.0;
}

/// N d_{N-1}(j') / d_N(j) for j' = j +- 1/2.
double branching_ratio(int n_atoms, int two_j, int two_jp) {
    const double tj = two_j;
    if (two_jp == two_j + 1) return (tj + 2.0) * (n_atoms - tj) / (2.0 * (tj + 1.0));
    if (two_jp == two_j - 1) return tj * (n_atoms + tj + 2.0) / (2.0 * (tj + 1.0));
    return 0.0;
}

enum class Local { minus, plus, z };

/// Transfer coefficient of sum_n s_n X s_n^dag, X = q_j(m,m'), into q_J(K,K')
/// in the sector-weighted representation.
double local_transfer(int n_atoms, Local kind, int two_j, int two_m, int two_mp, int two_J) {
    double total = 0.0;
    for (int two_jp : {two_j - 1, two_j + 1}) {
        if (two_jp < 0 || two_jp > n_atoms - 1) continue;
        if (std::abs(two_J - two_jp) != 1) continue;
        const double ratio = branching_ratio(n_atoms, two_j, two_jp);
        if (ratio == 0.0) continue;
        double acc = 0.0;
        switch (kind) {
            case Local::minus:  // atom goes e -> g: s = +1/2, u = -1/2
                acc = cg_half(two_jp, two_J, two_m - 2, -1) * cg_half(two_jp, two_J, two_mp - 2, -1) *
                      cg_half(two_jp, two_j, two_m, 1) * cg_half(two_jp, two_j, two_mp, 1);
                break;
            case Local::plus:
                acc = cg_half(two_jp, two_J, two_m + 2, 1) * cg_half(two_jp, two_J, two_mp + 2, 1) *
                      cg_half(two_jp, two_j, two_m, -1) * cg_half(two_jp, two_j, two_mp, -1);
                break;
            case Local::z:
                for (int s : {-1, 1})
                    for (int t : {-1, 1})
                        acc += double(s * t) * cg_half(two_jp, two_J, two_m, s) *
                               cg_half(two_jp, two_J, two_mp, t) * cg_half(two_jp, two_j, two_m, s) *
                               cg_half(two_jp, two_j, two_mp, t);
                break;
        }
        total += ratio * acc;
    }
    return total;
}

/// sqrt((j + m)(j - m + 1)): J- |j m> = lower(m) |j m-1>.
double lower(int two_j, int two_m) {
    return std::sqrt(0.25 * double(two_j + two_m) * double(two_j - two_m + 2));
}

/// sqrt((j - m)(j + m + 1)): J+ |j m> = raise(m) |j m+1>.
double raise(int two_j, int two_m) {
    return std::sqrt(0.25 * double(two_j - two_m) * double(two_j + two_m + 2));
}

}  // namespace

double log_degeneracy(int n_atoms, int two_j) {
    if (!valid_two_j(n_atoms, two_j)) throw std::invalid_argument("invalid spin for atom number");
    const double n = n_atoms;
    const double j = 0.5 * two_j;
    // d = (2j+1) N! / ((N/2 - j)! (N/2 + j + 1)!)
    return std::log(2.0 * j + 1.0) + std::lgamma(n + 1.0) - std::lgamma(n / 2.0 - j + 1.0) -
           std::lgamma(n / 2.0 + j + 2.0);
}

double degeneracy(int n_atoms, int two_j) {
    const double d = std::exp(log_degeneracy(n_atoms, two_j));
    // exact integers while they are representable
    return d < 0x1p52 ? std::round(d) : d;
}

std::size_t full_coefficient_count(int n_atoms) {
    std::size_t count = 0;
    for (int tj = n_atoms; tj >= 0; tj -= 2) count += std::size_t(tj + 1) * std::size_t(tj + 1);
    return count;
}

// ---------------------------------------------------------------------------
// Layout

Layout::Layout(int n_atoms, int max_order) : n_atoms_(n_atoms), max_order_(std::min(max_order, n_atoms)) {
    if (n_atoms < 1) throw std::invalid_argument("n_atoms must be >= 1");
    if (max_order < 0) throw std::invalid_argument("max_order must be >= 0");
    Eigen::Index offset = 0;
    for (int tj = n_atoms; tj >= 0; tj -= 2) {
        two_js_.push_back(tj);
        std::vector<Eigen::Index> rows(std::size_t(tj) + 2);
        for (int r = 0; r <= tj; ++r) {
            rows[std::size_t(r)] = offset;
            offset += std::min(tj, r + max_order_) - std::max(0, r - max_order_) + 1;
        }
        rows[std::size_t(tj) + 1] = offset;
        row_offsets_.push_back(std::move(rows));
    }
    size_ = std::size_t(offset);
}

std::shared_ptr<const Layout> Layout::full(int n_atoms) {
    return std::make_shared<const Layout>(n_atoms, n_atoms);
}

std::shared_ptr<const Layout> Layout::banded(int n_atoms, int max_order) {
    return std::make_shared<const Layout>(n_atoms, max_order);
}

bool Layout::contains(int two_j, int row, int col) const {
    return valid_two_j(n_atoms_, two_j) && row >= 0 && col >= 0 && row <= two_j && col <= two_j &&
           std::abs(row - col) <= max_order_;
}

int Layout::row_begin(int, int row) const { return std::max(0, row - max_order_); }

int Layout::row_end(int two_j, int row) const { return std::min(two_j, row + max_order_) + 1; }

Eigen::Index Layout::index(int two_j, int row, int col) const {
    return row_offsets_[std::size_t(block_index(two_j))][std::size_t(row)] + (col - row_begin(two_j, row));
}

// ---------------------------------------------------------------------------
// State

DickeDensityMatrix::DickeDensityMatrix(std::shared_ptr<const Layout> layout, Eigen::VectorXcd weights)
    : layout_(std::move(layout)), weights_(std::move(weights)) {
    if (!layout_) throw std::invalid_argument("null layout");
    if (std::size_t(weights_.size()) != layout_->size())
        throw std::invalid_argument("coefficient vector does not match layout");
}

Complex DickeDensityMatrix::weight(int two_j, int row, int col) const {
    if (!layout_->contains(two_j, row, col)) return 0.0;
    return weights_[layout_->index(two_j, row, col)];
}

Complex DickeDensityMatrix::p(int two_j, int two_m, int two_mp) const {
    const int row = (two_m + two_j) / 2;
    const int col = (two_mp + two_j) / 2;
    return weight(two_j, row, col) / degeneracy(n_atoms(), two_j);
}

Eigen::MatrixXcd DickeDensityMatrix::weighted_block(int two_j) const {
    Eigen::MatrixXcd block = Eigen::MatrixXcd::Zero(two_j + 1, two_j + 1);
    for (int r = 0; r <= two_j; ++r)
        for (int c = layout_->row_begin(two_j, r); c < layout_->row_end(two_j, r); ++c)
            block(r, c) = weights_[layout_->index(two_j, r, c)];
    return block;
}

Complex DickeDensityMatrix::trace() const {
    Complex tr = 0.0;
    for (int tj : layout_->two_js())
        for (int r = 0; r <= tj; ++r) tr += weights_[layout_->index(tj, r, r)];
    return tr;
}

double DickeDensityMatrix::hermiticity_defect() const {
    double worst = 0.0;
    for (int tj : layout_->two_js())
        for (int r = 0; r <= tj; ++r)
            for (int c = layout_->row_begin(tj, r); c < layout_->row_end(tj, r); ++c)
                worst = std::max(worst, std::abs(weights_[layout_->index(tj, r, c)] -
                                                 std::conj(weights_[layout_->index(tj, c, r)])));
    return worst;
}

Eigen::VectorXd DickeDensityMatrix::sector_populations() const {
    Eigen::VectorXd pops(Eigen::Index(layout_->two_js().size()));
    for (int tj : layout_->two_js()) {
        double s = 0.0;
        for (int r = 0; r <= tj; ++r) s += weights_[layout_->index(tj, r, r)].real();
        pops[layout_->block_index(tj)] = s;
    }
    return pops;
}

DickeDensityMatrix DickeDensityMatrix::restricted(int max_order) const {
    auto target = Layout::banded(n_atoms(), max_order);
    Eigen::VectorXcd w = Eigen::VectorXcd::Zero(Eigen::Index(target->size()));
    for (int tj : target->two_js())
        for (int r = 0; r <= tj; ++r)
            for (int c = target->row_begin(tj, r); c < target->row_end(tj, r); ++c)
                w[target->index(tj, r, c)] = weight(tj, r, c);
    return DickeDensityMatrix(std::move(target), std::move(w));
}

DickeDensityMatrix ground_state(int n_atoms) {
    auto layout = Layout::full(n_atoms);
    Eigen::VectorXcd w = Eigen::VectorXcd::Zero(Eigen::Index(layout->size()));
    w[layout->index(n_atoms, 0, 0)] = 1.0;
    return DickeDensityMatrix(std::move(layout), std::move(w));
}

// ---------------------------------------------------------------------------
// Dense embedding (oracle scale only)

namespace {

struct DenseDickeBasis {
    int n_atoms;
    Eigen::MatrixXcd jplus, jminus;
    /// projectors[block][row]: onto spin j, m = -j + row.
    std::vector<std::vector<Eigen::MatrixXcd>> projectors;

    explicit DenseDickeBasis(int n) : n_atoms(n) {
        if (n > 8) throw std::invalid_argument("dense embedding supports at most 8 atoms");
        const Eigen::Index dim = Eigen::Index(1) << n;
        jminus = Eigen::MatrixXcd::Zero(dim, dim);
        Eigen::VectorXd jz = Eigen::VectorXd::Zero(dim);
        for (Eigen::Index s = 0; s < dim; ++s) {
            for (int site = 0; site < n; ++site) {
                const Eigen::Index mask = Eigen::Index(1) << (n - 1 - site);
                if (s & mask) {
                    jminus(s & ~mask, s) += 1.0;
                    jz[s] += 0.5;
                } else {
                    jz[s] -= 0.5;
                }
            }
        }
        jplus = jminus.adjoint();
        const Eigen::MatrixXcd jsq = jplus * jminus + Eigen::MatrixXcd(jz.asDiagonal()) *
                                                          Eigen::MatrixXcd(jz.asDiagonal()) -
                                     Eigen::MatrixXcd(jz.asDiagonal());
        Eigen::SelfAdjointEigenSolver<Eigen::MatrixXcd> eig(jsq);
        for (int tj = n; tj >= 0; tj -= 2) {
            const double target = 0.25 * tj * (tj + 2);
            Eigen::MatrixXcd pj = Eigen::MatrixXcd::Zero(dim, dim);
            for (Eigen::Index k = 0; k < dim; ++k)
                if (std::abs(eig.eigenvalues()[k] - target) < 1e-6)
                    pj += eig.eigenvectors().col(k) * eig.eigenvectors().col(k).adjoint();
            std::vector<Eigen::MatrixXcd> rows;
            for (int r = 0; r <= tj; ++r) {
                const double m = -0.5 * tj + r;
                Eigen::VectorXcd mask(dim);
                for (Eigen::Index s = 0; s < dim; ++s) mask[s] = std::abs(jz[s] - m) < 1e-9 ? 1.0 : 0.0;
                rows.push_back(mask.asDiagonal() * pj * mask.asDiagonal());
            }
            projectors.push_back(std::move(rows));
        }
    }

    /// X_{j, row, col} = sum_alpha |j m_row alpha><j m_col alpha|
    Eigen::MatrixXcd transition(int two_j, int row, int col) const {
        const auto& rows = projectors[std::size_t((n_atoms - two_j) / 2)];
        Eigen::MatrixXcd x = rows[std::size_t(col)];
        int k = col;
        while (k < row) {
            x = jplus * x / raise(two_j, 2 * k - two_j);
            ++k;
        }
        while (k > row) {
            x = jminus * x / lower(two_j, 2 * k - two_j);
            --k;
        }
        return x;
    }
};

}  // namespace

DickeDensityMatrix from_dense_symmetric(int n_atoms, const Eigen::MatrixXcd& rho) {
    const DenseDickeBasis basis(n_atoms);
    auto layout = Layout::full(n_atoms);
    Eigen::VectorXcd w(Eigen::Index(layout->size()));
    for (int tj : layout->two_js())
        for (int r = 0; r <= tj; ++r)
            for (int c = 0; c <= tj; ++c)
                // q_j(m, m') = tr(rho X_{j m' m})
                w[layout->index(tj, r, c)] = (rho * basis.transition(tj, c, r)).trace();
    return DickeDensityMatrix(std::move(layout), std::move(w));
}

Eigen::MatrixXcd to_dense(const DickeDensityMatrix& state) {
    const DenseDickeBasis basis(state.n_atoms());
    const Eigen::Index dim = Eigen::Index(1) << state.n_atoms();
    Eigen::MatrixXcd rho = Eigen::MatrixXcd::Zero(dim, dim);
    for (int tj : state.layout().two_js()) {
        const double d = degeneracy(state.n_atoms(), tj);
        for (int r = 0; r <= tj; ++r)
            for (int c = state.layout().row_begin(tj, r); c < state.layout().row_end(tj, r); ++c)
                rho += (state.weight(tj, r, c) / d) * basis.transition(tj, r, c);
    }
    return rho;
}

// ---------------------------------------------------------------------------
// Rotations

DickeDensityMatrix collective_rotation(const DickeDensityMatrix& state, Axis axis, double angle) {
    if (!state.layout().is_full())
        throw std::invalid_argument("collective_rotation needs a full layout");
    const int n = state.n_atoms();
    const auto table = wigner_small_d_table<double>(n, angle);
    DickeDensityMatrix out = state;
    for (int tj : state.layout().two_js()) {
        const Eigen::MatrixXd& d = table[std::size_t(tj)];
        if (orthogonality_defect(d) > 1e-10)
            throw SolverError("Wigner-d recursion lost orthogonality", 0.0);
        Eigen::MatrixXcd u = d.cast<Complex>();
        if (axis == Axis::x) {
            // exp(-i a Jx) = exp(i pi/2 Jz) exp(-i a Jy) exp(-i pi/2 Jz)
            for (int r = 0; r <= tj; ++r)
                for (int c = 0; c <= tj; ++c) u(r, c) *= kPowersOfI[((r - c) % 4 + 4) % 4];
        }
        const Eigen::MatrixXcd rotated = u * state.weighted_block(tj) * u.adjoint();
        for (int r = 0; r <= tj; ++r)
            for (int c = 0; c <= tj; ++c) out.weights()[out.layout().index(tj, r, c)] = rotated(r, c);
    }
    return out;
}

DickeDensityMatrix rotated_ground_state(int n_atoms, int max_order, double angle) {
    if (n_atoms < 1) throw std::invalid_argument("n_atoms must be >= 1");
    auto layout = Layout::banded(n_atoms, max_order);
    const auto table = wigner_small_d_table<double>(n_atoms, angle);
    const Eigen::MatrixXd& d = table[std::size_t(n_atoms)];
    if (orthogonality_defect(d) > 1e-10) throw SolverError("Wigner-d recursion lost orthogonality", 0.0);
    // column 0 is m = -N/2; the top sector has unit degeneracy
    const Eigen::VectorXd psi = d.col(0);
    Eigen::VectorXcd w = Eigen::VectorXcd::Zero(Eigen::Index(layout->size()));
    for (int r = 0; r <= n_atoms; ++r)
        for (int c = layout->row_begin(n_atoms, r); c < layout->row_end(n_atoms, r); ++c)
            w[layout->index(n_atoms, r, c)] = psi[r] * psi[c];
    return DickeDensityMatrix(std::move(layout), std::move(w));
}

// ---------------------------------------------------------------------------
// Generator

Generator::Generator(const ModelParams& params, std::shared_ptr<const Layout> layout)
    : layout_(std::move(layout)) {
    params.validate();
    if (layout_->n_atoms() != params.n_atoms)
        throw std::invalid_argument("layout and params disagree on atom number");
    const Layout& lay = *layout_;
    const int n = lay.n_atoms();
    const double gc = params.gamma_c();
    const double pump = params.w;
    const double decay = params.decay_rate();
    const double dephase = params.dephasing_rate();

    std::vector<Triplet> trips;
    trips.reserve(lay.size() * 12);
    const auto add = [&](int tJ, int row, int col, Eigen::Index src, Complex v) {
        if (v == Complex(0.0)) return;
        if (!lay.contains(tJ, row, col)) return;
        trips.emplace_back(lay.index(tJ, row, col), src, v);
    };

    for (int tj : lay.two_js()) {
        for (int r = 0; r <= tj; ++r) {
            for (int c = lay.row_begin(tj, r); c < lay.row_end(tj, r); ++c) {
                const Eigen::Index src = lay.index(tj, r, c);
                const int tm = 2 * r - tj;
                const int tmp = 2 * c - tj;
                const double m = 0.5 * tm, mp = 0.5 * tmp;

                // Diagonal part: detuning, anticommutators of every channel.
                Complex diag = -kI * params.delta_nu * (m - mp);
                diag -= 0.5 * gc * (lower(tj, tm) * lower(tj, tm) + lower(tj, tmp) * lower(tj, tmp));
                diag -= 0.5 * pump * (n - m - mp);
                diag -= 0.5 * decay * (n + m + mp);
                diag -= dephase * n;
                add(tj, r, c, src, diag);

                // gamma_c J- rho J+
                if (gc > 0.0) add(tj, r - 1, c - 1, src, gc * lower(tj, tm) * lower(tj, tmp));

                for (int tJ : {tj - 2, tj, tj + 2}) {
                    if (!valid_two_j(n, tJ)) continue;
                    // Row index shifts with the block size: K = m +- 1 -> row' = (2K + tJ)/2.
                    if (decay > 0.0)
                        add(tJ, (tm - 2 + tJ) / 2, (tmp - 2 + tJ) / 2, src,
                            decay * local_transfer(n, Local::minus, tj, tm, tmp, tJ));
                    if (pump > 0.0)
                        add(tJ, (tm + 2 + tJ) / 2, (tmp + 2 + tJ) / 2, src,
                            pump * local_transfer(n, Local::plus, tj, tm, tmp, tJ));
                    if (dephase > 0.0)
                        add(tJ, (tm + tJ) / 2, (tmp + tJ) / 2, src,
                            dephase * local_transfer(n, Local::z, tj, tm, tmp, tJ));
                }
            }
        }
    }
    matrix_.resize(Eigen::Index(lay.size()), Eigen::Index(lay.size()));
    matrix_.setFromTriplets(trips.begin(), trips.end());
    matrix_.makeCompressed();
}

DickeDensityMatrix apply_generator(const DickeDensityMatrix& state, const ModelParams& params) {
    const Generator gen(params, state.layout_ptr());
    Eigen::VectorXcd d(state.weights().size());
    gen.apply(state.weights(), d);
    return DickeDensityMatrix(state.layout_ptr(), std::move(d));
}

Evolver::Evolver(const ModelParams& params, std::shared_ptr<const Layout> layout, double tol)
    : generator_(params, std::move(layout)), stepper_(tol) {}

Evolver::Evolver(Generator generator, double tol) : generator_(std::move(generator)), stepper_(tol) {}

void Evolver::advance(DickeDensityMatrix& state, double duration) {
    if (state.layout().size() != generator_.layout().size())
        throw std::invalid_argument("state layout does not match generator");
    double t = 0.0;
    const auto rhs = [this](const Eigen::VectorXcd& y, Eigen::VectorXcd& dy) { generator_.apply(y, dy); };
    stepper_.advance(rhs, state.weights(), t, duration);
}

DickeDensityMatrix evolve_dicke(const DickeDensityMatrix& state, const ModelParams& params, double duration,
                                double tol) {
    if (!(duration >= 0.0)) throw std::invalid_argument("duration must be >= 0");
    Evolver ev(params, state.layout_ptr(), tol);
    DickeDensityMatrix out = state;
    ev.advance(out, duration);
    return out;
}

// ---------------------------------------------------------------------------
// Observables

ExpectationSet expectations(const DickeDensityMatrix& state) {
    if (state.layout().max_order() < 1 && state.n_atoms() > 0)
        throw std::invalid_argument("expectations need coherence order >= 1");
    const int n = state.n_atoms();
    ExpectationSet e;
    for (int tj : state.layout().two_js()) {
        for (int r = 0; r <= tj; ++r) {
            const int tm = 2 * r - tj;
            const double m = 0.5 * tm;
            const Complex diag = state.weight(tj, r, r);
            e.jz += m * diag.real();
            e.jplusjminus += lower(tj, tm) * lower(tj, tm) * diag.real();
            if (r < tj) {
                const Complex up = state.weight(tj, r, r + 1);
                e.jplus += raise(tj, tm) * up;
                e.jplusjz += raise(tj, tm) * m * up;
            }
        }
    }
    const double nd = n;
    e.sz = 2.0 * e.jz / nd;
    e.splus = e.jplus / nd;
    if (n >= 2) {
        const double pairs = nd * (nd - 1.0);
        e.spsm_cross = (e.jplusjminus - nd * (1.0 + e.sz) / 2.0) / pairs;
        // sum_{j != k} s+_j sz_k = 2 J+ Jz + J+ since s+ sz = -s+ on one site
        e.spsz_cross = (2.0 * e.jplusjz + e.jplus) / pairs;
        const Complex denom = e.splus * e.sz;
        if (std::abs(denom) >= 1e-12) e.alpha = e.spsz_cross / denom;
    }
    return e;
}

void export_json(const DickeDensityMatrix& state, const std::filesystem::path& path) {
    nlohmann::json doc;
    doc["n_atoms"] = state.n_atoms();
    doc["max_order"] = state.layout().max_order();
    nlohmann::json blocks = nlohmann::json::array();
    for (int tj : state.layout().two_js()) {
        const double scale = 1.0 / degeneracy(state.n_atoms(), tj);
        const Eigen::MatrixXcd b = state.weighted_block(tj) * scale;
        nlohmann::json re = nlohmann::json::array(), im = nlohmann::json::array();
        for (int r = 0; r <= tj; ++r) {
            nlohmann::json rr = nlohmann::json::array(), ri = nlohmann::json::array();
            for (int c = 0; c <= tj; ++c) {
                rr.push_back(b(r, c).real());
                ri.push_back(b(r, c).imag());
            }
            re.push_back(std::move(rr));
            im.push_back(std::move(ri));
        }
        blocks.push_back({{"j", 0.5 * tj},
                          {"degeneracy", degeneracy(state.n_atoms(), tj)},
                          {"matrix_real", std::move(re)},
                          {"matrix_imag", std::move(im)}});
    }
    doc["blocks"] = std::move(blocks);
    std::ofstream os(path);
    if (!os) throw std::runtime_error("cannot open " + path.string());
    os << doc.dump(1) << '\n';
}

}  // namespace ramsey::dicke
