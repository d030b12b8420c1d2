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

#include "ramsey/semiclassical.hpp"

#include <algorithm>
#include <array>
#include <cmath>
#include <stdexcept>
#include <vector>

#include "ramsey/ode.hpp"

namespace ramsey::semiclassical {

namespace {

constexpr Complex kI{0.0, 1.0};

double wrap_pi(double x) { return std::remainder(x, 2.0 * M_PI); }

Eigen::Matrix2cd lindblad(const Eigen::Matrix2cd& op, const Eigen::Matrix2cd& rho) {
    const Eigen::Matrix2cd opd = op.adjoint();
    return op * rho * opd - 0.5 * (opd * op * rho + rho * opd * op);
}

}  // namespace

CumulantState cumulant_rhs(const CumulantState& s, const ModelParams& p) {
    const Rates r = derive_rates(p);
    const double n = p.n_atoms;
    const double gc = r.gamma_c;
    CumulantState d;
    d.sz = -(gc + p.decay_rate()) * (s.sz + 1.0) - p.w * (s.sz - 1.0) - 2.0 * gc * (n - 1.0) * s.spsm;
    d.spsm = -r.gamma_t * s.spsm + 0.5 * gc * s.sz * (1.0 + s.sz) + gc * (n - 2.0) * s.spsm * s.sz;
    return d;
}

double steady_state_residual(const CumulantState& state, const ModelParams& params) {
    const CumulantState d = cumulant_rhs(state, params);
    return std::max(std::abs(d.sz), std::abs(d.spsm));
}

namespace {

struct PairQuadratic {
    double A, B, c2, c1, c0, gc, n;

    PairQuadratic(const ModelParams& p, double gc_) : gc(gc_), n(p.n_atoms) {
        const double gamma_t = 2.0 * derive_rates(p).gamma_s + p.w + gc;
        const double a = gc + p.decay_rate();
        // First equation: spsm = (A - B sz) / (2 gc (N-1)).
        A = p.w - a;
        B = p.w + a;
        const double K = gc * (n - 2.0);
        const double M = gc * gc * (n - 1.0);
        // (B K - M) sz^2 - (A K + B gt + M) sz + A gt = 0
        c2 = B * K - M;
        c1 = -(A * K + B * gamma_t + M);
        c0 = A * gamma_t;
    }

    /// Roots, or the real part of a complex pair.
    std::array<double, 2> roots(bool& real) const {
        real = true;
        if (c2 == 0.0) return {-c0 / c1, -c0 / c1};
        double disc = c1 * c1 - 4.0 * c2 * c0;
        if (disc < 0.0) {
            real = false;
            disc = 0.0;
        }
        const double q = -0.5 * (c1 + std::copysign(std::sqrt(disc), c1));
        return {q != 0.0 ? c0 / q : -c1 / (2.0 * c2), q / c2};
    }

    double spsm(double sz) const { return (A - B * sz) / (2.0 * gc * (n - 1.0)); }
};

}  // namespace

CumulantState cumulant_steady_state(const ModelParams& p) {
    const Rates r = derive_rates(p);
    if (!(r.gamma_c > 0.0)) throw ConfigError("cumulant steady state needs gamma_c > 0");
    if (p.n_atoms < 2) throw ConfigError("cumulant steady state needs N >= 2");

    // Follow the root from the decoupled limit up to the actual gamma_c.
    double sz = (p.w - p.decay_rate()) / (p.w + p.decay_rate());
    constexpr int kSteps = 400;
    constexpr double kStart = 1e-9;
    bool real = true;
    for (int k = 0; k <= kSteps; ++k) {
        const double gc = r.gamma_c * std::pow(kStart, 1.0 - double(k) / kSteps);
        const auto roots = PairQuadratic(p, gc).roots(real);
        sz = std::abs(roots[0] - sz) <= std::abs(roots[1] - sz) ? roots[0] : roots[1];
    }
    const PairQuadratic quad(p, r.gamma_c);
    if (!real || !std::isfinite(sz))
        throw SolverError("cumulant steady state has no real root", 0.0);
    if (std::abs(sz) > 1.0 + 1e-9 || quad.spsm(sz) < -0.25)
        throw SolverError("cumulant steady state has no physical root", 0.0);
    // Newton on the pair itself keeps both residuals at round-off
    CumulantState s{sz, quad.spsm(sz)};
    const double n = p.n_atoms;
    const double gc = r.gamma_c;
    for (int it = 0; it < 3; ++it) {
        const CumulantState f = cumulant_rhs(s, p);
        const double j11 = -(gc + p.decay_rate()) - p.w;
        const double j12 = -2.0 * gc * (n - 1.0);
        const double j21 = 0.5 * gc * (1.0 + 2.0 * s.sz) + gc * (n - 2.0) * s.spsm;
        const double j22 = -r.gamma_t + gc * (n - 2.0) * s.sz;
        const double det = j11 * j22 - j12 * j21;
        if (det == 0.0) break;
        s.sz -= (j22 * f.sz - j12 * f.spsm) / det;
        s.spsm -= (j11 * f.spsm - j21 * f.sz) / det;
    }
    s.sz = std::clamp(s.sz, -1.0, 1.0);
    return s;
}

double lambda_semiclassical(const ModelParams& p, double alpha_ss) {
    if (p.n_atoms < 2) throw ConfigError("semiclassical decay rate needs N >= 2");
    const Rates r = derive_rates(p);
    if (r.gamma_c == 0.0) return 0.5 * r.gamma_t;
    const CumulantState ss = cumulant_steady_state(p);
    return 0.5 * (r.gamma_t - (p.n_atoms - 1.0) * r.gamma_c * alpha_ss * ss.sz);
}

CoherentCumulantState coherent_cumulant_rhs(const CoherentCumulantState& s, const ModelParams& p,
                                            double alpha) {
    const Rates r = derive_rates(p);
    CoherentCumulantState d;
    d.cumulants = cumulant_rhs(s.cumulants, p);
    d.splus = (kI * p.delta_nu - 0.5 * r.gamma_t) * s.splus +
              0.5 * r.gamma_c * (p.n_atoms - 1.0) * alpha * s.splus * s.cumulants.sz;
    return d;
}

Eigen::Matrix2cd meanfield_rhs(const Eigen::Matrix2cd& rho, Complex o, const ModelParams& p) {
    Eigen::Matrix2cd sm = Eigen::Matrix2cd::Zero();
    sm(0, 1) = 1.0;
    const Eigen::Matrix2cd sp = sm.transpose();
    Eigen::Matrix2cd sz = Eigen::Matrix2cd::Zero();
    sz(0, 0) = -1.0;
    sz(1, 1) = 1.0;
    const double gc = p.gamma_c();

    const Eigen::Matrix2cd h = 0.5 * p.delta_nu * sz;
    Eigen::Matrix2cd d = -kI * (h * rho - rho * h);
    d += p.w * lindblad(sp, rho);
    d += (p.decay_rate() + gc) * lindblad(sm, rho);
    d += p.dephasing_rate() * lindblad(sz, rho);
    d += 0.5 * gc * (sm * rho - rho * sm) * o;
    d += 0.5 * gc * (rho * sp - sp * rho) * std::conj(o);
    return d;
}

MeanFieldSummary meanfield_self_consistent(const ModelParams& params, double duration,
                                           double seed_coherence) {
    ModelParams p = params;
    p.delta_nu = 0.0;
    const double n = p.n_atoms;
    // rho = [[p_g, c], [c*, p_e]] with <s+> = tr(s+ rho) = rho(0,1)
    Eigen::Matrix2cd rho0;
    rho0 << 0.5, seed_coherence, seed_coherence, 0.5;
    Eigen::Vector4cd y = Eigen::Map<Eigen::Vector4cd>(rho0.data());
    const auto rhs = [&](const Eigen::Vector4cd& v, Eigen::Vector4cd& dv) {
        const Eigen::Matrix2cd r = Eigen::Map<const Eigen::Matrix2cd>(v.data());
        const Complex o = (n - 1.0) * r(0, 1);
        const Eigen::Matrix2cd d = meanfield_rhs(r, o, p);
        dv = Eigen::Map<const Eigen::Vector4cd>(d.data());
    };
    Dopri5<Eigen::Vector4cd> stepper(1e-10);
    double t = 0.0;
    stepper.advance(rhs, y, t, duration);
    const Eigen::Matrix2cd r = Eigen::Map<const Eigen::Matrix2cd>(y.data());
    MeanFieldSummary out;
    out.sz = (r(1, 1) - r(0, 0)).real();
    out.splus_abs = std::abs(r(0, 1));
    out.order_abs = (n - 1.0) * out.splus_abs;
    return out;
}

KuramotoEnsemble kuramoto_step(const KuramotoEnsemble& ens, const ModelParams& p, double dt) {
    if (!(dt > 0.0)) throw std::invalid_argument("dt must be > 0");
    if (ens.phases.size() != ens.amplitudes.size())
        throw std::invalid_argument("phases and amplitudes differ in length");
    if (ens.amplitudes.size() > 0 && !(ens.amplitudes.minCoeff() > 0.0))
        throw std::invalid_argument("Kuramoto amplitudes must be positive");
    // sum_m alpha_m sin(phi_m - phi_j) = Im(exp(-i phi_j) sum_m alpha_m exp(i phi_m))
    Complex field = 0.0;
    for (Eigen::Index m = 0; m < ens.phases.size(); ++m)
        field += ens.amplitudes[m] * std::exp(kI * ens.phases[m]);
    const double coupling = 0.5 * p.gamma_c() * ens.inversion;
    KuramotoEnsemble out = ens;
    for (Eigen::Index j = 0; j < ens.phases.size(); ++j) {
        const double pull = (std::exp(-kI * ens.phases[j]) * field).imag();
        const double rate = -p.delta_nu + coupling / ens.amplitudes[j] * pull;
        out.phases[j] = wrap_pi(ens.phases[j] + dt * rate);
    }
    return out;
}

Complex order_parameter(const KuramotoEnsemble& ens) {
    Complex o = 0.0;
    for (Eigen::Index j = 0; j < ens.phases.size(); ++j)
        o += ens.amplitudes[j] * std::exp(-kI * ens.phases[j]);
    return o;
}

double phase_spread(const KuramotoEnsemble& ens) {
    if (ens.phases.size() == 0) return 0.0;
    Complex mean = 0.0;
    for (Eigen::Index j = 0; j < ens.phases.size(); ++j) mean += std::exp(kI * ens.phases[j]);
    const double centre = std::arg(mean);
    double lo = 0.0, hi = 0.0;
    for (Eigen::Index j = 0; j < ens.phases.size(); ++j) {
        const double d = wrap_pi(ens.phases[j] - centre);
        lo = std::min(lo, d);
        hi = std::max(hi, d);
    }
    return hi - lo;
}

}  // namespace ramsey::semiclassical
