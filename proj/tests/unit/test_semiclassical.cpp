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

#include <cmath>
#include <random>

#include "doctest.h"
#include "ramsey/dense_oracle.hpp"
#include "ramsey/dicke.hpp"
#include "ramsey/semiclassical.hpp"

using namespace ramsey;
using namespace ramsey::semiclassical;

namespace {

ModelParams fig3(int n, double w) {
    ModelParams p;
    p.n_atoms = n;
    p.t1 = 1.0;
    p.t2 = 1.0;
    p.cooperativity = 0.2;
    p.w = w;
    return p;
}

// classical RK4 on the closed pair, fixed step
CumulantState march(CumulantState s, const ModelParams& p, double t, double dt) {
    auto add = [](CumulantState a, const CumulantState& b, double h) {
        a.sz += h * b.sz;
        a.spsm += h * b.spsm;
        return a;
    };
    for (double tt = 0.0; tt < t; tt += dt) {
        const CumulantState k1 = cumulant_rhs(s, p);
        const CumulantState k2 = cumulant_rhs(add(s, k1, dt / 2), p);
        const CumulantState k3 = cumulant_rhs(add(s, k2, dt / 2), p);
        const CumulantState k4 = cumulant_rhs(add(s, k3, dt), p);
        s.sz += dt / 6 * (k1.sz + 2 * k2.sz + 2 * k3.sz + k4.sz);
        s.spsm += dt / 6 * (k1.spsm + 2 * k2.spsm + 2 * k3.spsm + k4.spsm);
    }
    return s;
}

KuramotoEnsemble uniform_ensemble(const Eigen::VectorXd& phases, double sz) {
    KuramotoEnsemble e;
    e.phases = phases;
    e.amplitudes = Eigen::VectorXd::Constant(phases.size(), 0.5);
    e.inversion = sz;
    return e;
}

}  // namespace

TEST_CASE("cumulant derivative at full inversion") {
    const ModelParams p = fig3(50, 30.0);
    const CumulantState d = cumulant_rhs({1.0, 0.0}, p);
    CHECK(d.sz == doctest::Approx(-2.0 * (p.gamma_c() + 1.0)));
    CHECK(d.sz < 0.0);
}

TEST_CASE("decoupled fixed point") {
    ModelParams p = fig3(20, 3.0);
    p.cooperativity = 0.0;
    const CumulantState fp{(3.0 - 1.0) / (3.0 + 1.0), 0.0};
    CHECK(steady_state_residual(fp, p) < 1e-15);
    CHECK(lambda_semiclassical(p) == doctest::Approx(derive_rates(p).gamma_t / 2));
    CHECK(lambda_semiclassical(p) == doctest::Approx(derive_rates(p).gamma_s + p.w / 2));
}

TEST_CASE("steady state at N=200, w=20") {
    const ModelParams p = fig3(200, 20.0);
    const CumulantState ss = cumulant_steady_state(p);
    CHECK(ss.sz > 0.0);
    CHECK(ss.sz < 1.0);
    CHECK(ss.spsm > 0.0);
    CHECK(steady_state_residual(ss, p) < 1e-12);
    // time marching from the post-pulse state lands on the same root
    const CumulantState marched = march({0.0, 0.25}, p, 40.0, 1e-3);
    CHECK(marched.sz == doctest::Approx(ss.sz).epsilon(1e-8));
    CHECK(marched.spsm == doctest::Approx(ss.spsm).epsilon(1e-8));
}

TEST_CASE("continuation picks the attracting root below inversion") {
    for (double w : {0.05, 0.5}) {
        const ModelParams p = fig3(100, w);
        const CumulantState ss = cumulant_steady_state(p);
        const CumulantState marched = march({0.0, 0.25}, p, 60.0, 1e-3);
        CHECK(ss.sz < 0.0);
        CHECK(marched.sz == doctest::Approx(ss.sz).epsilon(1e-8));
        CHECK(marched.spsm == doctest::Approx(ss.spsm).epsilon(1e-6));
    }
}

TEST_CASE("steady state residual across a parameter scan") {
    for (int n : {2, 3, 10, 100, 400})
        for (double w : {0.05, 0.5, 2.0, 10.0, 50.0, 200.0}) {
            const ModelParams p = fig3(n, w);
            const CumulantState ss = cumulant_steady_state(p);
            INFO("N=" << n << " w=" << w);
            CHECK(std::abs(ss.sz) <= 1.0);
            CHECK(ss.spsm >= -0.25);
            // pair correlation carries the sign of the inversion
            CHECK(ss.spsm * ss.sz >= 0.0);
            CHECK(steady_state_residual(ss, p) < 1e-12);
        }
}

TEST_CASE("steady state connects to the decoupled root") {
    for (double w : {0.3, 2.0, 15.0}) {
        ModelParams p = fig3(100, w);
        p.cooperativity = 1e-9;
        const CumulantState ss = cumulant_steady_state(p);
        CHECK(ss.sz == doctest::Approx((w - 1.0) / (w + 1.0)).epsilon(1e-5));
    }
}

TEST_CASE("steady state preconditions") {
    ModelParams p = fig3(10, 5.0);
    p.cooperativity = 0.0;
    CHECK_THROWS_AS(cumulant_steady_state(p), ConfigError);
    CHECK_THROWS_AS(cumulant_steady_state(fig3(1, 5.0)), ConfigError);
    CHECK_THROWS_AS(lambda_semiclassical(fig3(1, 5.0)), ConfigError);
}

TEST_CASE("mean-field inversion closes the fringe decay") {
    const ModelParams p = fig3(100, 10.0);
    const Rates r = derive_rates(p);
    const CumulantState ss = cumulant_steady_state(p);
    // alpha chosen so that alpha sz_ss equals the mean-field inversion
    const double alpha = r.gamma_t / ((p.n_atoms - 1) * r.gamma_c * ss.sz);
    CHECK(std::abs(lambda_semiclassical(p, alpha)) < 1e-12);
}

TEST_CASE("decay rate scales with the time unit") {
    const ModelParams p = fig3(150, 12.0);
    const double base = lambda_semiclassical(p);
    for (double s : {0.5, 3.0}) {
        ModelParams q = p;
        q.t1 *= s;
        q.t2 *= s;
        q.w /= s;
        CHECK(lambda_semiclassical(q) == doctest::Approx(base / s).epsilon(1e-10));
    }
}

TEST_CASE("cumulant pair follows the master equation at N=200") {
    ModelParams p = fig3(200, 10.0);
    p.delta_nu = 0.0;
    dicke::DickeDensityMatrix rho =
        dicke::collective_rotation(dicke::ground_state(200), dicke::Axis::y, -M_PI / 2)
            .restricted(1);
    dicke::Evolver ev(p, rho.layout_ptr(), 1e-8);
    CumulantState c{0.0, 0.25};
    const double dt = 0.25;
    for (double t = dt; t <= 1.5 + 1e-12; t += dt) {
        ev.advance(rho, dt);
        c = march(c, p, dt, 1e-4);
        if (t < 1.0) continue;
        const dicke::ExpectationSet e = dicke::expectations(rho);
        INFO("t=" << t);
        CHECK(std::abs(c.sz - e.sz) < 0.05 * std::abs(e.sz));
        CHECK(std::abs(c.spsm - e.spsm_cross) < 0.05 * std::abs(e.spsm_cross));
    }
}

TEST_CASE("mean-field equation without order parameter is the single-atom master equation") {
    ModelParams p = fig3(1, 2.5);
    p.delta_nu = 1.7;
    p.t2 = 0.6;
    const auto gen = dense::build_generator_atoms(p);
    std::mt19937_64 rng(5);
    std::normal_distribution<double> g;
    Eigen::Matrix2cd a;
    for (int i = 0; i < 4; ++i) a.data()[i] = {g(rng), g(rng)};
    Eigen::Matrix2cd rho = a * a.adjoint();
    rho /= rho.trace();
    const Eigen::Vector4cd v = Eigen::Map<Eigen::Vector4cd>(rho.data());
    const Eigen::Vector4cd dv = gen.matrix * v;
    const Eigen::Matrix2cd expect = Eigen::Map<const Eigen::Matrix2cd>(dv.data());
    CHECK((meanfield_rhs(rho, 0.0, p) - expect).norm() < 1e-12);
}

TEST_CASE("mean-field derivative is traceless and hermitian") {
    ModelParams p = fig3(30, 4.0);
    std::mt19937_64 rng(9);
    std::normal_distribution<double> g;
    for (int trial = 0; trial < 20; ++trial) {
        Eigen::Matrix2cd a;
        for (int i = 0; i < 4; ++i) a.data()[i] = {g(rng), g(rng)};
        Eigen::Matrix2cd rho = a * a.adjoint();
        rho /= rho.trace();
        const Eigen::Matrix2cd d = meanfield_rhs(rho, {g(rng), g(rng)}, p);
        CHECK(std::abs(d.trace()) < 1e-13);
        CHECK((d - d.adjoint()).norm() < 1e-13);
    }
}

TEST_CASE("self-consistent order parameter needs inversion") {
    int ordered = 0, inverted_disordered = 0;
    for (double w : {0.2, 0.6, 1.5, 3.0, 5.0, 10.0, 20.0, 40.0}) {
        const ModelParams p = fig3(100, w);
        const Rates r = derive_rates(p);
        const MeanFieldSummary s = meanfield_self_consistent(p, 200.0);
        INFO("w=" << w << " sz=" << s.sz << " |O|=" << s.order_abs);
        if (s.order_abs > 1e-3) {
            ++ordered;
            CHECK(s.sz > 0.0);
            // gain clamping: the inversion sits at the mean-field threshold
            CHECK(s.sz == doctest::Approx(r.gamma_t / ((p.n_atoms - 1) * r.gamma_c)).epsilon(1e-6));
        } else {
            CHECK(s.order_abs < 1e-6);
            if (s.sz > 0.0) ++inverted_disordered;
        }
    }
    CHECK(ordered > 0);
    CHECK(inverted_disordered > 0);
    CHECK(meanfield_self_consistent(fig3(100, 0.2), 200.0).sz < 0.0);
}

TEST_CASE("rigid rotation of an aligned ensemble") {
    ModelParams p = fig3(8, 5.0);
    p.delta_nu = 2.0;
    const KuramotoEnsemble e = uniform_ensemble(Eigen::VectorXd::Constant(8, 0.3), 0.4);
    const KuramotoEnsemble next = kuramoto_step(e, p, 0.01);
    for (Eigen::Index j = 0; j < 8; ++j) CHECK(next.phases[j] == doctest::Approx(0.3 - 0.02));
}

TEST_CASE("phase attraction and repulsion follow the inversion sign") {
    ModelParams p = fig3(2, 5.0);
    p.delta_nu = 0.0;
    Eigen::VectorXd phases(2);
    phases << -0.05, 0.05;
    for (double sz : {0.5, -0.5}) {
        KuramotoEnsemble e = uniform_ensemble(phases, sz);
        const double before = phase_spread(e);
        const double o_before = std::abs(order_parameter(e));
        for (int i = 0; i < 200; ++i) e = kuramoto_step(e, p, 0.01);
        if (sz > 0) {
            CHECK(phase_spread(e) < before);
            CHECK(std::abs(order_parameter(e)) > o_before);
        } else {
            CHECK(phase_spread(e) > before);
            CHECK(std::abs(order_parameter(e)) < o_before);
        }
    }
}

TEST_CASE("spread below pi contracts monotonically") {
    ModelParams p = fig3(64, 5.0);
    p.delta_nu = 0.0;
    std::mt19937_64 rng(3);
    std::uniform_real_distribution<double> u(-1.4, 1.4);
    Eigen::VectorXd phases(64);
    for (auto& x : phases) x = u(rng);
    KuramotoEnsemble e = uniform_ensemble(phases, 0.3);
    double spread = phase_spread(e);
    for (int i = 0; i < 2000; ++i) {
        e = kuramoto_step(e, p, 0.01);
        const double s = phase_spread(e);
        REQUIRE(s <= spread + 1e-14);
        spread = s;
    }
    CHECK(spread < 0.1);
}

TEST_CASE("order parameter magnitudes") {
    const KuramotoEnsemble sync = uniform_ensemble(Eigen::VectorXd::Constant(40, 1.1), 0.0);
    CHECK(std::abs(order_parameter(sync)) / 40 == doctest::Approx(0.5));

    Eigen::VectorXd ring(360);
    for (Eigen::Index j = 0; j < 360; ++j) ring[j] = 2 * M_PI * j / 360.0;
    CHECK(std::abs(order_parameter(uniform_ensemble(ring, 0.0))) / 360 < 1e-12);

    // random phases: |O|^2 / (N/4) is exponentially distributed with mean 1
    std::mt19937_64 rng(11);
    std::uniform_real_distribution<double> u(-M_PI, M_PI);
    const int n = 1000, draws = 200;
    double mean = 0.0;
    for (int d = 0; d < draws; ++d) {
        Eigen::VectorXd ph(n);
        for (auto& x : ph) x = u(rng);
        const double o = std::abs(order_parameter(uniform_ensemble(ph, 0.0)));
        mean += o * o / (n / 4.0) / draws;
    }
    CHECK(std::abs(mean - 1.0) < 3.0 / std::sqrt(double(draws)));
}

TEST_CASE("Kuramoto step guards") {
    ModelParams p = fig3(2, 5.0);
    KuramotoEnsemble e = uniform_ensemble(Eigen::VectorXd::Zero(2), 0.2);
    CHECK_THROWS_AS(kuramoto_step(e, p, 0.0), std::invalid_argument);
    e.amplitudes[1] = 0.0;
    CHECK_THROWS_AS(kuramoto_step(e, p, 0.01), std::invalid_argument);
}
