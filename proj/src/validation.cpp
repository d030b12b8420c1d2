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

#include "ramsey/validation.hpp"

#include <algorithm>
#include <chrono>
#include <cmath>
#include <cstdio>
#include <exception>
#include <numbers>
#include <utility>

#include "ramsey/dense_oracle.hpp"
#include "ramsey/protocol.hpp"
#include "ramsey/trajectories.hpp"

namespace ramsey::validation {

namespace {

using Clock = std::chrono::steady_clock;

std::string format(const char* fmt, double a, double b = 0.0, double c = 0.0) {
    char buf[256];
    std::snprintf(buf, sizeof buf, fmt, a, b, c);
    return buf;
}

/// Runs body, stamps the wall time and turns exceptions into a failed check.
template <class Body>
CheckResult timed(std::string name, double tolerance, Body&& body) {
    CheckResult out;
    out.name = std::move(name);
    out.tolerance = tolerance;
    const auto start = Clock::now();
    try {
        body(out);
    } catch (const std::exception& e) {
        out.passed = false;
        out.detail = std::string("error: ") + e.what();
    }
    out.seconds = std::chrono::duration<double>(Clock::now() - start).count();
    return out;
}

}  // namespace

bool Report::passed() const {
    return std::all_of(checks.begin(), checks.end(), [](const CheckResult& c) { return c.passed; });
}

ModelParams equivalence_params(int n_atoms) {
    ModelParams p;
    p.n_atoms = n_atoms;
    p.delta_nu = 3.0;
    p.t1 = 1.0;
    p.t2 = 1.5;
    p.cooperativity = 0.4;
    p.w = 0.8;
    return p;
}

CheckResult check_dense_vs_dicke(int n_atoms, double tolerance, const GeneratorMutation& mutate) {
    return timed("dense_vs_dicke_N" + std::to_string(n_atoms), tolerance, [&](CheckResult& out) {
        const ModelParams p = equivalence_params(n_atoms);
        const auto gen = dense::build_generator_atoms(p);
        const dense::SparseMatrix pair =
            dense::sigma_plus(0, gen.dims) * dense::sigma_minus(1, gen.dims);
        auto d = dense::rotate(dense::ground_state(gen.dims), dense::Axis::y, -std::numbers::pi / 2);
        auto s = dicke::collective_rotation(dicke::ground_state(n_atoms), dicke::Axis::y,
                                            -std::numbers::pi / 2);
        dicke::Generator dg(p, s.layout_ptr());
        if (mutate) mutate(dg);
        dicke::Evolver ev(std::move(dg), 1e-12);

        constexpr int kSteps = 100;
        constexpr double kSpan = 5.0;
        double dz = 0.0, dpair = 0.0, dcoll = 0.0;
        for (int k = 0; k <= kSteps; ++k) {
            if (k > 0) {
                d = dense::evolve_dense(d, gen, kSpan * p.t1 / kSteps, 1e-12);
                ev.advance(s, kSpan * p.t1 / kSteps);
            }
            const auto e = dicke::expectations(s);
            dz = std::max(dz, std::abs(e.sz - dense::expect_dense(d, dense::Observable::sigma_z_single)));
            dpair = std::max(dpair, std::abs(e.spsm_cross - dense::expect_operator(d, pair)));
            dcoll = std::max(dcoll, std::abs(e.jplusjminus -
                                             dense::expect_dense(d, dense::Observable::jplus_jminus)));
        }
        out.max_deviation = std::max({dz, dpair, dcoll});
        out.passed = out.max_deviation <= tolerance;
        out.detail = format("sigma_z %.3g, pair %.3g, J+J- %.3g", dz, dpair, dcoll);
    });
}

CheckResult check_cavity_elimination(const CavityCheckOptions& options) {
    const std::string name = "cavity_elimination_ratio_" + format("%g", options.coupling_ratio);
    return timed(name, options.tolerance, [&](CheckResult& out) {
        constexpr int n = 2;
        const double r = options.coupling_ratio;
        ModelParams atoms;
        atoms.n_atoms = n;
        atoms.delta_nu = 0.0;
        atoms.w = options.w;
        atoms.cooperativity = options.cooperativity;
        ModelParams cavity = atoms;
        const double kappa = atoms.gamma_c() * n / (r * r);
        cavity.kappa = kappa;
        cavity.g = r * kappa / std::sqrt(double(n));
        cavity.n_photon_max = options.n_photon_max;

        const auto ga = dense::build_generator_atoms(atoms);
        const auto gc = dense::build_generator_cavity(cavity);
        auto sa = dense::rotate(dense::ground_state(ga.dims), dense::Axis::y, -std::numbers::pi / 2);
        auto sc = dense::rotate(dense::ground_state(gc.dims), dense::Axis::y, -std::numbers::pi / 2);
        const double span = 2.0 / derive_rates(atoms).gamma_s;
        const double dt = span / options.samples;
        double dz = 0.0, dp = 0.0, dcoll = 0.0, photons = 0.0, top = 0.0;
        for (int k = 0; k <= options.samples; ++k) {
            if (k > 0) {
                sa = dense::evolve_dense(sa, ga, dt, 1e-11);
                sc = dense::evolve_dense(sc, gc, dt, 1e-11);
            }
            using dense::Observable;
            dz = std::max(dz, std::abs(dense::expect_dense(sa, Observable::sigma_z_single) -
                                       dense::expect_dense(sc, Observable::sigma_z_single)));
            dp = std::max(dp, std::abs(dense::expect_dense(sa, Observable::sigma_plus_single) -
                                       dense::expect_dense(sc, Observable::sigma_plus_single)));
            dcoll = std::max(dcoll, std::abs(dense::expect_dense(sa, Observable::jplus_jminus) -
                                             dense::expect_dense(sc, Observable::jplus_jminus)));
            photons = std::max(photons, dense::expect_dense(sc, Observable::photon_number).real());
            top = std::max(top, dense::top_fock_population(sc));
        }
        out.max_deviation = std::max({dz, dp, dcoll});
        out.passed = out.max_deviation <= options.tolerance;
        out.detail = format("sigma_z %.3g, sigma+ %.3g, J+J- %.3g", dz, dp, dcoll) +
                     format("; peak photons %.3g, top Fock %.3g, kappa %g", photons, top, kappa);
    });
}

CheckResult check_trajectory_mean(const TrajectoryCheckOptions& options) {
    const std::string name = "trajectory_mean_N" + std::to_string(options.n_atoms);
    return timed(name, options.sigmas, [&](CheckResult& out) {
        ModelParams p;
        p.n_atoms = options.n_atoms;
        p.cooperativity = 0.6;
        p.w = 3.0;
        p.t2 = 1.5;
        p.delta_nu = 6.0;
        trajectories::TrajectoryOptions topt;
        const double interval = options.t_max / options.samples;
        topt.record_stride = int(std::ceil(interval / trajectories::max_dt(p)));
        const double dt = interval / topt.record_stride;
        const auto recs = trajectories::ensemble_run(p, options.t_max, dt, options.n_trials,
                                                     options.base_seed, topt, options.threads);
        const auto mean = trajectories::ensemble_mean(recs);

        protocol::RunOptions ro;
        ro.record_expectations = true;
        ro.tol = 1e-11;
        const auto exact =
            protocol::run_ramsey(p, protocol::Backend::dicke, options.t_max, options.samples, ro);
        if (exact.times.size() != mean.times.size())
            throw SolverError("trajectory and master-equation grids differ", 0.0);

        double worst = 0.0;
        int outside = 0;
        for (std::size_t i = 1; i < mean.times.size(); ++i) {
            const double se = mean.sz_stderr[i];
            const double z = se > 0.0 ? std::abs(mean.sz[i] - exact.sz[i]) / se
                                      : (mean.sz[i] == exact.sz[i] ? 0.0 : HUGE_VAL);
            worst = std::max(worst, z);
            if (z > options.sigmas) ++outside;
        }
        out.max_deviation = worst;
        out.passed = outside == 0;
        out.detail = format("%g trials, %g samples outside, dt %.3g", mean.trials, outside, dt);
    });
}

CheckResult check_conventional_limit(double t2_over_t1, double tolerance) {
    const std::string name = "conventional_limit_T2_" + format("%g", t2_over_t1);
    return timed(name, tolerance, [&](CheckResult& out) {
        ModelParams p;
        p.n_atoms = 2;
        p.t1 = 1.0;
        p.t2 = t2_over_t1;
        p.w = 0.0;
        p.cooperativity = 0.0;
        p.delta_nu = 10.0;
        const protocol::RunPlan plan = protocol::plan_run(p, {});
        protocol::RunOptions ro;
        ro.tol = 1e-11;
        const auto series =
            protocol::run_ramsey(plan.params, protocol::Backend::dicke, plan.t_max, plan.n_samples, ro);
        const auto fit = protocol::fit_fringe(series, plan.transient_cut);
        const double gs = derive_rates(p).gamma_s;
        out.max_deviation = std::abs(fit.lambda - gs) / gs;
        out.passed = fit.converged && out.max_deviation <= tolerance;
        out.detail = format("lambda %.8g, gamma_s %.8g", fit.lambda, gs);
    });
}

Report run_suite(const SuiteOptions& options) {
    Report report;
    for (int n : {2, 3, 4}) report.checks.push_back(check_dense_vs_dicke(n, 1e-8, options.mutate));
    CavityCheckOptions cav;
    cav.coupling_ratio = options.cavity_ratio;
    report.checks.push_back(check_cavity_elimination(cav));
    TrajectoryCheckOptions traj;
    traj.threads = options.threads;
    report.checks.push_back(check_trajectory_mean(traj));
    for (double ratio : {0.5, 1.0, 2.0}) report.checks.push_back(check_conventional_limit(ratio));
    return report;
}

}  // namespace ramsey::validation
