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

#include "ramsey/protocol.hpp"

#include <algorithm>
#include <atomic>
#include <cmath>
#include <complex>
#include <limits>
#include <thread>

#include <Eigen/Dense>
#include <unsupported/Eigen/NonLinearOptimization>

#include "ramsey/dense_oracle.hpp"
#include "ramsey/dicke.hpp"
#include "ramsey/ode.hpp"
#include "ramsey/semiclassical.hpp"
#include "ramsey/trajectories.hpp"

namespace ramsey::protocol {

namespace {

using Complex = std::complex<double>;
constexpr double kNaN = std::numeric_limits<double>::quiet_NaN();

std::vector<double> sample_grid(double t_max, int n_samples) {
    std::vector<double> t(std::size_t(n_samples) + 1);
    for (int k = 0; k <= n_samples; ++k) t[std::size_t(k)] = t_max * k / n_samples;
    return t;
}

void run_dense(const ModelParams& p, const RunOptions& opt, FringeSeries& out) {
    if (p.n_atoms > 8) throw ConfigError("dense backend supports at most 8 atoms");
    const dense::LinearGenerator gen = dense::build_generator_atoms(p);
    const double n = p.n_atoms;
    dense::DenseState state =
        dense::rotate(dense::ground_state({p.n_atoms, 1}), dense::Axis::y, -M_PI / 2);
    double t = 0.0;
    for (double target : out.times) {
        if (target > t) state = dense::evolve_dense(state, gen, target - t, opt.tol);
        t = target;
        const Complex jplus = dense::expect_dense(state, dense::Observable::jplus);
        if (opt.readout == Readout::shortcut) {
            out.signal.push_back(2.0 * jplus.imag() / n);
        } else {
            const auto read = dense::rotate(state, dense::Axis::x, M_PI / 2);
            out.signal.push_back(2.0 * dense::expect_dense(read, dense::Observable::jz).real() / n);
        }
        if (opt.record_expectations) {
            const double jz = dense::expect_dense(state, dense::Observable::jz).real();
            const double sz = 2.0 * jz / n;
            out.sz.push_back(sz);
            if (p.n_atoms < 2) {
                out.spsm.push_back(kNaN);
                out.alpha_abs.push_back(kNaN);
                continue;
            }
            const double jpjm = dense::expect_dense(state, dense::Observable::jplus_jminus).real();
            const Complex jpjz = dense::expect_dense(state, dense::Observable::jplus_jz);
            // sum_j s+_j s-_j = Jz + N/2
            out.spsm.push_back((jpjm - jz - 0.5 * n) / (n * (n - 1)));
            const Complex spsz = (2.0 * jpjz + jplus) / (n * (n - 1));
            const Complex denom = (jplus / n) * sz;
            out.alpha_abs.push_back(std::abs(denom) < 1e-12 ? kNaN : std::abs(spsz / denom));
        }
    }
}

void run_dicke(const ModelParams& p, const RunOptions& opt, FringeSeries& out) {
    const bool pulse = opt.readout == Readout::second_pulse;
    // coherence order 1 carries <J+>; the second pulse needs every order
    dicke::DickeDensityMatrix state =
        dicke::rotated_ground_state(p.n_atoms, pulse ? p.n_atoms : 1, -M_PI / 2);
    dicke::Evolver ev(p, state.layout_ptr(), opt.tol);
    double t = 0.0;
    for (double target : out.times) {
        if (target > t) ev.advance(state, target - t);
        t = target;
        const dicke::ExpectationSet e = dicke::expectations(state);
        if (!pulse) {
            out.signal.push_back(2.0 * e.splus.imag());
        } else {
            const auto read = dicke::collective_rotation(state, dicke::Axis::x, M_PI / 2);
            out.signal.push_back(dicke::expectations(read).sz);
        }
        if (opt.record_expectations) {
            out.sz.push_back(e.sz);
            out.spsm.push_back(p.n_atoms >= 2 ? e.spsm_cross : kNaN);
            out.alpha_abs.push_back(e.alpha ? std::abs(*e.alpha) : kNaN);
        }
    }
}

void run_cumulant(const ModelParams& p, const RunOptions& opt, FringeSeries& out) {
    if (opt.readout == Readout::second_pulse)
        throw ConfigError("cumulant backend has no second-pulse readout");
    using semiclassical::CoherentCumulantState;
    // y = (Re s+, Im s+, sz, spsm)
    Eigen::Vector4d y(0.5, 0.0, 0.0, 0.25);
    const auto rhs = [&](const Eigen::Vector4d& v, Eigen::Vector4d& dv) {
        const CoherentCumulantState s{{v[0], v[1]}, {v[2], v[3]}};
        const CoherentCumulantState d = semiclassical::coherent_cumulant_rhs(s, p);
        dv << d.splus.real(), d.splus.imag(), d.cumulants.sz, d.cumulants.spsm;
    };
    Dopri5<Eigen::Vector4d> stepper(opt.tol);
    double t = 0.0;
    for (double target : out.times) {
        if (target > t) stepper.advance(rhs, y, t, target);
        t = target;
        out.signal.push_back(2.0 * y[1]);
        if (opt.record_expectations) {
            out.sz.push_back(y[2]);
            out.spsm.push_back(y[3]);
            out.alpha_abs.push_back(1.0);
        }
    }
}

void run_trajectory_mean(const ModelParams& p, double t_max, int n_samples, const RunOptions& opt,
                         FringeSeries& out) {
    if (opt.readout == Readout::second_pulse)
        throw ConfigError("trajectory backend has no second-pulse readout");
    const double limit = trajectories::max_dt(p);
    const double want = opt.dt > 0.0 ? std::min(opt.dt, limit) : limit;
    const double interval = t_max / n_samples;
    trajectories::TrajectoryOptions topt;
    topt.record_stride = std::max(1, int(std::ceil(interval / want - 1e-9)));
    const double dt = interval / topt.record_stride;
    const auto records =
        trajectories::ensemble_run(p, t_max, dt, opt.n_trials, opt.base_seed, topt);
    const auto mean = trajectories::ensemble_mean(records);
    if (mean.signal.size() != out.times.size())
        throw SolverError("trajectory grid does not match the sample grid", t_max);
    out.signal = mean.signal;
    if (opt.record_expectations) {
        out.sz = mean.sz;
        out.spsm.assign(out.times.size(), kNaN);
        out.alpha_abs.assign(out.times.size(), kNaN);
    }
}

// A exp(-lambda (t - t0)) sin(omega t + phi); x = (A, lambda, omega, phi) or
// (A, lambda, phi) with omega pinned.
struct FringeFunctor {
    using Scalar = double;
    enum { InputsAtCompileTime = Eigen::Dynamic, ValuesAtCompileTime = Eigen::Dynamic };
    using InputType = Eigen::VectorXd;
    using ValueType = Eigen::VectorXd;
    using JacobianType = Eigen::MatrixXd;

    const std::vector<double>& t;
    const std::vector<double>& s;
    double t0;
    bool pinned;
    double omega_pinned;

    int inputs() const { return pinned ? 3 : 4; }
    int values() const { return int(t.size()); }

    void unpack(const Eigen::VectorXd& x, double& a, double& lam, double& om, double& ph) const {
        a = x[0];
        lam = x[1];
        om = pinned ? omega_pinned : x[2];
        ph = pinned ? x[2] : x[3];
    }

    int operator()(const Eigen::VectorXd& x, Eigen::VectorXd& f) const {
        double a, lam, om, ph;
        unpack(x, a, lam, om, ph);
        for (std::size_t i = 0; i < t.size(); ++i)
            f[Eigen::Index(i)] = a * std::exp(-lam * (t[i] - t0)) * std::sin(om * t[i] + ph) - s[i];
        return 0;
    }

    int df(const Eigen::VectorXd& x, Eigen::MatrixXd& jac) const {
        double a, lam, om, ph;
        unpack(x, a, lam, om, ph);
        for (std::size_t i = 0; i < t.size(); ++i) {
            const auto r = Eigen::Index(i);
            const double e = std::exp(-lam * (t[i] - t0));
            const double sn = std::sin(om * t[i] + ph), cs = std::cos(om * t[i] + ph);
            jac(r, 0) = e * sn;
            jac(r, 1) = -(t[i] - t0) * a * e * sn;
            if (pinned) {
                jac(r, 2) = a * e * cs;
            } else {
                jac(r, 2) = t[i] * a * e * cs;
                jac(r, 3) = a * e * cs;
            }
        }
        return 0;
    }
};

double wrap_pi(double x) { return std::remainder(x, 2.0 * M_PI); }

}  // namespace

Backend parse_backend(const std::string& name) {
    if (name == "dense") return Backend::dense;
    if (name == "dicke") return Backend::dicke;
    if (name == "cumulant") return Backend::cumulant;
    if (name == "trajectory") return Backend::trajectory;
    throw ConfigError("unknown backend '" + name + "'");
}

std::string to_string(Backend backend) {
    switch (backend) {
        case Backend::dense: return "dense";
        case Backend::dicke: return "dicke";
        case Backend::cumulant: return "cumulant";
        case Backend::trajectory: return "trajectory";
    }
    return "unknown";
}

FringeSeries run_ramsey(const ModelParams& params, Backend backend, double t_max, int n_samples,
                        const RunOptions& options) {
    params.validate();
    if (!(t_max > 0.0) || !std::isfinite(t_max)) throw ConfigError("t_max must be > 0");
    if (n_samples < 1) throw ConfigError("n_samples must be >= 1");
    FringeSeries out;
    out.backend = backend;
    out.params = params;
    out.times = sample_grid(t_max, n_samples);
    switch (backend) {
        case Backend::dense: run_dense(params, options, out); break;
        case Backend::dicke: run_dicke(params, options, out); break;
        case Backend::cumulant: run_cumulant(params, options, out); break;
        case Backend::trajectory: run_trajectory_mean(params, t_max, n_samples, options, out); break;
    }
    for (double v : out.signal)
        if (!(std::abs(v) <= 1.0 + 1e-9)) throw SolverError("fringe left [-1, 1]", t_max);
    return out;
}

double default_transient_cut(const ModelParams& params) {
    const double gs = derive_rates(params).gamma_s;
    return params.w > 0.0 ? std::min(5.0 / params.w, 1.0 / gs) : 1.0 / gs;
}

std::vector<double> zero_crossings(const std::vector<double>& t, const std::vector<double>& s,
                                   double hysteresis) {
    if (t.size() != s.size()) throw std::invalid_argument("times and signal differ in length");
    std::vector<double> out;
    int armed = 0;  // sign of the last excursion beyond the band (0: none yet)
    int last_sign = 0;
    std::size_t last_idx = 0;
    double candidate = kNaN;
    for (std::size_t i = 0; i < s.size(); ++i) {
        const int sg = (s[i] > 0.0) - (s[i] < 0.0);
        if (sg == 0) continue;
        if (last_sign != 0 && sg != last_sign) {
            const double t0 = t[last_idx], t1 = t[i];
            const double tc = t0 + (t1 - t0) * s[last_idx] / (s[last_idx] - s[i]);
            if (hysteresis <= 0.0) {
                out.push_back(tc);
            } else if (armed != 0 && sg == -armed) {
                candidate = tc;
            }
        }
        last_sign = sg;
        last_idx = i;
        if (hysteresis > 0.0 && std::abs(s[i]) > hysteresis) {
            if (armed != 0 && sg == -armed && !std::isnan(candidate)) {
                out.push_back(candidate);
                candidate = kNaN;
            }
            armed = sg;
        }
    }
    return out;
}

std::vector<double> zero_crossings(const FringeSeries& series, double hysteresis) {
    return zero_crossings(series.times, series.signal, hysteresis);
}

FitResult fit_fringe(const FringeSeries& series, double transient_cut, const FitOptions& options) {
    if (series.times.size() != series.signal.size())
        throw FitError("times and signal differ in length");
    std::vector<double> t, s;
    for (std::size_t i = 0; i < series.times.size(); ++i)
        if (series.times[i] >= transient_cut) {
            t.push_back(series.times[i]);
            s.push_back(series.signal[i]);
        }
    if (t.size() < 8) throw FitError("too few samples after the transient cut");

    // Stage 1: the largest |s| of each complete lobe between sign changes.
    double peak = 0.0;
    for (double v : s) peak = std::max(peak, std::abs(v));
    if (!(peak > 0.0)) throw FitError("signal vanishes after the transient cut");
    std::vector<double> te, le;
    std::vector<int> sign;
    {
        std::size_t lobe_start = 0;
        bool have_start = false;
        for (std::size_t i = 1; i <= s.size(); ++i) {
            const bool boundary = i == s.size() || (s[i] > 0.0) != (s[i - 1] > 0.0);
            if (!boundary) continue;
            if (have_start && i < s.size()) {
                std::size_t k = lobe_start;
                for (std::size_t j = lobe_start; j < i; ++j)
                    if (std::abs(s[j]) > std::abs(s[k])) k = j;
                double tk = t[k], vk = s[k];
                if (k > 0 && k + 1 < s.size()) {
                    const double den = s[k - 1] - 2.0 * s[k] + s[k + 1];
                    if (den != 0.0) {
                        const double off = 0.5 * (s[k - 1] - s[k + 1]) / den;
                        if (std::abs(off) <= 1.0) {
                            tk += off * 0.5 * (t[k + 1] - t[k - 1]);
                            vk -= 0.25 * (s[k - 1] - s[k + 1]) * off;
                        }
                    }
                }
                if (std::abs(vk) >= options.extremum_floor * peak) {
                    te.push_back(tk);
                    le.push_back(std::log(std::abs(vk)));
                    sign.push_back(vk > 0 ? 1 : -1);
                }
            }
            lobe_start = i;
            have_start = true;
        }
    }
    const int k = int(te.size());
    if (k < 3) throw FitError("too few extrema after the transient cut");
    double mt = 0.0, ml = 0.0;
    for (int i = 0; i < k; ++i) {
        mt += te[std::size_t(i)] / k;
        ml += le[std::size_t(i)] / k;
    }
    double sxx = 0.0, sxy = 0.0;
    for (int i = 0; i < k; ++i) {
        sxx += (te[std::size_t(i)] - mt) * (te[std::size_t(i)] - mt);
        sxy += (te[std::size_t(i)] - mt) * (le[std::size_t(i)] - ml);
    }
    const double lam0 = -sxy / sxx;
    const double log_a0 = ml + lam0 * mt;  // amplitude at t = 0
    const double omega0 = options.pin_delta_nu ? series.params.delta_nu
                                               : M_PI * (k - 1) / (te.back() - te.front());
    const double phi0 = wrap_pi(sign.front() * M_PI / 2 - omega0 * te.front());
    const double periods = (t.back() - t.front()) * std::abs(omega0) / (2.0 * M_PI);
    if (periods < options.min_periods)
        throw FitError("fewer than the required oscillation periods after the transient cut");

    FitResult res;
    res.transient_cut = transient_cut;
    res.extrema_used = k;
    res.amplitude = std::exp(log_a0);
    res.lambda = lam0;
    res.delta_nu_fit = omega0;
    res.phase = phi0;
    const double t0 = t.front();

    // Stage 2: damped least squares on every post-cut sample.
    FringeFunctor fun{t, s, t0, options.pin_delta_nu, series.params.delta_nu};
    Eigen::VectorXd x(fun.inputs());
    if (options.pin_delta_nu)
        x << std::exp(log_a0 - lam0 * t0), lam0, phi0;
    else
        x << std::exp(log_a0 - lam0 * t0), lam0, omega0, phi0;
    Eigen::LevenbergMarquardt<FringeFunctor> lm(fun);
    lm.parameters.maxfev = options.max_iterations;
    const auto status = lm.minimize(x);
    using namespace Eigen::LevenbergMarquardtSpace;
    const bool ok = status != TooManyFunctionEvaluation && status != ImproperInputParameters &&
                    status != UserAsked && x.allFinite();

    const auto evaluate = [&](const Eigen::VectorXd& v, double& ssr) {
        Eigen::VectorXd f(fun.values());
        fun(v, f);
        ssr = f.squaredNorm();
    };
    if (ok) {
        double ssr = 0.0;
        evaluate(x, ssr);
        double a, lam, om, ph;
        fun.unpack(x, a, lam, om, ph);
        if (a < 0.0) {  // same curve with the phase shifted by pi
            a = -a;
            ph += M_PI;
        }
        res.amplitude = a * std::exp(lam * t0);
        res.lambda = lam;
        res.delta_nu_fit = om;
        res.phase = wrap_pi(ph);
        res.rms_residual = std::sqrt(ssr / double(t.size()));
        Eigen::MatrixXd jac(fun.values(), fun.inputs());
        fun.df(x, jac);
        const int dof = fun.values() - fun.inputs();
        const Eigen::MatrixXd jtj = jac.transpose() * jac;
        const Eigen::MatrixXd cov = jtj.ldlt().solve(Eigen::MatrixXd::Identity(jtj.rows(), jtj.cols()));
        res.lambda_stderr = std::sqrt(std::max(0.0, cov(1, 1) * ssr / std::max(dof, 1)));
        res.converged = std::isfinite(res.lambda);
    } else {
        Eigen::VectorXd x0(fun.inputs());
        if (options.pin_delta_nu)
            x0 << std::exp(log_a0 - lam0 * t0), lam0, phi0;
        else
            x0 << std::exp(log_a0 - lam0 * t0), lam0, omega0, phi0;
        double ssr = 0.0;
        evaluate(x0, ssr);
        res.rms_residual = std::sqrt(ssr / double(t.size()));
        res.converged = false;
    }
    return res;
}

SweepAxis parse_sweep_axis(const std::string& name) {
    if (name == "w" || name == "repump") return SweepAxis::repump;
    if (name == "N" || name == "n_atoms" || name == "atom_number") return SweepAxis::atom_number;
    throw ConfigError("unknown sweep axis '" + name + "'");
}

RunPlan plan_run(const ModelParams& params, const SweepOptions& options) {
    params.validate();
    const Rates r = derive_rates(params);
    double lam = 0.5 * r.gamma_t;
    if (params.n_atoms >= 2 && r.gamma_c > 0.0) {
        try {
            lam = semiclassical::lambda_semiclassical(params);
        } catch (const std::exception&) {
            // fall back to the uncoupled rate
        }
    }
    lam = std::max({lam, 0.5 * r.gamma_c, 0.05 * r.gamma_s});
    RunPlan plan;
    plan.params = params;
    plan.transient_cut = options.transient_cut ? *options.transient_cut : default_transient_cut(params);
    const double window = std::min(options.efolds / lam, options.max_window);
    const double omega_min = 2.0 * M_PI * options.periods / window;
    if (std::abs(params.delta_nu) < omega_min)
        plan.params.delta_nu = params.delta_nu < 0.0 ? -omega_min : omega_min;
    plan.t_max = plan.transient_cut + window;
    const double cycles = plan.t_max * std::abs(plan.params.delta_nu) / (2.0 * M_PI);
    plan.n_samples = std::max(200, int(std::ceil(cycles * options.samples_per_period)));
    return plan;
}

std::vector<SweepRow> sweep_lambda(const ModelParams& base, SweepAxis axis,
                                   const std::vector<double>& values, const SweepOptions& options) {
    if (values.empty()) throw ConfigError("sweep needs at least one value");
    std::vector<SweepRow> rows(values.size());
    std::atomic<std::size_t> next{0};
    const auto work = [&] {
        for (std::size_t i = next++; i < values.size(); i = next++) {
            SweepRow& row = rows[i];
            row.value = values[i];
            try {
                ModelParams p = base;
                if (axis == SweepAxis::repump) {
                    p.w = values[i];
                } else {
                    if (values[i] != std::floor(values[i]) || values[i] < 1.0)
                        throw ConfigError("atom number must be a positive integer");
                    p.n_atoms = int(values[i]);
                }
                p.validate();
                const Rates r = derive_rates(p);
                row.gamma_s = r.gamma_s;
                row.gamma_c = r.gamma_c;
                if (p.n_atoms >= 2 && r.gamma_c > 0.0) {
                    try {
                        const auto ss = semiclassical::cumulant_steady_state(p);
                        row.sz_ss = ss.sz;
                        row.spsm_ss = ss.spsm;
                        row.lambda_semiclassical = semiclassical::lambda_semiclassical(p);
                    } catch (const SolverError&) {
                        // semiclassical columns stay empty
                    }
                } else if (p.n_atoms >= 2) {
                    row.lambda_semiclassical = 0.5 * r.gamma_t;
                }
                const RunPlan plan = plan_run(p, options);
                row.delta_nu_used = plan.params.delta_nu;
                row.t_max_used = plan.t_max;
                RunOptions ro;
                ro.tol = options.tol;
                const FringeSeries series =
                    run_ramsey(plan.params, options.backend, plan.t_max, plan.n_samples, ro);
                row.fit = fit_fringe(series, plan.transient_cut);
                row.lambda_master = row.fit.lambda;
                row.lambda_stderr = row.fit.lambda_stderr;
                row.ok = row.fit.converged;
                if (!row.ok) {
                    row.failure = FailureKind::fit;
                    row.error = "fit did not converge";
                }
            } catch (const ConfigError& e) {
                row.failure = FailureKind::config;
                row.error = e.what();
            } catch (const FitError& e) {
                row.failure = FailureKind::fit;
                row.error = e.what();
            } catch (const std::exception& e) {
                row.failure = FailureKind::solver;
                row.error = e.what();
            }
        }
    };
    int nt = options.threads > 0 ? options.threads
                                 : int(std::max(1u, std::thread::hardware_concurrency()));
    nt = std::min<int>(nt, int(values.size()));
    std::vector<std::thread> pool;
    for (int k = 1; k < nt; ++k) pool.emplace_back(work);
    work();
    for (auto& th : pool) th.join();
    return rows;
}

}  // namespace ramsey::protocol
