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

#include "ramsey/trajectories.hpp"

#include <algorithm>
#include <atomic>
#include <bit>
#include <cmath>
#include <complex>
#include <exception>
#include <limits>
#include <thread>

#include "ramsey/philox.hpp"
#include "ramsey/protocol.hpp"

namespace ramsey::trajectories {

namespace {

using Complex = std::complex<double>;
using State = std::vector<Complex>;

double norm_sq(const State& psi) {
    double s = 0.0;
    for (const Complex& a : psi) s += std::norm(a);
    return s;
}

void scale(State& psi, double f) {
    for (Complex& a : psi) a *= f;
}

/// out = J- psi; bit (N-1-a) of the index is atom a, 1 = excited.
void apply_jminus(const State& psi, State& out, int n) {
    std::fill(out.begin(), out.end(), Complex(0.0));
    const std::size_t dim = psi.size();
    for (std::size_t b = 0; b < dim; ++b) {
        if (psi[b] == Complex(0.0)) continue;
        for (int k = 0; k < n; ++k) {
            const std::size_t bit = std::size_t(1) << k;
            if (b & bit) out[b ^ bit] += psi[b];
        }
    }
}

void apply_jplus(const State& psi, State& out, int n) {
    std::fill(out.begin(), out.end(), Complex(0.0));
    const std::size_t dim = psi.size();
    for (std::size_t b = 0; b < dim; ++b) {
        if (psi[b] == Complex(0.0)) continue;
        for (int k = 0; k < n; ++k) {
            const std::size_t bit = std::size_t(1) << k;
            if (!(b & bit)) out[b | bit] += psi[b];
        }
    }
}

class Trajectory {
public:
    Trajectory(const ModelParams& p, double dt, std::uint64_t seed)
        : p_(p),
          n_(p.n_atoms),
          dim_(std::size_t(1) << n_),
          dt_(dt),
          gc_(p.gamma_c()),
          homodyne_(seed, std::uint32_t(Channel::homodyne)),
          jumps_(seed, std::uint32_t(Channel::jumps)),
          psi_(dim_, Complex(std::pow(2.0, -0.5 * n_))),
          phi_(dim_),
          chi_(dim_),
          ne_(dim_) {
        for (std::size_t b = 0; b < dim_; ++b) ne_[b] = std::popcount(b);
        for (int k = 0; k <= n_; ++k) {
            phase_.push_back(std::polar(1.0, -p.delta_nu * k * dt));
            damping_.push_back(std::exp(-0.5 * dt * (p.w * (n_ - k) + p.decay_rate() * k)));
        }
    }

    /// Advances by one step; returns the renormalization defect.
    double step(std::uint64_t index) {
        for (std::size_t b = 0; b < dim_; ++b) psi_[b] *= phase_[std::size_t(ne_[b])];

        if (gc_ > 0.0) {
            apply_jminus(psi_, phi_, n_);
            apply_jplus(phi_, chi_, n_);
            Complex jm = 0.0;
            for (std::size_t b = 0; b < dim_; ++b) jm += std::conj(psi_[b]) * phi_[b];
            const double rg = std::sqrt(gc_);
            const double x = 2.0 * rg * jm.real();  // <L + L^dagger>
            const double dw = std::sqrt(dt_) * homodyne_.normals(index)[0];
            const Complex c_chi = -0.5 * gc_ * dt_;
            const Complex c_phi = 0.5 * x * rg * dt_ + rg * dw;
            const Complex c_psi = 1.0 - x * x / 8.0 * dt_ - 0.5 * x * dw;
            for (std::size_t b = 0; b < dim_; ++b)
                psi_[b] = c_psi * psi_[b] + c_phi * phi_[b] + c_chi * chi_[b];
            renormalize(index);
        }

        const double pump = p_.w, decay = p_.decay_rate(), dephase = p_.dephasing_rate();
        if (pump > 0.0 || decay > 0.0 || dephase > 0.0) {
            double mean_ne = 0.0;
            for (std::size_t b = 0; b < dim_; ++b) mean_ne += std::norm(psi_[b]) * ne_[b];
            const double total = pump * (n_ - mean_ne) + decay * mean_ne + n_ * dephase;
            const auto u = jumps_.uniforms(index);
            if (u[0] < total * dt_) {
                jump(u[1] * total);
                ++jumps_taken_;
            } else {
                for (std::size_t b = 0; b < dim_; ++b) psi_[b] *= damping_[std::size_t(ne_[b])];
            }
            renormalize(index);
        }
        return drift_;
    }

    Complex jplus() const {
        // <J+> = conj <J->
        Complex jm = 0.0;
        for (std::size_t b = 0; b < dim_; ++b)
            for (int k = 0; k < n_; ++k) {
                const std::size_t bit = std::size_t(1) << k;
                if (b & bit) jm += std::conj(psi_[b ^ bit]) * psi_[b];
            }
        return std::conj(jm);
    }

    double jz() const {
        double s = 0.0;
        for (std::size_t b = 0; b < dim_; ++b) s += std::norm(psi_[b]) * (ne_[b] - 0.5 * n_);
        return s;
    }

    long jumps_taken() const { return jumps_taken_; }

private:
    void renormalize(std::uint64_t index) {
        const double ns = norm_sq(psi_);
        if (!std::isfinite(ns) || ns < 1e-12)
            throw SolverError("trajectory norm degenerated", double(index) * dt_);
        scale(psi_, 1.0 / std::sqrt(ns));
        const double after = std::abs(std::sqrt(norm_sq(psi_)) - 1.0);
        if (after > 1e-6) throw SolverError("trajectory norm drift above 1e-6", double(index) * dt_);
        drift_ = std::max(drift_, after);
    }

    /// Picks atom and channel with weights w <P_g>, <P_e>/T1, 1/(4 T2).
    void jump(double target) {
        const double pump = p_.w, decay = p_.decay_rate(), dephase = p_.dephasing_rate();
        int site = -1, kind = 0;
        int last_site = 0, last_kind = 2;
        double acc = 0.0;
        for (int a = 0; a < n_ && site < 0; ++a) {
            const std::size_t bit = std::size_t(1) << (n_ - 1 - a);
            double pe = 0.0;
            for (std::size_t b = 0; b < dim_; ++b)
                if (b & bit) pe += std::norm(psi_[b]);
            const double weights[3] = {pump * (1.0 - pe), decay * pe, dephase};
            for (int c = 0; c < 3; ++c) {
                if (!(weights[c] > 0.0)) continue;
                acc += weights[c];
                last_site = a;
                last_kind = c;
                if (target < acc) {
                    site = a;
                    kind = c;
                    break;
                }
            }
        }
        if (site < 0) {  // round-off at the top of the cumulative sum
            site = last_site;
            kind = last_kind;
        }
        const std::size_t bit = std::size_t(1) << (n_ - 1 - site);
        State out(dim_, Complex(0.0));
        for (std::size_t b = 0; b < dim_; ++b) {
            switch (kind) {
                case 0:  // sigma+
                    if (!(b & bit)) out[b | bit] = psi_[b];
                    break;
                case 1:  // sigma-
                    if (b & bit) out[b ^ bit] = psi_[b];
                    break;
                default:  // sigma_z
                    out[b] = (b & bit) ? psi_[b] : -psi_[b];
            }
        }
        psi_.swap(out);
    }

    ModelParams p_;
    int n_;
    std::size_t dim_;
    double dt_;
    double gc_;
    rng::Stream homodyne_;
    rng::Stream jumps_;
    State psi_, phi_, chi_;
    std::vector<int> ne_;
    std::vector<Complex> phase_;
    std::vector<double> damping_;
    double drift_ = 0.0;
    long jumps_taken_ = 0;
};

}  // namespace

double max_dt(const ModelParams& params) {
    const double gt = derive_rates(params).gamma_t;
    return gt > 0.0 ? 0.01 / gt : std::numeric_limits<double>::infinity();
}

TrajectoryRecord run_trajectory(const ModelParams& params, double t_max, double dt,
                                std::uint64_t seed, const TrajectoryOptions& options) {
    params.validate();
    if (params.n_atoms > kMaxTrajectoryAtoms)
        throw ConfigError("trajectories support at most 14 atoms");
    if (!(t_max > 0.0)) throw ConfigError("t_max must be > 0");
    if (!(dt > 0.0) || dt > max_dt(params) * (1.0 + 1e-12))
        throw ConfigError("dt must be in (0, 0.01/gamma_t]");
    if (options.record_stride < 1) throw ConfigError("record_stride must be >= 1");

    Trajectory traj(params, dt, seed);
    TrajectoryRecord rec;
    rec.seed = seed;
    const auto steps = std::uint64_t(std::ceil(t_max / dt - 1e-9));
    const double n = params.n_atoms;
    const auto record = [&](std::uint64_t k) {
        rec.times.push_back(double(k) * dt);
        rec.conditional_signal.push_back(2.0 * traj.jplus().imag() / n);
        rec.sz.push_back(2.0 * traj.jz() / n);
    };
    record(0);
    for (std::uint64_t k = 1; k <= steps; ++k) {
        rec.final_norm_drift = traj.step(k);
        if (k % std::uint64_t(options.record_stride) == 0) record(k);
    }
    rec.jumps = traj.jumps_taken();
    rec.crossings = protocol::zero_crossings(rec.times, rec.conditional_signal, options.hysteresis);
    return rec;
}

std::vector<TrajectoryRecord> ensemble_run(const ModelParams& params, double t_max, double dt,
                                           int n_trials, std::uint64_t base_seed,
                                           const TrajectoryOptions& options, int threads) {
    if (n_trials < 1) throw ConfigError("n_trials must be >= 1");
    // configuration problems surface before any work is scheduled
    params.validate();
    if (params.n_atoms > kMaxTrajectoryAtoms)
        throw ConfigError("trajectories support at most 14 atoms");
    if (!(dt > 0.0) || dt > max_dt(params) * (1.0 + 1e-12))
        throw ConfigError("dt must be in (0, 0.01/gamma_t]");
    if (!(t_max > 0.0)) throw ConfigError("t_max must be > 0");
    if (options.record_stride < 1) throw ConfigError("record_stride must be >= 1");

    std::vector<TrajectoryRecord> out(static_cast<std::size_t>(n_trials));
    std::atomic<int> next{0};
    const auto worker = [&] {
        for (int i = next++; i < n_trials; i = next++) {
            const std::uint64_t seed = base_seed + std::uint64_t(i);
            try {
                out[std::size_t(i)] = run_trajectory(params, t_max, dt, seed, options);
            } catch (const SolverError& e) {
                TrajectoryRecord r;
                r.seed = seed;
                r.failed = true;
                r.error = e.what();
                out[std::size_t(i)] = std::move(r);
            }
        }
    };
    int nt = threads > 0 ? threads : int(std::max(1u, std::thread::hardware_concurrency()));
    nt = std::min(nt, n_trials);
    std::vector<std::thread> pool;
    for (int t = 1; t < nt; ++t) pool.emplace_back(worker);
    worker();
    for (auto& th : pool) th.join();

    const auto failed = std::count_if(out.begin(), out.end(), [](const auto& r) { return r.failed; });
    if (double(failed) > 0.1 * n_trials)
        throw SolverError("more than 10% of trajectories failed", 0.0);
    return out;
}

EnsembleMean ensemble_mean(const std::vector<TrajectoryRecord>& records) {
    EnsembleMean m;
    const TrajectoryRecord* first = nullptr;
    for (const auto& r : records)
        if (!r.failed) {
            first = &r;
            break;
        }
    if (!first) return m;
    const std::size_t len = first->times.size();
    m.times = first->times;
    m.signal.assign(len, 0.0);
    m.sz.assign(len, 0.0);
    std::vector<double> s2(len, 0.0), z2(len, 0.0);
    for (const auto& r : records) {
        if (r.failed) continue;
        if (r.times.size() != len) throw std::invalid_argument("records differ in length");
        ++m.trials;
        for (std::size_t i = 0; i < len; ++i) {
            m.signal[i] += r.conditional_signal[i];
            s2[i] += r.conditional_signal[i] * r.conditional_signal[i];
            m.sz[i] += r.sz[i];
            z2[i] += r.sz[i] * r.sz[i];
        }
    }
    const double k = m.trials;
    m.signal_stderr.assign(len, 0.0);
    m.sz_stderr.assign(len, 0.0);
    for (std::size_t i = 0; i < len; ++i) {
        m.signal[i] /= k;
        m.sz[i] /= k;
        if (m.trials > 1) {
            const double vs = std::max(0.0, (s2[i] - k * m.signal[i] * m.signal[i]) / (k - 1));
            const double vz = std::max(0.0, (z2[i] - k * m.sz[i] * m.sz[i]) / (k - 1));
            m.signal_stderr[i] = std::sqrt(vs / k);
            m.sz_stderr[i] = std::sqrt(vz / k);
        }
    }
    return m;
}

std::vector<int> common_crossing_indices(const std::vector<TrajectoryRecord>& records, double coverage,
                                         int stride) {
    if (!(coverage > 0.0 && coverage <= 1.0)) throw std::invalid_argument("coverage must be in (0, 1]");
    if (stride < 1) throw std::invalid_argument("stride must be >= 1");
    std::vector<std::size_t> counts;
    for (const auto& r : records)
        if (!r.failed) counts.push_back(r.crossings.size());
    std::vector<int> out;
    if (counts.empty()) return out;
    std::sort(counts.begin(), counts.end());
    // the count reached by a `coverage` fraction of the records
    const auto skip = std::size_t(std::floor((1.0 - coverage) * double(counts.size()) + 1e-9));
    const std::size_t reach = counts[std::min(skip, counts.size() - 1)];
    for (std::size_t k = 0; k < reach; k += std::size_t(stride)) out.push_back(int(k));
    return out;
}

CrossingReport crossing_statistics(const std::vector<TrajectoryRecord>& records,
                                   const std::vector<int>& crossing_indices, double delta_nu) {
    CrossingReport rep;
    int max_index = -1;
    for (int k : crossing_indices) {
        if (k < 0) throw std::invalid_argument("crossing index must be >= 0");
        max_index = std::max(max_index, k);
    }
    std::vector<const TrajectoryRecord*> usable;
    for (const auto& r : records) {
        if (r.failed || int(r.crossings.size()) <= max_index) {
            ++rep.excluded;
            continue;
        }
        usable.push_back(&r);
    }
    for (int k : crossing_indices) {
        CrossingStatistics s;
        s.crossing_index = k;
        s.trial_count = int(usable.size());
        s.low_confidence = s.trial_count < 30;
        if (s.trial_count >= 2) {
            double mean = 0.0;
            for (const auto* r : usable) mean += r->crossings[std::size_t(k)];
            mean /= s.trial_count;
            double m2 = 0.0, m3 = 0.0, m4 = 0.0;
            for (const auto* r : usable) {
                const double d = r->crossings[std::size_t(k)] - mean;
                m2 += d * d;
                m3 += d * d * d;
                m4 += d * d * d * d;
            }
            const double n = s.trial_count;
            s.mean_time = mean;
            s.variance = m2 / (n - 1);
            if (m2 > 0.0) {
                const double pm2 = m2 / n;
                s.skewness = (m3 / n) / std::pow(pm2, 1.5);
                s.excess_kurtosis = (m4 / n) / (pm2 * pm2) - 3.0;
                // 2.576 sigma with sd(skew) ~ sqrt(6/n), sd(kurt) ~ sqrt(24/n)
                s.gaussian_at_1pct = std::abs(s.skewness) < 2.576 * std::sqrt(6.0 / n) &&
                                     std::abs(s.excess_kurtosis) < 2.576 * std::sqrt(24.0 / n);
            } else {
                s.gaussian_at_1pct = true;
            }
        } else if (s.trial_count == 1) {
            s.mean_time = usable.front()->crossings[std::size_t(k)];
        }
        rep.rows.push_back(s);
    }

    // phase variance = delta_nu^2 var(t); var of a sample variance ~ 2 sigma^4/(n-1)
    double sw = 0.0, sx = 0.0, sy = 0.0, sxx = 0.0, sxy = 0.0;
    int points = 0;
    for (const auto& s : rep.rows) {
        if (s.trial_count < 2 || s.variance <= 0.0) continue;
        const double y = delta_nu * delta_nu * s.variance;
        const double wgt = (s.trial_count - 1) / (2.0 * y * y);
        sw += wgt;
        sx += wgt * s.mean_time;
        sy += wgt * y;
        sxx += wgt * s.mean_time * s.mean_time;
        sxy += wgt * s.mean_time * y;
        ++points;
    }
    rep.diffusion.points = points;
    const double det = sw * sxx - sx * sx;
    if (points >= 2 && det > 0.0) {
        rep.diffusion.slope = (sw * sxy - sx * sy) / det;
        rep.diffusion.intercept = (sxx * sy - sx * sxy) / det;
        rep.diffusion.slope_stderr = std::sqrt(sw / det);
    }
    return rep;
}

}  // namespace ramsey::trajectories
