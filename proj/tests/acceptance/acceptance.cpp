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

// Acceptance gate: one PASS/FAIL line per criterion. With arguments, only the
// listed criteria run (e.g. `acceptance 4 6`). Exit status 1 if any fails.

#include <algorithm>
#include <chrono>
#include <cmath>
#include <cstdio>
#include <cstdlib>
#include <filesystem>
#include <fstream>
#include <functional>
#include <iostream>
#include <map>
#include <random>
#include <set>
#include <sstream>
#include <string>
#include <vector>

#include <unistd.h>

#include "json.hpp"
#include "ramsey/cli_io.hpp"
#include "ramsey/params.hpp"
#include "ramsey/protocol.hpp"
#include "ramsey/semiclassical.hpp"
#include "ramsey/trajectories.hpp"
#include "ramsey/validation.hpp"

namespace {

using namespace ramsey;
namespace fs = std::filesystem;

// Tolerances and thresholds.
constexpr double kOracleTol = 1e-8;
constexpr double kConventionalTol = 0.01;
constexpr double kEliminationTol = 1e-3;
constexpr double kEliminationRatio = 0.05;
constexpr int kEliminationCutoff = 5;
constexpr double kSemiclassicalTol = 0.15;
constexpr double kTrajectorySigmas = 3.0;
constexpr double kDiffusionSlopeTol = 0.25;
constexpr double kSingleTrialSigmas = 2.0;
constexpr double kSingleTrialPassFraction = 0.9;
constexpr double kKuramotoOrder = 0.4;
constexpr int kSweepAtoms = 200;
constexpr double kCollectiveCooperativity = 0.2;

struct Outcome {
    bool passed = false;
    std::string summary;
};

std::string fmt(const char* f, double a = 0, double b = 0, double c = 0, double d = 0) {
    char buf[512];
    std::snprintf(buf, sizeof buf, f, a, b, c, d);
    return buf;
}

ModelParams collective_params(int n, double w) {
    ModelParams p;
    p.n_atoms = n;
    p.t1 = 1.0;
    p.t2 = 1.0;
    p.cooperativity = kCollectiveCooperativity;
    p.w = w;
    p.delta_nu = 10.0;
    return p;
}

Outcome oracle_equivalence() {
    Outcome o{true, ""};
    double worst = 0.0;
    for (int n : {2, 3, 4}) {
        const auto r = validation::check_dense_vs_dicke(n, kOracleTol);
        o.passed = o.passed && r.passed;
        worst = std::max(worst, r.max_deviation);
    }
    o.summary = fmt("max deviation %.3g over N=2,3,4 (tolerance %g)", worst, kOracleTol);
    return o;
}

Outcome conventional_limit() {
    Outcome o{true, ""};
    std::ostringstream s;
    for (double ratio : {0.5, 1.0, 2.0}) {
        const auto r = validation::check_conventional_limit(ratio, kConventionalTol);
        o.passed = o.passed && r.passed;
        s << "T2/T1=" << ratio << ": rel " << fmt("%.2g", r.max_deviation) << "; ";
    }
    o.summary = s.str() + fmt("tolerance %g", kConventionalTol);
    return o;
}

Outcome adiabatic_elimination() {
    validation::CavityCheckOptions opt;
    opt.coupling_ratio = kEliminationRatio;
    opt.n_photon_max = kEliminationCutoff;
    opt.tolerance = kEliminationTol;
    const auto r = validation::check_cavity_elimination(opt);
    return {r.passed, fmt("max deviation %.3g (tolerance %g); ", r.max_deviation, kEliminationTol) + r.detail};
}

std::vector<double> repump_values() {
    const double gs = 1.0;
    const double nc = kSweepAtoms * kCollectiveCooperativity;
    return {0.2 * gs, 1.0, 2.0, 3.0, 4.0, 5.0, 7.0, 10.0, 15.0, 20.0, 40.0, 4.0 * nc};
}

const std::vector<protocol::SweepRow>& repump_sweep() {
    static const std::vector<protocol::SweepRow> rows = [] {
        protocol::SweepOptions opt;
        opt.tol = 1e-9;
        return protocol::sweep_lambda(collective_params(kSweepAtoms, 1.0), protocol::SweepAxis::repump,
                                      repump_values(), opt);
    }();
    return rows;
}

Outcome lambda_versus_repump() {
    const auto& rows = repump_sweep();
    const double gs = rows.front().gamma_s;
    std::ostringstream s;
    bool ok = std::all_of(rows.begin(), rows.end(), [](const auto& r) { return r.ok; });
    for (const auto& r : rows) s << fmt("w=%g:", r.value) << (r.ok ? fmt("%.4g", r.lambda_master) : "fail") << " ";
    const bool low_end = rows.front().ok && rows.front().lambda_master > gs;
    const bool high_end = rows.back().ok && rows.back().lambda_master > gs;
    const auto best = std::min_element(rows.begin(), rows.end(), [](const auto& a, const auto& b) {
        return (a.ok ? a.lambda_master : INFINITY) < (b.ok ? b.lambda_master : INFINITY);
    });
    const bool interior = best != rows.begin() && best != rows.end() - 1 && best->lambda_master < gs;
    return {ok && low_end && high_end && interior,
            fmt("N=%g, minimum %.4g at w=%g; ", kSweepAtoms, best->lambda_master, best->value) + s.str()};
}

Outcome semiclassical_agreement() {
    const auto& rows = repump_sweep();
    bool ok = true;
    int compared = 0;
    double worst = 0.0, worst_w = 0.0;
    for (const auto& r : rows) {
        if (!r.ok || r.lambda_master >= r.gamma_s) continue;
        if (!r.lambda_semiclassical) {
            ok = false;
            continue;
        }
        ++compared;
        const double rel = std::abs(*r.lambda_semiclassical - r.lambda_master) / r.lambda_master;
        if (rel > worst) {
            worst = rel;
            worst_w = r.value;
        }
    }
    ok = ok && compared > 0 && worst <= kSemiclassicalTol;
    return {ok, fmt("%g points below gamma_s, worst relative gap %.3g at w=%g (tolerance %g)", compared, worst,
                    worst_w, kSemiclassicalTol)};
}

Outcome lambda_versus_atoms() {
    std::vector<double> lam;
    std::ostringstream s;
    bool ok = true;
    double gc = 0.0, gs = 0.0;
    for (int n : {20, 50, 100, 200}) {
        ModelParams p = collective_params(n, 0.0);
        p.w = n * p.gamma_c() / 2.0;
        protocol::SweepOptions opt;
        opt.tol = 1e-9;
        const auto row = protocol::sweep_lambda(p, protocol::SweepAxis::repump, {p.w}, opt).front();
        ok = ok && row.ok;
        lam.push_back(row.ok ? row.lambda_master : NAN);
        gc = row.gamma_c;
        gs = row.gamma_s;
        s << "N=" << n << ":" << fmt("%.4g", lam.back()) << " ";
    }
    for (std::size_t i = 1; i < lam.size(); ++i) ok = ok && lam[i] < lam[i - 1];
    ok = ok && lam.back() < gs && lam.back() <= 3.0 * gc;
    return {ok, s.str() + fmt("(gamma_s %g, 3 gamma_c %g)", gs, 3.0 * gc)};
}

Outcome trajectory_mean() {
    validation::TrajectoryCheckOptions opt;
    opt.n_atoms = 4;
    opt.n_trials = 200;
    opt.sigmas = kTrajectorySigmas;
    const auto r = validation::check_trajectory_mean(opt);
    return {r.passed, fmt("largest |mean - master| / stderr %.3g (bound %g); ", r.max_deviation, kTrajectorySigmas) +
                          r.detail};
}

Outcome phase_diffusion() {
    ModelParams p;
    p.n_atoms = 10;
    p.t1 = 1.0;
    p.t2 = 1.0;
    p.cooperativity = kCollectiveCooperativity;
    p.w = p.n_atoms * p.gamma_c() / 2.0;
    p.delta_nu = 20.0;
    constexpr int kTrials = 500;
    constexpr double kTMax = 8.0;
    trajectories::TrajectoryOptions topt;
    const auto recs = trajectories::ensemble_run(p, kTMax, trajectories::max_dt(p), kTrials, 4000, topt);
    const auto indices = trajectories::common_crossing_indices(recs);
    const auto report = trajectories::crossing_statistics(recs, indices, p.delta_nu);
    const double gc = p.gamma_c();
    const auto& d = report.diffusion;
    const bool slope_ok = d.points >= 3 && std::abs(d.slope - gc) <= kDiffusionSlopeTol * gc;
    int gaussian = 0;
    for (const auto& row : report.rows) gaussian += row.gaussian_at_1pct ? 1 : 0;

    // single long trials: visibility should not decay
    int fitted = 0, consistent = 0;
    double mean_lambda = 0.0;
    for (int i = 0; i < 20; ++i) {
        const auto& r = recs[std::size_t(i)];
        if (r.failed) continue;
        protocol::FringeSeries series;
        series.times = r.times;
        series.signal = r.conditional_signal;
        series.params = p;
        try {
            const auto fit = protocol::fit_fringe(series, protocol::default_transient_cut(p));
            ++fitted;
            mean_lambda += fit.lambda;
            if (std::abs(fit.lambda) <= kSingleTrialSigmas * fit.lambda_stderr) ++consistent;
        } catch (const protocol::FitError&) {
            ++fitted;
        }
    }
    if (fitted > 0) mean_lambda /= fitted;
    const bool single_ok = fitted > 0 && consistent >= kSingleTrialPassFraction * fitted;
    return {slope_ok && single_ok,
            fmt("phase-variance slope %.4g +- %.2g vs gamma_c %g (tolerance %g); ", d.slope, d.slope_stderr, gc,
                kDiffusionSlopeTol) +
                fmt("%g crossings, %g Gaussian at 1%%; ", double(report.rows.size()), gaussian) +
                fmt("single trials: %g of %g consistent with lambda=0 at 2 sigma, mean lambda %.3g", consistent,
                    fitted, mean_lambda)};
}

Outcome kuramoto_sign() {
    ModelParams p;
    p.n_atoms = 200;
    p.cooperativity = kCollectiveCooperativity;
    p.delta_nu = 0.0;
    std::mt19937_64 rng(3);
    std::uniform_real_distribution<double> u(-M_PI / 2, M_PI / 2);
    semiclassical::KuramotoEnsemble start;
    start.phases.resize(p.n_atoms);
    for (auto& ph : start.phases) ph = u(rng);
    start.amplitudes = Eigen::VectorXd::Constant(p.n_atoms, 0.5);
    const double order0 = std::abs(semiclassical::order_parameter(start)) / p.n_atoms;

    struct Run {
        bool monotone = true;
        double final_order = 0.0, peak_order = 0.0, final_spread = 0.0;
    };
    const auto run = [&](double inversion) {
        auto e = start;
        e.inversion = inversion;
        Run r;
        double spread = semiclassical::phase_spread(e);
        for (int k = 0; k < 5000; ++k) {
            e = semiclassical::kuramoto_step(e, p, 1e-3);
            const double s = semiclassical::phase_spread(e);
            if (s > spread + 1e-12) r.monotone = false;
            spread = s;
            r.peak_order = std::max(r.peak_order, std::abs(semiclassical::order_parameter(e)) / p.n_atoms);
        }
        r.final_order = std::abs(semiclassical::order_parameter(e)) / p.n_atoms;
        r.final_spread = spread;
        return r;
    };
    const Run attract = run(0.5), repel = run(-0.5);
    const double spread0 = semiclassical::phase_spread(start);
    const bool ok = attract.monotone && attract.final_spread < spread0 && attract.final_order > kKuramotoOrder &&
                    repel.peak_order <= kKuramotoOrder && repel.final_order < order0 &&
                    repel.final_spread >= spread0;
    return {ok, fmt("start |O|/N %.3g spread %.3g; sz>0: |O|/N %.3g spread %.3g", order0, spread0,
                    attract.final_order, attract.final_spread) +
                    fmt("; sz<0: |O|/N %.3g spread %.3g", repel.final_order, repel.final_spread)};
}

Outcome determinism() {
    const fs::path root = fs::temp_directory_path() / ("ramsey_acceptance_" + std::to_string(::getpid()));
    fs::remove_all(root);
    fs::create_directories(root);
    const auto config = [&](const std::string& name, int threads) {
        const fs::path path = root / name;
        std::ofstream(path) << R"({"n_atoms": 6, "delta_nu": 20, "cooperativity": 1, "w": 3,
            "run": {"t_max": 2, "n_trials": 60, "base_seed": 17, "record_stride": 4, "threads": )"
                            << threads << "}}";
        return path;
    };
    std::ostringstream log;
    const int a = cli::cmd_trajectories(config("a.json", 1), std::nullopt, std::nullopt, root / "a", log);
    const int b = cli::cmd_trajectories(config("b.json", 3), std::nullopt, std::nullopt, root / "b", log);
    bool ok = a == 0 && b == 0;
    int files = 0, differing = 0;
    if (ok) {
        for (const auto& entry : fs::recursive_directory_iterator(root / "a")) {
            if (!entry.is_regular_file() || entry.path().filename() == "manifest.json") continue;
            const fs::path other = root / "b" / fs::relative(entry.path(), root / "a");
            ++files;
            if (!fs::exists(other) || cli::file_checksum(entry.path()) != cli::file_checksum(other)) ++differing;
            else {
                std::ifstream x(entry.path(), std::ios::binary), y(other, std::ios::binary);
                if (!std::equal(std::istreambuf_iterator<char>(x), {}, std::istreambuf_iterator<char>(y)))
                    ++differing;
            }
        }
    }
    fs::remove_all(root);
    ok = ok && files > 0 && differing == 0;
    return {ok, fmt("%g data files compared across 1 and 3 threads, %g differ", files, differing)};
}

struct Criterion {
    int id;
    const char* name;
    std::function<Outcome()> run;
};

}  // namespace

int main(int argc, char** argv) {
    const std::vector<Criterion> all{
        {1, "dense/Dicke oracle equivalence", oracle_equivalence},
        {2, "conventional Ramsey limit", conventional_limit},
        {3, "adiabatic elimination of the cavity", adiabatic_elimination},
        {4, "non-monotonic lambda(w)", lambda_versus_repump},
        {5, "lambda(N) trend", lambda_versus_atoms},
        {6, "semiclassical agreement", semiclassical_agreement},
        {7, "trajectory-mean consistency", trajectory_mean},
        {8, "phase diffusion", phase_diffusion},
        {9, "Kuramoto sign condition", kuramoto_sign},
        {10, "determinism", determinism},
    };
    std::set<int> selected;
    for (int i = 1; i < argc; ++i) selected.insert(std::atoi(argv[i]));

    int failed = 0;
    for (const auto& c : all) {
        if (!selected.empty() && !selected.count(c.id)) continue;
        const auto start = std::chrono::steady_clock::now();
        Outcome o;
        try {
            o = c.run();
        } catch (const std::exception& e) {
            o = {false, std::string("error: ") + e.what()};
        }
        const double secs = std::chrono::duration<double>(std::chrono::steady_clock::now() - start).count();
        if (!o.passed) ++failed;
        std::printf("%s [%d] %s: %s (%.1f s)\n", o.passed ? "PASS" : "FAIL", c.id, c.name, o.summary.c_str(), secs);
        std::fflush(stdout);
    }
    return failed == 0 ? 0 : 1;
}
