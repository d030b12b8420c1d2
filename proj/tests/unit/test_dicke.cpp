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
#include <filesystem>
#include <fstream>
#include <limits>
#include <random>

#include "doctest.h"
#include "json.hpp"
#include "ramsey/dense_oracle.hpp"
#include "ramsey/dicke.hpp"
#include "ramsey/wigner.hpp"

using namespace ramsey;
using Complex = std::complex<double>;

namespace {

/// Random permutation-invariant state: PSD weighted blocks, unit trace.
dicke::DickeDensityMatrix random_symmetric(int n, std::mt19937_64& rng) {
    std::normal_distribution<double> gauss;
    auto layout = dicke::Layout::full(n);
    Eigen::VectorXcd w(Eigen::Index(layout->size()));
    for (int tj : layout->two_js()) {
        Eigen::MatrixXcd g(tj + 1, tj + 1);
        for (Eigen::Index i = 0; i < g.size(); ++i) g.data()[i] = {gauss(rng), gauss(rng)};
        const Eigen::MatrixXcd b = g * g.adjoint();
        for (int r = 0; r <= tj; ++r)
            for (int c = 0; c <= tj; ++c) w[layout->index(tj, r, c)] = b(r, c);
    }
    dicke::DickeDensityMatrix s(layout, w);
    s.weights() /= s.trace();
    return s;
}

ModelParams fig2_like(int n) {
    ModelParams p;
    p.n_atoms = n;
    p.delta_nu = 3.0;
    p.t1 = 1.0;
    p.t2 = 1.0;
    p.cooperativity = 0.2;
    p.w = std::max(1.5, n * p.gamma_c() / 2.0);
    return p;
}

}  // namespace

TEST_CASE("degeneracies and coefficient counts") {
    CHECK(dicke::degeneracy(2, 2) == 1.0);
    CHECK(dicke::degeneracy(2, 0) == 1.0);
    CHECK(dicke::degeneracy(3, 1) == 2.0);
    CHECK(dicke::degeneracy(4, 0) == 2.0);
    CHECK(dicke::degeneracy(4, 2) == 3.0);
    // sum_j d_N(j) (2j+1) = 2^N
    for (int n : {1, 5, 10, 17}) {
        double total = 0.0;
        for (int tj = n; tj >= 0; tj -= 2) total += dicke::degeneracy(n, tj) * (tj + 1);
        CHECK(total == std::ldexp(1.0, n));
    }
    CHECK(dicke::full_coefficient_count(2) == 10);
    CHECK(dicke::full_coefficient_count(3) == 20);
    CHECK(dicke::full_coefficient_count(4) == 35);
    CHECK(dicke::full_coefficient_count(10) == 286);
    CHECK(dicke::Layout::full(10)->size() == 286);
    // banded layouts: N + 1 + 2 N ... entries for order 1 of j = N/2 etc.
    CHECK(dicke::Layout::banded(2, 0)->size() == 4);
    CHECK(dicke::Layout::banded(2, 1)->size() == 8);
}

TEST_CASE("ground state") {
    const auto g = dicke::ground_state(2);
    CHECK(g.p(2, -2, -2) == Complex(1.0));
    CHECK(std::abs(g.trace() - 1.0) < 1e-15);
    const auto e = dicke::expectations(g);
    CHECK(e.sz == doctest::Approx(-1.0));
    CHECK(std::abs(e.splus) == 0.0);
    CHECK_FALSE(e.alpha.has_value());
}

TEST_CASE("Wigner-d recursion stays orthogonal at large j") {
    const auto table = wigner_small_d_table<double>(400, 1.234);
    for (int tj : {1, 2, 57, 200, 400})
        CHECK(orthogonality_defect(table[std::size_t(tj)]) < 1e-10);
    // d^{1}(b) closed form
    const auto& d1 = wigner_small_d_table<double>(2, 0.7)[2];
    const double c = std::cos(0.7), s = std::sin(0.7);
    CHECK(d1(2, 2) == doctest::Approx((1 + c) / 2));
    CHECK(d1(2, 1) == doctest::Approx(-s / std::sqrt(2.0)));
    CHECK(d1(1, 1) == doctest::Approx(c));
    CHECK(d1(0, 2) == doctest::Approx((1 - c) / 2));
}

TEST_CASE("rotation onto the equator and full turns") {
    for (int n : {2, 3, 7}) {
        const auto eq = dicke::collective_rotation(dicke::ground_state(n), dicke::Axis::y, -M_PI / 2);
        const auto e = dicke::expectations(eq);
        CHECK(std::abs(e.sz) < 1e-12);
        CHECK(std::abs(e.splus - 0.5) < 1e-12);  // Bloch vector along +x
        if (n >= 2) CHECK(e.spsm_cross == doctest::Approx(0.25));
    }
    std::mt19937_64 rng(21);
    for (int n : {3, 4}) {
        const auto s = random_symmetric(n, rng);
        for (auto axis : {dicke::Axis::x, dicke::Axis::y}) {
            const auto r = dicke::collective_rotation(s, axis, 4 * M_PI);
            CHECK((r.weights() - s.weights()).cwiseAbs().maxCoeff() < 1e-10);
            const auto r2 = dicke::collective_rotation(s, axis, 2 * M_PI);
            CHECK((r2.weights() - s.weights()).cwiseAbs().maxCoeff() < 1e-10);
        }
    }
}

TEST_CASE("banded rotated ground state equals the restricted full rotation") {
    for (int n : {1, 4, 11}) {
        for (int order : {0, 1, 3}) {
            const auto direct = dicke::rotated_ground_state(n, order, -M_PI / 2);
            const auto full =
                dicke::collective_rotation(dicke::ground_state(n), dicke::Axis::y, -M_PI / 2).restricted(order);
            REQUIRE(direct.layout().size() == full.layout().size());
            CHECK((direct.weights() - full.weights()).cwiseAbs().maxCoeff() < 1e-14);
        }
    }
}

TEST_CASE("rotation matches the dense oracle") {
    std::mt19937_64 rng(7);
    for (int trial = 0; trial < 3; ++trial) {
        const auto s = random_symmetric(3, rng);
        const auto dense0 = dense::from_density(dense::Dims{3, 1}, dicke::to_dense(s));
        for (auto [axis, daxis] : {std::pair{dicke::Axis::x, dense::Axis::x},
                                   std::pair{dicke::Axis::y, dense::Axis::y}}) {
            const double angle = 0.37 + trial;
            const auto r = dicke::collective_rotation(s, axis, angle);
            const auto rd = dense::rotate(dense0, daxis, angle);
            CHECK((dicke::to_dense(r) - rd.density()).cwiseAbs().maxCoeff() < 1e-10);
            CHECK(r.hermiticity_defect() < 1e-12);
            CHECK(std::abs(r.trace() - 1.0) < 1e-12);
        }
    }
}

TEST_CASE("dense embedding round trip") {
    std::mt19937_64 rng(9);
    const auto s = random_symmetric(4, rng);
    const auto back = dicke::from_dense_symmetric(4, dicke::to_dense(s));
    CHECK((back.weights() - s.weights()).cwiseAbs().maxCoeff() < 1e-10);
}

TEST_CASE("expectation identities against dense two-site operators") {
    std::mt19937_64 rng(13);
    const dense::Dims dims{3, 1};
    for (int trial = 0; trial < 3; ++trial) {
        const auto s = random_symmetric(3, rng);
        const auto d = dense::from_density(dims, dicke::to_dense(s));
        const auto e = dicke::expectations(s);
        CHECK(std::abs(e.sz - dense::expect_dense(d, dense::Observable::sigma_z_single)) < 1e-12);
        CHECK(std::abs(e.splus - dense::expect_dense(d, dense::Observable::sigma_plus_single)) < 1e-12);
        CHECK(std::abs(e.jplusjminus - dense::expect_dense(d, dense::Observable::jplus_jminus)) < 1e-12);
        CHECK(std::abs(e.jplusjz - dense::expect_dense(d, dense::Observable::jplus_jz)) < 1e-12);
        const Complex pm = dense::expect_operator(d, dense::sigma_plus(0, dims) * dense::sigma_minus(2, dims));
        CHECK(std::abs(e.spsm_cross - pm) < 1e-12);
        const Complex pz = dense::expect_operator(d, dense::sigma_plus(1, dims) * dense::sigma_z(2, dims));
        CHECK(std::abs(e.spsz_cross - pz) < 1e-12);
    }
}

TEST_CASE("local decay leaves the ground state dark") {
    ModelParams p;
    p.n_atoms = 5;
    p.delta_nu = 0.0;
    p.t2 = std::numeric_limits<double>::infinity();
    const auto d = dicke::apply_generator(dicke::ground_state(5), p);
    CHECK(d.weights().cwiseAbs().maxCoeff() == 0.0);
}

TEST_CASE("generator matches the dense Liouvillian channel by channel") {
    std::mt19937_64 rng(17);
    const double inf = std::numeric_limits<double>::infinity();
    for (int n : {1, 2, 3, 4}) {
        const auto s = random_symmetric(n, rng);
        const auto d = dense::from_density(dense::Dims{n, 1}, dicke::to_dense(s));
        ModelParams base;
        base.n_atoms = n;
        base.delta_nu = 0.0;
        base.t1 = std::numeric_limits<double>::max();
        base.t2 = inf;
        std::vector<ModelParams> cases;
        ModelParams q = base;
        q.delta_nu = 1.7;
        cases.push_back(q);
        q = base;
        q.cooperativity = 0.8 * q.t1;
        cases.push_back(q);
        q = base;
        q.w = 1.1;
        cases.push_back(q);
        q = base;
        q.t1 = 0.9;
        cases.push_back(q);
        q = base;
        q.t2 = 0.6;
        cases.push_back(q);
        cases.push_back(fig2_like(n));
        for (const auto& c : cases) {
            const auto gen = dense::build_generator_atoms(c);
            const Eigen::VectorXcd dd = gen.matrix * d.amplitudes;
            const Eigen::MatrixXcd dense_rate =
                Eigen::Map<const Eigen::MatrixXcd>(dd.data(), d.dims.hilbert(), d.dims.hilbert());
            const auto rate = dicke::apply_generator(s, c);
            CHECK((dicke::to_dense(rate) - dense_rate).cwiseAbs().maxCoeff() < 1e-12);
        }
    }
}

TEST_CASE("time evolution matches the dense oracle") {
    for (int n : {2, 3, 4}) {
        const ModelParams p = fig2_like(n);
        const auto gen = dense::build_generator_atoms(p);
        auto d = dense::rotate(dense::ground_state(gen.dims), dense::Axis::y, -M_PI / 2);
        auto s = dicke::collective_rotation(dicke::ground_state(n), dicke::Axis::y, -M_PI / 2);
        dicke::Evolver ev(p, s.layout_ptr(), 1e-12);
        double worst = 0.0;
        for (int k = 0; k < 10; ++k) {
            d = dense::evolve_dense(d, gen, 0.5, 1e-12);
            ev.advance(s, 0.5);
            const auto e = dicke::expectations(s);
            worst = std::max(worst, std::abs(e.sz - dense::expect_dense(d, dense::Observable::sigma_z_single)));
            worst = std::max(worst, std::abs(e.splus - dense::expect_dense(d, dense::Observable::sigma_plus_single)));
            worst = std::max(worst, std::abs(e.jplusjminus - dense::expect_dense(d, dense::Observable::jplus_jminus)));
            CHECK(std::abs(s.trace() - 1.0) < 1e-9);
            CHECK(s.hermiticity_defect() < 1e-10);
        }
        CHECK(worst < 1e-8);
    }
}

TEST_CASE("collective-only dynamics conserve sector populations") {
    std::mt19937_64 rng(23);
    ModelParams p;
    p.n_atoms = 5;
    p.delta_nu = 2.0;
    p.t1 = std::numeric_limits<double>::max();
    p.t2 = std::numeric_limits<double>::infinity();
    p.cooperativity = 0.5 * p.t1;
    const auto s = random_symmetric(5, rng);
    const auto before = s.sector_populations();
    const auto after = dicke::evolve_dicke(s, p, 2.0, 1e-11);
    CHECK((after.sector_populations() - before).cwiseAbs().maxCoeff() < 1e-9);
    const auto rotated = dicke::collective_rotation(after, dicke::Axis::x, 0.9);
    CHECK((rotated.sector_populations() - before).cwiseAbs().maxCoeff() < 1e-9);
}

TEST_CASE("banded evolution reproduces low-order observables exactly") {
    const ModelParams p = fig2_like(12);
    const auto full0 = dicke::collective_rotation(dicke::ground_state(12), dicke::Axis::y, -M_PI / 2);
    const auto band = dicke::evolve_dicke(full0.restricted(1), p, 1.5, 1e-11);
    const auto full = dicke::evolve_dicke(full0, p, 1.5, 1e-11);
    const auto eb = dicke::expectations(band);
    const auto ef = dicke::expectations(full);
    CHECK(std::abs(eb.sz - ef.sz) < 1e-9);
    CHECK(std::abs(eb.splus - ef.splus) < 1e-9);
    CHECK(std::abs(eb.spsm_cross - ef.spsm_cross) < 1e-9);
    CHECK(std::abs(eb.spsz_cross - ef.spsz_cross) < 1e-9);
    CHECK_THROWS_AS(dicke::collective_rotation(band, dicke::Axis::x, 1.0), std::invalid_argument);
}

TEST_CASE("zero rates and zero detuning keep the state") {
    ModelParams p;
    p.n_atoms = 6;
    p.delta_nu = 0.0;
    p.t1 = std::numeric_limits<double>::max();
    p.t2 = std::numeric_limits<double>::infinity();
    std::mt19937_64 rng(29);
    const auto s = random_symmetric(6, rng);
    const auto out = dicke::evolve_dicke(s, p, 5.0, 1e-10);
    CHECK((out.weights() - s.weights()).cwiseAbs().maxCoeff() < 1e-12);
}

TEST_CASE("tolerance halving converges") {
    const ModelParams p = fig2_like(20);
    const auto s0 = dicke::collective_rotation(dicke::ground_state(20), dicke::Axis::y, -M_PI / 2).restricted(1);
    for (double tol : {1e-6, 1e-8}) {
        const double a = dicke::expectations(dicke::evolve_dicke(s0, p, 2.0, tol)).sz;
        const double b = dicke::expectations(dicke::evolve_dicke(s0, p, 2.0, tol / 2)).sz;
        CHECK(std::abs(a - b) < 10 * tol);
    }
}

TEST_CASE("JSON snapshot export") {
    const auto path = std::filesystem::temp_directory_path() / "ramsey_dicke_snapshot.json";
    dicke::export_json(dicke::ground_state(3), path);
    std::ifstream is(path);
    const auto doc = nlohmann::json::parse(is);
    CHECK(doc["n_atoms"] == 3);
    CHECK(doc["blocks"].size() == 2);
    CHECK(doc["blocks"][0]["j"] == 1.5);
    CHECK(doc["blocks"][0]["matrix_real"][0][0] == 1.0);
    CHECK(doc["blocks"][1]["degeneracy"] == 2.0);
    std::filesystem::remove(path);
}
