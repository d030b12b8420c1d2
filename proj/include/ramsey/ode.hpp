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

#include <algorithm>
#include <cmath>
#include <cstdint>
#include <sstream>

#include <Eigen/Core>

#include "ramsey/params.hpp"

namespace ramsey {

struct IntegratorStats {
    std::int64_t accepted = 0;
    std::int64_t rejected = 0;
    std::int64_t rhs_evaluations = 0;
};

/// Dormand-Prince 5(4) with embedded error control.
///
/// Works on any Eigen vector type. The local error of each accepted step
/// satisfies |err_i| <= tol * (1 + max(|y_i|, |y_new_i|)) componentwise.
/// The rhs is called as f(y, dydt) and must fully overwrite dydt.
template <class Vector>
class Dopri5 {
public:
    explicit Dopri5(double tol, double initial_step = 0.0) : tol_(tol), h_(initial_step) {
        if (!(tol > 0.0)) throw ConfigError("integrator tolerance must be > 0");
    }

    template <class Rhs>
    void advance(Rhs&& f, Vector& y, double& t, double t_end) {
        if (t_end <= t) return;
        resize_like(y);
        f(y, k1_);
        ++stats_.rhs_evaluations;
        if (h_ <= 0.0) h_ = initial_step(y, t_end - t);

        while (t < t_end) {
            bool last = false;
            double h = h_;
            if (t + h >= t_end) {
                h = t_end - t;
                last = true;
            }
            if (h < 1e-14 * std::max(1.0, std::abs(t))) {
                std::ostringstream os;
                os << "step size underflow at t=" << t;
                throw SolverError(os.str(), t);
            }

            tmp_ = y + h * (a21 * k1_);
            f(tmp_, k2_);
            tmp_ = y + h * (a31 * k1_ + a32 * k2_);
            f(tmp_, k3_);
            tmp_ = y + h * (a41 * k1_ + a42 * k2_ + a43 * k3_);
            f(tmp_, k4_);
            tmp_ = y + h * (a51 * k1_ + a52 * k2_ + a53 * k3_ + a54 * k4_);
            f(tmp_, k5_);
            tmp_ = y + h * (a61 * k1_ + a62 * k2_ + a63 * k3_ + a64 * k4_ + a65 * k5_);
            f(tmp_, k6_);
            ynew_ = y + h * (b1 * k1_ + b3 * k3_ + b4 * k4_ + b5 * k5_ + b6 * k6_);
            f(ynew_, k7_);
            stats_.rhs_evaluations += 6;

            err_ = h * (e1 * k1_ + e3 * k3_ + e4 * k4_ + e5 * k5_ + e6 * k6_ + e7 * k7_);
            double err = 0.0;
            for (Eigen::Index i = 0; i < y.size(); ++i) {
                const double scale =
                    tol_ * (1.0 + std::max(std::abs(y[i]), std::abs(ynew_[i])));
                err = std::max(err, std::abs(err_[i]) / scale);
            }
            if (!std::isfinite(err)) {
                ++stats_.rejected;
                h_ = 0.2 * h;
                continue;
            }

            const double factor =
                err == 0.0 ? 5.0 : std::clamp(0.9 * std::pow(err, -0.2), 0.2, 5.0);
            if (err <= 1.0) {
                ++stats_.accepted;
                t = last ? t_end : t + h;
                y.swap(ynew_);
                k1_.swap(k7_);
                // A shortened final step says nothing about the natural step size.
                if (!last) h_ = h * factor;
                else h_ = std::max(h_, h * factor);
            } else {
                ++stats_.rejected;
                h_ = h * std::min(1.0, factor);
            }
        }
    }

    const IntegratorStats& stats() const { return stats_; }
    double step_size() const { return h_; }

private:
    void resize_like(const Vector& y) {
        for (Vector* v : {&k1_, &k2_, &k3_, &k4_, &k5_, &k6_, &k7_, &tmp_, &ynew_, &err_})
            v->resize(y.size());
    }

    double initial_step(const Vector& y, double span) const {
        const double d0 = y.cwiseAbs().maxCoeff();
        const double d1 = k1_.cwiseAbs().maxCoeff();
        double h = (d0 < 1e-5 || d1 < 1e-5) ? 1e-6 : 0.01 * d0 / d1;
        return std::min({h, span, 1e-2});
    }

    static constexpr double a21 = 1.0 / 5.0;
    static constexpr double a31 = 3.0 / 40.0, a32 = 9.0 / 40.0;
    static constexpr double a41 = 44.0 / 45.0, a42 = -56.0 / 15.0, a43 = 32.0 / 9.0;
    static constexpr double a51 = 19372.0 / 6561.0, a52 = -25360.0 / 2187.0,
                            a53 = 64448.0 / 6561.0, a54 = -212.0 / 729.0;
    static constexpr double a61 = 9017.0 / 3168.0, a62 = -355.0 / 33.0,
                            a63 = 46732.0 / 5247.0, a64 = 49.0 / 176.0,
                            a65 = -5103.0 / 18656.0;
    static constexpr double b1 = 35.0 / 384.0, b3 = 500.0 / 1113.0, b4 = 125.0 / 192.0,
                            b5 = -2187.0 / 6784.0, b6 = 11.0 / 84.0;
    static constexpr double e1 = 71.0 / 57600.0, e3 = -71.0 / 16695.0, e4 = 71.0 / 1920.0,
                            e5 = -17253.0 / 339200.0, e6 = 22.0 / 525.0, e7 = -1.0 / 40.0;

    double tol_;
    double h_;
    IntegratorStats stats_;
    Vector k1_, k2_, k3_, k4_, k5_, k6_, k7_, tmp_, ynew_, err_;
};

}  // namespace ramsey
