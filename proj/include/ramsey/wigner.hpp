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

#include <cmath>
#include <stdexcept>
#include <vector>

#include <Eigen/Dense>

namespace ramsey {

template <class Scalar>
using DynamicMatrix = Eigen::Matrix<Scalar, Eigen::Dynamic, Eigen::Dynamic>;

/// Small-d matrices d^j_{m'm}(theta) = <j m'| exp(-i theta J_y) |j m> for every
/// spin j = 0, 1/2, 1, ..., two_j_max / 2, indexed by 2j.
///
/// Built by coupling one spin-1/2 at a time:
///   d^j_{m'm} = sum_{s',s} C(j,m',s') C(j,m,s) d^{j-1/2}_{m'-s',m-s} d^{1/2}_{s's}
/// with C(j,m,+1/2) = sqrt((j+m)/2j), C(j,m,-1/2) = sqrt((j-m)/2j). Every term
/// is bounded, so there is no factorial overflow at large j. Row/column k
/// corresponds to m = -j + k.
template <class Scalar>
std::vector<DynamicMatrix<Scalar>> wigner_small_d_table(int two_j_max, Scalar theta) {
    if (two_j_max < 0) throw std::invalid_argument("two_j_max must be >= 0");
    using std::cos;
    using std::sin;
    using std::sqrt;
    std::vector<DynamicMatrix<Scalar>> table(std::size_t(two_j_max) + 1);
    table[0] = DynamicMatrix<Scalar>::Ones(1, 1);
    const Scalar c = cos(theta / Scalar(2));
    const Scalar s = sin(theta / Scalar(2));
    // half[s'][s], index 0 <-> -1/2, 1 <-> +1/2
    const Scalar half[2][2] = {{c, s}, {-s, c}};

    for (int tj = 1; tj <= two_j_max; ++tj) {
        const DynamicMatrix<Scalar>& prev = table[std::size_t(tj) - 1];
        DynamicMatrix<Scalar> d = DynamicMatrix<Scalar>::Zero(tj + 1, tj + 1);
        // coupling coefficient for m = -j + k and spin-half projection sgn/2
        const auto coeff = [tj](int k, int sgn) -> Scalar {
            const int two_m = 2 * k - tj;
            return sqrt(Scalar(tj + sgn * two_m) / Scalar(2 * tj));
        };
        for (int r = 0; r <= tj; ++r) {
            for (int col = 0; col <= tj; ++col) {
                Scalar acc(0);
                for (int sp = 0; sp < 2; ++sp) {
                    // m' - s' in the previous spin: index r - sp (shift by one per +1/2)
                    const int pr = r - sp;
                    if (pr < 0 || pr > tj - 1) continue;
                    const Scalar cr = coeff(r, sp ? 1 : -1);
                    for (int sc = 0; sc < 2; ++sc) {
                        const int pc = col - sc;
                        if (pc < 0 || pc > tj - 1) continue;
                        acc += cr * coeff(col, sc ? 1 : -1) * prev(pr, pc) * half[sp][sc];
                    }
                }
                d(r, col) = acc;
            }
        }
        table[std::size_t(tj)] = std::move(d);
    }
    return table;
}

/// Largest |(d d^T - I)_{ab}|; the recursion is expected to stay below 1e-10.
template <class Scalar>
Scalar orthogonality_defect(const DynamicMatrix<Scalar>& d) {
    return (d * d.transpose() - DynamicMatrix<Scalar>::Identity(d.rows(), d.cols()))
        .cwiseAbs()
        .maxCoeff();
}

}  // namespace ramsey
