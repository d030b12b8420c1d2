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

#include "ramsey/params.hpp"

#include <cmath>
#include <limits>

namespace ramsey {

void ModelParams::validate() const {
    if (n_atoms < 1) throw ConfigError("n_atoms must be >= 1");
    if (!(t1 > 0.0)) throw ConfigError("t1 must be > 0");
    if (!(t2 > 0.0)) throw ConfigError("t2 must be > 0");
    if (!(w >= 0.0) || !std::isfinite(w)) throw ConfigError("w must be finite and >= 0");
    if (!(cooperativity >= 0.0) || !std::isfinite(cooperativity))
        throw ConfigError("cooperativity must be finite and >= 0");
    if (!std::isfinite(delta_nu)) throw ConfigError("delta_nu must be finite");
    if (!std::isfinite(t1)) throw ConfigError("t1 must be finite");
    if (kappa && !(*kappa > 0.0)) throw ConfigError("kappa must be > 0");
    if (g && !(*g >= 0.0)) throw ConfigError("g must be >= 0");
    if (n_photon_max && *n_photon_max < 1) throw ConfigError("n_photon_max must be >= 1");
}

void ModelParams::validate_cavity() const {
    validate();
    if (!g) throw ConfigError("cavity model requires g");
    if (!kappa) throw ConfigError("cavity model requires kappa");
    if (!n_photon_max) throw ConfigError("cavity model requires n_photon_max");
}

Rates derive_rates(const ModelParams& params) {
    if (!(params.t1 > 0.0) || !(params.t2 > 0.0))
        throw ConfigError("t1 and t2 must be positive");
    Rates r;
    r.gamma_c = params.cooperativity / params.t1;
    r.gamma_s = 0.5 * (1.0 / params.t1 + 1.0 / params.t2);
    r.gamma_t = 2.0 * r.gamma_s + params.w + r.gamma_c;
    return r;
}

RegimeReport validate_regime(const ModelParams& params) {
    const Rates r = derive_rates(params);
    RegimeReport rep;
    if (params.g && params.kappa) {
        const double ratio = std::sqrt(double(params.n_atoms)) * *params.g / *params.kappa;
        rep.vacuum_rabi_over_kappa = ratio;
        rep.bad_cavity = ratio < 0.1;
    }
    rep.w_over_gamma_s = params.w / r.gamma_s;
    rep.gamma_s_over_gamma_c = r.gamma_c > 0.0 ? r.gamma_s / r.gamma_c
                                               : std::numeric_limits<double>::infinity();
    rep.synchronizing = params.w > r.gamma_s && r.gamma_s > r.gamma_c;
    return rep;
}

}  // namespace ramsey
