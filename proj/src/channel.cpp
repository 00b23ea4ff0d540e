// SPDX-License-Identifier: Apache-2.0
//
// abtrack: auxiliary-beam-pair angle tracking for mobile mmWave arrays
// Copyright (C) 2026 abtrack contributors
//
// Licensed under the Apache License, Version 2.0 (the "License");
// you may not use this file except in compliance with the License.
// You may obtain a copy of the License at
// http://www.apache.org/licenses/LICENSE-2.0
//
// Unless required by applicable law or agreed to in writing, software
// distributed under the License is distributed on an "AS IS" BASIS,
// WITHOUT WARRANTIES OR CONDITIONS OF ANY KIND, either express or implied.
// See the License for the specific language governing permissions and
// limitations under the License.
// ------------------------------------------------------------------------

#include "abtrack/channel.hpp"

#include <algorithm>
#include <cmath>
#include <cstdio>
#include <fstream>
#include <limits>
#include <numbers>
#include <sstream>
#include <stdexcept>

namespace abt {

double EvolutionParams::rho_doppler() const {
    return bessel_j0(2.0 * std::numbers::pi * f_d_hz * symbol_duration_s);
}

double pulse_value(const PulseShape &p, double t, double t_s) {
    if (t_s <= 0.0) throw std::invalid_argument("pulse_value: nonpositive symbol period");
    const double x = t / t_s;
    if (p.kind == PulseShape::Kind::Ideal) return std::abs(x) < 1e-12 ? 1.0 : 0.0;
    const double a = p.rolloff;
    auto sinc = [](double v) {
        if (std::abs(v) < 1e-12) return 1.0;
        const double pv = std::numbers::pi * v;
        return std::sin(pv) / pv;
    };
    if (a <= 0.0) return sinc(x);
    const double den = 1.0 - 4.0 * a * a * x * x;
    if (std::abs(den) < 1e-9) return (std::numbers::pi / 4.0) * sinc(1.0 / (2.0 * a));
    return sinc(x) * std::cos(std::numbers::pi * a * x) / den;
}

ChannelState generate_initial(const InitialChannelConfig &cfg, const ArrayGeometry &tx,
                              const ArrayGeometry &rx, const EvolutionParams &evo,
                              std::uint64_t seed) {
    if (cfg.n_paths == 0) throw std::invalid_argument("generate_initial: zero paths");
    if (cfg.mu_max < cfg.mu_min || cfg.phi_max < cfg.phi_min)
        throw std::invalid_argument("generate_initial: empty angle range");
    if (!cfg.power_profile.empty() && cfg.power_profile.size() != cfg.n_paths)
        throw std::invalid_argument("generate_initial: power profile length mismatch");

    RngStream rng(seed, "channel-init");
    ChannelState st;
    st.evo = evo;
    st.tx = tx;
    st.rx = rx;
    st.paths.resize(cfg.n_paths);

    std::vector<double> accepted_psi;
    constexpr int max_attempts = 1000;
    for (std::size_t r = 0; r < cfg.n_paths; ++r) {
        PathState &p = st.paths[r];
        bool placed = false;
        for (int attempt = 0; attempt < max_attempts && !placed; ++attempt) {
            const double mu = cfg.mu_min + (cfg.mu_max - cfg.mu_min) * rng.uniform();
            const double phi = cfg.phi_min + (cfg.phi_max - cfg.phi_min) * rng.uniform();
            const SpatialPair sp = angles_to_spatial(mu, phi, tx);
            bool ok = true;
            for (double q : accepted_psi) {
                if (std::abs(sp.psi - q) < cfg.min_psi_separation) {
                    ok = false;
                    break;
                }
            }
            if (!ok) continue;
            p.mu = mu;
            p.phi = phi;
            p.theta = sp.theta;
            p.psi = sp.psi;
            accepted_psi.push_back(sp.psi);
            placed = true;
        }
        if (!placed)
            throw std::runtime_error(
                "generate_initial: azimuth separation floor infeasible within bounded retries");
        const double rx_phys = -0.5 * std::numbers::pi + std::numbers::pi * rng.uniform();
        p.nu = 2.0 * std::numbers::pi * rx.spacing_y * std::sin(rx_phys);
        p.delay_s = cfg.delay_spread_s > 0.0 ? cfg.delay_spread_s * rng.uniform() : 0.0;
        const double var =
            cfg.power_profile.empty() ? std::exp(-static_cast<double>(r)) : cfg.power_profile[r];
        p.gain = std::sqrt(var) * rng.cnormal();
    }

    double total = 0.0;
    for (const PathState &p : st.paths) total += std::norm(p.gain);
    if (total <= 0.0) throw std::runtime_error("generate_initial: degenerate zero-power draw");
    const double scale = 1.0 / std::sqrt(total);
    for (PathState &p : st.paths) p.gain *= scale;

    std::stable_sort(st.paths.begin(), st.paths.end(),
                     [](const PathState &a, const PathState &b) {
                         return std::norm(a.gain) > std::norm(b.gain);
                     });
    return st;
}

double motion_step_ring(double spatial, double drift_rad, double jitter_std, double span,
                        RngStream &rng) {
    const double ratio = std::clamp(spatial / span, -1.0, 1.0);
    double omega = std::asin(ratio);
    omega += drift_rad + jitter_std * rng.normal();
    return span * std::sin(omega);
}

void evolve(ChannelState &state, RngStream &fading, RngStream &motion) {
    const EvolutionParams &e = state.evo;
    const double rho = e.rho_doppler();
    const double s = std::sqrt(std::max(0.0, 1.0 - rho * rho));
    const double span_az = 2.0 * std::numbers::pi * state.tx.spacing_y;
    const double span_el = 2.0 * std::numbers::pi * state.tx.spacing_x;
    const double span_rx = 2.0 * std::numbers::pi * state.rx.spacing_y;
    if (e.distance_m <= 0.0) throw std::invalid_argument("evolve: nonpositive ring distance");
    const double drift_az = (e.v_az_kmh / 3.6) / e.distance_m * e.symbol_duration_s;
    const double drift_el = (e.v_el_kmh / 3.6) / e.distance_m * e.symbol_duration_s;
    const double jitter = std::sqrt(e.sigma2_w);

    for (PathState &p : state.paths) {
        p.gain = rho * p.gain + s * fading.cnormal();

        switch (e.motion) {
        case MotionModel::GaussMarkovWalk: {
            if (!std::isfinite(p.mu) || !std::isfinite(p.phi))
                throw std::domain_error(
                    "evolve: physical angles unavailable for the configured walk");
            p.mu += std::sqrt(e.sigma2_mu) * motion.normal();
            p.phi += std::sqrt(e.sigma2_phi) * motion.normal();
            const SpatialPair sp = angles_to_spatial(p.mu, p.phi, state.tx);
            p.theta = sp.theta;
            p.psi = sp.psi;
            break;
        }
        case MotionModel::RingAzimuth:
            p.psi = motion_step_ring(p.psi, drift_az, jitter, span_az, motion);
            break;
        case MotionModel::RingAzimuthElevation:
            p.psi = motion_step_ring(p.psi, drift_az, jitter, span_az, motion);
            p.theta = motion_step_ring(p.theta, drift_el, jitter, span_el, motion);
            break;
        }

        if (e.walk_aoa) p.nu = motion_step_ring(p.nu, 0.0, jitter, span_rx, motion);
    }
    ++state.slot;
}

cxd path_rho(const PathState &p, std::size_t k, const OfdmConfig &cfg, const PulseShape &pulse) {
    if (cfg.n_fft == 0) throw std::invalid_argument("path_rho: empty grid");
    const double t_s = 1.0 / (static_cast<double>(cfg.n_fft) * cfg.subcarrier_spacing_hz);
    cxd s = 0.0;
    const double w = -2.0 * std::numbers::pi * static_cast<double>(k) / static_cast<double>(cfg.n_fft);
    for (std::size_t d = 0; d < cfg.cp_len; ++d) {
        const double amp = pulse_value(pulse, static_cast<double>(d) * t_s - p.delay_s, t_s);
        if (amp == 0.0) continue;
        const double ph = w * static_cast<double>(d);
        s += amp * cxd(std::cos(ph), std::sin(ph));
    }
    return s;
}

CMat freq_response(const ChannelState &state, std::size_t k, const OfdmConfig &cfg,
                   const PulseShape &pulse) {
    const std::size_t m = state.rx.total();
    const std::size_t n = state.tx.total();
    CMat h(m, n);
    for (const PathState &p : state.paths) {
        const cxd grho = p.gain * path_rho(p, k, cfg, pulse);
        const cvec ar = steering_upa(state.rx, 0.0, p.nu);
        const cvec at = steering_upa(state.tx, p.theta, p.psi);
        for (std::size_t i = 0; i < m; ++i) {
            const cxd left = grho * ar[i];
            for (std::size_t j = 0; j < n; ++j) h(i, j) += left * std::conj(at[j]);
        }
    }
    return h;
}

cvec path_coupling(const ChannelState &state, const cvec &combiner, const cvec &beam) {
    if (combiner.size() != state.rx.total() || beam.size() != state.tx.total())
        throw std::invalid_argument("path_coupling: dimension mismatch");
    cvec out(state.paths.size());
    for (std::size_t r = 0; r < state.paths.size(); ++r) {
        const PathState &p = state.paths[r];
        const cvec ar = steering_upa(state.rx, 0.0, p.nu);
        const cvec at = steering_upa(state.tx, p.theta, p.psi);
        out[r] = p.gain * vdot(combiner, ar) * vdot(at, beam);
    }
    return out;
}

void save_paths_csv(const std::string &path, const ChannelState &state) {
    std::ofstream os(path);
    if (!os) throw std::runtime_error("save_paths_csv: cannot open " + path);
    os << "gain_re,gain_im,delay_s,theta_rad,psi_rad,nu_rad\n";
    char buf[256];
    for (const PathState &p : state.paths) {
        std::snprintf(buf, sizeof(buf), "%.17g,%.17g,%.17g,%.17g,%.17g,%.17g\n", p.gain.real(),
                      p.gain.imag(), p.delay_s, p.theta, p.psi, p.nu);
        os << buf;
    }
}

ChannelState load_paths_csv(const std::string &path, const ArrayGeometry &tx,
                            const ArrayGeometry &rx, const EvolutionParams &evo) {
    std::ifstream is(path);
    if (!is) throw std::runtime_error("load_paths_csv: cannot open " + path);
    std::string line;
    if (!std::getline(is, line) || line != "gain_re,gain_im,delay_s,theta_rad,psi_rad,nu_rad")
        throw std::runtime_error("load_paths_csv: unexpected header in " + path);
    ChannelState st;
    st.evo = evo;
    st.tx = tx;
    st.rx = rx;
    while (std::getline(is, line)) {
        if (line.empty()) continue;
        std::stringstream ss(line);
        std::string field;
        double v[6];
        for (int i = 0; i < 6; ++i) {
            if (!std::getline(ss, field, ','))
                throw std::runtime_error("load_paths_csv: short row in " + path);
            v[i] = std::stod(field);
        }
        PathState p;
        p.gain = cxd(v[0], v[1]);
        p.delay_s = v[2];
        p.theta = v[3];
        p.psi = v[4];
        p.nu = v[5];
        try {
            const PhysicalPair pp = spatial_to_angles(p.theta, p.psi, tx);
            p.mu = pp.mu;
            p.phi = pp.phi;
        } catch (const std::domain_error &) {
            p.mu = std::numeric_limits<double>::quiet_NaN();
            p.phi = std::numeric_limits<double>::quiet_NaN();
        }
        st.paths.push_back(p);
    }
    if (st.paths.empty()) throw std::runtime_error("load_paths_csv: no paths in " + path);
    return st;
}

} // namespace abt
