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

#pragma once

#include "abtrack/arrays.hpp"
#include "abtrack/numerics.hpp"
#include "abtrack/pilots.hpp"
#include "abtrack/rng.hpp"

#include <cstdint>
#include <string>
#include <vector>

namespace abt {

struct PathState {
    cxd gain;
    double delay_s = 0.0;
    double theta = 0.0;  // transmit elevation-axis spatial frequency
    double psi = 0.0;    // transmit azimuth-axis spatial frequency
    double nu = 0.0;     // receive spatial frequency
    double mu = 0.0;     // physical polar angle backing (theta, psi)
    double phi = 0.0;    // physical azimuth angle backing (theta, psi)
};

// GaussMarkovWalk: independent Gaussian random walks on the physical (mu,
// phi) of each path, mapped to spatial frequencies every slot.
// RingAzimuth: deterministic ring drift (v / d) T_s plus Gaussian jitter on
// the physical azimuth angle; elevation frozen.
// RingAzimuthElevation: the same on both axes with separate velocities.
enum class MotionModel { GaussMarkovWalk, RingAzimuth, RingAzimuthElevation };

struct EvolutionParams {
    double f_d_hz = 0.0;  // maximum Doppler shift driving the gain process
    double symbol_duration_s = 3.7e-6;

    MotionModel motion = MotionModel::GaussMarkovWalk;
    double sigma2_mu = 0.0;   // rad^2 per slot (GaussMarkovWalk)
    double sigma2_phi = 0.0;  // rad^2 per slot (GaussMarkovWalk)

    double v_az_kmh = 0.0;  // ring models
    double v_el_kmh = 0.0;
    double distance_m = 100.0;
    double sigma2_w = 0.0;  // ring jitter variance, rad^2 per slot

    bool walk_aoa = false;  // also jitter the receive-side angle with sigma2_w

    // Gain autocorrelation between adjacent slots, J0(2 pi f_D T_s).
    double rho_doppler() const;
};

struct ChannelState {
    std::vector<PathState> paths;
    std::uint64_t slot = 0;
    EvolutionParams evo;
    ArrayGeometry tx;
    ArrayGeometry rx;
};

struct PulseShape {
    enum class Kind { Ideal, RaisedCosine } kind = Kind::Ideal;
    double rolloff = 0.25;
};

// Pulse amplitude at time t for symbol period t_s. The ideal pulse is 1 at
// t = 0 and 0 at every other sampling instant; the raised cosine handles its
// removable singularity at |t| = t_s / (2 rolloff).
double pulse_value(const PulseShape &p, double t, double t_s);

struct InitialChannelConfig {
    std::size_t n_paths = 1;
    double mu_min = 0.2, mu_max = 1.2;        // physical polar range, rad
    double phi_min = -1.2, phi_max = 1.2;     // physical azimuth range, rad
    double delay_spread_s = 0.0;              // delays uniform in [0, spread)
    double min_psi_separation = 0.0;          // pairwise |psi_i - psi_j| floor
    std::vector<double> power_profile;        // per-path variances; empty =
                                              // exponential decay exp(-r)
};

// Draws path angles, delays, and gains from the "channel-init" stream of the
// given seed. Gains are scaled so the total power sum |g_r|^2 is exactly 1,
// then paths are sorted by |g| descending. Throws std::runtime_error when
// the azimuth separation floor cannot be met within bounded retries.
ChannelState generate_initial(const InitialChannelConfig &cfg, const ArrayGeometry &tx,
                              const ArrayGeometry &rx, const EvolutionParams &evo,
                              std::uint64_t seed);

// One-slot update. Path gains follow the first-order Gauss-Markov recursion
// g <- rho g + sqrt(1 - rho^2) b with b standard complex normal from the
// fading stream; angles move per the configured motion model using the
// motion stream. Delays and path count are preserved.
void evolve(ChannelState &state, RngStream &fading, RngStream &motion);

// One ring-model step on a single axis: the physical angle asin(spatial /
// span) advances by drift + jitter and is mapped back, span = 2 pi spacing.
double motion_step_ring(double spatial, double drift_rad, double jitter_std, double span,
                        RngStream &rng);

// rho_r[k] = sum_{d=0}^{cp_len-1} p(d T_s' - tau_r) e^{-j 2 pi k d / N} with
// T_s' = 1 / (N delta_f), the per-path frequency-domain delay signature.
cxd path_rho(const PathState &p, std::size_t k, const OfdmConfig &cfg, const PulseShape &pulse);

// H[k] = sum_r g_r rho_r[k] a_r(nu_r) a_t(theta_r, psi_r)^H, rx.total() by
// tx.total().
CMat freq_response(const ChannelState &state, std::size_t k, const OfdmConfig &cfg,
                   const PulseShape &pulse);

// The per-path scalars g_r (w^H a_r(nu_r)) (a_t(theta_r, psi_r)^H f) that
// reduce w^H H[k] f to sum_r coupling_r rho_r[k].
cvec path_coupling(const ChannelState &state, const cvec &combiner, const cvec &beam);

// CSV columns: gain_re,gain_im,delay_s,theta_rad,psi_rad,nu_rad.
ChannelState load_paths_csv(const std::string &path, const ArrayGeometry &tx,
                            const ArrayGeometry &rx, const EvolutionParams &evo);
void save_paths_csv(const std::string &path, const ChannelState &state);

} // namespace abt
