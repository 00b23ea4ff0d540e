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
#include "abtrack/channel.hpp"
#include "abtrack/numerics.hpp"
#include "abtrack/pilots.hpp"
#include "abtrack/rng.hpp"

#include <vector>

namespace abt {

enum class BeamAxis { Azimuth, Elevation };

// Two beams offset symmetrically by +-delta around a common boresight on the
// active axis, each carrying its own pilot root.
struct AuxiliaryBeamPair {
    double eta_el = 0.0;
    double eta_az = 0.0;
    double delta = 0.0;
    BeamAxis axis = BeamAxis::Azimuth;
    cvec beam_minus;  // boresight - delta on the active axis
    cvec beam_plus;   // boresight + delta
    unsigned root0 = 25;
    unsigned root1 = 34;
};

// The offset must be 2 l pi / n_axis for an integer l in [1, n_axis / 4];
// that keeps each auxiliary beam on the DFT grid relative to the boresight.
bool valid_pair_offset(double delta, std::size_t n_axis);

// Builds the pair beams; an optional per-element calibration diagonal is
// folded into both beams. Throws std::invalid_argument for an invalid delta.
AuxiliaryBeamPair make_beam_pair(const ArrayGeometry &tx, double eta_el, double eta_az,
                                 double delta, BeamAxis axis, const cvec *calibration = nullptr,
                                 unsigned root0 = 25, unsigned root1 = 34);

struct StrengthSample {
    double chi_minus = 0.0;
    double chi_plus = 0.0;
    cxd lambda_minus;
    cxd lambda_plus;
};

// Despreads the two pilot roots from one received symbol and squares the
// correlator outputs.
StrengthSample received_strengths(const cvec &y, const ZcSequence &s0, const ZcSequence &s1);

// (chi_minus - chi_plus) / (chi_minus + chi_plus). Throws std::domain_error
// when both strengths are zero.
double ratio_metric(double chi_minus, double chi_plus);

// Noiseless single-path value of the ratio metric at offset x = psi - eta:
// -sin(x) sin(delta) / (1 - cos(x) cos(delta)). Equals +1 at x = -delta, -1
// at x = +delta, and is strictly decreasing across (-delta, delta).
double ratio_metric_ideal(double x, double delta);

// Closed-form inverse of the ratio metric on (eta - delta, eta + delta).
// zeta is clipped to +-(1 - 1e-12); values beyond |1| + 1e-9 throw
// std::domain_error.
double invert_ratio_metric(double zeta, double eta, double delta);

// Pairs for the n_r strongest coarse beams, strongest first; equal powers
// resolve to the lower beam index. Throws std::invalid_argument when n_r
// exceeds the codebook size.
std::vector<AuxiliaryBeamPair> select_pairs(const std::vector<double> &powers, std::size_t n_r,
                                            const std::vector<double> &boresights_az, double delta,
                                            const ArrayGeometry &tx, double eta_el = 0.0,
                                            const cvec *calibration = nullptr);

// How pilot measurements are synthesized.
//   Orthogonal:   the two correlator outputs see no cross-beam leakage; noise
//                 is averaged over pilot_len samples.
//   ZcFullband:   both roots share every subcarrier of a fullband grid.
//   ZcNarrowband: both roots share the 63 centered pilot subcarriers of a
//                 512-point grid.
enum class PilotMode { Orthogonal, ZcFullband, ZcNarrowband };

struct PilotSetup {
    PilotMode mode = PilotMode::Orthogonal;
    OfdmConfig ofdm;
    ZcSequence s0, s1;
    PulseShape pulse;
    std::size_t pilot_len = 63;  // despreading gain of the Orthogonal mode
};

PilotSetup make_pilot_setup(PilotMode mode, unsigned root0 = 25, unsigned root1 = 34,
                            PulseShape pulse = {});

// One pilot transmission through the channel: per-subcarrier combining,
// additive noise of the given variance per receive sample, despreading of
// both roots. An optional impairment diagonal distorts the radiated beams.
StrengthSample probe_pair(const ChannelState &ch, const AuxiliaryBeamPair &pair,
                          const cvec &combiner, const PilotSetup &pilots, double noise_var,
                          RngStream &noise, const ImpairmentModel *impairment = nullptr);

// Despread power of a single beam probed the same way.
double probe_beam_power(const ChannelState &ch, const cvec &beam, const cvec &combiner,
                        const PilotSetup &pilots, double noise_var, RngStream &noise,
                        const ImpairmentModel *impairment = nullptr);

} // namespace abt
