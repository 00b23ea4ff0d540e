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

#include "abtrack/numerics.hpp"

#include <cstdint>
#include <vector>

namespace abt {

enum class ArrayKind { ULA, UPA };

// Half-wavelength spaced arrays by default. A UPA factors into an elevation
// axis of n_x elements and an azimuth axis of n_y elements; a ULA is stored
// with n_x = 1 and its element count in n_y.
struct ArrayGeometry {
    ArrayKind kind = ArrayKind::UPA;
    std::size_t n_x = 1;
    std::size_t n_y = 16;
    double spacing_x = 0.5;  // wavelengths
    double spacing_y = 0.5;

    std::size_t total() const { return n_x * n_y; }
};

ArrayGeometry make_ula(std::size_t m_tot, double spacing = 0.5);
ArrayGeometry make_upa(std::size_t n_x, std::size_t n_y, double spacing_x = 0.5,
                       double spacing_y = 0.5);

// (1/sqrt(M)) [1, e^{j nu}, ..., e^{j (M-1) nu}] for spatial frequency nu.
cvec steering_ula(const ArrayGeometry &g, double nu);

// Kronecker product of the elevation factor at theta and the azimuth factor
// at psi; element (i_x * n_y + i_y) carries phase i_x theta + i_y psi.
// Unit norm.
cvec steering_upa(const ArrayGeometry &g, double theta, double psi);

struct SpatialPair {
    double theta = 0.0;  // elevation-axis spatial frequency
    double psi = 0.0;    // azimuth-axis spatial frequency
};

struct PhysicalPair {
    double mu = 0.0;   // polar angle, (0, pi/2]
    double phi = 0.0;  // azimuth angle, (-pi/2, pi/2)
};

// theta = 2 pi s_x sin(mu) cos(phi), psi = 2 pi s_y sin(mu) sin(phi).
SpatialPair angles_to_spatial(double mu, double phi, const ArrayGeometry &g);

// Inverse of angles_to_spatial on the principal sector; throws
// std::domain_error for spatial frequencies with no preimage there.
PhysicalPair spatial_to_angles(double theta, double psi, const ArrayGeometry &g);

// Per-element amplitude and phase errors, separable across the two array
// axes: C = (A_el kron A_az)(P_el kron P_az). Amplitudes are 1 + e with
// e ~ N(0, variance_amp), clipped below at 0.05; phases are N(0,
// variance_phase) radians. Drawn once per run from the "impairments" stream.
struct ImpairmentModel {
    std::vector<double> phase_el, phase_az;  // radians
    std::vector<double> amp_el, amp_az;
    double variance_phase = 0.0;
    double variance_amp = 0.0;
    std::uint64_t seed = 0;
    cvec c_diag;  // diagonal of C, length n_x * n_y

    static ImpairmentModel ideal(const ArrayGeometry &g);
    static ImpairmentModel draw(const ArrayGeometry &g, double variance_phase,
                                double variance_amp, std::uint64_t seed);
};

// Elementwise C w. Throws std::invalid_argument on dimension mismatch.
cvec apply_impairment(const ImpairmentModel &c, const cvec &w);

} // namespace abt
