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
#include "abtrack/rng.hpp"

#include <cstdint>
#include <optional>
#include <string>
#include <vector>

namespace abt {

struct CalibrationConfig {
    enum class Method { SingleSource, Distributed } method = Method::SingleSource;

    // Distributed geometry: n_rf simultaneous receive beams, n_rs reference
    // sources; n_rf * n_rs must cover the array size.
    std::size_t n_rf = 4;
    std::size_t n_rs = 4;

    // Per-measurement SNR before integration; empty means noiseless.
    std::optional<double> snr_db;

    // Each solver input averages pilot_len coherent samples over this many
    // repeated rounds, dividing the effective noise variance by
    // pilot_len * rounds.
    std::size_t pilot_len = 63;
    std::size_t rounds = 512;

    // Distributed overrides; empty selects a DFT-aligned grid that keeps the
    // system perfectly conditioned.
    std::vector<SpatialPair> source_dirs;
    std::vector<SpatialPair> beam_dirs;
};

struct CalibrationResult {
    cvec c_hat;      // estimated per-element response diagonal
    cvec k;          // correction diagonal, elementwise 1 / c_hat
    cvec residual;   // c_hat - c_true
    double snr_reference = 0.0;  // mean clean measurement power defining the SNR
};

// Probes the array with a broadside reference source and scans the receive
// DFT grid; the estimate is the solved response against the unnormalized
// all-ones excitation. Noise is drawn per measurement from the given stream.
CalibrationResult calibrate_single(const cvec &c_true, const ArrayGeometry &g,
                                   const CalibrationConfig &cfg, RngStream &noise);

// Solves vec(Y) = V c where V stacks one row per (source, beam) pair with
// entries conj(beam_j[k]) source_s[k]. Throws std::runtime_error naming the
// direction layout when V is rank deficient.
CalibrationResult calibrate_distributed(const cvec &c_true, const ArrayGeometry &g,
                                        const CalibrationConfig &cfg, RngStream &noise);

// Elementwise K w. Throws std::invalid_argument on dimension mismatch.
cvec apply_calibration(const cvec &k, const cvec &beam);

// CSV columns element_index,k_re,k_im behind one provenance comment line
// recording geometry, seed, and method.
void save_calibration_csv(const std::string &path, const CalibrationResult &r,
                          const ArrayGeometry &g, std::uint64_t seed, const std::string &method);
cvec load_calibration_csv(const std::string &path);

} // namespace abt
