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

#include <cstddef>
#include <vector>

namespace abt {

struct ZcSequence {
    unsigned root = 0;
    std::size_t length = 0;
    cvec samples;  // samples[m] = exp(-j pi m (m + 1) root / length)
};

// Constant-amplitude zero-autocorrelation sequence of odd length n_zc.
// Throws std::invalid_argument unless gcd(root, n_zc) == 1.
ZcSequence zc_generate(unsigned root, std::size_t n_zc);

// Zero-lag correlation (1/N) sum_k a[k] conj(b[k]). Equals 1 for identical
// sequences; for distinct coprime roots its magnitude is
// sqrt(gcd(root_a - root_b, N) / N).
cxd zc_crosscorr(const ZcSequence &a, const ZcSequence &b);

struct OfdmConfig {
    std::size_t n_fft = 512;
    std::size_t cp_len = 64;
    std::vector<std::size_t> occupied;  // pilot subcarrier indices, ascending
    double subcarrier_spacing_hz = 270e3;
    double symbol_duration_s = 3.7e-6;
};

// Every subcarrier carries a pilot sample (sequence length = n_fft).
OfdmConfig make_fullband_ofdm(std::size_t n_fft, std::size_t cp_len);

// 63 pilot subcarriers centered in a 512-point grid with a 64-sample CP.
OfdmConfig make_narrowpilot_ofdm();

struct AuxiliaryBeamPair;  // estimator.hpp

// Frequency-domain mapping of the two beam-specific pilot sequences followed
// by a per-element inverse FFT and cyclic prefix. Rows index transmit
// elements, columns the cp_len + n_fft time samples.
CMat transmit_abp_symbol(const AuxiliaryBeamPair &pair, const OfdmConfig &cfg,
                         const ZcSequence &s0, const ZcSequence &s1);

// Despreads one OFDM symbol: (1/N_ZC) sum_m conj(ref[m]) y[m], where y holds
// one frequency-domain sample per occupied subcarrier, in occupied order.
cxd correlate_rx(const cvec &y, const ZcSequence &ref);

} // namespace abt
