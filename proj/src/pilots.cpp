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

#include "abtrack/pilots.hpp"

#include "abtrack/estimator.hpp"

#include <algorithm>
#include <cmath>
#include <numbers>
#include <numeric>
#include <stdexcept>

namespace abt {

ZcSequence zc_generate(unsigned root, std::size_t n_zc) {
    if (n_zc == 0) throw std::invalid_argument("zc_generate: zero length");
    if (std::gcd(static_cast<std::size_t>(root), n_zc) != 1)
        throw std::invalid_argument("zc_generate: root and length must be coprime");
    ZcSequence s;
    s.root = root;
    s.length = n_zc;
    s.samples.resize(n_zc);
    const double n = static_cast<double>(n_zc);
    for (std::size_t m = 0; m < n_zc; ++m) {
        const double md = static_cast<double>(m);
        const double ph = -std::numbers::pi * md * (md + 1.0) * static_cast<double>(root) / n;
        s.samples[m] = cxd(std::cos(ph), std::sin(ph));
    }
    return s;
}

cxd zc_crosscorr(const ZcSequence &a, const ZcSequence &b) {
    if (a.length != b.length || a.length == 0)
        throw std::invalid_argument("zc_crosscorr: length mismatch");
    cxd s = 0.0;
    for (std::size_t k = 0; k < a.length; ++k) s += a.samples[k] * std::conj(b.samples[k]);
    return s / static_cast<double>(a.length);
}

OfdmConfig make_fullband_ofdm(std::size_t n_fft, std::size_t cp_len) {
    OfdmConfig cfg;
    cfg.n_fft = n_fft;
    cfg.cp_len = cp_len;
    cfg.occupied.resize(n_fft);
    for (std::size_t k = 0; k < n_fft; ++k) cfg.occupied[k] = k;
    return cfg;
}

OfdmConfig make_narrowpilot_ofdm() {
    OfdmConfig cfg;
    cfg.n_fft = 512;
    cfg.cp_len = 64;
    const std::size_t n_zc = 63;
    const std::size_t start = (cfg.n_fft - n_zc) / 2;
    cfg.occupied.resize(n_zc);
    for (std::size_t m = 0; m < n_zc; ++m) cfg.occupied[m] = start + m;
    return cfg;
}

CMat transmit_abp_symbol(const AuxiliaryBeamPair &pair, const OfdmConfig &cfg,
                         const ZcSequence &s0, const ZcSequence &s1) {
    const std::size_t n_zc = cfg.occupied.size();
    if (s0.length != n_zc || s1.length != n_zc)
        throw std::invalid_argument("transmit_abp_symbol: pilot length must match occupied set");
    if (pair.beam_minus.size() != pair.beam_plus.size() || pair.beam_minus.empty())
        throw std::invalid_argument("transmit_abp_symbol: malformed beam pair");
    for (std::size_t k : cfg.occupied)
        if (k >= cfg.n_fft)
            throw std::invalid_argument("transmit_abp_symbol: occupied index out of range");
    const std::size_t n_el = pair.beam_minus.size();
    const std::size_t n = cfg.n_fft;
    const bool pow2 = n > 0 && (n & (n - 1)) == 0;
    CMat block(n_el, cfg.cp_len + n);
    cvec spectrum(n);
    cvec body(n);
    for (std::size_t e = 0; e < n_el; ++e) {
        std::fill(spectrum.begin(), spectrum.end(), cxd(0.0));
        for (std::size_t m = 0; m < n_zc; ++m) {
            spectrum[cfg.occupied[m]] =
                pair.beam_minus[e] * s0.samples[m] + pair.beam_plus[e] * s1.samples[m];
        }
        if (pow2) {
            body = spectrum;
            fft_pow2(body, true);
        } else {
            // Grids that are not a power of two take the direct transform.
            for (std::size_t t = 0; t < n; ++t) {
                cxd acc = 0.0;
                for (std::size_t k = 0; k < n; ++k) {
                    const double ph = 2.0 * std::numbers::pi * static_cast<double>(t) *
                                      static_cast<double>(k) / static_cast<double>(n);
                    acc += spectrum[k] * cxd(std::cos(ph), std::sin(ph));
                }
                body[t] = acc / static_cast<double>(n);
            }
        }
        for (std::size_t d = 0; d < cfg.cp_len; ++d) block(e, d) = body[n - cfg.cp_len + d];
        for (std::size_t t = 0; t < n; ++t) block(e, cfg.cp_len + t) = body[t];
    }
    return block;
}

cxd correlate_rx(const cvec &y, const ZcSequence &ref) {
    if (y.size() != ref.length || ref.length == 0)
        throw std::invalid_argument("correlate_rx: length mismatch");
    cxd s = 0.0;
    for (std::size_t m = 0; m < ref.length; ++m) s += std::conj(ref.samples[m]) * y[m];
    return s / static_cast<double>(ref.length);
}

} // namespace abt
