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

#include "abtrack/estimator.hpp"

#include <algorithm>
#include <cmath>
#include <numbers>
#include <numeric>
#include <stdexcept>

namespace abt {

bool valid_pair_offset(double delta, std::size_t n_axis) {
    if (n_axis < 4 || delta <= 0.0) return false;
    const double l = delta * static_cast<double>(n_axis) / (2.0 * std::numbers::pi);
    const double l_round = std::round(l);
    if (std::abs(l - l_round) > 1e-9) return false;
    return l_round >= 1.0 && l_round <= static_cast<double>(n_axis) / 4.0;
}

AuxiliaryBeamPair make_beam_pair(const ArrayGeometry &tx, double eta_el, double eta_az,
                                 double delta, BeamAxis axis, const cvec *calibration,
                                 unsigned root0, unsigned root1) {
    const std::size_t n_axis = axis == BeamAxis::Azimuth ? tx.n_y : tx.n_x;
    if (!valid_pair_offset(delta, n_axis))
        throw std::invalid_argument(
            "make_beam_pair: offset must be 2 pi l / n with integer l in [1, n / 4]");
    AuxiliaryBeamPair pair;
    pair.eta_el = eta_el;
    pair.eta_az = eta_az;
    pair.delta = delta;
    pair.axis = axis;
    pair.root0 = root0;
    pair.root1 = root1;
    if (axis == BeamAxis::Azimuth) {
        pair.beam_minus = steering_upa(tx, eta_el, eta_az - delta);
        pair.beam_plus = steering_upa(tx, eta_el, eta_az + delta);
    } else {
        pair.beam_minus = steering_upa(tx, eta_el - delta, eta_az);
        pair.beam_plus = steering_upa(tx, eta_el + delta, eta_az);
    }
    if (calibration != nullptr) {
        if (calibration->size() != pair.beam_minus.size())
            throw std::invalid_argument("make_beam_pair: calibration dimension mismatch");
        for (std::size_t i = 0; i < calibration->size(); ++i) {
            pair.beam_minus[i] *= (*calibration)[i];
            pair.beam_plus[i] *= (*calibration)[i];
        }
    }
    return pair;
}

StrengthSample received_strengths(const cvec &y, const ZcSequence &s0, const ZcSequence &s1) {
    StrengthSample out;
    out.lambda_minus = correlate_rx(y, s0);
    out.lambda_plus = correlate_rx(y, s1);
    out.chi_minus = std::norm(out.lambda_minus);
    out.chi_plus = std::norm(out.lambda_plus);
    return out;
}

double ratio_metric(double chi_minus, double chi_plus) {
    if (chi_minus < 0.0 || chi_plus < 0.0)
        throw std::domain_error("ratio_metric: negative strength");
    const double sum = chi_minus + chi_plus;
    if (sum == 0.0) throw std::domain_error("ratio_metric: no signal on either beam");
    return (chi_minus - chi_plus) / sum;
}

double ratio_metric_ideal(double x, double delta) {
    return -std::sin(x) * std::sin(delta) / (1.0 - std::cos(x) * std::cos(delta));
}

double invert_ratio_metric(double zeta, double eta, double delta) {
    if (std::abs(zeta) > 1.0 + 1e-9)
        throw std::domain_error("invert_ratio_metric: ratio outside [-1, 1]");
    const double lim = 1.0 - 1e-12;
    const double z = std::clamp(zeta, -lim, lim);
    const double sd = std::sin(delta);
    const double cd = std::cos(delta);
    const double num = z * sd - z * std::sqrt(1.0 - z * z) * sd * cd;
    const double den = sd * sd + z * z * cd * cd;
    return eta - std::asin(std::clamp(num / den, -1.0, 1.0));
}

std::vector<AuxiliaryBeamPair> select_pairs(const std::vector<double> &powers, std::size_t n_r,
                                            const std::vector<double> &boresights_az, double delta,
                                            const ArrayGeometry &tx, double eta_el,
                                            const cvec *calibration) {
    if (powers.size() != boresights_az.size())
        throw std::invalid_argument("select_pairs: powers and boresights disagree");
    if (n_r > powers.size())
        throw std::invalid_argument("select_pairs: more pairs requested than codebook beams");
    std::vector<std::size_t> order(powers.size());
    std::iota(order.begin(), order.end(), 0);
    std::stable_sort(order.begin(), order.end(),
                     [&powers](std::size_t a, std::size_t b) { return powers[a] > powers[b]; });
    std::vector<AuxiliaryBeamPair> out;
    out.reserve(n_r);
    for (std::size_t i = 0; i < n_r; ++i)
        out.push_back(make_beam_pair(tx, eta_el, boresights_az[order[i]], delta,
                                     BeamAxis::Azimuth, calibration));
    return out;
}

PilotSetup make_pilot_setup(PilotMode mode, unsigned root0, unsigned root1, PulseShape pulse) {
    PilotSetup s;
    s.mode = mode;
    s.pulse = pulse;
    switch (mode) {
    case PilotMode::Orthogonal:
        s.ofdm.n_fft = 1;
        s.ofdm.cp_len = 1;
        s.ofdm.occupied = {0};
        s.s0 = zc_generate(root0, 1);
        s.s1 = zc_generate(root1, 1);
        s.pilot_len = 63;
        break;
    case PilotMode::ZcFullband:
        s.ofdm = make_fullband_ofdm(63, 16);
        s.s0 = zc_generate(root0, 63);
        s.s1 = zc_generate(root1, 63);
        s.pilot_len = 63;
        break;
    case PilotMode::ZcNarrowband:
        s.ofdm = make_narrowpilot_ofdm();
        s.s0 = zc_generate(root0, s.ofdm.occupied.size());
        s.s1 = zc_generate(root1, s.ofdm.occupied.size());
        s.pilot_len = s.ofdm.occupied.size();
        break;
    }
    return s;
}

namespace {

// w^H H[k] b for every occupied subcarrier, via the per-path factorization.
cvec channel_taps(const ChannelState &ch, const cvec &coupling, const PilotSetup &setup) {
    const auto &ks = setup.ofdm.occupied;
    cvec h(ks.size(), cxd(0.0));
    for (std::size_t r = 0; r < ch.paths.size(); ++r) {
        if (coupling[r] == cxd(0.0)) continue;
        for (std::size_t m = 0; m < ks.size(); ++m)
            h[m] += coupling[r] * path_rho(ch.paths[r], ks[m], setup.ofdm, setup.pulse);
    }
    return h;
}

cvec radiated_beam(const cvec &beam, const ImpairmentModel *impairment) {
    if (impairment == nullptr || impairment->c_diag.empty()) return beam;
    return apply_impairment(*impairment, beam);
}

} // namespace

StrengthSample probe_pair(const ChannelState &ch, const AuxiliaryBeamPair &pair,
                          const cvec &combiner, const PilotSetup &pilots, double noise_var,
                          RngStream &noise, const ImpairmentModel *impairment) {
    if (noise_var < 0.0) throw std::invalid_argument("probe_pair: negative noise variance");
    const cvec bm = radiated_beam(pair.beam_minus, impairment);
    const cvec bp = radiated_beam(pair.beam_plus, impairment);
    const cvec hm = channel_taps(ch, path_coupling(ch, combiner, bm), pilots);
    const cvec hp = channel_taps(ch, path_coupling(ch, combiner, bp), pilots);

    StrengthSample out;
    if (pilots.mode == PilotMode::Orthogonal) {
        cxd mm = 0.0, mp = 0.0;
        for (std::size_t i = 0; i < hm.size(); ++i) {
            mm += hm[i];
            mp += hp[i];
        }
        mm /= static_cast<double>(hm.size());
        mp /= static_cast<double>(hp.size());
        const double sigma = std::sqrt(noise_var / static_cast<double>(pilots.pilot_len));
        out.lambda_minus = mm + sigma * noise.cnormal();
        out.lambda_plus = mp + sigma * noise.cnormal();
        out.chi_minus = std::norm(out.lambda_minus);
        out.chi_plus = std::norm(out.lambda_plus);
        return out;
    }

    const double sigma = std::sqrt(noise_var);
    cvec y(hm.size());
    for (std::size_t m = 0; m < y.size(); ++m) {
        y[m] = hm[m] * pilots.s0.samples[m] + hp[m] * pilots.s1.samples[m] +
               sigma * noise.cnormal();
    }
    return received_strengths(y, pilots.s0, pilots.s1);
}

double probe_beam_power(const ChannelState &ch, const cvec &beam, const cvec &combiner,
                        const PilotSetup &pilots, double noise_var, RngStream &noise,
                        const ImpairmentModel *impairment) {
    if (noise_var < 0.0) throw std::invalid_argument("probe_beam_power: negative noise variance");
    const cvec b = radiated_beam(beam, impairment);
    const cvec h = channel_taps(ch, path_coupling(ch, combiner, b), pilots);
    cxd mean = 0.0;
    for (const cxd &v : h) mean += v;
    mean /= static_cast<double>(h.size());
    const std::size_t gain = pilots.mode == PilotMode::Orthogonal ? pilots.pilot_len
                                                                  : pilots.ofdm.occupied.size();
    const double sigma = std::sqrt(noise_var / static_cast<double>(gain));
    return std::norm(mean + sigma * noise.cnormal());
}

} // namespace abt
