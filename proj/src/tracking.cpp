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

#include "abtrack/tracking.hpp"

#include "abtrack/calibration.hpp"

#include <algorithm>
#include <cmath>
#include <cstdio>
#include <fstream>
#include <limits>
#include <numbers>
#include <stdexcept>

namespace abt {

std::string protocol_name(Protocol p) {
    switch (p) {
    case Protocol::BsDirect: return "bs_direct";
    case Protocol::UeDirect: return "ue_direct";
    case Protocol::UeDifferential: return "ue_differential";
    case Protocol::BsDifferential: return "bs_differential";
    case Protocol::GridOfBeams: return "grid_of_beams";
    case Protocol::Genie: return "genie";
    case Protocol::NoTracking: return "none";
    }
    return "unknown";
}

std::string event_name(TraceRow::Event e) {
    switch (e) {
    case TraceRow::Event::None: return "none";
    case TraceRow::Event::Update: return "update";
    case TraceRow::Event::Resweep: return "resweep";
    case TraceRow::Event::Feedback: return "feedback";
    }
    return "unknown";
}

RatioCodebook lloyd_train(std::vector<double> samples, unsigned bits) {
    if (bits == 0 || bits > 16) throw std::invalid_argument("lloyd_train: bits out of range");
    const std::size_t n_levels = std::size_t{1} << bits;
    if (samples.size() < n_levels)
        throw std::invalid_argument("lloyd_train: not enough samples for the codebook size");
    std::sort(samples.begin(), samples.end());
    std::vector<double> distinct = samples;
    distinct.erase(std::unique(distinct.begin(), distinct.end()), distinct.end());
    if (distinct.size() < n_levels)
        throw std::invalid_argument("lloyd_train: not enough distinct samples");

    RatioCodebook cb;
    cb.bits = bits;
    cb.levels.resize(n_levels);
    for (std::size_t i = 0; i < n_levels; ++i) {
        const std::size_t idx = (i * (distinct.size() - 1)) / (n_levels - 1);
        cb.levels[i] = distinct[idx];
    }

    double prev_distortion = std::numeric_limits<double>::infinity();
    std::vector<double> bounds(n_levels - 1);
    for (int iter = 0; iter < 500; ++iter) {
        for (std::size_t i = 0; i + 1 < n_levels; ++i)
            bounds[i] = 0.5 * (cb.levels[i] + cb.levels[i + 1]);

        double distortion = 0.0;
        std::size_t cell = 0;
        std::vector<double> sum(n_levels, 0.0);
        std::vector<std::size_t> count(n_levels, 0);
        for (std::size_t s = 0; s < samples.size(); ++s) {
            while (cell + 1 < n_levels && samples[s] > bounds[cell]) ++cell;
            sum[cell] += samples[s];
            ++count[cell];
            const double d = samples[s] - cb.levels[cell];
            distortion += d * d;
        }
        distortion /= static_cast<double>(samples.size());
        for (std::size_t i = 0; i < n_levels; ++i)
            if (count[i] > 0) cb.levels[i] = sum[i] / static_cast<double>(count[i]);
        std::sort(cb.levels.begin(), cb.levels.end());
        if (std::abs(prev_distortion - distortion) < 1e-9) break;
        prev_distortion = distortion;
    }
    cb.boundaries.resize(n_levels - 1);
    for (std::size_t i = 0; i + 1 < n_levels; ++i)
        cb.boundaries[i] = 0.5 * (cb.levels[i] + cb.levels[i + 1]);
    return cb;
}

std::size_t quantize(double zeta, const RatioCodebook &cb) {
    if (cb.levels.empty()) throw std::invalid_argument("quantize: empty codebook");
    // Count of boundaries strictly below zeta; an exact boundary hit stays in
    // the lower cell.
    return static_cast<std::size_t>(
        std::lower_bound(cb.boundaries.begin(), cb.boundaries.end(), zeta) -
        cb.boundaries.begin());
}

double dequantize(std::size_t index, const RatioCodebook &cb) {
    if (index >= cb.levels.size()) throw std::invalid_argument("dequantize: index out of range");
    return cb.levels[index];
}

namespace {

constexpr double two_pi = 2.0 * std::numbers::pi;

double wrap_pm_pi(double x) {
    x = std::fmod(x + std::numbers::pi, two_pi);
    if (x < 0.0) x += two_pi;
    return x - std::numbers::pi;
}

// DFT beam direction for index i of an n-point axis, in (-pi, pi].
double grid_freq(std::size_t i, std::size_t n) {
    double f = two_pi * static_cast<double>(i) / static_cast<double>(n);
    if (f > std::numbers::pi + 1e-12) f -= two_pi;
    return f;
}

std::size_t nearest_grid_index(double value, std::size_t n) {
    std::size_t best = 0;
    double best_d = std::numeric_limits<double>::infinity();
    for (std::size_t i = 0; i < n; ++i) {
        const double d = std::abs(wrap_pm_pi(value - grid_freq(i, n)));
        if (d < best_d - 1e-15) {
            best_d = d;
            best = i;
        }
    }
    return best;
}

struct Candidate {
    double power = 0.0;
    std::size_t index = 0;
};

} // namespace

CampaignResult run_campaign(const CampaignConfig &cfg) {
    const FrameSchedule &sched = cfg.schedule;
    if (sched.t_tot == 0 || sched.t_d == 0)
        throw std::invalid_argument("run_campaign: empty schedule");

    const bool is_abp = cfg.protocol == Protocol::BsDirect || cfg.protocol == Protocol::UeDirect ||
                        cfg.protocol == Protocol::UeDifferential ||
                        cfg.protocol == Protocol::BsDifferential;
    const double delta_az =
        two_pi * static_cast<double>(cfg.delta_l_az) / static_cast<double>(cfg.tx.n_y);
    const double delta_el =
        two_pi * static_cast<double>(cfg.delta_l_el) / static_cast<double>(cfg.tx.n_x);
    if (is_abp && !valid_pair_offset(delta_az, cfg.tx.n_y))
        throw std::invalid_argument("run_campaign: invalid azimuth pair offset");
    if (is_abp && cfg.track_elevation && !valid_pair_offset(delta_el, cfg.tx.n_x))
        throw std::invalid_argument("run_campaign: invalid elevation pair offset");

    const double noise_var =
        std::isinf(cfg.snr_db) ? 0.0 : std::pow(10.0, -cfg.snr_db / 10.0);
    const double gamma_lin =
        std::isinf(cfg.snr_db) ? std::numeric_limits<double>::infinity()
                               : std::pow(10.0, cfg.snr_db / 10.0);

    RngStream fading(cfg.seed, "channel-fading");
    RngStream motion(cfg.seed, "motion-jitter");
    RngStream meas(cfg.seed, "measurement-noise");
    RngStream train(cfg.seed, "quantizer-training");

    ChannelState ch = generate_initial(cfg.init, cfg.tx, cfg.rx, cfg.evo, cfg.seed);

    PilotSetup pilots = make_pilot_setup(cfg.pilot_mode, cfg.root0, cfg.root1, cfg.pulse);
    if (cfg.pilot_mode == PilotMode::Orthogonal) pilots.pilot_len = cfg.pilot_len;

    const ImpairmentModel *imp = cfg.impairment.c_diag.empty() ? nullptr : &cfg.impairment;
    const cvec *kcal = cfg.calibration.empty() ? nullptr : &cfg.calibration;
    if (kcal != nullptr && kcal->size() != cfg.tx.total())
        throw std::invalid_argument("run_campaign: calibration dimension mismatch");

    // Combiner matched to the dominant path's arrival direction at slot 0.
    const cvec w = steering_upa(cfg.rx, 0.0, ch.paths[0].nu);

    // Per-path delay signatures are constant across the campaign.
    const auto &ks = pilots.ofdm.occupied;
    std::vector<cvec> rho_table(ch.paths.size(), cvec(ks.size()));
    for (std::size_t r = 0; r < ch.paths.size(); ++r)
        for (std::size_t m = 0; m < ks.size(); ++m)
            rho_table[r][m] = path_rho(ch.paths[r], ks[m], pilots.ofdm, pilots.pulse);

    auto tx_beam = [&](double el, double az) {
        cvec b = steering_upa(cfg.tx, el, az);
        if (kcal != nullptr) {
            b = apply_calibration(*kcal, b);
            const double n = norm2(b);
            if (n > 0.0)
                for (cxd &v : b) v /= n;
        }
        return b;
    };

    // Quantizers are trained before the campaign on synthetic single-path
    // ratio samples at the operating SNR.
    RatioCodebook cb_direct, cb_diff;
    if (is_abp && cfg.quantize_feedback) {
        const double sigma_eff = std::sqrt(
            noise_var / static_cast<double>(cfg.pilot_mode == PilotMode::Orthogonal
                                                ? pilots.pilot_len
                                                : ks.size()));
        const std::size_t n_axis = cfg.tx.n_y;
        const double na = static_cast<double>(n_axis);
        std::vector<double> zs(cfg.quantizer_training_samples);
        std::vector<double> dzs(cfg.quantizer_training_samples);
        for (std::size_t i = 0; i < zs.size(); ++i) {
            const double x = (2.0 * train.uniform() - 1.0) * delta_az;
            const double am = std::sqrt(fejer_power(n_axis, x + delta_az)) / na;
            const double ap = std::sqrt(fejer_power(n_axis, x - delta_az)) / na;
            const cxd lm = am + sigma_eff * train.cnormal();
            const cxd lp = ap + sigma_eff * train.cnormal();
            const double cm = std::norm(lm), cp = std::norm(lp);
            const double z = cm + cp > 0.0 ? (cm - cp) / (cm + cp) : 0.0;
            zs[i] = z;
            dzs[i] = std::abs(z);
        }
        cb_direct = lloyd_train(zs, cfg.feedback_bits_direct);
        cb_diff = lloyd_train(dzs, cfg.feedback_bits_differential);
    }

    // Anchor state. Grid-of-beams anchors live on the DFT grid.
    double anchor_az = ch.paths[0].psi;
    double anchor_el = ch.paths[0].theta;
    std::size_t gob_ix = 0, gob_iy = 0;
    if (cfg.protocol == Protocol::GridOfBeams) {
        gob_ix = nearest_grid_index(anchor_el, cfg.tx.n_x);
        gob_iy = nearest_grid_index(anchor_az, cfg.tx.n_y);
        anchor_el = grid_freq(gob_ix, cfg.tx.n_x);
        anchor_az = grid_freq(gob_iy, cfg.tx.n_y);
    }

    double ref_zeta_az = 0.0, ref_zeta_el = 0.0;
    double ref_gamma = 0.0;
    double ref_pair_az = 0.0, ref_pair_el = 0.0;

    auto probe_anchor_power = [&]() {
        return probe_beam_power(ch, tx_beam(anchor_el, anchor_az), w, pilots, noise_var, meas,
                                imp);
    };

    struct PairProbe {
        double zeta = 0.0;
        double power = 0.0;
        bool no_signal = false;
    };
    auto probe_axis = [&](BeamAxis axis) {
        const double d = axis == BeamAxis::Azimuth ? delta_az : delta_el;
        const AuxiliaryBeamPair pair =
            make_beam_pair(cfg.tx, anchor_el, anchor_az, d, axis, kcal, cfg.root0, cfg.root1);
        const StrengthSample s = probe_pair(ch, pair, w, pilots, noise_var, meas, imp);
        PairProbe out;
        out.power = s.chi_minus + s.chi_plus;
        if (out.power <= 0.0) {
            out.no_signal = true;
            return out;
        }
        out.zeta = ratio_metric(s.chi_minus, s.chi_plus);
        return out;
    };

    auto refresh_refs = [&]() {
        ref_zeta_az = 0.0;
        ref_zeta_el = 0.0;
        ref_gamma = probe_anchor_power();
        if (is_abp) {
            ref_pair_az = probe_axis(BeamAxis::Azimuth).power;
            if (cfg.track_elevation) ref_pair_el = probe_axis(BeamAxis::Elevation).power;
        }
    };

    if (is_abp || cfg.protocol == Protocol::GridOfBeams) refresh_refs();

    CampaignResult res;
    res.trace.reserve(sched.t_tot);
    res.gains.reserve(sched.t_tot);
    res.ses.reserve(sched.t_tot);

    const double drop_lin = std::pow(10.0, -cfg.thresholds.resweep_drop_db / 10.0);
    const double keep_lin = std::pow(10.0, -cfg.thresholds.strength_db / 10.0);

    double last_zeta = 0.0;
    std::size_t dtc_counter = 0;
    double se_acc = 0.0, gain_acc = 0.0, err_acc = 0.0;

    for (std::size_t t = 1; t <= sched.t_tot; ++t) {
        evolve(ch, fading, motion);

        TraceRow row;
        row.slot = t;
        row.true_psi = ch.paths[0].psi;
        row.true_theta = ch.paths[0].theta;
        row.event = TraceRow::Event::None;
        row.feedback_bits = 0;

        if (sched.is_dtc(t) && cfg.protocol != Protocol::NoTracking) {
            const BeamAxis axis = (!cfg.track_elevation || dtc_counter % 2 == 0)
                                      ? BeamAxis::Azimuth
                                      : BeamAxis::Elevation;
            ++dtc_counter;

            if (cfg.protocol == Protocol::Genie) {
                anchor_az = ch.paths[0].psi;
                anchor_el = ch.paths[0].theta;
                row.event = TraceRow::Event::Update;
                ++res.updates;
            } else if (cfg.protocol == Protocol::GridOfBeams) {
                const std::size_t n_axis = axis == BeamAxis::Azimuth ? cfg.tx.n_y : cfg.tx.n_x;
                const std::size_t anchor_idx = axis == BeamAxis::Azimuth ? gob_iy : gob_ix;
                auto beam_at = [&](std::size_t idx) {
                    const double f = grid_freq(idx, n_axis);
                    return axis == BeamAxis::Azimuth ? tx_beam(anchor_el, f)
                                                     : tx_beam(f, anchor_az);
                };
                auto probe_idx = [&](std::size_t idx) {
                    return probe_beam_power(ch, beam_at(idx), w, pilots, noise_var, meas, imp);
                };
                auto ring = [&](std::size_t count, std::size_t first_ring) {
                    // Offsets +-first_ring, +-(first_ring+1), ... around the anchor.
                    std::vector<std::size_t> idx;
                    std::size_t off = first_ring;
                    while (idx.size() < count) {
                        idx.push_back((anchor_idx + off) % n_axis);
                        if (idx.size() < count)
                            idx.push_back((anchor_idx + n_axis - off % n_axis) % n_axis);
                        ++off;
                    }
                    return idx;
                };
                const double threshold = ref_gamma * keep_lin;
                std::vector<Candidate> cands;
                cands.push_back({probe_idx(anchor_idx), anchor_idx});
                const std::size_t ring_span = (cfg.gob_supporting + 1) / 2;
                for (std::size_t idx : ring(cfg.gob_supporting, 1))
                    cands.push_back({probe_idx(idx), idx});
                auto better = [](const Candidate &a, const Candidate &b) {
                    if (a.power != b.power) return a.power > b.power;
                    return a.index < b.index;
                };
                std::sort(cands.begin(), cands.end(), better);
                bool placed = false;
                Candidate best = cands.front();
                if (best.power >= threshold) {
                    placed = true;
                } else if (cfg.gob_backup > 0) {
                    std::vector<Candidate> backups;
                    for (std::size_t idx : ring(cfg.gob_backup, 1 + ring_span))
                        backups.push_back({probe_idx(idx), idx});
                    std::sort(backups.begin(), backups.end(), better);
                    if (!backups.empty() && backups.front().power >= threshold) {
                        best = backups.front();
                        placed = true;
                    }
                }
                row.feedback_bits = static_cast<unsigned>(
                    std::ceil(std::log2(static_cast<double>(std::max<std::size_t>(2, n_axis)))));
                if (placed) {
                    const bool moved = best.index != anchor_idx;
                    if (axis == BeamAxis::Azimuth) {
                        gob_iy = best.index;
                        anchor_az = grid_freq(gob_iy, cfg.tx.n_y);
                    } else {
                        gob_ix = best.index;
                        anchor_el = grid_freq(gob_ix, cfg.tx.n_x);
                    }
                    if (moved) {
                        ref_gamma = probe_anchor_power();
                        row.event = TraceRow::Event::Update;
                        ++res.updates;
                    } else {
                        row.event = TraceRow::Event::Feedback;
                    }
                } else {
                    // Full re-sweep, idealized: the strongest codebook beam is
                    // the grid point nearest the true direction.
                    gob_ix = nearest_grid_index(ch.paths[0].theta, cfg.tx.n_x);
                    gob_iy = nearest_grid_index(ch.paths[0].psi, cfg.tx.n_y);
                    anchor_el = grid_freq(gob_ix, cfg.tx.n_x);
                    anchor_az = grid_freq(gob_iy, cfg.tx.n_y);
                    ref_gamma = probe_anchor_power();
                    row.event = TraceRow::Event::Resweep;
                    ++res.resweeps;
                }
            } else {
                // Auxiliary-pair protocols share the probe, the saturation and
                // power-collapse re-acquisition triggers, and the reference
                // refresh; they differ in who gates the anchor update.
                const PairProbe pr = probe_axis(axis);
                if (!pr.no_signal) last_zeta = pr.zeta;
                row.zeta = last_zeta;

                const double ref_pair =
                    axis == BeamAxis::Azimuth ? ref_pair_az : ref_pair_el;
                const bool collapsed =
                    pr.no_signal || (ref_pair > 0.0 && pr.power <= ref_pair * drop_lin);
                const bool saturated = std::abs(pr.zeta) >= cfg.thresholds.zeta_saturation;
                if (cfg.thresholds.resweep_enabled && (collapsed || saturated)) {
                    anchor_az = ch.paths[0].psi;
                    anchor_el = ch.paths[0].theta;
                    refresh_refs();
                    row.event = TraceRow::Event::Resweep;
                    ++res.resweeps;
                } else {
                    const double d = axis == BeamAxis::Azimuth ? delta_az : delta_el;
                    double &anchor = axis == BeamAxis::Azimuth ? anchor_az : anchor_el;
                    double &ref_zeta = axis == BeamAxis::Azimuth ? ref_zeta_az : ref_zeta_el;

                    auto do_update = [&](double new_anchor) {
                        anchor = new_anchor;
                        refresh_refs();
                        row.event = TraceRow::Event::Update;
                        ++res.updates;
                    };

                    switch (cfg.protocol) {
                    case Protocol::BsDirect: {
                        const double zq =
                            cfg.quantize_feedback
                                ? dequantize(quantize(pr.zeta, cb_direct), cb_direct)
                                : pr.zeta;
                        row.feedback_bits =
                            cfg.quantize_feedback ? cfg.feedback_bits_direct : 0;
                        const double psi_hat = invert_ratio_metric(zq, anchor, d);
                        if (std::abs(psi_hat - anchor) >= cfg.thresholds.angle)
                            do_update(psi_hat);
                        else
                            row.event = TraceRow::Event::Feedback;
                        break;
                    }
                    case Protocol::UeDirect: {
                        const double gamma_t = probe_anchor_power();
                        const bool triggered =
                            gamma_t <= 0.0 || ref_gamma <= 0.0 ||
                            std::abs(10.0 * std::log10(gamma_t / ref_gamma)) >=
                                cfg.thresholds.strength_db;
                        if (triggered) {
                            const double zq =
                                cfg.quantize_feedback
                                    ? dequantize(quantize(pr.zeta, cb_direct), cb_direct)
                                    : pr.zeta;
                            row.feedback_bits =
                                cfg.quantize_feedback ? cfg.feedback_bits_direct : 0;
                            do_update(invert_ratio_metric(zq, anchor, d));
                        }
                        break;
                    }
                    case Protocol::UeDifferential:
                    case Protocol::BsDifferential: {
                        const double dz = std::abs(pr.zeta - ref_zeta);
                        const double sgn = pr.zeta >= 0.0 ? 1.0 : -1.0;
                        const double psi_hat_ue = invert_ratio_metric(pr.zeta, anchor, d);
                        const bool ue_gated = cfg.protocol == Protocol::UeDifferential;
                        const bool send =
                            !ue_gated || std::abs(psi_hat_ue - anchor) >= cfg.thresholds.angle;
                        if (send) {
                            const double dzq =
                                cfg.quantize_feedback
                                    ? dequantize(quantize(dz, cb_diff), cb_diff)
                                    : dz;
                            row.feedback_bits =
                                cfg.quantize_feedback ? cfg.feedback_bits_differential + 1 : 0;
                            // The sign bit disambiguates the two candidates at
                            // distance dzq from the reference ratio.
                            const double c1 = ref_zeta + sgn * dzq;
                            const double c2 = ref_zeta - sgn * dzq;
                            const double zrec =
                                ((c1 >= 0.0 ? 1.0 : -1.0) == sgn) ? c1 : c2;
                            const double psi_hat = invert_ratio_metric(
                                std::clamp(zrec, -1.0, 1.0), anchor, d);
                            if (!ue_gated) {
                                if (std::abs(psi_hat - anchor) >= cfg.thresholds.angle)
                                    do_update(psi_hat);
                                else
                                    row.event = TraceRow::Event::Feedback;
                            } else {
                                do_update(psi_hat);
                            }
                        }
                        break;
                    }
                    default:
                        break;
                    }
                }
            }
        }

        // Payload beamforming for this slot on the (possibly just updated)
        // anchors.
        {
            const cvec f = tx_beam(anchor_el, anchor_az);
            const cvec f_rad = imp != nullptr ? apply_impairment(*imp, f) : f;
            const cvec coup = path_coupling(ch, w, f_rad);
            double acc = 0.0;
            for (std::size_t m = 0; m < ks.size(); ++m) {
                cxd h = 0.0;
                for (std::size_t r = 0; r < coup.size(); ++r) h += coup[r] * rho_table[r][m];
                acc += std::norm(h);
            }
            row.bf_gain = acc / static_cast<double>(ks.size());
        }
        const double se = std::isinf(gamma_lin)
                              ? 0.0
                              : std::log2(1.0 + gamma_lin * row.bf_gain);

        row.anchor_az = anchor_az;
        row.anchor_el = anchor_el;
        if (row.zeta == 0.0) row.zeta = last_zeta;
        if (row.feedback_bits > 0) ++res.feedback_events;

        gain_acc += row.bf_gain;
        se_acc += se;
        err_acc += std::abs(row.true_psi - anchor_az);
        res.gains.push_back(row.bf_gain);
        res.ses.push_back(se);
        res.trace.push_back(row);
    }

    const double n = static_cast<double>(sched.t_tot);
    res.mean_bf_gain = gain_acc / n;
    res.mean_se = se_acc / n;
    res.mean_abs_err = err_acc / n;
    return res;
}

std::string trace_csv_string(const std::vector<TraceRow> &trace) {
    std::string out =
        "slot,true_psi_rad,true_theta_rad,anchor_az_rad,anchor_el_rad,zeta,feedback_bits,"
        "bf_gain,event\n";
    char buf[320];
    for (const TraceRow &r : trace) {
        std::snprintf(buf, sizeof(buf), "%zu,%.9g,%.9g,%.9g,%.9g,%.9g,%u,%.9g,%s\n",
                      r.slot, r.true_psi, r.true_theta, r.anchor_az, r.anchor_el, r.zeta,
                      r.feedback_bits, r.bf_gain, event_name(r.event).c_str());
        out += buf;
    }
    return out;
}

void write_trace_csv(const std::string &path, const std::vector<TraceRow> &trace) {
    std::ofstream os(path, std::ios::binary);
    if (!os) throw std::runtime_error("write_trace_csv: cannot open " + path);
    os << trace_csv_string(trace);
}

} // namespace abt
