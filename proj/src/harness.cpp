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

#include "abtrack/harness.hpp"

#include <CLI11.hpp>

#include <algorithm>
#include <atomic>
#include <cmath>
#include <cstdio>
#include <cstdlib>
#include <filesystem>
#include <fstream>
#include <iostream>
#include <numbers>
#include <sstream>
#include <thread>

namespace abt {

namespace {

std::string trim(const std::string &s) {
    const auto b = s.find_first_not_of(" \t\r\n");
    if (b == std::string::npos) return "";
    const auto e = s.find_last_not_of(" \t\r\n");
    return s.substr(b, e - b + 1);
}

double parse_double(const std::string &key, const std::string &value) {
    try {
        std::size_t pos = 0;
        const double v = std::stod(value, &pos);
        if (pos != value.size()) throw std::invalid_argument(value);
        return v;
    } catch (const std::exception &) {
        throw ConfigError("config: cannot parse number for " + key + ": " + value);
    }
}

double parse_snr(const std::string &key, const std::string &value) {
    if (value == "inf" || value == "none") return std::numeric_limits<double>::infinity();
    return parse_double(key, value);
}

std::size_t parse_size(const std::string &key, const std::string &value) {
    try {
        std::size_t pos = 0;
        const long long v = std::stoll(value, &pos);
        if (pos != value.size() || v < 0) throw std::invalid_argument(value);
        return static_cast<std::size_t>(v);
    } catch (const std::exception &) {
        throw ConfigError("config: cannot parse count for " + key + ": " + value);
    }
}

std::uint64_t parse_u64(const std::string &key, const std::string &value) {
    try {
        std::size_t pos = 0;
        const unsigned long long v = std::stoull(value, &pos);
        if (pos != value.size()) throw std::invalid_argument(value);
        return static_cast<std::uint64_t>(v);
    } catch (const std::exception &) {
        throw ConfigError("config: cannot parse integer for " + key + ": " + value);
    }
}

bool parse_bool(const std::string &key, const std::string &value) {
    if (value == "true" || value == "1" || value == "yes" || value == "on") return true;
    if (value == "false" || value == "0" || value == "no" || value == "off") return false;
    throw ConfigError("config: cannot parse boolean for " + key + ": " + value);
}

std::vector<std::string> split_list(const std::string &value) {
    std::vector<std::string> out;
    std::stringstream ss(value);
    std::string item;
    while (std::getline(ss, item, ',')) {
        item = trim(item);
        if (!item.empty()) out.push_back(item);
    }
    return out;
}

Protocol parse_protocol(const std::string &value) {
    for (Protocol p : {Protocol::BsDirect, Protocol::UeDirect, Protocol::UeDifferential,
                       Protocol::BsDifferential, Protocol::GridOfBeams, Protocol::Genie,
                       Protocol::NoTracking})
        if (protocol_name(p) == value) return p;
    throw ConfigError("config: unknown protocol: " + value);
}

PilotMode parse_pilot_mode(const std::string &value) {
    if (value == "orthogonal") return PilotMode::Orthogonal;
    if (value == "zc_fullband") return PilotMode::ZcFullband;
    if (value == "zc_narrowband") return PilotMode::ZcNarrowband;
    throw ConfigError("config: unknown pilot mode: " + value);
}

MotionModel parse_motion(const std::string &value) {
    if (value == "gauss_markov") return MotionModel::GaussMarkovWalk;
    if (value == "ring_azimuth") return MotionModel::RingAzimuth;
    if (value == "ring_azimuth_elevation") return MotionModel::RingAzimuthElevation;
    throw ConfigError("config: unknown motion model: " + value);
}

PulseShape::Kind parse_pulse(const std::string &value) {
    if (value == "ideal") return PulseShape::Kind::Ideal;
    if (value == "raised_cosine") return PulseShape::Kind::RaisedCosine;
    throw ConfigError("config: unknown pulse shape: " + value);
}

CalibrationConfig::Method parse_method(const std::string &value) {
    if (value == "single_source") return CalibrationConfig::Method::SingleSource;
    if (value == "distributed") return CalibrationConfig::Method::Distributed;
    throw ConfigError("config: unknown calibration method: " + value);
}

std::string gain_db(double gain) {
    char buf[64];
    std::snprintf(buf, sizeof(buf), "%.3f", 10.0 * std::log10(std::max(gain, 1e-300)));
    return buf;
}

} // namespace

SimulationConfig default_config() {
    SimulationConfig cfg;
    cfg.campaign.tx = make_upa(1, 16);
    cfg.campaign.rx = make_ula(8);

    cfg.campaign.init.n_paths = 1;
    cfg.campaign.init.mu_min = 0.2;
    cfg.campaign.init.mu_max = 1.2;
    cfg.campaign.init.phi_min = -1.2;
    cfg.campaign.init.phi_max = 1.2;
    cfg.campaign.init.delay_spread_s = 0.0;
    cfg.campaign.init.min_psi_separation = 0.0;

    cfg.campaign.evo.f_d_hz = 1.3e3;
    cfg.campaign.evo.symbol_duration_s = 3.7e-6;
    cfg.campaign.evo.motion = MotionModel::RingAzimuthElevation;
    cfg.campaign.evo.v_az_kmh = 100.0;
    cfg.campaign.evo.v_el_kmh = 30.0;
    cfg.campaign.evo.distance_m = 100.0;
    cfg.campaign.evo.sigma2_w = std::pow(std::numbers::pi / 180.0, 2);

    cfg.campaign.pilot_mode = PilotMode::Orthogonal;
    cfg.campaign.protocol = Protocol::BsDirect;
    cfg.campaign.schedule.t_tot = 10000;
    cfg.campaign.schedule.t_d = 100;
    cfg.campaign.snr_db = 10.0;
    cfg.campaign.seed = 1;
    return cfg;
}

SimulationConfig load_config(const std::string &path) {
    std::ifstream is(path);
    if (!is) throw ConfigError("config: cannot open " + path);

    SimulationConfig cfg = default_config();
    CampaignConfig &c = cfg.campaign;
    std::string line, section;
    std::size_t lineno = 0;
    while (std::getline(is, line)) {
        ++lineno;
        const auto cut = line.find_first_of("#;");
        if (cut != std::string::npos) line = line.substr(0, cut);
        line = trim(line);
        if (line.empty()) continue;
        if (line.front() == '[') {
            if (line.back() != ']')
                throw ConfigError("config: malformed section at line " + std::to_string(lineno));
            section = trim(line.substr(1, line.size() - 2));
            continue;
        }
        const auto eq = line.find('=');
        if (eq == std::string::npos)
            throw ConfigError("config: expected key = value at line " + std::to_string(lineno));
        const std::string key = trim(line.substr(0, eq));
        const std::string value = trim(line.substr(eq + 1));
        const std::string qual = section + "." + key;

        if (qual == "arrays.tx_n_x") c.tx.n_x = parse_size(qual, value);
        else if (qual == "arrays.tx_n_y") c.tx.n_y = parse_size(qual, value);
        else if (qual == "arrays.tx_spacing") {
            c.tx.spacing_x = parse_double(qual, value);
            c.tx.spacing_y = c.tx.spacing_x;
        } else if (qual == "arrays.rx_n") c.rx = make_ula(parse_size(qual, value), c.rx.spacing_y);
        else if (qual == "arrays.rx_spacing") c.rx.spacing_y = parse_double(qual, value);
        else if (qual == "arrays.impairment_variance_phase")
            cfg.impairment_variance_phase = parse_double(qual, value);
        else if (qual == "arrays.impairment_variance_amp")
            cfg.impairment_variance_amp = parse_double(qual, value);

        else if (qual == "channel.n_paths") c.init.n_paths = parse_size(qual, value);
        else if (qual == "channel.mu_min") c.init.mu_min = parse_double(qual, value);
        else if (qual == "channel.mu_max") c.init.mu_max = parse_double(qual, value);
        else if (qual == "channel.phi_min") c.init.phi_min = parse_double(qual, value);
        else if (qual == "channel.phi_max") c.init.phi_max = parse_double(qual, value);
        else if (qual == "channel.delay_spread_s") c.init.delay_spread_s = parse_double(qual, value);
        else if (qual == "channel.min_psi_separation")
            c.init.min_psi_separation = parse_double(qual, value);
        else if (qual == "channel.power_profile") {
            c.init.power_profile.clear();
            for (const std::string &item : split_list(value))
                c.init.power_profile.push_back(parse_double(qual, item));
        } else if (qual == "channel.f_d_hz") c.evo.f_d_hz = parse_double(qual, value);
        else if (qual == "channel.symbol_duration_s")
            c.evo.symbol_duration_s = parse_double(qual, value);
        else if (qual == "channel.motion") c.evo.motion = parse_motion(value);
        else if (qual == "channel.sigma2_mu") c.evo.sigma2_mu = parse_double(qual, value);
        else if (qual == "channel.sigma2_phi") c.evo.sigma2_phi = parse_double(qual, value);
        else if (qual == "channel.v_az_kmh") c.evo.v_az_kmh = parse_double(qual, value);
        else if (qual == "channel.v_el_kmh") c.evo.v_el_kmh = parse_double(qual, value);
        else if (qual == "channel.distance_m") c.evo.distance_m = parse_double(qual, value);
        else if (qual == "channel.sigma2_w") c.evo.sigma2_w = parse_double(qual, value);
        else if (qual == "channel.walk_aoa") c.evo.walk_aoa = parse_bool(qual, value);

        else if (qual == "pilots.mode") c.pilot_mode = parse_pilot_mode(value);
        else if (qual == "pilots.root0") c.root0 = static_cast<unsigned>(parse_size(qual, value));
        else if (qual == "pilots.root1") c.root1 = static_cast<unsigned>(parse_size(qual, value));
        else if (qual == "pilots.pulse") c.pulse.kind = parse_pulse(value);
        else if (qual == "pilots.rolloff") c.pulse.rolloff = parse_double(qual, value);
        else if (qual == "pilots.pilot_len") c.pilot_len = parse_size(qual, value);

        else if (qual == "estimator.delta_l_az") c.delta_l_az = parse_size(qual, value);
        else if (qual == "estimator.delta_l_el") c.delta_l_el = parse_size(qual, value);

        else if (qual == "tracking.protocol") c.protocol = parse_protocol(value);
        else if (qual == "tracking.t_tot") c.schedule.t_tot = parse_size(qual, value);
        else if (qual == "tracking.t_d") c.schedule.t_d = parse_size(qual, value);
        else if (qual == "tracking.t_per_dtc") c.schedule.t_per_dtc = parse_size(qual, value);
        else if (qual == "tracking.angle_threshold")
            c.thresholds.angle = parse_double(qual, value);
        else if (qual == "tracking.strength_db")
            c.thresholds.strength_db = parse_double(qual, value);
        else if (qual == "tracking.zeta_saturation")
            c.thresholds.zeta_saturation = parse_double(qual, value);
        else if (qual == "tracking.resweep_drop_db")
            c.thresholds.resweep_drop_db = parse_double(qual, value);
        else if (qual == "tracking.resweep_enabled")
            c.thresholds.resweep_enabled = parse_bool(qual, value);
        else if (qual == "tracking.track_elevation") c.track_elevation = parse_bool(qual, value);
        else if (qual == "tracking.snr_db") c.snr_db = parse_snr(qual, value);
        else if (qual == "tracking.feedback_bits_direct")
            c.feedback_bits_direct = static_cast<unsigned>(parse_size(qual, value));
        else if (qual == "tracking.feedback_bits_differential")
            c.feedback_bits_differential = static_cast<unsigned>(parse_size(qual, value));
        else if (qual == "tracking.quantize_feedback")
            c.quantize_feedback = parse_bool(qual, value);
        else if (qual == "tracking.quantizer_training_samples")
            c.quantizer_training_samples = parse_size(qual, value);
        else if (qual == "tracking.gob_supporting") c.gob_supporting = parse_size(qual, value);
        else if (qual == "tracking.gob_backup") c.gob_backup = parse_size(qual, value);
        else if (qual == "tracking.seed") c.seed = parse_u64(qual, value);

        else if (qual == "calibration.enabled") cfg.calibrate = parse_bool(qual, value);
        else if (qual == "calibration.method") cfg.calibration.method = parse_method(value);
        else if (qual == "calibration.n_rf") cfg.calibration.n_rf = parse_size(qual, value);
        else if (qual == "calibration.n_rs") cfg.calibration.n_rs = parse_size(qual, value);
        else if (qual == "calibration.snr_db") {
            if (value == "none")
                cfg.calibration.snr_db.reset();
            else
                cfg.calibration.snr_db = parse_double(qual, value);
        } else if (qual == "calibration.pilot_len")
            cfg.calibration.pilot_len = parse_size(qual, value);
        else if (qual == "calibration.rounds") cfg.calibration.rounds = parse_size(qual, value);

        else if (qual == "harness.out_dir") cfg.out_dir = value;
        else if (qual == "harness.sweep_t_d") {
            cfg.sweep_t_d.clear();
            for (const std::string &item : split_list(value))
                cfg.sweep_t_d.push_back(parse_size(qual, item));
        } else if (qual == "harness.sweep_protocols") {
            cfg.sweep_protocols.clear();
            for (const std::string &item : split_list(value))
                cfg.sweep_protocols.push_back(parse_protocol(item));
        } else if (qual == "harness.sweep_workers")
            cfg.sweep_workers = parse_size(qual, value);

        else
            throw ConfigError("config: unknown key " + qual + " at line " +
                              std::to_string(lineno));
    }
    return cfg;
}

void validate(const SimulationConfig &cfg) {
    const CampaignConfig &c = cfg.campaign;
    if (c.tx.n_x == 0 || c.tx.n_y == 0 || c.rx.total() == 0)
        throw ConfigError("validate: array axes must be nonempty");
    if (c.init.n_paths == 0) throw ConfigError("validate: need at least one path");
    if (c.schedule.t_tot == 0 || c.schedule.t_d == 0 || c.schedule.t_per_dtc == 0)
        throw ConfigError("validate: schedule counts must be positive");

    const bool is_abp = c.protocol == Protocol::BsDirect || c.protocol == Protocol::UeDirect ||
                        c.protocol == Protocol::UeDifferential ||
                        c.protocol == Protocol::BsDifferential;
    if (is_abp) {
        const double delta_az =
            2.0 * std::numbers::pi * static_cast<double>(c.delta_l_az) /
            static_cast<double>(c.tx.n_y);
        if (!valid_pair_offset(delta_az, c.tx.n_y))
            throw ConfigError("validate: azimuth pair offset outside the legal grid");
        if (c.track_elevation) {
            const double delta_el =
                2.0 * std::numbers::pi * static_cast<double>(c.delta_l_el) /
                static_cast<double>(c.tx.n_x);
            if (!valid_pair_offset(delta_el, c.tx.n_x))
                throw ConfigError("validate: elevation pair offset outside the legal grid");
        }
    }

    if (std::isnan(c.snr_db) || c.snr_db == -std::numeric_limits<double>::infinity())
        throw ConfigError("validate: snr_db must be finite or +inf");
    if (c.quantize_feedback && is_abp) {
        if (c.feedback_bits_direct == 0 || c.feedback_bits_direct > 16 ||
            c.feedback_bits_differential == 0 || c.feedback_bits_differential > 16)
            throw ConfigError("validate: feedback bit widths must lie in [1, 16]");
        if (c.quantizer_training_samples < (std::size_t{1} << c.feedback_bits_direct))
            throw ConfigError("validate: not enough quantizer training samples");
    }

    if (!(c.init.mu_min > 0.0) || c.init.mu_max > std::numbers::pi / 2.0 + 1e-12 ||
        c.init.mu_min > c.init.mu_max)
        throw ConfigError("validate: polar angle range must lie inside (0, pi/2]");
    if (c.init.phi_min < -std::numbers::pi / 2.0 + 1e-12 ||
        c.init.phi_max > std::numbers::pi / 2.0 - 1e-12 || c.init.phi_min > c.init.phi_max)
        throw ConfigError("validate: azimuth angle range must lie inside (-pi/2, pi/2)");
    if (c.init.delay_spread_s < 0.0 || c.init.min_psi_separation < 0.0)
        throw ConfigError("validate: spreads must be nonnegative");
    for (double p : c.init.power_profile)
        if (!(p > 0.0)) throw ConfigError("validate: power profile entries must be positive");
    if (!c.init.power_profile.empty() && c.init.power_profile.size() != c.init.n_paths)
        throw ConfigError("validate: power profile length must match n_paths");

    if (c.init.delay_spread_s > 0.0) {
        if (c.pilot_mode == PilotMode::Orthogonal)
            throw ConfigError(
                "validate: delay spread needs a wideband pilot mode, not orthogonal");
        const PilotSetup setup = make_pilot_setup(c.pilot_mode, c.root0, c.root1, c.pulse);
        const double t_samp =
            1.0 / (static_cast<double>(setup.ofdm.n_fft) * setup.ofdm.subcarrier_spacing_hz);
        if (c.init.delay_spread_s >= static_cast<double>(setup.ofdm.cp_len) * t_samp)
            throw ConfigError("validate: delay spread exceeds the cyclic prefix window");
    }

    if (c.evo.symbol_duration_s <= 0.0)
        throw ConfigError("validate: symbol duration must be positive");
    if (c.evo.sigma2_mu < 0.0 || c.evo.sigma2_phi < 0.0 || c.evo.sigma2_w < 0.0)
        throw ConfigError("validate: walk variances must be nonnegative");
    if ((c.evo.motion == MotionModel::RingAzimuth ||
         c.evo.motion == MotionModel::RingAzimuthElevation) &&
        c.evo.distance_m <= 0.0)
        throw ConfigError("validate: ring motion needs a positive distance");

    if (c.root0 == c.root1) throw ConfigError("validate: pilot roots must differ");

    if (cfg.impairment_variance_phase < 0.0 || cfg.impairment_variance_amp < 0.0)
        throw ConfigError("validate: impairment variances must be nonnegative");
    if (cfg.calibrate) {
        if (cfg.calibration.n_rf == 0 || cfg.calibration.n_rs == 0 ||
            cfg.calibration.pilot_len == 0 || cfg.calibration.rounds == 0)
            throw ConfigError("validate: calibration counts must be positive");
    }
    if (cfg.sweep_workers == 0) throw ConfigError("validate: sweep_workers must be positive");
    if (cfg.sweep_t_d.empty()) throw ConfigError("validate: sweep_t_d must be nonempty");
    for (std::size_t td : cfg.sweep_t_d)
        if (td == 0) throw ConfigError("validate: sweep_t_d entries must be positive");
}

double spectral_efficiency(cxd h_eff, double gamma_linear) {
    return spectral_efficiency_from_gain(std::norm(h_eff), gamma_linear);
}

double spectral_efficiency_from_gain(double gain, double gamma_linear) {
    if (!(gamma_linear > 0.0))
        throw std::invalid_argument("spectral_efficiency: gamma must be positive");
    return std::log2(1.0 + gamma_linear * gain);
}

double beamforming_gain(const ChannelState &ch, const cvec &combiner, const cvec &beam,
                        const OfdmConfig &cfg, const PulseShape &pulse) {
    const cvec coup = path_coupling(ch, combiner, beam);
    double acc = 0.0;
    for (std::size_t k : cfg.occupied) {
        cxd h = 0.0;
        for (std::size_t r = 0; r < coup.size(); ++r)
            h += coup[r] * path_rho(ch.paths[r], k, cfg, pulse);
        acc += std::norm(h);
    }
    return acc / static_cast<double>(cfg.occupied.size());
}

std::vector<std::pair<double, double>> empirical_cdf(std::vector<double> samples) {
    if (samples.empty()) throw std::invalid_argument("empirical_cdf: no samples");
    std::sort(samples.begin(), samples.end());
    std::vector<std::pair<double, double>> out;
    out.reserve(1001);
    const double n = static_cast<double>(samples.size());
    for (int i = 0; i <= 1000; ++i) {
        const double q = static_cast<double>(i) / 1000.0;
        const double pos = q * (n - 1.0);
        const std::size_t lo = static_cast<std::size_t>(pos);
        const std::size_t hi = std::min(lo + 1, samples.size() - 1);
        const double frac = pos - static_cast<double>(lo);
        out.emplace_back(q, samples[lo] * (1.0 - frac) + samples[hi] * frac);
    }
    return out;
}

void emit_cdf(const std::vector<double> &samples, std::ostream &os) {
    os << "quantile,value\n";
    char buf[96];
    for (const auto &[q, v] : empirical_cdf(samples)) {
        std::snprintf(buf, sizeof(buf), "%.4f,%.9g\n", q, v);
        os << buf;
    }
}

namespace {

// Builds the impairment and optional calibration state shared by the
// subcommands. The calibration estimate always targets the drawn impairment
// diagonal, the corrected beams being K C f.
struct RunContext {
    ImpairmentModel impairment;
    bool have_impairment = false;
    CalibrationResult calibration;
    bool have_calibration = false;
};

RunContext prepare_context(SimulationConfig &cfg) {
    RunContext ctx;
    if (cfg.impairment_variance_phase > 0.0 || cfg.impairment_variance_amp > 0.0) {
        ctx.impairment = ImpairmentModel::draw(cfg.campaign.tx, cfg.impairment_variance_phase,
                                               cfg.impairment_variance_amp, cfg.campaign.seed);
        ctx.have_impairment = true;
        cfg.campaign.impairment = ctx.impairment;
    }
    if (cfg.calibrate) {
        const cvec c_true = ctx.have_impairment
                                ? ctx.impairment.c_diag
                                : ImpairmentModel::ideal(cfg.campaign.tx).c_diag;
        RngStream noise(cfg.campaign.seed, "calibration-noise");
        ctx.calibration =
            cfg.calibration.method == CalibrationConfig::Method::SingleSource
                ? calibrate_single(c_true, cfg.campaign.tx, cfg.calibration, noise)
                : calibrate_distributed(c_true, cfg.campaign.tx, cfg.calibration, noise);
        ctx.have_calibration = true;
        cfg.campaign.calibration = ctx.calibration.k;
    }
    return ctx;
}

void print_summary(const CampaignConfig &c, const CampaignResult &r, std::ostream &os) {
    os << protocol_name(c.protocol) << ": mean_gain_db=" << gain_db(r.mean_bf_gain)
       << " mean_se=" << r.mean_se << " mean_abs_err=" << r.mean_abs_err
       << " updates=" << r.updates << " resweeps=" << r.resweeps
       << " feedback_events=" << r.feedback_events << " overhead=" << c.schedule.overhead()
       << "\n";
}

int run_simulate(SimulationConfig cfg, const std::filesystem::path &out) {
    RunContext ctx = prepare_context(cfg);
    const CampaignResult res = run_campaign(cfg.campaign);
    write_trace_csv((out / "trace.csv").string(), res.trace);
    {
        std::ofstream os(out / "gain_cdf.csv", std::ios::binary);
        emit_cdf(res.gains, os);
    }
    {
        std::ofstream os(out / "se_cdf.csv", std::ios::binary);
        emit_cdf(res.ses, os);
    }
    if (ctx.have_calibration) {
        save_calibration_csv((out / "calibration.csv").string(), ctx.calibration,
                             cfg.campaign.tx, cfg.campaign.seed,
                             cfg.calibration.method == CalibrationConfig::Method::SingleSource
                                 ? "single_source"
                                 : "distributed");
    }
    print_summary(cfg.campaign, res, std::cout);
    return 0;
}

int run_calibrate(SimulationConfig cfg, const std::filesystem::path &out) {
    cfg.calibrate = true;
    RunContext ctx = prepare_context(cfg);
    save_calibration_csv((out / "calibration.csv").string(), ctx.calibration, cfg.campaign.tx,
                         cfg.campaign.seed,
                         cfg.calibration.method == CalibrationConfig::Method::SingleSource
                             ? "single_source"
                             : "distributed");
    double err = 0.0;
    for (const cxd &r : ctx.calibration.residual) err += std::norm(r);
    std::cout << "calibration: elements=" << ctx.calibration.k.size()
              << " residual_norm=" << std::sqrt(err)
              << " snr_reference=" << ctx.calibration.snr_reference << "\n";
    return 0;
}

int run_sweep(SimulationConfig cfg, const std::filesystem::path &out) {
    std::vector<Protocol> protocols = cfg.sweep_protocols;
    if (protocols.empty()) protocols.push_back(cfg.campaign.protocol);

    struct Job {
        std::size_t t_d;
        Protocol protocol;
        CampaignResult result;
    };
    std::vector<Job> jobs;
    for (std::size_t td : cfg.sweep_t_d)
        for (Protocol p : protocols) jobs.push_back({td, p, {}});

    RunContext ctx = prepare_context(cfg);
    (void)ctx;

    std::atomic<std::size_t> next{0};
    auto worker = [&]() {
        for (;;) {
            const std::size_t i = next.fetch_add(1);
            if (i >= jobs.size()) return;
            CampaignConfig c = cfg.campaign;
            c.schedule.t_d = jobs[i].t_d;
            c.protocol = jobs[i].protocol;
            jobs[i].result = run_campaign(c);
        }
    };
    const std::size_t n_workers = std::max<std::size_t>(1, std::min(cfg.sweep_workers, jobs.size()));
    std::vector<std::thread> pool;
    for (std::size_t i = 0; i + 1 < n_workers; ++i) pool.emplace_back(worker);
    worker();
    for (std::thread &t : pool) t.join();

    std::ofstream os(out / "sweep_summary.csv", std::ios::binary);
    os << "protocol,t_d,mean_bf_gain,mean_se,mean_abs_err,updates,resweeps,feedback_events,"
          "overhead\n";
    char buf[256];
    for (const Job &j : jobs) {
        const std::string trace_name =
            "trace_td" + std::to_string(j.t_d) + "_" + protocol_name(j.protocol) + ".csv";
        write_trace_csv((out / trace_name).string(), j.result.trace);
        std::snprintf(buf, sizeof(buf), "%s,%zu,%.9g,%.9g,%.9g,%zu,%zu,%zu,%.9g\n",
                      protocol_name(j.protocol).c_str(), j.t_d, j.result.mean_bf_gain,
                      j.result.mean_se, j.result.mean_abs_err, j.result.updates,
                      j.result.resweeps, j.result.feedback_events,
                      static_cast<double>(cfg.campaign.schedule.t_per_dtc) /
                          static_cast<double>(j.t_d));
        os << buf;
        std::cout << "t_d=" << j.t_d << " " << protocol_name(j.protocol)
                  << " mean_gain_db=" << gain_db(j.result.mean_bf_gain)
                  << " mean_se=" << j.result.mean_se << "\n";
    }
    return 0;
}

} // namespace

int run_cli(int argc, char **argv) {
    CLI::App app{"auxiliary-beam-pair angle tracking simulator"};
    app.require_subcommand(1);

    std::string config_path;
    std::string out_dir_flag;
    std::uint64_t seed = 0;
    bool seed_given = false;

    auto add_common = [&](CLI::App *sub) {
        sub->add_option("--config", config_path, "INI configuration file");
        sub->add_option("--out-dir", out_dir_flag, "output directory");
        sub->add_option("--seed", seed, "override the campaign seed")
            ->each([&](const std::string &) { seed_given = true; });
    };

    CLI::App *sim = app.add_subcommand("simulate", "run one tracking campaign");
    add_common(sim);
    CLI::App *cal = app.add_subcommand("calibrate", "estimate per-element corrections");
    add_common(cal);
    CLI::App *swp = app.add_subcommand("sweep", "campaign grid over periods and protocols");
    add_common(swp);
    std::size_t workers_flag = 0;
    swp->add_option("--workers", workers_flag, "parallel campaigns");

    try {
        app.parse(argc, argv);
    } catch (const CLI::CallForHelp &e) {
        return app.exit(e);
    } catch (const CLI::ParseError &e) {
        app.exit(e);
        return 2;
    }

    try {
        SimulationConfig cfg = config_path.empty() ? default_config() : load_config(config_path);
        if (seed_given) cfg.campaign.seed = seed;
        if (workers_flag > 0) cfg.sweep_workers = workers_flag;

        std::string out_dir = !out_dir_flag.empty() ? out_dir_flag : cfg.out_dir;
        if (out_dir.empty()) {
            const char *env = std::getenv("ABTRACK_OUT_DIR");
            out_dir = env != nullptr && *env != '\0' ? env : "out";
        }
        const std::filesystem::path out(out_dir);
        std::filesystem::create_directories(out);

        validate(cfg);
        if (sim->parsed()) return run_simulate(std::move(cfg), out);
        if (cal->parsed()) return run_calibrate(std::move(cfg), out);
        return run_sweep(std::move(cfg), out);
    } catch (const ConfigError &e) {
        std::cerr << "config error: " << e.what() << "\n";
        return 2;
    } catch (const std::exception &e) {
        std::cerr << "error: " << e.what() << "\n";
        return 3;
    }
}

} // namespace abt
