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

#include "abtrack/calibration.hpp"

#include <cmath>
#include <cstdio>
#include <fstream>
#include <numbers>
#include <numeric>
#include <sstream>
#include <stdexcept>

namespace abt {

namespace {

constexpr double two_pi = 2.0 * std::numbers::pi;

double effective_noise_std(const CalibrationConfig &cfg, double snr_reference) {
    if (!cfg.snr_db.has_value()) return 0.0;
    if (cfg.pilot_len == 0 || cfg.rounds == 0)
        throw std::invalid_argument("calibrate: pilot_len and rounds must be positive");
    const double raw_var = snr_reference * std::pow(10.0, -*cfg.snr_db / 10.0);
    return std::sqrt(raw_var / static_cast<double>(cfg.pilot_len * cfg.rounds));
}

CalibrationResult finish(const cvec &c_true, cvec c_hat, double snr_reference) {
    CalibrationResult res;
    res.snr_reference = snr_reference;
    res.k.resize(c_hat.size());
    res.residual.resize(c_hat.size());
    for (std::size_t i = 0; i < c_hat.size(); ++i) {
        if (std::abs(c_hat[i]) < 1e-9)
            throw std::runtime_error("calibrate: estimated element response is near zero");
        res.k[i] = 1.0 / c_hat[i];
        res.residual[i] = c_hat[i] - c_true[i];
    }
    res.c_hat = std::move(c_hat);
    return res;
}

} // namespace

CalibrationResult calibrate_single(const cvec &c_true, const ArrayGeometry &g,
                                   const CalibrationConfig &cfg, RngStream &noise) {
    const std::size_t n = g.total();
    if (c_true.size() != n)
        throw std::invalid_argument("calibrate_single: response dimension mismatch");

    // One receive beam per DFT grid point; the stacked conjugated beams form a
    // unitary scan of the broadside source.
    CMat a(n, n);
    std::size_t row = 0;
    for (std::size_t ix = 0; ix < g.n_x; ++ix) {
        for (std::size_t iy = 0; iy < g.n_y; ++iy) {
            const cvec beam = steering_upa(g, two_pi * static_cast<double>(ix) / g.n_x,
                                           two_pi * static_cast<double>(iy) / g.n_y);
            for (std::size_t col = 0; col < n; ++col) a(row, col) = std::conj(beam[col]);
            ++row;
        }
    }

    cvec y = matvec(a, c_true);
    double snr_reference = 0.0;
    for (const cxd &v : y) snr_reference += std::norm(v);
    snr_reference /= static_cast<double>(y.size());

    const double sigma = effective_noise_std(cfg, snr_reference);
    for (cxd &v : y) {
        const cxd e = noise.cnormal();
        v += sigma * e;
    }

    return finish(c_true, solve_linear(a, y), snr_reference);
}

CalibrationResult calibrate_distributed(const cvec &c_true, const ArrayGeometry &g,
                                        const CalibrationConfig &cfg, RngStream &noise) {
    const std::size_t n = g.total();
    if (c_true.size() != n)
        throw std::invalid_argument("calibrate_distributed: response dimension mismatch");
    if (cfg.n_rf == 0 || cfg.n_rs == 0)
        throw std::invalid_argument("calibrate_distributed: n_rf and n_rs must be positive");

    std::vector<SpatialPair> beams = cfg.beam_dirs;
    std::vector<SpatialPair> sources = cfg.source_dirs;
    if (beams.empty() != sources.empty())
        throw std::invalid_argument(
            "calibrate_distributed: override source and beam grids together");

    if (beams.empty()) {
        // Factor the RF beams across the axes, coarse beam grid against a fine
        // source grid; the phase differences then scan every DFT residue once.
        const std::size_t rf_y = std::gcd(cfg.n_rf, g.n_y);
        const std::size_t rf_x = cfg.n_rf / rf_y;
        if (rf_x * rf_y != cfg.n_rf || g.n_y % rf_y != 0 || g.n_x % rf_x != 0 ||
            rf_x > g.n_x)
            throw std::runtime_error(
                "calibrate_distributed: n_rf does not factor across the array axes");
        const std::size_t rs_x = g.n_x / rf_x;
        const std::size_t rs_y = g.n_y / rf_y;
        if (rs_x * rs_y != cfg.n_rs)
            throw std::runtime_error(
                "calibrate_distributed: need n_rs = " + std::to_string(rs_x * rs_y) +
                " sources for this geometry, configured " + std::to_string(cfg.n_rs));
        for (std::size_t jx = 0; jx < rf_x; ++jx)
            for (std::size_t jy = 0; jy < rf_y; ++jy)
                beams.push_back({two_pi * static_cast<double>(jx) / rf_x,
                                 two_pi * static_cast<double>(jy) / rf_y});
        for (std::size_t sx = 0; sx < rs_x; ++sx)
            for (std::size_t sy = 0; sy < rs_y; ++sy)
                sources.push_back({two_pi * static_cast<double>(sx) / g.n_x,
                                   two_pi * static_cast<double>(sy) / g.n_y});
    }

    const std::size_t rows = beams.size() * sources.size();
    if (rows < n)
        throw std::runtime_error(
            "calibrate_distributed: " + std::to_string(sources.size()) + " sources x " +
            std::to_string(beams.size()) + " beams give " + std::to_string(rows) +
            " measurements for " + std::to_string(n) + " unknowns");

    const double unnorm = std::sqrt(static_cast<double>(n));
    CMat v(rows, n);
    std::size_t row = 0;
    for (const SpatialPair &src : sources) {
        cvec a_src = steering_upa(g, src.theta, src.psi);
        for (cxd &x : a_src) x *= unnorm;
        for (const SpatialPair &bm : beams) {
            const cvec b = steering_upa(g, bm.theta, bm.psi);
            for (std::size_t col = 0; col < n; ++col)
                v(row, col) = std::conj(b[col]) * a_src[col];
            ++row;
        }
    }

    cvec y = matvec(v, c_true);
    double snr_reference = 0.0;
    for (const cxd &val : y) snr_reference += std::norm(val);
    snr_reference /= static_cast<double>(y.size());

    const double sigma = effective_noise_std(cfg, snr_reference);
    for (cxd &val : y) {
        const cxd e = noise.cnormal();
        val += sigma * e;
    }

    cvec c_hat;
    try {
        c_hat = solve_linear(v, y);
    } catch (const std::runtime_error &) {
        throw std::runtime_error(
            "calibrate_distributed: rank-deficient direction layout (" +
            std::to_string(sources.size()) + " sources x " + std::to_string(beams.size()) +
            " beams over " + std::to_string(g.n_x) + "x" + std::to_string(g.n_y) +
            " elements)");
    }
    return finish(c_true, std::move(c_hat), snr_reference);
}

cvec apply_calibration(const cvec &k, const cvec &beam) {
    if (k.size() != beam.size())
        throw std::invalid_argument("apply_calibration: dimension mismatch");
    cvec out(beam.size());
    for (std::size_t i = 0; i < beam.size(); ++i) out[i] = k[i] * beam[i];
    return out;
}

void save_calibration_csv(const std::string &path, const CalibrationResult &r,
                          const ArrayGeometry &g, std::uint64_t seed,
                          const std::string &method) {
    std::ofstream os(path, std::ios::binary);
    if (!os) throw std::runtime_error("save_calibration_csv: cannot open " + path);
    os << "# geometry=" << g.n_x << "x" << g.n_y << ",seed=" << seed << ",method=" << method
       << "\n";
    os << "element_index,k_re,k_im\n";
    char buf[128];
    for (std::size_t i = 0; i < r.k.size(); ++i) {
        std::snprintf(buf, sizeof(buf), "%zu,%.17g,%.17g\n", i, r.k[i].real(), r.k[i].imag());
        os << buf;
    }
}

cvec load_calibration_csv(const std::string &path) {
    std::ifstream is(path);
    if (!is) throw std::runtime_error("load_calibration_csv: cannot open " + path);
    cvec k;
    std::string line;
    bool header_seen = false;
    while (std::getline(is, line)) {
        if (line.empty() || line[0] == '#') continue;
        if (!header_seen) {
            if (line != "element_index,k_re,k_im")
                throw std::runtime_error("load_calibration_csv: unexpected header: " + line);
            header_seen = true;
            continue;
        }
        std::istringstream ss(line);
        std::string field;
        std::size_t idx = 0;
        double re = 0.0, im = 0.0;
        if (!std::getline(ss, field, ',')) break;
        idx = static_cast<std::size_t>(std::stoull(field));
        if (!std::getline(ss, field, ','))
            throw std::runtime_error("load_calibration_csv: truncated row");
        re = std::stod(field);
        if (!std::getline(ss, field, ','))
            throw std::runtime_error("load_calibration_csv: truncated row");
        im = std::stod(field);
        if (idx != k.size())
            throw std::runtime_error("load_calibration_csv: rows out of order");
        k.emplace_back(re, im);
    }
    if (!header_seen) throw std::runtime_error("load_calibration_csv: missing header");
    return k;
}

} // namespace abt
