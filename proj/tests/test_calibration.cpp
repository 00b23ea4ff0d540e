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

#define DOCTEST_CONFIG_IMPLEMENT_WITH_MAIN
#include <doctest.h>

#include "abtrack/calibration.hpp"
#include "abtrack/estimator.hpp"

#include <cmath>
#include <cstdio>
#include <fstream>
#include <numbers>
#include <string>
#include <vector>

using namespace abt;

namespace {

double residual_norm(const CalibrationResult &r) {
    double acc = 0.0;
    for (const cxd &v : r.residual) acc += std::norm(v);
    return std::sqrt(acc);
}

cvec impaired_response(const ArrayGeometry &g, std::uint64_t seed) {
    return ImpairmentModel::draw(g, 0.5, 0.5, seed).c_diag;
}

} // namespace

TEST_CASE("single-source calibration is exact without noise") {
    const ArrayGeometry g = make_upa(4, 8);
    const cvec c_true = impaired_response(g, 5);
    CalibrationConfig cfg;
    cfg.method = CalibrationConfig::Method::SingleSource;
    cfg.snr_db.reset();
    RngStream noise(1, "calibration-noise");
    const CalibrationResult r = calibrate_single(c_true, g, cfg, noise);
    CHECK(residual_norm(r) < 1e-10);
    REQUIRE(r.k.size() == c_true.size());
    for (std::size_t i = 0; i < c_true.size(); ++i)
        CHECK(std::abs(r.k[i] * c_true[i] - cxd(1.0, 0.0)) < 1e-10);
}

TEST_CASE("the single-source scan is unitary: reference power is mean |c|^2") {
    const ArrayGeometry g = make_upa(2, 8);
    const cvec ones(g.total(), cxd(1.0, 0.0));
    CalibrationConfig cfg;
    cfg.snr_db.reset();
    RngStream noise(2, "calibration-noise");
    const CalibrationResult r = calibrate_single(ones, g, cfg, noise);
    CHECK(r.snr_reference == doctest::Approx(1.0).epsilon(1e-12));

    const cvec c_true = impaired_response(g, 9);
    double power = 0.0;
    for (const cxd &v : c_true) power += std::norm(v);
    power /= static_cast<double>(c_true.size());
    RngStream noise2(3, "calibration-noise");
    const CalibrationResult r2 = calibrate_single(c_true, g, cfg, noise2);
    CHECK(r2.snr_reference == doctest::Approx(power).epsilon(1e-12));
}

TEST_CASE("distributed calibration on the factored grid is exact without noise") {
    CalibrationConfig cfg;
    cfg.method = CalibrationConfig::Method::Distributed;
    cfg.snr_db.reset();

    // 1 x 16 panel: 4 beams along the azimuth axis, 4 sources refine them.
    {
        const ArrayGeometry g = make_upa(1, 16);
        const cvec c_true = impaired_response(g, 11);
        cfg.n_rf = 4;
        cfg.n_rs = 4;
        RngStream noise(4, "calibration-noise");
        const CalibrationResult r = calibrate_distributed(c_true, g, cfg, noise);
        CHECK(residual_norm(r) < 1e-10);
    }

    // 4 x 8 panel: gcd factoring puts all 4 beams on the azimuth axis, so the
    // sources must cover 4 x 2 residues.
    {
        const ArrayGeometry g = make_upa(4, 8);
        const cvec c_true = impaired_response(g, 12);
        cfg.n_rf = 4;
        cfg.n_rs = 8;
        RngStream noise(5, "calibration-noise");
        const CalibrationResult r = calibrate_distributed(c_true, g, cfg, noise);
        CHECK(residual_norm(r) < 1e-10);
    }
}

TEST_CASE("a full beam bank with one source reduces to the single-source scan") {
    const ArrayGeometry g = make_ula(16);
    const cvec c_true = impaired_response(g, 13);
    CalibrationConfig cfg;
    cfg.snr_db.reset();
    RngStream n1(6, "calibration-noise");
    const CalibrationResult single = calibrate_single(c_true, g, cfg, n1);

    cfg.method = CalibrationConfig::Method::Distributed;
    cfg.n_rf = 16;
    cfg.n_rs = 1;
    RngStream n2(7, "calibration-noise");
    const CalibrationResult dist = calibrate_distributed(c_true, g, cfg, n2);
    REQUIRE(single.c_hat.size() == dist.c_hat.size());
    for (std::size_t i = 0; i < dist.c_hat.size(); ++i)
        CHECK(std::abs(single.c_hat[i] - dist.c_hat[i]) < 1e-10);
}

TEST_CASE("distributed geometry validation names the required source count") {
    const ArrayGeometry g = make_upa(4, 8);
    const cvec c_true(g.total(), cxd(1.0, 0.0));
    CalibrationConfig cfg;
    cfg.method = CalibrationConfig::Method::Distributed;
    cfg.snr_db.reset();
    RngStream noise(8, "calibration-noise");

    cfg.n_rf = 4;
    cfg.n_rs = 4;  // the 4 x 8 panel needs 8
    CHECK_THROWS_WITH_AS(calibrate_distributed(c_true, g, cfg, noise),
                         doctest::Contains("need n_rs = 8"), std::runtime_error);

    cfg.n_rf = 3;  // does not divide either axis
    cfg.n_rs = 8;
    CHECK_THROWS_WITH_AS(calibrate_distributed(c_true, g, cfg, noise),
                         doctest::Contains("does not factor"), std::runtime_error);

    cfg.n_rf = 0;
    CHECK_THROWS_AS(calibrate_distributed(c_true, g, cfg, noise), std::invalid_argument);
}

TEST_CASE("direction overrides must come as a pair and span the array") {
    const ArrayGeometry g = make_ula(4);
    const cvec c_true(g.total(), cxd(1.0, 0.0));
    CalibrationConfig cfg;
    cfg.method = CalibrationConfig::Method::Distributed;
    cfg.snr_db.reset();
    RngStream noise(9, "calibration-noise");

    cfg.source_dirs = {{0.0, 0.3}};
    cfg.beam_dirs.clear();
    CHECK_THROWS_AS(calibrate_distributed(c_true, g, cfg, noise), std::invalid_argument);

    // Too few direction products for the unknowns.
    cfg.beam_dirs = {{0.0, 0.0}, {0.0, std::numbers::pi / 2.0}};
    CHECK_THROWS_WITH_AS(calibrate_distributed(c_true, g, cfg, noise),
                         doctest::Contains("measurements for"), std::runtime_error);

    // Duplicated sources leave the stacked system rank deficient.
    cfg.source_dirs = {{0.0, 0.3}, {0.0, 0.3}};
    CHECK_THROWS_WITH_AS(calibrate_distributed(c_true, g, cfg, noise),
                         doctest::Contains("rank-deficient direction layout"),
                         std::runtime_error);

    // A proper override grid solves exactly.
    cfg.source_dirs.clear();
    cfg.beam_dirs.clear();
    for (std::size_t j = 0; j < 2; ++j)
        cfg.beam_dirs.push_back({0.0, 2.0 * std::numbers::pi * static_cast<double>(j) / 2.0});
    for (std::size_t s = 0; s < 2; ++s)
        cfg.source_dirs.push_back({0.0, 2.0 * std::numbers::pi * static_cast<double>(s) / 4.0});
    const cvec c_imp = impaired_response(g, 14);
    const CalibrationResult r = calibrate_distributed(c_imp, g, cfg, noise);
    CHECK(residual_norm(r) < 1e-10);
}

TEST_CASE("integration gain: more snr means smaller residuals") {
    const ArrayGeometry g = make_ula(8);
    CalibrationConfig lo, hi;
    lo.snr_db = 0.0;
    hi.snr_db = 30.0;
    lo.pilot_len = hi.pilot_len = 1;
    lo.rounds = hi.rounds = 1;

    double err_lo = 0.0, err_hi = 0.0;
    for (std::uint64_t seed = 1; seed <= 6; ++seed) {
        const cvec c_true = impaired_response(g, seed);
        RngStream n1(seed, "calibration-noise");
        RngStream n2(seed, "calibration-noise");
        err_lo += residual_norm(calibrate_single(c_true, g, lo, n1));
        err_hi += residual_norm(calibrate_single(c_true, g, hi, n2));
    }
    CHECK(err_hi < err_lo);

    // Integrating over pilot_len * rounds samples recovers the same factor.
    CalibrationConfig integrated = lo;
    integrated.pilot_len = 63;
    integrated.rounds = 512;
    double err_int = 0.0;
    for (std::uint64_t seed = 1; seed <= 6; ++seed) {
        const cvec c_true = impaired_response(g, seed);
        RngStream n(seed, "calibration-noise");
        err_int += residual_norm(calibrate_single(c_true, g, integrated, n));
    }
    CHECK(err_int < err_lo / 100.0);
}

TEST_CASE("a near-zero element response cannot be inverted") {
    const ArrayGeometry g = make_ula(4);
    cvec c_true(g.total(), cxd(1.0, 0.0));
    c_true[2] = cxd(0.0, 0.0);
    CalibrationConfig cfg;
    cfg.snr_db.reset();
    RngStream noise(10, "calibration-noise");
    CHECK_THROWS_WITH_AS(calibrate_single(c_true, g, cfg, noise),
                         doctest::Contains("near zero"), std::runtime_error);
}

TEST_CASE("the ratio metric is invariant to a common calibration scale") {
    const ArrayGeometry tx = make_upa(1, 16);
    const ArrayGeometry rx = make_ula(4);
    const cvec k = impaired_response(tx, 15);
    cvec ks = k;
    const cxd s = 0.8 * std::exp(cxd(0.0, 0.6));
    for (cxd &v : ks) v *= s;

    ChannelState ch;
    ch.tx = tx;
    ch.rx = rx;
    PathState p;
    p.gain = cxd(0.9, 0.1);
    p.psi = 0.27;
    p.nu = 0.4;
    ch.paths.push_back(p);
    const cvec w = steering_upa(rx, 0.0, p.nu);
    const PilotSetup pilots = make_pilot_setup(PilotMode::Orthogonal);
    const double delta = 2.0 * std::numbers::pi / 16.0;

    RngStream na(11, "measurement-noise"), nb(11, "measurement-noise");
    const AuxiliaryBeamPair pa = make_beam_pair(tx, 0.0, 0.0, delta, BeamAxis::Azimuth, &k);
    const AuxiliaryBeamPair pb = make_beam_pair(tx, 0.0, 0.0, delta, BeamAxis::Azimuth, &ks);
    const StrengthSample sa = probe_pair(ch, pa, w, pilots, 0.0, na);
    const StrengthSample sb = probe_pair(ch, pb, w, pilots, 0.0, nb);
    const double za = ratio_metric(sa.chi_minus, sa.chi_plus);
    const double zb = ratio_metric(sb.chi_minus, sb.chi_plus);
    CHECK(za == doctest::Approx(zb).epsilon(1e-12));
    CHECK(sb.chi_minus == doctest::Approx(std::norm(s) * sa.chi_minus).epsilon(1e-12));
}

TEST_CASE("apply_calibration is elementwise and checks dimensions") {
    const cvec k = {cxd(2.0, 0.0), cxd(0.0, 1.0)};
    const cvec b = {cxd(1.0, 1.0), cxd(3.0, 0.0)};
    const cvec out = apply_calibration(k, b);
    CHECK(out[0] == cxd(2.0, 2.0));
    CHECK(out[1] == cxd(0.0, 3.0));
    CHECK_THROWS_AS(apply_calibration(k, cvec(3)), std::invalid_argument);
}

TEST_CASE("calibration csv round trips exactly") {
    const ArrayGeometry g = make_upa(4, 8);
    const cvec c_true = impaired_response(g, 16);
    CalibrationConfig cfg;
    cfg.snr_db.reset();
    RngStream noise(12, "calibration-noise");
    const CalibrationResult r = calibrate_single(c_true, g, cfg, noise);

    const std::string path = "/tmp/abtrack_test_cal.csv";
    save_calibration_csv(path, r, g, 9, "single_source");

    std::ifstream in(path);
    std::string first;
    std::getline(in, first);
    CHECK(first == "# geometry=4x8,seed=9,method=single_source");
    in.close();

    const cvec k = load_calibration_csv(path);
    REQUIRE(k.size() == r.k.size());
    for (std::size_t i = 0; i < k.size(); ++i) {
        CHECK(k[i].real() == r.k[i].real());
        CHECK(k[i].imag() == r.k[i].imag());
    }
    std::remove(path.c_str());
}

TEST_CASE("calibration csv loading rejects malformed files") {
    CHECK_THROWS_AS(load_calibration_csv("/tmp/abtrack_no_such_file.csv"),
                    std::runtime_error);

    const std::string path = "/tmp/abtrack_test_cal_bad.csv";
    {
        std::ofstream os(path);
        os << "wrong,header,line\n0,1.0,0.0\n";
    }
    CHECK_THROWS_WITH_AS(load_calibration_csv(path), doctest::Contains("unexpected header"),
                         std::runtime_error);
    {
        std::ofstream os(path);
        os << "element_index,k_re,k_im\n1,1.0,0.0\n";
    }
    CHECK_THROWS_WITH_AS(load_calibration_csv(path), doctest::Contains("out of order"),
                         std::runtime_error);
    {
        std::ofstream os(path);
        os << "element_index,k_re,k_im\n0,1.0\n";
    }
    CHECK_THROWS_WITH_AS(load_calibration_csv(path), doctest::Contains("truncated"),
                         std::runtime_error);
    {
        std::ofstream os(path);
        os << "# only a comment\n";
    }
    CHECK_THROWS_WITH_AS(load_calibration_csv(path), doctest::Contains("missing header"),
                         std::runtime_error);
    std::remove(path.c_str());
}
