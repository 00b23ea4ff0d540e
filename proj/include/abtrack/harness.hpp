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

#include "abtrack/calibration.hpp"
#include "abtrack/tracking.hpp"

#include <iosfwd>
#include <stdexcept>
#include <string>
#include <utility>
#include <vector>

namespace abt {

struct ConfigError : std::runtime_error {
    using std::runtime_error::runtime_error;
};

struct SimulationConfig {
    CampaignConfig campaign;

    double impairment_variance_phase = 0.0;
    double impairment_variance_amp = 0.0;

    bool calibrate = false;
    CalibrationConfig calibration;

    std::vector<std::size_t> sweep_t_d = {10, 100, 1000, 2000};
    std::vector<Protocol> sweep_protocols;  // empty = just campaign.protocol
    std::size_t sweep_workers = 1;

    std::string out_dir;  // empty defers to --out-dir, ABTRACK_OUT_DIR, "out"
};

// Committed reference profile: 100 km/h azimuth ring motion observed at
// 100 m, 30 km/h vertical motion, 3.7 us slots, 1e4-slot campaigns with a
// 100-slot tracking period, 1 degree/slot jitter, 16-element azimuth axis,
// 8-element receive array.
SimulationConfig default_config();

// INI-style file with [section] headers mirroring the module names. Throws
// ConfigError for unreadable files, unknown keys, or unparsable values.
SimulationConfig load_config(const std::string &path);

// Cross-field checks (pair offsets legal for the geometry, schedule nonempty,
// positive SNR scale, delays inside the CP window). Throws ConfigError.
void validate(const SimulationConfig &cfg);

// log2(1 + gamma |h_eff|^2); gamma must be positive.
double spectral_efficiency(cxd h_eff, double gamma_linear);
double spectral_efficiency_from_gain(double gain, double gamma_linear);

// |w^H H[k] f|^2 averaged over the occupied subcarriers.
double beamforming_gain(const ChannelState &ch, const cvec &combiner, const cvec &beam,
                        const OfdmConfig &cfg, const PulseShape &pulse);

// 1001 evenly spaced quantile points of the empirical distribution,
// (quantile, value) pairs; degenerate samples produce a constant column.
std::vector<std::pair<double, double>> empirical_cdf(std::vector<double> samples);
void emit_cdf(const std::vector<double> &samples, std::ostream &os);

// Entry point behind the command-line tool: subcommands simulate, calibrate,
// sweep. Returns 0 on success, 2 for configuration or usage errors, 3 for
// runtime failures.
int run_cli(int argc, char **argv);

} // namespace abt
