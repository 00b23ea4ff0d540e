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

#include "abtrack/channel.hpp"
#include "abtrack/estimator.hpp"

#include <cstdint>
#include <string>
#include <vector>

namespace abt {

// Data slots carry payload on the current anchor beams; every t_d-th slot is
// a tracking slot hosting t_per_dtc auxiliary-pair probes. Overhead is
// t_per_dtc / t_d.
struct FrameSchedule {
    std::size_t t_tot = 10000;
    std::size_t t_d = 100;
    std::size_t t_per_dtc = 1;

    bool is_dtc(std::size_t slot) const { return slot > 0 && slot % t_d == 0; }
    std::size_t dtc_count() const { return t_tot / t_d; }
    double overhead() const {
        return static_cast<double>(t_per_dtc) / static_cast<double>(t_d);
    }
};

// Scalar quantizer trained with Lloyd-Max iterations. Levels are sorted;
// boundaries are the midpoints between adjacent levels.
struct RatioCodebook {
    std::vector<double> levels;
    std::vector<double> boundaries;
    unsigned bits = 0;
};

// Alternates centroid and nearest-neighbor updates until the distortion
// improvement falls below 1e-9. Throws std::invalid_argument when the
// samples cannot support 2^bits distinct levels.
RatioCodebook lloyd_train(std::vector<double> samples, unsigned bits);

// Nearest level; exact midpoints resolve to the lower index.
std::size_t quantize(double zeta, const RatioCodebook &cb);
double dequantize(std::size_t index, const RatioCodebook &cb);

enum class Protocol {
    BsDirect,        // quantized ratio fed back every probe; BS gates on the angle step
    UeDirect,        // UE triggers on anchor-strength deviation, then feeds the ratio back
    UeDifferential,  // UE gates on the angle step, feeds back sign + |zeta - zeta_ref|
    BsDifferential,  // BS polls every probe for the differential message, gates itself
    GridOfBeams,     // codebook neighbor search, no ratio estimation
    Genie,           // anchors refreshed to the true angles at every tracking slot
    NoTracking
};

std::string protocol_name(Protocol p);

struct TrackingThresholds {
    double angle = 0.174533;        // anchor-update gate, spatial-frequency units
    double strength_db = 3.0;       // UE-direct trigger and grid-of-beams keep gate
    double zeta_saturation = 0.70;  // |zeta| at which the pair is declared outrun
    double resweep_drop_db = 10.0;  // pair-power collapse that forces re-acquisition
    bool resweep_enabled = true;
};

struct TraceRow {
    std::size_t slot = 0;
    double true_psi = 0.0;
    double true_theta = 0.0;
    double anchor_az = 0.0;
    double anchor_el = 0.0;
    double zeta = 0.0;           // most recent ratio-metric measurement
    unsigned feedback_bits = 0;  // bits sent over the feedback link this slot
    double bf_gain = 0.0;
    enum class Event { None, Update, Resweep, Feedback } event = Event::None;
};

std::string event_name(TraceRow::Event e);

struct CampaignConfig {
    ArrayGeometry tx = make_upa(1, 16);
    ArrayGeometry rx = make_ula(8);
    InitialChannelConfig init;
    EvolutionParams evo;

    PilotMode pilot_mode = PilotMode::Orthogonal;
    unsigned root0 = 25, root1 = 34;
    PulseShape pulse;
    std::size_t pilot_len = 63;

    Protocol protocol = Protocol::BsDirect;
    FrameSchedule schedule;
    TrackingThresholds thresholds;

    std::size_t delta_l_az = 1;  // pair offset 2 pi l / n_y
    std::size_t delta_l_el = 1;  // pair offset 2 pi l / n_x
    bool track_elevation = false;  // alternate azimuth/elevation pairs across tracking slots

    double snr_db = 0.0;  // per receive sample; +inf disables noise
    unsigned feedback_bits_direct = 4;
    unsigned feedback_bits_differential = 3;  // plus one sign bit
    bool quantize_feedback = true;
    std::size_t quantizer_training_samples = 4096;

    std::size_t gob_supporting = 2;  // first-ring neighbors probed per tracking slot
    std::size_t gob_backup = 4;      // second-ring neighbors probed when support fails

    ImpairmentModel impairment;  // empty c_diag = ideal elements
    cvec calibration;            // empty = uncalibrated

    std::uint64_t seed = 1;
};

struct CampaignResult {
    std::vector<TraceRow> trace;
    double mean_bf_gain = 0.0;
    double mean_se = 0.0;       // bits/s/Hz, sample mean over slots
    double mean_abs_err = 0.0;  // |true psi - anchor az|, spatial frequency
    std::size_t updates = 0;
    std::size_t resweeps = 0;
    std::size_t feedback_events = 0;
    std::vector<double> gains;  // per-slot beamforming gains
    std::vector<double> ses;    // per-slot spectral efficiencies
};

// Runs one tracking campaign. All randomness derives from cfg.seed through
// named substreams ("channel-init", "channel-fading", "motion-jitter",
// "measurement-noise", "quantizer-training"), so campaigns that share a seed
// see identical channel evolutions regardless of protocol.
CampaignResult run_campaign(const CampaignConfig &cfg);

// Header: slot,true_psi_rad,true_theta_rad,anchor_az_rad,anchor_el_rad,zeta,
// feedback_bits,bf_gain,event. Floats carry 9 significant digits.
void write_trace_csv(const std::string &path, const std::vector<TraceRow> &trace);
std::string trace_csv_string(const std::vector<TraceRow> &trace);

} // namespace abt
