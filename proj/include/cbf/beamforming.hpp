// SPDX-License-Identifier: Apache-2.0
//
// cbf - coordinated mmWave beamforming simulator and beam prediction library
// Copyright (C) 2026 The cbf contributors
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

#ifndef CBF_BEAMFORMING_HPP
#define CBF_BEAMFORMING_HPP

#include "cbf/codebook.hpp"

#include <cstdint>
#include <span>
#include <vector>

namespace cbf
{

// Per-BS channels seen by one user, indexed by BS.
using Channels = std::vector<FreqChannel>;

// |h_{k,n}^T g_p|^2 for every subcarrier k (rows) and codeword p (columns).
Eigen::MatrixXd beam_gains(const FreqChannel& fc, const Codebook& cb);

// R^(p) = (1/K) sum_k log2(1 + SNR |h_k^T g_p|^2), one entry per codeword.
std::vector<double> per_beam_rates(const FreqChannel& fc, const Codebook& cb, double snr);

// Argmax, lowest index on ties.
int baseline_select(std::span<const double> rates);

// f^CP_k = (h_k^T F^RF)^H / ||h_k^T F^RF||, returned as a K x N matrix (row k).
// Subcarriers with an all-zero effective channel get e_1 and are counted.
struct Baseband
{
    CMat f;
    int degenerate_subcarriers = 0;
};
Baseband mrt_baseband(const Channels& fcs, std::span<const CVec> rf_beams);

// (1/K) sum_k log2(1 + SNR |sum_n h_{k,n}^T f^RF_n f^CP_{k,n}|^2) for an
// arbitrary baseband precoder (one row per subcarrier).
double achievable_rate(const Channels& fcs, std::span<const CVec> rf_beams, const CMat& baseband, double snr);

// Rate under MRT combining: (1/K) sum_k log2(1 + SNR sum_n |h_{k,n}^T f^RF_n|^2).
double coordinated_rate(const Channels& fcs, std::span<const CVec> rf_beams, double snr);
double coordinated_rate(const Channels& fcs, const Codebook& cb, std::span<const int> beams, double snr);

struct JointResult
{
    std::vector<int> beams;
    double rate = 0.0;
    bool exact = true; // false: disjoint selection used as a proxy for R*
};

// Exact maximiser of coordinated_rate over the codebook product. Throws
// BudgetExceeded when N_tr^N exceeds `budget`.
JointResult joint_exhaustive(const Channels& fcs, const Codebook& cb, double snr, std::uint64_t budget = 10'000'000);

// joint_exhaustive when affordable, otherwise disjoint per-BS selection flagged as a proxy.
JointResult upper_bound(const Channels& fcs, const Codebook& cb, double snr, std::uint64_t budget = 10'000'000);

struct TimingModel
{
    double pilot_time = 10e-6;          // T_p, s
    double beam_coherence_time = 0.023; // T_B, s
};

// T_B(v) = 23 ms at 30 mph, scaled inversely with speed.
double beam_coherence_time(double speed_mps);
double beam_coherence_time_mph(double speed_mph);

// Fraction of the beam coherence time left for data, max(0, 1 - t_train / t_b).
// `clamped` is set when the training time consumes the whole block.
double data_fraction(double t_train, double t_b, bool* clamped = nullptr);

double effective_rate(double rate, double t_train, double t_b);

// Training time of exhaustive uplink beam training: N_tr T_p.
inline double baseline_training_time(int n_tr, const TimingModel& t) { return n_tr * t.pilot_time; }

// Omni pilot plus N_B refinement pilots: (N_B + 1) T_p.
inline double prediction_training_time(int n_b, const TimingModel& t) { return (n_b + 1) * t.pilot_time; }

} // namespace cbf

#endif
