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

#ifndef CBF_CHANNEL_HPP
#define CBF_CHANNEL_HPP

#include "cbf/common.hpp"
#include "cbf/geometry.hpp"

#include <span>
#include <vector>

namespace cbf
{

struct ArrayGeometry
{
    int m_y = 8;          // columns (horizontal)
    int m_z = 2;          // rows (vertical)
    double spacing = 0.5; // wavelengths

    int num_elements() const { return m_y * m_z; }
    void validate() const;
};

struct OFDMConfig
{
    int k_subcarriers = 256;
    int cp_length = 64;
    double sample_period = 1e-9; // s
    double tx_power = 1.0;       // W (downlink, total)
    double noise_power = 0.0;    // W

    double snr_linear() const { return tx_power / (k_subcarriers * noise_power); }
    void validate() const;

    // T_S = 1/bandwidth and thermal noise for the given bandwidth and noise figure.
    static OFDMConfig make(int k, int cp, double bandwidth_hz, double tx_power_dbm, double noise_figure_db);
};

// Thermal noise power: -174 dBm/Hz + 10 log10(B) + NF.
double thermal_noise_dbm(double bandwidth_hz, double noise_figure_db);

enum class PulseKind
{
    DeltaNearest,
    RaisedCosine,
};

struct Pulse
{
    PulseKind kind = PulseKind::DeltaNearest;
    double rolloff = 0.25;
};

// Element (iy, iz) sits at row-major index iz * m_y + iy.
CVec array_response(const ArrayGeometry& geom, double azimuth, double elevation);

// Same response from directional cosines (u_y = cos(el) sin(az), u_z = sin(el)).
CVec array_response_dircos(const ArrayGeometry& geom, double u_y, double u_z);

double pulse(double t, double sample_period, const Pulse& p);

// D x M taps (row d is the delay-d channel vector).
struct DelayChannel
{
    CMat taps;
};

// K x M matrix; row k is h_k^T.
struct FreqChannel
{
    CMat h;

    int num_subcarriers() const { return static_cast<int>(h.rows()); }
    int num_antennas() const { return static_cast<int>(h.cols()); }
};

// Delays are measured relative to `timing_offset` (the receiver's symbol timing).
DelayChannel delay_channel(std::span<const RayPath> rays, const ArrayGeometry& geom, const OFDMConfig& ofdm,
                           const Pulse& p = {}, double timing_offset = 0.0);

FreqChannel freq_channel(const DelayChannel& dc, int k_subcarriers);

// Earliest delay in the list (0 for an empty list). Each BS locks its symbol
// timing to this arrival.
double first_arrival(std::span<const RayPath> rays);

// Removes paths arriving more than (D-1) T_S after `timing_offset`; they would
// spill outside the cyclic prefix. Returns the number of removed paths.
std::size_t drop_outside_cp(std::vector<RayPath>& rays, const OFDMConfig& ofdm, double timing_offset);

} // namespace cbf

#endif
