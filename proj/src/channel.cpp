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

#include "cbf/channel.hpp"

#include <unsupported/Eigen/FFT>

#include <algorithm>
#include <cmath>

namespace cbf
{

void ArrayGeometry::validate() const
{
    if (m_y < 1 || m_z < 1)
        throw std::invalid_argument("array must have at least one row and one column");
    if (!(spacing > 0.0))
        throw std::invalid_argument("element spacing must be positive");
}

void OFDMConfig::validate() const
{
    if (k_subcarriers < 1 || cp_length < 1 || cp_length > k_subcarriers)
        throw std::invalid_argument("OFDM: need 1 <= cp_length <= k_subcarriers");
    if (!(sample_period > 0.0) || !(noise_power > 0.0) || !(tx_power >= 0.0))
        throw std::invalid_argument("OFDM: sample period and noise power must be positive");
}

double thermal_noise_dbm(double bandwidth_hz, double noise_figure_db)
{
    return -174.0 + 10.0 * std::log10(bandwidth_hz) + noise_figure_db;
}

OFDMConfig OFDMConfig::make(int k, int cp, double bandwidth_hz, double tx_power_dbm, double noise_figure_db)
{
    OFDMConfig c;
    c.k_subcarriers = k;
    c.cp_length = cp;
    c.sample_period = 1.0 / bandwidth_hz;
    c.tx_power = dbm_to_watt(tx_power_dbm);
    c.noise_power = dbm_to_watt(thermal_noise_dbm(bandwidth_hz, noise_figure_db));
    c.validate();
    return c;
}

CVec array_response_dircos(const ArrayGeometry& geom, double u_y, double u_z)
{
    const int m = geom.num_elements();
    const double amp = 1.0 / std::sqrt(static_cast<double>(m));
    CVec a(m);
    for (int iz = 0; iz < geom.m_z; ++iz)
        for (int iy = 0; iy < geom.m_y; ++iy)
            a(iz * geom.m_y + iy) = std::polar(amp, TWO_PI * geom.spacing * (iy * u_y + iz * u_z));
    return a;
}

CVec array_response(const ArrayGeometry& geom, double azimuth, double elevation)
{
    return array_response_dircos(geom, std::cos(elevation) * std::sin(azimuth), std::sin(elevation));
}

double pulse(double t, double sample_period, const Pulse& p)
{
    if (p.kind == PulseKind::DeltaNearest)
        return std::abs(t) < 0.5 * sample_period ? 1.0 : 0.0;

    const double x = t / sample_period;
    const double beta = p.rolloff;
    auto sinc = [](double v) { return v == 0.0 ? 1.0 : std::sin(std::numbers::pi * v) / (std::numbers::pi * v); };
    if (beta > 0.0 && std::abs(std::abs(x) - 0.5 / beta) < 1e-12)
        return std::numbers::pi / 4.0 * sinc(0.5 / beta);
    const double den = 1.0 - 4.0 * beta * beta * x * x;
    return sinc(x) * std::cos(std::numbers::pi * beta * x) / den;
}

DelayChannel delay_channel(std::span<const RayPath> rays, const ArrayGeometry& geom, const OFDMConfig& ofdm,
                           const Pulse& p, double timing_offset)
{
    const int m = geom.num_elements();
    const int d_len = ofdm.cp_length;
    const double ts = ofdm.sample_period;
    DelayChannel dc{CMat::Zero(d_len, m)};
    const double sqrt_m = std::sqrt(static_cast<double>(m));

    for (const auto& r : rays)
        if (r.delay - timing_offset > (d_len - 1) * ts * (1.0 + 1e-12))
            throw DelayOverflow("path delay " + std::to_string(r.delay) + " s exceeds the cyclic prefix");

    for (const auto& r : rays)
    {
        const CVec a = array_response(geom, r.aoa_azimuth, r.aoa_elevation);
        const cplx coeff = sqrt_m * r.complex_gain / std::sqrt(r.pathloss);
        for (int d = 0; d < d_len; ++d)
        {
            double w = pulse(d * ts - (r.delay - timing_offset), ts, p);
            if (w != 0.0)
                dc.taps.row(d) += (coeff * w) * a.transpose();
        }
    }
    return dc;
}

FreqChannel freq_channel(const DelayChannel& dc, int k_subcarriers)
{
    const int d_len = static_cast<int>(dc.taps.rows());
    const int m = static_cast<int>(dc.taps.cols());
    if (d_len > k_subcarriers)
        throw std::invalid_argument("freq_channel: more taps than subcarriers");

    Eigen::FFT<double> fft;
    FreqChannel fc{CMat(k_subcarriers, m)};
    std::vector<cplx> in(k_subcarriers), out(k_subcarriers);
    for (int col = 0; col < m; ++col)
    {
        std::fill(in.begin(), in.end(), cplx{});
        for (int d = 0; d < d_len; ++d)
            in[d] = dc.taps(d, col);
        fft.fwd(out, in);
        for (int k = 0; k < k_subcarriers; ++k)
            fc.h(k, col) = out[k];
    }
    return fc;
}

double first_arrival(std::span<const RayPath> rays)
{
    if (rays.empty())
        return 0.0;
    double first = rays.front().delay;
    for (const auto& r : rays)
        first = std::min(first, r.delay);
    return first;
}

std::size_t drop_outside_cp(std::vector<RayPath>& rays, const OFDMConfig& ofdm, double timing_offset)
{
    const double window = (ofdm.cp_length - 1) * ofdm.sample_period;
    return std::erase_if(rays, [&](const RayPath& r) { return r.delay - timing_offset > window; });
}

} // namespace cbf
