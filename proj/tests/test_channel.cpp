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

#include <doctest.h>

#include <random>

using namespace cbf;

namespace
{

OFDMConfig small_ofdm(int k = 64, int d = 16)
{
    OFDMConfig o;
    o.k_subcarriers = k;
    o.cp_length = d;
    o.sample_period = 1e-9;
    o.tx_power = 1.0;
    o.noise_power = 1e-12;
    return o;
}

RayPath ray(double delay, double az, double el, cplx gain = {1.0, 0.0}, double pl = 1.0)
{
    RayPath r;
    r.delay = delay;
    r.aoa_azimuth = az;
    r.aoa_elevation = el;
    r.complex_gain = gain;
    r.pathloss = pl;
    r.path_length = delay * SPEED_OF_LIGHT;
    return r;
}

// h_k = sum_d h_d exp(-j 2 pi k d / K), evaluated term by term.
CMat direct_dft(const CMat& taps, int k)
{
    CMat h = CMat::Zero(k, taps.cols());
    for (int kk = 0; kk < k; ++kk)
        for (int d = 0; d < taps.rows(); ++d)
            h.row(kk) += std::polar(1.0, -TWO_PI * kk * d / k) * taps.row(d);
    return h;
}

CMat random_taps(int d, int m, std::mt19937_64& rng)
{
    std::normal_distribution<double> n;
    CMat t(d, m);
    for (int i = 0; i < d; ++i)
        for (int j = 0; j < m; ++j)
            t(i, j) = {n(rng), n(rng)};
    return t;
}

} // namespace

TEST_CASE("array_response examples")
{
    const ArrayGeometry g{8, 2, 0.5};
    const CVec a0 = array_response(g, 0.0, 0.0);
    for (int i = 0; i < a0.size(); ++i)
        CHECK(std::abs(a0(i) - cplx(1.0 / 4.0, 0.0)) < 1e-15);

    const ArrayGeometry two{2, 1, 0.5};
    const CVec a = array_response(two, M_PI / 2, 0.0);
    CHECK(std::abs(std::arg(a(0))) < 1e-12);
    CHECK(std::abs(std::abs(std::arg(a(1))) - M_PI) < 1e-12);
}

TEST_CASE("array_response: unit norm, constant modulus, element ordering")
{
    const ArrayGeometry g{5, 3, 0.5};
    std::mt19937_64 rng(1);
    std::uniform_real_distribution<double> az(-M_PI, M_PI), el(-M_PI / 2, M_PI / 2);
    for (int t = 0; t < 100; ++t)
    {
        const double th = az(rng), ph = el(rng);
        const CVec a = array_response(g, th, ph);
        CHECK(a.norm() == doctest::Approx(1.0).epsilon(1e-12));
        for (int i = 0; i < a.size(); ++i)
            CHECK(std::abs(std::abs(a(i)) - 1.0 / std::sqrt(15.0)) < 1e-12);
        // element (iy, iz) = (2, 1) at index iz * m_y + iy
        const double phase = TWO_PI * 0.5 * (2 * std::cos(ph) * std::sin(th) + 1 * std::sin(ph));
        CHECK(std::abs(a(1 * 5 + 2) - std::polar(1.0 / std::sqrt(15.0), phase)) < 1e-12);
    }
}

TEST_CASE("pulse examples")
{
    const double ts = 1e-9;
    CHECK(pulse(0.0, ts, {PulseKind::DeltaNearest}) == 1.0);
    CHECK(pulse(0.49 * ts, ts, {PulseKind::DeltaNearest}) == 1.0);
    CHECK(pulse(0.51 * ts, ts, {PulseKind::DeltaNearest}) == 0.0);
    CHECK(pulse(0.0, ts, {PulseKind::RaisedCosine, 0.25}) == doctest::Approx(1.0));
    CHECK(std::abs(pulse(ts, ts, {PulseKind::RaisedCosine, 1.0})) < 1e-12);
    // integer sample offsets are zero crossings for any rolloff
    for (int n = 1; n < 5; ++n)
        CHECK(std::abs(pulse(n * ts, ts, {PulseKind::RaisedCosine, 0.3})) < 1e-12);
    // singular point t = Ts / (2 beta) is finite and continuous
    const double sing = pulse(2.0 * ts, ts, {PulseKind::RaisedCosine, 0.25});
    const double near = pulse(2.0 * ts * (1 + 1e-7), ts, {PulseKind::RaisedCosine, 0.25});
    CHECK(std::isfinite(sing));
    CHECK(sing == doctest::Approx(near).epsilon(1e-5));
}

TEST_CASE("thermal noise and SNR bookkeeping")
{
    CHECK(thermal_noise_dbm(1e9, 5.0) == doctest::Approx(-79.0).epsilon(1e-12));
    const OFDMConfig o = OFDMConfig::make(256, 64, 1e9, 30.0, 5.0);
    CHECK(o.sample_period == doctest::Approx(1e-9));
    CHECK(o.snr_linear() == doctest::Approx(o.tx_power / (256 * o.noise_power)).epsilon(1e-12));
    CHECK(10 * std::log10(o.noise_power * 1e3) == doctest::Approx(-79.0));
    OFDMConfig bad = o;
    bad.cp_length = 300;
    CHECK_THROWS(bad.validate());
}

TEST_CASE("delay_channel examples")
{
    const ArrayGeometry g{4, 2, 0.5};
    const OFDMConfig o = small_ofdm();
    const auto one = delay_channel(std::vector{ray(3e-9, 0.3, 0.1)}, g, o);
    for (int d = 0; d < o.cp_length; ++d)
        CHECK((one.taps.row(d).norm() > 0.0) == (d == 3));
    CHECK(one.taps.row(3).norm() == doctest::Approx(std::sqrt(8.0)));

    const auto none = delay_channel(std::vector<RayPath>{}, g, o);
    CHECK(none.taps.norm() == 0.0);

    const auto two = delay_channel(std::vector{ray(3e-9, 0.3, 0.1), ray(3e-9, 0.3, 0.1)}, g, o);
    CHECK(two.taps.row(3).norm() == doctest::Approx(2.0 * one.taps.row(3).norm()));

    // per-path pathloss divides the amplitude
    const auto lossy = delay_channel(std::vector{ray(3e-9, 0.3, 0.1, {1, 0}, 100.0)}, g, o);
    CHECK(lossy.taps.row(3).norm() == doctest::Approx(one.taps.row(3).norm() / 10.0));

    CHECK_THROWS_AS(delay_channel(std::vector{ray(16e-9, 0, 0)}, g, o), DelayOverflow);
    CHECK_NOTHROW(delay_channel(std::vector{ray(15e-9, 0, 0)}, g, o));
    // a timing offset moves the window
    const auto shifted = delay_channel(std::vector{ray(103e-9, 0.3, 0.1)}, g, o, {}, 100e-9);
    CHECK((shifted.taps - one.taps).norm() < 1e-12);
}

TEST_CASE("delay_channel linearity over ray lists")
{
    const ArrayGeometry g{4, 4, 0.5};
    const OFDMConfig o = small_ofdm();
    std::mt19937_64 rng(5);
    std::uniform_real_distribution<double> tau(0, 14e-9), ang(-1, 1), ph(0, TWO_PI);
    for (const Pulse p : {Pulse{PulseKind::DeltaNearest}, Pulse{PulseKind::RaisedCosine, 0.4}})
        for (int t = 0; t < 20; ++t)
        {
            std::vector<RayPath> a, b;
            for (int i = 0; i < 3; ++i)
            {
                a.push_back(ray(tau(rng), ang(rng), ang(rng) / 2, std::polar(0.7, ph(rng)), 1 + 10 * std::abs(ang(rng))));
                b.push_back(ray(tau(rng), ang(rng), ang(rng) / 2, std::polar(0.4, ph(rng)), 2.0));
            }
            std::vector<RayPath> ab = a;
            ab.insert(ab.end(), b.begin(), b.end());
            const CMat sum = delay_channel(a, g, o, p).taps + delay_channel(b, g, o, p).taps;
            CHECK((delay_channel(ab, g, o, p).taps - sum).norm() <= 1e-12 * sum.norm());
        }
}

TEST_CASE("freq_channel matches direct summation and Parseval")
{
    std::mt19937_64 rng(9);
    for (int k : {16, 64, 100, 256})
        for (int trial = 0; trial < 5; ++trial)
        {
            const DelayChannel dc{random_taps(std::min(k, 16), 6, rng)};
            const FreqChannel fc = freq_channel(dc, k);
            const CMat ref = direct_dft(dc.taps, k);
            CHECK((fc.h - ref).norm() / ref.norm() < 1e-9);
            CHECK(fc.h.squaredNorm() == doctest::Approx(k * dc.taps.squaredNorm()).epsilon(1e-10));
        }
}

TEST_CASE("freq_channel: flat spectrum for a single tap at d = 0")
{
    const ArrayGeometry g{4, 2, 0.5};
    const OFDMConfig o = small_ofdm();
    const FreqChannel fc = freq_channel(delay_channel(std::vector{ray(0.0, 0.2, -0.1)}, g, o), o.k_subcarriers);
    for (int k = 1; k < fc.num_subcarriers(); ++k)
        CHECK((fc.h.row(k) - fc.h.row(0)).norm() < 1e-12);
    CHECK_THROWS(freq_channel(DelayChannel{CMat::Zero(32, 2)}, 16));
}

TEST_CASE("single delta path: every subcarrier is a multiple of the steering vector")
{
    const ArrayGeometry g{8, 2, 0.5};
    const OFDMConfig o = small_ofdm();
    const CVec a = array_response(g, 0.4, 0.2);
    const FreqChannel fc = freq_channel(delay_channel(std::vector{ray(5e-9, 0.4, 0.2, std::polar(0.5, 1.0))}, g, o),
                                        o.k_subcarriers);
    for (int k = 0; k < fc.num_subcarriers(); ++k)
    {
        const CVec h = fc.h.row(k).transpose();
        const cplx c = a.dot(h); // a^H h
        CHECK((h - c * a).norm() < 1e-12 * h.norm());
    }
}

TEST_CASE("first arrival and cyclic-prefix windowing")
{
    const OFDMConfig o = small_ofdm(64, 16);
    std::vector<RayPath> r{ray(120e-9, 0, 0), ray(100e-9, 0, 0), ray(114e-9, 0, 0), ray(116e-9, 0, 0)};
    CHECK(first_arrival(r) == doctest::Approx(100e-9));
    CHECK(drop_outside_cp(r, o, first_arrival(r)) == 2);
    CHECK(r.size() == 2);
    CHECK(first_arrival(std::vector<RayPath>{}) == 0.0);
}
