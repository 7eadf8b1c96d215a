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

#include "cbf/beamforming.hpp"

#include <cmath>
#include <limits>

namespace cbf
{

namespace
{

void check_channels(const Channels& fcs, std::size_t n_beams)
{
    if (fcs.empty())
        throw std::invalid_argument("need at least one BS channel");
    if (n_beams != fcs.size())
        throw std::invalid_argument("one RF beam per BS is required");
    for (const auto& fc : fcs)
        if (fc.h.rows() != fcs.front().h.rows())
            throw std::invalid_argument("all BS channels must have the same number of subcarriers");
}

} // namespace

Eigen::MatrixXd beam_gains(const FreqChannel& fc, const Codebook& cb)
{
    if (fc.num_antennas() != cb.num_antennas())
        throw std::invalid_argument("channel and codebook antenna counts differ");
    return (fc.h * cb.codewords).cwiseAbs2();
}

std::vector<double> per_beam_rates(const FreqChannel& fc, const Codebook& cb, double snr)
{
    const Eigen::MatrixXd g = beam_gains(fc, cb);
    const double k = static_cast<double>(g.rows());
    std::vector<double> rates(g.cols());
    for (Eigen::Index p = 0; p < g.cols(); ++p)
    {
        double acc = 0.0;
        for (Eigen::Index kk = 0; kk < g.rows(); ++kk)
            acc += std::log2(1.0 + snr * g(kk, p));
        rates[p] = acc / k;
    }
    return rates;
}

int baseline_select(std::span<const double> rates)
{
    if (rates.empty())
        throw std::invalid_argument("baseline_select: empty rate vector");
    int best = 0;
    for (std::size_t p = 1; p < rates.size(); ++p)
        if (rates[p] > rates[best])
            best = static_cast<int>(p);
    return best;
}

Baseband mrt_baseband(const Channels& fcs, std::span<const CVec> rf_beams)
{
    check_channels(fcs, rf_beams.size());
    const Eigen::Index k_len = fcs.front().h.rows();
    const Eigen::Index n = static_cast<Eigen::Index>(fcs.size());
    CMat eff(k_len, n);
    for (Eigen::Index b = 0; b < n; ++b)
        eff.col(b) = fcs[b].h * rf_beams[b];

    Baseband out{CMat::Zero(k_len, n), 0};
    for (Eigen::Index k = 0; k < k_len; ++k)
    {
        const double norm = eff.row(k).norm();
        if (norm == 0.0)
        {
            out.f(k, 0) = 1.0;
            ++out.degenerate_subcarriers;
            continue;
        }
        out.f.row(k) = eff.row(k).conjugate() / norm;
    }
    return out;
}

double achievable_rate(const Channels& fcs, std::span<const CVec> rf_beams, const CMat& baseband, double snr)
{
    check_channels(fcs, rf_beams.size());
    const Eigen::Index k_len = fcs.front().h.rows();
    if (baseband.rows() != k_len || baseband.cols() != static_cast<Eigen::Index>(fcs.size()))
        throw std::invalid_argument("baseband precoder must be K x N");
    double acc = 0.0;
    std::vector<CVec> eff(fcs.size());
    for (std::size_t b = 0; b < fcs.size(); ++b)
        eff[b] = fcs[b].h * rf_beams[b];
    for (Eigen::Index k = 0; k < k_len; ++k)
    {
        cplx y{};
        for (std::size_t b = 0; b < fcs.size(); ++b)
            y += eff[b](k) * baseband(k, static_cast<Eigen::Index>(b));
        acc += std::log2(1.0 + snr * std::norm(y));
    }
    return acc / static_cast<double>(k_len);
}

double coordinated_rate(const Channels& fcs, std::span<const CVec> rf_beams, double snr)
{
    check_channels(fcs, rf_beams.size());
    const Eigen::Index k_len = fcs.front().h.rows();
    Eigen::VectorXd power = Eigen::VectorXd::Zero(k_len);
    for (std::size_t b = 0; b < fcs.size(); ++b)
        power += (fcs[b].h * rf_beams[b]).cwiseAbs2();
    double acc = 0.0;
    for (Eigen::Index k = 0; k < k_len; ++k)
        acc += std::log2(1.0 + snr * power(k));
    return acc / static_cast<double>(k_len);
}

double coordinated_rate(const Channels& fcs, const Codebook& cb, std::span<const int> beams, double snr)
{
    std::vector<CVec> rf;
    rf.reserve(beams.size());
    for (int p : beams)
        rf.push_back(cb.codeword(p));
    return coordinated_rate(fcs, rf, snr);
}

JointResult joint_exhaustive(const Channels& fcs, const Codebook& cb, double snr, std::uint64_t budget)
{
    if (fcs.empty())
        throw std::invalid_argument("joint_exhaustive: no channels");
    const std::size_t n = fcs.size();
    const auto n_tr = static_cast<std::uint64_t>(cb.size());
    std::uint64_t combos = 1;
    for (std::size_t b = 0; b < n; ++b)
    {
        if (combos > budget / n_tr + 1)
            throw BudgetExceeded("joint beam search exceeds the combination budget");
        combos *= n_tr;
    }
    if (combos > budget)
        throw BudgetExceeded("joint beam search needs " + std::to_string(combos) + " combinations");

    std::vector<Eigen::MatrixXd> gains;
    for (const auto& fc : fcs)
        gains.push_back(beam_gains(fc, cb)); // K x N_tr
    const Eigen::Index k_len = gains.front().rows();

    // Odometer over beam indices; partial sums reused from the outer BSs.
    std::vector<int> idx(n, 0);
    std::vector<Eigen::VectorXd> partial(n + 1, Eigen::VectorXd::Zero(k_len));
    auto refresh = [&](std::size_t from)
    {
        for (std::size_t b = from; b < n; ++b)
            partial[b + 1] = partial[b] + gains[b].col(idx[b]);
    };
    refresh(0);

    JointResult best;
    best.rate = -1.0;
    for (std::uint64_t c = 0; c < combos; ++c)
    {
        double acc = 0.0;
        const Eigen::VectorXd& p = partial[n];
        for (Eigen::Index k = 0; k < k_len; ++k)
            acc += std::log2(1.0 + snr * p(k));
        acc /= static_cast<double>(k_len);
        if (acc > best.rate)
        {
            best.rate = acc;
            best.beams = idx;
        }
        // advance: last BS varies fastest so the result keeps lexicographic tie order
        std::size_t b = n;
        while (b > 0)
        {
            --b;
            if (++idx[b] < static_cast<int>(n_tr))
                break;
            idx[b] = 0;
        }
        refresh(b);
    }
    best.exact = true;
    return best;
}

JointResult upper_bound(const Channels& fcs, const Codebook& cb, double snr, std::uint64_t budget)
{
    try
    {
        return joint_exhaustive(fcs, cb, snr, budget);
    }
    catch (const BudgetExceeded&)
    {
        JointResult r;
        for (const auto& fc : fcs)
            r.beams.push_back(baseline_select(per_beam_rates(fc, cb, snr)));
        r.rate = coordinated_rate(fcs, cb, r.beams, snr);
        r.exact = false;
        return r;
    }
}

double beam_coherence_time(double speed_mps)
{
    if (!(speed_mps > 0.0))
        throw NonPositiveSpeed("beam coherence time needs a positive speed");
    constexpr double REF_TIME = 0.023;               // s at 30 mph
    constexpr double REF_SPEED = 30.0 * MPH_TO_MPS; // 13.4112 m/s
    return REF_TIME * REF_SPEED / speed_mps;
}

double beam_coherence_time_mph(double speed_mph) { return beam_coherence_time(speed_mph * MPH_TO_MPS); }

double data_fraction(double t_train, double t_b, bool* clamped)
{
    if (t_train < 0.0)
        throw std::invalid_argument("training time cannot be negative");
    if (!(t_b > 0.0))
        throw std::invalid_argument("beam coherence time must be positive");
    const double f = 1.0 - t_train / t_b;
    if (clamped)
        *clamped = f <= 0.0;
    return std::max(0.0, f);
}

double effective_rate(double rate, double t_train, double t_b) { return data_fraction(t_train, t_b) * rate; }

} // namespace cbf
