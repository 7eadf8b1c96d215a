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

#ifndef CBF_DATASET_HPP
#define CBF_DATASET_HPP

#include "cbf/beamforming.hpp"
#include "cbf/geometry.hpp"

#include <json.hpp>

#include <cstdint>
#include <string>
#include <vector>

namespace cbf
{

struct Sample
{
    Vec3 user_pos = Vec3::Zero();
    CMat omni_rx;                           // N x K_DL; magnitudes (zero imag) when rssi
    Eigen::MatrixXd beam_rates;             // N x N_tr
    std::vector<std::vector<RayPath>> rays; // per BS, the paths inside the cyclic prefix
    std::string scenario_tag;
    bool rssi = false;

    int num_bs() const { return static_cast<int>(omni_rx.rows()); }
    int k_dl() const { return static_cast<int>(omni_rx.cols()); }
    int n_tr() const { return static_cast<int>(beam_rates.cols()); }
};

struct DatasetShape
{
    int n_bs = 0;
    int k_dl = 0;
    int n_tr = 0;
    int k = 0;
    int max_paths = 0;

    bool operator==(const DatasetShape&) const = default;
};

class Dataset
{
public:
    DatasetShape shape;
    std::uint64_t seed = 0;
    nlohmann::json config; // generation snapshot (scene hash, ofdm, codebook, powers, ...)

    const std::vector<Sample>& samples() const { return samples_; }
    std::vector<Sample>& samples() { return samples_; }
    std::size_t size() const { return samples_.size(); }
    bool empty() const { return samples_.empty(); }
    const Sample& operator[](std::size_t i) const { return samples_[i]; }

    // Throws ShapeMismatch when the sample does not match `shape`.
    void append(Sample s);

    // Samples [begin, end) with the same header.
    Dataset slice(std::size_t begin, std::size_t end) const;

private:
    std::vector<Sample> samples_;
};

// r_k = g0^T h_k s_k + g0^T v_k, k < K_DL, s_k = sqrt(P_UL / K), v_k ~ CN(0, sigma^2 I).
CVec omni_receive(const FreqChannel& fc, double pilot_power, double noise_power, int k_dl, std::uint64_t rng_seed);

// User grid: a size_x by size_y rectangle (m) centred at (center_x, center_y),
// sampled at `resolution` (cell centres) and fixed antenna height.
struct GridSpec
{
    double center_x = 0.0;
    double center_y = 0.0;
    double size_x = 20.0;
    double size_y = 30.0;
    double resolution = 0.5;
    double height = 2.0;

    std::size_t nx() const;
    std::size_t ny() const;
    std::size_t num_points() const { return nx() * ny(); }
    Vec3 point(std::size_t index) const;
};

struct GenerateConfig
{
    std::size_t n_samples = 0;
    std::uint64_t seed = 1;
    double uplink_power = 1e-3; // W
    int k_dl = 32;
    int max_bounces = 2;
    std::size_t max_paths = 25;
    Pulse pulse{};
    bool noisy_rates = false;
    std::string scenario_tag = "LOS";
    unsigned threads = 0; // 0: hardware concurrency
};

struct GenerateStats
{
    std::size_t dropped_late_paths = 0;
    std::size_t blocked_los = 0;       // (sample, BS) pairs without a LOS path
    std::size_t empty_bs_channels = 0; // (sample, BS) pairs with no path at all
};

// Per-BS paths for one location: traced, time-aligned to the first arrival and
// restricted to the cyclic prefix.
std::vector<std::vector<RayPath>> location_rays(const Scene& scene, const Vec3& user, const OFDMConfig& ofdm,
                                                int max_bounces, std::size_t max_paths, GenerateStats* stats = nullptr);

// Frequency-domain channels for stored rays (timing locked to each BS's first arrival).
Channels sample_channels(const Sample& s, const ArrayGeometry& geom, const OFDMConfig& ofdm, const Pulse& p = {});

Dataset generate(const Scene& scene, const GridSpec& grid, const ArrayGeometry& geom, const OFDMConfig& ofdm,
                 const Codebook& cb, const GenerateConfig& cfg, GenerateStats* stats = nullptr);

// Independent uniform phase per BS on the omni signature; beam rates untouched.
Sample perturb_phase(const Sample& s, std::uint64_t rng_seed);

// Magnitudes only.
Sample to_rssi(const Sample& s);

void save(const Dataset& ds, const std::string& path);
Dataset load(const std::string& path);

// CRC-32 (zlib polynomial).
std::uint32_t crc32(const void* data, std::size_t len);

} // namespace cbf

#endif
