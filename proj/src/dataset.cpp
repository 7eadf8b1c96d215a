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

#include "cbf/dataset.hpp"

#include <zlib.h>

#include <algorithm>
#include <bit>
#include <cmath>
#include <cstring>
#include <fstream>
#include <random>
#include <thread>

namespace cbf
{

static_assert(std::endian::native == std::endian::little, "dataset I/O assumes a little-endian host");

namespace
{

constexpr char DATASET_MAGIC[4] = {'C', 'B', 'F', '1'};
constexpr std::uint32_t DATASET_VERSION = 1;
constexpr std::size_t TAG_BYTES = 16;
constexpr std::size_t RAY_FIELDS = 8;

void check_shape(const Sample& s, const DatasetShape& shape)
{
    if (s.num_bs() != shape.n_bs || s.k_dl() != shape.k_dl || s.n_tr() != shape.n_tr ||
        s.beam_rates.rows() != shape.n_bs)
        throw ShapeMismatch("sample shape does not match the dataset (N, K_DL, N_tr)");
    if (s.rays.size() != static_cast<std::size_t>(shape.n_bs))
        throw ShapeMismatch("sample must carry one ray list per BS");
    for (const auto& r : s.rays)
        if (r.size() > static_cast<std::size_t>(shape.max_paths))
            throw ShapeMismatch("sample has more paths than the dataset's max_paths");
}

std::size_t record_doubles(const DatasetShape& sh)
{
    return 3 + 1 + 2 * static_cast<std::size_t>(sh.n_bs) * sh.k_dl + static_cast<std::size_t>(sh.n_bs) * sh.n_tr +
           static_cast<std::size_t>(sh.n_bs) * (1 + RAY_FIELDS * sh.max_paths);
}

class Writer
{
public:
    template <typename T> void put(const T& v)
    {
        const auto* p = reinterpret_cast<const unsigned char*>(&v);
        buf.insert(buf.end(), p, p + sizeof(T));
    }
    void put_bytes(const void* data, std::size_t n)
    {
        const auto* p = static_cast<const unsigned char*>(data);
        buf.insert(buf.end(), p, p + n);
    }
    std::vector<unsigned char> buf;
};

class Reader
{
public:
    Reader(const unsigned char* data, std::size_t size) : data_(data), size_(size) {}

    template <typename T> T get()
    {
        T v;
        need(sizeof(T));
        std::memcpy(&v, data_ + pos_, sizeof(T));
        pos_ += sizeof(T);
        return v;
    }
    void get_bytes(void* out, std::size_t n)
    {
        need(n);
        std::memcpy(out, data_ + pos_, n);
        pos_ += n;
    }
    std::size_t pos() const { return pos_; }

private:
    void need(std::size_t n) const
    {
        if (pos_ + n > size_)
            throw CorruptRecord("dataset file truncated");
    }
    const unsigned char* data_;
    std::size_t size_;
    std::size_t pos_ = 0;
};

} // namespace

std::uint32_t crc32(const void* data, std::size_t len)
{
    uLong c = ::crc32(0L, Z_NULL, 0);
    return static_cast<std::uint32_t>(::crc32(c, static_cast<const Bytef*>(data), static_cast<uInt>(len)));
}

void Dataset::append(Sample s)
{
    check_shape(s, shape);
    samples_.push_back(std::move(s));
}

Dataset Dataset::slice(std::size_t begin, std::size_t end) const
{
    Dataset out;
    out.shape = shape;
    out.seed = seed;
    out.config = config;
    end = std::min(end, samples_.size());
    for (std::size_t i = begin; i < end; ++i)
        out.samples_.push_back(samples_[i]);
    return out;
}

CVec omni_receive(const FreqChannel& fc, double pilot_power, double noise_power, int k_dl, std::uint64_t rng_seed)
{
    const int k = fc.num_subcarriers();
    if (k_dl < 0 || k_dl > k)
        throw std::invalid_argument("omni_receive: K_DL must not exceed K");
    const double s = std::sqrt(pilot_power / k);
    std::mt19937_64 rng(rng_seed);
    std::normal_distribution<double> gauss(0.0, std::sqrt(noise_power / 2.0));
    CVec r(k_dl);
    for (int kk = 0; kk < k_dl; ++kk)
    {
        // g0 = e_1: the first antenna element only
        const cplx noise = noise_power > 0.0 ? cplx(gauss(rng), gauss(rng)) : cplx{};
        r(kk) = fc.h(kk, 0) * s + noise;
    }
    return r;
}

std::size_t GridSpec::nx() const { return static_cast<std::size_t>(std::llround(size_x / resolution)); }
std::size_t GridSpec::ny() const { return static_cast<std::size_t>(std::llround(size_y / resolution)); }

Vec3 GridSpec::point(std::size_t index) const
{
    const std::size_t ix = index % nx();
    const std::size_t iy = index / nx();
    return {center_x - 0.5 * size_x + (ix + 0.5) * resolution, center_y - 0.5 * size_y + (iy + 0.5) * resolution,
            height};
}

std::vector<std::vector<RayPath>> location_rays(const Scene& scene, const Vec3& user, const OFDMConfig& ofdm,
                                                int max_bounces, std::size_t max_paths, GenerateStats* stats)
{
    std::vector<std::vector<RayPath>> out(scene.num_bs());
    for (std::size_t b = 0; b < scene.num_bs(); ++b)
    {
        auto paths = trace(scene, b, user, max_bounces, max_paths).paths;
        const bool has_los = std::any_of(paths.begin(), paths.end(), [](const RayPath& r) { return r.bounce_count == 0; });
        const std::size_t dropped = drop_outside_cp(paths, ofdm, first_arrival(paths));
        if (stats)
        {
            stats->dropped_late_paths += dropped;
            stats->blocked_los += has_los ? 0 : 1;
            stats->empty_bs_channels += paths.empty() ? 1 : 0;
        }
        out[b] = std::move(paths);
    }
    return out;
}

Channels sample_channels(const Sample& s, const ArrayGeometry& geom, const OFDMConfig& ofdm, const Pulse& p)
{
    Channels fcs;
    fcs.reserve(s.rays.size());
    for (const auto& rays : s.rays)
        fcs.push_back(freq_channel(delay_channel(rays, geom, ofdm, p, first_arrival(rays)), ofdm.k_subcarriers));
    return fcs;
}

namespace
{

std::vector<double> noisy_beam_rates(const FreqChannel& fc, const Codebook& cb, double snr, double pilot_power,
                                     double noise_power, std::mt19937_64& rng)
{
    // r^(p)_k = g_p^T h_k s + g_p^T v_k, with ||g_p|| = 1 so g_p^T v_k ~ CN(0, sigma^2)
    const int k = fc.num_subcarriers();
    const double s = std::sqrt(pilot_power / k);
    std::normal_distribution<double> gauss(0.0, std::sqrt(noise_power / 2.0));
    const CMat y = fc.h * cb.codewords;
    std::vector<double> rates(cb.size(), 0.0);
    for (int p = 0; p < cb.size(); ++p)
    {
        double acc = 0.0;
        for (int kk = 0; kk < k; ++kk)
        {
            const cplx r = y(kk, p) * s + cplx(gauss(rng), gauss(rng));
            acc += std::log2(1.0 + snr * std::norm(r / s));
        }
        rates[p] = acc / k;
    }
    return rates;
}

} // namespace

Dataset generate(const Scene& scene, const GridSpec& grid, const ArrayGeometry& geom, const OFDMConfig& ofdm,
                 const Codebook& cb, const GenerateConfig& cfg, GenerateStats* stats)
{
    scene.validate();
    ofdm.validate();
    const std::size_t n_points = grid.num_points();
    if (n_points == 0)
        throw EmptyGrid("user grid has no candidate points");
    if (cfg.n_samples > n_points)
        throw std::invalid_argument("requested more samples than grid points");
    if (cfg.k_dl > ofdm.k_subcarriers)
        throw std::invalid_argument("K_DL must not exceed K");

    Dataset ds;
    ds.shape = DatasetShape{static_cast<int>(scene.num_bs()), cfg.k_dl, cb.size(), ofdm.k_subcarriers,
                            static_cast<int>(cfg.max_paths)};
    ds.seed = cfg.seed;

    // uniform sampling without replacement: partial Fisher-Yates
    std::vector<std::uint32_t> order(n_points);
    for (std::size_t i = 0; i < n_points; ++i)
        order[i] = static_cast<std::uint32_t>(i);
    std::mt19937_64 pick(mix_seed(cfg.seed, 0xC0FFEE));
    for (std::size_t i = 0; i < cfg.n_samples; ++i)
    {
        std::uniform_int_distribution<std::size_t> u(i, n_points - 1);
        std::swap(order[i], order[u(pick)]);
    }

    const double snr = ofdm.snr_linear();
    std::vector<Sample> out(cfg.n_samples);
    std::vector<GenerateStats> local_stats(cfg.n_samples);

    auto work = [&](std::size_t i)
    {
        const std::uint32_t loc = order[i];
        const std::uint64_t loc_seed = mix_seed(cfg.seed, loc);
        Sample& s = out[i];
        s.user_pos = grid.point(loc);
        s.scenario_tag = cfg.scenario_tag;
        s.rays = location_rays(scene, s.user_pos, ofdm, cfg.max_bounces, cfg.max_paths, &local_stats[i]);
        const Channels fcs = sample_channels(s, geom, ofdm, cfg.pulse);
        s.omni_rx.resize(ds.shape.n_bs, cfg.k_dl);
        s.beam_rates.resize(ds.shape.n_bs, cb.size());
        std::mt19937_64 rate_rng(mix_seed(loc_seed, 0xBEEF));
        for (int b = 0; b < ds.shape.n_bs; ++b)
        {
            s.omni_rx.row(b) =
                omni_receive(fcs[b], cfg.uplink_power, ofdm.noise_power, cfg.k_dl, mix_seed(loc_seed, b)).transpose();
            const std::vector<double> rates =
                cfg.noisy_rates ? noisy_beam_rates(fcs[b], cb, snr, cfg.uplink_power, ofdm.noise_power, rate_rng)
                                : per_beam_rates(fcs[b], cb, snr);
            for (int p = 0; p < cb.size(); ++p)
                s.beam_rates(b, p) = rates[p];
        }
    };

    unsigned n_threads = cfg.threads ? cfg.threads : std::max(1u, std::thread::hardware_concurrency());
    n_threads = static_cast<unsigned>(std::min<std::size_t>(n_threads, std::max<std::size_t>(1, cfg.n_samples)));
    if (n_threads <= 1)
    {
        for (std::size_t i = 0; i < cfg.n_samples; ++i)
            work(i);
    }
    else
    {
        std::vector<std::jthread> pool;
        for (unsigned t = 0; t < n_threads; ++t)
            pool.emplace_back([&, t]
                              {
                                  for (std::size_t i = t; i < cfg.n_samples; i += n_threads)
                                      work(i);
                              });
    }

    for (auto& s : out)
        ds.append(std::move(s));
    if (stats)
    {
        for (const auto& ls : local_stats)
        {
            stats->dropped_late_paths += ls.dropped_late_paths;
            stats->blocked_los += ls.blocked_los;
            stats->empty_bs_channels += ls.empty_bs_channels;
        }
    }
    return ds;
}

Sample perturb_phase(const Sample& s, std::uint64_t rng_seed)
{
    Sample out = s;
    std::mt19937_64 rng(rng_seed);
    std::uniform_real_distribution<double> phase(0.0, TWO_PI);
    for (Eigen::Index b = 0; b < out.omni_rx.rows(); ++b)
        out.omni_rx.row(b) *= std::polar(1.0, phase(rng));
    return out;
}

Sample to_rssi(const Sample& s)
{
    Sample out = s;
    out.omni_rx = s.omni_rx.cwiseAbs().cast<cplx>();
    out.rssi = true;
    return out;
}

void save(const Dataset& ds, const std::string& path)
{
    Writer head;
    head.put_bytes(DATASET_MAGIC, 4);
    head.put(DATASET_VERSION);
    head.put(static_cast<std::uint32_t>(ds.shape.n_bs));
    head.put(static_cast<std::uint32_t>(ds.shape.k_dl));
    head.put(static_cast<std::uint32_t>(ds.shape.n_tr));
    head.put(static_cast<std::uint32_t>(ds.shape.k));
    head.put(static_cast<std::uint32_t>(ds.shape.max_paths));
    head.put(static_cast<std::uint64_t>(ds.seed));
    head.put(static_cast<std::uint64_t>(ds.size()));
    const std::string blob = ds.config.dump();
    head.put(static_cast<std::uint32_t>(blob.size()));
    head.put_bytes(blob.data(), blob.size());
    head.put(crc32(head.buf.data(), head.buf.size()));

    std::ofstream out(path, std::ios::binary | std::ios::trunc);
    if (!out)
        throw IoError("cannot write dataset: " + path);
    out.write(reinterpret_cast<const char*>(head.buf.data()), static_cast<std::streamsize>(head.buf.size()));

    const DatasetShape& sh = ds.shape;
    for (const auto& s : ds.samples())
    {
        Writer rec;
        char tag[TAG_BYTES] = {};
        std::memcpy(tag, s.scenario_tag.data(), std::min(TAG_BYTES, s.scenario_tag.size()));
        rec.put_bytes(tag, TAG_BYTES);
        for (int i = 0; i < 3; ++i)
            rec.put(s.user_pos[i]);
        rec.put(s.rssi ? 1.0 : 0.0);
        for (int b = 0; b < sh.n_bs; ++b)
            for (int k = 0; k < sh.k_dl; ++k)
            {
                rec.put(s.omni_rx(b, k).real());
                rec.put(s.omni_rx(b, k).imag());
            }
        for (int b = 0; b < sh.n_bs; ++b)
            for (int p = 0; p < sh.n_tr; ++p)
                rec.put(s.beam_rates(b, p));
        for (int b = 0; b < sh.n_bs; ++b)
        {
            const auto& rays = s.rays[b];
            rec.put(static_cast<double>(rays.size()));
            for (int i = 0; i < sh.max_paths; ++i)
            {
                RayPath r = i < static_cast<int>(rays.size()) ? rays[i] : RayPath{0.0, {0.0, 0.0}, 1.0, 0, 0, 0, 0};
                const double fields[RAY_FIELDS] = {r.delay,       r.complex_gain.real(), r.complex_gain.imag(),
                                                   r.pathloss,    r.aoa_azimuth,         r.aoa_elevation,
                                                   r.path_length, static_cast<double>(r.bounce_count)};
                rec.put_bytes(fields, sizeof(fields));
            }
        }
        rec.put(crc32(rec.buf.data(), rec.buf.size()));
        out.write(reinterpret_cast<const char*>(rec.buf.data()), static_cast<std::streamsize>(rec.buf.size()));
    }
    if (!out)
        throw IoError("write failed: " + path);
}

Dataset load(const std::string& path)
{
    std::ifstream in(path, std::ios::binary);
    if (!in)
        throw IoError("cannot open dataset: " + path);
    std::vector<unsigned char> bytes((std::istreambuf_iterator<char>(in)), std::istreambuf_iterator<char>());
    Reader rd(bytes.data(), bytes.size());

    char magic[4];
    rd.get_bytes(magic, 4);
    if (std::memcmp(magic, "CBF", 3) != 0)
        throw FormatVersionMismatch("not a dataset file (bad magic)");
    const auto version = rd.get<std::uint32_t>();
    if (magic[3] != DATASET_MAGIC[3] || version != DATASET_VERSION)
        throw FormatVersionMismatch("unsupported dataset format version " + std::to_string(version));

    Dataset ds;
    ds.shape.n_bs = static_cast<int>(rd.get<std::uint32_t>());
    ds.shape.k_dl = static_cast<int>(rd.get<std::uint32_t>());
    ds.shape.n_tr = static_cast<int>(rd.get<std::uint32_t>());
    ds.shape.k = static_cast<int>(rd.get<std::uint32_t>());
    ds.shape.max_paths = static_cast<int>(rd.get<std::uint32_t>());
    ds.seed = rd.get<std::uint64_t>();
    const auto n_records = rd.get<std::uint64_t>();
    const auto blob_len = rd.get<std::uint32_t>();
    std::string blob(blob_len, '\0');
    rd.get_bytes(blob.data(), blob_len);
    const std::size_t head_len = rd.pos();
    if (rd.get<std::uint32_t>() != crc32(bytes.data(), head_len))
        throw CorruptRecord("dataset header CRC mismatch");
    ds.config = blob.empty() ? nlohmann::json::object() : nlohmann::json::parse(blob);

    const DatasetShape& sh = ds.shape;
    const std::size_t rec_len = TAG_BYTES + 8 * record_doubles(sh);
    for (std::uint64_t i = 0; i < n_records; ++i)
    {
        const std::size_t start = rd.pos();
        Sample s;
        char tag[TAG_BYTES + 1] = {};
        rd.get_bytes(tag, TAG_BYTES);
        s.scenario_tag = tag;
        for (int j = 0; j < 3; ++j)
            s.user_pos[j] = rd.get<double>();
        s.rssi = rd.get<double>() != 0.0;
        s.omni_rx.resize(sh.n_bs, sh.k_dl);
        for (int b = 0; b < sh.n_bs; ++b)
            for (int k = 0; k < sh.k_dl; ++k)
            {
                const double re = rd.get<double>();
                const double im = rd.get<double>();
                s.omni_rx(b, k) = cplx(re, im);
            }
        s.beam_rates.resize(sh.n_bs, sh.n_tr);
        for (int b = 0; b < sh.n_bs; ++b)
            for (int p = 0; p < sh.n_tr; ++p)
                s.beam_rates(b, p) = rd.get<double>();
        s.rays.resize(sh.n_bs);
        for (int b = 0; b < sh.n_bs; ++b)
        {
            const auto count = static_cast<int>(rd.get<double>());
            if (count < 0 || count > sh.max_paths)
                throw CorruptRecord("record " + std::to_string(i) + ": bad path count");
            for (int p = 0; p < sh.max_paths; ++p)
            {
                double f[RAY_FIELDS];
                rd.get_bytes(f, sizeof(f));
                if (p < count)
                    s.rays[b].push_back(RayPath{f[0], {f[1], f[2]}, f[3], f[4], f[5], f[6], static_cast<int>(f[7])});
            }
        }
        if (rd.pos() - start != rec_len)
            throw CorruptRecord("record length mismatch");
        if (rd.get<std::uint32_t>() != crc32(bytes.data() + start, rec_len))
            throw CorruptRecord("record " + std::to_string(i) + ": CRC mismatch");
        ds.append(std::move(s));
    }
    if (rd.pos() != bytes.size())
        throw CorruptRecord("trailing bytes after the last record");
    return ds;
}

} // namespace cbf
