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

#include "cbf/learning.hpp"

#include <algorithm>
#include <cmath>
#include <cstring>
#include <fstream>
#include <iomanip>
#include <numeric>

namespace cbf
{

const char* to_string(InputNorm n)
{
    switch (n)
    {
    case InputNorm::PerDataset: return "per-dataset";
    case InputNorm::PerSample: return "per-sample";
    case InputNorm::PerBaseStation: return "per-basestation";
    case InputNorm::PerElement: return "per-element";
    }
    return "?";
}

InputNorm input_norm_from_string(const std::string& s)
{
    for (InputNorm n : {InputNorm::PerDataset, InputNorm::PerSample, InputNorm::PerBaseStation, InputNorm::PerElement})
        if (s == to_string(n))
            return n;
    throw ConfigError("unknown input normalization '" + s + "'");
}

int feature_width(const DatasetShape& shape, bool rssi) { return (rssi ? 1 : 2) * shape.n_bs * shape.k_dl; }

namespace
{

// Scale per (n, k) entry of one sample under the given strategy.
Eigen::MatrixXd entry_scales(const NormalizationSpec& spec, const Sample& s)
{
    const Eigen::MatrixXd mag = s.omni_rx.cwiseAbs();
    Eigen::MatrixXd scale(mag.rows(), mag.cols());
    auto safe = [](double v) { return v > 0.0 ? v : 1.0; };
    switch (spec.strategy)
    {
    case InputNorm::PerDataset:
        scale.setConstant(spec.delta_norm);
        break;
    case InputNorm::PerSample:
        scale.setConstant(safe(mag.size() ? mag.maxCoeff() : 0.0));
        break;
    case InputNorm::PerBaseStation:
        for (Eigen::Index b = 0; b < mag.rows(); ++b)
            scale.row(b).setConstant(safe(mag.row(b).maxCoeff()));
        break;
    case InputNorm::PerElement:
        scale = mag.unaryExpr(safe);
        break;
    }
    return scale;
}

void fill_row(const NormalizationSpec& spec, const Sample& s, Eigen::Ref<Eigen::VectorXd> out)
{
    const Eigen::MatrixXd scale = entry_scales(spec, s);
    Eigen::Index j = 0;
    for (Eigen::Index b = 0; b < s.omni_rx.rows(); ++b)
        for (Eigen::Index k = 0; k < s.omni_rx.cols(); ++k)
        {
            const cplx r = s.omni_rx(b, k) / scale(b, k);
            if (spec.rssi)
                out(j++) = std::abs(r);
            else
            {
                out(j++) = r.real();
                out(j++) = r.imag();
            }
        }
}

} // namespace

Eigen::VectorXd apply_normalization(const NormalizationSpec& spec, const Sample& sample)
{
    if (sample.rssi != spec.rssi)
        throw DimensionMismatch("sample input mode (complex/RSSI) differs from the normaliser");
    const int width = (spec.rssi ? 1 : 2) * sample.num_bs() * sample.k_dl();
    Eigen::VectorXd row(width);
    fill_row(spec, sample, row);
    return row;
}

Eigen::MatrixXd apply_normalization(const NormalizationSpec& spec, std::span<const Sample> samples)
{
    if (samples.empty())
        return {};
    const int width = (spec.rssi ? 1 : 2) * samples.front().num_bs() * samples.front().k_dl();
    Eigen::MatrixXd out(static_cast<Eigen::Index>(samples.size()), width);
    for (std::size_t i = 0; i < samples.size(); ++i)
    {
        if (samples[i].num_bs() != samples.front().num_bs() || samples[i].k_dl() != samples.front().k_dl())
            throw DimensionMismatch("samples with different input shapes");
        out.row(static_cast<Eigen::Index>(i)) = apply_normalization(spec, samples[i]).transpose();
    }
    return out;
}

std::pair<Eigen::MatrixXd, NormalizationSpec> normalize_inputs(std::span<const Sample> samples, InputNorm strategy)
{
    if (samples.empty())
        throw EmptyDataset("normalize_inputs: no samples");
    NormalizationSpec spec;
    spec.strategy = strategy;
    spec.rssi = samples.front().rssi;
    double delta = 0.0;
    for (const auto& s : samples)
    {
        if (s.rssi != spec.rssi)
            throw DimensionMismatch("mixed complex and RSSI samples");
        if (s.omni_rx.size())
            delta = std::max(delta, s.omni_rx.cwiseAbs().maxCoeff());
    }
    if (!(delta > 0.0))
        throw AllZeroInputs("all omni inputs are zero");
    spec.delta_norm = delta;
    return {apply_normalization(spec, samples), spec};
}

std::vector<double> normalize_outputs(std::span<const double> rates)
{
    if (rates.empty())
        throw AllZeroRates("empty rate vector");
    const double mx = *std::max_element(rates.begin(), rates.end());
    if (!(mx > 0.0))
        throw AllZeroRates("all rates are zero");
    std::vector<double> out(rates.size());
    std::transform(rates.begin(), rates.end(), out.begin(), [mx](double r) { return r / mx; });
    return out;
}

MLPModel MLPModel::create(int input_width, int hidden_layers, int hidden_nodes, int output_width, double dropout_rate,
                          std::uint64_t seed)
{
    if (input_width < 1 || output_width < 1 || hidden_layers < 0 || (hidden_layers > 0 && hidden_nodes < 1))
        throw std::invalid_argument("MLP: bad layer widths");
    if (!(dropout_rate >= 0.0 && dropout_rate < 1.0))
        throw std::invalid_argument("MLP: dropout rate must lie in [0, 1)");
    MLPModel m;
    m.dropout_rate = dropout_rate;
    std::mt19937_64 rng(seed);
    int fan_in = input_width;
    auto add = [&](int out)
    {
        const double limit = std::sqrt(6.0 / fan_in);
        std::uniform_real_distribution<double> u(-limit, limit);
        DenseLayer l{Eigen::MatrixXd(out, fan_in), Eigen::VectorXd::Zero(out)};
        for (Eigen::Index c = 0; c < l.w.cols(); ++c)
            for (Eigen::Index r = 0; r < l.w.rows(); ++r)
                l.w(r, c) = u(rng);
        m.layers.push_back(std::move(l));
        fan_in = out;
    };
    for (int i = 0; i < hidden_layers; ++i)
        add(hidden_nodes);
    add(output_width);
    return m;
}

std::size_t MLPModel::num_parameters() const
{
    std::size_t n = 0;
    for (const auto& l : layers)
        n += static_cast<std::size_t>(l.w.size() + l.b.size());
    return n;
}

bool MLPModel::finite() const
{
    return std::all_of(layers.begin(), layers.end(),
                       [](const DenseLayer& l) { return l.w.allFinite() && l.b.allFinite(); });
}

namespace
{

DropoutMasks sample_masks(const MLPModel& model, Eigen::Index batch, std::mt19937_64& rng)
{
    DropoutMasks masks;
    const double keep = 1.0 - model.dropout_rate;
    std::bernoulli_distribution bern(keep);
    for (std::size_t l = 0; l + 1 < model.layers.size(); ++l)
    {
        Eigen::MatrixXd m(model.layers[l].w.rows(), batch);
        for (Eigen::Index c = 0; c < batch; ++c)
            for (Eigen::Index r = 0; r < m.rows(); ++r)
                m(r, c) = bern(rng) ? 1.0 / keep : 0.0;
        masks.push_back(std::move(m));
    }
    return masks;
}

// Activations of every layer; acts[0] is the input.
std::vector<Eigen::MatrixXd> forward_cache(const MLPModel& model, const Eigen::MatrixXd& x, const DropoutMasks* masks)
{
    if (x.rows() != model.input_width())
        throw DimensionMismatch("input width " + std::to_string(x.rows()) + " does not match the model (" +
                                std::to_string(model.input_width()) + ")");
    std::vector<Eigen::MatrixXd> acts;
    acts.reserve(model.layers.size() + 1);
    acts.push_back(x);
    for (std::size_t l = 0; l < model.layers.size(); ++l)
    {
        const auto& layer = model.layers[l];
        Eigen::MatrixXd z = layer.w * acts.back();
        z.colwise() += layer.b;
        if (l + 1 < model.layers.size())
        {
            z = z.cwiseMax(0.0);
            if (masks)
                z = z.cwiseProduct((*masks)[l]);
        }
        acts.push_back(std::move(z));
    }
    return acts;
}

} // namespace

Eigen::MatrixXd forward_batch(const MLPModel& model, const Eigen::MatrixXd& x)
{
    return forward_cache(model, x, nullptr).back();
}

Eigen::VectorXd forward(const MLPModel& model, const Eigen::VectorXd& x, bool train_mode, std::mt19937_64* rng)
{
    if (train_mode && model.dropout_rate > 0.0)
    {
        if (!rng)
            throw std::invalid_argument("forward: training mode needs an RNG for dropout");
        const DropoutMasks masks = sample_masks(model, 1, *rng);
        return forward_cache(model, x, &masks).back();
    }
    return forward_cache(model, x, nullptr).back();
}

double loss(std::span<const double> pred, std::span<const double> target)
{
    if (pred.size() != target.size())
        throw DimensionMismatch("loss: length mismatch");
    double acc = 0.0;
    for (std::size_t i = 0; i < pred.size(); ++i)
        acc += (pred[i] - target[i]) * (pred[i] - target[i]);
    return acc;
}

double loss(const Eigen::VectorXd& pred, const Eigen::VectorXd& target)
{
    if (pred.size() != target.size())
        throw DimensionMismatch("loss: length mismatch");
    return (pred - target).squaredNorm();
}

Gradients backward(const MLPModel& model, const Eigen::MatrixXd& x, const Eigen::MatrixXd& target,
                   const DropoutMasks* masks, double* loss_out)
{
    const auto acts = forward_cache(model, x, masks);
    if (target.rows() != acts.back().rows() || target.cols() != x.cols())
        throw DimensionMismatch("backward: target shape mismatch");
    const std::size_t n_layers = model.layers.size();
    Gradients g;
    g.dw.resize(n_layers);
    g.db.resize(n_layers);

    Eigen::MatrixXd delta = 2.0 * (acts.back() - target);
    if (loss_out)
        *loss_out = (acts.back() - target).squaredNorm();
    for (std::size_t l = n_layers; l-- > 0;)
    {
        g.dw[l] = delta * acts[l].transpose();
        g.db[l] = delta.rowwise().sum();
        if (l == 0)
            break;
        Eigen::MatrixXd up = model.layers[l].w.transpose() * delta;
        // acts[l] = mask .* relu(z): where the mask is non-zero, relu'(z) > 0 iff the activation is positive
        if (masks)
            up = up.cwiseProduct((*masks)[l - 1]);
        delta = up.cwiseProduct((acts[l].array() > 0.0).cast<double>().matrix());
    }
    return g;
}

Gradients backward(const MLPModel& model, const Eigen::VectorXd& x, const Eigen::VectorXd& target)
{
    return backward(model, Eigen::MatrixXd(x), Eigen::MatrixXd(target), nullptr, nullptr);
}

std::vector<int> top_indices(std::span<const double> scores, int n_b)
{
    if (n_b < 1 || n_b > static_cast<int>(scores.size()))
        throw std::invalid_argument("top_indices: need 1 <= n_b <= number of scores");
    std::vector<int> idx(scores.size());
    std::iota(idx.begin(), idx.end(), 0);
    std::partial_sort(idx.begin(), idx.begin() + n_b, idx.end(), [&](int a, int b)
                      {
                          if (scores[a] != scores[b])
                              return scores[a] > scores[b];
                          return a < b;
                      });
    idx.resize(n_b);
    return idx;
}

std::vector<int> predict_top(const MLPModel& model, const Eigen::VectorXd& x, int n_b)
{
    const Eigen::VectorXd out = forward(model, x, false);
    return top_indices(std::span<const double>(out.data(), static_cast<std::size_t>(out.size())), n_b);
}

namespace
{

struct Adam
{
    explicit Adam(const MLPModel& m)
    {
        for (const auto& l : m.layers)
        {
            mw.push_back(Eigen::MatrixXd::Zero(l.w.rows(), l.w.cols()));
            vw.push_back(Eigen::MatrixXd::Zero(l.w.rows(), l.w.cols()));
            mb.push_back(Eigen::VectorXd::Zero(l.b.size()));
            vb.push_back(Eigen::VectorXd::Zero(l.b.size()));
        }
    }

    void step(MLPModel& m, const Gradients& g, const TrainConfig& c)
    {
        ++t;
        const double bc1 = 1.0 - std::pow(c.beta1, t);
        const double bc2 = 1.0 - std::pow(c.beta2, t);
        const double lr = c.learning_rate * std::sqrt(bc2) / bc1;
        for (std::size_t l = 0; l < m.layers.size(); ++l)
        {
            mw[l] = c.beta1 * mw[l] + (1.0 - c.beta1) * g.dw[l];
            vw[l] = c.beta2 * vw[l] + (1.0 - c.beta2) * g.dw[l].cwiseAbs2();
            m.layers[l].w.array() -= lr * mw[l].array() / (vw[l].array().sqrt() + c.epsilon);
            mb[l] = c.beta1 * mb[l] + (1.0 - c.beta1) * g.db[l];
            vb[l] = c.beta2 * vb[l] + (1.0 - c.beta2) * g.db[l].cwiseAbs2();
            m.layers[l].b.array() -= lr * mb[l].array() / (vb[l].array().sqrt() + c.epsilon);
        }
    }

    std::vector<Eigen::MatrixXd> mw, vw;
    std::vector<Eigen::VectorXd> mb, vb;
    long t = 0;
};

struct EvalStats
{
    double loss = 0.0;
    double top1 = 0.0;
    double topnb = 0.0;
};

EvalStats evaluate(const MLPModel& model, const Eigen::MatrixXd& xt, const Eigen::MatrixXd& targets,
                   const Eigen::MatrixXd& rates, const std::vector<int>& rows, int n_b)
{
    EvalStats s;
    if (rows.empty())
        return s;
    constexpr std::size_t CHUNK = 512;
    const int nb = std::min<int>(n_b, model.output_width());
    for (std::size_t start = 0; start < rows.size(); start += CHUNK)
    {
        const std::size_t end = std::min(rows.size(), start + CHUNK);
        Eigen::MatrixXd x(xt.rows(), static_cast<Eigen::Index>(end - start));
        Eigen::MatrixXd t(targets.cols(), x.cols());
        for (std::size_t i = start; i < end; ++i)
        {
            x.col(static_cast<Eigen::Index>(i - start)) = xt.col(rows[i]);
            t.col(static_cast<Eigen::Index>(i - start)) = targets.row(rows[i]).transpose();
        }
        const Eigen::MatrixXd out = forward_batch(model, x);
        s.loss += (out - t).squaredNorm();
        for (Eigen::Index c = 0; c < out.cols(); ++c)
        {
            const Eigen::VectorXd col = out.col(c);
            const Eigen::VectorXd truth = rates.row(rows[start + c]).transpose();
            const int best = baseline_select(std::span<const double>(truth.data(), truth.size()));
            const auto top = top_indices(std::span<const double>(col.data(), col.size()), nb);
            s.top1 += top.front() == best ? 1.0 : 0.0;
            s.topnb += std::find(top.begin(), top.end(), best) != top.end() ? 1.0 : 0.0;
        }
    }
    const double n = static_cast<double>(rows.size());
    s.loss /= n;
    s.top1 /= n;
    s.topnb /= n;
    return s;
}

} // namespace

History fit(MLPModel& model, const Eigen::MatrixXd& inputs, const Eigen::MatrixXd& targets,
            const Eigen::MatrixXd& true_rates, const TrainConfig& cfg)
{
    const Eigen::Index n = inputs.rows();
    if (n == 0)
        throw EmptyDataset("fit: no training samples");
    if (targets.rows() != n || true_rates.rows() != n)
        throw DimensionMismatch("fit: inputs, targets and rates must have the same number of rows");
    if (inputs.cols() != model.input_width() || targets.cols() != model.output_width())
        throw DimensionMismatch("fit: data widths do not match the model");
    if (cfg.batch_size < 1)
        throw std::invalid_argument("fit: batch size must be >= 1");

    std::mt19937_64 rng(cfg.seed);
    std::vector<int> perm(static_cast<std::size_t>(n));
    std::iota(perm.begin(), perm.end(), 0);
    std::shuffle(perm.begin(), perm.end(), rng);
    const auto n_val = static_cast<std::size_t>(std::floor(cfg.val_fraction * static_cast<double>(n)));
    std::vector<int> val(perm.begin(), perm.begin() + static_cast<std::ptrdiff_t>(n_val));
    std::vector<int> train(perm.begin() + static_cast<std::ptrdiff_t>(n_val), perm.end());
    if (train.empty())
        throw EmptyDataset("fit: validation split leaves no training samples");

    const Eigen::MatrixXd xt = inputs.transpose();
    Adam adam(model);
    History hist;
    const bool use_dropout = model.dropout_rate > 0.0;

    for (int epoch = 1; epoch <= cfg.epochs; ++epoch)
    {
        std::shuffle(train.begin(), train.end(), rng);
        for (std::size_t start = 0; start < train.size(); start += static_cast<std::size_t>(cfg.batch_size))
        {
            const std::size_t end = std::min(train.size(), start + static_cast<std::size_t>(cfg.batch_size));
            const auto b = static_cast<Eigen::Index>(end - start);
            Eigen::MatrixXd x(xt.rows(), b), t(targets.cols(), b);
            for (std::size_t i = start; i < end; ++i)
            {
                x.col(static_cast<Eigen::Index>(i - start)) = xt.col(train[i]);
                t.col(static_cast<Eigen::Index>(i - start)) = targets.row(train[i]).transpose();
            }
            DropoutMasks masks;
            if (use_dropout)
                masks = sample_masks(model, b, rng);
            double batch_loss = 0.0;
            Gradients g = backward(model, x, t, use_dropout ? &masks : nullptr, &batch_loss);
            if (!std::isfinite(batch_loss))
                throw Divergence("training loss became non-finite at epoch " + std::to_string(epoch));
            const double inv = 1.0 / static_cast<double>(b);
            for (std::size_t l = 0; l < g.dw.size(); ++l)
            {
                g.dw[l] *= inv;
                g.db[l] *= inv;
            }
            adam.step(model, g, cfg);
        }

        EpochStats es;
        es.epoch = epoch;
        const EvalStats tr = evaluate(model, xt, targets, true_rates, train, cfg.n_b);
        const EvalStats va = val.empty() ? tr : evaluate(model, xt, targets, true_rates, val, cfg.n_b);
        if (!std::isfinite(tr.loss) || !model.finite())
            throw Divergence("training loss became non-finite at epoch " + std::to_string(epoch));
        es.train_loss = tr.loss;
        es.val_loss = va.loss;
        es.top1_acc = va.top1;
        es.topnb_acc = va.topnb;
        hist.epochs.push_back(es);
    }
    return hist;
}

DLResult dl_select_and_rate(const std::vector<std::vector<int>>& candidates, const Sample& sample,
                            const Channels& fcs, const Codebook& cb, double snr, int n_b, const TimingModel& timing)
{
    if (candidates.size() != fcs.size() || static_cast<int>(fcs.size()) != sample.num_bs())
        throw DimensionMismatch("dl_select_and_rate: one candidate list per BS is required");
    DLResult r;
    for (std::size_t b = 0; b < candidates.size(); ++b)
    {
        const auto& cand = candidates[b];
        if (cand.empty())
            throw std::invalid_argument("dl_select_and_rate: empty candidate list");
        int best = cand.front();
        for (int p : cand)
            if (sample.beam_rates(static_cast<Eigen::Index>(b), p) > sample.beam_rates(static_cast<Eigen::Index>(b), best))
                best = p;
        r.beams.push_back(best);
    }
    r.rate = coordinated_rate(fcs, cb, r.beams, snr);
    r.effective_rate = data_fraction(prediction_training_time(n_b, timing), timing.beam_coherence_time) * r.rate;
    return r;
}

DLResult dl_select_and_rate(std::span<const MLPModel> models, const NormalizationSpec& norm, const Sample& sample,
                            const Channels& fcs, const Codebook& cb, double snr, int n_b, const TimingModel& timing)
{
    if (models.size() != fcs.size())
        throw DimensionMismatch("dl_select_and_rate: one model per BS is required");
    const Eigen::VectorXd x = apply_normalization(norm, sample);
    std::vector<std::vector<int>> cand;
    for (const auto& m : models)
        cand.push_back(predict_top(m, x, n_b));
    return dl_select_and_rate(cand, sample, fcs, cb, snr, n_b, timing);
}

Phase phase_switch(double r_eff_dl, double r_eff_bl) { return r_eff_dl > r_eff_bl ? Phase::Prediction : Phase::Learning; }

namespace
{

constexpr char MODEL_MAGIC[4] = {'C', 'B', 'F', 'M'};
constexpr std::uint32_t MODEL_VERSION = 1;

template <typename T> void put(std::vector<unsigned char>& buf, const T& v)
{
    const auto* p = reinterpret_cast<const unsigned char*>(&v);
    buf.insert(buf.end(), p, p + sizeof(T));
}

template <typename T> T get(const std::vector<unsigned char>& buf, std::size_t& pos)
{
    if (pos + sizeof(T) > buf.size())
        throw CorruptRecord("checkpoint truncated");
    T v;
    std::memcpy(&v, buf.data() + pos, sizeof(T));
    pos += sizeof(T);
    return v;
}

} // namespace

void save_checkpoint(const Checkpoint& ck, const std::string& path)
{
    std::vector<unsigned char> buf(MODEL_MAGIC, MODEL_MAGIC + 4);
    put(buf, MODEL_VERSION);
    put(buf, static_cast<std::uint32_t>(ck.norm.strategy));
    put(buf, ck.norm.delta_norm);
    put(buf, static_cast<std::uint32_t>(ck.norm.rssi ? 1 : 0));
    put(buf, static_cast<std::uint32_t>(ck.output_norm ? 1 : 0));
    put(buf, ck.model.dropout_rate);
    put(buf, static_cast<std::uint32_t>(ck.model.layers.size()));
    for (const auto& l : ck.model.layers)
    {
        put(buf, static_cast<std::uint32_t>(l.w.rows()));
        put(buf, static_cast<std::uint32_t>(l.w.cols()));
    }
    for (const auto& l : ck.model.layers)
    {
        for (Eigen::Index r = 0; r < l.w.rows(); ++r)
            for (Eigen::Index c = 0; c < l.w.cols(); ++c)
                put(buf, l.w(r, c));
        for (Eigen::Index r = 0; r < l.b.size(); ++r)
            put(buf, l.b(r));
    }
    put(buf, crc32(buf.data(), buf.size()));
    std::ofstream out(path, std::ios::binary | std::ios::trunc);
    if (!out)
        throw IoError("cannot write checkpoint: " + path);
    out.write(reinterpret_cast<const char*>(buf.data()), static_cast<std::streamsize>(buf.size()));
    if (!out)
        throw IoError("write failed: " + path);
}

Checkpoint load_checkpoint(const std::string& path)
{
    std::ifstream in(path, std::ios::binary);
    if (!in)
        throw IoError("cannot open checkpoint: " + path);
    std::vector<unsigned char> buf((std::istreambuf_iterator<char>(in)), std::istreambuf_iterator<char>());
    if (buf.size() < 8 || std::memcmp(buf.data(), MODEL_MAGIC, 4) != 0)
        throw FormatVersionMismatch("not a model checkpoint: " + path);
    std::size_t pos = 4;
    if (get<std::uint32_t>(buf, pos) != MODEL_VERSION)
        throw FormatVersionMismatch("unsupported checkpoint version");
    if (buf.size() < 4 + 4 || buf.size() < pos)
        throw CorruptRecord("checkpoint truncated");
    {
        std::uint32_t stored;
        std::memcpy(&stored, buf.data() + buf.size() - 4, 4);
        if (stored != crc32(buf.data(), buf.size() - 4))
            throw CorruptRecord("checkpoint CRC mismatch");
    }
    Checkpoint ck;
    ck.norm.strategy = static_cast<InputNorm>(get<std::uint32_t>(buf, pos));
    ck.norm.delta_norm = get<double>(buf, pos);
    ck.norm.rssi = get<std::uint32_t>(buf, pos) != 0;
    ck.output_norm = get<std::uint32_t>(buf, pos) != 0;
    ck.model.dropout_rate = get<double>(buf, pos);
    const auto n_layers = get<std::uint32_t>(buf, pos);
    std::vector<std::pair<std::uint32_t, std::uint32_t>> dims;
    for (std::uint32_t i = 0; i < n_layers; ++i)
    {
        const auto rows = get<std::uint32_t>(buf, pos);
        const auto cols = get<std::uint32_t>(buf, pos);
        dims.emplace_back(rows, cols);
    }
    for (auto [rows, cols] : dims)
    {
        DenseLayer l{Eigen::MatrixXd(rows, cols), Eigen::VectorXd(rows)};
        for (Eigen::Index r = 0; r < l.w.rows(); ++r)
            for (Eigen::Index c = 0; c < l.w.cols(); ++c)
                l.w(r, c) = get<double>(buf, pos);
        for (Eigen::Index r = 0; r < l.b.size(); ++r)
            l.b(r) = get<double>(buf, pos);
        ck.model.layers.push_back(std::move(l));
    }
    if (pos + 4 != buf.size())
        throw CorruptRecord("checkpoint length mismatch");
    return ck;
}

void write_history_csv(const History& h, const std::string& path)
{
    std::ofstream out(path, std::ios::trunc);
    if (!out)
        throw IoError("cannot write history: " + path);
    out << "epoch,train_loss,val_loss,top1_acc,topNB_acc\n";
    out << std::setprecision(10);
    for (const auto& e : h.epochs)
        out << e.epoch << ',' << e.train_loss << ',' << e.val_loss << ',' << e.top1_acc << ',' << e.topnb_acc << '\n';
}

} // namespace cbf
