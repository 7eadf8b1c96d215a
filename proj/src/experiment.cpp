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

#include "cbf/experiment.hpp"

#include <algorithm>
#include <cmath>
#include <filesystem>
#include <fstream>
#include <iomanip>
#include <map>
#include <sstream>
#include <thread>

namespace fs = std::filesystem;
using nlohmann::json;

namespace cbf
{

const char* to_string(SyncMode m)
{
    switch (m)
    {
    case SyncMode::Perfect: return "perfect";
    case SyncMode::RandomPhase: return "random-phase";
    case SyncMode::Rssi: return "rssi";
    }
    return "?";
}

SyncMode sync_mode_from_string(const std::string& s)
{
    for (SyncMode m : {SyncMode::Perfect, SyncMode::RandomPhase, SyncMode::Rssi})
        if (s == to_string(m))
            return m;
    throw ConfigError("unknown sync mode '" + s + "'");
}

ScenarioConfig default_config() { return ScenarioConfig{}; }

// ---------------------------------------------------------------------------
// Config parsing

namespace
{

int line_at(const std::string& text, std::size_t offset)
{
    offset = std::min(offset, text.size());
    return 1 + static_cast<int>(std::count(text.begin(), text.begin() + static_cast<std::ptrdiff_t>(offset), '\n'));
}

class ConfigReader
{
public:
    explicit ConfigReader(const std::string& text) : text_(text) {}

    // Line of the first occurrence of "key" at or after `from`.
    std::size_t locate(const std::string& key, std::size_t from) const
    {
        const std::size_t p = text_.find('"' + key + '"', from);
        return p == std::string::npos ? from : p;
    }

    [[noreturn]] void fail(std::size_t offset, const std::string& msg) const
    {
        throw ConfigError("config line " + std::to_string(line_at(text_, offset)) + ": " + msg);
    }

    void check_keys(const json& obj, std::initializer_list<const char*> allowed, const std::string& section,
                    std::size_t from) const
    {
        if (!obj.is_object())
            fail(from, "'" + section + "' must be an object");
        for (const auto& [k, v] : obj.items())
            if (std::none_of(allowed.begin(), allowed.end(), [&](const char* a) { return k == a; }))
                fail(locate(k, from), "unknown key '" + k + "' in " + section);
    }

    template <typename T> void get(const json& obj, const char* key, T& out, std::size_t from) const
    {
        if (!obj.contains(key))
            return;
        try
        {
            out = obj.at(key).get<T>();
        }
        catch (const json::exception&)
        {
            fail(locate(key, from), std::string("wrong type for '") + key + "'");
        }
    }

    template <typename F> void section(const json& root, const char* key, std::size_t from, F&& f) const
    {
        if (!root.contains(key))
            return;
        f(root.at(key), locate(key, from));
    }

private:
    const std::string& text_;
};

} // namespace

ScenarioConfig parse_config(const std::string& text, const std::string& base_dir)
{
    json root;
    try
    {
        root = json::parse(text);
    }
    catch (const json::parse_error& e)
    {
        throw ConfigError("config line " + std::to_string(line_at(text, e.byte > 0 ? e.byte - 1 : 0)) +
                          ": syntax error: " + e.what());
    }
    ScenarioConfig c;
    c.base_dir = base_dir;
    const ConfigReader r(text);
    r.check_keys(root,
                 {"name", "seed", "scene", "grid", "array", "codebook", "ofdm", "power", "mobility", "dataset",
                  "model", "evaluate", "sweep", "ablate"},
                 "config", 0);
    r.get(root, "name", c.name, 0);
    r.get(root, "seed", c.seed, 0);

    r.section(root, "scene", 0, [&](const json& j, std::size_t at)
              {
                  if (j.is_string())
                  {
                      c.scene = j.get<std::string>();
                      return;
                  }
                  r.check_keys(j, {"name", "facade_half_width"}, "scene", at);
                  r.get(j, "name", c.scene, at);
                  r.get(j, "facade_half_width", c.facade_half_width, at);
              });
    r.section(root, "grid", 0, [&](const json& j, std::size_t at)
              {
                  r.check_keys(j, {"center", "size", "resolution", "height"}, "grid", at);
                  std::vector<double> center{c.grid.center_x, c.grid.center_y}, size{c.grid.size_x, c.grid.size_y};
                  r.get(j, "center", center, at);
                  r.get(j, "size", size, at);
                  if (center.size() != 2 || size.size() != 2)
                      r.fail(at, "grid center and size take two values");
                  c.grid.center_x = center[0];
                  c.grid.center_y = center[1];
                  c.grid.size_x = size[0];
                  c.grid.size_y = size[1];
                  r.get(j, "resolution", c.grid.resolution, at);
                  r.get(j, "height", c.grid.height, at);
              });
    r.section(root, "array", 0, [&](const json& j, std::size_t at)
              {
                  r.check_keys(j, {"m_y", "m_z", "spacing"}, "array", at);
                  r.get(j, "m_y", c.array.m_y, at);
                  r.get(j, "m_z", c.array.m_z, at);
                  r.get(j, "spacing", c.array.spacing, at);
              });
    r.section(root, "codebook", 0, [&](const json& j, std::size_t at)
              {
                  r.check_keys(j, {"oversampling"}, "codebook", at);
                  std::vector<int> os{c.n_os_y, c.n_os_z};
                  r.get(j, "oversampling", os, at);
                  if (os.size() != 2)
                      r.fail(at, "codebook oversampling takes two values");
                  c.n_os_y = os[0];
                  c.n_os_z = os[1];
              });
    r.section(root, "ofdm", 0, [&](const json& j, std::size_t at)
              {
                  r.check_keys(j, {"subcarriers", "cyclic_prefix", "bandwidth_hz", "noise_figure_db", "pulse", "rolloff"},
                               "ofdm", at);
                  r.get(j, "subcarriers", c.subcarriers, at);
                  r.get(j, "cyclic_prefix", c.cyclic_prefix, at);
                  r.get(j, "bandwidth_hz", c.bandwidth_hz, at);
                  r.get(j, "noise_figure_db", c.noise_figure_db, at);
                  std::string pulse = c.pulse.kind == PulseKind::DeltaNearest ? "delta" : "raised-cosine";
                  r.get(j, "pulse", pulse, at);
                  if (pulse == "delta")
                      c.pulse.kind = PulseKind::DeltaNearest;
                  else if (pulse == "raised-cosine")
                      c.pulse.kind = PulseKind::RaisedCosine;
                  else
                      r.fail(r.locate("pulse", at), "pulse must be 'delta' or 'raised-cosine'");
                  r.get(j, "rolloff", c.pulse.rolloff, at);
              });
    r.section(root, "power", 0, [&](const json& j, std::size_t at)
              {
                  r.check_keys(j, {"downlink_dbm", "uplink_dbm"}, "power", at);
                  r.get(j, "downlink_dbm", c.downlink_dbm, at);
                  r.get(j, "uplink_dbm", c.uplink_dbm, at);
              });
    r.section(root, "mobility", 0, [&](const json& j, std::size_t at)
              {
                  r.check_keys(j, {"speed_mph", "pilot_time_s"}, "mobility", at);
                  r.get(j, "speed_mph", c.speed_mph, at);
                  r.get(j, "pilot_time_s", c.pilot_time, at);
              });
    r.section(root, "dataset", 0, [&](const json& j, std::size_t at)
              {
                  r.check_keys(j, {"samples", "heldout_fraction", "k_dl", "max_bounces", "max_paths", "noisy_rates",
                                   "threads"},
                               "dataset", at);
                  r.get(j, "samples", c.samples, at);
                  r.get(j, "heldout_fraction", c.heldout_fraction, at);
                  r.get(j, "k_dl", c.k_dl, at);
                  r.get(j, "max_bounces", c.max_bounces, at);
                  r.get(j, "max_paths", c.max_paths, at);
                  r.get(j, "noisy_rates", c.noisy_rates, at);
                  r.get(j, "threads", c.threads, at);
              });
    r.section(root, "model", 0, [&](const json& j, std::size_t at)
              {
                  r.check_keys(j, {"hidden_layers", "hidden_nodes", "dropout", "epochs", "batch_size", "learning_rate",
                                   "val_fraction", "input_norm", "output_norm", "sync", "n_b"},
                               "model", at);
                  r.get(j, "hidden_layers", c.hidden_layers, at);
                  r.get(j, "hidden_nodes", c.hidden_nodes, at);
                  r.get(j, "dropout", c.dropout, at);
                  r.get(j, "epochs", c.epochs, at);
                  r.get(j, "batch_size", c.batch_size, at);
                  r.get(j, "learning_rate", c.learning_rate, at);
                  r.get(j, "val_fraction", c.val_fraction, at);
                  std::string norm = to_string(c.input_norm), sync = to_string(c.sync);
                  r.get(j, "input_norm", norm, at);
                  r.get(j, "sync", sync, at);
                  try
                  {
                      c.input_norm = input_norm_from_string(norm);
                      c.sync = sync_mode_from_string(sync);
                  }
                  catch (const ConfigError& e)
                  {
                      r.fail(at, e.what());
                  }
                  r.get(j, "output_norm", c.output_norm, at);
                  r.get(j, "n_b", c.n_b, at);
              });
    r.section(root, "evaluate", 0, [&](const json& j, std::size_t at)
              {
                  r.check_keys(j, {"joint_budget"}, "evaluate", at);
                  r.get(j, "joint_budget", c.joint_budget, at);
              });
    r.section(root, "sweep", 0, [&](const json& j, std::size_t at)
              {
                  r.check_keys(j, {"dataset_sizes", "speeds_mph", "antennas", "uplink_dbm", "couple_downlink", "oracle"},
                               "sweep", at);
                  r.get(j, "dataset_sizes", c.sweep_dataset_sizes, at);
                  r.get(j, "speeds_mph", c.sweep_speeds_mph, at);
                  r.get(j, "antennas", c.sweep_antennas, at);
                  r.get(j, "uplink_dbm", c.sweep_uplink_dbm, at);
                  r.get(j, "couple_downlink", c.sweep_couple_downlink, at);
                  r.get(j, "oracle", c.sweep_oracle, at);
              });
    r.section(root, "ablate", 0, [&](const json& j, std::size_t at)
              {
                  r.check_keys(j, {"stages"}, "ablate", at);
                  if (!j.contains("stages"))
                      return;
                  const json& st = j.at("stages");
                  if (!st.is_array())
                      r.fail(r.locate("stages", at), "'stages' must be an array");
                  c.adapt_stages.clear();
                  for (const auto& s : st)
                  {
                      r.check_keys(s, {"scene", "samples"}, "stage", r.locate("stages", at));
                      AdaptStage a;
                      r.get(s, "scene", a.scene, at);
                      r.get(s, "samples", a.samples, at);
                      c.adapt_stages.push_back(a);
                  }
              });

    // semantic checks
    auto bad = [&](bool cond, const char* key, const std::string& msg)
    {
        if (cond)
            r.fail(r.locate(key, 0), msg);
    };
    bad(c.samples == 0, "samples", "dataset.samples must be positive");
    bad(!(c.heldout_fraction > 0.0 && c.heldout_fraction < 1.0), "heldout_fraction", "heldout_fraction must lie in (0, 1)");
    bad(c.k_dl < 1 || c.k_dl > c.subcarriers, "k_dl", "k_dl must lie in [1, subcarriers]");
    bad(c.n_b < 1, "n_b", "n_b must be >= 1");
    bad(!(c.dropout >= 0.0 && c.dropout < 1.0), "dropout", "dropout must lie in [0, 1)");
    bad(c.epochs < 1, "epochs", "epochs must be >= 1");
    bad(c.batch_size < 1, "batch_size", "batch_size must be >= 1");
    bad(!(c.speed_mph > 0.0), "speed_mph", "speed_mph must be positive");
    bad(c.joint_budget < 1, "joint_budget", "joint_budget must be >= 1");
    bad(c.hidden_layers < 0 || c.hidden_nodes < 0, "hidden_layers", "layer counts must be non-negative");
    bad(c.n_os_y < 1 || c.n_os_z < 1, "oversampling", "oversampling factors must be >= 1");
    for (double v : c.sweep_speeds_mph)
        bad(!(v > 0.0), "speeds_mph", "sweep speeds must be positive");

    // referenced scene files must exist
    auto check_scene = [&](const std::string& s, const char* key)
    {
        if (s == "street" || s == "street-bus")
            return;
        const fs::path p = fs::path(s).is_absolute() ? fs::path(s) : fs::path(base_dir) / s;
        if (!fs::exists(p))
            r.fail(r.locate(key, 0), "scene file not found: " + p.string());
    };
    check_scene(c.scene, "scene");
    for (const auto& st : c.adapt_stages)
        check_scene(st.scene, "stages");
    return c;
}

ScenarioConfig load_config(const std::string& path)
{
    std::ifstream in(path);
    if (!in)
        throw IoError("cannot open config: " + path);
    std::stringstream ss;
    ss << in.rdbuf();
    const fs::path parent = fs::path(path).parent_path();
    return parse_config(ss.str(), parent.empty() ? "." : parent.string());
}

json config_to_json(const ScenarioConfig& c)
{
    json stages = json::array();
    for (const auto& s : c.adapt_stages)
        stages.push_back({{"scene", s.scene}, {"samples", s.samples}});
    return {
        {"name", c.name},
        {"seed", c.seed},
        {"scene", {{"name", c.scene}, {"facade_half_width", c.facade_half_width}}},
        {"grid",
         {{"center", {c.grid.center_x, c.grid.center_y}},
          {"size", {c.grid.size_x, c.grid.size_y}},
          {"resolution", c.grid.resolution},
          {"height", c.grid.height}}},
        {"array", {{"m_y", c.array.m_y}, {"m_z", c.array.m_z}, {"spacing", c.array.spacing}}},
        {"codebook", {{"oversampling", {c.n_os_y, c.n_os_z}}}},
        {"ofdm",
         {{"subcarriers", c.subcarriers},
          {"cyclic_prefix", c.cyclic_prefix},
          {"bandwidth_hz", c.bandwidth_hz},
          {"noise_figure_db", c.noise_figure_db},
          {"pulse", c.pulse.kind == PulseKind::DeltaNearest ? "delta" : "raised-cosine"},
          {"rolloff", c.pulse.rolloff}}},
        {"power", {{"downlink_dbm", c.downlink_dbm}, {"uplink_dbm", c.uplink_dbm}}},
        {"mobility", {{"speed_mph", c.speed_mph}, {"pilot_time_s", c.pilot_time}}},
        {"dataset",
         {{"samples", c.samples},
          {"heldout_fraction", c.heldout_fraction},
          {"k_dl", c.k_dl},
          {"max_bounces", c.max_bounces},
          {"max_paths", c.max_paths},
          {"noisy_rates", c.noisy_rates},
          {"threads", c.threads}}},
        {"model",
         {{"hidden_layers", c.hidden_layers},
          {"hidden_nodes", c.hidden_nodes},
          {"dropout", c.dropout},
          {"epochs", c.epochs},
          {"batch_size", c.batch_size},
          {"learning_rate", c.learning_rate},
          {"val_fraction", c.val_fraction},
          {"input_norm", to_string(c.input_norm)},
          {"output_norm", c.output_norm},
          {"sync", to_string(c.sync)},
          {"n_b", c.n_b}}},
        {"evaluate", {{"joint_budget", c.joint_budget}}},
        {"sweep",
         {{"dataset_sizes", c.sweep_dataset_sizes},
          {"speeds_mph", c.sweep_speeds_mph},
          {"antennas", c.sweep_antennas},
          {"uplink_dbm", c.sweep_uplink_dbm},
          {"couple_downlink", c.sweep_couple_downlink},
          {"oracle", c.sweep_oracle}}},
        {"ablate", {{"stages", stages}}},
    };
}

// ---------------------------------------------------------------------------
// Pipeline

Scene resolve_scene(const std::string& name, const ScenarioConfig& cfg)
{
    if (name == "street")
        return street_scene(cfg.facade_half_width);
    if (name == "street-bus")
        return street_scene_with_bus(cfg.facade_half_width);
    const fs::path p = fs::path(name).is_absolute() ? fs::path(name) : fs::path(cfg.base_dir) / name;
    return load_scene(p.string());
}

Setup make_setup(const ScenarioConfig& cfg)
{
    Setup s;
    s.scene = resolve_scene(cfg.scene, cfg);
    s.scene.validate();
    s.geom = cfg.array;
    s.geom.validate();
    s.ofdm = OFDMConfig::make(cfg.subcarriers, cfg.cyclic_prefix, cfg.bandwidth_hz, cfg.downlink_dbm, cfg.noise_figure_db);
    s.codebook = beamsteering_codebook(s.geom, cfg.n_os_y, cfg.n_os_z);
    s.timing.pilot_time = cfg.pilot_time;
    s.timing.beam_coherence_time = beam_coherence_time_mph(cfg.speed_mph);
    s.uplink_power = dbm_to_watt(cfg.uplink_dbm);
    return s;
}

Dataset generate_dataset(const ScenarioConfig& cfg, const Setup& setup, std::uint64_t seed, GenerateStats* stats)
{
    GenerateConfig g;
    g.n_samples = std::min(cfg.samples, setup.scene.num_bs() ? cfg.grid.num_points() : 0);
    if (cfg.samples > cfg.grid.num_points())
        throw ConfigError("dataset.samples (" + std::to_string(cfg.samples) + ") exceeds the " +
                          std::to_string(cfg.grid.num_points()) + " grid points");
    g.seed = seed;
    g.uplink_power = setup.uplink_power;
    g.k_dl = cfg.k_dl;
    g.max_bounces = cfg.max_bounces;
    g.max_paths = cfg.max_paths;
    g.pulse = cfg.pulse;
    g.noisy_rates = cfg.noisy_rates;
    g.scenario_tag = cfg.scene == "street-bus" ? "NLOS" : (cfg.scene == "street" ? "LOS" : "custom");
    g.threads = cfg.threads;
    Dataset ds = generate(setup.scene, cfg.grid, setup.geom, setup.ofdm, setup.codebook, g, stats);
    std::ostringstream hash;
    hash << std::hex << std::setw(16) << std::setfill('0') << scene_hash(setup.scene);
    ds.config = config_to_json(cfg);
    ds.config["scene_hash"] = hash.str();
    ds.config.erase("sweep");
    ds.config.erase("ablate");
    ds.config.erase("evaluate");
    return ds;
}

json dataset_manifest(const Dataset& ds, const GenerateStats& stats, const std::string& file)
{
    return {
        {"file", fs::path(file).filename().string()},
        {"format", "CBF1"},
        {"records", ds.size()},
        {"shape",
         {{"n_bs", ds.shape.n_bs},
          {"k_dl", ds.shape.k_dl},
          {"n_tr", ds.shape.n_tr},
          {"k", ds.shape.k},
          {"max_paths", ds.shape.max_paths}}},
        {"seed", ds.seed},
        {"scene_hash", ds.config.value("scene_hash", "")},
        {"stats",
         {{"dropped_late_paths", stats.dropped_late_paths},
          {"blocked_los", stats.blocked_los},
          {"empty_bs_channels", stats.empty_bs_channels}}},
        {"config", ds.config},
    };
}

std::vector<Sample> apply_sync(std::span<const Sample> samples, SyncMode mode, std::uint64_t seed,
                               std::size_t index_offset)
{
    std::vector<Sample> out;
    out.reserve(samples.size());
    for (std::size_t i = 0; i < samples.size(); ++i)
    {
        switch (mode)
        {
        case SyncMode::Perfect: out.push_back(samples[i]); break;
        case SyncMode::RandomPhase:
            out.push_back(perturb_phase(samples[i], mix_seed(seed, 0x5EED0000ULL + index_offset + i)));
            break;
        case SyncMode::Rssi: out.push_back(to_rssi(samples[i])); break;
        }
    }
    return out;
}

std::size_t train_count(const ScenarioConfig& cfg, std::size_t n)
{
    const auto held = static_cast<std::size_t>(std::llround(cfg.heldout_fraction * static_cast<double>(n)));
    return n - std::min(held, n);
}

TrainConfig train_config(const ScenarioConfig& cfg, std::uint64_t seed)
{
    TrainConfig t;
    t.batch_size = cfg.batch_size;
    t.epochs = cfg.epochs;
    t.learning_rate = cfg.learning_rate;
    t.val_fraction = cfg.val_fraction;
    t.seed = seed;
    t.n_b = cfg.n_b;
    return t;
}

TrainedModels train_models(const ScenarioConfig& cfg, std::span<const Sample> train, std::uint64_t seed,
                           const NormalizationSpec* norm, const TrainedModels* warm)
{
    if (train.empty())
        throw EmptyDataset("no training samples");
    Eigen::MatrixXd inputs;
    NormalizationSpec spec;
    if (norm)
    {
        spec = *norm;
        inputs = apply_normalization(spec, train);
    }
    else
        std::tie(inputs, spec) = normalize_inputs(train, cfg.input_norm);

    const int n_bs = train.front().num_bs();
    const int n_tr = train.front().n_tr();
    if (warm && static_cast<int>(warm->models.size()) != n_bs)
        throw DimensionMismatch("warm start needs one model per BS");
    TrainedModels tm;
    tm.models.resize(static_cast<std::size_t>(n_bs));
    tm.histories.resize(static_cast<std::size_t>(n_bs));
    tm.excluded.assign(static_cast<std::size_t>(n_bs), 0);

    auto train_bs = [&](int b)
    {
        std::vector<Eigen::Index> rows;
        for (std::size_t i = 0; i < train.size(); ++i)
            if (train[i].beam_rates.row(b).maxCoeff() > 0.0)
                rows.push_back(static_cast<Eigen::Index>(i));
        tm.excluded[b] = train.size() - rows.size();
        if (rows.empty())
            throw EmptyDataset("BS " + std::to_string(b) + " has no sample with a non-zero rate");
        Eigen::MatrixXd x(static_cast<Eigen::Index>(rows.size()), inputs.cols());
        Eigen::MatrixXd t(x.rows(), n_tr), rates(x.rows(), n_tr);
        for (std::size_t i = 0; i < rows.size(); ++i)
        {
            const auto r = static_cast<Eigen::Index>(i);
            x.row(r) = inputs.row(rows[i]);
            const Eigen::VectorXd rate = train[static_cast<std::size_t>(rows[i])].beam_rates.row(b).transpose();
            rates.row(r) = rate.transpose();
            if (cfg.output_norm)
            {
                const auto n = normalize_outputs(std::span<const double>(rate.data(), rate.size()));
                t.row(r) = Eigen::Map<const Eigen::RowVectorXd>(n.data(), static_cast<Eigen::Index>(n.size()));
            }
            else
                t.row(r) = rate.transpose();
        }
        Checkpoint ck;
        ck.norm = spec;
        ck.output_norm = cfg.output_norm;
        ck.model = warm ? warm->models[b].model
                        : MLPModel::create(static_cast<int>(inputs.cols()), cfg.hidden_layers, cfg.hidden_width(n_bs),
                                           n_tr, cfg.dropout, mix_seed(seed, 0x1000 + b));
        tm.histories[b] = fit(ck.model, x, t, rates, train_config(cfg, mix_seed(seed, 0x2000 + b)));
        tm.models[b] = std::move(ck);
    };

    const unsigned hw = cfg.threads ? cfg.threads : std::max(1u, std::thread::hardware_concurrency());
    if (hw <= 1 || n_bs == 1)
    {
        for (int b = 0; b < n_bs; ++b)
            train_bs(b);
    }
    else
    {
        std::vector<std::exception_ptr> errors(static_cast<std::size_t>(n_bs));
        {
            std::vector<std::jthread> pool;
            for (int b = 0; b < n_bs; ++b)
                pool.emplace_back([&, b]
                                  {
                                      try
                                      {
                                          train_bs(b);
                                      }
                                      catch (...)
                                      {
                                          errors[b] = std::current_exception();
                                      }
                                  });
        }
        for (const auto& e : errors)
            if (e)
                std::rethrow_exception(e);
    }
    return tm;
}

Predictor model_predictor(const TrainedModels& tm)
{
    return [&tm](const Sample& s, int n_b)
    {
        std::vector<std::vector<int>> out;
        if (tm.models.empty())
            throw DimensionMismatch("no trained models");
        const Eigen::VectorXd x = apply_normalization(tm.models.front().norm, s);
        for (const auto& ck : tm.models)
            out.push_back(predict_top(ck.model, x, n_b));
        return out;
    };
}

Predictor oracle_predictor()
{
    return [](const Sample& s, int n_b)
    {
        std::vector<std::vector<int>> out;
        for (int b = 0; b < s.num_bs(); ++b)
        {
            const Eigen::VectorXd r = s.beam_rates.row(b).transpose();
            out.push_back(top_indices(std::span<const double>(r.data(), r.size()), n_b));
        }
        return out;
    };
}

std::vector<SampleEval> evaluate_samples(const ScenarioConfig& cfg, const Setup& setup, std::span<const Sample> test,
                                         const Predictor& predictor, std::size_t index_offset)
{
    const double snr = setup.ofdm.snr_linear();
    const int n_tr = setup.codebook.size();
    const int n_b = std::min(cfg.n_b, n_tr);
    const double t_b = setup.timing.beam_coherence_time;
    std::vector<SampleEval> rows;
    rows.reserve(test.size());
    for (std::size_t i = 0; i < test.size(); ++i)
    {
        const Sample& s = test[i];
        if (s.n_tr() != n_tr)
            throw ShapeMismatch("sample codebook size does not match the configuration");
        const Channels fcs = sample_channels(s, setup.geom, setup.ofdm, cfg.pulse);
        SampleEval e;
        e.index = index_offset + i;
        e.position = s.user_pos;
        e.tag = s.scenario_tag;

        std::vector<int> bl(static_cast<std::size_t>(s.num_bs()));
        for (int b = 0; b < s.num_bs(); ++b)
        {
            const Eigen::VectorXd r = s.beam_rates.row(b).transpose();
            bl[b] = baseline_select(std::span<const double>(r.data(), r.size()));
        }
        e.r_bl = coordinated_rate(fcs, setup.codebook, bl, snr);
        e.r_eff_bl = effective_rate(e.r_bl, baseline_training_time(n_tr, setup.timing), t_b);

        const auto cand = predictor(s, n_b);
        std::vector<std::vector<int>> cand1;
        for (const auto& c : cand)
            cand1.push_back({c.front()});
        const DLResult d1 = dl_select_and_rate(cand1, s, fcs, setup.codebook, snr, 1, setup.timing);
        const DLResult dn = dl_select_and_rate(cand, s, fcs, setup.codebook, snr, n_b, setup.timing);
        e.r_dl1 = d1.rate;
        e.r_eff_dl1 = d1.effective_rate;
        e.r_dlnb = dn.rate;
        e.r_eff_dlnb = dn.effective_rate;

        const JointResult star = upper_bound(fcs, setup.codebook, snr, cfg.joint_budget);
        e.r_star = star.rate;
        e.r_star_exact = star.exact;

        for (int b = 0; b < s.num_bs(); ++b)
        {
            if (!(s.beam_rates.row(b).maxCoeff() > 0.0))
                continue;
            ++e.scored_bs;
            const bool hit1 = cand[b].front() == bl[b];
            e.top1_hits += hit1;
            e.topnb_hits += std::find(cand[b].begin(), cand[b].end(), bl[b]) != cand[b].end();
            const bool los = std::any_of(s.rays[b].begin(), s.rays[b].end(),
                                         [](const RayPath& p) { return p.bounce_count == 0; });
            if (!los)
            {
                ++e.shadowed_scored;
                e.shadowed_top1_hits += hit1;
            }
        }
        rows.push_back(std::move(e));
    }
    return rows;
}

EvalSummary summarize(const ScenarioConfig& cfg, const Setup& setup, std::span<const SampleEval> rows)
{
    EvalSummary s;
    s.n = rows.size();
    s.n_tr = setup.codebook.size();
    s.n_b = std::min(cfg.n_b, s.n_tr);
    s.speed_mph = cfg.speed_mph;
    s.overhead_bl = baseline_training_time(s.n_tr, setup.timing) / setup.timing.beam_coherence_time;
    s.overhead_dl = prediction_training_time(s.n_b, setup.timing) / setup.timing.beam_coherence_time;
    double scored = 0, hits1 = 0, hitsn = 0, sh_scored = 0, sh_hits = 0;
    for (const auto& r : rows)
    {
        s.r_bl += r.r_bl;
        s.r_eff_bl += r.r_eff_bl;
        s.r_dl1 += r.r_dl1;
        s.r_dlnb += r.r_dlnb;
        s.r_eff_dl1 += r.r_eff_dl1;
        s.r_eff_dlnb += r.r_eff_dlnb;
        s.r_star += r.r_star;
        s.r_star_exact = s.r_star_exact && r.r_star_exact;
        scored += r.scored_bs;
        hits1 += r.top1_hits;
        hitsn += r.topnb_hits;
        sh_scored += r.shadowed_scored;
        sh_hits += r.shadowed_top1_hits;
    }
    if (s.n)
    {
        const double n = static_cast<double>(s.n);
        s.r_bl /= n;
        s.r_eff_bl /= n;
        s.r_dl1 /= n;
        s.r_dlnb /= n;
        s.r_eff_dl1 /= n;
        s.r_eff_dlnb /= n;
        s.r_star /= n;
    }
    s.top1_acc = scored > 0 ? hits1 / scored : 0.0;
    s.topnb_acc = scored > 0 ? hitsn / scored : 0.0;
    s.shadowed_pairs = static_cast<std::size_t>(sh_scored);
    s.shadowed_top1_acc = sh_scored > 0 ? sh_hits / sh_scored : 0.0;
    return s;
}

EvalSummary rescale_speed(const EvalSummary& base_summary, std::span<const SampleEval> rows, double speed_mph,
                          const TimingModel& base)
{
    EvalSummary s = base_summary;
    TimingModel t = base;
    t.beam_coherence_time = beam_coherence_time_mph(speed_mph);
    s.speed_mph = speed_mph;
    s.overhead_bl = baseline_training_time(s.n_tr, t) / t.beam_coherence_time;
    s.overhead_dl = prediction_training_time(s.n_b, t) / t.beam_coherence_time;
    const double f_bl = data_fraction(baseline_training_time(s.n_tr, t), t.beam_coherence_time);
    const double f_1 = data_fraction(prediction_training_time(1, t), t.beam_coherence_time);
    const double f_n = data_fraction(prediction_training_time(s.n_b, t), t.beam_coherence_time);
    s.r_eff_bl = s.r_eff_dl1 = s.r_eff_dlnb = 0.0;
    for (const auto& r : rows)
    {
        s.r_eff_bl += f_bl * r.r_bl;
        s.r_eff_dl1 += f_1 * r.r_dl1;
        s.r_eff_dlnb += f_n * r.r_dlnb;
    }
    if (!rows.empty())
    {
        const double n = static_cast<double>(rows.size());
        s.r_eff_bl /= n;
        s.r_eff_dl1 /= n;
        s.r_eff_dlnb /= n;
    }
    return s;
}

// ---------------------------------------------------------------------------
// Output

namespace
{

std::ofstream open_csv(const std::string& path)
{
    std::ofstream out(path, std::ios::trunc);
    if (!out)
        throw IoError("cannot write " + path);
    out << std::setprecision(10);
    return out;
}

void write_json(const json& j, const std::string& path)
{
    std::ofstream out(path, std::ios::trunc);
    if (!out)
        throw IoError("cannot write " + path);
    out << j.dump(2) << '\n';
}

std::string out_path(const std::string& dir, const std::string& file)
{
    fs::create_directories(dir);
    return (fs::path(dir) / file).string();
}

} // namespace

void write_eval_samples_csv(std::span<const SampleEval> rows, const std::string& path)
{
    auto out = open_csv(path);
    out << "index,x,y,tag,r_bl,r_eff_bl,r_dl_1,r_eff_dl_1,r_dl_nb,r_eff_dl_nb,r_star,r_star_exact,scored_bs,"
           "top1_hits,topnb_hits\n";
    for (const auto& r : rows)
        out << r.index << ',' << r.position.x() << ',' << r.position.y() << ',' << r.tag << ',' << r.r_bl << ','
            << r.r_eff_bl << ',' << r.r_dl1 << ',' << r.r_eff_dl1 << ',' << r.r_dlnb << ',' << r.r_eff_dlnb << ','
            << r.r_star << ',' << (r.r_star_exact ? 1 : 0) << ',' << r.scored_bs << ',' << r.top1_hits << ','
            << r.topnb_hits << '\n';
}

namespace
{

const char* SUMMARY_HEADER = "n_samples,n_tr,n_b,speed_mph,overhead_bl,overhead_dl,r_genie,r_eff_bl,r_eff_dl_1,"
                             "r_eff_dl_nb,r_star,r_star_exact,top1_acc,topnb_acc,shadowed_top1_acc,shadowed_pairs";

void summary_fields(std::ostream& out, const EvalSummary& s)
{
    out << s.n << ',' << s.n_tr << ',' << s.n_b << ',' << s.speed_mph << ',' << s.overhead_bl << ',' << s.overhead_dl
        << ',' << s.r_bl << ',' << s.r_eff_bl << ',' << s.r_eff_dl1 << ',' << s.r_eff_dlnb << ',' << s.r_star << ','
        << (s.r_star_exact ? 1 : 0) << ',' << s.top1_acc << ',' << s.topnb_acc << ',' << s.shadowed_top1_acc << ','
        << s.shadowed_pairs;
}

} // namespace

void write_eval_summary_csv(const EvalSummary& s, const std::string& path)
{
    auto out = open_csv(path);
    out << SUMMARY_HEADER << '\n';
    summary_fields(out, s);
    out << '\n';
}

// ---------------------------------------------------------------------------
// Commands

namespace
{

constexpr int CSV_SCHEMA = 1;
constexpr std::uint64_t DATASET_STREAM = 1;
constexpr std::uint64_t TRAIN_STREAM = 2;
constexpr std::uint64_t SYNC_STREAM = 3;

void check_dataset(const Dataset& ds, const Setup& setup, const ScenarioConfig& cfg)
{
    const DatasetShape want{static_cast<int>(setup.scene.num_bs()), cfg.k_dl, setup.codebook.size(), cfg.subcarriers,
                            ds.shape.max_paths};
    if (!(ds.shape == want))
        throw ShapeMismatch("dataset shape (N=" + std::to_string(ds.shape.n_bs) +
                            ", K_DL=" + std::to_string(ds.shape.k_dl) + ", N_tr=" + std::to_string(ds.shape.n_tr) +
                            ", K=" + std::to_string(ds.shape.k) + ") does not match the configuration");
}

std::string model_file(int b) { return "model_bs" + std::to_string(b) + ".cbfm"; }
std::string history_file(int b) { return "history_bs" + std::to_string(b) + ".csv"; }

void write_run_manifest(const std::string& dir, const std::string& command, const ScenarioConfig& cfg,
                        const std::vector<std::string>& files, json extra = json::object())
{
    json files_j = json::array();
    for (const auto& f : files)
        files_j.push_back(fs::path(f).filename().string());
    extra["command"] = command;
    extra["csv_schema"] = CSV_SCHEMA;
    extra["seed"] = cfg.seed;
    extra["files"] = files_j;
    extra["config"] = config_to_json(cfg);
    write_json(extra, out_path(dir, command + "_manifest.json"));
}

struct Split
{
    std::vector<Sample> train;
    std::vector<Sample> test;
    std::size_t test_offset = 0;
};

Split split_and_sync(const ScenarioConfig& cfg, const Dataset& ds, std::size_t train_limit = SIZE_MAX)
{
    const std::size_t n_train = train_count(cfg, ds.size());
    const auto& all = ds.samples();
    const std::size_t used = std::min(train_limit, n_train);
    const std::uint64_t sync_seed = mix_seed(cfg.seed, SYNC_STREAM);
    Split s;
    s.train = apply_sync(std::span<const Sample>(all.data(), used), cfg.sync, sync_seed, 0);
    s.test = apply_sync(std::span<const Sample>(all.data() + n_train, all.size() - n_train), cfg.sync, sync_seed,
                        n_train);
    s.test_offset = n_train;
    return s;
}

struct Run
{
    std::vector<SampleEval> rows;
    EvalSummary summary;
};

// Trains (or substitutes the oracle) and evaluates on the held-out part.
Run train_and_evaluate(const ScenarioConfig& cfg, const Setup& setup, const Dataset& ds, bool oracle,
                       std::size_t train_limit = SIZE_MAX)
{
    Split sp = split_and_sync(cfg, ds, train_limit);
    Run run;
    if (oracle)
        run.rows = evaluate_samples(cfg, setup, sp.test, oracle_predictor(), sp.test_offset);
    else
    {
        const TrainedModels tm = train_models(cfg, sp.train, mix_seed(cfg.seed, TRAIN_STREAM));
        run.rows = evaluate_samples(cfg, setup, sp.test, model_predictor(tm), sp.test_offset);
    }
    run.summary = summarize(cfg, setup, run.rows);
    return run;
}

const char* SWEEP_HEADER = "axis,value,method,rate,effective_rate,top1_acc,topnb_acc,n_tr,r_star_exact";

void sweep_rows(std::ostream& out, const std::string& axis, const std::string& value, const EvalSummary& s)
{
    auto row = [&](const std::string& method, double rate, double eff, bool acc)
    {
        out << axis << ',' << value << ',' << method << ',' << rate << ',' << eff << ',';
        if (acc)
            out << s.top1_acc << ',' << s.topnb_acc;
        else
            out << ',';
        out << ',' << s.n_tr << ',' << (s.r_star_exact ? 1 : 0) << '\n';
    };
    row("baseline", s.r_bl, s.r_eff_bl, false);
    row("dl_nb1", s.r_dl1, s.r_eff_dl1, true);
    row("dl_nb" + std::to_string(s.n_b), s.r_dlnb, s.r_eff_dlnb, true);
    row("upper_bound", s.r_star, s.r_star, false);
}

std::string fmt(double v)
{
    std::ostringstream ss;
    ss << std::setprecision(10) << v;
    return ss.str();
}

} // namespace

std::vector<std::string> cmd_generate(const ScenarioConfig& cfg, const std::string& out_dir)
{
    const Setup setup = make_setup(cfg);
    GenerateStats stats;
    const Dataset ds = generate_dataset(cfg, setup, mix_seed(cfg.seed, DATASET_STREAM), &stats);
    const std::string file = out_path(out_dir, "dataset.cbf");
    save(ds, file);
    const std::string manifest = out_path(out_dir, "manifest.json");
    write_json(dataset_manifest(ds, stats, file), manifest);
    return {file, manifest};
}

std::vector<std::string> cmd_train(const ScenarioConfig& cfg, const std::string& dataset_path,
                                   const std::string& out_dir)
{
    const Setup setup = make_setup(cfg);
    const Dataset ds = load(dataset_path);
    check_dataset(ds, setup, cfg);
    const Split sp = split_and_sync(cfg, ds);
    const TrainedModels tm = train_models(cfg, sp.train, mix_seed(cfg.seed, TRAIN_STREAM));
    std::vector<std::string> files;
    json per_bs = json::array();
    for (std::size_t b = 0; b < tm.models.size(); ++b)
    {
        files.push_back(out_path(out_dir, model_file(static_cast<int>(b))));
        save_checkpoint(tm.models[b], files.back());
        files.push_back(out_path(out_dir, history_file(static_cast<int>(b))));
        write_history_csv(tm.histories[b], files.back());
        const auto& last = tm.histories[b].epochs.back();
        per_bs.push_back({{"bs", b},
                          {"excluded_all_zero", tm.excluded[b]},
                          {"final_train_loss", last.train_loss},
                          {"final_val_loss", last.val_loss},
                          {"final_top1_acc", last.top1_acc}});
    }
    write_run_manifest(out_dir, "train", cfg, files,
                       {{"dataset", fs::path(dataset_path).filename().string()},
                        {"train_samples", sp.train.size()},
                        {"models", per_bs}});
    return files;
}

std::vector<std::string> cmd_evaluate(const ScenarioConfig& cfg, const std::string& dataset_path,
                                      const std::string& model_dir, const std::string& out_dir, bool oracle)
{
    const Setup setup = make_setup(cfg);
    const Dataset ds = load(dataset_path);
    check_dataset(ds, setup, cfg);
    const Split sp = split_and_sync(cfg, ds, 0);
    std::vector<SampleEval> rows;
    if (oracle)
        rows = evaluate_samples(cfg, setup, sp.test, oracle_predictor(), sp.test_offset);
    else
    {
        TrainedModels tm;
        for (int b = 0; b < ds.shape.n_bs; ++b)
        {
            const fs::path p = fs::path(model_dir) / model_file(b);
            if (!fs::exists(p))
                throw IoError("missing checkpoint: " + p.string());
            tm.models.push_back(load_checkpoint(p.string()));
            if (tm.models.back().model.input_width() != feature_width(ds.shape, tm.models.back().norm.rssi) ||
                tm.models.back().model.output_width() != ds.shape.n_tr)
                throw DimensionMismatch("checkpoint " + p.string() + " does not fit the dataset shape");
        }
        rows = evaluate_samples(cfg, setup, sp.test, model_predictor(tm), sp.test_offset);
    }
    const EvalSummary s = summarize(cfg, setup, rows);
    std::vector<std::string> files{out_path(out_dir, "eval_samples.csv"), out_path(out_dir, "eval_summary.csv")};
    write_eval_samples_csv(rows, files[0]);
    write_eval_summary_csv(s, files[1]);
    write_run_manifest(out_dir, "evaluate", cfg, files, {{"predictor", oracle ? "oracle" : "trained"}});
    return files;
}

std::vector<std::string> cmd_sweep(const ScenarioConfig& cfg, const std::string& axis, const std::string& out_dir)
{
    const std::string file = out_path(out_dir, "sweep_" + axis + ".csv");
    std::ostringstream body;
    body << std::setprecision(10);
    const bool oracle = cfg.sweep_oracle;
    if (axis == "dataset_size")
    {
        const Setup setup = make_setup(cfg);
        const Dataset ds = generate_dataset(cfg, setup, mix_seed(cfg.seed, DATASET_STREAM));
        const std::size_t n_train = train_count(cfg, ds.size());
        for (std::size_t size : cfg.sweep_dataset_sizes)
        {
            if (size > n_train)
                throw ConfigError("sweep dataset size " + std::to_string(size) + " exceeds the " +
                                  std::to_string(n_train) + " training samples");
            const Run run = train_and_evaluate(cfg, setup, ds, oracle, size);
            sweep_rows(body, axis, std::to_string(size), run.summary);
        }
    }
    else if (axis == "speed")
    {
        const Setup setup = make_setup(cfg);
        const Dataset ds = generate_dataset(cfg, setup, mix_seed(cfg.seed, DATASET_STREAM));
        const Run run = train_and_evaluate(cfg, setup, ds, oracle);
        for (double v : cfg.sweep_speeds_mph)
            sweep_rows(body, axis, fmt(v), rescale_speed(run.summary, run.rows, v, setup.timing));
    }
    else if (axis == "antennas")
    {
        for (const auto& [my, mz] : cfg.sweep_antennas)
        {
            ScenarioConfig c = cfg;
            c.array.m_y = my;
            c.array.m_z = mz;
            const Setup setup = make_setup(c);
            const Dataset ds = generate_dataset(c, setup, mix_seed(cfg.seed, DATASET_STREAM));
            const Run run = train_and_evaluate(c, setup, ds, oracle);
            sweep_rows(body, axis, std::to_string(my) + "x" + std::to_string(mz), run.summary);
        }
    }
    else if (axis == "power")
    {
        for (double p : cfg.sweep_uplink_dbm)
        {
            ScenarioConfig c = cfg;
            c.uplink_dbm = p;
            if (cfg.sweep_couple_downlink)
                c.downlink_dbm = p;
            const Setup setup = make_setup(c);
            const Dataset ds = generate_dataset(c, setup, mix_seed(cfg.seed, DATASET_STREAM));
            const Run run = train_and_evaluate(c, setup, ds, oracle);
            sweep_rows(body, axis, fmt(p), run.summary);
        }
    }
    else
        throw ConfigError("unknown sweep axis '" + axis + "' (dataset_size, speed, antennas, power)");

    auto out = open_csv(file);
    out << SWEEP_HEADER << '\n' << body.str();
    out.close();
    write_run_manifest(out_dir, "sweep_" + axis, cfg, {file}, {{"predictor", oracle ? "oracle" : "trained"}});
    return {file};
}

std::vector<std::string> cmd_ablate(const ScenarioConfig& cfg, const std::string& mode, const std::string& out_dir)
{
    const std::string file = out_path(out_dir, "ablate_" + mode + ".csv");
    std::ostringstream body;
    body << std::setprecision(10);
    std::string header;
    if (mode == "normalization")
    {
        header = "input_norm,output_norm,effective_rate_dl_1,effective_rate_dl_nb,top1_acc,topnb_acc,"
                 "shadowed_top1_acc,shadowed_pairs";
        const Setup setup = make_setup(cfg);
        const Dataset ds = generate_dataset(cfg, setup, mix_seed(cfg.seed, DATASET_STREAM));
        for (InputNorm n : {InputNorm::PerDataset, InputNorm::PerSample, InputNorm::PerBaseStation, InputNorm::PerElement})
            for (bool on : {true, false})
            {
                ScenarioConfig c = cfg;
                c.input_norm = n;
                c.output_norm = on;
                const EvalSummary s = train_and_evaluate(c, setup, ds, false).summary;
                body << to_string(n) << ',' << (on ? 1 : 0) << ',' << s.r_eff_dl1 << ',' << s.r_eff_dlnb << ','
                     << s.top1_acc << ',' << s.topnb_acc << ',' << s.shadowed_top1_acc << ',' << s.shadowed_pairs
                     << '\n';
            }
    }
    else if (mode == "sync" || mode == "rssi")
    {
        header = "variant,train_samples,effective_rate_dl_1,effective_rate_dl_nb,top1_acc,topnb_acc";
        const Setup setup = make_setup(cfg);
        const Dataset ds = generate_dataset(cfg, setup, mix_seed(cfg.seed, DATASET_STREAM));
        const std::size_t n_train = train_count(cfg, ds.size());
        const std::vector<SyncMode> variants = mode == "sync"
                                                   ? std::vector<SyncMode>{SyncMode::Perfect, SyncMode::RandomPhase,
                                                                           SyncMode::Rssi}
                                                   : std::vector<SyncMode>{SyncMode::Perfect, SyncMode::Rssi};
        std::vector<std::size_t> sizes = mode == "sync" ? cfg.sweep_dataset_sizes : std::vector<std::size_t>{n_train};
        for (SyncMode v : variants)
            for (std::size_t size : sizes)
            {
                if (size > n_train)
                    throw ConfigError("ablation dataset size " + std::to_string(size) + " exceeds the " +
                                      std::to_string(n_train) + " training samples");
                ScenarioConfig c = cfg;
                c.sync = v;
                const EvalSummary s = train_and_evaluate(c, setup, ds, false, size).summary;
                body << to_string(v) << ',' << size << ',' << s.r_eff_dl1 << ',' << s.r_eff_dlnb << ',' << s.top1_acc
                     << ',' << s.topnb_acc << '\n';
            }
    }
    else if (mode == "adaptability")
    {
        header = "stage,scene,cumulative_samples,r_eff_bl,r_star,r_eff_dl_before,r_eff_dl_after,top1_before,"
                 "top1_after";
        std::vector<Sample> cumulative;
        TrainedModels tm;
        NormalizationSpec norm;
        bool have_models = false;
        for (std::size_t i = 0; i < cfg.adapt_stages.size(); ++i)
        {
            const AdaptStage& st = cfg.adapt_stages[i];
            ScenarioConfig c = cfg;
            c.scene = st.scene;
            c.samples = st.samples;
            const Setup setup = make_setup(c);
            const Dataset ds = generate_dataset(c, setup, mix_seed(cfg.seed, 0x100 + i));
            Split sp = split_and_sync(c, ds);
            EvalSummary before{};
            if (have_models)
                before = summarize(c, setup, evaluate_samples(c, setup, sp.test, model_predictor(tm), sp.test_offset));
            cumulative.insert(cumulative.end(), sp.train.begin(), sp.train.end());
            const std::uint64_t seed = mix_seed(cfg.seed, 0x200 + i);
            if (have_models)
                tm = train_models(c, cumulative, seed, &norm, &tm);
            else
            {
                tm = train_models(c, cumulative, seed);
                norm = tm.models.front().norm;
                have_models = true;
            }
            const EvalSummary after =
                summarize(c, setup, evaluate_samples(c, setup, sp.test, model_predictor(tm), sp.test_offset));
            body << i << ',' << st.scene << ',' << cumulative.size() << ',' << after.r_eff_bl << ',' << after.r_star
                 << ',';
            if (i > 0)
                body << before.r_eff_dlnb;
            body << ',' << after.r_eff_dlnb << ',';
            if (i > 0)
                body << before.top1_acc;
            body << ',' << after.top1_acc << '\n';
        }
    }
    else
        throw ConfigError("unknown ablation mode '" + mode + "' (normalization, sync, rssi, adaptability)");

    auto out = open_csv(file);
    out << header << '\n' << body.str();
    out.close();
    write_run_manifest(out_dir, "ablate_" + mode, cfg, {file});
    return {file};
}

int exit_code_for(const std::exception& e)
{
    if (dynamic_cast<const ConfigError*>(&e))
        return 2;
    if (dynamic_cast<const IoError*>(&e))
        return 3;
    if (dynamic_cast<const FormatVersionMismatch*>(&e) || dynamic_cast<const CorruptRecord*>(&e))
        return 4;
    if (dynamic_cast<const ShapeMismatch*>(&e) || dynamic_cast<const DimensionMismatch*>(&e))
        return 5;
    if (dynamic_cast<const Divergence*>(&e))
        return 6;
    if (dynamic_cast<const InvalidScene*>(&e))
        return 7;
    if (dynamic_cast<const EmptyDataset*>(&e) || dynamic_cast<const AllZeroInputs*>(&e) ||
        dynamic_cast<const AllZeroRates*>(&e) || dynamic_cast<const EmptyGrid*>(&e))
        return 8;
    if (dynamic_cast<const Error*>(&e))
        return 9;
    if (dynamic_cast<const std::invalid_argument*>(&e))
        return 10;
    return 1;
}

} // namespace cbf
