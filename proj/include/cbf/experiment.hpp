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

#ifndef CBF_EXPERIMENT_HPP
#define CBF_EXPERIMENT_HPP

#include "cbf/learning.hpp"

#include <functional>
#include <json.hpp>

#include <cstdint>
#include <string>
#include <vector>

namespace cbf
{

enum class SyncMode
{
    Perfect,
    RandomPhase,
    Rssi,
};

const char* to_string(SyncMode m);
SyncMode sync_mode_from_string(const std::string& s);

struct AdaptStage
{
    std::string scene = "street";
    std::size_t samples = 400;
};

// Experiment description. Every field has a desk-scale default; a JSON file
// overrides any subset (see configs/).
struct ScenarioConfig
{
    std::string name = "desk";
    std::uint64_t seed = 1;

    // scene: "street", "street-bus" or a scene JSON file (resolved relative to the config)
    std::string scene = "street";
    double facade_half_width = 32.0;

    GridSpec grid{};
    ArrayGeometry array{};
    int n_os_y = 2;
    int n_os_z = 2;

    int subcarriers = 256;
    int cyclic_prefix = 64;
    double bandwidth_hz = 1e9;
    double noise_figure_db = 5.0;
    Pulse pulse{};

    double downlink_dbm = 30.0;
    double uplink_dbm = 0.0;
    double speed_mph = 30.0;
    double pilot_time = 10e-6;

    std::size_t samples = 2000;
    double heldout_fraction = 0.2;
    int k_dl = 32;
    int max_bounces = 2;
    std::size_t max_paths = 25;
    bool noisy_rates = false;
    unsigned threads = 0;

    int hidden_layers = 6;
    int hidden_nodes = 0; // 0: 2 N K_DL
    double dropout = 0.5;
    int epochs = 50;
    int batch_size = 100;
    double learning_rate = 1e-3;
    double val_fraction = 0.1;
    InputNorm input_norm = InputNorm::PerDataset;
    bool output_norm = true;
    SyncMode sync = SyncMode::Perfect;
    int n_b = 4;
    // exact joint search for R* only when N_tr^N stays within this many combinations
    std::uint64_t joint_budget = 100'000;

    std::vector<std::size_t> sweep_dataset_sizes{200, 400, 800, 1600};
    std::vector<double> sweep_speeds_mph{10, 30, 60};
    std::vector<std::pair<int, int>> sweep_antennas{{4, 2}, {8, 2}, {16, 2}, {32, 2}};
    std::vector<double> sweep_uplink_dbm{-30, -20, -10, 0, 10};
    bool sweep_couple_downlink = false; // power axis: downlink power follows the uplink power
    bool sweep_oracle = false;          // replace the trained predictor by the true beam ranking

    std::vector<AdaptStage> adapt_stages{{"street", 400}, {"street-bus", 400}, {"street", 400}, {"street-bus", 400}};

    std::string base_dir = "."; // directory of the config file

    int hidden_width(int n_bs) const { return hidden_nodes > 0 ? hidden_nodes : 2 * n_bs * k_dl; }
};

ScenarioConfig default_config();

// Parses a JSON config; unknown keys, type errors and syntax errors raise
// ConfigError with a "line L" anchor into `text`.
ScenarioConfig parse_config(const std::string& text, const std::string& base_dir = ".");
ScenarioConfig load_config(const std::string& path);
nlohmann::json config_to_json(const ScenarioConfig& cfg);

// Objects derived from a config.
struct Setup
{
    Scene scene;
    ArrayGeometry geom;
    OFDMConfig ofdm;
    Codebook codebook;
    TimingModel timing;
    double uplink_power = 0.0;
};

Setup make_setup(const ScenarioConfig& cfg);
Scene resolve_scene(const std::string& name, const ScenarioConfig& cfg);

Dataset generate_dataset(const ScenarioConfig& cfg, const Setup& setup, std::uint64_t seed,
                         GenerateStats* stats = nullptr);
nlohmann::json dataset_manifest(const Dataset& ds, const GenerateStats& stats, const std::string& file);

// Applies the configured synchronisation variant to the omni signatures.
// Phase draws are keyed by (seed, sample index) so train and test agree.
std::vector<Sample> apply_sync(std::span<const Sample> samples, SyncMode mode, std::uint64_t seed,
                               std::size_t index_offset = 0);

struct TrainedModels
{
    std::vector<Checkpoint> models; // one per BS
    std::vector<History> histories;
    std::vector<std::size_t> excluded; // all-zero-rate samples dropped per BS
};

TrainConfig train_config(const ScenarioConfig& cfg, std::uint64_t seed);

// Trains N independent models on shared inputs. With `norm` given the input
// normaliser is reused; `warm` continues training existing models.
TrainedModels train_models(const ScenarioConfig& cfg, std::span<const Sample> train, std::uint64_t seed,
                           const NormalizationSpec* norm = nullptr, const TrainedModels* warm = nullptr);

// Per-BS candidate lists for one sample.
using Predictor = std::function<std::vector<std::vector<int>>(const Sample&, int n_b)>;
Predictor model_predictor(const TrainedModels& tm);
Predictor oracle_predictor();

struct SampleEval
{
    std::size_t index = 0;
    Vec3 position = Vec3::Zero();
    std::string tag;
    double r_bl = 0.0; // genie proxy: disjoint selection, no overhead
    double r_eff_bl = 0.0;
    double r_dl1 = 0.0;
    double r_eff_dl1 = 0.0;
    double r_dlnb = 0.0;
    double r_eff_dlnb = 0.0;
    double r_star = 0.0;
    bool r_star_exact = false;
    int top1_hits = 0;
    int topnb_hits = 0;
    int scored_bs = 0; // BSs with a non-zero rate vector
    int shadowed_scored = 0; // scored BSs without a LOS path
    int shadowed_top1_hits = 0;
};

struct EvalSummary
{
    std::size_t n = 0;
    int n_tr = 0;
    int n_b = 0;
    double speed_mph = 0.0;
    double overhead_bl = 0.0;
    double overhead_dl = 0.0;
    double r_bl = 0.0; // genie proxy: disjoint selection, no overhead
    double r_eff_bl = 0.0;
    double r_dl1 = 0.0;
    double r_dlnb = 0.0;
    double r_eff_dl1 = 0.0;
    double r_eff_dlnb = 0.0;
    double r_star = 0.0;
    bool r_star_exact = true;
    double top1_acc = 0.0;
    double topnb_acc = 0.0;
    double shadowed_top1_acc = 0.0; // over (sample, BS) pairs without LOS
    std::size_t shadowed_pairs = 0;
};

std::vector<SampleEval> evaluate_samples(const ScenarioConfig& cfg, const Setup& setup, std::span<const Sample> test,
                                         const Predictor& predictor, std::size_t index_offset = 0);
EvalSummary summarize(const ScenarioConfig& cfg, const Setup& setup, std::span<const SampleEval> rows);

// Rescales per-sample rates to a different speed (only the timing term changes).
EvalSummary rescale_speed(const EvalSummary& s, std::span<const SampleEval> rows, double speed_mph,
                          const TimingModel& base);

void write_eval_samples_csv(std::span<const SampleEval> rows, const std::string& path);
void write_eval_summary_csv(const EvalSummary& s, const std::string& path);

// Commands. Each writes into `out_dir` and returns the paths written.
std::vector<std::string> cmd_generate(const ScenarioConfig& cfg, const std::string& out_dir);
std::vector<std::string> cmd_train(const ScenarioConfig& cfg, const std::string& dataset_path,
                                   const std::string& out_dir);
std::vector<std::string> cmd_evaluate(const ScenarioConfig& cfg, const std::string& dataset_path,
                                      const std::string& model_dir, const std::string& out_dir, bool oracle);
std::vector<std::string> cmd_sweep(const ScenarioConfig& cfg, const std::string& axis, const std::string& out_dir);
std::vector<std::string> cmd_ablate(const ScenarioConfig& cfg, const std::string& mode, const std::string& out_dir);

// Split point between training and held-out samples.
std::size_t train_count(const ScenarioConfig& cfg, std::size_t n);

// Process exit code for an exception.
int exit_code_for(const std::exception& e);

} // namespace cbf

#endif
