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

#ifndef CBF_LEARNING_HPP
#define CBF_LEARNING_HPP

#include "cbf/dataset.hpp"

#include <cstdint>
#include <optional>
#include <random>
#include <span>
#include <string>
#include <vector>

namespace cbf
{

enum class InputNorm
{
    PerDataset,
    PerSample,
    PerBaseStation,
    PerElement,
};

const char* to_string(InputNorm n);
InputNorm input_norm_from_string(const std::string& s);

struct NormalizationSpec
{
    InputNorm strategy = InputNorm::PerDataset;
    double delta_norm = 1.0; // per-dataset: max |r| over the fitting set
    bool rssi = false;       // magnitude inputs, width N * K_DL
};

// One feature row per sample: for each BS n and subcarrier k, (Re, Im) of
// r_{k,n}, or |r_{k,n}| in RSSI mode.
int feature_width(const DatasetShape& shape, bool rssi);

// Fits the normaliser on `samples` and returns the normalised inputs (one row per sample).
std::pair<Eigen::MatrixXd, NormalizationSpec> normalize_inputs(std::span<const Sample> samples, InputNorm strategy);

// Applies a fitted normaliser to new samples (held-out or prediction-time data).
Eigen::MatrixXd apply_normalization(const NormalizationSpec& spec, std::span<const Sample> samples);
Eigen::VectorXd apply_normalization(const NormalizationSpec& spec, const Sample& sample);

// R / max_p R. Throws AllZeroRates when the maximum is not positive.
std::vector<double> normalize_outputs(std::span<const double> rates);

struct DenseLayer
{
    Eigen::MatrixXd w; // out x in
    Eigen::VectorXd b;
};

// Fully connected regression network: ReLU + dropout hidden layers and a
// linear output layer with one unit per codeword.
class MLPModel
{
public:
    std::vector<DenseLayer> layers;
    double dropout_rate = 0.0;

    // hidden_layers x hidden_nodes ReLU layers between input and output.
    static MLPModel create(int input_width, int hidden_layers, int hidden_nodes, int output_width,
                           double dropout_rate, std::uint64_t seed);

    int input_width() const { return static_cast<int>(layers.front().w.cols()); }
    int output_width() const { return static_cast<int>(layers.back().w.rows()); }
    std::size_t num_parameters() const;
    bool finite() const;
};

// Dropout masks, one per hidden layer (already scaled by 1/keep).
using DropoutMasks = std::vector<Eigen::MatrixXd>;

Eigen::VectorXd forward(const MLPModel& model, const Eigen::VectorXd& x, bool train_mode, std::mt19937_64* rng = nullptr);

// Columns of `x` are samples. Output is N_tr x B.
Eigen::MatrixXd forward_batch(const MLPModel& model, const Eigen::MatrixXd& x);

// Sum over outputs of squared error.
double loss(std::span<const double> pred, std::span<const double> target);
double loss(const Eigen::VectorXd& pred, const Eigen::VectorXd& target);

struct Gradients
{
    std::vector<Eigen::MatrixXd> dw;
    std::vector<Eigen::VectorXd> db;
};

// Analytic gradient of the summed loss over the batch columns. Without masks
// dropout is disabled.
Gradients backward(const MLPModel& model, const Eigen::MatrixXd& x, const Eigen::MatrixXd& target,
                   const DropoutMasks* masks = nullptr, double* loss_out = nullptr);
Gradients backward(const MLPModel& model, const Eigen::VectorXd& x, const Eigen::VectorXd& target);

struct TrainConfig
{
    int batch_size = 100;
    int epochs = 50;
    double learning_rate = 1e-3;
    double beta1 = 0.9;
    double beta2 = 0.999;
    double epsilon = 1e-8;
    double val_fraction = 0.1;
    std::uint64_t seed = 1;
    int n_b = 4; // for the top-N_B accuracy column
};

struct EpochStats
{
    int epoch = 0;
    double train_loss = 0.0; // mean per-sample loss
    double val_loss = 0.0;
    double top1_acc = 0.0;
    double topnb_acc = 0.0;
};

struct History
{
    std::vector<EpochStats> epochs;
};

// Minibatch Adam on the summed loss (averaged per batch). Rows of `inputs`
// and `targets` are samples; `true_rates` (raw per-beam rates) drive the
// accuracy columns. Throws EmptyDataset, Divergence on a non-finite loss.
History fit(MLPModel& model, const Eigen::MatrixXd& inputs, const Eigen::MatrixXd& targets,
            const Eigen::MatrixXd& true_rates, const TrainConfig& cfg);

// Indices of the n_b largest scores, descending, ties by lowest index.
std::vector<int> top_indices(std::span<const double> scores, int n_b);
std::vector<int> predict_top(const MLPModel& model, const Eigen::VectorXd& x, int n_b);

struct DLResult
{
    std::vector<int> beams; // per BS, after refinement
    double rate = 0.0;      // coordinated rate with MRT baseband
    double effective_rate = 0.0;
};

// Refines each BS's top-n_b candidates with their true per-beam rates and
// discounts the coordinated rate by the (n_b + 1) T_p training overhead.
DLResult dl_select_and_rate(const std::vector<std::vector<int>>& candidates, const Sample& sample,
                            const Channels& fcs, const Codebook& cb, double snr, int n_b, const TimingModel& timing);

DLResult dl_select_and_rate(std::span<const MLPModel> models, const NormalizationSpec& norm, const Sample& sample,
                            const Channels& fcs, const Codebook& cb, double snr, int n_b, const TimingModel& timing);

enum class Phase
{
    Learning,
    Prediction,
};

// Prediction iff r_eff_dl > r_eff_bl.
Phase phase_switch(double r_eff_dl, double r_eff_bl);
inline double overall_rate(double r_eff_dl, double r_eff_bl) { return std::max(r_eff_dl, r_eff_bl); }

// Checkpoint: "CBFM", version, normalisation, layer dims, row-major float64 weights, CRC32.
struct Checkpoint
{
    MLPModel model;
    NormalizationSpec norm;
    bool output_norm = true;
};
void save_checkpoint(const Checkpoint& ck, const std::string& path);
Checkpoint load_checkpoint(const std::string& path);

void write_history_csv(const History& h, const std::string& path);

} // namespace cbf

#endif
