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

#include <doctest.h>

#include <filesystem>
#include <fstream>
#include <random>

using namespace cbf;

namespace
{

// Summed loss of a ReLU network evaluated in extended precision, independent of
// the library forward pass.
long double reference_loss(const MLPModel& m, const Eigen::MatrixXd& x, const Eigen::MatrixXd& t)
{
    long double total = 0.0L;
    for (Eigen::Index c = 0; c < x.cols(); ++c)
    {
        std::vector<long double> a(x.col(c).data(), x.col(c).data() + x.rows());
        for (std::size_t l = 0; l < m.layers.size(); ++l)
        {
            const auto& L = m.layers[l];
            std::vector<long double> z(static_cast<std::size_t>(L.w.rows()));
            for (Eigen::Index i = 0; i < L.w.rows(); ++i)
            {
                long double acc = L.b(i);
                for (Eigen::Index j = 0; j < L.w.cols(); ++j)
                    acc += static_cast<long double>(L.w(i, j)) * a[static_cast<std::size_t>(j)];
                z[static_cast<std::size_t>(i)] = (l + 1 < m.layers.size() && acc < 0) ? 0.0L : acc;
            }
            a = std::move(z);
        }
        for (Eigen::Index i = 0; i < t.rows(); ++i)
        {
            const long double e = a[static_cast<std::size_t>(i)] - t(i, c);
            total += e * e;
        }
    }
    return total;
}

// Central differences of the summed loss with respect to every parameter.
Gradients numeric_gradient(MLPModel model, const Eigen::MatrixXd& x, const Eigen::MatrixXd& t, double eps)
{
    auto total = [&] { return reference_loss(model, x, t); };
    auto diff = [&](double& param) {
        const double keep = param;
        param = keep + eps;
        const long double up = total();
        param = keep - eps;
        const long double down = total();
        param = keep;
        // use the perturbation actually representable in double
        return static_cast<double>((up - down) / (static_cast<long double>(keep + eps) - (keep - eps)));
    };
    Gradients g;
    for (auto& layer : model.layers)
    {
        Eigen::MatrixXd dw(layer.w.rows(), layer.w.cols());
        for (Eigen::Index i = 0; i < layer.w.size(); ++i)
            dw.data()[i] = diff(layer.w.data()[i]);
        Eigen::VectorXd db(layer.b.size());
        for (Eigen::Index i = 0; i < layer.b.size(); ++i)
            db(i) = diff(layer.b(i));
        g.dw.push_back(dw);
        g.db.push_back(db);
    }
    return g;
}

double max_relative_error(const Gradients& a, const Gradients& b)
{
    double worst = 0.0;
    auto cmp = [&](double x, double y) {
        const double scale = std::max({std::abs(x), std::abs(y), 1e-6});
        worst = std::max(worst, std::abs(x - y) / scale);
    };
    for (std::size_t l = 0; l < a.dw.size(); ++l)
    {
        for (Eigen::Index i = 0; i < a.dw[l].size(); ++i)
            cmp(a.dw[l].data()[i], b.dw[l].data()[i]);
        for (Eigen::Index i = 0; i < a.db[l].size(); ++i)
            cmp(a.db[l](i), b.db[l](i));
    }
    return worst;
}

Sample make_sample(int n_bs, int k_dl, int n_tr, std::mt19937_64& rng)
{
    std::normal_distribution<double> g;
    std::uniform_real_distribution<double> u(0.0, 3.0);
    Sample s;
    s.omni_rx = CMat(n_bs, k_dl);
    for (Eigen::Index i = 0; i < s.omni_rx.size(); ++i)
        s.omni_rx.data()[i] = {g(rng), g(rng)};
    s.beam_rates = Eigen::MatrixXd(n_bs, n_tr);
    for (Eigen::Index i = 0; i < s.beam_rates.size(); ++i)
        s.beam_rates.data()[i] = u(rng);
    s.rays.resize(static_cast<std::size_t>(n_bs));
    return s;
}

} // namespace

TEST_CASE("input norm names")
{
    for (auto n : {InputNorm::PerDataset, InputNorm::PerSample, InputNorm::PerBaseStation, InputNorm::PerElement})
        CHECK(input_norm_from_string(to_string(n)) == n);
    CHECK_THROWS(input_norm_from_string("global"));
}

TEST_CASE("loss examples")
{
    const std::vector<double> a{1, 2, 3, 4};
    const std::vector<double> b{2, 3, 4, 5};
    CHECK(loss(a, a) == 0.0);
    CHECK(loss(a, b) == 4.0);
    CHECK(loss(b, a) >= 0.0);
    CHECK_THROWS_AS(loss(a, std::vector<double>{1.0}), DimensionMismatch);
}

TEST_CASE("model creation")
{
    const MLPModel m = MLPModel::create(10, 3, 16, 5, 0.5, 1);
    CHECK(m.layers.size() == 4);
    CHECK(m.input_width() == 10);
    CHECK(m.output_width() == 5);
    CHECK(m.num_parameters() == 10 * 16 + 16 + 2 * (16 * 16 + 16) + 16 * 5 + 5);
    CHECK(m.finite());
    const double bound = std::sqrt(6.0 / 10.0);
    CHECK(m.layers[0].w.cwiseAbs().maxCoeff() <= bound);
    CHECK(m.layers[0].b.isZero());
    CHECK_THROWS(MLPModel::create(10, 3, 16, 5, 1.0, 1));
    CHECK_THROWS(MLPModel::create(10, 3, 16, 5, -0.1, 1));
    const MLPModel again = MLPModel::create(10, 3, 16, 5, 0.5, 1);
    CHECK(again.layers[2].w == m.layers[2].w);
}

TEST_CASE("eval-mode forward is pure and dropout is inverted")
{
    const MLPModel m = MLPModel::create(6, 2, 32, 3, 0.5, 3);
    Eigen::VectorXd x = Eigen::VectorXd::LinSpaced(6, -1.0, 1.0);
    CHECK(forward(m, x, false) == forward(m, x, false));
    Eigen::MatrixXd xb(6, 2);
    xb << x, x;
    const Eigen::MatrixXd ob = forward_batch(m, xb);
    CHECK(ob.col(0) == forward(m, x, false));
    CHECK(ob.col(1) == ob.col(0));

    CHECK_THROWS(forward(m, x, true));
    std::mt19937_64 rng(5);
    Eigen::VectorXd mean = Eigen::VectorXd::Zero(3);
    const int draws = 20000;
    for (int i = 0; i < draws; ++i)
        mean += forward(m, x, true, &rng);
    mean /= draws;
    // a single dropout layer after a linear map keeps the mean, so only check it stays close in scale
    CHECK((mean - forward(m, x, false)).norm() < 0.5 * forward(m, x, false).norm() + 0.5);

    const MLPModel lin = MLPModel::create(1, 1, 32, 1, 0.25, 9);
    Eigen::VectorXd one(1);
    one << 1.0;
    // mean hidden activation is preserved by the 1/keep scaling
    double acc = 0.0;
    for (int i = 0; i < draws; ++i)
        acc += forward(lin, one, true, &rng)(0);
    CHECK(acc / draws == doctest::Approx(forward(lin, one, false)(0)).epsilon(0.05).scale(0.05));
}

TEST_CASE("backward matches finite differences")
{
    std::mt19937_64 rng(17);
    std::uniform_int_distribution<int> width(2, 32), depth(1, 3);
    std::normal_distribution<double> g;
    for (int trial = 0; trial < 20; ++trial)
    {
        const int in = width(rng), out = width(rng), hidden = width(rng);
        MLPModel m = MLPModel::create(in, depth(rng), hidden, out, 0.0, rng());
        for (auto& l : m.layers)
            for (Eigen::Index i = 0; i < l.b.size(); ++i)
                l.b(i) = 0.1 * g(rng);
        Eigen::MatrixXd x(in, 3), t(out, 3);
        for (Eigen::Index i = 0; i < x.size(); ++i)
            x.data()[i] = g(rng);
        for (Eigen::Index i = 0; i < t.size(); ++i)
            t.data()[i] = g(rng);
        const Gradients analytic = backward(m, x, t);
        const Gradients numeric = numeric_gradient(m, x, t, 1e-5);
        const double err = max_relative_error(analytic, numeric);
        INFO("trial ", trial, " error ", err);
        CHECK(err < 1e-5);
    }
}

TEST_CASE("backward special cases")
{
    MLPModel m = MLPModel::create(4, 2, 8, 3, 0.0, 2);
    for (auto& l : m.layers)
    {
        l.w.setZero();
        l.b.setZero();
    }
    const Gradients z = backward(m, Eigen::VectorXd(Eigen::VectorXd::Zero(4)), Eigen::VectorXd(Eigen::VectorXd::Zero(3)));
    for (std::size_t l = 0; l < z.dw.size(); ++l)
    {
        CHECK(z.dw[l].isZero());
        CHECK(z.db[l].isZero());
    }

    const MLPModel r = MLPModel::create(4, 2, 8, 3, 0.0, 5);
    const Eigen::VectorXd x = Eigen::VectorXd::LinSpaced(4, 0.1, 0.9);
    const Eigen::VectorXd t = Eigen::VectorXd::Constant(3, 0.5);
    const Gradients one = backward(r, x, t);
    Eigen::MatrixXd x2(4, 2), t2(3, 2);
    x2 << x, x;
    t2 << t, t;
    const Gradients two = backward(r, x2, t2);
    for (std::size_t l = 0; l < one.dw.size(); ++l)
    {
        CHECK(two.dw[l].isApprox(2.0 * one.dw[l], 1e-14));
        CHECK(two.db[l].isApprox(2.0 * one.db[l], 1e-14));
    }
    CHECK_THROWS_AS(backward(r, x, Eigen::VectorXd(Eigen::VectorXd::Zero(2))), DimensionMismatch);
}

TEST_CASE("fit memorizes ten samples")
{
    std::mt19937_64 rng(23);
    std::uniform_real_distribution<double> u(-1.0, 1.0);
    Eigen::MatrixXd x(10, 6), t(10, 4);
    for (Eigen::Index i = 0; i < x.size(); ++i)
        x.data()[i] = u(rng);
    for (Eigen::Index i = 0; i < t.size(); ++i)
        t.data()[i] = 0.5 * (u(rng) + 1.0);
    MLPModel m = MLPModel::create(6, 2, 32, 4, 0.0, 4);
    TrainConfig cfg;
    cfg.batch_size = 10;
    cfg.epochs = 1000;
    cfg.learning_rate = 3e-4;
    cfg.val_fraction = 0.0;
    cfg.n_b = 2;
    const History h = fit(m, x, t, t, cfg);
    REQUIRE(h.epochs.size() == 1000);
    for (std::size_t e = 1; e < h.epochs.size(); ++e)
        CHECK(h.epochs[e].train_loss <= h.epochs[e - 1].train_loss);
    CHECK(h.epochs.back().train_loss < 1e-3);
    CHECK(h.epochs.back().top1_acc == 1.0);
}

TEST_CASE("fit is deterministic under a fixed seed")
{
    std::mt19937_64 rng(29);
    std::normal_distribution<double> g;
    Eigen::MatrixXd x(60, 8), t(60, 5);
    for (Eigen::Index i = 0; i < x.size(); ++i)
        x.data()[i] = g(rng);
    for (Eigen::Index i = 0; i < t.size(); ++i)
        t.data()[i] = std::abs(g(rng));
    TrainConfig cfg;
    cfg.batch_size = 16;
    cfg.epochs = 5;
    MLPModel a = MLPModel::create(8, 2, 16, 5, 0.3, 8);
    MLPModel b = MLPModel::create(8, 2, 16, 5, 0.3, 8);
    const History ha = fit(a, x, t, t, cfg);
    const History hb = fit(b, x, t, t, cfg);
    for (std::size_t l = 0; l < a.layers.size(); ++l)
    {
        CHECK(a.layers[l].w == b.layers[l].w);
        CHECK(a.layers[l].b == b.layers[l].b);
    }
    CHECK(ha.epochs.back().train_loss == hb.epochs.back().train_loss);

    CHECK_THROWS_AS(fit(a, Eigen::MatrixXd(0, 8), Eigen::MatrixXd(0, 5), Eigen::MatrixXd(0, 5), cfg), EmptyDataset);
    CHECK_THROWS_AS(fit(a, x, t.leftCols(4), t, cfg), DimensionMismatch);
}

TEST_CASE("fit separates a linearly separable toy task")
{
    std::mt19937_64 rng(31);
    std::uniform_real_distribution<double> u(-1.0, 1.0);
    const int n = 400;
    Eigen::MatrixXd x(n, 2), t(n, 3);
    for (int i = 0; i < n; ++i)
    {
        double a, b;
        int cls;
        do
        {
            a = u(rng);
            b = u(rng);
            cls = a > 0.15 ? 0 : (a < -0.15 ? (b > 0.15 ? 1 : (b < -0.15 ? 2 : -1)) : -1);
        } while (cls < 0);
        x.row(i) << a, b;
        t.row(i).setConstant(0.1);
        t(i, cls) = 1.0;
    }
    MLPModel m = MLPModel::create(2, 2, 16, 3, 0.0, 6);
    TrainConfig cfg;
    cfg.batch_size = 20;
    cfg.epochs = 200;
    cfg.learning_rate = 5e-3;
    cfg.val_fraction = 0.25;
    cfg.n_b = 1;
    const History h = fit(m, x, t, t, cfg);
    CHECK(h.epochs.back().top1_acc == 1.0);
}

TEST_CASE("top_indices")
{
    CHECK(top_indices(std::vector{0.1, 0.9, 0.3}, 2) == std::vector{1, 2});
    CHECK(top_indices(std::vector{0.1, 0.9, 0.3}, 1) == std::vector{1});
    CHECK(top_indices(std::vector{0.5, 0.2, 0.5, 0.5}, 2) == std::vector{0, 2});
    auto all = top_indices(std::vector{0.3, 0.1, 0.7, 0.2}, 4);
    CHECK(all == std::vector{2, 0, 3, 1});
    CHECK_THROWS(top_indices(std::vector{0.1, 0.2}, 0));
    CHECK_THROWS(top_indices(std::vector{0.1, 0.2}, 3));
    std::mt19937_64 rng(3);
    std::uniform_real_distribution<double> u;
    for (int t = 0; t < 50; ++t)
    {
        std::vector<double> s(20);
        for (auto& v : s)
            v = u(rng);
        CHECK(top_indices(s, 1).front() == baseline_select(s));
    }
}

TEST_CASE("output normalization")
{
    const auto r = normalize_outputs(std::vector{1.0, 4.0, 2.0});
    CHECK(r == std::vector{0.25, 1.0, 0.5});
    CHECK_THROWS_AS(normalize_outputs(std::vector{0.0, 0.0}), AllZeroRates);
    std::mt19937_64 rng(4);
    std::uniform_real_distribution<double> u(0.0, 5.0);
    for (int t = 0; t < 100; ++t)
    {
        std::vector<double> s(16);
        for (auto& v : s)
            v = u(rng);
        const auto n = normalize_outputs(s);
        CHECK(*std::max_element(n.begin(), n.end()) == 1.0);
        CHECK(top_indices(n, 4) == top_indices(s, 4));
    }
}

TEST_CASE("input normalization strategies")
{
    std::mt19937_64 rng(41);
    std::vector<Sample> samples;
    for (int i = 0; i < 20; ++i)
        samples.push_back(make_sample(3, 4, 5, rng));
    samples[7].omni_rx *= 50.0;
    DatasetShape shape{3, 4, 5, 8, 0};
    CHECK(feature_width(shape, false) == 24);
    CHECK(feature_width(shape, true) == 12);

    SUBCASE("per-dataset keeps ratios")
    {
        const auto [x, spec] = normalize_inputs(samples, InputNorm::PerDataset);
        CHECK(spec.strategy == InputNorm::PerDataset);
        double delta = 0.0;
        for (const auto& s : samples)
            delta = std::max(delta, s.omni_rx.cwiseAbs().maxCoeff());
        CHECK(spec.delta_norm == delta);
        REQUIRE(x.rows() == 20);
        REQUIRE(x.cols() == 24);
        CHECK(x(0, 0) == doctest::Approx(samples[0].omni_rx(0, 0).real() / delta));
        CHECK(x(0, 1) == doctest::Approx(samples[0].omni_rx(0, 0).imag() / delta));
        CHECK(x(3, 5) / x(9, 2) == doctest::Approx(samples[3].omni_rx(0, 2).imag() / samples[9].omni_rx(0, 1).real()));
        CHECK(x.cwiseAbs().maxCoeff() <= 1.0);
        CHECK(apply_normalization(spec, samples[4]) == x.row(4).transpose());
    }
    SUBCASE("per-sample")
    {
        const auto [x, spec] = normalize_inputs(samples, InputNorm::PerSample);
        for (Eigen::Index i = 0; i < x.rows(); ++i)
            CHECK(x.row(i).cwiseAbs().maxCoeff() <= 1.0 + 1e-15);
        // scale-free
        CHECK(x.row(7).isApprox(apply_normalization(spec, make_sample(3, 4, 5, rng)).transpose()) == false);
        Sample scaled = samples[2];
        scaled.omni_rx *= 9.0;
        CHECK(apply_normalization(spec, scaled).isApprox(x.row(2).transpose(), 1e-12));
    }
    SUBCASE("per-basestation")
    {
        const auto [x, spec] = normalize_inputs(samples, InputNorm::PerBaseStation);
        Sample scaled = samples[5];
        scaled.omni_rx.row(1) *= 20.0;
        CHECK(apply_normalization(spec, scaled).isApprox(x.row(5).transpose(), 1e-12));
    }
    SUBCASE("per-element")
    {
        const auto [x, spec] = normalize_inputs(samples, InputNorm::PerElement);
        for (Eigen::Index i = 0; i < x.rows(); ++i)
            for (Eigen::Index c = 0; c < x.cols(); c += 2)
                CHECK(std::hypot(x(i, c), x(i, c + 1)) == doctest::Approx(1.0));
    }
    SUBCASE("rssi")
    {
        std::vector<Sample> mags;
        for (const auto& s : samples)
            mags.push_back(to_rssi(s));
        const auto [x, spec] = normalize_inputs(mags, InputNorm::PerDataset);
        CHECK(spec.rssi);
        CHECK(x.cols() == 12);
        CHECK((x.array() >= 0.0).all());
        CHECK_THROWS_AS(apply_normalization(spec, samples[0]), DimensionMismatch);
    }
    SUBCASE("errors")
    {
        CHECK_THROWS_AS(normalize_inputs(std::vector<Sample>{}, InputNorm::PerDataset), EmptyDataset);
        std::vector<Sample> zeros{samples[0]};
        zeros[0].omni_rx.setZero();
        CHECK_THROWS_AS(normalize_inputs(zeros, InputNorm::PerDataset), AllZeroInputs);
        std::vector<Sample> mixed{samples[0], make_sample(3, 5, 5, rng)};
        CHECK_THROWS_AS(normalize_inputs(mixed, InputNorm::PerDataset), DimensionMismatch);
    }
}

TEST_CASE("dl_select_and_rate")
{
    std::mt19937_64 rng(51);
    const ArrayGeometry geom{4, 2, 0.5};
    const Codebook cb = beamsteering_codebook(geom, 1, 1);
    std::normal_distribution<double> g;
    Channels fcs;
    for (int b = 0; b < 2; ++b)
    {
        FreqChannel fc{CMat(8, 8)};
        for (Eigen::Index i = 0; i < fc.h.size(); ++i)
            fc.h.data()[i] = {g(rng), g(rng)};
        fcs.push_back(fc);
    }
    Sample s;
    s.omni_rx = CMat::Ones(2, 4);
    s.beam_rates = Eigen::MatrixXd(2, cb.size());
    s.rays.resize(2);
    std::vector<int> bl;
    const double snr = 2.0;
    for (int b = 0; b < 2; ++b)
    {
        const auto r = per_beam_rates(fcs[b], cb, snr);
        for (int p = 0; p < cb.size(); ++p)
            s.beam_rates(b, p) = r[p];
        bl.push_back(baseline_select(r));
    }
    const TimingModel timing{10e-6, 0.023};
    const double r_bl = coordinated_rate(fcs, cb, bl, snr);

    const DLResult perfect = dl_select_and_rate({{bl[0]}, {bl[1]}}, s, fcs, cb, snr, 1, timing);
    CHECK(perfect.beams == bl);
    CHECK(perfect.rate == r_bl);
    CHECK(perfect.effective_rate == doctest::Approx((1.0 - 2 * 10e-6 / 0.023) * r_bl).epsilon(1e-14));

    std::vector<int> all(static_cast<std::size_t>(cb.size()));
    std::iota(all.begin(), all.end(), 0);
    const DLResult full = dl_select_and_rate({all, all}, s, fcs, cb, snr, cb.size(), timing);
    CHECK(full.beams == bl);
    CHECK(full.effective_rate ==
          doctest::Approx((1.0 - (cb.size() + 1) * 10e-6 / 0.023) * r_bl).epsilon(1e-14));

    // refinement over a superset never lowers the per-BS beam quality
    const DLResult narrow = dl_select_and_rate({{3}, {5}}, s, fcs, cb, snr, 1, timing);
    const DLResult wide = dl_select_and_rate({{3, 0, 6}, {5, 1, 2}}, s, fcs, cb, snr, 3, timing);
    for (int b = 0; b < 2; ++b)
        CHECK(s.beam_rates(b, wide.beams[b]) >= s.beam_rates(b, narrow.beams[b]));

    CHECK_THROWS_AS(dl_select_and_rate({{0}}, s, fcs, cb, snr, 1, timing), DimensionMismatch);

    // untrained models: top-4 refinement is at least as good as top-1 in expectation
    std::vector<Sample> set;
    for (int i = 0; i < 5; ++i)
    {
        Sample t = s;
        for (Eigen::Index k = 0; k < t.omni_rx.size(); ++k)
            t.omni_rx.data()[k] = {g(rng), g(rng)};
        set.push_back(t);
    }
    const auto [x, spec] = normalize_inputs(set, InputNorm::PerDataset);
    double q1 = 0.0, q4 = 0.0;
    for (std::uint64_t seed = 0; seed < 40; ++seed)
    {
        const std::vector<MLPModel> models{MLPModel::create(16, 2, 16, cb.size(), 0.0, 2 * seed),
                                           MLPModel::create(16, 2, 16, cb.size(), 0.0, 2 * seed + 1)};
        for (const Sample& t : set)
        {
            q1 += dl_select_and_rate(models, spec, t, fcs, cb, snr, 1, timing).rate;
            q4 += dl_select_and_rate(models, spec, t, fcs, cb, snr, 4, timing).rate;
        }
    }
    CHECK(q4 >= q1);
}

TEST_CASE("phase switch")
{
    CHECK(phase_switch(2.0, 1.5) == Phase::Prediction);
    CHECK(phase_switch(1.5, 1.5) == Phase::Learning);
    CHECK(phase_switch(1.0, 1.5) == Phase::Learning);
    CHECK(overall_rate(2.0, 1.5) == 2.0);
    CHECK(overall_rate(1.0, 1.5) == 1.5);
}

TEST_CASE("checkpoint round trip")
{
    Checkpoint ck;
    ck.model = MLPModel::create(12, 2, 8, 6, 0.25, 77);
    ck.norm = {InputNorm::PerBaseStation, 0.125, true};
    ck.output_norm = false;
    const std::string path = (std::filesystem::temp_directory_path() / "cbf_test_model.cbfm").string();
    save_checkpoint(ck, path);
    const Checkpoint back = load_checkpoint(path);
    CHECK(back.norm.strategy == ck.norm.strategy);
    CHECK(back.norm.delta_norm == ck.norm.delta_norm);
    CHECK(back.norm.rssi);
    CHECK_FALSE(back.output_norm);
    CHECK(back.model.dropout_rate == 0.25);
    REQUIRE(back.model.layers.size() == ck.model.layers.size());
    for (std::size_t l = 0; l < ck.model.layers.size(); ++l)
    {
        CHECK(back.model.layers[l].w == ck.model.layers[l].w);
        CHECK(back.model.layers[l].b == ck.model.layers[l].b);
    }

    std::vector<char> bytes;
    {
        std::ifstream in(path, std::ios::binary);
        bytes.assign(std::istreambuf_iterator<char>(in), {});
    }
    auto rewrite = [&](const std::vector<char>& b) {
        std::ofstream out(path, std::ios::binary | std::ios::trunc);
        out.write(b.data(), static_cast<std::streamsize>(b.size()));
    };
    auto flipped = bytes;
    flipped[flipped.size() / 2] ^= 0x11;
    rewrite(flipped);
    CHECK_THROWS_AS(load_checkpoint(path), CorruptRecord);
    rewrite(std::vector<char>(bytes.begin(), bytes.begin() + 30));
    CHECK_THROWS_AS(load_checkpoint(path), CorruptRecord);
    auto magic = bytes;
    magic[0] = 'Z';
    rewrite(magic);
    CHECK_THROWS_AS(load_checkpoint(path), FormatVersionMismatch);
    std::filesystem::remove(path);
    CHECK_THROWS_AS(load_checkpoint(path), IoError);
}

TEST_CASE("history csv")
{
    History h;
    h.epochs.push_back({1, 0.5, 0.6, 0.25, 0.75});
    h.epochs.push_back({2, 0.4, 0.5, 0.5, 1.0});
    const std::string path = (std::filesystem::temp_directory_path() / "cbf_test_history.csv").string();
    write_history_csv(h, path);
    std::ifstream in(path);
    std::string line;
    std::getline(in, line);
    CHECK(line == "epoch,train_loss,val_loss,top1_acc,topNB_acc");
    int rows = 0;
    while (std::getline(in, line))
        ++rows;
    CHECK(rows == 2);
    std::filesystem::remove(path);
}
