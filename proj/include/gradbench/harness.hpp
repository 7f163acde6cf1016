#pragma once

#include <Eigen/Dense>
#include <algorithm>
#include <chrono>
#include <cstdio>
#include <fstream>
#include <optional>
#include <string>
#include <vector>

#include "gradbench/data.hpp"
#include "gradbench/errors.hpp"
#include "gradbench/matrix.hpp"
#include "gradbench/nn.hpp"
#include "gradbench/objective.hpp"
#include "gradbench/optim.hpp"
#include "gradbench/param_vector.hpp"
#include "gradbench/rng.hpp"
#include "gradbench/testbed.hpp"

namespace gradbench {

struct ExperimentConfig {
    enum class Task { Regression, Classification, Quadratic, Saddle };

    Task task = Task::Regression;
    OptimizerKind optimizer = OptimizerKind::Sgd;
    double alpha = 0.01;
    double mu = 0.9;
    std::size_t batch_size = 0;  // 0 = full batch
    int epochs = 1;
    std::uint64_t seed = 0;
    InitStrategy::Kind init = InitStrategy::Kind::Normal;

    std::string data_path;        // regression CSV, or classification train images
    std::string labels_path;      // classification train labels
    std::string test_data_path;   // classification test images
    std::string test_labels_path; // classification test labels
    std::size_t target_column = SIZE_MAX;  // SIZE_MAX = last column
    std::size_t subset_train = 0;          // 0 = use everything
    std::size_t subset_test = 0;
    bool standardize_features = false;

    std::string out_path;  // per-epoch metrics CSV, empty = none

    std::size_t quadratic_dim = 10;          // quadratic task: Q = diag(1..dim)
    double saddle_x0 = 1e-3, saddle_y0 = 1e-3;

    // Hyperparameters used for the regression experiments: lr 5e-5,
    // momentum 0.9, batch 50, 200 epochs.
    static ExperimentConfig regression_preset() {
        ExperimentConfig cfg;
        cfg.task = Task::Regression;
        cfg.alpha = 5e-5;
        cfg.mu = 0.9;
        cfg.batch_size = 50;
        cfg.epochs = 200;
        return cfg;
    }

    // Hyperparameters used for the classification experiments: lr 0.01,
    // momentum 0.9, batch 128, 50 epochs.
    static ExperimentConfig classification_preset() {
        ExperimentConfig cfg;
        cfg.task = Task::Classification;
        cfg.alpha = 0.01;
        cfg.mu = 0.9;
        cfg.batch_size = 128;
        cfg.epochs = 50;
        return cfg;
    }
};

struct RunRecord {
    int epoch = 0;         // 1-based
    double train_loss = 0; // running mean over the epoch's batches
    double test_metric = 0;
};

enum class RunStatus { Ok, Diverged };

struct ExperimentResult {
    OptimizerKind optimizer = OptimizerKind::Sgd;
    std::vector<RunRecord> records;
    double initial_metric = 0.0;
    double final_test_metric = 0.0;
    RunStatus status = RunStatus::Ok;
    long diverged_epoch = -1;
    std::uint64_t grad_evals = 0;
    double wall_seconds = 0.0;

    std::string summary_line() const {
        char buf[256];
        std::snprintf(buf, sizeof buf,
                      "optimizer=%s final_test_metric=%.17g grad_evals=%llu status=%s",
                      to_string(optimizer).c_str(), final_test_metric,
                      static_cast<unsigned long long>(grad_evals),
                      status == RunStatus::Ok ? "ok" : "diverged");
        return buf;
    }
};

namespace detail {

class MetricsWriter {
public:
    explicit MetricsWriter(const std::string& path) {
        if (path.empty()) return;
        out_.emplace(path, std::ios::trunc);
        if (!*out_) throw io_error("cannot open metrics file " + path);
        *out_ << "epoch,train_loss,test_metric\n";
        out_->flush();
    }

    void append(const RunRecord& r) {
        if (!out_) return;
        char buf[96];
        std::snprintf(buf, sizeof buf, "%d,%.17g,%.17g\n", r.epoch, r.train_loss,
                      r.test_metric);
        *out_ << buf;
        out_->flush();
    }

private:
    std::optional<std::ofstream> out_;
};

inline Dataset subset_rows(const Dataset& ds, std::size_t count, SeededRng& rng) {
    if (count == 0 || count >= ds.size()) return ds;
    const std::vector<std::size_t> perm = rng.permutation(ds.size());
    Dataset out;
    out.name = ds.name;
    out.features.resize(static_cast<Eigen::Index>(count), ds.features.cols());
    out.targets.resize(static_cast<Eigen::Index>(count));
    for (std::size_t i = 0; i < count; ++i) {
        out.features.row(static_cast<Eigen::Index>(i)) =
            ds.features.row(static_cast<Eigen::Index>(perm[i]));
        out.targets(static_cast<Eigen::Index>(i)) =
            ds.targets(static_cast<Eigen::Index>(perm[i]));
    }
    return out;
}

// Shared epoch loop: per epoch, shuffle into batches, record the running
// mean of per-batch losses at the pre-step parameters, step, then evaluate
// the test metric. Divergence ends the run with a Diverged status instead
// of an exception so grids can continue.
template <typename MetricFn>
inline ExperimentResult train_loop(const ExperimentConfig& cfg, Objective& obj,
                                   ParamVector theta, MetricFn&& test_metric,
                                   MetricsWriter& metrics) {
    const auto t0 = std::chrono::steady_clock::now();
    ExperimentResult res;
    res.optimizer = cfg.optimizer;
    OptimizerState st = OptimizerState::make(cfg.optimizer, {cfg.alpha, cfg.mu}, obj.dim());
    SeededRng shuffle_rng = SeededRng(cfg.seed).substream("shuffle");

    const std::size_t n = obj.sample_count();
    std::vector<std::size_t> all(n);
    for (std::size_t i = 0; i < n; ++i) all[i] = i;
    if (n > 0) obj.set_batch(all);
    res.initial_metric = test_metric(theta);
    res.final_test_metric = res.initial_metric;

    for (int epoch = 1; epoch <= cfg.epochs; ++epoch) {
        std::vector<std::vector<std::size_t>> slices;
        if (n > 0 && cfg.batch_size > 0 && cfg.batch_size < n)
            slices = batches(n, cfg.batch_size, shuffle_rng);
        else
            slices.push_back(all);

        double running = 0.0;
        std::size_t done = 0;
        try {
            for (const auto& slice : slices) {
                if (n > 0) obj.set_batch(slice);
                running += obj.value(theta);
                theta = step(theta, obj, st);
                ++done;
            }
        } catch (const divergence_error&) {
            res.status = RunStatus::Diverged;
            res.diverged_epoch = epoch;
            break;
        } catch (const numeric_error&) {
            // non-finite loss at the pre-step evaluation: the run blew up
            res.status = RunStatus::Diverged;
            res.diverged_epoch = epoch;
            break;
        }
        if (n > 0) obj.set_batch(all);
        RunRecord rec;
        rec.epoch = epoch;
        rec.train_loss = running / static_cast<double>(std::max<std::size_t>(done, 1));
        rec.test_metric = test_metric(theta);
        if (!std::isfinite(rec.test_metric)) {
            res.status = RunStatus::Diverged;
            res.diverged_epoch = epoch;
            break;
        }
        res.records.push_back(rec);
        metrics.append(rec);
        res.final_test_metric = rec.test_metric;
    }
    res.grad_evals = st.grad_evals;
    res.wall_seconds = std::chrono::duration<double>(std::chrono::steady_clock::now() - t0).count();
    return res;
}

}  // namespace detail

// Trains per the config, streams per-epoch metrics to cfg.out_path, and
// returns the records plus a final summary. Bit-deterministic given the
// seed.
inline ExperimentResult run_experiment(const ExperimentConfig& cfg) {
    detail::MetricsWriter metrics(cfg.out_path);
    SeededRng seed_rng(cfg.seed);

    switch (cfg.task) {
        case ExperimentConfig::Task::Regression: {
            Dataset ds = load_csv(cfg.data_path, cfg.target_column, false);
            SplitDataset split = split_80_20(ds, cfg.seed);
            if (cfg.standardize_features) split = standardize(split);

            DenseNet net = init({split.train.dim(), 1}, Activation::Identity, Loss::Mse,
                                {cfg.init, cfg.seed});
            NetObjective obj(net, split.train.features, split.train.targets);
            Eigen::MatrixXd test_x = split.test.features;
            Eigen::MatrixXd test_y = split.test.targets;
            DenseNet probe = net;
            auto metric = [&](const ParamVector& theta) {
                probe.params = theta;
                return loss_and_grad(probe, test_x, test_y).first;  // test MSE
            };
            return detail::train_loop(cfg, obj, net.params, metric, metrics);
        }
        case ExperimentConfig::Task::Classification: {
            SeededRng subset_rng = seed_rng.substream("subset");
            Dataset train = load_idx(cfg.data_path, cfg.labels_path);
            Dataset test = load_idx(cfg.test_data_path, cfg.test_labels_path);
            train = detail::subset_rows(train, cfg.subset_train, subset_rng);
            test = detail::subset_rows(test, cfg.subset_test, subset_rng);

            DenseNet net = init({train.dim(), 128, 10}, Activation::Relu,
                                Loss::SoftmaxCrossEntropy, {cfg.init, cfg.seed});
            NetObjective obj(net, train.features, train.targets);
            DenseNet probe = net;
            auto metric = [&](const ParamVector& theta) {
                probe.params = theta;
                const Eigen::MatrixXd out = forward_batch(probe, test.features);
                std::size_t hits = 0;
                for (Eigen::Index i = 0; i < out.rows(); ++i) {
                    Eigen::Index best = 0;
                    out.row(i).maxCoeff(&best);
                    if (best == static_cast<Eigen::Index>(test.targets(i))) ++hits;
                }
                return static_cast<double>(hits) / static_cast<double>(out.rows());
            };
            return detail::train_loop(cfg, obj, net.params, metric, metrics);
        }
        case ExperimentConfig::Task::Quadratic: {
            std::vector<double> diag(cfg.quadratic_dim);
            for (std::size_t i = 0; i < diag.size(); ++i) diag[i] = static_cast<double>(i + 1);
            QuadraticForm obj(SymmetricMatrix::diagonal(diag));
            ParamVector theta0(cfg.quadratic_dim, 1.0);
            auto metric = [&](const ParamVector& theta) { return obj.value(theta); };
            return detail::train_loop(cfg, obj, theta0, metric, metrics);
        }
        case ExperimentConfig::Task::Saddle: {
            SaddleSurface obj;
            ParamVector theta0{cfg.saddle_x0, cfg.saddle_y0};
            auto metric = [&](const ParamVector& theta) { return std::abs(theta[1]); };
            return detail::train_loop(cfg, obj, theta0, metric, metrics);
        }
    }
    throw io_error("run_experiment: unknown task");
}

struct GridRow {
    OptimizerKind optimizer;
    double final_test_metric = 0.0;
    RunStatus status = RunStatus::Ok;
    std::string error;  // non-empty when the run failed outright
};

struct GridResult {
    std::vector<GridRow> rows;  // ordered by optimizer name
    std::optional<double> grad_avg_vs_sgd_gap;  // |GA - SGD| / SGD
};

// Runs each config and assembles one row per optimizer. Individual failures
// are recorded in their row; the grid continues.
inline GridResult run_grid(std::vector<ExperimentConfig> cfgs) {
    GridResult grid;
    for (const auto& cfg : cfgs) {
        GridRow row{cfg.optimizer};
        try {
            const ExperimentResult res = run_experiment(cfg);
            row.final_test_metric = res.final_test_metric;
            row.status = res.status;
        } catch (const std::exception& e) {
            row.error = e.what();
        }
        grid.rows.push_back(std::move(row));
    }
    std::sort(grid.rows.begin(), grid.rows.end(), [](const GridRow& a, const GridRow& b) {
        return to_string(a.optimizer) < to_string(b.optimizer);
    });
    const GridRow* ga = nullptr;
    const GridRow* sgd = nullptr;
    for (const auto& r : grid.rows) {
        if (r.optimizer == OptimizerKind::GradAvg && r.error.empty() &&
            r.status == RunStatus::Ok)
            ga = &r;
        if (r.optimizer == OptimizerKind::Sgd && r.error.empty() && r.status == RunStatus::Ok)
            sgd = &r;
    }
    if (ga && sgd && sgd->final_test_metric != 0.0)
        grid.grad_avg_vs_sgd_gap =
            std::abs(ga->final_test_metric - sgd->final_test_metric) /
            std::abs(sgd->final_test_metric);
    return grid;
}

}  // namespace gradbench
