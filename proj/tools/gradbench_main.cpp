// Command-line workbench for the averaged-gradient optimizer and its
// baselines: analytic tasks, regression/classification experiments, grid
// comparisons, and the property-check suites.
//
// Exit codes: 0 success, 1 property failure, 2 divergence, 3 I/O or config
// error.

#include <CLI11.hpp>
#include <cstdio>
#include <exception>
#include <string>
#include <vector>

#include "gradbench/checks.hpp"
#include "gradbench/data.hpp"
#include "gradbench/harness.hpp"
#include "gradbench/synth.hpp"

namespace {

constexpr int kExitOk = 0;
constexpr int kExitPropertyFailure = 1;
constexpr int kExitDivergence = 2;
constexpr int kExitIoError = 3;

struct CommonFlags {
    std::string optimizer = "sgd";
    double lr = 0.01;
    double momentum = 0.9;
    std::size_t batch_size = 0;
    int epochs = 10;
    std::uint64_t seed = 0;
    std::string init = "normal";
    std::string data, labels, test_data, test_labels;
    long target_col = -1;
    std::size_t subset = 0, subset_test = 0;
    std::string out;
    std::string preset;
    bool standardize = false;
};

void add_common(CLI::App* cmd, CommonFlags& f, bool with_data) {
    cmd->add_option("--optimizer", f.optimizer, "gradavg|sgd|momentum|nag");
    cmd->add_option("--lr", f.lr, "learning rate");
    cmd->add_option("--momentum", f.momentum, "momentum coefficient (momentum/nag)");
    cmd->add_option("--batch-size", f.batch_size, "minibatch size, 0 = full batch");
    cmd->add_option("--epochs", f.epochs, "training epochs");
    cmd->add_option("--seed", f.seed, "run seed");
    cmd->add_option("--init", f.init, "normal|uniform");
    cmd->add_option("--out", f.out, "metrics CSV output path");
    cmd->add_option("--preset", f.preset, "regression|classification");
    if (with_data) {
        cmd->add_option("--data", f.data, "dataset path (CSV, or IDX train images)");
        cmd->add_option("--labels", f.labels, "IDX train labels path");
        cmd->add_option("--test-data", f.test_data, "IDX test images path");
        cmd->add_option("--test-labels", f.test_labels, "IDX test labels path");
        cmd->add_option("--target-col", f.target_col, "CSV target column, -1 = last");
        cmd->add_option("--subset", f.subset, "train subset size after seeded shuffle, 0 = all");
        cmd->add_option("--subset-test", f.subset_test, "test subset size, 0 = all");
        cmd->add_flag("--standardize", f.standardize,
                      "z-score features with training-split statistics");
    }
}

gradbench::ExperimentConfig to_config(const CommonFlags& f,
                                      gradbench::ExperimentConfig::Task task) {
    using gradbench::ExperimentConfig;
    ExperimentConfig cfg;
    if (f.preset == "regression")
        cfg = ExperimentConfig::regression_preset();
    else if (f.preset == "classification")
        cfg = ExperimentConfig::classification_preset();
    else if (!f.preset.empty())
        throw gradbench::io_error("unknown preset: " + f.preset);
    else {
        cfg.alpha = f.lr;
        cfg.mu = f.momentum;
        cfg.batch_size = f.batch_size;
        cfg.epochs = f.epochs;
    }
    cfg.task = task;
    cfg.optimizer = gradbench::optimizer_from_string(f.optimizer);
    cfg.seed = f.seed;
    cfg.init = gradbench::InitStrategy::from_string(f.init, f.seed).kind;
    cfg.data_path = f.data;
    cfg.labels_path = f.labels;
    cfg.test_data_path = f.test_data;
    cfg.test_labels_path = f.test_labels;
    cfg.target_column = f.target_col < 0 ? SIZE_MAX : static_cast<std::size_t>(f.target_col);
    cfg.subset_train = f.subset;
    cfg.subset_test = f.subset_test;
    cfg.standardize_features = f.standardize;
    cfg.out_path = f.out;
    return cfg;
}

int finish_run(const gradbench::ExperimentResult& res) {
    std::printf("%s\n", res.summary_line().c_str());
    return res.status == gradbench::RunStatus::Ok ? kExitOk : kExitDivergence;
}

}  // namespace

int main(int argc, char** argv) {
    CLI::App app{"gradbench: averaged-gradient optimizer workbench"};
    app.require_subcommand(1);

    CommonFlags quad_flags, saddle_flags, regress_flags, classify_flags, grid_flags;
    std::size_t quad_dim = 10;

    auto* quad = app.add_subcommand("quadratic", "full-batch run on Q = diag(1..dim)");
    add_common(quad, quad_flags, false);
    quad->add_option("--dim", quad_dim, "quadratic dimension");

    auto* saddle = app.add_subcommand("saddle", "run on the saddle surface 0.5(x^2 - y^2)");
    add_common(saddle, saddle_flags, false);

    auto* regress = app.add_subcommand("regress", "regression experiment on a CSV dataset");
    add_common(regress, regress_flags, true);

    auto* classify = app.add_subcommand("classify", "classification experiment on IDX data");
    add_common(classify, classify_flags, true);

    auto* grid = app.add_subcommand("grid", "all four optimizers on one task");
    add_common(grid, grid_flags, true);
    std::string grid_task = "regress";
    grid->add_option("--task", grid_task, "regress|classify|quadratic");

    auto* check = app.add_subcommand("check", "run a property suite");
    std::string suite = "all";
    double descent_alpha_scale = 1.0;
    std::uint64_t check_seed = 7;
    check->add_option("--suite", suite, "oracles|descent|sgd_closeness|gradcheck|saddle|all");
    check->add_option("--descent-alpha-scale", descent_alpha_scale,
                      "multiplier on 1/(3L); 30 is the negative control (alpha = 10/L)");
    check->add_option("--seed", check_seed, "suite seed");

    auto* synth = app.add_subcommand("synth", "generate a synthetic dataset fixture");
    std::string synth_kind = "regression";
    std::string synth_out = "synthetic.csv";
    std::string synth_labels_out = "labels.idx";
    std::size_t synth_n = 12000;
    std::uint64_t synth_seed = 1;
    std::uint64_t synth_variant = 0;
    synth->add_option("--kind", synth_kind, "regression|images");
    synth->add_option("--out", synth_out, "CSV path (regression) or IDX images path");
    synth->add_option("--labels-out", synth_labels_out, "IDX labels path (images)");
    synth->add_option("--n", synth_n, "sample count (images)");
    synth->add_option("--seed", synth_seed, "generator seed");
    synth->add_option("--variant", synth_variant,
                      "sample sub-stream; same seed + different variant shares class "
                      "templates but draws fresh samples (use 0 for train, 1 for test)");

    CLI11_PARSE(app, argc, argv);

    try {
        using Task = gradbench::ExperimentConfig::Task;
        if (quad->parsed()) {
            auto cfg = to_config(quad_flags, Task::Quadratic);
            cfg.quadratic_dim = quad_dim;
            return finish_run(gradbench::run_experiment(cfg));
        }
        if (saddle->parsed())
            return finish_run(gradbench::run_experiment(to_config(saddle_flags, Task::Saddle)));
        if (regress->parsed())
            return finish_run(
                gradbench::run_experiment(to_config(regress_flags, Task::Regression)));
        if (classify->parsed())
            return finish_run(
                gradbench::run_experiment(to_config(classify_flags, Task::Classification)));

        if (grid->parsed()) {
            Task task = Task::Regression;
            if (grid_task == "classify")
                task = Task::Classification;
            else if (grid_task == "quadratic")
                task = Task::Quadratic;
            else if (grid_task != "regress")
                throw gradbench::io_error("unknown grid task: " + grid_task);

            std::vector<gradbench::ExperimentConfig> cfgs;
            for (auto kind :
                 {gradbench::OptimizerKind::GradAvg, gradbench::OptimizerKind::Sgd,
                  gradbench::OptimizerKind::Momentum, gradbench::OptimizerKind::Nag}) {
                auto cfg = to_config(grid_flags, task);
                cfg.optimizer = kind;
                if (!cfg.out_path.empty())
                    cfg.out_path += "." + gradbench::to_string(kind) + ".csv";
                cfgs.push_back(cfg);
            }
            const gradbench::GridResult res = gradbench::run_grid(cfgs);
            for (const auto& row : res.rows) {
                if (!row.error.empty())
                    std::printf("%-10s error: %s\n", gradbench::to_string(row.optimizer).c_str(),
                                row.error.c_str());
                else
                    std::printf("%-10s final_test_metric=%.8g status=%s\n",
                                gradbench::to_string(row.optimizer).c_str(),
                                row.final_test_metric,
                                row.status == gradbench::RunStatus::Ok ? "ok" : "diverged");
            }
            if (res.grad_avg_vs_sgd_gap)
                std::printf("gradavg_vs_sgd_gap=%.8g\n", *res.grad_avg_vs_sgd_gap);
            return kExitOk;
        }

        if (check->parsed()) {
            gradbench::CheckOptions opt;
            opt.seed = check_seed;
            opt.descent_alpha_scale = descent_alpha_scale;
            const gradbench::CheckReport report = gradbench::run_checks(suite, opt);
            for (const auto& line : report.lines)
                std::printf("[%s] %s: worst=%.6g tol=%.6g\n", line.pass ? "PASS" : "FAIL",
                            line.name.c_str(), line.worst, line.tolerance);
            return report.pass() ? kExitOk : kExitPropertyFailure;
        }

        if (synth->parsed()) {
            if (synth_kind == "regression") {
                gradbench::save_csv(gradbench::synthetic_regression_dataset(synth_seed),
                                    synth_out);
                std::printf("wrote %s\n", synth_out.c_str());
            } else if (synth_kind == "images") {
                gradbench::write_idx(
                    gradbench::synthetic_image_dataset(synth_seed, synth_n, synth_variant),
                    synth_out, synth_labels_out);
                std::printf("wrote %s, %s\n", synth_out.c_str(), synth_labels_out.c_str());
            } else {
                throw gradbench::io_error("unknown synth kind: " + synth_kind);
            }
            return kExitOk;
        }
    } catch (const std::exception& e) {
        std::fprintf(stderr, "error: %s\n", e.what());
        return kExitIoError;
    }
    return kExitIoError;
}
