#pragma once

#include <algorithm>
#include <cmath>
#include <cstdio>
#include <limits>
#include <string>
#include <vector>

#include "gradbench/matrix.hpp"
#include "gradbench/nn.hpp"
#include "gradbench/optim.hpp"
#include "gradbench/param_vector.hpp"
#include "gradbench/rng.hpp"
#include "gradbench/testbed.hpp"

namespace gradbench {

struct CheckLine {
    std::string name;
    double worst = 0.0;   // measured worst-case value
    double tolerance = 0.0;
    bool pass = false;
};

struct CheckReport {
    std::vector<CheckLine> lines;

    bool pass() const {
        for (const auto& l : lines)
            if (!l.pass) return false;
        return true;
    }

    void add(std::string name, double worst, double tol, bool less_is_pass = true) {
        lines.push_back({std::move(name), worst, tol, less_is_pass ? worst <= tol : worst > tol});
    }
};

struct CheckOptions {
    std::uint64_t seed = 7;
    // Multiplier on the monotone-descent step 1/(3L). The default 1.0 is the
    // certified regime; setting e.g. 30 (alpha = 10/L) is a negative control
    // that must produce violations.
    double descent_alpha_scale = 1.0;
};

namespace detail {

inline SymmetricMatrix random_spd(std::size_t dim, SeededRng& rng, double lo = 0.1,
                                  double hi = 5.0) {
    // A^T A + shift, built from a random square factor
    std::vector<std::vector<double>> a(dim, std::vector<double>(dim));
    for (auto& row : a)
        for (auto& v : row) v = rng.normal();
    SymmetricMatrix q(dim);
    for (std::size_t i = 0; i < dim; ++i) {
        for (std::size_t j = 0; j <= i; ++j) {
            double s = 0.0;
            for (std::size_t k = 0; k < dim; ++k) s += a[k][i] * a[k][j];
            q.set(i, j, s / static_cast<double>(dim));
        }
    }
    const double shift = rng.uniform(lo, hi) * 0.01;
    for (std::size_t i = 0; i < dim; ++i) q.set(i, i, q(i, i) + shift);
    return q;
}

inline ParamVector random_vector(std::size_t dim, SeededRng& rng, double scale = 1.0) {
    ParamVector x(dim);
    for (std::size_t i = 0; i < dim; ++i) x[i] = rng.normal(0.0, scale);
    return x;
}

inline double max_rel_err(const ParamVector& got, const ParamVector& want) {
    double worst = 0.0;
    for (std::size_t i = 0; i < got.size(); ++i) {
        const double denom = std::max(std::abs(want[i]), 1e-30);
        worst = std::max(worst, std::abs(got[i] - want[i]) / denom);
    }
    return worst;
}

// Central finite differences: the independent oracle for backprop.
inline double fd_partial(const DenseNet& net, const Eigen::MatrixXd& x,
                         const Eigen::MatrixXd& y, std::size_t coord, double h) {
    DenseNet plus = net, minus = net;
    plus.params[coord] += h;
    minus.params[coord] -= h;
    return (loss_and_grad(plus, x, y).first - loss_and_grad(minus, x, y).first) / (2.0 * h);
}

// True when perturbing `coord` by +/-h changes any relu on/off mask relative
// to the unperturbed net. At such points the loss is not differentiable in
// that coordinate, so the finite-difference probe is not a valid oracle and
// the coordinate must be skipped. (Zero-initialized biases make exact-zero
// preactivations reachable, so this is not a measure-zero concern.)
inline bool relu_mask_flips(const DenseNet& net, const Eigen::MatrixXd& x, std::size_t coord,
                            double h) {
    if (net.activation != Activation::Relu || net.layers() < 2) return false;
    DenseNet plus = net, minus = net;
    plus.params[coord] += h;
    minus.params[coord] -= h;
    Eigen::MatrixXd hb = x, hp = x, hm = x;
    for (std::size_t l = 0; l + 1 < net.layers(); ++l) {
        const auto [wb, bb] = layer_view(net, l);
        const auto [wp, bp] = layer_view(plus, l);
        const auto [wm, bm] = layer_view(minus, l);
        hb = (hb * wb).rowwise() + bb.transpose();
        hp = (hp * wp).rowwise() + bp.transpose();
        hm = (hm * wm).rowwise() + bm.transpose();
        for (Eigen::Index i = 0; i < hb.size(); ++i) {
            const bool on = hb(i) > 0.0;
            if ((hp(i) > 0.0) != on || (hm(i) > 0.0) != on) return true;
        }
        hb = hb.cwiseMax(0.0);
        hp = hp.cwiseMax(0.0);
        hm = hm.cwiseMax(0.0);
    }
    return false;
}

}  // namespace detail

// Full-batch trajectories on random diagonal SPD quadratics vs the exact
// closed forms, for both plain GD and the averaged-gradient rule, plus the
// hand-derived scalar cases.
inline CheckReport check_oracles(const CheckOptions& opt = {}) {
    CheckReport report;
    SeededRng rng = SeededRng(opt.seed).substream("oracles");

    double worst_gd = 0.0, worst_ga = 0.0;
    for (int rep = 0; rep < 50; ++rep) {
        const std::size_t dim = 1 + rng.below(10);
        std::vector<double> diag(dim);
        for (auto& d : diag) d = rng.uniform(0.1, 5.0);
        SymmetricMatrix q = SymmetricMatrix::diagonal(diag);
        const double lipschitz = *std::max_element(diag.begin(), diag.end());
        const double alpha = 1.0 / (2.0 * lipschitz);
        const ParamVector x0 = detail::random_vector(dim, rng);

        QuadraticForm obj(q);
        for (auto kind : {OptimizerKind::Sgd, OptimizerKind::GradAvg}) {
            OptimizerState st = OptimizerState::make(kind, {alpha, 0.0}, dim);
            const auto traj = run_epochs(x0, obj, st, 100);
            for (std::size_t t = 1; t < traj.size(); ++t) {
                const ParamVector want =
                    kind == OptimizerKind::Sgd
                        ? gd_closed_form(q, x0, alpha, static_cast<long>(t) - 1)
                        : grad_avg_closed_form(q, x0, alpha, static_cast<long>(t) - 1);
                const double err = detail::max_rel_err(traj[t], want);
                (kind == OptimizerKind::Sgd ? worst_gd : worst_ga) =
                    std::max(kind == OptimizerKind::Sgd ? worst_gd : worst_ga, err);
            }
        }
    }
    report.add("gd-closed-form(50 random diagonal Q, 100 steps)", worst_gd, 1e-10);
    report.add("grad-avg-closed-form(50 random diagonal Q, 100 steps)", worst_ga, 1e-10);

    // scalar hand cases: J = theta^2/2
    {
        QuadraticForm scalar(SymmetricMatrix::identity(1));
        Hyperparams h1{0.1, 0.0};
        const ParamVector s1 = grad_avg_step(ParamVector{1.0}, scalar, h1);
        report.add("scalar grad-avg alpha=0.1 vs 0.905", std::abs(s1[0] - 0.905), 1e-15);
        Hyperparams h2{1.0 / 3.0, 0.0};
        const ParamVector s2 = grad_avg_step(ParamVector{1.0}, scalar, h2);
        report.add("scalar grad-avg alpha=1/3 vs 13/18", std::abs(s2[0] - 13.0 / 18.0), 1e-15);
    }
    return report;
}

// Monotone descent at alpha = 1/(3L) on random PSD quadratics and on
// Rosenbrock with a grid-estimated Lipschitz bound.
inline CheckReport check_descent(const CheckOptions& opt = {}) {
    CheckReport report;
    SeededRng rng = SeededRng(opt.seed).substream("descent");

    double worst = 0.0;
    bool any_diverged = false;
    for (int rep = 0; rep < 100; ++rep) {
        const std::size_t dim = 1 + rng.below(10);
        SymmetricMatrix q = detail::random_spd(dim, rng);
        QuadraticForm obj(q);
        const double lipschitz = spd_max_eigenvalue(q, 1e-12);
        const ParamVector x0 = detail::random_vector(dim, rng, 2.0);
        const double alpha = opt.descent_alpha_scale / (3.0 * lipschitz);
        const DescentReport r = descent_certificate(obj, lipschitz, x0, 1000, alpha);
        any_diverged = any_diverged || r.diverged;
        for (const auto& v : r.violations) worst = std::max(worst, v.magnitude);
    }
    report.add("quadratic descent violations(100 SPD x 1000 steps)",
               any_diverged ? std::numeric_limits<double>::infinity() : worst, 1e-12);

    if (opt.descent_alpha_scale == 1.0) {
        Rosenbrock rosen;
        const double lipschitz = rosenbrock_lipschitz_bound();
        const DescentReport r = descent_certificate(rosen, lipschitz, {-1.2, 1.0}, 1000);
        double rosen_worst = r.diverged ? std::numeric_limits<double>::infinity() : 0.0;
        for (const auto& v : r.violations) rosen_worst = std::max(rosen_worst, v.magnitude);
        report.add("rosenbrock descent violations(grid-estimated L)", rosen_worst, 1e-12);
    }
    return report;
}

// Per-step gap between the averaged-gradient and plain GD updates on random
// quadratics: bounded by (L^2 ||x|| / 2) alpha^2, with log-log slope 2 in
// alpha.
inline CheckReport check_sgd_closeness(const CheckOptions& opt = {}) {
    CheckReport report;
    SeededRng rng = SeededRng(opt.seed).substream("closeness");
    const std::vector<double> alphas = {1e-1, 1e-2, 1e-3, 1e-4};

    double worst_slope_err = 0.0, worst_bound_excess = 0.0;
    for (int rep = 0; rep < 20; ++rep) {
        const std::size_t dim = 1 + rng.below(10);
        SymmetricMatrix q = detail::random_spd(dim, rng);
        QuadraticForm obj(q);
        const double lipschitz = spd_max_eigenvalue(q, 1e-12);
        const ParamVector x = detail::random_vector(dim, rng);
        const double xn = norm2(x);

        std::vector<double> lg_alpha, lg_gap;
        for (double alpha : alphas) {
            const Hyperparams h{alpha, 0.0};
            const double gap = norm2(grad_avg_step(x, obj, h) - sgd_step(x, obj, h));
            const double bound = 0.5 * lipschitz * lipschitz * xn * alpha * alpha;
            // the gap is a difference of nearly equal O(||x||) vectors, so
            // allow absolute cancellation noise of a few ulps of that scale
            const double slack = 64.0 * 2.2e-16 * (1.0 + lipschitz) * (1.0 + xn);
            worst_bound_excess =
                std::max(worst_bound_excess, (gap - bound - slack) / std::max(bound, 1e-300));
            lg_alpha.push_back(std::log10(alpha));
            lg_gap.push_back(std::log10(std::max(gap, 1e-300)));
        }
        // least-squares slope
        double ma = 0, mg = 0;
        for (std::size_t i = 0; i < lg_alpha.size(); ++i) ma += lg_alpha[i], mg += lg_gap[i];
        ma /= lg_alpha.size();
        mg /= lg_gap.size();
        double num = 0, den = 0;
        for (std::size_t i = 0; i < lg_alpha.size(); ++i) {
            num += (lg_alpha[i] - ma) * (lg_gap[i] - mg);
            den += (lg_alpha[i] - ma) * (lg_alpha[i] - ma);
        }
        worst_slope_err = std::max(worst_slope_err, std::abs(num / den - 2.0));
    }
    report.add("order-2 gap relative bound excess(20 quadratics)", worst_bound_excess, 1e-9);
    report.add("log-log slope |error| vs 2.0(20 quadratics)", worst_slope_err, 0.05);
    return report;
}

// Backprop vs central finite differences on randomized nets, both losses.
inline CheckReport check_gradcheck(const CheckOptions& opt = {}) {
    CheckReport report;
    SeededRng rng = SeededRng(opt.seed).substream("gradcheck");
    const double h = 1e-6;

    double worst = 0.0;
    for (int rep = 0; rep < 6; ++rep) {
        const bool classify = rep % 2 == 1;
        const std::size_t depth = 1 + rng.below(3);
        std::vector<std::size_t> sizes{2 + rng.below(5)};
        for (std::size_t l = 1; l < depth; ++l) sizes.push_back(2 + rng.below(6));
        sizes.push_back(classify ? 3 + rng.below(3) : 1 + rng.below(2));

        DenseNet net = init(sizes, depth > 1 ? Activation::Relu : Activation::Identity,
                            classify ? Loss::SoftmaxCrossEntropy : Loss::Mse,
                            {InitStrategy::Kind::Normal, rng.next_u64()});
        const std::size_t batch = 3 + rng.below(4);
        Eigen::MatrixXd x(batch, sizes.front());
        for (Eigen::Index i = 0; i < x.size(); ++i) x(i) = rng.normal();
        Eigen::MatrixXd y;
        if (classify) {
            y.resize(static_cast<Eigen::Index>(batch), 1);
            for (Eigen::Index i = 0; i < y.rows(); ++i)
                y(i, 0) = static_cast<double>(rng.below(sizes.back()));
        } else {
            y.resize(static_cast<Eigen::Index>(batch),
                     static_cast<Eigen::Index>(sizes.back()));
            for (Eigen::Index i = 0; i < y.size(); ++i) y(i) = rng.normal();
        }

        const ParamVector grad = loss_and_grad(net, x, y).second;
        const std::size_t coords = std::min<std::size_t>(100, net.params.size());
        for (std::size_t k = 0; k < coords; ++k) {
            const std::size_t coord =
                coords == net.params.size() ? k : static_cast<std::size_t>(rng.below(net.params.size()));
            if (detail::relu_mask_flips(net, x, coord, h)) continue;
            const double fd = detail::fd_partial(net, x, y, coord, h);
            const double denom = std::max({std::abs(fd), std::abs(grad[coord]), 1e-8});
            worst = std::max(worst, std::abs(grad[coord] - fd) / denom);
        }
    }
    report.add("backprop vs central differences(1-3 layers, both losses)", worst, 1e-4);
    return report;
}

// Saddle behavior: the origin is an exact fixed point, and a tiny
// perturbation escapes monotonically along the negative-curvature direction.
inline CheckReport check_saddle(const CheckOptions& opt = {}) {
    (void)opt;
    CheckReport report;
    SaddleSurface obj;
    const Hyperparams h{0.01, 0.0};

    ParamVector origin{0.0, 0.0};
    double fixed_dev = 0.0;
    for (int i = 0; i < 100; ++i) {
        origin = grad_avg_step(origin, obj, h);
        fixed_dev = std::max(fixed_dev, std::max(std::abs(origin[0]), std::abs(origin[1])));
    }
    report.add("origin stays an exact fixed point(100 steps)", fixed_dev, 0.0);

    ParamVector p{1e-3, 1e-3};
    double prev_y = std::abs(p[1]);
    double worst_shrink = 0.0;
    for (int i = 0; i < 10000; ++i) {
        p = grad_avg_step(p, obj, h);
        const double ay = std::abs(p[1]);
        worst_shrink = std::max(worst_shrink, prev_y - ay);
        prev_y = ay;
    }
    report.add("escape coordinate monotone growth(1e4 steps)", worst_shrink, 0.0);
    report.add("escape magnitude grew by 10x", prev_y >= 1e-2 ? 0.0 : 1.0, 0.0);
    return report;
}

inline CheckReport run_checks(const std::string& suite, const CheckOptions& opt = {}) {
    if (suite == "oracles") return check_oracles(opt);
    if (suite == "descent") return check_descent(opt);
    if (suite == "sgd_closeness") return check_sgd_closeness(opt);
    if (suite == "gradcheck") return check_gradcheck(opt);
    if (suite == "saddle") return check_saddle(opt);
    if (suite == "all") {
        CheckReport all;
        for (const char* s : {"oracles", "descent", "sgd_closeness", "gradcheck", "saddle"}) {
            CheckReport r = run_checks(s, opt);
            for (auto& l : r.lines) all.lines.push_back(std::move(l));
        }
        return all;
    }
    throw io_error("unknown check suite: " + suite);
}

}  // namespace gradbench
