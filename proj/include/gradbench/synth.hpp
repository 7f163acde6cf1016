#pragma once

#include <Eigen/Dense>
#include <algorithm>
#include <cmath>
#include <cstdint>
#include <set>
#include <vector>

#include "gradbench/data.hpp"
#include "gradbench/matrix.hpp"
#include "gradbench/rng.hpp"

namespace gradbench {

// Synthetic regression table mirroring the shape of the Boston housing data
// (506 rows, 13 features): a few latent factors, wildly different raw column
// scales, nonzero offsets, and a handful of high-leverage, high-noise rows.
// The design matrix is rescaled so that alpha * lambda_max(2 X^T X / N) ==
// 0.5 at alpha = 5e-5, so the regression preset converges for every
// optimizer; the heteroscedastic rows make per-batch gradients at the
// optimum vary strongly between batches, the stochastic floor that
// heavy-ball momentum amplifies relative to plain or averaged descent.
inline Dataset synthetic_regression_dataset(std::uint64_t seed = 1) {
    constexpr std::size_t n = 506, d = 13, factors = 3, leverage_rows = 20;
    constexpr double alpha = 5e-5, target_alpha_lambda = 0.5;
    constexpr double noise_sd = 1.7, leverage_scale = 2.0, leverage_noise = 8.0;

    SeededRng rng = SeededRng(seed).substream("synthetic-regression");

    Eigen::MatrixXd base(n, factors);
    for (Eigen::Index i = 0; i < base.size(); ++i) base(i) = rng.normal();
    Eigen::MatrixXd mix(factors, d);
    for (Eigen::Index i = 0; i < mix.size(); ++i) mix(i) = rng.normal();
    Eigen::MatrixXd z = base * mix;
    for (Eigen::Index i = 0; i < z.rows(); ++i)
        for (Eigen::Index j = 0; j < z.cols(); ++j) z(i, j) += 0.8 * rng.normal();

    std::set<std::size_t> leverage;
    for (std::size_t k = 0; k < leverage_rows; ++k) {
        const std::size_t row = static_cast<std::size_t>(rng.below(n));
        z.row(static_cast<Eigen::Index>(row)) *= leverage_scale;
        leverage.insert(row);
    }

    for (Eigen::Index j = 0; j < z.cols(); ++j) {
        const double mean = z.col(j).mean();
        const double sd = std::sqrt((z.col(j).array() - mean).square().sum() / n);
        z.col(j) = (z.col(j).array() - mean) / sd;
    }

    Eigen::VectorXd scales(d), offsets(d), coeff(d);
    for (Eigen::Index j = 0; j < static_cast<Eigen::Index>(d); ++j)
        scales(j) = std::exp(rng.uniform(std::log(1.0), std::log(50.0)));
    for (Eigen::Index j = 0; j < static_cast<Eigen::Index>(d); ++j)
        offsets(j) = rng.uniform(0.5, 2.0) * scales(j);
    for (Eigen::Index j = 0; j < static_cast<Eigen::Index>(d); ++j) {
        const double c = rng.normal(0.0, 1.5);
        coeff(j) = scales(j) >= 8.0 ? c : 0.0;
    }

    Eigen::MatrixXd x = (z * scales.asDiagonal()).rowwise() + offsets.transpose();

    // scale the whole design so the top curvature lands exactly on target
    SymmetricMatrix gram(d);
    const Eigen::MatrixXd g = 2.0 * (x.transpose() * x) / static_cast<double>(n);
    for (std::size_t i = 0; i < d; ++i)
        for (std::size_t j = 0; j <= i; ++j) gram.set(i, j, g(static_cast<Eigen::Index>(i),
                                                              static_cast<Eigen::Index>(j)));
    const double lambda = spd_max_eigenvalue(gram, 1e-10);
    x *= std::sqrt(target_alpha_lambda / (alpha * lambda));

    // target representable through the features: y = Z c + const + noise
    const double intercept = (offsets.array() * coeff.array() / scales.array()).sum();
    Dataset ds;
    ds.name = "synthetic-regression";
    ds.features = x;
    ds.targets.resize(n);
    for (Eigen::Index i = 0; i < static_cast<Eigen::Index>(n); ++i) {
        const double sd = leverage.count(static_cast<std::size_t>(i)) != 0
                              ? noise_sd * leverage_noise
                              : noise_sd;
        ds.targets(i) = z.row(i).dot(coeff) + intercept + rng.normal(0.0, sd);
    }
    return ds;
}

// Synthetic 28x28 grayscale 10-class image set: each class is a fixed smooth
// multi-blob template; samples are randomly shifted, intensity-jittered, and
// pixel-noised renderings quantized to 8-bit. Class templates depend only on
// the seed, so separately generated train/test sets from the same seed share
// the same classes.
inline Dataset synthetic_image_dataset(std::uint64_t seed, std::size_t count,
                                       std::uint64_t variant = 0) {
    constexpr int side = 28;
    constexpr std::size_t classes = 10;

    SeededRng template_rng = SeededRng(seed).substream("image-templates");
    std::vector<Eigen::MatrixXd> templates;
    templates.reserve(classes);
    for (std::size_t c = 0; c < classes; ++c) {
        Eigen::MatrixXd f = Eigen::MatrixXd::Zero(side, side);
        for (int blob = 0; blob < 4; ++blob) {
            const double cx = template_rng.uniform(4.0, 24.0);
            const double cy = template_rng.uniform(4.0, 24.0);
            const double sx = template_rng.uniform(2.0, 6.0);
            const double sy = template_rng.uniform(2.0, 6.0);
            const double amp = template_rng.uniform(0.4, 1.0);
            for (int r = 0; r < side; ++r)
                for (int col = 0; col < side; ++col)
                    f(r, col) += amp * std::exp(-(col - cx) * (col - cx) / (2 * sx * sx) -
                                                (r - cy) * (r - cy) / (2 * sy * sy));
        }
        f /= f.maxCoeff();
        templates.push_back(std::move(f));
    }

    SeededRng rng = SeededRng(seed).substream("image-samples").substream(variant);
    Dataset ds;
    ds.name = "synthetic-images";
    ds.features.resize(static_cast<Eigen::Index>(count), side * side);
    ds.targets.resize(static_cast<Eigen::Index>(count));
    for (std::size_t i = 0; i < count; ++i) {
        const auto label = static_cast<std::size_t>(rng.below(classes));
        const double intensity = rng.uniform(0.6, 1.0);
        const int dr = static_cast<int>(rng.below(5)) - 2;
        const int dc = static_cast<int>(rng.below(5)) - 2;
        const Eigen::MatrixXd& t = templates[label];
        for (int r = 0; r < side; ++r) {
            for (int col = 0; col < side; ++col) {
                const int sr = ((r - dr) % side + side) % side;
                const int sc = ((col - dc) % side + side) % side;
                double v = intensity * t(sr, sc) + rng.normal(0.0, 0.30);
                v = std::clamp(v, 0.0, 1.0);
                // quantize to 8-bit so an IDX round trip is exact
                const auto byte = static_cast<unsigned char>(std::lround(v * 255.0));
                ds.features(static_cast<Eigen::Index>(i), r * side + col) = byte / 255.0;
            }
        }
        ds.targets(static_cast<Eigen::Index>(i)) = static_cast<double>(label);
    }
    return ds;
}

}  // namespace gradbench
