#pragma once

#include <Eigen/Dense>
#include <algorithm>
#include <cctype>
#include <cmath>
#include <cstdint>
#include <cstdio>
#include <fstream>
#include <sstream>
#include <string>
#include <vector>

#include "gradbench/errors.hpp"
#include "gradbench/rng.hpp"

namespace gradbench {

// Immutable-after-load dataset: N samples by D features, one target per
// sample (a real for regression, a class index 0..9 stored as a real for
// classification).
struct Dataset {
    Eigen::MatrixXd features;
    Eigen::VectorXd targets;
    std::string name;

    std::size_t size() const { return static_cast<std::size_t>(features.rows()); }
    std::size_t dim() const { return static_cast<std::size_t>(features.cols()); }
};

struct SplitDataset {
    Dataset train;
    Dataset test;
    std::uint64_t seed = 0;
};

// Comma-separated file of reals; features are all columns except
// target_column, row order preserved. Parse failures report 1-based
// row/column coordinates.
inline Dataset load_csv(const std::string& path, std::size_t target_column,
                        bool has_header = false) {
    std::ifstream in(path);
    if (!in) throw io_error("load_csv: cannot open " + path);

    std::vector<std::vector<double>> rows;
    std::string line;
    std::size_t lineno = 0;
    while (std::getline(in, line)) {
        ++lineno;
        if (lineno == 1 && has_header) continue;
        if (line.empty() && in.eof()) break;
        std::vector<double> row;
        std::stringstream ss(line);
        std::string cell;
        std::size_t col = 0;
        while (std::getline(ss, cell, ',')) {
            ++col;
            try {
                std::size_t used = 0;
                const double v = std::stod(cell, &used);
                while (used < cell.size() && std::isspace(static_cast<unsigned char>(cell[used])))
                    ++used;
                if (used != cell.size()) throw std::invalid_argument(cell);
                row.push_back(v);
            } catch (const std::exception&) {
                throw io_error("load_csv: " + path + ": cannot parse cell at row " +
                               std::to_string(lineno) + ", column " + std::to_string(col) +
                               ": '" + cell + "'");
            }
        }
        if (!rows.empty() && row.size() != rows.front().size())
            throw io_error("load_csv: " + path + ": ragged row " + std::to_string(lineno) +
                           " has " + std::to_string(row.size()) + " cells, expected " +
                           std::to_string(rows.front().size()));
        rows.push_back(std::move(row));
    }
    if (rows.empty()) throw io_error("load_csv: " + path + ": no data rows");
    const std::size_t width = rows.front().size();
    if (target_column == SIZE_MAX) target_column = width - 1;
    if (target_column >= width)
        throw io_error("load_csv: target column " + std::to_string(target_column) +
                       " out of range (width " + std::to_string(width) + ")");
    if (width < 2) throw io_error("load_csv: need at least one feature column");

    Dataset ds;
    ds.name = path;
    ds.features.resize(static_cast<Eigen::Index>(rows.size()),
                       static_cast<Eigen::Index>(width - 1));
    ds.targets.resize(static_cast<Eigen::Index>(rows.size()));
    for (std::size_t i = 0; i < rows.size(); ++i) {
        std::size_t f = 0;
        for (std::size_t j = 0; j < width; ++j) {
            if (j == target_column)
                ds.targets(static_cast<Eigen::Index>(i)) = rows[i][j];
            else
                ds.features(static_cast<Eigen::Index>(i), static_cast<Eigen::Index>(f++)) =
                    rows[i][j];
        }
    }
    return ds;
}

inline void save_csv(const Dataset& ds, const std::string& path,
                     std::size_t target_column = SIZE_MAX) {
    std::ofstream out(path);
    if (!out) throw io_error("save_csv: cannot open " + path);
    const std::size_t width = ds.dim() + 1;
    const std::size_t tcol = target_column == SIZE_MAX ? width - 1 : target_column;
    char buf[32];
    for (std::size_t i = 0; i < ds.size(); ++i) {
        std::size_t f = 0;
        for (std::size_t j = 0; j < width; ++j) {
            const double v = j == tcol ? ds.targets(static_cast<Eigen::Index>(i))
                                       : ds.features(static_cast<Eigen::Index>(i),
                                                     static_cast<Eigen::Index>(f++));
            std::snprintf(buf, sizeof buf, "%.17g", v);
            out << buf << (j + 1 < width ? "," : "\n");
        }
    }
    if (!out) throw io_error("save_csv: write failed for " + path);
}

namespace detail {
inline std::uint32_t read_be32(std::istream& in, const std::string& path) {
    unsigned char b[4];
    if (!in.read(reinterpret_cast<char*>(b), 4))
        throw io_error("load_idx: " + path + ": truncated header");
    return (std::uint32_t(b[0]) << 24) | (std::uint32_t(b[1]) << 16) |
           (std::uint32_t(b[2]) << 8) | std::uint32_t(b[3]);
}
}  // namespace detail

// IDX image/label pair in the big-endian MNIST layout. Pixels are scaled to
// [0,1]; labels become targets.
inline Dataset load_idx(const std::string& images_path, const std::string& labels_path) {
    std::ifstream imgs(images_path, std::ios::binary);
    if (!imgs) throw io_error("load_idx: cannot open " + images_path);
    std::ifstream lbls(labels_path, std::ios::binary);
    if (!lbls) throw io_error("load_idx: cannot open " + labels_path);

    const std::uint32_t img_magic = detail::read_be32(imgs, images_path);
    if (img_magic != 0x00000803u)
        throw io_error("load_idx: " + images_path + ": bad image magic " +
                       std::to_string(img_magic));
    const std::uint32_t n_images = detail::read_be32(imgs, images_path);
    const std::uint32_t n_rows = detail::read_be32(imgs, images_path);
    const std::uint32_t n_cols = detail::read_be32(imgs, images_path);
    if (n_rows == 0 || n_cols == 0 || n_rows > 4096 || n_cols > 4096)
        throw io_error("load_idx: " + images_path + ": implausible image shape");

    const std::uint32_t lbl_magic = detail::read_be32(lbls, labels_path);
    if (lbl_magic != 0x00000801u)
        throw io_error("load_idx: " + labels_path + ": bad label magic " +
                       std::to_string(lbl_magic));
    const std::uint32_t n_labels = detail::read_be32(lbls, labels_path);
    if (n_labels != n_images)
        throw io_error("load_idx: count mismatch: " + std::to_string(n_images) + " images vs " +
                       std::to_string(n_labels) + " labels");
    if (n_images == 0) throw io_error("load_idx: " + images_path + ": zero images");

    const std::size_t pixels = std::size_t(n_rows) * n_cols;
    std::vector<unsigned char> buf(pixels);
    Dataset ds;
    ds.name = images_path;
    ds.features.resize(static_cast<Eigen::Index>(n_images), static_cast<Eigen::Index>(pixels));
    ds.targets.resize(static_cast<Eigen::Index>(n_images));
    for (std::uint32_t i = 0; i < n_images; ++i) {
        if (!imgs.read(reinterpret_cast<char*>(buf.data()), static_cast<std::streamsize>(pixels)))
            throw io_error("load_idx: " + images_path + ": truncated at image " +
                           std::to_string(i));
        for (std::size_t p = 0; p < pixels; ++p)
            ds.features(static_cast<Eigen::Index>(i), static_cast<Eigen::Index>(p)) =
                buf[p] / 255.0;
        char label = 0;
        if (!lbls.read(&label, 1))
            throw io_error("load_idx: " + labels_path + ": truncated at label " +
                           std::to_string(i));
        ds.targets(static_cast<Eigen::Index>(i)) = static_cast<unsigned char>(label);
    }
    return ds;
}

inline void write_idx(const Dataset& ds, const std::string& images_path,
                      const std::string& labels_path, std::uint32_t rows = 28,
                      std::uint32_t cols = 28) {
    if (ds.dim() != std::size_t(rows) * cols)
        throw dimension_error("write_idx: feature width != rows*cols");
    std::ofstream imgs(images_path, std::ios::binary);
    std::ofstream lbls(labels_path, std::ios::binary);
    if (!imgs || !lbls) throw io_error("write_idx: cannot open output files");

    auto be32 = [](std::ofstream& out, std::uint32_t v) {
        const unsigned char b[4] = {static_cast<unsigned char>(v >> 24),
                                    static_cast<unsigned char>(v >> 16),
                                    static_cast<unsigned char>(v >> 8),
                                    static_cast<unsigned char>(v)};
        out.write(reinterpret_cast<const char*>(b), 4);
    };
    const auto n = static_cast<std::uint32_t>(ds.size());
    be32(imgs, 0x00000803u);
    be32(imgs, n);
    be32(imgs, rows);
    be32(imgs, cols);
    be32(lbls, 0x00000801u);
    be32(lbls, n);
    for (std::size_t i = 0; i < ds.size(); ++i) {
        for (std::size_t p = 0; p < ds.dim(); ++p) {
            const double v = ds.features(static_cast<Eigen::Index>(i),
                                         static_cast<Eigen::Index>(p));
            const auto byte = static_cast<unsigned char>(
                std::lround(std::clamp(v, 0.0, 1.0) * 255.0));
            imgs.put(static_cast<char>(byte));
        }
        lbls.put(static_cast<char>(
            static_cast<unsigned char>(ds.targets(static_cast<Eigen::Index>(i)))));
    }
}

// Deterministic random 80/20 partition: the first round(0.8*N) rows of a
// seeded permutation become the training split.
inline SplitDataset split_80_20(const Dataset& ds, std::uint64_t seed) {
    const std::size_t n = ds.size();
    if (n < 2) throw dimension_error("split_80_20: need at least 2 rows");
    const auto n_train = static_cast<std::size_t>(std::llround(0.8 * static_cast<double>(n)));

    SeededRng rng = SeededRng(seed).substream("split");
    const std::vector<std::size_t> perm = rng.permutation(n);

    auto take = [&](std::size_t from, std::size_t count) {
        Dataset part;
        part.name = ds.name;
        part.features.resize(static_cast<Eigen::Index>(count), ds.features.cols());
        part.targets.resize(static_cast<Eigen::Index>(count));
        for (std::size_t i = 0; i < count; ++i) {
            part.features.row(static_cast<Eigen::Index>(i)) =
                ds.features.row(static_cast<Eigen::Index>(perm[from + i]));
            part.targets(static_cast<Eigen::Index>(i)) =
                ds.targets(static_cast<Eigen::Index>(perm[from + i]));
        }
        return part;
    };
    return {take(0, n_train), take(n_train, n - n_train), seed};
}

// Z-scores both splits with the training split's per-column mean and
// population standard deviation. Zero-variance columns get scale 1 (so a
// constant column maps to all zeros). Targets are untouched.
inline SplitDataset standardize(const SplitDataset& split) {
    const Eigen::Index d = split.train.features.cols();
    const auto n = static_cast<double>(split.train.features.rows());
    Eigen::VectorXd mean = split.train.features.colwise().mean();
    Eigen::VectorXd sd(d);
    for (Eigen::Index j = 0; j < d; ++j) {
        const double var =
            (split.train.features.col(j).array() - mean(j)).square().sum() / n;
        sd(j) = var > 0.0 ? std::sqrt(var) : 1.0;
    }
    SplitDataset out = split;
    for (Eigen::Index j = 0; j < d; ++j) {
        out.train.features.col(j) = (split.train.features.col(j).array() - mean(j)) / sd(j);
        out.test.features.col(j) = (split.test.features.col(j).array() - mean(j)) / sd(j);
    }
    return out;
}

// One epoch of minibatch index slices: a fresh permutation, cut into
// batch_size chunks with the final partial batch kept.
inline std::vector<std::vector<std::size_t>> batches(std::size_t n, std::size_t batch_size,
                                                     SeededRng& rng) {
    if (batch_size == 0) throw dimension_error("batches: batch_size must be >= 1");
    const std::vector<std::size_t> perm = rng.permutation(n);
    std::vector<std::vector<std::size_t>> out;
    for (std::size_t at = 0; at < n; at += batch_size) {
        const std::size_t len = std::min(batch_size, n - at);
        out.emplace_back(perm.begin() + static_cast<std::ptrdiff_t>(at),
                         perm.begin() + static_cast<std::ptrdiff_t>(at + len));
    }
    return out;
}

}  // namespace gradbench
