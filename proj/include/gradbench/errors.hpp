#pragma once

#include <cstddef>
#include <stdexcept>
#include <string>

namespace gradbench {

// Shape/length disagreement between operands.
class dimension_error : public std::runtime_error {
public:
    explicit dimension_error(const std::string& what) : std::runtime_error(what) {}
};

// NaN/Inf produced or received, or an iterative routine failed to converge.
class numeric_error : public std::runtime_error {
public:
    explicit numeric_error(const std::string& what) : std::runtime_error(what) {}
};

// A training run produced a non-finite loss or gradient. Carries the
// epoch/batch coordinates of the offending step.
class divergence_error : public std::runtime_error {
public:
    divergence_error(const std::string& what, long epoch, long batch)
        : std::runtime_error(what + " (epoch " + std::to_string(epoch) +
                             ", batch " + std::to_string(batch) + ")"),
          epoch_(epoch),
          batch_(batch) {}

    long epoch() const noexcept { return epoch_; }
    long batch() const noexcept { return batch_; }

private:
    long epoch_;
    long batch_;
};

// File or format problem during dataset ingestion or metrics output.
class io_error : public std::runtime_error {
public:
    explicit io_error(const std::string& what) : std::runtime_error(what) {}
};

}  // namespace gradbench
