#pragma once

#include <cstddef>
#include <span>

#include "gradbench/param_vector.hpp"

namespace gradbench {

// Evaluate-and-differentiate contract. value() and gradient() must be pure
// given the parameters and the current batch selection. Deterministic
// objectives ignore set_batch.
class Objective {
public:
    virtual ~Objective() = default;

    virtual std::size_t dim() const = 0;
    virtual double value(const ParamVector& theta) const = 0;
    virtual ParamVector gradient(const ParamVector& theta) const = 0;

    // Number of samples for stochastic objectives; 0 means full-batch only.
    virtual std::size_t sample_count() const { return 0; }
    virtual void set_batch(std::span<const std::size_t> /*indices*/) {}
};

}  // namespace gradbench
