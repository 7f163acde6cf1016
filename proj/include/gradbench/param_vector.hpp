#pragma once

#include <cmath>
#include <cstddef>
#include <initializer_list>
#include <string>
#include <utility>
#include <vector>

#include "gradbench/errors.hpp"

namespace gradbench {

// Flat vector of 64-bit reals holding parameters or gradients. Length is
// fixed at construction; all algebra requires equal lengths. Non-finite
// entries are hard errors, never silently propagated.
class ParamVector {
public:
    ParamVector() = default;
    explicit ParamVector(std::size_t n, double fill = 0.0) : v_(n, fill) {}
    explicit ParamVector(std::vector<double> v) : v_(std::move(v)) {}
    ParamVector(std::initializer_list<double> v) : v_(v) {}

    std::size_t size() const noexcept { return v_.size(); }
    double operator[](std::size_t i) const { return v_[i]; }
    double& operator[](std::size_t i) { return v_[i]; }
    const std::vector<double>& values() const noexcept { return v_; }
    double* data() noexcept { return v_.data(); }
    const double* data() const noexcept { return v_.data(); }

    auto begin() const noexcept { return v_.begin(); }
    auto end() const noexcept { return v_.end(); }

    bool finite() const noexcept {
        for (double x : v_)
            if (!std::isfinite(x)) return false;
        return true;
    }

    bool operator==(const ParamVector& o) const { return v_ == o.v_; }

private:
    std::vector<double> v_;
};

inline void require_same_length(const ParamVector& x, const ParamVector& y,
                                const char* where) {
    if (x.size() != y.size())
        throw dimension_error(std::string(where) + ": length mismatch " +
                              std::to_string(x.size()) + " vs " + std::to_string(y.size()));
}

inline void require_finite(const ParamVector& x, const char* where) {
    if (!x.finite()) throw numeric_error(std::string(where) + ": non-finite entry");
}

// a*x + y, inputs untouched.
inline ParamVector axpy(double a, const ParamVector& x, const ParamVector& y) {
    require_same_length(x, y, "axpy");
    if (!std::isfinite(a)) throw numeric_error("axpy: non-finite scale");
    ParamVector r(x.size());
    for (std::size_t i = 0; i < x.size(); ++i) r[i] = a * x[i] + y[i];
    require_finite(r, "axpy");
    return r;
}

inline double dot(const ParamVector& x, const ParamVector& y) {
    require_same_length(x, y, "dot");
    double s = 0.0;
    for (std::size_t i = 0; i < x.size(); ++i) s += x[i] * y[i];
    return s;
}

// Euclidean norm.
inline double norm2(const ParamVector& x) {
    require_finite(x, "norm2");
    return std::sqrt(dot(x, x));
}

inline ParamVector operator+(const ParamVector& x, const ParamVector& y) {
    return axpy(1.0, x, y);
}

inline ParamVector operator-(const ParamVector& x, const ParamVector& y) {
    return axpy(-1.0, y, x);
}

inline ParamVector operator*(double a, const ParamVector& x) {
    ParamVector r(x.size());
    for (std::size_t i = 0; i < x.size(); ++i) r[i] = a * x[i];
    return r;
}

}  // namespace gradbench
