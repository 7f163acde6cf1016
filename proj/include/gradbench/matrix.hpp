#pragma once

#include <cmath>
#include <cstddef>
#include <string>
#include <vector>

#include "gradbench/errors.hpp"
#include "gradbench/param_vector.hpp"
#include "gradbench/rng.hpp"

namespace gradbench {

// Dense symmetric matrix; entries (i,j) and (j,i) are the same storage
// location, so symmetry holds exactly by construction.
class SymmetricMatrix {
public:
    explicit SymmetricMatrix(std::size_t dim) : dim_(dim), a_(dim * (dim + 1) / 2, 0.0) {
        if (dim == 0) throw dimension_error("SymmetricMatrix: dim must be positive");
    }

    static SymmetricMatrix diagonal(const std::vector<double>& d) {
        SymmetricMatrix m(d.size());
        for (std::size_t i = 0; i < d.size(); ++i) m.set(i, i, d[i]);
        return m;
    }

    static SymmetricMatrix identity(std::size_t dim) {
        SymmetricMatrix m(dim);
        for (std::size_t i = 0; i < dim; ++i) m.set(i, i, 1.0);
        return m;
    }

    std::size_t dim() const noexcept { return dim_; }

    double operator()(std::size_t i, std::size_t j) const { return a_[index(i, j)]; }

    void set(std::size_t i, std::size_t j, double v) { a_[index(i, j)] = v; }

    // Q * x
    ParamVector apply(const ParamVector& x) const {
        if (x.size() != dim_)
            throw dimension_error("SymmetricMatrix::apply: vector length " +
                                  std::to_string(x.size()) + " vs dim " + std::to_string(dim_));
        ParamVector r(dim_);
        for (std::size_t i = 0; i < dim_; ++i) {
            double s = 0.0;
            for (std::size_t j = 0; j < dim_; ++j) s += (*this)(i, j) * x[j];
            r[i] = s;
        }
        return r;
    }

private:
    std::size_t index(std::size_t i, std::size_t j) const {
        if (i >= dim_ || j >= dim_) throw dimension_error("SymmetricMatrix: index out of range");
        if (i < j) std::swap(i, j);
        return i * (i + 1) / 2 + j;
    }

    std::size_t dim_;
    std::vector<double> a_;  // lower triangle, row-major
};

// Largest |eigenvalue| of a symmetric matrix by power iteration with a
// deterministic seeded start. For f(x) = 0.5 x^T Q x this is the Lipschitz
// constant of the gradient.
inline double spd_max_eigenvalue(const SymmetricMatrix& q, double tol = 1e-12,
                                 std::size_t max_iter = 100000) {
    if (!(tol > 0.0)) throw numeric_error("spd_max_eigenvalue: tol must be > 0");
    SeededRng rng(0x51f0e9u);
    ParamVector v(q.dim());
    for (std::size_t i = 0; i < q.dim(); ++i) v[i] = rng.normal();
    double nv = norm2(v);
    v = (1.0 / nv) * v;

    double lambda = 0.0;
    for (std::size_t it = 0; it < max_iter; ++it) {
        ParamVector w = q.apply(v);
        const double nw = norm2(w);
        if (nw == 0.0) return 0.0;  // v in the null space and Q acts as zero on it
        v = (1.0 / nw) * w;
        if (it > 0 && std::abs(nw - lambda) <= tol * std::max(1.0, nw)) return nw;
        lambda = nw;
    }
    throw numeric_error("spd_max_eigenvalue: no convergence after " +
                        std::to_string(max_iter) + " iterations");
}

}  // namespace gradbench
