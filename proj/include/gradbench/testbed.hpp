#pragma once

#include <cmath>
#include <cstddef>
#include <limits>
#include <vector>

#include "gradbench/matrix.hpp"
#include "gradbench/objective.hpp"
#include "gradbench/optim.hpp"
#include "gradbench/param_vector.hpp"

namespace gradbench {

// f(x) = 0.5 x^T Q x, gradient Q x, Hessian Q.
class QuadraticForm : public Objective {
public:
    explicit QuadraticForm(SymmetricMatrix q) : q_(std::move(q)) {}

    std::size_t dim() const override { return q_.dim(); }
    double value(const ParamVector& x) const override { return 0.5 * dot(x, q_.apply(x)); }
    ParamVector gradient(const ParamVector& x) const override { return q_.apply(x); }

    const SymmetricMatrix& matrix() const { return q_; }
    double lipschitz(double tol = 1e-12) const { return spd_max_eigenvalue(q_, tol); }

private:
    SymmetricMatrix q_;
};

// f(x, y) = 0.5 (x^2 - y^2): a strict saddle at the origin with Hessian
// eigenvalues {1, -1}.
class SaddleSurface : public Objective {
public:
    std::size_t dim() const override { return 2; }
    double value(const ParamVector& p) const override {
        return 0.5 * (p[0] * p[0] - p[1] * p[1]);
    }
    ParamVector gradient(const ParamVector& p) const override { return {p[0], -p[1]}; }
};

// Standard Rosenbrock with a = 1, b = 100; global minimum 0 at (1, 1).
class Rosenbrock : public Objective {
public:
    std::size_t dim() const override { return 2; }

    double value(const ParamVector& p) const override {
        const double x = p[0], y = p[1];
        return (a_ - x) * (a_ - x) + b_ * (y - x * x) * (y - x * x);
    }

    ParamVector gradient(const ParamVector& p) const override {
        const double x = p[0], y = p[1];
        return {-2.0 * (a_ - x) - 4.0 * b_ * x * (y - x * x), 2.0 * b_ * (y - x * x)};
    }

    SymmetricMatrix hessian(const ParamVector& p) const {
        const double x = p[0], y = p[1];
        SymmetricMatrix h(2);
        h.set(0, 0, 2.0 - 4.0 * b_ * (y - x * x) + 8.0 * b_ * x * x);
        h.set(0, 1, -4.0 * b_ * x);
        h.set(1, 1, 2.0 * b_);
        return h;
    }

private:
    static constexpr double a_ = 1.0;
    static constexpr double b_ = 100.0;
};

// Exact GD iterate after t+1 steps on f(x) = 0.5 x^T Q x, i.e.
// (I - alpha Q)^(t+1) x0, computed by repeated application. For diagonal Q
// this matches the per-eigendirection sum of (1 - alpha*lambda_i)^(t+1)
// factors exactly.
inline ParamVector gd_closed_form(const SymmetricMatrix& q, const ParamVector& x0,
                                  double alpha, long t) {
    ParamVector x = x0;
    for (long k = 0; k <= t; ++k) x = axpy(-alpha, q.apply(x), x);
    return x;
}

// Exact averaged-gradient iterate on a quadratic: the step rule is the
// linear map I - alpha Q + (alpha^2/2) Q^2, applied t+1 times.
inline ParamVector grad_avg_closed_form(const SymmetricMatrix& q, const ParamVector& x0,
                                        double alpha, long t) {
    ParamVector x = x0;
    for (long k = 0; k <= t; ++k) {
        const ParamVector qx = q.apply(x);
        const ParamVector q2x = q.apply(qx);
        x = axpy(0.5 * alpha * alpha, q2x, axpy(-alpha, qx, x));
    }
    return x;
}

struct DescentViolation {
    long index;        // n where J(theta_{n+1}) > J(theta_n)
    double magnitude;  // J(theta_{n+1}) - J(theta_n)
};

struct DescentReport {
    double alpha = 0.0;
    std::vector<double> values;  // J(theta_0..theta_steps)
    std::vector<DescentViolation> violations;
    bool diverged = false;

    bool pass(double tol = 1e-12) const {
        if (diverged) return false;
        for (const auto& v : violations)
            if (v.magnitude > tol) return false;
        return true;
    }
};

// Runs full-batch averaged-gradient descent at the given alpha and records
// every index where the objective value increases. alpha_override exists for
// negative-control experiments; by default alpha = 1/(3L), the largest step
// with a monotone-descent guarantee for an L-smooth objective.
inline DescentReport descent_certificate(Objective& obj, double lipschitz,
                                         const ParamVector& theta0, long steps,
                                         double alpha_override = 0.0) {
    if (!(lipschitz > 0.0)) throw numeric_error("descent_certificate: L must be > 0");
    DescentReport report;
    report.alpha = alpha_override > 0.0 ? alpha_override : 1.0 / (3.0 * lipschitz);

    const Hyperparams h{report.alpha, 0.0};
    ParamVector theta = theta0;
    report.values.push_back(obj.value(theta));
    for (long n = 0; n < steps; ++n) {
        try {
            theta = grad_avg_step(theta, obj, h);
        } catch (const divergence_error&) {
            report.diverged = true;
            report.violations.push_back({n, std::numeric_limits<double>::infinity()});
            return report;
        }
        const double j = obj.value(theta);
        if (!std::isfinite(j)) {
            report.diverged = true;
            report.violations.push_back({n, std::numeric_limits<double>::infinity()});
            return report;
        }
        const double prev = report.values.back();
        if (j > prev) report.violations.push_back({n, j - prev});
        report.values.push_back(j);
    }
    return report;
}

// Lipschitz bound for the Rosenbrock gradient over [-2,2]^2: max Hessian
// spectral norm on a sampling grid, times a 1.1 safety factor.
inline double rosenbrock_lipschitz_bound(std::size_t grid_points = 41) {
    const Rosenbrock f;
    double worst = 0.0;
    for (std::size_t i = 0; i < grid_points; ++i) {
        for (std::size_t j = 0; j < grid_points; ++j) {
            const double x = -2.0 + 4.0 * static_cast<double>(i) / (grid_points - 1);
            const double y = -2.0 + 4.0 * static_cast<double>(j) / (grid_points - 1);
            worst = std::max(worst, spd_max_eigenvalue(f.hessian({x, y}), 1e-9));
        }
    }
    return 1.1 * worst;
}

}  // namespace gradbench
