#pragma once

#include <cstddef>
#include <cstdint>
#include <string>
#include <vector>

#include "gradbench/errors.hpp"
#include "gradbench/objective.hpp"
#include "gradbench/param_vector.hpp"
#include "gradbench/rng.hpp"

namespace gradbench {

struct Hyperparams {
    double alpha = 0.0;  // learning rate, > 0
    double mu = 0.0;     // momentum coefficient, in [0,1); ignored by sgd/gradavg

    void validate() const {
        if (!(alpha > 0.0)) throw numeric_error("Hyperparams: alpha must be > 0");
        if (!(mu >= 0.0 && mu < 1.0)) throw numeric_error("Hyperparams: mu must be in [0,1)");
    }
};

enum class OptimizerKind { GradAvg, Sgd, Momentum, Nag };

inline std::string to_string(OptimizerKind k) {
    switch (k) {
        case OptimizerKind::GradAvg: return "gradavg";
        case OptimizerKind::Sgd: return "sgd";
        case OptimizerKind::Momentum: return "momentum";
        case OptimizerKind::Nag: return "nag";
    }
    return "?";
}

inline OptimizerKind optimizer_from_string(const std::string& s) {
    if (s == "gradavg") return OptimizerKind::GradAvg;
    if (s == "sgd") return OptimizerKind::Sgd;
    if (s == "momentum") return OptimizerKind::Momentum;
    if (s == "nag") return OptimizerKind::Nag;
    throw io_error("unknown optimizer: " + s);
}

// Per-run mutable optimizer state. The velocity buffer exists only for the
// momentum-family kinds; it is the single piece of cross-step state.
struct OptimizerState {
    OptimizerKind kind = OptimizerKind::Sgd;
    Hyperparams hyper;
    ParamVector velocity;        // empty unless Momentum/Nag
    std::uint64_t grad_evals = 0;

    static OptimizerState make(OptimizerKind kind, Hyperparams h, std::size_t dim) {
        h.validate();
        OptimizerState st;
        st.kind = kind;
        st.hyper = h;
        if (kind == OptimizerKind::Momentum || kind == OptimizerKind::Nag)
            st.velocity = ParamVector(dim);
        return st;
    }
};

namespace detail {
inline ParamVector checked_gradient(const Objective& obj, const ParamVector& theta) {
    ParamVector g = obj.gradient(theta);
    if (g.size() != obj.dim())
        throw dimension_error("objective gradient length != dim");
    if (!g.finite()) throw divergence_error("non-finite gradient", -1, -1);
    return g;
}

inline void check_result(const ParamVector& theta) {
    if (!theta.finite()) throw divergence_error("non-finite parameters after step", -1, -1);
}

// Step arithmetic that overflows (axpy refuses non-finite results) means the
// iterate blew up: report it as divergence, not as a plain numeric error.
template <typename Fn>
inline ParamVector diverges_on_overflow(Fn&& fn) {
    try {
        ParamVector next = fn();
        check_result(next);
        return next;
    } catch (const numeric_error& e) {
        throw divergence_error(e.what(), -1, -1);
    }
}
}  // namespace detail

// Averaged-gradient (Heun-style) step: take the plain GD lookahead
// theta_bar = theta - alpha*g(theta), then move along the mean of the
// gradients at theta and theta_bar. Two gradient evaluations, both on the
// batch currently selected in obj. A zero gradient is an exact fixed point.
inline ParamVector grad_avg_step(const ParamVector& theta, Objective& obj,
                                 const Hyperparams& h, std::uint64_t* grad_evals = nullptr) {
    const ParamVector g1 = detail::checked_gradient(obj, theta);
    return detail::diverges_on_overflow([&] {
        const ParamVector lookahead = axpy(-h.alpha, g1, theta);
        const ParamVector g2 = detail::checked_gradient(obj, lookahead);
        if (grad_evals) *grad_evals += 2;
        return axpy(-0.5 * h.alpha, g1 + g2, theta);
    });
}

inline ParamVector sgd_step(const ParamVector& theta, Objective& obj, const Hyperparams& h,
                            std::uint64_t* grad_evals = nullptr) {
    const ParamVector g = detail::checked_gradient(obj, theta);
    if (grad_evals) *grad_evals += 1;
    return detail::diverges_on_overflow([&] { return axpy(-h.alpha, g, theta); });
}

// Classical heavy ball: v <- mu*v - alpha*g(theta); theta <- theta + v.
inline ParamVector momentum_step(const ParamVector& theta, Objective& obj,
                                 OptimizerState& st) {
    const ParamVector g = detail::checked_gradient(obj, theta);
    st.grad_evals += 1;
    return detail::diverges_on_overflow([&] {
        st.velocity = axpy(-st.hyper.alpha, g, st.hyper.mu * st.velocity);
        return theta + st.velocity;
    });
}

// Nesterov lookahead: v <- mu*v - alpha*g(theta + mu*v); theta <- theta + v.
inline ParamVector nag_step(const ParamVector& theta, Objective& obj, OptimizerState& st) {
    return detail::diverges_on_overflow([&] {
        const ParamVector look = axpy(st.hyper.mu, st.velocity, theta);
        const ParamVector g = detail::checked_gradient(obj, look);
        st.grad_evals += 1;
        st.velocity = axpy(-st.hyper.alpha, g, st.hyper.mu * st.velocity);
        return theta + st.velocity;
    });
}

inline ParamVector step(const ParamVector& theta, Objective& obj, OptimizerState& st) {
    switch (st.kind) {
        case OptimizerKind::GradAvg: return grad_avg_step(theta, obj, st.hyper, &st.grad_evals);
        case OptimizerKind::Sgd: return sgd_step(theta, obj, st.hyper, &st.grad_evals);
        case OptimizerKind::Momentum: return momentum_step(theta, obj, st);
        case OptimizerKind::Nag: return nag_step(theta, obj, st);
    }
    throw numeric_error("unknown optimizer kind");
}

// Mini-batch schedule for run_epochs. batch_size == 0 (or a non-stochastic
// objective) means one full-batch step per epoch. One fresh permutation is
// drawn per epoch; the final partial batch is kept.
struct BatchSchedule {
    std::size_t batch_size = 0;
    SeededRng rng{};
};

// Runs the state's step rule for `epochs` epochs and returns the per-epoch
// parameter snapshots, trajectory[0] being theta0. Bit-deterministic given
// the schedule's rng seed.
inline std::vector<ParamVector> run_epochs(const ParamVector& theta0, Objective& obj,
                                           OptimizerState& st, int epochs,
                                           BatchSchedule sched = {}) {
    if (epochs < 0) throw numeric_error("run_epochs: epochs must be >= 0");
    const std::size_t n = obj.sample_count();
    const bool minibatch = n > 0 && sched.batch_size > 0 && sched.batch_size < n;

    std::vector<ParamVector> trajectory;
    trajectory.reserve(static_cast<std::size_t>(epochs) + 1);
    trajectory.push_back(theta0);

    ParamVector theta = theta0;
    for (int e = 0; e < epochs; ++e) {
        if (minibatch) {
            const std::vector<std::size_t> perm = sched.rng.permutation(n);
            std::size_t b = 0;
            for (std::size_t at = 0; at < n; at += sched.batch_size, ++b) {
                const std::size_t len = std::min(sched.batch_size, n - at);
                obj.set_batch({perm.data() + at, len});
                try {
                    theta = step(theta, obj, st);
                } catch (const divergence_error& d) {
                    throw divergence_error(d.what(), e, static_cast<long>(b));
                }
            }
        } else {
            if (n > 0) {
                std::vector<std::size_t> all(n);
                for (std::size_t i = 0; i < n; ++i) all[i] = i;
                obj.set_batch(all);
            }
            try {
                theta = step(theta, obj, st);
            } catch (const divergence_error& d) {
                throw divergence_error(d.what(), e, 0);
            }
        }
        trajectory.push_back(theta);
    }
    return trajectory;
}

}  // namespace gradbench
