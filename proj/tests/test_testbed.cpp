#include <doctest.h>

#include <cmath>

#include "gradbench/optim.hpp"
#include "gradbench/rng.hpp"
#include "gradbench/testbed.hpp"

using namespace gradbench;

TEST_CASE("gd_closed_form hand cases") {
    const SymmetricMatrix q = SymmetricMatrix::diagonal({1.0, 2.0});
    const ParamVector r = gd_closed_form(q, {1.0, 1.0}, 0.1, 0);
    CHECK(r[0] == doctest::Approx(0.9).epsilon(1e-15));
    CHECK(r[1] == doctest::Approx(0.8).epsilon(1e-15));

    const ParamVector zero = gd_closed_form(q, {0.0, 0.0}, 0.1, 17);
    CHECK(zero == ParamVector{0.0, 0.0});

    const ParamVector annihilated =
        gd_closed_form(SymmetricMatrix::identity(3), {2.0, -1.0, 5.0}, 1.0, 0);
    CHECK(annihilated == ParamVector{0.0, 0.0, 0.0});
}

TEST_CASE("gd_closed_form matches the per-eigendirection factor sum on diagonal Q") {
    SeededRng rng(31);
    for (int rep = 0; rep < 20; ++rep) {
        const std::size_t dim = 1 + rng.below(10);
        std::vector<double> diag(dim);
        for (auto& d : diag) d = rng.uniform(0.1, 4.0);
        const SymmetricMatrix q = SymmetricMatrix::diagonal(diag);
        const double alpha = rng.uniform(0.01, 0.4);
        ParamVector x0(dim);
        for (std::size_t i = 0; i < dim; ++i) x0[i] = rng.normal();

        const long t = static_cast<long>(rng.below(40));
        const ParamVector got = gd_closed_form(q, x0, alpha, t);
        for (std::size_t i = 0; i < dim; ++i) {
            const double want = std::pow(1.0 - alpha * diag[i], t + 1) * x0[i];
            CHECK(got[i] == doctest::Approx(want).epsilon(1e-10));
        }
    }
}

TEST_CASE("grad_avg_closed_form hand cases") {
    const SymmetricMatrix q = SymmetricMatrix::diagonal({1.0, 2.0});
    const ParamVector r = grad_avg_closed_form(q, {1.0, 1.0}, 0.1, 0);
    CHECK(r[0] == doctest::Approx(0.905).epsilon(1e-15));
    CHECK(r[1] == doctest::Approx(0.82).epsilon(1e-15));

    CHECK(grad_avg_closed_form(q, {0.0, 0.0}, 0.1, 9) == ParamVector{0.0, 0.0});

    const SymmetricMatrix one = SymmetricMatrix::identity(1);
    const ParamVector s = grad_avg_closed_form(one, {1.0}, 1.0 / 3.0, 0);
    CHECK(s[0] == doctest::Approx(13.0 / 18.0).epsilon(1e-15));
}

TEST_CASE("descent_certificate on the scalar bowl") {
    QuadraticForm bowl(SymmetricMatrix::identity(1));
    const DescentReport r = descent_certificate(bowl, 1.0, {1.0}, 1);
    CHECK(r.alpha == doctest::Approx(1.0 / 3.0));
    REQUIRE(r.values.size() == 2);
    CHECK(r.values[0] == doctest::Approx(0.5));
    const double expected = 0.5 * (13.0 / 18.0) * (13.0 / 18.0);
    CHECK(r.values[1] == doctest::Approx(expected).epsilon(1e-14));
    CHECK(r.violations.empty());
    CHECK(r.pass());
}

TEST_CASE("descent_certificate at the minimum reports nothing") {
    QuadraticForm bowl(SymmetricMatrix::identity(2));
    const DescentReport r = descent_certificate(bowl, 1.0, {0.0, 0.0}, 100);
    CHECK(r.violations.empty());
    CHECK(r.values.front() == 0.0);
    CHECK(r.values.back() == 0.0);
}

TEST_CASE("descent_certificate diag(1,2) 1000 steps cross-checked against closed form") {
    const SymmetricMatrix q = SymmetricMatrix::diagonal({1.0, 2.0});
    QuadraticForm obj(q);
    const ParamVector x0{1.0, 1.0};
    const DescentReport r = descent_certificate(obj, 2.0, x0, 1000);
    CHECK(r.pass());
    REQUIRE(r.values.size() == 1001);
    for (long t = 1; t <= 1000; t += 97) {
        const ParamVector x = grad_avg_closed_form(q, x0, 1.0 / 6.0, t - 1);
        CHECK(r.values[static_cast<std::size_t>(t)] ==
              doctest::Approx(obj.value(x)).epsilon(1e-10));
    }
}

TEST_CASE("descent_certificate negative control: alpha = 10/L explodes") {
    QuadraticForm bowl(SymmetricMatrix::identity(1));  // L = 1, alpha*lambda = 10
    const DescentReport r = descent_certificate(bowl, 1.0, {1.0}, 100, 10.0);
    CHECK_FALSE(r.pass());
    CHECK_FALSE(r.violations.empty());
}

TEST_CASE("descent_certificate rejects non-positive L") {
    QuadraticForm bowl(SymmetricMatrix::identity(1));
    CHECK_THROWS_AS(descent_certificate(bowl, 0.0, {1.0}, 1), numeric_error);
}

TEST_CASE("rosenbrock basics") {
    Rosenbrock f;
    CHECK(f.value({1.0, 1.0}) == 0.0);
    const ParamVector g = f.gradient({1.0, 1.0});
    CHECK(g[0] == 0.0);
    CHECK(g[1] == 0.0);
    CHECK(f.value({0.0, 0.0}) == doctest::Approx(1.0));

    const double lipschitz = rosenbrock_lipschitz_bound();
    CHECK(lipschitz > 200.0);  // Hessian (1,1) entry alone is 200
}

TEST_CASE("rosenbrock descent certificate from (-1.2, 1)") {
    Rosenbrock f;
    const DescentReport r =
        descent_certificate(f, rosenbrock_lipschitz_bound(), {-1.2, 1.0}, 2000);
    CHECK(r.pass());
}

TEST_CASE("saddle surface: exact fixed point at the origin") {
    SaddleSurface f;
    ParamVector p{0.0, 0.0};
    for (int i = 0; i < 50; ++i) p = grad_avg_step(p, f, {0.01, 0.0});
    CHECK(p == ParamVector{0.0, 0.0});
}

TEST_CASE("saddle surface: perturbation escapes along the negative-curvature axis") {
    SaddleSurface f;
    ParamVector p{1e-3, 1e-3};
    double prev = std::abs(p[1]);
    for (int i = 0; i < 10000; ++i) {
        p = grad_avg_step(p, f, {0.01, 0.0});
        const double ay = std::abs(p[1]);
        CHECK(ay >= prev);
        prev = ay;
    }
    CHECK(prev > 1e-2);
    CHECK(std::abs(p[0]) < 1e-3);  // stable direction contracts
}
