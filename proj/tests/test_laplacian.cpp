#include "doctest.h"

#include "quasispec/laplacian.hpp"
#include "quasispec/numerics.hpp"

#include <cmath>
#include <memory>

using namespace quasispec;
using laplacian::Kind;
using numerics::Complex;

TEST_CASE("mode families are orthonormal") {
    const double a = 1.3;
    const auto g = numerics::make_grid(a);
    for (Kind kind : {Kind::dirichlet, Kind::neumann}) {
        for (int m = 0; m <= 8; ++m) {
            for (int n = m; n <= 8; ++n) {
                double acc = 0.0;
                for (std::size_t i = 0; i < g.size(); ++i)
                    acc += g.weights[i] * laplacian::mode(kind, m, g.nodes[i], a) *
                           laplacian::mode(kind, n, g.nodes[i], a);
                double expected = m == n ? 1.0 : 0.0;
                if (kind == Kind::dirichlet && m == 0) expected = 0.0;  // absent mode
                CHECK(std::abs(acc - expected) < 1e-13);
            }
        }
    }
}

TEST_CASE("modes satisfy their boundary conditions") {
    const double a = M_PI / 2;
    for (int n = 1; n <= 6; ++n) {
        CHECK(std::abs(laplacian::mode(Kind::dirichlet, n, -a, a)) < 1e-12);
        CHECK(std::abs(laplacian::mode(Kind::dirichlet, n, a, a)) < 1e-12);
        CHECK(std::abs(laplacian::mode_derivative(Kind::neumann, n, -a, a)) < 1e-12);
        CHECK(std::abs(laplacian::mode_derivative(Kind::neumann, n, a, a)) < 1e-12);
    }
    CHECK(laplacian::mode(Kind::dirichlet, 0, 0.3, a) == 0.0);
    CHECK(std::abs(laplacian::mode(Kind::neumann, 0, 0.3, a) - 1.0 / std::sqrt(2.0 * a)) <
          1e-15);
}

TEST_CASE("momentum ladder identities hold to quadrature accuracy") {
    const double a = 1.0;
    const auto g = numerics::make_grid(a);
    for (int n : {0, 1, 5, 9}) {
        const auto [r1, r2] = laplacian::momentum_identity_check(n, a, g);
        CHECK(r1 <= 1e-12);
        CHECK(r2 <= 1e-12);
    }
}

TEST_CASE("resolvent kernels solve the inhomogeneous problem") {
    const double a = 1.3;
    const Complex k{0.7, 0.3};
    const auto g = numerics::make_grid(a);
    const auto f = [](double y) { return Complex(std::exp(0.4 * y) * std::cos(y), 0.0); };

    for (Kind kind : {Kind::dirichlet, Kind::neumann}) {
        const auto u = [&](double x) {
            return numerics::integrate(
                [&](double y) { return laplacian::green(kind, k, x, y, a) * f(y); }, g, {x});
        };
        // boundary conditions
        if (kind == Kind::dirichlet) {
            CHECK(std::abs(u(-a + 1e-13)) < 1e-10);
            CHECK(std::abs(u(a - 1e-13)) < 1e-10);
        } else {
            const double h = 1e-6;
            CHECK(std::abs(u(-a + h) - u(-a)) / h < 1e-4);
            CHECK(std::abs(u(a) - u(a - h)) / h < 1e-4);
        }
        // differential equation -u'' - k^2 u = f at interior points
        for (double x : {-0.62, 0.11, 0.57}) {
            const double h = 1e-4;
            const Complex upp = (u(x + h) - 2.0 * u(x) + u(x - h)) / (h * h);
            const Complex residual = -upp - k * k * u(x) - f(x);
            CHECK(std::abs(residual) < 1e-5);
        }
    }
}

TEST_CASE("resolvent kernel matches its zero-energy limits") {
    const double a = 1.0;
    for (double x : {-0.7, 0.2}) {
        for (double y : {-0.1, 0.8}) {
            const Complex gk = laplacian::green(Kind::dirichlet, Complex(1e-4, 0.0), x, y, a);
            CHECK(std::abs(gk.real() - laplacian::green_zero_dirichlet(x, y, a)) < 1e-6);
            // reduced kernel = limit of G_N^k + k^{-2} on the constant mode
            const double kk = 1e-3;
            const Complex gn = laplacian::green(Kind::neumann, Complex(kk, 0.0), x, y, a);
            const double reduced =
                gn.real() + laplacian::mode(Kind::neumann, 0, x, a) *
                                laplacian::mode(Kind::neumann, 0, y, a) / (kk * kk);
            CHECK(std::abs(reduced - laplacian::green_neumann_reduced(x, y, a)) < 1e-6);
        }
    }
}

TEST_CASE("resolvent evaluation near a spectral point is refused") {
    const double a = 1.1;
    const double k2 = laplacian::mode_wavenumber(2, a);
    CHECK_THROWS_WITH_AS(laplacian::green(Kind::dirichlet, Complex(k2, 0.0), 0.1, 0.2, a),
                         doctest::Contains("spectral point"), std::runtime_error);
}

TEST_CASE("diagonal operator acts as a projector on resolved modes") {
    const double a = 1.0;
    const auto g = std::make_shared<numerics::QuadratureGrid>(numerics::make_grid(a));
    laplacian::CoefficientSequence ones{[](int) { return 1.0; }, 0.5, 2.0};
    const auto J = laplacian::j_operator(Kind::dirichlet, ones, 60, *g);
    auto chi3 = numerics::sample(
        g, [a](double x) { return Complex(laplacian::mode(Kind::dirichlet, 3, x, a), 0.0); });
    auto out = numerics::apply_kernel(J, chi3);
    double max_err = 0.0;
    for (std::size_t i = 0; i < g->size(); ++i)
        max_err = std::max(max_err, std::abs(out.values[static_cast<Eigen::Index>(i)] -
                                             chi3.values[static_cast<Eigen::Index>(i)]));
    CHECK(max_err < 1e-10);
}

TEST_CASE("truncated diagonal operator matches its analytic partial sum") {
    // application to the constant Neumann mode, evaluated at x = 0.3 for a = 1
    const double a = 1.0, x0 = 0.3;
    auto partial = [a, x0](int terms) {
        double v = 0.0;
        for (int n = 1; n <= terms; ++n) {
            const double kn = laplacian::mode_wavenumber(n, a);
            v += (1.0 - std::pow(-1.0, n)) / kn / std::sqrt(2.0 * a) / a *
                 std::sin(kn * (x0 + a));
        }
        return v;
    };
    CHECK(std::abs(partial(500) - 0.708117223670) < 1e-10);

    const auto g = std::make_shared<numerics::QuadratureGrid>(numerics::make_grid(a));
    laplacian::CoefficientSequence ones{[](int) { return 1.0; }, 0.5, 2.0};
    const auto J = laplacian::j_operator(Kind::dirichlet, ones, 81, *g);
    auto chi0 = numerics::sample(
        g, [a](double x) { return Complex(laplacian::mode(Kind::neumann, 0, x, a), 0.0); });
    auto out = numerics::apply_kernel(J, chi0);
    CHECK(std::abs(out.evaluator(x0).real() - partial(80)) < 1e-9);
}

TEST_CASE("coefficient bounds are enforced") {
    const auto g = numerics::make_grid(1.0, 4, 6);
    laplacian::CoefficientSequence bad{[](int n) { return n == 3 ? 9.0 : 1.0; }, 0.5, 2.0};
    CHECK_THROWS_AS(laplacian::j_operator(Kind::neumann, bad, 10, g), std::invalid_argument);
}
