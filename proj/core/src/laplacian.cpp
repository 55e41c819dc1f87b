#include "quasispec/laplacian.hpp"

#include <cmath>
#include <memory>
#include <sstream>
#include <stdexcept>

namespace quasispec::laplacian {

namespace {

void check_mode_args(int n, double a) {
    if (n < 0) throw std::invalid_argument("mode index must be non-negative");
    if (!(a > 0.0)) throw std::invalid_argument("half-width a must be positive");
}

}  // namespace

double mode_wavenumber(int n, double a) {
    check_mode_args(n, a);
    return n * M_PI / (2.0 * a);
}

double mode(Kind kind, int n, double x, double a) {
    check_mode_args(n, a);
    const double root_a = std::sqrt(a);
    if (kind == Kind::dirichlet) {
        if (n == 0) return 0.0;
        return std::sin(mode_wavenumber(n, a) * (x + a)) / root_a;
    }
    if (n == 0) return 1.0 / std::sqrt(2.0 * a);
    return std::cos(mode_wavenumber(n, a) * (x + a)) / root_a;
}

double mode_derivative(Kind kind, int n, double x, double a) {
    check_mode_args(n, a);
    if (n == 0) return 0.0;
    const double k = mode_wavenumber(n, a);
    const double root_a = std::sqrt(a);
    if (kind == Kind::dirichlet) return k * std::cos(k * (x + a)) / root_a;
    return -k * std::sin(k * (x + a)) / root_a;
}

std::pair<double, double> momentum_identity_check(int n, double a, const QuadratureGrid& grid) {
    check_mode_args(n, a);
    const double k = mode_wavenumber(n, a);
    double r1 = 0.0, r2 = 0.0;
    for (std::size_t i = 0; i < grid.size(); ++i) {
        const double x = grid.nodes[i];
        const double d1 = mode_derivative(Kind::dirichlet, n, x, a) - k * mode(Kind::neumann, n, x, a);
        const double d2 = mode_derivative(Kind::neumann, n, x, a) + k * mode(Kind::dirichlet, n, x, a);
        r1 += grid.weights[i] * d1 * d1;
        r2 += grid.weights[i] * d2 * d2;
    }
    return {std::sqrt(r1), std::sqrt(r2)};
}

Complex green(Kind kind, Complex k, double x, double y, double a) {
    if (!(a > 0.0)) throw std::invalid_argument("half-width a must be positive");
    const Complex s2 = std::sin(2.0 * k * a);
    if (std::abs(s2) <= 1e-12) {
        const int n = std::max(0, static_cast<int>(std::lround(2.0 * a * k.real() / M_PI)));
        const double kn = mode_wavenumber(n, a);
        std::ostringstream msg;
        msg << "resolvent kernel evaluated too close to the spectral point k_n^2 = " << kn * kn
            << " (n = " << n << ")";
        throw std::runtime_error(msg.str());
    }
    const double lo = std::min(x, y), hi = std::max(x, y);
    if (kind == Kind::dirichlet)
        return -std::sin(k * (lo + a)) * std::sin(k * (hi - a)) / (k * s2);
    return -std::cos(k * (lo + a)) * std::cos(k * (hi - a)) / (k * s2);
}

double green_zero_dirichlet(double x, double y, double a) {
    if (!(a > 0.0)) throw std::invalid_argument("half-width a must be positive");
    const double lo = std::min(x, y), hi = std::max(x, y);
    return (lo + a) * (a - hi) / (2.0 * a);
}

double green_neumann_reduced(double x, double y, double a) {
    if (!(a > 0.0)) throw std::invalid_argument("half-width a must be positive");
    const double lo = std::min(x, y), hi = std::max(x, y);
    return (lo + a) * (lo + a) / (4.0 * a) + (hi - a) * (hi - a) / (4.0 * a) - a / 3.0;
}

KernelOperator j_operator(Kind kind, const CoefficientSequence& C, int N,
                          const QuadratureGrid& grid) {
    if (N < 1) throw std::invalid_argument("series truncation must be positive");
    if (!C.c_squared) throw std::invalid_argument("coefficient sequence has no closure");
    if (!(C.lower > 0.0) || !(C.upper >= C.lower))
        throw std::invalid_argument("coefficient bounds must satisfy 0 < lower <= upper");
    const int first = kind == Kind::dirichlet ? 1 : 0;
    std::vector<double> c2(static_cast<std::size_t>(N), 0.0);
    for (int n = first; n < N; ++n) {
        const double v = C.c_squared(n);
        if (!(v >= C.lower * C.lower) || !(v <= C.upper * C.upper)) {
            std::ostringstream msg;
            msg << "coefficient C_" << n << "^2 = " << v << " violates the stated bounds ["
                << C.lower * C.lower << ", " << C.upper * C.upper << "]";
            throw std::invalid_argument(msg.str());
        }
        c2[static_cast<std::size_t>(n)] = v;
    }

    const double a = grid.a;
    const auto rows = static_cast<Eigen::Index>(grid.size());
    Eigen::MatrixXd B(rows, N);
    for (Eigen::Index i = 0; i < rows; ++i)
        for (int n = 0; n < N; ++n)
            B(i, n) = mode(kind, n, grid.nodes[static_cast<std::size_t>(i)], a);
    const Eigen::Map<const Eigen::VectorXd> diag(c2.data(), N);
    Eigen::MatrixXd S = B * diag.asDiagonal() * B.transpose();

    auto M = std::make_shared<Eigen::MatrixXcd>(rows, rows);
    for (Eigen::Index i = 0; i < rows; ++i)
        for (Eigen::Index j = 0; j < rows; ++j)
            (*M)(i, j) = S(i, j) * grid.weights[static_cast<std::size_t>(j)];

    KernelOperator op;
    op.kernel = [kind, c2, a](double x, double y) {
        double acc = 0.0;
        for (std::size_t n = 0; n < c2.size(); ++n)
            if (c2[n] != 0.0) acc += c2[n] * mode(kind, static_cast<int>(n), x, a) *
                                      mode(kind, static_cast<int>(n), y, a);
        return Complex(acc, 0.0);
    };
    op.jump = numerics::JumpLocus::none;
    op.prebuilt = std::move(M);
    op.prebuilt_grid = std::make_shared<QuadratureGrid>(grid);
    return op;
}

}  // namespace quasispec::laplacian
