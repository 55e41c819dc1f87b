#include "quasispec/perturbation.hpp"

#include "quasispec/laplacian.hpp"

#include <algorithm>
#include <cmath>
#include <limits>
#include <numeric>
#include <stdexcept>
#include <vector>

namespace quasispec::perturbation {

namespace {

void check_half_width(double grid_a, double param_a) {
    if (std::abs(grid_a - param_a) > 1e-12 * (1.0 + std::abs(param_a))) {
        throw std::invalid_argument("quadrature grid half-width does not match the boundary data");
    }
}

/// Quadrature layout fine enough for products chi_m chi_n with m, n < M: the
/// fastest product oscillates like cos(2 k_M x), which M/2 panels of order 12
/// resolve to near machine precision.
QuadratureGrid refined_for(const QuadratureGrid& grid, int M) {
    const int panels = std::max(grid.n_panels, (M + 2) / 2);
    const int order = std::max(grid.order, 12);
    if (panels == grid.n_panels && order == grid.order) return grid;
    return numerics::make_grid(grid.a, panels, order);
}

}  // namespace

GalerkinSystem galerkin_matrix(const BoundaryParams& p, const Complex1D& V, int M,
                               const QuadratureGrid& grid) {
    if (M < 4) throw std::invalid_argument("Galerkin section needs dimension at least 4");
    check_half_width(grid.a, p.a);

    const double a = p.a;
    const double root_a = std::sqrt(a);
    const double root_2a = std::sqrt(2.0 * a);

    GalerkinSystem sys;
    sys.params = p;
    sys.dimension = M;
    sys.has_potential = static_cast<bool>(V);
    sys.matrix = Eigen::MatrixXcd::Zero(M, M);

    // Boundary values of the Neumann modes; the Robin boundary terms of the
    // quadratic form are rank-two corrections built from them.
    Eigen::VectorXd at_plus(M), at_minus(M);
    at_plus(0) = 1.0 / root_2a;
    at_minus(0) = 1.0 / root_2a;
    for (int n = 1; n < M; ++n) {
        at_plus(n) = (n % 2 == 0 ? 1.0 : -1.0) / root_a;
        at_minus(n) = 1.0 / root_a;
    }

    for (int n = 0; n < M; ++n) {
        const double kn = laplacian::mode_wavenumber(n, a);
        sys.matrix(n, n) = kn * kn;
    }
    sys.matrix += p.c_plus * (at_plus * at_plus.transpose()).cast<Complex>();
    sys.matrix -= p.c_minus * (at_minus * at_minus.transpose()).cast<Complex>();

    if (V) {
        const QuadratureGrid fine = refined_for(grid, M);
        const auto Q = static_cast<Eigen::Index>(fine.size());
        Eigen::MatrixXcd modes(Q, M);
        Eigen::VectorXcd weighted(Q);
        numerics::parallel_for(fine.size(), [&](std::size_t q) {
            const double x = fine.nodes[q];
            weighted(static_cast<Eigen::Index>(q)) = fine.weights[q] * V(x);
            for (int n = 0; n < M; ++n) {
                modes(static_cast<Eigen::Index>(q), n) =
                    laplacian::mode(laplacian::Kind::neumann, n, x, a);
            }
        });
        sys.matrix += modes.transpose() * weighted.asDiagonal() * modes;
    }

    Eigen::ComplexEigenSolver<Eigen::MatrixXcd> solver(sys.matrix);
    if (solver.info() != Eigen::Success) {
        throw std::runtime_error("Galerkin eigendecomposition failed to converge");
    }

    std::vector<int> order(static_cast<std::size_t>(M));
    std::iota(order.begin(), order.end(), 0);
    const auto& raw_values = solver.eigenvalues();
    std::sort(order.begin(), order.end(), [&](int i, int j) {
        if (raw_values(i).real() != raw_values(j).real())
            return raw_values(i).real() < raw_values(j).real();
        return raw_values(i).imag() < raw_values(j).imag();
    });

    sys.eigenvalues.resize(M);
    sys.right.resize(M, M);
    for (int n = 0; n < M; ++n) {
        sys.eigenvalues(n) = raw_values(order[static_cast<std::size_t>(n)]);
        sys.right.col(n) = solver.eigenvectors().col(order[static_cast<std::size_t>(n)]);
    }
    sys.left = sys.right.partialPivLu().inverse().adjoint();
    return sys;
}

Eigen::MatrixXcd omega_v(const GalerkinSystem& sys) {
    const auto M = sys.eigenvalues.size();
    if (M == 0) throw std::invalid_argument("empty Galerkin system");
    for (Eigen::Index i = 0; i < M; ++i) {
        for (Eigen::Index j = i + 1; j < M; ++j) {
            if (std::abs(sys.eigenvalues(i) - sys.eigenvalues(j)) <= 1e-9) {
                throw std::runtime_error(
                    "degenerate Galerkin system: eigenvalues closer than 1e-9, "
                    "the basis-mapping matrix is not defined");
            }
        }
    }

    Eigen::MatrixXcd omega = sys.right.partialPivLu().inverse();
    for (Eigen::Index i = 0; i < M; ++i) {
        const Complex d = omega(i, i);
        if (std::abs(d) < 1e-12) {
            throw std::runtime_error(
                "degenerate Galerkin system: a mapped eigenvector has no overlap "
                "with its own basis mode");
        }
        omega.row(i) /= d;
    }
    return omega;
}

OmegaTailReport omega_tail_report(const BoundaryParams& p, const Complex1D& V, int M,
                                  const QuadratureGrid& grid) {
    OmegaTailReport report;
    report.m_small = M;
    report.m_large = 2 * M;

    const auto hs_at = [&](int dim) {
        const GalerkinSystem sys = galerkin_matrix(p, V, dim, grid);
        const Eigen::MatrixXcd omega = omega_v(sys);
        return (omega - Eigen::MatrixXcd::Identity(dim, dim)).norm();
    };
    report.hs_small = hs_at(M);
    report.hs_large = hs_at(2 * M);
    report.relative_change = report.hs_small > 0.0
                                 ? std::abs(report.hs_large - report.hs_small) / report.hs_small
                                 : 0.0;
    return report;
}

std::vector<Complex> asymptotic_gap(const GalerkinSystem& sys) {
    if (sys.has_potential) {
        throw std::invalid_argument("eigenvalue gaps are asymptotic data of the bare "
                                    "Robin operator; build the system with V = 0");
    }
    std::vector<Complex> gaps;
    const int top = sys.dimension / 2;
    gaps.reserve(static_cast<std::size_t>(top) + 1);
    for (int n = 0; n <= top; ++n) {
        const double kn = laplacian::mode_wavenumber(n, sys.params.a);
        gaps.push_back(sys.eigenvalues(n) - kn * kn);
    }
    return gaps;
}

LiouvilleData liouville_transform(const CoefficientData& data, const BoundaryParams& p) {
    if (!data.rho || !data.drho || !data.ddrho) {
        throw std::invalid_argument("coefficient data needs rho with two derivatives");
    }
    if (!(data.bound >= 1.0)) {
        throw std::invalid_argument("positivity bound must be a constant C >= 1");
    }
    const double a = p.a;
    if (!(a > 0.0)) throw std::invalid_argument("half-width must be positive");

    const double lo = 1.0 / data.bound;
    const double hi = data.bound;
    const int checks = 2000;
    for (int i = 0; i <= checks; ++i) {
        const double x = -a + (2.0 * a * i) / checks;
        const double r = data.rho(x);
        if (!std::isfinite(r) || r < lo * (1.0 - 1e-9) || r > hi * (1.0 + 1e-9)) {
            throw std::invalid_argument("rho leaves [1/C, C] on the interval: the "
                                        "transform requires uniform positivity");
        }
    }

    std::vector<double> gl_nodes, gl_weights;
    numerics::gauss_legendre(24, gl_nodes, gl_weights);

    const auto rho = data.rho;
    numerics::Real1D f = [rho, gl_nodes, gl_weights](double x) {
        // int_0^x rho^{-1/2} over 16 equal panels; rho is smooth and uniformly
        // positive, so the composite rule is accurate to near machine level.
        const int panels = 16;
        const double width = x / panels;
        double total = 0.0;
        for (int pnl = 0; pnl < panels; ++pnl) {
            const double left = pnl * width;
            const double mid = left + 0.5 * width;
            const double half = 0.5 * width;
            for (std::size_t q = 0; q < gl_nodes.size(); ++q) {
                const double t = mid + half * gl_nodes[q];
                total += half * gl_weights[q] / std::sqrt(rho(t));
            }
        }
        return total;
    };

    LiouvilleData out;
    out.f = f;
    out.f_minus = f(-a);
    out.f_plus = f(a);
    out.c_tilde_minus = (p.c_minus - data.drho(-a) / 4.0) / std::sqrt(data.rho(-a));
    out.c_tilde_plus = (p.c_plus - data.drho(a) / 4.0) / std::sqrt(data.rho(a));

    const double y_lo = out.f_minus;
    const double y_hi = out.f_plus;
    out.f_inverse = [f, a, y_lo, y_hi](double y) {
        const double target = std::clamp(y, y_lo, y_hi);
        double x_lo = -a;
        double x_hi = a;
        for (int it = 0; it < 80 && x_hi - x_lo > 1e-15 * (1.0 + a); ++it) {
            const double mid = 0.5 * (x_lo + x_hi);
            if (f(mid) < target) {
                x_lo = mid;
            } else {
                x_hi = mid;
            }
        }
        return 0.5 * (x_lo + x_hi);
    };

    const auto drho = data.drho;
    const auto ddrho = data.ddrho;
    const auto inverse = out.f_inverse;
    out.potential = [rho, drho, ddrho, inverse](double y) {
        const double x = inverse(y);
        const double d1 = drho(x);
        return 0.25 * ddrho(x) - 0.0625 * d1 * d1 / rho(x);
    };
    return out;
}

}  // namespace quasispec::perturbation
