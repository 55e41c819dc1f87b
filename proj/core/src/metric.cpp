#include "quasispec/metric.hpp"

#include <cmath>
#include <memory>
#include <stdexcept>
#include <utility>

namespace quasispec::metric {

namespace {

using numerics::JumpLocus;

double sign_of(double v) { return v > 0.0 ? 1.0 : (v < 0.0 ? -1.0 : 0.0); }

void check_half_width(double a) {
    if (!(a > 0.0)) throw std::invalid_argument("half-width a must be positive");
}

void check_cchoice_domain(double alpha, double a) {
    check_half_width(a);
    const double k1 = M_PI / (2.0 * a);
    if (!(alpha > 0.0) || !(alpha < k1))
        throw std::invalid_argument(
            "the explicit coefficient choice requires alpha in (0, k_1): tan(alpha a) has a "
            "pole at alpha a = pi/2");
}

bool near_neumann_wavenumber(double alpha, double a) {
    const int n = static_cast<int>(std::lround(2.0 * a * alpha / M_PI));
    if (n < 1) return false;
    const double kn = laplacian::mode_wavenumber(n, a);
    return std::abs(alpha - kn) < 1e-10 * (1.0 + kn);
}

std::vector<double> checked_coefficients(const laplacian::CoefficientSequence& C, int N) {
    if (N < 1) throw std::invalid_argument("series truncation must be positive");
    if (!C.c_squared) throw std::invalid_argument("coefficient sequence has no closure");
    if (!(C.lower > 0.0) || !(C.upper >= C.lower))
        throw std::invalid_argument("coefficient bounds must satisfy 0 < lower <= upper");
    std::vector<double> c2(static_cast<std::size_t>(N), 0.0);
    for (int n = 0; n < N; ++n) {
        const double v = C.c_squared(n);
        if (!(v >= C.lower * C.lower) || !(v <= C.upper * C.upper)) {
            throw std::invalid_argument("coefficient C_" + std::to_string(n) + "^2 = " +
                                        std::to_string(v) + " violates the stated bounds");
        }
        c2[static_cast<std::size_t>(n)] = v;
    }
    return c2;
}

/// Rank-N kernel sum c2_n phi_n(x) conj(phi_n(y)) - chi_n(x) chi_n(y), with a
/// prebuilt Nystrom matrix on the supplied grid.
MetricSpec build_series(std::vector<numerics::Complex1D> phis, std::vector<double> c2,
                        const QuadratureGrid& grid) {
    const auto rows = static_cast<Eigen::Index>(grid.size());
    const int N = static_cast<int>(phis.size());
    const double a = grid.a;

    Eigen::MatrixXcd Phi(rows, N);
    Eigen::MatrixXd Chi(rows, N);
    for (Eigen::Index i = 0; i < rows; ++i) {
        const double x = grid.nodes[static_cast<std::size_t>(i)];
        for (int n = 0; n < N; ++n) {
            Phi(i, n) = phis[static_cast<std::size_t>(n)](x);
            Chi(i, n) = laplacian::mode(laplacian::Kind::neumann, n, x, a);
        }
    }
    const Eigen::Map<const Eigen::VectorXd> diag(c2.data(), N);
    Eigen::MatrixXcd V = Phi * diag.asDiagonal() * Phi.adjoint();
    V -= (Chi * Chi.transpose()).cast<Complex>();

    auto M = std::make_shared<Eigen::MatrixXcd>(rows, rows);
    for (Eigen::Index i = 0; i < rows; ++i)
        for (Eigen::Index j = 0; j < rows; ++j)
            (*M)(i, j) = V(i, j) * grid.weights[static_cast<std::size_t>(j)];

    auto shared_phis = std::make_shared<const std::vector<numerics::Complex1D>>(std::move(phis));
    auto shared_c2 = std::make_shared<const std::vector<double>>(std::move(c2));

    MetricSpec spec;
    spec.source = "series";
    spec.K.kernel = [shared_phis, shared_c2, a](double x, double y) {
        Complex acc = 0.0;
        for (std::size_t n = 0; n < shared_phis->size(); ++n) {
            acc += (*shared_c2)[n] * (*shared_phis)[n](x) * std::conj((*shared_phis)[n](y));
            acc -= laplacian::mode(laplacian::Kind::neumann, static_cast<int>(n), x, a) *
                   laplacian::mode(laplacian::Kind::neumann, static_cast<int>(n), y, a);
        }
        return acc;
    };
    spec.K.jump = JumpLocus::none;
    spec.K.prebuilt = std::move(M);
    spec.K.prebuilt_grid = std::make_shared<QuadratureGrid>(grid);
    spec.metric_claimed = true;
    return spec;
}

}  // namespace

Eigen::MatrixXcd theta_matrix(const MetricSpec& spec, const QuadratureGrid& grid) {
    Eigen::MatrixXcd M = numerics::nystrom_matrix(spec.K, grid);
    M += Eigen::MatrixXcd::Identity(M.rows(), M.cols());
    return M;
}

double positivity_margin(const MetricSpec& spec, const QuadratureGrid& grid) {
    return numerics::min_symmetric_eigenvalue(spec.K, grid);
}

MetricSpec theta_series(const spectrum::BoundaryParams& p,
                        const laplacian::CoefficientSequence& C, int N,
                        const QuadratureGrid& grid) {
    const auto pt = spectrum::as_pt(p);
    if (pt && pt->beta == 0.0 && pt->alpha > 0.0) {
        // closed-form eigensystem, scaled so that C_n = 1 reproduces the
        // constant-coefficient kernel
        auto c2 = checked_coefficients(C, N);
        const auto modes = spectrum::pt_exact_modes(pt->alpha, pt->a, N);
        std::vector<numerics::Complex1D> phis;
        phis.reserve(modes.size());
        for (const auto& t : modes) phis.push_back(t.phi);
        auto spec = build_series(std::move(phis), std::move(c2), grid);
        spec.c_squared = C.c_squared;
        return spec;
    }
    auto result = spectrum::find_eigenvalues(p, N - 1);
    if (static_cast<int>(result.triples.size()) < N)
        throw std::runtime_error(
            "eigenvalue search returned fewer modes than the requested series truncation");
    result.triples.resize(static_cast<std::size_t>(N));
    for (const auto& t : result.triples)
        if (t.algebraic_multiplicity != 1)
            throw std::runtime_error(
                "series metric requires simple eigenvalues; a defective eigenvalue has no "
                "biorthogonal expansion");
    return theta_series_from_modes(result.triples, C, grid);
}

MetricSpec theta_series_from_modes(const std::vector<spectrum::EigenTriple>& modes,
                                   const laplacian::CoefficientSequence& C,
                                   const QuadratureGrid& grid) {
    auto c2 = checked_coefficients(C, static_cast<int>(modes.size()));
    // the top of an N-term series oscillates faster than the caller's grid
    // resolves, so norms are taken on a grid fine enough for the fastest mode
    const int norm_panels =
        std::max<int>(grid.n_panels, (static_cast<int>(modes.size()) + 1) / 2);
    auto gp = std::make_shared<const QuadratureGrid>(
        numerics::make_grid(grid.a, norm_panels, std::max(grid.order, 12)));
    std::vector<numerics::Complex1D> phis;
    phis.reserve(modes.size());
    for (const auto& t : modes) {
        if (!t.phi) throw std::invalid_argument("mode is missing its left eigenfunction");
        const double nrm = numerics::norm(numerics::sample(gp, t.phi));
        if (!(nrm > 0.0)) throw std::runtime_error("left eigenfunction has zero norm");
        phis.emplace_back([f = t.phi, s = 1.0 / nrm](double x) { return s * f(x); });
    }
    auto spec = build_series(std::move(phis), std::move(c2), grid);
    spec.c_squared = C.c_squared;
    return spec;
}

SampledFunction series_action(const std::vector<spectrum::EigenTriple>& modes,
                              const std::function<double(int)>& c_squared,
                              const SampledFunction& f) {
    if (!f.grid) throw std::invalid_argument("series_action requires a gridded function");
    if (!c_squared) throw std::invalid_argument("series_action requires a coefficient closure");
    SampledFunction out;
    out.grid = f.grid;
    out.values = Eigen::VectorXcd::Zero(f.values.size());
    auto terms =
        std::make_shared<std::vector<std::pair<numerics::Complex1D, Complex>>>();
    terms->reserve(modes.size());
    for (std::size_t n = 0; n < modes.size(); ++n) {
        if (!modes[n].phi) throw std::invalid_argument("mode is missing its left eigenfunction");
        const SampledFunction phi = numerics::sample(f.grid, modes[n].phi);
        const Complex coeff = c_squared(static_cast<int>(n)) * numerics::inner_product(phi, f);
        out.values += coeff * phi.values;
        terms->emplace_back(modes[n].phi, coeff);
    }
    out.evaluator = [terms](double x) {
        Complex acc = 0.0;
        for (const auto& [fn, coeff] : *terms) acc += coeff * fn(x);
        return acc;
    };
    return out;
}

KernelOperator theta_kernel(int i, double alpha, double a) {
    check_half_width(a);
    KernelOperator op;
    op.jump = i == 1 ? JumpLocus::none : JumpLocus::diagonal;
    switch (i) {
        case 1:
            op.kernel = [alpha, a](double x, double y) {
                return Complex(0.0, 1.0 / a) * std::exp(Complex(0.0, 0.5 * alpha * (x - y))) *
                       std::sin(0.5 * alpha * (x - y));
            };
            break;
        case 2:
            op.kernel = [alpha, a](double x, double y) {
                return Complex(0.0, 0.5 * alpha / a) * (y - a * sign_of(y - x));
            };
            break;
        case 3:
            op.kernel = [alpha, a](double x, double y) {
                const double s = sign_of(y - x);
                Complex val(0.5 * alpha * alpha / a * (a * a - x * y), -0.5 * alpha / a * x);
                val -= Complex(0.0, 0.5 * alpha) * Complex(1.0, -alpha * (y - x)) * s;
                return val;
            };
            break;
        case 4:
            op.kernel = [alpha, a](double x, double y) {
                const double d = y - x;
                const double s = sign_of(d);
                const Complex poly = y * y * Complex(3.0, -alpha * y) +
                                     3.0 * x * x * Complex(1.0, -alpha * y) +
                                     2.0 * a * a * Complex(1.0, alpha * (3.0 * x - y));
                return alpha / (12.0 * a) * poly -
                       0.25 * alpha * Complex(2.0, -alpha * d) * d * s;
            };
            break;
        default:
            throw std::invalid_argument("kernel label must be between 1 and 4");
    }
    return op;
}

MetricSpec theta_prop41(double alpha, double a, double c0, const KernelOperator& jn_shifted,
                        const KernelOperator& jd_shifted, const QuadratureGrid& grid) {
    check_half_width(a);
    if (!jn_shifted.kernel || !jd_shifted.kernel)
        throw std::invalid_argument("assembly requires kernel closures for both base factors");
    MetricSpec spec;
    spec.source = "assembled";
    spec.degeneracy_warning = near_neumann_wavenumber(alpha, a);
    spec.metric_claimed = !spec.degeneracy_warning;

    auto layout = std::make_shared<const QuadratureGrid>(grid);
    const auto th1 = theta_kernel(1, alpha, a).kernel;
    const auto th2 = theta_kernel(2, alpha, a).kernel;
    const auto th3 = theta_kernel(3, alpha, a).kernel;
    const auto rn = jn_shifted.kernel;
    const auto rd = jd_shifted.kernel;
    const double c0sq = c0 * c0;
    spec.K.jump = JumpLocus::diagonal;
    spec.K.kernel = [layout, th1, th2, th3, rn, rd, c0sq](double x, double y) {
        const Complex comp_n2 = numerics::integrate(
            [&](double z) { return rn(x, z) * th2(z, y); }, *layout, {x, y});
        const Complex comp_d3 = numerics::integrate(
            [&](double z) { return rd(x, z) * th3(z, y); }, *layout, {x, y});
        return rn(x, y) + c0sq * th1(x, y) + th2(x, y) + comp_n2 + th3(x, y) + comp_d3;
    };
    return spec;
}

MetricSpec theta_prop41_theta4(double alpha, double a, double c0,
                               const KernelOperator& jn_shifted, const Kernel2D& jn_shifted_dx,
                               const QuadratureGrid& grid) {
    check_half_width(a);
    if (!jn_shifted.kernel || !jn_shifted_dx)
        throw std::invalid_argument(
            "assembly requires the shifted kernel and its analytic x-derivative");
    MetricSpec spec;
    spec.source = "assembled";
    spec.degeneracy_warning = near_neumann_wavenumber(alpha, a);
    spec.metric_claimed = !spec.degeneracy_warning;

    auto layout = std::make_shared<const QuadratureGrid>(grid);
    const auto th1 = theta_kernel(1, alpha, a).kernel;
    const auto th2 = theta_kernel(2, alpha, a).kernel;
    // the identity part of p* J^N th4 is p* th4 = th3 exactly (th4 is the
    // antiderivative pair of th3 and continuous across the diagonal)
    const auto th3 = theta_kernel(3, alpha, a).kernel;
    const auto th4 = theta_kernel(4, alpha, a).kernel;
    const auto rn = jn_shifted.kernel;
    const auto drn = jn_shifted_dx;
    const double c0sq = c0 * c0;
    spec.K.jump = JumpLocus::diagonal;
    spec.K.kernel = [layout, th1, th2, th3, th4, rn, drn, c0sq](double x, double y) {
        const Complex comp_n2 = numerics::integrate(
            [&](double z) { return rn(x, z) * th2(z, y); }, *layout, {x, y});
        const Complex comp_p4 = numerics::integrate(
            [&](double z) { return drn(x, z) * th4(z, y); }, *layout, {x, y});
        return rn(x, y) + c0sq * th1(x, y) + th2(x, y) + comp_n2 + th3(x, y) +
               Complex(0.0, -1.0) * comp_p4;
    };
    return spec;
}

KernelOperator cchoice_j_kernel(laplacian::Kind kind, double alpha, double a) {
    check_cchoice_domain(alpha, a);
    KernelOperator op;
    op.jump = JumpLocus::diagonal;  // resolvent kernels kink across y = x
    if (kind == laplacian::Kind::neumann) {
        const double constant_term = alpha / std::sin(2.0 * alpha * a);  // C_0^2 chi_0 chi_0
        op.kernel = [alpha, a, constant_term](double x, double y) {
            return alpha * alpha *
                       laplacian::green(laplacian::Kind::neumann, Complex(alpha, 0.0), x, y, a) +
                   constant_term;
        };
    } else {
        op.kernel = [alpha, a](double x, double y) {
            return alpha * alpha *
                   laplacian::green(laplacian::Kind::dirichlet, Complex(alpha, 0.0), x, y, a);
        };
    }
    return op;
}

Kernel2D cchoice_j_kernel_dx(double alpha, double a) {
    check_cchoice_domain(alpha, a);
    const double s2 = std::sin(2.0 * alpha * a);
    return [alpha, a, s2](double x, double z) {
        const double below = std::sin(alpha * (x + a)) * std::cos(alpha * (z - a));  // x < z
        const double above = std::cos(alpha * (z + a)) * std::sin(alpha * (x - a));  // x > z
        double v = 0.5 * (below + above);
        if (x < z) v = below;
        if (x > z) v = above;
        return Complex(alpha * alpha * v / s2, 0.0);
    };
}

KernelOperator kernel_constant(double alpha, double a) {
    check_half_width(a);
    KernelOperator op;
    op.jump = JumpLocus::diagonal;
    op.kernel = [alpha, a](double x, double y) {
        const double d = x - y;
        const double s = sign_of(y - x);
        const Complex phase = std::exp(Complex(0.0, alpha * d));
        const Complex t1 = (phase - 1.0) / (2.0 * a);
        const Complex t2 = Complex(0.0, 0.5 * alpha / a) * (std::abs(d) - 2.0 * a) * s;
        const double t3 = 0.5 * alpha * alpha / a * (a * a - x * y - a * std::abs(d));
        return t1 + t2 + t3;
    };
    return op;
}

KernelOperator kernel_cchoice(double alpha, double a) {
    check_cchoice_domain(alpha, a);
    const double t = std::tan(alpha * a);
    KernelOperator op;
    op.jump = JumpLocus::diagonal;
    op.kernel = [alpha, t](double x, double y) {
        return alpha * std::exp(Complex(0.0, -alpha * (y - x))) * Complex(t, -sign_of(y - x));
    };
    return op;
}

KernelOperator kernel_general(double alpha, double beta, double c, double a) {
    check_half_width(a);
    KernelOperator op;
    op.jump = JumpLocus::diagonal;
    op.kernel = [alpha, beta, c](double x, double y) {
        const double d = x - y;
        return std::exp(Complex(-beta * std::abs(d), alpha * d)) * Complex(c, alpha * sign_of(d));
    };
    return op;
}

double d_constant(int n, double alpha, double a) {
    if (n < 0) throw std::invalid_argument("mode index must be non-negative");
    check_half_width(a);
    if (n == 0) {
        const double u = 2.0 * alpha * a;
        if (std::abs(u) < 1e-6) return 1.0 - u * u / 6.0;
        return std::sin(u) / u;
    }
    const double kn = laplacian::mode_wavenumber(n, a);
    const double ratio = (kn * kn - alpha * alpha) / (kn * kn);
    return n % 2 == 0 ? ratio : -ratio;
}

double hs_norm_closed(double alpha, double beta, double c, double a) {
    check_half_width(a);
    const double amplitude = c * c + alpha * alpha;
    const double t = 4.0 * a * beta;
    double shape;  // (t + e^{-t} - 1) / (2 beta^2) = 4 a^2 (1 - t/3 + t^2/12 - ...)
    if (std::abs(t) < 1e-2) {
        shape = 4.0 * a * a *
                (1.0 - t / 3.0 + t * t / 12.0 - t * t * t / 60.0 + t * t * t * t / 360.0);
    } else {
        shape = (t + std::expm1(-t)) / (2.0 * beta * beta);
    }
    return std::sqrt(std::max(0.0, amplitude * shape));
}

MetricSpec metric_constant(double alpha, double a) {
    MetricSpec spec;
    spec.source = "constant";
    spec.K = kernel_constant(alpha, a);
    spec.c_squared = [](int) { return 1.0; };
    spec.metric_claimed = true;
    return spec;
}

MetricSpec metric_cchoice(double alpha, double a) {
    MetricSpec spec;
    spec.source = "cchoice";
    spec.K = kernel_cchoice(alpha, a);
    spec.c_squared = [alpha, a](int n) {
        if (n == 0) return 2.0 * alpha * a / std::sin(2.0 * alpha * a);
        const double kn = laplacian::mode_wavenumber(n, a);
        return kn * kn / std::abs(kn * kn - alpha * alpha);
    };
    spec.metric_claimed = true;
    return spec;
}

MetricSpec metric_general(double alpha, double beta, double c, double a) {
    MetricSpec spec;
    spec.source = "general";
    spec.K = kernel_general(alpha, beta, c, a);
    // positivity depends on (alpha, beta, c); callers re-check numerically
    spec.metric_claimed = false;
    return spec;
}

COperator kernel_c_operator(double alpha, double a) {
    check_cchoice_domain(alpha, a);
    COperator C;
    C.alpha = alpha;
    C.a = a;
    const double t = std::tan(alpha * a);
    C.L.jump = JumpLocus::antidiagonal;
    // reflected grid nodes land on the anti-diagonal only up to rounding, so
    // the jump sign treats |y + x| below rounding scale as the locus itself
    C.L.kernel = [alpha, t, a](double x, double y) {
        const double u = y + x;
        const double s = std::abs(u) <= 1e-13 * (1.0 + a) ? 0.0 : sign_of(u);
        return alpha * std::exp(Complex(0.0, -alpha * u)) * Complex(t, -s);
    };
    return C;
}

SampledFunction apply_c(const COperator& C, const SampledFunction& f) {
    if (!f.grid) throw std::invalid_argument("apply_c requires a gridded function");
    if (!f.evaluator)
        throw std::runtime_error(
            "apply_c requires an off-grid evaluator (the parity part and the anti-diagonal "
            "panel splits sample between nodes)");
    const SampledFunction lf = numerics::apply_kernel(C.L, f);
    SampledFunction out;
    out.grid = f.grid;
    out.values.resize(f.values.size());
    for (std::size_t i = 0; i < f.grid->size(); ++i)
        out.values[static_cast<Eigen::Index>(i)] =
            f.evaluator(-f.grid->nodes[i]) + lf.values[static_cast<Eigen::Index>(i)];
    out.evaluator = [fe = f.evaluator, le = lf.evaluator](double x) { return fe(-x) + le(x); };
    return out;
}

Eigen::MatrixXcd c_matrix(const COperator& C, const QuadratureGrid& grid) {
    const auto n = static_cast<Eigen::Index>(grid.size());
    Eigen::MatrixXcd M = numerics::nystrom_matrix(C.L, grid);
    for (Eigen::Index i = 0; i < n; ++i) {
        const auto j = static_cast<std::size_t>(n - 1 - i);
        if (std::abs(grid.nodes[static_cast<std::size_t>(i)] + grid.nodes[j]) >
            1e-12 * (1.0 + grid.a))
            throw std::runtime_error("grid nodes are not symmetric under parity");
        M(i, n - 1 - i) += 1.0;
    }
    return M;
}

QuasiHermiticityReport verify_quasi_hermiticity(const MetricSpec& spec,
                                                const std::vector<spectrum::EigenTriple>& modes,
                                                const QuadratureGrid& grid, double flag_tol) {
    if (!spec.K.kernel && !spec.K.prebuilt)
        throw std::invalid_argument("metric spec carries no kernel");
    auto gp = std::make_shared<const QuadratureGrid>(grid);
    QuasiHermiticityReport report;
    report.positivity_margin = numerics::min_symmetric_eigenvalue(spec.K, grid);
    for (const auto& t : modes) {
        const SampledFunction psi = numerics::sample(gp, t.psi());
        const SampledFunction phi = numerics::sample(gp, t.phi);
        const SampledFunction k_psi = numerics::apply_kernel(spec.K, psi);
        const Eigen::VectorXcd theta_psi = psi.values + k_psi.values;

        Complex coeff;
        if (spec.c_squared) {
            coeff = Complex(spec.c_squared(t.index), 0.0);
        } else {
            Complex num = 0.0, den = 0.0;
            for (std::size_t i = 0; i < grid.size(); ++i) {
                const auto k = static_cast<Eigen::Index>(i);
                num += grid.weights[i] * std::conj(phi.values[k]) * theta_psi[k];
                den += grid.weights[i] * std::norm(phi.values[k]);
            }
            coeff = num / den;
        }

        double err2 = 0.0, ref2 = 0.0;
        for (std::size_t i = 0; i < grid.size(); ++i) {
            const auto k = static_cast<Eigen::Index>(i);
            err2 += grid.weights[i] * std::norm(theta_psi[k] - coeff * phi.values[k]);
            ref2 += grid.weights[i] * std::norm(coeff * phi.values[k]);
        }

        ModeResidual mode;
        mode.index = t.index;
        mode.lambda = t.lambda;
        mode.c_squared = coeff.real();
        mode.residual = std::sqrt(err2) / std::max(std::sqrt(ref2), 1e-30);
        mode.flagged = !(mode.residual <= flag_tol);
        report.max_residual = std::max(report.max_residual, mode.residual);
        if (mode.flagged) report.quasi_hermitian = false;
        report.modes.push_back(std::move(mode));
    }
    return report;
}

DifferentiableKernel kernel_general_differentiable(double alpha, double beta, double c,
                                                   double a) {
    DifferentiableKernel K;
    K.op = kernel_general(alpha, beta, c, a);
    auto value = [alpha, beta, c](double x, double y, int side) {
        const double d = x - y;
        return std::exp(Complex(-beta * std::abs(d), alpha * d)) *
               Complex(c, alpha * static_cast<double>(side));
    };
    K.value = value;
    K.dx = [alpha, beta, value](double x, double y, int side) {
        return Complex(-beta * side, alpha) * value(x, y, side);
    };
    K.dy = [alpha, beta, value](double x, double y, int side) {
        return -Complex(-beta * side, alpha) * value(x, y, side);
    };
    auto second = [alpha, beta, value](double x, double y, int side) {
        const Complex m(-beta * side, alpha);
        return m * m * value(x, y, side);
    };
    K.dxx = second;
    K.dyy = second;
    return K;
}

DifferentiableKernel kernel_constant_differentiable(double alpha, double a) {
    check_half_width(a);
    DifferentiableKernel K;
    K.op = kernel_constant(alpha, a);
    K.value = [alpha, a](double x, double y, int side) {
        const double d = x - y;
        const double ad = std::abs(d);
        const Complex phase = std::exp(Complex(0.0, alpha * d));
        return (phase - 1.0) / (2.0 * a) +
               Complex(0.0, 0.5 * alpha / a) * (2.0 * a - ad) * static_cast<double>(side) +
               0.5 * alpha * alpha / a * (a * a - x * y - a * ad);
    };
    K.dx = [alpha, a](double x, double y, int side) {
        const Complex phase = std::exp(Complex(0.0, alpha * (x - y)));
        return Complex(0.0, 0.5 * alpha / a) * (phase - 1.0) +
               0.5 * alpha * alpha / a * (-y - a * side);
    };
    K.dy = [alpha, a](double x, double y, int side) {
        const Complex phase = std::exp(Complex(0.0, alpha * (x - y)));
        return Complex(0.0, -0.5 * alpha / a) * (phase - 1.0) +
               0.5 * alpha * alpha / a * (-x + a * side);
    };
    auto second = [alpha, a](double x, double y, int) {
        return -0.5 * alpha * alpha / a * std::exp(Complex(0.0, alpha * (x - y)));
    };
    K.dxx = second;
    K.dyy = second;
    return K;
}

PdeResiduals verify_pde_system(const DifferentiableKernel& K, double alpha, double beta,
                               double a, const QuadratureGrid& grid) {
    if (!K.value || !K.dx || !K.dy || !K.dxx || !K.dyy)
        throw std::invalid_argument("differentiable kernel is incomplete");
    check_half_width(a);
    constexpr int n_lat = 41;
    std::vector<double> xs(n_lat);
    for (int i = 0; i < n_lat; ++i) xs[i] = -a + 2.0 * a * i / (n_lat - 1);

    PdeResiduals r;
    for (double x : xs) {
        for (double y : xs) {
            if (std::abs(x - y) < 1e-3) continue;
            const int side = x > y ? 1 : -1;
            r.interior =
                std::max(r.interior, std::abs(K.dxx(x, y, side) - K.dyy(x, y, side)));
        }
    }
    for (int i = 1; i + 1 < n_lat; ++i) {
        const double x = xs[static_cast<std::size_t>(i)];
        const Complex upper = K.dy(x, a, -1) + Complex(beta, alpha) * K.value(x, a, -1);
        const Complex lower = K.dy(x, -a, 1) + Complex(-beta, alpha) * K.value(x, -a, 1);
        r.boundary_strong = std::max({r.boundary_strong, std::abs(upper), std::abs(lower)});
    }
    for (const int end : {1, -1}) {
        const double xe = end * a;
        const Complex cbc(end * beta, -alpha);  // conj of the boundary coefficient at xe
        const Complex jump = K.value(xe, xe, 1) - K.value(xe, xe, -1);
        for (int deg = 0; deg <= 4; ++deg) {
            const Complex integ = numerics::integrate(
                [&](double y) {
                    return (K.dx(xe, y, end) + cbc * K.value(xe, y, end)) * std::pow(y, deg);
                },
                grid);
            const Complex val =
                integ + (jump - Complex(0.0, 2.0 * alpha)) * std::pow(xe, deg);
            r.boundary_weak = std::max(r.boundary_weak, std::abs(val));
        }
    }
    return r;
}

}  // namespace quasispec::metric
