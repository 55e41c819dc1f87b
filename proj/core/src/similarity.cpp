#include "quasispec/similarity.hpp"

#include "quasispec/laplacian.hpp"

#include <algorithm>
#include <cmath>
#include <limits>
#include <memory>
#include <stdexcept>
#include <utility>

namespace quasispec::similarity {

namespace {

using laplacian::Kind;
using numerics::JumpLocus;

constexpr Complex kI{0.0, 1.0};

double sign_of(double v) { return v > 0.0 ? 1.0 : (v < 0.0 ? -1.0 : 0.0); }

void check_half_width(double a) {
    if (!(a > 0.0)) throw std::invalid_argument("half-width a must be positive");
}

int nearest_mode_index(double alpha, double a) {
    return static_cast<int>(std::lround(2.0 * a * std::abs(alpha) / M_PI));
}

/// Kernel of Omega - I. Finite for every coupling; only the inverse kernel
/// carries the trigonometric poles.
numerics::Kernel2D l_kernel(double alpha, double a) {
    return [alpha, a](double x, double y) {
        const Complex drift = kI * alpha / (2.0 * a) * (y - a * sign_of(y - x));
        const Complex shift = (std::exp(-kI * alpha * (y + a)) - 1.0) / (2.0 * a);
        return drift + shift;
    };
}

/// Kernel of Omega^{-1} - I; poles exactly at sin(2 alpha a) = 0.
numerics::Kernel2D m_kernel(double alpha, double a) {
    const double s2a = std::sin(2.0 * alpha * a);
    const double cot = std::cos(2.0 * alpha * a) / s2a;
    return [alpha, a, s2a, cot](double x, double y) {
        const Complex edge = alpha * std::exp(kI * alpha * (a - x)) / s2a;
        const Complex wave = -(alpha / 2.0) * std::exp(-kI * alpha * (x - y)) *
                             Complex(cot, -sign_of(y - x));
        const Complex mirror = -alpha * std::exp(-kI * alpha * (x + y)) / (2.0 * s2a);
        return edge + wave + mirror;
    };
}

Complex1D neumann_mode_fn(int n, double a) {
    return [n, a](double x) {
        return Complex(laplacian::mode(Kind::neumann, n, x, a), 0.0);
    };
}

void require_closed(const SimilarityMaps& maps, const std::string& what) {
    if (maps.source != "closed" || std::isnan(maps.alpha))
        throw std::invalid_argument(what +
                                    " needs the closed-form kernels; series maps do not carry "
                                    "the analytic derivative identities");
}

}  // namespace

SimilarityMaps omega_kernels(double alpha, double a) {
    check_half_width(a);
    SimilarityMaps maps;
    maps.alpha = alpha;
    maps.a = a;
    if (alpha == 0.0) {
        maps.L.kernel = [](double, double) { return Complex(0.0, 0.0); };
        maps.L.jump = JumpLocus::none;
        maps.M = maps.L;
        return maps;
    }
    if (std::abs(std::sin(2.0 * alpha * a)) < 1e-10) {
        const int m = nearest_mode_index(alpha, a);
        if (m < 1)
            throw std::invalid_argument(
                "coupling too close to zero for the inverse kernel; pass alpha = 0 exactly "
                "for the identity transform");
        throw std::invalid_argument(
            "the inverse map has a pole at alpha = k_" + std::to_string(m) + " = " +
            std::to_string(laplacian::mode_wavenumber(m, a)) +
            "; the transform loses invertibility there");
    }
    maps.L.kernel = l_kernel(alpha, a);
    maps.L.jump = JumpLocus::diagonal;
    maps.M.kernel = m_kernel(alpha, a);
    maps.M.jump = JumpLocus::diagonal;
    return maps;
}

SimilarityMaps omega_series(const BoundaryParams& p, const std::vector<EigenTriple>& modes,
                            const std::function<Complex1D(int)>& basis, int n_terms,
                            const QuadratureGrid& grid) {
    check_half_width(p.a);
    if (n_terms < 1) throw std::invalid_argument("series truncation must be positive");
    if (n_terms > static_cast<int>(modes.size()))
        throw std::invalid_argument("series truncation exceeds the number of supplied modes");
    if (std::abs(p.a - grid.a) > 1e-12 * (1.0 + p.a))
        throw std::invalid_argument("half-width mismatch between boundary parameters and grid");

    std::vector<EigenTriple> family(modes.begin(), modes.begin() + n_terms);
    for (const auto& t : family)
        if (!t.psi_hat || !t.phi)
            throw std::invalid_argument("every supplied mode needs attached eigenfunctions");

    // pairings of the fastest retained mode outrun the caller's grid, so the
    // normalization <phi_n, psi_n> = 1 is enforced on a refined one
    const int norm_panels = std::max<int>(grid.n_panels, (n_terms + 1) / 2);
    const auto norm_grid = numerics::make_grid(grid.a, norm_panels, std::max(grid.order, 12));
    spectrum::biorthonormalize(family, norm_grid);

    auto es = std::make_shared<std::vector<Complex1D>>();
    auto phis = std::make_shared<std::vector<Complex1D>>();
    auto psis = std::make_shared<std::vector<Complex1D>>();
    es->reserve(family.size());
    phis->reserve(family.size());
    psis->reserve(family.size());
    for (const auto& t : family) {
        es->push_back(basis ? basis(t.index) : neumann_mode_fn(t.index, p.a));
        phis->push_back(t.phi);
        psis->push_back(t.psi());
    }

    const auto rows = static_cast<Eigen::Index>(grid.size());
    const auto N = static_cast<Eigen::Index>(family.size());
    Eigen::MatrixXcd E(rows, N), Phi(rows, N), Psi(rows, N);
    for (Eigen::Index i = 0; i < rows; ++i) {
        const double x = grid.nodes[static_cast<std::size_t>(i)];
        for (Eigen::Index n = 0; n < N; ++n) {
            const auto j = static_cast<std::size_t>(n);
            E(i, n) = (*es)[j](x);
            Phi(i, n) = (*phis)[j](x);
            Psi(i, n) = (*psis)[j](x);
        }
    }

    auto weight_columns = [&grid](Eigen::MatrixXcd V) {
        for (Eigen::Index j = 0; j < V.cols(); ++j)
            V.col(j) *= grid.weights[static_cast<std::size_t>(j)];
        return std::make_shared<const Eigen::MatrixXcd>(std::move(V));
    };
    auto shared_grid = std::make_shared<const QuadratureGrid>(grid);

    SimilarityMaps maps;
    maps.alpha = std::numeric_limits<double>::quiet_NaN();
    maps.a = p.a;
    maps.source = "series";
    maps.basis = basis ? "custom" : "neumann";

    maps.L.kernel = [es, phis](double x, double y) {
        Complex acc = 0.0;
        for (std::size_t n = 0; n < es->size(); ++n)
            acc += (*es)[n](x) * std::conj((*phis)[n](y) - (*es)[n](y));
        return acc;
    };
    maps.L.jump = JumpLocus::none;
    maps.L.prebuilt = weight_columns(E * (Phi - E).adjoint());
    maps.L.prebuilt_grid = shared_grid;

    maps.M.kernel = [es, psis](double x, double y) {
        Complex acc = 0.0;
        for (std::size_t n = 0; n < es->size(); ++n)
            acc += ((*psis)[n](x) - (*es)[n](x)) * std::conj((*es)[n](y));
        return acc;
    };
    maps.M.jump = JumpLocus::none;
    maps.M.prebuilt = weight_columns((Psi - E) * E.adjoint());
    maps.M.prebuilt_grid = shared_grid;
    return maps;
}

double SimilarOperatorH::eigenvalue(int n) const {
    if (n < 0) throw std::invalid_argument("mode index must be nonnegative");
    if (n == 0) return alpha * alpha;
    const double k = laplacian::mode_wavenumber(n, a);
    return k * k;
}

Complex1D SimilarOperatorH::eigenfunction(int n) const {
    if (n < 0) throw std::invalid_argument("mode index must be nonnegative");
    return neumann_mode_fn(n, a);
}

SampledFunction SimilarOperatorH::apply(const SampledFunction& f, int n_modes) const {
    if (!f.grid) throw std::invalid_argument("spectral application needs grid samples");
    if (n_modes < 1) throw std::invalid_argument("mode count must be positive");
    const auto& g = *f.grid;
    const auto S = static_cast<Eigen::Index>(g.size());

    Eigen::MatrixXd chi(S, n_modes);
    for (Eigen::Index i = 0; i < S; ++i) {
        const double x = g.nodes[static_cast<std::size_t>(i)];
        for (int n = 0; n < n_modes; ++n) chi(i, n) = laplacian::mode(Kind::neumann, n, x, a);
    }
    Eigen::VectorXcd coeff(n_modes);
    for (int n = 0; n < n_modes; ++n) {
        Complex c = 0.0;
        for (Eigen::Index i = 0; i < S; ++i)
            c += g.weights[static_cast<std::size_t>(i)] * chi(i, n) * f.values[i];
        coeff[n] = eigenvalue(n) * c;
    }

    SampledFunction out;
    out.grid = f.grid;
    out.values = chi.cast<Complex>() * coeff;
    auto cp = std::make_shared<const Eigen::VectorXcd>(std::move(coeff));
    const double aa = a;
    out.evaluator = [cp, aa](double x) {
        Complex acc = 0.0;
        for (Eigen::Index n = 0; n < cp->size(); ++n)
            acc += (*cp)[n] * laplacian::mode(Kind::neumann, static_cast<int>(n), x, aa);
        return acc;
    };
    return out;
}

double SimilarOperatorH::form(const SampledFunction& psi) const {
    if (!psi.grid) throw std::invalid_argument("the form needs grid samples");
    if (!psi.derivative_values)
        throw std::invalid_argument("the form needs derivative values alongside the samples");
    const auto& g = *psi.grid;
    double kinetic = 0.0;
    Complex c0 = 0.0;
    for (std::size_t i = 0; i < g.size(); ++i) {
        const auto k = static_cast<Eigen::Index>(i);
        kinetic += g.weights[i] * std::norm((*psi.derivative_values)[k]);
        c0 += g.weights[i] * laplacian::mode(Kind::neumann, 0, g.nodes[i], a) * psi.values[k];
    }
    return kinetic + alpha * alpha * std::norm(c0);
}

Eigen::MatrixXd SimilarOperatorH::galerkin(int size) const {
    if (size < 1) throw std::invalid_argument("matrix size must be positive");
    Eigen::MatrixXd G = Eigen::MatrixXd::Zero(size, size);
    for (int n = 0; n < size; ++n) G(n, n) = eigenvalue(n);
    return G;
}

SimilarOperatorH similar_operator(double alpha, double a) {
    check_half_width(a);
    return SimilarOperatorH{alpha, a};
}

Complex th_form_general(const SampledFunction& psi, const SimilarityMaps& maps,
                        const BoundaryParams& p) {
    require_closed(maps, "the transported form");
    if (!psi.grid) throw std::invalid_argument("the form needs grid samples");
    if (!psi.derivative_values)
        throw std::invalid_argument("the form needs derivative values alongside the samples");
    if (!psi.evaluator)
        throw std::invalid_argument(
            "the form needs an off-grid evaluator for the jump quadrature and boundary terms");

    const auto& g = *psi.grid;
    const double a = maps.a;
    const double alpha = maps.alpha;
    const Complex ia = kI * alpha;

    Complex total_mass = 0.0;  // integral of psi, feeding the derivative of L* psi
    for (std::size_t i = 0; i < g.size(); ++i)
        total_mass += g.weights[i] * psi.values[static_cast<Eigen::Index>(i)];

    const SampledFunction mpsi = numerics::apply_kernel(maps.M, psi);

    // first-order identities of the closed kernels:
    //   (L* psi)'(x) = i alpha psi(x) + (i alpha / 2a)(e^{i alpha (x+a)} - 1) integral(psi)
    //   (M psi)'(x)  = -i alpha (M psi)(x) - i alpha psi(x)
    Complex t = 0.0;
    for (std::size_t i = 0; i < g.size(); ++i) {
        const auto k = static_cast<Eigen::Index>(i);
        const double x = g.nodes[i];
        const Complex dpsi = (*psi.derivative_values)[k];
        const Complex dls =
            ia * psi.values[k] +
            ia / (2.0 * a) * (std::exp(kI * alpha * (x + a)) - 1.0) * total_mass;
        const Complex dms = -ia * mpsi.values[k] - ia * psi.values[k];
        t += g.weights[i] * std::conj(dpsi + dls) * (dpsi + dms);
    }

    const auto lstar_at = [&](double x0) {
        const Complex1D integrand = [&maps, &psi, x0](double y) {
            return std::conj(maps.L.kernel(y, x0)) * psi.evaluator(y);
        };
        return numerics::integrate(integrand, g, {x0});
    };
    const Complex u_plus = psi.evaluator(a) + lstar_at(a);
    const Complex u_minus = psi.evaluator(-a) + lstar_at(-a);
    const Complex v_plus = psi.evaluator(a) + mpsi.evaluator(a);
    const Complex v_minus = psi.evaluator(-a) + mpsi.evaluator(-a);
    t += p.c_plus * std::conj(u_plus) * v_plus - p.c_minus * std::conj(u_minus) * v_minus;
    return t;
}

Eigen::MatrixXcd conjugated_galerkin(const SimilarityMaps& maps, int size,
                                     const QuadratureGrid& grid) {
    require_closed(maps, "the conjugated matrix");
    if (size < 1) throw std::invalid_argument("matrix size must be positive");
    if (std::abs(maps.a - grid.a) > 1e-12 * (1.0 + maps.a))
        throw std::invalid_argument("half-width mismatch between maps and grid");

    const double a = maps.a;
    const double alpha = maps.alpha;
    const auto S = static_cast<Eigen::Index>(grid.size());
    auto gp = std::make_shared<const QuadratureGrid>(grid);

    // second-order identity of the M kernel:
    //   H (I + M) chi_n = (k_n^2 + alpha^2) chi_n + alpha^2 M chi_n + i alpha chi_n'
    Eigen::MatrixXcd F(S, size);
    for (int n = 0; n < size; ++n) {
        const SampledFunction chi = numerics::sample(gp, neumann_mode_fn(n, a));
        const SampledFunction mchi = numerics::apply_kernel(maps.M, chi);
        const double k = laplacian::mode_wavenumber(n, a);
        for (Eigen::Index i = 0; i < S; ++i) {
            const double x = grid.nodes[static_cast<std::size_t>(i)];
            F(i, n) = (k * k + alpha * alpha) * chi.values[i] + alpha * alpha * mchi.values[i] +
                      kI * alpha * laplacian::mode_derivative(Kind::neumann, n, x, a);
        }
    }
    for (Eigen::Index i = 0; i < S; ++i) F.row(i) *= grid.weights[static_cast<std::size_t>(i)];

    // <chi_m, (I + L) v> = integral (chi_m + l_m) v with the x-integral of L
    // against chi_m in closed form:
    //   l_0(y) = (e^{-i alpha (y+a)} - 1) / sqrt(2a)
    //   l_m(y) = -(i alpha / k_m) chi_m^D(y)   for m >= 1
    Eigen::MatrixXcd row(S, size);
    for (int m = 0; m < size; ++m) {
        for (Eigen::Index i = 0; i < S; ++i) {
            const double y = grid.nodes[static_cast<std::size_t>(i)];
            const Complex lm =
                m == 0 ? (std::exp(-kI * alpha * (y + a)) - 1.0) / std::sqrt(2.0 * a)
                       : -kI * alpha / laplacian::mode_wavenumber(m, a) *
                             laplacian::mode(Kind::dirichlet, m, y, a);
            row(i, m) = laplacian::mode(Kind::neumann, m, y, a) + lm;
        }
    }
    return row.transpose() * F;
}

DegeneracyReport degeneracy_report(double alpha, double a, const QuadratureGrid& grid) {
    check_half_width(a);
    const int m = nearest_mode_index(alpha, a);
    const double km = m >= 1 ? laplacian::mode_wavenumber(m, a) : 0.0;
    if (m < 1 || std::abs(alpha - km) > 1e-8 * (1.0 + km))
        throw std::invalid_argument(
            "alpha = " + std::to_string(alpha) +
            " is not an exceptional coupling; the Jordan structure appears only at "
            "alpha = m pi / (2a)");

    DegeneracyReport rep;
    rep.m = m;
    rep.alpha = alpha;
    rep.a = a;
    rep.lambda = Complex(alpha * alpha, 0.0);
    const auto p = spectrum::PTParams{alpha, 0.0, a}.boundary();

    rep.char_value = spectrum::char_fn(rep.lambda, p);
    rep.char_derivative = spectrum::char_fn_derivative(rep.lambda, p);
    const double h = 1e-4 * (1.0 + std::abs(rep.lambda));
    rep.char_second_derivative = (spectrum::char_fn(rep.lambda + h, p) - 2.0 * rep.char_value +
                                  spectrum::char_fn(rep.lambda - h, p)) /
                                 (h * h);

    // algebraic multiplicity: winding count of a box around lambda that
    // excludes the neighbouring eigenvalues
    const double lam = alpha * alpha;
    const double below =
        m == 1 ? lam : lam - std::pow(laplacian::mode_wavenumber(m - 1, a), 2);
    const double above = std::pow(laplacian::mode_wavenumber(m + 1, a), 2) - lam;
    const double r = 0.45 * std::min(below, above);
    rep.H_algebraic = spectrum::count_zeros(p, lam - r, lam + r, -r, r);

    // geometric multiplicity: rank of the boundary-condition matrix acting on
    // the coefficients of cos(l(x+a)) and sin(l(x+a))
    const double two_la = 2.0 * alpha * a;
    Eigen::Matrix2cd B;
    B << p.c_minus, Complex(alpha, 0.0),
        p.c_plus * std::cos(two_la) - alpha * std::sin(two_la),
        p.c_plus * std::sin(two_la) + alpha * std::cos(two_la);
    const Eigen::JacobiSVD<Eigen::Matrix2cd> bsvd(B);
    int rank = 0;
    for (Eigen::Index i = 0; i < bsvd.singularValues().size(); ++i)
        if (bsvd.singularValues()[i] > 1e-8 * bsvd.singularValues()[0]) ++rank;
    rep.H_geometric = 2 - rank;

    spectrum::EigenTriple t;
    t.index = m;
    t.l = Complex(alpha, 0.0);
    t.lambda = rep.lambda;
    spectrum::attach_eigenfunctions(t, p);
    rep.H_eigenfunction = t.psi_hat;

    // the Jordan partner is the l-derivative of the eigenfunction family
    // divided by 2l, so that (H - lambda) g = psi; its boundary conditions
    // hold exactly because lambda is a double root of the characteristic
    // function
    const double sa = std::sqrt(a);
    const Complex kappa = p.c_minus;
    const auto g_fn = [alpha, sa, kappa](double x, double a_) {
        const double u = x + a_;
        const double s = std::sin(alpha * u), c = std::cos(alpha * u);
        return (-u * s + kappa / (alpha * alpha) * s - kappa / alpha * u * c) /
               (2.0 * alpha * sa);
    };
    const auto g_d1 = [alpha, sa, kappa](double x, double a_) {
        const double u = x + a_;
        const double s = std::sin(alpha * u), c = std::cos(alpha * u);
        return (-s - alpha * u * c + kappa * u * s) / (2.0 * alpha * sa);
    };
    const auto g_d2 = [alpha, sa, kappa](double x, double a_) {
        const double u = x + a_;
        const double s = std::sin(alpha * u), c = std::cos(alpha * u);
        return (-2.0 * alpha * c + kappa * s + alpha * alpha * u * s +
                kappa * alpha * u * c) /
               (2.0 * alpha * sa);
    };
    rep.H_jordan_vector = [g_fn, a](double x) { return g_fn(x, a); };

    double resid2 = 0.0;
    for (std::size_t i = 0; i < grid.size(); ++i) {
        const double x = grid.nodes[i];
        const Complex res = -g_d2(x, a) - rep.lambda * g_fn(x, a) - t.psi_hat(x);
        resid2 += grid.weights[i] * std::norm(res);
    }
    const Complex bc_minus = g_d1(-a, a) + p.c_minus * g_fn(-a, a);
    const Complex bc_plus = g_d1(a, a) + p.c_plus * g_fn(a, a);
    rep.jordan_residual = std::sqrt(resid2) + std::abs(bc_minus) + std::abs(bc_plus);

    const SimilarOperatorH hop = similar_operator(alpha, a);
    const int diag_size = std::max(m + 2, 8);
    int count = 0;
    for (int n = 0; n < diag_size; ++n)
        if (std::abs(hop.eigenvalue(n) - lam) <= 1e-8 * (1.0 + lam)) ++count;
    rep.h_geometric = count;
    rep.h_eigenfunctions = {neumann_mode_fn(0, a), neumann_mode_fn(m, a)};

    // Omega = I + L stays finite at the exceptional point, so its loss of
    // invertibility shows up as a collapsing singular value of the weighted
    // realization delta_ij + sqrt(w_i) L(x_i, x_j) sqrt(w_j)
    const auto S = static_cast<Eigen::Index>(grid.size());
    const auto lk = l_kernel(alpha, a);
    Eigen::MatrixXcd W(S, S);
    for (Eigen::Index i = 0; i < S; ++i) {
        const double xi = grid.nodes[static_cast<std::size_t>(i)];
        const double swi = std::sqrt(grid.weights[static_cast<std::size_t>(i)]);
        for (Eigen::Index j = 0; j < S; ++j) {
            const auto ju = static_cast<std::size_t>(j);
            W(i, j) = swi * lk(xi, grid.nodes[ju]) * std::sqrt(grid.weights[ju]);
        }
        W(i, i) += 1.0;
    }
    const Eigen::BDCSVD<Eigen::MatrixXcd> osvd(W);
    const auto& sv = osvd.singularValues();
    rep.omega_min_singular = sv[sv.size() - 1];
    for (Eigen::Index i = 0; i < sv.size(); ++i)
        if (sv[i] < 1e-3 * sv[0]) ++rep.omega_rank_deficiency;
    rep.omega_invertible = rep.omega_rank_deficiency == 0;
    return rep;
}

}  // namespace quasispec::similarity
