#include "doctest.h"

#include "quasispec/laplacian.hpp"
#include "quasispec/metric.hpp"
#include "quasispec/numerics.hpp"
#include "quasispec/similarity.hpp"
#include "quasispec/spectrum.hpp"

#include <cmath>
#include <memory>
#include <stdexcept>
#include <vector>

using namespace quasispec;
using laplacian::Kind;
using numerics::Complex;
using numerics::Complex1D;
using numerics::QuadratureGrid;
using numerics::SampledFunction;

namespace {

const double kHalfPi = M_PI / 2.0;

std::shared_ptr<const QuadratureGrid> shared_grid(double a, int panels = 16, int order = 12) {
    return std::make_shared<const QuadratureGrid>(numerics::make_grid(a, panels, order));
}

Complex1D chi_fn(int n, double a) {
    return [n, a](double x) { return Complex(laplacian::mode(Kind::neumann, n, x, a), 0.0); };
}

Complex1D dchi_fn(int n, double a) {
    return [n, a](double x) {
        return Complex(laplacian::mode_derivative(Kind::neumann, n, x, a), 0.0);
    };
}

double weighted_l2(const QuadratureGrid& g, const Eigen::VectorXcd& v) {
    double s = 0.0;
    for (Eigen::Index i = 0; i < v.size(); ++i)
        s += g.weights[static_cast<std::size_t>(i)] * std::norm(v[i]);
    return std::sqrt(s);
}

/// f + K f with split-panel quadrature; the output keeps an evaluator.
SampledFunction apply_one_plus(const numerics::KernelOperator& K, const SampledFunction& f) {
    SampledFunction kf = numerics::apply_kernel(K, f);
    SampledFunction out;
    out.grid = f.grid;
    out.values = f.values + kf.values;
    if (f.evaluator && kf.evaluator) {
        const auto fe = f.evaluator;
        const auto ke = kf.evaluator;
        out.evaluator = [fe, ke](double x) { return fe(x) + ke(x); };
    }
    return out;
}

double hs_from_prebuilt(const numerics::KernelOperator& K, const QuadratureGrid& g) {
    REQUIRE(K.prebuilt);
    double hs2 = 0.0;
    const auto& P = *K.prebuilt;
    for (Eigen::Index i = 0; i < P.rows(); ++i)
        for (Eigen::Index j = 0; j < P.cols(); ++j)
            hs2 += g.weights[static_cast<std::size_t>(i)] * std::norm(P(i, j)) /
                   g.weights[static_cast<std::size_t>(j)];
    return std::sqrt(hs2);
}

std::vector<spectrum::EigenTriple> neumann_family(int count, double a) {
    std::vector<spectrum::EigenTriple> fam(static_cast<std::size_t>(count));
    for (int n = 0; n < count; ++n) {
        auto& t = fam[static_cast<std::size_t>(n)];
        t.index = n;
        const double k = laplacian::mode_wavenumber(n, a);
        t.l = Complex(k, 0.0);
        t.lambda = Complex(k * k, 0.0);
        t.psi_hat = chi_fn(n, a);
        t.phi = chi_fn(n, a);
    }
    return fam;
}

}  // namespace

TEST_CASE("zero coupling yields the identity transform and the bare form") {
    const auto maps = similarity::omega_kernels(0.0, kHalfPi);
    CHECK(maps.source == "closed");
    CHECK(maps.basis == "neumann");
    CHECK(maps.u_is_identity);
    CHECK(maps.L.jump == numerics::JumpLocus::none);
    for (double x : {-1.2, 0.0, 0.7})
        for (double y : {-0.9, 0.1, 1.3}) {
            CHECK(std::abs(maps.L.kernel(x, y)) == 0.0);
            CHECK(std::abs(maps.M.kernel(x, y)) == 0.0);
        }
    const auto gp = shared_grid(kHalfPi);
    CHECK(numerics::hs_norm(maps.L, *gp) == 0.0);

    // with zero kernels and zero boundary data the transported form is the
    // kinetic energy, exactly
    const Complex1D f = [](double x) { return Complex(std::cos(1.1 * x), 0.3 * std::sin(2.0 * x)); };
    const Complex1D df = [](double x) {
        return Complex(-1.1 * std::sin(1.1 * x), 0.6 * std::cos(2.0 * x));
    };
    const SampledFunction fs = numerics::sample(gp, f, df);
    const Complex t = similarity::th_form_general(fs, maps, spectrum::BoundaryParams{kHalfPi});
    double kinetic = 0.0;
    for (std::size_t i = 0; i < gp->size(); ++i)
        kinetic += gp->weights[i] * std::norm(df(gp->nodes[i]));
    CHECK(std::abs(t - Complex(kinetic)) <= 1e-14 * (1.0 + kinetic));
}

TEST_CASE("the inverse kernel rejects poles and bad half-widths") {
    CHECK_THROWS_AS(similarity::omega_kernels(1.0, kHalfPi), std::invalid_argument);
    CHECK_THROWS_AS(similarity::omega_kernels(2.0, kHalfPi), std::invalid_argument);
    CHECK_THROWS_AS(similarity::omega_kernels(1e-13, kHalfPi), std::invalid_argument);
    CHECK_THROWS_AS(similarity::omega_kernels(0.5, 0.0), std::invalid_argument);
    CHECK_THROWS_AS(similarity::omega_kernels(0.5, -1.0), std::invalid_argument);
    try {
        similarity::omega_kernels(2.0, kHalfPi);
        CHECK(false);
    } catch (const std::invalid_argument& e) {
        CHECK(std::string(e.what()).find("k_2") != std::string::npos);
    }
}

TEST_CASE("transform and inverse compose to the identity on coarse and fine grids") {
    const Complex1D f = [](double x) {
        return Complex(std::exp(0.3 * x) * std::cos(x), 0.2 * std::sin(2.0 * x));
    };
    for (double alpha : {0.5, 0.9}) {
        const auto maps = similarity::omega_kernels(alpha, kHalfPi);
        for (int panels : {8, 16}) {
            const auto gp = shared_grid(kHalfPi, panels);
            const SampledFunction fs = numerics::sample(gp, f);
            const SampledFunction mid = apply_one_plus(maps.M, fs);
            const SampledFunction back = apply_one_plus(maps.L, mid);
            const double resid = weighted_l2(*gp, (back.values - fs.values).eval());
            CHECK(resid <= 1e-7);   // contract
            CHECK(resid <= 1e-12);  // observed headroom
        }
    }
}

TEST_CASE("eigenfunctions map onto Neumann modes in both directions") {
    for (double alpha : {0.25, 0.5, 0.9}) {
        const auto maps = similarity::omega_kernels(alpha, kHalfPi);
        const auto gp = shared_grid(kHalfPi);
        const auto modes = spectrum::pt_exact_modes(alpha, kHalfPi, 11);
        for (int n = 0; n <= 10; ++n) {
            const auto& t = modes[static_cast<std::size_t>(n)];
            const SampledFunction psi = numerics::sample(gp, t.psi());
            const SampledFunction chi = numerics::sample(gp, chi_fn(n, kHalfPi));

            const SampledFunction mapped = apply_one_plus(maps.L, psi);
            const double forward = weighted_l2(*gp, (mapped.values - chi.values).eval());
            CHECK(forward <= 1e-7);   // contract
            CHECK(forward <= 1e-10);  // observed headroom

            const SampledFunction pulled = apply_one_plus(maps.M, chi);
            const double backward = weighted_l2(*gp, (pulled.values - psi.values).eval());
            CHECK(backward <= 1e-7);
            CHECK(backward <= 1e-10);
        }
    }
}

TEST_CASE("kernel algebra: the composed kernels satisfy L M = -L - M") {
    const double alpha = 0.7;
    const auto maps = similarity::omega_kernels(alpha, kHalfPi);
    const auto gp = shared_grid(kHalfPi);
    double worst = 0.0;
    for (double x = -1.4; x <= 1.45; x += 0.35)
        for (double y = -1.4; y <= 1.45; y += 0.35) {
            const Complex1D prod = [&maps, x, y](double z) {
                return maps.L.kernel(x, z) * maps.M.kernel(z, y);
            };
            const Complex lm = numerics::integrate(prod, *gp, {x, y});
            worst = std::max(worst, std::abs(lm + maps.L.kernel(x, y) + maps.M.kernel(x, y)));
        }
    // diagonal points, where both kernels take their mean values
    for (double x : {-1.2, -0.3, 0.45, 1.05}) {
        const Complex1D prod = [&maps, x](double z) {
            return maps.L.kernel(x, z) * maps.M.kernel(z, x);
        };
        const Complex lm = numerics::integrate(prod, *gp, {x});
        worst = std::max(worst, std::abs(lm + maps.L.kernel(x, x) + maps.M.kernel(x, x)));
    }
    CHECK(worst <= 1e-7);   // contract
    CHECK(worst <= 1e-12);  // observed headroom
}

TEST_CASE("the transform factorizes the constant-coefficient metric kernel") {
    const double alpha = 0.5;
    const auto maps = similarity::omega_kernels(alpha, kHalfPi);
    const auto theta = metric::kernel_constant(alpha, kHalfPi);
    const auto gp = shared_grid(kHalfPi);
    double worst = 0.0;
    for (double x = -1.3; x <= 1.35; x += 0.325)
        for (double y = -1.3; y <= 1.35; y += 0.325) {
            const Complex1D prod = [&maps, x, y](double z) {
                return std::conj(maps.L.kernel(z, x)) * maps.L.kernel(z, y);
            };
            const Complex ll = numerics::integrate(prod, *gp, {x, y});
            const Complex lhs = maps.L.kernel(x, y) + std::conj(maps.L.kernel(y, x)) + ll;
            worst = std::max(worst, std::abs(lhs - theta.kernel(x, y)));
        }
    CHECK(worst <= 1e-6);   // contract
    CHECK(worst <= 1e-12);  // observed headroom
}

TEST_CASE("analytic derivative identity of the inverse map") {
    const double alpha = 0.5;
    const auto maps = similarity::omega_kernels(alpha, kHalfPi);
    const auto gp = shared_grid(kHalfPi);
    const Complex1D f = [](double x) { return Complex(std::cos(1.3 * x), 0.4 * std::sin(x)); };
    const SampledFunction fs = numerics::sample(gp, f);
    const SampledFunction mf = numerics::apply_kernel(maps.M, fs);
    REQUIRE(mf.evaluator);
    const double h = 1e-5;
    double worst = 0.0;
    for (double x = -1.3; x <= 1.35; x += 0.2) {
        const Complex fd = (mf.evaluator(x + h) - mf.evaluator(x - h)) / (2.0 * h);
        const Complex rhs = -Complex(0.0, alpha) * (mf.evaluator(x) + f(x));
        worst = std::max(worst, std::abs(fd - rhs));
    }
    CHECK(worst <= 1e-6);  // limited by the finite-difference step
}

TEST_CASE("conjugated Galerkin matrix is real diagonal with the similar spectrum") {
    const auto gp = shared_grid(kHalfPi);
    for (double alpha : {0.5, 1.3}) {
        const auto maps = similarity::omega_kernels(alpha, kHalfPi);
        const Eigen::MatrixXcd A = similarity::conjugated_galerkin(maps, 24, *gp);
        REQUIRE(A.rows() == 24);

        CHECK(A.imag().cwiseAbs().maxCoeff() <= 1e-6);  // contract
        CHECK((A - A.transpose()).cwiseAbs().maxCoeff() <= 1e-6);
        CHECK(A.imag().cwiseAbs().maxCoeff() <= 1e-10);  // observed headroom
        CHECK((A - A.transpose()).cwiseAbs().maxCoeff() <= 1e-10);

        const auto hop = similarity::similar_operator(alpha, kHalfPi);
        double offdiag = 0.0, diag_err = 0.0;
        for (int m = 0; m < 24; ++m)
            for (int n = 0; n < 24; ++n) {
                if (m == n)
                    diag_err = std::max(diag_err, std::abs(A(m, m) - hop.eigenvalue(m)));
                else
                    offdiag = std::max(offdiag, std::abs(A(m, n)));
            }
        CHECK(offdiag <= 1e-6);
        CHECK(diag_err <= 1e-6);
        CHECK(offdiag <= 1e-10);
        CHECK(diag_err <= 1e-9);
    }

    // series maps do not carry the analytic identities the assembly needs
    const auto fam = neumann_family(6, kHalfPi);
    const auto series =
        similarity::omega_series(spectrum::BoundaryParams{kHalfPi}, fam, {}, 6, *gp);
    CHECK_THROWS_AS(similarity::conjugated_galerkin(series, 6, *gp), std::invalid_argument);
    const auto maps = similarity::omega_kernels(0.5, kHalfPi);
    CHECK_THROWS_AS(similarity::conjugated_galerkin(maps, 0, *gp), std::invalid_argument);
    const auto wrong = numerics::make_grid(1.0, 16, 12);
    CHECK_THROWS_AS(similarity::conjugated_galerkin(maps, 4, wrong), std::invalid_argument);
}

TEST_CASE("similar operator: eigenpairs, spectral action, quadratic form") {
    const double alpha = 0.5;
    const auto hop = similarity::similar_operator(alpha, kHalfPi);
    CHECK(hop.eigenvalue(0) == doctest::Approx(0.25).epsilon(1e-14));
    CHECK(hop.eigenvalue(1) == doctest::Approx(1.0).epsilon(1e-14));
    CHECK(hop.eigenvalue(2) == doctest::Approx(4.0).epsilon(1e-14));
    CHECK(hop.eigenvalue(3) == doctest::Approx(9.0).epsilon(1e-14));

    const Eigen::MatrixXd G = hop.galerkin(8);
    for (int m = 0; m < 8; ++m)
        for (int n = 0; n < 8; ++n) {
            if (m == n)
                CHECK(G(m, m) == doctest::Approx(hop.eigenvalue(m)).epsilon(1e-14));
            else
                CHECK(G(m, n) == 0.0);
        }

    const auto gp = shared_grid(kHalfPi);
    for (int n : {0, 1, 3}) {
        const SampledFunction chi = numerics::sample(gp, chi_fn(n, kHalfPi));
        const SampledFunction h_chi = hop.apply(chi, 64);
        // the topmost retained modes amplify quadrature orthogonality noise
        // by their eigenvalue, so the truncation at 64 carries ~1e-8
        const Eigen::VectorXcd resid = h_chi.values - hop.eigenvalue(n) * chi.values;
        CHECK(weighted_l2(*gp, resid) <= 1e-7);
        REQUIRE(h_chi.evaluator);
        CHECK(std::abs(h_chi.evaluator(0.37) -
                       hop.eigenvalue(n) * laplacian::mode(Kind::neumann, n, 0.37, kHalfPi)) <=
              1e-7);
    }

    const SampledFunction c0 = numerics::sample(gp, chi_fn(0, kHalfPi), dchi_fn(0, kHalfPi));
    const SampledFunction c2 = numerics::sample(gp, chi_fn(2, kHalfPi), dchi_fn(2, kHalfPi));
    CHECK(hop.form(c0) == doctest::Approx(0.25).epsilon(1e-12));
    CHECK(hop.form(c2) == doctest::Approx(4.0).epsilon(1e-12));

    CHECK_THROWS_AS(hop.eigenvalue(-1), std::invalid_argument);
    CHECK_THROWS_AS(hop.eigenfunction(-1), std::invalid_argument);
    CHECK_THROWS_AS(hop.galerkin(0), std::invalid_argument);
    CHECK_THROWS_AS(hop.apply(SampledFunction{}, 8), std::invalid_argument);
    const SampledFunction no_deriv = numerics::sample(gp, chi_fn(0, kHalfPi));
    CHECK_THROWS_AS(hop.form(no_deriv), std::invalid_argument);
    CHECK_THROWS_AS(similarity::similar_operator(0.5, -1.0), std::invalid_argument);
}

TEST_CASE("transported form reproduces the similar quadratic form") {
    const double alpha = 0.5;
    const auto maps = similarity::omega_kernels(alpha, kHalfPi);
    const auto p = spectrum::PTParams{alpha, 0.0, kHalfPi}.boundary();
    const auto gp = shared_grid(kHalfPi);

    const SampledFunction c0 = numerics::sample(gp, chi_fn(0, kHalfPi), dchi_fn(0, kHalfPi));
    const SampledFunction c2 = numerics::sample(gp, chi_fn(2, kHalfPi), dchi_fn(2, kHalfPi));
    const Complex t0 = similarity::th_form_general(c0, maps, p);
    const Complex t2 = similarity::th_form_general(c2, maps, p);
    CHECK(std::abs(t0 - Complex(0.25)) <= 1e-8);
    CHECK(std::abs(t2 - Complex(4.0)) <= 1e-7);
    CHECK(std::abs(t0.imag()) <= 1e-12);
    CHECK(std::abs(t2.imag()) <= 1e-12);

    // generic sample: the full boundary-corrected form collapses to
    // ||psi'||^2 + alpha^2 |<chi_0, psi>|^2
    const SampledFunction gen = numerics::sample(
        gp,
        [](double x) { return Complex(std::exp(0.2 * x) * std::cos(x), 0.3 * std::sin(x)); },
        [](double x) {
            return Complex(0.2 * std::exp(0.2 * x) * std::cos(x) - std::exp(0.2 * x) * std::sin(x),
                           0.3 * std::cos(x));
        });
    const Complex t = similarity::th_form_general(gen, maps, p);
    const auto hop = similarity::similar_operator(alpha, kHalfPi);
    const double ref = hop.form(gen);
    CHECK(std::abs(t - Complex(ref)) <= 1e-10 * (1.0 + ref));
}

TEST_CASE("transported form validates its inputs") {
    const auto maps = similarity::omega_kernels(0.5, kHalfPi);
    const auto p = spectrum::PTParams{0.5, 0.0, kHalfPi}.boundary();
    const auto gp = shared_grid(kHalfPi);

    const SampledFunction no_deriv = numerics::sample(gp, chi_fn(1, kHalfPi));
    CHECK_THROWS_AS(similarity::th_form_general(no_deriv, maps, p), std::invalid_argument);

    SampledFunction no_eval = numerics::sample(gp, chi_fn(1, kHalfPi), dchi_fn(1, kHalfPi));
    no_eval.evaluator = nullptr;
    CHECK_THROWS_AS(similarity::th_form_general(no_eval, maps, p), std::invalid_argument);

    CHECK_THROWS_AS(similarity::th_form_general(SampledFunction{}, maps, p),
                    std::invalid_argument);

    const auto fam = neumann_family(4, kHalfPi);
    const auto series =
        similarity::omega_series(spectrum::BoundaryParams{kHalfPi}, fam, {}, 4, *gp);
    const SampledFunction ok = numerics::sample(gp, chi_fn(1, kHalfPi), dchi_fn(1, kHalfPi));
    CHECK_THROWS_AS(similarity::th_form_general(ok, series, p), std::invalid_argument);
}

TEST_CASE("series maps from a self-adjoint family collapse to the identity") {
    const auto gp = shared_grid(kHalfPi);
    const auto fam = neumann_family(12, kHalfPi);
    const auto maps =
        similarity::omega_series(spectrum::BoundaryParams{kHalfPi}, fam, {}, 12, *gp);
    CHECK(maps.source == "series");
    CHECK(maps.basis == "neumann");
    CHECK(std::isnan(maps.alpha));
    REQUIRE(maps.L.prebuilt);
    REQUIRE(maps.M.prebuilt);
    CHECK(maps.L.prebuilt->cwiseAbs().maxCoeff() <= 1e-12);
    CHECK(maps.M.prebuilt->cwiseAbs().maxCoeff() <= 1e-12);
    CHECK(std::abs(maps.L.kernel(0.3, -0.7)) <= 1e-12);
    CHECK(std::abs(maps.M.kernel(-1.1, 0.2)) <= 1e-12);

    // supplying the Neumann basis explicitly reproduces the default
    const auto custom = similarity::omega_series(
        spectrum::BoundaryParams{kHalfPi}, fam,
        [](int n) { return chi_fn(n, kHalfPi); }, 12, *gp);
    CHECK(custom.basis == "custom");
    CHECK((*custom.L.prebuilt - *maps.L.prebuilt).cwiseAbs().maxCoeff() <= 1e-14);
}

TEST_CASE("series maps converge pointwise to the closed kernels") {
    const double alpha = 0.5;
    const auto gp = shared_grid(kHalfPi);
    const auto closed = similarity::omega_kernels(alpha, kHalfPi);
    const auto pt = spectrum::PTParams{alpha, 0.0, kHalfPi}.boundary();
    const auto modes = spectrum::pt_exact_modes(alpha, kHalfPi, 1500);
    const auto maps = similarity::omega_series(pt, modes, {}, 1500, *gp);

    double worst = 0.0;
    for (double x = -1.4; x <= 1.45; x += 0.35)
        for (double y = -1.4; y <= 1.45; y += 0.35)
            worst = std::max(worst, std::abs(maps.L.kernel(x, y) - closed.L.kernel(x, y)));
    CHECK(worst <= 1e-3);  // contract; the truncation tail dominates

    const Eigen::MatrixXcd closed_nystrom = numerics::nystrom_matrix(closed.L, *gp);
    CHECK((closed_nystrom - *maps.L.prebuilt).cwiseAbs().maxCoeff() <= 5e-4);
}

TEST_CASE("series maps stabilize in Hilbert-Schmidt norm") {
    const auto gp = shared_grid(kHalfPi);

    // closed kernels: finite and grid-stable
    const auto closed = similarity::omega_kernels(0.5, kHalfPi);
    const double hs_l = numerics::hs_norm(closed.L, *gp);
    const double hs_m = numerics::hs_norm(closed.M, *gp);
    CHECK(hs_l == doctest::Approx(1.066768003).epsilon(1e-8));
    CHECK(hs_m == doctest::Approx(1.483611017).epsilon(1e-8));
    const auto coarse = numerics::make_grid(kHalfPi, 8, 12);
    CHECK(std::abs(numerics::hs_norm(closed.L, coarse) - hs_l) <= 1e-9);
    CHECK(std::abs(numerics::hs_norm(closed.M, coarse) - hs_m) <= 1e-9);

    // truncated series approach the closed transform
    const auto pt = spectrum::PTParams{0.5, 0.0, kHalfPi}.boundary();
    const auto modes = spectrum::pt_exact_modes(0.5, kHalfPi, 800);
    for (int n_terms : {400, 800}) {
        const auto maps = similarity::omega_series(pt, modes, {}, n_terms, *gp);
        CHECK(std::abs(hs_from_prebuilt(maps.L, *gp) - hs_l) <= 5e-3 * hs_l);
    }

    // away from the antisymmetric family: stabilizes within 1% when the
    // truncation doubles
    const spectrum::BoundaryParams p{kHalfPi, Complex(1.0, 0.3), Complex(2.0, 0.0)};
    const auto found = spectrum::find_eigenvalues(p, 799);
    REQUIRE(static_cast<int>(found.triples.size()) >= 800);
    const auto m400 = similarity::omega_series(p, found.triples, {}, 400, *gp);
    const auto m800 = similarity::omega_series(p, found.triples, {}, 800, *gp);
    const double h400 = hs_from_prebuilt(m400.L, *gp);
    const double h800 = hs_from_prebuilt(m800.L, *gp);
    CHECK(std::abs(h800 - h400) <= 0.01 * h800);  // contract
    CHECK(h400 == doctest::Approx(1.662178932).epsilon(1e-6));
    CHECK(h800 == doctest::Approx(1.658417087).epsilon(1e-6));
}

TEST_CASE("series maps validate their inputs") {
    const auto gp = shared_grid(kHalfPi);
    const auto fam = neumann_family(6, kHalfPi);
    const spectrum::BoundaryParams p{kHalfPi};

    CHECK_THROWS_AS(similarity::omega_series(p, fam, {}, 0, *gp), std::invalid_argument);
    CHECK_THROWS_AS(similarity::omega_series(p, fam, {}, 7, *gp), std::invalid_argument);
    const auto wrong = numerics::make_grid(1.0, 16, 12);
    CHECK_THROWS_AS(similarity::omega_series(p, fam, {}, 6, wrong), std::invalid_argument);

    std::vector<spectrum::EigenTriple> bare(3);
    CHECK_THROWS_AS(similarity::omega_series(p, bare, {}, 3, *gp), std::invalid_argument);

    // degenerate pairs are rejected exactly as in biorthonormalization
    auto defective = fam;
    defective[1].algebraic_multiplicity = 2;
    CHECK_THROWS_AS(similarity::omega_series(p, defective, {}, 6, *gp), std::runtime_error);

    auto skew = fam;
    skew[2].phi = chi_fn(3, kHalfPi);  // orthogonal pair: vanishing pairing
    CHECK_THROWS_AS(similarity::omega_series(p, skew, {}, 6, *gp), std::runtime_error);
}

TEST_CASE("intertwining with the similar operator on the eigenbasis") {
    const double alpha = 0.5;
    const auto maps = similarity::omega_kernels(alpha, kHalfPi);
    const auto hop = similarity::similar_operator(alpha, kHalfPi);
    const auto gp = shared_grid(kHalfPi);
    const auto modes = spectrum::pt_exact_modes(alpha, kHalfPi, 9);
    double worst = 0.0;
    for (int n = 0; n <= 8; ++n) {
        const SampledFunction psi = numerics::sample(gp, modes[static_cast<std::size_t>(n)].psi());
        const SampledFunction omega_psi = apply_one_plus(maps.L, psi);
        const SampledFunction h_omega_psi = hop.apply(omega_psi, 64);
        const Eigen::VectorXcd r =
            modes[static_cast<std::size_t>(n)].lambda * omega_psi.values - h_omega_psi.values;
        worst = std::max(worst, weighted_l2(*gp, r));
    }
    CHECK(worst <= 1e-6);  // contract
    CHECK(worst <= 1e-7);  // observed headroom (64-mode truncation of h)
}

TEST_CASE("degeneracy diagnostics at exceptional couplings") {
    const auto grid = numerics::make_grid(kHalfPi, 16, 12);
    const auto rep = similarity::degeneracy_report(1.0, kHalfPi, grid);

    CHECK(rep.m == 1);
    CHECK(rep.lambda == Complex(1.0, 0.0));
    CHECK(std::abs(rep.char_value) <= 1e-12);
    CHECK(std::abs(rep.char_derivative) <= 1e-9);
    CHECK(std::abs(rep.char_second_derivative - Complex(-M_PI)) <= 1e-6);
    CHECK(rep.H_algebraic == 2);
    CHECK(rep.H_geometric == 1);
    CHECK(rep.h_geometric == 2);

    // single eigenfunction: the decaying exponential branch
    for (double x : {-1.2, 0.0, 0.3, 1.4}) {
        const Complex expect = std::exp(Complex(0.0, -(x + kHalfPi))) / std::sqrt(kHalfPi);
        CHECK(std::abs(rep.H_eigenfunction(x) - expect) <= 1e-12);
    }

    // the Jordan partner solves (H - lambda) g = eigenfunction; cross-check
    // with an independent finite-difference second derivative
    CHECK(rep.jordan_residual <= 1e-12);
    const double h = 1e-5;
    double fd_worst = 0.0;
    for (double x = -1.3; x <= 1.35; x += 0.275) {
        const Complex gpp =
            (rep.H_jordan_vector(x + h) - 2.0 * rep.H_jordan_vector(x) +
             rep.H_jordan_vector(x - h)) /
            (h * h);
        const Complex res = -gpp - rep.lambda * rep.H_jordan_vector(x) - rep.H_eigenfunction(x);
        fd_worst = std::max(fd_worst, std::abs(res));
    }
    CHECK(fd_worst <= 1e-4);

    REQUIRE(rep.h_eigenfunctions.size() == 2);
    for (double x : {-0.8, 0.1, 1.2}) {
        CHECK(std::abs(rep.h_eigenfunctions[0](x) -
                       Complex(laplacian::mode(Kind::neumann, 0, x, kHalfPi))) <= 1e-14);
        CHECK(std::abs(rep.h_eigenfunctions[1](x) -
                       Complex(laplacian::mode(Kind::neumann, 1, x, kHalfPi))) <= 1e-14);
    }

    // the transform collapses: one singular direction, far below the bulk
    CHECK(rep.omega_min_singular >= 1e-6);
    CHECK(rep.omega_min_singular <= 1e-4);
    CHECK(rep.omega_rank_deficiency == 1);
    CHECK_FALSE(rep.omega_invertible);

    const auto rep2 = similarity::degeneracy_report(2.0, kHalfPi, grid);
    CHECK(rep2.m == 2);
    CHECK(rep2.H_algebraic == 2);
    CHECK(rep2.H_geometric == 1);
    CHECK(rep2.h_geometric == 2);
    CHECK(std::abs(rep2.char_second_derivative - Complex(M_PI / 4.0)) <= 1e-6);
    CHECK(rep2.jordan_residual <= 1e-12);
    CHECK(rep2.omega_rank_deficiency == 1);
    CHECK_FALSE(rep2.omega_invertible);

    const auto rep3 = similarity::degeneracy_report(3.0, kHalfPi, grid);
    CHECK(std::abs(rep3.char_second_derivative - Complex(-M_PI / 9.0)) <= 1e-6);
    CHECK_FALSE(rep3.omega_invertible);
}

TEST_CASE("degeneracy diagnostics reject regular couplings") {
    const auto grid = numerics::make_grid(kHalfPi, 16, 12);
    CHECK_THROWS_AS(similarity::degeneracy_report(0.5, kHalfPi, grid), std::invalid_argument);
    CHECK_THROWS_AS(similarity::degeneracy_report(0.0, kHalfPi, grid), std::invalid_argument);
    CHECK_THROWS_AS(similarity::degeneracy_report(1.001, kHalfPi, grid), std::invalid_argument);
    CHECK_THROWS_AS(similarity::degeneracy_report(1.0, -1.0, grid), std::invalid_argument);
}
