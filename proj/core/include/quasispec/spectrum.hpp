#pragma once

#include "quasispec/numerics.hpp"

#include <cmath>
#include <optional>
#include <vector>

/// Spectral data of the operator -d^2/dx^2 on (-a, a) with complex Robin
/// boundary conditions psi'(+-a) + c_pm psi(+-a) = 0: an entire characteristic
/// function, a certified eigenvalue search based on argument-principle winding
/// counts, explicit eigenfunction pairs, and structural symmetry predicates.
namespace quasispec::spectrum {

using numerics::Complex;
using numerics::Complex1D;
using numerics::QuadratureGrid;

/// Robin boundary data: psi'(+-a) + c_pm psi(+-a) = 0 on (-a, a).
struct BoundaryParams {
    double a = M_PI / 2.0;
    Complex c_minus{0.0, 0.0};
    Complex c_plus{0.0, 0.0};
};

/// Antisymmetric complexified parameters c_pm = i alpha +- beta.
struct PTParams {
    double alpha = 0.0;
    double beta = 0.0;
    double a = M_PI / 2.0;

    BoundaryParams boundary() const {
        return {a, Complex(-beta, alpha), Complex(beta, alpha)};
    }
};

/// Detects c_minus = -conj(c_plus) and extracts (alpha, beta) when it holds.
std::optional<PTParams> as_pt(const BoundaryParams& p);

struct SymmetryReport {
    bool self_adjoint = false;    ///< both c_pm real
    bool pt_symmetric = false;    ///< c_minus = -conj(c_plus)
    bool p_self_adjoint = false;  ///< coincides with pt_symmetric
    bool t_self_adjoint = true;   ///< holds for every parameter choice
};

SymmetryReport symmetry_report(const BoundaryParams& p);

/// True iff lambda = 0 is an eigenvalue: 2a c_- c_+ + c_- - c_+ = 0 within tol.
bool zero_eigenvalue_predicate(const BoundaryParams& p, double tol = 1e-12);

/// Entire characteristic function (c_- c_+ + lambda) S + (c_- - c_+) C with
/// S = sin(2a sqrt(lambda))/sqrt(lambda), C = cos(2a sqrt(lambda)); its zeros
/// are exactly the eigenvalues, with matching multiplicities.
Complex char_fn(Complex lambda, const BoundaryParams& p);

/// Same function written in the antisymmetric parameters:
/// (lambda - alpha^2 - beta^2) S - 2 beta C.
Complex char_fn_pt(Complex lambda, const PTParams& pt);

/// d/dlambda of char_fn by central differences with step 1e-7 (1 + |lambda|).
Complex char_fn_derivative(Complex lambda, const BoundaryParams& p);

/// One eigenvalue with closed-form eigenfunction evaluators. psi_hat is the
/// raw right eigenfunction; psi() applies the normalization A fixed by
/// biorthonormalize so that <phi_n, psi_n> = 1.
struct EigenTriple {
    int index = 0;
    Complex l;        ///< principal sqrt of lambda (Re >= 0)
    Complex lambda;
    int algebraic_multiplicity = 1;
    Complex A{1.0, 0.0};
    Complex epsilon;  ///< l - k_index

    Complex1D psi_hat, psi_hat_deriv;
    Complex1D phi, phi_deriv;

    Complex1D psi() const;
    Complex1D psi_deriv() const;
};

struct CertifiedRectangle {
    Complex lo, hi;  ///< opposite corners (Re/Im intervals)
    int winding = 0;
};

struct Certification {
    CertifiedRectangle region;                 ///< search region and its count
    std::vector<CertifiedRectangle> isolating; ///< one rectangle per root
    bool certified = false;
};

struct SpectrumResult {
    BoundaryParams params;
    std::vector<EigenTriple> triples;
    Certification certification;
};

/// All eigenvalues with Re lambda below ((n_max + 1/2) pi / (2a))^2, found by
/// asymptotic-seeded Newton iteration and completed/certified by recursive
/// winding-count subdivision. Throws std::runtime_error if certification
/// fails. Multiplicity-2 eigenvalues are reported once, flagged, and carry a
/// single eigenfunction.
SpectrumResult find_eigenvalues(const BoundaryParams& p, int n_max);

/// Number of zeros of char_fn (with multiplicity) inside the open rectangle,
/// by the argument principle; edges are nudged when a zero sits on them.
int count_zeros(const BoundaryParams& p, double re_lo, double re_hi, double im_lo,
                double im_hi);

/// Fills the eigenfunction evaluators of a triple from its eigenvalue.
void attach_eigenfunctions(EigenTriple& t, const BoundaryParams& p);

/// Sets each A_n = 1 / <phi_n, psihat_n> so that <phi_n, psi_n> = 1. Throws
/// std::runtime_error on a degenerate pair (multiplicity 2 or pairing below
/// 1e-10 in modulus).
void biorthonormalize(std::vector<EigenTriple>& triples, const QuadratureGrid& grid);

/// Closed-form eigensystem for c_pm = i alpha (beta = 0), 0 < alpha distinct
/// from every k_n: lambda_0 = alpha^2 with e^{-i alpha (x+a)}, lambda_n = k_n^2
/// with cos/sin combinations, and explicit normalizations. Throws
/// std::runtime_error when alpha is within 1e-12 of a k_n.
std::vector<EigenTriple> pt_exact_modes(double alpha, double a, int count);

}  // namespace quasispec::spectrum
