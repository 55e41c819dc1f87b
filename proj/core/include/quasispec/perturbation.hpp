#pragma once

#include "quasispec/numerics.hpp"
#include "quasispec/spectrum.hpp"

#include <vector>

/// Finite-section (Galerkin) realization of the Robin operator plus a bounded
/// potential in the Neumann cosine basis, the basis-mapping matrix Omega_V
/// with its identity-plus-Hilbert-Schmidt witness, eigenvalue asymptotics,
/// and the Liouville transform reducing a general uniformly positive
/// Sturm-Liouville coefficient to potential form.
namespace quasispec::perturbation {

using numerics::Complex;
using numerics::Complex1D;
using numerics::QuadratureGrid;
using spectrum::BoundaryParams;

/// M x M section of H + V in the Neumann basis. The boundary terms of the
/// quadratic form enter exactly through the basis boundary values
/// (chi_n(a) = (-1)^n / sqrt(a) for n >= 1, chi_n(-a) = 1 / sqrt(a),
/// chi_0(+-a) = 1 / sqrt(2a)); the potential enters by quadrature on an
/// internally refined grid that resolves the fastest retained product mode.
struct GalerkinSystem {
    BoundaryParams params;
    int dimension = 0;
    bool has_potential = false;
    Eigen::MatrixXcd matrix;       ///< A_mn = k_n^2 d_mn + boundary + <chi_m, V chi_n>
    Eigen::VectorXcd eigenvalues;  ///< sorted by real part, then imaginary
    Eigen::MatrixXcd right;        ///< columns xi_n (unit Euclidean norm)
    Eigen::MatrixXcd left;         ///< columns eta_n with eta_n^* xi_m = delta_nm
};

/// Assembles and diagonalizes the section. V may be empty (V = 0). Throws
/// std::invalid_argument for M < 4 or a half-width mismatch with the grid.
GalerkinSystem galerkin_matrix(const BoundaryParams& p, const Complex1D& V, int M,
                               const QuadratureGrid& grid);

/// The basis-mapping matrix with Omega_V xi_n = e_n, row-normalized to a unit
/// diagonal (which fixes the eigenvector scale freedom and makes V = 0,
/// c_pm = 0 give exactly the identity). Throws std::runtime_error when two
/// eigenvalues are closer than 1e-9: the map requires a simple spectrum.
Eigen::MatrixXcd omega_v(const GalerkinSystem& sys);

/// Frobenius distance ||Omega_V - I||_F at dimensions M and 2M and its
/// relative change: the finite-dimensional witness that the transformation
/// differs from the identity by a Hilbert-Schmidt tail.
struct OmegaTailReport {
    int m_small = 0;
    int m_large = 0;
    double hs_small = 0.0;
    double hs_large = 0.0;
    double relative_change = 0.0;  ///< |hs_large - hs_small| / hs_small
};

OmegaTailReport omega_tail_report(const BoundaryParams& p, const Complex1D& V, int M,
                                  const QuadratureGrid& grid);

/// lambda_n - k_n^2 for the interior indices n <= M/2 (the upper half of the
/// section is polluted by truncation); the sequence approaches
/// (c_+ - c_-) / a. Requires a V = 0 system; throws std::invalid_argument
/// otherwise.
std::vector<Complex> asymptotic_gap(const GalerkinSystem& sys);

/// Coefficient rho of -(d/dx) rho (d/dx), supplied with two derivatives and
/// a uniform two-sided positivity bound 1/C <= rho <= C.
struct CoefficientData {
    numerics::Real1D rho;
    numerics::Real1D drho;
    numerics::Real1D ddrho;
    double bound = 1.0;  ///< the constant C >= 1
};

/// Liouville change of variables y = f(x) = int_0^x rho^{-1/2} carrying
/// -(rho psi')' on (-a, a) with rho(+-a) psi'(+-a) + c_pm psi(+-a) = 0 onto
/// -phi'' + W phi on (f(-a), f(a)) with phi'(y_pm) + ctilde_pm phi(y_pm) = 0.
struct LiouvilleData {
    double f_minus = 0.0;   ///< transformed left endpoint f(-a)
    double f_plus = 0.0;    ///< transformed right endpoint f(+a)
    Complex c_tilde_minus;  ///< (c_- - rho'(-a)/4) / sqrt(rho(-a))
    Complex c_tilde_plus;   ///< (c_+ - rho'(+a)/4) / sqrt(rho(+a))

    numerics::Real1D f;          ///< y = f(x), by panel quadrature
    numerics::Real1D f_inverse;  ///< x(y), by monotone bisection
    numerics::Real1D potential;  ///< W(y) = ((1/4) rho'' - (1/16) rho'^2/rho)(x(y))
};

/// Computes the transform. Throws std::invalid_argument when any sampler is
/// missing, the bound is below 1, or rho leaves [1/C, C] at a checked node.
LiouvilleData liouville_transform(const CoefficientData& data, const BoundaryParams& p);

}  // namespace quasispec::perturbation
