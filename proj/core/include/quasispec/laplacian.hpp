#pragma once

#include "quasispec/numerics.hpp"

#include <utility>

/// Dirichlet and Neumann Laplacians on (-a, a): normalized eigenmodes, the
/// factorizing momentum identities, resolvent (Green) kernels, and operators
/// that are diagonal in one of the mode bases.
namespace quasispec::laplacian {

using numerics::Complex;
using numerics::KernelOperator;
using numerics::QuadratureGrid;

enum class Kind { dirichlet, neumann };

/// k_n = n pi / (2a).
double mode_wavenumber(int n, double a);

/// Normalized eigenmode: sin-family for Dirichlet (zero for n = 0), cos-family
/// for Neumann (constant mode for n = 0).
double mode(Kind kind, int n, double x, double a);

/// d/dx of the eigenmode.
double mode_derivative(Kind kind, int n, double x, double a);

/// Quadrature residuals of the ladder identities linking the two families:
/// first  ||(chi_n^D)' - k_n chi_n^N||, second ||(chi_n^N)' + k_n chi_n^D||.
std::pair<double, double> momentum_identity_check(int n, double a, const QuadratureGrid& grid);

/// Resolvent kernel of the Dirichlet/Neumann Laplacian at energy k^2, in the
/// factorized sine/cosine form. Throws std::runtime_error when sin(2ka) is
/// within 1e-12 of zero, naming the nearest spectral point k_n^2.
Complex green(Kind kind, Complex k, double x, double y, double a);

/// Dirichlet resolvent at k = 0 (piecewise-linear kernel).
double green_zero_dirichlet(double x, double y, double a);

/// Reduced Neumann resolvent at k = 0 on the complement of the constant mode.
double green_neumann_reduced(double x, double y, double a);

/// Squared coefficients C_n^2 of a basis rescaling, with uniform two-sided
/// bounds 0 < lower <= C_n <= upper required for a bounded inverse.
struct CoefficientSequence {
    std::function<double(int)> c_squared;
    double lower = 0.5;
    double upper = 2.0;
};

/// Finite-rank realization of J = sum_n C_n^2 chi_n <chi_n, .> truncated at N
/// terms, with the Nystrom matrix prebuilt on the given grid. Throws
/// std::invalid_argument if any coefficient violates the stated bounds.
KernelOperator j_operator(Kind kind, const CoefficientSequence& C, int N,
                          const QuadratureGrid& grid);

}  // namespace quasispec::laplacian
