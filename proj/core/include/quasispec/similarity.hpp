#pragma once

#include "quasispec/numerics.hpp"
#include "quasispec/spectrum.hpp"

#include <string>
#include <vector>

/// Similarity transform Omega = I + L mapping the Robin operator with
/// c_pm = i alpha onto a real operator h = Omega H Omega^{-1}: closed-form
/// kernels for L and M = Omega^{-1} - I, finite-rank series realizations
/// built from any biorthogonal eigenfamily, the similar operator h itself,
/// the sesquilinear form of H transported through the maps, and diagnostics
/// at the exceptional parameters alpha = k_m where no bounded similarity
/// exists.
namespace quasispec::similarity {

using numerics::Complex;
using numerics::Complex1D;
using numerics::KernelOperator;
using numerics::QuadratureGrid;
using numerics::SampledFunction;
using spectrum::BoundaryParams;
using spectrum::EigenTriple;

/// The pair of integral kernels realizing a similarity transform and its
/// inverse: Omega = I + L and Omega^{-1} = I + M. The reference basis the
/// transform maps onto is the Neumann cosine family, and no extra unitary
/// factor is involved (the transform is exactly I + compact).
struct SimilarityMaps {
    double alpha = 0.0;  ///< boundary coupling; NaN when built from a series
    double a = M_PI / 2.0;
    KernelOperator L;  ///< Omega - I
    KernelOperator M;  ///< Omega^{-1} - I
    std::string source = "closed";  ///< "closed" or "series"
    std::string basis = "neumann";  ///< target basis of the transform
    bool u_is_identity = true;      ///< no unitary factor beyond I + L
};

/// Closed-form kernels of Omega - I and Omega^{-1} - I for the antisymmetric
/// purely imaginary boundary data c_pm = i alpha. Both kernels jump across
/// the diagonal y = x; on the diagonal the closures return the mean of the
/// one-sided limits. alpha = 0 yields exact zero kernels (Omega = I). Throws
/// std::invalid_argument when sin(2 alpha a) is within 1e-10 of zero with
/// alpha != 0, naming the nearest degenerate coupling k_n.
SimilarityMaps omega_kernels(double alpha, double a);

/// Finite-rank realizations of Omega - I and Omega^{-1} - I from the first
/// n_terms members of a biorthogonal eigenfamily:
///   Omega_N - I   = sum_n e_n <phi_n - e_n, .>,
///   Omega_N^{-1} - I = sum_n (psi_n - e_n) <e_n, .>,
/// where e_n is the reference basis (the Neumann cosine mode of the same
/// index when `basis` is null). The supplied modes' stored scalings are used
/// verbatim after the pairings <phi_n, psi_n> = 1 are enforced on an
/// internally refined grid fine enough for the fastest retained mode; the
/// resulting maps are a property of the biorthogonal family, not of any
/// normalization convention. Both operators carry prebuilt Nystrom matrices
/// for `grid` plus pointwise closures. Throws std::invalid_argument on bad
/// sizes or a half-width mismatch, and std::runtime_error on a degenerate
/// pair (multiplicity 2 or pairing below 1e-10 in modulus).
SimilarityMaps omega_series(const BoundaryParams& p,
                            const std::vector<EigenTriple>& modes,
                            const std::function<Complex1D(int)>& basis, int n_terms,
                            const QuadratureGrid& grid);

/// The real operator similar to H for c_pm = i alpha:
///   h f = -f'' + alpha^2 chi_0 <chi_0, f>
/// with Neumann boundary conditions, i.e. the Neumann Laplacian whose bottom
/// eigenvalue 0 is lifted to alpha^2 by a rank-one perturbation. Spectrum
/// {alpha^2, k_1^2, k_2^2, ...} with the Neumann cosine modes as
/// eigenfunctions.
struct SimilarOperatorH {
    double alpha = 0.0;
    double a = M_PI / 2.0;

    /// alpha^2 for n = 0, k_n^2 for n >= 1.
    double eigenvalue(int n) const;

    /// The Neumann cosine mode chi_n (real-valued, returned as Complex1D).
    Complex1D eigenfunction(int n) const;

    /// Spectral action: h f = sum_{n < n_modes} eigenvalue(n) chi_n <chi_n, f>
    /// with quadrature coefficients on f's grid. The result carries an
    /// off-grid evaluator. Throws std::invalid_argument when f has no grid.
    SampledFunction apply(const SampledFunction& f, int n_modes = 64) const;

    /// Closed quadratic form t_h[psi] = ||psi'||^2 + alpha^2 |<chi_0, psi>|^2.
    /// Requires derivative values; throws std::invalid_argument otherwise.
    double form(const SampledFunction& psi) const;

    /// Matrix <chi_m, h chi_n> for m, n < size: diag(alpha^2, k_1^2, ...),
    /// assembled from the rank-one structure (real and exactly diagonal).
    Eigen::MatrixXd galerkin(int size) const;
};

/// Validates a > 0 and returns the similar operator for coupling alpha.
SimilarOperatorH similar_operator(double alpha, double a);

/// Sesquilinear form of H evaluated through the similarity maps:
///   t[psi] = <(I + L*) psi', ((I + M) psi)'>
///            + c_+ conj((psi + L* psi)(a)) (psi + M psi)(a)
///            - c_- conj((psi + L* psi)(-a)) (psi + M psi)(-a),
/// with the derivatives of L* psi and M psi taken from the analytic
/// first-order identities of the closed kernels (no numerical
/// differentiation). Requires closed-form maps and a sample carrying both
/// derivative values and an off-grid evaluator; throws std::invalid_argument
/// otherwise. For boundary data consistent with the maps the value is real
/// and equals ||psi'||^2 + alpha^2 |<chi_0, psi>|^2.
Complex th_form_general(const SampledFunction& psi, const SimilarityMaps& maps,
                        const BoundaryParams& p);

/// Matrix <chi_m, Omega H Omega^{-1} chi_n> for m, n < size. H acts on
/// (I + M) chi_n through the analytic second-order identity of the M kernel,
/// and the x-integral of L against chi_m is carried out in closed form, so
/// the only quadrature is one split-panel application of M per column and
/// the final weighted sums. Requires closed-form maps; throws
/// std::invalid_argument otherwise.
Eigen::MatrixXcd conjugated_galerkin(const SimilarityMaps& maps, int size,
                                     const QuadratureGrid& grid);

/// Structure of the eigenvalue lambda = k_m^2 at the exceptional coupling
/// alpha = k_m, where H has a size-2 Jordan block while the would-be similar
/// real operator h keeps two independent eigenfunctions -- so Omega = I + L
/// loses invertibility and no bounded similarity between H and h exists.
struct DegeneracyReport {
    int m = 0;          ///< the index with alpha = k_m
    double alpha = 0.0;
    double a = 0.0;
    Complex lambda;     ///< the degenerate eigenvalue k_m^2 = alpha^2

    Complex char_value;              ///< characteristic function at lambda (~0)
    Complex char_derivative;         ///< first derivative at lambda (~0)
    Complex char_second_derivative;  ///< second derivative (away from 0)
    int H_algebraic = 0;             ///< zero count of a small enclosing box: 2
    int H_geometric = 0;             ///< 2 - rank of the 2x2 boundary matrix: 1
    int h_geometric = 0;             ///< eigenvalue count of h at lambda: 2

    Complex1D H_eigenfunction;  ///< the single eigenfunction of H at lambda
    Complex1D H_jordan_vector;  ///< g with (H - lambda) g = eigenfunction
    double jordan_residual = 0.0;  ///< quadrature + boundary residual of that chain

    std::vector<Complex1D> h_eigenfunctions;  ///< {chi_0, chi_m}

    double omega_min_singular = 0.0;  ///< smallest singular value of I + L on grid
    int omega_rank_deficiency = 0;    ///< singular values below 1e-3 of the largest
    bool omega_invertible = true;     ///< false when the smallest value collapses
};

/// Diagnostics at alpha = k_m (within 1e-8 relative). Throws
/// std::invalid_argument when alpha is not an exceptional coupling for this
/// half-width.
DegeneracyReport degeneracy_report(double alpha, double a, const QuadratureGrid& grid);

}  // namespace quasispec::similarity
