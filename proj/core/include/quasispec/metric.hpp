#pragma once

#include "quasispec/laplacian.hpp"
#include "quasispec/numerics.hpp"
#include "quasispec/spectrum.hpp"

#include <functional>
#include <string>
#include <vector>

/// Metric operators Theta = I + K for the Robin Laplacian with antisymmetric
/// complexified boundary conditions c_pm = i alpha +- beta: truncated spectral
/// series, closed-form kernels, assembly from Neumann/Dirichlet base metrics,
/// the C involution, and verification reports (quasi-Hermiticity action
/// residuals, positivity margins, and the defining distributional PDE system).
namespace quasispec::metric {

using numerics::Complex;
using numerics::Kernel2D;
using numerics::KernelOperator;
using numerics::QuadratureGrid;
using numerics::SampledFunction;

/// A realized metric candidate Theta = I + K.
///
/// `metric_claimed` records whether positivity is asserted by theory for the
/// construction that produced the spec (closed constant/cchoice kernels and
/// non-degenerate assemblies); the general one-parameter family ships with
/// the claim unset and positivity re-checked numerically.
struct MetricSpec {
    std::string source;                    ///< construction that produced it
    KernelOperator K;                      ///< kernel of Theta - I
    std::function<double(int)> c_squared;  ///< series coefficients when known
    bool metric_claimed = true;
    bool degeneracy_warning = false;       ///< alpha collided with some k_n
};

/// Dense Theta = I + (Nystrom matrix of K) on the grid.
Eigen::MatrixXcd theta_matrix(const MetricSpec& spec, const QuadratureGrid& grid);

/// Smallest eigenvalue of the weighted-symmetrized realization of Theta.
double positivity_margin(const MetricSpec& spec, const QuadratureGrid& grid);

/// Truncated series metric: Theta_N = I + sum_{n<N} [ C_n^2 phi_n <phi_n, .>
/// - chi_n^N <chi_n^N, .> ] with the identity resolved over the Neumann basis.
/// For c_pm = i alpha the eigensystem is taken in closed form, scaled so that
/// C_n = 1 reproduces the constant-coefficient kernel; for general parameters
/// the located eigenfunctions are normalized to unit L2 norm. Throws on
/// coefficient-bound violations and on degenerate pairs.
MetricSpec theta_series(const spectrum::BoundaryParams& p,
                        const laplacian::CoefficientSequence& C, int N,
                        const QuadratureGrid& grid);

/// The same series built from explicitly supplied modes (truncation =
/// modes.size()); every left eigenfunction is rescaled to unit L2 norm on an
/// internally refined grid that resolves the fastest mode, so the n-th term
/// is scale- and phase-independent of the supplied mode normalization.
MetricSpec theta_series_from_modes(const std::vector<spectrum::EigenTriple>& modes,
                                   const laplacian::CoefficientSequence& C,
                                   const QuadratureGrid& grid);

/// Rank-N action of the bare series sum C_n^2 phi_n <phi_n, f> (no identity
/// part). On the span of the first N right eigenfunctions this is exact up to
/// quadrature, free of the Neumann-tail truncation error of the kernel form.
SampledFunction series_action(const std::vector<spectrum::EigenTriple>& modes,
                              const std::function<double(int)>& c_squared,
                              const SampledFunction& f);

/// The four explicit kernels combined by the assembly below (i = 1..4).
KernelOperator theta_kernel(int i, double alpha, double a);

/// Assembly Theta = J^N + C0^2 th1 + J^N th2 + J^D th3 from the shifted
/// kernels J^iota - I. Compositions are evaluated pointwise with panels split
/// at both kernel kinks. At alpha within 1e-10 of some k_n the operator is
/// still assembled but flagged and positivity is not claimed.
MetricSpec theta_prop41(double alpha, double a, double c0, const KernelOperator& jn_shifted,
                        const KernelOperator& jd_shifted, const QuadratureGrid& grid);

/// Variant Theta = J^N + C0^2 th1 + J^N th2 + p* J^N th4 with p* = -i d/dx,
/// which eliminates J^D at the price of the analytic x-derivative of the
/// shifted J^N kernel.
MetricSpec theta_prop41_theta4(double alpha, double a, double c0,
                               const KernelOperator& jn_shifted, const Kernel2D& jn_shifted_dx,
                               const QuadratureGrid& grid);

/// Shifted base metrics J^iota - I for the coefficient choice
/// C_n^2 = k_n^2/|k_n^2 - alpha^2| (n >= 1), C_0^2 = 2 alpha a / sin(2 alpha a):
/// alpha^2 G_N(alpha) + C_0^2 chi_0 <chi_0, .> for the Neumann kind and
/// alpha^2 G_D(alpha) for the Dirichlet kind.
KernelOperator cchoice_j_kernel(laplacian::Kind kind, double alpha, double a);

/// Analytic d/dx of the shifted Neumann kernel above (piecewise, mean on the
/// diagonal), as required by the th4 assembly.
Kernel2D cchoice_j_kernel_dx(double alpha, double a);

/// Constant-coefficient metric kernel (C_n = 1):
/// (i/a) e^{i alpha (x-y)/2} sin(alpha (x-y)/2)
/// + (i alpha/2a)(|y-x| - 2a) sgn(y-x) + (alpha^2/2a)(a^2 - xy - a|y-x|).
KernelOperator kernel_constant(double alpha, double a);

/// Metric kernel of the explicit coefficient choice:
/// alpha e^{-i alpha (y-x)} [tan(alpha a) - i sgn(y-x)]. Requires
/// alpha in (0, k_1); throws std::invalid_argument otherwise.
KernelOperator kernel_cchoice(double alpha, double a);

/// One-parameter family for c_pm = i alpha +- beta:
/// e^{i alpha (x-y) - beta|x-y|} [c + i alpha sgn(x-y)] with free real c.
KernelOperator kernel_general(double alpha, double beta, double c, double a);

/// D_n with P phi_n = D_n psi_n: D_0 = sin(2 alpha a)/(2 alpha a) (1 at
/// alpha = 0), D_n = (-1)^n (k_n^2 - alpha^2)/k_n^2.
double d_constant(int n, double alpha, double a);

/// Closed-form Hilbert-Schmidt norm of the general kernel:
/// sqrt((c^2 + alpha^2)(4 a beta + e^{-4 a beta} - 1)/(2 beta^2)), evaluated
/// cancellation-free; analytic limit sqrt(4 a^2 (c^2 + alpha^2)) at beta = 0.
double hs_norm_closed(double alpha, double beta, double c, double a);

/// MetricSpec wrappers for the closed kernels.
MetricSpec metric_constant(double alpha, double a);
MetricSpec metric_cchoice(double alpha, double a);
MetricSpec metric_general(double alpha, double beta, double c, double a);

/// The involution C = P + L: (Cf)(x) = f(-x) + int L(x,y) f(y) dy with
/// L(x,y) = alpha e^{-i alpha (y+x)} [tan(alpha a) - i sgn(y+x)].
struct COperator {
    double alpha = 0.0;
    double a = 0.0;
    KernelOperator L;  ///< jump across y = -x
};

/// Builds the involution for alpha in (0, k_1); throws std::invalid_argument
/// otherwise.
COperator kernel_c_operator(double alpha, double a);

/// Applies C to f; f must carry an evaluator (the parity part and the
/// anti-diagonal panel splits sample off-grid).
SampledFunction apply_c(const COperator& C, const SampledFunction& f);

/// Dense realization P + Nystrom(L) with P the node-reversal permutation.
Eigen::MatrixXcd c_matrix(const COperator& C, const QuadratureGrid& grid);

struct ModeResidual {
    int index = 0;
    Complex lambda;
    double c_squared = 1.0;  ///< specified, or estimated by projection
    double residual = 0.0;   ///< ||Theta psi_n - C_n^2 phi_n|| / ||C_n^2 phi_n||
    bool flagged = false;
};

struct QuasiHermiticityReport {
    std::vector<ModeResidual> modes;
    double max_residual = 0.0;
    double positivity_margin = 0.0;
    bool quasi_hermitian = true;  ///< no mode flagged
};

/// Spectral form of Theta H = H* Theta on the supplied biorthonormalized
/// modes: checks Theta psi_n parallel to phi_n mode by mode. When the spec
/// does not carry coefficients, C_n^2 is estimated by projecting onto phi_n,
/// so the residual measures pure collinearity failure (e.g. complex pairs).
QuasiHermiticityReport verify_quasi_hermiticity(const MetricSpec& spec,
                                                const std::vector<spectrum::EigenTriple>& modes,
                                                const QuadratureGrid& grid,
                                                double flag_tol = 1e-6);

/// Closed-form kernel with analytic one-sided partial derivatives; `side` is
/// the sign of x - y (0 selects the mean of the limits).
struct DifferentiableKernel {
    KernelOperator op;
    std::function<Complex(double, double, int)> value, dx, dy, dxx, dyy;
};

DifferentiableKernel kernel_general_differentiable(double alpha, double beta, double c, double a);
DifferentiableKernel kernel_constant_differentiable(double alpha, double a);

struct PdeResiduals {
    double interior = 0.0;        ///< max off-diagonal |(dxx - dyy) K|
    double boundary_strong = 0.0; ///< max_y |d_y K(x, +-a) + (i alpha +- beta) K|
    double boundary_weak = 0.0;   ///< weak Dirac identity on 5 polynomial tests
};

/// Verifies the wave equation, the strong boundary conditions in y, and the
/// weak (distributional) boundary conditions in x whose right side is the
/// point mass 2 i alpha delta(y -+ a).
PdeResiduals verify_pde_system(const DifferentiableKernel& K, double alpha, double beta,
                               double a, const QuadratureGrid& grid);

}  // namespace quasispec::metric
