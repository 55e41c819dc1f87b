#pragma once

#include <Eigen/Dense>
#include <complex>
#include <functional>
#include <memory>
#include <optional>
#include <vector>

/// Composite Gauss-Legendre quadrature on a symmetric interval (-a, a) and
/// Nystrom-style realizations of integral operators, including kernels with a
/// jump across the diagonal y = x or the anti-diagonal y = -x.
namespace quasispec::numerics {

using Complex = std::complex<double>;
using Real1D = std::function<double(double)>;
using Complex1D = std::function<Complex(double)>;
using Kernel2D = std::function<Complex(double, double)>;

/// Worker count used for row-parallel assembly; honours QUASISPEC_THREADS.
int thread_count();

/// Runs body(i) for i in [0, n), in parallel when profitable.
void parallel_for(std::size_t n, const std::function<void(std::size_t)>& body);

/// Gauss-Legendre nodes and weights on [-1, 1], computed by Newton iteration.
void gauss_legendre(int order, std::vector<double>& nodes, std::vector<double>& weights);

/// Composite quadrature rule: n_panels equal panels on (-a, a), each carrying
/// a Gauss-Legendre rule of the given order.
struct QuadratureGrid {
    double a = 1.0;
    int n_panels = 16;
    int order = 12;
    std::vector<double> nodes;    ///< all panel nodes, ascending
    std::vector<double> weights;  ///< matching weights; sums to 2a

    std::size_t size() const { return nodes.size(); }
};

/// Builds the composite rule; throws std::invalid_argument on bad shape.
QuadratureGrid make_grid(double a, int n_panels = 16, int order = 12);

/// Function known at the grid nodes, optionally with derivative values and
/// off-grid evaluators (needed by split-panel quadrature around kernel jumps).
struct SampledFunction {
    std::shared_ptr<const QuadratureGrid> grid;
    Eigen::VectorXcd values;
    std::optional<Eigen::VectorXcd> derivative_values;
    Complex1D evaluator;             ///< optional: f at arbitrary points
    Complex1D derivative_evaluator;  ///< optional: f' at arbitrary points
};

/// Tabulates f (and optionally f') on the grid, keeping the evaluators.
SampledFunction sample(std::shared_ptr<const QuadratureGrid> grid, Complex1D f,
                       Complex1D df = nullptr);

/// L2 pairing sum_i w_i conj(f_i) g_i; antilinear in the first argument.
Complex inner_product(const SampledFunction& f, const SampledFunction& g);

/// Quadrature L2 norm of f.
double norm(const SampledFunction& f);

/// Where a kernel is discontinuous: nowhere, across y = x, or across y = -x.
enum class JumpLocus { none, diagonal, antidiagonal };

/// Integral operator described by a pointwise kernel. On its jump locus the
/// kernel closure must return the mean of the two one-sided limits. A
/// finite-rank realization may carry a prebuilt Nystrom matrix for one grid.
struct KernelOperator {
    Kernel2D kernel;
    JumpLocus jump = JumpLocus::none;
    std::shared_ptr<const Eigen::MatrixXcd> prebuilt;       ///< optional cache
    std::shared_ptr<const QuadratureGrid> prebuilt_grid;    ///< grid of cache

    Complex operator()(double x, double y) const { return kernel(x, y); }
};

/// Nystrom matrix M_ij = w_j K(x_i, x_j); reuses the prebuilt cache when the
/// grid matches, otherwise assembles row-parallel.
Eigen::MatrixXcd nystrom_matrix(const KernelOperator& K, const QuadratureGrid& grid);

/// Integrates fn over (-a, a) using the panel layout of `layout`, with panel
/// edges forced at the interior cut points (so integrand kinks never cross a
/// panel).
Complex integrate(const Complex1D& fn, const QuadratureGrid& layout,
                  const std::vector<double>& cuts = {});

/// Applies the operator to f. Kernels with a jump are integrated with panels
/// split at the jump ordinate, which requires f to carry an evaluator; the
/// result then carries an evaluator as well. Smooth kernels fall back to the
/// Nystrom matrix product.
SampledFunction apply_kernel(const KernelOperator& K, const SampledFunction& f);

/// Hilbert-Schmidt norm sqrt(iint |K|^2) by 2-D composite quadrature, inner
/// panels split at the jump locus.
double hs_norm(const KernelOperator& K, const QuadratureGrid& grid);

/// Smallest eigenvalue of I + K realized as the weighted-symmetric matrix
/// delta_ij + sqrt(w_i) K(x_i, x_j) sqrt(w_j). Throws std::runtime_error if
/// the kernel is not Hermitian on the node pairs (tolerance 1e-10).
double min_symmetric_eigenvalue(const KernelOperator& K, const QuadratureGrid& grid);

}  // namespace quasispec::numerics
