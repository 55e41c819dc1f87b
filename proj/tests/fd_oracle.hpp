#pragma once

// Independent finite-difference oracle used only by the tests: second-order
// ghost-point discretization of -(rho u')' + W u on [x_lo, x_hi] with real
// Robin data rho(end) u'(end) + c u(end) = 0. The resulting tridiagonal
// matrix has positive off-diagonal products, so it is similar to a symmetric
// tridiagonal one and its eigenvalues come from Sturm-count bisection.

#include <cmath>
#include <functional>
#include <stdexcept>
#include <vector>

namespace fd_oracle {

struct Tridiagonal {
    std::vector<double> diag;
    std::vector<double> off_sq;  ///< products upper_i * lower_{i+1}, size n-1
};

inline int sturm_count_below(const Tridiagonal& T, double sigma) {
    int count = 0;
    double q = T.diag[0] - sigma;
    if (q < 0.0) ++count;
    for (std::size_t i = 1; i < T.diag.size(); ++i) {
        double pivot = q;
        if (std::abs(pivot) < 1e-300) pivot = pivot < 0.0 ? -1e-300 : 1e-300;
        q = T.diag[i] - sigma - T.off_sq[i - 1] / pivot;
        if (q < 0.0) ++count;
    }
    return count;
}

inline double kth_eigenvalue(const Tridiagonal& T, int k) {
    double lo = T.diag[0];
    double hi = T.diag[0];
    for (std::size_t i = 0; i < T.diag.size(); ++i) {
        double radius = 0.0;
        if (i > 0) radius += std::sqrt(T.off_sq[i - 1]);
        if (i + 1 < T.diag.size()) radius += std::sqrt(T.off_sq[i]);
        lo = std::min(lo, T.diag[i] - radius);
        hi = std::max(hi, T.diag[i] + radius);
    }
    for (int it = 0; it < 200 && hi - lo > 1e-13 * (1.0 + std::abs(hi) + std::abs(lo)); ++it) {
        const double mid = 0.5 * (lo + hi);
        if (sturm_count_below(T, mid) >= k + 1) {
            hi = mid;
        } else {
            lo = mid;
        }
    }
    return 0.5 * (lo + hi);
}

inline Tridiagonal robin_matrix(const std::function<double(double)>& rho,
                                const std::function<double(double)>& W, double c_lo,
                                double c_hi, double x_lo, double x_hi, int n) {
    if (n < 8) throw std::invalid_argument("finite-difference oracle needs n >= 8");
    const double h = (x_hi - x_lo) / n;
    const auto node = [&](int i) { return x_lo + i * h; };
    const auto rho_half = [&](int i) { return rho(node(i) + 0.5 * h); };  // rho_{i+1/2}

    std::vector<double> diag(static_cast<std::size_t>(n) + 1);
    std::vector<double> upper(static_cast<std::size_t>(n));
    std::vector<double> lower(static_cast<std::size_t>(n));  // lower[i] couples row i+1 to i

    for (int i = 1; i < n; ++i) {
        const double rp = rho_half(i);
        const double rm = rho_half(i - 1);
        diag[static_cast<std::size_t>(i)] = (rp + rm) / (h * h) + W(node(i));
        upper[static_cast<std::size_t>(i)] = -rp / (h * h);
        lower[static_cast<std::size_t>(i) - 1] = -rm / (h * h);
    }

    // Ghost-point elimination of the Robin conditions, symmetric-difference
    // derivative: u_{-1} = u_1 + 2 h c_lo u_0 / rho(x_lo) and
    // u_{n+1} = u_{n-1} - 2 h c_hi u_n / rho(x_hi).
    const double r_lo = rho(x_lo);
    const double r_hi = rho(x_hi);
    const double rp0 = rho_half(0);
    const double rm0 = rho(x_lo - 0.5 * h);
    diag[0] = (rp0 + rm0) / (h * h) - 2.0 * c_lo * rm0 / (r_lo * h) + W(x_lo);
    upper[0] = -(rp0 + rm0) / (h * h);

    const double rpn = rho(x_hi + 0.5 * h);
    const double rmn = rho_half(n - 1);
    diag[static_cast<std::size_t>(n)] =
        (rpn + rmn) / (h * h) + 2.0 * c_hi * rpn / (r_hi * h) + W(x_hi);
    lower[static_cast<std::size_t>(n) - 1] = -(rpn + rmn) / (h * h);

    Tridiagonal T;
    T.diag = std::move(diag);
    T.off_sq.resize(static_cast<std::size_t>(n));
    for (int i = 0; i < n; ++i) {
        const double product =
            upper[static_cast<std::size_t>(i)] * lower[static_cast<std::size_t>(i)];
        if (!(product > 0.0)) {
            throw std::runtime_error("finite-difference oracle lost similarity to a "
                                     "symmetric matrix (off-diagonal product <= 0)");
        }
        T.off_sq[static_cast<std::size_t>(i)] = product;
    }
    return T;
}

inline std::vector<double> lowest_eigenvalues(const std::function<double(double)>& rho,
                                              const std::function<double(double)>& W,
                                              double c_lo, double c_hi, double x_lo,
                                              double x_hi, int n, int count) {
    const Tridiagonal T = robin_matrix(rho, W, c_lo, c_hi, x_lo, x_hi, n);
    std::vector<double> out;
    out.reserve(static_cast<std::size_t>(count));
    for (int k = 0; k < count; ++k) out.push_back(kth_eigenvalue(T, k));
    return out;
}

}  // namespace fd_oracle
