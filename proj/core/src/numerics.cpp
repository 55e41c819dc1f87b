#include "quasispec/numerics.hpp"

#include <algorithm>
#include <atomic>
#include <cmath>
#include <cstdlib>
#include <map>
#include <mutex>
#include <stdexcept>
#include <string>
#include <thread>

namespace quasispec::numerics {

int thread_count() {
    static const int count = [] {
        unsigned hw = std::thread::hardware_concurrency();
        int n = hw == 0 ? 1 : static_cast<int>(hw);
        if (const char* env = std::getenv("QUASISPEC_THREADS")) {
            try {
                n = std::stoi(env);
            } catch (const std::exception&) {
                n = 1;
            }
        }
        return std::clamp(n, 1, 256);
    }();
    return count;
}

void parallel_for(std::size_t n, const std::function<void(std::size_t)>& body) {
    const std::size_t workers =
        std::min<std::size_t>(static_cast<std::size_t>(thread_count()), n);
    if (workers <= 1 || n < 4) {
        for (std::size_t i = 0; i < n; ++i) body(i);
        return;
    }
    std::atomic<std::size_t> next{0};
    std::exception_ptr error;
    std::mutex error_mutex;
    auto run = [&] {
        for (;;) {
            const std::size_t i = next.fetch_add(1);
            if (i >= n) return;
            try {
                body(i);
            } catch (...) {
                std::lock_guard<std::mutex> lock(error_mutex);
                if (!error) error = std::current_exception();
                return;
            }
        }
    };
    std::vector<std::thread> pool;
    pool.reserve(workers - 1);
    for (std::size_t t = 1; t < workers; ++t) pool.emplace_back(run);
    run();
    for (auto& th : pool) th.join();
    if (error) std::rethrow_exception(error);
}

void gauss_legendre(int order, std::vector<double>& nodes, std::vector<double>& weights) {
    if (order < 1) throw std::invalid_argument("quadrature order must be positive");
    nodes.assign(order, 0.0);
    weights.assign(order, 0.0);
    const int n = order;
    for (int i = 0; i < (n + 1) / 2; ++i) {
        // root i of P_n, counted from the right; Newton from the Chebyshev guess
        double x = std::cos(M_PI * (i + 0.75) / (n + 0.5));
        double dp = 0.0;
        for (int iter = 0; iter < 100; ++iter) {
            double p0 = 1.0, p1 = x;
            for (int k = 2; k <= n; ++k) {
                const double p2 = ((2.0 * k - 1.0) * x * p1 - (k - 1.0) * p0) / k;
                p0 = p1;
                p1 = p2;
            }
            dp = n * (x * p1 - p0) / (x * x - 1.0);
            const double dx = p1 / dp;
            x -= dx;
            if (std::abs(dx) < 1e-15) break;
        }
        const double w = 2.0 / ((1.0 - x * x) * dp * dp);
        nodes[i] = -x;  // guesses run from the largest root down; store ascending
        nodes[n - 1 - i] = x;
        weights[i] = w;
        weights[n - 1 - i] = w;
    }
    if (n % 2 == 1) nodes[n / 2] = 0.0;
}

namespace {

/// Cached reference rule on [-1, 1].
const std::pair<std::vector<double>, std::vector<double>>& reference_rule(int order) {
    static std::mutex mutex;
    static std::map<int, std::pair<std::vector<double>, std::vector<double>>> cache;
    std::lock_guard<std::mutex> lock(mutex);
    auto it = cache.find(order);
    if (it == cache.end()) {
        std::pair<std::vector<double>, std::vector<double>> rule;
        gauss_legendre(order, rule.first, rule.second);
        it = cache.emplace(order, std::move(rule)).first;
    }
    return it->second;
}

void append_panels(double lo, double hi, int n_sub, int order, std::vector<double>& xs,
                   std::vector<double>& ws) {
    const auto& [rx, rw] = reference_rule(order);
    const double width = (hi - lo) / n_sub;
    for (int p = 0; p < n_sub; ++p) {
        const double mid = lo + (p + 0.5) * width;
        const double half = 0.5 * width;
        for (int j = 0; j < order; ++j) {
            xs.push_back(mid + half * rx[j]);
            ws.push_back(half * rw[j]);
        }
    }
}

/// Panel layout over (-a, a) with edges forced at the interior cuts.
void split_layout(const QuadratureGrid& layout, const std::vector<double>& cuts,
                  std::vector<double>& xs, std::vector<double>& ws) {
    const double a = layout.a;
    std::vector<double> edges{-a};
    for (double c : cuts) {
        if (c > -a + 1e-14 * a && c < a - 1e-14 * a) edges.push_back(c);
    }
    edges.push_back(a);
    std::sort(edges.begin(), edges.end());
    xs.clear();
    ws.clear();
    for (std::size_t s = 0; s + 1 < edges.size(); ++s) {
        const double lo = edges[s], hi = edges[s + 1];
        if (hi - lo < 1e-15 * a) continue;
        const int n_sub = std::max<int>(
            1, static_cast<int>(std::lround(layout.n_panels * (hi - lo) / (2.0 * a))));
        append_panels(lo, hi, n_sub, layout.order, xs, ws);
    }
}

std::vector<double> jump_cuts(JumpLocus jump, double x) {
    switch (jump) {
        case JumpLocus::diagonal:
            return {x};
        case JumpLocus::antidiagonal:
            return {-x};
        default:
            return {};
    }
}

}  // namespace

QuadratureGrid make_grid(double a, int n_panels, int order) {
    if (!(a > 0.0)) throw std::invalid_argument("half-width a must be positive");
    if (n_panels < 1) throw std::invalid_argument("panel count must be positive");
    if (order < 2 || order > 64) throw std::invalid_argument("quadrature order out of range");
    QuadratureGrid grid;
    grid.a = a;
    grid.n_panels = n_panels;
    grid.order = order;
    append_panels(-a, a, n_panels, order, grid.nodes, grid.weights);
    double sum = 0.0;
    for (double w : grid.weights) sum += w;
    if (std::abs(sum - 2.0 * a) > 1e-13 * std::max(1.0, 2.0 * a))
        throw std::runtime_error("quadrature weights failed the interval-length check");
    return grid;
}

SampledFunction sample(std::shared_ptr<const QuadratureGrid> grid, Complex1D f, Complex1D df) {
    if (!grid) throw std::invalid_argument("sample requires a grid");
    if (!f) throw std::invalid_argument("sample requires a function");
    SampledFunction out;
    out.grid = grid;
    out.values.resize(static_cast<Eigen::Index>(grid->size()));
    for (std::size_t i = 0; i < grid->size(); ++i)
        out.values[static_cast<Eigen::Index>(i)] = f(grid->nodes[i]);
    if (df) {
        Eigen::VectorXcd d(static_cast<Eigen::Index>(grid->size()));
        for (std::size_t i = 0; i < grid->size(); ++i)
            d[static_cast<Eigen::Index>(i)] = df(grid->nodes[i]);
        out.derivative_values = std::move(d);
        out.derivative_evaluator = std::move(df);
    }
    out.evaluator = std::move(f);
    return out;
}

Complex inner_product(const SampledFunction& f, const SampledFunction& g) {
    if (!f.grid || !g.grid) throw std::invalid_argument("inner_product requires gridded functions");
    if (f.grid->size() != g.grid->size() || f.grid->a != g.grid->a)
        throw std::invalid_argument("inner_product requires matching grids");
    Complex acc = 0.0;
    for (std::size_t i = 0; i < f.grid->size(); ++i) {
        const auto k = static_cast<Eigen::Index>(i);
        acc += f.grid->weights[i] * std::conj(f.values[k]) * g.values[k];
    }
    return acc;
}

double norm(const SampledFunction& f) { return std::sqrt(std::abs(inner_product(f, f))); }

Eigen::MatrixXcd nystrom_matrix(const KernelOperator& K, const QuadratureGrid& grid) {
    if (K.prebuilt && K.prebuilt_grid && K.prebuilt_grid->size() == grid.size() &&
        K.prebuilt_grid->a == grid.a && K.prebuilt_grid->n_panels == grid.n_panels &&
        K.prebuilt_grid->order == grid.order)
        return *K.prebuilt;
    if (!K.kernel) throw std::invalid_argument("kernel operator has no kernel closure");
    const auto n = static_cast<Eigen::Index>(grid.size());
    Eigen::MatrixXcd M(n, n);
    parallel_for(grid.size(), [&](std::size_t i) {
        const double x = grid.nodes[i];
        for (Eigen::Index j = 0; j < n; ++j)
            M(static_cast<Eigen::Index>(i), j) =
                grid.weights[static_cast<std::size_t>(j)] * K.kernel(x, grid.nodes[static_cast<std::size_t>(j)]);
    });
    return M;
}

Complex integrate(const Complex1D& fn, const QuadratureGrid& layout,
                  const std::vector<double>& cuts) {
    std::vector<double> xs, ws;
    split_layout(layout, cuts, xs, ws);
    Complex acc = 0.0;
    for (std::size_t i = 0; i < xs.size(); ++i) acc += ws[i] * fn(xs[i]);
    return acc;
}

SampledFunction apply_kernel(const KernelOperator& K, const SampledFunction& f) {
    if (!f.grid) throw std::invalid_argument("apply_kernel requires a gridded function");
    const auto grid = f.grid;
    SampledFunction out;
    out.grid = grid;

    if (K.jump == JumpLocus::none) {
        const Eigen::MatrixXcd M = nystrom_matrix(K, *grid);
        out.values = M * f.values;
        if (f.evaluator && K.kernel) {
            auto kernel = K.kernel;
            auto fe = f.evaluator;
            out.evaluator = [kernel, fe, grid](double x) {
                return integrate([&](double y) { return kernel(x, y) * fe(y); }, *grid);
            };
        }
        return out;
    }

    if (!f.evaluator)
        throw std::runtime_error(
            "apply_kernel: split-panel quadrature around a kernel jump requires an off-grid "
            "evaluator on the input");
    if (!K.kernel) throw std::invalid_argument("kernel operator has no kernel closure");

    auto kernel = K.kernel;
    auto fe = f.evaluator;
    const JumpLocus jump = K.jump;
    auto evaluate = [kernel, fe, grid, jump](double x) {
        return integrate([&](double y) { return kernel(x, y) * fe(y); }, *grid,
                         jump_cuts(jump, x));
    };
    out.values.resize(static_cast<Eigen::Index>(grid->size()));
    parallel_for(grid->size(), [&](std::size_t i) {
        out.values[static_cast<Eigen::Index>(i)] = evaluate(grid->nodes[i]);
    });
    out.evaluator = evaluate;
    return out;
}

double hs_norm(const KernelOperator& K, const QuadratureGrid& grid) {
    if (!K.kernel) throw std::invalid_argument("kernel operator has no kernel closure");
    std::vector<double> row(grid.size(), 0.0);
    parallel_for(grid.size(), [&](std::size_t i) {
        const double x = grid.nodes[i];
        const Complex inner = integrate(
            [&](double y) {
                const Complex v = K.kernel(x, y);
                return Complex(std::norm(v), 0.0);
            },
            grid, jump_cuts(K.jump, x));
        row[i] = inner.real();
    });
    double acc = 0.0;
    for (std::size_t i = 0; i < grid.size(); ++i) acc += grid.weights[i] * row[i];
    return std::sqrt(std::max(0.0, acc));
}

double min_symmetric_eigenvalue(const KernelOperator& K, const QuadratureGrid& grid) {
    const auto n = static_cast<Eigen::Index>(grid.size());
    Eigen::MatrixXcd V(n, n);
    if (K.prebuilt && K.prebuilt_grid && K.prebuilt_grid->size() == grid.size() &&
        K.prebuilt_grid->a == grid.a) {
        for (Eigen::Index i = 0; i < n; ++i)
            for (Eigen::Index j = 0; j < n; ++j)
                V(i, j) = (*K.prebuilt)(i, j) / grid.weights[static_cast<std::size_t>(j)];
    } else {
        if (!K.kernel) throw std::invalid_argument("kernel operator has no kernel closure");
        parallel_for(grid.size(), [&](std::size_t i) {
            for (Eigen::Index j = 0; j < n; ++j)
                V(static_cast<Eigen::Index>(i), j) =
                    K.kernel(grid.nodes[i], grid.nodes[static_cast<std::size_t>(j)]);
        });
    }
    const double scale = std::max(1.0, V.cwiseAbs().maxCoeff());
    const double asym = (V - V.adjoint()).cwiseAbs().maxCoeff();
    if (asym > 1e-10 * scale)
        throw std::runtime_error(
            "min_symmetric_eigenvalue requires a Hermitian kernel on the grid nodes");
    Eigen::MatrixXcd B = Eigen::MatrixXcd::Identity(n, n);
    for (Eigen::Index i = 0; i < n; ++i)
        for (Eigen::Index j = 0; j < n; ++j)
            B(i, j) += std::sqrt(grid.weights[static_cast<std::size_t>(i)]) * V(i, j) *
                       std::sqrt(grid.weights[static_cast<std::size_t>(j)]);
    const Eigen::MatrixXcd H = 0.5 * (B + B.adjoint());
    Eigen::SelfAdjointEigenSolver<Eigen::MatrixXcd> solver(H, Eigen::EigenvaluesOnly);
    if (solver.info() != Eigen::Success)
        throw std::runtime_error("symmetric eigensolve failed to converge");
    return solver.eigenvalues()(0);
}

}  // namespace quasispec::numerics
