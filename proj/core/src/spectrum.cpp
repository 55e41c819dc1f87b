#include "quasispec/spectrum.hpp"

#include "quasispec/laplacian.hpp"

#include <algorithm>
#include <cmath>
#include <sstream>
#include <stdexcept>

namespace quasispec::spectrum {

namespace {

using laplacian::mode_wavenumber;

/// The entire pair S(lambda) = sin(2a l)/l, C(lambda) = cos(2a l), l^2 = lambda.
struct EntirePair {
    Complex S, C;
};

EntirePair entire_pair(Complex lambda, double a) {
    const Complex l = std::sqrt(lambda);
    const Complex u = 2.0 * a * l;
    if (std::abs(u) < 1e-4) {
        // even series in u, hence single-valued in lambda
        const Complex u2 = u * u;
        return {2.0 * a * (1.0 - u2 / 6.0 + u2 * u2 / 120.0), 1.0 - u2 / 2.0 + u2 * u2 / 24.0};
    }
    return {std::sin(u) / l, std::cos(u)};
}

/// char_fn together with the sum of its term magnitudes (a local scale used to
/// decide when a contour sample is "on" a root).
std::pair<Complex, double> char_fn_scaled(Complex lambda, const BoundaryParams& p) {
    const auto [S, C] = entire_pair(lambda, p.a);
    const Complex t1 = (p.c_minus * p.c_plus + lambda) * S;
    const Complex t2 = (p.c_minus - p.c_plus) * C;
    return {t1 + t2, std::abs(t1) + std::abs(t2) + 1e-300};
}

struct ContourNearZero : std::runtime_error {
    ContourNearZero() : std::runtime_error("characteristic function vanishes on the contour") {}
};

/// Accumulated argument of char_fn along the counterclockwise boundary of a
/// rectangle, divided by 2 pi. Adaptive bisection keeps each phase increment
/// below one radian; samples landing on a root raise ContourNearZero.
class Winding {
  public:
    Winding(const BoundaryParams& p) : p_(p) {}

    int count(double re_lo, double re_hi, double im_lo, double im_hi) {
        total_ = 0.0;
        evals_ = 0;
        const Complex c1(re_lo, im_lo), c2(re_hi, im_lo), c3(re_hi, im_hi), c4(re_lo, im_hi);
        edge(c1, c2);
        edge(c2, c3);
        edge(c3, c4);
        edge(c4, c1);
        const double w = total_ / (2.0 * M_PI);
        const double rounded = std::round(w);
        if (std::abs(w - rounded) > 0.25)
            throw std::runtime_error("winding count failed to converge to an integer");
        return static_cast<int>(rounded);
    }

  private:
    Complex value(Complex z) {
        ++evals_;
        if (evals_ > 4000000)
            throw std::runtime_error("winding count exceeded its evaluation budget");
        const auto [v, scale] = char_fn_scaled(z, p_);
        if (std::abs(v) < 1e-13 * scale) throw ContourNearZero();
        return v;
    }

    void edge(Complex z0, Complex z1) {
        // Base the initial sampling density on the oscillation scale of the
        // trigonometric factors so long edges start below phase aliasing.
        const double phase_span =
            2.0 * p_.a * std::abs(std::sqrt(Complex(z1)) - std::sqrt(Complex(z0)));
        const int m = std::clamp(static_cast<int>(std::ceil(1.25 * phase_span)), 48, 4096);
        Complex zp = z0, fp = value(z0);
        for (int i = 1; i <= m; ++i) {
            const Complex z = z0 + (z1 - z0) * (static_cast<double>(i) / m);
            const Complex f = value(z);
            segment(zp, fp, z, f, 0);
            zp = z;
            fp = f;
        }
    }

    void segment(Complex z0, Complex f0, Complex z1, Complex f1, int depth) {
        const double d = std::arg(f1 / f0);
        // The chord must stay short relative to both endpoint magnitudes: a
        // pair of zeros just off the contour can turn the phase by a full
        // revolution between samples while the principal increment looks
        // small, and only the modulus dip betrays the passage.
        if (std::abs(d) <= 1.0 &&
            std::abs(f1 - f0) <= 0.5 * std::min(std::abs(f0), std::abs(f1))) {
            total_ += d;
            return;
        }
        if (depth >= 64)
            throw std::runtime_error("winding count could not resolve the contour phase");
        const Complex zm = 0.5 * (z0 + z1);
        const Complex fm = value(zm);
        segment(z0, f0, zm, fm, depth + 1);
        segment(zm, fm, z1, f1, depth + 1);
    }

    BoundaryParams p_;
    double total_ = 0.0;
    std::size_t evals_ = 0;
};

/// Winding count with outward edge nudges when a root sits on the contour.
int winding_with_retries(const BoundaryParams& p, double re_lo, double re_hi, double im_lo,
                         double im_hi, int retries, double* out_re_lo = nullptr,
                         double* out_re_hi = nullptr, double* out_im_lo = nullptr,
                         double* out_im_hi = nullptr) {
    const double re_span = re_hi - re_lo, im_span = im_hi - im_lo;
    for (int attempt = 0; attempt <= retries; ++attempt) {
        const double g = attempt * 1.7e-6;
        const double rl = re_lo - g * re_span, rh = re_hi + 1.31 * g * re_span;
        const double il = im_lo - 0.83 * g * im_span, ih = im_hi + 1.17 * g * im_span;
        try {
            const int w = Winding(p).count(rl, rh, il, ih);
            if (out_re_lo) *out_re_lo = rl;
            if (out_re_hi) *out_re_hi = rh;
            if (out_im_lo) *out_im_lo = il;
            if (out_im_hi) *out_im_hi = ih;
            return w;
        } catch (const ContourNearZero&) {
            if (attempt == retries)
                throw std::runtime_error(
                    "could not certify the region: a root lies on every perturbed contour");
        }
    }
    throw std::logic_error("unreachable");
}

double local_scale(Complex lambda) { return 1.0 + std::abs(lambda); }

/// Plain Newton iteration with central-difference derivative.
std::optional<Complex> newton_root(const BoundaryParams& p, Complex z0, double diverge_radius) {
    Complex z = z0;
    for (int iter = 0; iter < 80; ++iter) {
        const Complex f = char_fn(z, p);
        const Complex df = char_fn_derivative(z, p);
        if (!std::isfinite(std::abs(f)) || !std::isfinite(std::abs(df)) || df == 0.0)
            return std::nullopt;
        const Complex step = f / df;
        z -= step;
        if (!std::isfinite(std::abs(z)) || std::abs(z) > diverge_radius) return std::nullopt;
        if (std::abs(step) <= 1e-15 * local_scale(z)) {
            const auto [v, scale] = char_fn_scaled(z, p);
            (void)scale;
            if (std::abs(v) <= 1e-12 * local_scale(z)) return z;
            return std::nullopt;
        }
    }
    return std::nullopt;
}

/// Newton iteration adapted to a double zero (step 2 f / f').
std::optional<Complex> newton_double_root(const BoundaryParams& p, Complex z0,
                                          double diverge_radius) {
    Complex z = z0;
    for (int iter = 0; iter < 120; ++iter) {
        const Complex f = char_fn(z, p);
        const Complex df = char_fn_derivative(z, p);
        if (!std::isfinite(std::abs(f)) || !std::isfinite(std::abs(df)) || df == 0.0)
            return iter > 0 ? std::optional<Complex>(z) : std::nullopt;
        const Complex step = 2.0 * f / df;
        z -= step;
        if (!std::isfinite(std::abs(z)) || std::abs(z) > diverge_radius) return std::nullopt;
        if (std::abs(step) <= 1e-13 * local_scale(z)) return z;
    }
    return std::nullopt;
}

struct FoundRoot {
    Complex lambda;
    int multiplicity = 1;
};

bool same_root(Complex x, Complex y) { return std::abs(x - y) <= 1e-9 * local_scale(x); }

class RootCollector {
  public:
    bool add(Complex lambda, int multiplicity) {
        for (const auto& r : roots_)
            if (same_root(r.lambda, lambda)) return false;
        roots_.push_back({lambda, multiplicity});
        return true;
    }

    bool known(Complex lambda) const {
        for (const auto& r : roots_)
            if (same_root(r.lambda, lambda)) return true;
        return false;
    }

    int multiplicity_inside(double re_lo, double re_hi, double im_lo, double im_hi) const {
        int m = 0;
        for (const auto& r : roots_)
            if (r.lambda.real() > re_lo && r.lambda.real() < re_hi && r.lambda.imag() > im_lo &&
                r.lambda.imag() < im_hi)
                m += r.multiplicity;
        return m;
    }

    std::vector<FoundRoot>& roots() { return roots_; }

  private:
    std::vector<FoundRoot> roots_;
};

/// Checks whether a converged root is actually a double zero; returns the
/// resolved multiplicity and possibly a refined location.
std::pair<Complex, int> resolve_multiplicity(const BoundaryParams& p, Complex lambda,
                                             double diverge_radius) {
    const double scale = local_scale(lambda);
    if (std::abs(char_fn_derivative(lambda, p)) > 1e-8 * scale) return {lambda, 1};
    Complex z = lambda;
    if (auto refined = newton_double_root(p, lambda, diverge_radius)) z = *refined;
    if (std::abs(char_fn_derivative(z, p)) > 1e-8 * local_scale(z)) return {lambda, 1};
    const double r = 1e-6 * local_scale(z);
    const int w = winding_with_retries(p, z.real() - r, z.real() + r, z.imag() - r,
                                       z.imag() + r, 5);
    return {z, w >= 2 ? 2 : 1};
}

struct SearchContext {
    const BoundaryParams& p;
    RootCollector& roots;
    Certification& cert;
    double diverge_radius;
};

void subdivide(SearchContext& ctx, double re_lo, double re_hi, double im_lo, double im_hi,
               int winding, int depth);

/// Handles one rectangle: matches its winding count against the known roots
/// inside, hunting for missing ones by Newton iteration before splitting.
void process_rectangle(SearchContext& ctx, double re_lo, double re_hi, double im_lo,
                       double im_hi, int winding, int depth) {
    if (winding == 0) return;
    if (depth > 96) throw std::runtime_error("eigenvalue search exceeded its subdivision depth");
    int known = ctx.roots.multiplicity_inside(re_lo, re_hi, im_lo, im_hi);
    if (winding < known)
        throw std::runtime_error("winding count inconsistent with located eigenvalues");
    if (winding == known) {
        ctx.cert.isolating.push_back(
            {Complex(re_lo, im_lo), Complex(re_hi, im_hi), winding});
        return;
    }

    const Complex center(0.5 * (re_lo + re_hi), 0.5 * (im_lo + im_hi));
    const double diam = std::abs(Complex(re_hi - re_lo, im_hi - im_lo));
    const Complex probes[5] = {center,
                               Complex(0.75 * re_lo + 0.25 * re_hi, 0.75 * im_lo + 0.25 * im_hi),
                               Complex(0.25 * re_lo + 0.75 * re_hi, 0.75 * im_lo + 0.25 * im_hi),
                               Complex(0.75 * re_lo + 0.25 * re_hi, 0.25 * im_lo + 0.75 * im_hi),
                               Complex(0.25 * re_lo + 0.75 * re_hi, 0.25 * im_lo + 0.75 * im_hi)};
    for (const Complex& probe : probes) {
        if (auto z = newton_root(ctx.p, probe, ctx.diverge_radius)) {
            if (z->real() > re_lo && z->real() < re_hi && z->imag() > im_lo &&
                z->imag() < im_hi && !ctx.roots.known(*z)) {
                const auto [loc, mult] = resolve_multiplicity(ctx.p, *z, ctx.diverge_radius);
                ctx.roots.add(loc, mult);
                known = ctx.roots.multiplicity_inside(re_lo, re_hi, im_lo, im_hi);
                if (winding == known) {
                    ctx.cert.isolating.push_back(
                        {Complex(re_lo, im_lo), Complex(re_hi, im_hi), winding});
                    return;
                }
            }
        }
    }

    // Tiny unresolved cluster: either a double zero or (at the very limit) the
    // center itself is the root to certification accuracy.
    if (diam < 1e-7 * local_scale(center)) {
        const int need = winding - known;
        if (need == 2) {
            if (auto z = newton_double_root(ctx.p, center, ctx.diverge_radius)) {
                if (std::abs(char_fn_derivative(*z, ctx.p)) <= 1e-8 * local_scale(*z)) {
                    ctx.roots.add(*z, 2);
                    ctx.cert.isolating.push_back(
                        {Complex(re_lo, im_lo), Complex(re_hi, im_hi), winding});
                    return;
                }
            }
        }
        if (diam < 1e-10 * local_scale(center)) {
            ctx.roots.add(center, need);
            ctx.cert.isolating.push_back(
                {Complex(re_lo, im_lo), Complex(re_hi, im_hi), winding});
            return;
        }
    }
    subdivide(ctx, re_lo, re_hi, im_lo, im_hi, winding, depth);
}

void subdivide(SearchContext& ctx, double re_lo, double re_hi, double im_lo, double im_hi,
               int winding, int depth) {
    const bool split_re = (re_hi - re_lo) >= (im_hi - im_lo);
    const double fractions[5] = {0.5, 0.53, 0.461, 0.567, 0.439};
    std::string last_error = "could not place a split line away from the eigenvalues";
    for (double f : fractions) {
        const double cut = split_re ? re_lo + f * (re_hi - re_lo) : im_lo + f * (im_hi - im_lo);
        // A cut through (or within contour-nudge distance of) a located root
        // makes the coordinate and winding containment tests disagree, so
        // steer the split line clear of every root already found.
        bool near_known_root = false;
        for (const auto& r : ctx.roots.roots()) {
            const double coord = split_re ? r.lambda.real() : r.lambda.imag();
            if (std::abs(coord - cut) < 1e-6 * local_scale(r.lambda)) {
                near_known_root = true;
                break;
            }
        }
        if (near_known_root) continue;
        try {
            int w1, w2;
            if (split_re) {
                w1 = Winding(ctx.p).count(re_lo, cut, im_lo, im_hi);
                w2 = Winding(ctx.p).count(cut, re_hi, im_lo, im_hi);
            } else {
                w1 = Winding(ctx.p).count(re_lo, re_hi, im_lo, cut);
                w2 = Winding(ctx.p).count(re_lo, re_hi, cut, im_hi);
            }
            if (w1 + w2 != winding) {
                last_error = "winding counts failed to add up across a split";
                continue;
            }
            if (split_re) {
                process_rectangle(ctx, re_lo, cut, im_lo, im_hi, w1, depth + 1);
                process_rectangle(ctx, cut, re_hi, im_lo, im_hi, w2, depth + 1);
            } else {
                process_rectangle(ctx, re_lo, re_hi, im_lo, cut, w1, depth + 1);
                process_rectangle(ctx, re_lo, re_hi, cut, im_hi, w2, depth + 1);
            }
            return;
        } catch (const ContourNearZero&) {
            continue;  // root on the split line; try another fraction
        }
    }
    throw std::runtime_error(last_error);
}

bool lambda_order(const FoundRoot& x, const FoundRoot& y) {
    if (x.lambda.real() != y.lambda.real()) return x.lambda.real() < y.lambda.real();
    return x.lambda.imag() < y.lambda.imag();
}

}  // namespace

std::optional<PTParams> as_pt(const BoundaryParams& p) {
    const double scale = 1.0 + std::abs(p.c_minus) + std::abs(p.c_plus);
    if (std::abs(p.c_minus + std::conj(p.c_plus)) > 1e-14 * scale) return std::nullopt;
    PTParams pt;
    pt.a = p.a;
    pt.alpha = 0.5 * (p.c_minus.imag() + p.c_plus.imag());
    pt.beta = 0.5 * (p.c_plus.real() - p.c_minus.real());
    return pt;
}

SymmetryReport symmetry_report(const BoundaryParams& p) {
    const double scale = 1.0 + std::abs(p.c_minus) + std::abs(p.c_plus);
    SymmetryReport r;
    r.self_adjoint = std::abs(p.c_minus.imag()) <= 1e-15 * scale &&
                     std::abs(p.c_plus.imag()) <= 1e-15 * scale;
    r.pt_symmetric = as_pt(p).has_value();
    r.p_self_adjoint = r.pt_symmetric;
    r.t_self_adjoint = true;
    return r;
}

bool zero_eigenvalue_predicate(const BoundaryParams& p, double tol) {
    const Complex value = 2.0 * p.a * p.c_minus * p.c_plus + p.c_minus - p.c_plus;
    return std::abs(value) <= tol;
}

Complex char_fn(Complex lambda, const BoundaryParams& p) {
    return char_fn_scaled(lambda, p).first;
}

Complex char_fn_pt(Complex lambda, const PTParams& pt) {
    const auto [S, C] = entire_pair(lambda, pt.a);
    return (lambda - pt.alpha * pt.alpha - pt.beta * pt.beta) * S - 2.0 * pt.beta * C;
}

Complex char_fn_derivative(Complex lambda, const BoundaryParams& p) {
    const double h = 1e-7 * (1.0 + std::abs(lambda));
    return (char_fn(lambda + h, p) - char_fn(lambda - h, p)) / (2.0 * h);
}

Complex1D EigenTriple::psi() const {
    const Complex A_n = A;
    const Complex1D f = psi_hat;
    return [A_n, f](double x) { return A_n * f(x); };
}

Complex1D EigenTriple::psi_deriv() const {
    const Complex A_n = A;
    const Complex1D f = psi_hat_deriv;
    return [A_n, f](double x) { return A_n * f(x); };
}

void attach_eigenfunctions(EigenTriple& t, const BoundaryParams& p) {
    const double a = p.a;
    const double inv_root_a = 1.0 / std::sqrt(a);
    if (std::abs(t.l) < 1e-12) {
        // lambda = 0: the eigenfunction degenerates to a linear polynomial
        const Complex cm = p.c_minus;
        t.psi_hat = [cm, a, inv_root_a](double x) {
            return inv_root_a * (1.0 - cm * (x + a));
        };
        t.psi_hat_deriv = [cm, inv_root_a](double) { return -inv_root_a * cm; };
        const Complex cc = std::conj(cm);
        t.phi = [cc, a, inv_root_a](double x) { return inv_root_a * (1.0 - cc * (x + a)); };
        t.phi_deriv = [cc, inv_root_a](double) { return -inv_root_a * cc; };
        return;
    }
    {
        const Complex l = t.l, cm = p.c_minus;
        t.psi_hat = [l, cm, a, inv_root_a](double x) {
            return inv_root_a * (std::cos(l * (x + a)) - (cm / l) * std::sin(l * (x + a)));
        };
        t.psi_hat_deriv = [l, cm, a, inv_root_a](double x) {
            return inv_root_a * (-l * std::sin(l * (x + a)) - cm * std::cos(l * (x + a)));
        };
    }
    {
        const Complex lc = std::conj(t.l), cc = std::conj(p.c_minus);
        t.phi = [lc, cc, a, inv_root_a](double x) {
            return inv_root_a * (std::cos(lc * (x + a)) - (cc / lc) * std::sin(lc * (x + a)));
        };
        t.phi_deriv = [lc, cc, a, inv_root_a](double x) {
            return inv_root_a * (-lc * std::sin(lc * (x + a)) - cc * std::cos(lc * (x + a)));
        };
    }
}

SpectrumResult find_eigenvalues(const BoundaryParams& p, int n_max) {
    if (!(p.a > 0.0)) throw std::invalid_argument("half-width a must be positive");
    if (n_max < 0) throw std::invalid_argument("n_max must be non-negative");

    const double a = p.a;
    const double k_top = mode_wavenumber(n_max, a);
    const double re_max = std::pow((n_max + 0.5) * M_PI / (2.0 * a), 2);
    const double s = std::abs(p.c_minus) + std::abs(p.c_plus) + 1.0;
    const double re_min = -s * s;
    const double im_max = 4.0 * s * std::max(k_top, M_PI / (2.0 * a));

    SpectrumResult result;
    result.params = p;
    const double diverge_radius =
        10.0 * std::max({std::abs(re_min), re_max, im_max, 1.0});

    // certified outer rectangle (edges nudged off any root)
    double rl, rh, il, ih;
    const int total =
        winding_with_retries(p, re_min, re_max, -im_max, im_max, 5, &rl, &rh, &il, &ih);
    result.certification.region = {Complex(rl, il), Complex(rh, ih), total};

    RootCollector roots;
    auto try_seed = [&](Complex seed) {
        if (auto z = newton_root(p, seed, diverge_radius)) {
            if (z->real() > rl && z->real() < rh && z->imag() > il && z->imag() < ih &&
                !roots.known(*z)) {
                const auto [loc, mult] = resolve_multiplicity(p, *z, diverge_radius);
                roots.add(loc, mult);
            }
        }
    };

    // asymptotic seeds for the high modes, coarse probes for the low end
    const Complex shift = (p.c_plus - p.c_minus) / (2.0 * a);
    for (int n = 1; n <= n_max; ++n) {
        const double kn = mode_wavenumber(n, a);
        const Complex l_seed = kn + shift / kn;
        try_seed(l_seed * l_seed);
    }
    try_seed(Complex(std::pow(M_PI / (4.0 * a), 2), 0.0));
    try_seed(Complex(-0.25 * s * s, 0.0));
    try_seed(Complex(-0.01 * s * s, 0.0));
    try_seed(Complex(0.0, 0.4 * s));
    try_seed(Complex(0.5 * re_min, 0.3 * s));
    try_seed(Complex(0.5 * re_min, -0.3 * s));

    SearchContext ctx{p, roots, result.certification, diverge_radius};
    process_rectangle(ctx, rl, rh, il, ih, total, 0);

    int mult_sum = 0;
    for (const auto& r : roots.roots()) mult_sum += r.multiplicity;
    if (mult_sum != total)
        throw std::runtime_error("eigenvalue search lost track of a certified root");
    result.certification.certified = true;

    std::sort(roots.roots().begin(), roots.roots().end(), lambda_order);
    int index = 0;
    for (const auto& r : roots.roots()) {
        EigenTriple t;
        t.index = index;
        t.lambda = r.lambda;
        t.l = std::sqrt(r.lambda);
        if (t.l.real() < 0.0) t.l = -t.l;
        t.algebraic_multiplicity = r.multiplicity;
        t.epsilon = t.l - mode_wavenumber(index, a);
        attach_eigenfunctions(t, p);
        result.triples.push_back(std::move(t));
        ++index;
    }
    return result;
}

int count_zeros(const BoundaryParams& p, double re_lo, double re_hi, double im_lo,
                double im_hi) {
    if (!(re_hi > re_lo) || !(im_hi > im_lo))
        throw std::invalid_argument("count_zeros requires a non-empty rectangle");
    return winding_with_retries(p, re_lo, re_hi, im_lo, im_hi, 5);
}

void biorthonormalize(std::vector<EigenTriple>& triples, const QuadratureGrid& grid) {
    for (auto& t : triples) {
        if (t.algebraic_multiplicity != 1) {
            std::ostringstream msg;
            msg << "degenerate pair at lambda = " << t.lambda
                << ": the eigenfunctions do not form a biorthogonal family";
            throw std::runtime_error(msg.str());
        }
        Complex pairing = 0.0;
        for (std::size_t i = 0; i < grid.size(); ++i) {
            const double x = grid.nodes[i];
            pairing += grid.weights[i] * std::conj(t.phi(x)) * t.psi_hat(x);
        }
        if (std::abs(pairing) < 1e-10) {
            std::ostringstream msg;
            msg << "degenerate pair at lambda = " << t.lambda << ": |<phi, psi>| = "
                << std::abs(pairing) << " is below 1e-10";
            throw std::runtime_error(msg.str());
        }
        t.A = 1.0 / pairing;
    }
}

std::vector<EigenTriple> pt_exact_modes(double alpha, double a, int count) {
    if (!(alpha > 0.0)) throw std::invalid_argument("alpha must be positive");
    if (!(a > 0.0)) throw std::invalid_argument("half-width a must be positive");
    if (count < 1) throw std::invalid_argument("mode count must be positive");
    const int n_near = static_cast<int>(std::lround(2.0 * a * alpha / M_PI));
    if (n_near >= 1) {
        const double kn = mode_wavenumber(n_near, a);
        if (std::abs(alpha - kn) < 1e-12 * (1.0 + kn))
            throw std::runtime_error(
                "degenerate antisymmetric family: alpha coincides with a Neumann wavenumber");
    }

    std::vector<EigenTriple> modes;
    modes.reserve(static_cast<std::size_t>(count));
    const double s2a = std::sin(2.0 * alpha * a);

    {
        EigenTriple t;
        t.index = 0;
        t.l = alpha;
        t.lambda = alpha * alpha;
        t.epsilon = alpha;
        t.A = alpha * std::exp(Complex(0.0, 2.0 * alpha * a)) * std::sqrt(2.0 * a) / s2a;
        t.psi_hat = [alpha, a](double x) { return std::exp(Complex(0.0, -alpha * (x + a))); };
        t.psi_hat_deriv = [alpha, a](double x) {
            return Complex(0.0, -alpha) * std::exp(Complex(0.0, -alpha * (x + a)));
        };
        const double norm0 = 1.0 / std::sqrt(2.0 * a);
        t.phi = [alpha, a, norm0](double x) {
            return norm0 * std::exp(Complex(0.0, alpha * (x + a)));
        };
        t.phi_deriv = [alpha, a, norm0](double x) {
            return Complex(0.0, alpha) * norm0 * std::exp(Complex(0.0, alpha * (x + a)));
        };
        modes.push_back(std::move(t));
    }

    for (int n = 1; n < count; ++n) {
        const double kn = mode_wavenumber(n, a);
        EigenTriple t;
        t.index = n;
        t.l = kn;
        t.lambda = kn * kn;
        t.epsilon = 0.0;
        t.A = kn * kn / (kn * kn - alpha * alpha);
        const double ratio = alpha / kn;
        t.psi_hat = [n, a, ratio](double x) {
            return Complex(laplacian::mode(laplacian::Kind::neumann, n, x, a),
                           -ratio * laplacian::mode(laplacian::Kind::dirichlet, n, x, a));
        };
        t.psi_hat_deriv = [n, a, ratio](double x) {
            return Complex(laplacian::mode_derivative(laplacian::Kind::neumann, n, x, a),
                           -ratio * laplacian::mode_derivative(laplacian::Kind::dirichlet, n, x, a));
        };
        t.phi = [n, a, ratio](double x) {
            return Complex(laplacian::mode(laplacian::Kind::neumann, n, x, a),
                           ratio * laplacian::mode(laplacian::Kind::dirichlet, n, x, a));
        };
        t.phi_deriv = [n, a, ratio](double x) {
            return Complex(laplacian::mode_derivative(laplacian::Kind::neumann, n, x, a),
                           ratio * laplacian::mode_derivative(laplacian::Kind::dirichlet, n, x, a));
        };
        modes.push_back(std::move(t));
    }
    return modes;
}

}  // namespace quasispec::spectrum
