#include "heatsing/singular_solution.hpp"

#include <algorithm>
#include <array>
#include <limits>
#include <cmath>
#include <numbers>

#include "heatsing/errors.hpp"

namespace heatsing {

namespace {

constexpr double kPi = std::numbers::pi;

// exp(-y^2) is below the smallest subnormal beyond this
constexpr double kGaussianReach = 27.3;

QuadratureOptions relative(double rel_tol, std::size_t panels) { return QuadratureOptions{0.0, rel_tol, panels}; }

template <class Run>
QuadratureResult guarded(bool accept_partial, Run&& run) {
    if (!accept_partial) return run();
    try {
        return run();
    } catch (const QuadratureBudgetExceeded& e) {
        return e.partial();
    }
}

}  // namespace

double heat_kernel(const Vec& x, double t) {
    if (!(t > 0.0)) throw DomainError("heat_kernel: t must be positive");
    const double n = x.size();
    return std::pow(4.0 * kPi * t, -0.5 * n) * std::exp(-norm2(x) / (4.0 * t));
}

double asymptotic_constant(int dim) {
    if (dim < 2) throw DomainError("asymptotic_constant: N must be at least 2");
    if (dim == 2) return 1.0 / (2.0 * kPi);
    return 1.0 / (dim * (dim - 2) * unit_ball_volume(dim));
}

// --- SingularField --------------------------------------------------------------

SingularField::SingularField(HolderCurve curve, FieldOptions options) : curve_(std::move(curve)), options_(options) {
    if (!(options_.rel_tol > 0.0)) throw DomainError("SingularField: rel_tol must be positive");
    if (!(options_.switch_ratio >= 0.0)) throw DomainError("SingularField: switch_ratio must be non-negative");
}

QuadratureResult SingularField::evaluate(const Vec& x, double t) const { return evaluate(x, t, options_.route); }

QuadratureResult SingularField::evaluate(const Vec& x, double t, FieldRoute route) const {
    if (x.size() != dim()) throw DomainError("SingularField: point has wrong dimension");
    if (!(t > 0.0) || t > curve_.horizon() * (1.0 + 1e-12)) throw DomainError("SingularField: t must lie in (0, T]");
    const Vec z = x - curve_(t);
    const double zn = norm(z);
    if (zn == 0.0) throw OnSingularityError("SingularField: x lies on the singular curve at time t");
    if (route == FieldRoute::automatic)
        route = zn <= options_.switch_ratio * std::sqrt(t) ? FieldRoute::sigma : FieldRoute::direct;

    if (route == FieldRoute::direct) {
        // the kernel peaks at t - s ~ |z|^2, so split there
        const double split = t - zn * zn;
        const QuadratureOptions opts = relative(options_.rel_tol, options_.max_panels);
        auto kernel = [&](double s) {
            const double tau = t - s;
            return tau > 0.0 ? heat_kernel(x - curve_(s), tau) : 0.0;
        };
        const bool partial = options_.accept_partial;
        if (split <= 0.0) return guarded(partial, [&] { return integrate_adaptive(kernel, 0.0, t, opts); });
        const QuadratureResult far = guarded(partial, [&] { return integrate_adaptive(kernel, 0.0, split, opts); });
        const QuadratureResult near = guarded(partial, [&] { return integrate_adaptive(kernel, split, t, opts); });
        return {far.value + near.value, far.error_estimate + near.error_estimate, far.evaluations + near.evaluations};
    }

    const int N = dim();
    const Vec here = curve_(t);
    const Vec unit = (1.0 / zn) * z;
    const double power = 0.5 * N - 2.0;
    auto integrand = [&](double sigma) {
        const double tau = zn * zn / (4.0 * sigma);
        if (!(tau > 0.0)) return 0.0;
        const Vec shift = here - curve_(t - tau);
        const Vec q = std::sqrt(sigma) * unit + (0.5 / std::sqrt(tau)) * shift;
        const double e = std::exp(-norm2(q));
        if (e == 0.0) return 0.0;
        return std::pow(sigma, power) * e;
    };
    const QuadratureResult I = guarded(options_.accept_partial, [&] {
        return integrate_semi_infinite(integrand, zn * zn / (4.0 * t), relative(options_.rel_tol, options_.max_panels));
    });
    const double prefactor = 0.25 * std::pow(kPi, -0.5 * N) * std::pow(zn, 2.0 - N);
    return {prefactor * I.value, prefactor * I.error_estimate, I.evaluations};
}

double SingularField::truncated(const Vec& x, double t, double tau) const {
    if (x.size() != dim()) throw DomainError("SingularField: point has wrong dimension");
    if (!(tau > 0.0 && tau < t)) throw DomainError("SingularField::truncated: tau must lie in (0, t)");
    if (t > curve_.horizon() * (1.0 + 1e-12)) throw DomainError("SingularField: t must lie in (0, T]");
    auto kernel = [&](double s) { return heat_kernel(x - curve_(s), t - s); };
    return integrate_adaptive(kernel, 0.0, t - tau, relative(options_.rel_tol, options_.max_panels)).value;
}

std::vector<double> SingularField::evaluate_many(std::span<const Vec> points, std::span<const double> times,
                                                 Execution exec) const {
    if (points.size() != times.size()) throw DomainError("evaluate_many: points and times differ in length");
    std::vector<double> out(points.size());
    for_each_index(points.size(), exec, [&](std::size_t i) { out[i] = (*this)(points[i], times[i]); });
    return out;
}

// --- test functions -------------------------------------------------------------

double bump_b(double s) {
    const double q = 1.0 - s * s;
    return q > 0.0 ? std::exp(-1.0 / q) : 0.0;
}

double bump_b1(double s) {
    const double q = 1.0 - s * s;
    if (q <= 0.0) return 0.0;
    return std::exp(-1.0 / q) * (-2.0 * s / (q * q));
}

double bump_b2(double s) {
    const double q = 1.0 - s * s;
    if (q <= 0.0) return 0.0;
    const double s2 = s * s;
    return std::exp(-1.0 / q) * (6.0 * s2 * s2 - 2.0) / (q * q * q * q);
}

TestFunction bump_test_function(const Vec& center, const Vec& half_widths, double t0, double t_half,
                                double amplitude) {
    const int N = center.size();
    if (half_widths.size() != N) throw DomainError("bump_test_function: widths have wrong dimension");
    for (int i = 0; i < N; ++i)
        if (!(half_widths[i] > 0.0)) throw DomainError("bump_test_function: widths must be positive");
    if (!(t_half > 0.0)) throw DomainError("bump_test_function: time half-width must be positive");

    auto space_factors = [center, half_widths, N](const Vec& x, std::array<double, kMaxDim>& u) {
        double prod = 1.0;
        for (int i = 0; i < N; ++i) {
            u[i] = (x[i] - center[i]) / half_widths[i];
            prod *= bump_b(u[i]);
        }
        return prod;
    };

    TestFunction f;
    f.value = [=](const Vec& x, double t) {
        std::array<double, kMaxDim> u{};
        return amplitude * bump_b((t - t0) / t_half) * space_factors(x, u);
    };
    f.dt = [=](const Vec& x, double t) {
        std::array<double, kMaxDim> u{};
        return amplitude * bump_b1((t - t0) / t_half) / t_half * space_factors(x, u);
    };
    f.laplacian = [=](const Vec& x, double t) {
        const double bt = bump_b((t - t0) / t_half);
        if (bt == 0.0) return 0.0;
        double sum = 0.0;
        for (int i = 0; i < N; ++i) {
            double term = bump_b2((x[i] - center[i]) / half_widths[i]) / (half_widths[i] * half_widths[i]);
            for (int j = 0; j < N && term != 0.0; ++j)
                if (j != i) term *= bump_b((x[j] - center[j]) / half_widths[j]);
            sum += term;
        }
        return amplitude * bt * sum;
    };
    f.space = Box{center - half_widths, center + half_widths};
    f.t_lo = t0 - t_half;
    f.t_hi = t0 + t_half;
    return f;
}

// --- concentration ---------------------------------------------------------------

namespace {

// Nested adaptive quadrature of g over a box, one axis at a time, with an
// optional breakpoint per axis.
double nested_box(const std::function<double(const Vec&)>& g, const Vec& lo, const Vec& hi, const Vec& breaks,
                  double tol) {
    const int N = lo.size();
    Vec point(N);
    std::function<double(int)> level = [&](int axis) -> double {
        auto slice = [&](double v) {
            point[axis] = v;
            return axis + 1 == N ? g(point) : level(axis + 1);
        };
        const double a = lo[axis];
        const double b = hi[axis];
        const double m = breaks[axis];
        const QuadratureOptions opts{tol, 0.0, 20000};
        if (m > a && m < b) return integrate_adaptive(slice, a, m, opts).value + integrate_adaptive(slice, m, b, opts).value;
        return integrate_adaptive(slice, a, b, opts).value;
    };
    return level(0);
}

}  // namespace

ConcentrationTable concentration_check(const HolderCurve& curve, const TestFunction& phi, double t,
                                       std::span<const double> taus, double tol) {
    const int N = curve.dim();
    if (N > 3) throw DomainError("concentration_check: supported for N <= 3");
    if (!(t > 0.0 && t <= curve.horizon())) throw DomainError("concentration_check: t must lie in (0, T]");
    if (phi.space.dim() != N) throw DomainError("concentration_check: test function has wrong dimension");

    ConcentrationTable table;
    table.target = phi.value(curve(t), t);
    double previous = std::numeric_limits<double>::infinity();
    table.monotone = true;
    for (double tau : taus) {
        if (!(tau > 0.0 && tau < t)) throw DomainError("concentration_check: tau must lie in (0, t)");
        const Vec c = curve(t - tau);
        const double scale = 2.0 * std::sqrt(tau);
        Vec lo(N);
        Vec hi(N);
        bool empty = false;
        for (int i = 0; i < N; ++i) {
            lo[i] = std::max(-kGaussianReach, (phi.space.lo[i] - c[i]) / scale);
            hi[i] = std::min(kGaussianReach, (phi.space.hi[i] - c[i]) / scale);
            if (!(lo[i] < hi[i])) empty = true;
        }
        double value = 0.0;
        if (!empty) {
            auto g = [&](const Vec& y) {
                const double w = std::exp(-norm2(y));
                return w == 0.0 ? 0.0 : phi.value(c + scale * y, t) * w;
            };
            value = std::pow(kPi, -0.5 * N) * nested_box(g, lo, hi, Vec::zeros(N), tol);
        }
        const double deviation = std::abs(value - table.target);
        if (deviation > previous + 1e-14) table.monotone = false;
        previous = deviation;
        table.rows.push_back({tau, value, deviation});
    }
    return table;
}

// --- residual -------------------------------------------------------------------

double heat_residual(const SpaceTimeField& u, const Vec& x, double t, double h) {
    if (!(h > 0.0)) throw DomainError("heat_residual: h must be positive");
    const double center = u(x, t);
    const double ut = (u(x, t + h) - u(x, t - h)) / (2.0 * h);
    double lap = 0.0;
    for (int i = 0; i < x.size(); ++i) {
        Vec xp = x;
        Vec xm = x;
        xp[i] += h;
        xm[i] -= h;
        lap += (u(xp, t) - 2.0 * center + u(xm, t)) / (h * h);
    }
    return ut - lap;
}

double heat_residual(const SpaceTimeField& u, const HolderCurve& curve, const Vec& x, double t, double h) {
    if (!(h > 0.0)) throw DomainError("heat_residual: h must be positive");
    if (!(t - h > 0.0 && t + h <= curve.horizon())) throw DomainError("heat_residual: time stencil leaves (0, T]");
    const double need = (x.size() + 1) * h + 10.0 * h;
    constexpr int probes = 17;
    for (int k = 0; k < probes; ++k) {
        const double s = t - h + 2.0 * h * k / (probes - 1);
        if (norm(x - curve(s)) < need)
            throw StencilTooCloseError("heat_residual: stencil comes within " + std::to_string(need) +
                                       " of the singular curve");
    }
    return heat_residual(u, x, t, h);
}

// --- distributional identity -----------------------------------------------------

PairingResult distributional_pairing(const SingularField& field, const TestFunction& phi, const PairingOptions& options,
                                     Execution exec) {
    const HolderCurve& curve = field.curve();
    const int N = field.dim();
    if (phi.space.dim() != N) throw DomainError("distributional_pairing: test function has wrong dimension");
    if (N < 2) throw DomainError("distributional_pairing: N must be at least 2");
    if (!(phi.t_lo > 0.0 && phi.t_hi <= curve.horizon() && phi.t_lo < phi.t_hi))
        throw DomainError("distributional_pairing: test function must be supported inside (0, T)");

    PairingResult out;
    out.rhs = integrate_adaptive([&](double t) { return phi.value(curve(t), t); }, phi.t_lo, phi.t_hi,
                                 QuadratureOptions{1e-14, 0.0, 10000})
                  .value;

    auto psi_f = [&](const Vec& x, double t) {
        const double psi = -phi.dt(x, t) - phi.laplacian(x, t);
        if (psi == 0.0) return 0.0;
        return psi * field(x, t);
    };

    if (N == 2) {
        out.method = "nested quadrature";
        const std::size_t slabs = std::max<std::size_t>(1, options.time_slabs);
        const double width = (phi.t_hi - phi.t_lo) / static_cast<double>(slabs);
        struct Part {
            double value = 0.0;
            double error = 0.0;
        };
        const auto parts = map_chunks<Part>(slabs, exec, [&](std::size_t k) {
            // breakpoints at xi(t) isolate the log singularity of F
            auto space_integral = [&](double t) {
                return nested_box([&](const Vec& x) { return psi_f(x, t); }, phi.space.lo, phi.space.hi, curve(t),
                                  options.tol_space);
            };
            const double a = phi.t_lo + width * static_cast<double>(k);
            const double b = k + 1 == slabs ? phi.t_hi : a + width;
            const QuadratureResult r =
                integrate_adaptive(space_integral, a, b, QuadratureOptions{options.tol_t / slabs, 0.0, 10000});
            return Part{r.value, r.error_estimate};
        });
        for (const Part& p : parts) {
            out.lhs += p.value;
            out.lhs_error += p.error;
        }
        return out;
    }

    out.method = "monte carlo";
    const std::size_t n = options.monte_carlo_samples;
    if (n < 2) throw DomainError("distributional_pairing: need at least two Monte Carlo samples");
    const double volume = phi.space.volume() * (phi.t_hi - phi.t_lo);
    struct Moments {
        double sum = 0.0;
        double sum_sq = 0.0;
    };
    const auto parts = map_chunks<Moments>(chunk_count(n), exec, [&](std::size_t c) {
        Rng rng = make_stream(options.seed, c);
        Moments m;
        const std::size_t end = std::min(n, (c + 1) * kChunkSize);
        Vec x(N);
        for (std::size_t i = c * kChunkSize; i < end; ++i) {
            for (int a = 0; a < N; ++a) x[a] = phi.space.lo[a] + (phi.space.hi[a] - phi.space.lo[a]) * uniform01(rng);
            const double t = phi.t_lo + (phi.t_hi - phi.t_lo) * uniform01(rng);
            const double v = psi_f(x, t);
            m.sum += v;
            m.sum_sq += v * v;
        }
        return m;
    });
    Moments total;
    for (const Moments& m : parts) {
        total.sum += m.sum;
        total.sum_sq += m.sum_sq;
    }
    const double mean = total.sum / static_cast<double>(n);
    const double var = std::max(0.0, total.sum_sq / static_cast<double>(n) - mean * mean);
    out.lhs = volume * mean;
    out.lhs_error = volume * std::sqrt(var / static_cast<double>(n - 1));
    return out;
}

// --- asymptotics ------------------------------------------------------------------

AsymptoticEstimate asymptotic_coefficient(const SingularField& field, double t, const Vec& direction,
                                          std::span<const double> radii, Execution exec) {
    const int N = field.dim();
    if (N < 2) throw DomainError("asymptotic_coefficient: N must be at least 2");
    if (direction.size() != N || norm(direction) == 0.0)
        throw DomainError("asymptotic_coefficient: direction must be a non-zero vector of dimension N");
    const std::size_t need = N == 2 ? 3 : 2;
    if (radii.size() < need) throw DomainError("asymptotic_coefficient: too few radii");
    for (std::size_t i = 0; i < radii.size(); ++i) {
        if (!(radii[i] > 0.0)) throw DomainError("asymptotic_coefficient: radii must be positive");
        if (i > 0 && !(radii[i] < radii[i - 1])) throw DomainError("asymptotic_coefficient: radii must decrease");
        if (N == 2 && !(radii[i] < 1.0)) throw DomainError("asymptotic_coefficient: N = 2 radii must be below 1");
    }
    const Vec dir = (1.0 / norm(direction)) * direction;
    const Vec center = field.curve()(t);

    AsymptoticEstimate est;
    est.reference_constant = asymptotic_constant(N);
    est.samples.resize(radii.size());
    // Averaging the two sides of the ray cancels the part of the remainder
    // that is odd in the direction, which is where a rough curve shows up.
    for_each_index(radii.size(), exec, [&](std::size_t i) {
        const double rho = radii[i];
        const double F = 0.5 * (field(center + rho * dir, t) + field(center - rho * dir, t));
        const double scaled = N == 2 ? F / std::log(1.0 / rho) : F * std::pow(rho, N - 2);
        est.samples[i] = {rho, F, scaled};
    });

    const std::size_t n = radii.size();
    if (N == 2) {
        // least squares F = slope * log(1/rho) + offset
        double mx = 0.0;
        double my = 0.0;
        for (const auto& s : est.samples) {
            mx += std::log(1.0 / s.radius);
            my += s.value;
        }
        mx /= n;
        my /= n;
        double sxx = 0.0;
        double sxy = 0.0;
        for (const auto& s : est.samples) {
            const double dx = std::log(1.0 / s.radius) - mx;
            sxx += dx * dx;
            sxy += dx * (s.value - my);
        }
        const double slope = sxy / sxx;
        double rss = 0.0;
        for (const auto& s : est.samples) {
            const double fit = my + slope * (std::log(1.0 / s.radius) - mx);
            rss += (s.value - fit) * (s.value - fit);
        }
        est.coefficient = slope;
        est.error_estimate = n > 2 ? std::sqrt(rss / static_cast<double>(n - 2) / sxx) : 0.0;
    } else {
        // odd terms ~ rho^{2 alpha - 1} cancel; even ones ~ rho^{2(2 alpha - 1)}, and the heat
        // kernel tail itself contributes rho^1
        const double p = std::min(1.0, 2.0 * (2.0 * field.curve().exponent() - 1.0));
        est.rate = p;
        auto extrapolate = [&](std::size_t fine, std::size_t coarse) {
            const double a = std::pow(est.samples[fine].radius, p);
            const double b = std::pow(est.samples[coarse].radius, p);
            return (est.samples[fine].scaled * b - est.samples[coarse].scaled * a) / (b - a);
        };
        if (p <= 0.0) {
            est.coefficient = est.samples[n - 1].scaled;
            est.error_estimate = std::abs(est.samples[n - 1].scaled - est.samples[n - 2].scaled);
            est.converged = false;
            est.diagnostic = "exponent <= 1/2: no extrapolation rate, reporting the smallest-radius value";
        } else {
            est.coefficient = extrapolate(n - 1, n - 2);
            est.error_estimate = n >= 3 ? std::abs(est.coefficient - extrapolate(n - 2, n - 3))
                                        : std::abs(est.coefficient - est.samples[n - 1].scaled);
        }
        // the scaled sequence should approach its limit from one side
        const double slack = 1e-3 * std::abs(est.coefficient);
        int sign = 0;
        for (std::size_t i = 1; i < n; ++i) {
            const double d = est.samples[i].scaled - est.samples[i - 1].scaled;
            if (std::abs(d) <= slack) continue;
            const int s = d > 0.0 ? 1 : -1;
            if (sign != 0 && s != sign) {
                est.converged = false;
                est.diagnostic = "scaled values F rho^(N-2) are not monotone in rho";
            }
            sign = s;
        }
    }
    est.relative_error = std::abs(est.coefficient - est.reference_constant) / est.reference_constant;
    return est;
}

}  // namespace heatsing
