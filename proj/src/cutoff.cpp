#include "heatsing/cutoff.hpp"

#include <algorithm>
#include <cmath>
#include <limits>

#include "heatsing/errors.hpp"

namespace heatsing {

namespace {

// eta and 1 - eta, each computed without cancellation.
struct Step {
    double eta;
    double co;  // 1 - eta
};

Step step(double sigma) {
    const double e = 1.0 / sigma - 1.0 / (1.0 - sigma);
    return {1.0 / (1.0 + std::exp(e)), 1.0 / (1.0 + std::exp(-e))};
}

double y_expression(double sigma, int dim, bool printed) {
    if (sigma <= 0.0 || sigma >= 1.0) return 0.0;
    const auto [eta, co] = step(sigma);
    const double w = eta * co;
    if (w == 0.0) return 0.0;
    const double s = sigma;
    const double c = 1.0 - sigma;
    const double s2 = s * s;
    const double c2 = c * c;
    const double mixed = printed ? s2 * (1.0 - s2) : s2 * c2;
    const double bracket = (dim - 1) / (s + 7.0) * (1.0 / s2 + 1.0 / c2) + (1.0 / (s2 * s2) + 1.0 / (c2 * c2)) * (1.0 - 2.0 * s) -
                           2.0 * (eta / (s2 * s2) + (eta - co) / mixed - co / (c2 * c2));
    return w * bracket;
}

double grid_sup(auto&& f) {
    constexpr int n = 200000;
    double best = 0.0;
    for (int i = 1; i < n; ++i) best = std::max(best, std::abs(f(static_cast<double>(i) / n)));
    return best;
}

Vec random_direction(int dim, Rng& rng) {
    std::normal_distribution<double> gauss;
    for (;;) {
        Vec u(dim);
        for (int i = 0; i < dim; ++i) u[i] = gauss(rng);
        const double n = norm(u);
        if (n > 1e-12) return (1.0 / n) * u;
    }
}

// A point whose shell coordinate is sigma, seen from the smoothed centre.
struct ShellPoint {
    Vec x;
    double t;
};

ShellPoint sample_shell(const MollifiedCurve& smooth, double r, double horizon, int dim, Rng& rng) {
    double t = 0.0;
    while (t <= 0.0) t = horizon * uniform01(rng);
    double sigma = 0.0;
    while (sigma <= 0.0) sigma = uniform01(rng);
    const Vec c = smooth(t);
    Vec u = random_direction(dim, rng);
    // a quarter of the points look along the velocity, where |eta_t| peaks
    if (uniform01(rng) < 0.25) {
        const Vec v = smooth.derivative(t);
        const double nv = norm(v);
        if (nv > 0.0) u = (uniform01(rng) < 0.5 ? 1.0 : -1.0) / nv * v;
    }
    return {c + (r * (sigma + 7.0) / 10.0) * u, t};
}

double ratio(double lo, double hi) {
    if (hi == 0.0) return 1.0;
    if (lo == 0.0) return std::numeric_limits<double>::infinity();
    return hi / lo;
}

double scaled_error(double diff, double closed, double scale, double floor) {
    const double denom = std::abs(closed) + floor * scale;
    if (denom == 0.0) return diff == 0.0 ? 0.0 : std::numeric_limits<double>::infinity();
    return diff / denom;
}

}  // namespace

double profile_eta(double sigma) {
    if (sigma <= 0.0) return 0.0;
    if (sigma >= 1.0) return 1.0;
    return step(sigma).eta;
}

double profile_x(double sigma) {
    if (sigma <= 0.0 || sigma >= 1.0) return 0.0;
    const auto [eta, co] = step(sigma);
    const double c = 1.0 - sigma;
    return eta * co * (1.0 / (sigma * sigma) + 1.0 / (c * c));
}

double profile_y(double sigma, int dim) { return y_expression(sigma, dim, false); }

double profile_y_printed(double sigma, int dim) { return y_expression(sigma, dim, true); }

double profile_x_sup() {
    static const double v = grid_sup([](double s) { return profile_x(s); });
    return v;
}

double profile_y_sup(int dim) { return grid_sup([dim](double s) { return profile_y(s, dim); }); }

// --- CutoffFamily ---------------------------------------------------------------

CutoffFamily::CutoffFamily(HolderCurve curve, MollifyOptions options)
    : curve_(std::move(curve)), options_(options) {}

double CutoffFamily::smoothing_scale(double r) const {
    if (!(r > 0.0)) throw DomainError("cutoff: r must be positive");
    const double L = curve_.holder_constant();
    if (L == 0.0) return 0.0;
    return std::pow(r / (10.0 * curve_.dim() * L), 1.0 / curve_.exponent());
}

void CutoffFamily::prepare(std::span<const double> radii) {
    for (double r : radii)
        if (!cache_.contains(r)) cache_.emplace(r, smoothed(r));
}

MollifiedCurve CutoffFamily::smoothed(double r) const {
    if (auto it = cache_.find(r); it != cache_.end()) return it->second;
    const double eps = smoothing_scale(r);
    if (eps == 0.0) return MollifiedCurve::exact(curve_);
    return mollify(curve_, eps, options_);
}

const MollifiedCurve* CutoffFamily::cached(double r) const {
    auto it = cache_.find(r);
    return it == cache_.end() ? nullptr : &it->second;
}

CutoffFamily::Local CutoffFamily::evaluate(const MollifiedCurve& smooth, const Vec& x, double t, double r) const {
    if (!(r > 0.0)) throw DomainError("cutoff: r must be positive");
    if (x.size() != dim()) throw DomainError("cutoff: point has wrong dimension");
    const Vec z = x - smooth(t);
    const double rho = norm(z);
    const double sigma = (10.0 / r) * (rho - 0.7 * r);
    Local out{sigma, profile_eta(sigma), Vec(dim()), 0.0, 0.0};
    if (sigma <= 0.0 || sigma >= 1.0) return out;
    const double X = profile_x(sigma);
    out.gradient = (10.0 / r * X / rho) * z;
    out.laplacian = 100.0 / (r * r) * profile_y(sigma, dim());
    out.time_derivative = -(10.0 / r) * X * dot(z, smooth.derivative(t)) / rho;
    return out;
}

CutoffFamily::Local CutoffFamily::evaluate(const Vec& x, double t, double r) const {
    if (const MollifiedCurve* c = cached(r)) return evaluate(*c, x, t, r);
    return evaluate(smoothed(r), x, t, r);
}

double CutoffFamily::sigma(const Vec& x, double t, double r) const { return evaluate(x, t, r).sigma; }
double CutoffFamily::eta(const Vec& x, double t, double r) const { return evaluate(x, t, r).eta; }
Vec CutoffFamily::gradient(const Vec& x, double t, double r) const { return evaluate(x, t, r).gradient; }
double CutoffFamily::laplacian(const Vec& x, double t, double r) const { return evaluate(x, t, r).laplacian; }
double CutoffFamily::time_derivative(const Vec& x, double t, double r) const {
    return evaluate(x, t, r).time_derivative;
}

// --- verification -----------------------------------------------------------

CutoffBoundTable verify_cutoff_bounds(CutoffFamily& family, std::span<const double> radii,
                                      std::size_t sample_count, std::uint64_t seed, Execution exec) {
    if (radii.empty()) throw DomainError("verify_cutoff_bounds: empty radius list");
    for (std::size_t i = 0; i < radii.size(); ++i) {
        if (!(radii[i] > 0.0)) throw DomainError("verify_cutoff_bounds: radii must be positive");
        if (i > 0 && !(radii[i] < radii[i - 1])) throw DomainError("verify_cutoff_bounds: radii must decrease");
    }
    family.prepare(radii);
    const int N = family.dim();
    const double T = family.curve().horizon();
    const double inv_alpha = 1.0 / family.curve().exponent();
    const double sup_x = profile_x_sup();
    const double sup_y = profile_y_sup(N);

    struct Sup {
        double grad = 0.0;
        double lap = 0.0;
        double dt = 0.0;
    };

    CutoffBoundTable table;
    for (std::size_t k = 0; k < radii.size(); ++k) {
        const double r = radii[k];
        const MollifiedCurve smooth = family.smoothed(r);
        const std::size_t chunks = chunk_count(sample_count);
        // one RNG stream family per radius so rows do not depend on each other
        const std::uint64_t row_seed = stream_seed(seed, 1000003ULL * (k + 1));
        const auto partials = map_chunks<Sup>(chunks, exec, [&](std::size_t c) {
            Rng rng = make_stream(row_seed, c);
            const std::size_t end = std::min(sample_count, (c + 1) * kChunkSize);
            Sup s;
            for (std::size_t i = c * kChunkSize; i < end; ++i) {
                const ShellPoint p = sample_shell(smooth, r, T, N, rng);
                const CutoffFamily::Local l = family.evaluate(smooth, p.x, p.t, r);
                s.grad = std::max(s.grad, r * norm(l.gradient));
                s.lap = std::max(s.lap, r * r * std::abs(l.laplacian));
                // exact sup over the sphere at this t: direction along the velocity, sigma at argmax X
                const double along = 10.0 / r * sup_x * norm(smooth.derivative(p.t));
                s.dt = std::max({s.dt, std::abs(l.time_derivative), along});
            }
            return s;
        });
        Sup total{10.0 * sup_x, 100.0 * sup_y, 0.0};
        for (const Sup& s : partials) {
            total.grad = std::max(total.grad, s.grad);
            total.lap = std::max(total.lap, s.lap);
            total.dt = std::max(total.dt, s.dt);
        }
        table.rows.push_back({r, family.smoothing_scale(r), total.grad, total.lap, std::pow(r, inv_alpha) * total.dt});
    }

    auto column_ratio = [&](auto member) {
        double lo = std::numeric_limits<double>::infinity();
        double hi = 0.0;
        for (const CutoffBoundRow& row : table.rows) {
            lo = std::min(lo, row.*member);
            hi = std::max(hi, row.*member);
        }
        return ratio(lo, hi);
    };
    table.ratio_grad = column_ratio(&CutoffBoundRow::sup_scaled_grad);
    table.ratio_lap = column_ratio(&CutoffBoundRow::sup_scaled_lap);
    table.ratio_dt = column_ratio(&CutoffBoundRow::sup_scaled_dt);
    table.bounded = table.ratio_grad <= table.window && table.ratio_lap <= table.window &&
                    table.ratio_dt <= table.window;
    return table;
}

DerivativeCheck check_cutoff_derivatives(const CutoffFamily& family, double r, std::size_t sample_count,
                                         std::uint64_t seed, const DerivativeCheckOptions& options,
                                         Execution exec) {
    if (!(r > 0.0)) throw DomainError("check_cutoff_derivatives: r must be positive");
    const MollifiedCurve smooth = family.smoothed(r);
    const int N = family.dim();
    const double T = family.curve().horizon();
    const double hx = options.grad_step * r;
    const double hl = options.lap_step * r;
    const double eps = family.smoothing_scale(r);
    const double ht_curve = eps > 0.0 ? options.time_step * eps : 1e-6;

    struct Worst {
        double grad = 0.0;
        double lap = 0.0;
        double dt = 0.0;
        double printed = 0.0;
    };
    const std::size_t chunks = chunk_count(sample_count);
    const auto partials = map_chunks<Worst>(chunks, exec, [&](std::size_t c) {
        Rng rng = make_stream(seed, c);
        const std::size_t end = std::min(sample_count, (c + 1) * kChunkSize);
        Worst w;
        auto eta_at = [&](const Vec& x, double t) { return family.evaluate(smooth, x, t, r).eta; };
        for (std::size_t i = c * kChunkSize; i < end; ++i) {
            ShellPoint p = sample_shell(smooth, r, T, N, rng);
            // xi^eps varies on the scale eps, and the shell crosses its own width
            // in time r / (10 |xi_t|); the step resolves both. The lower bound
            // keeps quadrature rounding in xi^eps out of the difference and only
            // binds for smooth curves, whose speed stays O(1).
            const double drift = norm(smooth.derivative(p.t));
            double ht = ht_curve;
            if (drift > 0.0) {
                const double shell_time = 0.1 * r / drift;
                ht = std::clamp(ht_curve, 1e-3 * options.time_step * shell_time, options.time_step * shell_time);
            }
            // keep the time stencil inside (0, T)
            p.t = std::clamp(p.t, 3.0 * ht, T - 3.0 * ht);
            const CutoffFamily::Local l = family.evaluate(smooth, p.x, p.t, r);
            const double center = eta_at(p.x, p.t);

            // Centered differences at h and 2h combined by Richardson, so the
            // oracle's own truncation error stays below the closed-form tolerance
            // near the shell edges, where eta has steep higher derivatives.
            Vec fd_grad(N);
            double fd_lap = 0.0;
            for (int a = 0; a < N; ++a) {
                auto first = [&](double h) {
                    Vec xp = p.x;
                    Vec xm = p.x;
                    xp[a] += h;
                    xm[a] -= h;
                    return (eta_at(xp, p.t) - eta_at(xm, p.t)) / (xp[a] - xm[a]);
                };
                auto second = [&](double h) {
                    Vec xp = p.x;
                    Vec xm = p.x;
                    xp[a] += h;
                    xm[a] -= h;
                    return (eta_at(xp, p.t) - 2.0 * center + eta_at(xm, p.t)) / (h * h);
                };
                fd_grad[a] = (4.0 * first(hx) - first(2.0 * hx)) / 3.0;
                fd_lap += (4.0 * second(hl) - second(2.0 * hl)) / 3.0;
            }
            auto time_first = [&](double h) {
                const double tp = p.t + h;
                const double tm = p.t - h;
                return (eta_at(p.x, tp) - eta_at(p.x, tm)) / (tp - tm);
            };
            const double fd_dt = (4.0 * time_first(ht) - time_first(2.0 * ht)) / 3.0;

            w.grad = std::max(w.grad, scaled_error(norm(fd_grad - l.gradient), norm(l.gradient), 10.0 / r, options.grad_floor));
            w.lap = std::max(w.lap, scaled_error(std::abs(fd_lap - l.laplacian), l.laplacian, 100.0 / (r * r), options.lap_floor));
            const double printed = 100.0 / (r * r) * profile_y_printed(l.sigma, N);
            w.printed = std::max(w.printed, scaled_error(std::abs(fd_lap - printed), printed, 100.0 / (r * r), options.lap_floor));
            const double speed = norm(smooth.derivative(p.t));
            w.dt = std::max(w.dt, scaled_error(std::abs(fd_dt - l.time_derivative), l.time_derivative, 10.0 / r * speed, options.dt_floor));
        }
        return w;
    });
    DerivativeCheck out{r, sample_count, 0.0, 0.0, 0.0, 0.0};
    for (const Worst& w : partials) {
        out.max_err_grad = std::max(out.max_err_grad, w.grad);
        out.max_err_lap = std::max(out.max_err_lap, w.lap);
        out.max_err_dt = std::max(out.max_err_dt, w.dt);
        out.max_err_lap_printed = std::max(out.max_err_lap_printed, w.printed);
    }
    return out;
}

}  // namespace heatsing
