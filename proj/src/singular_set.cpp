#include "heatsing/singular_set.hpp"

#include <Eigen/Dense>

#include <algorithm>
#include <cmath>
#include <limits>
#include <numbers>

#include "heatsing/errors.hpp"

namespace heatsing {

namespace {

constexpr double kTwoPi = 2.0 * std::numbers::pi;

Vec clamp_unit(Vec s) {
    for (int i = 0; i < s.size(); ++i) s[i] = std::clamp(s[i], 0.0, 1.0);
    return s;
}

void check_time(const SingularManifold& m, double t, const char* who) {
    if (!(t >= 0.0 && t <= m.horizon())) throw DomainError(std::string(who) + ": t outside [0, T]");
}

}  // namespace

SingularManifold::SingularManifold(int m, int dim, double horizon, Map map, Jacobian jacobian)
    : m_(m), dim_(dim), horizon_(horizon) {
    if (m < 0 || m > kMaxDim) throw DomainError("manifold: parameter dimension out of range");
    if (dim < 1 || dim > kMaxDim) throw DomainError("manifold: spatial dimension out of range");
    if (m >= dim) throw DomainError("manifold: need m < N");
    if (!(horizon > 0.0)) throw DomainError("manifold: horizon must be positive");
    if (!map) throw DomainError("manifold: missing map");
    map_ = std::make_shared<const Map>(std::move(map));
    if (jacobian) jacobian_ = std::make_shared<const Jacobian>(std::move(jacobian));
}

SingularManifold SingularManifold::point(const HolderCurve& curve) {
    return SingularManifold(0, curve.dim(), curve.horizon(), [curve](const Vec&, double t) { return curve(t); });
}

std::vector<Vec> SingularManifold::jacobian(const Vec& s, double t) const {
    if (jacobian_) return (*jacobian_)(s, t);
    constexpr double h = 1e-6;
    std::vector<Vec> cols;
    cols.reserve(static_cast<std::size_t>(m_));
    for (int i = 0; i < m_; ++i) {
        Vec sp = s;
        Vec sm = s;
        sp[i] += h;
        sm[i] -= h;
        Vec c = (*map_)(sp, t) - (*map_)(sm, t);
        cols.push_back(c * (1.0 / (2.0 * h)));
    }
    return cols;
}

SingularManifold SingularManifold::transformed(std::span<const Vec> rotation, const Vec& shift) const {
    if (static_cast<int>(rotation.size()) != dim_ || shift.size() != dim_)
        throw DomainError("manifold: transform has the wrong dimension");
    std::vector<Vec> q(rotation.begin(), rotation.end());
    auto apply = [q](const Vec& v) {
        Vec out(v.size());
        for (int i = 0; i < v.size(); ++i) out[i] = dot(q[static_cast<std::size_t>(i)], v);
        return out;
    };
    auto base = *this;
    Map map = [base, apply, shift](const Vec& s, double t) { return apply(base(s, t)) + shift; };
    Jacobian jac = [base, apply](const Vec& s, double t) {
        std::vector<Vec> cols = base.jacobian(s, t);
        for (Vec& c : cols) c = apply(c);
        return cols;
    };
    return SingularManifold(m_, dim_, horizon_, std::move(map), std::move(jac));
}

SingularManifold SingularManifold::moving(const HolderCurve& motion) const {
    if (motion.dim() != dim_) throw DomainError("manifold: motion has the wrong dimension");
    if (motion.horizon() < horizon_) throw DomainError("manifold: motion ends before the horizon");
    auto base = *this;
    Map map = [base, motion](const Vec& s, double t) { return base(s, t) + motion(t); };
    Jacobian jac = [base](const Vec& s, double t) { return base.jacobian(s, t); };
    return SingularManifold(m_, dim_, horizon_, std::move(map), std::move(jac));
}

std::optional<ManifoldKind> parse_manifold_kind(const std::string& name) {
    if (name == "point") return ManifoldKind::point;
    if (name == "circle") return ManifoldKind::circle;
    if (name == "segment") return ManifoldKind::segment;
    if (name == "square") return ManifoldKind::square;
    if (name == "torus") return ManifoldKind::torus;
    return std::nullopt;
}

std::string to_string(ManifoldKind kind) {
    switch (kind) {
        case ManifoldKind::point: return "point";
        case ManifoldKind::circle: return "circle";
        case ManifoldKind::segment: return "segment";
        case ManifoldKind::square: return "square";
        case ManifoldKind::torus: return "torus";
    }
    return "?";
}

SingularManifold make_builtin_manifold(const ManifoldSpec& spec) {
    const int N = spec.dim;
    if (N < 1 || N > kMaxDim) throw DomainError("manifold: dimension out of range");
    const Vec c = spec.center.size() == 0 ? Vec(N) : spec.center;
    if (c.size() != N) throw DomainError("manifold: center has the wrong dimension");
    const double R = spec.radius;
    const double T = spec.horizon;

    SingularManifold out = [&]() -> SingularManifold {
        switch (spec.kind) {
            case ManifoldKind::point:
                return SingularManifold(0, N, T, [c](const Vec&, double) { return c; });
            case ManifoldKind::circle: {
                if (N < 2) throw DomainError("circle: needs N >= 2");
                if (!(R > 0.0)) throw DomainError("circle: radius must be positive");
                return SingularManifold(
                    1, N, T,
                    [c, R](const Vec& s, double) {
                        Vec p = c;
                        p[0] += R * std::cos(kTwoPi * s[0]);
                        p[1] += R * std::sin(kTwoPi * s[0]);
                        return p;
                    },
                    [N, R](const Vec& s, double) {
                        Vec d(N);
                        d[0] = -kTwoPi * R * std::sin(kTwoPi * s[0]);
                        d[1] = kTwoPi * R * std::cos(kTwoPi * s[0]);
                        return std::vector<Vec>{d};
                    });
            }
            case ManifoldKind::segment: {
                if (spec.end.size() != N) throw DomainError("segment: end has the wrong dimension");
                const Vec dir = spec.end - c;
                if (norm(dir) == 0.0) throw DomainError("segment: end equals start");
                return SingularManifold(
                    1, N, T, [c, dir](const Vec& s, double) { return c + s[0] * dir; },
                    [dir](const Vec&, double) { return std::vector<Vec>{dir}; });
            }
            case ManifoldKind::square: {
                if (N < 3) throw DomainError("square: needs N >= 3");
                if (!(R > 0.0)) throw DomainError("square: side must be positive");
                return SingularManifold(
                    2, N, T,
                    [c, R](const Vec& s, double) {
                        Vec p = c;
                        p[0] += R * s[0];
                        p[1] += R * s[1];
                        return p;
                    },
                    [N, R](const Vec&, double) { return std::vector<Vec>{R * Vec::unit(N, 0), R * Vec::unit(N, 1)}; });
            }
            case ManifoldKind::torus: {
                const double a = spec.minor_radius;
                if (N < 3) throw DomainError("torus: needs N >= 3");
                if (!(a > 0.0 && R > a)) throw DomainError("torus: need 0 < minor radius < radius");
                return SingularManifold(
                    2, N, T,
                    [c, R, a](const Vec& s, double) {
                        const double u = kTwoPi * s[0];
                        const double v = kTwoPi * s[1];
                        Vec p = c;
                        p[0] += (R + a * std::cos(v)) * std::cos(u);
                        p[1] += (R + a * std::cos(v)) * std::sin(u);
                        p[2] += a * std::sin(v);
                        return p;
                    },
                    [N, R, a](const Vec& s, double) {
                        const double u = kTwoPi * s[0];
                        const double v = kTwoPi * s[1];
                        Vec du(N);
                        Vec dv(N);
                        du[0] = -kTwoPi * (R + a * std::cos(v)) * std::sin(u);
                        du[1] = kTwoPi * (R + a * std::cos(v)) * std::cos(u);
                        dv[0] = -kTwoPi * a * std::sin(v) * std::cos(u);
                        dv[1] = -kTwoPi * a * std::sin(v) * std::sin(u);
                        dv[2] = kTwoPi * a * std::cos(v);
                        return std::vector<Vec>{du, dv};
                    });
            }
        }
        throw DomainError("manifold: unknown kind");
    }();
    if (spec.motion) {
        CurveSpec motion = *spec.motion;
        motion.dim = N;
        motion.horizon = T;
        out = out.moving(make_builtin_curve(motion));
    }
    return out;
}

// --- distance ---------------------------------------------------------------------

DistanceField::DistanceField(const SingularManifold& manifold, double t, DistanceOptions options)
    : manifold_(manifold), t_(t), options_(options) {
    check_time(manifold, t, "distance");
    if (options.grid_per_axis < 2) throw DomainError("distance: grid needs at least 2 points per axis");
    const int m = manifold.param_dim();
    const int g = options.grid_per_axis;
    std::size_t total = 1;
    for (int i = 0; i < m; ++i) total *= static_cast<std::size_t>(g);
    params_.reserve(total);
    points_.reserve(total);
    for (std::size_t k = 0; k < total; ++k) {
        Vec s(m);
        std::size_t rest = k;
        for (int i = 0; i < m; ++i) {
            s[i] = static_cast<double>(rest % static_cast<std::size_t>(g)) / (g - 1);
            rest /= static_cast<std::size_t>(g);
        }
        params_.push_back(s);
        points_.push_back(manifold(s, t));
    }
    // Largest gap between grid neighbours bounds how far the set can stray
    // from the sampled points.
    std::size_t stride = 1;
    for (int i = 0; i < m; ++i) {
        for (std::size_t k = 0; k < total; ++k) {
            if ((k / stride) % static_cast<std::size_t>(g) == static_cast<std::size_t>(g - 1)) continue;
            spacing_slack_ = std::max(spacing_slack_, norm(points_[k + stride] - points_[k]));
        }
        stride *= static_cast<std::size_t>(g);
    }
}

Box DistanceField::bounding_box(double margin) const {
    Box b{points_.front(), points_.front()};
    for (const Vec& p : points_)
        for (int i = 0; i < p.size(); ++i) {
            b.lo[i] = std::min(b.lo[i], p[i]);
            b.hi[i] = std::max(b.hi[i], p[i]);
        }
    return b.inflated(margin + spacing_slack_);
}

// Damped Newton on f(s) = |x - xi(s)|^2 / 2 with the box [0, 1]^m enforced by
// projection. The Hessian J^T J - sum_k e_k d^2 xi_k comes from differencing
// the Jacobian; pure Gauss-Newton stalls when x sits at the scale of the
// curvature radius.
bool DistanceField::descend(const Vec& x, Vec& s, double& dist) const {
    const int m = manifold_.param_dim();
    Vec e = x - manifold_(s, t_);
    double f = norm2(e);
    for (int it = 0; it < options_.max_iterations; ++it) {
        const std::vector<Vec> J = manifold_.jacobian(s, t_);
        Eigen::MatrixXd H(m, m);
        Eigen::VectorXd g(m);
        for (int i = 0; i < m; ++i) {
            g(i) = dot(J[static_cast<std::size_t>(i)], e);
            for (int j = 0; j < m; ++j) H(i, j) = dot(J[static_cast<std::size_t>(i)], J[static_cast<std::size_t>(j)]);
        }
        constexpr double h = 1e-5;
        for (int j = 0; j < m; ++j) {
            Vec sp = s;
            Vec sm = s;
            sp[j] += h;
            sm[j] -= h;
            const std::vector<Vec> Jp = manifold_.jacobian(sp, t_);
            const std::vector<Vec> Jm = manifold_.jacobian(sm, t_);
            for (int i = 0; i < m; ++i) {
                const Vec second = (Jp[static_cast<std::size_t>(i)] - Jm[static_cast<std::size_t>(i)]) * (1.0 / (2.0 * h));
                H(i, j) -= dot(second, e);
            }
        }
        H = 0.5 * (H + H.transpose()).eval();
        Eigen::SelfAdjointEigenSolver<Eigen::MatrixXd> eig(H);
        const double lo = eig.eigenvalues().minCoeff();
        const double scale = std::max(eig.eigenvalues().cwiseAbs().maxCoeff(), 1e-300);
        if (lo < 1e-8 * scale) H += (1e-8 * scale - lo) * Eigen::MatrixXd::Identity(m, m);
        const Eigen::VectorXd delta = H.ldlt().solve(g);

        double lambda = 1.0;
        bool improved = false;
        Vec trial;
        Vec trial_e;
        double trial_f = f;
        for (int back = 0; back < 40; ++back) {
            trial = s;
            for (int i = 0; i < m; ++i) trial[i] += lambda * delta(i);
            trial = clamp_unit(trial);
            trial_e = x - manifold_(trial, t_);
            trial_f = norm2(trial_e);
            if (trial_f <= f) {
                improved = true;
                break;
            }
            lambda *= 0.5;
        }
        if (!improved) {
            dist = std::sqrt(f);
            return true;  // no descent left within rounding
        }
        double step = 0.0;
        for (int i = 0; i < m; ++i) step = std::max(step, std::abs(trial[i] - s[i]));
        s = trial;
        e = trial_e;
        f = trial_f;
        if (step < options_.step_tol) {
            dist = std::sqrt(f);
            return true;
        }
    }
    dist = std::sqrt(f);
    return false;
}

DistanceResult DistanceField::search(const Vec& x) const {
    if (x.size() != manifold_.dim()) throw DomainError("distance: point has the wrong dimension");
    if (manifold_.param_dim() == 0) return {norm(x - points_.front()), Vec(0), false};

    // Descend from the two best grid points; the second guards against a
    // near tie between separate branches of the set.
    std::size_t best = 0;
    std::size_t second = 0;
    double fb = std::numeric_limits<double>::infinity();
    double fs = fb;
    for (std::size_t k = 0; k < points_.size(); ++k) {
        const double f = norm2(x - points_[k]);
        if (f < fb) {
            second = best;
            fs = fb;
            best = k;
            fb = f;
        } else if (f < fs) {
            second = k;
            fs = f;
        }
    }
    DistanceResult out{std::sqrt(fb), params_[best], true};
    bool converged_any = false;
    for (std::size_t start : {best, second}) {
        Vec s = params_[start];
        double d = 0.0;
        const bool ok = descend(x, s, d);
        if (d < out.distance || (ok && !converged_any && d <= out.distance)) {
            out.distance = d;
            out.parameter = s;
        }
        converged_any = converged_any || ok;
        if (best == second) break;
    }
    out.approximate = !converged_any;
    return out;
}

DistanceResult DistanceField::operator()(const Vec& x) const {
    DistanceResult r = search(x);
    DistanceOptions opts = options_;
    for (int k = 0; r.approximate && k < options_.max_refinements; ++k) {
        opts.grid_per_axis *= 2;
        DistanceResult finer = DistanceField(manifold_, t_, opts).search(x);
        if (finer.distance <= r.distance || !finer.approximate) r = finer;
    }
    return r;
}

double DistanceField::lower_bound(const Vec& x) const {
    double best = std::numeric_limits<double>::infinity();
    for (const Vec& p : points_) best = std::min(best, norm2(x - p));
    return std::max(std::sqrt(best) - spacing_slack_, 0.0);
}

DistanceResult distance(const SingularManifold& manifold, const Vec& x, double t, const DistanceOptions& options) {
    return DistanceField(manifold, t, options)(x);
}

// --- rank condition and measures -------------------------------------------------

RankReport jacobian_rank_check(const SingularManifold& manifold, std::size_t sample_count, std::uint64_t seed,
                               double threshold) {
    const int m = manifold.param_dim();
    RankReport rep;
    rep.samples = sample_count;
    if (m == 0) {
        rep.min_singular_value = std::numeric_limits<double>::infinity();
        rep.pass = true;
        return rep;
    }
    if (sample_count == 0) throw DomainError("rank check: need at least one sample");
    Rng rng = make_stream(seed, 0);
    rep.min_singular_value = std::numeric_limits<double>::infinity();
    Eigen::MatrixXd J(manifold.dim(), m);
    for (std::size_t k = 0; k < sample_count; ++k) {
        Vec s(m);
        for (int i = 0; i < m; ++i) s[i] = uniform01(rng);
        const double t = uniform01(rng) * manifold.horizon();
        const std::vector<Vec> cols = manifold.jacobian(s, t);
        for (int j = 0; j < m; ++j)
            for (int i = 0; i < manifold.dim(); ++i) J(i, j) = cols[static_cast<std::size_t>(j)][i];
        const double smin = Eigen::JacobiSVD<Eigen::MatrixXd>(J).singularValues().minCoeff();
        if (smin < rep.min_singular_value) {
            rep.min_singular_value = smin;
            rep.parameter = s;
            rep.time = t;
        }
    }
    rep.pass = rep.min_singular_value >= threshold;
    return rep;
}

double surface_measure(const SingularManifold& manifold, double t, double tol) {
    check_time(manifold, t, "surface_measure");
    const int m = manifold.param_dim();
    if (m == 0) return 1.0;
    auto element = [&](const Vec& s) {
        const std::vector<Vec> cols = manifold.jacobian(s, t);
        Eigen::MatrixXd G(m, m);
        for (int i = 0; i < m; ++i)
            for (int j = 0; j < m; ++j) G(i, j) = dot(cols[static_cast<std::size_t>(i)], cols[static_cast<std::size_t>(j)]);
        return std::sqrt(std::max(G.determinant(), 0.0));
    };
    // nested adaptive quadrature, innermost axis first
    std::function<double(Vec&, int)> nest = [&](Vec& s, int axis) -> double {
        if (axis == m) return element(s);
        return integrate_adaptive(
                   [&](double u) {
                       s[axis] = u;
                       return nest(s, axis + 1);
                   },
                   0.0, 1.0, QuadratureOptions{tol, 0.0, 10000})
            .value;
    };
    Vec s(m);
    return nest(s, 0);
}

double estimate_time_holder_constant(const SingularManifold& manifold, double alpha, std::size_t s_samples,
                                     std::size_t t_samples) {
    if (!(alpha > 0.0 && alpha <= 1.0)) throw DomainError("time Hölder estimate: alpha must lie in (0, 1]");
    if (t_samples < 2) throw DomainError("time Hölder estimate: need at least two times");
    const int m = manifold.param_dim();
    Rng rng = make_stream(1, 0);
    const std::size_t count = m == 0 ? 1 : std::max<std::size_t>(s_samples, 1);
    const double T = manifold.horizon();
    double best = 0.0;
    std::vector<Vec> pts(t_samples);
    for (std::size_t k = 0; k < count; ++k) {
        Vec s(m);
        for (int i = 0; i < m; ++i) s[i] = uniform01(rng);
        for (std::size_t j = 0; j < t_samples; ++j) pts[j] = manifold(s, T * static_cast<double>(j) / (t_samples - 1));
        for (std::size_t i = 0; i < t_samples; ++i)
            for (std::size_t j = i + 1; j < t_samples; ++j) {
                const double gap = T * static_cast<double>(j - i) / (t_samples - 1);
                best = std::max(best, norm(pts[j] - pts[i]) / std::pow(gap, alpha));
            }
    }
    return 1.1 * best;
}

// --- tubes -------------------------------------------------------------------------

TubeIntegral tube_integral(const SingularManifold& manifold, double t, double r, TubeKernel kernel,
                           const TubeOptions& options, Execution exec) {
    const int m = manifold.param_dim();
    const int N = manifold.dim();
    if (!(r > 0.0)) throw DomainError("tube_integral: r must be positive");
    if (kernel == TubeKernel::power && N < m + 3) throw DomainError("tube_integral: power kernel needs N >= m + 3");
    if (kernel == TubeKernel::log && N != m + 2) throw DomainError("tube_integral: log kernel needs N = m + 2");
    if (kernel == TubeKernel::log && !(r < 1.0)) throw DomainError("tube_integral: log kernel needs r < 1");
    if (options.samples < 2) throw DomainError("tube_integral: need at least two samples");

    const DistanceField field(manifold, t, options.distance);
    const Box box = field.bounding_box(r);
    const double volume = box.volume();
    const int power = m + 2 - N;

    struct Partial {
        double sum = 0.0;
        double sum_sq = 0.0;
        std::size_t inside = 0;
    };
    const std::size_t n = options.samples;
    const auto parts = map_chunks<Partial>(chunk_count(n), exec, [&](std::size_t c) {
        Rng rng = make_stream(options.seed, c);
        Partial p;
        const std::size_t end = std::min(n, (c + 1) * kChunkSize);
        Vec x(N);
        for (std::size_t i = c * kChunkSize; i < end; ++i) {
            for (int a = 0; a < N; ++a) x[a] = box.lo[a] + (box.hi[a] - box.lo[a]) * uniform01(rng);
            if (field.lower_bound(x) >= r) continue;
            const double d = field(x).distance;
            if (!(d < r) || d == 0.0) continue;
            const double v = kernel == TubeKernel::power ? std::pow(d, power) : std::log(1.0 / d);
            p.sum += v;
            p.sum_sq += v * v;
            ++p.inside;
        }
        return p;
    });
    Partial total;
    for (const Partial& p : parts) {
        total.sum += p.sum;
        total.sum_sq += p.sum_sq;
        total.inside += p.inside;
    }
    const double dn = static_cast<double>(n);
    const double mean = total.sum / dn;
    const double var = std::max(total.sum_sq / dn - mean * mean, 0.0) * dn / (dn - 1.0);
    return {volume * mean, volume * std::sqrt(var / dn), n, total.inside};
}

TubeTable verify_tube(const SingularManifold& manifold, double t, std::span<const double> radii, TubeKernel kernel,
                      const TubeOptions& options, Execution exec) {
    if (radii.empty()) throw DomainError("verify_tube: empty radius list");
    TubeTable table;
    double lo = std::numeric_limits<double>::infinity();
    double hi = 0.0;
    for (double r : radii) {
        const TubeIntegral ti = tube_integral(manifold, t, r, kernel, options, exec);
        const double norm_r = kernel == TubeKernel::power ? r * r : r * r * (1.0 + std::log(1.0 / r));
        const TubeRow row{r, ti.value, ti.std_error, ti.value / norm_r};
        lo = std::min(lo, row.scaled);
        hi = std::max(hi, row.scaled);
        table.rows.push_back(row);
    }
    table.ratio = lo > 0.0 ? hi / lo : std::numeric_limits<double>::infinity();
    table.bounded = table.ratio <= table.window;
    return table;
}

}  // namespace heatsing
