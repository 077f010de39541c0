#include "heatsing/curve.hpp"

#include <algorithm>
#include <cmath>
#include <limits>
#include <numbers>
#include <set>

#include "heatsing/errors.hpp"
#include "heatsing/numerics.hpp"

namespace heatsing {

Vec CosineSeries::evaluate(double t) const {
    Vec x = offset;
    for (const CosineTerm& term : terms) x[term.coord] += term.amplitude * std::cos(term.frequency * t + term.phase);
    return x;
}

HolderCurve::HolderCurve(int dim, double horizon, double exponent, double holder_constant, Evaluator evaluator,
                         Extension extension)
    : dim_(dim),
      horizon_(horizon),
      exponent_(exponent),
      holder_constant_(holder_constant),
      extension_(extension),
      evaluator_(std::make_shared<const Evaluator>(std::move(evaluator))) {
    if (dim < 1 || dim > kMaxDim) throw DomainError("HolderCurve: dimension out of range");
    if (!(horizon > 0.0)) throw DomainError("HolderCurve: horizon must be positive");
    if (!(exponent > 0.0 && exponent <= 1.0)) throw DomainError("HolderCurve: exponent must lie in (0, 1]");
    if (!(holder_constant >= 0.0) || !std::isfinite(holder_constant))
        throw DomainError("HolderCurve: Hölder constant must be finite and non-negative");
}

HolderCurve::HolderCurve(int dim, double horizon, double exponent, double holder_constant, CosineSeries series)
    : HolderCurve(dim, horizon, exponent, holder_constant, Evaluator{}, Extension::natural) {
    if (series.offset.size() != dim) throw DomainError("HolderCurve: series offset has wrong dimension");
    for (const CosineTerm& term : series.terms)
        if (term.coord < 0 || term.coord >= dim) throw DomainError("HolderCurve: series term coordinate out of range");
    series_ = std::make_shared<const CosineSeries>(std::move(series));
    auto s = series_;
    evaluator_ = std::make_shared<const Evaluator>([s](double t) { return s->evaluate(t); });
}

Vec HolderCurve::operator()(double t) const {
    if (extension_ == Extension::clamp) t = std::clamp(t, 0.0, horizon_);
    return (*evaluator_)(t);
}

HolderCurve HolderCurve::with_holder(double exponent, double holder_constant) const {
    HolderCurve c = *this;
    if (!(exponent > 0.0 && exponent <= 1.0)) throw DomainError("HolderCurve: exponent must lie in (0, 1]");
    if (!(holder_constant >= 0.0)) throw DomainError("HolderCurve: Hölder constant must be non-negative");
    c.exponent_ = exponent;
    c.holder_constant_ = holder_constant;
    return c;
}

HolderCurve HolderCurve::translated(const Vec& shift) const {
    if (shift.size() != dim_) throw DomainError("HolderCurve::translated: dimension mismatch");
    HolderCurve c = *this;
    if (series_) {
        CosineSeries moved = *series_;
        moved.offset += shift;
        c.series_ = std::make_shared<const CosineSeries>(std::move(moved));
        auto s = c.series_;
        c.evaluator_ = std::make_shared<const Evaluator>([s](double t) { return s->evaluate(t); });
    } else {
        auto inner = evaluator_;
        c.evaluator_ = std::make_shared<const Evaluator>([inner, shift](double t) { return (*inner)(t) + shift; });
    }
    return c;
}

HolderCurve combine(double a, const HolderCurve& xi, double b, const HolderCurve& zeta) {
    if (xi.dim() != zeta.dim() || xi.horizon() != zeta.horizon())
        throw DomainError("combine: curves must share dimension and horizon");
    const double alpha = std::min(xi.exponent(), zeta.exponent());
    const double T = xi.horizon();
    // |t - s|^a <= T^(a - alpha) |t - s|^alpha on [0, T]
    const double lx = xi.holder_constant() * std::pow(T, xi.exponent() - alpha);
    const double lz = zeta.holder_constant() * std::pow(T, zeta.exponent() - alpha);
    const Extension ext = (xi.extension() == Extension::natural && zeta.extension() == Extension::natural)
                              ? Extension::natural
                              : Extension::clamp;
    return HolderCurve(
        xi.dim(), T, alpha, std::abs(a) * lx + std::abs(b) * lz,
        [xi, zeta, a, b](double t) { return a * xi(t) + b * zeta(t); }, ext);
}

// --- mollifier -------------------------------------------------------------

namespace {

double bump(double t) {
    const double q = 1.0 - t * t;
    return q > 0.0 ? std::exp(-1.0 / q) : 0.0;
}

// Beyond this argument |rho-hat| < 1e-30; see the decay table in the tests.
constexpr double kTransformCutoff = 4000.0;

}  // namespace

double mollifier_normalization() {
    static const double A = [] {
        const QuadratureResult r = integrate_adaptive(bump, -1.0, 1.0, QuadratureOptions{1e-14, 0.0, 10000});
        return 1.0 / r.value;
    }();
    return A;
}

double mollifier_rho(double t) { return mollifier_normalization() * bump(t); }

double mollifier_rho_prime(double t) {
    const double q = 1.0 - t * t;
    if (q <= 0.0) return 0.0;
    return mollifier_normalization() * std::exp(-1.0 / q) * (-2.0 * t / (q * q));
}

double mollifier_cosine_transform(double k) {
    k = std::abs(k);
    if (k > kTransformCutoff) return 0.0;
    const QuadratureOptions opts{5e-14, 0.0, 20000};
    const QuadratureResult r =
        integrate_adaptive([k](double tau) { return mollifier_rho(tau) * std::cos(k * tau); }, 0.0, 1.0, opts);
    return 2.0 * r.value;
}

namespace {
// Below this the differences xi(t - eps tau) - xi(t) are pure rounding.
double roundoff_floor(const Vec& x) { return 64.0 * std::numeric_limits<double>::epsilon() * (1.0 + norm(x)); }
}  // namespace

MollifiedCurve::MollifiedCurve(HolderCurve base, double epsilon, double tol, MollifyRoute route)
    : base_(std::move(base)), epsilon_(epsilon), tol_(tol), route_(route) {
    if (route_ == MollifyRoute::series) {
        const CosineSeries* s = base_.series();
        damping_.reserve(s->terms.size());
        for (const CosineTerm& term : s->terms) damping_.push_back(mollifier_cosine_transform(term.frequency * epsilon_));
    }
}

MollifiedCurve MollifiedCurve::exact(const HolderCurve& constant_curve) {
    if (constant_curve.holder_constant() != 0.0)
        throw DomainError("MollifiedCurve::exact: only a stationary curve (L = 0) is its own smoothing");
    MollifiedCurve m(constant_curve, 0.0, 0.0, MollifyRoute::quadrature);
    m.identity_ = true;
    return m;
}

Vec MollifiedCurve::operator()(double t) const {
    if (identity_) return base_(t);
    if (route_ == MollifyRoute::series) {
        const CosineSeries& s = *base_.series();
        Vec x = s.offset;
        for (std::size_t k = 0; k < s.terms.size(); ++k) {
            const CosineTerm& term = s.terms[k];
            x[term.coord] += term.amplitude * damping_[k] * std::cos(term.frequency * t + term.phase);
        }
        return x;
    }
    // xi(t) + integral of rho(tau) (xi(t - eps tau) - xi(t)). The integrand is
    // O(eps^alpha), so the tolerance can shrink with eps at little cost, which
    // keeps time differences of xi^eps clean.
    Vec x = base_(t);
    const QuadratureOptions opts{std::max(tol_ * std::min(1.0, epsilon_), roundoff_floor(x)), 0.0, 10000};
    for (int i = 0; i < base_.dim(); ++i) {
        const double c = x[i];
        x[i] += integrate_adaptive(
                    [&](double tau) { return mollifier_rho(tau) * (base_(t - epsilon_ * tau)[i] - c); }, -1.0,
                    1.0, opts)
                    .value;
    }
    return x;
}

Vec MollifiedCurve::derivative(double t) const {
    Vec v(base_.dim());
    if (identity_) return v;
    if (route_ == MollifyRoute::series) {
        const CosineSeries& s = *base_.series();
        for (std::size_t k = 0; k < s.terms.size(); ++k) {
            const CosineTerm& term = s.terms[k];
            v[term.coord] -=
                term.amplitude * term.frequency * damping_[k] * std::sin(term.frequency * t + term.phase);
        }
        return v;
    }
    // (1/eps) * integral of rho'(tau) (xi(t - eps tau) - xi(t)); rho' has zero mean.
    const Vec center = base_(t);
    const QuadratureOptions opts{std::max(tol_ * epsilon_, roundoff_floor(center)), 0.0, 10000};
    for (int i = 0; i < base_.dim(); ++i) {
        v[i] = integrate_adaptive(
                   [&](double tau) {
                       return mollifier_rho_prime(tau) * (base_(t - epsilon_ * tau)[i] - center[i]);
                   },
                   -1.0, 1.0, opts)
                   .value /
               epsilon_;
    }
    return v;
}

MollifiedCurve mollify(const HolderCurve& curve, double epsilon, const MollifyOptions& options) {
    if (!(epsilon > 0.0) || !std::isfinite(epsilon)) throw DomainError("mollify: epsilon must be positive");
    if (!(options.tol > 0.0)) throw DomainError("mollify: tolerance must be positive");
    MollifyRoute route = options.route;
    if (route == MollifyRoute::automatic)
        route = curve.series() != nullptr ? MollifyRoute::series : MollifyRoute::quadrature;
    if (route == MollifyRoute::series && curve.series() == nullptr)
        throw DomainError("mollify: series route needs a curve with a cosine series");
    return MollifiedCurve(curve, epsilon, options.tol, route);
}

MollificationCheck check_mollification(const HolderCurve& curve, double epsilon, std::size_t sample_count,
                                       const MollifyOptions& options, Execution exec) {
    if (sample_count < 2) throw DomainError("check_mollification: need at least two samples");
    const MollifiedCurve smooth = mollify(curve, epsilon, options);
    const double T = curve.horizon();
    const int N = curve.dim();
    struct Sup {
        double coord = 0.0;
        double dev = 0.0;
        double speed = 0.0;
    };
    const auto parts = map_chunks<Sup>(chunk_count(sample_count), exec, [&](std::size_t c) {
        Sup s;
        const std::size_t end = std::min(sample_count, (c + 1) * kChunkSize);
        for (std::size_t i = c * kChunkSize; i < end; ++i) {
            const double t = T * static_cast<double>(i) / static_cast<double>(sample_count - 1);
            const Vec diff = curve(t) - smooth(t);
            const Vec v = smooth.derivative(t);
            for (int k = 0; k < N; ++k) {
                s.coord = std::max(s.coord, std::abs(diff[k]));
                s.speed = std::max(s.speed, std::abs(v[k]));
            }
            s.dev = std::max(s.dev, norm(diff));
        }
        return s;
    });
    MollificationCheck out;
    out.epsilon = epsilon;
    for (const Sup& s : parts) {
        out.sup_coord_deviation = std::max(out.sup_coord_deviation, s.coord);
        out.sup_deviation = std::max(out.sup_deviation, s.dev);
        out.sup_coord_speed = std::max(out.sup_coord_speed, s.speed);
    }
    const double L = curve.holder_constant();
    const double a = curve.exponent();
    out.bound_coord = L * std::pow(epsilon, a);
    out.bound_sum = std::sqrt(static_cast<double>(N)) * out.bound_coord;
    out.bound_speed = mollifier_normalization() * L * std::pow(epsilon, a - 1.0);
    // the absolute allowance absorbs rounding when L = 0
    const double k = 1.0 + out.slack;
    out.pass_coord = out.sup_coord_deviation <= k * out.bound_coord + 1e-12;
    out.pass_sum = out.sup_deviation <= k * out.bound_sum + 1e-12;
    out.pass_speed = out.sup_coord_speed <= k * out.bound_speed + 1e-12;
    return out;
}

double estimate_holder_constant(const HolderCurve& curve, double alpha, std::size_t sample_count, Execution exec) {
    if (!(alpha > 0.0 && alpha <= 1.0)) throw DomainError("estimate_holder_constant: alpha must lie in (0, 1]");
    if (sample_count < 2) throw DomainError("estimate_holder_constant: need at least two samples");
    const double T = curve.horizon();
    const double h = T / static_cast<double>(sample_count - 1);
    std::vector<Vec> points(sample_count);
    for (std::size_t i = 0; i < sample_count; ++i) points[i] = curve(h * static_cast<double>(i));
    // |t_i - t_j|^alpha depends only on j - i
    std::vector<double> gap_pow(sample_count);
    for (std::size_t k = 1; k < sample_count; ++k) gap_pow[k] = std::pow(h * static_cast<double>(k), alpha);

    std::vector<double> row_max(sample_count, 0.0);
    for_each_index(sample_count, exec, [&](std::size_t i) {
        double best = 0.0;
        for (std::size_t j = i + 1; j < sample_count; ++j)
            best = std::max(best, norm(points[j] - points[i]) / gap_pow[j - i]);
        row_max[i] = best;
    });
    return 1.1 * *std::max_element(row_max.begin(), row_max.end());
}

// --- built-in families -------------------------------------------------------

std::optional<CurveKind> parse_curve_kind(const std::string& name) {
    if (name == "constant") return CurveKind::constant;
    if (name == "linear") return CurveKind::linear;
    if (name == "circle") return CurveKind::circle;
    if (name == "weierstrass") return CurveKind::weierstrass;
    return std::nullopt;
}

std::string to_string(CurveKind kind) {
    switch (kind) {
        case CurveKind::constant: return "constant";
        case CurveKind::linear: return "linear";
        case CurveKind::circle: return "circle";
        case CurveKind::weierstrass: return "weierstrass";
    }
    return "unknown";
}

HolderCurve make_builtin_curve(const CurveSpec& spec) {
    const int N = spec.dim;
    if (N < 1 || N > kMaxDim) throw DomainError("curve: N must lie in [1, " + std::to_string(kMaxDim) + "]");
    if (!(spec.horizon > 0.0)) throw DomainError("curve: T must be positive");
    if (!(spec.alpha > 0.0 && spec.alpha <= 1.0)) throw DomainError("curve: alpha must lie in (0, 1]");
    if (spec.holder_constant && !(*spec.holder_constant >= 0.0)) throw DomainError("curve: L must be non-negative");
    const Vec center = spec.center.size() == 0 ? Vec::zeros(N) : spec.center;
    if (center.size() != N) throw DomainError("curve: center has wrong dimension");
    const double T = spec.horizon;
    const double alpha = spec.alpha;

    switch (spec.kind) {
        case CurveKind::constant: {
            const double L = spec.holder_constant.value_or(0.0);
            return HolderCurve(N, T, alpha, L, [center](double) { return center; });
        }
        case CurveKind::linear: {
            if (spec.velocity.size() != N) throw DomainError("curve: linear velocity has wrong dimension");
            const Vec v = spec.velocity;
            const double L = spec.holder_constant.value_or(norm(v) * std::pow(T, 1.0 - alpha));
            return HolderCurve(N, T, alpha, L, [center, v](double t) { return center + t * v; });
        }
        case CurveKind::circle: {
            if (N < 2) throw DomainError("curve: circle needs N >= 2");
            if (!(spec.radius > 0.0)) throw DomainError("curve: circle radius must be positive");
            const double R = spec.radius;
            const double w = spec.angular_speed;
            const double lip = R * std::abs(w);
            double L = lip;
            if (alpha < 1.0) L = std::min(lip * std::pow(T, 1.0 - alpha), std::pow(lip, alpha) * std::pow(2.0 * R, 1.0 - alpha));
            L = spec.holder_constant.value_or(L);
            return HolderCurve(N, T, alpha, L, [center, R, w](double t) {
                Vec x = center;
                x[0] += R * std::cos(w * t);
                x[1] += R * std::sin(w * t);
                return x;
            });
        }
        case CurveKind::weierstrass: {
            if (!(alpha < 1.0)) throw DomainError("curve: weierstrass needs alpha in (0, 1)");
            if (spec.base < 2) throw DomainError("curve: weierstrass base b must be an integer >= 2");
            if (spec.terms < 0) throw DomainError("curve: weierstrass truncation K must be >= 0");
            if (spec.coordinates.empty()) throw DomainError("curve: weierstrass needs at least one coordinate");
            std::set<int> seen;
            CosineSeries series{center, {}};
            for (std::size_t pos = 0; pos < spec.coordinates.size(); ++pos) {
                const int c = spec.coordinates[pos];
                if (c < 0 || c >= N || !seen.insert(c).second)
                    throw DomainError("curve: weierstrass coordinates must be distinct indices below N");
                const double phase = (pos % 2 == 1) ? -0.5 * std::numbers::pi : 0.0;
                for (int k = 0; k <= spec.terms; ++k) {
                    const double freq = std::pow(static_cast<double>(spec.base), k);
                    series.terms.push_back({c, spec.amplitude * std::pow(freq, -alpha), freq, phase});
                }
            }
            HolderCurve curve(N, T, alpha, 1.0, std::move(series));
            const double L = spec.holder_constant ? *spec.holder_constant
                                                  : estimate_holder_constant(curve, alpha, 4096);
            return curve.with_holder(alpha, L);
        }
    }
    throw DomainError("curve: unknown kind");
}

}  // namespace heatsing
