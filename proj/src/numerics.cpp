#include "heatsing/numerics.hpp"

#include <array>
#include <cmath>
#include <limits>
#include <numbers>
#include <queue>
#include <string>
#include <vector>

namespace heatsing {

namespace {

// Kronrod abscissae (descending, x_{2j+1} are the Gauss nodes) and weights.
constexpr std::array<double, 8> kXgk = {
    0.991455371120812639206854697526329, 0.949107912342758524526189684047851,
    0.864864423359769072789712788640926, 0.741531185599394439863864773280788,
    0.586087235467691130294144845693013, 0.405845151377397166906606412076961,
    0.207784955007898467600689403773245, 0.000000000000000000000000000000000};
constexpr std::array<double, 8> kWgk = {
    0.022935322010529224963732008058970, 0.063092092629978553290700663189204,
    0.104790010322250183839876322541518, 0.140653259715525918745189590510238,
    0.169004726639267902826583426598550, 0.190350578064785409913256402421014,
    0.204432940075298892414161999234649, 0.209482141084727828012999174891714};
constexpr std::array<double, 4> kWg = {
    0.129484966168869693270611432679082, 0.279705391489276667901467771423780,
    0.381830050505118944950369775488975, 0.417959183673469387755102040816327};

struct Panel {
    double a;
    double b;
    double value;
    double error;
    bool splittable;
};

struct WorseError {
    bool operator()(const Panel& x, const Panel& y) const { return x.error < y.error; }
};

// One Gauss-Kronrod 7/15 panel with the QUADPACK error heuristic.
Panel gauss_kronrod(const ScalarFunction& f, double a, double b) {
    const double center = 0.5 * (a + b);
    const double half = 0.5 * (b - a);
    const double fc = f(center);
    double kronrod = fc * kWgk[7];
    double gauss = fc * kWg[3];
    double resabs = std::abs(kronrod);
    std::array<double, 7> f1{};
    std::array<double, 7> f2{};
    for (int j = 0; j < 7; ++j) {
        const double dx = half * kXgk[j];
        f1[j] = f(center - dx);
        f2[j] = f(center + dx);
        const double pair = f1[j] + f2[j];
        kronrod += kWgk[j] * pair;
        resabs += kWgk[j] * (std::abs(f1[j]) + std::abs(f2[j]));
        if (j % 2 == 1) gauss += kWg[j / 2] * pair;
    }
    const double mean = 0.5 * kronrod;
    double resasc = kWgk[7] * std::abs(fc - mean);
    for (int j = 0; j < 7; ++j) resasc += kWgk[j] * (std::abs(f1[j] - mean) + std::abs(f2[j] - mean));

    const double value = kronrod * half;
    resabs *= std::abs(half);
    resasc *= std::abs(half);
    double err = std::abs((kronrod - gauss) * half);
    if (resasc != 0.0 && err != 0.0) err = resasc * std::min(1.0, std::pow(200.0 * err / resasc, 1.5));
    constexpr double eps = std::numeric_limits<double>::epsilon();
    if (resabs > std::numeric_limits<double>::min() / (50.0 * eps)) err = std::max(50.0 * eps * resabs, err);
    if (!std::isfinite(value) || !std::isfinite(err)) {
        throw Error("integrand is not finite on [" + std::to_string(a) + ", " + std::to_string(b) + "]");
    }

    // Once the panel is a few ulps wide it cannot be bisected meaningfully.
    const double scale = std::max(std::abs(a), std::abs(b));
    const bool splittable = (b - a) > 1e3 * eps * std::max(scale, std::numeric_limits<double>::min());
    return {a, b, value, err, splittable};
}

}  // namespace

QuadratureResult integrate_adaptive(const ScalarFunction& f, double a, double b, double tol) {
    return integrate_adaptive(f, a, b, QuadratureOptions{tol, 0.0, 10000});
}

QuadratureResult integrate_adaptive(const ScalarFunction& f, double a, double b,
                                    const QuadratureOptions& options) {
    if (!(a < b)) throw DomainError("integrate_adaptive: need a < b");
    if (!(options.abs_tol > 0.0 || options.rel_tol > 0.0))
        throw DomainError("integrate_adaptive: tolerance must be positive");
    if (options.max_panels < 1) throw DomainError("integrate_adaptive: empty panel budget");

    std::priority_queue<Panel, std::vector<Panel>, WorseError> active;
    double frozen_value = 0.0;
    double frozen_error = 0.0;
    std::size_t panels = 1;

    Panel first = gauss_kronrod(f, a, b);
    double value = first.value;
    double error = first.error;
    if (first.splittable) {
        active.push(first);
    } else {
        frozen_value += first.value;
        frozen_error += first.error;
    }

    auto target = [&](double v) { return std::max(options.abs_tol, options.rel_tol * std::abs(v)); };

    while (!active.empty() && error > target(value)) {
        if (panels + 1 > options.max_panels) {
            throw QuadratureBudgetExceeded(
                "integrate_adaptive: panel budget of " + std::to_string(options.max_panels) + " exhausted",
                QuadratureResult{value, error, 15 * (2 * panels - 1)});
        }
        const Panel worst = active.top();
        active.pop();
        const double mid = 0.5 * (worst.a + worst.b);
        const Panel left = gauss_kronrod(f, worst.a, mid);
        const Panel right = gauss_kronrod(f, mid, worst.b);
        ++panels;
        value += left.value + right.value - worst.value;
        error += left.error + right.error - worst.error;
        for (const Panel& p : {left, right}) {
            if (p.splittable) {
                active.push(p);
            } else {
                frozen_value += p.value;
                frozen_error += p.error;
            }
        }
    }

    // Re-sum from the panels to shed the drift of the running updates.
    double sum = frozen_value;
    double err = frozen_error;
    while (!active.empty()) {
        sum += active.top().value;
        err += active.top().error;
        active.pop();
    }
    return {sum, err, 15 * (2 * panels - 1)};
}

QuadratureResult integrate_semi_infinite(const ScalarFunction& f, double a, double tol) {
    return integrate_semi_infinite(f, a, QuadratureOptions{tol, 0.0, 10000});
}

QuadratureResult integrate_semi_infinite(const ScalarFunction& f, double a,
                                         const QuadratureOptions& options) {
    if (!(a >= 0.0)) throw DomainError("integrate_semi_infinite: need a >= 0");
    auto mapped = [&](double u) {
        const double w = 1.0 - u;
        const double sigma = a + u / w;
        if (!std::isfinite(sigma)) return 0.0;
        const double fv = f(sigma);
        if (fv == 0.0) return 0.0;
        return fv / (w * w);
    };
    return integrate_adaptive(mapped, 0.0, 1.0, options);
}

double gamma_fn(double x) {
    if (!(x > 0.0)) throw DomainError("gamma_fn: argument must be positive");
    return std::tgamma(x);
}

double unit_ball_volume(int dim) {
    if (dim < 1) throw DomainError("unit_ball_volume: dimension must be >= 1");
    const double half = 0.5 * dim;
    return std::pow(std::numbers::pi, half) / std::tgamma(half + 1.0);
}

double erfc_fn(double x) { return std::erfc(x); }

}  // namespace heatsing
