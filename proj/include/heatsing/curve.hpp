#pragma once

#include <functional>
#include <memory>
#include <optional>
#include <span>
#include <string>
#include <vector>

#include "heatsing/parallel.hpp"
#include "heatsing/vec.hpp"

namespace heatsing {

/// How a curve given on [0, T] is continued to the whole real line.
enum class Extension {
    clamp,    ///< xi(t) = xi(0) for t < 0 and xi(T) for t > T
    natural,  ///< the closed-form expression is used for every t
};

/// One term amplitude * cos(frequency * t + phase) in coordinate `coord`.
struct CosineTerm {
    int coord = 0;
    double amplitude = 0.0;
    double frequency = 0.0;
    double phase = 0.0;
};

/// Trigonometric representation offset + sum of cosine terms, valid on R.
struct CosineSeries {
    Vec offset;
    std::vector<CosineTerm> terms;

    Vec evaluate(double t) const;
};

/// A continuous trajectory t -> xi(t) in R^N, Hölder continuous with
/// exponent alpha and constant L on [0, T]. Copies share the evaluator.
class HolderCurve {
public:
    using Evaluator = std::function<Vec(double)>;

    HolderCurve(int dim, double horizon, double exponent, double holder_constant, Evaluator evaluator,
                Extension extension = Extension::clamp);

    /// Curve defined by a cosine series; extended naturally to R.
    HolderCurve(int dim, double horizon, double exponent, double holder_constant, CosineSeries series);

    int dim() const { return dim_; }
    double horizon() const { return horizon_; }
    double exponent() const { return exponent_; }
    double holder_constant() const { return holder_constant_; }
    Extension extension() const { return extension_; }

    /// Position at any real t, using the extension outside [0, T].
    Vec operator()(double t) const;

    const CosineSeries* series() const { return series_.get(); }

    /// Same trajectory with a different declared exponent and constant.
    HolderCurve with_holder(double exponent, double holder_constant) const;

    HolderCurve translated(const Vec& shift) const;

private:
    int dim_;
    double horizon_;
    double exponent_;
    double holder_constant_;
    Extension extension_;
    std::shared_ptr<const Evaluator> evaluator_;
    std::shared_ptr<const CosineSeries> series_;
};

/// a * xi + b * zeta, evaluated pointwise (no series shortcut).
HolderCurve combine(double a, const HolderCurve& xi, double b, const HolderCurve& zeta);

// --- mollifier -------------------------------------------------------------

/// Normalization A of the bump A exp(-1/(1 - t^2)); computed once.
double mollifier_normalization();

/// The standard mollifier: A exp(-1/(1 - t^2)) on |t| < 1, zero elsewhere.
double mollifier_rho(double t);

/// d rho / dt.
double mollifier_rho_prime(double t);

/// Fourier cosine transform of rho: integral of rho(tau) cos(k tau).
double mollifier_cosine_transform(double k);

enum class MollifyRoute {
    automatic,   ///< series when the curve has one, otherwise quadrature
    quadrature,  ///< adaptive quadrature of the convolution and of rho'
    series,      ///< termwise damping of a cosine series (exact)
};

struct MollifyOptions {
    double tol = 1e-10;
    MollifyRoute route = MollifyRoute::automatic;
};

/// xi^eps = rho^eps * xi with rho^eps(t) = rho(t / eps) / eps.
class MollifiedCurve {
public:
    const HolderCurve& base() const { return base_; }
    double epsilon() const { return epsilon_; }
    MollifyRoute route() const { return route_; }

    Vec operator()(double t) const;
    Vec derivative(double t) const;

    /// The identity smoothing of a curve that does not move (L = 0).
    static MollifiedCurve exact(const HolderCurve& constant_curve);

private:
    friend MollifiedCurve mollify(const HolderCurve&, double, const MollifyOptions&);

    MollifiedCurve(HolderCurve base, double epsilon, double tol, MollifyRoute route);

    HolderCurve base_;
    double epsilon_;
    double tol_;
    MollifyRoute route_;
    bool identity_ = false;
    std::vector<double> damping_;  // rho-hat(frequency * eps) per series term
};

MollifiedCurve mollify(const HolderCurve& curve, double epsilon, const MollifyOptions& options = {});

struct MollificationCheck {
    double epsilon = 0.0;
    double sup_coord_deviation = 0.0;  // max_i sup_t |xi_i - xi_i^eps|
    double sup_deviation = 0.0;        // sup_t |xi - xi^eps|
    double sup_coord_speed = 0.0;      // max_i sup_t |(xi_i^eps)_t|
    double bound_coord = 0.0;          // L eps^alpha
    double bound_sum = 0.0;            // sqrt(N) L eps^alpha
    double bound_speed = 0.0;          // A L eps^{alpha - 1}
    double slack = 0.05;
    bool pass_coord = false;
    bool pass_sum = false;
    bool pass_speed = false;
};

/// Dense equispaced sampling of both mollification bounds on [0, T].
MollificationCheck check_mollification(const HolderCurve& curve, double epsilon, std::size_t sample_count,
                                       const MollifyOptions& options = {}, Execution exec = Execution::parallel);

/// Largest |xi(t) - xi(s)| / |t - s|^alpha over all pairs of an equispaced
/// grid on [0, T], inflated by 10%.
double estimate_holder_constant(const HolderCurve& curve, double alpha, std::size_t sample_count,
                                Execution exec = Execution::parallel);

// --- built-in families -------------------------------------------------------

enum class CurveKind { constant, linear, circle, weierstrass };

std::optional<CurveKind> parse_curve_kind(const std::string& name);
std::string to_string(CurveKind kind);

struct CurveSpec {
    CurveKind kind = CurveKind::constant;
    int dim = 3;
    double horizon = 1.0;
    double alpha = 1.0;                     // declared Hölder exponent
    std::optional<double> holder_constant;  // estimated or analytic when absent

    Vec center;    // constant value, linear start, circle centre, weierstrass offset
    Vec velocity;  // linear
    double radius = 1.0;
    double angular_speed = 1.0;

    int base = 2;          // weierstrass b
    int terms = 24;        // weierstrass truncation K
    double amplitude = 1.0;
    std::vector<int> coordinates{0};  // weierstrass coordinates; odd positions use sine
};

/// Builds one of the built-in curves. Throws DomainError on invalid parameters.
HolderCurve make_builtin_curve(const CurveSpec& spec);

}  // namespace heatsing
