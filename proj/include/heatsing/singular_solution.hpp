#pragma once

#include <cstdint>
#include <functional>
#include <span>
#include <string>
#include <vector>

#include "heatsing/curve.hpp"
#include "heatsing/numerics.hpp"
#include "heatsing/parallel.hpp"
#include "heatsing/vec.hpp"

namespace heatsing {

/// Gaussian heat kernel (4 pi t)^{-N/2} exp(-|x|^2 / 4t), N = x.size().
double heat_kernel(const Vec& x, double t);

/// 1/(N(N-2) omega_N) for N >= 3 and 1/(2 pi) (the log slope) for N = 2.
double asymptotic_constant(int dim);

enum class FieldRoute {
    automatic,  ///< sigma form for |z| <= switch_ratio * sqrt(t), direct otherwise
    sigma,      ///< substitution t - s = |z|^2 / (4 sigma)
    direct,     ///< adaptive quadrature in s
};

struct FieldOptions {
    double rel_tol = 1e-12;
    std::size_t max_panels = 20000;
    double switch_ratio = 0.1;
    FieldRoute route = FieldRoute::automatic;
    // Rough curves (many unresolved oscillations) never meet a tight error
    // target; when set, an exhausted budget yields the partial sum instead of
    // an exception. The reported error estimate stays honest.
    bool accept_partial = false;
};

/// F(x, t) = integral over (0, t) of Phi(x - xi(s), t - s) ds.
class SingularField {
public:
    explicit SingularField(HolderCurve curve, FieldOptions options = {});

    const HolderCurve& curve() const { return curve_; }
    int dim() const { return curve_.dim(); }
    const FieldOptions& options() const { return options_; }

    double operator()(const Vec& x, double t) const { return evaluate(x, t).value; }
    QuadratureResult evaluate(const Vec& x, double t) const;
    QuadratureResult evaluate(const Vec& x, double t, FieldRoute route) const;

    /// F^tau(x, t): the same integral over (0, t - tau).
    double truncated(const Vec& x, double t, double tau) const;

    /// F at many points; values[i] = F(points[i], times[i]).
    std::vector<double> evaluate_many(std::span<const Vec> points, std::span<const double> times,
                                      Execution exec = Execution::parallel) const;

private:
    HolderCurve curve_;
    FieldOptions options_;
};

// --- test functions -------------------------------------------------------------

/// Smooth compactly supported phi with exact phi_t and Laplacian.
struct TestFunction {
    std::function<double(const Vec&, double)> value;
    std::function<double(const Vec&, double)> dt;
    std::function<double(const Vec&, double)> laplacian;
    Box space;
    double t_lo = 0.0;
    double t_hi = 0.0;
};

/// amplitude * B((t - t0)/t_half) * prod_i B((x_i - c_i)/w_i) with B(s) = exp(-1/(1 - s^2)).
TestFunction bump_test_function(const Vec& center, const Vec& half_widths, double t0, double t_half,
                                double amplitude = 1.0);

/// 1-D bump and its first two derivatives.
double bump_b(double s);
double bump_b1(double s);
double bump_b2(double s);

// --- checks --------------------------------------------------------------------

struct ConcentrationRow {
    double tau = 0.0;
    double value = 0.0;
    double deviation = 0.0;  // |value - phi(xi(t), t)|
};

struct ConcentrationTable {
    double target = 0.0;
    std::vector<ConcentrationRow> rows;
    bool monotone = false;  // deviations non-increasing as tau decreases
};

/// Integral of phi(x, t) Phi(x - xi(t - tau), tau) dx for each tau, after the
/// substitution x = xi(t - tau) + 2 sqrt(tau) y. Supported for N <= 3.
ConcentrationTable concentration_check(const HolderCurve& curve, const TestFunction& phi, double t,
                                       std::span<const double> taus, double tol = 1e-12);

using SpaceTimeField = std::function<double(const Vec&, double)>;

/// u_t - Laplacian u by second-order central differences.
double heat_residual(const SpaceTimeField& u, const Vec& x, double t, double h);

/// Same, after checking that the stencil keeps (N + 1) h + 10 h away from the curve.
double heat_residual(const SpaceTimeField& u, const HolderCurve& curve, const Vec& x, double t, double h);

struct PairingOptions {
    // absolute tolerances of the time quadrature and of each spatial one
    double tol_t = 1e-6;
    double tol_space = 1e-6;
    std::size_t time_slabs = 1;                    // independent pieces of the t range
    std::size_t monte_carlo_samples = 10'000'000;  // N >= 3
    std::uint64_t seed = 1;
};

struct PairingResult {
    double lhs = 0.0;
    double rhs = 0.0;
    double lhs_error = 0.0;  // quadrature estimate, or Monte Carlo standard error
    std::string method;
};

/// lhs = integral of (-phi_t - Laplacian phi) F and rhs = integral of phi(xi(t), t) dt.
PairingResult distributional_pairing(const SingularField& field, const TestFunction& phi,
                                     const PairingOptions& options = {}, Execution exec = Execution::parallel);

struct AsymptoticSample {
    double radius = 0.0;
    double value = 0.0;   // mean of F(xi(t) + rho d, t) and F(xi(t) - rho d, t)
    double scaled = 0.0;  // F rho^{N-2}, or F / log(1/rho) for N = 2
};

struct AsymptoticEstimate {
    double coefficient = 0.0;
    double error_estimate = 0.0;
    double reference_constant = 0.0;
    double relative_error = 0.0;
    double rate = 0.0;  // Richardson exponent min(1, 2(2 alpha - 1)) (N >= 3)
    bool converged = true;
    std::string diagnostic;
    std::vector<AsymptoticSample> samples;
};

/// Richardson-extrapolated limit of F rho^{N-2} (N >= 3) or least-squares slope of
/// F against log(1/rho) (N = 2) along the line xi(t) +- rho * direction.
AsymptoticEstimate asymptotic_coefficient(const SingularField& field, double t, const Vec& direction,
                                          std::span<const double> radii, Execution exec = Execution::parallel);

}  // namespace heatsing
