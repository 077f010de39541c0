#pragma once

#include <cstdint>
#include <map>
#include <span>
#include <vector>

#include "heatsing/curve.hpp"
#include "heatsing/parallel.hpp"
#include "heatsing/vec.hpp"

namespace heatsing {

// --- radial profile in the shell coordinate sigma ----------------------------

/// Smooth step e^{-1/s} / (e^{-1/s} + e^{-1/(1-s)}); 0 for s <= 0, 1 for s >= 1.
double profile_eta(double sigma);

/// d eta / d sigma. Zero outside (0, 1).
double profile_x(double sigma);

/// eta'' + (N - 1)/(sigma + 7) eta', so that the Laplacian is (100/r^2) Y.
double profile_y(double sigma, int dim);

/// The same expression with the factor sigma^2 (1 - sigma^2) that appears in
/// a commonly quoted misprint of this profile instead of sigma^2 (1 - sigma)^2. Kept only to
/// report how far it is from the finite-difference Laplacian.
double profile_y_printed(double sigma, int dim);

/// Suprema of |X| and |Y| over (0, 1) on a grid of 2 * 10^5 points.
double profile_x_sup();
double profile_y_sup(int dim);

// --- the family eta^r bound to a curve ----------------------------------------

/// eta^r(x, t) = profile_eta(sigma) with sigma = (10/r)(|x - xi^{eps_r}(t)| - 7r/10)
/// and eps_r = (r / (10 N L))^{1/alpha}.
class CutoffFamily {
public:
    explicit CutoffFamily(HolderCurve curve, MollifyOptions options = {});

    const HolderCurve& curve() const { return curve_; }
    int dim() const { return curve_.dim(); }

    /// eps_r; zero for a stationary curve, which needs no smoothing.
    double smoothing_scale(double r) const;

    /// Mollifies for each radius up front; later queries at these radii are
    /// read-only and therefore safe from several threads.
    void prepare(std::span<const double> radii);

    /// The smoothed curve at eps_r, from the cache when prepared.
    MollifiedCurve smoothed(double r) const;

    double sigma(const Vec& x, double t, double r) const;
    double eta(const Vec& x, double t, double r) const;
    Vec gradient(const Vec& x, double t, double r) const;
    double laplacian(const Vec& x, double t, double r) const;
    double time_derivative(const Vec& x, double t, double r) const;

    /// All of the above at once, optionally with an explicitly supplied smoothed curve.
    struct Local {
        double sigma;
        double eta;
        Vec gradient;
        double laplacian;
        double time_derivative;
    };
    Local evaluate(const MollifiedCurve& smooth, const Vec& x, double t, double r) const;
    Local evaluate(const Vec& x, double t, double r) const;

private:
    const MollifiedCurve* cached(double r) const;

    HolderCurve curve_;
    MollifyOptions options_;
    std::map<double, MollifiedCurve> cache_;
};

// --- verification -----------------------------------------------------------

struct CutoffBoundRow {
    double r = 0.0;
    double epsilon = 0.0;
    double sup_scaled_grad = 0.0;  // r |grad eta|
    double sup_scaled_lap = 0.0;   // r^2 |lap eta|
    double sup_scaled_dt = 0.0;    // r^{1/alpha} |eta_t|
};

struct CutoffBoundTable {
    std::vector<CutoffBoundRow> rows;
    double ratio_grad = 1.0;  // max/min across r, per column
    double ratio_lap = 1.0;
    double ratio_dt = 1.0;
    double window = 4.0;
    bool bounded = false;
};

/// Monte Carlo sup over the shell of the three scaled derivatives, one row
/// per r, plus a 1-D sigma grid for the t-independent columns.
CutoffBoundTable verify_cutoff_bounds(CutoffFamily& family, std::span<const double> radii,
                                      std::size_t sample_count, std::uint64_t seed,
                                      Execution exec = Execution::parallel);

struct DerivativeCheck {
    double r = 0.0;
    std::size_t samples = 0;
    double max_err_grad = 0.0;  // worst |fd - closed| / (|closed| + floor * scale)
    double max_err_lap = 0.0;
    double max_err_dt = 0.0;
    double max_err_lap_printed = 0.0;  // the misprinted Y against the same oracle
};

struct DerivativeCheckOptions {
    double grad_step = 1e-6;  // times r
    double lap_step = 1e-4;   // times r
    double time_step = 1e-3;  // times min(eps_r, r / (10 |xi_t|))
    // Absolute error floors relative to the natural scales 10/r, 100/r^2 and
    // 10/r |xi_t|. They sit an order above the roundoff of each difference
    // at the default steps and matter only where the closed form nears zero.
    double grad_floor = 1e-6;
    double lap_floor = 1e-5;
    double dt_floor = 1e-6;
};

/// Compares closed forms against centered finite differences at random shell points.
DerivativeCheck check_cutoff_derivatives(const CutoffFamily& family, double r, std::size_t sample_count,
                                         std::uint64_t seed, const DerivativeCheckOptions& options = {},
                                         Execution exec = Execution::parallel);

}  // namespace heatsing
