#pragma once

#include <cstdint>
#include <functional>
#include <optional>
#include <span>
#include <string>
#include <vector>

#include "heatsing/parallel.hpp"
#include "heatsing/singular_set.hpp"
#include "heatsing/singular_solution.hpp"
#include "heatsing/vec.hpp"

namespace heatsing {

/// A field u(x, t) defined off a moving singular set, on Omega x (0, T).
struct SolutionField {
    std::function<double(const Vec&, double)> u;
    SingularManifold locus;
    Box omega;
    std::string label;

    int dim() const { return locus.dim(); }
    double horizon() const { return locus.horizon(); }
};

/// Bounding box of the locus over [0, T] inflated by `margin` in each coordinate.
Box default_domain(const SingularManifold& locus, double margin = 1.0);

/// u = F over the curve of `field`.
SolutionField singular_solution_field(const SingularField& field);

/// Simple fields used to exercise the criteria.
enum class MockKind {
    zero,
    constant,   ///< u = value
    gaussian,   ///< u = Phi(x - x0, t + 1), smooth everywhere
    power,      ///< u = d(x, Xi(t))^{-exponent}
    sqrt_log,   ///< u = sqrt(log(1/d))
};

std::optional<MockKind> parse_mock_kind(const std::string& name);

struct MockSpec {
    MockKind kind = MockKind::zero;
    double value = 1.0;
    double exponent = 0.5;
    Vec x0;  // gaussian centre; origin when empty
};

SolutionField mock_field(const SingularManifold& locus, const MockSpec& spec);

// --- criteria -----------------------------------------------------------------------

/// Which bound a locus calls for: d^{-(N-m-2)} when N >= m + 3, log(1/d) when N = m + 2.
enum class CriterionKind { point_power, point_log, set_power, set_log };

std::string to_string(CriterionKind kind);

/// Picks the criterion from N and m; throws for N < m + 2.
CriterionKind criterion_for(const SingularManifold& locus);

struct SamplingOptions {
    std::size_t time_samples = 32;
    std::size_t directions = 8;       // per time; normal samples for m >= 1
    std::size_t radii_per_decade = 4;
    double r_max = 0.5;
    double r_min = 1e-4;
    std::uint64_t seed = 1;
    DistanceOptions distance;
};

struct FieldSample {
    double t = 0.0;
    double d = 0.0;  // d(x, Xi(t))
    double abs_u = 0.0;
};

/// Points at geometrically spaced distances from the locus over [t1, t2].
/// Points outside Omega are skipped; samples landing on the locus are redrawn.
std::vector<FieldSample> sample_window(const SolutionField& field, double t1, double t2, const SamplingOptions& options,
                                       Execution exec = Execution::parallel);

struct CriterionResult {
    bool passed = false;
    double eps = 0.0;
    double witness_radius = 0.0;  // largest r of the grid that works; 0 on failure
    double failure_radius = 0.0;  // smallest distance at which the bound was violated
    double worst_ratio = 0.0;     // max |u| / bound over samples with d below the witness (or all)
    std::size_t samples = 0;
    std::size_t violations = 0;
    // Log criteria only: the bound read literally, over every sample with d < eps.
    std::optional<bool> literal_passed;
};

/// |u| <= eps / d^order for 0 < d < r. order = N - 2 for a point, N - m - 2 for a set.
CriterionResult evaluate_power_criterion(std::span<const FieldSample> samples, double eps, double order,
                                         std::span<const double> r_grid, double r_min);

/// |u| <= eps log(1/d) for 0 < d < r with r <= eps.
CriterionResult evaluate_log_criterion(std::span<const FieldSample> samples, double eps,
                                       std::span<const double> r_grid, double r_min);

/// Point locus, N >= 3.
CriterionResult test_point_criterion(const SolutionField& field, double t1, double t2, double eps,
                                     std::span<const double> r_grid, const SamplingOptions& options = {},
                                     Execution exec = Execution::parallel);

/// Point locus, N = 2.
CriterionResult test_log_criterion(const SolutionField& field, double t1, double t2, double eps,
                                   std::span<const double> r_grid, const SamplingOptions& options = {},
                                   Execution exec = Execution::parallel);

/// Any locus; the mode follows from N and m.
CriterionResult test_set_criterion(const SolutionField& field, double t1, double t2, double eps,
                                   std::span<const double> r_grid, const SamplingOptions& options = {},
                                   Execution exec = Execution::parallel);

// --- growth -----------------------------------------------------------------------

struct GrowthFit {
    double slope = 0.0;
    double intercept = 0.0;
    double residual = 0.0;  // rms of the fit
    std::size_t used = 0;   // radii that entered the fit
};

/// Least-squares fit of log(mean |u|) against log d, with |u| averaged over
/// `directions` points per radius. With log_profile the fit is of
/// log(mean |u| / log(1/d)), so a field like c log(1/d) has slope 0 and
/// intercept log c.
GrowthFit growth_exponent(const SolutionField& field, double t, std::span<const double> radii,
                          bool log_profile = false, std::size_t directions = 8, std::uint64_t seed = 1,
                          Execution exec = Execution::parallel);

// --- classification ----------------------------------------------------------------

enum class Verdict { removable, non_removable, indeterminate };

std::string to_string(Verdict v);

struct TimeWindow {
    double t1 = 0.0;
    double t2 = 0.0;
};

struct ClassifyOptions {
    std::vector<double> eps_list{0.5, 0.2, 0.1, 0.05};
    std::vector<TimeWindow> windows;  // default: [T/4, 3T/4]
    std::vector<double> r_grid;       // default: geometric from r_max to r_min, 4 per decade
    SamplingOptions sampling;
    std::size_t growth_radii = 9;
    double exponent_tolerance = 0.05;
    bool keep_samples = true;
};

struct CriterionRecord {
    double eps = 0.0;
    TimeWindow window;
    CriterionResult result;
};

struct RemovabilityReport {
    Verdict verdict = Verdict::indeterminate;
    CriterionKind criterion = CriterionKind::point_power;
    double criterion_order = 0.0;    // N - m - 2; 0 for the log criteria
    double exponent_estimate = 0.0;  // growth slope (log-profile slope for the log criteria)
    double coefficient_estimate = 0.0;
    double growth_residual = 0.0;
    std::vector<CriterionRecord> tests;
    std::vector<FieldSample> samples;  // every evaluated sample, window by window
    std::string reason;
};

RemovabilityReport classify(const SolutionField& field, const ClassifyOptions& options = {},
                            Execution exec = Execution::parallel);

}  // namespace heatsing
