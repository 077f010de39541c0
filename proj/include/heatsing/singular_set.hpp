#pragma once

#include <cstdint>
#include <functional>
#include <memory>
#include <optional>
#include <span>
#include <string>
#include <vector>

#include "heatsing/curve.hpp"
#include "heatsing/numerics.hpp"
#include "heatsing/parallel.hpp"
#include "heatsing/vec.hpp"

namespace heatsing {

/// A moving m-dimensional set Xi(t) = { xi(s, t) : s in [0, 1]^m } in R^N.
/// m = 0 is a single moving point.
class SingularManifold {
public:
    using Map = std::function<Vec(const Vec& s, double t)>;
    /// Columns d xi / d s_i, i < m.
    using Jacobian = std::function<std::vector<Vec>(const Vec& s, double t)>;

    /// Without a Jacobian, columns come from central differences.
    SingularManifold(int m, int dim, double horizon, Map map, Jacobian jacobian = {});

    /// The point manifold t -> curve(t).
    static SingularManifold point(const HolderCurve& curve);

    int param_dim() const { return m_; }
    int dim() const { return dim_; }
    double horizon() const { return horizon_; }

    Vec operator()(const Vec& s, double t) const { return (*map_)(s, t); }
    std::vector<Vec> jacobian(const Vec& s, double t) const;

    /// x -> Q x + shift applied to every point; rows of Q given in `rotation`.
    SingularManifold transformed(std::span<const Vec> rotation, const Vec& shift) const;

    /// xi(s, t) + motion(t).
    SingularManifold moving(const HolderCurve& motion) const;

private:
    int m_;
    int dim_;
    double horizon_;
    std::shared_ptr<const Map> map_;
    std::shared_ptr<const Jacobian> jacobian_;
};

enum class ManifoldKind { point, circle, segment, square, torus };

std::optional<ManifoldKind> parse_manifold_kind(const std::string& name);
std::string to_string(ManifoldKind kind);

struct ManifoldSpec {
    ManifoldKind kind = ManifoldKind::circle;
    int dim = 4;
    double horizon = 1.0;
    Vec center;                 // defaults to the origin
    double radius = 1.0;        // circle, torus major radius, square side
    double minor_radius = 0.25; // torus
    Vec end;                    // segment runs from center to end
    std::optional<CurveSpec> motion;  // added to every point, e.g. a Weierstrass path
};

/// circle: center + R (cos 2 pi s, sin 2 pi s, 0, ...); segment: center + s (end - center);
/// square: center + R (s1, s2, 0, ...); torus: the standard embedding in the first
/// three coordinates; point: center.
SingularManifold make_builtin_manifold(const ManifoldSpec& spec);

// --- distance ---------------------------------------------------------------------

struct DistanceOptions {
    int grid_per_axis = 64;
    int max_iterations = 60;
    double step_tol = 1e-13;  // on the parameter update, sup norm
    int max_refinements = 2;  // grid doublings after a failed descent
};

struct DistanceResult {
    double distance = 0.0;
    Vec parameter;  // argmin s
    bool approximate = false;
};

/// d(., Xi(t)) at a fixed t: the seeding grid is built once and shared by
/// every query, which makes per-sample Monte Carlo affordable.
class DistanceField {
public:
    DistanceField(const SingularManifold& manifold, double t, DistanceOptions options = {});

    DistanceResult operator()(const Vec& x) const;

    /// Cheap bound d(x) >= nearest grid point distance minus the grid spacing.
    double lower_bound(const Vec& x) const;

    /// Box containing Xi(t) inflated by `margin`, with slack for the grid spacing.
    Box bounding_box(double margin) const;

private:
    DistanceResult search(const Vec& x) const;
    bool descend(const Vec& x, Vec& s, double& dist) const;

    SingularManifold manifold_;
    double t_;
    DistanceOptions options_;
    std::vector<Vec> params_;
    std::vector<Vec> points_;
    double spacing_slack_ = 0.0;
};

DistanceResult distance(const SingularManifold& manifold, const Vec& x, double t, const DistanceOptions& options = {});

// --- rank condition and measures -------------------------------------------------

struct RankReport {
    double min_singular_value = 0.0;  // +inf for m = 0
    Vec parameter;
    double time = 0.0;
    std::size_t samples = 0;
    bool pass = false;  // min_singular_value >= threshold
};

/// Smallest singular value of the N x m Jacobian over random (s, t).
RankReport jacobian_rank_check(const SingularManifold& manifold, std::size_t sample_count, std::uint64_t seed = 1,
                               double threshold = 1e-8);

/// Integral over [0, 1]^m of sqrt(det(J^T J)) at time t; 1 for a point.
double surface_measure(const SingularManifold& manifold, double t, double tol = 1e-9);

/// Largest |xi(s, t) - xi(s, t')| / |t - t'|^alpha over a grid of s and t pairs, inflated by 10%.
double estimate_time_holder_constant(const SingularManifold& manifold, double alpha, std::size_t s_samples = 16,
                                     std::size_t t_samples = 256);

// --- tubes -------------------------------------------------------------------------

enum class TubeKernel {
    power,  ///< d^{m + 2 - N}, needs N >= m + 3
    log,    ///< log(1/d), needs N = m + 2
};

struct TubeOptions {
    std::size_t samples = 1'000'000;
    std::uint64_t seed = 1;
    DistanceOptions distance;
};

struct TubeIntegral {
    double value = 0.0;
    double std_error = 0.0;
    std::size_t samples = 0;
    std::size_t inside = 0;  // samples with d < r
};

/// Monte Carlo integral of the kernel over A_{r,t} = { d(x, Xi(t)) < r }.
TubeIntegral tube_integral(const SingularManifold& manifold, double t, double r, TubeKernel kernel,
                           const TubeOptions& options = {}, Execution exec = Execution::parallel);

struct TubeRow {
    double r = 0.0;
    double integral = 0.0;
    double std_error = 0.0;
    double scaled = 0.0;  // integral / r^2, or / (r^2 (1 + log(1/r))) for the log kernel
};

struct TubeTable {
    std::vector<TubeRow> rows;
    double ratio = 1.0;  // max/min of the scaled column
    double window = 4.0;
    bool bounded = false;
};

TubeTable verify_tube(const SingularManifold& manifold, double t, std::span<const double> radii, TubeKernel kernel,
                      const TubeOptions& options = {}, Execution exec = Execution::parallel);

}  // namespace heatsing
