#include <doctest.h>

#include <cmath>

#include "heatsing/errors.hpp"
#include "heatsing/removability.hpp"

using namespace heatsing;

namespace {

HolderCurve circle(int N) {
    CurveSpec s;
    s.kind = CurveKind::circle;
    s.dim = N;
    s.radius = 0.5;
    s.angular_speed = 2.0;
    return make_builtin_curve(s);
}

std::vector<double> grid() {
    std::vector<double> g;
    for (int k = 0; k <= 16; ++k) g.push_back(0.5 * std::pow(10.0, -0.25 * k));
    return g;
}

/// Synthetic samples of u = c d^{-p} at geometric distances.
std::vector<FieldSample> synthetic(double c, double p, bool log_profile = false) {
    std::vector<FieldSample> s;
    for (int k = 0; k <= 80; ++k) {
        const double d = 0.5 * std::pow(10.0, -0.05 * k);
        s.push_back({0.5, d, log_profile ? c * std::sqrt(std::log(1.0 / d)) : c * std::pow(d, -p)});
    }
    return s;
}

}  // namespace

TEST_CASE("power criterion on synthetic fields") {
    const auto g = grid();
    const auto zero = synthetic(0.0, 0.0);
    const CriterionResult z = evaluate_power_criterion(zero, 0.1, 1.0, g, 1e-4);
    CHECK(z.passed);
    CHECK(z.witness_radius == doctest::Approx(0.5));

    // d^{-1/2} against eps d^{-1}: passes for d <= eps^2
    for (double eps : {0.5, 0.2, 0.1}) {
        const auto half = synthetic(1.0, 0.5);
        const CriterionResult r = evaluate_power_criterion(half, eps, 1.0, g, 1e-4);
        CHECK(r.passed);
        CHECK(r.witness_radius <= eps * eps * (1 + 1e-12));
        CHECK(r.witness_radius >= eps * eps / std::pow(10.0, 0.25) / (1 + 1e-12));
    }
    // a field that saturates the bound with coefficient 1 fails for eps < 1
    const auto crit = synthetic(1.0, 1.0);
    CHECK(!evaluate_power_criterion(crit, 0.5, 1.0, g, 1e-4).passed);
}

TEST_CASE("monotone in eps") {
    const auto g = grid();
    const auto half = synthetic(1.0, 0.5);
    double prev = 0.0;
    for (double eps : {0.05, 0.1, 0.2, 0.5}) {
        const CriterionResult r = evaluate_power_criterion(half, eps, 1.0, g, 1e-4);
        CHECK(r.passed);
        CHECK(r.witness_radius >= prev);
        prev = r.witness_radius;
    }
}

TEST_CASE("log criterion") {
    const auto g = grid();
    const auto zero = synthetic(0.0, 0.0);
    for (double eps : {0.5, 0.1}) CHECK(evaluate_log_criterion(zero, eps, g, 1e-4).passed);
    const auto logf = synthetic(1.0, 0.0, true);  // sqrt(log(1/d))
    const CriterionResult r = evaluate_log_criterion(logf, 0.5, g, 1e-4);
    CHECK(r.passed);
    CHECK(r.witness_radius <= std::exp(-4.0) * (1 + 1e-12));
}

TEST_CASE("growth exponent and its scaling property") {
    const SingularManifold loc = SingularManifold::point(circle(3));
    MockSpec p;
    p.kind = MockKind::power;
    p.exponent = 1.0;
    const SolutionField f = mock_field(loc, p);
    std::vector<double> radii{1e-1, 3e-2, 1e-2, 3e-3, 1e-3};
    const GrowthFit a = growth_exponent(f, 0.5, radii);
    CHECK(a.slope == doctest::Approx(-1.0).epsilon(1e-6));
    SolutionField scaled = f;
    scaled.u = [u = f.u](const Vec& x, double t) { return 3.0 * u(x, t); };
    const GrowthFit b = growth_exponent(scaled, 0.5, radii);
    CHECK(b.slope == doctest::Approx(a.slope).epsilon(1e-9));
    CHECK(b.intercept - a.intercept == doctest::Approx(std::log(3.0)).epsilon(1e-9));

    MockSpec one;
    one.kind = MockKind::constant;
    CHECK(std::abs(growth_exponent(mock_field(loc, one), 0.5, radii).slope) <= 1e-12);
    MockSpec zero;
    CHECK_THROWS_AS(growth_exponent(mock_field(loc, zero), 0.5, radii), DegenerateFitError);
}

TEST_CASE("criterion selection") {
    CHECK(criterion_for(SingularManifold::point(circle(3))) == CriterionKind::point_power);
    CHECK(criterion_for(SingularManifold::point(circle(2))) == CriterionKind::point_log);
    ManifoldSpec s;
    s.dim = 4;
    CHECK(criterion_for(make_builtin_manifold(s)) == CriterionKind::set_power);
    s.dim = 3;
    CHECK(criterion_for(make_builtin_manifold(s)) == CriterionKind::set_log);
    s.dim = 2;
    CHECK_THROWS_AS(criterion_for(make_builtin_manifold(s)), DomainError);
}

TEST_CASE("set criterion with a circle locus") {
    ManifoldSpec s;
    s.dim = 4;
    const SingularManifold loc = make_builtin_manifold(s);
    MockSpec z;
    const auto g = grid();
    SamplingOptions so;
    so.time_samples = 4;
    const CriterionResult r = test_set_criterion(mock_field(loc, z), 0.25, 0.75, 0.1, g, so);
    CHECK(r.passed);
    CHECK(r.witness_radius == doctest::Approx(0.5));
    MockSpec sat;
    sat.kind = MockKind::power;
    sat.exponent = 1.0;
    CHECK(!test_set_criterion(mock_field(loc, sat), 0.25, 0.75, 0.5, g, so).passed);
}

TEST_CASE("classification of the singular solution and of smooth fields") {
    for (int N : {2, 3}) {
        const HolderCurve c = circle(N);
        const RemovabilityReport f = classify(singular_solution_field(SingularField(c)));
        CHECK(f.verdict == Verdict::non_removable);
        if (N == 3) {
            CHECK(f.exponent_estimate == doctest::Approx(-1.0).epsilon(0.05));
            CHECK(f.coefficient_estimate == doctest::Approx(1.0 / (4.0 * M_PI)).epsilon(0.1));
        } else {
            CHECK(std::abs(f.exponent_estimate) <= 0.05);
        }
        MockSpec g;
        g.kind = MockKind::gaussian;
        CHECK(classify(mock_field(SingularManifold::point(c), g)).verdict == Verdict::removable);
    }
    MockSpec h;
    h.kind = MockKind::power;
    h.exponent = 0.5;
    CHECK(classify(mock_field(SingularManifold::point(circle(3)), h)).verdict == Verdict::removable);
}

TEST_CASE("sampling is reproducible and serial equals parallel") {
    const SolutionField f = singular_solution_field(SingularField(circle(3)));
    SamplingOptions so;
    so.time_samples = 4;
    const auto a = sample_window(f, 0.25, 0.75, so, Execution::serial);
    const auto b = sample_window(f, 0.25, 0.75, so, Execution::parallel);
    REQUIRE(a.size() == b.size());
    for (std::size_t i = 0; i < a.size(); ++i) {
        CHECK(a[i].d == b[i].d);
        CHECK(a[i].abs_u == b[i].abs_u);
    }
}
