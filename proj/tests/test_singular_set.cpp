#include <doctest.h>

#include <cmath>

#include "heatsing/errors.hpp"
#include "heatsing/numerics.hpp"
#include "heatsing/singular_set.hpp"

using namespace heatsing;

namespace {

SingularManifold unit_circle4() {
    ManifoldSpec s;
    s.kind = ManifoldKind::circle;
    s.dim = 4;
    return make_builtin_manifold(s);
}

SingularManifold still_point(int N) {
    ManifoldSpec s;
    s.kind = ManifoldKind::point;
    s.dim = N;
    return make_builtin_manifold(s);
}

}  // namespace

TEST_CASE("distance to built-in sets") {
    const SingularManifold c = unit_circle4();
    const DistanceResult on = distance(c, c(Vec{0.3}, 0.5), 0.5);
    CHECK(on.distance <= 1e-12);
    const DistanceResult d = distance(c, Vec{2.0, 0.0, 0.0, 0.0}, 0.5);
    CHECK(d.distance == doctest::Approx(1.0).epsilon(1e-12));
    CHECK(std::min(d.parameter[0], 1.0 - d.parameter[0]) <= 1e-9);
    CHECK(!d.approximate);

    ManifoldSpec s;
    s.kind = ManifoldKind::segment;
    s.dim = 3;
    s.center = Vec::zeros(3);
    s.end = Vec{1.0, 0.0, 0.0};
    const DistanceResult e = distance(make_builtin_manifold(s), Vec{2.0, 1.0, 0.0}, 0.5);
    CHECK(e.distance == doctest::Approx(std::sqrt(2.0)).epsilon(1e-12));
    CHECK(e.parameter[0] == doctest::Approx(1.0));

    ManifoldSpec t;
    t.kind = ManifoldKind::torus;
    t.dim = 3;
    t.radius = 1.0;
    t.minor_radius = 0.25;
    CHECK(distance(make_builtin_manifold(t), Vec{1.0, 0.0, 0.6}, 0.5).distance == doctest::Approx(0.35).epsilon(1e-10));
    CHECK(distance(make_builtin_manifold(t), Vec{0.0, 2.0, 0.0}, 0.5).distance == doctest::Approx(0.75).epsilon(1e-10));
}

TEST_CASE("distance field lower bound never exceeds the distance") {
    const SingularManifold c = unit_circle4();
    const DistanceField f(c, 0.2);
    Rng g = make_stream(4, 0);
    for (int i = 0; i < 200; ++i) {
        Vec x(4);
        for (int k = 0; k < 4; ++k) x[k] = 3.0 * uniform01(g) - 1.5;
        CHECK(f.lower_bound(x) <= f(x).distance + 1e-12);
        // planar oracle
        const double rho = std::hypot(x[0], x[1]);
        CHECK(f(x).distance == doctest::Approx(std::hypot(rho - 1.0, std::hypot(x[2], x[3]))).epsilon(1e-10));
    }
}

TEST_CASE("moving sets") {
    CurveSpec m;
    m.kind = CurveKind::linear;
    m.velocity = Vec{1.0, 0.0, 0.0, 0.0};
    m.center = Vec::zeros(4);
    ManifoldSpec s;
    s.kind = ManifoldKind::circle;
    s.dim = 4;
    s.motion = m;
    const SingularManifold c = make_builtin_manifold(s);
    CHECK(distance(c, Vec{2.5, 0.0, 0.0, 0.0}, 0.5).distance == doctest::Approx(1.0).epsilon(1e-12));
}

TEST_CASE("rank condition") {
    const RankReport r = jacobian_rank_check(unit_circle4(), 64);
    CHECK(r.pass);
    CHECK(r.min_singular_value == doctest::Approx(2.0 * M_PI).epsilon(1e-6));

    ManifoldSpec sq;
    sq.kind = ManifoldKind::square;
    sq.dim = 4;
    const RankReport q = jacobian_rank_check(make_builtin_manifold(sq), 32);
    CHECK(q.min_singular_value == doctest::Approx(1.0).epsilon(1e-6));

    const SingularManifold flat(1, 3, 1.0, [](const Vec&, double) { return Vec{0.5, 0.0, 0.0}; });
    const RankReport f = jacobian_rank_check(flat, 16);
    CHECK(!f.pass);
    CHECK(f.min_singular_value <= 1e-8);
}

TEST_CASE("surface measure and time Hölder constant") {
    CHECK(surface_measure(unit_circle4(), 0.5) == doctest::Approx(2.0 * M_PI).epsilon(1e-8));
    CHECK(surface_measure(still_point(3), 0.5) == 1.0);
    CHECK(estimate_time_holder_constant(unit_circle4(), 1.0) == 0.0);
}

TEST_CASE("tube integral of a point against closed forms") {
    TubeOptions o;
    o.samples = 200000;
    const double r = 0.25;
    const TubeIntegral p = tube_integral(still_point(3), 0.5, r, TubeKernel::power, o);
    CHECK(std::abs(p.value - 2.0 * M_PI * r * r) <= 0.01 * 2.0 * M_PI * r * r + 3.0 * p.std_error);
    const TubeIntegral l = tube_integral(still_point(2), 0.5, 0.1, TubeKernel::log, o);
    const double exact = M_PI * 0.01 * (std::log(10.0) + 0.5);
    CHECK(std::abs(l.value - exact) <= 0.01 * exact + 3.0 * l.std_error);
    CHECK_THROWS_AS(tube_integral(still_point(2), 0.5, 0.1, TubeKernel::power, o), DomainError);
}

TEST_CASE("tube integral: serial reference equals parallel") {
    TubeOptions o;
    o.samples = 50000;
    const TubeIntegral a = tube_integral(unit_circle4(), 0.5, 0.1, TubeKernel::power, o, Execution::serial);
    const TubeIntegral b = tube_integral(unit_circle4(), 0.5, 0.1, TubeKernel::power, o, Execution::parallel);
    CHECK(a.value == b.value);
    CHECK(a.inside == b.inside);
}
