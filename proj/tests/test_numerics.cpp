#include <doctest.h>

#include <cmath>

#include "heatsing/errors.hpp"
#include "heatsing/numerics.hpp"
#include "heatsing/parallel.hpp"
#include "oracle_values.hpp"

using namespace heatsing;

TEST_CASE("adaptive quadrature on smooth and endpoint-singular integrands") {
    CHECK(integrate_adaptive([](double) { return 1.0; }, 0.0, 2.0).value == doctest::Approx(2.0).epsilon(1e-14));
    const auto r = integrate_adaptive([](double x) { return 1.0 / std::sqrt(x); }, 0.0, 1.0, 1e-10);
    CHECK(std::abs(r.value - 2.0) <= 1e-9);
}

TEST_CASE("semi-infinite quadrature reproduces gamma integrals") {
    const double sqrt_pi = std::sqrt(M_PI);
    CHECK(std::abs(integrate_semi_infinite([](double s) { return std::exp(-s) / std::sqrt(s); }, 0.0, 1e-11).value -
                   sqrt_pi) <= 1e-9);
    CHECK(integrate_semi_infinite([](double s) { return std::exp(-s); }, 0.0).value == doctest::Approx(1.0).epsilon(1e-10));
    CHECK(integrate_semi_infinite([](double s) { return s * std::exp(-s); }, 0.0).value ==
          doctest::Approx(1.0).epsilon(1e-10));
    // N = 4: sigma^{N/2 - 2} e^{-sigma}
    CHECK(integrate_semi_infinite([](double s) { return std::pow(s, 0.0) * std::exp(-s); }, 0.0).value ==
          doctest::Approx(1.0).epsilon(1e-10));
}

TEST_CASE("a budget that cannot be met raises") {
    QuadratureOptions o;
    o.abs_tol = 1e-300;
    o.rel_tol = 0.0;
    o.max_panels = 4;
    CHECK_THROWS_AS(integrate_adaptive([](double x) { return std::sin(50 * x); }, 0.0, 3.0, o), QuadratureBudgetExceeded);
}

TEST_CASE("gamma, unit ball volume and erfc") {
    CHECK(gamma_fn(0.5) == doctest::Approx(std::sqrt(M_PI)).epsilon(1e-13));
    CHECK(gamma_fn(1.0) == doctest::Approx(1.0).epsilon(1e-14));
    CHECK(gamma_fn(1.5) == doctest::Approx(0.8862269254527580).epsilon(1e-13));
    CHECK(unit_ball_volume(2) == doctest::Approx(M_PI).epsilon(1e-14));
    CHECK(unit_ball_volume(3) == doctest::Approx(4.0 * M_PI / 3.0).epsilon(1e-14));
    CHECK(unit_ball_volume(4) == doctest::Approx(M_PI * M_PI / 2.0).epsilon(1e-14));
    CHECK(erfc_fn(0.0) == 1.0);
    CHECK(erfc_fn(40.0) == doctest::Approx(0.0));
    CHECK(std::abs(erfc_fn(1.0) - oracle::kErfc1) <= 1e-15);
    // cross-check against quadrature of the defining integral
    const double q = integrate_semi_infinite([](double t) { return 2.0 / std::sqrt(M_PI) * std::exp(-t * t); }, 1.0, 1e-14).value;
    CHECK(std::abs(q - oracle::kErfc1) <= 1e-12);
}

TEST_CASE("stream seeds are distinct and reproducible") {
    CHECK(stream_seed(1, 0) == stream_seed(1, 0));
    CHECK(stream_seed(1, 0) != stream_seed(1, 1));
    CHECK(stream_seed(1, 0) != stream_seed(2, 0));
    Rng a = make_stream(7, 3), b = make_stream(7, 3);
    CHECK(uniform01(a) == uniform01(b));
}

TEST_CASE("serial and parallel chunk maps agree") {
    auto body = [](std::size_t c) {
        Rng g = make_stream(5, c);
        double s = 0.0;
        for (int i = 0; i < 100; ++i) s += uniform01(g);
        return s;
    };
    CHECK(map_chunks<double>(37, Execution::serial, body) == map_chunks<double>(37, Execution::parallel, body));
}
