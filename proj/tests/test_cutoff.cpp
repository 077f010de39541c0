#include <doctest.h>

#include <cmath>

#include "heatsing/cutoff.hpp"
#include "oracle_values.hpp"

using namespace heatsing;

namespace {

HolderCurve weierstrass(double alpha, int N, int terms) {
    CurveSpec s;
    s.kind = CurveKind::weierstrass;
    s.dim = N;
    s.alpha = alpha;
    s.terms = terms;
    s.coordinates = {0, 1};
    return make_builtin_curve(s);
}

std::vector<double> dyadic() { return {0.125, 0.0625, 0.03125, 0.015625, 0.0078125, 0.00390625}; }

}  // namespace

TEST_CASE("radial profile against frozen values") {
    CHECK(profile_eta(0.0) == 0.0);
    CHECK(profile_eta(1.0) == 1.0);
    CHECK(profile_eta(0.5) == doctest::Approx(0.5).epsilon(1e-15));
    CHECK(std::abs(profile_eta(0.3) - oracle::kEta03) <= 1e-14);
    CHECK(std::abs(profile_x(0.3) - oracle::kX03) <= 1e-13);
    CHECK(profile_x(0.5) == doctest::Approx(2.0).epsilon(1e-14));
    for (int N : {2, 3, 4}) {
        CHECK(std::abs(profile_y(0.3, N) - oracle::kY03[N]) <= 1e-12);
        CHECK(std::abs(profile_y_sup(N) - oracle::kSupY[N]) <= 1e-6 * oracle::kSupY[N]);
        CHECK(std::abs(profile_y(1e-3, N)) < 1e-100);
        CHECK(std::abs(profile_y(1.0 - 1e-3, N)) < 1e-100);
    }
    CHECK(profile_x_sup() == doctest::Approx(2.0).epsilon(1e-9));
}

TEST_CASE("cut-off family geometry") {
    CurveSpec s;
    s.kind = CurveKind::circle;
    const HolderCurve c = make_builtin_curve(s);
    CutoffFamily f(c);
    const double r = 0.1;
    CHECK(f.smoothing_scale(0.05) < f.smoothing_scale(0.1));
    const MollifiedCurve sm = f.smoothed(r);
    const Vec base = sm(0.5);
    const Vec dir = Vec::unit(3, 2);
    CHECK(f.eta(base + dir * (0.7 * r), 0.5, r) == doctest::Approx(0.0));
    CHECK(f.eta(base + dir * (0.75 * r), 0.5, r) == doctest::Approx(0.5).epsilon(1e-12));
    CHECK(norm(f.gradient(base + dir * (0.75 * r), 0.5, r)) == doctest::Approx(20.0 / r).epsilon(1e-12));
    CHECK(f.eta(c(0.5) + dir * (1.01 * r), 0.5, r) == 1.0);
    CHECK(norm(f.gradient(base + dir * (0.3 * r), 0.5, r)) == 0.0);
    CHECK(f.laplacian(base + dir * (0.3 * r), 0.5, r) == 0.0);
}

TEST_CASE("stationary curve has no time dependence") {
    CurveSpec s;
    s.kind = CurveKind::constant;
    s.center = Vec::zeros(3);
    CutoffFamily f(make_builtin_curve(s));
    CHECK(f.smoothing_scale(0.1) == 0.0);
    for (double d : {0.072, 0.08, 0.095}) CHECK(f.time_derivative(Vec{d, 0.0, 0.0}, 0.5, 0.1) == 0.0);
}

TEST_CASE("closed-form derivatives against finite differences") {
    for (int N : {2, 3}) {
        CutoffFamily f(weierstrass(0.5, N, 40));
        for (double r : {0.125, 0.0078125}) {
            const DerivativeCheck d = check_cutoff_derivatives(f, r, 1000, 11);
            CHECK(d.samples == 1000);
            CHECK(d.max_err_grad <= 1e-4);
            CHECK(d.max_err_lap <= 1e-3);
            CHECK(d.max_err_dt <= 1e-3);
            // the misprinted Y is not the Laplacian profile
            CHECK(d.max_err_lap_printed > 1.0);
        }
    }
}

TEST_CASE("scaled derivative sups stay bounded as r halves") {
    CutoffFamily f(weierstrass(0.75, 3, 24));
    const auto radii = dyadic();
    const CutoffBoundTable t = verify_cutoff_bounds(f, radii, 4000, 3);
    CHECK(t.rows.size() == radii.size());
    CHECK(t.ratio_grad <= 2.0);
    CHECK(t.ratio_lap <= 2.0);
    CHECK(t.ratio_dt <= 2.0);
    CHECK(t.bounded);
}

TEST_CASE("serial and parallel bound tables are identical") {
    CutoffFamily f(weierstrass(0.75, 2, 24));
    const std::vector<double> radii{0.1, 0.05};
    const CutoffBoundTable a = verify_cutoff_bounds(f, radii, 5000, 9, Execution::serial);
    const CutoffBoundTable b = verify_cutoff_bounds(f, radii, 5000, 9, Execution::parallel);
    for (std::size_t i = 0; i < radii.size(); ++i) {
        CHECK(a.rows[i].sup_scaled_dt == b.rows[i].sup_scaled_dt);
        CHECK(a.rows[i].sup_scaled_lap == b.rows[i].sup_scaled_lap);
    }
}
