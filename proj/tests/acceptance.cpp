// Acceptance run: one PASS/FAIL line per criterion, with wall time against its budget.

#include <chrono>
#include <cmath>
#include <cstdio>
#include <filesystem>
#include <fstream>
#include <functional>
#include <sstream>
#include <string>
#include <vector>

#include "cli.hpp"
#include "heatsing/curve.hpp"
#include "heatsing/cutoff.hpp"
#include "heatsing/numerics.hpp"
#include "heatsing/removability.hpp"
#include "heatsing/singular_set.hpp"
#include "heatsing/singular_solution.hpp"

using namespace heatsing;

namespace {

struct Outcome {
    bool pass = true;
    std::string detail;

    void require(bool ok, const std::string& what) {
        pass = pass && ok;
        if (!detail.empty()) detail += "; ";
        detail += what + (ok ? "" : " [miss]");
    }
};

std::string fmt(const char* f, double v) {
    char b[64];
    std::snprintf(b, sizeof b, f, v);
    return b;
}

std::vector<double> geometric(double from, double to, int count) {
    std::vector<double> out;
    for (int k = 0; k < count; ++k) out.push_back(from * std::pow(to / from, k / double(count - 1)));
    return out;
}

HolderCurve circle(int N) {
    CurveSpec s;
    s.kind = CurveKind::circle;
    s.dim = N;
    s.radius = 0.5;
    s.angular_speed = 2.0;
    return make_builtin_curve(s);
}

HolderCurve weierstrass(int N, double alpha, int terms) {
    CurveSpec s;
    s.kind = CurveKind::weierstrass;
    s.dim = N;
    s.alpha = alpha;
    s.terms = terms;
    s.coordinates = {0, 1};
    return make_builtin_curve(s);
}

HolderCurve stationary(int N) {
    CurveSpec s;
    s.kind = CurveKind::constant;
    s.dim = N;
    s.center = Vec::zeros(N);
    return make_builtin_curve(s);
}

Outcome criterion1() {
    Outcome v;
    FieldOptions o;
    o.rel_tol = 1e-9;
    o.max_panels = 2000;
    o.accept_partial = true;
    for (int N : {3, 4}) {
        const SingularField F(weierstrass(N, 0.75, 24), o);
        const AsymptoticEstimate e =
            asymptotic_coefficient(F, 0.5, Vec::unit(N, N - 1), geometric(1e-1, 1e-3, 9));
        const double c = 1.0 / (N * (N - 2) * unit_ball_volume(N));
        v.require(std::abs(e.coefficient - c) <= 0.01 * c,
                  "N=" + std::to_string(N) + " coef " + fmt("%.7f", e.coefficient) + " vs " + fmt("%.7f", c) +
                      " rel " + fmt("%.2e", std::abs(e.coefficient - c) / c));
    }
    return v;
}

Outcome criterion2() {
    Outcome v;
    const SingularField F(circle(2));
    const AsymptoticEstimate e = asymptotic_coefficient(F, 0.5, Vec{1.0, 0.0}, geometric(1e-2, 1e-6, 9));
    const double c = 1.0 / (2.0 * M_PI);
    v.require(e.samples.size() >= 6 && std::abs(e.coefficient - c) <= 0.02 * c,
              "slope " + fmt("%.7f", e.coefficient) + " vs " + fmt("%.7f", c) + " rel " +
                  fmt("%.2e", std::abs(e.coefficient - c) / c));
    return v;
}

Outcome criterion3() {
    Outcome v;
    const SingularField F(stationary(3));
    double worst = 0.0;
    for (double R : {0.05, 0.1, 0.25, 0.5, 1.0})
        for (double t : {0.05, 0.1, 0.25, 0.5, 1.0}) {
            const double exact = erfc_fn(R / (2.0 * std::sqrt(t))) / (4.0 * M_PI * R);
            worst = std::max(worst, std::abs(F(Vec{R, 0.0, 0.0}, t) - exact) / exact);
        }
    v.require(worst <= 1e-8, "max rel err " + fmt("%.2e", worst));
    return v;
}

Outcome criterion4() {
    Outcome v;
    const HolderCurve c = circle(2);
    const SingularField F(c, FieldOptions{1e-7});
    PairingOptions po;
    po.tol_t = 1e-5;
    po.tol_space = 1e-5;
    const double t0 = 0.5;
    const PairingResult on = distributional_pairing(F, bump_test_function(c(t0), Vec{0.4, 0.4}, t0, 0.2), po);
    const double rel = std::abs(on.lhs - on.rhs) / std::abs(on.rhs);
    v.require(rel <= 1e-3, "straddling |lhs-rhs|/|rhs| " + fmt("%.2e", rel));
    const PairingResult off = distributional_pairing(F, bump_test_function(Vec{2.0, 2.0}, Vec{0.4, 0.4}, t0, 0.2), po);
    v.require(std::abs(off.lhs) <= 1e-6 && off.rhs == 0.0, "avoiding |lhs| " + fmt("%.2e", std::abs(off.lhs)));
    return v;
}

Outcome criterion5() {
    Outcome v;
    const HolderCurve c = circle(3);
    FieldOptions o;
    o.rel_tol = 1e-13;
    const SingularField F(c, o);
    const SpaceTimeField u = [&](const Vec& x, double t) { return F(x, t); };
    const Vec x = c(0.5) + Vec{0.0, 0.0, 0.5};
    const double ratio = heat_residual(u, c, x, 0.5, 1e-2) / heat_residual(u, c, x, 0.5, 5e-3);
    v.require(ratio >= 3.5 && ratio <= 4.5, "ratio " + fmt("%.4f", ratio));
    return v;
}

Outcome criterion6() {
    Outcome v;
    const std::vector<double> radii{0.125, 0.0625, 0.03125, 0.015625, 0.0078125, 0.00390625};
    for (int N : {2, 3}) {
        for (const auto& [name, curve] : {std::pair{std::string("constant"), stationary(N)},
                                          std::pair{std::string("weierstrass"), weierstrass(N, 0.5, 40)}}) {
            CutoffFamily f(curve);
            const CutoffBoundTable t = verify_cutoff_bounds(f, radii, 20000, 6);
            double fd = 0.0;
            for (double r : radii) {
                const DerivativeCheck d = check_cutoff_derivatives(f, r, 1000, 6);
                fd = std::max({fd, d.max_err_grad, d.max_err_lap, d.max_err_dt});
            }
            const double worst_ratio = std::max({t.ratio_grad, t.ratio_lap, t.ratio_dt});
            v.require(worst_ratio <= 4.0 && fd <= 1e-3, name + " N=" + std::to_string(N) + " ratio " +
                                                            fmt("%.3f", worst_ratio) + " fd " + fmt("%.1e", fd));
        }
    }
    return v;
}

Outcome criterion7() {
    Outcome v;
    std::vector<std::pair<std::string, HolderCurve>> curves{{"constant", stationary(3)},
                                                            {"circle", circle(3)},
                                                            {"weierstrass-0.75", weierstrass(3, 0.75, 24)},
                                                            {"weierstrass-0.5", weierstrass(3, 0.5, 40)}};
    CurveSpec l;
    l.kind = CurveKind::linear;
    l.center = Vec::zeros(3);
    l.velocity = Vec{1.0, -2.0, 0.5};
    curves.emplace_back("linear", make_builtin_curve(l));
    int passed = 0, total = 0;
    for (const auto& [name, c] : curves)
        for (double eps : {1e-1, 1e-2, 1e-3}) {
            const MollificationCheck m = check_mollification(c, eps, 2000);
            const bool ok = m.pass_coord && m.pass_speed;
            passed += ok;
            ++total;
            if (!ok) v.require(false, name + " eps " + fmt("%.0e", eps));
        }
    v.require(passed == total, std::to_string(passed) + "/" + std::to_string(total) + " curve-scale pairs");
    return v;
}

Outcome criterion8() {
    Outcome v;
    TubeOptions o;
    o.samples = 1'000'000;
    o.seed = 1;
    {
        ManifoldSpec s;
        s.dim = 4;
        const SingularManifold c = make_builtin_manifold(s);
        const TubeTable t = verify_tube(c, 0.5, std::vector<double>{0.2, 0.1, 0.05, 0.025}, TubeKernel::power, o);
        v.require(t.ratio <= 4.0, "circle R^4 power scaled ratio " + fmt("%.3f", t.ratio) + ", I/(4 pi^2 r^2) " +
                                      fmt("%.4f", t.rows.back().scaled / (4.0 * M_PI * M_PI)));
    }
    ManifoldSpec p;
    p.kind = ManifoldKind::point;
    p.dim = 2;
    const SingularManifold pt2 = make_builtin_manifold(p);
    {
        const TubeTable t = verify_tube(pt2, 0.5, std::vector<double>{0.2, 0.1, 0.05, 0.025}, TubeKernel::log, o);
        v.require(t.ratio <= 4.0, "point N=2 log scaled ratio " + fmt("%.3f", t.ratio));
        double worst = 0.0;
        bool ok = true;
        for (const TubeRow& row : t.rows) {
            const double exact = M_PI * row.r * row.r * (std::log(1.0 / row.r) + 0.5);
            const double err = std::abs(row.integral - exact);
            ok = ok && err <= 0.01 * exact + 2.0 * row.std_error;
            worst = std::max(worst, err / exact);
        }
        v.require(ok, "log closed form worst rel " + fmt("%.2e", worst));
    }
    {
        p.dim = 3;
        const TubeIntegral I = tube_integral(make_builtin_manifold(p), 0.5, 0.25, TubeKernel::power, o);
        const double exact = 2.0 * M_PI * 0.0625;
        const double err = std::abs(I.value - exact);
        v.require(err <= 0.01 * exact + 2.0 * I.std_error, "point N=3 2 pi r^2 rel " + fmt("%.2e", err / exact));
    }
    return v;
}

Outcome criterion9() {
    Outcome v;
    for (int N : {2, 3}) {
        const RemovabilityReport r = classify(singular_solution_field(SingularField(circle(N))));
        const double want = -(N - 2.0);
        v.require(r.verdict == heatsing::Verdict::non_removable && std::abs(r.exponent_estimate - want) <= 0.05,
                  "F N=" + std::to_string(N) + " " + to_string(r.verdict) + " exponent " +
                      fmt("%.4f", r.exponent_estimate));
        MockSpec g;
        g.kind = MockKind::gaussian;
        const RemovabilityReport s = classify(mock_field(SingularManifold::point(circle(N)), g));
        v.require(s.verdict == heatsing::Verdict::removable, "gaussian N=" + std::to_string(N) + " " + to_string(s.verdict));
    }
    MockSpec h;
    h.kind = MockKind::power;
    h.exponent = 0.5;
    const RemovabilityReport m = classify(mock_field(SingularManifold::point(circle(3)), h));
    v.require(m.verdict == heatsing::Verdict::removable, "d^-1/2 mock N=3 " + to_string(m.verdict));
    return v;
}

std::string slurp(const std::filesystem::path& p) {
    std::ifstream f(p, std::ios::binary);
    std::stringstream s;
    s << f.rdbuf();
    return s.str();
}

Outcome criterion10() {
    Outcome v;
    namespace fs = std::filesystem;
    const fs::path dir = fs::temp_directory_path() / "heatsing_acceptance_determinism";
    fs::remove_all(dir);
    fs::create_directories(dir);
    const std::vector<std::pair<std::string, std::string>> runs{
        {"verify-tube", R"({"manifold": {"kind": "circle", "N": 4}, "samples": 200000, "seed": 42})"},
        {"verify-cutoff", R"({"curve": {"kind": "weierstrass", "alpha": 0.5, "N": 2, "params": {"terms": 40, "coordinates": [0, 1]}},
                             "samples": 5000, "check_samples": 200, "seed": 42})"},
        {"classify", R"({"curve": {"kind": "circle", "N": 3, "params": {"radius": 0.5, "angular_speed": 2}},
                        "field": {"type": "singular"}, "seed": 42})"},
    };
    for (const auto& [cmd, cfg] : runs) {
        const fs::path c = dir / (cmd + ".json");
        std::ofstream(c) << cfg;
        std::ostringstream sink;
        bool ran = true;
        for (const char* sub : {"a", "b"})
            ran = cli::run({cmd, "--config", c.string(), "--out", (dir / sub).string()}, sink, sink) != cli::kConfigError &&
                  ran;
        const std::string a = slurp(dir / "a" / (cmd + ".csv")), b = slurp(dir / "b" / (cmd + ".csv"));
        v.require(ran && !a.empty() && a == b, cmd + " " + std::to_string(a.size()) + " bytes identical");
    }
    return v;
}

}  // namespace

int main() {
    struct Entry {
        int id;
        double budget;  // seconds
        std::function<Outcome()> run;
    };
    const std::vector<Entry> entries{{1, 60, criterion1},  {2, 60, criterion2},   {3, 5, criterion3},
                                     {4, 600, criterion4}, {5, 30, criterion5},   {6, 120, criterion6},
                                     {7, 60, criterion7},  {8, 300, criterion8},  {9, 300, criterion9},
                                     {10, 120, criterion10}};
    int failures = 0;
    for (const Entry& e : entries) {
        const auto start = std::chrono::steady_clock::now();
        Outcome v;
        try {
            v = e.run();
        } catch (const std::exception& ex) {
            v.require(false, std::string("exception: ") + ex.what());
        }
        const double secs = std::chrono::duration<double>(std::chrono::steady_clock::now() - start).count();
        const bool in_time = secs <= e.budget;
        const bool ok = v.pass && in_time;
        failures += !ok;
        std::printf("criterion %2d: %s  %s  (%.1f s of %.0f s)\n", e.id, ok ? "PASS" : "FAIL", v.detail.c_str(), secs,
                    e.budget);
        std::fflush(stdout);
    }
    return failures == 0 ? 0 : 1;
}
