#include "cli.hpp"

#include <CLI11.hpp>
#include <json.hpp>

#include <algorithm>
#include <cmath>
#include <cstdio>
#include <filesystem>
#include <fstream>
#include <optional>
#include <set>
#include <sstream>

#include "heatsing/curve.hpp"
#include "heatsing/cutoff.hpp"
#include "heatsing/errors.hpp"
#include "heatsing/numerics.hpp"
#include "heatsing/parallel.hpp"
#include "heatsing/removability.hpp"
#include "heatsing/singular_set.hpp"
#include "heatsing/singular_solution.hpp"

namespace heatsing::cli {

namespace {

using json = nlohmann::ordered_json;

/// Anything wrong with the command line or the configuration (exit 2).
class ConfigError : public std::runtime_error {
public:
    using std::runtime_error::runtime_error;
};

/// A negative verdict that still produced its artifacts (exit 1).
struct Outcome {
    bool passed = true;
    std::string summary;
};

std::string join(const std::string& path, const std::string& key) { return path.empty() ? key : path + "." + key; }

[[noreturn]] void bad(const std::string& path, const std::string& what) {
    throw ConfigError("key '" + (path.empty() ? std::string("<root>") : path) + "': " + what);
}

// --- parsing JSON while remembering where we are ------------------------------------

json parse_config(const std::string& text) {
    struct Frame {
        bool array;
        std::string key;
        long index;
    };
    std::vector<Frame> stack;
    auto bump_index = [&] {
        if (!stack.empty() && stack.back().array) ++stack.back().index;
    };
    json::parser_callback_t track = [&](int, json::parse_event_t ev, json& parsed) {
        switch (ev) {
            case json::parse_event_t::object_start:
                bump_index();
                stack.push_back({false, "", -1});
                break;
            case json::parse_event_t::array_start:
                bump_index();
                stack.push_back({true, "", -1});
                break;
            case json::parse_event_t::key:
                if (!stack.empty()) stack.back().key = parsed.get<std::string>();
                break;
            case json::parse_event_t::value:
                bump_index();
                break;
            case json::parse_event_t::object_end:
            case json::parse_event_t::array_end:
                if (!stack.empty()) stack.pop_back();
                break;
        }
        return true;
    };
    try {
        return json::parse(text, track);
    } catch (const json::parse_error& e) {
        std::string path;
        for (const Frame& f : stack) {
            if (f.array) path += "[" + std::to_string(std::max(0L, f.index)) + "]";
            else if (!f.key.empty()) path = join(path, f.key);
        }
        throw ConfigError("malformed JSON near key '" + (path.empty() ? std::string("<root>") : path) + "': " + e.what());
    }
}

// --- typed access with the key path in every message ------------------------------

class Node {
public:
    Node(const json& j, std::string path) : j_(&j), path_(std::move(path)) {}

    const json& raw() const { return *j_; }
    const std::string& path() const { return path_; }

    bool has(const std::string& key) const { return j_->is_object() && j_->contains(key); }

    Node child(const std::string& key) const {
        if (!has(key)) bad(join(path_, key), "missing");
        return Node(j_->at(key), join(path_, key));
    }

    /// Rejects keys outside `allowed`.
    void only(std::initializer_list<const char*> allowed) const {
        if (!j_->is_object()) bad(path_, "expected an object");
        const std::set<std::string> ok(allowed.begin(), allowed.end());
        for (auto it = j_->begin(); it != j_->end(); ++it)
            if (!ok.count(it.key())) bad(join(path_, it.key()), "unknown key");
    }

    double number(const std::string& key) const {
        const Node n = child(key);
        if (!n.raw().is_number()) bad(n.path_, "expected a number");
        return n.raw().get<double>();
    }
    double number(const std::string& key, double fallback) const { return has(key) ? number(key) : fallback; }

    double positive(const std::string& key, double fallback) const {
        const double v = number(key, fallback);
        if (!(v > 0.0)) bad(join(path_, key), "must be positive");
        return v;
    }

    std::int64_t integer(const std::string& key) const {
        const Node n = child(key);
        if (!n.raw().is_number_integer()) bad(n.path_, "expected an integer");
        return n.raw().get<std::int64_t>();
    }
    std::int64_t integer(const std::string& key, std::int64_t fallback) const {
        return has(key) ? integer(key) : fallback;
    }

    std::size_t count(const std::string& key, std::size_t fallback) const {
        if (!has(key)) return fallback;
        const std::int64_t v = integer(key);
        if (v <= 0) bad(join(path_, key), "expected a positive integer");
        return static_cast<std::size_t>(v);
    }

    bool boolean(const std::string& key, bool fallback) const {
        if (!has(key)) return fallback;
        const Node n = child(key);
        if (!n.raw().is_boolean()) bad(n.path_, "expected true or false");
        return n.raw().get<bool>();
    }

    std::string string(const std::string& key) const {
        const Node n = child(key);
        if (!n.raw().is_string()) bad(n.path_, "expected a string");
        return n.raw().get<std::string>();
    }
    std::string string(const std::string& key, const std::string& fallback) const {
        return has(key) ? string(key) : fallback;
    }

    std::vector<double> numbers(const std::string& key) const {
        const Node n = child(key);
        if (!n.raw().is_array()) bad(n.path_, "expected an array of numbers");
        std::vector<double> out;
        for (std::size_t i = 0; i < n.raw().size(); ++i) {
            if (!n.raw()[i].is_number()) bad(n.path_ + "[" + std::to_string(i) + "]", "expected a number");
            out.push_back(n.raw()[i].get<double>());
        }
        return out;
    }

    Vec vec(const std::string& key, int dim = -1) const {
        const std::vector<double> v = numbers(key);
        if (v.empty() || static_cast<int>(v.size()) > kMaxDim)
            bad(join(path_, key), "expected 1 to " + std::to_string(kMaxDim) + " numbers");
        if (dim >= 0 && static_cast<int>(v.size()) != dim)
            bad(join(path_, key), "expected " + std::to_string(dim) + " numbers");
        return Vec::from(v);
    }

private:
    const json* j_;
    std::string path_;
};

/// Radii as an explicit array or {"from", "to", "count"} spaced geometrically.
std::vector<double> radii(const Node& parent, const std::string& key, std::vector<double> fallback) {
    if (!parent.has(key)) return fallback;
    const Node n = parent.child(key);
    std::vector<double> out;
    if (n.raw().is_array()) {
        out = parent.numbers(key);
    } else {
        n.only({"from", "to", "count"});
        const double from = n.positive("from", 0.0);
        const double to = n.positive("to", 0.0);
        const std::size_t c = n.count("count", 0);
        if (c < 2) bad(join(n.path(), "count"), "need at least 2");
        for (std::size_t k = 0; k < c; ++k)
            out.push_back(from * std::pow(to / from, static_cast<double>(k) / static_cast<double>(c - 1)));
    }
    if (out.empty()) bad(n.path(), "empty list");
    for (double r : out)
        if (!(r > 0.0)) bad(n.path(), "values must be positive");
    return out;
}

std::vector<double> geometric(double from, double to, std::size_t count) {
    std::vector<double> out;
    for (std::size_t k = 0; k < count; ++k)
        out.push_back(from * std::pow(to / from, static_cast<double>(k) / static_cast<double>(count - 1)));
    return out;
}

std::vector<double> halvings(double from, int steps) {
    std::vector<double> out;
    for (int k = 0; k <= steps; ++k) out.push_back(std::ldexp(from, -k));
    return out;
}

// --- domain objects from configuration blocks ---------------------------------------

CurveSpec curve_spec(const Node& n) {
    n.only({"kind", "alpha", "N", "T", "L", "params"});
    CurveSpec s;
    const std::string kind = n.string("kind");
    const auto k = parse_curve_kind(kind);
    if (!k) bad(join(n.path(), "kind"), "unknown curve kind '" + kind + "'");
    s.kind = *k;
    s.dim = static_cast<int>(n.integer("N", 3));
    s.horizon = n.number("T", 1.0);
    s.alpha = n.number("alpha", s.kind == CurveKind::weierstrass ? 0.75 : 1.0);
    if (n.has("L")) s.holder_constant = n.number("L");
    if (n.has("params")) {
        const Node p = n.child("params");
        p.only({"center", "velocity", "radius", "angular_speed", "base", "terms", "amplitude", "coordinates"});
        if (p.has("center")) s.center = p.vec("center", s.dim);
        if (p.has("velocity")) s.velocity = p.vec("velocity", s.dim);
        s.radius = p.number("radius", s.radius);
        s.angular_speed = p.number("angular_speed", s.angular_speed);
        s.base = static_cast<int>(p.integer("base", s.base));
        s.terms = static_cast<int>(p.integer("terms", s.terms));
        s.amplitude = p.number("amplitude", s.amplitude);
        if (p.has("coordinates")) {
            s.coordinates.clear();
            const Node c = p.child("coordinates");
            if (!c.raw().is_array() || c.raw().empty()) bad(c.path(), "expected a non-empty array of integers");
            for (std::size_t i = 0; i < c.raw().size(); ++i) {
                if (!c.raw()[i].is_number_integer()) bad(c.path() + "[" + std::to_string(i) + "]", "expected an integer");
                s.coordinates.push_back(c.raw()[i].get<int>());
            }
        }
    }
    return s;
}

HolderCurve build_curve(const Node& n, const CurveSpec& s) {
    try {
        return make_builtin_curve(s);
    } catch (const DomainError& e) {
        bad(n.path(), e.what());
    }
}

SingularManifold build_manifold(const Node& n) {
    n.only({"kind", "N", "T", "center", "radius", "minor_radius", "end", "motion"});
    ManifoldSpec s;
    const std::string kind = n.string("kind");
    const auto k = parse_manifold_kind(kind);
    if (!k) bad(join(n.path(), "kind"), "unknown manifold kind '" + kind + "'");
    s.kind = *k;
    s.dim = static_cast<int>(n.integer("N", 4));
    s.horizon = n.number("T", 1.0);
    if (n.has("center")) s.center = n.vec("center", s.dim);
    s.radius = n.number("radius", s.radius);
    s.minor_radius = n.number("minor_radius", s.minor_radius);
    if (n.has("end")) s.end = n.vec("end", s.dim);
    if (n.has("motion")) s.motion = curve_spec(n.child("motion"));
    try {
        return make_builtin_manifold(s);
    } catch (const DomainError& e) {
        bad(n.path(), e.what());
    }
}

/// Oscillatory curves cannot reach a tight relative tolerance; settle for less.
FieldOptions default_field_options(const CurveSpec& s) {
    FieldOptions o;
    if (s.kind == CurveKind::weierstrass) {
        o.rel_tol = 1e-9;
        o.max_panels = 2000;
        o.accept_partial = true;
    }
    return o;
}

FieldOptions field_options(const Node& root, FieldOptions o) {
    if (!root.has("field_options")) return o;
    const Node n = root.child("field_options");
    n.only({"rel_tol", "max_panels", "switch_ratio", "route", "accept_partial"});
    o.rel_tol = n.positive("rel_tol", o.rel_tol);
    o.max_panels = n.count("max_panels", o.max_panels);
    o.switch_ratio = n.number("switch_ratio", o.switch_ratio);
    o.accept_partial = n.boolean("accept_partial", o.accept_partial);
    const std::string route = n.string("route", "automatic");
    if (route == "automatic") o.route = FieldRoute::automatic;
    else if (route == "sigma") o.route = FieldRoute::sigma;
    else if (route == "direct") o.route = FieldRoute::direct;
    else bad(join(n.path(), "route"), "expected automatic, sigma or direct");
    return o;
}

// --- output -------------------------------------------------------------------------

std::string num(double v) {
    if (std::isnan(v)) return "nan";
    if (std::isinf(v)) return v > 0 ? "inf" : "-inf";
    char buf[32];
    std::snprintf(buf, sizeof buf, "%.17g", v);
    return buf;
}

json jnum(double v) {
    if (std::isfinite(v)) return v;
    return num(v);  // JSON has no inf or nan
}

json jvec(const Vec& v) {
    json a = json::array();
    for (double x : v.values()) a.push_back(jnum(x));
    return a;
}

class Csv {
public:
    Csv(const std::string& command, const std::vector<std::string>& columns) {
        text_ << "#schema=heatsing." << command << ".v1\n";
        line(columns);
    }
    void row(const std::vector<double>& cells, const std::string& tail = {}) {
        std::vector<std::string> s;
        for (double c : cells) s.push_back(num(c));
        if (!tail.empty()) s.push_back(tail);
        line(s);
    }
    std::string str() const { return text_.str(); }

private:
    void line(const std::vector<std::string>& cells) {
        for (std::size_t i = 0; i < cells.size(); ++i) text_ << (i ? "," : "") << cells[i];
        text_ << '\n';
    }
    std::ostringstream text_;
};

struct Context {
    std::string command;
    std::filesystem::path out_dir;
    std::optional<std::uint64_t> seed_flag;
    json config = json::object();
    std::ostream* out = nullptr;

    Node root() const { return Node(config, ""); }

    std::uint64_t seed() const {
        const Node r = root();
        if (seed_flag) return *seed_flag;
        if (!r.has("seed")) bad("seed", "required for Monte Carlo commands (or pass --seed)");
        const std::int64_t s = r.integer("seed");
        if (s < 0) bad("seed", "expected a non-negative integer");
        return static_cast<std::uint64_t>(s);
    }

    void write(const std::string& name, const std::string& text) const {
        std::filesystem::create_directories(out_dir);
        std::ofstream f(out_dir / name, std::ios::binary);
        f << text;
        if (!f) throw std::runtime_error("cannot write " + (out_dir / name).string());
    }

    void write_csv(const Csv& csv) const { write(command + ".csv", csv.str()); }

    void write_json(const json& body) const {
        json doc;
        doc["schema"] = "heatsing." + command + ".v1";
        for (auto it = body.begin(); it != body.end(); ++it) doc[it.key()] = it.value();
        write(command + ".json", doc.dump(2) + "\n");
    }
};

std::string verdict(bool ok) { return ok ? "pass" : "fail"; }

// --- subcommands ---------------------------------------------------------------------

Outcome cmd_asymptote(const Context& cx) {
    const Node r = cx.root();
    r.only({"curve", "t", "direction", "radii", "field_options", "tolerance", "seed"});
    const Node cn = r.child("curve");
    const CurveSpec spec = curve_spec(cn);
    const HolderCurve curve = build_curve(cn, spec);
    const int N = curve.dim();
    const double t = r.positive("t", 0.5 * curve.horizon());
    Vec dir = r.has("direction") ? r.vec("direction", N) : Vec::unit(N, N - 1);
    if (norm(dir) == 0.0) bad("direction", "must be non-zero");
    dir *= 1.0 / norm(dir);
    const std::vector<double> rs =
        radii(r, "radii", N == 2 ? geometric(1e-2, 1e-6, 9) : geometric(1e-1, 1e-3, 9));
    const SingularField field(curve, field_options(r, default_field_options(spec)));

    const AsymptoticEstimate e = asymptotic_coefficient(field, t, dir, rs);

    Csv csv("asymptote", {"radius", "value", "scaled"});
    json samples = json::array();
    for (const AsymptoticSample& s : e.samples) {
        csv.row({s.radius, s.value, s.scaled});
        samples.push_back({{"radius", jnum(s.radius)}, {"value", jnum(s.value)}, {"scaled", jnum(s.scaled)}});
    }
    Outcome o;
    json body{{"N", N},
              {"t", t},
              {"estimate", jnum(e.coefficient)},
              {"error_estimate", jnum(e.error_estimate)},
              {"paper_constant", jnum(e.reference_constant)},
              {"relative_error", jnum(e.relative_error)},
              {"rate", jnum(e.rate)},
              {"converged", e.converged},
              {"diagnostic", e.diagnostic},
              {"samples", samples}};
    if (r.has("tolerance")) {
        const double tol = r.positive("tolerance", 0.0);
        o.passed = e.relative_error <= tol;
        body["tolerance"] = tol;
        body["verdict"] = verdict(o.passed);
    }
    cx.write_csv(csv);
    cx.write_json(body);
    o.summary = "estimate " + num(e.coefficient) + " reference constant " + num(e.reference_constant) + " relative error " +
                num(e.relative_error);
    return o;
}

Outcome cmd_field(const Context& cx) {
    const Node r = cx.root();
    r.only({"curve", "points", "line", "times", "field_options", "seed"});
    const Node cn = r.child("curve");
    const CurveSpec spec = curve_spec(cn);
    const HolderCurve curve = build_curve(cn, spec);
    const int N = curve.dim();

    std::vector<Vec> pts;
    if (r.has("points")) {
        const Node p = r.child("points");
        if (!p.raw().is_array() || p.raw().empty()) bad(p.path(), "expected a non-empty array of points");
        for (std::size_t i = 0; i < p.raw().size(); ++i) {
            const json& e = p.raw()[i];
            const bool ok = e.is_array() && static_cast<int>(e.size()) == N &&
                            std::all_of(e.begin(), e.end(), [](const json& v) { return v.is_number(); });
            if (!ok) bad(p.path() + "[" + std::to_string(i) + "]", "expected " + std::to_string(N) + " numbers");
            pts.push_back(Vec::from(e.get<std::vector<double>>()));
        }
    } else if (r.has("line")) {
        const Node l = r.child("line");
        l.only({"from", "to", "count"});
        const Vec a = l.vec("from", N);
        const Vec b = l.vec("to", N);
        const std::size_t c = l.count("count", 11);
        for (std::size_t k = 0; k < c; ++k)
            pts.push_back(a + (b - a) * (c == 1 ? 0.0 : static_cast<double>(k) / static_cast<double>(c - 1)));
    } else {
        bad("points", "missing (give points or line)");
    }
    const std::vector<double> ts = r.has("times") ? r.numbers("times") : std::vector<double>{0.5 * curve.horizon()};
    for (double t : ts)
        if (!(t > 0.0)) bad("times", "values must be positive");

    std::vector<Vec> xs;
    std::vector<double> tt;
    for (double t : ts)
        for (const Vec& p : pts) {
            xs.push_back(p);
            tt.push_back(t);
        }
    const SingularField field(curve, field_options(r, default_field_options(spec)));
    const std::vector<double> values = field.evaluate_many(xs, tt);

    std::vector<std::string> cols;
    for (int i = 0; i < N; ++i) cols.push_back("x" + std::to_string(i));
    cols.push_back("t");
    cols.push_back("F");
    Csv csv("field", cols);
    for (std::size_t i = 0; i < xs.size(); ++i) {
        std::vector<double> row(xs[i].values().begin(), xs[i].values().end());
        row.push_back(tt[i]);
        row.push_back(values[i]);
        csv.row(row);
    }
    cx.write_csv(csv);
    return {true, std::to_string(xs.size()) + " values"};
}

Outcome cmd_residual(const Context& cx) {
    const Node r = cx.root();
    r.only({"curve", "t", "d", "direction", "x", "steps", "ratio_window", "field_options", "seed"});
    const Node cn = r.child("curve");
    const CurveSpec spec = curve_spec(cn);
    const HolderCurve curve = build_curve(cn, spec);
    const int N = curve.dim();
    const double t = r.positive("t", 0.5 * curve.horizon());
    Vec x;
    if (r.has("x")) {
        x = r.vec("x", N);
    } else {
        Vec dir = r.has("direction") ? r.vec("direction", N) : Vec::unit(N, N - 1);
        if (norm(dir) == 0.0) bad("direction", "must be non-zero");
        x = curve(t) + dir * (r.positive("d", 0.5) / norm(dir));
    }
    const std::vector<double> hs = radii(r, "steps", {1e-2, 5e-3});
    if (hs.size() < 2) bad("steps", "need at least two steps");
    std::vector<double> window{3.5, 4.5};
    if (r.has("ratio_window")) {
        window = r.numbers("ratio_window");
        if (window.size() != 2 || !(window[0] < window[1])) bad("ratio_window", "expected [low, high]");
    }
    FieldOptions fo;
    fo.rel_tol = 1e-13;
    const SingularField field(curve, field_options(r, fo));
    const SpaceTimeField u = [&](const Vec& y, double s) { return field(y, s); };

    Csv csv("residual", {"h", "residual"});
    std::vector<double> res;
    for (double h : hs) {
        res.push_back(heat_residual(u, curve, x, t, h));
        csv.row({h, res.back()});
    }
    const double ratio = std::abs(res[0] / res[1]);
    Outcome o;
    o.passed = ratio >= window[0] && ratio <= window[1];
    json steps = json::array();
    for (std::size_t i = 0; i < hs.size(); ++i) steps.push_back({{"h", hs[i]}, {"residual", jnum(res[i])}});
    cx.write_csv(csv);
    cx.write_json({{"x", jvec(x)},
                   {"t", t},
                   {"steps", steps},
                   {"ratio", jnum(ratio)},
                   {"ratio_window", window},
                   {"verdict", verdict(o.passed)}});
    o.summary = "residual ratio " + num(ratio);
    return o;
}

Outcome cmd_pairing(const Context& cx) {
    const Node r = cx.root();
    r.only({"curve", "bump", "tol_t", "tol_space", "time_slabs", "samples", "tolerance", "abs_tolerance",
            "field_options", "seed"});
    const Node cn = r.child("curve");
    const CurveSpec spec = curve_spec(cn);
    const HolderCurve curve = build_curve(cn, spec);
    const int N = curve.dim();
    if (N < 2 || N > 3) bad(join(cn.path(), "N"), "pairing supports N = 2 (quadrature) or N = 3 (Monte Carlo)");

    const Node b = r.child("bump");
    b.only({"center", "half_widths", "t0", "t_half", "amplitude"});
    const double t0 = b.positive("t0", 0.5 * curve.horizon());
    const double t_half = b.positive("t_half", 0.2 * curve.horizon());
    const Vec center = b.has("center") ? b.vec("center", N) : curve(t0);
    const Vec widths = b.vec("half_widths", N);
    for (double w : widths.values())
        if (!(w > 0.0)) bad(join(b.path(), "half_widths"), "values must be positive");
    if (t0 - t_half <= 0.0 || t0 + t_half >= curve.horizon()) bad(join(b.path(), "t0"), "bump must lie inside (0, T)");
    const TestFunction phi = bump_test_function(center, widths, t0, t_half, b.number("amplitude", 1.0));

    PairingOptions po;
    po.tol_t = r.positive("tol_t", 1e-5);
    po.tol_space = r.positive("tol_space", 1e-5);
    po.time_slabs = r.count("time_slabs", po.time_slabs);
    po.monte_carlo_samples = r.count("samples", po.monte_carlo_samples);
    if (N >= 3) po.seed = cx.seed();
    FieldOptions fo = default_field_options(spec);
    fo.rel_tol = std::max(fo.rel_tol, 1e-7);
    const SingularField field(curve, field_options(r, fo));

    const PairingResult p = distributional_pairing(field, phi, po);
    const double tol = r.positive("tolerance", N == 2 ? 1e-3 : 1e-2);
    const double abs_tol = r.positive("abs_tolerance", 1e-6);
    Outcome o;
    double rel = std::numeric_limits<double>::quiet_NaN();
    if (p.rhs != 0.0) {
        rel = std::abs(p.lhs - p.rhs) / std::abs(p.rhs);
        o.passed = rel <= tol;
    } else {
        o.passed = std::abs(p.lhs) <= abs_tol;
    }
    Csv csv("pairing", {"lhs", "rhs", "lhs_error", "relative_error", "verdict"});
    csv.row({p.lhs, p.rhs, p.lhs_error, rel}, verdict(o.passed));
    cx.write_csv(csv);
    cx.write_json({{"lhs", jnum(p.lhs)},
                   {"rhs", jnum(p.rhs)},
                   {"lhs_error", jnum(p.lhs_error)},
                   {"relative_error", jnum(rel)},
                   {"method", p.method},
                   {"tolerance", tol},
                   {"abs_tolerance", abs_tol},
                   {"verdict", verdict(o.passed)}});
    o.summary = "lhs " + num(p.lhs) + " rhs " + num(p.rhs);
    return o;
}

Outcome cmd_oracle_check(const Context& cx) {
    const Node r = cx.root();
    r.only({"N", "R", "t", "threshold", "field_options", "seed"});
    if (r.integer("N", 3) != 3) bad("N", "the closed-form oracle exists for N = 3 only");
    const std::vector<double> Rs = radii(r, "R", {0.05, 0.1, 0.25, 0.5, 1.0});
    const std::vector<double> ts = radii(r, "t", {0.05, 0.1, 0.25, 0.5, 1.0});
    const double threshold = r.positive("threshold", 1e-8);
    double T = 0.0;
    for (double t : ts) T = std::max(T, t);
    CurveSpec s;
    s.kind = CurveKind::constant;
    s.dim = 3;
    s.horizon = T;
    s.center = Vec::zeros(3);
    const SingularField field(make_builtin_curve(s), field_options(r, FieldOptions{}));

    Csv csv("oracle-check", {"R", "t", "F", "oracle", "relative_error"});
    double worst = 0.0;
    for (double t : ts)
        for (double R : Rs) {
            const double F = field(Vec{R, 0.0, 0.0}, t);
            const double exact = erfc_fn(R / (2.0 * std::sqrt(t))) / (4.0 * M_PI * R);
            const double rel = std::abs(F - exact) / exact;
            worst = std::max(worst, rel);
            csv.row({R, t, F, exact, rel});
        }
    Outcome o;
    o.passed = worst <= threshold;
    cx.write_csv(csv);
    cx.write_json({{"max_relative_error", jnum(worst)}, {"threshold", threshold}, {"verdict", verdict(o.passed)}});
    o.summary = "max relative error " + num(worst);
    return o;
}

Outcome cmd_verify_cutoff(const Context& cx) {
    const Node r = cx.root();
    r.only({"curve", "radii", "samples", "check_samples", "fd_tolerance", "window", "seed"});
    const Node cn = r.child("curve");
    const CurveSpec spec = curve_spec(cn);
    const HolderCurve curve = build_curve(cn, spec);
    const std::uint64_t seed = cx.seed();
    const std::vector<double> rs = radii(r, "radii", halvings(0.125, 5));
    const std::size_t samples = r.count("samples", 20000);
    const std::size_t check_samples = r.count("check_samples", 1000);
    const double fd_tol = r.positive("fd_tolerance", 1e-3);
    const double window = r.positive("window", 4.0);

    CutoffFamily family(curve);
    CutoffBoundTable table = verify_cutoff_bounds(family, rs, samples, seed);
    table.bounded = table.ratio_grad <= window && table.ratio_lap <= window && table.ratio_dt <= window;

    Csv csv("verify-cutoff", {"r", "sup_scaled_grad", "sup_scaled_lap", "sup_scaled_dt", "verdict"});
    json rows = json::array();
    bool all = table.bounded;
    for (const CutoffBoundRow& row : table.rows) {
        const DerivativeCheck d = check_cutoff_derivatives(family, row.r, check_samples, seed);
        const bool fd_ok = d.max_err_grad <= fd_tol && d.max_err_lap <= fd_tol && d.max_err_dt <= fd_tol;
        all = all && fd_ok;
        csv.row({row.r, row.sup_scaled_grad, row.sup_scaled_lap, row.sup_scaled_dt}, verdict(table.bounded && fd_ok));
        rows.push_back({{"r", row.r},
                        {"epsilon", jnum(row.epsilon)},
                        {"sup_scaled_grad", jnum(row.sup_scaled_grad)},
                        {"sup_scaled_lap", jnum(row.sup_scaled_lap)},
                        {"sup_scaled_dt", jnum(row.sup_scaled_dt)},
                        {"fd_error_grad", jnum(d.max_err_grad)},
                        {"fd_error_lap", jnum(d.max_err_lap)},
                        {"fd_error_dt", jnum(d.max_err_dt)},
                        {"fd_error_lap_printed_formula", jnum(d.max_err_lap_printed)}});
    }
    cx.write_csv(csv);
    cx.write_json({{"rows", rows},
                   {"ratio_grad", jnum(table.ratio_grad)},
                   {"ratio_lap", jnum(table.ratio_lap)},
                   {"ratio_dt", jnum(table.ratio_dt)},
                   {"window", window},
                   {"fd_tolerance", fd_tol},
                   {"verdict", verdict(all)}});
    return {all, "ratios " + num(table.ratio_grad) + " " + num(table.ratio_lap) + " " + num(table.ratio_dt)};
}

/// Exact tube integral of a point locus: N omega_N r^2 / 2 for the power kernel,
/// pi r^2 (log(1/r) + 1/2) for the log kernel in the plane.
double point_tube_exact(int N, double r, TubeKernel kernel) {
    if (kernel == TubeKernel::log) return M_PI * r * r * (std::log(1.0 / r) + 0.5);
    return N * unit_ball_volume(N) * r * r / 2.0;
}

Outcome cmd_verify_tube(const Context& cx) {
    const Node r = cx.root();
    r.only({"manifold", "t", "radii", "kernel", "samples", "window", "exact_tolerance", "seed"});
    const SingularManifold M = build_manifold(r.child("manifold"));
    const std::uint64_t seed = cx.seed();
    const int N = M.dim();
    const int m = M.param_dim();
    const double t = r.number("t", 0.5 * M.horizon());
    if (t < 0.0 || t > M.horizon()) bad("t", "must lie in [0, T]");
    const std::string kname = r.string("kernel", N == m + 2 ? "log" : "power");
    TubeKernel kernel;
    if (kname == "power") kernel = TubeKernel::power;
    else if (kname == "log") kernel = TubeKernel::log;
    else bad("kernel", "expected power or log");
    if (kernel == TubeKernel::power && N < m + 3) bad("kernel", "the power kernel needs N >= m + 3");
    if (kernel == TubeKernel::log && N != m + 2) bad("kernel", "the log kernel needs N = m + 2");
    const std::vector<double> rs = radii(r, "radii", halvings(0.2, 3));
    if (kernel == TubeKernel::log)
        for (double x : rs)
            if (x >= 1.0) bad("radii", "the log kernel needs r < 1");
    TubeOptions to;
    to.samples = r.count("samples", to.samples);
    to.seed = seed;
    const double window = r.positive("window", 4.0);
    const double exact_tol = r.positive("exact_tolerance", 0.01);

    TubeTable table = verify_tube(M, t, rs, kernel, to);
    table.bounded = table.ratio <= window;
    bool all = table.bounded;

    Csv csv("verify-tube", {"r", "integral", "stderr", "scaled_value", "verdict"});
    json rows = json::array();
    for (const TubeRow& row : table.rows) {
        bool ok = table.bounded;
        json jr{{"r", row.r}, {"integral", jnum(row.integral)}, {"stderr", jnum(row.std_error)}, {"scaled_value", jnum(row.scaled)}};
        if (m == 0) {
            // MC noise widens the 1% band by two standard errors
            const double exact = point_tube_exact(N, row.r, kernel);
            const bool match = std::abs(row.integral - exact) <= exact_tol * exact + 2.0 * row.std_error;
            ok = ok && match;
            jr["exact"] = jnum(exact);
            jr["relative_error"] = jnum(std::abs(row.integral - exact) / exact);
        }
        all = all && ok;
        jr["verdict"] = verdict(ok);
        rows.push_back(jr);
        csv.row({row.r, row.integral, row.std_error, row.scaled}, verdict(ok));
    }
    cx.write_csv(csv);
    cx.write_json({{"kernel", kname}, {"rows", rows}, {"ratio", jnum(table.ratio)}, {"window", window}, {"verdict", verdict(all)}});
    return {all, "scaled ratio " + num(table.ratio)};
}

/// The locus of a classify run: "curve" for a moving point, "manifold" otherwise.
SingularManifold classify_locus(const Node& r, std::optional<CurveSpec>& curve_out) {
    if (r.has("curve") == r.has("manifold")) bad("curve", "give exactly one of curve or manifold");
    if (r.has("curve")) {
        const Node cn = r.child("curve");
        curve_out = curve_spec(cn);
        return SingularManifold::point(build_curve(cn, *curve_out));
    }
    return build_manifold(r.child("manifold"));
}

json report_json(const RemovabilityReport& rep) {
    json tests = json::array();
    for (const CriterionRecord& c : rep.tests) {
        json j{{"eps", c.eps},
               {"t1", c.window.t1},
               {"t2", c.window.t2},
               {"passed", c.result.passed},
               {"witness_radius", jnum(c.result.witness_radius)},
               {"failure_radius", jnum(c.result.failure_radius)},
               {"worst_ratio", jnum(c.result.worst_ratio)},
               {"samples", c.result.samples},
               {"violations", c.result.violations}};
        if (c.result.literal_passed) j["literal_passed"] = *c.result.literal_passed;
        tests.push_back(j);
    }
    return {{"verdict", to_string(rep.verdict)},
            {"criterion", to_string(rep.criterion)},
            {"criterion_order", rep.criterion_order},
            {"exponent_estimate", jnum(rep.exponent_estimate)},
            {"coefficient_estimate", jnum(rep.coefficient_estimate)},
            {"growth_residual", jnum(rep.growth_residual)},
            {"reason", rep.reason},
            {"sample_count", rep.samples.size()},
            {"tests", tests}};
}

Outcome cmd_classify(const Context& cx) {
    const Node r = cx.root();
    r.only({"curve", "manifold", "field", "eps_list", "windows", "r_max", "r_min", "time_samples", "directions",
            "radii_per_decade", "expect", "seed"});
    std::optional<CurveSpec> cspec;
    const SingularManifold locus = classify_locus(r, cspec);
    const std::uint64_t seed = cx.seed();

    const Node f = r.child("field");
    f.only({"type", "value", "exponent", "x0", "field_options"});
    const std::string type = f.string("type");
    SolutionField field{nullptr, locus, {}, {}};
    if (type == "singular") {
        if (!cspec) bad(join(f.path(), "type"), "the singular solution needs a curve locus");
        field = singular_solution_field(
            SingularField(make_builtin_curve(*cspec), field_options(f, default_field_options(*cspec))));
    } else if (const auto mk = parse_mock_kind(type)) {
        MockSpec ms;
        ms.kind = *mk;
        ms.value = f.number("value", ms.value);
        ms.exponent = f.number("exponent", ms.exponent);
        if (f.has("x0")) ms.x0 = f.vec("x0", locus.dim());
        field = mock_field(locus, ms);
    } else {
        bad(join(f.path(), "type"), "unknown field type '" + type + "'");
    }

    ClassifyOptions co;
    if (r.has("eps_list")) co.eps_list = radii(r, "eps_list", {});
    if (r.has("windows")) {
        const Node w = r.child("windows");
        if (!w.raw().is_array() || w.raw().empty()) bad(w.path(), "expected an array of [t1, t2]");
        for (std::size_t i = 0; i < w.raw().size(); ++i) {
            const json& e = w.raw()[i];
            const std::string p = w.path() + "[" + std::to_string(i) + "]";
            if (!e.is_array() || e.size() != 2 || !e[0].is_number() || !e[1].is_number()) bad(p, "expected [t1, t2]");
            const TimeWindow tw{e[0].get<double>(), e[1].get<double>()};
            if (!(tw.t1 > 0.0 && tw.t1 < tw.t2 && tw.t2 <= locus.horizon())) bad(p, "need 0 < t1 < t2 <= T");
            co.windows.push_back(tw);
        }
    }
    co.sampling.r_max = r.positive("r_max", co.sampling.r_max);
    co.sampling.r_min = r.positive("r_min", co.sampling.r_min);
    if (!(co.sampling.r_min < co.sampling.r_max)) bad("r_min", "must be below r_max");
    co.sampling.time_samples = r.count("time_samples", co.sampling.time_samples);
    co.sampling.directions = r.count("directions", co.sampling.directions);
    co.sampling.radii_per_decade = r.count("radii_per_decade", co.sampling.radii_per_decade);
    co.sampling.seed = seed;
    std::optional<Verdict> expect;
    if (r.has("expect")) {
        const std::string e = r.string("expect");
        for (Verdict v : {Verdict::removable, Verdict::non_removable, Verdict::indeterminate})
            if (to_string(v) == e) expect = v;
        if (!expect) bad("expect", "expected removable, non_removable or indeterminate");
    }

    try {
        (void)criterion_for(locus);
    } catch (const DomainError& e) {
        bad("manifold", e.what());
    }
    const RemovabilityReport rep = classify(field, co);

    const bool log = rep.criterion == CriterionKind::point_log || rep.criterion == CriterionKind::set_log;
    Csv csv("classify", {"eps", "t", "d", "abs_u", "bound"});
    for (double eps : co.eps_list)
        for (const FieldSample& s : rep.samples)
            csv.row({eps, s.t, s.d, s.abs_u, log ? eps * std::log(1.0 / s.d) : eps * std::pow(s.d, -rep.criterion_order)});
    json body = report_json(rep);
    Outcome o;
    if (expect) {
        o.passed = rep.verdict == *expect;
        body["expect"] = to_string(*expect);
        body["expect_met"] = o.passed;
    }
    cx.write_csv(csv);
    cx.write_json(body);
    o.summary = to_string(rep.verdict) + " (exponent " + num(rep.exponent_estimate) + ")";
    return o;
}

Outcome cmd_moll(const Context& cx) {
    const Node r = cx.root();
    r.only({"curve", "eps_list", "samples", "tol", "seed"});
    const Node cn = r.child("curve");
    const CurveSpec spec = curve_spec(cn);
    const HolderCurve curve = build_curve(cn, spec);
    const std::vector<double> eps_list = radii(r, "eps_list", {1e-1, 1e-2, 1e-3});
    const std::size_t samples = r.count("samples", 2000);
    MollifyOptions mo;
    mo.tol = r.positive("tol", mo.tol);

    Csv csv("moll", {"eps", "sup_coord_deviation", "bound_coord", "sup_deviation", "bound_sum", "sup_coord_speed",
                     "bound_speed", "verdict"});
    bool all = true;
    json rows = json::array();
    for (double eps : eps_list) {
        const MollificationCheck c = check_mollification(curve, eps, samples, mo);
        const bool ok = c.pass_coord && c.pass_sum && c.pass_speed;
        all = all && ok;
        csv.row({eps, c.sup_coord_deviation, c.bound_coord, c.sup_deviation, c.bound_sum, c.sup_coord_speed,
                 c.bound_speed},
                verdict(ok));
        rows.push_back({{"eps", eps},
                        {"pass_coord", c.pass_coord},
                        {"pass_sum", c.pass_sum},
                        {"pass_speed", c.pass_speed},
                        {"slack", c.slack}});
    }
    cx.write_csv(csv);
    cx.write_json({{"curve", to_string(spec.kind)}, {"rows", rows}, {"verdict", verdict(all)}});
    return {all, std::to_string(eps_list.size()) + " scales checked"};
}

using Handler = Outcome (*)(const Context&);

const std::vector<std::pair<std::string, std::pair<Handler, const char*>>>& commands() {
    static const std::vector<std::pair<std::string, std::pair<Handler, const char*>>> table{
        {"asymptote", {cmd_asymptote, "Blow-up coefficient of F near the curve"}},
        {"field", {cmd_field, "F on a list of points and times"}},
        {"residual", {cmd_residual, "Finite-difference heat residual of F and its convergence ratio"}},
        {"pairing", {cmd_pairing, "Weak-form identity of F against a bump test function"}},
        {"oracle-check", {cmd_oracle_check, "F of a stationary point against the erfc closed form"}},
        {"verify-cutoff", {cmd_verify_cutoff, "Scaled derivative bounds of the cut-off family"}},
        {"verify-tube", {cmd_verify_tube, "Tube integrals around a moving set"}},
        {"classify", {cmd_classify, "Removability verdict for a field"}},
        {"moll", {cmd_moll, "Mollification deviation and speed bounds"}},
    };
    return table;
}

}  // namespace

int run(const std::vector<std::string>& args, std::ostream& out, std::ostream& err) {
    CLI::App app{"Moving-singularity heat equation toolkit", "heatsing-cli"};
    std::string config_path;
    std::string out_dir = ".";
    std::optional<std::uint64_t> seed;
    int threads = 0;
    app.add_option("--config", config_path, "JSON configuration file");
    app.add_option("--out", out_dir, "Directory for CSV and JSON artifacts");
    app.add_option("--seed", seed, "RNG seed; overrides the config");
    app.add_option("--threads", threads, "OpenMP threads (0 keeps the default)")->check(CLI::NonNegativeNumber);
    app.require_subcommand(1);
    std::map<CLI::App*, Handler> handlers;
    for (const auto& [name, entry] : commands()) handlers[app.add_subcommand(name, entry.second)->fallthrough()] =
        entry.first;

    // first bare word is the command; the global flags each take one value
    for (std::size_t i = 0; i < args.size(); ++i) {
        if (args[i].rfind("-", 0) == 0) {
            if (args[i].find('=') == std::string::npos && args[i] != "-h" && args[i] != "--help") ++i;
            continue;
        }
        if (!app.get_subcommand_no_throw(args[i])) {
            err << "unknown command '" << args[i] << "'\n" << app.help();
            return kConfigError;
        }
        break;
    }

    std::vector<std::string> reversed(args.rbegin(), args.rend());
    try {
        app.parse(reversed);
    } catch (const CLI::ParseError& e) {
        const int code = app.exit(e, out, err);
        return code == 0 ? kOk : kConfigError;
    }
    CLI::App* sub = app.get_subcommands().front();

    Context cx;
    cx.command = sub->get_name();
    cx.out_dir = out_dir;
    cx.seed_flag = seed;
    cx.out = &out;
    try {
        if (threads > 0) set_thread_count(threads);
        if (!config_path.empty()) {
            std::ifstream f(config_path, std::ios::binary);
            if (!f) throw ConfigError("cannot read config file '" + config_path + "'");
            std::stringstream ss;
            ss << f.rdbuf();
            cx.config = parse_config(ss.str());
            if (!cx.config.is_object()) throw ConfigError("key '<root>': the config must be a JSON object");
        }
        const Outcome o = handlers.at(sub)(cx);
        out << cx.command << ": " << verdict(o.passed) << (o.summary.empty() ? "" : ": " + o.summary) << "\n";
        return o.passed ? kOk : kFailed;
    } catch (const ConfigError& e) {
        err << cx.command << ": config error: " << e.what() << "\n";
        return kConfigError;
    } catch (const std::exception& e) {
        err << cx.command << ": error: " << e.what() << "\n";
        return kFailed;
    }
}

}  // namespace heatsing::cli
