#include <doctest.h>
#include <json.hpp>

#include <filesystem>
#include <fstream>
#include <sstream>

#include "cli.hpp"

namespace fs = std::filesystem;

namespace {

struct Run {
    int code;
    std::string out;
    std::string err;
};

fs::path scratch(const std::string& name) {
    const fs::path p = fs::temp_directory_path() / ("heatsing_cli_test_" + name);
    fs::remove_all(p);
    fs::create_directories(p);
    return p;
}

Run run(std::vector<std::string> args) {
    std::ostringstream o, e;
    const int code = heatsing::cli::run(args, o, e);
    return {code, o.str(), e.str()};
}

fs::path write_config(const fs::path& dir, const std::string& text, const std::string& name = "config.json") {
    const fs::path p = dir / name;
    std::ofstream(p) << text;
    return p;
}

std::string slurp(const fs::path& p) {
    std::ifstream f(p, std::ios::binary);
    std::stringstream s;
    s << f.rdbuf();
    return s.str();
}

}  // namespace

TEST_CASE("asymptote writes the estimate and the constant") {
    const fs::path d = scratch("asymptote");
    const fs::path c = write_config(d, R"({"curve": {"kind": "circle", "N": 3, "params": {"radius": 0.5}}, "tolerance": 1e-3})");
    const Run r = run({"asymptote", "--config", c.string(), "--out", (d / "out").string()});
    CHECK(r.code == 0);
    const auto j = nlohmann::json::parse(slurp(d / "out" / "asymptote.json"));
    CHECK(j["schema"] == "heatsing.asymptote.v1");
    CHECK(j["estimate"].get<double>() == doctest::Approx(0.0795775).epsilon(1e-4));
    CHECK(j["paper_constant"].get<double>() == doctest::Approx(1.0 / (4.0 * M_PI)));
    const std::string csv = slurp(d / "out" / "asymptote.csv");
    CHECK(csv.rfind("#schema=heatsing.asymptote.v1\nradius,value,scaled\n", 0) == 0);
    CHECK(csv.find('\r') == std::string::npos);
}

TEST_CASE("oracle-check passes with defaults") {
    const fs::path d = scratch("oracle");
    const Run r = run({"oracle-check", "--out", d.string()});
    CHECK(r.code == 0);
    const auto j = nlohmann::json::parse(slurp(d / "oracle-check.json"));
    CHECK(j["max_relative_error"].get<double>() <= 1e-8);
    // header, column names and 25 rows
    const std::string csv = slurp(d / "oracle-check.csv");
    CHECK(std::count(csv.begin(), csv.end(), '\n') == 27);
}

TEST_CASE("configuration errors exit 2 and name the key") {
    const fs::path d = scratch("errors");
    {
        const fs::path c = write_config(d, R"({"curve": {"kind": "circle", "params": {"radius": }}})");
        const Run r = run({"asymptote", "--config", c.string(), "--out", d.string()});
        CHECK(r.code == 2);
        CHECK(r.err.find("curve.params.radius") != std::string::npos);
    }
    {
        const fs::path c = write_config(d, R"({"curve": {"kind": "circle", "params": {"radiuss": 1}}})");
        const Run r = run({"asymptote", "--config", c.string(), "--out", d.string()});
        CHECK(r.code == 2);
        CHECK(r.err.find("curve.params.radiuss") != std::string::npos);
    }
    {
        const fs::path c = write_config(d, R"({"curve": {"kind": "spiral"}})");
        const Run r = run({"moll", "--config", c.string(), "--out", d.string()});
        CHECK(r.code == 2);
        CHECK(r.err.find("curve.kind") != std::string::npos);
    }
    {
        const fs::path c = write_config(d, R"({"manifold": {"kind": "point", "N": 3}})");
        const Run r = run({"verify-tube", "--config", c.string(), "--out", d.string()});
        CHECK(r.code == 2);
        CHECK(r.err.find("seed") != std::string::npos);
    }
    CHECK(run({"no-such-command"}).code == 2);
    CHECK(run({}).code == 2);
    CHECK(run({"moll", "--config", (d / "missing.json").string()}).code == 2);
}

TEST_CASE("module errors exit 1") {
    const fs::path d = scratch("module");
    const fs::path c = write_config(d, R"({"curve": {"kind": "circle", "N": 3}, "points": [[2, 0, 0]], "times": [0.5]})");
    const fs::path c2 = write_config(d, R"({"curve": {"kind": "constant", "N": 3, "params": {"center": [0, 0, 0]}}, "points": [[0, 0, 0]]})", "on_curve.json");
    CHECK(run({"field", "--config", c.string(), "--out", d.string()}).code == 0);
    const Run r = run({"field", "--config", c2.string(), "--out", d.string()});
    CHECK(r.code == 1);
    CHECK(!r.err.empty());
}

TEST_CASE("failed verdicts exit 1") {
    const fs::path d = scratch("verdict");
    const fs::path c = write_config(d, R"({"curve": {"kind": "circle", "N": 3}, "field": {"type": "gaussian"},
                                          "expect": "non_removable", "seed": 1, "time_samples": 4})");
    CHECK(run({"classify", "--config", c.string(), "--out", d.string()}).code == 1);
}

TEST_CASE("Monte Carlo commands are byte-for-byte reproducible") {
    const fs::path d = scratch("determinism");
    const fs::path c = write_config(d, R"({"manifold": {"kind": "circle", "N": 4}, "samples": 20000, "seed": 5})");
    CHECK(run({"verify-tube", "--config", c.string(), "--out", (d / "a").string()}).code == 0);
    CHECK(run({"verify-tube", "--config", c.string(), "--out", (d / "b").string(), "--threads", "1"}).code == 0);
    CHECK(slurp(d / "a" / "verify-tube.csv") == slurp(d / "b" / "verify-tube.csv"));
    // flags may follow the subcommand and --seed overrides the config
    CHECK(run({"verify-tube", "--config", c.string(), "--out", (d / "c").string(), "--seed", "6"}).code == 0);
    CHECK(slurp(d / "a" / "verify-tube.csv") != slurp(d / "c" / "verify-tube.csv"));
}
