#include "doctest.h"

#include "evtlab/config.hpp"
#include "evtlab/report.hpp"

using namespace evtlab;

namespace {

const char* base = R"(
[map]
kind = "affine_mod1"
slope = 2

[observable]
base_point = "sqrt(2)/16"

[[observable.points]]
m = 0
shape = "neglog"

[[observable.points]]
m = 1
shape = "power_law"
p = "1/2"

[[observable.points]]
m = 3
shape = "power_law"
p = "1/2"
)";

}  // namespace

TEST_CASE("parse_rational") {
    CHECK(parse_rational("7/8") == Rational(7, 8));
    CHECK(parse_rational("0.999999") == Rational(999999, 1000000));
    CHECK(parse_rational("0.5") == Rational(1, 2));
    CHECK(parse_rational("-2.5e-3") == Rational(-1, 400));
    CHECK(parse_rational("010") == 10);
    CHECK(parse_rational("000") == 0);
    CHECK_THROWS_AS(parse_rational("1/0"), ConfigError);
    CHECK_THROWS_AS(parse_rational("x"), ConfigError);
    CHECK(Position::parse("0.25").rational() == Rational(1, 4));
}

TEST_CASE("fnv1a") {
    CHECK(fnv1a("") == 0xcbf29ce484222325ULL);
    CHECK(fnv1a("a") == 0xaf63dc4c8601ec8cULL);
    CHECK(hex64(0xabcULL) == "0000000000000abc");
}

TEST_CASE("config parsing") {
    ExperimentConfig cfg = parse_config(std::string(base) + "[simulate]\nn = 500\ntau = 5\nseed = 3\n");
    CHECK(cfg.spec.points.size() == 3);
    CHECK(cfg.plan.n == 500);
    CHECK(cfg.plan.seed == 3);
    REQUIRE(cfg.plan.tau);
    CHECK(*cfg.plan.tau == 5);
    CHECK(cfg.hash == parse_config(std::string(base) + "[simulate]\nn = 500\ntau = 5\nseed = 3\n").hash);

    auto out = run_command("analytic", cfg);
    CHECK(out.report["extremal_index"]["theta"]["exact"] == "7/8");
    CHECK(out.report["config_hash"] == hex64(cfg.hash));
}

TEST_CASE("config errors") {
    CHECK_THROWS_AS(parse_config(std::string(base) + "bogus = 1\n"), ConfigError);
    CHECK_THROWS_AS(parse_config(std::string(base) + "[simulate]\nwhat = 1\n"), ConfigError);
    CHECK_THROWS_AS(parse_config("[map]\nkind = \"affine_mod1\"\n"), ConfigError);
    CHECK_THROWS_AS(parse_config("not toml ["), ConfigError);
    CHECK_THROWS_AS(parse_config(std::string(base) + "[simulate]\ntau = 5\nlevel = 3\n"), ConfigError);
    std::string float_slope = base;
    float_slope.replace(float_slope.find("slope = 2"), 9, "slope = 2.0");
    CHECK_THROWS_AS(parse_config(float_slope), ConfigError);
    CHECK_THROWS_AS(parse_levels("1,,2"), ConfigError);
    CHECK(parse_levels("10,15").size() == 2);
}

TEST_CASE("simulate output is reproducible and consistent") {
    ExperimentConfig cfg =
        parse_config(std::string(base) + "[simulate]\nn = 4000\ntau = 20\norbits = 3\nrecord_orbits = 3\nseed = 9\n");
    auto a = run_command("simulate", cfg);
    auto b = run_command("simulate", cfg);
    REQUIRE(a.files.size() == b.files.size());
    for (std::size_t i = 0; i < a.files.size(); ++i) CHECK(a.files[i].second == b.files[i].second);

    // recount exceedances from series.csv
    const std::string& series = a.files[0].second;
    std::size_t exceed = 0, pos = series.find('\n') + 1;
    while (pos < series.size()) {
        std::size_t end = series.find('\n', pos);
        std::string line = series.substr(pos, end - pos);
        std::size_t c4 = 0;
        for (int k = 0; k < 4; ++k) c4 = line.find(',', c4) + 1;
        exceed += line[c4] == '1';
        pos = end + 1;
    }
    CHECK(exceed == a.report["stats"]["exceedances"].get<std::size_t>());
}
