#define DOCTEST_CONFIG_IMPLEMENT_WITH_MAIN
#include <doctest.h>

#include <sstream>

#include <json.hpp>

#include "sirtail/io.hpp"

using namespace sirtail;

TEST_CASE("toml: scalars, strings, comments")
{
    const auto t = parse_toml("# experiment\n"
                              "beta = 2.0\n"
                              "seed = 7\n"
                              "name = \"run one\"  # trailing comment\n"
                              "flag = true\n");
    CHECK(t.at("beta").as_double() == doctest::Approx(2.0));
    CHECK(t.at("seed").as_int() == 7);
    CHECK(t.at("name").as_string() == "run one");
    CHECK(t.at("flag").as_bool());
}

TEST_CASE("toml: inline tables and arrays")
{
    const auto t = parse_toml("fading = { kind = \"nakagami\", m = 2.0 }\n"
                              "levels = [1000, 10000, 100000]\n"
                              "model = { kind = \"poisson\", lambda = 0.5 }\n");
    const auto& fading = t.at("fading").as_table();
    CHECK(fading.at("kind").as_string() == "nakagami");
    CHECK(fading.at("m").as_double() == doctest::Approx(2.0));
    CHECK(t.at("levels").as_array().size() == 3);
    CHECK(t.at("levels").as_array()[2].as_int() == 100000);
    const auto model = parse_model(t.at("model"));
    CHECK(model.kind() == ProcessModel::Kind::Poisson);
    CHECK(model.lambda() == doctest::Approx(0.5));
    const auto spec = parse_fading(t.at("fading"));
    CHECK(spec.kind() == FadingSpec::Kind::Gamma);
    CHECK(spec.shape() == doctest::Approx(2.0));
    CHECK(spec.scale() == doctest::Approx(0.5));
}

TEST_CASE("toml: parse errors carry line numbers")
{
    try {
        parse_toml("good = 1\nbad =\n");
        FAIL("expected a parse error");
    } catch (const TomlParseError& e) {
        CHECK(e.line == 2);
    }
    CHECK_THROWS_AS(parse_toml("x = { a = 1"), TomlParseError);
    CHECK_THROWS_AS(parse_toml("x = [1, 2"), TomlParseError);
    CHECK_THROWS_AS(parse_toml("x = 1 y = 2"), TomlParseError);
}

TEST_CASE("model and fading flag strings")
{
    CHECK(parse_model("poisson:2.5").lambda() == doctest::Approx(2.5));
    CHECK(parse_model("ginibre").kind() == ProcessModel::Kind::Ginibre);
    CHECK(parse_model("latticemix:1.5").lattice_shape() == doctest::Approx(1.5));
    CHECK_THROWS_AS(parse_model("poisson"), std::invalid_argument);
    CHECK_THROWS_AS(parse_model("grid:1"), std::invalid_argument);
    CHECK_THROWS_AS(parse_model("poisson:abc"), std::invalid_argument);

    CHECK(parse_fading("rayleigh").kind() == FadingSpec::Kind::Gamma);
    CHECK(parse_fading("nakagami:4").shape() == doctest::Approx(4.0));
    CHECK(parse_fading("deterministic").kind() == FadingSpec::Kind::Deterministic);
    const auto g = parse_fading("gamma:2,0.5");
    CHECK(g.shape() == doctest::Approx(2.0));
    CHECK(g.scale() == doctest::Approx(0.5));
    CHECK_THROWS_AS(parse_fading("nakagami"), std::invalid_argument);
    CHECK_THROWS_AS(parse_fading("gamma:2"), std::invalid_argument);
    CHECK_THROWS_AS(parse_fading("foo"), std::invalid_argument);
}

TEST_CASE("doubles print with nine significant digits and a dot separator")
{
    CHECK(format_double(2.0 / 3.0) == "0.666666667");
    CHECK(format_double(1.0) == "1");
    CHECK(format_double(0.0001) == "0.0001");
    CHECK(format_double(123456789012.0) == "1.23456789e+11");
}

TEST_CASE("tail CSV layout")
{
    TailCurve curve;
    curve.beta = 2.0;
    curve.model = ProcessModel::poisson(1.0);
    curve.fading = FadingSpec::rayleigh();
    curve.n_samples = 10;
    curve.n_points = 5;
    curve.seed = 3;
    curve.entries.push_back({10.0, 0.25, 0.2, 0.3, std::sqrt(10.0) * 0.25, 0.26});
    curve.entries.push_back({100.0, 0.0625, 0.05, 0.08, 0.625, 0.07});
    std::ostringstream os;
    write_tail_csv(os, curve);
    CHECK(os.str() == "theta,p_hat,ci_low,ci_high,scaled\n"
                      "10,0.25,0.2,0.3,0.790569415\n"
                      "100,0.0625,0.05,0.08,0.625\n");
}

TEST_CASE("tail JSON round-trips through nlohmann")
{
    TailCurve curve;
    curve.beta = 2.0;
    curve.model = ProcessModel::ginibre();
    curve.fading = FadingSpec::nakagami(2.0);
    curve.n_samples = 42;
    curve.n_points = 7;
    curve.seed = 9;
    curve.entries.push_back({10.0, 1.0 / 3.0, 0.3, 0.37, std::sqrt(10.0) / 3.0, 0.34});
    std::ostringstream os;
    write_tail_json(os, curve);
    const auto j = nlohmann::json::parse(os.str());
    CHECK(j["seed"] == 9);
    CHECK(j["n_samples"] == 42);
    CHECK(j["entries"].size() == 1);
    // 9-significant-digit rounding applied before insertion
    CHECK(j["entries"][0]["p_hat"].get<double>() == doctest::Approx(0.333333333).epsilon(1e-12));
}

TEST_CASE("constant JSON pairs report their gap")
{
    ConstantEstimate a;
    a.value = 0.64;
    a.std_error = 0.01;
    a.bracket_low = 0.63;
    a.bracket_high = 0.65;
    a.method = "palm-mc";
    ConstantEstimate b = a;
    b.value = 0.66;
    b.method = "quadrature";
    std::ostringstream os;
    write_constant_json(os, {a, b});
    const auto j = nlohmann::json::parse(os.str());
    CHECK(j["estimates"].size() == 2);
    CHECK(j["gap"].get<double>() == doctest::Approx(0.02));
}
