#include <filesystem>
#include <fstream>

#include "doctest.h"
#include "mcrd/config.hpp"
#include "mcrd/io.hpp"

using namespace mcrd;
namespace fs = std::filesystem;

namespace {

fs::path temp_dir(const std::string& tag) {
    const fs::path p = fs::temp_directory_path() / ("mcrd_io_" + tag);
    fs::remove_all(p);
    fs::create_directories(p);
    return p;
}

}  // namespace

TEST_CASE("profile round-trip is lossless") {
    const fs::path dir = temp_dir("roundtrip");
    const std::vector<double> x = {0.0, 0.1234567890123456, 1.0 / 3.0, 1.0};
    const std::vector<double> u = {-1e-300, 2.2250738585072014e-308, 0.1 + 0.2, 1e17};
    const std::vector<double> v = {3.141592653589793, -2.718281828459045e-5, 0.0, -0.0};
    write_profile(dir / "p.csv", x, u, v);
    const Profile p = read_profile(dir / "p.csv");
    for (std::size_t i = 0; i < x.size(); ++i) {
        CHECK(p.x[i] == x[i]);
        CHECK(p.u[i] == u[i]);
        CHECK(p.v[i] == v[i]);
    }
}

TEST_CASE("csv errors carry locations") {
    const fs::path dir = temp_dir("errors");
    {
        std::ofstream f(dir / "bad_header.csv");
        f << "x,u\n0,1\n";
    }
    CHECK_THROWS_WITH_AS(read_profile(dir / "bad_header.csv"),
                         doctest::Contains("expected header 'x,u,v'"), ParseError);
    {
        std::ofstream f(dir / "bad_cell.csv");
        f << "x,u,v\n0,1,2\n0.5,oops,2\n";
    }
    try {
        read_profile(dir / "bad_cell.csv");
        FAIL("expected ParseError");
    } catch (const ParseError& e) {
        CHECK(std::string(e.what()).find(":3:") != std::string::npos);
        CHECK(std::string(e.what()).find("oops") != std::string::npos);
    }
    {
        std::ofstream f(dir / "ragged.csv");
        f << "a,b\n1,2\n3\n";
    }
    CHECK_THROWS_WITH_AS(read_table(dir / "ragged.csv"), doctest::Contains(":3:"), ParseError);
}

TEST_CASE("golden comparison flags the offending cell") {
    const fs::path golden = temp_dir("golden");
    const fs::path actual = temp_dir("actual");
    write_profile(golden / "profiles" / "s.csv", {0.0, 0.5}, {1.0, 2.0}, {3.0, 4.0});
    write_profile(actual / "profiles" / "s.csv", {0.0, 0.5}, {1.0, 2.001}, {3.0, 4.0});
    write_json_file(golden / "summary.json", {{"a", 1.0}});
    write_json_file(actual / "summary.json", {{"a", 1.0}});

    const GoldenReport identical = compare_golden(golden, golden, 0.0);
    CHECK(identical.pass);

    const GoldenReport bad = compare_golden(actual, golden, 1e-6);
    CHECK_FALSE(bad.pass);
    REQUIRE(bad.mismatches.size() == 1);
    CHECK(bad.mismatches[0].location == "row 2 col u");
    CHECK(bad.mismatches[0].diff == doctest::Approx(1e-3).epsilon(1e-9));

    // per-column override forgives the u column
    const GoldenReport forgiven = compare_golden(actual, golden, 1e-6, {{"u", 1e-2}});
    CHECK(forgiven.pass);

    fs::remove(actual / "profiles" / "s.csv");
    const GoldenReport missing = compare_golden(actual, golden, 1e-6);
    CHECK_FALSE(missing.pass);
    REQUIRE(missing.missing.size() == 1);
}

TEST_CASE("summary schema validation") {
    json good = {{"command", "analyze"}, {"model", {{"name", "cubic"}, {"params", json::object()}}},
                 {"v_star", 0.0},        {"x_star", 0.65},
                 {"x1", 0.0},            {"kappa_star", 2.9},
                 {"lambda_slope", -1.2}, {"verdict", "predicted stable (J'(v*) > 0)"}};
    std::string err;
    CHECK(validate_summary(good, &err));
    good.erase("kappa_star");
    CHECK_FALSE(validate_summary(good, &err));
    CHECK(err.find("kappa_star") != std::string::npos);
    CHECK_FALSE(validate_summary(json{{"command", "nope"}}, &err));
}

TEST_CASE("config parsing: defaults, validation and unknown keys") {
    const json base = {{"model", {{"name", "cubic"}, {"params", {{"alpha", 0.2}, {"beta", 0.5}}}}},
                       {"eps", 0.01},
                       {"xi", 0.35}};
    const RunConfig cfg = parse_config(base);
    CHECK(cfg.model_name == "cubic");
    CHECK(cfg.eps() == 0.01);
    CHECK(cfg.grid_for(0.01) == 401);
    CHECK(cfg.d == 1.0);

    json unknown = base;
    unknown["grdi_n"] = 100;
    CHECK_THROWS_WITH_AS(parse_config(unknown), doctest::Contains("grdi_n"), ConfigError);
    json nested = base;
    nested["model"]["params"]["gamma"] = 1.0;
    CHECK_THROWS_WITH_AS(parse_config(nested), doctest::Contains("gamma"), ConfigError);

    json kappa_bad = {{"model", {{"name", "hill"}, {"params", {{"kappa", 0.2}}}}}};
    CHECK_THROWS_AS(parse_config(kappa_bad), ConfigError);

    json both = base;
    both["eps_list"] = {0.04, 0.02};
    CHECK_THROWS_AS(parse_config(both), ConfigError);

    json down = base;
    down["direction"] = "down";
    CHECK(parse_config(down).direction == JumpDirection::Down);
    down["direction"] = "sideways";
    CHECK_THROWS_AS(parse_config(down), ConfigError);
}

TEST_CASE("resolved config round-trips to itself") {
    const json base = {{"model", {{"name", "hill"}, {"params", {{"kappa", 0.067}}}}},
                       {"eps", 0.02},
                       {"xi", 2.3},
                       {"grid_n", 513},
                       {"spectrum", {{"re_min", -0.8}, {"count", 8}}}};
    const RunConfig a = parse_config(base);
    const json ra = a.resolved();
    const RunConfig b = parse_config(ra);
    CHECK(b.resolved() == ra);
    CHECK(b.kappa == 0.067);
    CHECK(b.grid_n == 513);
    CHECK(b.spectrum.re_min == -0.8);
}
