#include "robinlap/config.hpp"

#include <doctest.h>

#include <filesystem>
#include <fstream>

using namespace robinlap;
using nlohmann::json;

namespace {

ErrorKind kind_of(const std::function<void()>& f)
{
    try {
        f();
    } catch (const Error& e) {
        return e.kind();
    }
    return ErrorKind::not_found;
}

} // namespace

TEST_CASE("toml subset parses into json")
{
    const auto j = parse_toml(R"toml(# run
command = "solve"
seed = 42
workers = 1_0

[grid]
d = 2
L = 8.0
H = 2e0
geometry = 'slab'

[coefficient]
expr = "|x|^(-1/4) * ball(1)"   # singular
p = 3

[solver]
lambda = [ -1.0,
           [-1.0, 2.5],   # complex
         ]
flags = { fast = true, label = "a\tb" }
big.nested.key = -inf
)toml");
    CHECK(j["command"] == "solve");
    CHECK(j["seed"] == 42);
    CHECK(j["workers"] == 10);
    CHECK(j["grid"]["H"].get<double>() == 2.0);
    CHECK(j["grid"]["geometry"] == "slab");
    CHECK(j["coefficient"]["expr"] == "|x|^(-1/4) * ball(1)");
    CHECK(j["solver"]["lambda"].size() == 2);
    CHECK(j["solver"]["lambda"][1][1].get<double>() == 2.5);
    CHECK(j["solver"]["flags"]["fast"] == true);
    CHECK(j["solver"]["flags"]["label"] == "a\tb");
    CHECK(std::isinf(j["solver"]["big"]["nested"]["key"].get<double>()));
}

TEST_CASE("toml errors carry the line")
{
    for (const char* bad : {"a = ", "a = 1\na = 2", "[t]\n[t]", "a = \"open", "a = [1, 2", "a = 1 2", "[[x]]",
                            "a = 1.2.3", "= 3", "a = {b = 1"}) {
        CHECK_MESSAGE(kind_of([&] { parse_toml(bad); }) == ErrorKind::config_invalid, bad);
    }
    try {
        parse_toml("a = 1\nb = ?");
    } catch (const Error& e) {
        CHECK(std::string(e.what()).find("line 2") != std::string::npos);
    }
}

TEST_CASE("overrides and validation")
{
    json j = parse_toml("[grid]\nn = 32\n");
    apply_override(j, "grid.n", "64");
    apply_override(j, "coefficient.expr", "1 + 0.5 * cos(2 * pi * x1)");
    apply_override(j, "solver.lambda", "[[-2.0, 1.0]]");
    apply_override(j, "output", "out dir");
    CHECK(j["grid"]["n"] == 64);
    CHECK(j["output"] == "out dir");
    const auto c = parse_run_config(j);
    CHECK(c.n == 64);
    CHECK(c.coefficient == "1 + 0.5 * cos(2 * pi * x1)");
    REQUIRE(c.lambdas.size() == 1);
    CHECK(c.lambdas[0] == cplx(-2.0, 1.0));
    CHECK(c.seed == 1);
    CHECK(parse_run_config(to_json(c)).n == 64);
    CHECK(to_json(parse_run_config(to_json(c))) == to_json(c));

    json numeric = json::object();
    apply_override(numeric, "coefficient.expr", "0");
    CHECK(parse_run_config(numeric).coefficient == "0");

    const auto bad = [](const char* key, const char* value) {
        json j = json::object();
        apply_override(j, key, value);
        return kind_of([&] { parse_run_config(j); });
    };
    CHECK(bad("grid.d", "4") == ErrorKind::config_invalid);
    CHECK(bad("grid.n", "7") == ErrorKind::config_invalid);
    CHECK(bad("grid.L", "-1") == ErrorKind::config_invalid);
    CHECK(bad("grid.n", "\"many\"") == ErrorKind::config_invalid);
    CHECK(bad("solver.lambda", "[2.0]") == ErrorKind::config_invalid);
    CHECK(bad("solver.method", "magic") == ErrorKind::config_invalid);
    CHECK(bad("coefficient.expr", "1 +") == ErrorKind::config_invalid);
    CHECK(bad("coefficient.t", "1.5") == ErrorKind::config_invalid);
    CHECK(bad("estimates.samples", "10") == ErrorKind::config_invalid);
    CHECK(bad("typo", "1") == ErrorKind::config_invalid);
    CHECK(bad("seed", "-3") == ErrorKind::config_invalid);
}

TEST_CASE("config files")
{
    const auto dir = std::filesystem::temp_directory_path() / "robinlap_config_test";
    std::filesystem::create_directories(dir);
    {
        std::ofstream(dir / "a.json") << R"({"grid": {"n": 16}, "seed": 7})";
        std::ofstream(dir / "a.toml") << "seed = 7\n[grid]\nn = 16\n";
        std::ofstream(dir / "bad.json") << "{";
    }
    CHECK(load_config_file(dir / "a.json") == load_config_file(dir / "a.toml"));
    CHECK(kind_of([&] { load_config_file(dir / "bad.json"); }) == ErrorKind::config_invalid);
    CHECK(kind_of([&] { load_config_file(dir / "missing.toml"); }) == ErrorKind::io_error);
    std::filesystem::remove_all(dir);
}
