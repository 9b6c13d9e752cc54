#define DOCTEST_CONFIG_IMPLEMENT_WITH_MAIN
#include "doctest.h"

#include "natscale/config.hpp"
#include "natscale/error.hpp"

using namespace natscale;
using nlohmann::json;

namespace {

const json kBrownian = {{"family", "constant"}, {"interval", {"-inf", "inf"}}, {"density", 2.0}};

json strip_time(json j)
{
    j.erase("wall_time_s");
    return j;
}

}  // namespace

TEST_CASE("commands")
{
    for (auto c : {Command::classify, Command::eigen, Command::green, Command::defect, Command::hittime, Command::simulate,
                   Command::audit})
        CHECK(parse_command(to_string(c)) == c);
    CHECK_THROWS_AS(parse_command("plot"), InvalidArgument);
}

TEST_CASE("strict parsing names the key")
{
    CHECK_THROWS_WITH_AS(parse_run_config({{"measure", kBrownian}, {"lamda", 0.5}}), doctest::Contains("lamda"), InvalidArgument);
    CHECK_THROWS_WITH_AS(parse_run_config({{"measure", kBrownian}, {"lambda", -1.0}}), doctest::Contains("lambda"),
                         InvalidArgument);
    CHECK_THROWS_WITH_AS(parse_run_config({{"measure", kBrownian}, {"tolerances", {{"ladder_tol", "tight"}}}}),
                         doctest::Contains("ladder_tol"), InvalidArgument);
    CHECK_THROWS_WITH_AS(parse_run_config({{"measure", kBrownian}, {"condition", "sometimes"}}), doctest::Contains("condition"),
                         InvalidArgument);
    CHECK_THROWS_AS(parse_run_config({{"x", 1.0}}), InvalidArgument);
}

TEST_CASE("config round trip")
{
    const json j = {{"command", "hittime"},
                    {"measure", kBrownian},
                    {"x", 0.0},
                    {"level", 1.0},
                    {"lambda", 0.5},
                    {"lambdas", {0.1, 0.5}},
                    {"t_max", 12.0},
                    {"checkpoints", {1.0, 2.0}},
                    {"n_paths", 100},
                    {"seed", 9},
                    {"tolerances", {{"ladder_tol", 1e-7}, {"bridge_correction", false}}}};
    const auto c = parse_run_config(j);
    CHECK(c.command == Command::hittime);
    CHECK(c.tolerances.ladder_tol == 1e-7);
    CHECK_FALSE(c.tolerances.bridge_correction);
    CHECK(parse_run_config(to_json(c)) == c);
}

TEST_CASE("run exit codes")
{
    RunConfig c;
    c.measure = kBrownian;
    c.command = Command::classify;
    const auto ok = run(c);
    CHECK(ok.exit_code == 0);
    CHECK(ok.report["classification"] == "Martingale");
    CHECK(ok.report["version"] == kVersion);

    c.measure = {{"family", "tabulated"}, {"interval", {0.5, "inf"}}, {"x", {1.0, 2.0, 3.0}}, {"density", {1.0, 0.5, 0.3}}};
    c.x = 1.0;
    const auto refused = run(c);
    CHECK(refused.exit_code == 2);
    CHECK(refused.report.contains("refused"));

    c.measure = kBrownian;
    c.command = Command::green;
    c.x.reset();
    const auto missing = run(c);
    CHECK(missing.exit_code == 1);
    CHECK(missing.report["error"].get<std::string>().find("'y'") != std::string::npos);
}

TEST_CASE("reports are reproducible")
{
    RunConfig c;
    c.command = Command::simulate;
    c.measure = {{"family", "power_tail"}, {"interval", {0.0, "inf"}}, {"coefficient", 2.0}, {"exponent", 4.0}};
    c.x = 1.0;
    c.t_max = 1.0;
    c.n_paths = 200;
    c.seed = 5;
    const auto a = run(c), b = run(c);
    CHECK(a.exit_code == 0);
    CHECK(strip_time(a.report).dump() == strip_time(b.report).dump());
    REQUIRE(a.csv.size() == 1);
    CHECK(a.csv == b.csv);
    CHECK(a.report["config"]["seed"] == 5);
}
