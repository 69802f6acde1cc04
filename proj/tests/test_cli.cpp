#include "runner/commands.hpp"
#include "runner/config.hpp"

#include "pinv/errors.hpp"

#include <gtest/gtest.h>

#include <filesystem>
#include <fstream>
#include <map>
#include <sstream>

namespace pinv::cli {
namespace {

namespace fs = std::filesystem;

fs::path scratch(const std::string& name) {
    const auto* info = ::testing::UnitTest::GetInstance()->current_test_info();
    fs::path p = fs::temp_directory_path() / "pinv_cli_tests" / info->name() / name;
    fs::remove_all(p);
    return p;
}

std::string slurp(const fs::path& p) {
    std::ifstream in(p, std::ios::binary);
    std::ostringstream s;
    s << in.rdbuf();
    return s.str();
}

std::map<std::string, std::string> artifacts(const fs::path& dir) {
    std::map<std::string, std::string> out;
    for (const auto& e : fs::directory_iterator(dir))
        if (e.path().filename() != "timings.log") out[e.path().filename().string()] = slurp(e.path());
    return out;
}

struct Outcome {
    int code;
    std::string err;
};

Outcome run_command(const std::string& command, const fs::path& out, std::vector<std::string> overrides = {},
                    int workers = 1, std::string config = "") {
    RunOptions o;
    o.command = command;
    o.out_dir = out.string();
    o.overrides = std::move(overrides);
    o.workers = workers;
    o.config_path = std::move(config);
    std::ostringstream err;
    int code = run(o, err);
    return {code, err.str()};
}

Json summary(const fs::path& out) { return Json::parse(slurp(out / "summary.json")); }

TEST(Config, OverrideParsesJsonOrKeepsString) {
    Json c = Json::object();
    apply_override(c, "grid.nx=[51]");
    apply_override(c, "weight.lambda=3.5");
    apply_override(c, "preset=zero");
    EXPECT_EQ(c["grid"]["nx"][0], 51);
    EXPECT_EQ(c["weight"]["lambda"], 3.5);
    EXPECT_EQ(c["preset"], "zero");
    EXPECT_THROW(apply_override(c, "missing_equals"), Error);
}

TEST(Config, MergeKeepsUntouchedKeys) {
    Json base = Json::parse(R"({"grid": {"nx": [101], "nt": 500}, "seed": 1})");
    merge_into(base, Json::parse(R"({"grid": {"nt": 100}})"));
    EXPECT_EQ(base["grid"]["nx"][0], 101);
    EXPECT_EQ(base["grid"]["nt"], 100);
}

TEST(Config, EveryCommandHasDefaults) {
    EXPECT_EQ(command_names().size(), 14u);
    for (const auto& name : command_names()) {
        Json d = default_config(name);
        EXPECT_EQ(d["command"], name);
        EXPECT_TRUE(d.contains("grid"));
    }
}

TEST(Config, ErrorsNameTheField) {
    Json c = default_config("forward");
    c["grid"]["nx"] = Json::array({3});
    try {
        grid_from(ConfigView(c));
        FAIL() << "expected a config error";
    } catch (const Error& e) {
        EXPECT_NE(std::string(e.what()).find("grid"), std::string::npos);
    }
}

TEST(Run, ZeroPresetWritesZeroSolution) {
    fs::path out = scratch("zero");
    Outcome r = run_command("forward", out, {"preset=zero", "grid.nx=[21]", "grid.nt=40"});
    ASSERT_EQ(r.code, kPass) << r.err;
    std::istringstream csv(slurp(out / "U.csv"));
    std::string line;
    std::getline(csv, line);
    EXPECT_EQ(line, "x,t,value");
    int rows = 0;
    while (std::getline(csv, line)) {
        EXPECT_EQ(line.substr(line.rfind(',') + 1), "0");
        ++rows;
    }
    EXPECT_GT(rows, 0);
    EXPECT_TRUE(summary(out)["pass"].get<bool>());
    EXPECT_NE(r.err.find("PASS"), std::string::npos);
}

TEST(Run, SummaryAndEchoLayout) {
    fs::path out = scratch("layout");
    ASSERT_EQ(run_command("audit-lemma31", out, {"cases=10"}).code, kPass);
    Json s = summary(out);
    EXPECT_EQ(s["command"], "audit-lemma31");
    EXPECT_TRUE(s["checks"].is_object());
    EXPECT_TRUE(s["results"].is_object());
    Json echo = Json::parse(slurp(out / "config.json"));
    EXPECT_EQ(echo["cases"], 10);
    EXPECT_TRUE(fs::exists(out / "timings.log"));
}

TEST(Run, CorruptedWeightExponentFailsAudit) {
    fs::path good = scratch("good"), bad = scratch("bad");
    EXPECT_EQ(run_command("audit-lemma31", good).code, kPass);
    Outcome r = run_command("audit-lemma31", bad, {"lemma31.exponent_sign=1"});
    EXPECT_EQ(r.code, kAuditFail);
    EXPECT_NE(r.err.find("FAIL"), std::string::npos);
    EXPECT_FALSE(summary(bad)["pass"].get<bool>());
}

TEST(Run, InvalidConfigIsError) {
    Outcome r = run_command("forward", scratch("bad_grid"), {"grid.nx=[3]"});
    EXPECT_EQ(r.code, kError);
    EXPECT_NE(r.err.find("grid"), std::string::npos);
}

TEST(Run, MissingCsvNamesPath) {
    Outcome r = run_command("forward", scratch("missing"), {"preset=coupled", "initial.U=\"csv:/no/such/file.csv\""});
    EXPECT_EQ(r.code, kError);
    EXPECT_NE(r.err.find("/no/such/file.csv"), std::string::npos);
}

TEST(Run, UnknownCommandIsError) {
    EXPECT_EQ(run_command("no-such-command", scratch("unknown")).code, kError);
}

TEST(Run, NonPositiveWorkersIsError) {
    EXPECT_EQ(run_command("audit-lemma31", scratch("workers"), {}, 0).code, kError);
}

TEST(Run, DeterministicAcrossRunsAndWorkers) {
    const std::vector<std::string> small{"instances=4", "grid.nt=100"};
    fs::path a = scratch("a"), b = scratch("b");
    ASSERT_EQ(run_command("audit-carleman", a, small, 1).code, kPass);
    ASSERT_EQ(run_command("audit-carleman", b, small, 3).code, kPass);
    auto fa = artifacts(a), fb = artifacts(b);
    EXPECT_EQ(fa, fb);
    EXPECT_TRUE(fa.count("ratios.csv"));
}

TEST(Run, SeedChangesRandomArtifacts) {
    fs::path a = scratch("a"), b = scratch("b");
    ASSERT_EQ(run_command("audit-lemma31", a, {"cases=5"}).code, kPass);
    ASSERT_EQ(run_command("audit-lemma31", b, {"cases=5", "seed=2"}).code, kPass);
    EXPECT_NE(slurp(a / "cases.csv"), slurp(b / "cases.csv"));
}

TEST(Run, ConfigEchoReproducesOutputs) {
    fs::path a = scratch("a"), b = scratch("b");
    ASSERT_EQ(run_command("stability-sweep", a, {"pairs=4", "grid.nx=[41]", "grid.nt=200"}).code, kPass);
    RunOptions o;
    o.config_path = (a / "config.json").string();
    o.out_dir = b.string();
    std::ostringstream err;
    ASSERT_EQ(run(o, err), kPass) << err.str();
    EXPECT_EQ(artifacts(a), artifacts(b));
}

}  // namespace
}  // namespace pinv::cli
