#include <gtest/gtest.h>

#include <cstdlib>
#include <filesystem>
#include <fstream>
#include <sstream>

#include "cli.hpp"
#include "json.hpp"
#include "netswap/genio.hpp"

using namespace netswap;
using nlohmann::json;

namespace {

struct Result {
    int code;
    std::string out;
    std::string err;
};

Result invoke(std::vector<std::string> args) {
    std::ostringstream out;
    std::ostringstream err;
    const int code = netswap::cli::run(args, out, err);
    return {code, out.str(), err.str()};
}

std::vector<std::string> lines(const std::string& text) {
    std::vector<std::string> out;
    std::istringstream in(text);
    for (std::string line; std::getline(in, line);) {
        out.push_back(line);
    }
    return out;
}

std::filesystem::path temp_file(const std::string& name, const std::string& content) {
    const auto path = std::filesystem::temp_directory_path() / name;
    std::ofstream(path) << content;
    return path;
}

} // namespace

TEST(CliRun, CtcOnAppendixA) {
    const Result r = invoke({"run", "--mechanism", "ctc", "--fixture", "appendixA"});
    EXPECT_EQ(r.code, 0);
    EXPECT_EQ(r.out, "{\"allocation\":{\"1\":5,\"2\":1,\"3\":3,\"4\":2,\"5\":4,\"6\":6}}\n");
}

TEST(CliRun, SwnAndLsOnFig5) {
    EXPECT_EQ(json::parse(invoke({"run", "--mechanism", "swn", "--fixture", "fig5"}).out)["allocation"],
              json::parse(R"({"1":1,"2":3,"3":2,"4":4})"));
    const Result ls = invoke({"run", "--mechanism", "ls", "--fixture", "fig5", "--trace"});
    const auto l = lines(ls.out);
    ASSERT_GT(l.size(), 2U);
    EXPECT_EQ(json::parse(l.back())["allocation"], json::parse(R"({"1":4,"2":3,"3":2,"4":1})"));
    int rounds = 0;
    for (std::size_t k = 0; k + 1 < l.size(); ++k) {
        const auto e = json::parse(l[k]);
        EXPECT_TRUE(e.contains("event") && e.contains("agents") && e.contains("case"));
        rounds += e["event"] == "share" ? 1 : 0;
    }
    EXPECT_EQ(rounds, 2);
}

TEST(CliRun, InstanceFileAndSeeds) {
    const auto path = temp_file("netswap_cli_run.json", serialize_instance(gen_random(9, 0.4, 4)));
    const Result a = invoke({"run", "--mechanism", "ls", "--instance", path.string(), "--seed", "17"});
    const Result b = invoke({"run", "--mechanism", "ls", "--instance", path.string(), "--seed", "17"});
    EXPECT_EQ(a.code, 0);
    EXPECT_EQ(a.out, b.out);
    ::setenv("NETSWAP_SEED", "17", 1);
    const Result env = invoke({"run", "--mechanism", "ls", "--instance", path.string()});
    ::setenv("NETSWAP_SEED", "nope", 1);
    const Result bad_env = invoke({"run", "--mechanism", "ls", "--instance", path.string()});
    ::unsetenv("NETSWAP_SEED");
    EXPECT_EQ(env.out, a.out);
    EXPECT_EQ(bad_env.code, 2);
    std::filesystem::remove(path);
}

TEST(CliRun, CtcNeedsForceBeyondFourteenAgents) {
    const auto path = temp_file("netswap_cli_big.json", serialize_instance(gen_line(15, 2)));
    const Result refused = invoke({"run", "--mechanism", "ctc", "--instance", path.string()});
    EXPECT_EQ(refused.code, 2);
    EXPECT_NE(refused.err.find("--force"), std::string::npos);
    EXPECT_EQ(invoke({"run", "--mechanism", "ctc", "--instance", path.string(), "--force"}).code, 0);
    std::filesystem::remove(path);
}

TEST(CliRun, InputErrorsExitTwo) {
    EXPECT_EQ(invoke({"run", "--mechanism", "ctc", "--fixture", "fig9"}).code, 2);
    EXPECT_EQ(invoke({"run", "--mechanism", "abc", "--fixture", "fig2"}).code, 2);
    EXPECT_EQ(invoke({"run", "--mechanism", "ctc"}).code, 2);
    EXPECT_EQ(invoke({"run", "--fixture", "fig2"}).code, 2);
    EXPECT_EQ(invoke({"run", "--mechanism", "ctc", "--instance", "/nonexistent/x.json"}).code, 2);
    EXPECT_EQ(invoke({}).code, 2);
    const auto path = temp_file("netswap_cli_bad.json", R"({"n":2,"initial":[1],"profiles":{}})");
    const Result bad = invoke({"run", "--mechanism", "ttc", "--instance", path.string()});
    EXPECT_EQ(bad.code, 2);
    EXPECT_NE(bad.err.find("MalformedJson"), std::string::npos);
    std::filesystem::remove(path);
}

TEST(CliRun, HelpExitsZero) {
    const Result r = invoke({"--help"});
    EXPECT_EQ(r.code, 0);
    EXPECT_NE(r.out.find("verify"), std::string::npos);
}

TEST(CliVerify, TtcFig2IcViolation) {
    const Result r = invoke({"verify", "--mechanism", "ttc", "--fixture", "fig2", "--properties", "ic"});
    EXPECT_EQ(r.code, 1);
    const auto j = json::parse(r.out);
    EXPECT_EQ(j["mechanism"], "ttc");
    const auto& w = j["reports"][0]["witness"];
    EXPECT_EQ(w["kind"], "misreport");
    EXPECT_EQ(w["agent"], 2);
    EXPECT_EQ(w["report"]["neighbors"], json::array({1}));
}

TEST(CliVerify, CtcAppendixAHoldsEverywhereAsked) {
    const Result r = invoke({"verify", "--mechanism", "ctc", "--fixture", "appendixA", "--properties",
                          "ir,ic,stable-cc,optimal-cc"});
    EXPECT_EQ(r.code, 0) << r.out << r.err;
    const auto j = json::parse(r.out);
    ASSERT_EQ(j["reports"].size(), 4U);
    for (const auto& report : j["reports"]) {
        EXPECT_TRUE(report["holds"].get<bool>()) << report;
    }
}

TEST(CliVerify, SingleAgentAllProperties) {
    const Result r = invoke({"verify", "--mechanism", "swn", "--fixture", "single"});
    EXPECT_EQ(r.code, 0);
    EXPECT_EQ(json::parse(r.out)["reports"].size(), 8U);
}

TEST(CliVerify, CapExceededExitsThree) {
    EXPECT_EQ(invoke({"verify", "--mechanism", "swn", "--fixture", "fig4", "--max-n", "3", "--properties", "po"}).code, 3);
    EXPECT_EQ(invoke({"verify", "--mechanism", "swn", "--fixture", "appendixA", "--max-ic-n", "5", "--properties", "ic"}).code,
              3);
    EXPECT_EQ(invoke({"verify", "--mechanism", "swn", "--fixture", "fig4", "--properties", "po,bogus"}).code, 2);
}

TEST(CliScan, ExhaustiveScans) {
    const Result clean = invoke({"scan", "--mechanism", "ls", "--property", "stable-cc", "--n", "3", "--exhaustive"});
    EXPECT_EQ(clean.code, 0);
    const auto c = json::parse(clean.out);
    EXPECT_EQ(c["violations"], 0);
    EXPECT_EQ(c["instances_checked"], 826);
    EXPECT_TRUE(c["first_witness"].is_null());

    const Result found = invoke({"scan", "--mechanism", "swn", "--property", "optimal-cc", "--n", "4", "--exhaustive",
                              "--stop-at-first"});
    EXPECT_EQ(found.code, 0);
    const auto f = json::parse(found.out);
    EXPECT_GE(f["violations"].get<int>(), 1);
    EXPECT_EQ(f["first_witness"]["kind"], "domination");
    EXPECT_TRUE(f["first_witness"].contains("instance"));

    EXPECT_EQ(invoke({"scan", "--mechanism", "swn", "--property", "ic", "--n", "5", "--exhaustive"}).code, 3);
}

TEST(CliScan, SampledScansAreReproducible) {
    const std::vector<std::string> args{"scan", "--mechanism", "ttc", "--property", "ic", "--n", "4",
                                        "--samples", "40", "--seed", "3"};
    const Result a = invoke(args);
    const Result b = invoke(args);
    EXPECT_EQ(a.code, 0);
    EXPECT_EQ(a.out, b.out);
    EXPECT_EQ(json::parse(a.out)["instances_checked"], 40);
    EXPECT_EQ(invoke({"scan", "--mechanism", "ttc", "--property", "ic", "--n", "4"}).code, 2);
}

TEST(CliFixtures, ListExportAndWrite) {
    const auto list = json::parse(invoke({"fixtures"}).out);
    ASSERT_EQ(list.size(), fixture_names().size());
    EXPECT_EQ(list[1]["name"], "fig2");

    const Result one = invoke({"fixtures", "--name", "fig4"});
    EXPECT_EQ(parse_instance(one.out), paper_fixture("fig4").instance);
    EXPECT_EQ(invoke({"fixtures", "--name", "nope"}).code, 2);

    const auto dir = std::filesystem::temp_directory_path() / "netswap_cli_fixtures";
    std::filesystem::remove_all(dir);
    EXPECT_EQ(invoke({"fixtures", "--out", dir.string()}).code, 0);
    EXPECT_EQ(load_instance_file((dir / "appendixA.json").string()), paper_fixture("appendixA").instance);
    std::filesystem::remove_all(dir);
}

TEST(CliBench, ReportsRunsAndSlope) {
    const Result r = invoke({"bench", "--mechanism", "swn", "--n", "32", "--seed", "1", "--repeats", "1"});
    EXPECT_EQ(r.code, 0);
    const auto j = json::parse(r.out);
    EXPECT_EQ(j["runs"].size(), 4U);
    EXPECT_TRUE(j["log_log_slope"].is_number());
    EXPECT_EQ(invoke({"bench", "--mechanism", "ctc", "--n", "20"}).code, 2);
}
