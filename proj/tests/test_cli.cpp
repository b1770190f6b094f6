#include "spinnet/cli.hpp"

#include <gtest/gtest.h>

#include <cstdio>
#include <cstdlib>
#include <fstream>
#include <sstream>

using namespace spinnet;
using Json = nlohmann::json;

namespace {

struct Run {
    int code;
    std::string out;
    std::string err;
};

Run run(const std::vector<std::string>& args) {
    std::ostringstream out, err;
    int code = run_cli(args, out, err);
    return {code, out.str(), err.str()};
}

std::string graph(const std::string& name) { return std::string(SPINNET_GRAPHS_DIR) + "/" + name; }

std::string write_temp(const std::string& name, const std::string& text) {
    std::string path = ::testing::TempDir() + name;
    std::ofstream(path) << text;
    return path;
}

}  // namespace

TEST(Cli, ExactThetaJson) {
    auto r = run({"eval", graph("theta.sg"), "--method", "exact", "--format", "json"});
    EXPECT_EQ(r.code, 0);
    EXPECT_EQ(r.out.rfind(R"({"method":"exact","value":{"kind":"rational","num":"1","den":"1"},"graph_digest":"fnv1a64:)", 0), 0u)
        << r.out;
    auto j = Json::parse(r.out);
    EXPECT_EQ(j["graph_digest"].get<std::string>().size(), 24u);
}

TEST(Cli, DefaultMethodIsExact) {
    auto r = run({"eval", graph("k4_2.sg")});
    ASSERT_EQ(r.code, 0);
    auto j = Json::parse(r.out);
    EXPECT_EQ(j["method"], "exact");
    EXPECT_EQ(j["value"]["num"], "1");
    EXPECT_EQ(j["value"]["den"], "36");
}

TEST(Cli, MonteCarloLoopIsExact) {
    auto r = run({"eval", graph("loop2.sg"), "--method", "mc", "--samples", "10", "--seed", "7"});
    ASSERT_EQ(r.code, 0);
    auto j = Json::parse(r.out);
    EXPECT_EQ(j["value"]["kind"], "float");
    EXPECT_EQ(j["value"]["value"].get<double>(), 3.0);
    EXPECT_EQ(j["value"]["stderr"].get<double>(), 0.0);
    EXPECT_EQ(j["value"]["samples"], 10);
    EXPECT_EQ(j["value"]["seed"], 7);
}

TEST(Cli, ContractTheta) {
    auto r = run({"eval", graph("theta.sg"), "--method", "contract"});
    ASSERT_EQ(r.code, 0);
    auto j = Json::parse(r.out);
    EXPECT_NEAR(j["value"]["value"].get<double>(), 1.0, 1e-12);
    EXPECT_EQ(j["value"]["samples"], 0);
}

TEST(Cli, CheckInadmissible) {
    auto r = run({"check", graph("bad.sg")});
    EXPECT_EQ(r.code, 0);
    auto j = Json::parse(r.out);
    EXPECT_EQ(j["status"], "inadmissible");
    EXPECT_EQ(j["failures"][0]["vertex"], "a");
    EXPECT_EQ(j["failures"][0]["parity_failed"], true);
    EXPECT_EQ(j["failures"][0]["closure_failed"], true);
    auto t = run({"check", graph("bad.sg"), "--format", "text"});
    EXPECT_EQ(t.out.rfind("inadmissible\n", 0), 0u);
}

TEST(Cli, Simplify) {
    auto path = write_temp("path.sg", "v a\nv b\nv c\ne a b 1\ne b c 1\n");
    auto r = run({"simplify", path});
    ASSERT_EQ(r.code, 0);
    auto j = Json::parse(r.out);
    EXPECT_EQ(j["multiplier"]["num"], "-1");
    EXPECT_EQ(j["multiplier"]["den"], "2");
    EXPECT_EQ(j["graph"], "v a\nv c\ne a c 1\n");
}

TEST(Cli, ExpandTreeChoicesAgree) {
    auto a = run({"expand", graph("quad1.sg"), "--vertex", "a", "--split", "(0,1)(2,3)", "--evaluate"});
    auto b = run({"expand", graph("quad1.sg"), "--vertex", "a", "--split", " ( 0 , 2 ) ( 1, 3 ) ", "--evaluate"});
    auto whole = run({"eval", graph("quad1.sg")});
    ASSERT_EQ(a.code, 0) << a.err;
    ASSERT_EQ(b.code, 0) << b.err;
    auto ja = Json::parse(a.out), jb = Json::parse(b.out), jw = Json::parse(whole.out);
    EXPECT_EQ(ja["terms"].size(), 2u);
    EXPECT_EQ(ja["value"], jb["value"]);
    EXPECT_EQ(ja["value"], jw["value"]);
}

TEST(Cli, ExpandErrors) {
    EXPECT_EQ(run({"expand", graph("quad1.sg"), "--vertex", "a", "--split", "(0,1"}).code, kExitUsage);
    EXPECT_EQ(run({"expand", graph("quad1.sg"), "--vertex", "a", "--split", "(0,1)(2)(3)"}).code, kExitUsage);
    EXPECT_EQ(run({"expand", graph("quad1.sg"), "--vertex", "a", "--split", "(0,1)(2)"}).code, kExitInput);
    EXPECT_EQ(run({"expand", graph("quad1.sg"), "--vertex", "zz", "--split", "(0,1)(2,3)"}).code, kExitInput);
    EXPECT_EQ(run({"expand", graph("quad1.sg"), "--vertex", "a", "--split", "(0,1)(2,9)"}).code, kExitInput);
}

TEST(Cli, Geometry) {
    std::vector<std::string> args{"geometry", "--spins", "2", "2", "2", "2", "2", "2", "2", "2", "2", "2",
                                  "--samples", "50", "--seed", "3"};
    auto r = run(args);
    ASSERT_EQ(r.code, 0) << r.err;
    std::istringstream lines(r.out);
    std::string line;
    int samples = 0;
    Json last;
    while (std::getline(lines, line)) {
        last = Json::parse(line);
        if (last["kind"] == "sample") {
            ++samples;
            EXPECT_EQ(last["angles"].size(), 10u);
            if (last["status"] == "simplex") {
                EXPECT_EQ(last["weights"].size(), 5u);
            }
            if (last["status"] == "non_simplex") {
                EXPECT_EQ(last["null_vector"].size(), 5u);
            }
        }
    }
    EXPECT_EQ(samples, 50);
    EXPECT_EQ(last["kind"], "summary");
    EXPECT_EQ(last["samples"], 50);
    EXPECT_EQ(run({"geometry", "--spins", "1", "2", "--samples", "5"}).code, kExitUsage);
}

TEST(Cli, DeterministicAcrossWorkers) {
    auto base = run({"eval", graph("k4_2.sg"), "--method", "mc", "--samples", "20000", "--seed", "5", "--workers", "1"});
    auto geo = run({"geometry", "--spins", "2", "2", "2", "2", "2", "2", "2", "2", "2", "2", "--samples", "9000",
                    "--seed", "5", "--workers", "1"});
    for (std::string w : {"2", "8"}) {
        EXPECT_EQ(run({"eval", graph("k4_2.sg"), "--method", "mc", "--samples", "20000", "--seed", "5", "--workers", w}).out,
                  base.out);
        EXPECT_EQ(run({"geometry", "--spins", "2", "2", "2", "2", "2", "2", "2", "2", "2", "2", "--samples", "9000",
                       "--seed", "5", "--workers", w})
                      .out,
                  geo.out);
    }
}

TEST(Cli, TextFormat) {
    auto r = run({"eval", graph("k4_2.sg"), "--format", "text"});
    EXPECT_EQ(r.code, 0);
    EXPECT_NE(r.out.find("value:  1/36"), std::string::npos) << r.out;
}

TEST(Cli, FallbackToContract) {
    auto r = run({"eval", graph("k5_2.sg"), "--term-budget", "1"});
    ASSERT_EQ(r.code, 0) << r.err;
    auto j = Json::parse(r.out);
    EXPECT_EQ(j["method"], "contract");
    EXPECT_TRUE(j.contains("notice"));
    EXPECT_NE(r.err.find("notice"), std::string::npos);
    EXPECT_NEAR(j["value"]["value"].get<double>(), 307.0 / 1500.0, 1e-10);
}

TEST(Cli, ExitCodes) {
    EXPECT_EQ(run({}).code, kExitUsage);
    EXPECT_EQ(run({"frobnicate"}).code, kExitUsage);
    EXPECT_EQ(run({"eval", graph("theta.sg"), "--method", "magic"}).code, kExitUsage);
    EXPECT_EQ(run({"eval", graph("theta.sg"), "--samples", "0", "--method", "mc"}).code, kExitUsage);
    EXPECT_EQ(run({"--help"}).code, 0);

    auto missing = run({"eval", "/nonexistent/graph.sg"});
    EXPECT_EQ(missing.code, kExitInput);
    EXPECT_EQ(Json::parse(missing.err)["error"], "input");

    auto bad = write_temp("bad_syntax.sg", "v a\ne a b 2\n");
    auto p = run({"check", bad});
    EXPECT_EQ(p.code, kExitInput);
    auto e = Json::parse(p.err);
    EXPECT_EQ(e["error"], "parse");
    EXPECT_EQ(e["line"], 2);
    EXPECT_EQ(e["column"], 5);

    ::setenv("SPINNET_DIM_CAP", "10", 1);
    auto cap = run({"eval", graph("k4_2.sg"), "--method", "contract"});
    ::unsetenv("SPINNET_DIM_CAP");
    EXPECT_EQ(cap.code, kExitComputation);
    EXPECT_EQ(Json::parse(cap.err)["error"], "dimension_cap");
}

TEST(Cli, BinaryEndToEnd) {
    std::string out_path = ::testing::TempDir() + "spinnet_out.json";
    std::string cmd = std::string(SPINNET_CLI_PATH) + " eval " + graph("theta.sg") + " > " + out_path;
    int status = std::system(cmd.c_str());
    EXPECT_EQ(status, 0);
    std::ifstream in(out_path);
    auto j = Json::parse(in);
    EXPECT_EQ(j["value"]["num"], "1");
    std::string bad = std::string(SPINNET_CLI_PATH) + " check /nonexistent 2> /dev/null";
    int code = std::system(bad.c_str());
    EXPECT_EQ(WEXITSTATUS(code), 2);
}
