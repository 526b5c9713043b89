#include <gtest/gtest.h>

#include <filesystem>
#include <fstream>
#include <sstream>
#include <string>
#include <vector>

#include "cli.hpp"
#include "json.hpp"

namespace fs = std::filesystem;
using nlohmann::json;

namespace {

class Cli : public ::testing::Test {
 protected:
  void SetUp() override {
    dir_ = fs::temp_directory_path() /
           ("vsrcert_cli_" + std::string(::testing::UnitTest::GetInstance()->current_test_info()->name()));
    fs::remove_all(dir_);
    fs::create_directories(dir_);
  }
  void TearDown() override { fs::remove_all(dir_); }

  int run(std::vector<std::string> args) {
    out_.str("");
    err_.str("");
    return vsr::cli::run(args, out_, err_);
  }
  std::string path(const std::string& name) const { return (dir_ / name).string(); }
  static std::string slurp(const fs::path& p) {
    std::ifstream is(p, std::ios::binary);
    std::stringstream ss;
    ss << is.rdbuf();
    return ss.str();
  }
  static json load(const fs::path& p) { return json::parse(slurp(p)); }
  void write(const std::string& name, const json& j) { std::ofstream(path(name)) << j.dump(2); }

  // Every file except the config echo, which records workers and out-dir.
  static void expect_same_outputs(const fs::path& a, const fs::path& b) {
    std::size_t n = 0;
    for (const auto& entry : fs::directory_iterator(a)) {
      const auto name = entry.path().filename().string();
      if (name.ends_with(".config.json")) continue;
      ASSERT_TRUE(fs::exists(b / name)) << name;
      EXPECT_EQ(slurp(entry.path()), slurp(b / name)) << name;
      ++n;
    }
    EXPECT_GT(n, 0u);
  }

  fs::path dir_;
  std::ostringstream out_, err_;
};

const std::vector<std::string> kSmallExample{"--x-points", "201", "--e-points", "11",
                                             "--t-points", "16",  "--ensemble", "50",
                                             "--K-steps",  "50"};

std::vector<std::string> concat(std::vector<std::string> a, const std::vector<std::string>& b) {
  a.insert(a.end(), b.begin(), b.end());
  return a;
}

}  // namespace

TEST_F(Cli, ExampleCertifies) {
  const int code = run(concat({"example", "--M", "1", "--K", "0.025", "--seed", "1", "--out-dir",
                               path("ex")},
                              kSmallExample));
  ASSERT_EQ(code, 0) << err_.str();
  const auto rep = load(path("ex/example.json"));
  EXPECT_EQ(rep["certification"]["verdict"], "CertifiedOnGrid");
  EXPECT_GE(rep["certification"]["min_margin"].get<double>(), 0.0);
  EXPECT_NEAR(rep["ttilde"].get<double>(), 0.067783, 1e-6);
  EXPECT_TRUE(fs::exists(path("ex/coefficients.csv")));
  EXPECT_EQ(load(path("ex/example.config.json"))["seed"], 1);
}

TEST_F(Cli, ExitCodes) {
  EXPECT_EQ(run({"certify", "--model", "identity", "--V", "pow(s,2)", "--alpha3", "pow(s,2)",
                 "--out-dir", path("id")}),
            1);
  EXPECT_EQ(load(path("id/certificate.json"))["decrease"]["verdict"], "ViolatedAt");
  EXPECT_EQ(run({"frobnicate"}), 64);
  EXPECT_EQ(run({}), 64);
  EXPECT_EQ(run({"certify", "--M", "abc", "--out-dir", path("bad")}), 64);
  EXPECT_EQ(run({"certify", "--mode", "xyz", "--out-dir", path("bad")}), 64);
  EXPECT_EQ(run({"certify", "--model", "euler:x1+", "--out-dir", path("bad")}), 64);
  EXPECT_EQ(run({"structural", "--model", "drift", "--out-dir", path("drift")}), 1);
  EXPECT_EQ(run({"certify", "--help"}), 0);
  EXPECT_NE(out_.str().find("--T-bound"), std::string::npos);
  EXPECT_FALSE(err_.str().empty() && out_.str().empty());
}

TEST_F(Cli, ConfigErrors) {
  write("unknown.json", {{"command", "certify"}, {"no_such_key", 1}});
  EXPECT_EQ(run({"certify", "--config", path("unknown.json"), "--out-dir", path("o")}), 64);
  write("wrong.json", {{"command", "simulate"}});
  EXPECT_EQ(run({"certify", "--config", path("wrong.json"), "--out-dir", path("o")}), 64);
  EXPECT_EQ(run({"certify", "--config", path("missing.json"), "--out-dir", path("o")}), 64);
  EXPECT_EQ(run({"falsify", "--out-dir", path("o"), "--seed", "1"}), 64);
}

TEST_F(Cli, FlagsOverrideConfig) {
  write("cfg.json", {{"command", "certify"}, {"M", 0.5}, {"T-bound", 0.02}});
  ASSERT_EQ(run({"certify", "--config", path("cfg.json"), "--M", "0.75", "--alpha3",
                 "pow(s,2)", "--out-dir", path("o")}),
            0)
      << err_.str();
  const auto echo = load(path("o/certify.config.json"));
  EXPECT_EQ(echo["M"], 0.75);
  EXPECT_EQ(echo["T-bound"], 0.02);
  EXPECT_EQ(echo["command"], "certify");
}

TEST_F(Cli, CertifyExampleInputToState) {
  ASSERT_EQ(run({"certify", "--mode", "siss", "--alpha3", "3*pow(s,4)+pow(s,2)", "--rho",
                 "s/0.025", "--E", "0.025", "--T-bound", "0.0677", "--out-dir", path("c")}),
            0)
      << err_.str();
  const auto cert = load(path("c/certificate.json"));
  EXPECT_EQ(cert["mode"], "siss");
  EXPECT_EQ(cert["decrease"]["verdict"], "CertifiedOnGrid");
  EXPECT_EQ(cert["sandwich"]["verdict"], "CertifiedOnGrid");
  EXPECT_TRUE(cert["decrease"].contains("witness"));

  ASSERT_EQ(run({"bounds", "--from-certificate", path("c/certificate.json"), "--ensemble", "50",
                 "--K-steps", "50", "--seed", "2", "--out-dir", path("b")}),
            0)
      << err_.str();
  const auto b = load(path("b/bounds.json"));
  EXPECT_EQ(b["envelope"]["violation_count"], 0);
  for (const char* f : {"beta_M0.csv", "sigma.csv", "zeta.csv", "eta.csv", "gamma.csv"})
    EXPECT_EQ(slurp(path(std::string("b/") + f)).substr(0, 10), "arg,value\n") << f;
}

TEST_F(Cli, EchoReproducesRun) {
  ASSERT_EQ(run({"simulate", "--errors-spec", "ball", "--E", "0.02", "--K-steps", "40",
                 "--out-dir", path("a")}),
            0)
      << err_.str();
  const auto echo = load(path("a/simulate.config.json"));
  ASSERT_TRUE(echo["seed"].is_number_unsigned());
  ASSERT_EQ(run({"simulate", "--config", path("a/simulate.config.json"), "--out-dir", path("b")}),
            0)
      << err_.str();
  expect_same_outputs(path("a"), path("b"));
  auto again = load(path("b/simulate.config.json"));
  again["out-dir"] = echo["out-dir"];
  EXPECT_EQ(again, echo);
}

TEST_F(Cli, WorkersByteIdentical) {
  write("claim.json", {{"type", "envelope"},
                       {"model", "cubic_example"},
                       {"T_bound", 0.5},
                       {"beta", "s*exp(-t)"},
                       {"M0", 1.0}});
  const std::vector<std::vector<std::string>> runs{
      concat({"example", "--seed", "3"}, kSmallExample),
      {"simulate", "--seed", "3", "--errors-spec", "sphere", "--E", "0.01"},
      {"probe", "--seed", "3", "--scenarios", "20", "--K-steps", "40"},
      {"falsify", "--seed", "3", "--claim", path("claim.json"), "--budget", "30",
       "--iterations", "10", "--K-steps", "40"},
      {"structural", "--grid-points", "11", "--t-points", "4"},
  };
  for (const auto& r : runs) {
    for (const char* w : {"1", "8"}) {
      const int code = run(concat(r, {"--workers", w, "--out-dir", path(r[0] + "_" + w)}));
      ASSERT_TRUE(code == 0 || code == 1) << r[0] << ": " << err_.str();
    }
    expect_same_outputs(path(r[0] + "_1"), path(r[0] + "_8"));
  }
}

TEST_F(Cli, FalsifyWitnessReplays) {
  const json claim{{"type", "envelope"},
                   {"model", "unstable"},
                   {"T_bound", 0.1},
                   {"beta", "2*s*exp(-t)"}};
  write("claim.json", claim);
  const std::string before = slurp(path("claim.json"));
  ASSERT_EQ(run({"falsify", "--claim", path("claim.json"), "--budget", "1", "--iterations", "0",
                 "--seed", "5", "--out-dir", path("f")}),
            1)
      << err_.str();
  EXPECT_EQ(slurp(path("claim.json")), before);
  const auto w = load(path("f/witness.json"));
  EXPECT_EQ(w["restart"], 0);
  EXPECT_TRUE(w.contains("x0"));
  EXPECT_TRUE(w.contains("periods"));
  EXPECT_TRUE(w.contains("errors"));
  EXPECT_TRUE(w["violation"].contains("k"));
  EXPECT_EQ(run({"simulate", "--witness", path("f/witness.json"), "--out-dir", path("s")}), 1)
      << err_.str();
  EXPECT_TRUE(fs::exists(path("s/trajectory.csv")));
}

TEST_F(Cli, FalsifyDecreaseClaim) {
  write("claim.json", {{"type", "decrease"},
                       {"model", "cubic_example"},
                       {"mode", "siss"},
                       {"V", "pow(s,2)"},
                       {"alpha1", "pow(s,2)"},
                       {"alpha2", "pow(s,2)"},
                       {"alpha3", "3*pow(s,4)+pow(s,2)"},
                       {"rho", "s/0.025"},
                       {"M", 1.0},
                       {"bound", 0.025},
                       {"T_bound", 0.0677}});
  EXPECT_EQ(run({"falsify", "--claim", path("claim.json"), "--budget", "100", "--iterations",
                 "20", "--seed", "1", "--out-dir", path("f")}),
            0)
      << err_.str();
  EXPECT_FALSE(load(path("f/falsify.json"))["found"].get<bool>());
}
