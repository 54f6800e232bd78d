#include <gtest/gtest.h>

#include <filesystem>
#include <fstream>
#include <sstream>
#include <string>
#include <vector>

#include "json.hpp"
#include "lmtest/commands.hpp"

namespace fs = std::filesystem;
using nlohmann::json;

namespace {

class Cli : public ::testing::Test {
 protected:
  void SetUp() override {
    dir_ = fs::temp_directory_path() /
           ("lmtest_cli_" + std::string(::testing::UnitTest::GetInstance()->current_test_info()->name()));
    fs::remove_all(dir_);
    fs::create_directories(dir_);
  }
  void TearDown() override { fs::remove_all(dir_); }

  fs::path write(const std::string& name, const std::string& text) {
    const auto p = dir_ / name;
    std::ofstream(p) << text;
    return p;
  }

  int run(std::vector<std::string> args) {
    args.insert(args.begin(), "lmtest");
    std::vector<const char*> argv;
    for (const auto& a : args) argv.push_back(a.c_str());
    out_.str("");
    err_.str("");
    return lmtest::cli::run(int(argv.size()), argv.data(), out_, err_);
  }

  static std::string slurp(const fs::path& p) {
    std::ifstream f(p);
    return {std::istreambuf_iterator<char>(f), {}};
  }

  fs::path dir_;
  std::ostringstream out_;
  std::ostringstream err_;
};

std::string circle_config() {
  std::string mu = "[";
  for (int i = 0; i < 100; ++i) mu += (i ? ", 100" : "100");
  return "family: explicit\nmu: " + mu + "]\nsigma: 0.1\nrho: 0.25\n";
}

}  // namespace

TEST_F(Cli, SolveCircle) {
  const auto cfg = write("c.yaml", circle_config());
  ASSERT_EQ(run({"solve", "--config", cfg.string()}), 0) << err_.str();
  const auto j = json::parse(out_.str());
  EXPECT_NEAR(j["eps_u_sq"].get<double>(), 1.6, 1.6e-9);
  EXPECT_EQ(j["k_u"].get<int>(), 100);
  for (const char* key : {"eps_l", "k_l", "theorem2_radius", "eps_B"}) EXPECT_TRUE(j.contains(key));

  ASSERT_EQ(run({"solve", "--config", cfg.string(), "--format", "csv"}), 0);
  EXPECT_NE(out_.str().find("eps_u_sq,1.60000000000000"), std::string::npos) << out_.str();
}

TEST_F(Cli, SolveExtremalIncludesTStar) {
  const auto cfg = write("x.yaml",
                         "family: poly\nd: 2000\nalpha: 1\nsigma: 0.01\n"
                         "theta_star: {kind: boundary_offset, s: 1, w: 0.05}\n");
  ASSERT_EQ(run({"solve", "--config", cfg.string()}), 0) << err_.str();
  const auto j = json::parse(out_.str());
  ASSERT_TRUE(j["t_star"].is_object());
  EXPECT_LE(j["t_star"]["t_l"].get<double>(), j["t_star"]["t_u"].get<double>());
  EXPECT_NEAR(j["predicted_exponent"].get<double>(), 8.0 / 9.0, 1e-15);
}

TEST_F(Cli, ConfigErrorsExitTwo) {
  EXPECT_EQ(run({"solve", "--config", write("bad.yaml", "d: [\n").string()}), 2);
  EXPECT_NE(err_.str().find("YAML"), std::string::npos);
  EXPECT_EQ(run({"solve", "--config", (dir_ / "missing.yaml").string()}), 2);
  EXPECT_EQ(run({"solve", "--config", write("r.yaml", "family: poly\nd: 5\nalpha: 1\n"
                                                       "sigma: 0.1\nrho: 0.9\n").string()}),
            2);
  EXPECT_NE(err_.str().find("rho"), std::string::npos);
  EXPECT_EQ(run({"solve"}), 2);
  EXPECT_EQ(run({"frobnicate"}), 2);
  EXPECT_EQ(run({"solve", "--config", write("ns.yaml", "family: poly\nd: 5\nalpha: 1\n").string()}),
            2);
  EXPECT_NE(err_.str().find("sigma"), std::string::npos);
}

TEST_F(Cli, SolverFailureExitsThree) {
  const auto cfg = write("f.yaml", "family: explicit\nmu: [1e-6]\nsigma: 100\n");
  EXPECT_EQ(run({"solve", "--config", cfg.string()}), 3);
  EXPECT_NE(err_.str().find("residual"), std::string::npos) << err_.str();
}

TEST_F(Cli, McDefaultEpsWithinRho) {
  const auto cfg = write("m.yaml", "family: poly\nd: 200\nalpha: 1\nsigma: 0.05\nrho: 0.25\n");
  ASSERT_EQ(run({"mc", "--config", cfg.string(), "--trials", "4000", "--seed", "3"}), 0)
      << err_.str();
  const auto j = json::parse(out_.str());
  const auto& e = j["errors"];
  const double bound = 0.25 + 3.0 * (e["stderr1"].get<double>() + e["stderr2"].get<double>());
  EXPECT_LE(j["uniform_error"].get<double>(), bound);
  EXPECT_EQ(e["trials"].get<int>(), 4000);
  EXPECT_GE(j["alternative"]["c0"].get<double>(), j["alternative"]["c0_floor"].get<double>() - 1e-12);

  EXPECT_EQ(run({"mc", "--config", cfg.string(), "--trials", "0"}), 2);
}

TEST_F(Cli, McCertificate) {
  const auto cfg = write("m.yaml", "family: poly\nd: 200\nalpha: 1\nsigma: 0.05\nrho: 0.25\n");
  ASSERT_EQ(run({"mc", "--config", cfg.string(), "--certificate"}), 0) << err_.str();
  const auto j = json::parse(out_.str());
  EXPECT_GE(j["hypercube"]["bound"].get<double>(), 0.5);
  EXPECT_GE(j["empirical"]["bound"].get<double>(), 0.5);
  EXPECT_NEAR(j["eps"].get<double>(), j["theorem2_radius"].get<double>() / 2.0, 1e-18);
}

TEST_F(Cli, SweepZeroAndExtremal) {
  const auto zero = write("z.yaml", "family: poly\nd: 100000\nalpha: 1\n");
  const auto out = dir_ / "z.csv";
  ASSERT_EQ(run({"sweep", "--config", zero.string(), "--sweep-lo", "1e-3", "--sweep-hi", "3e-2",
                 "--sweep-points", "10", "--format", "csv", "--out", out.string()}),
            0)
      << err_.str();
  const auto csv = slurp(out);
  EXPECT_EQ(csv.rfind("sigma,sigma_sq,eps_u,eps_u_sq,eps_l,k_u,k_l,residual\n", 0), 0u) << csv;
  auto summary = out;
  summary += ".summary.json";
  const auto s = json::parse(slurp(summary));
  EXPECT_DOUBLE_EQ(s["predicted_exponent"].get<double>(), 0.8);
  EXPECT_NEAR(s["fitted_exponent"].get<double>(), 0.8, 0.05);

  const auto ext = write("e.yaml", "family: poly\nd: 100000\nalpha: 1\n"
                                   "theta_star: {kind: axis, s: 1, value: 0.95}\n"
                                   "sigma_grid: [0.001, 0.0015, 0.0023, 0.0035, 0.0053, 0.008, "
                                   "0.012, 0.018, 0.027, 0.04]\n");
  ASSERT_EQ(run({"sweep", "--config", ext.string()}), 0) << err_.str();
  const auto j = json::parse(out_.str());
  EXPECT_EQ(j["mode"], "t_star");
  EXPECT_NEAR(j["predicted_exponent"].get<double>(), 8.0 / 9.0, 1e-15);
  EXPECT_NEAR(j["fitted_exponent"].get<double>(), 8.0 / 9.0, 0.05);
  EXPECT_EQ(j["rows"].size(), 10u);

  EXPECT_EQ(run({"sweep", "--config", zero.string(), "--sweep-lo", "1e-3", "--sweep-hi", "3e-2",
                 "--sweep-points", "2"}),
            2);
  EXPECT_EQ(run({"sweep", "--config", zero.string(), "--sweep-lo", "1e-3"}), 2);
}

TEST_F(Cli, WidthsTable) {
  const auto cfg = write("w.yaml", "family: poly\nd: 6\nalpha: 1\neps: 0.3\n");
  ASSERT_EQ(run({"widths", "--config", cfg.string()}), 0) << err_.str();
  const auto j = json::parse(out_.str());
  ASSERT_EQ(j["rows"].size(), 7u);
  for (const auto& r : j["rows"]) EXPECT_EQ(r["lower"].get<double>(), r["upper"].get<double>());
  EXPECT_EQ(j["rows"][6]["upper"].get<double>(), 0.0);

  ASSERT_EQ(run({"widths", "--config", cfg.string(), "--brute", "--n-dirs", "500", "--k-lo", "1",
                 "--k-hi", "3", "--format", "csv"}),
            0);
  EXPECT_EQ(out_.str().rfind("k,eps,lower,upper,method,brute\n", 0), 0u) << out_.str();

  const auto big = write("b.yaml", "family: poly\nd: 60\nalpha: 1\neps: 0.3\n");
  EXPECT_EQ(run({"widths", "--config", big.string(), "--brute", "--k-lo", "20", "--k-hi", "20"}), 3);
  EXPECT_EQ(run({"widths", "--config", cfg.string(), "--k-lo", "5", "--k-hi", "9"}), 2);
}

TEST_F(Cli, RerunIsByteIdentical) {
  const auto cfg = write("m.yaml", "family: poly\nd: 100\nalpha: 1\nsigma: 0.05\nseed: 8\n");
  const auto a = dir_ / "a.json";
  const auto b = dir_ / "b.json";
  ASSERT_EQ(run({"mc", "--config", cfg.string(), "--trials", "2000", "--out", a.string()}), 0);
  ASSERT_EQ(run({"mc", "--config", cfg.string(), "--trials", "2000", "--out", b.string()}), 0);
  EXPECT_EQ(slurp(a), slurp(b));
  EXPECT_FALSE(slurp(a).empty());
}
