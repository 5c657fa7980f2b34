#include <gtest/gtest.h>

#include <cstdlib>
#include <filesystem>
#include <sstream>

#include "mrsl/cli.hpp"
#include "mrsl/io.hpp"

using namespace mrsl;
namespace fs = std::filesystem;

namespace {

struct Outcome {
  int code;
  std::string out, err;
};

Outcome run(const std::vector<std::string>& args, cli::DispatchOptions opts = {false, false}) {
  std::ostringstream out, err;
  const int code = cli::dispatch(args, out, err, opts);
  return {code, out.str(), err.str()};
}

class CliTest : public ::testing::Test {
 protected:
  void SetUp() override {
    dir_ = fs::temp_directory_path() /
           ("mrsl_cli_" + std::string(::testing::UnitTest::GetInstance()->current_test_info()->name()));
    fs::remove_all(dir_);
    fs::create_directories(dir_);
  }
  void TearDown() override { fs::remove_all(dir_); }
  std::string path(const std::string& name) const { return (dir_ / name).string(); }

  fs::path dir_;
};

std::string header_field(const std::string& file, const std::string& key) {
  const std::string text = read_file(file);
  const std::string first = text.substr(0, text.find('\n'));
  const auto at = first.find(key + "=");
  if (at == std::string::npos) return "";
  const auto end = first.find(' ', at);
  return first.substr(at + key.size() + 1, end == std::string::npos ? end : end - at - key.size() - 1);
}

}  // namespace

TEST_F(CliTest, UsageAndExitCodes) {
  const Outcome none = run({});
  EXPECT_EQ(none.code, cli::kExitUsage);
  EXPECT_NE(none.err.find("generate"), std::string::npos);
  EXPECT_EQ(run({"frobnicate"}).code, cli::kExitUsage);
  EXPECT_EQ(run({"params", "--bogus", "1"}).code, cli::kExitUsage);
  EXPECT_EQ(run({"cluster", "--k", "2"}).code, cli::kExitUsage);
  EXPECT_EQ(run({"params", "--epsilon", "abc"}).code, cli::kExitUsage);
  EXPECT_EQ(run({"--help"}).code, cli::kExitOk);
}

TEST_F(CliTest, ParamsExample) {
  const Outcome r = run({"params", "--sigma", "16", "--epsilon", "0.72", "--tau", "100", "--d", "1",
                     "--regime", "noiseless"});
  ASSERT_EQ(r.code, cli::kExitOk) << r.err;
  std::istringstream is(r.out);
  std::string header, row;
  std::getline(is, header);
  std::getline(is, row);
  EXPECT_EQ(header.rfind("regime,n,rho,branch", 0), 0u);
  const auto cols = split(row, ',');
  ASSERT_GE(cols.size(), 4u);
  EXPECT_EQ(cols[0], "noiseless");
  EXPECT_NEAR(parse_double(cols[2]), 1.0, 1e-12);
  EXPECT_EQ(cols[3], "epsilon");
}

TEST_F(CliTest, ClusterFourPoints) {
  write_file(path("pts.csv"), "0\n0.1\n5\n5.1\n");
  const Outcome r = run({"cluster", "--in", path("pts.csv"), "--k", "2", "--R", "1", "--out",
                     path("tree.txt")});
  ASSERT_EQ(r.code, cli::kExitOk) << r.err;
  std::istringstream is(read_file(path("tree.txt")));
  const Dendrogram dg = read_dendrogram(is);
  EXPECT_EQ(dg.components_at(1e9), (Partition{{0, 1}, {2, 3}}));
  EXPECT_TRUE(fs::exists(path("tree.txt.manifest")));
}

TEST_F(CliTest, PointsRoundTrip) {
  const Outcome g = run({"generate", "--spec", "mixture", "--D", "5", "--noise", "additive", "--theta",
                     "0.01", "--n", "300", "--seed", "9", "--out", path("p.csv")});
  ASSERT_EQ(g.code, cli::kExitOk) << g.err;
  const std::string text = read_file(path("p.csv"));
  std::istringstream is(text);
  const LabeledSample s = read_points(is);
  EXPECT_EQ(s.size(), 300u);
  ASSERT_TRUE(s.latent.has_value());
  std::ostringstream os;
  write_points(os, s);
  EXPECT_EQ(os.str(), text);
  std::istringstream again(os.str());
  const LabeledSample t = read_points(again);
  EXPECT_EQ(t.observed, s.observed);
  EXPECT_EQ(*t.latent, *s.latent);
  EXPECT_EQ(t.origin, s.origin);
}

TEST_F(CliTest, Precedence) {
  write_file(path("cfg.ini"), "[generate]\nn = 50\nseed = 3\n");
  const std::string out = path("p.csv");
  const cli::DispatchOptions all{true, true};
  ::unsetenv("MRSL_N");
  ASSERT_EQ(run({"generate", "--config", path("cfg.ini"), "--out", out}, all).code, 0);
  EXPECT_EQ(header_field(out, "n"), "50");
  ::setenv("MRSL_N", "60", 1);
  ASSERT_EQ(run({"generate", "--config", path("cfg.ini"), "--out", out}, all).code, 0);
  EXPECT_EQ(header_field(out, "n"), "60");
  ASSERT_EQ(run({"generate", "--config", path("cfg.ini"), "--n", "70", "--out", out}, all).code, 0);
  EXPECT_EQ(header_field(out, "n"), "70");
  ::unsetenv("MRSL_N");
  write_file(path("bad.ini"), "[generate]\nwhatever = 1\n");
  EXPECT_EQ(run({"generate", "--config", path("bad.ini"), "--out", out}, all).code,
            cli::kExitUsage);
}

TEST_F(CliTest, ManifestRerunIsByteIdentical) {
  ASSERT_EQ(run({"generate", "--spec", "lower_bound", "--tau", "0.2", "--epsilon", "0.4", "--n",
                 "800", "--seed", "5", "--out", path("p.csv")})
                .code,
            0);
  ASSERT_EQ(run({"cluster", "--in", path("p.csv"), "--k", "10", "--out", path("t.txt")}).code, 0);
  ASSERT_EQ(run({"evaluate", "--spec", "lower_bound", "--tau", "0.2", "--epsilon", "0.4", "--in",
                 path("p.csv"), "--dendrogram", path("t.txt"), "--scan", "--out", path("e.csv")})
                .code,
            0);
  ASSERT_EQ(run({"kde", "--spec", "lower_bound", "--tau", "0.2", "--epsilon", "0.4", "--in",
                 path("p.csv"), "--h", "0.05", "--probes", "samples", "--out", path("k.csv")})
                .code,
            0);
  for (const std::string name : {"p.csv", "t.txt", "e.csv", "k.csv"}) {
    const std::string before = read_file(path(name));
    const std::string manifest = read_file(path(name) + ".manifest");
    EXPECT_NE(manifest.find("# mrsl-manifest v1"), std::string::npos);
    EXPECT_NE(manifest.find("seed_scheme="), std::string::npos);
    fs::remove(path(name));
    const Outcome r = run({"rerun", path(name) + ".manifest"});
    ASSERT_EQ(r.code, 0) << name << r.err;
    EXPECT_EQ(read_file(path(name)), before) << name;
  }
}

TEST_F(CliTest, Volumes) {
  const Outcome r = run({"volumes", "--d", "2", "--tau", "1", "--r", "0.1,0.5"});
  ASSERT_EQ(r.code, 0) << r.err;
  std::istringstream is(r.out);
  std::string header, a, b;
  std::getline(is, header);
  std::getline(is, a);
  std::getline(is, b);
  EXPECT_EQ(header, "d,tau,r,lower,exact,series,upper");
  EXPECT_NEAR(parse_double(split(a, ',')[4]), M_PI * 0.01, 1e-14);
  EXPECT_EQ(split(b, ',')[3], "nan");
}

TEST_F(CliTest, ExperimentGrid) {
  write_file(path("grid.ini"),
             "trials = 3\nseed = 11\ninstance = mixture\nclusters = 2\nbump_weight = 0.9\n"
             "n = 1500\nk = 5\nrule = proportional:4\nscan = 1\ngate = 0\n[cell]\nD = 3,4\n");
  const Outcome r = run({"experiment", "--grid", path("grid.ini"), "--out-trials", path("t.csv"),
                     "--out-aggregate", path("a.csv")});
  ASSERT_EQ(r.code, 0) << r.err;
  const auto lines = split(read_file(path("a.csv")), '\n');
  EXPECT_EQ(lines[0].rfind("n,d,D,epsilon,regime,successes,trials,p_hat,se", 0), 0u);
  EXPECT_GE(lines.size(), 3u);
  write_file(path("fail.ini"), std::string(read_file(path("grid.ini"))) + "accept_min = 1.5\n");
  EXPECT_EQ(run({"experiment", "--grid", path("fail.ini"), "--out-trials", path("t2.csv"),
                 "--out-aggregate", path("a2.csv")})
                .code,
            cli::kExitFailure);
}
