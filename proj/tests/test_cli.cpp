#include <gtest/gtest.h>

#include <fstream>
#include <sstream>
#include <string>
#include <vector>

#include "cli.hpp"

namespace {

struct Result {
  int status;
  std::string out, err;
};

Result run(const std::vector<std::string>& args) {
  std::ostringstream out, err;
  int status = mts::cli::run(args, out, err);
  return {status, out.str(), err.str()};
}

std::string tmp(const std::string& name) { return std::string(MTS_TEST_TMPDIR) + "/cli_" + name; }

std::string slurp(const std::string& path) {
  std::ifstream in(path);
  std::ostringstream s;
  s << in.rdbuf();
  return s.str();
}

bool has(const std::string& text, const std::string& needle) { return text.find(needle) != std::string::npos; }

}  // namespace

TEST(Cli, StructureListsOptimalRatios) {
  Result r = run({"structure", "--n", "3", "--t", "2,2,2"});
  ASSERT_EQ(r.status, 0) << r.err;
  EXPECT_TRUE(has(r.out, "weak sigma: 3/2")) << r.out;
  Result rec = run({"--format", "records", "structure", "--n", "3", "--t", "2,2,2"});
  ASSERT_EQ(rec.status, 0);
  EXPECT_TRUE(has(rec.out, "optimal ratio=sigma security=weak value=3/2")) << rec.out;
  EXPECT_TRUE(has(rec.out, "subarray k=1 t=2 m=3"));
}

TEST(Cli, BuildThenRatios) {
  std::string path = tmp("weak_sigma.txt");
  Result b = run({"build", "--n", "3", "--t", "2,2,2", "--ratio", "sigma", "--security", "weak", "--out", path});
  ASSERT_EQ(b.status, 0) << b.err;
  Result r = run({"--format", "records", "ratios", path});
  ASSERT_EQ(r.status, 0) << r.err;
  EXPECT_TRUE(has(r.out, "ratio name=sigma value=3/2")) << r.out;
  Result v = run({"verify", path});
  EXPECT_EQ(v.status, 0) << v.out;
  EXPECT_TRUE(has(v.out, "valid"));
  Result a = run({"audit", path});
  EXPECT_EQ(a.status, 0) << a.out;
}

TEST(Cli, LpLowerBound) {
  Result r = run({"--format", "records", "lp", "--n", "3", "--t", "2,2", "--ratio", "sigma-avg", "--security", "weak"});
  ASSERT_EQ(r.status, 0) << r.err;
  EXPECT_EQ(r.out, "lp ratio=sigma-avg security=weak value=1/1\n");
  Result d = run({"lp", "--n", "2", "--t", "2", "--ratio", "tau", "--security", "strong", "--dump"});
  ASSERT_EQ(d.status, 0) << d.err;
  EXPECT_TRUE(has(d.out, "elemental")) << d.out;
  EXPECT_TRUE(has(d.out, "lower bound: 1/1")) << d.out;
}

TEST(Cli, WeakOnlySchemeFailsStrongChecks) {
  std::string path = tmp("weak_pair.txt");
  ASSERT_EQ(run({"build", "--n", "3", "--t", "2,2", "--ratio", "sigma", "--security", "weak", "--out", path}).status, 0);
  EXPECT_EQ(run({"verify", path}).status, 0);
  Result strong = run({"verify", path, "--security", "strong"});
  EXPECT_EQ(strong.status, 1);
  EXPECT_TRUE(has(strong.out, "INVALID"));
  EXPECT_EQ(run({"census", path, "--participants", "1", "--target", "S1.1"}).status, 0);
  Result leak = run({"census", path, "--participants", "1", "--target", "S1.1,S1.2"});
  EXPECT_EQ(leak.status, 1);
  EXPECT_TRUE(has(leak.out, "LEAK"));
}

TEST(Cli, DealAndReconstruct) {
  std::string scheme = tmp("two_level.txt"), shares = tmp("two_level.shares");
  ASSERT_EQ(run({"build", "--n", "3", "--t", "3,2", "--ratio", "sigma", "--security", "strong", "--out", scheme}).status,
            0);
  Result d = run({"deal", scheme, "--secrets", "4;2", "--seed", "11", "--out", shares});
  ASSERT_EQ(d.status, 0) << d.err;
  Result all = run({"--format", "records", "reconstruct", scheme, shares});
  ASSERT_EQ(all.status, 0) << all.err;
  EXPECT_EQ(all.out, "secret var=S1.1 value=4\nsecret var=S2.1 value=2\n");
  Result low = run({"reconstruct", scheme, shares, "--k", "2", "--participants", "1,3"});
  ASSERT_EQ(low.status, 0) << low.err;
  EXPECT_EQ(low.out, "S2.1 = (2)\n");
  Result few = run({"reconstruct", scheme, shares, "--participants", "2"});
  EXPECT_EQ(few.status, 2);
  EXPECT_TRUE(has(few.err, "unqualified set")) << few.err;
}

TEST(Cli, OutputIsDeterministic) {
  std::string a = tmp("det_a.txt"), b = tmp("det_b.txt");
  for (const std::string& p : {a, b})
    ASSERT_EQ(run({"build", "--n", "4", "--t", "3,3,2", "--ratio", "tau-avg", "--security", "weak", "--out", p}).status, 0);
  EXPECT_EQ(slurp(a), slurp(b));
  EXPECT_FALSE(slurp(a).empty());
  Result d1 = run({"deal", a, "--secrets", "1;2;", "--seed", "5"});
  Result d2 = run({"deal", a, "--secrets", "1;2;", "--seed", "5"});
  ASSERT_EQ(d1.status, 0) << d1.err;
  EXPECT_EQ(d1.out, d2.out);
  EXPECT_EQ(run({"--format", "records", "audit", a}).out, run({"--format", "records", "audit", a}).out);
}

TEST(Cli, Errors) {
  Result missing = run({"verify", tmp("does_not_exist.txt")});
  EXPECT_EQ(missing.status, 2);
  EXPECT_TRUE(has(missing.err, "error:")) << missing.err;
  EXPECT_EQ(run({}).status, 2);
  EXPECT_EQ(run({"lp", "--n", "3", "--t", "2,2", "--ratio", "rho", "--security", "weak"}).status, 2);
  EXPECT_EQ(run({"structure", "--n", "3", "--t", "2,3"}).status, 2);
  EXPECT_EQ(run({"--format", "xml", "structure", "--n", "3", "--t", "2"}).status, 2);
  std::string scheme = tmp("err.txt");
  ASSERT_EQ(run({"build", "--n", "2", "--t", "2", "--ratio", "sigma", "--security", "strong", "--out", scheme}).status, 0);
  EXPECT_EQ(run({"deal", scheme, "--secrets", "1;2"}).status, 2);
  EXPECT_EQ(run({"census", scheme, "--participants", "3", "--target", "S1.1"}).status, 2);
  EXPECT_EQ(run({"census", scheme, "--participants", "1", "--target", "P1"}).status, 2);
  EXPECT_EQ(run({"--help"}).status, 0);
}
