#include <gtest/gtest.h>

#include <sys/wait.h>

#include <cstdio>
#include <fstream>
#include <sstream>
#include <string>

namespace {

struct Run {
  int code;
  std::string out;
};

Run zml_run(const std::string& args) {
  const std::string cmd = std::string(ZML_CLI_PATH) + " " + args + " 2>/dev/null";
  Run r{-1, ""};
  FILE* p = popen(cmd.c_str(), "r");
  if (!p) return r;
  char buf[4096];
  while (std::fgets(buf, sizeof buf, p)) r.out += buf;
  const int status = pclose(p);
  r.code = WIFEXITED(status) ? WEXITSTATUS(status) : -1;
  return r;
}

// Output without '#' header lines.
std::string body(const std::string& text) {
  std::istringstream in(text);
  std::string line, out;
  while (std::getline(in, line)) {
    if (line.empty() || line[0] != '#') out += line + "\n";
  }
  return out;
}

std::string tmp(const std::string& name) { return ::testing::TempDir() + "zml_cli_" + name; }

std::string slurp(const std::string& path) {
  std::ifstream in(path);
  std::stringstream ss;
  ss << in.rdbuf();
  return ss.str();
}

}  // namespace

TEST(Cli, ExitCodes) {
  EXPECT_EQ(zml_run("").code, 1);
  EXPECT_EQ(zml_run("zeta").code, 1);
  EXPECT_EQ(zml_run("zeta --t 5 --bogus 1").code, 1);
  EXPECT_EQ(zml_run("zeta --t 0 --sigma 1").code, 3);
  EXPECT_EQ(zml_run("moment --kind I --k 1 --T-lo 1 --T-hi 2e6").code, 3);
  EXPECT_EQ(zml_run("zeta --t 100 --target 1e-30").code, 2);
  EXPECT_EQ(zml_run("arith lower-bound --k 2 --partition toy --T 1e4 --cap 5").code, 4);
  EXPECT_EQ(zml_run("--version").code, 0);
}

TEST(Cli, ZerothMoment) {
  const auto r = zml_run("moment --kind I --k 0 --T-lo 1 --T-hi 101");
  ASSERT_EQ(r.code, 0);
  EXPECT_EQ(body(r.out), "kind,k,l,T_lo,T_hi,value_re,value_im,est_error,panels\nI,0,0,1,101,100,0,0,1\n");
  EXPECT_EQ(r.out.rfind("# zml ", 0), 0u);
}

TEST(Cli, ScanIsDeterministicAcrossRunsAndWorkers) {
  const std::string args = " scan --k 0.5,1 --T 1e2,3e2";
  const auto a = zml_run("--workers 1" + args), b = zml_run("--workers 1" + args);
  const auto c = zml_run("--workers 3" + args);
  ASSERT_EQ(a.code, 0);
  EXPECT_EQ(body(a.out), body(b.out));
  EXPECT_EQ(body(a.out), body(c.out));
}

TEST(Cli, ConfigFileSuppliesDefaults) {
  const std::string conf = tmp("scan.conf");
  std::ofstream(conf) << "# scan defaults\nk = 0.5\nT = 1e2,3e2\n";
  const auto from_file = zml_run("scan --config " + conf + " --k 1");
  const auto direct = zml_run("scan --k 1 --T 1e2,3e2");
  ASSERT_EQ(from_file.code, 0);
  EXPECT_EQ(body(from_file.out), body(direct.out));
  std::ofstream(conf) << "k 0.5\n";
  EXPECT_EQ(zml_run("scan --config " + conf).code, 1);
  std::remove(conf.c_str());
}

TEST(Cli, SieveCacheRoundTrip) {
  const std::string cache = tmp("primes.bin");
  const auto fresh = zml_run("sieve --limit 100000 --x 10,1e3,1e5 --cache-out " + cache);
  const auto cached = zml_run("sieve --cache-in " + cache + " --x 10,1e3,99991");
  ASSERT_EQ(fresh.code, 0);
  ASSERT_EQ(cached.code, 0);
  EXPECT_NE(body(cached.out).find("\n10,4,"), std::string::npos);
  EXPECT_NE(body(cached.out).find("\n1000,168,"), std::string::npos);
  EXPECT_NE(body(cached.out).find("\n99991,9592,"), std::string::npos);
  EXPECT_EQ(zml_run("sieve --cache-in " + cache + " --limit 50").code, 3);
  std::remove(cache.c_str());
}

TEST(Cli, MollifierFileMatchesToyFlag) {
  const std::string file = tmp("toy.dp");
  ASSERT_EQ(zml_run("mollifier --toy --k 1 --T 300 --out " + file).code, 0);
  EXPECT_EQ(slurp(file + ".json").empty(), false);
  const auto via_file = zml_run("moment --kind S1 --k 1 --T-lo 1 --T-hi 100 --mollifier " + file);
  const auto via_toy = zml_run("moment --kind S1 --k 1 --T-lo 1 --T-hi 100 --mollifier toy");
  ASSERT_EQ(via_file.code, 0);
  ASSERT_EQ(via_toy.code, 0);
  EXPECT_EQ(body(via_file.out), body(via_toy.out));
  std::remove(file.c_str());
  std::remove((file + ".json").c_str());
}

TEST(Cli, ReportMergesScanFiles) {
  const std::string a = tmp("a.csv"), b = tmp("b.csv");
  ASSERT_EQ(zml_run("scan --k 0.5 --T 1e2,3e2 --out " + a).code, 0);
  ASSERT_EQ(zml_run("scan --k 1 --T 1e2,3e2 --out " + b).code, 0);
  const auto r = zml_run("report --in " + a + "," + b);
  ASSERT_EQ(r.code, 0);
  const std::string rows = body(r.out);
  EXPECT_EQ(rows.rfind("k,l,points,", 0), 0u);
  EXPECT_NE(rows.find("\n0.5,1,2,100,300,"), std::string::npos);
  EXPECT_NE(rows.find("\n1,1,2,100,300,"), std::string::npos);
  std::remove(a.c_str());
  std::remove(b.c_str());
}

TEST(Cli, VerifyEmitsJsonReport) {
  const auto r = zml_run("verify holder --k 1 --T 100 --mollifier trivial");
  ASSERT_EQ(r.code, 0);
  EXPECT_NE(r.out.find("\"header\": \"# zml "), std::string::npos);
  EXPECT_NE(r.out.find("\"ratio\""), std::string::npos);
}
