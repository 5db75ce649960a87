#include <gtest/gtest.h>

#include <sys/wait.h>

#include <algorithm>
#include <cstdio>
#include <filesystem>
#include <fstream>
#include <sstream>
#include <string>

#include "json.hpp"
#include "unseen/histfit.hpp"
#include "unseen/io.hpp"
#include "unseen/linear.hpp"

namespace fs = std::filesystem;
using namespace unseen;

namespace {

struct Run {
  int status = -1;
  std::string out;
};

Run run_cli(const std::string& args) {
  const std::string cmd = std::string(UNSEEN_CLI) + " " + args + " 2>/dev/null";
  Run r;
  FILE* pipe = popen(cmd.c_str(), "r");
  if (!pipe) return r;
  char buf[4096];
  std::size_t got;
  while ((got = fread(buf, 1, sizeof buf, pipe)) > 0) r.out.append(buf, got);
  const int raw = pclose(pipe);
  r.status = WIFEXITED(raw) ? WEXITSTATUS(raw) : -1;
  return r;
}

class Cli : public ::testing::Test {
protected:
  void SetUp() override {
    dir_ = fs::temp_directory_path() /
           ("unseen_cli_" + std::string(::testing::UnitTest::GetInstance()->current_test_info()->name()));
    fs::create_directories(dir_);
  }
  void TearDown() override { fs::remove_all(dir_); }

  std::string write(const std::string& name, const std::string& content) const {
    const auto path = dir_ / name;
    std::ofstream(path, std::ios::binary) << content;
    return path.string();
  }

  fs::path dir_;
};

// Samples giving the fingerprint {(0,1):1, (1,0):1, (1,1):2, (1,2):2} with n = (5, 7).
const char* kWorkedSamples =
    "0\ta\n0\tb\n0\tc\n0\td\n0\te\n"
    "1\tc\n1\td\n1\td\n1\te\n1\te\n1\tf\n1\tb\n";

}  // namespace

TEST_F(Cli, FingerprintOfWorkedExample) {
  const auto r = run_cli("fingerprint -i " + write("s.tsv", kWorkedSamples));
  EXPECT_EQ(r.status, 0);
  EXPECT_EQ(r.out, "# m=2 n=5,7\n0\t1\t1\n1\t0\t1\n1\t1\t2\n1\t2\t2\n");
}

TEST_F(Cli, EstimateMatchesLibrary) {
  const std::string fp_text = "# m=2 n=5,7\n0\t1\t1\n1\t0\t1\n1\t1\t2\n1\t2\t2\n";
  const auto path = write("fp.tsv", fp_text);
  const auto zero = run_cli("estimate -i " + path + " --t 0,0 --format json");
  ASSERT_EQ(zero.status, 0);
  const auto jz = nlohmann::json::parse(zero.out);
  EXPECT_EQ(jz[0]["unbiased"].get<double>(), 0.0);
  EXPECT_EQ(jz[0]["weighted"].get<double>(), 0.0);

  const auto r = run_cli("estimate -i " + path + " --t 2 --format json");
  ASSERT_EQ(r.status, 0);
  const auto j = nlohmann::json::parse(r.out);
  std::istringstream in(fp_text);
  const auto fp = io::read_fingerprint_tsv(in);
  const ExtrapolationPlan plan({2.0, 2.0}, fp.dims());
  EXPECT_DOUBLE_EQ(j[0]["unbiased"].get<double>(), unbiased_estimate(fp, plan));
  EXPECT_DOUBLE_EQ(j[0]["weighted"].get<double>(), weighted_estimate(fp, plan));
}

TEST_F(Cli, FitIsDeterministicAndMatchesLibrary) {
  const auto samples = run_cli("simulate --model overlap --overlap-m 2 --shared 40 --unique 10 --n 60 --seed 4");
  ASSERT_EQ(samples.status, 0);
  const auto fp_run = run_cli("fingerprint -i " + write("s.tsv", samples.out));
  ASSERT_EQ(fp_run.status, 0);
  const auto fp_path = write("fp.tsv", fp_run.out);
  const std::string args = "fit -i " + fp_path + " --restarts 2 --max-evals 5000 --seed 9";
  const auto a = run_cli(args);
  const auto b = run_cli(args);
  ASSERT_EQ(a.status, 0);
  EXPECT_EQ(a.out, b.out);

  std::istringstream in(fp_run.out);
  const auto fp = io::read_fingerprint_tsv(in);
  FitConfig cfg;
  cfg.restarts = 2;
  cfg.max_evals = 5000;
  cfg.seed = 9;
  EXPECT_EQ(nlohmann::json::parse(a.out), fit_result_to_json(fit_histogram(fp, fp.dims(), cfg)));
}

TEST_F(Cli, StatsAndAllocate) {
  const auto h = write("h.json", R"({"m":1,"entries":[{"alpha":[0.5],"mass":2.0}]})");
  const auto s = run_cli("stats --histogram " + h + " --n 1 --b 1 --format json");
  ASSERT_EQ(s.status, 0);
  const auto js = nlohmann::json::parse(s.out);
  EXPECT_DOUBLE_EQ(js[0]["expected_distinct"].get<double>(), 1.0);
  EXPECT_DOUBLE_EQ(js[0]["expected_new_distinct"].get<double>(), 0.5);

  const auto h2 = write("h2.json", R"({"m":2,"entries":[{"alpha":[0.0,0.5],"mass":2.0}]})");
  const auto a = run_cli("allocate --histogram " + h2 + " --n 0,0 --budget 10 --step 1");
  ASSERT_EQ(a.status, 0);
  EXPECT_EQ(nlohmann::json::parse(a.out)["b"], (nlohmann::json{0, 10}));
}

TEST_F(Cli, ExitCodes) {
  EXPECT_EQ(run_cli("fingerprint -i " + write("bad.tsv", "0 a\n")).status, 1);
  EXPECT_EQ(run_cli("estimate -i " + write("bad_fp.tsv", "1\t2\n") + " --t 1").status, 1);
  EXPECT_EQ(run_cli("fingerprint -i " + (dir_ / "missing.tsv").string()).status, 1);
  EXPECT_EQ(run_cli("no-such-command").status, 1);
  EXPECT_EQ(run_cli("fit -i " + write("inf.tsv", "# m=1 n=2\n2\t1\n1\t1\n")).status, 2);
  EXPECT_EQ(run_cli("--help").status, 0);
}

TEST_F(Cli, IngestText) {
  const std::string corpus = std::string(UNSEEN_TEST_DATA) + "/de_finibus_liber_primus.txt";
  const auto truth = dir_ / "truth.json";
  const auto r = run_cli("ingest-text --corpus " + corpus + " --words 100 --mode contiguous --truth " + truth.string());
  ASSERT_EQ(r.status, 0);
  EXPECT_EQ(std::count(r.out.begin(), r.out.end(), '\n'), 100);
  std::ifstream in(truth);
  const auto h = io::read_histogram_json(in);
  EXPECT_NEAR(h.population_mass()[0], 1.0, 1e-9);
}
