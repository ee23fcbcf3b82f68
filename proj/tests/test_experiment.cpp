#include <gtest/gtest.h>

#include <cstdlib>
#include <filesystem>
#include <fstream>
#include <sstream>

#include "fixtures.hpp"
#include "pdfp/experiment.hpp"
#include "pdfp/image_io.hpp"

using namespace pdfp;
namespace fs = std::filesystem;

namespace {

class Workdir : public ::testing::Test {
protected:
  void SetUp() override
  {
    dir_ = fs::temp_directory_path() /
           ("pdfp_cli_" + std::string(::testing::UnitTest::GetInstance()->current_test_info()->name()));
    fs::remove_all(dir_);
    fs::create_directories(dir_);
  }
  void TearDown() override { fs::remove_all(dir_); }

  fs::path write(const std::string &name, const std::string &text) const
  {
    std::ofstream(dir_ / name) << text;
    return dir_ / name;
  }

  static std::string slurp(const fs::path &p)
  {
    std::ifstream in(p, std::ios::binary);
    std::stringstream ss;
    ss << in.rdbuf();
    return ss.str();
  }

  int run_cli(const std::string &args) const
  {
    const std::string cmd = std::string(PDFP_CLI_PATH) + " " + args + " > " + (dir_ / "stdout.txt").string() +
                            " 2> " + (dir_ / "stderr.txt").string();
    const int status = std::system(cmd.c_str());
    return WEXITSTATUS(status);
  }

  std::string denoise_config(const std::string &out, const std::string &extra = "") const
  {
    return "# 4x4 blocks\nproblem.kind = denoise\nproblem.image = fixture.csv\nproblem.noise = 0\n"
           "reg_weight = 0.2\nsolver.name = pdfp2o\nsolver.gamma_beta = 1\nmax_iter = 50000\ntol = 1e-10\n"
           "report_timing = false\noutput_dir = " +
           (dir_ / out).string() + "\n" + extra;
  }

  void write_fixture() const
  {
    Image img = pdfp::testing::blocks4();
    auto rng = named_stream(3, "denoise4");
    img.pixels += pdfp::testing::random_vec(rng, 16, 0.1);
    write_image_csv(img, dir_ / "fixture.csv");
  }

  fs::path dir_;
};

} // namespace

TEST(KeyValues, ParsesCommentsAndDottedKeys)
{
  const KeyValues kv = parse_key_values("# header\nproblem.kind = ct  # trailing\n\n  tol=1e-6\n");
  ASSERT_EQ(kv.size(), 2u);
  EXPECT_EQ(kv.at("problem.kind"), "ct");
  EXPECT_EQ(kv.at("tol"), "1e-6");
  EXPECT_THROW(parse_key_values("no equals sign\n"), InvalidArgument);
}

TEST(ExperimentConfig, UnknownKeysAndValuesAreNamed)
{
  KeyValues kv = {{"problem.kind", "denoise"}, {"solver.name", "pdfp2o"}, {"bogus", "1"}};
  try {
    parse_experiment(kv);
    FAIL();
  } catch (const InvalidArgument &e) {
    EXPECT_NE(std::string(e.what()).find("bogus"), std::string::npos);
  }
  kv.erase("bogus");
  kv["solver.name"] = "newton";
  EXPECT_THROW(parse_experiment(kv), InvalidArgument);
  kv["solver.name"] = "cp";
  kv["problem.angles"] = "0:10:180";
  EXPECT_THROW(parse_experiment(kv), InvalidArgument);
  kv["problem.angles"] = "0:45:135";
  EXPECT_EQ(parse_experiment(kv).angles, (std::vector<double>{0, 45, 90, 135}));
}

TEST_F(Workdir, SolveWritesOutputsAndMatchesGoldenObjective)
{
  write_fixture();
  const fs::path cfg = write("denoise.conf", denoise_config("out"));
  EXPECT_EQ(run_cli("solve " + cfg.string()), 0);
  ASSERT_TRUE(fs::exists(dir_ / "out" / "trace.csv"));
  ASSERT_TRUE(fs::exists(dir_ / "out" / "recon.pgm"));
  const std::string summary = slurp(dir_ / "out" / "summary.txt");
  EXPECT_NE(summary.find("converged=true"), std::string::npos);

  const double golden = 0.73192712959195538;
  const auto pos = summary.find("objective=");
  ASSERT_NE(pos, std::string::npos);
  EXPECT_NEAR(std::strtod(summary.c_str() + pos + 10, nullptr), golden, 1e-9);
  const std::string trace = slurp(dir_ / "out" / "trace.csv");
  EXPECT_EQ(trace.substr(0, trace.find('\n')), "iter,gamma,lambda,alpha,objective,residual,snr,relerr,wall_ms");
}

TEST_F(Workdir, BudgetExhaustionExitsTwo)
{
  write_fixture();
  const fs::path cfg = write("denoise.conf", denoise_config("out"));
  EXPECT_EQ(run_cli("solve " + cfg.string() + " --max-iter 3"), 2);
  EXPECT_NE(slurp(dir_ / "out" / "summary.txt").find("iterations=3"), std::string::npos);
}

TEST_F(Workdir, MalformedConfigExitsOneWithoutOutputs)
{
  write_fixture();
  const fs::path cfg = write("bad.conf", denoise_config("out", "solver.lambda = -1\n"));
  EXPECT_EQ(run_cli("solve " + cfg.string()), 1);
  EXPECT_FALSE(fs::exists(dir_ / "out"));
  EXPECT_NE(slurp(dir_ / "stderr.txt").find("solver.lambda"), std::string::npos);

  const fs::path cfg2 = write("bad2.conf", "problem.kind = mri\nsolver.name = pdfp2o\n");
  EXPECT_EQ(run_cli("solve " + cfg2.string()), 1);
  EXPECT_NE(slurp(dir_ / "stderr.txt").find("mri"), std::string::npos);
}

TEST_F(Workdir, OutputDirEnvironmentOverride)
{
  write_fixture();
  const fs::path cfg = write("denoise.conf", denoise_config("out"));
  const std::string env = "PDFP_OUTPUT_DIR=" + (dir_ / "env_out").string() + " ";
  const std::string cmd = env + PDFP_CLI_PATH + " solve " + cfg.string() + " > /dev/null";
  EXPECT_EQ(WEXITSTATUS(std::system(cmd.c_str())), 0);
  EXPECT_TRUE(fs::exists(dir_ / "env_out" / "summary.txt"));
  EXPECT_FALSE(fs::exists(dir_ / "out"));
}

TEST_F(Workdir, RerunsAreBitIdentical)
{
  const std::string base = "problem.kind = deblur\nproblem.size = 16\nproblem.noise = 0.02\nseed = 4\n"
                           "reg_weight = 0.01\nsolver.name = pdfp2o_ds\nschedule.kind = bb_dynamic\n"
                           "max_iter = 300\nreport_timing = false\n";
  const fs::path a = write("a.conf", base + "output_dir = " + (dir_ / "a").string() + "\n");
  const fs::path b = write("b.conf", base + "output_dir = " + (dir_ / "b").string() + "\n");
  run_cli("solve " + a.string());
  run_cli("solve " + b.string());
  for (const char *f : {"trace.csv", "recon.pgm", "summary.txt"}) {
    EXPECT_EQ(slurp(dir_ / "a" / f), slurp(dir_ / "b" / f)) << f;
  }
}

TEST_F(Workdir, CompareWithItselfGivesIdenticalColumns)
{
  write_fixture();
  const fs::path cfg = write("denoise.conf", denoise_config("out"));
  EXPECT_EQ(run_cli("compare " + cfg.string() + " " + cfg.string() + " --out " + (dir_ / "cmp.csv").string() +
                    " --max-iter 40"),
            0);
  std::ifstream in(dir_ / "cmp.csv");
  std::string line;
  std::getline(in, line);
  EXPECT_EQ(line, "iter,snr_a,relerr_a,snr_b,relerr_b");
  int rows = 0;
  while (std::getline(in, line)) {
    std::stringstream ss(line);
    std::string it, sa, ra, sb, rb;
    std::getline(ss, it, ',');
    std::getline(ss, sa, ',');
    std::getline(ss, ra, ',');
    std::getline(ss, sb, ',');
    std::getline(ss, rb, ',');
    EXPECT_EQ(sa, sb);
    EXPECT_EQ(ra, rb);
    ++rows;
  }
  EXPECT_EQ(rows, 40);
  EXPECT_NE(slurp(dir_ / "stdout.txt").find("threshold_db"), std::string::npos);
}

TEST_F(Workdir, CompareRejectsSeedMismatch)
{
  write_fixture();
  const fs::path a = write("a.conf", denoise_config("out", "seed = 1\n"));
  const fs::path b = write("b.conf", denoise_config("out", "seed = 2\n"));
  EXPECT_EQ(run_cli("compare " + a.string() + " " + b.string() + " --out " + (dir_ / "cmp.csv").string()), 1);
  EXPECT_NE(slurp(dir_ / "stderr.txt").find("seed"), std::string::npos);
  EXPECT_FALSE(fs::exists(dir_ / "cmp.csv"));
}

TEST_F(Workdir, CertifyReportsNotApplicableForTv)
{
  const fs::path l1 = write("l1.conf", "problem.kind = denoise\nproblem.size = 16\nsolver.name = pdfp2o_dsn\n"
                                       "solver.lambda = 0.1\nsolver.gamma_beta = 1\noutput_dir = " +
                                           (dir_ / "cert").string() + "\n");
  // The gradient operator has a singular D D^T.
  EXPECT_EQ(run_cli("certify " + l1.string()), 3);
  EXPECT_NE(slurp(dir_ / "stdout.txt").find("not-applicable"), std::string::npos);
}

TEST(FirstCrossing, ReportsIterationCount)
{
  RunTrace t;
  for (std::size_t i = 1; i <= 5; ++i) {
    TraceRecord r;
    r.iter = i;
    r.snr = 5.0 * static_cast<double>(i);
    t.records.push_back(r);
  }
  EXPECT_EQ(first_crossing(t, 15.0), 3u);
  EXPECT_EQ(first_crossing(t, 23.0), 5u);
  EXPECT_FALSE(first_crossing(t, 26.0).has_value());
}
