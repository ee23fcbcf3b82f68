#pragma once

#include <cstdint>
#include <filesystem>
#include <iosfwd>
#include <map>
#include <optional>
#include <string>
#include <vector>

#include "pdfp/diagnostics.hpp"
#include "pdfp/schedules.hpp"
#include "pdfp/solvers.hpp"

namespace pdfp {

/// Flat key=value configuration. Lines are `key = value`; `#` starts a comment;
/// keys may be dotted (`problem.kind`). Later lines override earlier ones.
using KeyValues = std::map<std::string, std::string>;

KeyValues parse_key_values(const std::string &text);
KeyValues load_key_values(const std::filesystem::path &path);

enum class ProblemKind { denoise, deblur, ct };
enum class SolverKind { pdfp2o, pdfp2o_kappa, pdfp2o_ds, pdfp2o_dsn, pfbs_fp2o, ifp2o, cp, siu };

struct ExperimentConfig {
  ProblemKind problem = ProblemKind::denoise;
  Index size = 64;
  double noise = 0.01;
  std::uint64_t seed = 0;
  std::optional<std::filesystem::path> image;
  std::vector<double> angles;
  Index rays = 362;
  double spacing = 1.0;
  int blur_radius = 2;
  double blur_sigma = 1.0;

  double reg_weight = 0.1;
  TvVariant variant = TvVariant::anisotropic;

  SolverKind solver = SolverKind::pdfp2o;
  std::optional<double> gamma;
  double gamma_beta = 1.99;
  std::optional<double> lambda;
  double kappa = 0.0;
  double theta = 1.0;
  std::optional<double> sigma;
  std::optional<double> tau;
  std::optional<double> delta;
  std::optional<double> nu;
  std::size_t inner_max_iter = 10;
  double inner_tol = 1e-6;

  ScheduleKind schedule = ScheduleKind::constant;
  double alpha = 0.0;
  double alpha_lo = 0.1;
  double alpha_hi = 0.9;
  double gamma_lo_beta = 0.01;
  double gamma_hi_beta = 1.99;
  double decay = 0.0;
  BbNumerator numerator = BbNumerator::literal;

  std::optional<double> certify_sigma;

  std::size_t max_iter = 1000;
  double tol = 1e-8;
  std::filesystem::path output_dir = "pdfp_out";
  bool report_timing = true;

  /// The key=value pairs that identify the problem instance (problem.*, seed,
  /// reg_weight, tv_variant).
  KeyValues problem_keys;
};

/// Validates every key and value; throws InvalidArgument naming the offending key.
ExperimentConfig parse_experiment(const KeyValues &kv);

const char *solver_name(SolverKind s);
const char *problem_name(ProblemKind p);

struct BuiltProblem {
  Problem problem;
  Vec x_true;
  Index height;
  Index width;
};

BuiltProblem build_problem(const ExperimentConfig &cfg);

struct ExperimentResult {
  Vec x;
  RunTrace trace;
  bool converged = false;
  std::size_t iterations = 0;
  double objective = 0.0;
  double snr_db = 0.0;
  double relerr = 0.0;
  double wall_ms = 0.0;
  double gamma = 0.0;
  double lambda = 0.0;
};

ExperimentResult run_solver(const ExperimentConfig &cfg, const BuiltProblem &built);

/// Command-line overrides applied on top of a config file.
struct Overrides {
  std::optional<std::size_t> max_iter;
  std::optional<double> tol;
  std::optional<std::uint64_t> seed;
};

/// Loads a config, applies overrides and PDFP_OUTPUT_DIR; throws InvalidArgument on any error.
ExperimentConfig load_experiment(const std::filesystem::path &path, const Overrides &ov);

/// `solve`: exit 0 converged, 2 budget exhausted, 1 configuration error.
int solve_command(const std::filesystem::path &config, const Overrides &ov, std::ostream &out, std::ostream &err);

/// `compare`: writes the merged SNR/RelErr CSV and prints threshold crossings.
int compare_command(const std::filesystem::path &config_a, const std::filesystem::path &config_b,
                    const std::filesystem::path &out_csv, const Overrides &ov, std::ostream &out,
                    std::ostream &err);

/// `certify`: prints the rate certificate as CSV; exit 3 when not applicable.
int certify_command(const std::filesystem::path &config, const Overrides &ov, std::ostream &out,
                    std::ostream &err);

/// First iteration index (1-based) whose SNR reaches `threshold_db`, if any.
std::optional<std::size_t> first_crossing(const RunTrace &trace, double threshold_db);

} // namespace pdfp
