// pdfp: run, compare and certify primal-dual fixed point experiments.

#include <CLI11.hpp>
#include <iostream>

#include "pdfp/experiment.hpp"

int main(int argc, char **argv)
{
  CLI::App app{"Primal-dual fixed point solvers: experiments from key=value configs"};
  app.require_subcommand(1);

  std::size_t max_iter = 0;
  double tol = 0.0;
  std::uint64_t seed = 0;
  auto *max_iter_opt = app.add_option("--max-iter", max_iter, "Override max_iter")->check(CLI::PositiveNumber);
  auto *tol_opt = app.add_option("--tol", tol, "Override tol")->check(CLI::PositiveNumber);
  auto *seed_opt = app.add_option("--seed", seed, "Override seed");

  std::string config, config_b, out_path;
  auto *solve = app.add_subcommand("solve", "Run one experiment; writes trace.csv, recon.pgm, summary.txt");
  solve->add_option("config", config, "Config file")->required();
  solve->fallthrough();

  auto *compare = app.add_subcommand("compare", "Run two configs on the same problem and merge their curves");
  compare->add_option("config_a", config, "First config")->required();
  compare->add_option("config_b", config_b, "Second config")->required();
  compare->add_option("--out", out_path, "Merged CSV path")->required();
  compare->fallthrough();

  auto *certify = app.add_subcommand("certify", "Print the linear-rate certificate as CSV");
  certify->add_option("config", config, "Config file")->required();
  certify->fallthrough();

  try {
    app.parse(argc, argv);
  } catch (const CLI::ParseError &e) {
    const int code = app.exit(e);
    return code == 0 ? 0 : 1;
  }

  pdfp::Overrides ov;
  if (*max_iter_opt) { ov.max_iter = max_iter; }
  if (*tol_opt) { ov.tol = tol; }
  if (*seed_opt) { ov.seed = seed; }

  if (*solve) { return pdfp::solve_command(config, ov, std::cout, std::cerr); }
  if (*compare) { return pdfp::compare_command(config, config_b, out_path, ov, std::cout, std::cerr); }
  return pdfp::certify_command(config, ov, std::cout, std::cerr);
}
