// bench: insertion and fused-expression timing experiments, written as CSV.
//
//   bench --experiment insert-unordered --n 2000 --densities 0.0001,0.001,0.01,0.1 \
//         --reps 10 --seed 1 --out insert.csv
//
// Exit codes: 0 success, 2 configuration error, 3 correctness-check failure.
// BENCH_QUIET=1 suppresses progress output.

#include <cstdlib>
#include <fstream>
#include <iomanip>
#include <iostream>
#include <sstream>
#include <string>
#include <vector>

#include "CLI11.hpp"
#include "hsparse/bench.hpp"

namespace {

constexpr int exit_config = 2;
constexpr int exit_correctness = 3;

std::vector<double> parse_densities(const std::string& list) {
  std::vector<double> out;
  std::stringstream ss(list);
  std::string item;
  while (std::getline(ss, item, ',')) {
    std::size_t used = 0;
    double d = 0.0;
    try {
      d = std::stod(item, &used);
    } catch (const std::exception&) {
      used = 0;
    }
    if (used == 0 || used != item.size()) throw hsparse::bench::ConfigError("bad density '" + item + "'");
    out.push_back(d);
  }
  return out;
}

}  // namespace

int main(int argc, char** argv) {
  namespace hb = hsparse::bench;

  CLI::App app{"Sparse matrix insertion and expression-fusion benchmarks"};
  std::string experiment = "insert-unordered";
  std::string densities = "0.0001,0.001,0.01,0.1";
  hb::BenchConfig cfg;
  std::string out_path = cfg.out.string();

  app.add_option("--experiment", experiment, "insert-unordered | insert-quasi-ordered | expr-trace | expr-diagmat");
  app.add_option("--n", cfg.n, "matrix side length")->capture_default_str();
  app.add_option("--densities", densities, "comma-separated densities in (0, 1]")->capture_default_str();
  app.add_option("--reps", cfg.reps, "repetitions per density")->capture_default_str();
  app.add_option("--seed", cfg.seed, "workload seed")->capture_default_str();
  app.add_option("--out", out_path, "CSV output path")->capture_default_str();
  app.add_option("--csc-cap", cfg.csc_unordered_cap,
                 "highest density at which direct-CSC unordered insertion is timed")
      ->capture_default_str();

  try {
    app.parse(argc, argv);
  } catch (const CLI::CallForHelp& e) {
    return app.exit(e);
  } catch (const CLI::ParseError& e) {
    app.exit(e);
    return exit_config;
  }

  const char* quiet = std::getenv("BENCH_QUIET");
  if (quiet == nullptr || std::string(quiet) != "1") cfg.progress = &std::cerr;

  try {
    const auto parsed = hb::parse_experiment(experiment);
    if (!parsed) throw hb::ConfigError("unknown experiment '" + experiment + "'");
    cfg.experiment = *parsed;
    cfg.densities = parse_densities(densities);
    cfg.out = out_path;
    hb::validate(cfg);

    const auto records = hb::run(cfg);

    std::ofstream out(cfg.out);
    if (!out) {
      std::cerr << "bench: cannot open " << cfg.out << " for writing\n";
      return 1;
    }
    hsparse::io::write_csv_results(records, out);

    std::cout << std::left << std::setw(22) << "experiment" << std::setw(9) << "format" << std::setw(10)
              << "density" << std::setw(6) << "reps" << std::setw(14) << "median_s" << "mean_s\n";
    for (const auto& s : hb::summarize(records)) {
      std::cout << std::left << std::setw(22) << s.experiment << std::setw(9) << s.format << std::setw(10)
                << s.density << std::setw(6) << s.reps << std::setw(14) << std::scientific << std::setprecision(3)
                << s.median_seconds << s.mean_seconds << std::defaultfloat << std::setprecision(6) << '\n';
    }
    return 0;
  } catch (const hb::ConfigError& e) {
    std::cerr << "bench: " << e.what() << '\n';
    return exit_config;
  } catch (const hb::CorrectnessError& e) {
    std::cerr << "bench: correctness check failed: " << e.what() << '\n';
    return exit_correctness;
  }
}
