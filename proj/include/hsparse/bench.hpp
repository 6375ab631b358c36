#pragma once

// Benchmark harness for the two experiments:
//
//   insertion   build an n x n matrix element by element, unordered or
//               quasi-ordered, with four strategies (direct CSC, direct COO,
//               direct RBT, and hybrid = RBT build + one sync to CSC)
//   expression  trace(t(A) * B) and diagmat(A + B), fused vs. unfused
//
// Each measurement is one wall-clock interval from a monotonic clock around
// the whole build or evaluation, allocation included.

#include <cstdint>
#include <filesystem>
#include <iosfwd>
#include <optional>
#include <span>
#include <stdexcept>
#include <string>
#include <string_view>
#include <vector>

#include "hsparse/io.hpp"

namespace hsparse::bench {

enum class Experiment { insert_unordered, insert_quasi_ordered, expr_trace, expr_diagmat };

const char* to_string(Experiment e);
std::optional<Experiment> parse_experiment(std::string_view name);

struct BenchConfig {
  Experiment experiment = Experiment::insert_unordered;
  index_t n = 2000;
  std::vector<double> densities{1e-4, 1e-3, 1e-2, 1e-1};
  int reps = 10;
  std::uint64_t seed = 1;
  std::filesystem::path out = "bench.csv";
  /// Direct-CSC unordered insertion is skipped above this density.
  double csc_unordered_cap = 0.01;
  /// Progress lines go here when non-null.
  std::ostream* progress = nullptr;
};

class ConfigError : public std::invalid_argument {
 public:
  using std::invalid_argument::invalid_argument;
};

/// Strategies or evaluation paths disagreed: a library bug, not noise.
class CorrectnessError : public std::runtime_error {
 public:
  using std::runtime_error::runtime_error;
};

/// Throws ConfigError unless densities lie in (0, 1], reps >= 1 and n >= 2.
void validate(const BenchConfig& cfg);

enum class InsertMode { unordered, quasi_ordered };

/// Exactly round(density * n * n) distinct positions with values on (0, 1].
/// Unordered: random order. Quasi-ordered: strictly increasing linear index.
std::vector<Triplet<double>> insertion_workload(index_t n, double density, InsertMode mode, std::uint64_t seed);

/// One record per (density, rep, strategy). Strategies: csc, coo, rbt, hybrid.
std::vector<io::BenchRecord> bench_insert(const BenchConfig& cfg);

/// One record per (density, rep, expression, path); both expressions are
/// always timed. Paths: fused, unfused.
std::vector<io::BenchRecord> bench_expr(const BenchConfig& cfg);

/// Runs the configured experiment; the expr-* experiments keep only the
/// named expression's records.
std::vector<io::BenchRecord> run(const BenchConfig& cfg);

struct Summary {
  std::string experiment;
  std::string format;
  double density = 0.0;
  int reps = 0;
  double mean_seconds = 0.0;
  double median_seconds = 0.0;
};

std::vector<Summary> summarize(std::span<const io::BenchRecord> records);

double median(std::vector<double> xs);

/// |a - b| <= rel * max(|a|, |b|, 1).
bool rel_close(double a, double b, double rel);

}  // namespace hsparse::bench
