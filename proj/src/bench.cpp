#include "hsparse/bench.hpp"

#include <algorithm>
#include <chrono>
#include <cmath>
#include <map>
#include <ostream>
#include <random>
#include <tuple>

#include "hsparse/expr.hpp"
#include "hsparse/kernels.hpp"

namespace hsparse::bench {

namespace {

template <typename F>
double time_seconds(F&& f) {
  const auto t0 = std::chrono::steady_clock::now();
  f();
  const auto t1 = std::chrono::steady_clock::now();
  return std::chrono::duration<double>(t1 - t0).count();
}

std::uint64_t derive_seed(std::uint64_t seed, std::size_t density_index, int rep, std::uint64_t stream) {
  std::seed_seq seq{static_cast<std::uint32_t>(seed), static_cast<std::uint32_t>(seed >> 32),
                    static_cast<std::uint32_t>(density_index), static_cast<std::uint32_t>(rep),
                    static_cast<std::uint32_t>(stream)};
  std::mt19937_64 rng(seq);
  return rng();
}

std::vector<Triplet<double>> triplets_of(const CscStorage<double>& csc) {
  std::vector<Triplet<double>> out;
  out.reserve(csc.n_nonzero());
  csc.for_each([&](index_t r, index_t c, double v) { out.push_back({r, c, v}); });
  return out;
}

std::vector<Triplet<double>> triplets_of(const CooStorage<double>& coo) {
  std::vector<Triplet<double>> out;
  out.reserve(coo.n_nonzero());
  coo.for_each([&](index_t r, index_t c, double v) { out.push_back({r, c, v}); });
  return out;
}

std::vector<Triplet<double>> triplets_of(const RbtStorage<double>& rbt) {
  std::vector<Triplet<double>> out;
  out.reserve(rbt.n_nonzero());
  const index_t n_rows = rbt.n_rows();
  rbt.for_each([&](index_t index, double v) { out.push_back({index % n_rows, index / n_rows, v}); });
  return out;
}

}  // namespace

const char* to_string(Experiment e) {
  switch (e) {
    case Experiment::insert_unordered: return "insert-unordered";
    case Experiment::insert_quasi_ordered: return "insert-quasi-ordered";
    case Experiment::expr_trace: return "expr-trace";
    case Experiment::expr_diagmat: return "expr-diagmat";
  }
  return "?";
}

std::optional<Experiment> parse_experiment(std::string_view name) {
  for (auto e : {Experiment::insert_unordered, Experiment::insert_quasi_ordered, Experiment::expr_trace,
                 Experiment::expr_diagmat}) {
    if (name == to_string(e)) return e;
  }
  return std::nullopt;
}

void validate(const BenchConfig& cfg) {
  if (cfg.n < 2) throw ConfigError("n must be at least 2, got " + std::to_string(cfg.n));
  if (cfg.reps < 1) throw ConfigError("reps must be at least 1, got " + std::to_string(cfg.reps));
  if (cfg.densities.empty()) throw ConfigError("at least one density is required");
  for (double d : cfg.densities) {
    if (!(d > 0.0 && d <= 1.0)) throw ConfigError("density must lie in (0, 1], got " + std::to_string(d));
  }
}

std::vector<Triplet<double>> insertion_workload(index_t n, double density, InsertMode mode, std::uint64_t seed) {
  const index_t area = detail::checked_area(n, n);
  const auto k = std::min<index_t>(area, static_cast<index_t>(std::llround(density * static_cast<double>(area))));
  std::mt19937_64 rng(seed);
  std::vector<index_t> positions = detail::sample_positions(area, k, rng);
  if (mode == InsertMode::unordered) std::shuffle(positions.begin(), positions.end(), rng);

  std::vector<Triplet<double>> out;
  out.reserve(k);
  for (const index_t p : positions) out.push_back({p % n, p / n, detail::uniform_open_closed(rng)});
  return out;
}

std::vector<io::BenchRecord> bench_insert(const BenchConfig& cfg) {
  validate(cfg);
  if (cfg.experiment != Experiment::insert_unordered && cfg.experiment != Experiment::insert_quasi_ordered) {
    throw ConfigError(std::string("bench_insert cannot run ") + to_string(cfg.experiment));
  }
  const InsertMode mode =
      cfg.experiment == Experiment::insert_unordered ? InsertMode::unordered : InsertMode::quasi_ordered;
  const std::string experiment = to_string(cfg.experiment);
  const index_t n = cfg.n;

  std::vector<io::BenchRecord> records;
  for (std::size_t di = 0; di < cfg.densities.size(); ++di) {
    const double density = cfg.densities[di];
    const bool run_csc = mode == InsertMode::quasi_ordered || density <= cfg.csc_unordered_cap;
    for (int rep = 0; rep < cfg.reps; ++rep) {
      const auto work = insertion_workload(n, density, mode, derive_seed(cfg.seed, di, rep, 0));
      auto record = [&](const char* format, double seconds) {
        records.push_back({experiment, format, n, n, density, rep, seconds});
      };

      // Hybrid first: its result is the reference for the others.
      std::optional<sp_mat> hybrid;
      record("hybrid", time_seconds([&] {
               sp_mat m(n, n);
               for (const auto& t : work) m.set(t.row, t.col, t.value);
               m.ensure_csc();
               hybrid = std::move(m);
             }));
      const auto reference = hybrid->triplets();
      auto check = [&](const char* format, const std::vector<Triplet<double>>& got) {
        if (got != reference) {
          throw CorrectnessError(std::string("insertion strategy '") + format + "' disagrees with hybrid at density " +
                                 std::to_string(density) + ", rep " + std::to_string(rep));
        }
      };

      std::optional<RbtStorage<double>> rbt;
      record("rbt", time_seconds([&] {
               RbtStorage<double> tree(n, n);
               for (const auto& t : work) tree.insert(t.row + t.col * n, t.value);
               rbt = std::move(tree);
             }));
      check("rbt", triplets_of(*rbt));
      rbt.reset();

      std::optional<CooStorage<double>> coo;
      record("coo", time_seconds([&] {
               CooStorage<double> list(n, n);
               for (const auto& t : work) list.append(t.row, t.col, t.value);
               list.canonicalize();
               coo = std::move(list);
             }));
      check("coo", triplets_of(*coo));
      coo.reset();

      if (run_csc) {
        std::optional<CscStorage<double>> csc;
        record("csc", time_seconds([&] {
                 CscStorage<double> arrays(n, n);
                 for (const auto& t : work) arrays.insert(t.row, t.col, t.value);
                 csc = std::move(arrays);
               }));
        check("csc", triplets_of(*csc));
      }

      if (cfg.progress != nullptr) {
        *cfg.progress << experiment << " density=" << density << " rep=" << rep + 1 << "/" << cfg.reps << '\n';
      }
    }
  }
  return records;
}

std::vector<io::BenchRecord> bench_expr(const BenchConfig& cfg) {
  validate(cfg);
  const index_t n = cfg.n;
  std::vector<io::BenchRecord> records;
  for (std::size_t di = 0; di < cfg.densities.size(); ++di) {
    const double density = cfg.densities[di];
    for (int rep = 0; rep < cfg.reps; ++rep) {
      const sp_mat a = sprandu(n, n, density, derive_seed(cfg.seed, di, rep, 1));
      const sp_mat b = sprandu(n, n, density, derive_seed(cfg.seed, di, rep, 2));
      const auto trace_expr = expr::t(expr::leaf(a)) * expr::leaf(b);
      const auto sum_expr = expr::leaf(a) + expr::leaf(b);
      auto record = [&](const char* experiment, const char* path, double seconds) {
        records.push_back({experiment, path, n, n, density, rep, seconds});
      };

      double fused_trace = 0.0;
      double plain_trace = 0.0;
      record("expr-trace", "fused", time_seconds([&] { fused_trace = expr::eval_trace(trace_expr); }));
      record("expr-trace", "unfused",
             time_seconds([&] { plain_trace = expr::eval_trace(trace_expr, {.fuse = false}); }));
      if (!rel_close(fused_trace, plain_trace, 1e-10)) {
        throw CorrectnessError("fused trace " + std::to_string(fused_trace) + " != unfused " +
                               std::to_string(plain_trace) + " at density " + std::to_string(density));
      }

      std::optional<sp_mat> fused_diag;
      std::optional<sp_mat> plain_diag;
      record("expr-diagmat", "fused", time_seconds([&] { fused_diag = expr::eval_diagmat(sum_expr); }));
      record("expr-diagmat", "unfused",
             time_seconds([&] { plain_diag = expr::eval_diagmat(sum_expr, {.fuse = false}); }));
      const auto fd = diag_extract(*fused_diag);
      const auto pd = diag_extract(*plain_diag);
      for (std::size_t i = 0; i < fd.size(); ++i) {
        if (!rel_close(fd[i], pd[i], 1e-10)) {
          throw CorrectnessError("fused diagmat disagrees at diagonal " + std::to_string(i) + ", density " +
                                 std::to_string(density));
        }
      }

      if (cfg.progress != nullptr) {
        *cfg.progress << "expr density=" << density << " rep=" << rep + 1 << "/" << cfg.reps << '\n';
      }
    }
  }
  return records;
}

std::vector<io::BenchRecord> run(const BenchConfig& cfg) {
  switch (cfg.experiment) {
    case Experiment::insert_unordered:
    case Experiment::insert_quasi_ordered:
      return bench_insert(cfg);
    case Experiment::expr_trace:
    case Experiment::expr_diagmat: {
      auto records = bench_expr(cfg);
      const std::string keep = to_string(cfg.experiment);
      std::erase_if(records, [&](const io::BenchRecord& r) { return r.experiment != keep; });
      return records;
    }
  }
  return {};
}

double median(std::vector<double> xs) {
  if (xs.empty()) return 0.0;
  const auto mid = xs.begin() + static_cast<std::ptrdiff_t>(xs.size() / 2);
  std::nth_element(xs.begin(), mid, xs.end());
  if (xs.size() % 2 == 1) return *mid;
  const double upper = *mid;
  const double lower = *std::max_element(xs.begin(), mid);
  return 0.5 * (lower + upper);
}

bool rel_close(double a, double b, double rel) {
  return std::abs(a - b) <= rel * std::max({std::abs(a), std::abs(b), 1.0});
}

std::vector<Summary> summarize(std::span<const io::BenchRecord> records) {
  // Keyed on first appearance so output follows measurement order.
  std::vector<std::tuple<std::string, std::string, double>> order;
  std::map<std::tuple<std::string, std::string, double>, std::vector<double>> groups;
  for (const auto& r : records) {
    auto key = std::make_tuple(r.experiment, r.format, r.density);
    auto [it, inserted] = groups.try_emplace(key);
    if (inserted) order.push_back(key);
    it->second.push_back(r.seconds);
  }
  std::vector<Summary> out;
  for (const auto& key : order) {
    const auto& xs = groups[key];
    double total = 0.0;
    for (double x : xs) total += x;
    out.push_back({std::get<0>(key), std::get<1>(key), std::get<2>(key), static_cast<int>(xs.size()),
                   total / static_cast<double>(xs.size()), median(xs)});
  }
  return out;
}

}  // namespace hsparse::bench
