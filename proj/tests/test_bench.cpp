#include <algorithm>
#include <map>
#include <set>
#include <sstream>

#include "doctest.h"
#include "hsparse/bench.hpp"

using namespace hsparse;
using namespace hsparse::bench;

TEST_CASE("validate") {
  BenchConfig cfg;
  CHECK_NOTHROW(validate(cfg));
  cfg.densities = {0.0};
  CHECK_THROWS_AS(validate(cfg), ConfigError);
  cfg.densities = {1.5};
  CHECK_THROWS_AS(validate(cfg), ConfigError);
  cfg.densities = {};
  CHECK_THROWS_AS(validate(cfg), ConfigError);
  cfg.densities = {1.0};
  cfg.reps = 0;
  CHECK_THROWS_AS(validate(cfg), ConfigError);
  cfg.reps = 1;
  cfg.n = 1;
  CHECK_THROWS_AS(validate(cfg), ConfigError);
}

TEST_CASE("experiment names round trip") {
  for (auto e : {Experiment::insert_unordered, Experiment::insert_quasi_ordered, Experiment::expr_trace,
                 Experiment::expr_diagmat}) {
    CHECK(parse_experiment(to_string(e)) == e);
  }
  CHECK_FALSE(parse_experiment("insert"));
}

TEST_CASE("insertion workloads") {
  const auto q = insertion_workload(300, 0.01, InsertMode::quasi_ordered, 5);
  CHECK(q.size() == 900);
  bool increasing = true;
  for (std::size_t i = 1; i < q.size(); ++i) {
    increasing = increasing && q[i - 1].row + q[i - 1].col * 300 < q[i].row + q[i].col * 300;
  }
  CHECK(increasing);

  const auto u = insertion_workload(300, 0.01, InsertMode::unordered, 5);
  CHECK(u.size() == 900);
  std::set<std::pair<index_t, index_t>> distinct;
  for (const auto& t : u) distinct.emplace(t.row, t.col);
  CHECK(distinct.size() == 900);
  CHECK_FALSE(std::is_sorted(u.begin(), u.end(), [](const auto& a, const auto& b) {
    return a.row + a.col * 300 < b.row + b.col * 300;
  }));
  CHECK(insertion_workload(300, 0.01, InsertMode::unordered, 5) == u);
}

TEST_CASE("bench_insert: record count and strategy set") {
  BenchConfig cfg;
  cfg.experiment = Experiment::insert_quasi_ordered;
  cfg.n = 60;
  const auto records = bench_insert(cfg);
  CHECK(records.size() == 160);
  std::map<std::string, int> per_format;
  for (const auto& r : records) ++per_format[r.format];
  CHECK(per_format == std::map<std::string, int>{{"coo", 40}, {"csc", 40}, {"hybrid", 40}, {"rbt", 40}});
}

TEST_CASE("bench_insert: unordered CSC is skipped above the cap") {
  BenchConfig cfg;
  cfg.experiment = Experiment::insert_unordered;
  cfg.n = 100;
  cfg.densities = {0.01, 0.2};
  cfg.reps = 2;
  const auto records = bench_insert(cfg);
  CHECK(records.size() == 2 * 4 + 2 * 3);
  for (const auto& r : records) CHECK_FALSE((r.format == "csc" && r.density == 0.2));

  cfg.csc_unordered_cap = 1.0;
  CHECK(bench_insert(cfg).size() == 16);
}

TEST_CASE("bench_insert: cross-strategy check at n=2000, density 1%") {
  BenchConfig cfg;
  cfg.experiment = Experiment::insert_quasi_ordered;
  cfg.densities = {0.01};
  cfg.reps = 1;
  CHECK(bench_insert(cfg).size() == 4);
}

TEST_CASE("bench_expr: record count and agreement") {
  BenchConfig cfg;
  cfg.experiment = Experiment::expr_trace;
  cfg.n = 200;
  cfg.densities = {0.05};
  cfg.reps = 3;
  const auto records = bench_expr(cfg);
  CHECK(records.size() == 12);
  CHECK(run(cfg).size() == 6);
  cfg.experiment = Experiment::expr_diagmat;
  const auto diag = run(cfg);
  CHECK(diag.size() == 6);
  CHECK(std::all_of(diag.begin(), diag.end(), [](const auto& r) { return r.experiment == "expr-diagmat"; }));
}

TEST_CASE("CSV from a run parses back to the same number of records") {
  BenchConfig cfg;
  cfg.experiment = Experiment::insert_quasi_ordered;
  cfg.n = 40;
  cfg.reps = 2;
  const auto records = run(cfg);
  std::stringstream ss;
  io::write_csv_results(records, ss);
  CHECK(io::read_csv_results(ss).size() == records.size());
}

TEST_CASE("median, summarize and rel_close") {
  CHECK(median({3, 1, 2}) == 2);
  CHECK(median({4, 1, 3, 2}) == 2.5);
  CHECK(median({}) == 0);

  const std::vector<io::BenchRecord> rs{{"e", "a", 2, 2, 0.1, 0, 1.0}, {"e", "a", 2, 2, 0.1, 1, 3.0},
                                        {"e", "b", 2, 2, 0.1, 0, 5.0}};
  const auto s = summarize(rs);
  REQUIRE(s.size() == 2);
  CHECK(s[0].format == "a");
  CHECK(s[0].reps == 2);
  CHECK(s[0].mean_seconds == 2.0);
  CHECK(s[1].median_seconds == 5.0);

  CHECK(rel_close(1.0, 1.0 + 1e-12, 1e-10));
  CHECK_FALSE(rel_close(1.0, 1.001, 1e-10));
  CHECK(rel_close(0.0, 1e-11, 1e-10));
}
