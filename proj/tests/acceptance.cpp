// Acceptance suite: one PASS/FAIL line per criterion, nonzero exit if any
// criterion fails. Timing criteria assume an optimised build on an otherwise
// idle machine.

#include <algorithm>
#include <chrono>
#include <cmath>
#include <cstdio>
#include <functional>
#include <random>
#include <sstream>
#include <string>
#include <vector>

#include "hsparse/bench.hpp"
#include "hsparse/hsparse.hpp"
#include "support/dense.hpp"
#include "support/expr_gen.hpp"

using namespace hsparse;
namespace ht = hsparse::testing;

namespace {

using Clock = std::chrono::steady_clock;

struct Outcome {
  bool pass = true;
  std::string detail;

  void fail(const std::string& why) {
    if (pass) detail = why;
    pass = false;
  }
};

double seconds_since(Clock::time_point t0) { return std::chrono::duration<double>(Clock::now() - t0).count(); }

template <typename F>
double time_once(F&& f) {
  const auto t0 = Clock::now();
  f();
  return seconds_since(t0);
}

template <typename T>
std::vector<T> vec(std::span<const T> s) {
  return {s.begin(), s.end()};
}

std::string fmt(const char* pattern, double a, double b = 0.0, double c = 0.0) {
  char buf[256];
  std::snprintf(buf, sizeof buf, pattern, a, b, c);
  return buf;
}

double median_of(const std::vector<io::BenchRecord>& rs, const std::string& experiment, const std::string& format) {
  std::vector<double> xs;
  for (const auto& r : rs) {
    if (r.experiment == experiment && r.format == format) xs.push_back(r.seconds);
  }
  return bench::median(xs);
}

bool same_csc(const CscStorage<double>& a, const CscStorage<double>& b) {
  return a.n_rows() == b.n_rows() && a.n_cols() == b.n_cols() && vec(a.values()) == vec(b.values()) &&
         vec(a.rows()) == vec(b.rows()) && vec(a.col_offsets()) == vec(b.col_offsets());
}

// 1. Worked example, every insertion order, every construction route.
Outcome worked_example() {
  Outcome out;
  const std::vector<double> values{9, 8, 7, 6, 5, 4};
  const std::vector<index_t> rows{1, 0, 3, 1, 2, 4};
  const std::vector<index_t> offsets{0, 1, 3, 5, 6};
  const std::vector<index_t> coo_cols{0, 1, 1, 2, 2, 3};
  const std::vector<index_t> rbt_order{1, 5, 8, 11, 12, 19};

  std::vector<int> perm{0, 1, 2, 3, 4, 5};
  const auto ts = ht::example_triplets();
  int orders = 0;
  const auto t0 = Clock::now();
  do {
    sp_mat hybrid(5, 4);
    CscStorage<double> direct(5, 4);
    std::vector<Triplet<double>> shuffled;
    for (int i : perm) {
      hybrid.set(ts[i].row, ts[i].col, ts[i].value);
      direct.insert(ts[i].row, ts[i].col, ts[i].value);
      shuffled.push_back(ts[i]);
    }
    std::vector<index_t> in_order;
    hybrid.rbt().for_each([&](index_t i, double) { in_order.push_back(i); });
    if (in_order != rbt_order) out.fail("RBT in-order indices differ");

    const auto batch = sp_mat::from_triplets(5, 4, shuffled);
    const CscStorage<double>* routes[] = {&hybrid.csc(), &direct, &batch.csc()};
    for (const auto* csc : routes) {
      if (vec(csc->values()) != values || vec(csc->rows()) != rows || vec(csc->col_offsets()) != offsets) {
        out.fail("CSC arrays differ");
      }
    }
    if (vec(hybrid.coo().columns()) != coo_cols) out.fail("COO columns differ");
    ++orders;
  } while (std::next_permutation(perm.begin(), perm.end()));
  const double elapsed = seconds_since(t0);
  if (elapsed >= 1.0) out.fail(fmt("took %.3f s", elapsed));
  if (out.pass) out.detail = fmt("%.0f insertion orders, %.3f s", orders, elapsed);
  return out;
}

// 2. csc->coo->csc and csc->rbt->csc on 500 random matrices.
Outcome round_trips() {
  Outcome out;
  std::mt19937_64 rng(2);
  std::uniform_int_distribution<index_t> dim(1, 100);
  const double densities[] = {0.001, 0.01, 0.1, 0.3};
  const auto t0 = Clock::now();
  for (int i = 0; i < 500; ++i) {
    const index_t r = dim(rng), c = dim(rng);
    const auto x = sp_mat::from_triplets(r, c, ht::random_triplets(rng, r, c, densities[i % 4], true)).csc();
    if (!same_csc(coo_to_csc(csc_to_coo(x)), x)) out.fail("csc->coo->csc mismatch at case " + std::to_string(i));
    if (!same_csc(rbt_to_csc(csc_to_rbt(x)), x)) out.fail("csc->rbt->csc mismatch at case " + std::to_string(i));
  }
  const double elapsed = seconds_since(t0);
  if (elapsed >= 30.0) out.fail(fmt("took %.1f s", elapsed));
  if (out.pass) out.detail = fmt("500 matrices, %.2f s", elapsed);
  return out;
}

// 3. Every kernel against the dense mirror, 200 cases each.
Outcome dense_oracle() {
  Outcome out;
  std::mt19937_64 rng(3);
  std::uniform_int_distribution<index_t> dim(1, 40);
  std::uniform_real_distribution<double> density(0.01, 0.4);
  std::uniform_real_distribution<double> unit(-1.0, 1.0);
  constexpr double tol = 1e-12;
  constexpr int cases = 200;

  auto random_pair = [&](index_t r, index_t c) {
    auto ts = ht::random_triplets(rng, r, c, density(rng), true);
    return std::pair{sp_mat::from_triplets(r, c, ts), ht::Dense::from_triplets(r, c, ts)};
  };
  auto check = [&](bool ok, const char* kernel, int i) {
    if (!ok) out.fail(std::string(kernel) + " mismatch at case " + std::to_string(i));
  };

  const auto t0 = Clock::now();
  for (int i = 0; i < cases; ++i) {
    const index_t r = dim(rng), c = dim(rng), k = dim(rng);
    const auto [a, da] = random_pair(r, c);
    const auto [b, db] = random_pair(r, c);
    const auto [m, dm] = random_pair(c, k);
    // Exercise every storage state as kernel input.
    if (i % 3 == 1) a.ensure_rbt();
    if (i % 3 == 2) a.ensure_coo();

    check(ht::matches(sp_add(a, b), ht::dense_add(da, db), tol), "sp_add", i);
    check(ht::matches(sp_mul(a, m), ht::dense_mul(da, dm), tol), "sp_mul", i);
    std::vector<double> v(r);
    for (auto& e : v) e = unit(rng);
    check(ht::matches(vec_mat_mul<double>(v, a), ht::dense_vec_mul(v, da), tol), "vec_mat_mul", i);
    check(ht::matches(transpose(a), ht::dense_transpose(da), 0.0), "transpose", i);
    check(ht::close(trace(a), ht::dense_trace(da), tol), "trace", i);
    check(ht::matches(diag_extract(a), ht::dense_diag(da), 0.0), "diag", i);
    check(ht::close(trace_fused_atb(a, b), ht::dense_trace(ht::dense_mul(ht::dense_transpose(da), db)), tol),
          "trace_fused_atb", i);
    check(ht::matches(diagmat_fused_add(a, b), ht::dense_diagmat(ht::dense_add(da, db)), tol), "diagmat_fused_add",
          i);
    check(ht::matches(reverse(a, Axis::rows), ht::dense_flip(da, true), 0.0), "reverse(rows)", i);
    check(ht::matches(reverse(a, Axis::cols), ht::dense_flip(da, false), 0.0), "reverse(cols)", i);
    check(ht::matches(sum_dim(a, 0), ht::dense_sum(da, 0), tol), "sum_dim(0)", i);
    check(ht::matches(sum_dim(a, 1), ht::dense_sum(da, 1), tol), "sum_dim(1)", i);
    const double s = unit(rng);
    check(ht::matches(scalar_mul(a, s), ht::dense_scale(da, s), tol), "scalar_mul", i);
    for (const auto& result : {sp_add(a, b), sp_mul(a, m), transpose(a), scalar_mul(a, s)}) {
      check(ht::zero_free(result), "zero-free result", i);
    }
  }
  const double elapsed = seconds_since(t0);
  if (elapsed >= 120.0) out.fail(fmt("took %.1f s", elapsed));
  if (out.pass) out.detail = fmt("11 kernels x %.0f cases, %.2f s", cases, elapsed);
  return out;
}

// 4. 1e5 random insert/delete operations, then a full audit.
Outcome rbt_audit() {
  Outcome out;
  std::mt19937_64 rng(4);
  RbtStorage<double> tree(1000, 1000);
  std::vector<index_t> live;
  std::uniform_int_distribution<index_t> pos(0, 1000 * 1000 - 1);
  std::uniform_real_distribution<double> value(0.5, 1.5);
  const auto t0 = Clock::now();
  for (int op = 0; op < 100000; ++op) {
    if (live.empty() || std::bernoulli_distribution(0.65)(rng)) {
      const index_t i = pos(rng);
      tree.insert(i, value(rng));
      live.push_back(i);
    } else {
      const std::size_t j = std::uniform_int_distribution<std::size_t>(0, live.size() - 1)(rng);
      tree.erase(live[j]);
      live[j] = live.back();
      live.pop_back();
    }
  }
  if (auto why = tree.find_violation()) out.fail("audit: " + *why);
  const double n = static_cast<double>(tree.n_nonzero());
  const double bound = 2.0 * std::log2(n + 1.0);
  const int height = tree.height();
  if (height > bound) out.fail(fmt("height %.0f exceeds %.2f", height, bound));
  const double elapsed = seconds_since(t0);
  if (elapsed >= 10.0) out.fail(fmt("took %.2f s", elapsed));
  if (out.pass) out.detail = fmt("N=%.0f, height %.0f <= %.2f", n, height, bound) + fmt(", %.3f s", elapsed);
  return out;
}

// 5. Fused vs forced-fallback evaluation over 1000 random trees.
Outcome fusion_corpus() {
  Outcome out;
  std::mt19937_64 rng(5);
  ht::MatrixPool pool(rng);
  ht::ExprGenerator gen(rng, pool);
  int fused_traces = 0;
  int fused_diagmats = 0;
  for (int i = 0; i < 1000; ++i) {
    const index_t n = gen.dim();
    const auto e = gen.make(4, n, n);

    const auto fused = expr::eval(e);
    const auto plain = expr::eval(e, {.fuse = false});
    if (!ht::matches(fused, ht::Dense::of(plain), 1e-10)) out.fail("eval mismatch at tree " + std::to_string(i));

    reset_counters();
    const double ft = expr::eval_trace(e);
    const bool leaf_operands = [&] {
      const auto root = expr::rewrite(e, expr::Context::trace);
      if (root.node().fusion != expr::Fusion::trace_of_transpose_product) return false;
      const auto& product = std::get<expr::Binary>(root.node().kind);
      const auto& transposed = std::get<expr::Unary>(product.left->kind);
      return std::holds_alternative<expr::Leaf>(transposed.child->kind) &&
             std::holds_alternative<expr::Leaf>(product.right->kind);
    }();
    if (counters().fused_trace_dispatches == 1) {
      ++fused_traces;
      if (leaf_operands && counters().matrix_allocations != 0) {
        out.fail("fused trace allocated a matrix at tree " + std::to_string(i));
      }
    }
    if (!bench::rel_close(ft, expr::eval_trace(e, {.fuse = false}), 1e-10)) {
      out.fail("trace mismatch at tree " + std::to_string(i));
    }

    reset_counters();
    const auto fd = expr::eval_diagmat(e);
    fused_diagmats += counters().fused_diagmat_dispatches > 0;
    if (!ht::matches(fd, ht::Dense::of(expr::eval_diagmat(e, {.fuse = false})), 1e-10)) {
      out.fail("diagmat mismatch at tree " + std::to_string(i));
    }
  }

  // The benchmark-scale case: leaves at n=2000, density 1%.
  const auto a = sprandu(2000, 2000, 0.01, 51);
  const auto b = sprandu(2000, 2000, 0.01, 52);
  reset_counters();
  const double big = expr::eval_trace(expr::t(expr::leaf(a)) * expr::leaf(b));
  const auto allocations = counters().matrix_allocations;
  if (counters().fused_trace_dispatches != 1) out.fail("fused trace not dispatched at n=2000");
  if (allocations != 0) out.fail(fmt("fused trace at n=2000 made %.0f matrix allocations", allocations));
  if (!bench::rel_close(big, expr::eval_trace(expr::t(expr::leaf(a)) * expr::leaf(b), {.fuse = false}), 1e-10)) {
    out.fail("trace mismatch at n=2000");
  }
  if (out.pass) {
    out.detail = fmt("1000 trees (%.0f fused traces, %.0f fused diagmats), 0 allocations on fused trace",
                     fused_traces, fused_diagmats);
  }
  return out;
}

// 6. Unordered insertion: RBT at least 5x faster than direct CSC.
Outcome insertion_ordering() {
  Outcome out;
  bench::BenchConfig cfg;
  cfg.experiment = bench::Experiment::insert_unordered;
  cfg.n = 2000;
  cfg.densities = {0.01};
  cfg.reps = 10;
  const auto t0 = Clock::now();
  const auto records = bench::bench_insert(cfg);
  const double rbt = median_of(records, "insert-unordered", "rbt");
  const double hybrid = median_of(records, "insert-unordered", "hybrid");
  const double csc = median_of(records, "insert-unordered", "csc");
  const double elapsed = seconds_since(t0);
  if (csc < 5.0 * rbt) out.fail(fmt("csc %.4f s vs rbt %.4f s (ratio %.1f)", csc, rbt, csc / rbt));
  if (elapsed >= 300.0) out.fail(fmt("took %.1f s", elapsed));
  if (out.pass) {
    out.detail = fmt("median csc %.4f s, rbt %.4f s, ratio %.1fx", csc, rbt, csc / rbt) +
                 fmt("; hybrid %.4f s", hybrid);
  }
  return out;
}

// 7. Quasi-ordered insertion at 0.01%: COO within 2x of RBT.
Outcome quasi_ordered() {
  Outcome out;
  bench::BenchConfig cfg;
  cfg.experiment = bench::Experiment::insert_quasi_ordered;
  cfg.n = 2000;
  cfg.densities = {1e-4};
  // Each build takes microseconds; extra repetitions steady the median.
  cfg.reps = 101;
  const auto records = bench::bench_insert(cfg);
  const double coo = median_of(records, "insert-quasi-ordered", "coo");
  const double rbt = median_of(records, "insert-quasi-ordered", "rbt");
  if (coo > 2.0 * rbt) out.fail(fmt("coo %.2e s vs rbt %.2e s", coo, rbt));
  if (out.pass) out.detail = fmt("median coo %.2e s, rbt %.2e s, coo/rbt %.2f", coo, rbt, coo / rbt);
  return out;
}

// 8. Fused expressions at least 2x faster than the explicit evaluation.
Outcome fusion_speed() {
  Outcome out;
  bench::BenchConfig cfg;
  cfg.n = 2000;
  cfg.densities = {0.01};
  cfg.reps = 10;
  const auto records = bench::bench_expr(cfg);
  const double tf = median_of(records, "expr-trace", "fused");
  const double tu = median_of(records, "expr-trace", "unfused");
  const double df = median_of(records, "expr-diagmat", "fused");
  const double du = median_of(records, "expr-diagmat", "unfused");
  if (tu < 2.0 * tf) out.fail(fmt("trace: fused %.2e s, unfused %.2e s", tf, tu));
  if (du < 2.0 * df) out.fail(fmt("diagmat: fused %.2e s, unfused %.2e s", df, du));
  if (out.pass) out.detail = fmt("trace speedup %.1fx, diagmat speedup %.1fx", tu / tf, du / df);
  return out;
}

// 9. One rbt_to_csc sync under 20% of one sp_add.
Outcome sync_overhead() {
  Outcome out;
  const auto a = sprandu(2000, 2000, 0.01, 91);
  const auto b = sprandu(2000, 2000, 0.01, 92);
  const auto tree = csc_to_rbt(a.csc());
  std::vector<double> sync, add;
  for (int rep = 0; rep < 10; ++rep) {
    std::size_t sink = 0;
    sync.push_back(time_once([&] { sink += rbt_to_csc(tree).n_nonzero(); }));
    add.push_back(time_once([&] { sink += sp_add(a, b).n_nonzero(); }));
    if (sink == 0) out.fail("empty results");
  }
  const double s = bench::median(sync);
  const double d = bench::median(add);
  if (s >= 0.2 * d) out.fail(fmt("rbt_to_csc %.2e s vs sp_add %.2e s (%.0f%%)", s, d, 100.0 * s / d));
  if (out.pass) out.detail = fmt("rbt_to_csc %.2e s, sp_add %.2e s, ratio %.1f%%", s, d, 100.0 * s / d);
  return out;
}

// 10. Byte-identical IO round trips and the malformed-file corpus.
Outcome io_round_trip() {
  Outcome out;
  std::mt19937_64 rng(10);
  std::uniform_int_distribution<index_t> dim(1, 80);
  for (int i = 0; i < 100; ++i) {
    const index_t r = dim(rng), c = dim(rng);
    const auto m = sp_mat::from_triplets(r, c, ht::random_triplets(rng, r, c, 0.15));
    std::ostringstream first, second;
    io::save_matrix_market(m, first);
    std::istringstream in(first.str());
    const auto back = io::load_matrix_market(in);
    io::save_matrix_market(back, second);
    if (first.str() != second.str()) out.fail("bytes differ at case " + std::to_string(i));
    if (!(back == m)) out.fail("loaded matrix differs at case " + std::to_string(i));
  }

  using Kind = io::MatrixMarketError::Kind;
  struct Bad {
    const char* text;
    Kind kind;
    std::size_t line;
  };
  const Bad corpus[] = {
      {"%%MatrixMarket matrix array real general\n2 2\n1\n2\n3\n4\n", Kind::malformed_header, 1},
      {"%%MatrixMarket matrix coordinate real general\n2 2 1\n3 1 5.0\n", Kind::out_of_bounds, 3},
      {"%%MatrixMarket matrix coordinate real general\n% note\n3 3 2\n1 1 1.0\n2 2 x\n", Kind::non_numeric_value, 5},
      {"%%MatrixMarket matrix coordinate real general\n3 three 1\n1 1 1.0\n", Kind::malformed_size, 2},
      {"%%MatrixMarket matrix coordinate real general\n2 2 2\n1 1 1.0\n", Kind::count_mismatch, 4},
  };
  int caught = 0;
  for (const auto& bad : corpus) {
    std::istringstream in(bad.text);
    try {
      (void)io::load_matrix_market(in);
      out.fail(std::string("no error for a ") + io::to_string(bad.kind) + " case");
    } catch (const io::MatrixMarketError& e) {
      if (e.kind() != bad.kind || e.line() != bad.line) {
        out.fail(std::string("expected ") + io::to_string(bad.kind) + " at line " + std::to_string(bad.line) +
                 ", got: " + e.what());
      } else {
        ++caught;
      }
    }
  }
  if (out.pass) out.detail = fmt("100 byte-identical round trips, %.0f/5 malformed files classified", caught);
  return out;
}

}  // namespace

int main() {
  struct Criterion {
    int id;
    const char* name;
    std::function<Outcome()> run;
  };
  const std::vector<Criterion> criteria{
      {1, "worked example", worked_example},
      {2, "conversion round trips", round_trips},
      {3, "dense-oracle equivalence", dense_oracle},
      {4, "red-black audit", rbt_audit},
      {5, "fusion correctness", fusion_corpus},
      {6, "unordered insertion ordering", insertion_ordering},
      {7, "quasi-ordered insertion", quasi_ordered},
      {8, "fusion performance", fusion_speed},
      {9, "sync overhead", sync_overhead},
      {10, "io round trip", io_round_trip},
  };

  int failures = 0;
  for (const auto& c : criteria) {
    Outcome o;
    try {
      o = c.run();
    } catch (const std::exception& e) {
      o.fail(std::string("exception: ") + e.what());
    }
    std::printf("%s criterion %d (%s): %s\n", o.pass ? "PASS" : "FAIL", c.id, c.name, o.detail.c_str());
    std::fflush(stdout);
    failures += !o.pass;
  }
  return failures == 0 ? 0 : 1;
}
