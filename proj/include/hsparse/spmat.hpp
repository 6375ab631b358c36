#pragma once

// SpMat: the user-facing sparse matrix. Exactly one of the three storage
// formats is authoritative at a time; operations sync to the format they
// need and the stale representation is discarded.
//
// Routing:
//   element writes         -> RBT
//   linear algebra         -> CSC
//   bulk coordinate maps   -> COO
//   element reads          -> whatever is current (reads never sync)
//
// Sync is logically const: it changes the representation, never the
// observable elements, so the storage is `mutable` and the ensure_* calls
// are const. SpMat is not safe for concurrent use, not even for reads; take
// a CscView after ensure_csc() for shared read-only access.

#include <cmath>
#include <cstdint>
#include <ostream>
#include <random>
#include <span>
#include <stdexcept>
#include <unordered_set>
#include <variant>
#include <vector>

#include "hsparse/convert.hpp"
#include "hsparse/storage.hpp"

namespace hsparse {

enum class Format { csc, rbt, coo };

inline const char* to_string(Format f) {
  switch (f) {
    case Format::csc: return "csc";
    case Format::rbt: return "rbt";
    case Format::coo: return "coo";
  }
  return "?";
}

/// Read-only window onto a synced CSC representation. Invalidated by any
/// mutation of the matrix it came from.
template <typename eT>
class CscView {
 public:
  explicit CscView(const CscStorage<eT>& csc) : csc_(&csc) {}

  index_t n_rows() const noexcept { return csc_->n_rows(); }
  index_t n_cols() const noexcept { return csc_->n_cols(); }
  index_t n_nonzero() const noexcept { return csc_->n_nonzero(); }
  eT get(index_t row, index_t col) const { return csc_->get(row, col); }

  template <typename F>
  void for_each(F&& f) const {
    csc_->for_each(std::forward<F>(f));
  }

 private:
  const CscStorage<eT>* csc_;
};

template <typename eT = double>
class SpMat {
 public:
  using value_type = eT;
  using csc_type = CscStorage<eT>;
  using coo_type = CooStorage<eT>;
  using rbt_type = RbtStorage<eT>;

  SpMat() : SpMat(0, 0) {}

  /// All-zero matrix, CSC state.
  SpMat(index_t n_rows, index_t n_cols)
      : n_rows_(n_rows), n_cols_(n_cols), store_(csc_type(n_rows, n_cols)) {}

  explicit SpMat(csc_type csc) : n_rows_(csc.n_rows()), n_cols_(csc.n_cols()), store_(std::move(csc)) {}

  explicit SpMat(rbt_type rbt) : n_rows_(rbt.n_rows()), n_cols_(rbt.n_cols()), store_(std::move(rbt)) {}

  explicit SpMat(coo_type coo) : n_rows_(coo.n_rows()), n_cols_(coo.n_cols()) {
    coo.canonicalize();
    store_ = std::move(coo);
  }

  /// Batch construction (last duplicate wins, zeros dropped); CSC state.
  static SpMat from_triplets(index_t n_rows, index_t n_cols, std::span<const Triplet<eT>> triplets) {
    return SpMat(coo_to_csc(coo_type::from_triplets(n_rows, n_cols, triplets)));
  }

  index_t n_rows() const noexcept { return n_rows_; }
  index_t n_cols() const noexcept { return n_cols_; }

  index_t n_nonzero() const noexcept {
    return std::visit([](const auto& s) { return s.n_nonzero(); }, store_);
  }

  double density() const noexcept {
    const double area = static_cast<double>(n_rows_) * static_cast<double>(n_cols_);
    return area == 0 ? 0.0 : static_cast<double>(n_nonzero()) / area;
  }

  /// Element read from the current representation; never syncs, never inserts.
  eT get(index_t row, index_t col) const {
    if (row >= n_rows_ || col >= n_cols_) detail::throw_bounds("get", row, col, n_rows_, n_cols_);
    if (const auto* csc = std::get_if<csc_type>(&store_)) return csc->get(row, col);
    if (const auto* rbt = std::get_if<rbt_type>(&store_)) return rbt->lookup(row + col * n_rows_);
    return std::get<coo_type>(store_).get(row, col);
  }

  eT operator()(index_t row, index_t col) const { return get(row, col); }

  /// Element write through the RBT representation. Zero removes the element.
  void set(index_t row, index_t col, eT value) {
    if (row >= n_rows_ || col >= n_cols_) detail::throw_bounds("set", row, col, n_rows_, n_cols_);
    ensure_rbt();
    std::get<rbt_type>(store_).insert(row + col * n_rows_, value);
  }

  /// In-place `X(row, col) += delta`.
  void add_at(index_t row, index_t col, eT delta) {
    if (row >= n_rows_ || col >= n_cols_) detail::throw_bounds("add_at", row, col, n_rows_, n_cols_);
    ensure_rbt();
    auto& tree = std::get<rbt_type>(store_);
    const index_t index = row + col * n_rows_;
    tree.insert(index, tree.lookup(index) + delta);
  }

  void ensure_csc() const {
    if (std::holds_alternative<csc_type>(store_)) return;
    if (const auto* rbt = std::get_if<rbt_type>(&store_)) {
      store_ = rbt_to_csc(*rbt);
    } else {
      store_ = coo_to_csc(std::get<coo_type>(store_));
    }
    ++conversions_;
  }

  void ensure_rbt() const {
    if (std::holds_alternative<rbt_type>(store_)) return;
    ensure_csc();
    store_ = csc_to_rbt(std::get<csc_type>(store_));
    ++conversions_;
  }

  void ensure_coo() const {
    if (std::holds_alternative<coo_type>(store_)) return;
    ensure_csc();
    store_ = csc_to_coo(std::get<csc_type>(store_));
    ++conversions_;
  }

  const csc_type& csc() const {
    ensure_csc();
    return std::get<csc_type>(store_);
  }

  const coo_type& coo() const {
    ensure_coo();
    return std::get<coo_type>(store_);
  }

  const rbt_type& rbt() const {
    ensure_rbt();
    return std::get<rbt_type>(store_);
  }

  CscView<eT> view() const { return CscView<eT>(csc()); }

  /// Column-major walk over stored elements, f(row, col, value), from
  /// whichever representation is current.
  template <typename F>
  void for_each(F&& f) const {
    if (const auto* csc = std::get_if<csc_type>(&store_)) {
      csc->for_each(f);
    } else if (const auto* rbt = std::get_if<rbt_type>(&store_)) {
      const index_t n_rows = n_rows_;
      rbt->for_each([&](index_t index, eT value) { f(index % n_rows, index / n_rows, value); });
    } else {
      std::get<coo_type>(store_).for_each(f);
    }
  }

  std::vector<Triplet<eT>> triplets() const {
    std::vector<Triplet<eT>> out;
    out.reserve(n_nonzero());
    for_each([&](index_t r, index_t c, eT v) { out.push_back({r, c, v}); });
    return out;
  }

  // Diagnostics: which representation is authoritative, and how many
  // conversions this object has performed. Not part of the semantic contract.
  Format format() const noexcept { return static_cast<Format>(store_.index()); }
  std::uint64_t conversion_count() const noexcept { return conversions_; }

  /// Same shape and identical (row, col, value) multiset, in any state.
  friend bool operator==(const SpMat& a, const SpMat& b) {
    return a.n_rows_ == b.n_rows_ && a.n_cols_ == b.n_cols_ && a.n_nonzero() == b.n_nonzero() &&
           a.triplets() == b.triplets();
  }

  void print(std::ostream& os) const {
    os << "[matrix size: " << n_rows_ << "x" << n_cols_ << "; n_nonzero: " << n_nonzero()
       << "; density: " << density() * 100.0 << "%]\n";
    for_each([&](index_t r, index_t c, eT v) { os << "     (" << r << ", " << c << ")  " << v << '\n'; });
  }

  friend std::ostream& operator<<(std::ostream& os, const SpMat& m) {
    m.print(os);
    return os;
  }

 private:
  index_t n_rows_;
  index_t n_cols_;
  // Alternative order matches Format.
  mutable std::variant<csc_type, rbt_type, coo_type> store_;
  mutable std::uint64_t conversions_ = 0;
};

using sp_mat = SpMat<double>;

namespace detail {

/// k distinct values from [0, area), uniformly without replacement (Floyd),
/// returned sorted.
inline std::vector<index_t> sample_positions(index_t area, index_t k, std::mt19937_64& rng) {
  std::vector<index_t> positions;
  positions.reserve(k);
  std::unordered_set<index_t> chosen;
  chosen.reserve(k);
  for (index_t j = area - k; j < area; ++j) {
    const index_t t = std::uniform_int_distribution<index_t>(0, j)(rng);
    const index_t pick = chosen.insert(t).second ? t : j;
    if (pick == j) chosen.insert(j);
    positions.push_back(pick);
  }
  std::sort(positions.begin(), positions.end());
  return positions;
}

/// Uniform on (0, 1]: 53 random mantissa bits give [0, 1) exactly, flipped.
inline double uniform_open_closed(std::mt19937_64& rng) {
  return 1.0 - static_cast<double>(rng() >> 11) * 0x1.0p-53;
}

}  // namespace detail

/// Ones on the main diagonal; N = min(n_rows, n_cols).
template <typename eT = double>
SpMat<eT> speye(index_t n_rows, index_t n_cols) {
  if (n_rows == 0 || n_cols == 0) {
    throw DimensionError("speye: dimensions must be positive, got " + std::to_string(n_rows) + "x" +
                         std::to_string(n_cols));
  }
  const index_t k = std::min(n_rows, n_cols);
  std::vector<eT> values(k, eT{1});
  std::vector<index_t> rows(k);
  std::vector<index_t> col_offsets(n_cols + 1);
  for (index_t i = 0; i < k; ++i) rows[i] = i;
  for (index_t j = 0; j <= n_cols; ++j) col_offsets[j] = std::min(j, k);
  return SpMat<eT>(CscStorage<eT>(n_rows, n_cols, std::move(values), std::move(rows), std::move(col_offsets)));
}

/// Exactly round(density * n_rows * n_cols) distinct positions, chosen
/// uniformly without replacement (Floyd's sampler), with values uniform on
/// (0, 1]. Deterministic for a given seed; CSC state.
template <typename eT = double>
SpMat<eT> sprandu(index_t n_rows, index_t n_cols, double density, std::uint64_t seed) {
  if (!(density >= 0.0 && density <= 1.0)) {
    throw std::invalid_argument("sprandu: density must lie in [0, 1], got " + std::to_string(density));
  }
  const index_t area = detail::checked_area(n_rows, n_cols);
  const auto target = static_cast<index_t>(std::llround(density * static_cast<double>(area)));
  const index_t k = std::min(target, area);

  std::mt19937_64 rng(seed);
  const std::vector<index_t> positions = detail::sample_positions(area, k, rng);

  std::vector<eT> values(k);
  std::vector<index_t> rows(k);
  std::vector<index_t> col_offsets(n_cols + 1, 0);
  for (index_t i = 0; i < k; ++i) {
    values[i] = static_cast<eT>(detail::uniform_open_closed(rng));
    rows[i] = positions[i] % n_rows;
    ++col_offsets[positions[i] / n_rows + 1];
  }
  for (index_t j = 1; j <= n_cols; ++j) col_offsets[j] += col_offsets[j - 1];
  return SpMat<eT>(CscStorage<eT>(n_rows, n_cols, std::move(values), std::move(rows), std::move(col_offsets)));
}

}  // namespace hsparse
