#pragma once

// The three underlying storage formats:
//
//   CscStorage  compressed sparse column; the canonical compute format
//   CooStorage  column-major sorted coordinate list; bulk coordinate transforms
//   RbtStorage  red-black tree keyed on linear index; incremental construction
//
// All three share the same conventions: zero-based indices, column-major
// element order, and no explicitly stored zeros.

#include <algorithm>
#include <cstdint>
#include <limits>
#include <numeric>
#include <optional>
#include <span>
#include <string>
#include <utility>
#include <vector>

#include "hsparse/common.hpp"

namespace hsparse {

namespace detail {

// Bumps the matrix-allocation counter whenever the owning storage is copied.
struct CopyTally {
  CopyTally() = default;
  CopyTally(const CopyTally&) { ++counters().matrix_allocations; }
  CopyTally& operator=(const CopyTally&) {
    ++counters().matrix_allocations;
    return *this;
  }
  CopyTally(CopyTally&&) noexcept = default;
  CopyTally& operator=(CopyTally&&) noexcept = default;
};

// Grow a slot array to exactly `new_size` elements (reserve is exact in
// practice; resize then stays within that capacity).
template <typename T>
void grow_exact(std::vector<T>& v, std::size_t new_size) {
  v.reserve(new_size);
  v.resize(new_size);
}

}  // namespace detail

// ---------------------------------------------------------------------------
// CSC
// ---------------------------------------------------------------------------

/// Compressed sparse column storage.
///
/// `values` and `rows` may be over-allocated: only the first n_nonzero()
/// slots are meaningful, the remainder is growth slack. When an insertion
/// runs out of slack the arrays grow by `storage_chunk` elements.
template <typename eT = double>
class CscStorage {
 public:
  using value_type = eT;

  CscStorage() : col_offsets_(1, 0) {}

  CscStorage(index_t n_rows, index_t n_cols)
      : n_rows_(n_rows), n_cols_(n_cols), col_offsets_(n_cols + 1, 0) {
    detail::checked_area(n_rows, n_cols);
  }

  /// Adopts prebuilt arrays. `values`/`rows` may be longer than
  /// col_offsets.back(); the tail is treated as slack.
  CscStorage(index_t n_rows, index_t n_cols, std::vector<eT> values, std::vector<index_t> rows,
             std::vector<index_t> col_offsets)
      : n_rows_(n_rows),
        n_cols_(n_cols),
        values_(std::move(values)),
        rows_(std::move(rows)),
        col_offsets_(std::move(col_offsets)) {
    detail::checked_area(n_rows, n_cols);
    if (col_offsets_.size() != n_cols_ + 1 || values_.size() != rows_.size() ||
        col_offsets_.back() > values_.size()) {
      throw std::invalid_argument("CscStorage: inconsistent array lengths");
    }
    n_nonzero_ = col_offsets_.back();
    if (!values_.empty()) ++counters().matrix_allocations;
#ifndef NDEBUG
    if (auto why = find_violation()) throw std::logic_error("CscStorage: " + *why);
#endif
  }

  index_t n_rows() const noexcept { return n_rows_; }
  index_t n_cols() const noexcept { return n_cols_; }
  index_t n_nonzero() const noexcept { return n_nonzero_; }
  index_t capacity() const noexcept { return values_.size(); }

  std::span<const eT> values() const noexcept { return {values_.data(), n_nonzero_}; }
  std::span<const index_t> rows() const noexcept { return {rows_.data(), n_nonzero_}; }
  std::span<const index_t> col_offsets() const noexcept { return col_offsets_; }

  /// Stored value at (row, col), or zero. Binary search within the column.
  eT get(index_t row, index_t col) const {
    if (row >= n_rows_ || col >= n_cols_) detail::throw_bounds("csc get", row, col, n_rows_, n_cols_);
    const auto first = rows_.begin() + static_cast<std::ptrdiff_t>(col_offsets_[col]);
    const auto last = rows_.begin() + static_cast<std::ptrdiff_t>(col_offsets_[col + 1]);
    const auto it = std::lower_bound(first, last, row);
    if (it == last || *it != row) return eT{};
    return values_[static_cast<std::size_t>(it - rows_.begin())];
  }

  /// Sets (row, col) to `value`, shifting later elements as needed. A zero
  /// value removes any stored element at that position.
  void insert(index_t row, index_t col, eT value) {
    if (row >= n_rows_ || col >= n_cols_) {
      detail::throw_bounds("csc insert", row, col, n_rows_, n_cols_);
    }
    const auto first = rows_.begin() + static_cast<std::ptrdiff_t>(col_offsets_[col]);
    const auto last = rows_.begin() + static_cast<std::ptrdiff_t>(col_offsets_[col + 1]);
    const auto it = std::lower_bound(first, last, row);
    const auto pos = static_cast<std::size_t>(it - rows_.begin());
    const bool present = it != last && *it == row;

    if (present) {
      if (value != eT{}) {
        values_[pos] = value;
        return;
      }
      std::copy(values_.begin() + pos + 1, values_.begin() + n_nonzero_, values_.begin() + pos);
      std::copy(rows_.begin() + pos + 1, rows_.begin() + n_nonzero_, rows_.begin() + pos);
      --n_nonzero_;
      for (index_t c = col + 1; c <= n_cols_; ++c) --col_offsets_[c];
      return;
    }
    if (value == eT{}) return;

    if (n_nonzero_ == values_.size()) grow();
    std::copy_backward(values_.begin() + pos, values_.begin() + n_nonzero_,
                       values_.begin() + n_nonzero_ + 1);
    std::copy_backward(rows_.begin() + pos, rows_.begin() + n_nonzero_,
                       rows_.begin() + n_nonzero_ + 1);
    values_[pos] = value;
    rows_[pos] = row;
    ++n_nonzero_;
    for (index_t c = col + 1; c <= n_cols_; ++c) ++col_offsets_[c];
  }

  /// Visits stored elements in column-major order as f(row, col, value).
  template <typename F>
  void for_each(F&& f) const {
    for (index_t c = 0; c < n_cols_; ++c) {
      for (index_t k = col_offsets_[c]; k < col_offsets_[c + 1]; ++k) f(rows_[k], c, values_[k]);
    }
  }

  /// Drops growth slack.
  void shrink_to_fit() {
    if (values_.size() == n_nonzero_) return;
    values_.resize(n_nonzero_);
    rows_.resize(n_nonzero_);
    values_.shrink_to_fit();
    rows_.shrink_to_fit();
  }

  /// First violated invariant, if any.
  std::optional<std::string> find_violation() const {
    if (col_offsets_.size() != n_cols_ + 1) return "col_offsets has wrong length";
    if (col_offsets_.front() != 0) return "col_offsets[0] != 0";
    if (col_offsets_.back() != n_nonzero_) return "col_offsets[n_cols] != n_nonzero";
    if (values_.size() < n_nonzero_ || rows_.size() != values_.size()) return "array length mismatch";
    for (index_t c = 0; c < n_cols_; ++c) {
      if (col_offsets_[c] > col_offsets_[c + 1]) return "col_offsets decreases at column " + std::to_string(c);
      for (index_t k = col_offsets_[c]; k < col_offsets_[c + 1]; ++k) {
        if (rows_[k] >= n_rows_) return "row index out of range at slot " + std::to_string(k);
        if (k > col_offsets_[c] && rows_[k - 1] >= rows_[k]) {
          return "rows not strictly increasing in column " + std::to_string(c);
        }
        if (values_[k] == eT{}) return "explicit zero stored at slot " + std::to_string(k);
      }
    }
    return std::nullopt;
  }

 private:
  void grow() {
    const std::size_t new_cap = values_.size() + storage_chunk;
    detail::grow_exact(values_, new_cap);
    detail::grow_exact(rows_, new_cap);
    ++counters().matrix_allocations;
  }

  index_t n_rows_ = 0;
  index_t n_cols_ = 0;
  index_t n_nonzero_ = 0;
  std::vector<eT> values_;
  std::vector<index_t> rows_;
  std::vector<index_t> col_offsets_;
  detail::CopyTally tally_;
};

// ---------------------------------------------------------------------------
// COO
// ---------------------------------------------------------------------------

/// Coordinate list held as three parallel arrays, sorted column-major.
///
/// append() is the bulk-load path: it accepts entries in any order and marks
/// the storage non-canonical when order (or zero-freedom) is broken;
/// canonicalize() restores the invariants. Readers require canonical storage.
template <typename eT = double>
class CooStorage {
 public:
  using value_type = eT;

  CooStorage() = default;

  CooStorage(index_t n_rows, index_t n_cols) : n_rows_(n_rows), n_cols_(n_cols) {
    detail::checked_area(n_rows, n_cols);
  }

  /// Adopts canonical arrays.
  CooStorage(index_t n_rows, index_t n_cols, std::vector<eT> values, std::vector<index_t> rows,
             std::vector<index_t> columns)
      : n_rows_(n_rows),
        n_cols_(n_cols),
        n_nonzero_(values.size()),
        values_(std::move(values)),
        rows_(std::move(rows)),
        cols_(std::move(columns)) {
    detail::checked_area(n_rows, n_cols);
    if (rows_.size() != n_nonzero_ || cols_.size() != n_nonzero_) {
      throw std::invalid_argument("CooStorage: inconsistent array lengths");
    }
    if (!values_.empty()) ++counters().matrix_allocations;
#ifndef NDEBUG
    if (auto why = find_violation()) throw std::logic_error("CooStorage: " + *why);
#endif
  }

  /// Batch construction. Duplicate positions resolve to the last occurrence;
  /// zeros are dropped after duplicate resolution.
  static CooStorage from_triplets(index_t n_rows, index_t n_cols,
                                  std::span<const Triplet<eT>> triplets) {
    CooStorage coo(n_rows, n_cols);
    for (std::size_t i = 0; i < triplets.size(); ++i) {
      const auto& t = triplets[i];
      if (t.row >= n_rows || t.col >= n_cols) {
        throw BoundsError("triplet #" + std::to_string(i) + " (" + std::to_string(t.row) + ", " +
                          std::to_string(t.col) + ") outside " + std::to_string(n_rows) + "x" +
                          std::to_string(n_cols) + " matrix");
      }
    }
    if (!triplets.empty()) coo.reserve(triplets.size());
    for (const auto& t : triplets) coo.append(t.row, t.col, t.value);
    coo.canonicalize();
    return coo;
  }

  index_t n_rows() const noexcept { return n_rows_; }
  index_t n_cols() const noexcept { return n_cols_; }
  index_t n_nonzero() const noexcept { return n_nonzero_; }
  index_t capacity() const noexcept { return values_.size(); }
  bool canonical() const noexcept { return canonical_; }

  std::span<const eT> values() const noexcept { return {values_.data(), n_nonzero_}; }
  std::span<const index_t> rows() const noexcept { return {rows_.data(), n_nonzero_}; }
  std::span<const index_t> columns() const noexcept { return {cols_.data(), n_nonzero_}; }

  /// Binary search on (column, row). Requires canonical storage.
  eT get(index_t row, index_t col) const {
    if (row >= n_rows_ || col >= n_cols_) detail::throw_bounds("coo get", row, col, n_rows_, n_cols_);
    require_canonical();
    const index_t pos = lower_bound(row, col);
    if (pos < n_nonzero_ && rows_[pos] == row && cols_[pos] == col) return values_[pos];
    return eT{};
  }

  /// Sorted insertion (shifting later entries). Zero removes.
  void insert(index_t row, index_t col, eT value) {
    if (row >= n_rows_ || col >= n_cols_) {
      detail::throw_bounds("coo insert", row, col, n_rows_, n_cols_);
    }
    require_canonical();
    const index_t pos = lower_bound(row, col);
    const bool present = pos < n_nonzero_ && rows_[pos] == row && cols_[pos] == col;
    if (present) {
      if (value != eT{}) {
        values_[pos] = value;
        return;
      }
      erase_slot(pos);
      return;
    }
    if (value == eT{}) return;
    if (n_nonzero_ == values_.size()) grow(values_.size() + storage_chunk);
    std::copy_backward(values_.begin() + pos, values_.begin() + n_nonzero_, values_.begin() + n_nonzero_ + 1);
    std::copy_backward(rows_.begin() + pos, rows_.begin() + n_nonzero_, rows_.begin() + n_nonzero_ + 1);
    std::copy_backward(cols_.begin() + pos, cols_.begin() + n_nonzero_, cols_.begin() + n_nonzero_ + 1);
    values_[pos] = value;
    rows_[pos] = row;
    cols_[pos] = col;
    ++n_nonzero_;
  }

  /// Appends without ordering. Storage stays canonical only if the entry is
  /// nonzero and lies strictly past the current last entry.
  void append(index_t row, index_t col, eT value) {
    if (row >= n_rows_ || col >= n_cols_) {
      detail::throw_bounds("coo append", row, col, n_rows_, n_cols_);
    }
    if (canonical_) {
      const bool past_last = n_nonzero_ == 0 || cols_[n_nonzero_ - 1] < col ||
                             (cols_[n_nonzero_ - 1] == col && rows_[n_nonzero_ - 1] < row);
      canonical_ = past_last && value != eT{};
    }
    if (n_nonzero_ == values_.size()) grow(values_.size() + storage_chunk);
    values_[n_nonzero_] = value;
    rows_[n_nonzero_] = row;
    cols_[n_nonzero_] = col;
    ++n_nonzero_;
  }

  /// Ensures room for `n` entries without further growth.
  void reserve(index_t n) {
    if (n > values_.size()) grow(n);
  }

  /// Sorts column-major, resolves duplicates (last wins) and drops zeros.
  void canonicalize() {
    if (canonical_) return;
    std::vector<index_t> order(n_nonzero_);
    std::iota(order.begin(), order.end(), index_t{0});
    std::stable_sort(order.begin(), order.end(), [this](index_t a, index_t b) {
      return cols_[a] != cols_[b] ? cols_[a] < cols_[b] : rows_[a] < rows_[b];
    });
    auto same_position = [this](index_t a, index_t b) {
      return rows_[a] == rows_[b] && cols_[a] == cols_[b];
    };
    index_t kept = 0;
    for (index_t k = 0; k < n_nonzero_; ++k) {
      const index_t i = order[k];
      if (k + 1 < n_nonzero_ && same_position(i, order[k + 1])) continue;
      if (values_[i] != eT{}) ++kept;
    }
    std::vector<eT> values(kept);
    std::vector<index_t> rows(kept);
    std::vector<index_t> cols(kept);
    index_t out = 0;
    for (index_t k = 0; k < n_nonzero_; ++k) {
      const index_t i = order[k];
      if (k + 1 < n_nonzero_ && same_position(i, order[k + 1])) continue;
      if (values_[i] == eT{}) continue;
      values[out] = values_[i];
      rows[out] = rows_[i];
      cols[out] = cols_[i];
      ++out;
    }
    if (kept != 0) ++counters().matrix_allocations;
    values_ = std::move(values);
    rows_ = std::move(rows);
    cols_ = std::move(cols);
    n_nonzero_ = kept;
    canonical_ = true;
  }

  /// Rewrites every coordinate through f(row, col) -> {row', col'} and
  /// changes the shape. The result is non-canonical until canonicalize().
  template <typename F>
  void remap(index_t new_rows, index_t new_cols, F&& f) {
    detail::checked_area(new_rows, new_cols);
    for (index_t k = 0; k < n_nonzero_; ++k) {
      const auto [r, c] = f(rows_[k], cols_[k]);
      rows_[k] = r;
      cols_[k] = c;
    }
    n_rows_ = new_rows;
    n_cols_ = new_cols;
    canonical_ = n_nonzero_ == 0;
  }

  /// Exchanges the rows and columns arrays (and the shape).
  void swap_axes() {
    std::swap(rows_, cols_);
    std::swap(n_rows_, n_cols_);
    canonical_ = n_nonzero_ == 0;
  }

  template <typename F>
  void for_each(F&& f) const {
    require_canonical();
    for (index_t k = 0; k < n_nonzero_; ++k) f(rows_[k], cols_[k], values_[k]);
  }

  std::optional<std::string> find_violation() const {
    for (index_t k = 0; k < n_nonzero_; ++k) {
      if (rows_[k] >= n_rows_ || cols_[k] >= n_cols_) return "index out of range at slot " + std::to_string(k);
      if (values_[k] == eT{}) return "explicit zero stored at slot " + std::to_string(k);
      if (k > 0) {
        const bool ordered = cols_[k - 1] < cols_[k] || (cols_[k - 1] == cols_[k] && rows_[k - 1] < rows_[k]);
        if (!ordered) return "entries not strictly column-major at slot " + std::to_string(k);
      }
    }
    return std::nullopt;
  }

 private:
  void require_canonical() const {
    if (!canonical_) throw std::logic_error("CooStorage: read before canonicalize()");
  }

  index_t lower_bound(index_t row, index_t col) const {
    index_t lo = 0;
    index_t hi = n_nonzero_;
    while (lo < hi) {
      const index_t mid = lo + (hi - lo) / 2;
      const bool less = cols_[mid] < col || (cols_[mid] == col && rows_[mid] < row);
      if (less) lo = mid + 1; else hi = mid;
    }
    return lo;
  }

  void erase_slot(index_t pos) {
    std::copy(values_.begin() + pos + 1, values_.begin() + n_nonzero_, values_.begin() + pos);
    std::copy(rows_.begin() + pos + 1, rows_.begin() + n_nonzero_, rows_.begin() + pos);
    std::copy(cols_.begin() + pos + 1, cols_.begin() + n_nonzero_, cols_.begin() + pos);
    --n_nonzero_;
  }

  void grow(std::size_t new_cap) {
    detail::grow_exact(values_, new_cap);
    detail::grow_exact(rows_, new_cap);
    detail::grow_exact(cols_, new_cap);
    ++counters().matrix_allocations;
  }

  index_t n_rows_ = 0;
  index_t n_cols_ = 0;
  index_t n_nonzero_ = 0;
  std::vector<eT> values_;
  std::vector<index_t> rows_;
  std::vector<index_t> cols_;
  bool canonical_ = true;
  detail::CopyTally tally_;
};

// ---------------------------------------------------------------------------
// Red-black tree
// ---------------------------------------------------------------------------

/// Red-black tree of (linear index, value) nodes, index = row + col * n_rows.
///
/// Nodes live in a contiguous arena and refer to their children by slot
/// number; there are no parent links, so insertion and removal keep the
/// descent path on a small fixed-size stack for rebalancing.
///
/// An index at or past every index inserted so far takes the append fast
/// path: the placement search is skipped (the new node always lands at the
/// end of the right spine) while rebalancing still runs.
template <typename eT = double>
class RbtStorage {
 public:
  using value_type = eT;

  RbtStorage() = default;

  RbtStorage(index_t n_rows, index_t n_cols)
      : n_rows_(n_rows), n_cols_(n_cols), area_(detail::checked_area(n_rows, n_cols)) {}

  index_t n_rows() const noexcept { return n_rows_; }
  index_t n_cols() const noexcept { return n_cols_; }
  index_t n_nonzero() const noexcept { return count_; }
  bool empty() const noexcept { return root_ == nil; }

  index_t linear_index(index_t row, index_t col) const noexcept { return row + col * n_rows_; }

  /// Largest index inserted so far; never decreases.
  std::optional<index_t> max_index_hint() const noexcept {
    if (append_floor_ == 0) return std::nullopt;
    return append_floor_ - 1;
  }

  /// Inserts or overwrites. A zero value removes the node instead.
  void insert(index_t index, eT value) {
    check_index(index);
    if (value == eT{}) {
      erase(index);
      return;
    }
    link_t path[max_depth];
    int depth = 0;
    bool went_left = false;
    link_t cur = root_;
    if (index >= append_floor_) {
      ++fast_path_inserts_;
      while (cur != nil) {
        path[depth++] = cur;
        cur = nodes_[cur].right;
      }
    } else {
      while (cur != nil) {
        Node& n = nodes_[cur];
        if (index == n.index) {
          n.value = value;
          return;
        }
        path[depth++] = cur;
        went_left = index < n.index;
        cur = went_left ? n.left : n.right;
      }
    }
    const link_t x = make_node(index, value);
    if (depth == 0) {
      root_ = x;
    } else if (went_left) {
      nodes_[path[depth - 1]].left = x;
    } else {
      nodes_[path[depth - 1]].right = x;
    }
    ++count_;
    append_floor_ = std::max(append_floor_, index + 1);
    fix_after_insert(x, path, depth);
  }

  /// Stored value or zero.
  eT lookup(index_t index) const {
    check_index(index);
    link_t cur = root_;
    while (cur != nil) {
      ++node_visits_;
      const Node& n = nodes_[cur];
      if (index == n.index) return n.value;
      cur = index < n.index ? n.left : n.right;
    }
    return eT{};
  }

  /// Removes the node with this index; absent indices are a no-op.
  void erase(index_t index) {
    check_index(index);
    link_t path[max_depth];
    int depth = 0;
    link_t z = root_;
    while (z != nil && nodes_[z].index != index) {
      path[depth++] = z;
      z = index < nodes_[z].index ? nodes_[z].left : nodes_[z].right;
    }
    if (z == nil) return;

    // Two children: move the in-order successor's payload into z and remove
    // the successor node instead.
    link_t y = z;
    if (nodes_[z].left != nil && nodes_[z].right != nil) {
      path[depth++] = z;
      y = nodes_[z].right;
      while (nodes_[y].left != nil) {
        path[depth++] = y;
        y = nodes_[y].left;
      }
      nodes_[z].index = nodes_[y].index;
      nodes_[z].value = nodes_[y].value;
    }

    const link_t x = nodes_[y].left != nil ? nodes_[y].left : nodes_[y].right;
    const link_t parent = depth > 0 ? path[depth - 1] : nil;
    const bool x_is_left = parent != nil && nodes_[parent].left == y;
    relink(parent, y, x);
    const bool removed_black = !nodes_[y].red;
    release_node(y);
    --count_;
    if (removed_black) fix_after_erase(x, x_is_left, path, depth);
  }

  void clear() {
    nodes_.clear();
    free_.clear();
    root_ = nil;
    count_ = 0;
  }

  /// Pre-sizes the node arena.
  void reserve(index_t n) {
    if (n > nodes_.capacity()) {
      nodes_.reserve(n);
      ++counters().matrix_allocations;
    }
  }

  /// In-order traversal, f(index, value), i.e. column-major element order.
  template <typename F>
  void for_each(F&& f) const {
    const Node* nodes = nodes_.data();
    link_t stack[max_depth];
    int top = 0;
    link_t cur = root_;
    std::uint64_t visited = 0;
    while (cur != nil || top > 0) {
      while (cur != nil) {
        stack[top++] = cur;
        cur = nodes[cur].left;
      }
      cur = stack[--top];
      ++visited;
      const Node& n = nodes[cur];
      f(n.index, n.value);
      cur = n.right;
      // A childless right child is next in order; visit it without the
      // push/pop round trip (about half the nodes of a red-black tree).
      if (cur != nil && nodes[cur].left == nil && nodes[cur].right == nil) {
        ++visited;
        f(nodes[cur].index, nodes[cur].value);
        cur = nil;
      }
    }
    node_visits_ += visited;
  }

  /// Number of node levels on the longest root-to-leaf path.
  int height() const { return subtree_height(root_); }

  /// Insertions that skipped the placement search.
  std::uint64_t fast_path_inserts() const noexcept { return fast_path_inserts_; }
  /// Nodes touched by lookups and traversals.
  std::uint64_t node_visits() const noexcept { return node_visits_; }

  /// Full audit: BST order, root colour, red-red edges, black height, count.
  std::optional<std::string> find_violation() const {
    if (is_red(root_)) return std::string("root is red");
    std::optional<std::string> problem;
    index_t seen = 0;
    std::optional<index_t> previous;
    for_each([&](index_t index, eT value) {
      ++seen;
      if (problem) return;
      if (index >= area_) problem = "index " + std::to_string(index) + " out of range";
      else if (value == eT{}) problem = "zero value stored at index " + std::to_string(index);
      else if (previous && *previous >= index) problem = "in-order indices not increasing at " + std::to_string(index);
      previous = index;
    });
    if (problem) return problem;
    if (seen != count_) return "node count " + std::to_string(seen) + " != n_nonzero " + std::to_string(count_);
    if (black_height(root_, problem) < 0) return problem;
    return std::nullopt;
  }

 private:
  using link_t = std::uint32_t;
  static constexpr link_t nil = std::numeric_limits<link_t>::max();
  // Red-black height is at most 2*log2(N+1) <= 64 for 32-bit slot numbers;
  // erase may push one extra level during a sibling rotation.
  static constexpr int max_depth = 128;

  struct Node {
    index_t index;
    eT value;
    link_t left;
    link_t right;
    bool red;
  };

  void check_index(index_t index) const {
    if (index >= area_) {
      throw BoundsError("rbt: linear index " + std::to_string(index) + " outside " +
                        std::to_string(n_rows_) + "x" + std::to_string(n_cols_) + " matrix");
    }
  }

  bool is_red(link_t n) const noexcept { return n != nil && nodes_[n].red; }

  link_t make_node(index_t index, eT value) {
    if (!free_.empty()) {
      const link_t slot = free_.back();
      free_.pop_back();
      nodes_[slot] = Node{index, value, nil, nil, true};
      return slot;
    }
    if (nodes_.size() >= nil) throw std::length_error("rbt: node arena exhausted");
    if (nodes_.size() == nodes_.capacity()) ++counters().matrix_allocations;
    nodes_.push_back(Node{index, value, nil, nil, true});
    return static_cast<link_t>(nodes_.size() - 1);
  }

  void release_node(link_t n) {
    if (n + 1 == nodes_.size()) {
      nodes_.pop_back();
    } else {
      free_.push_back(n);
    }
  }

  link_t rotate_left(link_t x) {
    const link_t y = nodes_[x].right;
    nodes_[x].right = nodes_[y].left;
    nodes_[y].left = x;
    return y;
  }

  link_t rotate_right(link_t x) {
    const link_t y = nodes_[x].left;
    nodes_[x].left = nodes_[y].right;
    nodes_[y].right = x;
    return y;
  }

  // Points parent's link (or the root) that referred to `from` at `to`.
  void relink(link_t parent, link_t from, link_t to) {
    if (parent == nil) {
      root_ = to;
    } else if (nodes_[parent].left == from) {
      nodes_[parent].left = to;
    } else {
      nodes_[parent].right = to;
    }
  }

  // path[0 .. depth) holds the ancestors of x, root first.
  void fix_after_insert(link_t x, link_t* path, int depth) {
    while (depth >= 2 && is_red(path[depth - 1])) {
      link_t p = path[depth - 1];
      const link_t g = path[depth - 2];
      const link_t gg = depth >= 3 ? path[depth - 3] : nil;
      if (p == nodes_[g].left) {
        const link_t uncle = nodes_[g].right;
        if (is_red(uncle)) {
          nodes_[p].red = false;
          nodes_[uncle].red = false;
          nodes_[g].red = true;
          x = g;
          depth -= 2;
          continue;
        }
        if (x == nodes_[p].right) {
          nodes_[g].left = rotate_left(p);
          p = x;
        }
        relink(gg, g, rotate_right(g));
      } else {
        const link_t uncle = nodes_[g].left;
        if (is_red(uncle)) {
          nodes_[p].red = false;
          nodes_[uncle].red = false;
          nodes_[g].red = true;
          x = g;
          depth -= 2;
          continue;
        }
        if (x == nodes_[p].left) {
          nodes_[g].right = rotate_right(p);
          p = x;
        }
        relink(gg, g, rotate_left(g));
      }
      nodes_[p].red = false;
      nodes_[g].red = true;
      break;
    }
    nodes_[root_].red = false;
  }

  // x carries an extra black; path[0 .. depth) are its ancestors.
  void fix_after_erase(link_t x, bool x_is_left, link_t* path, int depth) {
    while (x != root_ && !is_red(x)) {
      const link_t p = path[depth - 1];
      const link_t above = depth >= 2 ? path[depth - 2] : nil;
      if (x_is_left) {
        link_t w = nodes_[p].right;
        if (is_red(w)) {
          nodes_[w].red = false;
          nodes_[p].red = true;
          relink(above, p, rotate_left(p));
          path[depth - 1] = w;
          path[depth++] = p;
          w = nodes_[p].right;
        }
        if (!is_red(nodes_[w].left) && !is_red(nodes_[w].right)) {
          nodes_[w].red = true;
          x = p;
          --depth;
          if (depth > 0) x_is_left = nodes_[path[depth - 1]].left == x;
          continue;
        }
        if (!is_red(nodes_[w].right)) {
          nodes_[nodes_[w].left].red = false;
          nodes_[w].red = true;
          nodes_[p].right = rotate_right(w);
          w = nodes_[p].right;
        }
        nodes_[w].red = nodes_[p].red;
        nodes_[p].red = false;
        nodes_[nodes_[w].right].red = false;
        relink(depth >= 2 ? path[depth - 2] : nil, p, rotate_left(p));
      } else {
        link_t w = nodes_[p].left;
        if (is_red(w)) {
          nodes_[w].red = false;
          nodes_[p].red = true;
          relink(above, p, rotate_right(p));
          path[depth - 1] = w;
          path[depth++] = p;
          w = nodes_[p].left;
        }
        if (!is_red(nodes_[w].left) && !is_red(nodes_[w].right)) {
          nodes_[w].red = true;
          x = p;
          --depth;
          if (depth > 0) x_is_left = nodes_[path[depth - 1]].left == x;
          continue;
        }
        if (!is_red(nodes_[w].left)) {
          nodes_[nodes_[w].right].red = false;
          nodes_[w].red = true;
          nodes_[p].left = rotate_left(w);
          w = nodes_[p].left;
        }
        nodes_[w].red = nodes_[p].red;
        nodes_[p].red = false;
        nodes_[nodes_[w].left].red = false;
        relink(depth >= 2 ? path[depth - 2] : nil, p, rotate_right(p));
      }
      x = root_;
      break;
    }
    if (x != nil) nodes_[x].red = false;
  }

  int subtree_height(link_t n) const {
    if (n == nil) return 0;
    return 1 + std::max(subtree_height(nodes_[n].left), subtree_height(nodes_[n].right));
  }

  // Black height of the subtree, or -1 with `problem` set.
  int black_height(link_t n, std::optional<std::string>& problem) const {
    if (n == nil) return 1;
    const Node& node = nodes_[n];
    if (node.red && (is_red(node.left) || is_red(node.right))) {
      problem = "red node " + std::to_string(node.index) + " has a red child";
      return -1;
    }
    const int lh = black_height(node.left, problem);
    if (lh < 0) return -1;
    const int rh = black_height(node.right, problem);
    if (rh < 0) return -1;
    if (lh != rh) {
      problem = "unequal black height below " + std::to_string(node.index);
      return -1;
    }
    return lh + (node.red ? 0 : 1);
  }

  index_t n_rows_ = 0;
  index_t n_cols_ = 0;
  index_t area_ = 0;
  std::vector<Node> nodes_;
  std::vector<link_t> free_;
  link_t root_ = nil;
  index_t count_ = 0;
  index_t append_floor_ = 0;
  std::uint64_t fast_path_inserts_ = 0;
  mutable std::uint64_t node_visits_ = 0;
  detail::CopyTally tally_;
};

}  // namespace hsparse
