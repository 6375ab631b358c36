#pragma once

// Conversions between the storage formats. All four are pure: the input is
// left untouched and a new representation is returned.
//
//   coo_to_csc  O(N + n_cols)   rows/values carried over, offsets by counting
//   csc_to_coo  O(N + n_cols)   offsets unpacked into a columns array
//   csc_to_rbt  O(N log N)      every insertion takes the append fast path
//   rbt_to_csc  O(N log N)      in-order walk, index decoded to (row, col)
//
// Debug builds audit every result.

#include <stdexcept>
#include <vector>

#include "hsparse/storage.hpp"

namespace hsparse {

namespace detail {

template <typename Storage>
void audit_conversion([[maybe_unused]] const Storage& s, [[maybe_unused]] const char* what) {
#ifndef NDEBUG
  if (auto why = s.find_violation()) throw std::logic_error(std::string(what) + ": " + *why);
#endif
}

}  // namespace detail

template <typename eT>
CscStorage<eT> coo_to_csc(const CooStorage<eT>& coo) {
  if (!coo.canonical()) throw std::logic_error("coo_to_csc: input not canonical");
  const index_t n = coo.n_nonzero();
  const index_t n_cols = coo.n_cols();
  const auto columns = coo.columns();

  std::vector<index_t> col_offsets(n_cols + 1, 0);
  for (index_t i = 0; i < n; ++i) ++col_offsets[columns[i] + 1];
  for (index_t j = 1; j <= n_cols; ++j) col_offsets[j] += col_offsets[j - 1];
  counters().conversion_writes += n;

  std::vector<eT> values(coo.values().begin(), coo.values().end());
  std::vector<index_t> rows(coo.rows().begin(), coo.rows().end());
  CscStorage<eT> csc(coo.n_rows(), n_cols, std::move(values), std::move(rows), std::move(col_offsets));
  detail::audit_conversion(csc, "coo_to_csc");
  return csc;
}

template <typename eT>
CooStorage<eT> csc_to_coo(const CscStorage<eT>& csc) {
  const index_t n = csc.n_nonzero();
  const auto col_offsets = csc.col_offsets();

  std::vector<index_t> columns(n);
  index_t k = 0;
  for (index_t j = 0; j < csc.n_cols(); ++j) {
    const index_t m = col_offsets[j + 1] - col_offsets[j];
    for (index_t l = 0; l < m; ++l) columns[k + l] = j;
    k += m;
  }
  counters().conversion_writes += n;

  std::vector<eT> values(csc.values().begin(), csc.values().end());
  std::vector<index_t> rows(csc.rows().begin(), csc.rows().end());
  CooStorage<eT> coo(csc.n_rows(), csc.n_cols(), std::move(values), std::move(rows), std::move(columns));
  detail::audit_conversion(coo, "csc_to_coo");
  return coo;
}

template <typename eT>
RbtStorage<eT> csc_to_rbt(const CscStorage<eT>& csc) {
  const index_t n_rows = csc.n_rows();
  const auto values = csc.values();
  const auto rows = csc.rows();
  const auto col_offsets = csc.col_offsets();

  RbtStorage<eT> tree(n_rows, csc.n_cols());
  tree.reserve(csc.n_nonzero());
  for (index_t j = 0; j < csc.n_cols(); ++j) {
    const index_t start = col_offsets[j];
    const index_t end = col_offsets[j + 1];
    for (index_t k = start; k < end; ++k) tree.insert(rows[k] + j * n_rows, values[k]);
  }
  detail::audit_conversion(tree, "csc_to_rbt");
  return tree;
}

/// Output arrays are sized exactly at N (no growth slack).
template <typename eT>
CscStorage<eT> rbt_to_csc(const RbtStorage<eT>& tree) {
  const index_t n = tree.n_nonzero();
  const index_t n_rows = tree.n_rows();
  const index_t n_cols = tree.n_cols();

  // reserve + push_back: exact capacity without zero-filling first.
  std::vector<eT> values;
  std::vector<index_t> rows;
  values.reserve(n);
  rows.reserve(n);
  std::vector<index_t> col_offsets(n_cols + 1, 0);

  // In-order indices are increasing, so the column only moves forward: the
  // division/modulo decode runs once per column change, and row is the
  // offset from the current column's first index otherwise.
  index_t* counts = col_offsets.data() + 1;
  index_t col = 0;
  index_t col_start = 0;
  tree.for_each([&](index_t index, eT value) {
    if (index - col_start >= n_rows) {
      col = index / n_rows;
      col_start = col * n_rows;
    }
    values.push_back(value);
    rows.push_back(index - col_start);
    ++counts[col];
  });
  for (index_t j = 1; j <= n_cols; ++j) col_offsets[j] += col_offsets[j - 1];

  CscStorage<eT> csc(n_rows, n_cols, std::move(values), std::move(rows), std::move(col_offsets));
  detail::audit_conversion(csc, "rbt_to_csc");
  return csc;
}

}  // namespace hsparse
