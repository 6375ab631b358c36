#pragma once

// Eager kernels. Algebra runs on CSC; bulk coordinate transforms (reverse and
// the COO transpose oracle) run on COO. Every result is zero-free and sorted.
// Zero-drop compares against exactly 0; a NaN result is kept.

#include <algorithm>
#include <span>
#include <stdexcept>
#include <vector>

#include "hsparse/spmat.hpp"

namespace hsparse {

template <typename eT>
using DenseVector = std::vector<eT>;

enum class Axis { rows, cols };

/// k * A with the same pattern; k == 0 yields the empty matrix.
template <typename eT>
SpMat<eT> scalar_mul(const SpMat<eT>& a, eT k) {
  const auto& csc = a.csc();
  if (k == eT{}) return SpMat<eT>(a.n_rows(), a.n_cols());
  std::vector<eT> values(csc.values().begin(), csc.values().end());
  for (auto& v : values) v *= k;
  std::vector<index_t> rows(csc.rows().begin(), csc.rows().end());
  std::vector<index_t> col_offsets(csc.col_offsets().begin(), csc.col_offsets().end());

  // Overflow or underflow can still produce zeros.
  if (std::find(values.begin(), values.end(), eT{}) == values.end()) {
    return SpMat<eT>(CscStorage<eT>(a.n_rows(), a.n_cols(), std::move(values), std::move(rows),
                                    std::move(col_offsets)));
  }
  index_t out = 0;
  index_t start = 0;
  for (index_t j = 0; j < a.n_cols(); ++j) {
    const index_t end = col_offsets[j + 1];
    for (index_t k2 = start; k2 < end; ++k2) {
      if (values[k2] == eT{}) continue;
      values[out] = values[k2];
      rows[out] = rows[k2];
      ++out;
    }
    start = end;
    col_offsets[j + 1] = out;
  }
  values.resize(out);
  rows.resize(out);
  return SpMat<eT>(CscStorage<eT>(a.n_rows(), a.n_cols(), std::move(values), std::move(rows), std::move(col_offsets)));
}

/// A + B. The result pattern is computed first (symbolic pass), then the
/// values are merged column by column.
template <typename eT>
SpMat<eT> sp_add(const SpMat<eT>& a, const SpMat<eT>& b) {
  if (a.n_rows() != b.n_rows() || a.n_cols() != b.n_cols()) {
    detail::throw_dims("sp_add", a.n_rows(), a.n_cols(), b.n_rows(), b.n_cols());
  }
  const auto& x = a.csc();
  const auto& y = b.csc();
  const auto xo = x.col_offsets(), yo = y.col_offsets();
  const auto xr = x.rows(), yr = y.rows();
  const auto xv = x.values(), yv = y.values();
  const index_t n_cols = a.n_cols();

  // Symbolic pass: union size per column.
  std::vector<index_t> col_offsets(n_cols + 1, 0);
  for (index_t j = 0; j < n_cols; ++j) {
    index_t p = xo[j], q = yo[j], count = 0;
    const index_t pe = xo[j + 1], qe = yo[j + 1];
    while (p < pe && q < qe) {
      if (xr[p] < yr[q]) ++p;
      else if (yr[q] < xr[p]) ++q;
      else { ++p; ++q; }
      ++count;
    }
    col_offsets[j + 1] = col_offsets[j] + count + (pe - p) + (qe - q);
  }

  // Numeric pass; exact-zero sums are skipped, so offsets are rewritten.
  const index_t bound = col_offsets[n_cols];
  std::vector<eT> values(bound);
  std::vector<index_t> rows(bound);
  index_t out = 0;
  for (index_t j = 0; j < n_cols; ++j) {
    index_t p = xo[j], q = yo[j];
    const index_t pe = xo[j + 1], qe = yo[j + 1];
    auto emit = [&](index_t r, eT v) {
      if (v == eT{}) return;
      values[out] = v;
      rows[out] = r;
      ++out;
    };
    while (p < pe && q < qe) {
      if (xr[p] < yr[q]) { emit(xr[p], xv[p]); ++p; }
      else if (yr[q] < xr[p]) { emit(yr[q], yv[q]); ++q; }
      else { emit(xr[p], xv[p] + yv[q]); ++p; ++q; }
    }
    for (; p < pe; ++p) emit(xr[p], xv[p]);
    for (; q < qe; ++q) emit(yr[q], yv[q]);
    col_offsets[j + 1] = out;
  }
  values.resize(out);
  rows.resize(out);
  return SpMat<eT>(CscStorage<eT>(a.n_rows(), n_cols, std::move(values), std::move(rows), std::move(col_offsets)));
}

/// A * B, column by column with a dense accumulator of a.n_rows() slots.
template <typename eT>
SpMat<eT> sp_mul(const SpMat<eT>& a, const SpMat<eT>& b) {
  if (a.n_cols() != b.n_rows()) detail::throw_dims("sp_mul", a.n_rows(), a.n_cols(), b.n_rows(), b.n_cols());
  const auto& x = a.csc();
  const auto& y = b.csc();
  const auto xo = x.col_offsets(), yo = y.col_offsets();
  const auto xr = x.rows(), yr = y.rows();
  const auto xv = x.values(), yv = y.values();
  const index_t m = a.n_rows();
  const index_t n_cols = b.n_cols();

  std::vector<eT> accumulator(m, eT{});
  // marker[r] == j + 1 once row r has been touched for output column j.
  std::vector<index_t> marker(m, 0);
  std::vector<index_t> touched;
  counters().spmul_workspace_slots = accumulator.size();

  std::vector<eT> values;
  std::vector<index_t> rows;
  std::vector<index_t> col_offsets(n_cols + 1, 0);
  for (index_t j = 0; j < n_cols; ++j) {
    touched.clear();
    for (index_t q = yo[j]; q < yo[j + 1]; ++q) {
      const index_t k = yr[q];
      const eT scale = yv[q];
      for (index_t p = xo[k]; p < xo[k + 1]; ++p) {
        const index_t r = xr[p];
        if (marker[r] != j + 1) {
          marker[r] = j + 1;
          accumulator[r] = eT{};
          touched.push_back(r);
        }
        accumulator[r] += xv[p] * scale;
      }
    }
    std::sort(touched.begin(), touched.end());
    for (const index_t r : touched) {
      if (accumulator[r] == eT{}) continue;
      values.push_back(accumulator[r]);
      rows.push_back(r);
    }
    col_offsets[j + 1] = values.size();
  }
  return SpMat<eT>(CscStorage<eT>(m, n_cols, std::move(values), std::move(rows), std::move(col_offsets)));
}

/// Row vector times matrix: out[j] = sum over stored (r, j): v[r] * A(r, j).
template <typename eT>
DenseVector<eT> vec_mat_mul(std::span<const eT> v, const SpMat<eT>& a) {
  if (v.size() != a.n_rows()) detail::throw_dims("vec_mat_mul", 1, v.size(), a.n_rows(), a.n_cols());
  const auto& csc = a.csc();
  const auto offsets = csc.col_offsets();
  const auto rows = csc.rows();
  const auto values = csc.values();
  DenseVector<eT> out(a.n_cols(), eT{});
  for (index_t j = 0; j < a.n_cols(); ++j) {
    eT acc{};
    for (index_t k = offsets[j]; k < offsets[j + 1]; ++k) acc += v[rows[k]] * values[k];
    out[j] = acc;
  }
  return out;
}

/// Transpose on CSC without sorting: count per output column, prefix-sum,
/// then scatter with a cursor per output column.
template <typename eT>
SpMat<eT> transpose(const SpMat<eT>& a) {
  const auto& csc = a.csc();
  const auto offsets = csc.col_offsets();
  const auto rows = csc.rows();
  const auto values = csc.values();
  const index_t n = csc.n_nonzero();
  const index_t out_cols = a.n_rows();

  std::vector<index_t> col_offsets(out_cols + 1, 0);
  for (index_t k = 0; k < n; ++k) ++col_offsets[rows[k] + 1];
  for (index_t j = 1; j <= out_cols; ++j) col_offsets[j] += col_offsets[j - 1];

  std::vector<index_t> cursor(col_offsets.begin(), col_offsets.end() - 1);
  std::vector<eT> out_values(n);
  std::vector<index_t> out_rows(n);
  for (index_t c = 0; c < a.n_cols(); ++c) {
    for (index_t k = offsets[c]; k < offsets[c + 1]; ++k) {
      const index_t dst = cursor[rows[k]]++;
      out_values[dst] = values[k];
      out_rows[dst] = c;
    }
  }
  return SpMat<eT>(CscStorage<eT>(a.n_cols(), out_cols, std::move(out_values), std::move(out_rows),
                                  std::move(col_offsets)));
}

/// Transpose via COO: swap the rows and columns arrays, re-sort, convert back.
/// Kept as the cross-check for transpose().
template <typename eT>
SpMat<eT> transpose_coo_oracle(const SpMat<eT>& a) {
  CooStorage<eT> coo = a.coo();
  coo.swap_axes();
  coo.canonicalize();
  return SpMat<eT>(coo_to_csc(coo));
}

/// Main diagonal as a dense vector of length min(n_rows, n_cols).
template <typename eT>
DenseVector<eT> diag_extract(const SpMat<eT>& a) {
  const auto& csc = a.csc();
  const index_t k = std::min(a.n_rows(), a.n_cols());
  DenseVector<eT> out(k);
  for (index_t i = 0; i < k; ++i) out[i] = csc.get(i, i);
  return out;
}

template <typename eT>
eT trace(const SpMat<eT>& a) {
  const auto& csc = a.csc();
  const index_t k = std::min(a.n_rows(), a.n_cols());
  eT sum{};
  for (index_t i = 0; i < k; ++i) sum += csc.get(i, i);
  return sum;
}

/// trace(A^T * B) without forming A^T or the product: the sum over columns j
/// of dot(A(:, j), B(:, j)), each dot a sorted merge of two columns.
template <typename eT>
eT trace_fused_atb(const SpMat<eT>& a, const SpMat<eT>& b) {
  if (a.n_rows() != b.n_rows() || a.n_cols() != b.n_cols()) {
    detail::throw_dims("trace(A^T B)", a.n_rows(), a.n_cols(), b.n_rows(), b.n_cols());
  }
  const auto& x = a.csc();
  const auto& y = b.csc();
  const auto xo = x.col_offsets(), yo = y.col_offsets();
  const auto xr = x.rows(), yr = y.rows();
  const auto xv = x.values(), yv = y.values();
  eT sum{};
  for (index_t j = 0; j < a.n_cols(); ++j) {
    index_t p = xo[j], q = yo[j];
    const index_t pe = xo[j + 1], qe = yo[j + 1];
    while (p < pe && q < qe) {
      if (xr[p] < yr[q]) ++p;
      else if (yr[q] < xr[p]) ++q;
      else sum += xv[p++] * yv[q++];
    }
  }
  return sum;
}

namespace detail {

template <typename eT>
SpMat<eT> diagonal_matrix(const DenseVector<eT>& diag) {
  const index_t k = diag.size();
  std::vector<eT> values;
  std::vector<index_t> rows;
  std::vector<index_t> col_offsets(k + 1, 0);
  for (index_t i = 0; i < k; ++i) {
    if (diag[i] != eT{}) {
      values.push_back(diag[i]);
      rows.push_back(i);
    }
    col_offsets[i + 1] = values.size();
  }
  return SpMat<eT>(CscStorage<eT>(k, k, std::move(values), std::move(rows), std::move(col_offsets)));
}

}  // namespace detail

/// Square diagonal matrix (side min(n_rows, n_cols)) holding A's diagonal.
template <typename eT>
SpMat<eT> diagmat(const SpMat<eT>& a) {
  return detail::diagonal_matrix(diag_extract(a));
}

/// diagmat(A + B) from 2 * min-dim element lookups; no full addition.
template <typename eT>
SpMat<eT> diagmat_fused_add(const SpMat<eT>& a, const SpMat<eT>& b) {
  if (a.n_rows() != b.n_rows() || a.n_cols() != b.n_cols()) {
    detail::throw_dims("diagmat(A + B)", a.n_rows(), a.n_cols(), b.n_rows(), b.n_cols());
  }
  const auto& x = a.csc();
  const auto& y = b.csc();
  const index_t k = std::min(a.n_rows(), a.n_cols());
  DenseVector<eT> diag(k);
  for (index_t i = 0; i < k; ++i) diag[i] = x.get(i, i) + y.get(i, i);
  return detail::diagonal_matrix(diag);
}

/// Flip row-wise (Axis::rows maps row r to n_rows-1-r) or column-wise, via
/// COO. The result is left in COO state.
template <typename eT>
SpMat<eT> reverse(const SpMat<eT>& a, Axis axis) {
  CooStorage<eT> coo = a.coo();
  const index_t n_rows = a.n_rows();
  const index_t n_cols = a.n_cols();
  if (axis == Axis::rows) {
    coo.remap(n_rows, n_cols, [n_rows](index_t r, index_t c) { return std::pair{n_rows - 1 - r, c}; });
  } else {
    coo.remap(n_rows, n_cols, [n_cols](index_t r, index_t c) { return std::pair{r, n_cols - 1 - c}; });
  }
  coo.canonicalize();
  return SpMat<eT>(std::move(coo));
}

/// dim 0: column sums (length n_cols); dim 1: row sums (length n_rows).
template <typename eT>
DenseVector<eT> sum_dim(const SpMat<eT>& a, int dim) {
  if (dim != 0 && dim != 1) throw std::invalid_argument("sum_dim: dim must be 0 or 1, got " + std::to_string(dim));
  const auto& csc = a.csc();
  const auto offsets = csc.col_offsets();
  const auto rows = csc.rows();
  const auto values = csc.values();
  if (dim == 0) {
    DenseVector<eT> out(a.n_cols(), eT{});
    for (index_t j = 0; j < a.n_cols(); ++j) {
      for (index_t k = offsets[j]; k < offsets[j + 1]; ++k) out[j] += values[k];
    }
    return out;
  }
  DenseVector<eT> out(a.n_rows(), eT{});
  for (index_t k = 0; k < csc.n_nonzero(); ++k) out[rows[k]] += values[k];
  return out;
}

}  // namespace hsparse
