#pragma once

// Shared vocabulary for the hsparse library: index type, triplets, error
// types and the instrumentation counters used by tests and benchmarks.

#include <cstdint>
#include <stdexcept>
#include <string>

namespace hsparse {

/// Row, column and linear-position index. 64-bit so that
/// n_rows * n_cols never silently wraps for large matrices.
using index_t = std::uint64_t;

/// Growth step (in elements) for the array-backed formats.
inline constexpr index_t storage_chunk = 1024;

template <typename eT>
struct Triplet {
  index_t row = 0;
  index_t col = 0;
  eT value{};

  friend bool operator==(const Triplet&, const Triplet&) = default;
};

/// Index outside the matrix (or linear index outside n_rows * n_cols).
class BoundsError : public std::out_of_range {
 public:
  using std::out_of_range::out_of_range;
};

/// Operand shapes are incompatible for the requested operation.
class DimensionError : public std::invalid_argument {
 public:
  using std::invalid_argument::invalid_argument;
};

namespace detail {

[[noreturn]] inline void throw_bounds(const char* what, index_t row, index_t col,
                                      index_t n_rows, index_t n_cols) {
  throw BoundsError(std::string(what) + ": position (" + std::to_string(row) + ", " +
                    std::to_string(col) + ") outside " + std::to_string(n_rows) + "x" +
                    std::to_string(n_cols) + " matrix");
}

[[noreturn]] inline void throw_dims(const char* what, index_t ar, index_t ac, index_t br,
                                    index_t bc) {
  throw DimensionError(std::string(what) + ": incompatible dimensions " + std::to_string(ar) +
                       "x" + std::to_string(ac) + " and " + std::to_string(br) + "x" +
                       std::to_string(bc));
}

/// n_rows * n_cols, rejecting shapes whose linear index would overflow.
inline index_t checked_area(index_t n_rows, index_t n_cols) {
  if (n_rows != 0 && n_cols > UINT64_MAX / n_rows) {
    throw BoundsError("matrix shape " + std::to_string(n_rows) + "x" + std::to_string(n_cols) +
                      " overflows the 64-bit linear index");
  }
  return n_rows * n_cols;
}

}  // namespace detail

/// Per-thread instrumentation. Tests reset these and read them back to check
/// allocation discipline and dispatch decisions; nothing in the library
/// depends on their values.
struct Counters {
  /// Allocations of matrix-sized arrays (CSC/COO arrays, RBT node arenas).
  std::uint64_t matrix_allocations = 0;
  /// Element writes into the array produced by a COO<->CSC conversion.
  std::uint64_t conversion_writes = 0;
  /// Size of the most recent sparse-product dense workspace.
  std::uint64_t spmul_workspace_slots = 0;
  std::uint64_t fused_trace_dispatches = 0;
  std::uint64_t fallback_trace_dispatches = 0;
  std::uint64_t fused_diagmat_dispatches = 0;
  std::uint64_t leaf_diagmat_dispatches = 0;
  std::uint64_t fallback_diagmat_dispatches = 0;
};

inline Counters& counters() {
  thread_local Counters c;
  return c;
}

inline void reset_counters() { counters() = Counters{}; }

}  // namespace hsparse
