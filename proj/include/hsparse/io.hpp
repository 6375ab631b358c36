#pragma once

// MatrixMarket coordinate I/O and benchmark CSV emission.
//
// On disk: `%%MatrixMarket matrix coordinate real general`, a size line
// `n_rows n_cols N`, then N lines `row col value` with one-based indices in
// column-major order and values at 17 significant digits. In memory indices
// are zero-based; the shift happens only here.

#include <filesystem>
#include <iosfwd>
#include <span>
#include <stdexcept>
#include <string>
#include <vector>

#include "hsparse/spmat.hpp"

namespace hsparse::io {

/// Parsed file contents, indices still one-based as on disk.
struct MatrixRecord {
  index_t n_rows = 0;
  index_t n_cols = 0;
  index_t n_nonzero = 0;
  std::vector<Triplet<double>> triplets;
};

class MatrixMarketError : public std::runtime_error {
 public:
  enum class Kind {
    malformed_header,   ///< banner missing or not "matrix coordinate real general"
    malformed_size,     ///< size line missing or not three non-negative integers
    malformed_entry,    ///< entry line without two integer indices and a value
    out_of_bounds,      ///< index is 0 or exceeds the declared size
    non_numeric_value,  ///< value field is not a number
    count_mismatch,     ///< number of entries differs from the size line
    io_failure,         ///< underlying stream or file failure
  };

  MatrixMarketError(Kind kind, std::size_t line, const std::string& detail);

  Kind kind() const noexcept { return kind_; }
  /// One-based line number the problem was detected on (0 if not line-bound).
  std::size_t line() const noexcept { return line_; }

 private:
  Kind kind_;
  std::size_t line_;
};

const char* to_string(MatrixMarketError::Kind kind);

void save_matrix_market(const sp_mat& m, std::ostream& sink);
void save_matrix_market(const sp_mat& m, const std::filesystem::path& path);

MatrixRecord read_matrix_record(std::istream& source);

/// Duplicates resolve last-wins, explicit zeros are dropped; CSC state.
sp_mat to_matrix(const MatrixRecord& record);

sp_mat load_matrix_market(std::istream& source);
sp_mat load_matrix_market(const std::filesystem::path& path);

/// One timing measurement.
struct BenchRecord {
  std::string experiment;
  std::string format;
  index_t n_rows = 0;
  index_t n_cols = 0;
  double density = 0.0;
  int rep = 0;
  double seconds = 0.0;
};

inline constexpr const char* csv_header = "experiment,format,n_rows,n_cols,density,rep,seconds";

/// Header line, then one line per record; seconds with 6 decimals.
void write_csv_results(std::span<const BenchRecord> records, std::ostream& sink);

/// Inverse of write_csv_results (seconds at the written precision).
std::vector<BenchRecord> read_csv_results(std::istream& source);

}  // namespace hsparse::io
