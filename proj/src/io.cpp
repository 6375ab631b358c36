#include "hsparse/io.hpp"

#include <algorithm>
#include <cctype>
#include <charconv>
#include <cstdio>
#include <cstdlib>
#include <fstream>
#include <istream>
#include <ostream>
#include <sstream>

namespace hsparse::io {

namespace {

using Kind = MatrixMarketError::Kind;

std::string lower(std::string s) {
  std::transform(s.begin(), s.end(), s.begin(), [](unsigned char c) { return std::tolower(c); });
  return s;
}

std::vector<std::string> split_ws(const std::string& line) {
  std::vector<std::string> out;
  std::istringstream in(line);
  std::string tok;
  while (in >> tok) out.push_back(tok);
  return out;
}

bool parse_index(const std::string& tok, index_t& out) {
  const char* first = tok.data();
  const char* last = tok.data() + tok.size();
  const auto [ptr, ec] = std::from_chars(first, last, out);
  return ec == std::errc() && ptr == last;
}

bool parse_double(const std::string& tok, double& out) {
  char* end = nullptr;
  out = std::strtod(tok.c_str(), &end);
  return !tok.empty() && end == tok.c_str() + tok.size();
}

bool is_blank(const std::string& line) {
  return std::all_of(line.begin(), line.end(), [](unsigned char c) { return std::isspace(c); });
}

std::string format_value(double v) {
  char buf[40];
  std::snprintf(buf, sizeof buf, "%.17g", v);
  return buf;
}

}  // namespace

MatrixMarketError::MatrixMarketError(Kind kind, std::size_t line, const std::string& detail)
    : std::runtime_error(std::string("MatrixMarket ") + io::to_string(kind) +
                         (line ? " at line " + std::to_string(line) : std::string()) + ": " + detail),
      kind_(kind),
      line_(line) {}

const char* to_string(MatrixMarketError::Kind kind) {
  switch (kind) {
    case Kind::malformed_header: return "malformed header";
    case Kind::malformed_size: return "malformed size line";
    case Kind::malformed_entry: return "malformed entry";
    case Kind::out_of_bounds: return "index out of bounds";
    case Kind::non_numeric_value: return "non-numeric value";
    case Kind::count_mismatch: return "entry count mismatch";
    case Kind::io_failure: return "I/O failure";
  }
  return "error";
}

void save_matrix_market(const sp_mat& m, std::ostream& sink) {
  sink << "%%MatrixMarket matrix coordinate real general\n";
  sink << m.n_rows() << ' ' << m.n_cols() << ' ' << m.n_nonzero() << '\n';
  m.for_each([&](index_t r, index_t c, double v) { sink << r + 1 << ' ' << c + 1 << ' ' << format_value(v) << '\n'; });
  sink.flush();
  if (!sink) throw MatrixMarketError(Kind::io_failure, 0, "write to sink failed");
}

void save_matrix_market(const sp_mat& m, const std::filesystem::path& path) {
  std::ofstream out(path);
  if (!out) throw MatrixMarketError(Kind::io_failure, 0, "cannot open " + path.string() + " for writing");
  save_matrix_market(m, out);
}

MatrixRecord read_matrix_record(std::istream& source) {
  std::string line;
  std::size_t line_no = 0;

  if (!std::getline(source, line)) throw MatrixMarketError(Kind::malformed_header, 1, "empty input");
  ++line_no;
  const auto banner = split_ws(lower(line));
  const std::vector<std::string> expected{"%%matrixmarket", "matrix", "coordinate", "real", "general"};
  if (banner != expected) {
    throw MatrixMarketError(Kind::malformed_header, line_no,
                            "expected '%%MatrixMarket matrix coordinate real general', got '" + line + "'");
  }

  // Comments may follow the banner; the first other non-blank line is the size line.
  MatrixRecord rec;
  bool have_size = false;
  while (std::getline(source, line)) {
    ++line_no;
    if (is_blank(line) || line.front() == '%') continue;
    const auto tok = split_ws(line);
    if (tok.size() != 3 || !parse_index(tok[0], rec.n_rows) || !parse_index(tok[1], rec.n_cols) ||
        !parse_index(tok[2], rec.n_nonzero)) {
      throw MatrixMarketError(Kind::malformed_size, line_no, "expected 'n_rows n_cols n_nonzero', got '" + line + "'");
    }
    have_size = true;
    break;
  }
  if (!have_size) throw MatrixMarketError(Kind::malformed_size, line_no + 1, "missing size line");
  try {
    detail::checked_area(rec.n_rows, rec.n_cols);
  } catch (const BoundsError& e) {
    throw MatrixMarketError(Kind::malformed_size, line_no, e.what());
  }

  rec.triplets.reserve(std::min<index_t>(rec.n_nonzero, index_t{1} << 24));
  while (std::getline(source, line)) {
    ++line_no;
    if (is_blank(line) || line.front() == '%') continue;
    const auto tok = split_ws(line);
    index_t r = 0;
    index_t c = 0;
    if (tok.size() != 3 || !parse_index(tok[0], r) || !parse_index(tok[1], c)) {
      throw MatrixMarketError(Kind::malformed_entry, line_no, "expected 'row col value', got '" + line + "'");
    }
    if (r == 0 || c == 0 || r > rec.n_rows || c > rec.n_cols) {
      throw MatrixMarketError(Kind::out_of_bounds, line_no,
                              "entry (" + tok[0] + ", " + tok[1] + ") outside declared " +
                                  std::to_string(rec.n_rows) + "x" + std::to_string(rec.n_cols));
    }
    double v = 0.0;
    if (!parse_double(tok[2], v)) {
      throw MatrixMarketError(Kind::non_numeric_value, line_no, "value '" + tok[2] + "' is not a number");
    }
    if (rec.triplets.size() == rec.n_nonzero) {
      throw MatrixMarketError(Kind::count_mismatch, line_no,
                              "more entries than the declared " + std::to_string(rec.n_nonzero));
    }
    rec.triplets.push_back({r, c, v});
  }
  if (source.bad()) throw MatrixMarketError(Kind::io_failure, line_no, "read failed");
  if (rec.triplets.size() != rec.n_nonzero) {
    throw MatrixMarketError(Kind::count_mismatch, line_no + 1,
                            "declared " + std::to_string(rec.n_nonzero) + " entries, found " +
                                std::to_string(rec.triplets.size()));
  }
  return rec;
}

sp_mat to_matrix(const MatrixRecord& record) {
  std::vector<Triplet<double>> zero_based;
  zero_based.reserve(record.triplets.size());
  for (const auto& t : record.triplets) zero_based.push_back({t.row - 1, t.col - 1, t.value});
  return sp_mat::from_triplets(record.n_rows, record.n_cols, zero_based);
}

sp_mat load_matrix_market(std::istream& source) { return to_matrix(read_matrix_record(source)); }

sp_mat load_matrix_market(const std::filesystem::path& path) {
  std::ifstream in(path);
  if (!in) throw MatrixMarketError(Kind::io_failure, 0, "cannot open " + path.string());
  return load_matrix_market(in);
}

void write_csv_results(std::span<const BenchRecord> records, std::ostream& sink) {
  sink << csv_header << '\n';
  char seconds[64];
  char density[32];
  for (const auto& r : records) {
    std::snprintf(seconds, sizeof seconds, "%.6f", r.seconds);
    const auto res = std::to_chars(density, density + sizeof density, r.density);
    sink << r.experiment << ',' << r.format << ',' << r.n_rows << ',' << r.n_cols << ','
         << std::string_view(density, static_cast<std::size_t>(res.ptr - density)) << ',' << r.rep << ','
         << seconds << '\n';
  }
  sink.flush();
  if (!sink) throw std::runtime_error("write_csv_results: write to sink failed");
}

std::vector<BenchRecord> read_csv_results(std::istream& source) {
  std::string line;
  if (!std::getline(source, line) || line != csv_header) {
    throw std::runtime_error("read_csv_results: missing or unexpected header");
  }
  std::vector<BenchRecord> out;
  std::size_t line_no = 1;
  while (std::getline(source, line)) {
    ++line_no;
    if (line.empty()) continue;
    std::vector<std::string> f;
    std::stringstream ss(line);
    std::string field;
    while (std::getline(ss, field, ',')) f.push_back(field);
    BenchRecord r;
    index_t rep = 0;
    if (f.size() != 7 || !parse_index(f[2], r.n_rows) || !parse_index(f[3], r.n_cols) ||
        !parse_double(f[4], r.density) || !parse_index(f[5], rep) || !parse_double(f[6], r.seconds)) {
      throw std::runtime_error("read_csv_results: malformed line " + std::to_string(line_no));
    }
    r.experiment = f[0];
    r.format = f[1];
    r.rep = static_cast<int>(rep);
    out.push_back(std::move(r));
  }
  return out;
}

}  // namespace hsparse::io
