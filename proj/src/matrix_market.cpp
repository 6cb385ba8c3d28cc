#include "ils/matrix_market.hpp"

#include <algorithm>
#include <cctype>
#include <charconv>
#include <cstdio>
#include <fstream>
#include <istream>
#include <ostream>
#include <sstream>
#include <string>
#include <vector>

namespace ils {

namespace {

std::string lowercase(std::string s) {
  std::transform(s.begin(), s.end(), s.begin(),
                 [](unsigned char c) { return static_cast<char>(std::tolower(c)); });
  return s;
}

bool is_blank_or_comment(const std::string& line) {
  for (char c : line) {
    if (c == '%') return true;
    if (!std::isspace(static_cast<unsigned char>(c))) return false;
  }
  return true;
}

/// Returns the next data line, skipping comments and blank lines.
bool next_data_line(std::istream& in, std::string& line, std::size_t& line_no) {
  while (std::getline(in, line)) {
    ++line_no;
    if (!is_blank_or_comment(line)) return true;
  }
  return false;
}

Index parse_index(const std::string& token, std::size_t line_no) {
  Index value = 0;
  const auto* first = token.data();
  const auto* last = token.data() + token.size();
  const auto [ptr, ec] = std::from_chars(first, last, value);
  if (ec != std::errc{} || ptr != last) {
    throw ParseError("expected an integer, got '" + token + "'", line_no);
  }
  return value;
}

double parse_real(const std::string& token, std::size_t line_no) {
  // C strtod grammar only; Fortran "1.5D+03" exponents are rejected.
  char* end = nullptr;
  const double v = std::strtod(token.c_str(), &end);
  if (end == token.c_str() || *end != '\0') {
    throw ParseError("expected a real number, got '" + token + "'", line_no);
  }
  return v;
}

std::vector<std::string> tokens_of(const std::string& line) {
  std::istringstream ss(line);
  std::vector<std::string> out;
  std::string t;
  while (ss >> t) out.push_back(t);
  return out;
}

}  // namespace

SparseMatrixCsr parse_matrix_market(std::istream& in) {
  std::string line;
  std::size_t line_no = 0;
  if (!std::getline(in, line)) throw ParseError("empty stream, missing %%MatrixMarket banner", 1);
  ++line_no;

  const auto header = tokens_of(line);
  if (header.empty() || lowercase(header[0]) != "%%matrixmarket") {
    throw ParseError("missing %%MatrixMarket banner, got '" + (header.empty() ? "" : header[0]) +
                         "'",
                     line_no);
  }
  if (header.size() != 5) {
    throw ParseError("banner must have 5 tokens, found " + std::to_string(header.size()), line_no);
  }
  const std::string object = lowercase(header[1]);
  const std::string format = lowercase(header[2]);
  const std::string field = lowercase(header[3]);
  const std::string symmetry = lowercase(header[4]);

  if (object != "matrix") throw ParseError("unsupported object '" + header[1] + "'", line_no);
  if (format != "coordinate" && format != "array") {
    throw ParseError("unsupported format '" + header[2] + "'", line_no);
  }
  if (field != "real" && field != "integer") {
    throw ParseError("unsupported field '" + header[3] + "'", line_no);
  }
  if (symmetry != "general" && symmetry != "symmetric") {
    throw ParseError("unsupported symmetry '" + header[4] + "'", line_no);
  }
  const bool symmetric = symmetry == "symmetric";

  if (!next_data_line(in, line, line_no)) throw ParseError("missing size line", line_no + 1);
  const auto size_tokens = tokens_of(line);
  const std::size_t expected_size_tokens = format == "coordinate" ? 3 : 2;
  if (size_tokens.size() != expected_size_tokens) {
    throw ParseError("size line must have " + std::to_string(expected_size_tokens) + " entries",
                     line_no);
  }
  const Index n_rows = parse_index(size_tokens[0], line_no);
  const Index n_cols = parse_index(size_tokens[1], line_no);
  if (n_rows < 0 || n_cols < 0) throw ParseError("negative dimension", line_no);
  if (symmetric && n_rows != n_cols) throw ParseError("symmetric matrix must be square", line_no);

  std::vector<Triplet> entries;

  if (format == "coordinate") {
    const Index declared = parse_index(size_tokens[2], line_no);
    if (declared < 0) throw ParseError("negative entry count", line_no);
    entries.reserve(static_cast<std::size_t>(symmetric ? 2 * declared : declared));
    for (Index k = 0; k < declared; ++k) {
      if (!next_data_line(in, line, line_no)) {
        throw ParseError("expected " + std::to_string(declared) + " entries, found " +
                             std::to_string(k),
                         line_no);
      }
      const auto t = tokens_of(line);
      if (t.size() != 3) throw ParseError("entry line must have 3 tokens", line_no);
      const Index i = parse_index(t[0], line_no);
      const Index j = parse_index(t[1], line_no);
      const double v = parse_real(t[2], line_no);
      if (i < 1 || i > n_rows || j < 1 || j > n_cols) {
        throw BoundsError("line " + std::to_string(line_no) + ": entry (" + t[0] + ", " + t[1] +
                          ") outside declared size " + std::to_string(n_rows) + " x " +
                          std::to_string(n_cols));
      }
      entries.push_back({i - 1, j - 1, v});
      if (symmetric && i != j) entries.push_back({j - 1, i - 1, v});
    }
  } else {
    // Column-major; symmetric arrays list only the lower triangle.
    for (Index j = 0; j < n_cols; ++j) {
      for (Index i = symmetric ? j : 0; i < n_rows; ++i) {
        if (!next_data_line(in, line, line_no)) {
          throw ParseError("array data ended early", line_no);
        }
        const auto t = tokens_of(line);
        if (t.size() != 1) throw ParseError("array entry line must have 1 token", line_no);
        const double v = parse_real(t[0], line_no);
        if (v == 0.0) continue;
        entries.push_back({i, j, v});
        if (symmetric && i != j) entries.push_back({j, i, v});
      }
    }
  }
  if (next_data_line(in, line, line_no)) {
    throw ParseError("unexpected data after the declared entries", line_no);
  }
  return SparseMatrixCsr::from_triplets(n_rows, n_cols, std::move(entries));
}

SparseMatrixCsr read_matrix_market(const std::filesystem::path& path) {
  std::ifstream in(path);
  if (!in) throw IoError("cannot open Matrix Market file " + path.string());
  return parse_matrix_market(in);
}

void write_matrix_market(std::ostream& out, const SparseMatrixCsr& a) {
  out << "%%MatrixMarket matrix coordinate real general\n";
  out << a.n_rows() << ' ' << a.n_cols() << ' ' << a.nnz() << '\n';
  char buf[64];
  for (const auto& t : a.to_triplets()) {
    std::snprintf(buf, sizeof buf, "%.17g", t.value);
    out << t.row + 1 << ' ' << t.col + 1 << ' ' << buf << '\n';
  }
}

void write_matrix_market_vector(std::ostream& out, std::span<const double> v) {
  out << "%%MatrixMarket matrix array real general\n";
  out << v.size() << " 1\n";
  char buf[64];
  for (double x : v) {
    std::snprintf(buf, sizeof buf, "%.17g", x);
    out << buf << '\n';
  }
}

void write_matrix_market_file(const std::filesystem::path& path, const SparseMatrixCsr& a) {
  std::ofstream out(path);
  if (!out) throw IoError("cannot write " + path.string());
  write_matrix_market(out, a);
  if (!out) throw IoError("write failed for " + path.string());
}

void write_matrix_market_vector_file(const std::filesystem::path& path,
                                     std::span<const double> v) {
  std::ofstream out(path);
  if (!out) throw IoError("cannot write " + path.string());
  write_matrix_market_vector(out, v);
  if (!out) throw IoError("write failed for " + path.string());
}

}  // namespace ils
