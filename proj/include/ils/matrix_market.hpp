#pragma once

#include <filesystem>
#include <iosfwd>
#include <span>

#include "ils/csr_matrix.hpp"
#include "ils/dense_matrix.hpp"

namespace ils {

/// Reads a Matrix Market file ("matrix" object; "coordinate" or "array";
/// "real" or "integer"; "general" or "symmetric").
///
/// Symmetric storage is mirrored into a full matrix and duplicate coordinate
/// entries are summed. Unsupported or malformed headers raise ParseError with
/// the offending token and line; indices outside the declared size raise
/// BoundsError.
[[nodiscard]] SparseMatrixCsr parse_matrix_market(std::istream& in);
[[nodiscard]] SparseMatrixCsr read_matrix_market(const std::filesystem::path& path);

void write_matrix_market(std::ostream& out, const SparseMatrixCsr& a);
/// Dense column vector in "array real general" layout.
void write_matrix_market_vector(std::ostream& out, std::span<const double> v);
void write_matrix_market_file(const std::filesystem::path& path, const SparseMatrixCsr& a);
void write_matrix_market_vector_file(const std::filesystem::path& path,
                                     std::span<const double> v);

}  // namespace ils
