#pragma once

#include <filesystem>
#include <iosfwd>
#include <string>

#include "delaytrack/types.hpp"

namespace delaytrack {

// Matrix Market coordinate files, real general only, 1-indexed entries.
// Duplicate coordinates are summed. Errors carry "<source>:<line>:" prefixes.

SparseMatrix read_matrix_market(std::istream& in, const std::string& source_name = "<stream>");
SparseMatrix read_matrix_market(const std::filesystem::path& path);

void write_matrix_market(std::ostream& out, const SparseMatrix& matrix);
void write_matrix_market(const std::filesystem::path& path, const SparseMatrix& matrix);

}  // namespace delaytrack
