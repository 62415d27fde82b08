#include "delaytrack/matrix_market.hpp"

#include <algorithm>
#include <cctype>
#include <cmath>
#include <fstream>
#include <sstream>
#include <vector>

#include "delaytrack/error.hpp"

namespace delaytrack {

namespace {

std::string lowercase(std::string text) {
  std::transform(text.begin(), text.end(), text.begin(),
                 [](unsigned char c) { return static_cast<char>(std::tolower(c)); });
  return text;
}

[[noreturn]] void fail(ErrorCode code, const std::string& source, long line,
                       const std::string& what) {
  throw Error(code, source + ":" + std::to_string(line) + ": " + what);
}

bool blank(const std::string& line) {
  return std::all_of(line.begin(), line.end(),
                     [](unsigned char c) { return std::isspace(c) != 0; });
}

}  // namespace

SparseMatrix read_matrix_market(std::istream& in, const std::string& source) {
  std::string line;
  long line_no = 0;

  if (!std::getline(in, line)) fail(ErrorCode::malformed_matrix, source, 1, "empty file");
  ++line_no;
  {
    std::istringstream header(lowercase(line));
    std::string banner, object, format, field, symmetry;
    header >> banner >> object >> format >> field >> symmetry;
    if (banner != "%%matrixmarket")
      fail(ErrorCode::malformed_matrix, source, line_no, "missing %%MatrixMarket banner");
    if (object != "matrix" || format != "coordinate")
      fail(ErrorCode::malformed_matrix, source, line_no, "only 'matrix coordinate' is supported");
    if (field != "real")
      fail(ErrorCode::malformed_matrix, source, line_no, "only 'real' entries are supported");
    if (symmetry != "general")
      fail(ErrorCode::malformed_matrix, source, line_no, "only 'general' symmetry is supported");
  }

  long rows = -1, cols = -1, nnz = -1;
  while (std::getline(in, line)) {
    ++line_no;
    if (line.empty() || line[0] == '%' || blank(line)) continue;
    std::istringstream size_line(line);
    std::string extra;
    if (!(size_line >> rows >> cols >> nnz) || (size_line >> extra) || rows < 0 || cols < 0 ||
        nnz < 0)
      fail(ErrorCode::malformed_matrix, source, line_no, "malformed size line '" + line + "'");
    break;
  }
  if (rows < 0) fail(ErrorCode::malformed_matrix, source, line_no, "missing size line");

  std::vector<Triplet> entries;
  entries.reserve(static_cast<std::size_t>(nnz));
  while (static_cast<long>(entries.size()) < nnz && std::getline(in, line)) {
    ++line_no;
    if (line.empty() || line[0] == '%' || blank(line)) continue;
    std::istringstream entry(line);
    long i = 0, j = 0;
    double value = 0.0;
    std::string extra;
    if (!(entry >> i >> j >> value) || (entry >> extra))
      fail(ErrorCode::malformed_matrix, source, line_no, "malformed entry '" + line + "'");
    if (i < 1 || i > rows || j < 1 || j > cols)
      fail(ErrorCode::malformed_matrix, source, line_no,
           "entry (" + std::to_string(i) + "," + std::to_string(j) + ") outside " +
               std::to_string(rows) + "x" + std::to_string(cols));
    if (!std::isfinite(value))
      fail(ErrorCode::malformed_matrix, source, line_no, "non-finite value");
    entries.emplace_back(static_cast<Index>(i - 1), static_cast<Index>(j - 1), value);
  }
  if (static_cast<long>(entries.size()) < nnz)
    fail(ErrorCode::malformed_matrix, source, line_no,
         "expected " + std::to_string(nnz) + " entries, found " + std::to_string(entries.size()));

  SparseMatrix matrix(rows, cols);
  matrix.setFromTriplets(entries.begin(), entries.end());
  matrix.makeCompressed();
  return matrix;
}

SparseMatrix read_matrix_market(const std::filesystem::path& path) {
  std::ifstream in(path);
  if (!in) throw Error(ErrorCode::missing_file, "cannot open matrix file '" + path.string() + "'");
  return read_matrix_market(in, path.string());
}

void write_matrix_market(std::ostream& out, const SparseMatrix& matrix) {
  out << "%%MatrixMarket matrix coordinate real general\n";
  out << matrix.rows() << ' ' << matrix.cols() << ' ' << matrix.nonZeros() << '\n';
  char buffer[64];
  for (Index k = 0; k < matrix.outerSize(); ++k) {
    for (SparseMatrix::InnerIterator it(matrix, k); it; ++it) {
      std::snprintf(buffer, sizeof buffer, "%.17g", it.value());
      out << it.row() + 1 << ' ' << it.col() + 1 << ' ' << buffer << '\n';
    }
  }
}

void write_matrix_market(const std::filesystem::path& path, const SparseMatrix& matrix) {
  std::ofstream out(path);
  if (!out) throw Error(ErrorCode::missing_file, "cannot write matrix file '" + path.string() + "'");
  write_matrix_market(out, matrix);
}

}  // namespace delaytrack
