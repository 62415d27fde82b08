#include <catch_amalgamated.hpp>

#include <filesystem>
#include <sstream>

#include "delaytrack/error.hpp"
#include "delaytrack/matrix_market.hpp"
#include "fixtures.hpp"

using namespace delaytrack;

namespace {

ErrorCode code_of(const std::string& text) {
  std::istringstream in(text);
  try {
    read_matrix_market(in, "t.mtx");
  } catch (const Error& e) {
    return e.code();
  }
  FAIL("no error raised");
  return ErrorCode::parse;
}

}  // namespace

TEST_CASE("coordinate file with comments and duplicates") {
  std::istringstream in(
      "%%MatrixMarket matrix coordinate real general\n"
      "% comment\n"
      "3 2 3\n"
      "1 1 1.5\n"
      "3 2 -2\n"
      "1 1 0.5\n");
  const auto m = read_matrix_market(in);
  CHECK(m.rows() == 3);
  CHECK(m.cols() == 2);
  CHECK(m.coeff(0, 0) == 2.0);
  CHECK(m.coeff(2, 1) == -2.0);
  CHECK(m.nonZeros() == 2);
}

TEST_CASE("write then read reproduces values bit for bit") {
  std::mt19937_64 rng(7);
  const auto m = fixtures::random_sparse(6, 0.5, rng);
  std::stringstream buf;
  write_matrix_market(buf, m);
  const auto back = read_matrix_market(buf);
  CHECK(DenseMatrix(back) == DenseMatrix(m));
}

TEST_CASE("malformed inputs are rejected with distinct codes") {
  CHECK(code_of("3 3 0\n") == ErrorCode::malformed_matrix);
  CHECK(code_of("%%MatrixMarket matrix coordinate real symmetric\n1 1 0\n") ==
        ErrorCode::malformed_matrix);
  CHECK(code_of("%%MatrixMarket matrix array real general\n1 1\n1\n") == ErrorCode::malformed_matrix);
  CHECK(code_of("%%MatrixMarket matrix coordinate real general\n2 2 1\n3 1 1\n") ==
        ErrorCode::malformed_matrix);
  CHECK(code_of("%%MatrixMarket matrix coordinate real general\n2 2 2\n1 1 1\n") ==
        ErrorCode::malformed_matrix);
  CHECK(code_of("%%MatrixMarket matrix coordinate real general\n2 2 1\n1 1 abc\n") ==
        ErrorCode::malformed_matrix);
}

TEST_CASE("diagnostics carry the source line") {
  std::istringstream in("%%MatrixMarket matrix coordinate real general\n2 2 1\n1 x 1\n");
  try {
    read_matrix_market(in, "bad.mtx");
    FAIL("expected an error");
  } catch (const Error& e) {
    CHECK(std::string(e.what()).rfind("bad.mtx:3:", 0) == 0);
  }
}

TEST_CASE("missing file") {
  try {
    read_matrix_market(std::filesystem::path("/nonexistent/x.mtx"));
    FAIL("expected an error");
  } catch (const Error& e) {
    CHECK(e.code() == ErrorCode::missing_file);
  }
}
