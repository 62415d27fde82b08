#include <catch_amalgamated.hpp>

#include <random>

#include "complex_oracle.hpp"
#include "delaytrack/charfun.hpp"
#include "delaytrack/error.hpp"
#include "fixtures.hpp"

using namespace delaytrack;

namespace {

double rel(Complex a, Complex b) { return std::abs(a - b) / std::max(1.0, std::abs(b)); }

ComplexDenseMatrix dense(const ComplexSparseMatrix& m) { return ComplexDenseMatrix(m); }

}  // namespace

TEST_CASE("Hayes characteristic value at the principal root is tiny") {
  const Complex s(-0.318131505204764, 1.337235701430689);
  const auto P = characteristic_matrix(fixtures::hayes(), s);
  CHECK(std::abs(P.coeff(0, 0)) < 1e-12);
}

TEST_CASE("delay-free slope is E") {
  DelayedLinearModel m;
  m.E = fixtures::mat2(1, 2, 3, 4);
  m.A0 = fixtures::mat2(0, 1, -1, 0);
  const auto S = dense(characteristic_slope(m, Complex(0.3, -2.0)));
  CHECK((S - DenseMatrix(m.E).cast<Complex>()).norm() == 0.0);
}

TEST_CASE("slope matches central differences of P") {
  std::mt19937_64 rng(11);
  std::uniform_real_distribution<double> u(-1.5, 1.5);
  for (int trial = 0; trial < 20; ++trial) {
    const auto m = fixtures::random_model(4, 3, rng);
    const Complex s(u(rng), u(rng));
    const double d = 1e-6;
    const ComplexDenseMatrix fd =
        (dense(characteristic_matrix(m, s + d)) - dense(characteristic_matrix(m, s - d))) / (2 * d);
    const ComplexDenseMatrix an = dense(characteristic_slope(m, s));
    CHECK((fd - an).norm() <= 1e-6 * std::max(1.0, an.norm()));
  }
}

TEST_CASE("P has the union sparsity pattern") {
  DelayedLinearModel m;
  m.E = fixtures::mat2(1, 0, 0, 0);
  m.A0 = fixtures::mat2(0, 1, 0, 0);
  m.delays.push_back({1.0, fixtures::mat2(0, 0, 1, 0)});
  CHECK(characteristic_matrix(m, Complex(0.1, 0.2)).nonZeros() == 3);
}

TEST_CASE("overflow in the delay exponential is a nonfinite error") {
  const auto m = fixtures::hayes(0.0, -1.0, 1.0);
  try {
    characteristic_matrix(m, Complex(-1000.0, 0.0));
    FAIL("expected an error");
  } catch (const Error& e) {
    CHECK(e.code() == ErrorCode::nonfinite);
  }
}

TEST_CASE("ideal channel transfers are identity") {
  WamsSpec w;
  w.tau0 = 0.1;
  w.ideal_channel = true;
  CHECK(dropout_transfer(w, Complex(0.2, 3.0)) == Complex(1.0, 0.0));
  CHECK(noise_transfer(w, Complex(0.2, 3.0)) == Complex(1.0, 0.0));
  CHECK(dropout_transfer_slope(w, Complex(0.2, 3.0)) == Complex(0.0, 0.0));
}

TEST_CASE("transfer functions agree with the closed forms") {
  WamsSpec w{0.05, 0.1, 0.02, 1e-3, 2.0, false};
  std::mt19937_64 rng(3);
  std::uniform_real_distribution<double> re(-3.0, 1.0), im(-40.0, 40.0);
  for (int k = 0; k < 50; ++k) {
    const Complex s(re(rng), im(rng));
    CHECK(rel(dropout_transfer(w, s), oracle::ref_dropout(w, s)) < 1e-13);
    CHECK(rel(noise_transfer(w, s), oracle::ref_noise(w, s)) < 1e-13);
    CHECK(rel(dropout_transfer_slope(w, s), oracle::ref_dropout_slope(w, s)) < 1e-12);
    CHECK(rel(noise_transfer_slope(w, s), oracle::ref_noise_slope(w, s)) < 1e-12);
  }
}

TEST_CASE("transfer slopes match central differences") {
  WamsSpec w{0.05, 0.1, 0.02, 1e-3, 2.5, false};
  for (int k = 0; k < 25; ++k) {
    const Complex s(-1.0 + 0.1 * k, 0.5 + 1.3 * k);
    const auto fp = [&](Complex z) { return dropout_transfer(w, z); };
    const auto fs = [&](Complex z) { return noise_transfer(w, z); };
    CHECK(rel(dropout_transfer_slope(w, s), oracle::central(fp, s)) < 1e-6);
    CHECK(rel(noise_transfer_slope(w, s), oracle::central(fs, s)) < 1e-6);
  }
}

TEST_CASE("dropout transfer has a removable point at s = 0 reported as a singularity") {
  WamsSpec w{0.05, 0.1, 0.02, 1e-3, 2.0, false};
  try {
    dropout_transfer(w, Complex(0.0, 0.0));
    FAIL("expected an error");
  } catch (const Error& e) {
    CHECK(e.code() == ErrorCode::singularity);
  }
}

TEST_CASE("noise transfer on the branch cut is a singularity for fractional shape") {
  WamsSpec w{0.05, 0.0, 0.02, 1.0, 1.5, false};
  try {
    noise_transfer(w, Complex(-2.0, 0.0));
    FAIL("expected an error");
  } catch (const Error& e) {
    CHECK(e.code() == ErrorCode::singularity);
  }
}

TEST_CASE("WAMS spec validation") {
  WamsSpec w{0.05, 1.0, 0.02, 1e-3, 2.0, false};
  CHECK_THROWS_AS(w.validate(), Error);
  w.dropout_rate = 0.2;
  w.period = 0.0;
  CHECK_THROWS_AS(w.validate(), Error);
  w.period = 0.02;
  CHECK_NOTHROW(w.validate());
}

TEST_CASE("WAMS characteristic slope matches central differences") {
  WamsSpec w{0.05, 0.1, 0.02, 1e-3, 2.0, false};
  std::mt19937_64 rng(5);
  auto m = fixtures::random_model(3, 1, rng);
  m.delays[0].tau = w.tau0;
  const CharacteristicFunction cf(m, w);
  const Complex s(-0.4, 2.2);
  const double d = 1e-6;
  const ComplexDenseMatrix fd = (dense(cf.matrix(s + d)) - dense(cf.matrix(s - d))) / (2 * d);
  const ComplexDenseMatrix an = dense(cf.slope(s));
  CHECK((fd - an).norm() <= 1e-6 * std::max(1.0, an.norm()));
}

TEST_CASE("degenerate WAMS channel reduces to a constant delay") {
  std::mt19937_64 rng(9);
  auto m = fixtures::random_model(4, 1, rng);
  WamsSpec w;
  w.tau0 = m.delays[0].tau;
  w.ideal_channel = true;
  const CharacteristicFunction plain(m), wams(m, w);
  const Complex s(0.2, -1.1);
  CHECK((dense(plain.matrix(s)) - dense(wams.matrix(s))).norm() < 1e-13);
  CHECK((dense(plain.slope(s)) - dense(wams.slope(s))).norm() < 1e-13);
}
