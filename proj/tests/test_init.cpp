#include <catch_amalgamated.hpp>

#include <algorithm>
#include <random>

#include "delaytrack/error.hpp"
#include "delaytrack/init.hpp"
#include "delaytrack/oracle.hpp"
#include "fixtures.hpp"

using namespace delaytrack;

namespace {

const Complex kHayes = hayes_roots(0.0, -1.0, 1.0, 2).roots.front();

bool contains_near(const Eigensolution& sol, Complex s, double tol) {
  return std::any_of(sol.begin(), sol.end(), [&](const Eigenpair& e) { return std::abs(e.s - s) < tol; });
}

}  // namespace

TEST_CASE("discretized pencil dimensions") {
  const auto p = discretize(fixtures::hayes(), 16);
  CHECK(p.dimension() == 17);
  CHECK(p.block_size == 1);
  CHECK(p.nodes.size() == 17);
  CHECK(p.nodes.front() == 0.0);
  CHECK(p.nodes.back() == Catch::Approx(-1.0));

  DelayedLinearModel free;
  free.E = fixtures::mat2(1, 0, 0, 1);
  free.A0 = fixtures::mat2(0, 1, -1, 0);
  CHECK(discretize(free, 0).dimension() == 2);
  CHECK_THROWS_AS(discretize(fixtures::hayes(), 1), Error);
}

TEST_CASE("delay-free rotation has eigenvalues +-j") {
  DelayedLinearModel m;
  m.E = fixtures::mat2(1, 0, 0, 1);
  m.A0 = fixtures::mat2(0, 1, -1, 0);
  const auto sol = solve_discretized(discretize(m, 0), Complex(0, 0), 2);
  REQUIRE(sol.size() == 2);
  CHECK(contains_near(sol, Complex(0, 1), 1e-12));
  CHECK(contains_near(sol, Complex(0, -1), 1e-12));
}

TEST_CASE("Hayes pencil has the principal pair near the shift") {
  const auto sol = solve_discretized(discretize(fixtures::hayes(), 16), Complex(0, 1), 2);
  REQUIRE(sol.size() == 2);
  CHECK(contains_near(sol, kHayes, 1e-6));
  CHECK(contains_near(sol, std::conj(kHayes), 1e-6));
}

TEST_CASE("Arnoldi path agrees with the dense path") {
  std::mt19937_64 rng(21);
  const auto m = rand_ddae(40, 30, 0.1, 2, 4);
  const auto pencil = discretize(m, 10);
  SolveOptions dense_opts, sparse_opts;
  sparse_opts.dense_limit = 10;
  const auto a = solve_discretized(pencil, Complex(-1.0, 0.5), 4, dense_opts);
  const auto b = solve_discretized(pencil, Complex(-1.0, 0.5), 4, sparse_opts);
  REQUIRE(a.size() == 4);
  REQUIRE(b.size() == 4);
  for (const auto& e : a) CHECK(contains_near(b, e.s, 1e-8));
  for (const auto& e : b) CHECK(e.residual < 1e-8);
}

TEST_CASE("solutions are sorted by descending real part") {
  const auto sol = solve_discretized(discretize(fixtures::hayes(), 20), Complex(-2, 5), 8);
  for (std::size_t k = 1; k < sol.size(); ++k) CHECK(sol[k - 1].s.real() >= sol[k].s.real());
}

TEST_CASE("Newton converges quickly from a nearby guess") {
  const auto r = refine_newton(fixtures::hayes(), Complex(-0.3, 1.3), ComplexVector::Ones(1));
  CHECK(std::abs(r.s - kHayes) < 1e-10);
  CHECK(r.iterations <= 6);
  CHECK(r.residual < 1e-10);
  const Complex norm = r.phi.transpose() * r.phi;
  CHECK(std::abs(norm - 1.0) < 1e-12);
}

TEST_CASE("Newton from far away reports non-convergence") {
  try {
    refine_newton(fixtures::hayes(), Complex(5.0, 0.0), ComplexVector::Ones(1));
    FAIL("expected an error");
  } catch (const Error& e) {
    CHECK(e.code() == ErrorCode::non_convergence);
    CHECK(std::isfinite(e.residual()));
  }
}

TEST_CASE("Newton at a defective double root reports defective") {
  // s = -1 is a double eigenvalue with a single eigenvector at p = 1.
  const auto m = fixtures::fold_family().evaluate(1.0);
  const ComplexVector phi = (ComplexVector(2) << 1.0, -1.0).finished();
  try {
    refine_newton(m, Complex(-1.0, 0.0), phi, {0.0, 20, 1e-13});
    FAIL("expected an error");
  } catch (const Error& e) {
    CHECK(e.code() == ErrorCode::defective);
  }
}

TEST_CASE("initial eigenpairs are refined and certified") {
  InitSettings settings;
  settings.shift = Complex(0, 1);
  settings.count = 4;
  const auto sol = initial_eigenpairs(CharacteristicFunction(fixtures::hayes()), settings);
  REQUIRE(!sol.empty());
  CHECK(std::abs(sol.front().s - kHayes) < 1e-10);
  for (const auto& e : sol) CHECK(e.residual < 1e-10);
}

TEST_CASE("WAMS initialization refines on the transfer-function problem") {
  auto m = fixtures::hayes(0.0, -1.0, 0.05);
  WamsSpec w{0.05, 0.1, 0.02, 1e-3, 2.0, false};
  const CharacteristicFunction cf(m, w);
  InitSettings settings;
  settings.shift = Complex(-1, 0);
  settings.count = 3;
  const auto sol = initial_eigenpairs(cf, settings);
  REQUIRE(!sol.empty());
  for (const auto& e : sol) CHECK(cf.residual(e.s, e.phi) < 1e-10);
}
