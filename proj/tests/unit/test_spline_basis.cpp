#include <doctest.h>

#include <cmath>
#include <random>
#include <string>

#include "gaplm/error.hpp"
#include "gaplm/log.hpp"
#include "gaplm/spline_basis.hpp"
#include "oracles.hpp"

using gaplm::SplineSpec;

namespace {

std::vector<double> grid_with_knots(const SplineSpec& spec) {
  std::vector<double> xs;
  for (int k = 0; k <= 200; ++k) xs.push_back(k / 200.0);
  for (double t : spec.knots()) xs.push_back(t);
  return xs;
}

}  // namespace

TEST_CASE("knot vector is clamped and equally spaced") {
  const auto t = gaplm::make_knots(3, 4);
  REQUIRE(t.size() == 4u + 8u);
  for (int i = 0; i < 4; ++i) {
    CHECK(t[static_cast<std::size_t>(i)] == 0.0);
    CHECK(t[t.size() - 1 - static_cast<std::size_t>(i)] == 1.0);
  }
  for (int j = 1; j <= 4; ++j) CHECK(t[static_cast<std::size_t>(3 + j)] == doctest::Approx(j / 5.0).epsilon(1e-15));
  CHECK(SplineSpec{3, 4}.dimension() == 8);
}

TEST_CASE("basis matches the symbolic piecewise-polynomial oracle") {
  for (int degree = 1; degree <= 5; ++degree) {
    for (int interior = 0; interior <= 6; ++interior) {
      const SplineSpec spec{degree, interior};
      const oracle::PiecewiseBSpline ref(degree, spec.knots());
      REQUIRE(ref.size() == spec.dimension());
      for (double x : grid_with_knots(spec)) {
        const auto b = gaplm::eval_basis(x, spec);
        for (int j = 0; j < spec.dimension(); ++j) {
          INFO("degree " << degree << " J " << interior << " x " << x << " j " << j);
          CHECK(std::abs(b(j) - ref.value(j, x)) < 1e-12);
        }
      }
    }
  }
}

TEST_CASE("partition of unity and non-negativity") {
  for (int degree = 1; degree <= 6; ++degree) {
    for (int interior = 0; interior <= 8; ++interior) {
      const SplineSpec spec{degree, interior};
      for (double x : grid_with_knots(spec)) {
        const auto b = gaplm::eval_basis(x, spec);
        CHECK(std::abs(b.sum() - 1.0) < 1e-12);
        CHECK(b.minCoeff() >= 0.0);
      }
    }
  }
}

TEST_CASE("no interior knots reduces to the Bernstein basis") {
  const SplineSpec spec{3, 0};
  const auto b = gaplm::eval_basis(0.5, spec);
  const double expected[] = {0.125, 0.375, 0.375, 0.125};
  for (int k = 0; k < 4; ++k) CHECK(std::abs(b(k) - expected[k]) < 1e-15);
  for (double x : {0.0, 0.1, 0.37, 0.9, 1.0}) {
    const auto bx = gaplm::eval_basis(x, spec);
    for (int k = 0; k < 4; ++k) CHECK(std::abs(bx(k) - oracle::bernstein(3, k, x)) < 1e-14);
  }
}

TEST_CASE("local support: B_j vanishes outside [t_j, t_{j+degree+1}]") {
  const SplineSpec spec{3, 5};
  const auto t = spec.knots();
  for (int k = 0; k <= 400; ++k) {
    const double x = k / 400.0;
    const auto b = gaplm::eval_basis(x, spec);
    for (int j = 0; j < spec.dimension(); ++j) {
      const double lo = t[static_cast<std::size_t>(j)];
      const double hi = t[static_cast<std::size_t>(j + spec.degree + 1)];
      if (x < lo || x > hi) CHECK(b(j) == 0.0);
    }
    int nonzero = 0;
    for (int j = 0; j < spec.dimension(); ++j) nonzero += b(j) != 0.0 ? 1 : 0;
    CHECK(nonzero <= spec.degree + 1);
  }
}

TEST_CASE("cubic basis is continuous with continuous first and second derivatives at interior knots") {
  const SplineSpec spec{3, 4};
  const auto t = spec.knots();
  const double h = 1e-6;
  for (int k = 1; k <= spec.interior; ++k) {
    const double knot = t[static_cast<std::size_t>(spec.degree + k)];
    const auto left = gaplm::eval_basis(knot - h, spec);
    const auto mid = gaplm::eval_basis(knot, spec);
    const auto right = gaplm::eval_basis(knot + h, spec);
    const auto left2 = gaplm::eval_basis(knot - 2 * h, spec);
    const auto right2 = gaplm::eval_basis(knot + 2 * h, spec);
    for (int j = 0; j < spec.dimension(); ++j) {
      CHECK(std::abs(left(j) - right(j)) < 1e-4);
      const double d_left = (mid(j) - left(j)) / h;
      const double d_right = (right(j) - mid(j)) / h;
      CHECK(std::abs(d_left - d_right) < 1e-3);
      const double dd_left = (mid(j) - 2 * left(j) + left2(j)) / (h * h);
      const double dd_right = (right2(j) - 2 * right(j) + mid(j)) / (h * h);
      CHECK(std::abs(dd_left - dd_right) < 0.5);
    }
  }
}

TEST_CASE("nonzero evaluation agrees with the full evaluation") {
  const SplineSpec spec{3, 6};
  const auto t = spec.knots();
  std::vector<double> out(4);
  for (int k = 0; k <= 100; ++k) {
    const double x = k / 100.0;
    const int first = gaplm::eval_nonzero_basis(x, 3, t, out);
    const auto b = gaplm::eval_basis(x, spec);
    for (int j = 0; j < 4; ++j) CHECK(b(first + j) == doctest::Approx(out[static_cast<std::size_t>(j)]).epsilon(1e-15));
  }
}

TEST_CASE("points outside the unit interval are rejected") {
  CHECK_THROWS_AS(gaplm::eval_basis(-1e-9, SplineSpec{}), gaplm::DomainError);
  CHECK_THROWS_AS(gaplm::eval_basis(1.0 + 1e-9, SplineSpec{}), gaplm::DomainError);
  CHECK_THROWS_AS(gaplm::eval_basis(std::nan(""), SplineSpec{}), gaplm::DomainError);
  CHECK_THROWS_AS(gaplm::eval_basis(0.5, SplineSpec{0, 2}), gaplm::DomainError);
}

TEST_CASE("to_unit maps the covariate range and clamps with a warning") {
  std::vector<std::string> warnings;
  gaplm::set_warning_handler([&](std::string_view m) { warnings.emplace_back(m); });
  const SplineSpec spec{3, 2, 10.0, 30.0};
  CHECK(spec.to_unit(20.0) == doctest::Approx(0.5));
  CHECK(spec.from_unit(0.25) == doctest::Approx(15.0));
  CHECK(warnings.empty());
  CHECK(spec.to_unit(35.0) == 1.0);
  CHECK(warnings.size() == 1);
  gaplm::set_warning_handler({});
}

TEST_CASE("design expansion reports non-finite entries by row and column") {
  Eigen::MatrixXd x(3, 2);
  x << 0.1, 0.2, 0.3, std::nan(""), 0.5, 0.6;
  const std::vector<SplineSpec> specs{{3, 1}, {3, 1}};
  try {
    (void)gaplm::expand_design(x, specs);
    FAIL("expected DataError");
  } catch (const gaplm::DataError& e) {
    const std::string msg = e.what();
    CHECK(msg.find("row 1") != std::string::npos);
    CHECK(msg.find("column 1") != std::string::npos);
  }
}

TEST_CASE("centered components have empirical mean zero") {
  std::mt19937_64 rng(11);
  std::uniform_real_distribution<double> unif;
  Eigen::MatrixXd x(157, 2);
  for (Eigen::Index i = 0; i < x.rows(); ++i) x(i, 0) = unif(rng), x(i, 1) = unif(rng) * unif(rng);
  const std::vector<SplineSpec> specs{{3, 3}, {2, 5}};
  const auto basis = gaplm::expand_design(x, specs);
  CHECK(basis.total_columns() == 7 + 8);
  for (int a = 0; a < 2; ++a) {
    Eigen::VectorXd gamma(basis.block_width(a));
    for (Eigen::Index j = 0; j < gamma.size(); ++j) gamma(j) = 3.0 * unif(rng) - 1.5;
    const auto comp = gaplm::center_component(gamma, basis, a);
    double mean = 0.0;
    for (Eigen::Index i = 0; i < x.rows(); ++i) mean += comp(x(i, a));
    CHECK(std::abs(mean / x.rows()) < 1e-10);
    const double u = 0.42;
    CHECK(comp.gradient(u, basis.block_means(a)).dot(gamma) == doctest::Approx(comp(u)).epsilon(1e-12));
  }
}
