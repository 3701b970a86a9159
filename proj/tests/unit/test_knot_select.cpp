#include <doctest.h>

#include <cmath>
#include <random>

#include "gaplm/error.hpp"
#include "gaplm/knot_select.hpp"
#include "gaplm/log.hpp"
#include "gaplm/simulation.hpp"

using gaplm::KnotMode;

TEST_CASE("reference counts and candidate ranges") {
  CHECK(gaplm::reference_knot_count(200, KnotMode::Auto) == 3);
  CHECK(gaplm::reference_knot_count(400, KnotMode::Auto) == 3);
  CHECK(gaplm::knot_candidates(200, KnotMode::Auto) == std::vector<int>{2, 3, 4});
  CHECK(gaplm::knot_candidates(400, KnotMode::Auto) == std::vector<int>{2, 3, 4});
  CHECK(gaplm::knot_candidates(1000, KnotMode::Auto) == std::vector<int>{3, 4, 5});
  CHECK(gaplm::knot_candidates(768, KnotMode::Auto) == std::vector<int>{3, 4, 5});
  CHECK(gaplm::reference_knot_count(400, KnotMode::Over) == 8);
  CHECK(gaplm::knot_candidates(400, KnotMode::Over) == std::vector<int>{6, 7, 8, 9, 10});
  CHECK(gaplm::knot_candidates(400, KnotMode::Under) == std::vector<int>{2});
  CHECK(gaplm::knot_candidates(1, KnotMode::Auto) == std::vector<int>{1});
  CHECK_THROWS_AS(gaplm::reference_knot_count(0, KnotMode::Auto), gaplm::DomainError);
}

TEST_CASE("candidate ranges follow ceil(2/3 N_r)..floor(4/3 N_r)") {
  for (int n = 2; n <= 5000; n += 37) {
    for (auto mode : {KnotMode::Auto, KnotMode::Over, KnotMode::Under}) {
      const double exponent = mode == KnotMode::Auto ? 1 / 5.5 : mode == KnotMode::Over ? 1 / 3.0 : 0.1;
      const int nr = static_cast<int>(std::ceil(std::pow(n, exponent)));
      const auto c = gaplm::knot_candidates(n, mode);
      REQUIRE_FALSE(c.empty());
      CHECK(c.front() * 3 >= 2 * nr);
      CHECK((c.front() - 1) * 3 < 2 * nr);
      CHECK(c.back() * 3 <= 4 * nr);
      CHECK((c.back() + 1) * 3 > 4 * nr);
    }
  }
}

TEST_CASE("mode names") {
  CHECK(gaplm::parse_knot_mode("auto") == KnotMode::Auto);
  CHECK(gaplm::parse_knot_mode("auto-over") == KnotMode::Over);
  CHECK(gaplm::parse_knot_mode("under") == KnotMode::Under);
  CHECK(gaplm::to_string(KnotMode::Over) == "over");
  CHECK_THROWS_AS(gaplm::parse_knot_mode("many"), gaplm::ConfigError);
}

TEST_CASE("search picks the BIC minimiser and is deterministic") {
  gaplm::sim::SimDesign design;
  design.n = 200;
  design.r0 = 1;
  const auto data = gaplm::sim::generate_dataset(design, 0);
  const auto fam = gaplm::QuasiFamily::bernoulli_logit();
  const auto a = gaplm::select_knots(data.y, data.x, data.z, fam, 3);
  const auto b = gaplm::select_knots(data.y, data.x, data.z, fam, 3);
  CHECK(a.reference == 3);
  CHECK(a.candidates == std::vector<int>{2, 3, 4});
  REQUIRE(a.bic_trace.size() == 3);
  CHECK(a.bic_trace == b.bic_trace);
  CHECK(a.chosen == b.chosen);
  std::size_t best = 0;
  for (std::size_t k = 0; k < 3; ++k) {
    REQUIRE(a.bic_trace[k]);
    if (*a.bic_trace[k] < *a.bic_trace[best]) best = k;
  }
  CHECK(a.chosen == a.candidates[best]);

  const auto fit = gaplm::irls_fit(data.y, gaplm::expand_design(data.x, gaplm::uniform_specs(2, 3, a.chosen)), data.z, fam);
  CHECK(*a.bic_trace[best] == doctest::Approx(-2 * fit.qloglik + fit.parameter_count() * std::log(200.0)).epsilon(1e-12));
}

TEST_CASE("ties go to the smaller count and failed candidates are excluded") {
  gaplm::sim::SimDesign design;
  design.n = 60;
  const auto data = gaplm::sim::generate_dataset(design, 1);
  const auto fam = gaplm::QuasiFamily::bernoulli_logit();
  gaplm::set_warning_handler({});
  const auto s = gaplm::select_knots(data.y, data.x, data.z, fam, 3, std::vector<int>{2, 2, 40});
  CHECK(s.chosen == 2);
  CHECK_FALSE(s.bic_trace[2].has_value());
  CHECK_THROWS(gaplm::select_knots(data.y, data.x, data.z, fam, 3, std::vector<int>{40}));
  CHECK_THROWS_AS(gaplm::select_knots(data.y, data.x, data.z, fam, 3, std::vector<int>{}), gaplm::ConfigError);
}
