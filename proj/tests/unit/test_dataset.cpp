#include <doctest.h>

#include <cmath>
#include <fstream>
#include <sstream>
#include <string>

#include "gaplm/dataset.hpp"
#include "gaplm/error.hpp"
#include "gaplm/irls.hpp"
#include "gaplm/knot_select.hpp"
#include "gaplm/log.hpp"

namespace {

gaplm::DatasetConfig toy_config() {
  gaplm::DatasetConfig c;
  c.path = std::string(GAPLM_TEST_DATA_DIR) + "/toy_gaplm.csv";
  c.response = "y";
  c.smooth = {"s1", "s2"};
  c.linear = {{"z1", "z2"}, {"z3", "z4", "z5"}};
  return c;
}

struct Silence {
  Silence() { gaplm::set_warning_handler({}); }
};

}  // namespace

TEST_CASE("toy file loads with standardized columns") {
  const auto data = gaplm::load_csv(toy_config());
  CHECK(data.n() == 300);
  CHECK(data.rows_dropped == 0);
  CHECK(data.z.cols() == 5);
  CHECK(data.x_unit.minCoeff() == 0.0);
  CHECK(data.x_unit.maxCoeff() == 1.0);
  for (int j = 0; j < 5; ++j) {
    const Eigen::VectorXd col = data.z.col(j);
    CHECK(std::abs(col.mean()) < 1e-12);
    CHECK(std::abs((col.array() - col.mean()).square().sum() / 299.0 - 1.0) < 1e-12);
  }
  CHECK(data.linear[2].name == "z3");
  CHECK(data.family.name() == "bernoulli-logit");
}

TEST_CASE("an already-standardized column is unchanged") {
  std::ostringstream csv;
  csv << "y,s,z\n";
  const double raw[] = {-1.2, 0.4, 0.9, -0.3, 0.2};
  double mean = 0, ss = 0;
  for (double v : raw) mean += v / 5;
  for (double v : raw) ss += (v - mean) * (v - mean);
  const double sd = std::sqrt(ss / 4);
  std::vector<double> zs;
  for (int i = 0; i < 5; ++i) {
    zs.push_back((raw[i] - mean) / sd);
    csv.precision(17);
    csv << (i % 2) << ',' << i * 0.1 << ',' << zs.back() << '\n';
  }
  std::istringstream in(csv.str());
  gaplm::DatasetConfig c;
  c.response = "y";
  c.smooth = {"s"};
  c.linear = {{"z"}, {}};
  const auto data = gaplm::load_csv(in, c);
  for (int i = 0; i < 5; ++i) CHECK(std::abs(data.z(i, 0) - zs[static_cast<std::size_t>(i)]) < 1e-12);
}

TEST_CASE("predictions do not depend on where standardization happens") {
  auto config = toy_config();
  const auto inside = gaplm::load_csv(config);

  std::ifstream file(config.path);
  auto table = gaplm::read_csv(file);
  for (const auto& t : inside.linear) {
    auto& col = table.columns[static_cast<std::size_t>(table.column(t.name))];
    for (double& v : col) v = t.standardize(v);
  }
  for (const auto& t : inside.smooth) {
    auto& col = table.columns[static_cast<std::size_t>(table.column(t.name))];
    for (double& v : col) v = t.standardize(v);
  }
  config.standardize = false;
  const auto outside = gaplm::prepare_dataset(table, config);
  CHECK((inside.z - outside.z).lpNorm<Eigen::Infinity>() < 1e-12);
  CHECK((inside.x_unit - outside.x_unit).lpNorm<Eigen::Infinity>() < 1e-12);

  const auto specs = gaplm::uniform_specs(2, 3, 3);
  const auto fit_in = gaplm::irls_fit(inside.y, gaplm::expand_design(inside.x_unit, specs), inside.z, inside.family);
  const auto fit_out = gaplm::irls_fit(outside.y, gaplm::expand_design(outside.x_unit, specs), outside.z, outside.family);
  CHECK((fit_in.linear_predictor - fit_out.linear_predictor).lpNorm<Eigen::Infinity>() < 1e-10);

  std::ifstream again(config.path);
  const auto raw = gaplm::read_csv(again);
  for (int i : {0, 17, 299}) {
    std::vector<double> rs, rl;
    for (const auto& t : inside.smooth) rs.push_back(raw.columns[static_cast<std::size_t>(raw.column(t.name))][static_cast<std::size_t>(i)]);
    for (const auto& t : inside.linear) rl.push_back(raw.columns[static_cast<std::size_t>(raw.column(t.name))][static_cast<std::size_t>(i)]);
    Eigen::VectorXd xu, z;
    inside.transform_row(rs, rl, xu, z);
    const std::vector<double> xs(xu.data(), xu.data() + xu.size());
    CHECK(fit_in.predict_linear(xs, z) == doctest::Approx(fit_in.linear_predictor(i)).epsilon(1e-10));
    CHECK(inside.smooth[0].unstandardize(inside.smooth[0].from_unit(xu(0))) == doctest::Approx(rs[0]).epsilon(1e-12));
  }
}

TEST_CASE("headerless files with supplied names") {
  Silence quiet;
  const std::vector<std::string> names{"a", "b", "y"};
  std::istringstream plain("1,2,0\n3,4,1\n5,7,1\n");
  const auto t = gaplm::read_csv(plain, names);
  CHECK(t.rows() == 3);
  CHECK(t.column("b") == 1);
  std::istringstream with_header("A,B,Y\n1,2,0\n3,4,1\n");
  CHECK(gaplm::read_csv(with_header, names).rows() == 2);
  std::istringstream quoted("\"x, y\",\"b\"\n\"1.5\",2\n");
  const auto q = gaplm::read_csv(quoted);
  CHECK(q.header[0] == "x, y");
  CHECK(q.columns[0][0] == 1.5);
  std::istringstream ragged("a,b\n1,2\n3\n");
  CHECK_THROWS_AS(gaplm::read_csv(ragged), gaplm::DataError);
  std::istringstream empty("");
  CHECK_THROWS_AS(gaplm::read_csv(empty), gaplm::DataError);
}

TEST_CASE("rows with missing values are dropped and counted") {
  std::vector<std::string> warnings;
  gaplm::set_warning_handler([&](std::string_view m) { warnings.emplace_back(m); });
  std::istringstream in("y,s,z,w\n0,0.1,1,5\n1,0.2,NA,3\n1,,2,4\n0,0.5,0,2\n1,0.9,3,1\n0,0.7,2.5,0\n");
  gaplm::DatasetConfig c;
  c.response = "y";
  c.smooth = {"s"};
  c.linear = {{"z"}, {"w"}};
  c.zero_missing = {"w"};
  const auto data = gaplm::load_csv(in, c);
  CHECK(data.rows_read == 6);
  CHECK(data.rows_dropped == 3);
  CHECK(data.n() == 3);
  REQUIRE(warnings.size() == 1);
  CHECK(warnings[0].find("dropped 3 of 6") != std::string::npos);
  gaplm::set_warning_handler({});
}

TEST_CASE("configuration and data errors") {
  Silence quiet;
  const std::string text = "y,s,z,k\n0,0.1,1,2\n1,0.2,2,2\n1,0.3,0,2\n";
  gaplm::DatasetConfig c;
  c.response = "y";
  c.smooth = {"s"};
  c.linear = {{"z"}, {"k"}};
  {
    std::istringstream in(text);
    try {
      (void)gaplm::load_csv(in, c);
      FAIL("expected DataError");
    } catch (const gaplm::DataError& e) {
      CHECK(std::string(e.what()).find("'k' is constant") != std::string::npos);
    }
  }
  c.linear = {{"z"}, {"nope"}};
  {
    std::istringstream in(text);
    CHECK_THROWS_AS(gaplm::load_csv(in, c), gaplm::ConfigError);
  }
  c.linear = {{"z"}, {"s"}};
  {
    std::istringstream in(text);
    CHECK_THROWS_AS(gaplm::load_csv(in, c), gaplm::ConfigError);
  }
  c.linear = {{}, {}};
  c.response = "z";
  {
    std::istringstream in(text);
    CHECK_THROWS_AS(gaplm::load_csv(in, c), gaplm::DataError);
  }
  c.family = "poisson";
  {
    std::istringstream in(text);
    CHECK(gaplm::load_csv(in, c).n() == 3);
  }
  gaplm::DatasetConfig missing = c;
  missing.path = "/nonexistent/file.csv";
  CHECK_THROWS_AS(gaplm::load_csv(missing), gaplm::ConfigError);
}

TEST_CASE("without_row removes exactly one observation") {
  const auto data = gaplm::load_csv(toy_config());
  const auto less = data.without_row(10);
  CHECK(less.n() == 299);
  CHECK(less.z.row(9) == data.z.row(9));
  CHECK(less.z.row(10) == data.z.row(11));
  CHECK(less.y(298) == data.y(299));
  CHECK_THROWS_AS(data.without_row(300), gaplm::ConfigError);
}
