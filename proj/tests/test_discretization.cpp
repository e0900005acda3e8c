#include "doctest.h"

#include "bgk/derivatives.hpp"
#include "bgk/io.hpp"
#include "bgk/rng.hpp"

#include <cmath>
#include <filesystem>
#include <fstream>

using namespace bgk;

namespace {

FieldArray<double> sample(const SpatialGrid<double>& g, const std::function<double(double, double)>& fn, int cols = 1) {
  FieldArray<double> f(g.size(), cols);
  for (Index i = 0; i < g.size(); ++i) {
    const double x = g.center(i, 0);
    const double y = g.dim() > 1 ? g.center(i, 1) : 0.0;
    for (int c = 0; c < cols; ++c) f(i, c) = fn(x, y) * (1.0 + c);
  }
  return f;
}

std::filesystem::path temp_path(const std::string& name) {
  return std::filesystem::temp_directory_path() / ("bgk_test_" + name);
}

}  // namespace

TEST_CASE("spatial grid indexing wraps periodically") {
  CHECK_THROWS_AS(SpatialGrid<double>::cube(1, 3), ConfigError);
  const auto g = SpatialGrid<double>({4, 5}, {1.0, 2.0});
  CHECK(g.size() == 20);
  CHECK(g.spacing(0) == doctest::Approx(0.25));
  CHECK(g.spacing(1) == doctest::Approx(0.4));
  for (Index c = 0; c < g.size(); ++c) {
    for (int a = 0; a < 2; ++a) {
      CHECK(g.shift(g.shift(c, a, 1), a, -1) == c);
      CHECK(g.shift(c, a, g.count(a)) == c);
      CHECK(g.coordinate(g.shift(c, a, 1), a) == (g.coordinate(c, a) + 1) % g.count(a));
      CHECK(g.coordinate(g.shift(c, a, 1), 1 - a) == g.coordinate(c, 1 - a));
    }
  }
  CHECK(g.line_starts(0).size() == 5);
  CHECK(g.line_starts(1).size() == 4);
}

TEST_CASE("velocity grid is a symmetric midpoint grid") {
  const VelocityGrid<double> v(2, 6, 3.0);
  CHECK(v.size() == 36);
  CHECK(v.weights().sum() == doctest::Approx(v.box_volume()).epsilon(1e-14));
  CHECK((v.weights() > 0.0).all());
  for (Index j = 0; j < v.size(); ++j) CHECK((v.node(j) + v.node(v.mirror(j))).norm() <= 1e-15);
}

TEST_CASE("derivative of a constant vanishes") {
  const auto g = SpatialGrid<double>::cube(2, 8);
  const FieldArray<double> f = FieldArray<double>::Constant(g.size(), 3, 2.5);
  for (int order : {2, 4})
    for (int a = 0; a < 2; ++a) CHECK(spatial_derivative(g, f, a, order).abs().maxCoeff() == 0.0);
}

TEST_CASE("central differences converge at their order on sin") {
  for (int order : {2, 4}) {
    double prev = 0;
    for (int n : {32, 64, 128}) {
      const auto g = SpatialGrid<double>::cube(1, n);
      const FieldArray<double> f = sample(g, [](double x, double) { return std::sin(x); });
      const FieldArray<double> exact = sample(g, [](double x, double) { return std::cos(x); });
      const double err = (spatial_derivative(g, f, 0, order) - exact).abs().maxCoeff();
      if (prev > 0) CHECK(std::log2(prev / err) == doctest::Approx(order).epsilon(0.05));
      prev = err;
    }
  }
}

TEST_CASE("spatial derivative is linear and rejects bad arguments") {
  const auto g = SpatialGrid<double>::cube(1, 16);
  SplitMix64 rng(1);
  FieldArray<double> a(16, 3), b(16, 3);
  for (Index i = 0; i < a.size(); ++i) {
    a(i) = rng.uniform(-1, 1);
    b(i) = rng.uniform(-1, 1);
  }
  const FieldArray<double> lhs = spatial_derivative(g, FieldArray<double>(a + 2.0 * b), 0);
  const FieldArray<double> rhs = spatial_derivative(g, a, 0) + 2.0 * spatial_derivative(g, b, 0);
  CHECK((lhs - rhs).abs().maxCoeff() <= 1e-13);
  CHECK_THROWS_AS(spatial_derivative(g, a, 1), ConfigError);
  CHECK_THROWS_AS(spatial_derivative(g, a, -1), ConfigError);
  CHECK_THROWS_AS(spatial_derivative(g, a, 0, 3), ConfigError);
}

TEST_CASE("multi-index derivatives") {
  const auto g = SpatialGrid<double>::cube(2, 32);
  const FieldArray<double> f =
      sample(g, [](double x, double y) { return std::sin(x) * std::cos(2 * y) + std::cos(x + y); }, 2);
  CHECK((multi_index_derivative(g, f, {0, 0}) - f).abs().maxCoeff() == 0.0);
  const FieldArray<double> twice = spatial_derivative(g, FieldArray<double>(spatial_derivative(g, f, 0)), 0);
  CHECK((multi_index_derivative(g, f, {2, 0}) - twice).abs().maxCoeff() == 0.0);

  // mixed derivatives commute with the composition order
  const FieldArray<double> xy = spatial_derivative(g, FieldArray<double>(spatial_derivative(g, f, 0)), 1);
  const FieldArray<double> yx = spatial_derivative(g, FieldArray<double>(spatial_derivative(g, f, 1)), 0);
  CHECK((xy - yx).abs().maxCoeff() <= 1e-12);

  CHECK_THROWS_AS(multi_index_derivative(g, f, {3, 2}, 2, 4), ConfigError);
  CHECK_THROWS_AS(multi_index_derivative(g, f, {1}, 2, 4), ConfigError);

  const auto second = multi_indices_of_order(2, 2);
  REQUIRE(second.size() == 3);
  CHECK(second[0] == MultiIndex{2, 0});
  CHECK(second[1] == MultiIndex{1, 1});
  CHECK(second[2] == MultiIndex{0, 2});
  CHECK(multi_indices_up_to(2, 2).size() == 6);
  CHECK(multi_indices_up_to(1, 3).size() == 4);
}

TEST_CASE("derivatives commute with periodic shifts and sum to zero") {
  const auto g = SpatialGrid<double>::cube(1, 24);
  SplitMix64 rng(9);
  FieldArray<double> f(24, 4);
  for (Index i = 0; i < f.size(); ++i) f(i) = rng.uniform(-1, 1);
  for (int shift : {1, 5, 24}) {
    FieldArray<double> rolled(24, 4);
    for (Index i = 0; i < 24; ++i) rolled.row(g.shift(i, 0, shift)) = f.row(i);
    const FieldArray<double> d = spatial_derivative(g, f, 0, 4);
    const FieldArray<double> dr = spatial_derivative(g, rolled, 0, 4);
    for (Index i = 0; i < 24; ++i) CHECK((dr.row(g.shift(i, 0, shift)) == d.row(i)).all());
  }
  for (int order : {2, 4}) {
    const FieldArray<double> d = spatial_derivative(g, f, 0, order);
    for (Index c = 0; c < 4; ++c) CHECK(std::abs(d.col(c).sum() * g.spacing(0)) <= 1e-12);
  }
}

TEST_CASE("snapshot round trip is bitwise and follows the byte layout") {
  const auto p = derive_params(1.1, 2);
  const auto space = SpatialGrid<double>({4, 6}, {1.5, 2.5});
  const VelocityGrid<double> vel(2, 5, 3.0);
  SplitMix64 rng(3);
  KineticField<double> F(space, vel);
  for (Index i = 0; i < F.values.size(); ++i) F.values(i) = rng.uniform();
  const SolverState<double> s{F, 0.75, 42};
  const auto path = temp_path("snapshot.bin");
  write_snapshot(path, s, p.gamma);

  const auto expected = 8 + 4 + 4 * 2 + 4 + 8 + 8 + 8 * 2 + 8 + 8 + 8 * 24 * 25;
  CHECK(std::filesystem::file_size(path) == static_cast<std::uintmax_t>(expected));
  std::ifstream in(path, std::ios::binary);
  char head[12];
  in.read(head, 12);
  CHECK(std::string(head, 8) == "BGKSNAP1");
  CHECK(static_cast<unsigned char>(head[8]) == 2);

  const Snapshot back = read_snapshot(path);
  CHECK(back.t == 0.75);
  CHECK(back.steps == 42u);
  CHECK(back.gamma == p.gamma);
  CHECK(back.velocity_points == 5);
  CHECK(back.half_width == 3.0);
  CHECK(back.space.counts() == space.counts());
  CHECK(back.space.lengths() == space.lengths());
  CHECK((back.values == F.values).all());
  std::filesystem::remove(path);

  const auto bad = temp_path("not_a_snapshot.bin");
  std::ofstream(bad) << "hello";
  CHECK_THROWS_AS(read_snapshot(bad), ConfigError);
  std::filesystem::remove(bad);
}

TEST_CASE("CSV writer is RFC-4180 and round-trips numbers") {
  CHECK(CsvWriter::quote("plain") == "plain");
  CHECK(CsvWriter::quote("a,b") == "\"a,b\"");
  CHECK(CsvWriter::quote("say \"hi\"") == "\"say \"\"hi\"\"\"");
  CHECK(CsvWriter::format(0.1) == "0.1");
  CHECK(CsvWriter::format(-2.5e-300) == "-2.5e-300");

  const auto path = temp_path("table.csv");
  const std::vector<double> row{0.1, 1.0 / 3.0, -7e-20, 1e300};
  {
    CsvWriter w(path);
    w.header({"t", "x,y", "z", "w"});
    w.row(row);
    CHECK_THROWS(w.row({1.0}));
  }
  std::ifstream raw(path, std::ios::binary);
  std::string first;
  std::getline(raw, first);
  CHECK(first == "t,\"x,y\",z,w\r");
  const CsvTable t = read_csv(path);
  CHECK(t.columns[1] == "x,y");
  REQUIRE(t.rows.size() == 1);
  for (std::size_t k = 0; k < row.size(); ++k) CHECK(t.rows[0][k] == row[k]);
  std::filesystem::remove(path);
}
