#include <catch_amalgamated.hpp>

#include <Eigen/Dense>
#include <algorithm>
#include <cmath>

#include "chtwin/error.hpp"
#include "chtwin/interp.hpp"
#include "chtwin/rng.hpp"

using namespace chtwin;
using Catch::Approx;

namespace {

ScatterSet random_scatter(Rng& rng, std::size_t n, double extent = 100.0) {
  ScatterSet s;
  for (std::size_t i = 0; i < n; ++i) {
    s.push_back({{rng.uniform(0, extent), rng.uniform(0, extent)}, rng.uniform(-120, -50)});
  }
  return s;
}

// Independent route: assemble the bordered system and solve it with Eigen.
Eigen::VectorXd dense_kriging_solution(const ScatterSet& s, const VariogramModel& v, Position q) {
  const auto n = static_cast<Eigen::Index>(s.size());
  Eigen::MatrixXd a = Eigen::MatrixXd::Zero(n + 1, n + 1);
  Eigen::VectorXd b(n + 1);
  for (Eigen::Index i = 0; i < n; ++i) {
    for (Eigen::Index j = 0; j < n; ++j) {
      const double h = distance(s[static_cast<std::size_t>(i)].pos, s[static_cast<std::size_t>(j)].pos);
      a(i, j) = h > 0 ? v.nugget + v.sill * (1 - std::exp(-h / v.range_m)) : 0.0;
    }
    a(i, n) = 1;
    a(n, i) = 1;
    const double hq = distance(q, s[static_cast<std::size_t>(i)].pos);
    b(i) = hq > 0 ? v.nugget + v.sill * (1 - std::exp(-hq / v.range_m)) : 0.0;
  }
  b(n) = 1;
  return a.fullPivLu().solve(b);
}

}  // namespace

TEST_CASE("IDW worked example", "[interp]") {
  const ScatterSet s{{{0, 0}, -60}, {{10, 0}, -80}};
  CHECK(idw_predict(s, {2.5, 0}, 2.0) == Approx(-62.0).epsilon(1e-12));
}

TEST_CASE("IDW exactness and symmetry", "[interp]") {
  const ScatterSet s{{{0, 0}, -60}, {{10, 0}, -80}, {{3, 7}, -71.25}};
  CHECK(idw_predict(s, {3, 7}) == -71.25);
  CHECK(idw_predict(s, {3 + 1e-12, 7}) == -71.25);
  const ScatterSet pair{{{0, 0}, -60}, {{10, 0}, -80}};
  CHECK(idw_predict(pair, {5, 3}) == Approx(-70.0).epsilon(1e-14));
  CHECK_THROWS_AS(idw_predict(ScatterSet{}, {0, 0}), PreconditionError);
  CHECK_THROWS_AS(idw_predict(pair, {0, 0}, 0.0), PreconditionError);
}

TEST_CASE("IDW is a convex combination", "[interp][property]") {
  Rng rng(1);
  for (int t = 0; t < 200; ++t) {
    const auto s = random_scatter(rng, 2 + static_cast<std::size_t>(t % 30));
    const auto [lo, hi] = std::minmax_element(s.begin(), s.end(), [](auto& a, auto& b) { return a.value_db < b.value_db; });
    const Position q{rng.uniform(-20, 120), rng.uniform(-20, 120)};
    const double v = idw_predict(s, q, rng.uniform(0.5, 4));
    CHECK(v >= lo->value_db - 1e-9);
    CHECK(v <= hi->value_db + 1e-9);
  }
}

TEST_CASE("Kriging degenerate cases", "[interp]") {
  const VariogramModel v{VariogramKind::exponential, 25, 40, 0};
  const ScatterSet one{{{10, 10}, -77}};
  CHECK(kriging_predict(one, v, {50, 80}) == Approx(-77).epsilon(1e-12));
  const ScatterSet pair{{{0, 0}, -60}, {{10, 0}, -80}};
  CHECK(kriging_predict(pair, v, {5, 20}) == Approx(-70).epsilon(1e-12));
}

TEST_CASE("zero-nugget Kriging interpolates data sites exactly", "[interp]") {
  Rng rng(3);
  const auto s = random_scatter(rng, 30);
  const VariogramModel v{VariogramKind::exponential, 30, 50, 0};
  const OrdinaryKriging k(s, v);
  for (const auto& p : s) CHECK(std::abs(k.predict(p.pos) - p.value_db) < 1e-6);
}

TEST_CASE("Kriging weights match a dense full-pivot solve", "[interp][property]") {
  Rng rng(5);
  for (int t = 0; t < 20; ++t) {
    const auto s = random_scatter(rng, 5 + static_cast<std::size_t>(t));
    const VariogramModel v{VariogramKind::exponential, rng.uniform(5, 60), rng.uniform(10, 80), t % 2 ? 1.5 : 0.0};
    const OrdinaryKriging k(s, v);
    for (int qn = 0; qn < 10; ++qn) {
      const Position q{rng.uniform(0, 100), rng.uniform(0, 100)};
      const auto w = k.weights(q);
      const auto ref = dense_kriging_solution(s, v, q);
      double sum = 0;
      for (std::size_t i = 0; i < w.size(); ++i) {
        CHECK(std::abs(w[i] - ref(static_cast<Eigen::Index>(i))) < 1e-8);
        sum += w[i];
      }
      CHECK(std::abs(sum - 1.0) < 1e-9);
    }
  }
}

TEST_CASE("duplicated positions make Kriging singular", "[interp]") {
  const ScatterSet s{{{0, 0}, -60}, {{10, 0}, -80}, {{0, 0}, -61}};
  const VariogramModel v{VariogramKind::exponential, 25, 40, 0};
  CHECK_THROWS_AS(OrdinaryKriging(s, v), SingularSystemError);
  const VariogramModel nug{VariogramKind::exponential, 25, 40, 2};
  CHECK_THROWS_AS(kriging_predict(s, nug, {1, 1}), SingularSystemError);
}

TEST_CASE("predictors are translation invariant", "[interp][property]") {
  Rng rng(9);
  for (int t = 0; t < 30; ++t) {
    auto s = random_scatter(rng, 12);
    const VariogramModel v{VariogramKind::exponential, 20, 35, 0.5};
    const Position q{rng.uniform(0, 100), rng.uniform(0, 100)};
    const Position shift{rng.uniform(-500, 500), rng.uniform(-500, 500)};
    const double idw = idw_predict(s, q);
    const double kr = kriging_predict(s, v, q);
    for (auto& p : s) p.pos = {p.pos.x + shift.x, p.pos.y + shift.y};
    const Position q2{q.x + shift.x, q.y + shift.y};
    CHECK(std::abs(idw_predict(s, q2) - idw) < 1e-9);
    CHECK(std::abs(kriging_predict(s, v, q2) - kr) < 1e-9);
  }
}

TEST_CASE("variogram fit by defaults", "[interp]") {
  const ScatterSet s{{{0, 0}, -65}, {{120, 0}, -55}, {{0, 120}, -65}, {{120, 120}, -55}, {{60, 60}, -60}};
  const auto v = fit_variogram(s);
  CHECK(v.sill == Approx(25.0).epsilon(1e-12));
  CHECK(v.range_m == Approx(56.5685424949238).epsilon(1e-12));
  CHECK(v.nugget == 0.0);
  CHECK(v.kind == VariogramKind::exponential);

  const ScatterSet flat{{{0, 0}, -60}, {{1, 0}, -60}, {{2, 0}, -60}, {{3, 3}, -60}, {{9, 9}, -60}};
  CHECK_THROWS_AS(fit_variogram(flat), InvariantError);
  CHECK_THROWS_AS(fit_variogram(std::span(s).first(4)), PreconditionError);
}

TEST_CASE("variogram model evaluation", "[interp]") {
  const VariogramModel v{VariogramKind::exponential, 10, 20, 1};
  CHECK(v(0.0) == 0.0);
  CHECK(v(20.0) == Approx(1 + 10 * (1 - std::exp(-1.0))));
  CHECK_THROWS_AS((VariogramModel{VariogramKind::exponential, 0, 20, 0}.validate()), InvariantError);
  CHECK_THROWS_AS((VariogramModel{VariogramKind::exponential, 1, 0, 0}.validate()), InvariantError);
  CHECK_THROWS_AS((VariogramModel{VariogramKind::exponential, 1, 1, -1}.validate()), InvariantError);
}
