#include <catch_amalgamated.hpp>

#include <cmath>

#include "chtwin/error.hpp"
#include "chtwin/propagation.hpp"
#include "chtwin/rng.hpp"

using namespace chtwin;
using Catch::Approx;

namespace {

Environment open_field(double size = 200.0) {
  Environment env;
  env.roi_width = size;
  env.roi_height = size;
  env.aps = {{1.0, 1.0}};
  return env;
}

PropagationParams no_shadowing() {
  PropagationParams p;
  p.shadowing_sigma_db = 0.0;
  return p;
}

// Brute-force obstruction oracle: walk the segment densely and report whether
// any sample lies strictly inside the rectangle.
bool sampled_obstruction(const Obstacle& o, Position a, Position b, int steps = 20000) {
  for (int k = 0; k <= steps; ++k) {
    const double t = static_cast<double>(k) / steps;
    if (o.interior_contains({a.x + t * (b.x - a.x), a.y + t * (b.y - a.y)})) return true;
  }
  return false;
}

}  // namespace

TEST_CASE("count_obstructions examples", "[propagation]") {
  Environment env = open_field(20);
  env.obstacles = {{4, -1, 6, 1, 20}};
  CHECK(count_obstructions(env, {0, 0}, {10, 0}) == 1);
  CHECK(count_obstructions(env, {0, 5}, {10, 5}) == 0);
  CHECK(count_obstructions(env, {4.5, 0.2}, {5.5, -0.3}) == 1);  // contained
}

TEST_CASE("boundary grazing is not an obstruction", "[propagation]") {
  const Obstacle o{4, 0, 6, 2, 20};
  CHECK_FALSE(segment_obstructed(o, {0, 2}, {10, 2}));    // along the top edge
  CHECK_FALSE(segment_obstructed(o, {4, -5}, {4, 5}));    // along the left edge
  CHECK_FALSE(segment_obstructed(o, {2, 0}, {6, 4}));     // touches corner (4, 2)
  CHECK_FALSE(segment_obstructed(o, {0, 0}, {4, 0}));     // ends on the boundary
  CHECK(segment_obstructed(o, {4, 0}, {6, 2}));           // diagonal through interior
  CHECK(segment_obstructed(o, {5, 1}, {5, 1}) == true);   // degenerate point inside
}

TEST_CASE("slab clipping agrees with dense sampling on random segments", "[propagation][property]") {
  Rng rng(99);
  int checked = 0;
  for (int trial = 0; trial < 3000; ++trial) {
    const double x0 = rng.uniform(0, 40), y0 = rng.uniform(0, 40);
    const Obstacle o{x0, y0, x0 + rng.uniform(1, 15), y0 + rng.uniform(1, 15), 20};
    const Position a{rng.uniform(0, 60), rng.uniform(0, 60)};
    const Position b{rng.uniform(0, 60), rng.uniform(0, 60)};
    const bool fast = segment_obstructed(o, a, b);
    const bool slow = sampled_obstruction(o, a, b);
    // Sampling can miss a clip shorter than its step; skip those near-grazing cases.
    if (fast != slow) {
      const Obstacle shrunk{o.x_min + 0.01, o.y_min + 0.01, o.x_max - 0.01, o.y_max - 0.01, 20};
      CHECK_FALSE(segment_obstructed(shrunk, a, b));
      continue;
    }
    ++checked;
    CHECK(fast == segment_obstructed(o, b, a));
  }
  CHECK(checked > 2900);
}

TEST_CASE("true_gain examples", "[propagation]") {
  Environment env = open_field();
  const auto p = no_shadowing();
  CHECK(true_gain(env, p, {10, 10}, {11, 10}) == Approx(-40.0).margin(1e-12));
  CHECK(true_gain(env, p, {0, 50}, {100, 50}) == Approx(-100.0).margin(1e-9));
  env.obstacles = {{40, 40, 60, 60, 20}};
  CHECK(true_gain(env, p, {0, 50}, {100, 50}) == Approx(-120.0).margin(1e-9));
}

TEST_CASE("distance floor clamps short links", "[propagation]") {
  const Environment env = open_field();
  const auto p = no_shadowing();
  CHECK(true_gain(env, p, {10, 10}, {10, 10}) == -40.0);
  CHECK(true_gain(env, p, {10, 10}, {10.5, 10}) == -40.0);
}

TEST_CASE("positions outside the RoI are rejected", "[propagation]") {
  const ChannelOracle oracle(open_field(), no_shadowing());
  CHECK_THROWS_AS(oracle.gain({-1, 0}, {10, 10}), PreconditionError);
  CHECK_THROWS_AS(oracle.gain({10, 10}, {10, 201}), PreconditionError);
}

TEST_CASE("disabled shadowing is identically zero", "[propagation]") {
  const ShadowingField field(open_field(), no_shadowing());
  Rng rng(1);
  for (int i = 0; i < 100; ++i) {
    const Position a{rng.uniform(0, 200), rng.uniform(0, 200)};
    CHECK(field.at(a) == 0.0);
  }
}

TEST_CASE("shadowing lattice variance matches sigma^2", "[propagation]") {
  PropagationParams p;
  p.shadowing_sigma_db = 4.0;
  p.seed = 5;
  const ShadowingField field(open_field(1000), p);
  const auto& z = field.lattice();
  REQUIRE(z.size() >= 10000);
  double mean = 0.0;
  for (double v : z) mean += v;
  mean /= static_cast<double>(z.size());
  double var = 0.0;
  for (double v : z) var += (v - mean) * (v - mean);
  var /= static_cast<double>(z.size() - 1);
  CHECK(var >= 0.8 * 16.0);
  CHECK(var <= 1.2 * 16.0);
}

TEST_CASE("shadowing interpolates lattice nodes exactly at nodes", "[propagation]") {
  PropagationParams p;
  p.seed = 3;
  const ShadowingField field(open_field(100), p);
  CHECK(field.at({10.0, 15.0}) == field.lattice()[3 * field.nodes_x() + 2]);
}

TEST_CASE("shadowing link term is symmetric", "[propagation][property]") {
  PropagationParams p;
  p.seed = 11;
  const ShadowingField field(open_field(), p);
  Rng rng(2);
  for (int i = 0; i < 500; ++i) {
    const Position a{rng.uniform(0, 200), rng.uniform(0, 200)};
    const Position b{rng.uniform(0, 200), rng.uniform(0, 200)};
    CHECK(field.link(a, b) == field.link(b, a));
  }
}

TEST_CASE("oracle reciprocity and determinism", "[propagation][property]") {
  const auto env = generate_environment(7, 12, 20, 200, 200);
  PropagationParams p;
  p.seed = env.seed;
  const ChannelOracle oracle(env, p);
  const ChannelOracle again(env, p);
  Rng rng(4);
  for (int i = 0; i < 2000; ++i) {
    const Position a{rng.uniform(0, 200), rng.uniform(0, 200)};
    const Position b{rng.uniform(0, 200), rng.uniform(0, 200)};
    CHECK(oracle.gain(a, b) == oracle.gain(b, a));
    CHECK(oracle.gain(a, b) == again.gain(a, b));
  }
}

TEST_CASE("gain strictly decreases with distance in free space", "[propagation][property]") {
  const ChannelOracle oracle(open_field(), no_shadowing());
  double prev = oracle.gain({0, 0}, {1.0, 0});
  for (double d = 1.5; d <= 200.0; d += 0.5) {
    const double g = oracle.gain({0, 0}, {d, 0});
    CHECK(g < prev);
    prev = g;
  }
}

TEST_CASE("adding an intersecting obstacle never increases gain", "[propagation][property]") {
  Rng rng(8);
  for (int trial = 0; trial < 200; ++trial) {
    auto env = generate_environment(static_cast<std::uint64_t>(trial), 6, 3, 150, 150);
    PropagationParams p;
    p.seed = static_cast<std::uint64_t>(trial);
    const Position a{rng.uniform(0, 150), rng.uniform(0, 150)};
    const Position b{rng.uniform(0, 150), rng.uniform(0, 150)};
    const double before = ChannelOracle(env, p).gain(a, b);
    const Position mid{0.5 * (a.x + b.x), 0.5 * (a.y + b.y)};
    env.obstacles.push_back({mid.x - 1, mid.y - 1, mid.x + 1, mid.y + 1, 20});
    env.aps = {{0, 0}};
    if (env.blocked(env.aps[0])) env.aps = {{150, 150}};
    if (env.blocked(env.aps[0])) continue;
    CHECK(ChannelOracle(env, p).gain(a, b) <= before);
  }
}

TEST_CASE("params sidecar round trip and validation", "[propagation]") {
  PropagationParams p;
  p.pl0_db = 38.5;
  p.seed = 42;
  CHECK(params_from_json(params_to_json(p)) == p);
  CHECK_THROWS_AS(params_from_json("{\"pl0_db\": -1}"), InvariantError);
  CHECK_THROWS_AS(params_from_json("{oops"), ParseError);
}
