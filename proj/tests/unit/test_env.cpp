#include <catch_amalgamated.hpp>

#include <fstream>

#include "chtwin/env.hpp"
#include "chtwin/error.hpp"
#include "chtwin/io.hpp"
#include "support/temp_dir.hpp"

using namespace chtwin;

TEST_CASE("no-obstacle environment is deterministic", "[env]") {
  const auto a = generate_environment(7, 0, 5, 100, 100);
  const auto b = generate_environment(7, 0, 5, 100, 100);
  CHECK(a.aps.size() == 5);
  CHECK(a.obstacles.empty());
  CHECK(a == b);
  CHECK_FALSE(a == generate_environment(8, 0, 5, 100, 100));
}

TEST_CASE("generated obstacles and APs satisfy the geometric constraints", "[env]") {
  const auto env = generate_environment(7, 12, 20, 200, 200);
  REQUIRE(env.obstacles.size() == 12);
  REQUIRE(env.aps.size() == 20);
  for (const auto& o : env.obstacles) {
    const double w = o.x_max - o.x_min;
    const double h = o.y_max - o.y_min;
    CHECK(w >= 5.0);
    CHECK(w <= 30.0);
    CHECK(h >= 5.0);
    CHECK(h <= 30.0);
    CHECK(o.x_min >= 0.0);
    CHECK(o.y_min >= 0.0);
    CHECK(o.x_max <= 200.0);
    CHECK(o.y_max <= 200.0);
    CHECK(o.wall_loss_db == kDefaultWallLossDb);
  }
  for (const auto& ap : env.aps) {
    CHECK(env.in_roi(ap));
    for (const auto& o : env.obstacles) {
      const bool outside = ap.x < o.x_min || ap.x > o.x_max || ap.y < o.y_min || ap.y > o.y_max;
      CHECK(outside);
    }
  }
  CHECK_NOTHROW(env.validate());
}

TEST_CASE("every generated environment re-validates", "[env][property]") {
  for (std::uint64_t seed = 0; seed < 50; ++seed) {
    const auto env = generate_environment(seed, seed % 20, 1 + seed % 25, 60 + 3.0 * static_cast<double>(seed), 150);
    CHECK_NOTHROW(env.validate());
  }
}

TEST_CASE("saturated RoI fails AP placement", "[env]") {
  // A 5 x 5 RoI forces the single obstacle to cover it completely.
  CHECK_THROWS_AS(generate_environment(3, 1, 1, 5, 5), PlacementError);
}

TEST_CASE("bad generation arguments are rejected", "[env]") {
  CHECK_THROWS_AS(generate_environment(1, 0, 0, 100, 100), PreconditionError);
  CHECK_THROWS_AS(generate_environment(1, 0, 1, -1, 100), PreconditionError);
  CHECK_THROWS_AS(generate_environment(1, 2, 1, 4, 100), PreconditionError);
}

TEST_CASE("save/load round trip is value-identical", "[env]") {
  TempDir dir("env");
  for (std::uint64_t seed : {7u, 11u, 1234u}) {
    const auto env = generate_environment(seed, 12, 20, 200, 200);
    save_environment(env, dir / "env.json");
    CHECK(load_environment(dir / "env.json") == env);
  }
}

TEST_CASE("loading an AP inside an obstacle is an invariant violation", "[env]") {
  auto env = generate_environment(7, 12, 20, 200, 200);
  env.aps[0] = env.obstacles[0].center();
  TempDir dir("env");
  write_file_atomic(dir / "bad.json", environment_to_json(env));
  CHECK_THROWS_AS(load_environment(dir / "bad.json"), InvariantError);
}

TEST_CASE("truncated or malformed environment files are parse errors", "[env]") {
  const auto text = environment_to_json(generate_environment(7, 12, 20, 200, 200));
  CHECK_THROWS_AS(environment_from_json(text.substr(0, text.size() / 2)), ParseError);
  CHECK_THROWS_AS(environment_from_json("{\"roi\": {\"width\": 10}}"), ParseError);
  CHECK_THROWS_AS(environment_from_json("[]"), ParseError);
  CHECK_THROWS_AS(load_environment("/nonexistent/env.json"), Error);
}
