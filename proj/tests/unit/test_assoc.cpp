#include <catch_amalgamated.hpp>

#include <algorithm>
#include <cmath>

#include "chtwin/assoc.hpp"
#include "chtwin/error.hpp"
#include "chtwin/plfit.hpp"
#include "chtwin/propagation.hpp"
#include "chtwin/rng.hpp"

using namespace chtwin;

namespace {

PropagationParams los_params() {
  PropagationParams p;
  p.shadowing_sigma_db = 0;
  return p;
}

// UE at (50, 50); AP 0 is 10 m away behind a 60 dB wall, AP 1 is 20 m away in LoS.
Environment blocked_nearest_scene() {
  Environment env;
  env.roi_width = 100;
  env.roi_height = 100;
  env.obstacles.push_back({54, 40, 56, 60, 60});
  env.aps = {{60, 50}, {50, 70}};
  return env;
}

class Transformed final : public GainPredictor {
 public:
  Transformed(const GainPredictor& base, double (*f)(double)) : base_(base), f_(f) {}
  double gain(Position tx, Position rx) const override { return f_(base_.gain(tx, rx)); }
  std::string tag() const override { return "transformed"; }

 private:
  const GainPredictor& base_;
  double (*f_)(double);
};

}  // namespace

TEST_CASE("gain criterion avoids the blocked nearest AP", "[assoc]") {
  const auto env = blocked_nearest_scene();
  const ChannelOracle oracle(env, los_params());
  const Position ue{50, 50};
  CHECK(std::abs(oracle.gain(env.aps[0], ue) + 130) <= 1e-9);
  CHECK(std::abs(oracle.gain(env.aps[1], ue) + 79.0309) <= 1e-4);

  const auto by_gain = associate_by_gain(env, oracle, ue, 1);
  CHECK(by_gain.indices() == std::vector<std::size_t>{1});
  CHECK(by_gain.selected[0].score == oracle.gain(env.aps[1], ue));
  const auto by_dist = associate_by_distance(env, ue, 1);
  CHECK(by_dist.indices() == std::vector<std::size_t>{0});
  CHECK(by_dist.selected[0].score == 10.0);
}

TEST_CASE("k equal to the AP count selects every AP", "[assoc]") {
  const auto env = generate_environment(3, 12, 20, 200, 200);
  const ChannelOracle oracle(env, PropagationParams{});
  auto idx = associate_by_gain(env, oracle, {100, 100}, 20).indices();
  std::sort(idx.begin(), idx.end());
  for (std::size_t i = 0; i < 20; ++i) CHECK(idx[i] == i);
}

TEST_CASE("full ties resolve to the lowest indices", "[assoc]") {
  Environment env;
  env.roi_width = 100;
  env.roi_height = 100;
  env.aps = {{50, 80}, {80, 50}, {50, 20}, {20, 50}};
  const PlPredictor pl({40, 30, 1});
  CHECK(associate_by_gain(env, pl, {50, 50}, 2).indices() == std::vector<std::size_t>{0, 1});
  CHECK(associate_by_distance(env, {50, 50}, 3).indices() == std::vector<std::size_t>{0, 1, 2});
  const std::vector<double> scores{1, 5, 5, 5, 0};
  CHECK(top_k_highest(scores, 2)[0].ap_index == 1);
  CHECK(top_k_highest(scores, 2)[1].ap_index == 2);
  CHECK(top_k_lowest(scores, 1)[0].ap_index == 4);
}

TEST_CASE("k out of range is rejected", "[assoc]") {
  const auto env = blocked_nearest_scene();
  const PlPredictor pl({40, 30, 1});
  CHECK_THROWS_AS(associate_by_gain(env, pl, {50, 50}, 0), PreconditionError);
  CHECK_THROWS_AS(associate_by_gain(env, pl, {50, 50}, 3), PreconditionError);
  CHECK_THROWS_AS(associate_by_distance(env, {50, 50}, 3), PreconditionError);
  Environment single = env;
  single.aps = {{10, 10}};
  CHECK(associate_by_distance(single, {90, 90}, 1).indices() == std::vector<std::size_t>{0});
}

TEST_CASE("PL gain selection equals distance selection", "[assoc][property]") {
  const PlPredictor pl({40, 30, 1});
  Rng rng(21);
  int checked = 0;
  for (std::uint64_t s = 0; s < 40; ++s) {
    const auto env = generate_environment(s, 12, 20, 200, 200);
    for (int u = 0; u < 10; ++u) {
      const Position ue{rng.uniform(0, 200), rng.uniform(0, 200)};
      if (std::any_of(env.aps.begin(), env.aps.end(), [&](Position a) { return distance(a, ue) < 1; })) continue;
      CHECK(associate_by_gain(env, pl, ue, 5).indices() == associate_by_distance(env, ue, 5).indices());
      ++checked;
    }
  }
  CHECK(checked > 300);
}

TEST_CASE("selection is invariant to increasing score transforms", "[assoc][property]") {
  Rng rng(5);
  for (std::uint64_t s = 0; s < 20; ++s) {
    const auto env = generate_environment(100 + s, 12, 20, 200, 200);
    const ChannelOracle oracle(env, PropagationParams{});
    const Transformed affine(oracle, [](double g) { return 3 * g + 17; });
    const Transformed expo(oracle, [](double g) { return std::exp(g / 20); });
    const Position ue{rng.uniform(0, 200), rng.uniform(0, 200)};
    const auto ref = associate_by_gain(env, oracle, ue, 5).indices();
    CHECK(associate_by_gain(env, affine, ue, 5).indices() == ref);
    CHECK(associate_by_gain(env, expo, ue, 5).indices() == ref);
  }
}

TEST_CASE("association CSV", "[assoc]") {
  const auto env = blocked_nearest_scene();
  const auto r = associate_by_distance(env, {50, 50}, 2);
  CHECK(association_to_csv(r) == "rank,ap_index,score_db\n1,0,10\n2,1,20\n");
}
