#include "chtwin/env.hpp"

#include <algorithm>
#include <json.hpp>

#include "chtwin/error.hpp"
#include "chtwin/io.hpp"
#include "chtwin/rng.hpp"

namespace chtwin {

namespace {

bool finite(Position p) { return std::isfinite(p.x) && std::isfinite(p.y); }

std::string describe(Position p) {
  return "(" + format_double(p.x) + ", " + format_double(p.y) + ")";
}

}  // namespace

bool Environment::blocked(Position p) const {
  return std::any_of(obstacles.begin(), obstacles.end(),
                     [p](const Obstacle& o) { return o.contains(p); });
}

void Environment::validate() const {
  if (!(std::isfinite(roi_width) && roi_width > 0.0 && std::isfinite(roi_height) &&
        roi_height > 0.0)) {
    throw InvariantError("RoI dimensions must be positive and finite");
  }
  for (std::size_t i = 0; i < obstacles.size(); ++i) {
    const auto& o = obstacles[i];
    const std::string tag = "obstacle " + std::to_string(i);
    if (!(std::isfinite(o.x_min) && std::isfinite(o.x_max) && std::isfinite(o.y_min) &&
          std::isfinite(o.y_max))) {
      throw InvariantError(tag + ": non-finite bounds");
    }
    if (!(o.x_min < o.x_max && o.y_min < o.y_max)) throw InvariantError(tag + ": empty rectangle");
    if (!(std::isfinite(o.wall_loss_db) && o.wall_loss_db >= 0.0)) {
      throw InvariantError(tag + ": wall_loss_db must be >= 0");
    }
  }
  if (aps.empty()) throw InvariantError("environment has no access points");
  for (std::size_t i = 0; i < aps.size(); ++i) {
    const auto& p = aps[i];
    const std::string tag = "AP " + std::to_string(i) + " at " + describe(p);
    if (!finite(p)) throw InvariantError(tag + ": non-finite coordinates");
    if (!in_roi(p)) throw InvariantError(tag + ": outside RoI");
    if (blocked(p)) throw InvariantError(tag + ": inside an obstacle");
  }
}

Environment generate_environment(std::uint64_t seed, std::size_t n_obstacles, std::size_t n_aps,
                                 double roi_width, double roi_height) {
  if (n_aps < 1) throw PreconditionError("n_aps must be >= 1");
  if (!(roi_width > 0.0 && roi_height > 0.0 && std::isfinite(roi_width) &&
        std::isfinite(roi_height))) {
    throw PreconditionError("RoI dimensions must be positive");
  }
  if (n_obstacles > 0 && (roi_width < kMinObstacleSide || roi_height < kMinObstacleSide)) {
    throw PreconditionError("RoI is smaller than the minimum obstacle side");
  }

  Environment env;
  env.roi_width = roi_width;
  env.roi_height = roi_height;
  env.seed = seed;

  Rng rng(seed);
  const double max_w = std::min(kMaxObstacleSide, roi_width);
  const double max_h = std::min(kMaxObstacleSide, roi_height);
  env.obstacles.reserve(n_obstacles);
  for (std::size_t i = 0; i < n_obstacles; ++i) {
    Obstacle o;
    const double w = rng.uniform(kMinObstacleSide, max_w);
    const double h = rng.uniform(kMinObstacleSide, max_h);
    o.x_min = rng.uniform(0.0, roi_width - w);
    o.y_min = rng.uniform(0.0, roi_height - h);
    o.x_max = std::min(o.x_min + w, roi_width);
    o.y_max = std::min(o.y_min + h, roi_height);
    env.obstacles.push_back(o);
  }

  env.aps.reserve(n_aps);
  for (std::size_t i = 0; i < n_aps; ++i) {
    bool placed = false;
    for (int attempt = 0; attempt < kMaxPlacementAttempts; ++attempt) {
      const Position p{rng.uniform(0.0, roi_width), rng.uniform(0.0, roi_height)};
      if (!env.blocked(p)) {
        env.aps.push_back(p);
        placed = true;
        break;
      }
    }
    if (!placed) {
      throw PlacementError("could not place AP " + std::to_string(i) + " outside obstacles in " +
                           std::to_string(kMaxPlacementAttempts) + " attempts (RoI saturated)");
    }
  }
  env.validate();
  return env;
}

namespace {

using nlohmann::json;

json position_json(Position p) { return json{{"x", p.x}, {"y", p.y}}; }

double number_field(const json& j, const char* key) {
  if (!j.is_object() || !j.contains(key)) throw ParseError(std::string("missing key '") + key + "'");
  const auto& v = j.at(key);
  if (!v.is_number()) throw ParseError(std::string("key '") + key + "' is not a number");
  return v.get<double>();
}

Position position_from(const json& j) { return {number_field(j, "x"), number_field(j, "y")}; }

}  // namespace

std::string environment_to_json(const Environment& env) {
  json obstacles = json::array();
  for (const auto& o : env.obstacles) {
    obstacles.push_back({{"x_min", o.x_min},
                         {"y_min", o.y_min},
                         {"x_max", o.x_max},
                         {"y_max", o.y_max},
                         {"wall_loss_db", o.wall_loss_db}});
  }
  json aps = json::array();
  for (const auto& p : env.aps) aps.push_back(position_json(p));
  json root;
  root["roi"] = {{"width", env.roi_width}, {"height", env.roi_height}};
  root["obstacles"] = std::move(obstacles);
  root["aps"] = std::move(aps);
  root["seed"] = env.seed;
  return root.dump(2) + "\n";
}

Environment environment_from_json(const std::string& text) {
  json root;
  try {
    root = json::parse(text);
  } catch (const json::parse_error& e) {
    throw ParseError(std::string("environment: ") + e.what());
  }
  Environment env;
  try {
    if (!root.is_object()) throw ParseError("environment: top level is not an object");
    for (const char* key : {"roi", "obstacles", "aps", "seed"}) {
      if (!root.contains(key)) throw ParseError(std::string("environment: missing key '") + key + "'");
    }
    env.roi_width = number_field(root.at("roi"), "width");
    env.roi_height = number_field(root.at("roi"), "height");
    const auto& seed = root.at("seed");
    if (!seed.is_number_unsigned() && !(seed.is_number_integer() && seed.get<std::int64_t>() >= 0)) {
      throw ParseError("environment: seed must be a non-negative integer");
    }
    env.seed = seed.get<std::uint64_t>();
    if (!root.at("obstacles").is_array() || !root.at("aps").is_array()) {
      throw ParseError("environment: obstacles and aps must be arrays");
    }
    for (const auto& o : root.at("obstacles")) {
      env.obstacles.push_back({number_field(o, "x_min"), number_field(o, "y_min"),
                               number_field(o, "x_max"), number_field(o, "y_max"),
                               number_field(o, "wall_loss_db")});
    }
    for (const auto& p : root.at("aps")) env.aps.push_back(position_from(p));
  } catch (const json::exception& e) {
    throw ParseError(std::string("environment: ") + e.what());
  }
  env.validate();
  return env;
}

void save_environment(const Environment& env, const std::filesystem::path& path) {
  env.validate();
  write_file_atomic(path, environment_to_json(env));
}

Environment load_environment(const std::filesystem::path& path) {
  return environment_from_json(read_text_file(path));
}

}  // namespace chtwin
