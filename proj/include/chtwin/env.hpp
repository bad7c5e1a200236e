#pragma once

#include <cmath>
#include <cstdint>
#include <filesystem>
#include <string>
#include <vector>

namespace chtwin {

struct Position {
  double x = 0.0;
  double y = 0.0;

  friend bool operator==(const Position&, const Position&) = default;
};

inline double distance(Position a, Position b) { return std::hypot(a.x - b.x, a.y - b.y); }

inline constexpr double kDefaultWallLossDb = 20.0;
inline constexpr double kMinObstacleSide = 5.0;
inline constexpr double kMaxObstacleSide = 30.0;
inline constexpr int kMaxPlacementAttempts = 10000;

// Axis-aligned rectangular blocker.
struct Obstacle {
  double x_min = 0.0;
  double y_min = 0.0;
  double x_max = 0.0;
  double y_max = 0.0;
  double wall_loss_db = kDefaultWallLossDb;

  // Closed-rectangle membership (boundary counts as inside).
  bool contains(Position p) const {
    return p.x >= x_min && p.x <= x_max && p.y >= y_min && p.y <= y_max;
  }
  bool interior_contains(Position p) const {
    return p.x > x_min && p.x < x_max && p.y > y_min && p.y < y_max;
  }
  Position center() const { return {0.5 * (x_min + x_max), 0.5 * (y_min + y_max)}; }

  friend bool operator==(const Obstacle&, const Obstacle&) = default;
};

// The scene both the ground-truth oracle and the twin refer to. The RoI is
// [0, roi_width] x [0, roi_height].
struct Environment {
  double roi_width = 0.0;
  double roi_height = 0.0;
  std::vector<Obstacle> obstacles;
  std::vector<Position> aps;
  std::uint64_t seed = 0;

  bool in_roi(Position p) const {
    return p.x >= 0.0 && p.x <= roi_width && p.y >= 0.0 && p.y <= roi_height;
  }
  bool blocked(Position p) const;

  // Throws InvariantError naming the first violated invariant.
  void validate() const;

  friend bool operator==(const Environment&, const Environment&) = default;
};

Environment generate_environment(std::uint64_t seed, std::size_t n_obstacles, std::size_t n_aps,
                                 double roi_width, double roi_height);

std::string environment_to_json(const Environment& env);
Environment environment_from_json(const std::string& text);

void save_environment(const Environment& env, const std::filesystem::path& path);
Environment load_environment(const std::filesystem::path& path);

}  // namespace chtwin
