#pragma once

#include <cstdint>
#include <filesystem>
#include <string>
#include <vector>

#include "chtwin/env.hpp"
#include "chtwin/predictor.hpp"

namespace chtwin {

// Constants of the ground-truth channel. Gains are -(path loss) in dB.
struct PropagationParams {
  double pl0_db = 40.0;             // loss at the 1 m reference distance
  double exponent = 3.0;
  double shadowing_sigma_db = 4.0;  // 0 disables shadowing
  double shadowing_corr_len = 25.0;
  double d_min = 1.0;
  double lattice_pitch = 5.0;       // shadowing lattice spacing
  std::uint64_t seed = 0;           // shadowing realization

  void validate() const;

  friend bool operator==(const PropagationParams&, const PropagationParams&) = default;
};

// Penetration shorter than this (meters) counts as grazing, not obstruction.
inline constexpr double kGrazingTolerance = 1e-9;

// True when the segment a-b passes through the open interior of the obstacle
// over a positive length, or lies inside it. Symmetric in (a, b).
bool segment_obstructed(const Obstacle& obstacle, Position a, Position b);

int count_obstructions(const Environment& env, Position tx, Position rx);

// Sum of wall losses of all obstructing obstacles, accumulated in obstacle order.
double wall_loss_sum(const Environment& env, Position tx, Position rx);

// Spatially correlated Gaussian field Z with standard deviation sigma, built
// once on a regular lattice by smoothing seeded white noise with a Gaussian
// kernel (field correlation exp(-d^2 / (2 L^2))) and read by bilinear
// interpolation. The lattice is immutable after construction.
class ShadowingField {
 public:
  ShadowingField(const Environment& env, const PropagationParams& params);

  double at(Position p) const;
  // Link term S(tx, rx) = (Z(tx) + Z(rx)) / 2.
  double link(Position tx, Position rx) const { return 0.5 * (at(tx) + at(rx)); }

  bool enabled() const { return enabled_; }
  std::size_t nodes_x() const { return nx_; }
  std::size_t nodes_y() const { return ny_; }
  const std::vector<double>& lattice() const { return nodes_; }

 private:
  bool enabled_ = false;
  double pitch_ = 1.0;
  std::size_t nx_ = 0;
  std::size_t ny_ = 0;
  std::vector<double> nodes_;  // row-major, ny_ rows of nx_ nodes
};

// Deterministic ground-truth channel.
class ChannelOracle final : public GainPredictor {
 public:
  ChannelOracle(Environment env, PropagationParams params);

  double gain(Position tx, Position rx) const override;
  std::string tag() const override { return "oracle"; }

  const Environment& environment() const { return env_; }
  const PropagationParams& params() const { return params_; }
  const ShadowingField& shadowing() const { return field_; }

 private:
  Environment env_;
  PropagationParams params_;
  ShadowingField field_;
};

// Convenience form; builds the shadowing field on every call.
double true_gain(const Environment& env, const PropagationParams& params, Position tx, Position rx);

std::string params_to_json(const PropagationParams& params);
PropagationParams params_from_json(const std::string& text);
void save_params(const PropagationParams& params, const std::filesystem::path& path);
PropagationParams load_params(const std::filesystem::path& path);

}  // namespace chtwin
