#include "chtwin/propagation.hpp"

#include <algorithm>
#include <cmath>
#include <json.hpp>

#include "chtwin/error.hpp"
#include "chtwin/io.hpp"
#include "chtwin/rng.hpp"

namespace chtwin {

void PropagationParams::validate() const {
  if (!(std::isfinite(pl0_db) && pl0_db > 0.0)) throw InvariantError("pl0_db must be > 0");
  if (!(std::isfinite(exponent) && exponent > 0.0)) throw InvariantError("exponent must be > 0");
  if (!(std::isfinite(shadowing_sigma_db) && shadowing_sigma_db >= 0.0)) {
    throw InvariantError("shadowing_sigma_db must be >= 0");
  }
  if (!(std::isfinite(shadowing_corr_len) && shadowing_corr_len > 0.0)) {
    throw InvariantError("shadowing_corr_len must be > 0");
  }
  if (!(std::isfinite(d_min) && d_min > 0.0)) throw InvariantError("d_min must be > 0");
  if (!(std::isfinite(lattice_pitch) && lattice_pitch > 0.0)) {
    throw InvariantError("lattice_pitch must be > 0");
  }
}

bool segment_obstructed(const Obstacle& o, Position a, Position b) {
  // Fixed endpoint order makes the test exactly symmetric.
  if (b.x < a.x || (b.x == a.x && b.y < a.y)) std::swap(a, b);
  const double dx = b.x - a.x;
  const double dy = b.y - a.y;
  const double length = std::hypot(dx, dy);
  if (length == 0.0) return o.interior_contains(a);

  // Slab clipping against the open rectangle.
  double t_enter = 0.0;
  double t_exit = 1.0;
  const auto clip = [&](double p, double d, double lo, double hi) {
    if (d == 0.0) return p > lo && p < hi;
    double ta = (lo - p) / d;
    double tb = (hi - p) / d;
    if (ta > tb) std::swap(ta, tb);
    t_enter = std::max(t_enter, ta);
    t_exit = std::min(t_exit, tb);
    return true;
  };
  if (!clip(a.x, dx, o.x_min, o.x_max)) return false;
  if (!clip(a.y, dy, o.y_min, o.y_max)) return false;
  return (t_exit - t_enter) * length > kGrazingTolerance;
}

int count_obstructions(const Environment& env, Position tx, Position rx) {
  int n = 0;
  for (const auto& o : env.obstacles) n += segment_obstructed(o, tx, rx) ? 1 : 0;
  return n;
}

double wall_loss_sum(const Environment& env, Position tx, Position rx) {
  double sum = 0.0;
  for (const auto& o : env.obstacles) {
    if (segment_obstructed(o, tx, rx)) sum += o.wall_loss_db;
  }
  return sum;
}

ShadowingField::ShadowingField(const Environment& env, const PropagationParams& params) {
  params.validate();
  pitch_ = params.lattice_pitch;
  nx_ = static_cast<std::size_t>(std::ceil(env.roi_width / pitch_)) + 1;
  ny_ = static_cast<std::size_t>(std::ceil(env.roi_height / pitch_)) + 1;
  nx_ = std::max<std::size_t>(nx_, 2);
  ny_ = std::max<std::size_t>(ny_, 2);
  nodes_.assign(nx_ * ny_, 0.0);
  enabled_ = params.shadowing_sigma_db > 0.0;
  if (!enabled_) return;

  // White noise smoothed by exp(-r^2 / (2 s^2)) has correlation
  // exp(-r^2 / (4 s^2)); s = L / sqrt(2) gives exp(-r^2 / (2 L^2)).
  const double s = params.shadowing_corr_len / std::sqrt(2.0);
  const auto radius = static_cast<std::ptrdiff_t>(std::ceil(3.0 * s / pitch_));
  const std::size_t ksize = static_cast<std::size_t>(2 * radius + 1);
  std::vector<double> kernel(ksize * ksize);
  double energy = 0.0;
  for (std::ptrdiff_t v = -radius; v <= radius; ++v) {
    for (std::ptrdiff_t u = -radius; u <= radius; ++u) {
      const double r2 = (static_cast<double>(u * u + v * v)) * pitch_ * pitch_;
      const double k = std::exp(-r2 / (2.0 * s * s));
      kernel[static_cast<std::size_t>((v + radius) * static_cast<std::ptrdiff_t>(ksize) + u + radius)] = k;
      energy += k * k;
    }
  }
  const double gain = params.shadowing_sigma_db / std::sqrt(energy);

  const std::size_t px = nx_ + ksize - 1;
  const std::size_t py = ny_ + ksize - 1;
  std::vector<double> noise(px * py);
  Rng rng(params.seed);
  for (auto& w : noise) w = rng.normal();

  for (std::size_t j = 0; j < ny_; ++j) {
    for (std::size_t i = 0; i < nx_; ++i) {
      double acc = 0.0;
      for (std::size_t kv = 0; kv < ksize; ++kv) {
        const double* row = &noise[(j + kv) * px + i];
        const double* krow = &kernel[kv * ksize];
        for (std::size_t ku = 0; ku < ksize; ++ku) acc += krow[ku] * row[ku];
      }
      nodes_[j * nx_ + i] = gain * acc;
    }
  }
}

double ShadowingField::at(Position p) const {
  if (!enabled_) return 0.0;
  const double fx = p.x / pitch_;
  const double fy = p.y / pitch_;
  const auto i0 = static_cast<std::size_t>(
      std::clamp(std::floor(fx), 0.0, static_cast<double>(nx_ - 2)));
  const auto j0 = static_cast<std::size_t>(
      std::clamp(std::floor(fy), 0.0, static_cast<double>(ny_ - 2)));
  const double tx = std::clamp(fx - static_cast<double>(i0), 0.0, 1.0);
  const double ty = std::clamp(fy - static_cast<double>(j0), 0.0, 1.0);
  const double z00 = nodes_[j0 * nx_ + i0];
  const double z10 = nodes_[j0 * nx_ + i0 + 1];
  const double z01 = nodes_[(j0 + 1) * nx_ + i0];
  const double z11 = nodes_[(j0 + 1) * nx_ + i0 + 1];
  return (1.0 - ty) * ((1.0 - tx) * z00 + tx * z10) + ty * ((1.0 - tx) * z01 + tx * z11);
}

ChannelOracle::ChannelOracle(Environment env, PropagationParams params)
    : env_(std::move(env)), params_(params), field_(env_, params_) {
  env_.validate();
}

double ChannelOracle::gain(Position tx, Position rx) const {
  if (!env_.in_roi(tx) || !env_.in_roi(rx)) {
    throw PreconditionError("link endpoint outside the RoI");
  }
  const double d = std::max(distance(tx, rx), params_.d_min);
  const double loss = params_.pl0_db + 10.0 * params_.exponent * std::log10(d) +
                      wall_loss_sum(env_, tx, rx) + field_.link(tx, rx);
  return -loss;
}

double true_gain(const Environment& env, const PropagationParams& params, Position tx, Position rx) {
  return ChannelOracle(env, params).gain(tx, rx);
}

namespace {

using nlohmann::json;

}  // namespace

std::string params_to_json(const PropagationParams& p) {
  const json j = {{"pl0_db", p.pl0_db},
                  {"exponent", p.exponent},
                  {"shadowing_sigma_db", p.shadowing_sigma_db},
                  {"shadowing_corr_len", p.shadowing_corr_len},
                  {"d_min", p.d_min},
                  {"lattice_pitch", p.lattice_pitch},
                  {"seed", p.seed}};
  return j.dump(2) + "\n";
}

PropagationParams params_from_json(const std::string& text) {
  PropagationParams p;
  try {
    const json j = json::parse(text);
    if (!j.is_object()) throw ParseError("propagation params: top level is not an object");
    // Missing keys keep their defaults so a sidecar may override a subset.
    p.pl0_db = j.value("pl0_db", p.pl0_db);
    p.exponent = j.value("exponent", p.exponent);
    p.shadowing_sigma_db = j.value("shadowing_sigma_db", p.shadowing_sigma_db);
    p.shadowing_corr_len = j.value("shadowing_corr_len", p.shadowing_corr_len);
    p.d_min = j.value("d_min", p.d_min);
    p.lattice_pitch = j.value("lattice_pitch", p.lattice_pitch);
    p.seed = j.value("seed", p.seed);
  } catch (const json::exception& e) {
    throw ParseError(std::string("propagation params: ") + e.what());
  }
  p.validate();
  return p;
}

void save_params(const PropagationParams& params, const std::filesystem::path& path) {
  params.validate();
  write_file_atomic(path, params_to_json(params));
}

PropagationParams load_params(const std::filesystem::path& path) {
  return params_from_json(read_text_file(path));
}

}  // namespace chtwin
