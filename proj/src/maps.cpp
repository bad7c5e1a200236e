#include "chtwin/maps.hpp"

#include <algorithm>
#include <cmath>

#include "chtwin/error.hpp"
#include "chtwin/io.hpp"
#include "chtwin/parallel.hpp"
#include "chtwin/rng.hpp"

namespace chtwin {

std::string to_string(SiMethod method) { return method == SiMethod::idw ? "idw" : "kriging"; }

SiMethod si_method_from_string(const std::string& name) {
  if (name == "idw") return SiMethod::idw;
  if (name == "kriging") return SiMethod::kriging;
  throw PreconditionError("unknown SI method '" + name + "' (expected idw or kriging)");
}

MapGrid map_grid(const Environment& env, double resolution) {
  if (!(std::isfinite(resolution) && resolution > 0.0)) throw PreconditionError("map resolution must be > 0");
  // Relative slack keeps exact multiples from gaining a sliver cell.
  const auto cells = [resolution](double extent) {
    return std::max<std::size_t>(1, static_cast<std::size_t>(std::ceil(extent / resolution * (1.0 - 1e-12))));
  };
  return {cells(env.roi_width), cells(env.roi_height)};
}

Position cell_center(const Environment& env, double resolution, std::size_t i, std::size_t j) {
  return {std::min((static_cast<double>(i) + 0.5) * resolution, env.roi_width),
          std::min((static_cast<double>(j) + 0.5) * resolution, env.roi_height)};
}

namespace {

GainMap empty_map(const Environment& env, double resolution, Position tx, std::string tag) {
  const auto grid = map_grid(env, resolution);
  GainMap map;
  map.origin = {0.0, 0.0};
  map.resolution = resolution;
  map.width = grid.width;
  map.height = grid.height;
  map.values.assign(grid.width * grid.height, 0.0);
  map.tx = tx;
  map.backend_tag = std::move(tag);
  return map;
}

template <class Fn>
void fill(const Environment& env, GainMap& map, Fn&& value_at, bool parallel) {
  parallel_for(
      map.values.size(),
      [&](std::size_t k) {
        const double v = value_at(cell_center(env, map.resolution, k % map.width, k / map.width));
        if (!std::isfinite(v)) throw InvariantError("map cell value is not finite");
        map.values[k] = v;
      },
      parallel);
}

}  // namespace

GainMap build_gain_map(const Environment& env, const GainPredictor& predictor, Position tx,
                       double resolution, bool parallel) {
  GainMap map = empty_map(env, resolution, tx, predictor.tag());
  fill(env, map, [&](Position rx) { return predictor.gain(tx, rx); }, parallel);
  return map;
}

std::vector<Position> draw_si_seeds(const Environment& env, std::size_t n_seeds, std::uint64_t seed) {
  Rng rng(seed);
  std::vector<Position> out;
  out.reserve(n_seeds);
  for (std::size_t i = 0; i < n_seeds; ++i) {
    const double x = rng.uniform(0.0, env.roi_width);
    const double y = rng.uniform(0.0, env.roi_height);
    out.push_back({x, y});
  }
  return out;
}

namespace {

bool constant_field(const ScatterSet& scatter) {
  return std::all_of(scatter.begin(), scatter.end(),
                     [&](const ScatterPoint& p) { return p.value_db == scatter.front().value_db; });
}

}  // namespace

GainMap build_si_map(const Environment& env, const GainPredictor& predictor, Position tx,
                     std::size_t n_seeds, std::uint64_t seed, SiMethod method, double resolution,
                     const SiOptions& options) {
  if (n_seeds < 3) throw PreconditionError("SI map needs at least 3 seed receivers");
  ScatterSet scatter;
  for (const auto& rx : draw_si_seeds(env, n_seeds, seed)) scatter.push_back({rx, predictor.gain(tx, rx)});

  GainMap map = empty_map(env, resolution, tx, to_string(method));
  if (method == SiMethod::idw) {
    fill(env, map, [&](Position q) { return idw_predict(scatter, q, options.idw_power); },
         options.parallel);
    return map;
  }
  if (!options.variogram && constant_field(scatter)) {
    std::fill(map.values.begin(), map.values.end(), scatter.front().value_db);
    return map;
  }
  const OrdinaryKriging kriging(scatter, options.variogram ? *options.variogram : fit_variogram(scatter));
  fill(env, map, [&](Position q) { return kriging.predict(q); }, options.parallel);
  return map;
}

std::string map_to_csv(const Environment& env, const GainMap& map) {
  std::string out = kMapCsvHeader;
  out += '\n';
  for (std::size_t j = 0; j < map.height; ++j) {
    for (std::size_t i = 0; i < map.width; ++i) {
      const Position c = cell_center(env, map.resolution, i, j);
      out += format_double(c.x) + ',' + format_double(c.y) + ',' + format_double(map.at(i, j)) + '\n';
    }
  }
  return out;
}

void write_map_csv(const Environment& env, const GainMap& map, const std::filesystem::path& path) {
  write_file_atomic(path, map_to_csv(env, map));
}

std::string map_to_pgm(const GainMap& map) {
  if (map.values.empty()) throw PreconditionError("empty map");
  const auto [lo_it, hi_it] = std::minmax_element(map.values.begin(), map.values.end());
  const double lo = *lo_it;
  const double span = *hi_it - lo;
  std::string out = "P5\n" + std::to_string(map.width) + " " + std::to_string(map.height) + "\n65535\n";
  out.reserve(out.size() + 2 * map.values.size());
  for (std::size_t r = 0; r < map.height; ++r) {
    const std::size_t j = map.height - 1 - r;
    for (std::size_t i = 0; i < map.width; ++i) {
      const double t = span > 0.0 ? (map.at(i, j) - lo) / span : 0.0;
      const auto level = static_cast<unsigned>(std::lround(std::clamp(t, 0.0, 1.0) * 65535.0));
      out += static_cast<char>((level >> 8) & 0xff);
      out += static_cast<char>(level & 0xff);
    }
  }
  return out;
}

void write_map_pgm(const GainMap& map, const std::filesystem::path& path) {
  write_file_atomic(path, map_to_pgm(map));
}

SiPredictor::SiPredictor(const Environment& env, const GainPredictor& base, std::size_t n_seeds,
                         std::uint64_t seed, SiMethod method, SiOptions options)
    : base_(base), seeds_(draw_si_seeds(env, n_seeds, seed)), method_(method), options_(std::move(options)) {
  if (n_seeds < 3) throw PreconditionError("SI predictor needs at least 3 seed receivers");
}

ScatterSet SiPredictor::scatter_for(Position tx) const {
  ScatterSet scatter;
  scatter.reserve(seeds_.size());
  for (const auto& rx : seeds_) scatter.push_back({rx, base_.gain(tx, rx)});
  return scatter;
}

double SiPredictor::gain(Position tx, Position rx) const {
  const auto scatter = scatter_for(tx);
  if (method_ == SiMethod::idw) return idw_predict(scatter, rx, options_.idw_power);
  if (!options_.variogram && constant_field(scatter)) return scatter.front().value_db;
  return kriging_predict(scatter, options_.variogram ? *options_.variogram : fit_variogram(scatter), rx);
}

}  // namespace chtwin
