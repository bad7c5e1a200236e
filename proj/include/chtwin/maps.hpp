#pragma once

#include <cstdint>
#include <filesystem>
#include <optional>
#include <string>
#include <vector>

#include "chtwin/env.hpp"
#include "chtwin/interp.hpp"
#include "chtwin/predictor.hpp"

namespace chtwin {

inline constexpr double kDefaultMapResolution = 2.0;
inline constexpr std::size_t kDefaultSiSeeds = 30;

enum class SiMethod { idw, kriging };

std::string to_string(SiMethod method);
SiMethod si_method_from_string(const std::string& name);

// Raster of gains for one transmitter. Row j, column i holds the value at the
// cell center origin + ((i + 0.5) res, (j + 0.5) res), clamped to the RoI for
// the partial cells on the far edges.
struct GainMap {
  Position origin;
  double resolution = kDefaultMapResolution;
  std::size_t width = 0;
  std::size_t height = 0;
  std::vector<double> values;  // row-major, width * height
  Position tx;
  std::string backend_tag;

  double at(std::size_t i, std::size_t j) const { return values[j * width + i]; }
};

struct MapGrid {
  std::size_t width = 0;
  std::size_t height = 0;
};

// ceil(roi / resolution) cells per axis.
MapGrid map_grid(const Environment& env, double resolution);
Position cell_center(const Environment& env, double resolution, std::size_t i, std::size_t j);

GainMap build_gain_map(const Environment& env, const GainPredictor& predictor, Position tx,
                       double resolution = kDefaultMapResolution, bool parallel = false);

// Seeded uniform receiver positions in the RoI.
std::vector<Position> draw_si_seeds(const Environment& env, std::size_t n_seeds, std::uint64_t seed);

struct SiOptions {
  double idw_power = kIdwDefaultPower;
  std::optional<VariogramModel> variogram;  // fitted from the seeds when absent
  bool parallel = false;
};

// Predict-then-interpolate: query the predictor at n_seeds random receivers
// and rasterize the full grid with IDW or ordinary Kriging. If no variogram is
// given and all seed values are identical, the field is that constant.
GainMap build_si_map(const Environment& env, const GainPredictor& predictor, Position tx,
                     std::size_t n_seeds, std::uint64_t seed, SiMethod method,
                     double resolution = kDefaultMapResolution, const SiOptions& options = {});

inline constexpr char kMapCsvHeader[] = "x,y,gain_db";
std::string map_to_csv(const Environment& env, const GainMap& map);
void write_map_csv(const Environment& env, const GainMap& map, const std::filesystem::path& path);
// Binary 16-bit PGM; [min, max] gain maps linearly onto [0, 65535], top row = max y.
std::string map_to_pgm(const GainMap& map);
void write_map_pgm(const GainMap& map, const std::filesystem::path& path);

// Spatial-interpolation twin usable wherever a predictor is expected: for each
// transmitter it queries `base` at the seeded receivers and interpolates.
class SiPredictor final : public GainPredictor {
 public:
  SiPredictor(const Environment& env, const GainPredictor& base, std::size_t n_seeds,
              std::uint64_t seed, SiMethod method, SiOptions options = {});

  double gain(Position tx, Position rx) const override;
  std::string tag() const override { return to_string(method_); }

  ScatterSet scatter_for(Position tx) const;

 private:
  const GainPredictor& base_;
  std::vector<Position> seeds_;
  SiMethod method_;
  SiOptions options_;
};

}  // namespace chtwin
