#pragma once

#include <array>
#include <cstdint>
#include <filesystem>
#include <string>
#include <vector>

#include "chtwin/env.hpp"
#include "chtwin/propagation.hpp"

namespace chtwin {

struct Sample {
  Position tx;
  Position rx;
  double gain_db = 0.0;

  friend bool operator==(const Sample&, const Sample&) = default;
};

enum class SplitTag { all, train, val, test };

std::string to_string(SplitTag tag);

// Measurement campaign product. Sample order is the canonical on-disk order.
struct Dataset {
  std::vector<Sample> samples;
  std::uint64_t seed = 0;
  SplitTag split = SplitTag::all;

  std::size_t size() const { return samples.size(); }
  bool empty() const { return samples.empty(); }
};

inline constexpr char kDatasetCsvHeader[] = "tx_x,tx_y,rx_x,rx_y,gain_db";

// Origin-anchored, boundary-inclusive grid, row-major (y outer, x inner).
std::vector<Position> anchor_grid(const Environment& env, double spacing);

struct SamplingOptions {
  double noise_sigma_db = 0.0;  // additive Gaussian measurement noise
  bool parallel = false;        // label links concurrently; output order is unchanged
};

// Draws n distinct ordered anchor pairs (tx != rx) uniformly without
// replacement and labels each with the oracle gain.
Dataset build_dataset(const ChannelOracle& oracle, double spacing, std::size_t n_samples,
                      std::uint64_t seed, const SamplingOptions& options = {});
Dataset build_dataset(const Environment& env, const PropagationParams& params, double spacing,
                      std::size_t n_samples, std::uint64_t seed);

struct DatasetSplits {
  Dataset train;
  Dataset val;
  Dataset test;
};

// Largest-remainder rounding of n * fractions; ties go to the earlier split.
std::array<std::size_t, 3> split_sizes(std::size_t n, const std::array<double, 3>& fractions);

DatasetSplits split_dataset(const Dataset& ds, const std::array<double, 3>& fractions,
                            std::uint64_t seed);

std::string dataset_to_csv(const Dataset& ds);
void write_dataset_csv(const Dataset& ds, const std::filesystem::path& path);
Dataset read_dataset_csv(const std::filesystem::path& path);

}  // namespace chtwin
