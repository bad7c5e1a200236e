#include "chtwin/sampling.hpp"

#include <algorithm>
#include <cmath>
#include <numeric>
#include <unordered_map>

#include "chtwin/error.hpp"
#include "chtwin/io.hpp"
#include "chtwin/parallel.hpp"
#include "chtwin/rng.hpp"

namespace chtwin {

std::string to_string(SplitTag tag) {
  switch (tag) {
    case SplitTag::all: return "all";
    case SplitTag::train: return "train";
    case SplitTag::val: return "val";
    case SplitTag::test: return "test";
  }
  return "all";
}

std::vector<Position> anchor_grid(const Environment& env, double spacing) {
  if (!(std::isfinite(spacing) && spacing > 0.0)) {
    throw PreconditionError("anchor spacing must be > 0");
  }
  // Relative slack absorbs rounding in e.g. 200 / 8.
  const auto count = [spacing](double extent) {
    return static_cast<std::size_t>(std::floor(extent / spacing * (1.0 + 1e-12))) + 1;
  };
  const std::size_t nx = count(env.roi_width);
  const std::size_t ny = count(env.roi_height);
  std::vector<Position> grid;
  grid.reserve(nx * ny);
  for (std::size_t j = 0; j < ny; ++j) {
    for (std::size_t i = 0; i < nx; ++i) {
      grid.push_back({std::min(static_cast<double>(i) * spacing, env.roi_width),
                      std::min(static_cast<double>(j) * spacing, env.roi_height)});
    }
  }
  return grid;
}

Dataset build_dataset(const ChannelOracle& oracle, double spacing, std::size_t n_samples,
                      std::uint64_t seed, const SamplingOptions& options) {
  if (n_samples < 1) throw PreconditionError("n_samples must be >= 1");
  if (!(options.noise_sigma_db >= 0.0)) throw PreconditionError("noise sigma must be >= 0");
  const auto anchors = anchor_grid(oracle.environment(), spacing);
  const std::uint64_t a = anchors.size();
  const std::uint64_t pool = a * (a - 1);
  if (n_samples > pool) {
    throw PreconditionError("n_samples=" + std::to_string(n_samples) + " exceeds the " +
                            std::to_string(pool) + " distinct ordered anchor pairs");
  }

  // Sparse Fisher-Yates over the pair index space [0, pool).
  Rng rng(seed);
  std::unordered_map<std::uint64_t, std::uint64_t> swapped;
  const auto value_at = [&](std::uint64_t i) {
    const auto it = swapped.find(i);
    return it == swapped.end() ? i : it->second;
  };
  std::vector<std::uint64_t> picks(n_samples);
  for (std::uint64_t i = 0; i < n_samples; ++i) {
    const std::uint64_t j = i + rng.below(pool - i);
    const std::uint64_t vi = value_at(i);
    const std::uint64_t vj = value_at(j);
    swapped[j] = vi;
    picks[i] = vj;
  }

  Dataset ds;
  ds.seed = seed;
  ds.samples.resize(n_samples);
  parallel_for(
      n_samples,
      [&](std::size_t k) {
        const std::uint64_t tx = picks[k] / (a - 1);
        std::uint64_t rx = picks[k] % (a - 1);
        if (rx >= tx) ++rx;
        auto& s = ds.samples[k];
        s.tx = anchors[tx];
        s.rx = anchors[rx];
        s.gain_db = oracle.gain(s.tx, s.rx);
      },
      options.parallel);

  if (options.noise_sigma_db > 0.0) {
    Rng noise(derive_seed(seed, 1));
    for (auto& s : ds.samples) s.gain_db += options.noise_sigma_db * noise.normal();
  }
  return ds;
}

Dataset build_dataset(const Environment& env, const PropagationParams& params, double spacing,
                      std::size_t n_samples, std::uint64_t seed) {
  return build_dataset(ChannelOracle(env, params), spacing, n_samples, seed);
}

std::array<std::size_t, 3> split_sizes(std::size_t n, const std::array<double, 3>& fractions) {
  double total = 0.0;
  for (double f : fractions) {
    if (!(std::isfinite(f) && f > 0.0)) throw PreconditionError("split fractions must be positive");
    total += f;
  }
  if (std::abs(total - 1.0) > 1e-9) throw PreconditionError("split fractions must sum to 1");

  std::array<std::size_t, 3> sizes{};
  std::array<double, 3> remainder{};
  std::size_t assigned = 0;
  for (std::size_t i = 0; i < 3; ++i) {
    const double exact = static_cast<double>(n) * fractions[i];
    sizes[i] = static_cast<std::size_t>(std::floor(exact));
    remainder[i] = exact - static_cast<double>(sizes[i]);
    assigned += sizes[i];
  }
  std::array<std::size_t, 3> order{0, 1, 2};
  std::stable_sort(order.begin(), order.end(),
                   [&](std::size_t l, std::size_t r) { return remainder[l] > remainder[r]; });
  for (std::size_t k = 0; assigned < n; ++k, ++assigned) ++sizes[order[k % 3]];
  for (std::size_t i = 0; i < 3; ++i) {
    if (sizes[i] == 0) {
      throw PreconditionError("split " + std::to_string(i) + " would be empty for n=" +
                              std::to_string(n));
    }
  }
  return sizes;
}

DatasetSplits split_dataset(const Dataset& ds, const std::array<double, 3>& fractions,
                            std::uint64_t seed) {
  const auto sizes = split_sizes(ds.size(), fractions);
  std::vector<std::size_t> perm(ds.size());
  std::iota(perm.begin(), perm.end(), 0);
  Rng rng(seed);
  rng.shuffle(perm);

  DatasetSplits out;
  Dataset* parts[3] = {&out.train, &out.val, &out.test};
  const SplitTag tags[3] = {SplitTag::train, SplitTag::val, SplitTag::test};
  std::size_t cursor = 0;
  for (std::size_t p = 0; p < 3; ++p) {
    parts[p]->seed = seed;
    parts[p]->split = tags[p];
    parts[p]->samples.reserve(sizes[p]);
    for (std::size_t k = 0; k < sizes[p]; ++k) parts[p]->samples.push_back(ds.samples[perm[cursor++]]);
  }
  return out;
}

std::string dataset_to_csv(const Dataset& ds) {
  std::string out = kDatasetCsvHeader;
  out += '\n';
  for (const auto& s : ds.samples) {
    out += format_double(s.tx.x) + ',' + format_double(s.tx.y) + ',' + format_double(s.rx.x) +
           ',' + format_double(s.rx.y) + ',' + format_double(s.gain_db) + '\n';
  }
  return out;
}

void write_dataset_csv(const Dataset& ds, const std::filesystem::path& path) {
  write_file_atomic(path, dataset_to_csv(ds));
}

Dataset read_dataset_csv(const std::filesystem::path& path) {
  const auto rows = read_numeric_csv(path, kDatasetCsvHeader);
  Dataset ds;
  ds.samples.reserve(rows.size());
  for (const auto& r : rows) ds.samples.push_back({{r[0], r[1]}, {r[2], r[3]}, r[4]});
  return ds;
}

}  // namespace chtwin
