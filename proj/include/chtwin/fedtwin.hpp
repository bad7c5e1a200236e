#pragma once

#include <cstdint>
#include <functional>
#include <span>
#include <string>
#include <vector>

#include "chtwin/mlp.hpp"
#include "chtwin/sampling.hpp"

namespace chtwin {

// A registered client and the measurements it holds.
struct ClientShard {
  std::string client_id;
  Dataset samples;
  std::size_t n() const { return samples.size(); }
};

std::string client_id(std::size_t index);

// Seeded balanced split: sizes differ by at most one, earlier clients get the
// extra samples.
std::vector<ClientShard> partition(const Dataset& ds, std::size_t n_clients, std::uint64_t seed);

struct FlConfig {
  std::size_t n_clients = 3;
  std::size_t rounds = 100;
  std::size_t local_epochs = 1;
  std::size_t batch_size = 256;
  double lr = 1e-3;
  std::uint64_t seed = 0;
  double participation = 1.0;
  OptimizerKind optimizer = OptimizerKind::adam;
  bool parallel = false;  // run client updates on worker threads

  void validate() const;
};

struct LocalUpdate {
  const MlpModel* model = nullptr;
  std::size_t n = 0;
};

// Federated averaging: every parameter becomes sum(n_i * p_i) / sum(n_i).
// Per-parameter contributions are summed in sorted order so the result does
// not depend on the order of `locals`; the result is clamped to the clients'
// [min, max] range.
MlpModel aggregate(const MlpModel& global, std::span<const LocalUpdate> locals);

struct RoundMetrics {
  std::size_t round = 0;  // 1-based
  double val_mse_db2 = 0.0;
};

struct FlResult {
  MlpModel model;
  std::vector<RoundMetrics> history;
  std::vector<std::string> registered_clients;
};

using RoundCallback = std::function<void(const RoundMetrics&)>;

// Clients chosen for a round: ceil(participation * n_clients), at least one,
// sorted by client index.
std::vector<std::size_t> participants(const FlConfig& cfg, std::size_t round);

// Local model of one client for one round, trained from the broadcast state.
MlpModel local_update(const MlpModel& global, const ClientShard& shard, const FlConfig& cfg,
                      std::size_t round, std::size_t client_index);

// Full FL run. Target normalization is fitted once on the whole training set
// and shared by every client; `initial` supplies the architecture, initial
// weights and input normalization.
FlResult run_fl(MlpModel initial, const Dataset& train_ds, const Dataset& val_ds,
                const FlConfig& cfg, const RoundCallback& on_round = {});

}  // namespace chtwin
