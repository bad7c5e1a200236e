#include "chtwin/fedtwin.hpp"

#include <algorithm>
#include <cmath>
#include <cstdio>
#include <numeric>

#include "chtwin/error.hpp"
#include "chtwin/parallel.hpp"
#include "chtwin/rng.hpp"

namespace chtwin {

std::string client_id(std::size_t index) {
  char buf[32];
  std::snprintf(buf, sizeof buf, "client-%03zu", index);
  return buf;
}

std::vector<ClientShard> partition(const Dataset& ds, std::size_t n_clients, std::uint64_t seed) {
  if (n_clients < 1) throw PreconditionError("n_clients must be >= 1");
  if (ds.size() < n_clients) {
    throw PreconditionError("cannot split " + std::to_string(ds.size()) + " samples among " +
                            std::to_string(n_clients) + " clients");
  }
  std::vector<std::size_t> perm(ds.size());
  std::iota(perm.begin(), perm.end(), 0);
  Rng rng(seed);
  rng.shuffle(perm);

  const std::size_t base = ds.size() / n_clients;
  const std::size_t extra = ds.size() % n_clients;
  std::vector<ClientShard> shards(n_clients);
  std::size_t cursor = 0;
  for (std::size_t c = 0; c < n_clients; ++c) {
    auto& shard = shards[c];
    shard.client_id = client_id(c);
    shard.samples.seed = seed;
    shard.samples.split = ds.split;
    const std::size_t count = base + (c < extra ? 1 : 0);
    shard.samples.samples.reserve(count);
    for (std::size_t k = 0; k < count; ++k) shard.samples.samples.push_back(ds.samples[perm[cursor++]]);
  }
  return shards;
}

void FlConfig::validate() const {
  if (n_clients < 1) throw PreconditionError("n_clients must be >= 1");
  if (rounds < 1) throw PreconditionError("rounds must be >= 1");
  if (local_epochs < 1) throw PreconditionError("local_epochs must be >= 1");
  if (batch_size < 1) throw PreconditionError("batch_size must be >= 1");
  if (!(std::isfinite(lr) && lr > 0.0)) throw PreconditionError("lr must be > 0");
  if (!(participation > 0.0 && participation <= 1.0)) {
    throw PreconditionError("participation must be in (0, 1]");
  }
}

MlpModel aggregate(const MlpModel& global, std::span<const LocalUpdate> locals) {
  if (locals.empty()) throw PreconditionError("aggregation needs at least one local model");
  double total = 0.0;
  std::vector<std::vector<double>> params;
  params.reserve(locals.size());
  for (const auto& u : locals) {
    if (u.model == nullptr || !u.model->same_shape(global)) {
      throw PreconditionError("local model shape does not match the global model");
    }
    if (u.n == 0) throw PreconditionError("local model trained on zero samples");
    total += static_cast<double>(u.n);
    params.push_back(u.model->parameters());
  }

  const std::size_t count = global.parameter_count();
  std::vector<double> merged(count);
  std::vector<double> terms(locals.size());
  for (std::size_t p = 0; p < count; ++p) {
    double lo = params[0][p];
    double hi = lo;
    for (std::size_t i = 0; i < locals.size(); ++i) {
      const double v = params[i][p];
      terms[i] = static_cast<double>(locals[i].n) * v;
      lo = std::min(lo, v);
      hi = std::max(hi, v);
    }
    std::sort(terms.begin(), terms.end());
    double acc = 0.0;
    for (double t : terms) acc += t;
    merged[p] = std::clamp(acc / total, lo, hi);
  }
  MlpModel out = global;
  out.set_parameters(merged);
  return out;
}

std::vector<std::size_t> participants(const FlConfig& cfg, std::size_t round) {
  std::vector<std::size_t> all(cfg.n_clients);
  std::iota(all.begin(), all.end(), 0);
  const auto m = std::clamp<std::size_t>(
      static_cast<std::size_t>(std::ceil(cfg.participation * static_cast<double>(cfg.n_clients) - 1e-9)),
      1, cfg.n_clients);
  if (m == cfg.n_clients) return all;
  Rng rng(derive_seed(cfg.seed, 0x5a11, round));
  rng.shuffle(all);
  all.resize(m);
  std::sort(all.begin(), all.end());
  return all;
}

MlpModel local_update(const MlpModel& global, const ClientShard& shard, const FlConfig& cfg,
                      std::size_t round, std::size_t client_index) {
  if (shard.samples.empty()) throw PreconditionError(shard.client_id + " has an empty shard");
  MlpModel local = global;
  const TrainingSet data(local, shard.samples);
  // Optimizer state is local to the round: clients start from the broadcast
  // parameters with fresh moments.
  Optimizer optimizer(cfg.optimizer, cfg.lr, local);
  const std::uint64_t seed = derive_seed(cfg.seed, round, client_index);
  for (std::size_t e = 0; e < cfg.local_epochs; ++e) {
    train_epoch(local, data, optimizer, cfg.batch_size, seed, e);
  }
  return local;
}

FlResult run_fl(MlpModel initial, const Dataset& train_ds, const Dataset& val_ds,
                const FlConfig& cfg, const RoundCallback& on_round) {
  cfg.validate();
  if (train_ds.empty() || val_ds.empty()) throw PreconditionError("train and validation sets must be nonempty");
  initial.target_norm = fit_target_norm(train_ds);
  initial.validate();

  const auto shards = partition(train_ds, cfg.n_clients, derive_seed(cfg.seed, 0x5ead));
  FlResult result;
  for (const auto& s : shards) result.registered_clients.push_back(s.client_id);

  MlpModel global = std::move(initial);
  for (std::size_t round = 1; round <= cfg.rounds; ++round) {
    const auto chosen = participants(cfg, round);
    std::vector<MlpModel> locals(chosen.size());
    parallel_for(
        chosen.size(),
        [&](std::size_t k) { locals[k] = local_update(global, shards[chosen[k]], cfg, round, chosen[k]); },
        cfg.parallel);
    std::vector<LocalUpdate> updates;
    updates.reserve(chosen.size());
    for (std::size_t k = 0; k < chosen.size(); ++k) updates.push_back({&locals[k], shards[chosen[k]].n()});
    global = aggregate(global, updates);

    RoundMetrics m{round, evaluate_mse_db2(global, val_ds)};
    if (!std::isfinite(m.val_mse_db2)) throw DivergenceError("FL diverged at round " + std::to_string(round));
    result.history.push_back(m);
    if (on_round) on_round(m);
  }
  result.model = std::move(global);
  return result;
}

}  // namespace chtwin
