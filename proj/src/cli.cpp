#include "chtwin/cli.hpp"

#include <CLI11.hpp>
#include <cstdlib>
#include <filesystem>
#include <json.hpp>
#include <memory>
#include <optional>
#include <ostream>

#include "chtwin/assoc.hpp"
#include "chtwin/env.hpp"
#include "chtwin/error.hpp"
#include "chtwin/fedtwin.hpp"
#include "chtwin/io.hpp"
#include "chtwin/maps.hpp"
#include "chtwin/metrics.hpp"
#include "chtwin/mlp.hpp"
#include "chtwin/plfit.hpp"
#include "chtwin/propagation.hpp"
#include "chtwin/rng.hpp"
#include "chtwin/sampling.hpp"

namespace chtwin {

namespace {

namespace fs = std::filesystem;

// Stream tags for seeds derived from the run seed.
constexpr std::uint64_t kSplitStream = 1;
constexpr std::uint64_t kInitStream = 2;
constexpr std::uint64_t kTrainStream = 3;

struct GlobalFlags {
  std::uint64_t seed = 0;
  std::string out_dir;
  bool strict = false;
};

struct PropagationFlags {
  std::string params_file;
  std::optional<double> pl0;
  std::optional<double> exponent;
  std::optional<double> wall_loss;
  std::optional<double> shadow_sigma;
  std::optional<double> shadow_corr;
  std::optional<double> d_min;
  std::optional<std::uint64_t> shadow_seed;
};

struct Context {
  std::vector<std::string> args;
  std::ostream& out;
  std::ostream& err;
};

void add_global(CLI::App* cmd, GlobalFlags& g) {
  cmd->add_option("--seed", g.seed, "Run seed");
  cmd->add_option("--out-dir", g.out_dir, "Directory for relative output paths (default $CT_OUT_DIR)");
  cmd->add_flag("--strict", g.strict, "Sequential, bit-stable numerics");
}

void add_propagation(CLI::App* cmd, PropagationFlags& p) {
  cmd->add_option("--params", p.params_file, "Propagation parameter sidecar (JSON)");
  cmd->add_option("--pl0", p.pl0, "Path loss at 1 m (dB)");
  cmd->add_option("--exp", p.exponent, "Path-loss exponent");
  cmd->add_option("--wall-loss", p.wall_loss, "Override every obstacle's wall loss (dB)");
  cmd->add_option("--shadow-sigma", p.shadow_sigma, "Shadowing standard deviation (dB)");
  cmd->add_option("--shadow-corr", p.shadow_corr, "Shadowing correlation length (m)");
  cmd->add_option("--dmin", p.d_min, "Distance floor (m)");
  cmd->add_option("--shadow-seed", p.shadow_seed, "Shadowing seed (default: environment seed)");
}

fs::path resolve_output(const GlobalFlags& g, const std::string& path) {
  fs::path p(path);
  std::string dir = g.out_dir;
  if (dir.empty()) {
    if (const char* env = std::getenv("CT_OUT_DIR")) dir = env;
  }
  if (p.is_relative() && !dir.empty()) p = fs::path(dir) / p;
  if (p.has_parent_path()) fs::create_directories(p.parent_path());
  return p;
}

void write_manifest(const Context& ctx, const GlobalFlags& g, const std::string& command,
                    const std::vector<fs::path>& outputs) {
  if (outputs.empty()) return;
  nlohmann::json j;
  j["command"] = command;
  j["argv"] = ctx.args;
  j["seed"] = g.seed;
  j["strict"] = g.strict;
  nlohmann::json files = nlohmann::json::array();
  for (const auto& o : outputs) files.push_back(o.filename().string());
  j["outputs"] = files;
  auto manifest = outputs.front();
  manifest += ".manifest.json";
  write_file_atomic(manifest, j.dump(2) + "\n");
}

std::pair<double, double> parse_pair(const std::string& text, char sep, const char* what) {
  const auto parts = split(text, sep);
  if (parts.size() != 2) throw PreconditionError(std::string(what) + ": expected two numbers, got '" + text + "'");
  return {parse_double(parts[0]), parse_double(parts[1])};
}

Position parse_position(const std::string& text, const char* what) {
  const auto [x, y] = parse_pair(text, ',', what);
  return {x, y};
}

std::array<double, 3> parse_fractions(const std::string& text) {
  const auto parts = split(text, ',');
  if (parts.size() != 3) throw PreconditionError("--split expects train,val,test fractions");
  return {parse_double(parts[0]), parse_double(parts[1]), parse_double(parts[2])};
}

// Applies the flag overrides to the environment and parameters.
ChannelOracle make_oracle(Environment env, const PropagationFlags& f) {
  PropagationParams p = f.params_file.empty() ? PropagationParams{} : load_params(f.params_file);
  if (f.params_file.empty()) p.seed = env.seed;
  if (f.pl0) p.pl0_db = *f.pl0;
  if (f.exponent) p.exponent = *f.exponent;
  if (f.shadow_sigma) p.shadowing_sigma_db = *f.shadow_sigma;
  if (f.shadow_corr) p.shadowing_corr_len = *f.shadow_corr;
  if (f.d_min) p.d_min = *f.d_min;
  if (f.shadow_seed) p.seed = *f.shadow_seed;
  if (f.wall_loss) {
    for (auto& o : env.obstacles) o.wall_loss_db = *f.wall_loss;
  }
  p.validate();
  return ChannelOracle(std::move(env), p);
}

// A predictor named on the command line: "oracle", "idw", "kriging" or a
// model file (MLP checkpoint or PL text, told apart by the first line).
struct LoadedPredictor {
  std::unique_ptr<GainPredictor> base;
  std::unique_ptr<GainPredictor> wrapper;
  const GainPredictor& get() const { return wrapper ? *wrapper : *base; }
};

bool is_keyword(const std::string& m) { return m == "oracle" || m == "idw" || m == "kriging"; }

LoadedPredictor load_predictor(const std::string& model, const std::optional<Environment>& env,
                               const PropagationFlags& prop, std::size_t si_seeds,
                               std::uint64_t seed) {
  LoadedPredictor out;
  if (is_keyword(model)) {
    if (!env) throw PreconditionError("--model " + model + " requires --env");
    out.base = std::make_unique<ChannelOracle>(make_oracle(*env, prop));
    if (model != "oracle") {
      out.wrapper = std::make_unique<SiPredictor>(*env, *out.base, si_seeds, seed,
                                                  si_method_from_string(model));
    }
    return out;
  }
  if (!fs::exists(model)) throw Error("model file '" + model + "' not found");
  const std::string text = read_text_file(model);
  if (text.rfind("mlp v1", 0) == 0) {
    out.base = std::make_unique<MlpPredictor>(checkpoint_from_text(text));
  } else {
    out.base = std::make_unique<PlPredictor>(pl_from_text(text));
  }
  return out;
}

std::optional<Environment> maybe_env(const std::string& path) {
  if (path.empty()) return std::nullopt;
  return load_environment(path);
}

// ---------------------------------------------------------------- gen-env

struct GenEnvFlags {
  GlobalFlags g;
  std::size_t obstacles = 12;
  std::size_t aps = 20;
  std::string roi = "200x200";
  double wall_loss = kDefaultWallLossDb;
  std::string out;
};

int run_gen_env(const Context& ctx, const GenEnvFlags& f) {
  const auto [w, h] = parse_pair(f.roi, 'x', "--roi");
  Environment env = generate_environment(f.g.seed, f.obstacles, f.aps, w, h);
  for (auto& o : env.obstacles) o.wall_loss_db = f.wall_loss;
  env.validate();
  const auto path = resolve_output(f.g, f.out);
  save_environment(env, path);
  write_manifest(ctx, f.g, "gen-env", {path});
  ctx.out << "wrote " << path.string() << " (" << env.obstacles.size() << " obstacles, "
          << env.aps.size() << " APs)\n";
  return 0;
}

// ---------------------------------------------------------------- gen-data

struct GenDataFlags {
  GlobalFlags g;
  PropagationFlags prop;
  std::string env;
  double spacing = 8.0;
  std::size_t n = 10000;
  double noise = 0.0;
  std::string out;
  std::string params_out;
};

int run_gen_data(const Context& ctx, const GenDataFlags& f) {
  const ChannelOracle oracle = make_oracle(load_environment(f.env), f.prop);
  SamplingOptions opts;
  opts.noise_sigma_db = f.noise;
  opts.parallel = !f.g.strict;
  const Dataset ds = build_dataset(oracle, f.spacing, f.n, f.g.seed, opts);
  const auto path = resolve_output(f.g, f.out);
  write_dataset_csv(ds, path);
  std::vector<fs::path> outputs{path};
  if (!f.params_out.empty()) {
    const auto pp = resolve_output(f.g, f.params_out);
    save_params(oracle.params(), pp);
    outputs.push_back(pp);
  }
  write_manifest(ctx, f.g, "gen-data", outputs);
  ctx.out << "wrote " << path.string() << " (" << ds.size() << " samples)\n";
  return 0;
}

// ---------------------------------------------------------------- train / train-fl

struct TrainFlags {
  GlobalFlags g;
  std::string data;
  std::string env;
  std::string out;
  std::string metrics;
  std::size_t epochs = 200;
  double lr = 1e-3;
  std::size_t batch = 256;
  std::string optimizer = "adam";
  std::size_t width = kDefaultHiddenWidth;
  std::string split = "0.8,0.1,0.1";
  std::string train_out;
  std::string val_out;
  std::string test_out;
  bool verbose = false;
  // train-fl only
  std::size_t clients = 3;
  std::size_t rounds = 100;
  std::size_t local_epochs = 1;
  double participation = 1.0;
};

void add_train_common(CLI::App* cmd, TrainFlags& f) {
  add_global(cmd, f.g);
  cmd->add_option("--data", f.data, "Dataset CSV")->required();
  cmd->add_option("--env", f.env, "Environment JSON (input normalization)")->required();
  cmd->add_option("--out", f.out, "Checkpoint path")->required();
  cmd->add_option("--metrics", f.metrics, "Per-epoch/round metrics CSV");
  cmd->add_option("--lr", f.lr, "Learning rate");
  cmd->add_option("--batch", f.batch, "Minibatch size");
  cmd->add_option("--optimizer", f.optimizer, "sgd | adam");
  cmd->add_option("--width", f.width, "Hidden layer width");
  cmd->add_option("--split", f.split, "train,val,test fractions");
  cmd->add_option("--train-out", f.train_out, "Write the training split");
  cmd->add_option("--val-out", f.val_out, "Write the validation split");
  cmd->add_option("--test-out", f.test_out, "Write the held-out test split");
  cmd->add_flag("--verbose", f.verbose, "Print progress");
}

struct PreparedTraining {
  Environment env;
  DatasetSplits splits;
  MlpModel initial;
  std::vector<fs::path> outputs;
};

PreparedTraining prepare_training(const TrainFlags& f) {
  PreparedTraining p{load_environment(f.env), {}, {}, {}};
  const Dataset ds = read_dataset_csv(f.data);
  if (ds.empty()) throw PreconditionError("dataset '" + f.data + "' is empty");
  p.splits = split_dataset(ds, parse_fractions(f.split), derive_seed(f.g.seed, kSplitStream));
  p.initial = MlpModel::he_uniform(ct_layer_dims(f.width), derive_seed(f.g.seed, kInitStream));
  p.initial.input_norm = InputNorm::from_roi(p.env.roi_width, p.env.roi_height);
  const std::pair<const std::string*, const Dataset*> extra[] = {
      {&f.train_out, &p.splits.train}, {&f.val_out, &p.splits.val}, {&f.test_out, &p.splits.test}};
  for (const auto& [name, part] : extra) {
    if (name->empty()) continue;
    const auto path = resolve_output(f.g, *name);
    write_dataset_csv(*part, path);
    p.outputs.push_back(path);
  }
  return p;
}

int run_train(const Context& ctx, const TrainFlags& f) {
  auto p = prepare_training(f);
  TrainConfig cfg;
  cfg.lr = f.lr;
  cfg.batch_size = f.batch;
  cfg.epochs = f.epochs;
  cfg.seed = derive_seed(f.g.seed, kTrainStream);
  cfg.optimizer = optimizer_from_string(f.optimizer);
  const auto result = train(std::move(p.initial), p.splits.train, p.splits.val, cfg, [&](const EpochMetrics& m) {
    if (f.verbose) {
      ctx.err << "epoch " << m.epoch << " train_mse_db2=" << m.train_mse_db2
              << " val_mse_db2=" << m.val_mse_db2 << "\n";
    }
  });
  const auto ckpt = resolve_output(f.g, f.out);
  save_checkpoint(result.model, ckpt);
  std::vector<fs::path> outputs{ckpt};
  if (!f.metrics.empty()) {
    std::string csv = "epoch,train_mse_db2,val_mse_db2\n";
    for (const auto& m : result.history) {
      csv += std::to_string(m.epoch) + ',' + format_double(m.train_mse_db2) + ',' +
             format_double(m.val_mse_db2) + '\n';
    }
    const auto mp = resolve_output(f.g, f.metrics);
    write_file_atomic(mp, csv);
    outputs.push_back(mp);
  }
  outputs.insert(outputs.end(), p.outputs.begin(), p.outputs.end());
  write_manifest(ctx, f.g, "train", outputs);
  ctx.out << "wrote " << ckpt.string() << " (final val_mse_db2="
          << format_double(result.history.back().val_mse_db2) << ")\n";
  return 0;
}

int run_train_fl(const Context& ctx, const TrainFlags& f) {
  auto p = prepare_training(f);
  FlConfig cfg;
  cfg.n_clients = f.clients;
  cfg.rounds = f.rounds;
  cfg.local_epochs = f.local_epochs;
  cfg.batch_size = f.batch;
  cfg.lr = f.lr;
  cfg.seed = derive_seed(f.g.seed, kTrainStream);
  cfg.participation = f.participation;
  cfg.optimizer = optimizer_from_string(f.optimizer);
  cfg.parallel = !f.g.strict;
  const auto result = run_fl(std::move(p.initial), p.splits.train, p.splits.val, cfg, [&](const RoundMetrics& m) {
    if (f.verbose) ctx.err << "round " << m.round << " val_mse_db2=" << m.val_mse_db2 << "\n";
  });
  const auto ckpt = resolve_output(f.g, f.out);
  save_checkpoint(result.model, ckpt);
  std::vector<fs::path> outputs{ckpt};
  if (!f.metrics.empty()) {
    std::string csv = "round,val_mse_db2\n";
    for (const auto& m : result.history) csv += std::to_string(m.round) + ',' + format_double(m.val_mse_db2) + '\n';
    const auto mp = resolve_output(f.g, f.metrics);
    write_file_atomic(mp, csv);
    outputs.push_back(mp);
  }
  outputs.insert(outputs.end(), p.outputs.begin(), p.outputs.end());
  write_manifest(ctx, f.g, "train-fl", outputs);
  ctx.out << "wrote " << ckpt.string() << " (" << result.registered_clients.size()
          << " clients, final val_mse_db2=" << format_double(result.history.back().val_mse_db2) << ")\n";
  return 0;
}

// ---------------------------------------------------------------- fit-pl

struct FitPlFlags {
  GlobalFlags g;
  std::string data;
  std::string out;
  double d_min = 1.0;
};

int run_fit_pl(const Context& ctx, const FitPlFlags& f) {
  const PlModel m = fit_pl(read_dataset_csv(f.data), f.d_min);
  const auto path = resolve_output(f.g, f.out);
  save_pl(m, path);
  write_manifest(ctx, f.g, "fit-pl", {path});
  ctx.out << pl_to_text(m);
  return 0;
}

// ---------------------------------------------------------------- map

struct MapFlags {
  GlobalFlags g;
  PropagationFlags prop;
  std::string env;
  std::string model = "oracle";
  std::string tx;
  std::size_t si_seeds = 0;
  std::string method = "kriging";
  double res = kDefaultMapResolution;
  std::string out;
  std::string pgm;
};

int run_map(const Context& ctx, const MapFlags& f) {
  const Environment env = load_environment(f.env);
  const Position tx = parse_position(f.tx, "--tx");
  const auto predictor = load_predictor(f.model, env, f.prop, kDefaultSiSeeds, f.g.seed);
  GainMap map;
  if (f.si_seeds > 0) {
    SiOptions opts;
    opts.parallel = !f.g.strict;
    map = build_si_map(env, predictor.get(), tx, f.si_seeds, f.g.seed, si_method_from_string(f.method),
                       f.res, opts);
  } else {
    map = build_gain_map(env, predictor.get(), tx, f.res, !f.g.strict);
  }
  const auto path = resolve_output(f.g, f.out);
  write_map_csv(env, map, path);
  std::vector<fs::path> outputs{path};
  if (!f.pgm.empty()) {
    const auto pp = resolve_output(f.g, f.pgm);
    write_map_pgm(map, pp);
    outputs.push_back(pp);
  }
  write_manifest(ctx, f.g, "map", outputs);
  ctx.out << "wrote " << path.string() << " (" << map.width << "x" << map.height << " cells)\n";
  return 0;
}

// ---------------------------------------------------------------- associate

struct AssociateFlags {
  GlobalFlags g;
  PropagationFlags prop;
  std::string env;
  std::string model = "oracle";
  std::string ue;
  std::size_t k = kDefaultAssociationK;
  std::string criterion = "gain";
  std::size_t si_seeds = kDefaultSiSeeds;
  std::string out;
};

int run_associate(const Context& ctx, const AssociateFlags& f) {
  const Environment env = load_environment(f.env);
  const Position ue = parse_position(f.ue, "--ue");
  AssociationResult result;
  if (f.criterion == "distance") {
    result = associate_by_distance(env, ue, f.k);
  } else if (f.criterion == "gain") {
    const auto predictor = load_predictor(f.model, env, f.prop, f.si_seeds, f.g.seed);
    result = associate_by_gain(env, predictor.get(), ue, f.k);
  } else {
    throw PreconditionError("--criterion must be gain or distance");
  }
  const std::string csv = association_to_csv(result);
  if (!f.out.empty()) {
    const auto path = resolve_output(f.g, f.out);
    write_file_atomic(path, csv);
    write_manifest(ctx, f.g, "associate", {path});
  }
  ctx.out << csv;
  return 0;
}

// ---------------------------------------------------------------- eval

struct EvalFlags {
  GlobalFlags g;
  PropagationFlags prop;
  std::string model;
  std::string data;
  std::string env;
  std::string out;
  bool box = false;
  std::string box_out;
  std::size_t si_seeds = kDefaultSiSeeds;
};

int run_eval(const Context& ctx, const EvalFlags& f) {
  const auto predictor = load_predictor(f.model, maybe_env(f.env), f.prop, f.si_seeds, f.g.seed);
  const Dataset ds = read_dataset_csv(f.data);
  if (ds.empty()) throw PreconditionError("evaluation dataset is empty");
  std::vector<double> pred;
  if (const auto* mlp = dynamic_cast<const MlpPredictor*>(&predictor.get())) {
    pred = mlp->model().predict(ds.samples);
  } else {
    pred.reserve(ds.size());
    for (const auto& s : ds.samples) pred.push_back(predictor.get().gain(s.tx, s.rx));
  }
  std::vector<double> truth;
  std::vector<double> abs_err;
  std::string csv = "tx_x,tx_y,rx_x,rx_y,abs_err_db\n";
  for (std::size_t i = 0; i < ds.size(); ++i) {
    const auto& s = ds.samples[i];
    truth.push_back(s.gain_db);
    abs_err.push_back(std::abs(pred[i] - s.gain_db));
    csv += format_double(s.tx.x) + ',' + format_double(s.tx.y) + ',' + format_double(s.rx.x) + ',' +
           format_double(s.rx.y) + ',' + format_double(abs_err.back()) + '\n';
  }
  const auto metrics = error_metrics(pred, truth);
  const auto path = resolve_output(f.g, f.out);
  write_file_atomic(path, csv);
  std::vector<fs::path> outputs{path};
  const BoxStats stats = box_stats(abs_err);
  if (!f.box_out.empty()) {
    const auto bp = resolve_output(f.g, f.box_out);
    write_file_atomic(bp, box_stats_to_csv(stats));
    outputs.push_back(bp);
  }
  write_manifest(ctx, f.g, "eval", outputs);
  ctx.out << "n=" << ds.size() << " mae_db=" << format_double(metrics.mae_db)
          << " mse_db2=" << format_double(metrics.mse_db2) << "\n";
  if (f.box) ctx.out << box_stats_to_csv(stats);
  return 0;
}

}  // namespace

int dispatch(const std::vector<std::string>& args, std::ostream& out, std::ostream& err) {
  CLI::App app{"Channel-twinning workbench", "chtwin"};
  app.require_subcommand(1);
  app.fallthrough(false);

  GenEnvFlags gen_env;
  auto* c_gen_env = app.add_subcommand("gen-env", "Generate a synthetic environment");
  add_global(c_gen_env, gen_env.g);
  c_gen_env->add_option("--obstacles", gen_env.obstacles, "Number of obstacles");
  c_gen_env->add_option("--aps", gen_env.aps, "Number of access points");
  c_gen_env->add_option("--roi", gen_env.roi, "RoI as WIDTHxHEIGHT in meters");
  c_gen_env->add_option("--wall-loss", gen_env.wall_loss, "Wall loss per obstacle (dB)");
  c_gen_env->add_option("--out", gen_env.out, "Output environment JSON")->required();

  GenDataFlags gen_data;
  auto* c_gen_data = app.add_subcommand("gen-data", "Sample a labeled dataset from the oracle");
  add_global(c_gen_data, gen_data.g);
  add_propagation(c_gen_data, gen_data.prop);
  c_gen_data->add_option("--env", gen_data.env, "Environment JSON")->required();
  c_gen_data->add_option("--spacing", gen_data.spacing, "Anchor grid spacing (m)");
  c_gen_data->add_option("--n", gen_data.n, "Number of samples");
  c_gen_data->add_option("--noise", gen_data.noise, "Measurement noise sigma (dB)");
  c_gen_data->add_option("--params-out", gen_data.params_out, "Write the effective propagation parameters");
  c_gen_data->add_option("--out", gen_data.out, "Output dataset CSV")->required();

  TrainFlags train_flags;
  auto* c_train = app.add_subcommand("train", "Centralized twin training");
  add_train_common(c_train, train_flags);
  c_train->add_option("--epochs", train_flags.epochs, "Training epochs");

  TrainFlags fl_flags;
  auto* c_train_fl = app.add_subcommand("train-fl", "Federated twin training");
  add_train_common(c_train_fl, fl_flags);
  c_train_fl->add_option("--clients", fl_flags.clients, "Number of FL clients");
  c_train_fl->add_option("--rounds", fl_flags.rounds, "Communication rounds");
  c_train_fl->add_option("--local-epochs", fl_flags.local_epochs, "Local epochs per round");
  c_train_fl->add_option("--participation", fl_flags.participation, "Fraction of clients per round");

  FitPlFlags fit_pl_flags;
  auto* c_fit_pl = app.add_subcommand("fit-pl", "Least-squares path-loss baseline");
  add_global(c_fit_pl, fit_pl_flags.g);
  c_fit_pl->add_option("--data", fit_pl_flags.data, "Dataset CSV")->required();
  c_fit_pl->add_option("--dmin", fit_pl_flags.d_min, "Distance floor (m)");
  c_fit_pl->add_option("--out", fit_pl_flags.out, "Output model text")->required();

  MapFlags map_flags;
  auto* c_map = app.add_subcommand("map", "Rasterize a gain map");
  add_global(c_map, map_flags.g);
  add_propagation(c_map, map_flags.prop);
  c_map->add_option("--env", map_flags.env, "Environment JSON")->required();
  c_map->add_option("--model", map_flags.model, "oracle | idw | kriging | checkpoint | PL file");
  c_map->add_option("--tx", map_flags.tx, "Transmitter x,y")->required();
  c_map->add_option("--si-seeds", map_flags.si_seeds, "Interpolate from this many random receivers (0 = dense)");
  c_map->add_option("--method", map_flags.method, "idw | kriging (with --si-seeds)");
  c_map->add_option("--res", map_flags.res, "Cell size (m)");
  c_map->add_option("--pgm", map_flags.pgm, "Also write a 16-bit PGM image");
  c_map->add_option("--out", map_flags.out, "Output map CSV")->required();

  AssociateFlags assoc_flags;
  auto* c_assoc = app.add_subcommand("associate", "Select APs for a UE");
  add_global(c_assoc, assoc_flags.g);
  add_propagation(c_assoc, assoc_flags.prop);
  c_assoc->add_option("--env", assoc_flags.env, "Environment JSON")->required();
  c_assoc->add_option("--model", assoc_flags.model, "oracle | idw | kriging | checkpoint | PL file");
  c_assoc->add_option("--ue", assoc_flags.ue, "UE x,y")->required();
  c_assoc->add_option("--k", assoc_flags.k, "Number of APs to select");
  c_assoc->add_option("--criterion", assoc_flags.criterion, "gain | distance");
  c_assoc->add_option("--si-seeds", assoc_flags.si_seeds, "Seed receivers for idw/kriging");
  c_assoc->add_option("--out", assoc_flags.out, "Also write the selection CSV");

  EvalFlags eval_flags;
  auto* c_eval = app.add_subcommand("eval", "Per-sample prediction errors");
  add_global(c_eval, eval_flags.g);
  add_propagation(c_eval, eval_flags.prop);
  c_eval->add_option("--model", eval_flags.model, "oracle | idw | kriging | checkpoint | PL file")->required();
  c_eval->add_option("--data", eval_flags.data, "Test dataset CSV")->required();
  c_eval->add_option("--env", eval_flags.env, "Environment JSON (for oracle/idw/kriging)");
  c_eval->add_option("--si-seeds", eval_flags.si_seeds, "Seed receivers for idw/kriging");
  c_eval->add_flag("--box", eval_flags.box, "Print box statistics of the absolute errors");
  c_eval->add_option("--box-out", eval_flags.box_out, "Write box statistics CSV");
  c_eval->add_option("--out", eval_flags.out, "Output per-sample error CSV")->required();

  try {
    std::vector<std::string> reversed(args.rbegin(), args.rend());
    app.parse(reversed);
  } catch (const CLI::CallForHelp&) {
    out << app.help();
    return 0;
  } catch (const CLI::CallForAllHelp&) {
    out << app.help("", CLI::AppFormatMode::All);
    return 0;
  } catch (const CLI::ParseError& e) {
    err << "error: " << e.what() << "\n" << app.help();
    return 2;
  }

  const Context ctx{args, out, err};
  try {
    if (c_gen_env->parsed()) return run_gen_env(ctx, gen_env);
    if (c_gen_data->parsed()) return run_gen_data(ctx, gen_data);
    if (c_train->parsed()) return run_train(ctx, train_flags);
    if (c_train_fl->parsed()) return run_train_fl(ctx, fl_flags);
    if (c_fit_pl->parsed()) return run_fit_pl(ctx, fit_pl_flags);
    if (c_map->parsed()) return run_map(ctx, map_flags);
    if (c_assoc->parsed()) return run_associate(ctx, assoc_flags);
    if (c_eval->parsed()) return run_eval(ctx, eval_flags);
  } catch (const std::exception& e) {
    err << "error: " << e.what() << "\n";
    return 1;
  }
  err << app.help();
  return 2;
}

}  // namespace chtwin
