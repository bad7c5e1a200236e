#include "chtwin/mlp.hpp"

#include <algorithm>
#include <cmath>
#include <numeric>
#include <sstream>

#include "chtwin/error.hpp"
#include "chtwin/io.hpp"
#include "chtwin/rng.hpp"

namespace chtwin {

namespace {

// NaN-propagating ReLU: NaN < 0 is false, so NaN passes through.
inline double relu(double v) { return v < 0.0 ? 0.0 : v; }

bool all_finite(const Eigen::MatrixXd& m) { return m.allFinite(); }

}  // namespace

InputNorm InputNorm::from_roi(double width, double height) {
  if (!(width > 0.0 && height > 0.0)) throw PreconditionError("RoI dimensions must be positive");
  InputNorm n;
  const double sx = 2.0 / width;
  const double sy = 2.0 / height;
  n.scale = {sx, sy, sx, sy};
  n.offset = {-1.0, -1.0, -1.0, -1.0};
  return n;
}

std::vector<std::size_t> ct_layer_dims(std::size_t hidden_width) {
  std::vector<std::size_t> dims{kInputDim};
  dims.insert(dims.end(), kCtHiddenLayers, hidden_width);
  dims.push_back(1);
  return dims;
}

MlpModel::MlpModel(std::vector<std::size_t> layer_dims) : dims_(std::move(layer_dims)) {
  if (dims_.size() < 2) throw PreconditionError("MLP needs at least an input and an output layer");
  if (dims_.front() != kInputDim) throw PreconditionError("MLP input dimension must be 4");
  if (dims_.back() != 1) throw PreconditionError("MLP output dimension must be 1");
  for (auto d : dims_) {
    if (d == 0) throw PreconditionError("MLP layer width must be positive");
  }
  layers_.reserve(dims_.size() - 1);
  for (std::size_t l = 0; l + 1 < dims_.size(); ++l) {
    const auto out = static_cast<Eigen::Index>(dims_[l + 1]);
    const auto in = static_cast<Eigen::Index>(dims_[l]);
    layers_.push_back({Eigen::MatrixXd::Zero(out, in), Eigen::VectorXd::Zero(out)});
  }
}

MlpModel MlpModel::he_uniform(std::vector<std::size_t> layer_dims, std::uint64_t seed) {
  MlpModel m(std::move(layer_dims));
  Rng rng(seed);
  for (auto& layer : m.layers_) {
    const double bound = std::sqrt(6.0 / static_cast<double>(layer.weights.cols()));
    for (Eigen::Index r = 0; r < layer.weights.rows(); ++r) {
      for (Eigen::Index c = 0; c < layer.weights.cols(); ++c) {
        layer.weights(r, c) = rng.uniform(-bound, bound);
      }
    }
  }
  return m;
}

Eigen::Vector4d MlpModel::normalize_input(Position tx, Position rx) const {
  const std::array<double, kInputDim> raw{tx.x, tx.y, rx.x, rx.y};
  Eigen::Vector4d v;
  for (std::size_t k = 0; k < kInputDim; ++k) v(static_cast<Eigen::Index>(k)) = raw[k] * input_norm.scale[k] + input_norm.offset[k];
  return v;
}

Eigen::MatrixXd MlpModel::normalize_inputs(std::span<const Sample> samples) const {
  Eigen::MatrixXd x(static_cast<Eigen::Index>(kInputDim), static_cast<Eigen::Index>(samples.size()));
  for (std::size_t i = 0; i < samples.size(); ++i) {
    x.col(static_cast<Eigen::Index>(i)) = normalize_input(samples[i].tx, samples[i].rx);
  }
  return x;
}

Eigen::RowVectorXd MlpModel::forward_normalized(const Eigen::MatrixXd& inputs) const {
  if (layers_.empty()) throw InvariantError("MLP has no layers");
  Eigen::MatrixXd a = inputs;
  for (std::size_t l = 0; l < layers_.size(); ++l) {
    Eigen::MatrixXd z = layers_[l].weights * a;
    z.colwise() += layers_[l].bias;
    if (l + 1 < layers_.size()) z = z.unaryExpr(&relu);
    a = std::move(z);
  }
  return a.row(0);
}

double MlpModel::forward(Position tx, Position rx) const {
  const Eigen::MatrixXd x = normalize_input(tx, rx);
  const double g = target_norm.denormalize(forward_normalized(x)(0));
  if (!std::isfinite(g)) throw InvariantError("MLP produced a non-finite output (non-finite weights?)");
  return g;
}

std::vector<double> MlpModel::predict(std::span<const Sample> samples) const {
  std::vector<double> out;
  out.reserve(samples.size());
  constexpr std::size_t kChunk = 4096;
  for (std::size_t start = 0; start < samples.size(); start += kChunk) {
    const auto part = samples.subspan(start, std::min(kChunk, samples.size() - start));
    const Eigen::RowVectorXd z = forward_normalized(normalize_inputs(part));
    for (Eigen::Index i = 0; i < z.size(); ++i) {
      const double g = target_norm.denormalize(z(i));
      if (!std::isfinite(g)) throw InvariantError("MLP produced a non-finite output");
      out.push_back(g);
    }
  }
  return out;
}

std::size_t MlpModel::parameter_count() const {
  std::size_t n = 0;
  for (const auto& l : layers_) n += static_cast<std::size_t>(l.weights.size() + l.bias.size());
  return n;
}

std::vector<double> MlpModel::parameters() const {
  std::vector<double> out;
  out.reserve(parameter_count());
  for (const auto& l : layers_) {
    for (Eigen::Index r = 0; r < l.weights.rows(); ++r) {
      for (Eigen::Index c = 0; c < l.weights.cols(); ++c) out.push_back(l.weights(r, c));
    }
    for (Eigen::Index r = 0; r < l.bias.size(); ++r) out.push_back(l.bias(r));
  }
  return out;
}

void MlpModel::set_parameters(std::span<const double> values) {
  if (values.size() != parameter_count()) throw PreconditionError("parameter count mismatch");
  std::size_t k = 0;
  for (auto& l : layers_) {
    for (Eigen::Index r = 0; r < l.weights.rows(); ++r) {
      for (Eigen::Index c = 0; c < l.weights.cols(); ++c) l.weights(r, c) = values[k++];
    }
    for (Eigen::Index r = 0; r < l.bias.size(); ++r) l.bias(r) = values[k++];
  }
}

void MlpModel::validate() const {
  if (dims_.size() < 2 || layers_.size() + 1 != dims_.size()) throw InvariantError("MLP shape is inconsistent");
  if (dims_.front() != kInputDim || dims_.back() != 1) throw InvariantError("MLP must map 4 inputs to 1 output");
  for (std::size_t l = 0; l < layers_.size(); ++l) {
    const auto& layer = layers_[l];
    if (static_cast<std::size_t>(layer.weights.rows()) != dims_[l + 1] ||
        static_cast<std::size_t>(layer.weights.cols()) != dims_[l] ||
        static_cast<std::size_t>(layer.bias.size()) != dims_[l + 1]) {
      throw InvariantError("MLP layer " + std::to_string(l) + " has the wrong shape");
    }
    if (!all_finite(layer.weights) || !layer.bias.allFinite()) {
      throw InvariantError("MLP layer " + std::to_string(l) + " has non-finite parameters");
    }
  }
  for (std::size_t k = 0; k < kInputDim; ++k) {
    if (!std::isfinite(input_norm.scale[k]) || !std::isfinite(input_norm.offset[k])) {
      throw InvariantError("non-finite input normalization");
    }
  }
  if (!(std::isfinite(target_norm.mean_db) && std::isfinite(target_norm.std_db) && target_norm.std_db > 0.0)) {
    throw InvariantError("target normalization needs finite mean and std_db > 0");
  }
}

void MlpModel::validate_ct_architecture() const {
  validate();
  if (hidden_layer_count() != kCtHiddenLayers) {
    throw InvariantError("channel-twin MLP must have exactly 7 hidden layers, got " +
                         std::to_string(hidden_layer_count()));
  }
}

double loss_and_gradient(const MlpModel& model, const Eigen::MatrixXd& inputs,
                         const Eigen::RowVectorXd& targets, Gradients* grads, double loss_scale) {
  const auto& layers = model.layers();
  const std::size_t depth = layers.size();
  const Eigen::Index batch = inputs.cols();
  if (batch == 0 || targets.size() != batch) throw PreconditionError("batch shape mismatch");

  // activations[0] = input; pre[l] = pre-activation of layer l.
  std::vector<Eigen::MatrixXd> activations(depth + 1);
  std::vector<Eigen::MatrixXd> pre(depth);
  activations[0] = inputs;
  for (std::size_t l = 0; l < depth; ++l) {
    pre[l].noalias() = layers[l].weights * activations[l];
    pre[l].colwise() += layers[l].bias;
    activations[l + 1] = (l + 1 < depth) ? Eigen::MatrixXd(pre[l].unaryExpr(&relu)) : pre[l];
  }
  const Eigen::RowVectorXd residual = activations[depth].row(0) - targets;
  const double inv_batch = 1.0 / static_cast<double>(batch);
  const double loss = loss_scale * residual.squaredNorm() * inv_batch;
  if (grads == nullptr) return loss;

  grads->resize(depth);
  Eigen::MatrixXd delta = (2.0 * loss_scale * inv_batch) * residual;
  for (std::size_t l = depth; l-- > 0;) {
    auto& g = (*grads)[l];
    g.weights.noalias() = delta * activations[l].transpose();
    g.bias = delta.rowwise().sum();
    if (l == 0) break;
    Eigen::MatrixXd back = layers[l].weights.transpose() * delta;
    delta = back.cwiseProduct(
        pre[l - 1].unaryExpr([](double v) { return v > 0.0 ? 1.0 : 0.0; }));
  }
  return loss;
}

double gradient_check(const MlpModel& model, const Eigen::MatrixXd& inputs,
                      const Eigen::RowVectorXd& targets, double step) {
  Gradients analytic;
  loss_and_gradient(model, inputs, targets, &analytic);
  std::vector<double> flat_analytic;
  for (const auto& l : analytic) {
    for (Eigen::Index r = 0; r < l.weights.rows(); ++r) {
      for (Eigen::Index c = 0; c < l.weights.cols(); ++c) flat_analytic.push_back(l.weights(r, c));
    }
    for (Eigen::Index r = 0; r < l.bias.size(); ++r) flat_analytic.push_back(l.bias(r));
  }

  MlpModel probe = model;
  std::vector<double> params = model.parameters();
  double worst = 0.0;
  for (std::size_t k = 0; k < params.size(); ++k) {
    const double saved = params[k];
    params[k] = saved + step;
    probe.set_parameters(params);
    const double up = loss_and_gradient(probe, inputs, targets, nullptr);
    params[k] = saved - step;
    probe.set_parameters(params);
    const double down = loss_and_gradient(probe, inputs, targets, nullptr);
    params[k] = saved;
    const double numeric = (up - down) / (2.0 * step);
    const double ga = flat_analytic[k];
    const double denom = std::max({std::abs(ga), std::abs(numeric), 1e-8});
    worst = std::max(worst, std::abs(ga - numeric) / denom);
  }
  return worst;
}

std::string to_string(OptimizerKind kind) { return kind == OptimizerKind::sgd ? "sgd" : "adam"; }

OptimizerKind optimizer_from_string(const std::string& name) {
  if (name == "sgd") return OptimizerKind::sgd;
  if (name == "adam") return OptimizerKind::adam;
  throw PreconditionError("unknown optimizer '" + name + "' (expected sgd or adam)");
}

Optimizer::Optimizer(OptimizerKind kind, double lr, const MlpModel& model) : kind_(kind), lr_(lr) {
  if (!(std::isfinite(lr) && lr > 0.0)) throw PreconditionError("learning rate must be > 0");
  if (kind_ == OptimizerKind::adam) {
    for (const auto& l : model.layers()) {
      m_.push_back({Eigen::MatrixXd::Zero(l.weights.rows(), l.weights.cols()),
                    Eigen::VectorXd::Zero(l.bias.size())});
    }
    v_ = m_;
  }
}

void Optimizer::step(MlpModel& model, const Gradients& grads) {
  auto& layers = model.layers();
  if (kind_ == OptimizerKind::sgd) {
    for (std::size_t l = 0; l < layers.size(); ++l) {
      layers[l].weights -= lr_ * grads[l].weights;
      layers[l].bias -= lr_ * grads[l].bias;
    }
    return;
  }
  ++t_;
  const double c1 = 1.0 - std::pow(beta1_, static_cast<double>(t_));
  const double c2 = 1.0 - std::pow(beta2_, static_cast<double>(t_));
  const double step = lr_ / c1;
  const double inv_sqrt_c2 = 1.0 / std::sqrt(c2);
  const double eps = eps_;
  const auto update = [&](auto& param, auto& m, auto& v, const auto& g) {
    m = beta1_ * m + (1.0 - beta1_) * g;
    v = beta2_ * v + (1.0 - beta2_) * g.cwiseProduct(g);
    param.array() -= step * m.array() / ((v.array().sqrt() * inv_sqrt_c2) + eps);
  };
  for (std::size_t l = 0; l < layers.size(); ++l) {
    update(layers[l].weights, m_[l].weights, v_[l].weights, grads[l].weights);
    update(layers[l].bias, m_[l].bias, v_[l].bias, grads[l].bias);
  }
}

void TrainConfig::validate() const {
  if (!(std::isfinite(lr) && lr > 0.0)) throw PreconditionError("lr must be > 0");
  if (batch_size < 1) throw PreconditionError("batch_size must be >= 1");
  if (epochs < 1) throw PreconditionError("epochs must be >= 1");
}

namespace {

std::vector<std::size_t> canonical_order(const Dataset& ds) {
  std::vector<std::size_t> idx(ds.size());
  std::iota(idx.begin(), idx.end(), 0);
  const auto key = [&](std::size_t i) {
    const auto& s = ds.samples[i];
    return std::array<double, 5>{s.tx.x, s.tx.y, s.rx.x, s.rx.y, s.gain_db};
  };
  std::stable_sort(idx.begin(), idx.end(), [&](std::size_t a, std::size_t b) { return key(a) < key(b); });
  return idx;
}

}  // namespace

TargetNorm fit_target_norm(const Dataset& ds) {
  if (ds.empty()) throw PreconditionError("cannot fit target normalization on an empty dataset");
  const auto order = canonical_order(ds);
  double mean = 0.0;
  for (auto i : order) mean += ds.samples[i].gain_db;
  mean /= static_cast<double>(ds.size());
  double ss = 0.0;
  for (auto i : order) ss += (ds.samples[i].gain_db - mean) * (ds.samples[i].gain_db - mean);
  double sd = std::sqrt(ss / static_cast<double>(ds.size()));
  if (!(sd > 1e-12)) sd = 1.0;
  return {mean, sd};
}

TrainingSet::TrainingSet(const MlpModel& model, const Dataset& ds) {
  if (ds.empty()) throw PreconditionError("training set is empty");
  const auto order = canonical_order(ds);
  const auto n = static_cast<Eigen::Index>(ds.size());
  inputs.resize(static_cast<Eigen::Index>(kInputDim), n);
  targets.resize(n);
  for (Eigen::Index k = 0; k < n; ++k) {
    const auto& s = ds.samples[order[static_cast<std::size_t>(k)]];
    inputs.col(k) = model.normalize_input(s.tx, s.rx);
    targets(k) = model.target_norm.normalize(s.gain_db);
  }
}

double train_epoch(MlpModel& model, const TrainingSet& data, Optimizer& optimizer,
                   std::size_t batch_size, std::uint64_t seed, std::size_t epoch) {
  const std::size_t n = data.size();
  std::vector<std::size_t> perm(n);
  std::iota(perm.begin(), perm.end(), 0);
  Rng rng(derive_seed(seed, epoch));
  rng.shuffle(perm);

  const std::size_t bs = std::min(batch_size, n);
  Eigen::MatrixXd xb;
  Eigen::RowVectorXd zb;
  Gradients grads;
  double weighted = 0.0;
  for (std::size_t start = 0; start < n; start += bs) {
    const std::size_t count = std::min(bs, n - start);
    xb.resize(static_cast<Eigen::Index>(kInputDim), static_cast<Eigen::Index>(count));
    zb.resize(static_cast<Eigen::Index>(count));
    for (std::size_t k = 0; k < count; ++k) {
      const auto src = static_cast<Eigen::Index>(perm[start + k]);
      xb.col(static_cast<Eigen::Index>(k)) = data.inputs.col(src);
      zb(static_cast<Eigen::Index>(k)) = data.targets(src);
    }
    const double loss = loss_and_gradient(model, xb, zb, &grads);
    if (!std::isfinite(loss)) {
      throw DivergenceError("training diverged: non-finite loss at epoch " + std::to_string(epoch));
    }
    optimizer.step(model, grads);
    weighted += loss * static_cast<double>(count);
  }
  return weighted / static_cast<double>(n);
}

double evaluate_mse_db2(const MlpModel& model, const Dataset& ds) {
  if (ds.empty()) throw PreconditionError("evaluation set is empty");
  const auto pred = model.predict(ds.samples);
  double acc = 0.0;
  for (std::size_t i = 0; i < pred.size(); ++i) {
    const double e = pred[i] - ds.samples[i].gain_db;
    acc += e * e;
  }
  return acc / static_cast<double>(pred.size());
}

TrainResult train(MlpModel model, const Dataset& train_ds, const Dataset& val_ds,
                  const TrainConfig& cfg, const EpochCallback& on_epoch) {
  cfg.validate();
  if (train_ds.empty() || val_ds.empty()) throw PreconditionError("train and validation sets must be nonempty");
  model.target_norm = fit_target_norm(train_ds);
  model.validate();

  const TrainingSet data(model, train_ds);
  Optimizer optimizer(cfg.optimizer, cfg.lr, model);
  TrainResult result;
  const double var = model.target_norm.std_db * model.target_norm.std_db;
  for (std::size_t epoch = 0; epoch < cfg.epochs; ++epoch) {
    const double train_norm = train_epoch(model, data, optimizer, cfg.batch_size, cfg.seed, epoch);
    EpochMetrics m{epoch, train_norm * var, evaluate_mse_db2(model, val_ds)};
    result.history.push_back(m);
    if (on_epoch) on_epoch(m);
  }
  result.model = std::move(model);
  return result;
}

std::string checkpoint_to_text(const MlpModel& model) {
  model.validate();
  std::string out = "mlp v1\n";
  const auto& dims = model.layer_dims();
  for (std::size_t i = 0; i < dims.size(); ++i) out += (i ? " " : "") + std::to_string(dims[i]);
  out += '\n';
  const auto append_row = [&out](const auto& values) {
    for (Eigen::Index i = 0; i < values.size(); ++i) {
      if (i) out += ' ';
      out += format_double(values(i));
    }
    out += '\n';
  };
  for (const auto& l : model.layers()) {
    // Row-major flattening of the out x in weight matrix.
    const Eigen::Matrix<double, Eigen::Dynamic, Eigen::Dynamic, Eigen::RowMajor> w = l.weights;
    append_row(Eigen::Map<const Eigen::VectorXd>(w.data(), w.size()));
    append_row(l.bias);
  }
  out += "input_norm";
  for (double s : model.input_norm.scale) out += ' ' + format_double(s);
  for (double o : model.input_norm.offset) out += ' ' + format_double(o);
  out += "\ntarget_norm " + format_double(model.target_norm.mean_db) + ' ' +
         format_double(model.target_norm.std_db) + '\n';
  return out;
}

MlpModel checkpoint_from_text(const std::string& text) {
  std::istringstream in(text);
  std::string line;
  const auto next_line = [&](const char* what) {
    if (!std::getline(in, line)) throw ParseError(std::string("checkpoint truncated: missing ") + what);
    if (!line.empty() && line.back() == '\r') line.pop_back();
    return split(line, ' ');
  };
  const auto numbers = [&](const char* what, std::size_t expected, std::size_t skip = 0) {
    auto tokens = next_line(what);
    if (tokens.size() != expected + skip) {
      throw ParseError(std::string("checkpoint: ") + what + " has " +
                       std::to_string(tokens.size() - std::min(skip, tokens.size())) +
                       " values, expected " + std::to_string(expected));
    }
    std::vector<double> v;
    v.reserve(expected);
    for (std::size_t i = skip; i < tokens.size(); ++i) v.push_back(parse_double(tokens[i]));
    return std::make_pair(tokens, v);
  };

  if (!std::getline(in, line) || (line != "mlp v1" && line != "mlp v1\r")) {
    throw ParseError("not an mlp v1 checkpoint");
  }
  std::vector<std::size_t> dims;
  for (const auto& t : next_line("layer dims")) {
    const double d = parse_double(t);
    if (d < 1 || d != std::floor(d)) throw ParseError("checkpoint: bad layer dimension '" + t + "'");
    dims.push_back(static_cast<std::size_t>(d));
  }
  MlpModel model;
  try {
    model = MlpModel(dims);
  } catch (const PreconditionError& e) {
    throw ParseError(std::string("checkpoint: ") + e.what());
  }
  for (auto& l : model.layers()) {
    const auto [wt, w] = numbers("weights", static_cast<std::size_t>(l.weights.size()));
    const auto cols = static_cast<std::size_t>(l.weights.cols());
    for (std::size_t i = 0; i < w.size(); ++i) {
      l.weights(static_cast<Eigen::Index>(i / cols), static_cast<Eigen::Index>(i % cols)) = w[i];
    }
    const auto [bt, b] = numbers("biases", static_cast<std::size_t>(l.bias.size()));
    for (std::size_t i = 0; i < b.size(); ++i) l.bias(static_cast<Eigen::Index>(i)) = b[i];
  }
  const auto [nt, norm] = numbers("input_norm", 2 * kInputDim, 1);
  if (nt[0] != "input_norm") throw ParseError("checkpoint: expected input_norm line");
  for (std::size_t k = 0; k < kInputDim; ++k) {
    model.input_norm.scale[k] = norm[k];
    model.input_norm.offset[k] = norm[kInputDim + k];
  }
  const auto [tt, target] = numbers("target_norm", 2, 1);
  if (tt[0] != "target_norm") throw ParseError("checkpoint: expected target_norm line");
  model.target_norm = {target[0], target[1]};
  try {
    model.validate();
  } catch (const InvariantError& e) {
    throw ParseError(std::string("checkpoint: ") + e.what());
  }
  return model;
}

void save_checkpoint(const MlpModel& model, const std::filesystem::path& path) {
  write_file_atomic(path, checkpoint_to_text(model));
}

MlpModel load_checkpoint(const std::filesystem::path& path) {
  return checkpoint_from_text(read_text_file(path));
}

MlpPredictor::MlpPredictor(MlpModel model) : model_(std::move(model)) { model_.validate(); }

}  // namespace chtwin
