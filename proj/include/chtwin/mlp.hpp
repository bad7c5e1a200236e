#pragma once

#include <Eigen/Dense>
#include <array>
#include <cstdint>
#include <filesystem>
#include <functional>
#include <span>
#include <string>
#include <vector>

#include "chtwin/env.hpp"
#include "chtwin/predictor.hpp"
#include "chtwin/sampling.hpp"

namespace chtwin {

inline constexpr std::size_t kInputDim = 4;  // (tx_x, tx_y, rx_x, rx_y)
inline constexpr std::size_t kCtHiddenLayers = 7;
inline constexpr std::size_t kDefaultHiddenWidth = 128;

// Fully-connected layer, weights stored out x in.
struct DenseLayer {
  Eigen::MatrixXd weights;
  Eigen::VectorXd bias;
};

// Per-coordinate affine map x' = scale * x + offset.
struct InputNorm {
  std::array<double, kInputDim> scale{1.0, 1.0, 1.0, 1.0};
  std::array<double, kInputDim> offset{0.0, 0.0, 0.0, 0.0};

  // Maps [0, width] x [0, height] onto [-1, 1] for both endpoints.
  static InputNorm from_roi(double width, double height);
  static InputNorm identity() { return {}; }
};

// z-score of the target gain.
struct TargetNorm {
  double mean_db = 0.0;
  double std_db = 1.0;

  double normalize(double gain_db) const { return (gain_db - mean_db) / std_db; }
  double denormalize(double z) const { return z * std_db + mean_db; }
};

// Layer dimensions of the twin: 4 inputs, seven hidden ReLU layers, 1 output.
std::vector<std::size_t> ct_layer_dims(std::size_t hidden_width = kDefaultHiddenWidth);

// Coordinate-to-gain regressor with ReLU hidden layers and a linear output.
class MlpModel {
 public:
  MlpModel() = default;
  // Zero weights and biases.
  explicit MlpModel(std::vector<std::size_t> layer_dims);

  // He-uniform weights, zero biases.
  static MlpModel he_uniform(std::vector<std::size_t> layer_dims, std::uint64_t seed);

  const std::vector<std::size_t>& layer_dims() const { return dims_; }
  std::size_t hidden_layer_count() const { return dims_.empty() ? 0 : dims_.size() - 2; }
  std::vector<DenseLayer>& layers() { return layers_; }
  const std::vector<DenseLayer>& layers() const { return layers_; }

  InputNorm input_norm;
  TargetNorm target_norm;

  Eigen::Vector4d normalize_input(Position tx, Position rx) const;
  // 4 x n matrix of normalized inputs.
  Eigen::MatrixXd normalize_inputs(std::span<const Sample> samples) const;

  // Network output in normalized target units, one column per input.
  Eigen::RowVectorXd forward_normalized(const Eigen::MatrixXd& inputs) const;

  // De-normalized gain in dB; throws InvariantError on non-finite output
  // (non-finite weights propagate through the ReLU).
  double forward(Position tx, Position rx) const;
  std::vector<double> predict(std::span<const Sample> samples) const;

  std::size_t parameter_count() const;
  // Flattened parameters: per layer, weights row-major then bias.
  std::vector<double> parameters() const;
  void set_parameters(std::span<const double> values);

  // Structural checks plus finiteness and std_db > 0.
  void validate() const;
  // validate() plus the 4 -> 7 hidden -> 1 shape.
  void validate_ct_architecture() const;

  bool same_shape(const MlpModel& other) const { return dims_ == other.dims_; }

 private:
  std::vector<std::size_t> dims_;
  std::vector<DenseLayer> layers_;
};

using Gradients = std::vector<DenseLayer>;

// loss = loss_scale * mean((f(x) - z)^2) in normalized units. When `grads` is
// non-null it receives d loss / d parameters.
double loss_and_gradient(const MlpModel& model, const Eigen::MatrixXd& inputs,
                         const Eigen::RowVectorXd& targets, Gradients* grads,
                         double loss_scale = 1.0);

// Max over parameters of |g_analytic - g_numeric| / max(|g_a|, |g_n|, 1e-8),
// with central differences of the given step.
double gradient_check(const MlpModel& model, const Eigen::MatrixXd& inputs,
                      const Eigen::RowVectorXd& targets, double step = 1e-5);

enum class OptimizerKind { sgd, adam };

std::string to_string(OptimizerKind kind);
OptimizerKind optimizer_from_string(const std::string& name);

class Optimizer {
 public:
  Optimizer(OptimizerKind kind, double lr, const MlpModel& model);
  void step(MlpModel& model, const Gradients& grads);

 private:
  OptimizerKind kind_;
  double lr_;
  double beta1_ = 0.9;
  double beta2_ = 0.999;
  double eps_ = 1e-8;
  std::uint64_t t_ = 0;
  Gradients m_;
  Gradients v_;
};

struct TrainConfig {
  double lr = 1e-3;
  std::size_t batch_size = 256;
  std::size_t epochs = 200;
  std::uint64_t seed = 0;
  OptimizerKind optimizer = OptimizerKind::adam;

  void validate() const;
};

struct EpochMetrics {
  std::size_t epoch = 0;
  double train_mse_db2 = 0.0;
  double val_mse_db2 = 0.0;
};

struct TrainResult {
  MlpModel model;
  std::vector<EpochMetrics> history;
};

// Mean and population std of the targets, accumulated in canonical sample
// order. A zero spread (e.g. one sample) falls back to std 1.
TargetNorm fit_target_norm(const Dataset& ds);

// Samples sorted into canonical order and normalized with the model's
// constants. Batching depends on the seeded shuffle of this order, never on
// the order samples arrived in.
struct TrainingSet {
  TrainingSet(const MlpModel& model, const Dataset& ds);
  Eigen::MatrixXd inputs;      // 4 x n
  Eigen::RowVectorXd targets;  // normalized
  std::size_t size() const { return static_cast<std::size_t>(targets.size()); }
};

// One pass of seeded minibatch optimization. The shuffle is seeded by
// derive_seed(seed, epoch). Returns the sample-weighted mean batch loss in
// normalized units; throws DivergenceError on a non-finite loss.
double train_epoch(MlpModel& model, const TrainingSet& data, Optimizer& optimizer,
                   std::size_t batch_size, std::uint64_t seed, std::size_t epoch);

// MSE in dB^2 of de-normalized predictions.
double evaluate_mse_db2(const MlpModel& model, const Dataset& ds);

using EpochCallback = std::function<void(const EpochMetrics&)>;

// Sets target_norm from train_ds, then runs cfg.epochs epochs. Input
// normalization must already be set on the model.
TrainResult train(MlpModel model, const Dataset& train_ds, const Dataset& val_ds,
                  const TrainConfig& cfg, const EpochCallback& on_epoch = {});

std::string checkpoint_to_text(const MlpModel& model);
MlpModel checkpoint_from_text(const std::string& text);
void save_checkpoint(const MlpModel& model, const std::filesystem::path& path);
MlpModel load_checkpoint(const std::filesystem::path& path);

class MlpPredictor final : public GainPredictor {
 public:
  explicit MlpPredictor(MlpModel model);
  double gain(Position tx, Position rx) const override { return model_.forward(tx, rx); }
  std::string tag() const override { return "mlp"; }
  const MlpModel& model() const { return model_; }

 private:
  MlpModel model_;
};

}  // namespace chtwin
