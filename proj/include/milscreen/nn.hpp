#pragma once

#include <Eigen/Dense>
#include <cstdint>
#include <filesystem>
#include <functional>
#include <random>
#include <string>
#include <variant>
#include <vector>

#include "milscreen/error.hpp"

namespace milscreen::nn {

using Matrix = Eigen::MatrixXd;  // rows = examples, cols = features
using Rng = std::mt19937_64;

enum class Mode { Train, Eval };

struct LinearSpec {
  std::size_t in = 0;
  std::size_t out = 0;
  bool operator==(const LinearSpec&) const = default;
};
struct DropoutSpec {
  double p = 0.5;
  bool operator==(const DropoutSpec&) const = default;
};
struct BatchNormSpec {
  std::size_t features = 0;
  bool operator==(const BatchNormSpec&) const = default;
};
struct ReluSpec {
  bool operator==(const ReluSpec&) const = default;
};
struct SoftmaxSpec {
  bool operator==(const SoftmaxSpec&) const = default;
};
using LayerSpec = std::variant<LinearSpec, DropoutSpec, BatchNormSpec, ReluSpec, SoftmaxSpec>;

std::string describe(const LayerSpec& spec);

// y = x W + b, W is in x out.
class Linear {
 public:
  Linear(const LinearSpec& spec, Rng& init);
  Matrix forward(const Matrix& x, Mode mode, Rng& rng);
  Matrix backward(const Matrix& grad_out);
  Matrix infer(const Matrix& x) const;

  Matrix weight, bias, grad_weight, grad_bias;

 private:
  Matrix input_;
};

// Inverted dropout: train mode keeps each unit with probability 1-p and scales by 1/(1-p).
class Dropout {
 public:
  explicit Dropout(const DropoutSpec& spec);
  Matrix forward(const Matrix& x, Mode mode, Rng& rng);
  Matrix backward(const Matrix& grad_out);
  Matrix infer(const Matrix& x) const { return x; }
  double p() const { return p_; }

 private:
  double p_;
  Matrix mask_;  // already scaled; empty in eval mode
};

// Batch normalization over the batch dimension. Running statistics use
// momentum 0.1 and the unbiased batch variance.
class BatchNorm {
 public:
  static constexpr double kEps = 1e-5;
  static constexpr double kMomentum = 0.1;

  explicit BatchNorm(const BatchNormSpec& spec);
  Matrix forward(const Matrix& x, Mode mode, Rng& rng);
  Matrix backward(const Matrix& grad_out);
  Matrix infer(const Matrix& x) const;
  // Normalized activations (before gain/shift) of the last train-mode forward.
  const Matrix& last_normalized() const { return x_hat_; }

  Matrix gamma, beta, grad_gamma, grad_beta;
  Matrix running_mean, running_var;

 private:
  Matrix x_hat_;
  Eigen::RowVectorXd inv_std_;
};

class Relu {
 public:
  Matrix forward(const Matrix& x, Mode mode, Rng& rng);
  Matrix backward(const Matrix& grad_out);
  Matrix infer(const Matrix& x) const { return x.cwiseMax(0.0); }

 private:
  Matrix input_;
};

// Row-wise softmax.
class Softmax {
 public:
  Matrix forward(const Matrix& x, Mode mode, Rng& rng);
  Matrix backward(const Matrix& grad_out);
  Matrix infer(const Matrix& x) const;

 private:
  Matrix output_;
};

using Layer = std::variant<Linear, Dropout, BatchNorm, Relu, Softmax>;

// Non-owning view of one trainable tensor and its gradient.
struct ParamRef {
  std::string name;
  Matrix* value;
  Matrix* grad;
};

class MlpModel {
 public:
  // Validates dimension compatibility and initializes Linear weights uniformly in
  // +-sqrt(6 / (fan_in + fan_out)) from the seed; biases start at zero.
  MlpModel(std::vector<LayerSpec> specs, std::uint64_t seed);

  Matrix forward(const Matrix& x, Mode mode, Rng& rng);
  // Back-propagates from the output of the last forward(); accumulates into grads.
  Matrix backward(const Matrix& grad_out);
  // Eval-mode forward without touching caches.
  Matrix predict(const Matrix& x) const;

  std::vector<ParamRef> parameters();
  void zero_grad();
  std::size_t parameter_count() const;

  const std::vector<LayerSpec>& specs() const { return specs_; }
  std::vector<Layer>& layers() { return layers_; }
  const std::vector<Layer>& layers() const { return layers_; }
  std::size_t input_dim() const { return input_dim_; }
  std::size_t output_dim() const { return output_dim_; }
  std::uint64_t seed() const { return seed_; }
  bool ends_with_softmax() const;
  bool has_batch_norm() const;

  // Trainable tensors followed by batch-norm running statistics, in layer order.
  std::vector<std::pair<std::string, const Matrix*>> state() const;
  std::vector<std::pair<std::string, Matrix*>> mutable_state();

  // Forward through layers [0, end) / backward through layers [0, end) in reverse.
  Matrix forward_range(const Matrix& x, std::size_t end, Mode mode, Rng& rng);
  Matrix backward_range(const Matrix& grad, std::size_t end);

 private:

  std::vector<LayerSpec> specs_;
  std::vector<Layer> layers_;
  std::size_t input_dim_ = 0;
  std::size_t output_dim_ = 0;
  std::uint64_t seed_ = 0;
};

struct LossResult {
  double loss = 0.0;
  Matrix probabilities;
  Matrix input_grad;  // d loss / d x
};

// Mean softmax cross-entropy over the batch, with gradients accumulated into every
// parameter. A trailing Softmax layer is fused with the loss; without one the
// model output is treated as logits.
LossResult loss_and_grads(MlpModel& model, const Matrix& x, const std::vector<int>& labels,
                          Rng& rng, Mode mode = Mode::Train);

// Nesterov step on one tensor: v <- mu v + g; theta <- theta - lr (g + mu v).
void sgd_step(Matrix& param, const Matrix& grad, Matrix& velocity, double lr, double momentum);

class NesterovSgd {
 public:
  NesterovSgd(double momentum, double weight_decay = 0.0);
  void step(const std::vector<ParamRef>& params, double lr);

 private:
  double momentum_;
  double weight_decay_;
  std::vector<Matrix> velocity_;
};

struct TrainConfig {
  int epochs = 30;
  double lr = 0.001;
  double lr_decay_gamma = 0.85;
  int lr_decay_epochs = 7;
  std::size_t batch_size = 32;
  double momentum = 0.9;
  double weight_decay = 0.0;
  std::uint64_t seed = 0;

  void validate() const;
};

double lr_at(int epoch, const TrainConfig& config);

struct EpochRecord {
  int epoch = 0;
  double loss = 0.0;
  double lr = 0.0;
  double val_accuracy = 0.0;
};

struct TrainHistory {
  std::vector<EpochRecord> epochs;
  int best_epoch = -1;
  double best_val_accuracy = 0.0;
};

// Maps eval-mode validation probabilities to an accuracy. The default scores argmax
// against the row labels.
using ValidationScorer = std::function<double(const Matrix& probabilities)>;

struct TrainResult {
  MlpModel model;
  TrainHistory history;
};

// Mini-batch Nesterov SGD with per-epoch shuffling. Returns the snapshot with the
// highest validation accuracy (earliest epoch on ties). Without validation rows the
// final epoch is returned.
TrainResult train(MlpModel model, const Matrix& x_train, const std::vector<int>& y_train,
                  const Matrix& x_val, const std::vector<int>& y_val, const TrainConfig& config,
                  const ValidationScorer& scorer = {});

double accuracy(const Matrix& probabilities, const std::vector<int>& labels);

// Central finite differences against back-propagated gradients for every
// parameter entry and every input entry. Train mode is used with the dropout
// masks frozen by replaying the same generator seed. The relative error is
// |a - n| / max(floor, |a| + |n|), so gradients far below the floor are judged
// by absolute error instead.
inline constexpr double kGradCheckFloor = 1e-4;
struct GradCheck {
  double max_rel_error = 0.0;
  std::string worst;  // tensor holding the largest error
  std::size_t checked = 0;
};
GradCheck check_gradients(MlpModel& model, const Matrix& x, const std::vector<int>& labels,
                          std::uint64_t seed, double h = 1e-5);

void save_checkpoint(const std::filesystem::path& path, const MlpModel& model,
                     const TrainConfig& config);
MlpModel load_checkpoint(const std::filesystem::path& path, TrainConfig* config = nullptr);

void write_history_csv(const std::filesystem::path& path, const TrainHistory& history,
                       const std::string& manifest_hash = {});

}  // namespace milscreen::nn
