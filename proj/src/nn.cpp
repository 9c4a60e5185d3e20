#include "milscreen/nn.hpp"

#include <algorithm>
#include <bit>
#include <cmath>
#include <fstream>
#include <numeric>
#include <sstream>

#include "json.hpp"

namespace milscreen::nn {

namespace {
template <class... Ts>
struct overloaded : Ts... {
  using Ts::operator()...;
};
template <class... Ts>
overloaded(Ts...) -> overloaded<Ts...>;
}  // namespace

std::string describe(const LayerSpec& spec) {
  return std::visit(
      overloaded{
          [](const LinearSpec& s) { return "Linear(" + std::to_string(s.in) + "," + std::to_string(s.out) + ")"; },
          [](const DropoutSpec& s) {
            std::ostringstream o;
            o << "Dropout(" << s.p << ")";
            return o.str();
          },
          [](const BatchNormSpec& s) { return "BatchNorm(" + std::to_string(s.features) + ")"; },
          [](const ReluSpec&) { return std::string("ReLU"); },
          [](const SoftmaxSpec&) { return std::string("Softmax"); }},
      spec);
}

// --- Linear ---

Linear::Linear(const LinearSpec& spec, Rng& init) {
  const auto in = static_cast<Eigen::Index>(spec.in), out = static_cast<Eigen::Index>(spec.out);
  const double bound = std::sqrt(6.0 / static_cast<double>(spec.in + spec.out));
  std::uniform_real_distribution<double> u(-bound, bound);
  weight.resize(in, out);
  for (Eigen::Index j = 0; j < out; ++j)
    for (Eigen::Index i = 0; i < in; ++i) weight(i, j) = u(init);
  bias = Matrix::Zero(1, out);
  grad_weight = Matrix::Zero(in, out);
  grad_bias = Matrix::Zero(1, out);
}

Matrix Linear::forward(const Matrix& x, Mode, Rng&) {
  input_ = x;
  return infer(x);
}

Matrix Linear::infer(const Matrix& x) const {
  Matrix y = x * weight;
  y.rowwise() += bias.row(0);
  return y;
}

Matrix Linear::backward(const Matrix& g) {
  grad_weight += input_.transpose() * g;
  grad_bias += g.colwise().sum();
  return g * weight.transpose();
}

// --- Dropout ---

Dropout::Dropout(const DropoutSpec& spec) : p_(spec.p) {
  if (!(p_ >= 0.0 && p_ < 1.0)) throw Error("dropout probability must lie in [0,1)");
}

Matrix Dropout::forward(const Matrix& x, Mode mode, Rng& rng) {
  if (mode == Mode::Eval || p_ == 0.0) {
    mask_.resize(0, 0);
    return x;
  }
  std::bernoulli_distribution keep(1.0 - p_);
  const double scale = 1.0 / (1.0 - p_);
  mask_.resize(x.rows(), x.cols());
  for (Eigen::Index j = 0; j < x.cols(); ++j)
    for (Eigen::Index i = 0; i < x.rows(); ++i) mask_(i, j) = keep(rng) ? scale : 0.0;
  return x.cwiseProduct(mask_);
}

Matrix Dropout::backward(const Matrix& g) {
  if (mask_.size() == 0) return g;
  return g.cwiseProduct(mask_);
}

// --- BatchNorm ---

BatchNorm::BatchNorm(const BatchNormSpec& spec) {
  const auto f = static_cast<Eigen::Index>(spec.features);
  gamma = Matrix::Ones(1, f);
  beta = Matrix::Zero(1, f);
  grad_gamma = Matrix::Zero(1, f);
  grad_beta = Matrix::Zero(1, f);
  running_mean = Matrix::Zero(1, f);
  running_var = Matrix::Ones(1, f);
}

Matrix BatchNorm::forward(const Matrix& x, Mode mode, Rng&) {
  if (mode == Mode::Eval) return infer(x);
  const double n = static_cast<double>(x.rows());
  if (x.rows() == 0) throw Error("BatchNorm: empty batch");
  const Eigen::RowVectorXd mu = x.colwise().mean();
  const Matrix centered = x.rowwise() - mu;
  const Eigen::RowVectorXd var = centered.array().square().colwise().sum() / n;
  inv_std_ = (var.array() + kEps).rsqrt();
  x_hat_ = centered.array().rowwise() * inv_std_.array();
  const Eigen::RowVectorXd unbiased = x.rows() > 1 ? Eigen::RowVectorXd(var * (n / (n - 1.0))) : var;
  running_mean = (1.0 - kMomentum) * running_mean + kMomentum * Matrix(mu);
  running_var = (1.0 - kMomentum) * running_var + kMomentum * Matrix(unbiased);
  Matrix y = x_hat_.array().rowwise() * gamma.row(0).array();
  y.rowwise() += beta.row(0);
  return y;
}

Matrix BatchNorm::infer(const Matrix& x) const {
  const Eigen::RowVectorXd inv = (running_var.row(0).array() + kEps).rsqrt();
  Matrix y = (x.rowwise() - running_mean.row(0)).array().rowwise() * (inv.array() * gamma.row(0).array());
  y.rowwise() += beta.row(0);
  return y;
}

Matrix BatchNorm::backward(const Matrix& g) {
  const double n = static_cast<double>(g.rows());
  grad_beta += g.colwise().sum();
  grad_gamma += (g.cwiseProduct(x_hat_)).colwise().sum();
  const Matrix dxhat = g.array().rowwise() * gamma.row(0).array();
  const Eigen::RowVectorXd sum_d = dxhat.colwise().sum();
  const Eigen::RowVectorXd sum_dx = dxhat.cwiseProduct(x_hat_).colwise().sum();
  Matrix dx = (n * dxhat).rowwise() - sum_d;
  dx -= Matrix(x_hat_.array().rowwise() * sum_dx.array());
  return (dx.array().rowwise() * (inv_std_.array() / n)).matrix();
}

// --- ReLU ---

Matrix Relu::forward(const Matrix& x, Mode, Rng&) {
  input_ = x;
  return x.cwiseMax(0.0);
}

Matrix Relu::backward(const Matrix& g) {
  return g.cwiseProduct((input_.array() > 0.0).cast<double>().matrix());
}

// --- Softmax ---

Matrix Softmax::infer(const Matrix& x) const {
  Matrix y = x.colwise() - x.rowwise().maxCoeff();
  y = y.array().exp();
  const Eigen::VectorXd sums = y.rowwise().sum();
  return y.array().colwise() / sums.array();
}

Matrix Softmax::forward(const Matrix& x, Mode, Rng&) {
  output_ = infer(x);
  return output_;
}

Matrix Softmax::backward(const Matrix& g) {
  // dx_i = y_i (g_i - sum_j g_j y_j)
  const Eigen::VectorXd dot = g.cwiseProduct(output_).rowwise().sum();
  return output_.cwiseProduct(Matrix(g.colwise() - dot));
}

// --- MlpModel ---

MlpModel::MlpModel(std::vector<LayerSpec> specs, std::uint64_t seed)
    : specs_(std::move(specs)), seed_(seed) {
  if (specs_.empty()) throw Error("model needs at least one layer");
  Rng init(seed);
  std::size_t width = 0;  // 0 = not yet fixed
  auto require = [&](std::size_t d, const LayerSpec& s) {
    if (d == 0) throw Error("layer " + describe(s) + " has zero width");
    if (width != 0 && width != d)
      throw Error("layer " + describe(s) + " expects width " + std::to_string(d) + " but receives " +
                  std::to_string(width));
    if (input_dim_ == 0) input_dim_ = d;
  };
  for (const auto& s : specs_) {
    std::visit(overloaded{[&](const LinearSpec& l) {
                            require(l.in, s);
                            if (l.out == 0) throw Error("Linear layer with zero outputs");
                            layers_.emplace_back(Linear(l, init));
                            width = l.out;
                          },
                          [&](const DropoutSpec& d) { layers_.emplace_back(Dropout(d)); },
                          [&](const BatchNormSpec& b) {
                            require(b.features, s);
                            layers_.emplace_back(BatchNorm(b));
                            width = b.features;
                          },
                          [&](const ReluSpec&) { layers_.emplace_back(Relu{}); },
                          [&](const SoftmaxSpec&) { layers_.emplace_back(Softmax{}); }},
               s);
  }
  if (input_dim_ == 0) throw Error("model has no layer fixing its input width");
  output_dim_ = width;
}

Matrix MlpModel::forward_range(const Matrix& x, std::size_t end, Mode mode, Rng& rng) {
  if (static_cast<std::size_t>(x.cols()) != input_dim_)
    throw Error("input has " + std::to_string(x.cols()) + " features, model expects " +
                std::to_string(input_dim_));
  Matrix h = x;
  for (std::size_t i = 0; i < end; ++i)
    h = std::visit([&](auto& layer) { return layer.forward(h, mode, rng); }, layers_[i]);
  return h;
}

Matrix MlpModel::backward_range(const Matrix& grad, std::size_t end) {
  Matrix g = grad;
  for (std::size_t i = end; i-- > 0;)
    g = std::visit([&](auto& layer) { return layer.backward(g); }, layers_[i]);
  return g;
}

Matrix MlpModel::forward(const Matrix& x, Mode mode, Rng& rng) {
  return forward_range(x, layers_.size(), mode, rng);
}

Matrix MlpModel::backward(const Matrix& grad_out) { return backward_range(grad_out, layers_.size()); }

Matrix MlpModel::predict(const Matrix& x) const {
  if (static_cast<std::size_t>(x.cols()) != input_dim_)
    throw Error("input has " + std::to_string(x.cols()) + " features, model expects " +
                std::to_string(input_dim_));
  Matrix h = x;
  for (const auto& l : layers_) h = std::visit([&](const auto& layer) { return layer.infer(h); }, l);
  return h;
}

std::vector<ParamRef> MlpModel::parameters() {
  std::vector<ParamRef> out;
  for (std::size_t i = 0; i < layers_.size(); ++i) {
    const std::string prefix = std::to_string(i) + ".";
    if (auto* l = std::get_if<Linear>(&layers_[i])) {
      out.push_back({prefix + "weight", &l->weight, &l->grad_weight});
      out.push_back({prefix + "bias", &l->bias, &l->grad_bias});
    } else if (auto* b = std::get_if<BatchNorm>(&layers_[i])) {
      out.push_back({prefix + "gamma", &b->gamma, &b->grad_gamma});
      out.push_back({prefix + "beta", &b->beta, &b->grad_beta});
    }
  }
  return out;
}

void MlpModel::zero_grad() {
  for (auto& p : parameters()) p.grad->setZero();
}

std::size_t MlpModel::parameter_count() const {
  std::size_t n = 0;
  for (const auto& l : layers_) {
    if (const auto* lin = std::get_if<Linear>(&l)) n += static_cast<std::size_t>(lin->weight.size() + lin->bias.size());
    if (const auto* b = std::get_if<BatchNorm>(&l)) n += static_cast<std::size_t>(b->gamma.size() + b->beta.size());
  }
  return n;
}

bool MlpModel::ends_with_softmax() const { return std::holds_alternative<Softmax>(layers_.back()); }

bool MlpModel::has_batch_norm() const {
  return std::any_of(layers_.begin(), layers_.end(),
                     [](const Layer& l) { return std::holds_alternative<BatchNorm>(l); });
}

std::vector<std::pair<std::string, Matrix*>> MlpModel::mutable_state() {
  std::vector<std::pair<std::string, Matrix*>> out;
  for (auto& p : parameters()) out.emplace_back(p.name, p.value);
  for (std::size_t i = 0; i < layers_.size(); ++i) {
    if (auto* b = std::get_if<BatchNorm>(&layers_[i])) {
      out.emplace_back(std::to_string(i) + ".running_mean", &b->running_mean);
      out.emplace_back(std::to_string(i) + ".running_var", &b->running_var);
    }
  }
  return out;
}

std::vector<std::pair<std::string, const Matrix*>> MlpModel::state() const {
  std::vector<std::pair<std::string, const Matrix*>> out;
  for (auto& [name, m] : const_cast<MlpModel*>(this)->mutable_state()) out.emplace_back(name, m);
  return out;
}

// --- loss ---

LossResult loss_and_grads(MlpModel& model, const Matrix& x, const std::vector<int>& labels,
                          Rng& rng, Mode mode) {
  if (static_cast<std::size_t>(x.rows()) != labels.size())
    throw Error("loss_and_grads: label count differs from batch size");
  if (x.rows() == 0) throw Error("loss_and_grads: empty batch");
  const std::size_t n_layers = model.layers().size();
  const bool fused = model.ends_with_softmax();
  const Matrix out = model.forward_range(x, fused ? n_layers - 1 : n_layers, mode, rng);
  const Softmax sm;
  LossResult r;
  r.probabilities = sm.infer(out);
  const auto k = r.probabilities.cols();
  const double n = static_cast<double>(x.rows());
  Matrix grad = r.probabilities;
  double loss = 0.0;
  for (Eigen::Index i = 0; i < x.rows(); ++i) {
    const int y = labels[static_cast<std::size_t>(i)];
    if (y < 0 || y >= k) throw Error("loss_and_grads: label " + std::to_string(y) + " out of range");
    // log-softmax evaluated from the logits for stability
    const double m = out.row(i).maxCoeff();
    const double lse = m + std::log((out.row(i).array() - m).exp().sum());
    loss += lse - out(i, y);
    grad(i, y) -= 1.0;
  }
  r.loss = loss / n;
  if (!std::isfinite(r.loss)) {
    std::ostringstream msg;
    msg << "non-finite loss (" << r.loss << "); logits range [" << out.minCoeff() << ", "
        << out.maxCoeff() << "], batch " << x.rows();
    throw Error(msg.str());
  }
  grad /= n;
  r.input_grad = model.backward_range(grad, fused ? n_layers - 1 : n_layers);
  return r;
}

GradCheck check_gradients(MlpModel& model, const Matrix& x, const std::vector<int>& labels,
                          std::uint64_t seed, double h) {
  const auto loss_at = [&](const Matrix& input) {
    Rng rng(seed);
    return loss_and_grads(model, input, labels, rng, Mode::Train).loss;
  };
  model.zero_grad();
  Rng rng(seed);
  const Matrix input_grad = loss_and_grads(model, x, labels, rng, Mode::Train).input_grad;
  std::vector<std::pair<std::string, Matrix>> analytic;
  for (const auto& p : model.parameters()) analytic.emplace_back(p.name, *p.grad);

  GradCheck out;
  const auto compare = [&](const std::string& name, double a, double numeric) {
    const double err = std::abs(a - numeric) / std::max(kGradCheckFloor, std::abs(a) + std::abs(numeric));
    ++out.checked;
    if (err > out.max_rel_error) {
      out.max_rel_error = err;
      out.worst = name;
    }
  };
  auto params = model.parameters();
  for (std::size_t k = 0; k < params.size(); ++k) {
    Matrix& value = *params[k].value;
    for (Eigen::Index i = 0; i < value.size(); ++i) {
      const double keep = value(i);
      value(i) = keep + h;
      const double up = loss_at(x);
      value(i) = keep - h;
      const double down = loss_at(x);
      value(i) = keep;
      compare(params[k].name, analytic[k].second(i), (up - down) / (2 * h));
    }
  }
  Matrix probe = x;
  for (Eigen::Index i = 0; i < probe.size(); ++i) {
    const double keep = probe(i);
    probe(i) = keep + h;
    const double up = loss_at(probe);
    probe(i) = keep - h;
    const double down = loss_at(probe);
    probe(i) = keep;
    compare("input", input_grad(i), (up - down) / (2 * h));
  }
  model.zero_grad();
  return out;
}

// --- optimizer ---

void sgd_step(Matrix& param, const Matrix& grad, Matrix& velocity, double lr, double momentum) {
  velocity = momentum * velocity + grad;
  param -= lr * (grad + momentum * velocity);
}

NesterovSgd::NesterovSgd(double momentum, double weight_decay)
    : momentum_(momentum), weight_decay_(weight_decay) {}

void NesterovSgd::step(const std::vector<ParamRef>& params, double lr) {
  if (velocity_.empty())
    for (const auto& p : params) velocity_.push_back(Matrix::Zero(p.value->rows(), p.value->cols()));
  if (velocity_.size() != params.size()) throw Error("optimizer state does not match parameters");
  for (std::size_t i = 0; i < params.size(); ++i) {
    Matrix g = *params[i].grad;
    if (weight_decay_ != 0.0) g += weight_decay_ * *params[i].value;
    sgd_step(*params[i].value, g, velocity_[i], lr, momentum_);
  }
}

void TrainConfig::validate() const {
  if (epochs <= 0) throw UsageError("epochs must be positive");
  if (!(lr > 0.0)) throw UsageError("learning rate must be positive");
  if (!(lr_decay_gamma > 0.0 && lr_decay_gamma <= 1.0)) throw UsageError("lr decay gamma must lie in (0,1]");
  if (lr_decay_epochs <= 0) throw UsageError("lr decay epochs must be positive");
  if (batch_size == 0) throw UsageError("batch size must be positive");
  if (momentum < 0.0 || momentum >= 1.0) throw UsageError("momentum must lie in [0,1)");
  if (weight_decay < 0.0) throw UsageError("weight decay must be non-negative");
}

double lr_at(int epoch, const TrainConfig& c) {
  if (epoch < 0) throw Error("lr_at: negative epoch");
  return c.lr * std::pow(c.lr_decay_gamma, epoch / c.lr_decay_epochs);
}

double accuracy(const Matrix& probabilities, const std::vector<int>& labels) {
  if (labels.empty()) return 0.0;
  std::size_t hits = 0;
  for (Eigen::Index i = 0; i < probabilities.rows(); ++i) {
    Eigen::Index arg = 0;
    probabilities.row(i).maxCoeff(&arg);
    if (arg == labels[static_cast<std::size_t>(i)]) ++hits;
  }
  return static_cast<double>(hits) / static_cast<double>(labels.size());
}

TrainResult train(MlpModel model, const Matrix& x_train, const std::vector<int>& y_train,
                  const Matrix& x_val, const std::vector<int>& y_val, const TrainConfig& config,
                  const ValidationScorer& scorer) {
  config.validate();
  if (x_train.rows() == 0) throw Error("train: empty training set");
  if (static_cast<std::size_t>(x_train.rows()) != y_train.size() ||
      static_cast<std::size_t>(x_val.rows()) != y_val.size())
    throw Error("train: label counts differ from row counts");

  Rng shuffle_rng(config.seed);
  Rng dropout_rng(config.seed ^ 0xD1B54A32D192ED03ULL);
  NesterovSgd opt(config.momentum, config.weight_decay);
  std::vector<std::size_t> order(static_cast<std::size_t>(x_train.rows()));
  std::iota(order.begin(), order.end(), 0);

  TrainResult best{model, {}};
  TrainHistory& hist = best.history;
  const bool has_val = x_val.rows() > 0;
  for (int epoch = 0; epoch < config.epochs; ++epoch) {
    const double lr = lr_at(epoch, config);
    std::shuffle(order.begin(), order.end(), shuffle_rng);
    double loss_sum = 0.0;
    std::size_t seen = 0;
    for (std::size_t start = 0; start < order.size(); start += config.batch_size) {
      const std::size_t end = std::min(order.size(), start + config.batch_size);
      // Batch statistics are undefined for a single example.
      if (end - start == 1 && model.has_batch_norm() && order.size() > 1) continue;
      Matrix xb(static_cast<Eigen::Index>(end - start), x_train.cols());
      std::vector<int> yb;
      for (std::size_t k = start; k < end; ++k) {
        xb.row(static_cast<Eigen::Index>(k - start)) = x_train.row(static_cast<Eigen::Index>(order[k]));
        yb.push_back(y_train[order[k]]);
      }
      model.zero_grad();
      const auto r = loss_and_grads(model, xb, yb, dropout_rng);
      opt.step(model.parameters(), lr);
      loss_sum += r.loss * static_cast<double>(end - start);
      seen += end - start;
    }
    EpochRecord rec;
    rec.epoch = epoch;
    rec.lr = lr;
    rec.loss = seen ? loss_sum / static_cast<double>(seen) : 0.0;
    if (has_val) {
      const Matrix p = model.predict(x_val);
      rec.val_accuracy = scorer ? scorer(p) : accuracy(p, y_val);
    }
    hist.epochs.push_back(rec);
    const bool improved = hist.best_epoch < 0 || (has_val ? rec.val_accuracy > hist.best_val_accuracy : true);
    if (improved) {
      hist.best_epoch = epoch;
      hist.best_val_accuracy = rec.val_accuracy;
      best.model = model;
    }
  }
  return best;
}

// --- checkpoint ---

namespace {

nlohmann::json spec_json(const LayerSpec& s) {
  return std::visit(overloaded{[](const LinearSpec& l) { return nlohmann::json{{"type", "linear"}, {"in", l.in}, {"out", l.out}}; },
                               [](const DropoutSpec& d) { return nlohmann::json{{"type", "dropout"}, {"p", d.p}}; },
                               [](const BatchNormSpec& b) { return nlohmann::json{{"type", "batchnorm"}, {"features", b.features}}; },
                               [](const ReluSpec&) { return nlohmann::json{{"type", "relu"}}; },
                               [](const SoftmaxSpec&) { return nlohmann::json{{"type", "softmax"}}; }},
                    s);
}

LayerSpec spec_from_json(const nlohmann::json& j) {
  const auto t = j.at("type").get<std::string>();
  if (t == "linear") return LinearSpec{j.at("in").get<std::size_t>(), j.at("out").get<std::size_t>()};
  if (t == "dropout") return DropoutSpec{j.at("p").get<double>()};
  if (t == "batchnorm") return BatchNormSpec{j.at("features").get<std::size_t>()};
  if (t == "relu") return ReluSpec{};
  if (t == "softmax") return SoftmaxSpec{};
  throw Error("unknown layer type '" + t + "' in checkpoint");
}

}  // namespace

void save_checkpoint(const std::filesystem::path& path, const MlpModel& model, const TrainConfig& c) {
  nlohmann::json h;
  h["format"] = "milnn";
  h["version"] = 1;
  h["seed"] = model.seed();
  for (const auto& s : model.specs()) h["layers"].push_back(spec_json(s));
  h["config"] = {{"epochs", c.epochs}, {"lr", c.lr}, {"lr_decay_gamma", c.lr_decay_gamma},
                 {"lr_decay_epochs", c.lr_decay_epochs}, {"batch_size", c.batch_size},
                 {"momentum", c.momentum}, {"weight_decay", c.weight_decay}, {"seed", c.seed}};
  const auto st = model.state();
  for (const auto& [name, m] : st) h["tensors"].push_back({{"name", name}, {"rows", m->rows()}, {"cols", m->cols()}});
  std::ofstream out(path, std::ios::binary);
  if (!out) throw Error("cannot write checkpoint '" + path.string() + "'");
  out << h.dump() << '\n';
  for (const auto& [name, m] : st) {
    // column-major, little-endian IEEE-754 doubles
    for (Eigen::Index k = 0; k < m->size(); ++k) {
      const auto u = std::bit_cast<std::uint64_t>(m->data()[k]);
      char b[8];
      for (int i = 0; i < 8; ++i) b[i] = static_cast<char>((u >> (8 * i)) & 0xFF);
      out.write(b, 8);
    }
  }
  if (!out) throw Error("write failed for checkpoint '" + path.string() + "'");
}

MlpModel load_checkpoint(const std::filesystem::path& path, TrainConfig* config) {
  std::ifstream in(path, std::ios::binary);
  if (!in) throw Error("cannot open checkpoint '" + path.string() + "'");
  std::string line;
  std::getline(in, line);
  nlohmann::json h;
  try {
    h = nlohmann::json::parse(line);
  } catch (const nlohmann::json::exception& e) {
    throw Error("checkpoint header unreadable: " + std::string(e.what()));
  }
  if (h.value("format", "") != "milnn" || h.value("version", 0) != 1)
    throw Error("not a v1 model checkpoint: " + path.string());
  std::vector<LayerSpec> specs;
  for (const auto& j : h.at("layers")) specs.push_back(spec_from_json(j));
  MlpModel model(specs, h.at("seed").get<std::uint64_t>());
  auto st = model.mutable_state();
  const auto& tensors = h.at("tensors");
  if (tensors.size() != st.size()) throw Error("checkpoint tensor list does not match its layers");
  for (std::size_t t = 0; t < st.size(); ++t) {
    Matrix& m = *st[t].second;
    if (tensors[t].at("name").get<std::string>() != st[t].first ||
        tensors[t].at("rows").get<Eigen::Index>() != m.rows() || tensors[t].at("cols").get<Eigen::Index>() != m.cols())
      throw Error("checkpoint tensor '" + st[t].first + "' has an unexpected name or shape");
    for (Eigen::Index k = 0; k < m.size(); ++k) {
      unsigned char b[8];
      if (!in.read(reinterpret_cast<char*>(b), 8)) throw Error("checkpoint truncated: " + path.string());
      std::uint64_t u = 0;
      for (int i = 0; i < 8; ++i) u |= static_cast<std::uint64_t>(b[i]) << (8 * i);
      m.data()[k] = std::bit_cast<double>(u);
    }
  }
  if (config) {
    const auto& c = h.at("config");
    config->epochs = c.at("epochs");
    config->lr = c.at("lr");
    config->lr_decay_gamma = c.at("lr_decay_gamma");
    config->lr_decay_epochs = c.at("lr_decay_epochs");
    config->batch_size = c.at("batch_size");
    config->momentum = c.at("momentum");
    config->weight_decay = c.at("weight_decay");
    config->seed = c.at("seed");
  }
  return model;
}

void write_history_csv(const std::filesystem::path& path, const TrainHistory& history,
                       const std::string& manifest_hash) {
  std::ofstream out(path, std::ios::binary);
  if (!out) throw Error("cannot write history '" + path.string() + "'");
  if (!manifest_hash.empty()) out << "# manifest " << manifest_hash << '\n';
  out << "epoch,loss,lr,val_accuracy,best\n";
  char buf[128];
  for (const auto& e : history.epochs) {
    std::snprintf(buf, sizeof buf, "%d,%.17g,%.17g,%.17g,%d\n", e.epoch, e.loss, e.lr, e.val_accuracy,
                  e.epoch == history.best_epoch ? 1 : 0);
    out << buf;
  }
}

}  // namespace milscreen::nn
