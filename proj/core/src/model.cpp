#include "samplation/model.hpp"

#include <algorithm>
#include <cmath>
#include <numeric>

#include "json.hpp"
#include "samplation/error.hpp"

namespace samplation {

Model::Model(std::size_t dim_, std::size_t n_labels_)
    : dim(dim_), n_labels(n_labels_), weights(dim_ * n_labels_, 0.0), bias(n_labels_, 0.0) {}

void Model::validate() const {
  if (dim == 0 || n_labels == 0) throw DimensionError("model dimensions must be positive");
  if (weights.size() != dim * n_labels || bias.size() != n_labels) {
    throw DimensionError("model parameter shapes do not match d and n_labels");
  }
  const auto finite = [](double v) { return std::isfinite(v); };
  if (!std::all_of(weights.begin(), weights.end(), finite) ||
      !std::all_of(bias.begin(), bias.end(), finite)) {
    throw DimensionError("model parameters must be finite");
  }
}

void TrainConfig::validate() const {
  if (batch_size == 0) throw ConfigError("batch_size must be positive");
  if (!(learning_rate >= 0.0) || !std::isfinite(learning_rate)) {
    throw ConfigError("learning_rate must be finite and >= 0");
  }
  if (!(l2 >= 0.0) || !std::isfinite(l2)) throw ConfigError("l2 must be finite and >= 0");
}

std::vector<double> softmax(std::span<const double> logits) {
  std::vector<double> p(logits.begin(), logits.end());
  if (p.empty()) return p;
  const double top = *std::max_element(p.begin(), p.end());
  double sum = 0.0;
  for (double& v : p) {
    v = std::exp(v - top);
    sum += v;
  }
  for (double& v : p) v /= sum;
  return p;
}

std::size_t argmax(std::span<const double> values) {
  return static_cast<std::size_t>(std::max_element(values.begin(), values.end()) -
                                  values.begin());
}

namespace {

void check_input(const Model& m, std::size_t dim) {
  if (dim != m.dim) {
    throw DimensionError("input has " + std::to_string(dim) + " features, model expects " +
                         std::to_string(m.dim));
  }
}

std::vector<double> logits(const Model& m, std::span<const double> x) {
  std::vector<double> z(m.bias);
  for (std::size_t c = 0; c < m.n_labels; ++c) {
    const double* row = m.weights.data() + c * m.dim;
    z[c] += std::inner_product(x.begin(), x.end(), row, 0.0);
  }
  return z;
}

// log(sum(exp(z))) with max subtraction.
double log_sum_exp(std::span<const double> z) {
  const double top = *std::max_element(z.begin(), z.end());
  double sum = 0.0;
  for (double v : z) sum += std::exp(v - top);
  return top + std::log(sum);
}

double l2_penalty(const Model& m, double l2) {
  if (l2 == 0.0) return 0.0;
  const double sq = std::inner_product(m.weights.begin(), m.weights.end(), m.weights.begin(), 0.0);
  return 0.5 * l2 * sq;
}

template <typename Indices>
LossAndGrad loss_and_grad_over(const Model& m, const Dataset& data, const Indices& rows,
                               double l2) {
  LossAndGrad out;
  out.grad.weights.assign(m.weights.size(), 0.0);
  out.grad.bias.assign(m.bias.size(), 0.0);
  double total = 0.0;
  std::size_t n = 0;
  for (std::size_t i : rows) {
    const auto& inst = data[i];
    const auto z = logits(m, inst.features);
    const double lse = log_sum_exp(z);
    total += lse - z[inst.label];
    for (std::size_t c = 0; c < m.n_labels; ++c) {
      const double residual = std::exp(z[c] - lse) - (c == inst.label ? 1.0 : 0.0);
      out.grad.bias[c] += residual;
      double* g = out.grad.weights.data() + c * m.dim;
      for (std::size_t j = 0; j < m.dim; ++j) g[j] += residual * inst.features[j];
    }
    ++n;
  }
  const double inv = 1.0 / static_cast<double>(n);
  for (double& g : out.grad.weights) g *= inv;
  for (double& g : out.grad.bias) g *= inv;
  if (l2 != 0.0) {
    for (std::size_t w = 0; w < m.weights.size(); ++w) out.grad.weights[w] += l2 * m.weights[w];
  }
  out.loss = total * inv + l2_penalty(m, l2);
  return out;
}

void check_batch(const Model& m, const Dataset& batch) {
  if (batch.empty()) throw TrainingError("loss requires a nonempty batch");
  check_input(m, batch.dim());
  if (batch.n_labels() > m.n_labels) {
    for (const auto& inst : batch) {
      if (inst.label >= m.n_labels) {
        throw DimensionError("label " + std::to_string(inst.label) +
                             " exceeds the model's label count");
      }
    }
  }
}

// Runs `cfg.epochs` of mini-batch SGD in place.
void run_sgd(Model& m, const Dataset& data, const TrainConfig& cfg) {
  std::vector<std::size_t> order(data.size());
  std::iota(order.begin(), order.end(), std::size_t{0});
  Rng rng(derive_seed(cfg.seed, "shuffle"));
  std::vector<std::size_t> batch;
  batch.reserve(cfg.batch_size);
  for (std::size_t epoch = 0; epoch < cfg.epochs; ++epoch) {
    for (std::size_t i = order.size(); i > 1; --i) {
      std::swap(order[i - 1], order[rng.uniform_index(i)]);
    }
    for (std::size_t start = 0; start < order.size(); start += cfg.batch_size) {
      const std::size_t stop = std::min(order.size(), start + cfg.batch_size);
      batch.assign(order.begin() + static_cast<std::ptrdiff_t>(start),
                   order.begin() + static_cast<std::ptrdiff_t>(stop));
      const auto lg = loss_and_grad_over(m, data, batch, cfg.l2);
      if (!std::isfinite(lg.loss)) {
        throw TrainingError("training diverged (non-finite loss at epoch " +
                            std::to_string(epoch) + "); try a smaller learning rate");
      }
      for (std::size_t w = 0; w < m.weights.size(); ++w) {
        m.weights[w] -= cfg.learning_rate * lg.grad.weights[w];
      }
      for (std::size_t c = 0; c < m.bias.size(); ++c) {
        m.bias[c] -= cfg.learning_rate * lg.grad.bias[c];
      }
    }
  }
  const auto finite = [](double v) { return std::isfinite(v); };
  if (!std::all_of(m.weights.begin(), m.weights.end(), finite) ||
      !std::all_of(m.bias.begin(), m.bias.end(), finite)) {
    throw TrainingError("training diverged (non-finite parameters); try a smaller learning rate");
  }
  m.trained_epochs += cfg.epochs;
  m.seed_history.push_back(cfg.seed);
}

}  // namespace

std::vector<double> predict_proba(const Model& m, std::span<const double> features) {
  check_input(m, features.size());
  return softmax(logits(m, features));
}

std::vector<Prediction> predict(const Model& m, const Dataset& xs) {
  if (!xs.empty()) check_input(m, xs.dim());
  std::vector<Prediction> out;
  out.reserve(xs.size());
  for (const auto& inst : xs) {
    Prediction p;
    p.probabilities = softmax(logits(m, inst.features));
    p.label = argmax(p.probabilities);
    out.push_back(std::move(p));
  }
  return out;
}

LossAndGrad loss_and_grad(const Model& m, const Dataset& batch, double l2) {
  check_batch(m, batch);
  std::vector<std::size_t> rows(batch.size());
  std::iota(rows.begin(), rows.end(), std::size_t{0});
  return loss_and_grad_over(m, batch, rows, l2);
}

double loss(const Model& m, const Dataset& batch, double l2) {
  check_batch(m, batch);
  double total = 0.0;
  for (const auto& inst : batch) {
    const auto z = logits(m, inst.features);
    total += log_sum_exp(z) - z[inst.label];
  }
  return total / static_cast<double>(batch.size()) + l2_penalty(m, l2);
}

Model initialize(std::size_t dim, std::size_t n_labels, Seed seed) {
  Model m(dim, n_labels);
  Rng rng(derive_seed(seed, "init"));
  for (double& w : m.weights) w = 0.01 * rng.normal();
  return m;
}

Model pretrain(const Dataset& train, const TrainConfig& cfg) {
  cfg.validate();
  if (train.empty()) throw TrainingError("cannot pre-train on an empty dataset");
  Model m = initialize(train.dim(), train.n_labels(), cfg.seed);
  run_sgd(m, train, cfg);
  return m;
}

Model finetune(const Model& m, const Dataset& sample, const TrainConfig& cfg) {
  cfg.validate();
  if (sample.empty() || cfg.epochs == 0) return m;
  check_batch(m, sample);
  Model out = m;
  run_sgd(out, sample, cfg);
  return out;
}

std::string model_to_json(const Model& m) {
  nlohmann::ordered_json j;
  j["d"] = m.dim;
  j["n_labels"] = m.n_labels;
  j["weights"] = m.weights;
  j["bias"] = m.bias;
  j["trained_epochs"] = m.trained_epochs;
  j["seed_history"] = m.seed_history;
  return j.dump(2) + "\n";
}

Model model_from_json(const std::string& text) {
  nlohmann::json j;
  try {
    j = nlohmann::json::parse(text);
  } catch (const nlohmann::json::parse_error& e) {
    throw ParseError(std::string("model JSON: ") + e.what());
  }
  try {
    Model m;
    m.dim = j.at("d").get<std::size_t>();
    m.n_labels = j.at("n_labels").get<std::size_t>();
    m.weights = j.at("weights").get<std::vector<double>>();
    m.bias = j.at("bias").get<std::vector<double>>();
    m.trained_epochs = j.value("trained_epochs", std::size_t{0});
    m.seed_history = j.value("seed_history", std::vector<Seed>{});
    m.validate();
    return m;
  } catch (const nlohmann::json::exception& e) {
    throw ParseError(std::string("model JSON: ") + e.what());
  }
}

}  // namespace samplation
