#pragma once

#include <cstddef>
#include <span>
#include <string>
#include <vector>

#include "samplation/dataset.hpp"
#include "samplation/rng.hpp"

namespace samplation {

/// Multinomial logistic (softmax) classifier.
///
/// `weights` is row-major n_labels x dim. Only weights are L2-penalised.
struct Model {
  std::size_t dim = 0;
  std::size_t n_labels = 0;
  std::vector<double> weights;
  std::vector<double> bias;
  std::size_t trained_epochs = 0;
  std::vector<Seed> seed_history;

  Model() = default;
  Model(std::size_t dim, std::size_t n_labels);

  double weight(std::size_t label, std::size_t feature) const {
    return weights[label * dim + feature];
  }
  double& weight(std::size_t label, std::size_t feature) {
    return weights[label * dim + feature];
  }

  /// Throws DimensionError unless the parameter shapes match and are finite.
  void validate() const;

  friend bool operator==(const Model&, const Model&) = default;
};

struct TrainConfig {
  std::size_t epochs = 20;
  std::size_t batch_size = 32;
  double learning_rate = 0.1;
  double l2 = 1e-4;
  Seed seed = 0;

  void validate() const;
};

/// Gradient of the training objective, same layout as Model.
struct Gradient {
  std::vector<double> weights;
  std::vector<double> bias;
};

struct LossAndGrad {
  double loss = 0.0;
  Gradient grad;
};

/// Probability vector for one input; stable for large logits.
std::vector<double> softmax(std::span<const double> logits);

/// Lowest index attaining the maximum.
std::size_t argmax(std::span<const double> values);

struct Prediction {
  std::size_t label = 0;
  std::vector<double> probabilities;
};

std::vector<double> predict_proba(const Model& m, std::span<const double> features);
std::vector<Prediction> predict(const Model& m, const Dataset& xs);

/// Mean cross-entropy over `batch` plus (l2 / 2) * ||weights||^2, with its
/// analytic gradient.
LossAndGrad loss_and_grad(const Model& m, const Dataset& batch, double l2);

/// Objective value only; same definition as loss_and_grad.
double loss(const Model& m, const Dataset& batch, double l2);

/// Fresh model with weights ~ N(0, 0.01^2) and zero bias, drawn from `seed`.
Model initialize(std::size_t dim, std::size_t n_labels, Seed seed);

/// Trains a freshly initialised model by mini-batch SGD. Shuffling and
/// initialisation derive from cfg.seed. Throws TrainingError on empty data
/// or divergence.
Model pretrain(const Dataset& train, const TrainConfig& cfg);

/// Continues SGD from `m`'s parameters on `sample`. An empty sample or zero
/// epochs returns `m` unchanged.
Model finetune(const Model& m, const Dataset& sample, const TrainConfig& cfg);

/// Exact JSON form: {d, n_labels, weights, bias, trained_epochs, seed_history}.
std::string model_to_json(const Model& m);
Model model_from_json(const std::string& text);

}  // namespace samplation
