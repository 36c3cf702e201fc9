#pragma once

#include <cstddef>
#include <filesystem>
#include <string>
#include <utility>
#include <vector>

#include "samplation/rng.hpp"

namespace samplation {

/// One labeled unit.
struct Instance {
  std::vector<double> features;
  std::size_t label = 0;
  std::size_t group = 0;  // value of the discriminant variable
  bool synthetic = false;

  friend bool operator==(const Instance&, const Instance&) = default;
};

/// An ordered collection of instances sharing one feature dimension and
/// declared label/group cardinalities.
///
/// Construction validates every instance; a Dataset value is always
/// consistent. Order is preserved by every operation that does not document
/// otherwise.
class Dataset {
 public:
  Dataset() = default;
  Dataset(std::size_t dim, std::size_t n_labels, std::size_t n_groups,
          std::vector<Instance> instances = {}, std::string name = {});

  std::size_t dim() const noexcept { return dim_; }
  std::size_t n_labels() const noexcept { return n_labels_; }
  std::size_t n_groups() const noexcept { return n_groups_; }
  const std::string& name() const noexcept { return name_; }
  void set_name(std::string name) { name_ = std::move(name); }

  std::size_t size() const noexcept { return instances_.size(); }
  bool empty() const noexcept { return instances_.empty(); }
  const std::vector<Instance>& instances() const noexcept { return instances_; }
  const Instance& operator[](std::size_t i) const { return instances_[i]; }
  auto begin() const noexcept { return instances_.begin(); }
  auto end() const noexcept { return instances_.end(); }

  /// Appends after validating against this dataset's schema.
  void push_back(Instance inst);

  /// Number of instances per group value (length n_groups).
  std::vector<std::size_t> group_counts() const;

  /// Same schema, no instances.
  Dataset empty_like() const;

  /// Equality of schema and instances; the name is ignored.
  friend bool operator==(const Dataset& a, const Dataset& b) {
    return a.dim_ == b.dim_ && a.n_labels_ == b.n_labels_ &&
           a.n_groups_ == b.n_groups_ && a.instances_ == b.instances_;
  }

 private:
  void validate(const Instance& inst, std::size_t index) const;

  std::size_t dim_ = 0;
  std::size_t n_labels_ = 0;
  std::size_t n_groups_ = 0;
  std::vector<Instance> instances_;
  std::string name_;
};

/// Parameters of the Gaussian group-imbalance generator.
struct SynthConfig {
  std::size_t n = 2000;
  std::size_t dim = 2;
  std::vector<double> group_prevalence{0.9, 0.1};
  double class_separation = 1.5;
  double noise_sd = 1.0;
  Seed seed = 0;

  /// Throws ConfigError when the invariants do not hold.
  void validate() const;
};

/// Mean of group `g`'s Gaussian: evenly spaced along the first axis, centred
/// on the origin, consecutive groups `class_separation` apart.
std::vector<double> group_mean(const SynthConfig& cfg, std::size_t g);

/// Draws `cfg.n` instances. The group is drawn from the prevalence vector,
/// features from an isotropic Gaussian around the group mean, and the label
/// is the group. Each instance uses its own derived random stream, so the
/// output depends only on the configuration.
Dataset generate_synthetic(const SynthConfig& cfg);

/// Deterministic shuffled partition into (train, test).
///
/// The train part holds round-half-to-even(n * train_frac) instances. Both
/// parts keep the input's relative order.
std::pair<Dataset, Dataset> split(const Dataset& ds, double train_frac, Seed seed);

/// Writes the dataset CSV (`f0,...,f{d-1},label,group,synthetic`).
void write_csv(const Dataset& ds, const std::filesystem::path& path);

/// Serialises to the CSV text written by write_csv.
std::string to_csv(const Dataset& ds);

/// Reads a dataset CSV. Label and group cardinalities are the larger of the
/// observed maximum + 1 and the given minimums.
Dataset read_csv(const std::filesystem::path& path, std::size_t min_labels = 0,
                 std::size_t min_groups = 0);

/// Parses CSV text; see read_csv.
Dataset parse_csv(const std::string& text, std::size_t min_labels = 0,
                  std::size_t min_groups = 0);

/// Shortest decimal text that parses back to exactly `v`.
std::string format_double(double v);

}  // namespace samplation
