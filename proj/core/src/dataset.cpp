#include "samplation/dataset.hpp"

#include <algorithm>
#include <charconv>
#include <cfenv>
#include <cmath>
#include <fstream>
#include <numeric>
#include <sstream>
#include <string_view>

#include "samplation/error.hpp"

namespace samplation {

Dataset::Dataset(std::size_t dim, std::size_t n_labels, std::size_t n_groups,
                 std::vector<Instance> instances, std::string name)
    : dim_(dim),
      n_labels_(n_labels),
      n_groups_(n_groups),
      instances_(std::move(instances)),
      name_(std::move(name)) {
  if (dim_ == 0) throw DimensionError("dataset feature dimension must be positive");
  for (std::size_t i = 0; i < instances_.size(); ++i) validate(instances_[i], i);
}

void Dataset::validate(const Instance& inst, std::size_t index) const {
  if (inst.features.size() != dim_) {
    throw DimensionError("instance " + std::to_string(index) + " has " +
                         std::to_string(inst.features.size()) + " features, expected " +
                         std::to_string(dim_));
  }
  for (double v : inst.features) {
    if (!std::isfinite(v)) {
      throw DimensionError("instance " + std::to_string(index) + " has a non-finite feature");
    }
  }
  if (inst.label >= n_labels_) {
    throw DimensionError("instance " + std::to_string(index) + " label " +
                         std::to_string(inst.label) + " out of range");
  }
  if (inst.group >= n_groups_) {
    throw DimensionError("instance " + std::to_string(index) + " group " +
                         std::to_string(inst.group) + " out of range");
  }
}

void Dataset::push_back(Instance inst) {
  validate(inst, instances_.size());
  instances_.push_back(std::move(inst));
}

std::vector<std::size_t> Dataset::group_counts() const {
  std::vector<std::size_t> counts(n_groups_, 0);
  for (const auto& inst : instances_) ++counts[inst.group];
  return counts;
}

Dataset Dataset::empty_like() const {
  Dataset out;
  out.dim_ = dim_;
  out.n_labels_ = n_labels_;
  out.n_groups_ = n_groups_;
  out.name_ = name_;
  return out;
}

// --- synthetic data ---------------------------------------------------------

void SynthConfig::validate() const {
  if (dim == 0) throw ConfigError("dim must be positive");
  if (group_prevalence.empty()) throw ConfigError("group_prevalence is empty");
  double sum = 0.0;
  for (double p : group_prevalence) {
    if (!(p > 0.0 && p <= 1.0)) {
      throw ConfigError("group_prevalence entries must lie in (0, 1]");
    }
    sum += p;
  }
  if (std::abs(sum - 1.0) > 1e-9) throw ConfigError("group_prevalence must sum to 1");
  if (n < group_prevalence.size()) throw ConfigError("n must be at least the number of groups");
  if (!(class_separation >= 0.0) || !std::isfinite(class_separation)) {
    throw ConfigError("class_separation must be finite and >= 0");
  }
  if (!(noise_sd > 0.0) || !std::isfinite(noise_sd)) {
    throw ConfigError("noise_sd must be finite and > 0");
  }
}

std::vector<double> group_mean(const SynthConfig& cfg, std::size_t g) {
  std::vector<double> mean(cfg.dim, 0.0);
  const double centre = (static_cast<double>(cfg.group_prevalence.size()) - 1.0) / 2.0;
  mean[0] = (static_cast<double>(g) - centre) * cfg.class_separation;
  return mean;
}

Dataset generate_synthetic(const SynthConfig& cfg) {
  cfg.validate();
  const std::size_t k = cfg.group_prevalence.size();
  std::vector<double> cumulative(k);
  std::partial_sum(cfg.group_prevalence.begin(), cfg.group_prevalence.end(),
                   cumulative.begin());

  std::vector<std::vector<double>> means;
  for (std::size_t g = 0; g < k; ++g) means.push_back(group_mean(cfg, g));

  std::vector<Instance> out(cfg.n);
  for (std::size_t i = 0; i < cfg.n; ++i) {
    Rng rng(derive_seed(cfg.seed, i));
    const double u = rng.uniform01() * cumulative.back();
    const auto it = std::upper_bound(cumulative.begin(), cumulative.end(), u);
    const auto g = std::min<std::size_t>(static_cast<std::size_t>(it - cumulative.begin()), k - 1);

    Instance& inst = out[i];
    inst.features.resize(cfg.dim);
    for (std::size_t j = 0; j < cfg.dim; ++j) {
      inst.features[j] = means[g][j] + cfg.noise_sd * rng.normal();
    }
    inst.label = g;
    inst.group = g;
    inst.synthetic = false;
  }
  return Dataset(cfg.dim, k, k, std::move(out), "synthetic");
}

// --- split -----------------------------------------------------------------

std::pair<Dataset, Dataset> split(const Dataset& ds, double train_frac, Seed seed) {
  if (!(train_frac > 0.0 && train_frac < 1.0)) {
    throw ConfigError("train_frac must lie strictly between 0 and 1");
  }
  if (ds.empty()) throw SizeError("cannot split an empty dataset");

  const std::size_t n = ds.size();
  const int saved = std::fegetround();
  std::fesetround(FE_TONEAREST);
  const auto n_train = static_cast<std::size_t>(std::nearbyint(static_cast<double>(n) * train_frac));
  std::fesetround(saved);

  std::vector<std::size_t> order(n);
  std::iota(order.begin(), order.end(), std::size_t{0});
  Rng rng(seed);
  for (std::size_t i = n; i > 1; --i) {
    std::swap(order[i - 1], order[rng.uniform_index(i)]);
  }
  std::vector<bool> in_train(n, false);
  for (std::size_t i = 0; i < n_train; ++i) in_train[order[i]] = true;

  Dataset train = ds.empty_like();
  Dataset test = ds.empty_like();
  for (std::size_t i = 0; i < n; ++i) {
    (in_train[i] ? train : test).push_back(ds[i]);
  }
  train.set_name(ds.name() + ".train");
  test.set_name(ds.name() + ".test");
  return {std::move(train), std::move(test)};
}

// --- CSV -------------------------------------------------------------------

std::string format_double(double v) {
  char buf[64];
  const auto res = std::to_chars(buf, buf + sizeof buf, v);
  return std::string(buf, res.ptr);
}

std::string to_csv(const Dataset& ds) {
  std::string out;
  for (std::size_t j = 0; j < ds.dim(); ++j) {
    out += 'f';
    out += std::to_string(j);
    out += ',';
  }
  out += "label,group,synthetic\n";
  for (const auto& inst : ds) {
    for (double v : inst.features) {
      out += format_double(v);
      out += ',';
    }
    out += std::to_string(inst.label);
    out += ',';
    out += std::to_string(inst.group);
    out += ',';
    out += inst.synthetic ? '1' : '0';
    out += '\n';
  }
  return out;
}

void write_csv(const Dataset& ds, const std::filesystem::path& path) {
  std::ofstream out(path, std::ios::binary | std::ios::trunc);
  if (!out) throw IoError("cannot open " + path.string() + " for writing");
  const std::string text = to_csv(ds);
  out.write(text.data(), static_cast<std::streamsize>(text.size()));
  if (!out) throw IoError("failed writing " + path.string());
}

namespace {

std::vector<std::string_view> split_fields(std::string_view line) {
  std::vector<std::string_view> fields;
  std::size_t start = 0;
  while (true) {
    const auto comma = line.find(',', start);
    if (comma == std::string_view::npos) {
      fields.push_back(line.substr(start));
      return fields;
    }
    fields.push_back(line.substr(start, comma - start));
    start = comma + 1;
  }
}

double parse_real(std::string_view s, std::size_t line) {
  double v = 0.0;
  const auto res = std::from_chars(s.data(), s.data() + s.size(), v);
  if (res.ec != std::errc{} || res.ptr != s.data() + s.size()) {
    throw ParseError("malformed number '" + std::string(s) + "'", line);
  }
  if (!std::isfinite(v)) throw SchemaError("non-finite feature value", line);
  return v;
}

std::size_t parse_index(std::string_view s, std::size_t line, const char* what) {
  std::size_t v = 0;
  const auto res = std::from_chars(s.data(), s.data() + s.size(), v);
  if (s.empty() || res.ec != std::errc{} || res.ptr != s.data() + s.size()) {
    throw ParseError(std::string("malformed ") + what + " '" + std::string(s) + "'", line);
  }
  return v;
}

}  // namespace

Dataset parse_csv(const std::string& text, std::size_t min_labels, std::size_t min_groups) {
  std::vector<std::string_view> lines;
  {
    std::string_view rest(text);
    while (!rest.empty()) {
      const auto nl = rest.find('\n');
      std::string_view line = rest.substr(0, nl);
      if (!line.empty() && line.back() == '\r') line.remove_suffix(1);
      lines.push_back(line);
      if (nl == std::string_view::npos) break;
      rest.remove_prefix(nl + 1);
    }
  }
  if (lines.empty()) throw SchemaError("missing header", 1);

  const auto header = split_fields(lines[0]);
  if (header.size() < 4) throw SchemaError("header needs at least one feature column", 1);
  const std::size_t dim = header.size() - 3;
  for (std::size_t j = 0; j < dim; ++j) {
    if (header[j] != "f" + std::to_string(j)) {
      throw SchemaError("expected column f" + std::to_string(j) + ", found '" +
                            std::string(header[j]) + "'",
                        1);
    }
  }
  if (header[dim] != "label" || header[dim + 1] != "group" || header[dim + 2] != "synthetic") {
    throw SchemaError("header must end with label,group,synthetic", 1);
  }

  std::vector<Instance> instances;
  std::size_t max_label = 0, max_group = 0;
  for (std::size_t i = 1; i < lines.size(); ++i) {
    const std::size_t line_no = i + 1;
    if (lines[i].empty()) {
      if (i + 1 == lines.size()) break;  // trailing newline
      throw ParseError("empty row", line_no);
    }
    const auto fields = split_fields(lines[i]);
    if (fields.size() != dim + 3) {
      throw SchemaError("expected " + std::to_string(dim + 3) + " fields, found " +
                            std::to_string(fields.size()),
                        line_no);
    }
    Instance inst;
    inst.features.reserve(dim);
    for (std::size_t j = 0; j < dim; ++j) inst.features.push_back(parse_real(fields[j], line_no));
    inst.label = parse_index(fields[dim], line_no, "label");
    inst.group = parse_index(fields[dim + 1], line_no, "group");
    const auto flag = fields[dim + 2];
    if (flag != "0" && flag != "1") {
      throw ParseError("synthetic flag must be 0 or 1", line_no);
    }
    inst.synthetic = flag == "1";
    max_label = std::max(max_label, inst.label + 1);
    max_group = std::max(max_group, inst.group + 1);
    instances.push_back(std::move(inst));
  }
  return Dataset(dim, std::max(max_label, min_labels), std::max(max_group, min_groups),
                 std::move(instances));
}

Dataset read_csv(const std::filesystem::path& path, std::size_t min_labels,
                 std::size_t min_groups) {
  std::ifstream in(path, std::ios::binary);
  if (!in) throw IoError("cannot open " + path.string());
  std::ostringstream buf;
  buf << in.rdbuf();
  Dataset ds = parse_csv(buf.str(), min_labels, min_groups);
  ds.set_name(path.stem().string());
  return ds;
}

}  // namespace samplation
