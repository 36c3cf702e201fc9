#include "samplation/generation.hpp"

#include <algorithm>
#include <utility>

#include "samplation/error.hpp"

namespace samplation {

namespace {

double squared_distance(std::span<const double> a, std::span<const double> b) {
  double acc = 0.0;
  for (std::size_t j = 0; j < a.size(); ++j) {
    const double diff = a[j] - b[j];
    acc += diff * diff;
  }
  return acc;
}

}  // namespace

std::vector<std::size_t> knn(std::span<const std::vector<double>> points, std::size_t query,
                             std::size_t k) {
  if (query >= points.size()) throw SizeError("query index out of range");
  if (k == 0) throw SizeError("k must be at least 1");
  if (k >= points.size()) {
    throw SizeError("k = " + std::to_string(k) + " needs at least " + std::to_string(k + 1) +
                    " points, have " + std::to_string(points.size()));
  }
  std::vector<std::pair<double, std::size_t>> dist;
  dist.reserve(points.size() - 1);
  for (std::size_t i = 0; i < points.size(); ++i) {
    if (i == query) continue;
    if (points[i].size() != points[query].size()) {
      throw DimensionError("points have mismatched dimensions");
    }
    dist.emplace_back(squared_distance(points[query], points[i]), i);
  }
  std::partial_sort(dist.begin(), dist.begin() + static_cast<std::ptrdiff_t>(k), dist.end());
  std::vector<std::size_t> out(k);
  for (std::size_t i = 0; i < k; ++i) out[i] = dist[i].second;
  return out;
}

SmoteOutput smote_generate_traced(std::span<const Instance> pool, std::size_t count,
                                  std::size_t k, Seed seed) {
  const std::size_t group = pool.empty() ? 0 : pool.front().group;
  if (pool.size() < 2) {
    throw GenerationError("group " + std::to_string(group) + " has " +
                              std::to_string(pool.size()) +
                              " real instance(s); at least 2 are needed to interpolate",
                          group);
  }
  for (const auto& inst : pool) {
    if (inst.group != group) {
      throw GenerationError("SMOTE pool mixes groups " + std::to_string(group) + " and " +
                                std::to_string(inst.group),
                            group);
    }
  }
  if (k == 0 || k > pool.size() - 1) {
    throw SizeError("k = " + std::to_string(k) + " is invalid for a pool of " +
                    std::to_string(pool.size()));
  }

  SmoteOutput out;
  if (count == 0) return out;

  std::vector<std::vector<double>> points;
  points.reserve(pool.size());
  for (const auto& inst : pool) points.push_back(inst.features);

  std::vector<std::vector<std::size_t>> neighbours(pool.size());
  out.instances.reserve(count);
  out.trace.reserve(count);
  for (std::size_t i = 0; i < count; ++i) {
    Rng rng(derive_seed(seed, i));
    const auto base = static_cast<std::size_t>(rng.uniform_index(pool.size()));
    if (neighbours[base].empty()) neighbours[base] = knn(points, base, k);
    const auto neighbour = neighbours[base][rng.uniform_index(k)];
    const double lambda = rng.uniform_closed01();

    const auto& xb = pool[base].features;
    const auto& xn = pool[neighbour].features;
    Instance inst;
    inst.features.resize(xb.size());
    for (std::size_t j = 0; j < xb.size(); ++j) {
      inst.features[j] = xb[j] + lambda * (xn[j] - xb[j]);
    }
    inst.label = pool[base].label;
    inst.group = pool[base].group;
    inst.synthetic = true;
    out.instances.push_back(std::move(inst));
    out.trace.push_back({base, neighbour, lambda});
  }
  return out;
}

std::vector<Instance> smote_generate(std::span<const Instance> pool, std::size_t count,
                                     std::size_t k, Seed seed) {
  return smote_generate_traced(pool, count, k, seed).instances;
}

std::vector<Reserve> build_reserves(const Dataset& train, std::size_t reserve_size,
                                    std::size_t k, Seed seed) {
  if (k == 0) throw ConfigError("k must be at least 1");
  std::vector<std::vector<Instance>> pools(train.n_groups());
  for (const auto& inst : train) pools[inst.group].push_back(inst);

  for (std::size_t g = 0; g < pools.size(); ++g) {
    if (pools[g].size() == 1) {
      throw GenerationError("group " + std::to_string(g) +
                                " has 1 real instance; at least 2 are needed to build a reserve",
                            g);
    }
  }

  std::vector<Reserve> reserves;
  for (std::size_t g = 0; g < pools.size(); ++g) {
    if (pools[g].empty()) continue;
    Reserve r;
    r.group = g;
    r.base_count = pools[g].size();
    r.k = std::min(k, pools[g].size() - 1);
    r.seed = derive_seed(seed, g);
    r.instances = Dataset(train.dim(), train.n_labels(), train.n_groups(),
                          smote_generate(pools[g], reserve_size, r.k, r.seed),
                          "reserve-" + std::to_string(g));
    reserves.push_back(std::move(r));
  }
  return reserves;
}

}  // namespace samplation
