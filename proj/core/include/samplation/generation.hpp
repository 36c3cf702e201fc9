#pragma once

#include <cstddef>
#include <span>
#include <vector>

#include "samplation/dataset.hpp"
#include "samplation/rng.hpp"

namespace samplation {

/// Pool of synthetic instances for one value of the discriminant variable.
struct Reserve {
  std::size_t group = 0;
  Dataset instances;
  std::size_t base_count = 0;  // real instances the pool was grown from
  std::size_t k = 0;           // neighbours actually used
  Seed seed = 0;
};

/// Indices of the `k` nearest points to `points[query]` by Euclidean
/// distance, nearest first, excluding the query. Equal distances resolve to
/// the lower index. Throws SizeError when k >= points.size().
std::vector<std::size_t> knn(std::span<const std::vector<double>> points,
                             std::size_t query, std::size_t k);

/// Provenance of one interpolated point: indices into the pool and the mixing
/// weight.
struct SmoteTrace {
  std::size_t base = 0;
  std::size_t neighbor = 0;
  double lambda = 0.0;
};

struct SmoteOutput {
  std::vector<Instance> instances;
  std::vector<SmoteTrace> trace;
};

/// SMOTE interpolation within one group's pool.
///
/// Each point picks a uniform base, a uniform neighbour among the base's k
/// nearest, and lambda uniform on [0, 1]; the point is base + lambda *
/// (neighbor - base) with the base's label. Point i draws from its own
/// stream derived from `seed`.
SmoteOutput smote_generate_traced(std::span<const Instance> pool, std::size_t count,
                                  std::size_t k, Seed seed);

std::vector<Instance> smote_generate(std::span<const Instance> pool, std::size_t count,
                                     std::size_t k, Seed seed);

/// One reserve of `reserve_size` synthetic instances per group observed in
/// `train`, each grown only from that group's real instances.
///
/// `k` is capped at (group size - 1). Groups are processed independently with
/// seeds derived from `seed` and the group id. Throws GenerationError for the
/// first group with fewer than two real instances; no reserves are returned
/// in that case.
std::vector<Reserve> build_reserves(const Dataset& train, std::size_t reserve_size,
                                    std::size_t k, Seed seed);

}  // namespace samplation
