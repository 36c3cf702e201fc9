#include "samplation/sampling.hpp"

#include <algorithm>
#include <cmath>
#include <numeric>

#include "samplation/generation.hpp"

namespace samplation {

Dataset srs_without_replacement(const Dataset& ds, std::size_t n, Seed seed) {
  if (n > ds.size()) {
    throw SizeError("cannot draw " + std::to_string(n) + " instances from a dataset of " +
                    std::to_string(ds.size()));
  }
  std::vector<std::size_t> idx(ds.size());
  std::iota(idx.begin(), idx.end(), std::size_t{0});
  Rng rng(seed);
  Dataset out = ds.empty_like();
  for (std::size_t i = 0; i < n; ++i) {
    const auto j = i + rng.uniform_index(idx.size() - i);
    std::swap(idx[i], idx[j]);
    out.push_back(ds[idx[i]]);
  }
  return out;
}

namespace {
// Quotas come from products of decimal shares; remainders closer than this
// are treated as tied.
constexpr double kRemainderTol = 1e-9;
}  // namespace

std::vector<std::size_t> largest_remainder(std::span<const double> quotas, std::size_t total) {
  const std::size_t k = quotas.size();
  if (k == 0) {
    if (total != 0) throw ConfigError("cannot allocate a positive total over zero groups");
    return {};
  }
  std::vector<std::size_t> counts(k, 0);
  std::vector<double> remainder(k, 0.0);
  std::size_t assigned = 0;
  for (std::size_t g = 0; g < k; ++g) {
    const double q = std::max(0.0, quotas[g]);
    const double base = std::floor(q + kRemainderTol);
    counts[g] = static_cast<std::size_t>(base);
    remainder[g] = std::max(0.0, q - base);
    assigned += counts[g];
  }

  std::vector<std::size_t> order(k);
  std::iota(order.begin(), order.end(), std::size_t{0});
  std::stable_sort(order.begin(), order.end(), [&](std::size_t a, std::size_t b) {
    if (std::abs(remainder[a] - remainder[b]) <= kRemainderTol) return false;
    return remainder[a] > remainder[b];
  });

  for (std::size_t i = 0; assigned < total; i = (i + 1) % k) {
    ++counts[order[i]];
    ++assigned;
  }
  // Rounding noise can only overshoot by a unit or so; take it back from the
  // smallest remainders.
  while (assigned > total) {
    for (auto it = order.rbegin(); it != order.rend() && assigned > total; ++it) {
      if (counts[*it] > 0) {
        --counts[*it];
        --assigned;
      }
    }
  }
  return counts;
}

Allocation reverse_allocation(std::span<const double> pred_shares, std::size_t tau) {
  const std::size_t k = pred_shares.size();
  if (k < 2) throw ConfigError("reverse allocation needs at least two groups");
  double sum = 0.0;
  for (double s : pred_shares) {
    if (!std::isfinite(s) || s < 0.0) {
      throw ConfigError("prediction shares must be finite and non-negative");
    }
    sum += s;
  }
  if (!(sum > 0.0)) throw ConfigError("prediction shares sum to zero");

  std::vector<double> quotas(k);
  const double denom = static_cast<double>(k - 1);
  for (std::size_t g = 0; g < k; ++g) {
    const double share = pred_shares[g] / sum;
    quotas[g] = static_cast<double>(tau) * (1.0 - share) / denom;
  }
  return Allocation{largest_remainder(quotas, tau), tau};
}

Dataset draw_from_reserves(std::span<const Reserve> reserves, const Allocation& alloc,
                           Seed seed) {
  const Reserve* schema = reserves.empty() ? nullptr : &reserves.front();
  std::vector<const Reserve*> by_group(alloc.counts.size(), nullptr);
  for (const auto& r : reserves) {
    if (r.group < by_group.size()) by_group[r.group] = &r;
  }

  for (std::size_t g = 0; g < alloc.counts.size(); ++g) {
    if (alloc.counts[g] == 0) continue;
    if (by_group[g] == nullptr) {
      throw CapacityError("allocation requests " + std::to_string(alloc.counts[g]) +
                              " instances from group " + std::to_string(g) +
                              " which has no reserve",
                          g);
    }
    if (alloc.counts[g] > by_group[g]->instances.size()) {
      throw CapacityError("allocation requests " + std::to_string(alloc.counts[g]) +
                              " instances from group " + std::to_string(g) +
                              " but its reserve holds " +
                              std::to_string(by_group[g]->instances.size()),
                          g);
    }
  }

  if (schema == nullptr) return Dataset{};
  Dataset out = schema->instances.empty_like();
  out.set_name("fine-tuning sample");
  for (std::size_t g = 0; g < alloc.counts.size(); ++g) {
    if (alloc.counts[g] == 0) continue;
    auto drawn = reservoir_sample(by_group[g]->instances.instances(), alloc.counts[g],
                                  derive_seed(seed, g));
    for (auto& inst : drawn.items) out.push_back(std::move(inst));
  }
  return out;
}

}  // namespace samplation
