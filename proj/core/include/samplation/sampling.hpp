#pragma once

#include <cstddef>
#include <functional>
#include <span>
#include <utility>
#include <vector>

#include "samplation/dataset.hpp"
#include "samplation/error.hpp"
#include "samplation/rng.hpp"

namespace samplation {

struct Reserve;

/// Streaming uniform sampler (Algorithm R).
///
/// The first `capacity` items fill the reservoir. Item j (1-based, j >
/// capacity) draws alpha uniformly from {1..j} and overwrites slot alpha when
/// alpha <= capacity. Every item of a stream of length M therefore ends up in
/// the sample with probability capacity / M.
template <typename T>
class Reservoir {
 public:
  Reservoir(std::size_t capacity, Seed seed) : capacity_(capacity), rng_(seed) {
    items_.reserve(capacity);
  }

  void offer(const T& item) { offer_impl(item); }
  void offer(T&& item) { offer_impl(std::move(item)); }

  std::size_t capacity() const noexcept { return capacity_; }
  std::size_t seen() const noexcept { return seen_; }
  /// True while fewer than `capacity` items have been offered.
  bool short_stream() const noexcept { return seen_ < capacity_; }

  const std::vector<T>& items() const& noexcept { return items_; }
  std::vector<T> take() && { return std::move(items_); }

 private:
  template <typename U>
  void offer_impl(U&& item) {
    ++seen_;
    if (capacity_ == 0) return;
    if (items_.size() < capacity_) {
      items_.push_back(std::forward<U>(item));
      return;
    }
    const auto alpha = rng_.uniform_int(1, seen_);
    if (alpha <= capacity_) items_[alpha - 1] = std::forward<U>(item);
  }

  std::size_t capacity_;
  std::size_t seen_ = 0;
  Rng rng_;
  std::vector<T> items_;
};

template <typename T>
struct ReservoirSample {
  std::vector<T> items;
  /// The stream ended before the reservoir filled; `items` holds all of it.
  bool short_stream = false;
};

/// Single-pass reservoir sample of `n` items from a range.
template <typename Range>
auto reservoir_sample(const Range& stream, std::size_t n, Seed seed) {
  using T = std::decay_t<decltype(*std::begin(stream))>;
  Reservoir<T> reservoir(n, seed);
  for (const auto& item : stream) reservoir.offer(item);
  const bool is_short = reservoir.short_stream();
  return ReservoirSample<T>{std::move(reservoir).take(), is_short};
}

/// Uniform n-subset of ds without replacement (partial Fisher-Yates). The
/// output is in draw order.
Dataset srs_without_replacement(const Dataset& ds, std::size_t n, Seed seed);

/// Integer split of `tau` across groups.
struct Allocation {
  std::vector<std::size_t> counts;
  std::size_t tau = 0;

  friend bool operator==(const Allocation&, const Allocation&) = default;
};

/// Rounds non-negative real quotas (summing to `total`) to integers summing
/// to `total` by the largest-remainder rule; ties go to the lower index.
std::vector<std::size_t> largest_remainder(std::span<const double> quotas,
                                           std::size_t total);

/// Reverse-bias allocation of a sample of size `tau`.
///
/// Group g receives tau * (1 - share_g) / (K - 1) before rounding, which for
/// two groups is tau times the other group's share: the more a group is
/// over-predicted, the fewer of its instances are drawn.
Allocation reverse_allocation(std::span<const double> pred_shares, std::size_t tau);

/// Draws alloc.counts[g] instances from each group's reserve (uniform, via
/// a reservoir pass) and concatenates them in group order.
///
/// `reserves` may be given in any order; each is matched by its group id.
/// Throws CapacityError naming the first group whose reserve is missing or
/// too small.
Dataset draw_from_reserves(std::span<const Reserve> reserves, const Allocation& alloc,
                           Seed seed);

}  // namespace samplation
