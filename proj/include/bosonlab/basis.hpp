#pragma once

#include <cstdint>
#include <limits>
#include <memory>
#include <span>
#include <vector>

#include "bosonlab/errors.hpp"

namespace bosonlab {

using occ_t = std::uint16_t;

// Truncated bosonic occupation basis over m modes: all (n_1,...,n_m) with
// sum n_i <= n_max, ordered by total particle number and lexicographically
// within each sector. The ordering is part of the file format and never
// changes (basis order tag 1).
class OccupationBasis {
 public:
  static constexpr std::size_t kDefaultStateLimit = 5'000'000;
  static constexpr std::uint32_t kOrderTag = 1;

  OccupationBasis(int modes, int n_max,
                  std::size_t state_limit = kDefaultStateLimit)
      : modes_(modes), n_max_(n_max) {
    if (modes < 1) throw validation_error("OccupationBasis: modes must be >= 1");
    if (n_max < 0) throw validation_error("OccupationBasis: n_max must be >= 0");
    const std::size_t dim = dimension(modes, n_max);
    if (dim > state_limit)
      throw capacity_error("OccupationBasis: " + std::to_string(dim) +
                           " states exceed the limit of " +
                           std::to_string(state_limit));
    binom_ = binomial_table(modes + n_max + 1);
    sector_offset_.resize(n_max + 2, 0);
    for (int n = 0; n <= n_max; ++n)
      sector_offset_[n + 1] = sector_offset_[n] + sector_states(modes, n);
    occ_.reserve(dim * modes);
    std::vector<occ_t> state(modes, 0);
    for (int n = 0; n <= n_max; ++n) emit_sector(state, 0, n);
  }

  int modes() const { return modes_; }
  int n_max() const { return n_max_; }
  std::size_t size() const { return sector_offset_.back(); }

  std::span<const occ_t> occupation(std::size_t rank) const {
    return {occ_.data() + rank * modes_, static_cast<std::size_t>(modes_)};
  }

  std::size_t sector_offset(int n) const { return sector_offset_[n]; }
  std::size_t sector_size(int n) const {
    return sector_offset_[n + 1] - sector_offset_[n];
  }

  int sector_of(std::size_t rank) const {
    int lo = 0, hi = n_max_;
    while (lo < hi) {
      const int mid = (lo + hi) / 2;
      if (rank < sector_offset_[mid + 1]) hi = mid; else lo = mid + 1;
    }
    return lo;
  }

  // Exact inverse of occupation(): graded rank by combinatorial counting.
  std::size_t index(std::span<const occ_t> occ) const {
    int n = 0;
    for (occ_t v : occ) n += v;
    std::size_t r = sector_offset_[n];
    int rem = n;
    for (int i = 0; i + 1 < modes_; ++i) {
      for (int v = 0; v < occ[i]; ++v)
        r += sector_states_cached(modes_ - 1 - i, rem - v);
      rem -= occ[i];
    }
    return r;
  }

  // Number of occupation vectors of s modes with total exactly t.
  static std::size_t sector_states(int s, int t) {
    return binomial_checked(t + s - 1, s - 1);
  }

  static std::size_t dimension(int modes, int n_max) {
    // sum_{n<=n_max} C(n+m-1, m-1) = C(n_max+m, m)
    return binomial_checked(n_max + modes, modes);
  }

 private:
  void emit_sector(std::vector<occ_t>& state, int pos, int remaining) {
    if (pos == modes_ - 1) {
      state[pos] = static_cast<occ_t>(remaining);
      occ_.insert(occ_.end(), state.begin(), state.end());
      return;
    }
    for (int v = 0; v <= remaining; ++v) {
      state[pos] = static_cast<occ_t>(v);
      emit_sector(state, pos + 1, remaining - v);
    }
  }

  std::size_t sector_states_cached(int s, int t) const {
    return binom_[t + s - 1][s - 1];
  }

  static std::size_t binomial_checked(int n, int k) {
    if (k < 0 || k > n) return 0;
    k = std::min(k, n - k);
    std::size_t r = 1;
    for (int i = 1; i <= k; ++i) {
      const std::size_t num = static_cast<std::size_t>(n - k + i);
      if (r > std::numeric_limits<std::size_t>::max() / num)
        throw capacity_error("OccupationBasis: dimension overflow");
      r = r * num / i;  // divisible at every step
    }
    return r;
  }

  static std::vector<std::vector<std::size_t>> binomial_table(int n) {
    std::vector<std::vector<std::size_t>> c(n + 1);
    for (int i = 0; i <= n; ++i) {
      c[i].resize(i + 1);
      c[i][0] = c[i][i] = 1;
      for (int j = 1; j < i; ++j) c[i][j] = c[i - 1][j - 1] + c[i - 1][j];
    }
    return c;
  }

  int modes_;
  int n_max_;
  std::vector<occ_t> occ_;
  std::vector<std::size_t> sector_offset_;
  std::vector<std::vector<std::size_t>> binom_;
};

using BasisPtr = std::shared_ptr<const OccupationBasis>;

inline BasisPtr make_basis(int modes, int n_max,
                           std::size_t state_limit =
                               OccupationBasis::kDefaultStateLimit) {
  return std::make_shared<OccupationBasis>(modes, n_max, state_limit);
}

}  // namespace bosonlab
