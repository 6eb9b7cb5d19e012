#include "subspace_descent/sampling.hpp"

#include <algorithm>
#include <cmath>
#include <numeric>
#include <stdexcept>
#include <string>

namespace subspace_descent {

std::string_view to_string(SamplerKind kind) {
  switch (kind) {
    case SamplerKind::uniform: return "uniform";
    case SamplerKind::proportional: return "proportional";
    case SamplerKind::permutation: return "permutation";
    case SamplerKind::cyclic: return "cyclic";
  }
  return "unknown";
}

SamplerKind parse_sampler_kind(std::string_view name) {
  if (name == "uniform") return SamplerKind::uniform;
  if (name == "proportional") return SamplerKind::proportional;
  if (name == "permutation" || name == "perm") return SamplerKind::permutation;
  if (name == "cyclic") return SamplerKind::cyclic;
  throw std::invalid_argument("unknown sampler kind '" + std::string(name) + "'");
}

std::uint64_t RandomStream::bounded(std::uint64_t n) {
  if (n == 0) throw std::invalid_argument("RandomStream::bounded: n must be >= 1");
  // Reject the low 2^64 mod n values so every residue is equally likely.
  const std::uint64_t threshold = (0 - n) % n;
  for (;;) {
    const std::uint64_t r = engine_();
    if (r >= threshold) return r % n;
  }
}

std::vector<double> sampling_probabilities(SamplerKind kind, std::span<const double> lipschitz) {
  const std::size_t j = lipschitz.size();
  if (j == 0) throw std::invalid_argument("sampler: need at least one subspace");
  switch (kind) {
    case SamplerKind::uniform: return std::vector<double>(j, 1.0 / static_cast<double>(j));
    case SamplerKind::proportional: {
      double total = 0.0;
      for (double l : lipschitz) {
        if (!(l >= 0.0) || !std::isfinite(l))
          throw std::invalid_argument("sampler: Lipschitz constants must be nonnegative and finite");
        total += l;
      }
      if (!(total > 0.0)) throw std::invalid_argument("sampler: all Lipschitz constants are zero");
      std::vector<double> p(j);
      for (std::size_t i = 0; i < j; ++i) p[i] = lipschitz[i] / total;
      return p;
    }
    case SamplerKind::permutation:
    case SamplerKind::cyclic: return {};
  }
  return {};
}

Sampler::Sampler(SamplerKind kind, std::span<const double> lipschitz, std::uint64_t seed)
    : kind_(kind), size_(lipschitz.size()), seed_(seed), rng_(seed),
      probabilities_(sampling_probabilities(kind, lipschitz)) {
  if (kind_ == SamplerKind::proportional) {
    cumulative_.resize(size_);
    std::partial_sum(probabilities_.begin(), probabilities_.end(), cumulative_.begin());
    cumulative_.back() = 1.0;
  }
  if (kind_ == SamplerKind::permutation || kind_ == SamplerKind::cyclic) {
    order_.resize(size_);
    std::iota(order_.begin(), order_.end(), std::size_t{0});
  }
}

void Sampler::reshuffle() {
  std::iota(order_.begin(), order_.end(), std::size_t{0});
  for (std::size_t i = size_ - 1; i > 0; --i) {
    const auto k = static_cast<std::size_t>(rng_.bounded(i + 1));
    std::swap(order_[i], order_[k]);
  }
}

std::size_t Sampler::next() {
  ++draws_;
  switch (kind_) {
    case SamplerKind::uniform: return static_cast<std::size_t>(rng_.bounded(size_));
    case SamplerKind::proportional: {
      const double u = rng_.uniform01();
      // First i with cumulative[i] >= u: ties go to the lower index.
      const auto it = std::lower_bound(cumulative_.begin(), cumulative_.end(), u);
      return static_cast<std::size_t>(it - cumulative_.begin());
    }
    case SamplerKind::permutation: {
      if (cursor_ == 0) reshuffle();
      const std::size_t i = order_[cursor_];
      cursor_ = (cursor_ + 1) % size_;
      return i;
    }
    case SamplerKind::cyclic: {
      const std::size_t i = order_[cursor_];
      cursor_ = (cursor_ + 1) % size_;
      return i;
    }
  }
  return 0;
}

Sampler make_sampler(SamplerKind kind, std::span<const double> lipschitz, std::uint64_t seed) {
  return Sampler(kind, lipschitz, seed);
}

}  // namespace subspace_descent
