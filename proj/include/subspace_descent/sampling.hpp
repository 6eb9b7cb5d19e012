#pragma once

#include <cstddef>
#include <cstdint>
#include <random>
#include <span>
#include <string_view>
#include <vector>

namespace subspace_descent {

enum class SamplerKind { uniform, proportional, permutation, cyclic };

std::string_view to_string(SamplerKind kind);
/// Accepts "uniform", "proportional", "permutation"/"perm", "cyclic".
SamplerKind parse_sampler_kind(std::string_view name);

/// Seeded 64-bit stream: std::mt19937_64 with distribution mappings defined
/// here, since the standard library's distributions are implementation-defined.
class RandomStream {
 public:
  explicit RandomStream(std::uint64_t seed) : engine_(seed) {}

  std::uint64_t next_u64() { return engine_(); }
  /// Unbiased integer in [0, n) by rejection; n >= 1.
  std::uint64_t bounded(std::uint64_t n);
  /// Double in [0, 1) from the top 53 bits.
  double uniform01() { return static_cast<double>(engine_() >> 11) * 0x1.0p-53; }

 private:
  std::mt19937_64 engine_;
};

/// Subspace index selection. Indices are 0-based; the stream is a pure
/// function of (kind, lipschitz, seed).
class Sampler {
 public:
  Sampler(SamplerKind kind, std::span<const double> lipschitz, std::uint64_t seed);

  std::size_t next();

  SamplerKind kind() const { return kind_; }
  std::size_t size() const { return size_; }
  std::uint64_t seed() const { return seed_; }
  std::uint64_t draw_count() const { return draws_; }
  /// Selection probabilities (uniform and proportional kinds only).
  const std::vector<double>& probabilities() const { return probabilities_; }
  /// Visiting order of the current epoch (permutation and cyclic kinds only).
  const std::vector<std::size_t>& current_order() const { return order_; }
  std::size_t cursor() const { return cursor_; }

 private:
  void reshuffle();

  SamplerKind kind_;
  std::size_t size_;
  std::uint64_t seed_;
  RandomStream rng_;
  std::vector<double> probabilities_;
  std::vector<double> cumulative_;
  std::vector<std::size_t> order_;
  std::size_t cursor_ = 0;
  std::uint64_t draws_ = 0;
};

/// p_i = L_{A,i} / sum_j L_{A,j} for proportional, 1/J for uniform.
Sampler make_sampler(SamplerKind kind, std::span<const double> lipschitz, std::uint64_t seed);

/// The probabilities a sampler of this kind would use (empty for order-based kinds).
std::vector<double> sampling_probabilities(SamplerKind kind, std::span<const double> lipschitz);

}  // namespace subspace_descent
