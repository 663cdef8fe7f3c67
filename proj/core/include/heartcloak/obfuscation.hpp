#pragma once

#include <compare>
#include <cstddef>
#include <cstdint>
#include <span>
#include <string_view>
#include <vector>

#include "heartcloak/random.hpp"

namespace heartcloak {

/// Index of a point on a FrequencySpace grid. Equality of frequencies is
/// decided on indices, never on floating-point BPM values.
struct GridIndex {
  std::int64_t value{0};
  auto operator<=>(const GridIndex&) const = default;
};

enum class FrequencyDistribution { uniform, triangular };

std::string_view to_string(FrequencyDistribution d) noexcept;
FrequencyDistribution distribution_from_string(std::string_view name);

/// Discrete frequency space: low, low + res, ..., up to high.
struct FrequencySpace {
  double low_bpm{45.0};
  double high_bpm{180.0};
  double resolution_bpm{0.002};
  FrequencyDistribution distribution{FrequencyDistribution::uniform};

  /// Space with exactly `points` grid points spanning [low, high].
  static FrequencySpace with_points(double low, double high, std::int64_t points,
                                    FrequencyDistribution d = FrequencyDistribution::uniform);

  void validate() const;
  std::int64_t size() const;
  double bpm(GridIndex i) const;
  bool on_grid(double bpm) const;
  GridIndex index_of(double bpm) const;  // ParameterError when off-grid
  GridIndex nearest(double bpm) const;   // clamps into the space
  double probability(GridIndex i) const;

  bool operator==(const FrequencySpace&) const = default;
};

/// Draws grid points from the space's distribution.
class FrequencySampler {
 public:
  explicit FrequencySampler(const FrequencySpace& space);
  GridIndex operator()(Rng& rng) const;

 private:
  FrequencySpace space_;
  std::int64_t size_;
  std::vector<double> cdf_;  // empty for uniform
};

struct ObfuscationKey {
  std::vector<GridIndex> frequencies;
  FrequencySpace space;
  std::uint64_t seed{0};

  std::size_t p() const noexcept { return frequencies.size(); }
  std::vector<double> frequencies_bpm() const;
  bool operator==(const ObfuscationKey&) const = default;
};

struct KeyGenOptions {
  /// Reject intra-key duplicates. Off by default: the collision analysis
  /// assumes independent draws.
  bool distinct{false};
};

ObfuscationKey gen(int p, const FrequencySpace& space, std::uint64_t seed,
                   const KeyGenOptions& options = {});
ObfuscationKey gen(int p, const FrequencySpace& space, Rng& rng,
                   const KeyGenOptions& options = {});

/// Sorted multiset of grid frequencies.
class FrequencyMultiset {
 public:
  FrequencyMultiset() = default;
  explicit FrequencyMultiset(std::vector<GridIndex> values);

  void insert(GridIndex v);
  std::size_t size() const noexcept { return values_.size(); }
  std::size_t count(GridIndex v) const;
  const std::vector<GridIndex>& values() const noexcept { return values_; }
  bool has_duplicates() const;
  bool contains(const FrequencyMultiset& sub) const;
  FrequencyMultiset minus(const FrequencyMultiset& sub) const;  // requires contains(sub)

  bool operator==(const FrequencyMultiset&) const = default;

 private:
  std::vector<GridIndex> values_;
};

FrequencyMultiset as_multiset(const ObfuscationKey& key);

/// Abstract ciphertext {m} ∪ k. The physical counterpart is superimpose().
FrequencyMultiset enc_model(const ObfuscationKey& key, GridIndex message);
FrequencyMultiset enc_model(const ObfuscationKey& key, double message_bpm);

/// Multiset difference c \ k; throws DecryptionError unless exactly one
/// element remains.
GridIndex dec(const ObfuscationKey& key, const FrequencyMultiset& ciphertext);

/// Union bound on the probability that any two of the p+1 draws coincide.
double collision_bound(std::int64_t p, std::int64_t grid_points);

/// Success probability of a uniform guess among p+1 candidates.
double guess_probability(std::int64_t p);

}  // namespace heartcloak
