#include "heartcloak/obfuscation.hpp"

#include <algorithm>
#include <cmath>
#include <string>

#include "heartcloak/error.hpp"

namespace heartcloak {

std::string_view to_string(FrequencyDistribution d) noexcept {
  return d == FrequencyDistribution::uniform ? "uniform" : "triangular";
}

FrequencyDistribution distribution_from_string(std::string_view name) {
  if (name == "uniform") return FrequencyDistribution::uniform;
  if (name == "triangular") return FrequencyDistribution::triangular;
  throw ParameterError("unknown frequency distribution: " + std::string(name));
}

FrequencySpace FrequencySpace::with_points(double low, double high, std::int64_t points,
                                           FrequencyDistribution d) {
  require(points >= 2, "frequency space needs at least two points");
  require(low < high, "frequency space needs low < high");
  return FrequencySpace{low, high, (high - low) / static_cast<double>(points - 1), d};
}

void FrequencySpace::validate() const {
  require(low_bpm > 0.0, "frequency space low bound must be positive");
  require(high_bpm > low_bpm, "frequency space needs low < high");
  require(resolution_bpm > 0.0, "frequency space resolution must be positive");
  require(size() >= 2, "frequency space needs at least two grid points");
}

std::int64_t FrequencySpace::size() const {
  if (resolution_bpm <= 0.0 || high_bpm < low_bpm) return 0;
  const double steps = (high_bpm - low_bpm) / resolution_bpm;
  return static_cast<std::int64_t>(std::floor(steps + 1e-6)) + 1;
}

double FrequencySpace::bpm(GridIndex i) const {
  return low_bpm + static_cast<double>(i.value) * resolution_bpm;
}

bool FrequencySpace::on_grid(double f) const {
  const double x = (f - low_bpm) / resolution_bpm;
  const double r = std::round(x);
  return std::abs(x - r) <= 1e-6 && r >= 0.0 && r < static_cast<double>(size());
}

GridIndex FrequencySpace::index_of(double f) const {
  if (!on_grid(f)) {
    throw ParameterError("frequency " + std::to_string(f) + " BPM is not on the grid");
  }
  return GridIndex{static_cast<std::int64_t>(std::llround((f - low_bpm) / resolution_bpm))};
}

GridIndex FrequencySpace::nearest(double f) const {
  const auto i = std::llround((f - low_bpm) / resolution_bpm);
  return GridIndex{std::clamp<std::int64_t>(i, 0, size() - 1)};
}

namespace {

double triangular_weight(std::int64_t i, std::int64_t n) {
  return static_cast<double>(std::min(i + 1, n - i));
}

double triangular_total(std::int64_t n) {
  // sum_{i<n} min(i+1, n-i)
  const std::int64_t h = n / 2;
  double total = static_cast<double>(h) * static_cast<double>(h + 1);
  if (n % 2 == 1) total += static_cast<double>(h + 1);
  return total;
}

}  // namespace

double FrequencySpace::probability(GridIndex i) const {
  const auto n = size();
  if (i.value < 0 || i.value >= n) return 0.0;
  if (distribution == FrequencyDistribution::uniform) return 1.0 / static_cast<double>(n);
  return triangular_weight(i.value, n) / triangular_total(n);
}

FrequencySampler::FrequencySampler(const FrequencySpace& space)
    : space_(space), size_(space.size()) {
  space.validate();
  if (space.distribution == FrequencyDistribution::triangular) {
    cdf_.resize(static_cast<std::size_t>(size_));
    double acc = 0.0;
    for (std::int64_t i = 0; i < size_; ++i) {
      acc += triangular_weight(i, size_);
      cdf_[static_cast<std::size_t>(i)] = acc;
    }
    for (double& c : cdf_) c /= acc;
  }
}

GridIndex FrequencySampler::operator()(Rng& rng) const {
  if (cdf_.empty()) {
    std::uniform_int_distribution<std::int64_t> pick(0, size_ - 1);
    return GridIndex{pick(rng)};
  }
  std::uniform_real_distribution<double> u(0.0, 1.0);
  const double x = u(rng);
  const auto it = std::upper_bound(cdf_.begin(), cdf_.end(), x);
  const auto idx = std::min<std::ptrdiff_t>(it - cdf_.begin(), size_ - 1);
  return GridIndex{idx};
}

std::vector<double> ObfuscationKey::frequencies_bpm() const {
  std::vector<double> out;
  out.reserve(frequencies.size());
  for (auto f : frequencies) out.push_back(space.bpm(f));
  return out;
}

ObfuscationKey gen(int p, const FrequencySpace& space, Rng& rng, const KeyGenOptions& options) {
  require(p >= 1, "number of decoys p must be >= 1");
  space.validate();
  if (options.distinct) {
    require(p <= space.size(), "more distinct decoys requested than grid points");
  }
  const FrequencySampler sample(space);
  ObfuscationKey key;
  key.space = space;
  while (key.frequencies.size() < static_cast<std::size_t>(p)) {
    const GridIndex f = sample(rng);
    if (options.distinct &&
        std::find(key.frequencies.begin(), key.frequencies.end(), f) != key.frequencies.end()) {
      continue;
    }
    key.frequencies.push_back(f);
  }
  return key;
}

ObfuscationKey gen(int p, const FrequencySpace& space, std::uint64_t seed,
                   const KeyGenOptions& options) {
  Rng rng(seed);
  ObfuscationKey key = gen(p, space, rng, options);
  key.seed = seed;
  return key;
}

FrequencyMultiset::FrequencyMultiset(std::vector<GridIndex> values) : values_(std::move(values)) {
  std::sort(values_.begin(), values_.end());
}

void FrequencyMultiset::insert(GridIndex v) {
  values_.insert(std::upper_bound(values_.begin(), values_.end(), v), v);
}

std::size_t FrequencyMultiset::count(GridIndex v) const {
  const auto [lo, hi] = std::equal_range(values_.begin(), values_.end(), v);
  return static_cast<std::size_t>(hi - lo);
}

bool FrequencyMultiset::has_duplicates() const {
  return std::adjacent_find(values_.begin(), values_.end()) != values_.end();
}

bool FrequencyMultiset::contains(const FrequencyMultiset& sub) const {
  return std::includes(values_.begin(), values_.end(), sub.values_.begin(), sub.values_.end());
}

FrequencyMultiset FrequencyMultiset::minus(const FrequencyMultiset& sub) const {
  require(contains(sub), "multiset difference requires a sub-multiset");
  std::vector<GridIndex> out;
  std::set_difference(values_.begin(), values_.end(), sub.values_.begin(), sub.values_.end(),
                      std::back_inserter(out));
  return FrequencyMultiset(std::move(out));
}

FrequencyMultiset as_multiset(const ObfuscationKey& key) {
  return FrequencyMultiset(key.frequencies);
}

FrequencyMultiset enc_model(const ObfuscationKey& key, GridIndex message) {
  require(key.p() >= 1, "key must contain at least one decoy");
  require(message.value >= 0 && message.value < key.space.size(),
          "message frequency outside the key's space");
  FrequencyMultiset c = as_multiset(key);
  c.insert(message);
  return c;
}

FrequencyMultiset enc_model(const ObfuscationKey& key, double message_bpm) {
  return enc_model(key, key.space.index_of(message_bpm));
}

GridIndex dec(const ObfuscationKey& key, const FrequencyMultiset& ciphertext) {
  const FrequencyMultiset k = as_multiset(key);
  if (!ciphertext.contains(k)) {
    throw DecryptionError("observed frequencies do not contain every key frequency");
  }
  const FrequencyMultiset rest = ciphertext.minus(k);
  if (rest.size() != 1) {
    throw DecryptionError("expected exactly one non-key frequency, found " +
                          std::to_string(rest.size()));
  }
  return rest.values().front();
}

double collision_bound(std::int64_t p, std::int64_t grid_points) {
  require(p >= 1 && grid_points >= 1, "collision bound needs p >= 1 and N >= 1");
  return static_cast<double>(p) * static_cast<double>(p + 1) /
         (2.0 * static_cast<double>(grid_points));
}

double guess_probability(std::int64_t p) {
  require(p >= 1, "guess probability needs p >= 1");
  return 1.0 / static_cast<double>(p + 1);
}

}  // namespace heartcloak
