#pragma once

#include <algorithm>
#include <cstdint>
#include <cmath>
#include <vector>

#include <Eigen/Core>

namespace projwass {

// Splittable counter-based generator. A stream is (key, counter); the t-th
// output is finalizer(key + t*gamma) with the splitmix64 finalizer, so draws
// are a pure function of (key, t). fold(tag) derives the key of an
// independent child stream from (key, tag) only, never from the counter, so
// worker streams do not depend on how much the parent has consumed.
class Rng {
 public:
  explicit Rng(std::uint64_t seed) : key_(finalize(seed ^ 0x5bf0f0e3a77d672bULL)) {}

  [[nodiscard]] Rng fold(std::uint64_t tag) const {
    Rng child(from_key{}, finalize(key_ ^ finalize(tag * 0x9e3779b97f4a7c15ULL + 0x7b1fa3d9ce12c25dULL)));
    return child;
  }

  std::uint64_t next_u64() {
    counter_ += 0x9e3779b97f4a7c15ULL;
    return finalize(key_ + counter_);
  }

  // uniform on [0,1)
  double next_unit() { return static_cast<double>(next_u64() >> 11) * 0x1.0p-53; }

  // uniform on (0,1]
  double next_unit_pos() { return static_cast<double>((next_u64() >> 11) + 1) * 0x1.0p-53; }

  // standard normal via Box-Muller; the second value of each pair is cached
  double next_normal() {
    if (have_spare_) {
      have_spare_ = false;
      return spare_;
    }
    const double radius = std::sqrt(-2.0 * std::log(next_unit_pos()));
    const double angle = 6.283185307179586476925286766559 * next_unit();
    spare_ = radius * std::sin(angle);
    have_spare_ = true;
    return radius * std::cos(angle);
  }

  void fill_normal(Eigen::Ref<Eigen::VectorXd> out) {
    for (Eigen::Index i = 0; i < out.size(); ++i) out[i] = next_normal();
  }

  // unit-rate exponential
  double next_exponential() { return -std::log(next_unit_pos()); }

  // index draw from the distribution with the given cumulative weights
  // (nondecreasing, last entry = total mass > 0)
  std::size_t categorical(const std::vector<double>& cumulative) {
    const double total = cumulative.back();
    const double u = next_unit() * total;
    const auto it = std::upper_bound(cumulative.begin(), cumulative.end(), u);
    const std::size_t idx = static_cast<std::size_t>(it - cumulative.begin());
    return std::min(idx, cumulative.size() - 1);
  }

 private:
  struct from_key {};
  Rng(from_key, std::uint64_t key) : key_(key) {}

  static std::uint64_t finalize(std::uint64_t z) {
    z ^= z >> 30;
    z *= 0xbf58476d1ce4e5b9ULL;
    z ^= z >> 27;
    z *= 0x94d049bb133111ebULL;
    z ^= z >> 31;
    return z;
  }

  std::uint64_t key_ = 0;
  std::uint64_t counter_ = 0;
  double spare_ = 0.0;
  bool have_spare_ = false;
};

}  // namespace projwass
