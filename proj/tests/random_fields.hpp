#ifndef BIOT_TESTS_RANDOM_FIELDS_HPP
#define BIOT_TESTS_RANDOM_FIELDS_HPP

#include <array>
#include <cmath>
#include <cstdint>
#include <random>

#include "biot/elements.hpp"

namespace testing_fields {

// Sum of three terms a sin(p x + q y + r) per component, integer
// frequencies in [-3, 3], with closed-form derivatives.
class TrigField {
 public:
  explicit TrigField(std::uint64_t seed) {
    std::mt19937_64 rng(seed);
    std::uniform_real_distribution<double> amp(-1.0, 1.0), phase(0.0, 6.283185307179586);
    std::uniform_int_distribution<int> freq(-3, 3);
    for (auto& comp : terms_)
      for (auto& t : comp) t = {amp(rng), static_cast<double>(freq(rng)), static_cast<double>(freq(rng)), phase(rng)};
  }

  biot::Vec2 value(biot::Point x) const {
    biot::Vec2 v;
    for (int c = 0; c < 2; ++c) {
      v[c] = 0.0;
      for (const auto& t : terms_[c]) v[c] += t.a * std::sin(t.p * x.x + t.q * x.y + t.r);
    }
    return v;
  }

  double divergence(biot::Point x) const {
    double d = 0.0;
    for (const auto& t : terms_[0]) d += t.a * t.p * std::cos(t.p * x.x + t.q * x.y + t.r);
    for (const auto& t : terms_[1]) d += t.a * t.q * std::cos(t.p * x.x + t.q * x.y + t.r);
    return d;
  }

 private:
  struct Term {
    double a, p, q, r;
  };
  std::array<std::array<Term, 3>, 2> terms_{};
};

}  // namespace testing_fields

#endif  // BIOT_TESTS_RANDOM_FIELDS_HPP
