#pragma once

#include "rocbench/cases.hpp"
#include "rocbench/random.hpp"
#include "rocbench/roc.hpp"

#include <initializer_list>
#include <vector>

namespace rocbench::test {

inline CaseRecord record(const std::string& maker, int y, int y_hat, std::initializer_list<double> f = {}) {
  CaseRecord c;
  c.maker_id = maker;
  c.y = y;
  c.y_hat = y_hat;
  if (f.size() > 0) {
    c.features.resize(static_cast<Eigen::Index>(f.size()));
    Eigen::Index k = 0;
    for (double v : f) c.features[k++] = v;
  }
  return c;
}

/// Random cases spread over `makers` makers with one feature each.
inline std::vector<CaseRecord> random_cases(std::size_t n, int makers, std::uint64_t seed) {
  Rng rng(seed);
  std::vector<CaseRecord> out;
  for (std::size_t i = 0; i < n; ++i) {
    const int m = int(uniform01(rng) * makers);
    const double x = uniform01(rng);
    out.push_back(record("m" + std::to_string(m), uniform01(rng) < x ? 1 : 0, uniform01(rng) < 0.4 ? 1 : 0, {x}));
  }
  return out;
}

inline RocCurve curve(std::initializer_list<RatePair> knots) {
  std::vector<RatePair> v(knots);
  return RocCurve::from_rates(v);
}

/// Concave curve through (0,0) and (1,1) with random knots.
inline RocCurve random_concave(Rng& rng, int segments) {
  std::vector<double> widths(segments), slopes(segments);
  for (auto& w : widths) w = 0.05 + uniform01(rng);
  for (auto& s : slopes) s = 0.05 + 4 * uniform01(rng);
  std::sort(slopes.begin(), slopes.end(), std::greater<>());
  double wsum = 0, rise = 0;
  for (double w : widths) wsum += w;
  for (int i = 0; i < segments; ++i) rise += slopes[i] * widths[i] / wsum;
  std::vector<RatePair> knots{{0, 0}};
  for (int i = 0; i < segments; ++i) {
    const auto last = knots.back();
    knots.push_back({last.alpha + widths[i] / wsum, last.beta + slopes[i] * widths[i] / wsum / rise});
  }
  knots.back() = {1, 1};
  return RocCurve::from_rates(knots);
}

}  // namespace rocbench::test
