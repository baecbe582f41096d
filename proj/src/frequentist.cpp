#include "rocbench/frequentist.hpp"

#include "rocbench/csv.hpp"
#include "rocbench/random.hpp"

#include <Eigen/Cholesky>
#include <Eigen/LU>
#include <boost/math/distributions/normal.hpp>

#include <algorithm>
#include <cmath>
#include <fstream>
#include <numbers>
#include <ostream>

namespace rocbench {

Eigen::Matrix2d asymptotic_covariance(const ConfusionCounts& counts) {
  const RatePair theta = rate_pair(counts);
  const double p = double(counts.positives()) / double(counts.total());
  Eigen::Matrix2d cov = Eigen::Matrix2d::Zero();
  cov(0, 0) = theta.alpha * (1.0 - theta.alpha) / (1.0 - p);
  cov(1, 1) = theta.beta * (1.0 - theta.beta) / p;
  return cov;
}

BootstrapResult bootstrap_pairs(std::span<const CaseRecord> cases, int B, std::uint64_t seed) {
  if (B < 1) throw std::invalid_argument("bootstrap: B must be at least 1");
  rate_pair(confusion_counts(cases));  // the sample itself must be nondegenerate
  Rng rng(seed);
  std::uniform_int_distribution<std::size_t> pick(0, cases.size() - 1);
  BootstrapResult result;
  result.pairs.reserve(static_cast<std::size_t>(B));
  while (static_cast<int>(result.pairs.size()) < B) {
    ConfusionCounts counts;
    for (std::size_t i = 0; i < cases.size(); ++i) {
      const auto& c = cases[pick(rng)];
      counts.add(c.y, c.y_hat);
    }
    if (counts.positives() == 0 || counts.negatives() == 0) {
      if (++result.redraws > B) {
        throw DegenerateError("bootstrap: more than half of the resamples lack a class");
      }
      continue;
    }
    result.pairs.push_back(rate_pair(counts));
  }
  return result;
}

Eigen::Matrix2d pair_covariance(std::span<const RatePair> pairs, const RatePair& center) {
  Eigen::Matrix2d cov = Eigen::Matrix2d::Zero();
  for (const auto& p : pairs) {
    const Eigen::Vector2d d(p.alpha - center.alpha, p.beta - center.beta);
    cov.noalias() += d * d.transpose();
  }
  const double denom = pairs.size() > 1 ? double(pairs.size() - 1) : 1.0;
  return cov / denom;
}

double chi2_2_quantile(double level) {
  if (!(level > 0.0 && level < 1.0)) throw std::invalid_argument("level must lie in (0,1)");
  return -2.0 * std::log1p(-level);
}

Eigen::Matrix2d EllipseSet::floored_cov() const {
  Eigen::Matrix2d c = cov;
  c(0, 0) = std::max(c(0, 0), kVarianceFloor);
  c(1, 1) = std::max(c(1, 1), kVarianceFloor);
  const double max_off = std::sqrt(c(0, 0) * c(1, 1)) * (1.0 - 1e-9);
  c(0, 1) = c(1, 0) = std::clamp(0.5 * (c(0, 1) + c(1, 0)), -max_off, max_off);
  return c;
}

bool EllipseSet::contains(const RatePair& theta) const {
  const Eigen::Vector2d d(theta.alpha - center.alpha, theta.beta - center.beta);
  return d.dot(floored_cov().ldlt().solve(d)) <= chi2_quantile;
}

std::vector<RatePair> EllipseSet::boundary(int count) const {
  const Eigen::Matrix2d l = floored_cov().llt().matrixL();
  const double r = std::sqrt(chi2_quantile);
  std::vector<RatePair> pts;
  pts.reserve(static_cast<std::size_t>(count));
  for (int k = 0; k < count; ++k) {
    const double t = 2.0 * std::numbers::pi * k / count;
    const Eigen::Vector2d v = l * Eigen::Vector2d(std::cos(t), std::sin(t)) * r;
    pts.push_back({center.alpha + v[0], center.beta + v[1]});
  }
  return pts;
}

EllipseSet confidence_ellipse(const RatePair& center, const Eigen::Matrix2d& cov_over_n, double level) {
  EllipseSet e;
  e.center = center;
  e.cov = cov_over_n;
  e.level = level;
  e.chi2_quantile = chi2_2_quantile(level);
  return e;
}

RatePair reference_point(const EllipseSet& e) {
  const double alpha_low = e.center.alpha - std::sqrt(e.chi2_quantile * std::max(e.cov(0, 0), 0.0));
  const double beta_high = e.center.beta + std::sqrt(e.chi2_quantile * std::max(e.cov(1, 1), 0.0));
  return {std::clamp(alpha_low, 0.0, 1.0), std::clamp(beta_high, 0.0, 1.0)};
}

const char* to_string(CaseLabel label) {
  switch (label) {
    case CaseLabel::Case1: return "case1";
    case CaseLabel::Case2: return "case2";
    case CaseLabel::Case3: return "case3";
  }
  return "?";
}

CaseLabel case_label_from_string(std::string_view text) {
  if (text == "case1") return CaseLabel::Case1;
  if (text == "case2") return CaseLabel::Case2;
  if (text == "case3") return CaseLabel::Case3;
  throw std::invalid_argument("unknown case label: " + std::string(text));
}

CaseLabel classify_maker(const EllipseSet& ellipse, const RocCurve& roc) {
  if (strictly_below(roc, reference_point(ellipse))) return CaseLabel::Case1;
  double gap = -std::numeric_limits<double>::infinity();
  for (const auto& p : ellipse.boundary(kEllipseBoundaryPoints)) {
    const double a = std::clamp(p.alpha, 0.0, 1.0);
    const double b = std::clamp(p.beta, 0.0, 1.0);
    gap = std::max(gap, b - roc.tpr_at(a));
  }
  return gap >= -kOnCurveTol ? CaseLabel::Case3 : CaseLabel::Case2;
}

DeltaTestResult delta_method_test(const ConfusionCounts& counts, const RocCurve& roc, double size) {
  if (!(size > 0.0 && size < 1.0)) throw std::invalid_argument("test size must lie in (0,1)");
  const RatePair theta = rate_pair(counts);
  const Eigen::Matrix2d sigma = asymptotic_covariance(counts);
  const Eigen::RowVector2d grad(-roc.slope_at(theta.alpha), 1.0);
  const double var = grad * sigma * grad.transpose();
  if (!(var > 0.0) || !std::isfinite(var)) throw DegenerateError("boundary rates");
  const double n = double(counts.total());
  DeltaTestResult r;
  r.statistic = std::sqrt(n) * (theta.beta - roc.tpr_at(theta.alpha)) / std::sqrt(var);
  const boost::math::normal_distribution<double> normal;
  r.reject = r.statistic <= boost::math::quantile(normal, size);
  return r;
}

std::vector<ThresholdSample> sample_thresholds(const RocCurve& roc, const DominatingSegment& seg, int n) {
  if (n < 2) throw std::invalid_argument("sample_thresholds: N must be at least 2");
  std::vector<ThresholdSample> out;
  out.reserve(static_cast<std::size_t>(n));
  const double step = (seg.c_upper - seg.c_lower) / double(n - 1);
  for (int l = 0; l < n; ++l) {
    if (l == 0) {
      out.push_back({seg.c_lower, seg.a_pair});
    } else if (l == n - 1) {
      out.push_back({seg.c_upper, seg.b_pair});
    } else {
      const double c = seg.c_lower + step * l;
      out.push_back({c, roc.pair_at_threshold(c)});
    }
  }
  return out;
}

std::optional<double> FrequentistVerdict::threshold() const {
  if (!segment || label != CaseLabel::Case1) return std::nullopt;
  return 0.5 * (segment->c_lower + segment->c_upper);
}

FrequentistVerdict benchmark_frequentist(const std::string& maker_id, std::span<const CaseRecord> cases,
                                         const RocCurve& roc, const FrequentistOptions& options,
                                         std::uint64_t seed) {
  FrequentistVerdict v;
  v.maker_id = maker_id;
  const ConfusionCounts counts = confusion_counts(cases);
  v.n = counts.total();
  v.theta_hat = rate_pair(counts);
  Eigen::Matrix2d cov;
  if (options.source == CovarianceSource::Bootstrap) {
    const auto boot = bootstrap_pairs(cases, options.bootstrap_draws, seed);
    cov = pair_covariance(boot.pairs, v.theta_hat);
  } else {
    cov = asymptotic_covariance(counts) / double(v.n);
  }
  const EllipseSet ellipse = confidence_ellipse(v.theta_hat, cov, options.level);
  v.p_point = reference_point(ellipse);
  v.label = classify_maker(ellipse, roc);
  if (v.label == CaseLabel::Case1) v.segment = dominating_segment(roc, v.p_point);
  return v;
}

void write_frequentist_csv(std::ostream& out, std::span<const FrequentistVerdict> verdicts) {
  out << "maker_id,n,alpha_hat,beta_hat,case_label,c_lower,c_upper\n";
  for (const auto& v : verdicts) {
    std::optional<double> lo, hi;
    if (v.segment) {
      lo = v.segment->c_lower;
      hi = v.segment->c_upper;
    }
    out << v.maker_id << ',' << v.n << ',' << format_number(v.theta_hat.alpha) << ','
        << format_number(v.theta_hat.beta) << ',' << to_string(v.label) << ','
        << format_optional(lo, 17) << ',' << format_optional(hi, 17) << '\n';
  }
}

void write_frequentist_csv(const std::string& path, std::span<const FrequentistVerdict> verdicts) {
  std::ofstream out(path);
  if (!out) throw std::runtime_error("cannot write " + path);
  write_frequentist_csv(out, verdicts);
}

}  // namespace rocbench
