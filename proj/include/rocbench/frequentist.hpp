#pragma once

#include "rocbench/cases.hpp"
#include "rocbench/roc.hpp"

#include <Eigen/Core>

#include <iosfwd>
#include <optional>
#include <span>
#include <string>
#include <vector>

namespace rocbench {

/// Plug-in asymptotic covariance of sqrt(n) * (theta_hat - theta):
/// diag(alpha(1-alpha)/(1-p), beta(1-beta)/p). Divide by n for theta_hat itself.
Eigen::Matrix2d asymptotic_covariance(const ConfusionCounts& counts);

struct BootstrapResult {
  std::vector<RatePair> pairs;
  int redraws = 0;  // degenerate resamples replaced by a fresh draw
};

/// B with-replacement resamples of `cases`, each mapped to its rate pair.
/// Throws DegenerateError when more than half of all draws lack a class.
BootstrapResult bootstrap_pairs(std::span<const CaseRecord> cases, int B, std::uint64_t seed);

/// Sample covariance of `pairs` around `center` (divisor B - 1, or 1 when B = 1).
Eigen::Matrix2d pair_covariance(std::span<const RatePair> pairs, const RatePair& center);

/// chi-square quantile with two degrees of freedom.
double chi2_2_quantile(double level);

inline constexpr double kVarianceFloor = 1e-12;

struct EllipseSet {
  RatePair center;
  Eigen::Matrix2d cov = Eigen::Matrix2d::Zero();  // covariance of theta_hat
  double level = 0.95;
  double chi2_quantile = 0.0;

  /// Covariance with each variance raised to at least kVarianceFloor.
  Eigen::Matrix2d floored_cov() const;
  /// (theta - center)' cov^{-1} (theta - center) <= chi2 quantile, on the floored covariance.
  bool contains(const RatePair& theta) const;
  /// `count` points evenly spaced in angle around the boundary, not clipped.
  std::vector<RatePair> boundary(int count) const;
};

EllipseSet confidence_ellipse(const RatePair& center, const Eigen::Matrix2d& cov_over_n, double level);

/// P = (alpha_low, beta_high), clipped to the unit square.
RatePair reference_point(const EllipseSet& ellipse);

enum class CaseLabel { Case1, Case2, Case3 };

const char* to_string(CaseLabel label);
CaseLabel case_label_from_string(std::string_view text);

inline constexpr int kEllipseBoundaryPoints = 1024;

CaseLabel classify_maker(const EllipseSet& ellipse, const RocCurve& roc);

struct DeltaTestResult {
  double statistic = 0.0;
  bool reject = false;
};

/// One-sided test of beta <= g(alpha); rejects when the studentized gap falls
/// at or below the normal quantile at `size`. Throws DegenerateError on zero variance.
DeltaTestResult delta_method_test(const ConfusionCounts& counts, const RocCurve& roc, double size);

struct ThresholdSample {
  double threshold = 0.0;
  RatePair pair;
};

/// N thresholds evenly spaced over [c_lower, c_upper], each with its curve pair.
std::vector<ThresholdSample> sample_thresholds(const RocCurve& roc, const DominatingSegment& segment,
                                               int n);

enum class CovarianceSource { Bootstrap, Asymptotic };

struct FrequentistOptions {
  double level = 0.95;
  int bootstrap_draws = 100;
  CovarianceSource source = CovarianceSource::Bootstrap;
};

struct FrequentistVerdict {
  std::string maker_id;
  std::int64_t n = 0;
  RatePair theta_hat;
  CaseLabel label = CaseLabel::Case2;
  RatePair p_point;
  std::optional<DominatingSegment> segment;  // present for Case1

  bool replace() const { return label == CaseLabel::Case1; }
  /// Midpoint of the dominating threshold range for Case1 makers.
  std::optional<double> threshold() const;
};

/// Full per-maker procedure: rates, covariance, ellipse, P, case label, segment.
FrequentistVerdict benchmark_frequentist(const std::string& maker_id,
                                         std::span<const CaseRecord> cases, const RocCurve& roc,
                                         const FrequentistOptions& options, std::uint64_t seed);

/// `maker_id,n,alpha_hat,beta_hat,case_label,c_lower,c_upper`
void write_frequentist_csv(std::ostream& out, std::span<const FrequentistVerdict> verdicts);
void write_frequentist_csv(const std::string& path, std::span<const FrequentistVerdict> verdicts);

}  // namespace rocbench
