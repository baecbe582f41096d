#pragma once

#include "rocbench/cases.hpp"

#include <iosfwd>
#include <optional>
#include <span>
#include <vector>

namespace rocbench {

struct RocPoint {
  double threshold = 0.0;
  RatePair pair;
};

/// Empirical ROC curve of the rule 1(score > c), stored as knots sorted by
/// strictly decreasing threshold and read as a piecewise-linear curve.
///
/// The first knot is (0,0) at the largest score and the last is (1,1) at a
/// threshold just below the smallest score. Between knots both the rates and
/// the threshold are interpolated linearly, so every point on the curve has
/// a threshold and every threshold in range has a point.
class RocCurve {
 public:
  RocCurve() = default;

  /// Validates and adopts explicit knots.
  static RocCurve from_points(std::vector<RocPoint> points);
  /// Knots given only as rates; thresholds are assigned evenly from 1 down to 0.
  static RocCurve from_rates(std::span<const RatePair> rates);

  const std::vector<RocPoint>& points() const { return points_; }
  std::size_t size() const { return points_.size(); }

  /// g(alpha): upper envelope at alpha, linear between knots.
  double tpr_at(double alpha) const;
  /// g^{-1}(beta): the smallest alpha with g(alpha) >= beta.
  double fpr_at(double beta) const;
  /// Slope of the segment ending at alpha (the first segment at alpha = 0).
  double slope_at(double alpha) const;

  /// Threshold of the curve point (alpha, g(alpha)).
  double threshold_at_fpr(double alpha) const;
  /// Threshold of the curve point (g^{-1}(beta), beta).
  double threshold_at_tpr(double beta) const;
  /// Curve point reached by threshold c.
  RatePair pair_at_threshold(double c) const;

  /// Euclidean distance from `p` to the piecewise-linear curve.
  double distance_to(const RatePair& p) const;

 private:
  explicit RocCurve(std::vector<RocPoint> points);

  std::vector<RocPoint> points_;
  std::vector<double> alphas_;
  std::vector<double> betas_;
};

/// Empirical ROC of `scores` against binary `labels`.
RocCurve build_roc(std::span<const double> scores, std::span<const int> labels);

inline double eval_tpr_at_fpr(const RocCurve& roc, double alpha) { return roc.tpr_at(alpha); }
inline double eval_fpr_at_tpr(const RocCurve& roc, double beta) { return roc.fpr_at(beta); }

/// Trapezoidal area under the piecewise-linear curve.
double auc(const RocCurve& roc);

/// Tolerance under which a point counts as lying on the curve.
inline constexpr double kOnCurveTol = 1e-12;

/// True when `p` lies strictly below the curve (beyond kOnCurveTol).
bool strictly_below(const RocCurve& roc, const RatePair& p);

/// Portion of the curve between A = (alpha_q, g(alpha_q)) and
/// B = (g^{-1}(beta_q), beta_q). Every curve point between them weakly
/// dominates the query. Thresholds decrease from B to A, so `c_lower` is the
/// threshold at A and `c_upper` the threshold at B.
struct DominatingSegment {
  double c_lower = 0.0;
  double c_upper = 0.0;
  RatePair a_pair;
  RatePair b_pair;
};

std::optional<DominatingSegment> dominating_segment(const RocCurve& roc, const RatePair& point);

/// phi * beta - eta * alpha.
double np_objective(const RatePair& pair, double phi, double eta);

/// Indices of interior knots where the chord slope increases (tolerance 1e-12).
std::vector<std::size_t> check_concavity(const RocCurve& roc);

/// ROC CSV: `threshold,fpr,tpr` rows by descending threshold. Thresholds are
/// written at round-trip precision so that reloaded knots stay strictly ordered.
void write_roc_csv(std::ostream& out, const RocCurve& roc);
void write_roc_csv(const std::string& path, const RocCurve& roc);
RocCurve read_roc_csv(std::istream& in);
RocCurve read_roc_csv(const std::string& path);

}  // namespace rocbench
