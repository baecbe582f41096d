#pragma once

#include "rocbench/cases.hpp"
#include "rocbench/roc.hpp"

#include <Eigen/Core>

#include <functional>
#include <iosfwd>
#include <optional>
#include <span>
#include <string>
#include <vector>

namespace rocbench {

struct DirichletParams {
  Eigen::Vector4d gamma = Eigen::Vector4d::Constant(1.0);

  Eigen::Vector4d mean() const { return gamma / gamma.sum(); }
};

inline constexpr double kDefaultPriorGamma = 0.1;

/// gamma_hat = prior + counts, in cell order (n11, n01, n10, n00).
DirichletParams posterior_params(const Eigen::Vector4d& prior, const ConfusionCounts& counts);

/// (t2 / (t2 + t4), t1 / (t1 + t3)).
RatePair theta_from_t(const Eigen::Vector4d& t);

struct PosteriorDraws {
  Eigen::MatrixX4d ts;   // R x 4 simplex points
  Eigen::ArrayXd alpha;  // R
  Eigen::ArrayXd beta;   // R

  Eigen::Index size() const { return alpha.size(); }
  RatePair theta(Eigen::Index r) const { return {alpha[r], beta[r]}; }

  /// Draws given directly as rate pairs; `ts` is left empty.
  static PosteriorDraws from_thetas(std::span<const RatePair> thetas);
};

/// Gamma-normalized Dirichlet draws. Draws with a zero rate denominator are redrawn.
PosteriorDraws sample_posterior(const DirichletParams& params, int R, std::uint64_t seed);

/// Fraction of draws with beta <= g(alpha).
double prob_below_roc(const PosteriorDraws& draws, const RocCurve& roc);

inline constexpr int kDefaultGridSize = 512;

/// Sorted, deduplicated union of `grid_size` uniform points on [0,1], the curve
/// knots' FPRs and the draws' FPRs.
std::vector<double> candidate_grid(const RocCurve& roc, const PosteriorDraws& draws,
                                   int grid_size = kDefaultGridSize);

struct DominanceResult {
  double q_max = 0.0;
  std::optional<double> alpha_d;  // undefined when no draw is dominated anywhere
};

DominanceResult max_dominance(const PosteriorDraws& draws, const RocCurve& roc,
                              int grid_size = kDefaultGridSize);
/// Same, over an explicit sorted candidate grid.
DominanceResult max_dominance(const PosteriorDraws& draws, const RocCurve& roc,
                              std::span<const double> grid);

enum class LossKind {
  BaselineIndicator,
  EuclideanToRoc,
  ComplementSetDistance,
  DiagonalVertical,
  DiagonalHorizontal,
  ComplementVertical,
  ComplementHorizontal,
  Pluggable,
};

/// Every named kind, in declaration order.
std::span<const LossKind> named_loss_kinds();
const char* to_string(LossKind kind);
LossKind loss_kind_from_string(std::string_view text);

/// rho = 1(no dominance) * cost(theta_m, theta_h) - 1(dominance) * benefit(theta_m, beta_h).
struct PluggableLoss {
  std::function<double(const RatePair& theta_m, const RatePair& theta_h)> cost;
  std::function<double(const RatePair& theta_m, double beta_h)> benefit;
};

/// Loss of replacing `theta_h` by the curve point `theta_m`.
double loss_eval(LossKind kind, const RatePair& theta_m, const RatePair& theta_h, const RocCurve& roc,
                 const PluggableLoss* pluggable = nullptr);

struct LossMinimum {
  RatePair theta_m0;
  double value = 1.0;
};

/// argmin over the candidate grid of the mean loss over draws; ties go to the smallest FPR.
LossMinimum min_posterior_loss(const PosteriorDraws& draws, const RocCurve& roc, LossKind kind,
                               int grid_size = kDefaultGridSize, const PluggableLoss* pluggable = nullptr);
LossMinimum min_posterior_loss(const PosteriorDraws& draws, const RocCurve& roc, LossKind kind,
                               std::span<const double> grid, const PluggableLoss* pluggable = nullptr);

/// Mean loss at every grid point by direct evaluation, O(R * grid).
std::vector<double> posterior_loss_profile_brute(const PosteriorDraws& draws, const RocCurve& roc,
                                                 LossKind kind, std::span<const double> grid,
                                                 const PluggableLoss* pluggable = nullptr);
/// Same profile by the sorted sweep, O((R + grid) log R). Named kinds only.
std::vector<double> posterior_loss_profile(const PosteriorDraws& draws, const RocCurve& roc,
                                           LossKind kind, std::span<const double> grid);

struct BayesVerdict {
  std::string maker_id;
  LossKind kind = LossKind::BaselineIndicator;
  DominanceResult dominance;
  LossMinimum minimum;
  bool replace = false;
  /// Machine threshold for this maker. Present for retained makers too, so
  /// schedules that randomize every maker have an operating point.
  std::optional<double> threshold;
  /// True when no curve point dominates any posterior draw.
  bool above_curve = false;
};

/// Baseline kind: replace iff q_max >= level, threshold at alpha_d. Other kinds:
/// replace iff the minimized posterior loss <= 1 - level, threshold at theta_m0.
BayesVerdict replace_decision(const PosteriorDraws& draws, const RocCurve& roc, LossKind kind,
                              double credible_level, int grid_size = kDefaultGridSize,
                              const PluggableLoss* pluggable = nullptr);

enum class RetainMethod { Dominate, Above };

/// Reversed-null retention: true when the posterior supports the maker over the curve.
bool reversed_null_retain(const PosteriorDraws& draws, const RocCurve& roc, double level,
                          RetainMethod method, int grid_size = kDefaultGridSize);

struct BayesOptions {
  double prior_gamma = kDefaultPriorGamma;
  int draws = 10000;
  double level = 0.95;
  LossKind kind = LossKind::BaselineIndicator;
  int grid_size = kDefaultGridSize;
};

/// Full per-maker procedure: posterior, draws, verdict.
BayesVerdict benchmark_bayes(const std::string& maker_id, const ConfusionCounts& counts,
                             const RocCurve& roc, const BayesOptions& options, std::uint64_t seed);

/// `maker_id,q_max,alpha_d,loss_kind,min_loss,replace,threshold`
void write_bayes_csv(std::ostream& out, std::span<const BayesVerdict> verdicts);
void write_bayes_csv(const std::string& path, std::span<const BayesVerdict> verdicts);

/// `t1,t2,t3,t4,alpha,beta` per draw.
void write_draws_csv(std::ostream& out, const PosteriorDraws& draws);

}  // namespace rocbench
