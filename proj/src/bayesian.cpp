#include "rocbench/bayesian.hpp"

#include "rocbench/csv.hpp"
#include "rocbench/random.hpp"

#include <algorithm>
#include <array>
#include <cmath>
#include <fstream>
#include <limits>
#include <numeric>
#include <ostream>

namespace rocbench {

namespace {

constexpr double kInf = std::numeric_limits<double>::infinity();

class Fenwick {
 public:
  explicit Fenwick(std::size_t n) : count_(n + 1, 0.0), sum_(n + 1, 0.0) {}

  void add(std::size_t i, double value) {
    for (++i; i < count_.size(); i += i & (~i + 1)) {
      count_[i] += 1.0;
      sum_[i] += value;
    }
  }

  // Totals over the first `n` slots.
  std::pair<double, double> prefix(std::size_t n) const {
    double c = 0.0, s = 0.0;
    for (; n > 0; n -= n & (~n + 1)) {
      c += count_[n];
      s += sum_[n];
    }
    return {c, s};
  }

 private:
  std::vector<double> count_;
  std::vector<double> sum_;
};

struct Query {
  double a = 0.0;
  double b = 0.0;
};

struct Tally {
  double count = 0.0;
  double sum = 0.0;
};

// For each query, count and sum of `v` over points with x >= a and y <= b.
std::vector<Tally> dominance_tally(const std::vector<double>& x, const std::vector<double>& y,
                                   const std::vector<double>& v, const std::vector<Query>& queries) {
  const std::size_t n = x.size();
  std::vector<double> ys(y);
  std::sort(ys.begin(), ys.end());
  ys.erase(std::unique(ys.begin(), ys.end()), ys.end());

  std::vector<std::size_t> points(n);
  std::iota(points.begin(), points.end(), 0);
  std::sort(points.begin(), points.end(), [&](std::size_t i, std::size_t j) { return x[i] > x[j]; });
  std::vector<std::size_t> order(queries.size());
  std::iota(order.begin(), order.end(), 0);
  const auto by_a = [&](const Query& l, const Query& r) { return l.a < r.a; };
  if (std::is_sorted(queries.begin(), queries.end(), by_a)) {
    std::reverse(order.begin(), order.end());
  } else if (!std::is_sorted(queries.rbegin(), queries.rend(), by_a)) {
    std::stable_sort(order.begin(), order.end(),
                     [&](std::size_t i, std::size_t j) { return queries[i].a > queries[j].a; });
  }

  Fenwick tree(ys.size());
  std::vector<Tally> out(queries.size());
  std::size_t next = 0;
  for (auto qi : order) {
    const auto& q = queries[qi];
    while (next < n && x[points[next]] >= q.a) {
      const auto p = points[next++];
      tree.add(static_cast<std::size_t>(std::lower_bound(ys.begin(), ys.end(), y[p]) - ys.begin()), v[p]);
    }
    const auto k = static_cast<std::size_t>(std::upper_bound(ys.begin(), ys.end(), q.b) - ys.begin());
    const auto [c, s] = tree.prefix(k);
    out[qi] = {c, s};
  }
  return out;
}

double clip_lambda(double num, double den) {
  if (!(den > 0.0) || !(num > 0.0)) return 0.0;
  return num / den;
}

// Per-draw weight of the kinds whose weight ignores theta_m.
double fixed_weight(LossKind kind, const RatePair& h, const RocCurve& roc) {
  switch (kind) {
    case LossKind::BaselineIndicator:
      return 1.0;
    case LossKind::EuclideanToRoc:
      return roc.distance_to(h);
    case LossKind::DiagonalVertical:
      return 1.0 - clip_lambda(h.beta - h.alpha, roc.tpr_at(h.alpha) - h.alpha);
    case LossKind::DiagonalHorizontal:
      return 1.0 - clip_lambda(h.beta - h.alpha, h.beta - roc.fpr_at(h.beta));
    default:
      throw std::logic_error("fixed_weight: kind depends on theta_m");
  }
}

bool has_fixed_weight(LossKind kind) {
  return kind == LossKind::BaselineIndicator || kind == LossKind::EuclideanToRoc ||
         kind == LossKind::DiagonalVertical || kind == LossKind::DiagonalHorizontal;
}

constexpr std::array kNamedKinds{
    LossKind::BaselineIndicator, LossKind::EuclideanToRoc,     LossKind::ComplementSetDistance,
    LossKind::DiagonalVertical,  LossKind::DiagonalHorizontal, LossKind::ComplementVertical,
    LossKind::ComplementHorizontal,
};

std::vector<double> to_vector(const Eigen::ArrayXd& a) { return {a.data(), a.data() + a.size()}; }

std::size_t argmin_first(const std::vector<double>& values) {
  std::size_t best = 0;
  for (std::size_t i = 1; i < values.size(); ++i) {
    if (values[i] < values[best] - 1e-12) best = i;
  }
  return best;
}

}  // namespace

DirichletParams posterior_params(const Eigen::Vector4d& prior, const ConfusionCounts& counts) {
  if (!(prior.array() > 0.0).all()) throw std::invalid_argument("prior parameters must be positive");
  return {prior + counts.cells()};
}

RatePair theta_from_t(const Eigen::Vector4d& t) {
  return {t[1] / (t[1] + t[3]), t[0] / (t[0] + t[2])};
}

PosteriorDraws PosteriorDraws::from_thetas(std::span<const RatePair> thetas) {
  PosteriorDraws d;
  d.alpha.resize(static_cast<Eigen::Index>(thetas.size()));
  d.beta.resize(static_cast<Eigen::Index>(thetas.size()));
  for (std::size_t i = 0; i < thetas.size(); ++i) {
    d.alpha[static_cast<Eigen::Index>(i)] = thetas[i].alpha;
    d.beta[static_cast<Eigen::Index>(i)] = thetas[i].beta;
  }
  return d;
}

PosteriorDraws sample_posterior(const DirichletParams& params, int R, std::uint64_t seed) {
  if (R < 1) throw std::invalid_argument("posterior: R must be at least 1");
  if (!(params.gamma.array() > 0.0).all()) throw std::invalid_argument("posterior parameters must be positive");
  Rng rng(seed);
  std::array<std::gamma_distribution<double>, 4> gammas{
      std::gamma_distribution<double>(params.gamma[0]), std::gamma_distribution<double>(params.gamma[1]),
      std::gamma_distribution<double>(params.gamma[2]), std::gamma_distribution<double>(params.gamma[3])};
  PosteriorDraws d;
  d.ts.resize(R, 4);
  d.alpha.resize(R);
  d.beta.resize(R);
  for (int r = 0; r < R;) {
    Eigen::Vector4d g;
    for (int k = 0; k < 4; ++k) g[k] = gammas[static_cast<std::size_t>(k)](rng);
    const double total = g.sum();
    if (g[1] + g[3] <= 0.0 || g[0] + g[2] <= 0.0 || !(total > 0.0)) continue;
    const Eigen::Vector4d t = g / total;
    const RatePair theta = theta_from_t(t);
    if (!std::isfinite(theta.alpha) || !std::isfinite(theta.beta)) continue;
    d.ts.row(r) = t.transpose();
    d.alpha[r] = theta.alpha;
    d.beta[r] = theta.beta;
    ++r;
  }
  return d;
}

double prob_below_roc(const PosteriorDraws& draws, const RocCurve& roc) {
  if (draws.size() < 1) throw std::invalid_argument("no posterior draws");
  Eigen::Index below = 0;
  for (Eigen::Index r = 0; r < draws.size(); ++r) {
    if (draws.beta[r] <= roc.tpr_at(draws.alpha[r])) ++below;
  }
  return double(below) / double(draws.size());
}

std::vector<double> candidate_grid(const RocCurve& roc, const PosteriorDraws& draws, int grid_size) {
  if (grid_size < 2) throw std::invalid_argument("grid size must be at least 2");
  std::vector<double> grid;
  grid.reserve(static_cast<std::size_t>(grid_size) + roc.size() + static_cast<std::size_t>(draws.size()));
  for (int k = 0; k < grid_size; ++k) grid.push_back(double(k) / double(grid_size - 1));
  for (const auto& p : roc.points()) grid.push_back(p.pair.alpha);
  for (Eigen::Index r = 0; r < draws.size(); ++r) grid.push_back(std::clamp(draws.alpha[r], 0.0, 1.0));
  std::sort(grid.begin(), grid.end());
  grid.erase(std::unique(grid.begin(), grid.end()), grid.end());
  return grid;
}

DominanceResult max_dominance(const PosteriorDraws& draws, const RocCurve& roc, int grid_size) {
  const auto grid = candidate_grid(roc, draws, grid_size);
  return max_dominance(draws, roc, grid);
}

DominanceResult max_dominance(const PosteriorDraws& draws, const RocCurve& roc,
                              std::span<const double> grid) {
  if (draws.size() < 1) throw std::invalid_argument("no posterior draws");
  if (grid.empty()) throw std::invalid_argument("empty candidate grid");
  std::vector<Query> queries;
  queries.reserve(grid.size());
  for (double a : grid) queries.push_back({a, roc.tpr_at(a)});
  const auto tallies = dominance_tally(to_vector(draws.alpha), to_vector(draws.beta),
                                       std::vector<double>(static_cast<std::size_t>(draws.size()), 0.0),
                                       queries);
  std::size_t best = 0;
  for (std::size_t i = 1; i < tallies.size(); ++i) {
    if (tallies[i].count > tallies[best].count) best = i;
  }
  DominanceResult res;
  res.q_max = tallies[best].count / double(draws.size());
  if (tallies[best].count > 0.0) res.alpha_d = grid[best];
  return res;
}

std::span<const LossKind> named_loss_kinds() { return kNamedKinds; }

const char* to_string(LossKind kind) {
  switch (kind) {
    case LossKind::BaselineIndicator: return "baseline";
    case LossKind::EuclideanToRoc: return "euclidean";
    case LossKind::ComplementSetDistance: return "complement_distance";
    case LossKind::DiagonalVertical: return "diagonal_vertical";
    case LossKind::DiagonalHorizontal: return "diagonal_horizontal";
    case LossKind::ComplementVertical: return "complement_vertical";
    case LossKind::ComplementHorizontal: return "complement_horizontal";
    case LossKind::Pluggable: return "pluggable";
  }
  return "?";
}

LossKind loss_kind_from_string(std::string_view text) {
  for (auto k : kNamedKinds) {
    if (text == to_string(k)) return k;
  }
  if (text == "pluggable") return LossKind::Pluggable;
  throw std::invalid_argument("unknown loss kind: " + std::string(text));
}

double loss_eval(LossKind kind, const RatePair& m, const RatePair& h, const RocCurve& roc,
                 const PluggableLoss* pluggable) {
  const bool dominated = h.alpha >= m.alpha && h.beta <= m.beta;
  if (kind == LossKind::Pluggable) {
    if (!pluggable || !pluggable->cost || !pluggable->benefit) {
      throw std::invalid_argument("pluggable loss needs cost and benefit hooks");
    }
    return dominated ? -pluggable->benefit(m, h.beta) : pluggable->cost(m, h);
  }
  if (!dominated) return 1.0;
  switch (kind) {
    case LossKind::BaselineIndicator:
    case LossKind::EuclideanToRoc:
    case LossKind::DiagonalVertical:
    case LossKind::DiagonalHorizontal:
      return 1.0 - fixed_weight(kind, h, roc);
    case LossKind::ComplementSetDistance:
      return 1.0 - std::min(h.alpha - m.alpha, m.beta - h.beta);
    case LossKind::ComplementVertical:
      return clip_lambda(h.beta - m.alpha, m.beta - m.alpha);
    case LossKind::ComplementHorizontal:
      return clip_lambda(m.beta - h.alpha, m.beta - m.alpha);
    case LossKind::Pluggable:
      break;
  }
  throw std::invalid_argument("unknown loss kind");
}

std::vector<double> posterior_loss_profile_brute(const PosteriorDraws& draws, const RocCurve& roc,
                                                 LossKind kind, std::span<const double> grid,
                                                 const PluggableLoss* pluggable) {
  const double R = double(draws.size());
  std::vector<double> out;
  out.reserve(grid.size());
  for (double a : grid) {
    const RatePair m{a, roc.tpr_at(a)};
    double total = 0.0;
    for (Eigen::Index r = 0; r < draws.size(); ++r) total += loss_eval(kind, m, draws.theta(r), roc, pluggable);
    out.push_back(total / R);
  }
  return out;
}

std::vector<double> posterior_loss_profile(const PosteriorDraws& draws, const RocCurve& roc,
                                           LossKind kind, std::span<const double> grid) {
  if (draws.size() < 1) throw std::invalid_argument("no posterior draws");
  if (kind == LossKind::Pluggable) throw std::invalid_argument("pluggable losses have no sweep");
  const auto n = static_cast<std::size_t>(draws.size());
  const double R = double(n);
  const auto alpha = to_vector(draws.alpha);
  const auto beta = to_vector(draws.beta);
  std::vector<double> gm(grid.size());
  for (std::size_t i = 0; i < grid.size(); ++i) gm[i] = roc.tpr_at(grid[i]);

  // Mean loss is 1 - (weighted dominated mass) / R for every named kind.
  std::vector<double> mass(grid.size(), 0.0);
  if (has_fixed_weight(kind)) {
    std::vector<double> w(n, 0.0);
    for (std::size_t r = 0; r < n; ++r) {
      const RatePair h{alpha[r], beta[r]};
      // Draws above the curve are never dominated by a curve point.
      if (kind == LossKind::EuclideanToRoc && h.beta > roc.tpr_at(h.alpha)) continue;
      w[r] = fixed_weight(kind, h, roc);
    }
    std::vector<Query> q;
    for (std::size_t i = 0; i < grid.size(); ++i) q.push_back({grid[i], gm[i]});
    const auto t = dominance_tally(alpha, beta, w, q);
    for (std::size_t i = 0; i < grid.size(); ++i) {
      mass[i] = kind == LossKind::BaselineIndicator ? t[i].count : t[i].sum;
    }
  } else if (kind == LossKind::ComplementVertical) {
    std::vector<Query> q;
    for (std::size_t i = 0; i < grid.size(); ++i) {
      q.push_back({grid[i], gm[i]});
      q.push_back({grid[i], grid[i]});
    }
    const auto t = dominance_tally(alpha, beta, beta, q);
    for (std::size_t i = 0; i < grid.size(); ++i) {
      const double am = grid[i], bm = gm[i];
      const Tally& all = t[2 * i];
      if (!(bm - am > 0.0)) {
        mass[i] = all.count;
        continue;
      }
      const Tally& lo = t[2 * i + 1];
      const double cnt_mid = all.count - lo.count;
      const double sum_mid = all.sum - lo.sum;
      mass[i] = lo.count + (bm * cnt_mid - sum_mid) / (bm - am);
    }
  } else if (kind == LossKind::ComplementHorizontal) {
    std::vector<Query> q;
    for (std::size_t i = 0; i < grid.size(); ++i) {
      q.push_back({grid[i], gm[i]});
      q.push_back({gm[i], gm[i]});
    }
    const auto t = dominance_tally(alpha, beta, alpha, q);
    for (std::size_t i = 0; i < grid.size(); ++i) {
      const double am = grid[i], bm = gm[i];
      const Tally& all = t[2 * i];
      if (!(bm - am > 0.0)) {
        mass[i] = all.count;
        continue;
      }
      const Tally& hi = t[2 * i + 1];
      const double cnt_mid = all.count - hi.count;
      const double sum_mid = all.sum - hi.sum;
      mass[i] = hi.count + (sum_mid - am * cnt_mid) / (bm - am);
    }
  } else if (kind == LossKind::ComplementSetDistance) {
    std::vector<double> s(n), neg_beta(n);
    for (std::size_t r = 0; r < n; ++r) {
      s[r] = alpha[r] + beta[r];
      neg_beta[r] = -beta[r];
    }
    // Where a + b <= a_m + b_m the horizontal gap is the smaller one.
    std::vector<Query> q1, q2;
    for (std::size_t i = 0; i < grid.size(); ++i) {
      const double sm = grid[i] + gm[i];
      q1.push_back({grid[i], sm});
      q2.push_back({-gm[i], sm});
      q2.push_back({-gm[i], kInf});
    }
    const auto d1 = dominance_tally(alpha, s, alpha, q1);
    const auto d2 = dominance_tally(neg_beta, s, beta, q2);
    for (std::size_t i = 0; i < grid.size(); ++i) {
      const double h_part = d1[i].sum - grid[i] * d1[i].count;
      const double cnt = d2[2 * i + 1].count - d2[2 * i].count;
      const double sum = d2[2 * i + 1].sum - d2[2 * i].sum;
      mass[i] = h_part + (gm[i] * cnt - sum);
    }
  } else {
    throw std::invalid_argument("unknown loss kind");
  }
  std::vector<double> out(grid.size());
  for (std::size_t i = 0; i < grid.size(); ++i) out[i] = 1.0 - mass[i] / R;
  return out;
}

LossMinimum min_posterior_loss(const PosteriorDraws& draws, const RocCurve& roc, LossKind kind,
                               int grid_size, const PluggableLoss* pluggable) {
  const auto grid = candidate_grid(roc, draws, grid_size);
  return min_posterior_loss(draws, roc, kind, grid, pluggable);
}

LossMinimum min_posterior_loss(const PosteriorDraws& draws, const RocCurve& roc, LossKind kind,
                               std::span<const double> grid, const PluggableLoss* pluggable) {
  if (draws.size() < 1) throw std::invalid_argument("no posterior draws");
  if (grid.empty()) throw std::invalid_argument("empty candidate grid");
  const auto profile = kind == LossKind::Pluggable
                           ? posterior_loss_profile_brute(draws, roc, kind, grid, pluggable)
                           : posterior_loss_profile(draws, roc, kind, grid);
  const auto best = argmin_first(profile);
  return {{grid[best], roc.tpr_at(grid[best])}, profile[best]};
}

BayesVerdict replace_decision(const PosteriorDraws& draws, const RocCurve& roc, LossKind kind,
                              double level, int grid_size, const PluggableLoss* pluggable) {
  if (!(level > 0.0 && level <= 1.0)) throw std::invalid_argument("credible level must lie in (0,1]");
  const auto grid = candidate_grid(roc, draws, grid_size);
  BayesVerdict v;
  v.kind = kind;
  v.dominance = max_dominance(draws, roc, grid);
  v.minimum = min_posterior_loss(draws, roc, kind, grid, pluggable);
  v.above_curve = !v.dominance.alpha_d.has_value();
  if (kind == LossKind::BaselineIndicator) {
    v.replace = v.dominance.q_max >= level;
    const double a = v.dominance.alpha_d ? *v.dominance.alpha_d : draws.alpha.mean();
    v.threshold = roc.threshold_at_fpr(a);
  } else {
    v.replace = v.minimum.value <= 1.0 - level;
    v.threshold = roc.threshold_at_fpr(v.minimum.theta_m0.alpha);
  }
  return v;
}

bool reversed_null_retain(const PosteriorDraws& draws, const RocCurve& roc, double level,
                          RetainMethod method, int grid_size) {
  if (!(level > 0.0 && level < 1.0)) throw std::invalid_argument("level must lie in (0,1)");
  if (draws.size() < 1) throw std::invalid_argument("no posterior draws");
  const double R = double(draws.size());
  if (method == RetainMethod::Above) {
    Eigen::Index above = 0;
    for (Eigen::Index r = 0; r < draws.size(); ++r) {
      if (draws.beta[r] > roc.tpr_at(draws.alpha[r])) ++above;
    }
    return double(above) / R >= level;
  }
  const auto grid = candidate_grid(roc, draws, grid_size);
  const auto n = static_cast<std::size_t>(draws.size());
  std::vector<double> neg_a(n), neg_b(n);
  for (std::size_t r = 0; r < n; ++r) {
    neg_a[r] = -draws.alpha[static_cast<Eigen::Index>(r)];
    neg_b[r] = -draws.beta[static_cast<Eigen::Index>(r)];
  }
  std::vector<Query> q;
  for (double a : grid) q.push_back({-a, -roc.tpr_at(a)});
  const auto t = dominance_tally(neg_a, neg_b, std::vector<double>(n, 0.0), q);
  double best = 0.0;
  for (const auto& x : t) best = std::max(best, x.count);
  return best / R >= level;
}

BayesVerdict benchmark_bayes(const std::string& maker_id, const ConfusionCounts& counts,
                             const RocCurve& roc, const BayesOptions& options, std::uint64_t seed) {
  const auto params = posterior_params(Eigen::Vector4d::Constant(options.prior_gamma), counts);
  const auto draws = sample_posterior(params, options.draws, seed);
  BayesVerdict v = replace_decision(draws, roc, options.kind, options.level, options.grid_size);
  v.maker_id = maker_id;
  return v;
}

void write_bayes_csv(std::ostream& out, std::span<const BayesVerdict> verdicts) {
  out << "maker_id,q_max,alpha_d,loss_kind,min_loss,replace,threshold\n";
  for (const auto& v : verdicts) {
    out << v.maker_id << ',' << format_number(v.dominance.q_max) << ','
        << format_optional(v.dominance.alpha_d, 17) << ',' << to_string(v.kind) << ','
        << format_number(v.minimum.value) << ',' << (v.replace ? 1 : 0) << ','
        << format_optional(v.threshold, 17) << '\n';
  }
}

void write_bayes_csv(const std::string& path, std::span<const BayesVerdict> verdicts) {
  std::ofstream out(path);
  if (!out) throw std::runtime_error("cannot write " + path);
  write_bayes_csv(out, verdicts);
}

void write_draws_csv(std::ostream& out, const PosteriorDraws& draws) {
  out << "t1,t2,t3,t4,alpha,beta\n";
  for (Eigen::Index r = 0; r < draws.size(); ++r) {
    for (int k = 0; k < 4; ++k) {
      out << (draws.ts.rows() > r ? format_number(draws.ts(r, k)) : std::string()) << ',';
    }
    out << format_number(draws.alpha[r]) << ',' << format_number(draws.beta[r]) << '\n';
  }
}

}  // namespace rocbench
