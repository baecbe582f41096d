#include "rocbench/roc.hpp"

#include "rocbench/csv.hpp"

#include <algorithm>
#include <cmath>
#include <fstream>
#include <limits>
#include <numeric>
#include <ostream>

namespace rocbench {

namespace {

double lerp(double a, double b, double t) { return a + (b - a) * t; }

double clamp01(double v) { return std::clamp(v, 0.0, 1.0); }

double segment_distance(const RatePair& p, const RatePair& a, const RatePair& b) {
  const double dx = b.alpha - a.alpha;
  const double dy = b.beta - a.beta;
  const double len2 = dx * dx + dy * dy;
  double t = 0.0;
  if (len2 > 0.0) t = std::clamp(((p.alpha - a.alpha) * dx + (p.beta - a.beta) * dy) / len2, 0.0, 1.0);
  const double ex = p.alpha - (a.alpha + t * dx);
  const double ey = p.beta - (a.beta + t * dy);
  return std::sqrt(ex * ex + ey * ey);
}

}  // namespace

RocCurve::RocCurve(std::vector<RocPoint> points) : points_(std::move(points)) {
  alphas_.reserve(points_.size());
  betas_.reserve(points_.size());
  for (const auto& p : points_) {
    alphas_.push_back(p.pair.alpha);
    betas_.push_back(p.pair.beta);
  }
}

RocCurve RocCurve::from_points(std::vector<RocPoint> points) {
  if (points.size() < 2) throw std::invalid_argument("ROC curve needs at least two points");
  if (points.front().pair != RatePair{0.0, 0.0} || points.back().pair != RatePair{1.0, 1.0}) {
    throw std::invalid_argument("ROC curve must start at (0,0) and end at (1,1)");
  }
  for (std::size_t i = 0; i < points.size(); ++i) {
    const auto& p = points[i];
    if (!(p.pair.alpha >= 0.0 && p.pair.alpha <= 1.0 && p.pair.beta >= 0.0 && p.pair.beta <= 1.0)) {
      throw std::invalid_argument("ROC rates must lie in [0,1]");
    }
    if (i == 0) continue;
    const auto& q = points[i - 1];
    if (!(p.threshold < q.threshold)) {
      throw std::invalid_argument("ROC thresholds must be strictly decreasing");
    }
    if (p.pair.alpha < q.pair.alpha || p.pair.beta < q.pair.beta) {
      throw std::invalid_argument("ROC rates must be nondecreasing as the threshold decreases");
    }
  }
  return RocCurve(std::move(points));
}

RocCurve RocCurve::from_rates(std::span<const RatePair> rates) {
  std::vector<RocPoint> pts;
  pts.reserve(rates.size());
  const double denom = rates.size() > 1 ? static_cast<double>(rates.size() - 1) : 1.0;
  for (std::size_t i = 0; i < rates.size(); ++i) {
    pts.push_back({1.0 - static_cast<double>(i) / denom, rates[i]});
  }
  return from_points(std::move(pts));
}

double RocCurve::tpr_at(double alpha) const {
  alpha = clamp01(alpha);
  const auto j = static_cast<std::size_t>(
      std::upper_bound(alphas_.begin(), alphas_.end(), alpha) - alphas_.begin());
  if (j >= points_.size()) return betas_.back();
  const auto i = j - 1;  // alphas_[0] == 0 <= alpha, so j >= 1
  return lerp(betas_[i], betas_[j], (alpha - alphas_[i]) / (alphas_[j] - alphas_[i]));
}

double RocCurve::fpr_at(double beta) const {
  beta = clamp01(beta);
  const auto j = static_cast<std::size_t>(
      std::lower_bound(betas_.begin(), betas_.end(), beta) - betas_.begin());
  if (j == 0) return alphas_.front();
  const auto i = j - 1;
  return lerp(alphas_[i], alphas_[j], (beta - betas_[i]) / (betas_[j] - betas_[i]));
}

double RocCurve::slope_at(double alpha) const {
  alpha = clamp01(alpha);
  // Segment (i, i+1) with alphas_[i] < alpha <= alphas_[i+1]; at alpha = 0 the
  // first segment of positive width.
  auto j = static_cast<std::size_t>(
      std::lower_bound(alphas_.begin(), alphas_.end(), alpha) - alphas_.begin());
  if (j == 0) {
    j = static_cast<std::size_t>(
        std::upper_bound(alphas_.begin(), alphas_.end(), alpha) - alphas_.begin());
  }
  if (j >= points_.size()) j = points_.size() - 1;
  const auto i = j - 1;
  return (betas_[j] - betas_[i]) / (alphas_[j] - alphas_[i]);
}

double RocCurve::threshold_at_fpr(double alpha) const {
  alpha = clamp01(alpha);
  const auto j = static_cast<std::size_t>(
      std::upper_bound(alphas_.begin(), alphas_.end(), alpha) - alphas_.begin());
  if (j >= points_.size()) return points_.back().threshold;
  const auto i = j - 1;
  return lerp(points_[i].threshold, points_[j].threshold,
              (alpha - alphas_[i]) / (alphas_[j] - alphas_[i]));
}

double RocCurve::threshold_at_tpr(double beta) const {
  beta = clamp01(beta);
  const auto j = static_cast<std::size_t>(
      std::lower_bound(betas_.begin(), betas_.end(), beta) - betas_.begin());
  if (j == 0) return points_.front().threshold;
  const auto i = j - 1;
  return lerp(points_[i].threshold, points_[j].threshold,
              (beta - betas_[i]) / (betas_[j] - betas_[i]));
}

RatePair RocCurve::pair_at_threshold(double c) const {
  if (c >= points_.front().threshold) return points_.front().pair;
  if (c <= points_.back().threshold) return points_.back().pair;
  // First knot with threshold <= c.
  const auto it = std::partition_point(points_.begin(), points_.end(),
                                       [c](const RocPoint& p) { return p.threshold > c; });
  const auto j = static_cast<std::size_t>(it - points_.begin());
  if (points_[j].threshold == c) return points_[j].pair;
  const auto i = j - 1;
  const double t = (points_[i].threshold - c) / (points_[i].threshold - points_[j].threshold);
  return {lerp(alphas_[i], alphas_[j], t), lerp(betas_[i], betas_[j], t)};
}

double RocCurve::distance_to(const RatePair& p) const {
  // (alpha, g(alpha)) and (g^{-1}(beta), beta) are curve points, so the
  // nearest point lies inside the box of half-width d around p.
  double d = std::min(std::abs(p.beta - tpr_at(p.alpha)), std::abs(p.alpha - fpr_at(p.beta)));
  d = std::min(d, std::hypot(p.alpha, p.beta));
  d = std::min(d, std::hypot(1.0 - p.alpha, 1.0 - p.beta));
  const auto first_a = std::lower_bound(alphas_.begin(), alphas_.end(), p.alpha - d) - alphas_.begin();
  const auto first_b = std::lower_bound(betas_.begin(), betas_.end(), p.beta - d) - betas_.begin();
  const auto last_a = std::upper_bound(alphas_.begin(), alphas_.end(), p.alpha + d) - alphas_.begin();
  const auto last_b = std::upper_bound(betas_.begin(), betas_.end(), p.beta + d) - betas_.begin();
  const auto lo = static_cast<std::size_t>(std::max<std::ptrdiff_t>(std::max(first_a, first_b) - 1, 0));
  const auto hi = std::min(static_cast<std::size_t>(std::min(last_a, last_b)), points_.size() - 1);
  // Knots are monotone in both rates, so a run of segments lies in the box
  // spanned by its end knots. Runs are visited nearest box first.
  constexpr std::size_t kBlock = 32;
  std::vector<std::pair<double, std::size_t>> blocks;
  for (std::size_t b = lo; b < hi; b += kBlock) {
    const std::size_t e = std::min(b + kBlock, hi);
    const double gx = std::max({alphas_[b] - p.alpha, p.alpha - alphas_[e], 0.0});
    const double gy = std::max({betas_[b] - p.beta, p.beta - betas_[e], 0.0});
    blocks.emplace_back(gx * gx + gy * gy, b);
  }
  std::sort(blocks.begin(), blocks.end());
  for (const auto& [gap2, b] : blocks) {
    if (gap2 >= d * d) break;
    const std::size_t e = std::min(b + kBlock, hi);
    for (std::size_t i = b; i < e; ++i) {
      d = std::min(d, segment_distance(p, points_[i].pair, points_[i + 1].pair));
    }
  }
  return d;
}

RocCurve build_roc(std::span<const double> scores, std::span<const int> labels) {
  if (scores.size() != labels.size()) throw std::invalid_argument("scores and labels differ in length");
  if (scores.size() < 2) throw std::invalid_argument("ROC needs at least two scored cases");
  std::vector<std::size_t> order(scores.size());
  std::iota(order.begin(), order.end(), 0);
  std::int64_t pos = 0;
  for (std::size_t i = 0; i < scores.size(); ++i) {
    if (std::isnan(scores[i])) throw std::invalid_argument("NaN score");
    if (labels[i] != 0 && labels[i] != 1) throw std::invalid_argument("labels must be 0/1");
    pos += labels[i];
  }
  const auto neg = static_cast<std::int64_t>(scores.size()) - pos;
  if (pos == 0 || neg == 0) throw std::invalid_argument("ROC needs both classes in the labels");
  std::sort(order.begin(), order.end(), [&](std::size_t a, std::size_t b) { return scores[a] > scores[b]; });

  std::vector<RocPoint> pts;
  std::int64_t tp = 0, fp = 0;
  std::size_t k = 0;
  while (k < order.size()) {
    const double s = scores[order[k]];
    // Rule 1(score > s) flags everything strictly above s.
    pts.push_back({s, {double(fp) / double(neg), double(tp) / double(pos)}});
    while (k < order.size() && scores[order[k]] == s) {
      (labels[order[k]] == 1 ? tp : fp) += 1;
      ++k;
    }
  }
  pts.push_back({std::nextafter(scores[order.back()], -std::numeric_limits<double>::infinity()),
                 {1.0, 1.0}});
  return RocCurve::from_points(std::move(pts));
}

double auc(const RocCurve& roc) {
  double area = 0.0;
  const auto& p = roc.points();
  for (std::size_t i = 1; i < p.size(); ++i) {
    area += (p[i].pair.alpha - p[i - 1].pair.alpha) * (p[i].pair.beta + p[i - 1].pair.beta) * 0.5;
  }
  return area;
}

bool strictly_below(const RocCurve& roc, const RatePair& p) {
  return roc.tpr_at(p.alpha) - p.beta > kOnCurveTol;
}

std::optional<DominatingSegment> dominating_segment(const RocCurve& roc, const RatePair& point) {
  if (!strictly_below(roc, point)) return std::nullopt;
  DominatingSegment seg;
  seg.a_pair = {point.alpha, roc.tpr_at(point.alpha)};
  seg.b_pair = {roc.fpr_at(point.beta), point.beta};
  seg.c_lower = roc.threshold_at_fpr(point.alpha);
  seg.c_upper = roc.threshold_at_tpr(point.beta);
  return seg;
}

double np_objective(const RatePair& pair, double phi, double eta) {
  if (!(phi > 0.0) || !(eta > 0.0)) throw std::invalid_argument("objective weights must be positive");
  return phi * pair.beta - eta * pair.alpha;
}

std::vector<std::size_t> check_concavity(const RocCurve& roc) {
  std::vector<std::size_t> violations;
  const auto& p = roc.points();
  constexpr double inf = std::numeric_limits<double>::infinity();
  std::optional<double> prev_slope;
  for (std::size_t i = 1; i < p.size(); ++i) {
    const double dx = p[i].pair.alpha - p[i - 1].pair.alpha;
    const double dy = p[i].pair.beta - p[i - 1].pair.beta;
    if (dx == 0.0 && dy == 0.0) continue;
    const double slope = dx == 0.0 ? inf : dy / dx;
    if (prev_slope && slope > *prev_slope + 1e-12) violations.push_back(i - 1);
    prev_slope = slope;
  }
  return violations;
}

void write_roc_csv(std::ostream& out, const RocCurve& roc) {
  out << "threshold,fpr,tpr\n";
  for (const auto& p : roc.points()) {
    out << format_number(p.threshold, 17) << ',' << format_number(p.pair.alpha) << ','
        << format_number(p.pair.beta) << '\n';
  }
}

void write_roc_csv(const std::string& path, const RocCurve& roc) {
  std::ofstream out(path);
  if (!out) throw std::runtime_error("cannot write " + path);
  write_roc_csv(out, roc);
}

RocCurve read_roc_csv(std::istream& in) {
  auto table = read_csv_table(in);
  const auto tc = table.column("threshold");
  const auto fc = table.column("fpr");
  const auto pc = table.column("tpr");
  std::vector<RocPoint> pts;
  pts.reserve(table.rows.size());
  for (const auto& row : table.rows) {
    pts.push_back({parse_double(row[tc], "threshold"),
                   {parse_double(row[fc], "fpr"), parse_double(row[pc], "tpr")}});
  }
  try {
    return RocCurve::from_points(std::move(pts));
  } catch (const std::invalid_argument& e) {
    throw ParseError(std::string("invalid ROC file: ") + e.what());
  }
}

RocCurve read_roc_csv(const std::string& path) {
  std::ifstream in(path);
  if (!in) throw ParseError("cannot open " + path);
  return read_roc_csv(in);
}

}  // namespace rocbench
