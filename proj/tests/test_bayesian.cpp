#include "rocbench/bayesian.hpp"
#include "support.hpp"

#include <doctest.h>

#include <cmath>
#include <sstream>

using namespace rocbench;
using rocbench::test::curve;
using rocbench::test::random_concave;

namespace {

RocCurve sqrt_curve(int knots) {
  std::vector<RatePair> pts;
  for (int i = 0; i <= knots; ++i) {
    const double a = double(i) / knots;
    pts.push_back({a, std::sqrt(a)});
  }
  return RocCurve::from_rates(pts);
}

PosteriorDraws repeated(const RatePair& p, int r) {
  return PosteriorDraws::from_thetas(std::vector<RatePair>(static_cast<std::size_t>(r), p));
}

PosteriorDraws random_draws(Rng& rng, int r) {
  // Cluster around a random centre so that some draws fall on each side of a curve.
  const RatePair c{0.1 + 0.8 * uniform01(rng), 0.1 + 0.8 * uniform01(rng)};
  std::vector<RatePair> v;
  for (int i = 0; i < r; ++i) {
    v.push_back({std::clamp(c.alpha + 0.2 * (uniform01(rng) - 0.5), 0.0, 1.0),
                 std::clamp(c.beta + 0.2 * (uniform01(rng) - 0.5), 0.0, 1.0)});
  }
  return PosteriorDraws::from_thetas(v);
}

}  // namespace

TEST_CASE("posterior_params") {
  const auto p = posterior_params(Eigen::Vector4d::Constant(0.1), {3, 1, 2, 4});
  CHECK(p.gamma[0] == doctest::Approx(3.1));
  CHECK(p.gamma[1] == doctest::Approx(1.1));
  CHECK(p.gamma[2] == doctest::Approx(2.1));
  CHECK(p.gamma[3] == doctest::Approx(4.1));
  const Eigen::Vector4d prior(0.1, 0.2, 0.3, 0.4);
  CHECK(posterior_params(prior, {}).gamma == prior);
  CHECK_THROWS(posterior_params(Eigen::Vector4d::Zero(), {1, 1, 1, 1}));
}

TEST_CASE("sample_posterior") {
  SUBCASE("uniform Dirichlet") {
    const auto d = sample_posterior({Eigen::Vector4d::Ones()}, 100000, 1);
    const Eigen::Vector4d mean = d.ts.colwise().mean().transpose();
    CHECK((mean.array() - 0.25).abs().maxCoeff() < 0.01);
  }
  SUBCASE("posterior mean at gamma 0.1") {
    const auto params = posterior_params(Eigen::Vector4d::Constant(0.1), {3, 1, 2, 4});
    const auto d = sample_posterior(params, 100000, 2);
    const Eigen::Vector4d mean = d.ts.colwise().mean().transpose();
    CHECK((mean - params.mean()).cwiseAbs().maxCoeff() <= 0.005);
  }
  SUBCASE("draws map through the t to theta transform exactly") {
    const auto d = sample_posterior({Eigen::Vector4d(2, 3, 4, 5)}, 500, 3);
    for (Eigen::Index r = 0; r < d.size(); ++r) {
      const Eigen::Vector4d t = d.ts.row(r).transpose();
      CHECK((t.array() > 0).all());
      CHECK(t.sum() == doctest::Approx(1.0));
      CHECK(d.alpha[r] == t[1] / (t[1] + t[3]));
      CHECK(d.beta[r] == t[0] / (t[0] + t[2]));
    }
    CHECK(theta_from_t(Eigen::Vector4d::Constant(0.25)) == RatePair{0.5, 0.5});
  }
  SUBCASE("determinism") {
    const DirichletParams p{Eigen::Vector4d(1, 2, 3, 4)};
    CHECK(sample_posterior(p, 1000, 7).ts == sample_posterior(p, 1000, 7).ts);
    CHECK_FALSE(sample_posterior(p, 1000, 7).ts == sample_posterior(p, 1000, 8).ts);
  }
  SUBCASE("matches an independent sampler") {
    const auto params = posterior_params(Eigen::Vector4d::Constant(0.1), {30, 10, 20, 40});
    const auto d = sample_posterior(params, 100000, 4);
    std::mt19937 rng(99);
    double other = 0;
    const int R = 100000;
    for (int r = 0; r < R; ++r) {
      const double t2 = std::gamma_distribution<double>(params.gamma[1])(rng);
      const double t4 = std::gamma_distribution<double>(params.gamma[3])(rng);
      other += t2 / (t2 + t4) / R;
    }
    CHECK(std::abs(d.alpha.mean() - other) <= 0.005);
  }
}

TEST_CASE("prob_below_roc") {
  const auto roc = curve({{0, 0}, {0.2, 0.6}, {1, 1}});
  CHECK(prob_below_roc(repeated({0.9, 0.1}, 50), roc) == 1.0);
  const auto top = curve({{0, 0}, {0, 1}, {1, 1}});
  Rng rng(5);
  CHECK(prob_below_roc(random_draws(rng, 200), top) == 1.0);

  const auto low = curve({{0, 0}, {0.5, 0.55}, {1, 1}});
  double prev = 1.0;
  for (std::int64_t n : {100, 1000, 10000}) {
    const auto d = sample_posterior(posterior_params(Eigen::Vector4d::Constant(0.1), {n * 8 / 10, n / 10, n * 2 / 10, n * 9 / 10}),
                                    4000, 6);
    const double p = prob_below_roc(d, low);
    CHECK(p <= prev + 0.02);
    prev = p;
  }
  CHECK(prev < 0.01);
}

TEST_CASE("max_dominance") {
  SUBCASE("single point under the square-root curve") {
    const auto roc = sqrt_curve(1000);
    const auto d = repeated({0.6, 0.2}, 100);
    const auto grid = candidate_grid(roc, d);
    const auto res = max_dominance(d, roc, grid);
    CHECK(res.q_max == 1.0);
    REQUIRE(res.alpha_d.has_value());
    double expect = 2;
    for (double a : grid) {
      if (a <= 0.6 && roc.tpr_at(a) >= 0.2) expect = std::min(expect, a);
    }
    CHECK(*res.alpha_d == expect);
    CHECK(*res.alpha_d >= 0.04 - 1e-12);
  }
  SUBCASE("draws above the curve") {
    const auto res = max_dominance(repeated({0.2, 0.4}, 50), curve({{0, 0}, {1, 1}}));
    CHECK(res.q_max == 0.0);
    CHECK_FALSE(res.alpha_d.has_value());
  }
  SUBCASE("grid contents") {
    Rng rng(7);
    const auto roc = random_concave(rng, 5);
    const auto d = random_draws(rng, 300);
    const auto grid = candidate_grid(roc, d, 512);
    CHECK(std::is_sorted(grid.begin(), grid.end()));
    for (int i = 0; i < 512; ++i) CHECK(std::binary_search(grid.begin(), grid.end(), i / 511.0));
    for (Eigen::Index r = 0; r < d.size(); ++r) CHECK(std::binary_search(grid.begin(), grid.end(), d.alpha[r]));
    for (const auto& k : roc.points()) CHECK(std::binary_search(grid.begin(), grid.end(), k.pair.alpha));
  }
  SUBCASE("matches a recount over the grid") {
    Rng rng(8);
    for (int k = 0; k < 20; ++k) {
      const auto roc = random_concave(rng, 2 + k % 6);
      const auto d = random_draws(rng, 400);
      const auto grid = candidate_grid(roc, d);
      std::int64_t best = 0;
      double best_a = -1;
      for (double a : grid) {
        std::int64_t s = 0;
        for (Eigen::Index r = 0; r < d.size(); ++r) s += d.alpha[r] >= a && d.beta[r] <= roc.tpr_at(a);
        if (s > best) {
          best = s;
          best_a = a;
        }
      }
      const auto res = max_dominance(d, roc, grid);
      CHECK(res.q_max == best / 400.0);
      if (best > 0) CHECK(*res.alpha_d == best_a);
    }
  }
  SUBCASE("q_max does not grow as the curve is lowered") {
    Rng rng(9);
    const auto base = random_concave(rng, 6);
    const auto d = random_draws(rng, 500);
    double prev = 2;
    for (double s : {1.0, 0.8, 0.6, 0.4, 0.2, 0.0}) {
      std::vector<RatePair> pts;
      for (const auto& p : base.points()) pts.push_back({p.pair.alpha, s * p.pair.beta + (1 - s) * p.pair.alpha});
      const auto q = max_dominance(d, RocCurve::from_rates(pts)).q_max;
      CHECK(q <= prev);
      prev = q;
    }
  }
}

TEST_CASE("loss_eval") {
  const auto roc = curve({{0, 0}, {0.2, 0.7}, {1, 1}});
  const RatePair h{0.5, 0.5};
  const RatePair not_dom{0.6, roc.tpr_at(0.6)};
  for (auto kind : named_loss_kinds()) CHECK(loss_eval(kind, not_dom, h, roc) == 1.0);

  const RatePair on_diag{0.4, 0.4};
  CHECK(loss_eval(LossKind::DiagonalVertical, {0.3, roc.tpr_at(0.3)}, on_diag, roc) == 0.0);
  CHECK(loss_eval(LossKind::DiagonalHorizontal, {0.3, roc.tpr_at(0.3)}, on_diag, roc) == 0.0);

  SUBCASE("Euclidean against a dense nearest-point scan") {
    const RatePair m{0.5, roc.tpr_at(0.5)};
    double d = 10;
    for (int i = 0; i <= 100000; ++i) {
      const double a = i / 100000.0;
      d = std::min(d, std::hypot(a - h.alpha, roc.tpr_at(a) - h.beta));
    }
    CHECK(loss_eval(LossKind::EuclideanToRoc, m, h, roc) == doctest::Approx(1 - d).epsilon(1e-6));
  }
  SUBCASE("decomposition losses lie in [0,1] between diagonal and curve") {
    Rng rng(10);
    for (int k = 0; k < 500; ++k) {
      const double a = 0.05 + 0.9 * uniform01(rng);
      const RatePair th{a, a + (roc.tpr_at(a) - a) * uniform01(rng)};
      const double am = th.alpha * uniform01(rng);
      const RatePair m{am, roc.tpr_at(am)};
      for (auto kind : named_loss_kinds()) {
        const double l = loss_eval(kind, m, th, roc);
        CHECK(l >= 0.0);
        CHECK(l <= 1.0);
      }
    }
  }
  SUBCASE("complement-set kinds") {
    const RatePair m{0.3, roc.tpr_at(0.3)};
    const RatePair t{0.45, 0.5};
    CHECK(loss_eval(LossKind::ComplementSetDistance, m, t, roc) ==
          doctest::Approx(1 - std::min(0.45 - 0.3, m.beta - 0.5)));
    CHECK(loss_eval(LossKind::ComplementVertical, m, t, roc) == doctest::Approx((0.5 - 0.3) / (m.beta - 0.3)));
    CHECK(loss_eval(LossKind::ComplementHorizontal, m, t, roc) == doctest::Approx((m.beta - 0.45) / (m.beta - 0.3)));
  }
  SUBCASE("pluggable") {
    const PluggableLoss pl{[](const RatePair& m, const RatePair& h) { return m.alpha + h.beta; },
                           [](const RatePair& m, double bh) { return m.beta - bh; }};
    const RatePair m{0.3, roc.tpr_at(0.3)};
    CHECK(loss_eval(LossKind::Pluggable, m, {0.45, 0.5}, roc, &pl) == doctest::Approx(-(m.beta - 0.5)));
    CHECK(loss_eval(LossKind::Pluggable, m, {0.1, 0.5}, roc, &pl) == doctest::Approx(0.8));
    CHECK_THROWS(loss_eval(LossKind::Pluggable, m, {0.1, 0.5}, roc));
  }
  CHECK(loss_kind_from_string(to_string(LossKind::ComplementHorizontal)) == LossKind::ComplementHorizontal);
  CHECK_THROWS(loss_kind_from_string("quadratic"));
}

TEST_CASE("sweep profile equals the brute-force profile for every named kind") {
  Rng rng(11);
  for (int k = 0; k < 12; ++k) {
    const auto roc = random_concave(rng, 2 + k % 7);
    const auto d = random_draws(rng, 300);
    const auto grid = candidate_grid(roc, d, 64);
    for (auto kind : named_loss_kinds()) {
      const auto fast = posterior_loss_profile(d, roc, kind, grid);
      const auto slow = posterior_loss_profile_brute(d, roc, kind, grid);
      REQUIRE(fast.size() == slow.size());
      double worst = 0;
      for (std::size_t i = 0; i < fast.size(); ++i) worst = std::max(worst, std::abs(fast[i] - slow[i]));
      INFO(to_string(kind));
      CHECK(worst < 1e-9);
    }
  }
}

TEST_CASE("min_posterior_loss") {
  Rng rng(12);
  SUBCASE("baseline equals one minus q_max at alpha_d") {
    for (int k = 0; k < 10; ++k) {
      const auto roc = random_concave(rng, 4);
      const auto d = random_draws(rng, 500);
      const auto grid = candidate_grid(roc, d);
      const auto dom = max_dominance(d, roc, grid);
      const auto m = min_posterior_loss(d, roc, LossKind::BaselineIndicator, grid);
      CHECK(m.value == 1.0 - dom.q_max);
      if (dom.alpha_d) CHECK(m.theta_m0.alpha == *dom.alpha_d);
    }
  }
  SUBCASE("point mass below the curve") {
    const auto roc = curve({{0, 0}, {0.2, 0.7}, {1, 1}});
    const auto d = repeated({0.6, 0.5}, 20);
    const auto grid = candidate_grid(roc, d);
    const auto m = min_posterior_loss(d, roc, LossKind::BaselineIndicator, grid);
    CHECK(m.value == 0.0);
    double first = 2;
    for (double a : grid) {
      if (a <= 0.6 && roc.tpr_at(a) >= 0.5) first = std::min(first, a);
    }
    CHECK(m.theta_m0.alpha == first);
  }
  SUBCASE("refining the grid barely moves the minimum") {
    for (int k = 0; k < 5; ++k) {
      const auto roc = random_concave(rng, 5);
      const auto d = random_draws(rng, 1000);
      for (auto kind : named_loss_kinds()) {
        const double coarse = min_posterior_loss(d, roc, kind, 512).value;
        const double fine = min_posterior_loss(d, roc, kind, 1024).value;
        INFO(to_string(kind));
        CHECK(std::abs(coarse - fine) <= 1.0 / 1000 + 1e-6);
      }
    }
  }
  SUBCASE("pluggable uses direct evaluation") {
    const auto roc = curve({{0, 0}, {0.2, 0.7}, {1, 1}});
    const auto d = random_draws(rng, 200);
    const PluggableLoss pl{[](const RatePair&, const RatePair&) { return 1.0; },
                           [](const RatePair& m, double bh) { return m.beta - bh; }};
    const auto grid = candidate_grid(roc, d, 32);
    const auto prof = posterior_loss_profile_brute(d, roc, LossKind::Pluggable, grid, &pl);
    const auto m = min_posterior_loss(d, roc, LossKind::Pluggable, grid, &pl);
    CHECK(m.value == *std::min_element(prof.begin(), prof.end()));
  }
}

TEST_CASE("replace_decision") {
  const auto roc = curve({{0, 0}, {0.2, 0.7}, {1, 1}});
  const auto with_share = [&](int dominated) {
    std::vector<RatePair> v(static_cast<std::size_t>(dominated), RatePair{0.6, 0.2});
    v.resize(10000, RatePair{0.01, 0.99});
    return PosteriorDraws::from_thetas(v);
  };
  const auto yes = replace_decision(with_share(9657), roc, LossKind::BaselineIndicator, 0.95);
  CHECK(yes.dominance.q_max == doctest::Approx(0.9657));
  CHECK(yes.replace);
  REQUIRE(yes.threshold.has_value());
  CHECK(*yes.threshold == doctest::Approx(roc.threshold_at_fpr(*yes.dominance.alpha_d)));

  const auto no = replace_decision(with_share(3179), roc, LossKind::BaselineIndicator, 0.95);
  CHECK(no.dominance.q_max == doctest::Approx(0.3179));
  CHECK_FALSE(no.replace);
  CHECK(no.threshold.has_value());

  CHECK_FALSE(replace_decision(with_share(9999), roc, LossKind::BaselineIndicator, 1.0).replace);
  CHECK(replace_decision(with_share(10000), roc, LossKind::BaselineIndicator, 1.0).replace);
  CHECK_THROWS(replace_decision(with_share(10), roc, LossKind::BaselineIndicator, 0.0));
  CHECK_THROWS(replace_decision(with_share(10), roc, LossKind::BaselineIndicator, 1.5));

  const auto above = replace_decision(repeated({0.1, 0.95}, 10), roc, LossKind::BaselineIndicator, 0.95);
  CHECK(above.above_curve);
  CHECK_FALSE(above.replace);
  CHECK(*above.threshold == doctest::Approx(roc.threshold_at_fpr(0.1)));

  for (auto kind : named_loss_kinds()) {
    const auto v = replace_decision(with_share(9900), roc, kind, 0.95);
    CHECK(v.replace == (v.minimum.value <= 1.0 - 0.95));
    if (kind != LossKind::BaselineIndicator) {
      CHECK(*v.threshold == doctest::Approx(roc.threshold_at_fpr(v.minimum.theta_m0.alpha)));
    }
  }
}

TEST_CASE("reversed_null_retain") {
  const auto low = curve({{0, 0}, {0.5, 0.55}, {1, 1}});
  CHECK(reversed_null_retain(repeated({0.2, 0.9}, 50), low, 0.95, RetainMethod::Dominate));
  CHECK(reversed_null_retain(repeated({0.2, 0.9}, 50), low, 0.95, RetainMethod::Above));
  CHECK_FALSE(reversed_null_retain(repeated({0.8, 0.3}, 50), low, 0.95, RetainMethod::Dominate));
  CHECK_FALSE(reversed_null_retain(repeated({0.8, 0.3}, 50), low, 0.95, RetainMethod::Above));

  Rng rng(14);
  for (int k = 0; k < 200; ++k) {
    const auto roc = random_concave(rng, 4);
    const auto d = random_draws(rng, 100);
    for (double level : {0.5, 0.8, 0.95}) {
      if (reversed_null_retain(d, roc, level, RetainMethod::Dominate)) {
        CHECK(reversed_null_retain(d, roc, level, RetainMethod::Above));
      }
    }
  }
}

TEST_CASE("benchmark_bayes and CSV output") {
  const auto roc = curve({{0, 0}, {0.2, 0.7}, {1, 1}});
  BayesOptions opt;
  opt.draws = 2000;
  const auto v = benchmark_bayes("m7", {100, 150, 200, 350}, roc, opt, 5);
  CHECK(v.maker_id == "m7");
  CHECK(v.replace);
  CHECK(benchmark_bayes("m7", {100, 150, 200, 350}, roc, opt, 5).dominance.q_max == v.dominance.q_max);

  std::ostringstream out;
  write_bayes_csv(out, std::vector<BayesVerdict>{v});
  CHECK(out.str().rfind("maker_id,q_max,alpha_d,loss_kind,min_loss,replace,threshold\nm7,", 0) == 0);

  std::ostringstream draws;
  write_draws_csv(draws, sample_posterior({Eigen::Vector4d::Ones()}, 3, 1));
  std::istringstream lines(draws.str());
  std::string line;
  int count = 0;
  while (std::getline(lines, line)) ++count;
  CHECK(count == 4);
  CHECK(draws.str().rfind("t1,t2,t3,t4,alpha,beta\n", 0) == 0);
}
