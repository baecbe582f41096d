#include "rocbench/synthetic.hpp"
#include "support.hpp"

#include <doctest.h>

#include <boost/math/distributions/normal.hpp>

#include <cmath>

using namespace rocbench;

namespace {

bool same_cases(const CohortDataset& a, const CohortDataset& b) {
  if (a.size() != b.size()) return false;
  for (std::size_t i = 0; i < a.size(); ++i) {
    const auto& x = a.cases()[i];
    const auto& y = b.cases()[i];
    if (x.maker_id != y.maker_id || x.y != y.y || x.y_hat != y.y_hat || x.features != y.features) return false;
  }
  return true;
}

double sample_var(const CohortDataset& d, Eigen::Index k) {
  double m = 0, s = 0;
  for (const auto& c : d.cases()) m += c.features[k];
  m /= double(d.size());
  for (const auto& c : d.cases()) s += (c.features[k] - m) * (c.features[k] - m);
  return s / double(d.size() - 1);
}

}  // namespace

TEST_CASE("logistic and logit") {
  CHECK(logistic(0.0) == 0.5);
  for (double p : {0.01, 0.3, 0.7, 0.99}) CHECK(logistic(logit(p)) == doctest::Approx(p));
  CHECK(logistic(-800.0) >= 0.0);
  CHECK(logistic(800.0) <= 1.0);
}

TEST_CASE("maker_name") {
  CHECK(maker_name(0, 2000) == "m0001");
  CHECK(maker_name(1999, 2000) == "m2000");
  CHECK(maker_name(0, 10000) == "m00001");
  CHECK(maker_name(9999, 10000) == "m10000");
}

TEST_CASE("complementarity cohort") {
  ComplementaritySpec s;
  s.n_cases = 20000;
  s.n_makers = 20;
  s.seed = 3;
  const auto c = gen_complementarity(s);
  CHECK(c.data.size() == 20000);
  REQUIRE(c.data.makers().size() == 20);
  for (std::size_t j = 0; j < 20; ++j) {
    CHECK(c.data.makers()[j].maker_id == maker_name(j, 20));
    CHECK(c.data.makers()[j].indices.size() == 1000);
    CHECK(c.capable[j] == (j < 8));
  }
  CHECK(c.data.feature_dim() == 2);
  CHECK(std::abs(c.data.base_rate_hat() - 0.5) < 0.02);
  CHECK(sample_var(c.data, 0) == doctest::Approx(1.95).epsilon(0.05));
  CHECK(sample_var(c.data, 1) == doctest::Approx(0.25).epsilon(0.05));

  // Cutoffs lie in [0.4, 1): a capable maker never flags a case whose full-information score is at most 0.4.
  for (std::size_t j = 0; j < 8; ++j) {
    for (auto i : c.data.makers()[j].indices) {
      if (c.full_info[i] <= 0.4) CHECK(c.data.cases()[i].y_hat == 0);
    }
  }
  // Labels follow the full-information score.
  double hi = 0, lo = 0, nh = 0, nl = 0;
  for (std::size_t i = 0; i < c.data.size(); ++i) {
    if (c.full_info[i] > 0.9) hi += c.data.cases()[i].y, ++nh;
    if (c.full_info[i] < 0.1) lo += c.data.cases()[i].y, ++nl;
  }
  CHECK(hi / nh > 0.9);
  CHECK(lo / nl < 0.1);

  SUBCASE("standard deviation reading") {
    s.variance_params = false;
    CHECK(sample_var(gen_complementarity(s).data, 0) == doctest::Approx(1.95 * 1.95).epsilon(0.05));
  }
  SUBCASE("hidden feature export") {
    s.export_hidden = true;
    const auto h = gen_complementarity(s);
    CHECK(h.data.feature_dim() == 3);
    for (std::size_t i = 0; i < 50; ++i) CHECK(h.data.cases()[i].features[2] == h.hidden[i]);
  }
  SUBCASE("shuffled groups keep the count") {
    s.shuffle_groups = true;
    const auto g = gen_complementarity(s);
    CHECK(std::count(g.capable.begin(), g.capable.end(), true) == 8);
  }
  SUBCASE("determinism") {
    CHECK(same_cases(gen_complementarity(s).data, c.data));
    s.seed = 4;
    CHECK_FALSE(same_cases(gen_complementarity(s).data, c.data));
  }
  SUBCASE("invalid sizes") {
    s.n_cases = 20001;
    CHECK_THROWS_AS(gen_complementarity(s), std::invalid_argument);
    s.n_cases = 20000;
    s.capable_fraction = 1.5;
    CHECK_THROWS_AS(gen_complementarity(s), std::invalid_argument);
    s.capable_fraction = 0.375;
    s.n_makers = 0;
    CHECK_THROWS_AS(gen_complementarity(s), std::invalid_argument);
  }
}

TEST_CASE("complementarity defaults") {
  const auto c = gen_complementarity(ComplementaritySpec{});
  CHECK(c.data.size() == 600000);
  CHECK(c.data.makers().size() == 2000);
  CHECK(c.data.makers().front().indices.size() == 300);
  CHECK(std::count(c.capable.begin(), c.capable.end(), true) == 750);
}

TEST_CASE("predicted doctor") {
  // Monte Carlo over the hidden U at fixed x, for each scenario's closed form.
  Rng rng(21);
  for (int sc : {1, 2, 3}) {
    PredictedDoctorSpec s;
    s.scenario = sc;
    s.n = 2000;
    s.seed = 5;
    const auto d = gen_predicted_doctor(s);
    CHECK(d.data.size() == 2000);
    CHECK(d.data.makers().size() == 1);
    CHECK(d.data.feature_dim() == (sc == 2 ? 2 : 1));
    for (std::size_t i = 0; i < d.data.size(); ++i) {
      const auto& c = d.data.cases()[i];
      CHECK(c.y_hat == (d.doctor_scores[i] > 0.7 ? 1 : 0));
      CHECK(d.truth_scores[i] == d.truth(c.features));
      CHECK(d.predicted_scores[i] == d.predicted(c.features));
    }
    for (int k = 0; k < 5; ++k) {
      const auto& x = d.data.cases()[static_cast<std::size_t>(k) * 100].features;
      int hits = 0;
      const int M = 200000;
      for (int m = 0; m < M; ++m) {
        double q;
        if (sc == 2) {
          q = logistic(x[0] - x[1] + std::normal_distribution<double>(0.0, 2.0)(rng));
        } else {
          const double u = -2.0 + 4.0 * uniform01(rng);
          q = logistic((sc == 1 ? x[0] : -x[0]) + u);
        }
        hits += q > 0.7;
      }
      CHECK(std::abs(d.predicted(x) - double(hits) / M) < 0.01);
    }
    if (sc != 2) {
      Eigen::VectorXd x(1);
      x << 0.3;
      CHECK(d.truth(x) == doctest::Approx(logistic(0.3)));
    }
  }
  PredictedDoctorSpec bad;
  bad.scenario = 4;
  CHECK_THROWS(gen_predicted_doctor(bad));
  bad.scenario = 1;
  bad.c0 = 1.0;
  CHECK_THROWS(gen_predicted_doctor(bad));

  PredictedDoctorSpec h;
  h.n = 100;
  h.export_hidden = true;
  CHECK(gen_predicted_doctor(h).data.feature_dim() == 2);
}

TEST_CASE("incentive example") {
  CHECK(incentive_cutoff(0.1) == 0.0);
  CHECK(incentive_cutoff(0.5) == 0.5);
  CHECK(incentive_cutoff(0.75) == 1.0);
  CHECK(incentive_cutoff(0.9) == 1.0);
  // The rule flags x > c(x): everything below 1/4, nothing above.
  for (double x : {0.05, 0.2, 0.3, 0.6, 0.8}) CHECK((x > incentive_cutoff(x)) == (x < 0.5));

  const auto c = gen_incentive_example({200000, 8});
  double tp = 0, fp = 0;
  for (const auto& r : c.data.cases()) {
    tp += r.y * r.y_hat;
    fp += (1 - r.y) * r.y_hat;
  }
  const double n = double(c.data.size());
  CHECK(std::abs(tp / n - c.moment_tp) < 0.004);
  CHECK(std::abs(fp / n - c.moment_fp) < 0.004);
  const auto pair = rate_pair(confusion_counts(c.data.cases()));
  CHECK(std::abs(pair.beta - c.analytic_pair.beta) < 0.01);
  CHECK(std::abs(pair.alpha - c.analytic_pair.alpha) < 0.01);
  // Analytic moments: integral of x and of (1 - x) over x < 1/2.
  CHECK(c.moment_tp == doctest::Approx(0.125));
  CHECK(c.moment_fp == doctest::Approx(0.375));
  CHECK(c.analytic_pair == RatePair{0.75, 0.25});
  CHECK_THROWS(gen_incentive_example({0, 1}));
}

TEST_CASE("heterogeneous cutoffs") {
  SUBCASE("analytic pair against numeric integration") {
    for (double c : {0.0, 0.2, 0.5, 0.9}) {
      double tp = 0, fp = 0;
      const int M = 100000;
      for (int i = 0; i < M; ++i) {
        const double x = (i + 0.5) / M;
        if (x > c) tp += x / M, fp += (1 - x) / M;
      }
      const auto p = heterogeneous_pair(c);
      CHECK(p.beta == doctest::Approx(tp / 0.5).epsilon(1e-6));
      CHECK(p.alpha == doctest::Approx(fp / 0.5).epsilon(1e-6));
      CHECK(heterogeneous_roc(p.alpha) == doctest::Approx(p.beta));
    }
  }
  SUBCASE("two makers pool strictly below the curve") {
    HeterogeneousCutoffSpec s;
    s.cutoffs = {0.3, 0.7};
    s.cases_per_maker = 200000;
    s.seed = 2;
    const auto h = gen_heterogeneous_cutoffs(s);
    CHECK(h.data.makers().size() == 2);
    const auto a = heterogeneous_pair(0.3), b = heterogeneous_pair(0.7);
    const RatePair mean{(a.alpha + b.alpha) / 2, (a.beta + b.beta) / 2};
    CHECK(heterogeneous_roc(mean.alpha) - mean.beta > 0.03);
    const auto pooled = rate_pair(confusion_counts(h.data.cases()));
    CHECK(std::abs(pooled.alpha - mean.alpha) < 0.005);
    CHECK(std::abs(pooled.beta - mean.beta) < 0.005);
    CHECK(pooled.beta < heterogeneous_roc(pooled.alpha));
  }
  SUBCASE("drawn cutoffs") {
    HeterogeneousCutoffSpec s;
    s.n_makers = 10;
    s.cases_per_maker = 100;
    const auto h = gen_heterogeneous_cutoffs(s);
    CHECK(h.cutoffs.size() == 10);
    for (double c : h.cutoffs) CHECK((c >= 0.2 && c <= 0.8));
    for (const auto& r : h.data.cases()) {
      const auto j = std::stoul(r.maker_id.substr(1)) - 1;
      CHECK(r.y_hat == (r.features[0] > h.cutoffs[j] ? 1 : 0));
    }
  }
  SUBCASE("constant cutoffs are rejected") {
    HeterogeneousCutoffSpec s;
    s.cutoffs = {0.5, 0.5};
    CHECK_THROWS(gen_heterogeneous_cutoffs(s));
    s.cutoffs.clear();
    s.low = s.high = 0.5;
    CHECK_THROWS(gen_heterogeneous_cutoffs(s));
    s.low = 0.2;
    s.n_makers = 1;
    CHECK_THROWS(gen_heterogeneous_cutoffs(s));
  }
}

TEST_CASE("generator specs round-trip through JSON") {
  ComplementaritySpec a;
  a.n_cases = 1000;
  a.n_makers = 10;
  a.variance_params = false;
  a.seed = 9;
  PredictedDoctorSpec b;
  b.scenario = 3;
  b.c0 = 0.6;
  IncentiveSpec c{5000, 4};
  HeterogeneousCutoffSpec d;
  d.cutoffs = {0.1, 0.9};
  for (const DgpSpec& s : {DgpSpec{a}, DgpSpec{b}, DgpSpec{c}, DgpSpec{d}}) {
    const auto j = to_json(s);
    CHECK(to_json(dgp_from_json(j)) == j);
    CHECK(dgp_from_json(j).index() == s.index());
  }
  CHECK_THROWS(dgp_from_json({{"kind", "mystery"}}));
}
