#include "rocbench/synthetic.hpp"

#include "rocbench/random.hpp"

#include <boost/math/distributions/normal.hpp>

#include <algorithm>
#include <cmath>
#include <fstream>
#include <numeric>
#include <stdexcept>

namespace rocbench {

using nlohmann::json;

double logistic(double z) {
  if (z >= 0.0) return 1.0 / (1.0 + std::exp(-z));
  const double e = std::exp(z);
  return e / (1.0 + e);
}

double logit(double p) { return std::log(p / (1.0 - p)); }

std::string maker_name(std::size_t index, std::size_t count) {
  const int width = std::max(4, static_cast<int>(std::to_string(count).size()));
  std::string digits = std::to_string(index + 1);
  return "m" + std::string(static_cast<std::size_t>(std::max(0, width - static_cast<int>(digits.size()))), '0') +
         digits;
}

namespace {

double normal_scale(double param, bool variance) { return variance ? std::sqrt(param) : param; }

Eigen::VectorXd vec(std::initializer_list<double> v) {
  Eigen::VectorXd out(static_cast<Eigen::Index>(v.size()));
  Eigen::Index i = 0;
  for (double x : v) out[i++] = x;
  return out;
}

}  // namespace

ComplementarityCohort gen_complementarity(const ComplementaritySpec& spec) {
  if (spec.n_makers == 0 || spec.n_cases == 0) throw std::invalid_argument("cohort sizes must be positive");
  if (spec.n_cases % spec.n_makers != 0) {
    throw std::invalid_argument("n_cases must be divisible by n_makers");
  }
  if (!(spec.capable_fraction >= 0.0 && spec.capable_fraction <= 1.0)) {
    throw std::invalid_argument("capable_fraction must lie in [0,1]");
  }
  const std::size_t per = spec.n_cases / spec.n_makers;
  const auto n_capable = static_cast<std::size_t>(std::llround(spec.capable_fraction * double(spec.n_makers)));

  ComplementarityCohort out;
  out.capable.assign(spec.n_makers, false);
  std::fill(out.capable.begin(), out.capable.begin() + static_cast<std::ptrdiff_t>(n_capable), true);
  if (spec.shuffle_groups) {
    Rng rng(substream_seed(spec.seed, "groups"));
    std::shuffle(out.capable.begin(), out.capable.end(), rng);
  }

  const double s1 = normal_scale(1.95, spec.variance_params);
  const double s2 = normal_scale(0.25, spec.variance_params);
  const double su = normal_scale(2.0, spec.variance_params);
  const std::uint64_t base = substream_seed(spec.seed, "complementarity");

  std::vector<CaseRecord> cases;
  cases.reserve(spec.n_cases);
  out.full_info.reserve(spec.n_cases);
  out.hidden.reserve(spec.n_cases);
  for (std::size_t j = 0; j < spec.n_makers; ++j) {
    Rng rng(substream_seed(base, static_cast<std::uint64_t>(j)));
    std::normal_distribution<double> n1(0.0, s1), n2(0.0, s2), nu(0.0, su);
    std::uniform_real_distribution<double> cut(0.4, 1.0);
    const std::string id = maker_name(j, spec.n_makers);
    for (std::size_t i = 0; i < per; ++i) {
      const double x1 = n1(rng);
      const double x2 = n2(rng);
      const double u = nu(rng);
      const double delta = uniform01(rng);
      const double c = cut(rng);
      const double p = logistic(x1 + x2 + u);
      const double q = logistic(-x1 + x2 + u);
      CaseRecord rec;
      rec.maker_id = id;
      rec.y = p > delta ? 1 : 0;
      rec.y_hat = (out.capable[j] ? p : q) > c ? 1 : 0;
      rec.features = spec.export_hidden ? vec({x1, x2, u}) : vec({x1, x2});
      cases.push_back(std::move(rec));
      out.full_info.push_back(p);
      out.hidden.push_back(u);
    }
  }
  out.data = CohortDataset(std::move(cases));
  return out;
}

PredictedDoctorCohort gen_predicted_doctor(const PredictedDoctorSpec& spec) {
  if (spec.scenario < 1 || spec.scenario > 3) {
    throw std::invalid_argument("unknown predicted-doctor scenario " + std::to_string(spec.scenario));
  }
  if (spec.n == 0) throw std::invalid_argument("n must be positive");
  if (!(spec.c0 > 0.0 && spec.c0 < 1.0)) throw std::invalid_argument("c0 must lie in (0,1)");
  const int sc = spec.scenario;
  const double L = logit(spec.c0);

  PredictedDoctorCohort out;
  // Ground truth on x, and P(q(x, U) > c0 | x) for the scenario's U.
  if (sc == 2) {
    out.truth = [](const Eigen::VectorXd& x) { return logistic(x[0] + x[1]); };
    out.predicted = [L](const Eigen::VectorXd& x) {
      const boost::math::normal_distribution<double> std_normal;
      return boost::math::cdf(boost::math::complement(std_normal, (L - x[0] + x[1]) / 2.0));
    };
  } else {
    out.truth = [](const Eigen::VectorXd& x) { return logistic(x[0]); };
    const double sign = sc == 1 ? 1.0 : -1.0;
    out.predicted = [L, sign](const Eigen::VectorXd& x) {
      return std::clamp((2.0 - (L - sign * x[0])) / 4.0, 0.0, 1.0);
    };
  }

  Rng rng(substream_seed(spec.seed, "predicted-doctor"));
  std::vector<CaseRecord> cases;
  cases.reserve(spec.n);
  for (std::size_t i = 0; i < spec.n; ++i) {
    Eigen::VectorXd x;
    double u = 0.0, q = 0.0;
    if (sc == 2) {
      const double x1 = std::normal_distribution<double>(0.0, 1.0)(rng);
      const double x2 = std::normal_distribution<double>(0.0, std::sqrt(0.5))(rng);
      u = std::normal_distribution<double>(0.0, 2.0)(rng);
      x = vec({x1, x2});
      q = logistic(x1 - x2 + u);
    } else {
      const double x1 = std::uniform_real_distribution<double>(-1.0, 1.0)(rng);
      u = std::uniform_real_distribution<double>(-2.0, 2.0)(rng);
      x = vec({x1});
      q = logistic((sc == 1 ? x1 : -x1) + u);
    }
    const double p = out.truth(x);
    const double delta = uniform01(rng);
    CaseRecord rec;
    rec.maker_id = "doctor";
    rec.y = p > delta ? 1 : 0;
    rec.y_hat = q > spec.c0 ? 1 : 0;
    out.truth_scores.push_back(p);
    out.doctor_scores.push_back(q);
    out.predicted_scores.push_back(out.predicted(x));
    if (spec.export_hidden) {
      x.conservativeResize(x.size() + 1);
      x[x.size() - 1] = u;
    }
    rec.features = std::move(x);
    cases.push_back(std::move(rec));
  }
  out.data = CohortDataset(std::move(cases));
  return out;
}

double incentive_cutoff(double x) {
  if (x < 0.25) return 0.0;
  if (x <= 0.75) return 2.0 * (x - 0.25);
  return 1.0;
}

IncentiveCohort gen_incentive_example(const IncentiveSpec& spec) {
  if (spec.n == 0) throw std::invalid_argument("n must be positive");
  Rng rng(substream_seed(spec.seed, "incentive"));
  std::vector<CaseRecord> cases;
  cases.reserve(spec.n);
  for (std::size_t i = 0; i < spec.n; ++i) {
    const double x = uniform01(rng);
    const double delta = uniform01(rng);
    CaseRecord rec;
    rec.maker_id = "doctor";
    rec.y = x > delta ? 1 : 0;
    rec.y_hat = x > incentive_cutoff(x) ? 1 : 0;
    rec.features = vec({x});
    cases.push_back(std::move(rec));
  }
  IncentiveCohort out;
  out.data = CohortDataset(std::move(cases));
  return out;
}

RatePair heterogeneous_pair(double c) {
  c = std::clamp(c, 0.0, 1.0);
  return {(1.0 - c) * (1.0 - c), 1.0 - c * c};
}

double heterogeneous_roc(double alpha) {
  alpha = std::clamp(alpha, 0.0, 1.0);
  return 2.0 * std::sqrt(alpha) - alpha;
}

HeterogeneousCohort gen_heterogeneous_cutoffs(const HeterogeneousCutoffSpec& spec) {
  HeterogeneousCohort out;
  if (!spec.cutoffs.empty()) {
    out.cutoffs = spec.cutoffs;
  } else {
    if (!(spec.low < spec.high)) throw std::invalid_argument("cutoff distribution is constant");
    if (spec.n_makers < 2) throw std::invalid_argument("need at least two makers");
    Rng rng(substream_seed(spec.seed, "cutoffs"));
    std::uniform_real_distribution<double> cut(spec.low, spec.high);
    for (std::size_t j = 0; j < spec.n_makers; ++j) out.cutoffs.push_back(cut(rng));
  }
  if (out.cutoffs.size() < 2) throw std::invalid_argument("need at least two makers");
  const auto [lo, hi] = std::minmax_element(out.cutoffs.begin(), out.cutoffs.end());
  if (*lo == *hi) throw std::invalid_argument("cutoff distribution is constant");
  for (double c : out.cutoffs) {
    if (!(c >= 0.0 && c <= 1.0)) throw std::invalid_argument("cutoffs must lie in [0,1]");
  }
  if (spec.cases_per_maker == 0) throw std::invalid_argument("cases_per_maker must be positive");

  const std::uint64_t base = substream_seed(spec.seed, "heterogeneous");
  const std::size_t J = out.cutoffs.size();
  std::vector<CaseRecord> cases;
  cases.reserve(J * spec.cases_per_maker);
  for (std::size_t j = 0; j < J; ++j) {
    Rng rng(substream_seed(base, static_cast<std::uint64_t>(j)));
    const std::string id = maker_name(j, J);
    for (std::size_t i = 0; i < spec.cases_per_maker; ++i) {
      const double x = uniform01(rng);
      const double delta = uniform01(rng);
      CaseRecord rec;
      rec.maker_id = id;
      rec.y = x > delta ? 1 : 0;
      rec.y_hat = x > out.cutoffs[j] ? 1 : 0;
      rec.features = vec({x});
      cases.push_back(std::move(rec));
    }
  }
  out.data = CohortDataset(std::move(cases));
  return out;
}

json to_json(const DgpSpec& spec) {
  return std::visit(
      [](const auto& s) -> json {
        using T = std::decay_t<decltype(s)>;
        if constexpr (std::is_same_v<T, ComplementaritySpec>) {
          return {{"kind", "complementarity"},    {"n_cases", s.n_cases},
                  {"n_makers", s.n_makers},       {"capable_fraction", s.capable_fraction},
                  {"variance_params", s.variance_params}, {"export_hidden", s.export_hidden},
                  {"shuffle_groups", s.shuffle_groups},   {"seed", s.seed}};
        } else if constexpr (std::is_same_v<T, PredictedDoctorSpec>) {
          return {{"kind", "predicted_doctor"}, {"scenario", s.scenario}, {"n", s.n},
                  {"c0", s.c0}, {"export_hidden", s.export_hidden}, {"seed", s.seed}};
        } else if constexpr (std::is_same_v<T, IncentiveSpec>) {
          return {{"kind", "incentive"}, {"n", s.n}, {"seed", s.seed}};
        } else {
          return {{"kind", "heterogeneous_cutoffs"}, {"n_makers", s.n_makers},
                  {"cases_per_maker", s.cases_per_maker}, {"low", s.low}, {"high", s.high},
                  {"cutoffs", s.cutoffs}, {"seed", s.seed}};
        }
      },
      spec);
}

DgpSpec dgp_from_json(const json& doc) {
  const auto kind = doc.at("kind").get<std::string>();
  if (kind == "complementarity") {
    ComplementaritySpec s;
    s.n_cases = doc.value("n_cases", s.n_cases);
    s.n_makers = doc.value("n_makers", s.n_makers);
    s.capable_fraction = doc.value("capable_fraction", s.capable_fraction);
    s.variance_params = doc.value("variance_params", s.variance_params);
    s.export_hidden = doc.value("export_hidden", s.export_hidden);
    s.shuffle_groups = doc.value("shuffle_groups", s.shuffle_groups);
    s.seed = doc.value("seed", s.seed);
    return s;
  }
  if (kind == "predicted_doctor") {
    PredictedDoctorSpec s;
    s.scenario = doc.value("scenario", s.scenario);
    s.n = doc.value("n", s.n);
    s.c0 = doc.value("c0", s.c0);
    s.export_hidden = doc.value("export_hidden", s.export_hidden);
    s.seed = doc.value("seed", s.seed);
    return s;
  }
  if (kind == "incentive") {
    IncentiveSpec s;
    s.n = doc.value("n", s.n);
    s.seed = doc.value("seed", s.seed);
    return s;
  }
  if (kind == "heterogeneous_cutoffs") {
    HeterogeneousCutoffSpec s;
    s.n_makers = doc.value("n_makers", s.n_makers);
    s.cases_per_maker = doc.value("cases_per_maker", s.cases_per_maker);
    s.low = doc.value("low", s.low);
    s.high = doc.value("high", s.high);
    s.cutoffs = doc.value("cutoffs", s.cutoffs);
    s.seed = doc.value("seed", s.seed);
    return s;
  }
  throw std::invalid_argument("unknown generator kind: " + kind);
}

void write_manifest(const std::string& path, const DgpSpec& spec) {
  std::ofstream out(path);
  if (!out) throw std::runtime_error("cannot write " + path);
  out << json{{"generator", to_json(spec)}}.dump(2) << '\n';
}

}  // namespace rocbench
