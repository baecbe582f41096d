#pragma once

#include "rocbench/cases.hpp"

#include <json.hpp>

#include <cstdint>
#include <functional>
#include <string>
#include <variant>
#include <vector>

namespace rocbench {

double logistic(double z);
double logit(double p);

struct ComplementaritySpec {
  std::size_t n_cases = 600000;
  std::size_t n_makers = 2000;
  double capable_fraction = 0.375;
  /// Second normal parameters read as variances; false reads them as standard deviations.
  bool variance_params = true;
  /// Adds the hidden feature u as a third exported column.
  bool export_hidden = false;
  /// Assigns capable makers at random instead of by index.
  bool shuffle_groups = false;
  std::uint64_t seed = 0;
};

struct PredictedDoctorSpec {
  int scenario = 1;
  std::size_t n = 100000;
  double c0 = 0.7;
  bool export_hidden = false;
  std::uint64_t seed = 0;
};

struct IncentiveSpec {
  std::size_t n = 1000000;
  std::uint64_t seed = 0;
};

struct HeterogeneousCutoffSpec {
  std::size_t n_makers = 50;
  std::size_t cases_per_maker = 10000;
  /// Cutoffs drawn from U(low, high) unless `cutoffs` lists them explicitly.
  double low = 0.2;
  double high = 0.8;
  std::vector<double> cutoffs;
  std::uint64_t seed = 0;
};

using DgpSpec = std::variant<ComplementaritySpec, PredictedDoctorSpec, IncentiveSpec, HeterogeneousCutoffSpec>;

nlohmann::json to_json(const DgpSpec& spec);
DgpSpec dgp_from_json(const nlohmann::json& doc);

/// Opaque maker ids m0001, m0002, ... padded to the width of `count`.
std::string maker_name(std::size_t index, std::size_t count);

struct ComplementarityCohort {
  CohortDataset data;           // features (x1, x2[, u])
  std::vector<double> full_info;  // p(x1, x2, u) per case
  std::vector<double> hidden;     // u per case
  std::vector<bool> capable;      // per maker, in maker order
};

ComplementarityCohort gen_complementarity(const ComplementaritySpec& spec);

struct PredictedDoctorCohort {
  CohortDataset data;                  // a single maker; features are x
  std::vector<double> truth_scores;    // ground-truth propensity on x
  std::vector<double> doctor_scores;   // the doctor's full-information score q(x, u)
  std::vector<double> predicted_scores;  // E[1(q(x, U) > c0) | x] in closed form
  std::function<double(const Eigen::VectorXd&)> truth;
  std::function<double(const Eigen::VectorXd&)> predicted;
};

PredictedDoctorCohort gen_predicted_doctor(const PredictedDoctorSpec& spec);

struct IncentiveCohort {
  CohortDataset data;  // a single maker; feature is x
  /// Analytic (E[Y yhat], E[(1 - Y) yhat]) and the normalized (TPR, FPR).
  double moment_tp = 1.0 / 8.0;
  double moment_fp = 3.0 / 8.0;
  RatePair analytic_pair{0.75, 0.25};
};

/// The decision threshold c(x): 0 below 1/4, 2(x - 1/4) up to 3/4, 1 above.
double incentive_cutoff(double x);
IncentiveCohort gen_incentive_example(const IncentiveSpec& spec);

struct HeterogeneousCohort {
  CohortDataset data;  // feature is x; p(x) = x
  std::vector<double> cutoffs;
};

/// Population pair of the rule 1(x > c) when x ~ U(0,1) and P(y = 1 | x) = x.
RatePair heterogeneous_pair(double c);
/// g(alpha) = 2 sqrt(alpha) - alpha, the population curve of the same score.
double heterogeneous_roc(double alpha);

HeterogeneousCohort gen_heterogeneous_cutoffs(const HeterogeneousCutoffSpec& spec);

/// Writes the spec and seed as a JSON manifest.
void write_manifest(const std::string& path, const DgpSpec& spec);

}  // namespace rocbench
