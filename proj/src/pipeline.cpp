#include "rocbench/pipeline.hpp"

#include "rocbench/csv.hpp"
#include "rocbench/random.hpp"

#include <algorithm>
#include <cmath>
#include <filesystem>
#include <fstream>
#include <set>

namespace rocbench {

using nlohmann::json;
namespace fs = std::filesystem;

namespace {

SplitRatio ratio_from_json(const json& j) {
  if (!j.is_array() || j.size() != 2) throw std::invalid_argument("config: a ratio is a two-element array");
  return {j[0].get<int>(), j[1].get<int>()};
}

const char* to_string(CovarianceSource s) {
  return s == CovarianceSource::Bootstrap ? "bootstrap" : "asymptotic";
}

CovarianceSource covariance_from_string(const std::string& s) {
  if (s == "bootstrap") return CovarianceSource::Bootstrap;
  if (s == "asymptotic") return CovarianceSource::Asymptotic;
  throw std::invalid_argument("config: unknown covariance source " + s);
}

json pair_json(const RatePair& p) { return {{"fpr", p.alpha}, {"tpr", p.beta}}; }

json counts_json(const ConfusionCounts& c) {
  return {{"n11", c.n11}, {"n01", c.n01}, {"n10", c.n10}, {"n00", c.n00}};
}

template <class Fn>
void write_file(const std::string& dir, const std::string& name, Fn&& fn) {
  const auto path = (fs::path(dir) / name).string();
  std::ofstream out(path);
  if (!out) throw std::runtime_error("cannot write " + path);
  fn(out);
  if (!out) throw std::runtime_error("write failed: " + path);
}

std::vector<double> column(const Eigen::VectorXd& v) { return {v.data(), v.data() + v.size()}; }

Eigen::MatrixXd features_of(const std::vector<CaseRecord>& cases, Eigen::Index dim) {
  Eigen::MatrixXd x(static_cast<Eigen::Index>(cases.size()), dim);
  for (std::size_t i = 0; i < cases.size(); ++i) {
    if (cases[i].features.size() != dim) throw std::invalid_argument("case without features");
    x.row(static_cast<Eigen::Index>(i)) = cases[i].features.transpose();
  }
  return x;
}

std::vector<int> labels_of(const std::vector<CaseRecord>& cases) {
  std::vector<int> y;
  y.reserve(cases.size());
  for (const auto& c : cases) y.push_back(c.y);
  return y;
}

json split_counts(const std::vector<CaseRecord>& cases) {
  json makers = json::object();
  if (!cases.empty()) {
    const CohortDataset data(cases);
    for (const auto& g : data.makers()) makers[g.maker_id] = g.indices.size();
  }
  return {{"cases", cases.size()}, {"makers", makers}};
}

}  // namespace

void RunConfig::validate() const {
  auto positive_ratio = [](const SplitRatio& r, const char* what) {
    if (r.first < 1 || r.second < 1) throw std::invalid_argument(std::string("config: ") + what + " ratio must be positive");
  };
  positive_ratio(classification_performance, "classification:performance");
  positive_ratio(train_validation, "train:validation");
  if (forest.n_estimators < 1 || forest.max_features < 1 || forest.min_samples_split < 1) {
    throw std::invalid_argument("config: forest parameters must be positive");
  }
  if (bootstrap_draws < 1) throw std::invalid_argument("config: bootstrap_draws must be positive");
  if (posterior_draws < 1) throw std::invalid_argument("config: posterior_draws must be positive");
  if (!(level > 0.0 && level < 1.0)) throw std::invalid_argument("config: level must lie in (0,1)");
  if (!(prior_gamma > 0.0)) throw std::invalid_argument("config: prior_gamma must be positive");
  if (loss_kind == LossKind::Pluggable) throw std::invalid_argument("config: pluggable losses need code hooks");
  if (grid_size < 2) throw std::invalid_argument("config: grid_size must be at least 2");
  if (min_cases < 1) throw std::invalid_argument("config: min_cases must be at least 1");
  for (double f : path_fractions) {
    if (!(f >= 0.0 && f <= 1.0)) throw std::invalid_argument("config: path fractions must lie in [0,1]");
  }
  for (double l : lambdas) {
    if (!(l >= 0.0 && l <= 1.0)) throw std::invalid_argument("config: lambdas must lie in [0,1]");
  }
  if (randomized_replicates < 1) throw std::invalid_argument("config: randomized_replicates must be positive");
  if (sweep_points < 2) throw std::invalid_argument("config: sweep_points must be at least 2");
}

std::vector<double> RunConfig::fractions() const {
  if (!path_fractions.empty()) return path_fractions;
  std::vector<double> f;
  for (int k = 0; k <= 20; ++k) f.push_back(k / 20.0);
  return f;
}

json to_json(const RunConfig& c) {
  return {{"seed", c.seed},
          {"classification_performance", {c.classification_performance.first, c.classification_performance.second}},
          {"train_validation", {c.train_validation.first, c.train_validation.second}},
          {"forest",
           {{"n_estimators", c.forest.n_estimators},
            {"max_features", c.forest.max_features},
            {"min_samples_split", c.forest.min_samples_split}}},
          {"bootstrap_draws", c.bootstrap_draws},
          {"posterior_draws", c.posterior_draws},
          {"level", c.level},
          {"prior_gamma", c.prior_gamma},
          {"loss_kind", to_string(c.loss_kind)},
          {"covariance", to_string(c.covariance)},
          {"grid_size", c.grid_size},
          {"min_cases", c.min_cases},
          {"path_fractions", c.fractions()},
          {"lambdas", c.lambdas},
          {"randomized_replicates", c.randomized_replicates},
          {"sweep_points", c.sweep_points}};
}

RunConfig config_from_json(const json& doc, RunConfig c) {
  if (!doc.is_object()) throw std::invalid_argument("config: expected a JSON object");
  static const std::set<std::string> known{
      "seed", "classification_performance", "train_validation", "forest", "bootstrap_draws",
      "posterior_draws", "level", "prior_gamma", "loss_kind", "covariance", "grid_size", "min_cases",
      "path_fractions", "lambdas", "randomized_replicates", "sweep_points"};
  for (const auto& [key, _] : doc.items()) {
    if (!known.contains(key)) throw std::invalid_argument("config: unknown field " + key);
  }
  c.seed = doc.value("seed", c.seed);
  if (doc.contains("classification_performance")) c.classification_performance = ratio_from_json(doc["classification_performance"]);
  if (doc.contains("train_validation")) c.train_validation = ratio_from_json(doc["train_validation"]);
  if (doc.contains("forest")) {
    const auto& f = doc["forest"];
    c.forest.n_estimators = f.value("n_estimators", c.forest.n_estimators);
    c.forest.max_features = f.value("max_features", c.forest.max_features);
    c.forest.min_samples_split = f.value("min_samples_split", c.forest.min_samples_split);
  }
  c.bootstrap_draws = doc.value("bootstrap_draws", c.bootstrap_draws);
  c.posterior_draws = doc.value("posterior_draws", c.posterior_draws);
  c.level = doc.value("level", c.level);
  c.prior_gamma = doc.value("prior_gamma", c.prior_gamma);
  if (doc.contains("loss_kind")) c.loss_kind = loss_kind_from_string(doc["loss_kind"].get<std::string>());
  if (doc.contains("covariance")) c.covariance = covariance_from_string(doc["covariance"].get<std::string>());
  c.grid_size = doc.value("grid_size", c.grid_size);
  c.min_cases = doc.value("min_cases", c.min_cases);
  c.path_fractions = doc.value("path_fractions", c.path_fractions);
  c.lambdas = doc.value("lambdas", c.lambdas);
  c.randomized_replicates = doc.value("randomized_replicates", c.randomized_replicates);
  c.sweep_points = doc.value("sweep_points", c.sweep_points);
  return c;
}

RunConfig load_config(const std::string& path, RunConfig base) {
  std::ifstream in(path);
  if (!in) throw ParseError("cannot open " + path);
  json doc;
  try {
    doc = json::parse(in);
  } catch (const json::parse_error& e) {
    throw ParseError("config " + path + ": " + e.what());
  }
  return config_from_json(doc, std::move(base));
}

std::uint64_t stage_seed(std::uint64_t seed, std::string_view stage) { return substream_seed(seed, stage); }

std::uint64_t maker_seed(std::uint64_t seed, std::string_view stage, const std::string& maker_id) {
  return substream_seed(stage_seed(seed, stage), maker_id);
}

std::vector<MakerBenchmark> benchmark_makers(const CohortDataset& data, const RocCurve& roc,
                                             const RunConfig& config) {
  FrequentistOptions fopt;
  fopt.level = config.level;
  fopt.bootstrap_draws = config.bootstrap_draws;
  fopt.source = config.covariance;
  std::vector<MakerBenchmark> out;
  out.reserve(data.makers().size());
  for (const auto& g : data.makers()) {
    MakerBenchmark mb;
    mb.maker_id = g.maker_id;
    mb.counts = confusion_counts(data, g);
    try {
      rate_pair(mb.counts);
      const auto cases = data.maker_cases(g);
      mb.frequentist = benchmark_frequentist(g.maker_id, cases, roc, fopt,
                                             maker_seed(config.seed, "bootstrap", g.maker_id));
      const auto params = posterior_params(Eigen::Vector4d::Constant(config.prior_gamma), mb.counts);
      const auto draws = sample_posterior(params, config.posterior_draws,
                                          maker_seed(config.seed, "posterior", g.maker_id));
      for (auto kind : named_loss_kinds()) {
        auto v = replace_decision(draws, roc, kind, config.level, config.grid_size);
        v.maker_id = g.maker_id;
        mb.bayes.emplace(kind, std::move(v));
      }
    } catch (const DegenerateError& e) {
      mb.frequentist.reset();
      mb.bayes.clear();
      mb.excluded = e.what();
    }
    out.push_back(std::move(mb));
  }
  return out;
}

PipelineResult run_pipeline(const RunConfig& config, const std::vector<CaseRecord>& cases,
                            const std::string& out_dir) {
  config.validate();
  PipelineResult res;
  res.n_input = cases.size();
  const auto filtered = filter_min_cases(cases, config.min_cases);
  if (filtered.empty()) {
    throw std::invalid_argument("no maker has at least " + std::to_string(config.min_cases) + " cases");
  }
  res.n_filtered = filtered.size();
  const Eigen::Index dim = filtered.front().features.size();
  if (dim == 0) throw std::invalid_argument("the pipeline needs feature columns");

  auto [classification, performance] =
      stratified_split(filtered, config.classification_performance, stage_seed(config.seed, "split-performance"));
  auto [train, validation] =
      stratified_split(classification, config.train_validation, stage_seed(config.seed, "split-validation"));
  if (train.empty() || validation.empty() || performance.empty()) {
    throw std::invalid_argument("a split is empty; the cohort is too small");
  }
  res.n_train = train.size();
  res.n_validation = validation.size();
  res.n_performance = performance.size();

  ForestParams fp = config.forest;
  fp.seed = stage_seed(config.seed, "forest");
  const auto train_y = labels_of(train);
  res.forest = train_forest(features_of(train, dim), train_y, fp);

  const auto val_scores = column(res.forest.predict(features_of(validation, dim)));
  res.validation_roc = build_roc(val_scores, labels_of(validation));

  const CohortDataset class_data(classification);
  res.makers = benchmark_makers(class_data, res.validation_roc, config);

  const CohortDataset perf_data(performance);
  const auto perf_scores = column(res.forest.predict(perf_data.feature_matrix()));
  res.performance_roc = build_roc(perf_scores, perf_data.labels());

  std::vector<ReplacementVerdict> human, freq, bayes;
  std::vector<FrequentistVerdict> freq_full;
  std::map<std::string, double> capability;
  std::vector<std::string> excluded;
  for (const auto& mb : res.makers) {
    human.push_back({mb.maker_id, false, std::nullopt, {}});
    if (!mb.excluded.empty()) {
      excluded.push_back(mb.maker_id);
      freq.push_back({mb.maker_id, false, std::nullopt, {}});
      bayes.push_back({mb.maker_id, false, std::nullopt, {}});
      FrequentistVerdict placeholder;
      placeholder.maker_id = mb.maker_id;
      freq_full.push_back(placeholder);
      continue;
    }
    freq.push_back(to_replacement(*mb.frequentist));
    freq_full.push_back(*mb.frequentist);
    bayes.push_back(to_replacement(mb.bayes.at(config.loss_kind)));
    capability[mb.maker_id] = mb.bayes.at(LossKind::BaselineIndicator).minimum.value;
  }
  for (const auto& v : freq) res.replaced_frequentist += v.replace ? 1 : 0;
  for (const auto& v : bayes) res.replaced_bayes += v.replace ? 1 : 0;

  res.human = combine_decisions(perf_data, perf_scores, human);
  res.frequentist = combine_decisions(perf_data, perf_scores, freq);
  res.bayes = combine_decisions(perf_data, perf_scores, bayes);

  const auto fractions = config.fractions();
  for (auto kind : named_loss_kinds()) {
    std::vector<RankedMaker> ranking;
    for (const auto& mb : res.makers) {
      if (!mb.excluded.empty()) continue;
      const auto& v = mb.bayes.at(kind);
      ranking.push_back({mb.maker_id, v.minimum.value, *v.threshold});
    }
    res.paths[kind] = replacement_path(perf_data, perf_scores, std::move(ranking), fractions);
  }

  std::vector<RandomizedRow> rand_less, rand_all;
  const auto acc_seed = stage_seed(config.seed, "acceptance");
  for (double lambda : config.lambdas) {
    for (int k = 0; k < config.randomized_replicates; ++k) {
      const auto s = substream_seed(acc_seed, static_cast<std::uint64_t>(k));
      rand_less.push_back({lambda,
                           randomized_accept(perf_data, perf_scores, bayes,
                                             AcceptanceSchedule::constant(lambda, ScheduleScope::LessCapableOnly),
                                             capability, s).pair,
                           s});
      rand_all.push_back({lambda,
                          randomized_accept(perf_data, perf_scores, bayes,
                                            AcceptanceSchedule::constant(lambda, ScheduleScope::AllMakers),
                                            capability, s).pair,
                          s});
    }
  }
  struct LinearRow {
    std::string schedule;
    std::string scope;
    RatePair pair;
    std::uint64_t seed;
  };
  std::vector<LinearRow> rand_linear;
  for (auto dir : {RankDirection::LessCapableMore, RankDirection::LessCapableLess}) {
    for (auto scope : {ScheduleScope::AllMakers, ScheduleScope::LessCapableOnly}) {
      for (int k = 0; k < config.randomized_replicates; ++k) {
        const auto s = substream_seed(acc_seed, static_cast<std::uint64_t>(k));
        rand_linear.push_back({dir == RankDirection::LessCapableMore ? "less_capable_more" : "less_capable_less",
                               scope == ScheduleScope::AllMakers ? "all" : "less_capable",
                               randomized_accept(perf_data, perf_scores, bayes,
                                                 AcceptanceSchedule::linear(dir, scope), capability, s).pair,
                               s});
      }
    }
  }
  const auto sweep = threshold_sweep(perf_data, perf_scores, freq_full, config.sweep_points);

  const double auc_val = auc(res.validation_roc);
  const double auc_perf = auc(res.performance_roc);
  auto gap = [&](const RatePair& p) { return p.beta - res.performance_roc.tpr_at(p.alpha); };
  json paths = json::object();
  for (const auto& [kind, path] : res.paths) {
    paths[to_string(kind)] = {{"all_human", pair_json(path.front().pair)}, {"all_machine", pair_json(path.back().pair)}};
  }
  res.summary = {
      {"seed", config.seed},
      {"cases", {{"input", res.n_input}, {"filtered", res.n_filtered}, {"train", res.n_train},
                 {"validation", res.n_validation}, {"performance", res.n_performance}}},
      {"makers", {{"benchmarked", res.makers.size() - excluded.size()}, {"excluded", excluded}}},
      {"auc", {{"validation", auc_val}, {"performance", auc_perf}}},
      {"pooled",
       {{"human", pair_json(res.human.pair)},
        {"frequentist", pair_json(res.frequentist.pair)},
        {"bayes", pair_json(res.bayes.pair)}}},
      {"counts",
       {{"human", counts_json(res.human.counts)},
        {"frequentist", counts_json(res.frequentist.counts)},
        {"bayes", counts_json(res.bayes.counts)}}},
      {"gap_to_performance_roc",
       {{"human", gap(res.human.pair)}, {"frequentist", gap(res.frequentist.pair)}, {"bayes", gap(res.bayes.pair)}}},
      {"human_below_performance_roc", strictly_below(res.performance_roc, res.human.pair)},
      {"bayes_dominates_human", dominates(res.bayes.pair, res.human.pair)},
      {"replaced", {{"frequentist", res.replaced_frequentist}, {"bayes", res.replaced_bayes}}},
      {"loss_kind", to_string(config.loss_kind)},
      {"paths", paths}};

  if (out_dir.empty()) return res;
  fs::create_directories(out_dir);
  write_file(out_dir, "config.json", [&](std::ostream& o) { o << to_json(config).dump(2) << '\n'; });
  write_file(out_dir, "split_manifest.json", [&](std::ostream& o) {
    const json m{{"seed", config.seed},
                 {"min_cases", config.min_cases},
                 {"train", split_counts(train)},
                 {"validation", split_counts(validation)},
                 {"performance", split_counts(performance)}};
    o << m.dump(2) << '\n';
  });
  write_file(out_dir, "train.csv", [&](std::ostream& o) { write_cases_csv(o, train); });
  write_file(out_dir, "validation.csv", [&](std::ostream& o) { write_cases_csv(o, validation); });
  write_file(out_dir, "performance.csv", [&](std::ostream& o) { write_cases_csv(o, performance); });
  write_file(out_dir, "forest.json", [&](std::ostream& o) { o << res.forest.to_json().dump(1) << '\n'; });
  write_file(out_dir, "roc_validation.csv", [&](std::ostream& o) { write_roc_csv(o, res.validation_roc); });
  write_file(out_dir, "roc_performance.csv", [&](std::ostream& o) { write_roc_csv(o, res.performance_roc); });
  write_file(out_dir, "verdicts_frequentist.csv", [&](std::ostream& o) {
    std::vector<FrequentistVerdict> vs;
    for (const auto& mb : res.makers) {
      if (mb.frequentist) vs.push_back(*mb.frequentist);
    }
    write_frequentist_csv(o, vs);
  });
  write_file(out_dir, "verdicts_bayes.csv", [&](std::ostream& o) {
    std::vector<BayesVerdict> vs;
    for (const auto& mb : res.makers) {
      if (mb.excluded.empty()) vs.push_back(mb.bayes.at(config.loss_kind));
    }
    write_bayes_csv(o, vs);
  });
  write_file(out_dir, "combined.csv", [&](std::ostream& o) {
    o << "method,fpr,tpr,n11,n01,n10,n00,replaced\n";
    auto row = [&](const char* name, const CombinedOutcome& c, std::size_t replaced) {
      o << name << ',' << format_number(c.pair.alpha) << ',' << format_number(c.pair.beta) << ','
        << c.counts.n11 << ',' << c.counts.n01 << ',' << c.counts.n10 << ',' << c.counts.n00 << ','
        << replaced << '\n';
    };
    row("human", res.human, 0);
    row("frequentist", res.frequentist, res.replaced_frequentist);
    row("bayes", res.bayes, res.replaced_bayes);
  });
  for (const auto& [kind, path] : res.paths) {
    write_file(out_dir, std::string("path_") + to_string(kind) + ".csv",
               [&](std::ostream& o) { write_path_csv(o, path); });
  }
  write_file(out_dir, "randomized_less_capable.csv", [&](std::ostream& o) { write_randomized_csv(o, rand_less); });
  write_file(out_dir, "randomized_all.csv", [&](std::ostream& o) { write_randomized_csv(o, rand_all); });
  write_file(out_dir, "randomized_linear.csv", [&](std::ostream& o) {
    o << "schedule,scope,fpr,tpr,seed\n";
    for (const auto& r : rand_linear) {
      o << r.schedule << ',' << r.scope << ',' << format_number(r.pair.alpha) << ','
        << format_number(r.pair.beta) << ',' << r.seed << '\n';
    }
  });
  write_file(out_dir, "sweep_frequentist.csv", [&](std::ostream& o) {
    o << "step,fpr,tpr\n";
    for (std::size_t l = 0; l < sweep.size(); ++l) {
      o << l << ',' << format_number(sweep[l].pair.alpha) << ',' << format_number(sweep[l].pair.beta) << '\n';
    }
  });
  write_file(out_dir, "summary.json", [&](std::ostream& o) { o << res.summary.dump(2) << '\n'; });
  return res;
}

std::vector<ReplacementVerdict> read_verdicts_csv(const std::string& path) {
  const auto table = read_csv_table(path);
  std::vector<ReplacementVerdict> out;
  const auto id = table.column("maker_id");
  const bool bayes = std::find(table.header.begin(), table.header.end(), "q_max") != table.header.end();
  if (bayes) {
    const auto q = table.column("q_max"), loss = table.column("min_loss"), rep = table.column("replace"),
               thr = table.column("threshold");
    for (const auto& row : table.rows) {
      ReplacementVerdict v;
      v.maker_id = row[id];
      const auto flag = parse_int(row[rep], "replace");
      if (flag != 0 && flag != 1) throw ParseError("replace must be 0 or 1");
      v.replace = flag == 1;
      v.threshold = parse_optional_double(row[thr], "threshold");
      v.diagnostics["q_max"] = parse_double(row[q], "q_max");
      v.diagnostics["min_loss"] = parse_double(row[loss], "min_loss");
      if (v.replace && !v.threshold) throw ParseError("replaced maker " + v.maker_id + " has no threshold");
      out.push_back(std::move(v));
    }
    return out;
  }
  const auto lab = table.column("case_label"), lo = table.column("c_lower"), hi = table.column("c_upper");
  for (const auto& row : table.rows) {
    ReplacementVerdict v;
    v.maker_id = row[id];
    CaseLabel label;
    try {
      label = case_label_from_string(row[lab]);
    } catch (const std::invalid_argument& e) {
      throw ParseError(e.what());
    }
    v.replace = label == CaseLabel::Case1;
    const auto a = parse_optional_double(row[lo], "c_lower");
    const auto b = parse_optional_double(row[hi], "c_upper");
    if (a && b) v.threshold = 0.5 * (*a + *b);
    if (v.replace && !v.threshold) throw ParseError("case1 maker " + v.maker_id + " has no threshold range");
    v.diagnostics["case_label"] = static_cast<double>(static_cast<int>(label) + 1);
    out.push_back(std::move(v));
  }
  return out;
}

}  // namespace rocbench
