// rocbench command-line front end.

#include "rocbench/bayesian.hpp"
#include "rocbench/csv.hpp"
#include "rocbench/forest.hpp"
#include "rocbench/frequentist.hpp"
#include "rocbench/pipeline.hpp"
#include "rocbench/random.hpp"
#include "rocbench/replacement.hpp"
#include "rocbench/roc.hpp"
#include "rocbench/synthetic.hpp"

#include <CLI11.hpp>
#include <json.hpp>

#include <cmath>
#include <cstdlib>
#include <filesystem>
#include <fstream>
#include <iostream>
#include <optional>
#include <set>

namespace fs = std::filesystem;
using namespace rocbench;
using nlohmann::json;

namespace {

std::string default_out_dir() {
  const char* env = std::getenv("ROCBENCH_OUT");
  return env && *env ? env : "rocbench_out";
}

SplitRatio parse_ratio(const std::string& text) {
  const auto colon = text.find(':');
  if (colon == std::string::npos) throw std::invalid_argument("ratio must look like 7:3");
  const auto a = parse_int(text.substr(0, colon), "ratio");
  const auto b = parse_int(text.substr(colon + 1), "ratio");
  if (a < 0 || b < 0 || a + b == 0) throw std::invalid_argument("ratio parts must be nonnegative and not both zero");
  return {static_cast<int>(a), static_cast<int>(b)};
}

std::string out_path(const std::string& dir, const std::string& name) {
  fs::create_directories(dir);
  return (fs::path(dir) / name).string();
}

std::vector<double> column(const Eigen::VectorXd& v) { return {v.data(), v.data() + v.size()}; }

std::vector<double> score_with(const Forest& forest, const CohortDataset& data) {
  if (data.feature_dim() != forest.n_features()) {
    throw std::invalid_argument("case features do not match the forest's dimension");
  }
  return column(forest.predict(data.feature_matrix()));
}

// Flags mirroring RunConfig; set ones override the config file.
struct ConfigFlags {
  std::optional<std::string> cp_ratio, tv_ratio, loss, covariance;
  std::optional<int> n_estimators, max_features, min_split, bootstrap_draws, posterior_draws, grid_size,
      replicates, sweep_points;
  std::optional<double> level, prior;
  std::optional<std::size_t> min_cases;
  std::vector<double> fractions, lambdas;

  void add_split(CLI::App* app) {
    app->add_option("--classification-ratio", cp_ratio, "classification:performance ratio, e.g. 7:3");
    app->add_option("--validation-ratio", tv_ratio, "train:validation ratio, e.g. 4:3");
    app->add_option("--min-cases", min_cases, "keep makers with at least this many cases");
  }
  void add_forest(CLI::App* app) {
    app->add_option("--n-estimators", n_estimators, "trees in the forest");
    app->add_option("--max-features", max_features, "features considered per split");
    app->add_option("--min-samples-split", min_split, "smallest node that may split");
  }
  void add_freq(CLI::App* app) {
    app->add_option("--level", level, "confidence or credible level");
    app->add_option("--bootstrap-draws", bootstrap_draws, "bootstrap resamples per maker");
    app->add_option("--covariance", covariance, "bootstrap or asymptotic");
  }
  void add_bayes(CLI::App* app, bool with_level) {
    if (with_level) app->add_option("--level", level, "confidence or credible level");
    app->add_option("--draws", posterior_draws, "posterior draws per maker");
    app->add_option("--prior", prior, "Dirichlet prior per cell");
    app->add_option("--loss", loss, "loss kind");
    app->add_option("--grid-size", grid_size, "uniform candidate FPR grid size");
  }
  void add_replacement(CLI::App* app) {
    app->add_option("--fractions", fractions, "replacement fractions for paths");
    app->add_option("--lambdas", lambdas, "acceptance rates");
    app->add_option("--replicates", replicates, "seeds per acceptance rate");
    app->add_option("--sweep-points", sweep_points, "thresholds per dominating range");
  }

  RunConfig apply(RunConfig c) const {
    if (cp_ratio) c.classification_performance = parse_ratio(*cp_ratio);
    if (tv_ratio) c.train_validation = parse_ratio(*tv_ratio);
    if (loss) c.loss_kind = loss_kind_from_string(*loss);
    if (covariance) {
      if (*covariance != "bootstrap" && *covariance != "asymptotic") {
        throw std::invalid_argument("covariance must be bootstrap or asymptotic");
      }
      c.covariance = *covariance == "bootstrap" ? CovarianceSource::Bootstrap : CovarianceSource::Asymptotic;
    }
    if (n_estimators) c.forest.n_estimators = *n_estimators;
    if (max_features) c.forest.max_features = *max_features;
    if (min_split) c.forest.min_samples_split = *min_split;
    if (bootstrap_draws) c.bootstrap_draws = *bootstrap_draws;
    if (posterior_draws) c.posterior_draws = *posterior_draws;
    if (grid_size) c.grid_size = *grid_size;
    if (replicates) c.randomized_replicates = *replicates;
    if (sweep_points) c.sweep_points = *sweep_points;
    if (level) c.level = *level;
    if (prior) c.prior_gamma = *prior;
    if (min_cases) c.min_cases = *min_cases;
    if (!fractions.empty()) c.path_fractions = fractions;
    if (!lambdas.empty()) c.lambdas = lambdas;
    return c;
  }
};

void print(const json& j) { std::cout << j.dump() << '\n'; }

}  // namespace

int main(int argc, char** argv) {
  CLI::App app{"Benchmark human decision makers against a classifier's ROC curve"};
  app.require_subcommand(1);

  std::optional<std::uint64_t> seed;
  std::string config_path;
  app.add_option("--seed", seed, "master seed");
  app.add_option("--config", config_path, "JSON run configuration")->check(CLI::ExistingFile);

  std::string out_dir = default_out_dir();
  std::string cases_path, forest_path, roc_path, verdicts_path, out_file;
  ConfigFlags flags;

  // simulate
  auto* sim = app.add_subcommand("simulate", "generate a synthetic cohort");
  std::string kind = "complementarity";
  ComplementaritySpec comp;
  PredictedDoctorSpec pred;
  IncentiveSpec inc;
  HeterogeneousCutoffSpec het;
  std::optional<std::size_t> sim_n;
  bool sd_params = false, export_hidden = false;
  sim->add_option("--kind", kind, "complementarity, predicted_doctor, incentive or heterogeneous_cutoffs")
      ->check(CLI::IsMember({"complementarity", "predicted_doctor", "incentive", "heterogeneous_cutoffs"}));
  sim->add_option("--n-cases", comp.n_cases, "complementarity: total cases");
  sim->add_option("--n-makers", comp.n_makers, "complementarity / heterogeneous: makers");
  sim->add_option("--capable-fraction", comp.capable_fraction, "complementarity: capable share");
  sim->add_flag("--shuffle-groups", comp.shuffle_groups, "complementarity: random capable assignment");
  sim->add_flag("--sd-params", sd_params, "complementarity: read normal parameters as standard deviations");
  sim->add_flag("--export-hidden", export_hidden, "export the private feature u");
  sim->add_option("--scenario", pred.scenario, "predicted_doctor: scenario 1, 2 or 3");
  sim->add_option("--c0", pred.c0, "predicted_doctor: doctor cutoff");
  sim->add_option("--n", sim_n, "predicted_doctor / incentive: cases");
  sim->add_option("--cases-per-maker", het.cases_per_maker, "heterogeneous: cases per maker");
  sim->add_option("--low", het.low, "heterogeneous: lower cutoff bound");
  sim->add_option("--high", het.high, "heterogeneous: upper cutoff bound");
  sim->add_option("--cutoffs", het.cutoffs, "heterogeneous: explicit cutoffs");
  sim->add_option("--out", out_dir, "output directory");

  // split
  auto* split = app.add_subcommand("split", "stratified split of a case file");
  std::string ratio_text = "7:3";
  std::size_t split_min = 1;
  split->add_option("--cases", cases_path, "case CSV")->required();
  split->add_option("--ratio", ratio_text, "first:second ratio");
  split->add_option("--min-cases", split_min, "drop makers with fewer cases first");
  split->add_option("--out", out_dir, "output directory");

  // train
  auto* train = app.add_subcommand("train", "train the random forest");
  bool no_bootstrap = false;
  train->add_option("--cases", cases_path, "training case CSV")->required();
  flags.add_forest(train);
  train->add_flag("--no-bootstrap", no_bootstrap, "grow every tree on the full training set");
  train->add_option("--out", out_file, "forest JSON (default <out>/forest.json)");

  // roc
  auto* roc_cmd = app.add_subcommand("roc", "ROC curve of a forest on a case file");
  roc_cmd->add_option("--cases", cases_path, "case CSV")->required();
  roc_cmd->add_option("--forest", forest_path, "forest JSON")->required();
  roc_cmd->add_option("--out", out_file, "ROC CSV (default <out>/roc.csv)");

  // bench-freq
  auto* bfreq = app.add_subcommand("bench-freq", "frequentist benchmark of every maker");
  bfreq->add_option("--cases", cases_path, "case CSV")->required();
  bfreq->add_option("--roc", roc_path, "ROC CSV")->required();
  flags.add_freq(bfreq);
  bfreq->add_option("--out", out_file, "verdict CSV (default <out>/verdicts_frequentist.csv)");

  // bench-bayes
  auto* bbayes = app.add_subcommand("bench-bayes", "Bayesian benchmark of every maker");
  std::string draws_dir;
  bbayes->add_option("--cases", cases_path, "case CSV")->required();
  bbayes->add_option("--roc", roc_path, "ROC CSV")->required();
  flags.add_bayes(bbayes, true);
  bbayes->add_option("--dump-draws", draws_dir, "directory for per-maker posterior draws");
  bbayes->add_option("--out", out_file, "verdict CSV (default <out>/verdicts_bayes.csv)");

  // combine
  auto* comb = app.add_subcommand("combine", "evaluate combined decisions");
  comb->add_option("--cases", cases_path, "performance case CSV")->required();
  comb->add_option("--forest", forest_path, "forest JSON")->required();
  comb->add_option("--verdicts", verdicts_path, "verdict CSV")->required();
  comb->add_option("--out", out_file, "combined CSV (default <out>/combined.csv)");

  // path
  auto* path_cmd = app.add_subcommand("path", "replacement path by posterior loss");
  path_cmd->add_option("--cases", cases_path, "performance case CSV")->required();
  path_cmd->add_option("--forest", forest_path, "forest JSON")->required();
  path_cmd->add_option("--verdicts", verdicts_path, "Bayesian verdict CSV")->required();
  path_cmd->add_option("--fractions", flags.fractions, "replacement fractions");
  path_cmd->add_option("--out", out_file, "path CSV (default <out>/path.csv)");

  // randomized
  auto* rnd = app.add_subcommand("randomized", "randomized acceptance of machine decisions");
  std::string scope_text = "less_capable";
  rnd->add_option("--cases", cases_path, "performance case CSV")->required();
  rnd->add_option("--forest", forest_path, "forest JSON")->required();
  rnd->add_option("--verdicts", verdicts_path, "Bayesian verdict CSV")->required();
  rnd->add_option("--scope", scope_text, "less_capable or all")->check(CLI::IsMember({"less_capable", "all"}));
  rnd->add_option("--lambdas", flags.lambdas, "acceptance rates");
  rnd->add_option("--replicates", flags.replicates, "seeds per rate");
  rnd->add_option("--out", out_file, "randomized CSV (default <out>/randomized.csv)");

  // report
  auto* rep = app.add_subcommand("report", "print a pipeline summary");
  std::string report_dir;
  rep->add_option("--dir", report_dir, "pipeline output directory");

  // pipeline
  auto* pipe = app.add_subcommand("pipeline", "run every stage end to end");
  pipe->add_option("--cases", cases_path, "case CSV")->required();
  flags.add_split(pipe);
  flags.add_forest(pipe);
  flags.add_freq(pipe);
  flags.add_bayes(pipe, false);
  flags.add_replacement(pipe);
  pipe->add_option("--out", out_dir, "output directory");

  CLI11_PARSE(app, argc, argv);

  try {
    RunConfig config;
    if (!config_path.empty()) config = load_config(config_path);
    if (seed) config.seed = *seed;
    config = flags.apply(config);

    if (sim->parsed()) {
      DgpSpec spec;
      if (kind == "complementarity") {
        comp.variance_params = !sd_params;
        comp.export_hidden = export_hidden;
        comp.seed = config.seed;
        spec = comp;
      } else if (kind == "predicted_doctor") {
        if (sim_n) pred.n = *sim_n;
        pred.export_hidden = export_hidden;
        pred.seed = config.seed;
        spec = pred;
      } else if (kind == "incentive") {
        if (sim_n) inc.n = *sim_n;
        inc.seed = config.seed;
        spec = inc;
      } else {
        if (sim->count("--n-makers") > 0) het.n_makers = comp.n_makers;
        het.seed = config.seed;
        spec = het;
      }
      CohortDataset data;
      json extra = json::object();
      if (auto* s = std::get_if<ComplementaritySpec>(&spec)) {
        data = gen_complementarity(*s).data;
      } else if (auto* s2 = std::get_if<PredictedDoctorSpec>(&spec)) {
        data = gen_predicted_doctor(*s2).data;
      } else if (auto* s3 = std::get_if<IncentiveSpec>(&spec)) {
        const auto cohort = gen_incentive_example(*s3);
        data = cohort.data;
        extra = {{"analytic_moments", {cohort.moment_tp, cohort.moment_fp}},
                 {"analytic_tpr_fpr", {cohort.analytic_pair.beta, cohort.analytic_pair.alpha}}};
      } else {
        const auto cohort = gen_heterogeneous_cutoffs(std::get<HeterogeneousCutoffSpec>(spec));
        data = cohort.data;
        extra = {{"cutoffs", cohort.cutoffs}};
      }
      write_cases_csv(out_path(out_dir, "cases.csv"), data.cases());
      write_manifest(out_path(out_dir, "manifest.json"), spec);
      print({{"cases", data.size()}, {"makers", data.makers().size()}, {"out", out_dir}, {"details", extra}});
    } else if (split->parsed()) {
      const auto ratio = parse_ratio(ratio_text);
      const auto cases = filter_min_cases(read_cases_csv(cases_path), split_min);
      const auto [first, second] = stratified_split(cases, ratio, stage_seed(config.seed, "split"));
      write_cases_csv(out_path(out_dir, "first.csv"), first);
      write_cases_csv(out_path(out_dir, "second.csv"), second);
      const json manifest{{"seed", config.seed},
                          {"ratio", {ratio.first, ratio.second}},
                          {"input", cases.size()},
                          {"first", first.size()},
                          {"second", second.size()}};
      std::ofstream(out_path(out_dir, "split_manifest.json")) << manifest.dump(2) << '\n';
      print(manifest);
    } else if (train->parsed()) {
      const CohortDataset data(read_cases_csv(cases_path));
      if (data.feature_dim() == 0) throw std::invalid_argument("training cases carry no features");
      ForestParams fp = config.forest;
      fp.seed = stage_seed(config.seed, "forest");
      fp.bootstrap = !no_bootstrap;
      const auto labels = data.labels();
      const Forest forest = train_forest(data.feature_matrix(), labels, fp);
      const auto dest = out_file.empty() ? out_path(out_dir, "forest.json") : out_file;
      save_forest(dest, forest);
      print({{"trees", forest.trees().size()}, {"features", forest.n_features()}, {"out", dest}});
    } else if (roc_cmd->parsed()) {
      const CohortDataset data(read_cases_csv(cases_path));
      const Forest forest = load_forest(forest_path);
      const auto roc = build_roc(score_with(forest, data), data.labels());
      const auto dest = out_file.empty() ? out_path(out_dir, "roc.csv") : out_file;
      write_roc_csv(dest, roc);
      print({{"auc", auc(roc)}, {"points", roc.size()}, {"out", dest}});
    } else if (bfreq->parsed() || bbayes->parsed()) {
      const CohortDataset data(read_cases_csv(cases_path));
      const auto roc = read_roc_csv(roc_path);
      const auto bench = benchmark_makers(data, roc, config);
      std::vector<std::string> excluded;
      std::size_t replaced = 0;
      if (bfreq->parsed()) {
        std::vector<FrequentistVerdict> vs;
        for (const auto& mb : bench) {
          if (!mb.excluded.empty()) {
            excluded.push_back(mb.maker_id);
          } else {
            vs.push_back(*mb.frequentist);
            replaced += vs.back().replace() ? 1 : 0;
          }
        }
        const auto dest = out_file.empty() ? out_path(out_dir, "verdicts_frequentist.csv") : out_file;
        write_frequentist_csv(dest, vs);
        print({{"makers", vs.size()}, {"replaced", replaced}, {"excluded", excluded}, {"out", dest}});
      } else {
        std::vector<BayesVerdict> vs;
        for (const auto& mb : bench) {
          if (!mb.excluded.empty()) {
            excluded.push_back(mb.maker_id);
            continue;
          }
          vs.push_back(mb.bayes.at(config.loss_kind));
          replaced += vs.back().replace ? 1 : 0;
          if (!draws_dir.empty()) {
            const auto params = posterior_params(Eigen::Vector4d::Constant(config.prior_gamma), mb.counts);
            const auto draws = sample_posterior(params, config.posterior_draws,
                                                maker_seed(config.seed, "posterior", mb.maker_id));
            std::ofstream out(out_path(draws_dir, "draws_" + mb.maker_id + ".csv"));
            write_draws_csv(out, draws);
          }
        }
        const auto dest = out_file.empty() ? out_path(out_dir, "verdicts_bayes.csv") : out_file;
        write_bayes_csv(dest, vs);
        print({{"makers", vs.size()}, {"replaced", replaced}, {"excluded", excluded}, {"out", dest}});
      }
    } else if (comb->parsed() || path_cmd->parsed() || rnd->parsed()) {
      const CohortDataset data(read_cases_csv(cases_path));
      const Forest forest = load_forest(forest_path);
      const auto scores = score_with(forest, data);
      auto verdicts = read_verdicts_csv(verdicts_path);
      std::set<std::string> known;
      for (const auto& v : verdicts) known.insert(v.maker_id);
      for (const auto& g : data.makers()) {
        if (!known.contains(g.maker_id)) verdicts.push_back({g.maker_id, false, std::nullopt, {}});
      }
      if (comb->parsed()) {
        std::vector<ReplacementVerdict> human;
        for (const auto& v : verdicts) human.push_back({v.maker_id, false, std::nullopt, {}});
        const auto h = combine_decisions(data, scores, human);
        const auto c = combine_decisions(data, scores, verdicts);
        const auto dest = out_file.empty() ? out_path(out_dir, "combined.csv") : out_file;
        std::ofstream out(dest);
        out << "method,fpr,tpr,n11,n01,n10,n00\n";
        for (const auto& [name, o] : {std::pair{"human", h}, std::pair{"combined", c}}) {
          out << name << ',' << format_number(o.pair.alpha) << ',' << format_number(o.pair.beta) << ','
              << o.counts.n11 << ',' << o.counts.n01 << ',' << o.counts.n10 << ',' << o.counts.n00 << '\n';
        }
        print({{"human", {{"fpr", h.pair.alpha}, {"tpr", h.pair.beta}}},
               {"combined", {{"fpr", c.pair.alpha}, {"tpr", c.pair.beta}}},
               {"out", dest}});
      } else if (path_cmd->parsed()) {
        std::vector<RankedMaker> ranking;
        for (const auto& v : verdicts) {
          if (!v.threshold || !v.diagnostics.contains("min_loss")) continue;
          ranking.push_back({v.maker_id, v.diagnostics.at("min_loss"), *v.threshold});
        }
        const auto path = replacement_path(data, scores, ranking, config.fractions());
        const auto dest = out_file.empty() ? out_path(out_dir, "path.csv") : out_file;
        std::ofstream out(dest);
        write_path_csv(out, path);
        print({{"points", path.size()}, {"out", dest}});
      } else {
        const auto scope = scope_text == "all" ? ScheduleScope::AllMakers : ScheduleScope::LessCapableOnly;
        std::vector<RandomizedRow> rows;
        const auto acc_seed = stage_seed(config.seed, "acceptance");
        for (double lambda : config.lambdas) {
          for (int k = 0; k < config.randomized_replicates; ++k) {
            const auto s = substream_seed(acc_seed, static_cast<std::uint64_t>(k));
            rows.push_back({lambda,
                            randomized_accept(data, scores, verdicts, AcceptanceSchedule::constant(lambda, scope),
                                              std::map<std::string, double>{}, s)
                                .pair,
                            s});
          }
        }
        const auto dest = out_file.empty() ? out_path(out_dir, "randomized.csv") : out_file;
        std::ofstream out(dest);
        write_randomized_csv(out, rows);
        print({{"rows", rows.size()}, {"out", dest}});
      }
    } else if (rep->parsed()) {
      const auto dir = report_dir.empty() ? out_dir : report_dir;
      std::ifstream in(fs::path(dir) / "summary.json");
      if (!in) throw ParseError("no summary.json in " + dir);
      const json s = json::parse(in);
      const auto& p = s.at("pooled");
      std::cout << "cases: " << s.at("cases").at("performance") << " performance of " << s.at("cases").at("input")
                << " input\n"
                << "AUC validation " << format_number(s.at("auc").at("validation").get<double>(), 4)
                << ", performance " << format_number(s.at("auc").at("performance").get<double>(), 4) << '\n';
      for (const char* m : {"human", "frequentist", "bayes"}) {
        std::cout << m << ": FPR " << format_number(p.at(m).at("fpr").get<double>(), 4) << ", TPR "
                  << format_number(p.at(m).at("tpr").get<double>(), 4) << ", gap to ROC "
                  << format_number(s.at("gap_to_performance_roc").at(m).get<double>(), 4) << '\n';
      }
      std::cout << "replaced: frequentist " << s.at("replaced").at("frequentist") << ", bayes "
                << s.at("replaced").at("bayes") << '\n';
    } else if (pipe->parsed()) {
      const auto cases = read_cases_csv(cases_path);
      const auto res = run_pipeline(config, cases, out_dir);
      print(res.summary);
    }
  } catch (const std::exception& e) {
    std::string msg = e.what();
    for (auto& ch : msg) {
      if (ch == '\n' || ch == '\r') ch = ' ';
    }
    std::cerr << "error: " << msg << '\n';
    return 1;
  }
  return 0;
}
