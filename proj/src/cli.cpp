#include "mdood/cli.hpp"

#include <CLI11.hpp>

#include "mdood/baselines.hpp"
#include "mdood/joint.hpp"
#include "mdood/model.hpp"
#include "mdood/report.hpp"
#include "mdood/synth.hpp"

namespace mdood::cli {

namespace {

void write_text(const std::string& path, const std::string& text) {
  io_detail::write_file(path, {reinterpret_cast<const std::uint8_t*>(text.data()), text.size()});
}

struct FitFlags {
  int k = kDefaultNeighbors;
  double contamination = kDefaultContamination;
  double ridge0 = kDefaultRidge0;
  bool no_tanh = false;
  bool no_calibrate = false;

  void attach(CLI::App* app) {
    app->add_option("--k", k, "Neighbor count of the outlier detector")->capture_default_str()
        ->check(CLI::PositiveNumber);
    app->add_option("--contamination", contamination, "Expected outlier fraction in training data")
        ->capture_default_str();
    app->add_option("--ridge0", ridge0, "Base of the covariance ridge ladder")->capture_default_str()
        ->check(CLI::NonNegativeNumber);
    app->add_flag("--no-tanh", no_tanh, "Skip the tanh squashing of embeddings");
    app->add_flag("--no-calibrate", no_calibrate, "Keep unit layer scales");
  }

  FitConfig config(int threads) const {
    FitConfig c;
    c.featurizer.tanh = !no_tanh;
    c.featurizer.calibrate_w = !no_calibrate;
    c.featurizer.ridge0 = ridge0;
    c.featurizer.threads = threads;
    c.k_neighbors = k;
    c.contamination = contamination;
    return c;
  }
};

// Unknown-class mask plus argmax predictions on the known rows.
struct TestTruth {
  Mask is_ood;
  std::vector<std::int32_t> pred_known;
  std::vector<std::int32_t> truth_known;
  int num_classes = 0;
};

TestTruth test_truth(const EmbeddingSet& test) {
  if (!test.labels) {
    throw Error(ErrorCode::MissingLabels, "evaluation data needs labels");
  }
  TestTruth t;
  const auto& labels = *test.labels;
  t.is_ood.resize(static_cast<Eigen::Index>(labels.size()));
  for (std::size_t i = 0; i < labels.size(); ++i) {
    t.is_ood(static_cast<Eigen::Index>(i)) = labels[i] == kUnknownLabel;
  }
  if (test.logits) {
    t.num_classes = static_cast<int>(test.num_classes());
    for (std::size_t i = 0; i < labels.size(); ++i) {
      if (labels[i] == kUnknownLabel) continue;
      t.pred_known.push_back(
          argmax_label(test.logits->row(static_cast<Eigen::Index>(i)).transpose().cast<double>()));
      t.truth_known.push_back(labels[i]);
    }
  }
  return t;
}

EvalReport evaluate_scores(const Vector<double>& scores, const TestTruth& t) {
  return evaluate(scores, t.is_ood, t.pred_known, t.truth_known, t.num_classes);
}

}  // namespace

int run(const std::vector<std::string>& args, std::ostream& out, std::ostream& err) {
  CLI::App app{"Multi-layer Mahalanobis feature out-of-distribution detection", "mdood"};
  app.require_subcommand(1);
  app.set_help_all_flag("--help-all", "Expand help for every subcommand");

  int threads = 1;
  auto add_threads = [&](CLI::App* sub) {
    sub->add_option("--threads", threads, "Worker threads (results do not depend on it)")
        ->capture_default_str()
        ->check(CLI::PositiveNumber);
  };

  // fit
  auto* fit = app.add_subcommand("fit", "Fit layer statistics and the outlier detector");
  std::string fit_train, fit_out;
  FitFlags fit_flags;
  fit->add_option("--train", fit_train, "Training embeddings (EMB1)")->required();
  fit->add_option("--out", fit_out, "Model file to write (MDL1)")->required();
  fit_flags.attach(fit);
  add_threads(fit);

  // score
  auto* score = app.add_subcommand("score", "Score embeddings and apply the reject rule");
  std::string score_model, score_data, score_out;
  score->add_option("--model", score_model, "Model file (MDL1)")->required();
  score->add_option("--data", score_data, "Embeddings to score (EMB1)")->required();
  score->add_option("--out", score_out, "CSV file to write")->required();
  add_threads(score);

  // eval
  auto* eval = app.add_subcommand("eval", "Evaluate a model on a labeled test set");
  std::string eval_model, eval_test, eval_report;
  bool eval_table = false;
  eval->add_option("--model", eval_model, "Model file (MDL1)")->required();
  eval->add_option("--test", eval_test, "Labeled test embeddings (EMB1)")->required();
  eval->add_option("--report", eval_report, "JSON report to write")->required();
  eval->add_flag("--table", eval_table, "Also print a text table");
  add_threads(eval);

  // synth
  auto* synth = app.add_subcommand("synth", "Generate a synthetic train/test pair");
  std::string synth_config_path, synth_train, synth_test;
  SynthConfig synth_flags;
  synth->add_option("--config", synth_config_path, "JSON config with SynthConfig field names");
  synth->add_option("--out-train", synth_train, "Train EMB1 to write")->required();
  synth->add_option("--out-test", synth_test, "Test EMB1 to write")->required();
  auto* o_seed = synth->add_option("--seed", synth_flags.seed);
  auto* o_ntrain = synth->add_option("--n-train", synth_flags.n_train);
  auto* o_nid = synth->add_option("--n-test-id", synth_flags.n_test_id);
  auto* o_nood = synth->add_option("--n-test-ood", synth_flags.n_test_ood);
  auto* o_m = synth->add_option("--classes", synth_flags.M, "Known class count M");
  auto* o_k = synth->add_option("--layers", synth_flags.K, "Layer count K");
  auto* o_d = synth->add_option("--dim", synth_flags.d, "Embedding dimension d");
  auto* o_sep = synth->add_option("--class-sep", synth_flags.class_sep);
  auto* o_shift = synth->add_option("--ood-shift", synth_flags.ood_shift);
  auto* o_noise = synth->add_option("--logit-noise", synth_flags.logit_noise);
  auto* o_layers = synth->add_option("--ood-layers", synth_flags.ood_layers, "Layers carrying the shift");

  // compare
  auto* compare = app.add_subcommand("compare", "Compare against single-layer baselines");
  std::string cmp_train, cmp_test, cmp_report;
  bool cmp_table = false;
  FitFlags cmp_flags;
  compare->add_option("--train", cmp_train, "Training embeddings (EMB1)")->required();
  compare->add_option("--test", cmp_test, "Labeled test embeddings (EMB1)")->required();
  compare->add_option("--report", cmp_report, "JSON report to write")->required();
  compare->add_flag("--table", cmp_table, "Also print a text table");
  cmp_flags.attach(compare);
  add_threads(compare);

  std::vector<std::string> rev(args.size() > 0 ? args.begin() + 1 : args.begin(), args.end());
  std::reverse(rev.begin(), rev.end());
  try {
    app.parse(rev);
  } catch (const CLI::ParseError& e) {
    const int code = app.exit(e, out, err);
    return code == 0 ? kOk : kUsage;
  }

  try {
    if (fit->parsed()) {
      const auto train = read_embeddings(fit_train);
      save_model(fit_model(train, fit_flags.config(threads)), fit_out);
    } else if (score->parsed()) {
      const auto model = load_model(score_model);
      const auto data = read_embeddings(score_data);
      if (data.logits) {
        write_text(score_out, decisions_to_csv(decide_batch(data, model, std::nullopt, threads)));
      } else {
        write_text(score_out, scores_to_csv(rejection_scores(model, data, threads)));
      }
    } else if (eval->parsed()) {
      const auto model = load_model(eval_model);
      const auto test = read_embeddings(eval_test);
      const auto truth = test_truth(test);
      const auto report = evaluate_scores(rejection_scores(model, test, threads), truth);
      write_text(eval_report, report_to_json(report));
      if (eval_table) out << format_table({{"multi-layer KNN", report}});
    } else if (synth->parsed()) {
      SynthConfig config;
      if (!synth_config_path.empty()) {
        const auto bytes = io_detail::read_file(synth_config_path);
        config = parse_synth_config(std::string(bytes.begin(), bytes.end()));
      }
      if (*o_seed) config.seed = synth_flags.seed;
      if (*o_ntrain) config.n_train = synth_flags.n_train;
      if (*o_nid) config.n_test_id = synth_flags.n_test_id;
      if (*o_nood) config.n_test_ood = synth_flags.n_test_ood;
      if (*o_m) config.M = synth_flags.M;
      if (*o_k) config.K = synth_flags.K;
      if (*o_d) config.d = synth_flags.d;
      if (*o_sep) config.class_sep = synth_flags.class_sep;
      if (*o_shift) config.ood_shift = synth_flags.ood_shift;
      if (*o_noise) config.logit_noise = synth_flags.logit_noise;
      if (*o_layers) config.ood_layers = synth_flags.ood_layers;
      const auto data = generate(config);
      write_embeddings(data.train, synth_train);
      write_embeddings(data.test, synth_test);
    } else if (compare->parsed()) {
      const auto train = read_embeddings(cmp_train);
      const auto test = read_embeddings(cmp_test);
      const auto truth = test_truth(test);
      std::vector<std::pair<std::string, EvalReport>> rows;

      if (test.logits) {
        rows.emplace_back("max_softmax", evaluate_scores(max_softmax_scores(test), truth));
      } else {
        err << "note: test data has no logits, skipping max_softmax\n";
      }
      const auto md = fit_md(train, std::nullopt, cmp_flags.ridge0);
      rows.emplace_back("md", evaluate_scores(md_scores(md, test), truth));
      rows.emplace_back("rmd", evaluate_scores(rmd_scores(md, test), truth));
      const auto model = fit_model(train, cmp_flags.config(threads));
      rows.emplace_back("proposed", evaluate_scores(rejection_scores(model, test, threads), truth));

      write_text(cmp_report, comparison_to_json(rows));
      if (cmp_table) out << format_table(rows);
    }
  } catch (const Error& e) {
    err << "error: " << e.what() << "\n";
    return is_numerical(e.code()) ? kNumericalError : kDataError;
  } catch (const std::exception& e) {
    err << "error: " << e.what() << "\n";
    return kDataError;
  }
  return kOk;
}

}  // namespace mdood::cli
