// Command-line entry point: preprocess, train, evaluate, sweep,
// export-time-embeddings, generate-synthetic, plot-data.
//
// Exit codes: 0 success, 1 usage/config error, 2 data error, 3 numeric
// failure.

#include <cstdio>
#include <exception>
#include <iostream>
#include <string>
#include <vector>

#include <CLI11.hpp>

#include "sessrec/sessrec.hpp"

namespace {

void add_model_options(CLI::App* cmd, sessrec::ModelConfig& m) {
  cmd->add_option("--d-n", m.d_n, "item embedding dimension");
  cmd->add_option("--d-t", m.d_t, "time embedding dimension");
  cmd->add_option("--duration-categories", m.duration_categories, "active-time buckets");
  cmd->add_option("--lambda", m.lambda, "negative loss weight");
  cmd->add_option("--negatives", m.negatives, "negative samples per instance");
  cmd->add_option("--window", m.window, "publish-order window for impression reconstruction");
  cmd->add_option("--strategy", [&m](const std::vector<std::string>& v) {
        m.strategy = sessrec::strategy_from_name(v.at(0));
        return true;
      },
      "negative sampling strategy: window or random")
      ->expected(1);
  cmd->add_flag("--no-explicit-impressions,!--explicit-impressions",
                [&m](int64_t c) { m.use_explicit_impressions = c < 0; },
                "ignore logged impression lists when sampling negatives");
  cmd->add_flag("--no-share-time-tables,!--share-time-tables",
                [&m](int64_t c) { m.share_time_tables = c < 0; },
                "separate start-time and publish-time embedding tables");
  cmd->add_flag("--no-neutral", [&m](int64_t) { m.use_neutral = false; },
                "ablate the neutral (start/publish time) module");
  cmd->add_flag("--no-positive", [&m](int64_t) { m.use_positive = false; },
                "ablate the positive (active time) module");
  cmd->add_flag("--no-negative", [&m](int64_t) { m.use_negative = false; },
                "ablate the negative sampling loss");
  cmd->add_flag("--no-content", [&m](int64_t) { m.use_content = false; },
                "ablate content vectors (item-embedding-only model)");
  cmd->add_flag("--no-positional-encoding", [&m](int64_t) { m.positional_encoding = false; },
                "disable positional encodings in the base attention");
  cmd->add_flag("--per-click-start-time", m.per_click_start_time,
                "use each click's time for the start-time attention");
  cmd->add_option("--lr", m.lr, "Adam learning rate");
  cmd->add_option("--batch-size", m.batch_size, "mini-batch size");
  cmd->add_option("--max-epochs", m.max_epochs, "epoch budget");
  cmd->add_option("--patience", m.patience, "early-stopping patience (epochs)");
  cmd->add_option("--seed", m.seed, "root RNG seed");
}

void add_data_options(CLI::App* cmd, sessrec::RunConfig& run) {
  cmd->add_option("--out", run.out_dir, "artifact directory")->required();
}

}  // namespace

int main(int argc, char** argv) {
  CLI::App app{"Session-based news recommender with implicit feedback"};
  app.require_subcommand(1);
  app.set_config("--config", "", "read options from a config file");

  sessrec::RunConfig run;
  sessrec::SynthConfig synth;
  int fold = 0;
  bool all_folds = false;
  bool baseline = false;
  std::vector<double> sweep_lambdas;
  std::vector<int> sweep_negatives;
  std::string scenario = "topic";
  std::string export_path = "time_embeddings.tsv";
  std::string plot_kind = "length-hr";
  std::string plot_out = "plot.tsv";

  auto* pre = app.add_subcommand("preprocess", "sessionize logs and build folds");
  pre->add_option("--clicks", run.clicks_path, "click log (tsv)")->required();
  pre->add_option("--catalog", run.catalog_path, "article catalog (tsv)")->required();
  pre->add_option("--impressions", run.impressions_path, "impression lists (tsv, optional)");
  pre->add_option("--train-days", run.train_days, "training days per fold");
  pre->add_option("--test-days", run.test_days, "test days per fold");
  add_data_options(pre, run);

  auto* train = app.add_subcommand("train", "train one fold");
  train->add_option("--fold", fold, "fold index");
  add_data_options(train, run);
  add_model_options(train, run.model);

  auto* eval = app.add_subcommand("evaluate", "score a fold's test set");
  eval->add_option("--fold", fold, "fold index");
  eval->add_flag("--all-folds", all_folds, "evaluate and average every fold");
  eval->add_flag("--popularity-baseline", baseline, "rank by training click counts instead");
  eval->add_option("--k", run.k_list, "cutoffs, e.g. --k 5 10 20");
  add_data_options(eval, run);
  add_model_options(eval, run.model);

  auto* sweep = app.add_subcommand("sweep", "grid over lambda and |Ne|");
  sweep->add_option("--fold", fold, "fold index");
  sweep->add_option("--lambdas", sweep_lambdas, "lambda grid");
  sweep->add_option("--negatives-grid", sweep_negatives, "|Ne| grid");
  add_data_options(sweep, run);
  add_model_options(sweep, run.model);

  auto* exp = app.add_subcommand("export-time-embeddings", "dump trained time tables");
  exp->add_option("--fold", fold, "fold index");
  exp->add_option("--to", export_path, "output tsv path");
  add_data_options(exp, run);
  add_model_options(exp, run.model);

  auto* gen = app.add_subcommand("generate-synthetic", "write a synthetic corpus");
  gen->add_option("--scenario", scenario, "topic|start_time|dwell|impression|hour");
  gen->add_option("--articles", synth.n_articles, "catalog size");
  gen->add_option("--topics", synth.n_topics, "topic count");
  gen->add_option("--sessions", synth.n_sessions, "session count");
  gen->add_option("--days", synth.days, "corpus span in days");
  gen->add_option("--content-dim", synth.content_dim, "content vector dimension");
  gen->add_option("--synth-seed", synth.seed, "generator seed");
  gen->add_flag("--multi-session-users", synth.multi_session_users,
                "several sessions per user key");
  add_data_options(gen, run);

  auto* plot = app.add_subcommand("plot-data", "extract (x,y) series from reports");
  plot->add_option("--kind", plot_kind, "length-hr | lambda-hr | ne-hr");
  plot->add_option("--to", plot_out, "output tsv path");
  add_data_options(plot, run);

  try {
    app.parse(argc, argv);
  } catch (const CLI::ParseError& e) {
    const int code = app.exit(e);
    return code == 0 ? 0 : 1;
  }

  try {
    if (*pre) {
      const auto manifest = sessrec::cmd_preprocess(run);
      std::cout << manifest.dump(2) << "\n";
    } else if (*train) {
      const auto manifest = sessrec::cmd_train(run, fold);
      std::cout << manifest.dump(2) << "\n";
    } else if (*eval) {
      const auto report = all_folds ? sessrec::cmd_evaluate_all_folds(run)
                                    : sessrec::cmd_evaluate(run, fold, baseline);
      std::cout << report.dump(2) << "\n";
    } else if (*sweep) {
      const auto report = sessrec::cmd_sweep(run, sweep_lambdas, sweep_negatives, fold);
      std::cout << report.dump(2) << "\n";
    } else if (*exp) {
      sessrec::cmd_export_time_embeddings(run, fold, export_path);
      std::cout << "wrote " << export_path << "\n";
    } else if (*gen) {
      synth.scenario = sessrec::scenario_from_name(scenario);
      const auto manifest = sessrec::cmd_generate_synthetic(synth, run.out_dir);
      std::cout << manifest.dump(2) << "\n";
    } else if (*plot) {
      sessrec::cmd_plot_data(run, plot_kind, plot_out);
      std::cout << "wrote " << plot_out << "\n";
    }
  } catch (const sessrec::ConfigError& e) {
    std::cerr << "config error: " << e.what() << "\n";
    return 1;
  } catch (const sessrec::DataError& e) {
    std::cerr << "data error: " << e.what() << "\n";
    return 2;
  } catch (const sessrec::NumericError& e) {
    std::cerr << "numeric error: " << e.what() << "\n";
    return 3;
  } catch (const std::exception& e) {
    std::cerr << "error: " << e.what() << "\n";
    return 1;
  }
  return 0;
}
