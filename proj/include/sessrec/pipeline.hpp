#pragma once

#include <filesystem>
#include <fstream>
#include <iomanip>
#include <map>
#include <optional>
#include <sstream>
#include <string>
#include <vector>

#include <json.hpp>

#include "sessrec/checkpoint.hpp"
#include "sessrec/data.hpp"
#include "sessrec/metrics.hpp"
#include "sessrec/model.hpp"
#include "sessrec/ranking.hpp"
#include "sessrec/synthetic.hpp"
#include "sessrec/train.hpp"

namespace sessrec {

using json = nlohmann::json;
namespace fs = std::filesystem;

struct RunConfig {
  std::string clicks_path;
  std::string catalog_path;
  std::string impressions_path;  // optional
  std::string out_dir = "out";
  int train_days = 3;
  int test_days = 1;
  std::vector<int> k_list = {20};
  ModelConfig model;
};

inline json model_config_to_json(const ModelConfig& m) {
  return json{{"d_n", m.d_n},
              {"d_c", m.d_c},
              {"d_t", m.d_t},
              {"duration_categories", m.duration_categories},
              {"lambda", m.lambda},
              {"negatives", m.negatives},
              {"window", m.window},
              {"strategy", strategy_name(m.strategy)},
              {"use_explicit_impressions", m.use_explicit_impressions},
              {"share_time_tables", m.share_time_tables},
              {"use_neutral", m.use_neutral},
              {"use_positive", m.use_positive},
              {"use_negative", m.use_negative},
              {"use_content", m.use_content},
              {"positional_encoding", m.positional_encoding},
              {"per_click_start_time", m.per_click_start_time},
              {"lr", m.lr},
              {"batch_size", m.batch_size},
              {"max_epochs", m.max_epochs},
              {"patience", m.patience},
              {"seed", m.seed}};
}

inline ModelConfig model_config_from_json(const json& j) {
  ModelConfig m;
  m.d_n = j.at("d_n");
  m.d_c = j.at("d_c");
  m.d_t = j.at("d_t");
  m.duration_categories = j.at("duration_categories");
  m.lambda = j.at("lambda");
  m.negatives = j.at("negatives");
  m.window = j.at("window");
  m.strategy = strategy_from_name(j.at("strategy"));
  m.use_explicit_impressions = j.at("use_explicit_impressions");
  m.share_time_tables = j.at("share_time_tables");
  m.use_neutral = j.at("use_neutral");
  m.use_positive = j.at("use_positive");
  m.use_negative = j.at("use_negative");
  m.use_content = j.at("use_content");
  m.positional_encoding = j.at("positional_encoding");
  m.per_click_start_time = j.at("per_click_start_time");
  m.lr = j.at("lr");
  m.batch_size = j.at("batch_size");
  m.max_epochs = j.at("max_epochs");
  m.patience = j.at("patience");
  m.seed = j.at("seed");
  return m;
}

inline uint64_t file_hash(const std::string& path) {
  std::ifstream is(path, std::ios::binary);
  if (!is) throw DataError("cannot hash missing file: " + path);
  uint64_t h = 0xcbf29ce484222325ull;
  char buf[1 << 16];
  while (is) {
    is.read(buf, sizeof buf);
    h = fnv1a(buf, static_cast<size_t>(is.gcount()), h);
  }
  return h;
}

inline void write_text_file(const std::string& path, const std::string& content) {
  std::ofstream os(path, std::ios::binary);
  if (!os) throw DataError("cannot write " + path);
  os << content;
}

inline void write_json_file(const std::string& path, const json& j) {
  write_text_file(path, j.dump(2) + "\n");
}

inline json read_json_file(const std::string& path) {
  std::ifstream is(path);
  if (!is) throw DataError("cannot read " + path);
  return json::parse(is);
}

// ---------------------------------------------------------------------------
// Preprocess artifacts

inline void write_sessions_file(const std::string& path, const std::vector<Session>& sessions) {
  std::ofstream os(path);
  if (!os) throw DataError("cannot write " + path);
  for (const auto& s : sessions) {
    os << s.key << '\t' << s.start_ts << '\t';
    for (size_t i = 0; i < s.clicks.size(); ++i) {
      if (i) os << ';';
      os << s.clicks[i].article << ':' << s.clicks[i].ts << ':' << s.clicks[i].active_time;
    }
    os << '\t';
    for (size_t i = 0; i < s.impressions.size(); ++i) {
      if (i) os << ',';
      os << s.impressions[i];
    }
    os << '\n';
  }
}

inline std::vector<Session> read_sessions_file(const std::string& path) {
  std::ifstream is(path);
  if (!is) throw DataError("cannot read " + path);
  std::vector<Session> sessions;
  std::string line;
  int64_t line_no = 0;
  while (std::getline(is, line)) {
    ++line_no;
    if (line.empty()) continue;
    const auto f = parse_detail::split(line, '\t');
    if (f.size() != 4) throw DataError(path + ": bad session line " + std::to_string(line_no));
    Session s;
    s.key = std::string(f[0]);
    if (!parse_detail::to_num(f[1], s.start_ts))
      throw DataError(path + ": bad start ts at line " + std::to_string(line_no));
    for (const auto part : parse_detail::split(f[2], ';')) {
      const auto kv = parse_detail::split(part, ':');
      SessionClick c;
      if (kv.size() != 3 || !parse_detail::to_num(kv[0], c.article) ||
          !parse_detail::to_num(kv[1], c.ts) || !parse_detail::to_num(kv[2], c.active_time))
        throw DataError(path + ": bad click at line " + std::to_string(line_no));
      s.clicks.push_back(c);
    }
    if (!f[3].empty()) {
      for (const auto part : parse_detail::split(f[3], ',')) {
        int32_t id;
        if (!parse_detail::to_num(part, id))
          throw DataError(path + ": bad impression at line " + std::to_string(line_no));
        s.impressions.push_back(id);
      }
    }
    sessions.push_back(std::move(s));
  }
  return sessions;
}

inline void write_folds_file(const std::string& path, const FoldSplit& split) {
  std::ofstream os(path);
  if (!os) throw DataError("cannot write " + path);
  auto emit = [&](size_t fold, const char* name, const std::vector<Instance>& instances) {
    for (const auto& inst : instances)
      os << fold << '\t' << name << '\t' << inst.session << '\t' << inst.prefix_len << '\t'
         << inst.label << '\n';
  };
  for (size_t f = 0; f < split.folds.size(); ++f) {
    emit(f, "train", split.folds[f].train);
    emit(f, "valid", split.folds[f].valid);
    emit(f, "test", split.folds[f].test);
  }
}

inline FoldSplit read_folds_file(const std::string& path) {
  std::ifstream is(path);
  if (!is) throw DataError("cannot read " + path);
  FoldSplit split;
  std::string line;
  int64_t line_no = 0;
  while (std::getline(is, line)) {
    ++line_no;
    if (line.empty()) continue;
    const auto f = parse_detail::split(line, '\t');
    size_t fold;
    Instance inst;
    if (f.size() != 5 || !parse_detail::to_num(f[0], fold) ||
        !parse_detail::to_num(f[2], inst.session) || !parse_detail::to_num(f[3], inst.prefix_len) ||
        !parse_detail::to_num(f[4], inst.label))
      throw DataError(path + ": bad fold line " + std::to_string(line_no));
    if (fold >= split.folds.size()) split.folds.resize(fold + 1);
    if (f[1] == "train")
      split.folds[fold].train.push_back(inst);
    else if (f[1] == "valid")
      split.folds[fold].valid.push_back(inst);
    else if (f[1] == "test")
      split.folds[fold].test.push_back(inst);
    else
      throw DataError(path + ": bad split tag at line " + std::to_string(line_no));
  }
  if (split.folds.empty()) throw DataError(path + ": no folds");
  return split;
}

struct PreprocessedData {
  ArticleCatalog catalog;
  std::vector<Session> sessions;
  FoldSplit folds;
};

inline PreprocessedData load_preprocessed(const std::string& dir) {
  PreprocessedData data;
  ParseReport report;
  data.catalog = parse_catalog_file(dir + "/catalog.tsv", report);
  if (report.bad_lines > 0)
    throw DataError("corrupt preprocessed catalog: " + report.summary());
  data.sessions = read_sessions_file(dir + "/sessions.tsv");
  data.folds = read_folds_file(dir + "/folds.tsv");
  return data;
}

// ---------------------------------------------------------------------------
// preprocess: raw logs -> sessions, folds, stats, manifest

inline json cmd_preprocess(const RunConfig& run) {
  ParseReport clicks_report, catalog_report, imp_report;
  ArticleCatalog catalog = parse_catalog_file(run.catalog_path, catalog_report);
  std::vector<ClickEvent> events = parse_clicks_file(run.clicks_path, clicks_report);
  if (events.empty()) throw DataError("clicks file has no usable events: " + run.clicks_path);

  ParseReport session_report;
  std::vector<Session> sessions = sessionize(events, catalog, session_report);
  if (!run.impressions_path.empty()) {
    std::ifstream is(run.impressions_path);
    if (!is) throw DataError("cannot open impressions file: " + run.impressions_path);
    const auto impressions = parse_impressions(is, imp_report);
    attach_impressions(sessions, impressions, catalog);
  }
  estimate_active_times(sessions);
  const std::vector<Instance> instances = augment(sessions);
  const FoldSplit folds = split_folds(sessions, instances, run.train_days, run.test_days);
  const DatasetStats stats = dataset_stats(sessions, catalog);

  fs::create_directories(run.out_dir);
  // Re-indexed catalog: the article id column becomes the dense id.
  {
    ArticleCatalog dense = catalog;
    dense.dense_by_original.clear();
    for (size_t i = 0; i < dense.articles.size(); ++i) {
      dense.articles[i].original_id = static_cast<int64_t>(i);
      dense.dense_by_original[static_cast<int64_t>(i)] = static_cast<int32_t>(i);
    }
    write_catalog_file(run.out_dir + "/catalog.tsv", dense);
    std::ostringstream map_os;
    for (size_t i = 0; i < catalog.articles.size(); ++i)
      map_os << i << '\t' << catalog.articles[i].original_id << '\n';
    write_text_file(run.out_dir + "/article_map.tsv", map_os.str());
  }
  write_sessions_file(run.out_dir + "/sessions.tsv", sessions);
  write_folds_file(run.out_dir + "/folds.tsv", folds);

  json fold_stats = json::array();
  for (size_t f = 0; f < folds.folds.size(); ++f)
    fold_stats.push_back(json{{"fold", f},
                              {"train", folds.folds[f].train.size()},
                              {"valid", folds.folds[f].valid.size()},
                              {"test", folds.folds[f].test.size()}});
  json manifest{
      {"inputs",
       {{"clicks", hex64(file_hash(run.clicks_path))},
        {"catalog", hex64(file_hash(run.catalog_path))},
        {"impressions",
         run.impressions_path.empty() ? "" : hex64(file_hash(run.impressions_path))}}},
      {"split", {{"train_days", run.train_days}, {"test_days", run.test_days}}},
      {"stats",
       {{"sessions", stats.sessions},
        {"articles", stats.articles},
        {"topics", stats.topics},
        {"clicks", stats.clicks},
        {"clicks_per_session", stats.clicks_per_session},
        {"clicks_per_article", stats.clicks_per_article}}},
      {"folds", fold_stats},
      {"parse",
       {{"clicks", clicks_report.summary()},
        {"catalog", catalog_report.summary()},
        {"sessionize", session_report.summary()}}}};
  write_json_file(run.out_dir + "/preprocess_manifest.json", manifest);
  return manifest;
}

// ---------------------------------------------------------------------------
// train: one fold -> checkpoint + run manifest with the epoch log

inline std::string fold_dir(const RunConfig& run, int fold) {
  return run.out_dir + "/fold" + std::to_string(fold);
}

inline json cmd_train(const RunConfig& run, int fold) {
  const PreprocessedData data = load_preprocessed(run.out_dir);
  if (fold < 0 || static_cast<size_t>(fold) >= data.folds.folds.size())
    throw DataError("fold " + std::to_string(fold) + " not in preprocessed data (have " +
                    std::to_string(data.folds.folds.size()) + ")");
  ModelConfig cfg = run.model;
  cfg.d_c = data.catalog.content_dim;
  ModelParams params(cfg, data.catalog.size());
  const DatasetTensors dt = build_dataset_tensors(data.catalog);
  const TrainResult result =
      train_model(params, data.sessions, data.folds.folds[static_cast<size_t>(fold)],
                  data.catalog, dt, static_cast<uint64_t>(fold));

  fs::create_directories(fold_dir(run, fold));
  const std::string ckpt_path = fold_dir(run, fold) + "/checkpoint.bin";
  save_checkpoint(ckpt_path, params.store, CheckpointHeader{cfg.hash(), cfg.seed});

  json epochs = json::array();
  for (const auto& e : result.log)
    epochs.push_back(
        json{{"epoch", e.epoch}, {"train_loss", e.train_loss}, {"val_hr20", e.val_hr20}});
  json manifest{{"fold", fold},
                {"seed", cfg.seed},
                {"config", model_config_to_json(cfg)},
                {"config_hash", hex64(cfg.hash())},
                {"data",
                 {{"catalog", hex64(file_hash(run.out_dir + "/catalog.tsv"))},
                  {"sessions", hex64(file_hash(run.out_dir + "/sessions.tsv"))},
                  {"folds", hex64(file_hash(run.out_dir + "/folds.tsv"))}}},
                {"epochs", epochs},
                {"best_epoch", result.best_epoch},
                {"best_val_hr20", result.best_val_hr20}};
  write_json_file(fold_dir(run, fold) + "/run_manifest.json", manifest);
  return manifest;
}

// ---------------------------------------------------------------------------
// evaluate: checkpoint + fold -> metric reports

inline json metric_values_to_json(const MetricValues& m) {
  json j{{"count", m.count}, {"hr", m.hr}, {"ndcg", m.ndcg}, {"cov", m.cov}};
  if (m.ild) j["ild"] = *m.ild;
  if (m.unexp) j["unexp"] = *m.unexp;
  return j;
}

inline json metric_report_to_json(const MetricReport& rep) {
  json j{{"k", rep.k}, {"overall", metric_values_to_json(rep.overall)}};
  if (rep.cold) j["cold"] = metric_values_to_json(*rep.cold);
  if (rep.non_cold) j["non_cold"] = metric_values_to_json(*rep.non_cold);
  json by_len = json::object();
  for (const auto& [bucket, m] : rep.by_prefix_len) by_len[bucket] = metric_values_to_json(m);
  j["by_prefix_len"] = by_len;
  return j;
}

inline std::string format_metric_table(const std::vector<std::pair<std::string, MetricValues>>& rows,
                                       int k) {
  std::ostringstream os;
  os << std::left << std::setw(14) << "stratum" << std::right << std::setw(9) << "count"
     << std::setw(10) << ("HR@" + std::to_string(k)) << std::setw(10)
     << ("NDCG@" + std::to_string(k)) << std::setw(10) << "ILD" << std::setw(10) << "unEXP"
     << std::setw(10) << "COV" << '\n';
  os << std::fixed << std::setprecision(4);
  for (const auto& [name, m] : rows) {
    os << std::left << std::setw(14) << name << std::right << std::setw(9) << m.count
       << std::setw(10) << m.hr << std::setw(10) << m.ndcg;
    if (m.ild)
      os << std::setw(10) << *m.ild;
    else
      os << std::setw(10) << "-";
    if (m.unexp)
      os << std::setw(10) << *m.unexp;
    else
      os << std::setw(10) << "-";
    os << std::setw(10) << m.cov << '\n';
  }
  return os.str();
}

struct EvaluateOutcome {
  std::vector<MetricReport> reports;  // one per k
  std::vector<RankingResult> results;
};

inline EvaluateOutcome evaluate_fold(ModelParams& params, const PreprocessedData& data, int fold,
                                     const std::vector<int>& k_list) {
  const Fold& f = data.folds.folds[static_cast<size_t>(fold)];
  int64_t max_prefix = 8;
  for (const auto& s : data.sessions)
    max_prefix = std::max<int64_t>(max_prefix, static_cast<int64_t>(s.clicks.size()));
  const Tensor pe = positional_encoding_table(max_prefix, params.cfg.xc_dim());
  const DatasetTensors dt = build_dataset_tensors(data.catalog);
  const std::set<int32_t> train_articles = training_article_set(data.sessions, f.train);
  Ranker ranker(params, dt, data.catalog, train_articles, pe);

  int max_k = 1;
  for (int k : k_list) max_k = std::max(max_k, k);
  EvaluateOutcome out;
  out.results = ranker.rank(data.sessions, f.test, max_k);

  std::vector<int32_t> topics;
  for (const auto& a : data.catalog.articles) topics.push_back(a.topic);
  for (int k : k_list) {
    // Metrics at k look at the first k recommendations only.
    std::vector<RankingResult> at_k = out.results;
    for (auto& r : at_k)
      if (static_cast<int>(r.top_k.size()) > k) r.top_k.resize(static_cast<size_t>(k));
    out.reports.push_back(stratified_report(at_k, k, topics));
  }
  return out;
}

inline json cmd_evaluate(const RunConfig& run, int fold, bool popularity_baseline = false) {
  const PreprocessedData data = load_preprocessed(run.out_dir);
  if (fold < 0 || static_cast<size_t>(fold) >= data.folds.folds.size())
    throw DataError("fold " + std::to_string(fold) + " not in preprocessed data");
  ModelConfig cfg = run.model;
  cfg.d_c = data.catalog.content_dim;

  EvaluateOutcome outcome;
  if (popularity_baseline) {
    const Fold& f = data.folds.folds[static_cast<size_t>(fold)];
    ModelParams params(cfg, data.catalog.size());
    const DatasetTensors dt = build_dataset_tensors(data.catalog);
    const Tensor pe = positional_encoding_table(64, cfg.xc_dim());
    const std::set<int32_t> train_articles = training_article_set(data.sessions, f.train);
    Ranker pool_logic(params, dt, data.catalog, train_articles, pe);
    const auto counts = training_click_counts(data.sessions, f.train, data.catalog.size());
    int max_k = 1;
    for (int k : run.k_list) max_k = std::max(max_k, k);
    outcome.results = rank_popularity(data.sessions, f.test, counts, pool_logic, max_k,
                                      cfg.duration_categories);
    std::vector<int32_t> topics;
    for (const auto& a : data.catalog.articles) topics.push_back(a.topic);
    for (int k : run.k_list) {
      std::vector<RankingResult> at_k = outcome.results;
      for (auto& r : at_k)
        if (static_cast<int>(r.top_k.size()) > k) r.top_k.resize(static_cast<size_t>(k));
      outcome.reports.push_back(stratified_report(at_k, k, topics));
    }
  } else {
    ModelParams params(cfg, data.catalog.size());
    const CheckpointHeader header =
        load_checkpoint(fold_dir(run, fold) + "/checkpoint.bin", params.store);
    if (header.config_hash != cfg.hash())
      throw DataError("checkpoint config hash " + hex64(header.config_hash) +
                      " does not match current config " + hex64(cfg.hash()));
    outcome = evaluate_fold(params, data, fold, run.k_list);
  }

  json reports = json::array();
  std::ostringstream table;
  for (size_t i = 0; i < outcome.reports.size(); ++i) {
    const MetricReport& rep = outcome.reports[i];
    reports.push_back(metric_report_to_json(rep));
    std::vector<std::pair<std::string, MetricValues>> rows{{"overall", rep.overall}};
    if (rep.cold) rows.push_back({"cold", *rep.cold});
    if (rep.non_cold) rows.push_back({"non_cold", *rep.non_cold});
    for (const auto& [bucket, m] : rep.by_prefix_len) rows.push_back({"len " + bucket, m});
    table << "k = " << rep.k << (popularity_baseline ? "  (popularity baseline)" : "") << '\n'
          << format_metric_table(rows, rep.k) << '\n';
  }
  json report{{"fold", fold}, {"baseline", popularity_baseline ? "popularity" : ""},
              {"reports", reports}};

  const std::string tag = popularity_baseline ? "report_popularity" : "report";
  fs::create_directories(fold_dir(run, fold));
  write_json_file(fold_dir(run, fold) + "/" + tag + ".json", report);
  write_text_file(fold_dir(run, fold) + "/" + tag + ".txt", table.str());

  // Fig. 5 analogue: accuracy by prefix length, at the first k.
  if (!outcome.reports.empty()) {
    std::ostringstream plot;
    plot << "prefix_len\thr@" << outcome.reports[0].k << "\tcount\n";
    for (const auto& [bucket, m] : outcome.reports[0].by_prefix_len)
      plot << bucket << '\t' << m.hr << '\t' << m.count << '\n';
    write_text_file(fold_dir(run, fold) + "/" + tag + "_by_length.tsv", plot.str());
  }
  return report;
}

// Averages reports across folds: uniform over folds, and size-weighted, both
// recorded.
inline json cmd_evaluate_all_folds(const RunConfig& run) {
  const PreprocessedData data = load_preprocessed(run.out_dir);
  json folds = json::array();
  std::map<int, std::vector<std::pair<double, int64_t>>> hr_by_k;  // k -> (hr, n)
  for (size_t f = 0; f < data.folds.folds.size(); ++f) {
    const json rep = cmd_evaluate(run, static_cast<int>(f));
    folds.push_back(rep);
    for (const auto& r : rep.at("reports"))
      hr_by_k[r.at("k")].push_back(
          {r.at("overall").at("hr"), r.at("overall").at("count")});
  }
  json averages = json::array();
  for (const auto& [k, entries] : hr_by_k) {
    double uniform = 0.0, weighted = 0.0;
    int64_t total = 0;
    for (const auto& [hr, n] : entries) {
      uniform += hr;
      weighted += hr * static_cast<double>(n);
      total += n;
    }
    averages.push_back(json{{"k", k},
                            {"hr_uniform_mean", uniform / static_cast<double>(entries.size())},
                            {"hr_size_weighted_mean",
                             total > 0 ? weighted / static_cast<double>(total) : 0.0}});
  }
  json out{{"folds", folds}, {"averages", averages}};
  write_json_file(run.out_dir + "/report_all_folds.json", out);
  return out;
}

// ---------------------------------------------------------------------------
// sweep: grid over lambda and |Ne| (Fig. 4 analogue)

inline json cmd_sweep(const RunConfig& run, const std::vector<double>& lambdas,
                      const std::vector<int>& ne_sizes, int fold) {
  const PreprocessedData data = load_preprocessed(run.out_dir);
  if (fold < 0 || static_cast<size_t>(fold) >= data.folds.folds.size())
    throw DataError("fold " + std::to_string(fold) + " not in preprocessed data");
  const std::vector<double> ls = lambdas.empty() ? std::vector<double>{run.model.lambda} : lambdas;
  const std::vector<int> ns = ne_sizes.empty() ? std::vector<int>{run.model.negatives} : ne_sizes;

  const DatasetTensors dt = build_dataset_tensors(data.catalog);
  json entries = json::array();
  for (const double lambda : ls) {
    for (const int ne : ns) {
      ModelConfig cfg = run.model;
      cfg.d_c = data.catalog.content_dim;
      cfg.lambda = lambda;
      cfg.negatives = ne;
      ModelParams params(cfg, data.catalog.size());
      const TrainResult tr =
          train_model(params, data.sessions, data.folds.folds[static_cast<size_t>(fold)],
                      data.catalog, dt, static_cast<uint64_t>(fold));
      EvaluateOutcome outcome = evaluate_fold(params, data, fold, {20});
      entries.push_back(json{{"lambda", lambda},
                             {"negatives", ne},
                             {"best_val_hr20", tr.best_val_hr20},
                             {"test_hr20", outcome.reports[0].overall.hr},
                             {"test_ndcg20", outcome.reports[0].overall.ndcg}});
    }
  }
  json sweep{{"fold", fold}, {"entries", entries}};
  fs::create_directories(run.out_dir);
  write_json_file(run.out_dir + "/sweep.json", sweep);

  std::ostringstream lam_plot, ne_plot;
  lam_plot << "lambda\ttest_hr20\n";
  ne_plot << "negatives\ttest_hr20\n";
  for (const auto& e : entries) {
    lam_plot << e.at("lambda").get<double>() << '\t' << e.at("test_hr20").get<double>() << '\n';
    ne_plot << e.at("negatives").get<int>() << '\t' << e.at("test_hr20").get<double>() << '\n';
  }
  write_text_file(run.out_dir + "/sweep_lambda_hr.tsv", lam_plot.str());
  write_text_file(run.out_dir + "/sweep_ne_hr.tsv", ne_plot.str());
  return sweep;
}

// ---------------------------------------------------------------------------
// export-time-embeddings

inline void cmd_export_time_embeddings(const RunConfig& run, int fold,
                                       const std::string& out_path) {
  const PreprocessedData data = load_preprocessed(run.out_dir);
  ModelConfig cfg = run.model;
  cfg.d_c = data.catalog.content_dim;
  if (!cfg.use_neutral) throw ConfigError("no time tables to export with use_neutral=false");
  ModelParams params(cfg, data.catalog.size());
  const CheckpointHeader header =
      load_checkpoint(fold_dir(run, fold) + "/checkpoint.bin", params.store);
  if (header.config_hash != cfg.hash())
    throw DataError("checkpoint config hash does not match current config");
  std::ofstream os(out_path);
  if (!os) throw DataError("cannot write " + out_path);
  const Tensor duration = cfg.use_positive
                              ? params.duration_table->value
                              : Tensor::zeros({cfg.duration_categories + 1, cfg.d_t});
  export_time_embeddings(os, params.time_pub->value, duration);
}

// ---------------------------------------------------------------------------
// generate-synthetic

inline json cmd_generate_synthetic(const SynthConfig& cfg, const std::string& out_dir) {
  const SynthOutput out = generate_synthetic(cfg);
  fs::create_directories(out_dir);
  write_clicks_file(out_dir + "/clicks.tsv", out.clicks);
  write_catalog_file(out_dir + "/catalog.tsv", out.catalog);
  write_impressions_file(out_dir + "/impressions.tsv", out.impressions);
  double clicks = 0.0;
  for (const auto& [user, ts] : out.planted_sessions) clicks += static_cast<double>(ts.size());
  json manifest{{"scenario", scenario_name(cfg.scenario)},
                {"seed", cfg.seed},
                {"articles", cfg.n_articles},
                {"topics", cfg.n_topics},
                {"sessions", out.planted_sessions.size()},
                {"clicks_per_session",
                 out.planted_sessions.empty()
                     ? 0.0
                     : clicks / static_cast<double>(out.planted_sessions.size())}};
  write_json_file(out_dir + "/synthetic_manifest.json", manifest);
  return manifest;
}

// ---------------------------------------------------------------------------
// plot-data: extract (x, y) series from existing artifacts

inline void cmd_plot_data(const RunConfig& run, const std::string& kind,
                          const std::string& out_path) {
  std::ostringstream os;
  if (kind == "length-hr") {
    const json rep = read_json_file(fold_dir(run, 0) + "/report.json");
    os << "prefix_len\thr\n";
    for (const auto& [bucket, m] : rep.at("reports").at(0).at("by_prefix_len").items())
      os << bucket << '\t' << m.at("hr").get<double>() << '\n';
  } else if (kind == "lambda-hr" || kind == "ne-hr") {
    const json sweep = read_json_file(run.out_dir + "/sweep.json");
    const char* key = kind == "lambda-hr" ? "lambda" : "negatives";
    os << key << "\ttest_hr20\n";
    for (const auto& e : sweep.at("entries"))
      os << e.at(key).dump() << '\t' << e.at("test_hr20").get<double>() << '\n';
  } else {
    throw ConfigError("unknown plot kind: " + kind + " (use length-hr, lambda-hr, ne-hr)");
  }
  write_text_file(out_path, os.str());
}

}  // namespace sessrec
