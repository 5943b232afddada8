#include "pipeline.hpp"

#include <algorithm>
#include <cmath>
#include <cstdio>
#include <filesystem>
#include <fstream>
#include <map>
#include <set>
#include <utility>

#include "csv.hpp"
#include "error.hpp"
#include "ingest.hpp"
#include "report.hpp"

namespace factorlens {
namespace fs = std::filesystem;

void PipelineConfig::validate() const {
  if (window < 1) throw ValidationError("--window must be at least 1");
  if (!(cutoff >= 0.0 && cutoff <= 1.0)) throw ValidationError("--cutoff must be in [0, 1]");
  if (!(l2 >= 0.0)) throw ValidationError("--l2 must be non-negative");
  if (folds < 2) throw ValidationError("--folds must be at least 2");
  if (questions.empty()) throw ValidationError("no questions selected");
  for (int q : questions)
    if (q < 1 || q > kQuestionCount) throw ValidationError("question must be in 1..6");
  if (out_dir.empty()) throw ValidationError("--out must not be empty");
}

std::vector<int> parse_question_selector(const std::string& text) {
  if (text == "all") return {1, 2, 3, 4, 5, 6};
  if (text.size() == 1 && text[0] >= '1' && text[0] <= '6') return {text[0] - '0'};
  throw ValidationError("--question must be 1..6 or all, got '" + text + "'");
}

namespace {

using Artifacts = std::vector<std::pair<std::string, std::string>>;

struct Context {
  const PipelineConfig& config;
  const MessageSink& sink;

  void info(const std::string& msg) const {
    if (sink) sink(MessageLevel::kInfo, msg);
  }
  void warn(const std::string& msg) const {
    if (sink) sink(MessageLevel::kWarning, msg);
  }
  void flush(const Warnings& w) const {
    for (const auto& m : w) warn(m);
  }
  std::string path(const std::string& name) const { return (fs::path(config.out_dir) / name).string(); }
};

void write_artifacts(const Context& ctx, const Artifacts& artifacts) {
  std::error_code ec;
  fs::create_directories(ctx.config.out_dir, ec);
  if (ec) throw ValidationError(ctx.config.out_dir + ": cannot create output directory: " + ec.message());
  for (const auto& [name, content] : artifacts) {
    const std::string p = ctx.path(name);
    std::ofstream out(p, std::ios::binary | std::ios::trunc);
    if (!out) throw ValidationError(p + ": cannot open for writing");
    out << content;
    if (!out) throw ValidationError(p + ": write failed");
    ctx.info("wrote " + p);
  }
}

std::string require_input(const Context& ctx, const std::string& name, const char* producer) {
  const std::string p = ctx.path(name);
  if (!fs::exists(p)) throw ValidationError(p + ": missing; run `factorlens " + producer + "` first");
  return p;
}

FeatureTable load_features(const Context& ctx) {
  const std::string p = require_input(ctx, "features.csv", "ingest");
  return parse_features_csv(read_text_file(p), p);
}

std::string dump(const Json& j) { return j.dump(2) + "\n"; }

RunStatus run_ingest(const Context& ctx) {
  const auto& cfg = ctx.config;
  if (cfg.profiles_path.empty()) throw ValidationError("ingest needs --profiles");
  if (cfg.survey_path.empty()) throw ValidationError("ingest needs --survey");

  Warnings warnings;
  const auto profiles = parse_profiles_jsonl(read_text_file(cfg.profiles_path), cfg.profiles_path, &warnings);
  const auto responses = parse_survey_csv(read_text_file(cfg.survey_path), cfg.survey_path);

  FeatureTable features;
  for (const auto& p : profiles) {
    features.user_ids.push_back(p.user_id);
    features.rows.push_back(extract_features(p, cfg.window, &warnings));
  }
  const LabelSet labels = aggregate_labels(responses, cfg.lenient ? VoteMode::kLenient : VoteMode::kStrict, &warnings);

  std::set<std::string> profile_ids(features.user_ids.begin(), features.user_ids.end());
  for (const auto& u : labels.users) {
    if (!profile_ids.count(u.user_id)) {
      throw ValidationError(cfg.survey_path + ": user '" + u.user_id + "' has survey responses but no profile");
    }
  }
  const LabelTable table = to_label_table(labels, features.user_ids);
  ctx.flush(warnings);

  std::array<int, kQuestionCount> positives{};
  for (const auto& row : table.labels)
    for (int q = 0; q < kQuestionCount; ++q) positives[q] += row[q];
  std::string summary = "ingested " + std::to_string(features.rows.size()) + " profiles, " +
                        std::to_string(responses.size()) + " responses; positive labels per question:";
  for (int q = 0; q < kQuestionCount; ++q) summary += " q" + std::to_string(q + 1) + "=" + std::to_string(positives[q]);
  ctx.info(summary);

  write_artifacts(ctx, {{"features.csv", features_csv(features)}, {"labels.csv", labels_csv(table)}});
  return RunStatus::kOk;
}

struct Analysis {
  FeatureTable features;
  DataMatrix data;
  SymMatrix r;
  SuitabilityReport suitability;
};

Analysis analyse(const Context& ctx) {
  Analysis a;
  a.features = load_features(ctx);
  a.data = a.features.to_data_matrix(ctx.config.log1p);
  a.r = correlation_matrix(a.data);
  a.suitability = assess_suitability(a.r, a.data.n_rows(), ctx.config.thresholds);
  return a;
}

void report_suitability(const Context& ctx, const SuitabilityReport& s) {
  ctx.info("KMO = " + format_number(s.kmo) + (s.kmo_pass ? " (pass)" : " (fail)") + "; Bartlett chi2 = " +
           format_number(s.bartlett.chi2) + ", df = " + std::to_string(s.bartlett.df) +
           ", p = " + format_p_value(s.bartlett.p_value) + (s.bartlett_pass ? " (pass)" : " (fail)"));
}

RunStatus run_check(const Context& ctx) {
  const Analysis a = analyse(ctx);
  report_suitability(ctx, a.suitability);
  write_artifacts(ctx, {{"suitability.json",
                         dump(suitability_json(a.suitability, ctx.config.thresholds, a.data.n_rows(), a.data.n_cols()))}});
  return a.suitability.passed() ? RunStatus::kOk : RunStatus::kCheckFailed;
}

std::vector<std::string> factor_columns(std::size_t k) {
  std::vector<std::string> names;
  for (std::size_t j = 1; j <= k; ++j) names.push_back("f" + std::to_string(j));
  return names;
}

RunStatus run_efa(const Context& ctx) {
  const auto& cfg = ctx.config;
  const Analysis a = analyse(ctx);
  report_suitability(ctx, a.suitability);
  if (!a.suitability.passed()) ctx.warn("suitability checks failed; factor solution may not be meaningful");

  EfaOptions opts;
  opts.retention = cfg.retention;
  opts.cutoff = cfg.cutoff;
  opts.kaiser_normalize = cfg.kaiser_normalize;
  const FactorModel model = fit_efa(a.r, a.data.column_names, opts);
  if (!model.varimax_converged) ctx.warn("varimax did not converge within 100 sweeps");
  for (std::size_t i = 0; i < model.variables.size(); ++i) {
    if (!model.assignment.factor[i]) ctx.warn("variable '" + model.variables[i] + "' loads on no factor above the cutoff");
    if (model.assignment.cross_loading[i]) ctx.warn("variable '" + model.variables[i] + "' cross-loads");
  }

  const DataMatrix z = standardize(a.data);
  const Matrix scores = cfg.score_method == ScoreMethod::kRegression
                            ? factor_scores(z, a.r, model.loadings_rotated)
                            : sum_of_assigned_scores(z, model.loadings_rotated, model.assignment);

  std::string msg = "retained k = " + std::to_string(model.k) + " (" + cfg.retention.to_string() + ")";
  const auto groups = model.assignment.groups(model.k);
  for (std::size_t f = 0; f < groups.size(); ++f) {
    msg += "; factor " + std::to_string(f + 1) + ": {";
    for (std::size_t i = 0; i < groups[f].size(); ++i) msg += (i ? ", " : "") + model.variables[groups[f][i]];
    msg += "}";
  }
  ctx.info(msg);

  Json efa = efa_json(model, a.suitability, opts, a.data.n_rows());
  efa["scores"] = {{"method", cfg.score_method == ScoreMethod::kRegression ? "regression" : "sum-of-assigned"},
                   {"log1p", cfg.log1p}};
  Artifacts out = {
      {"efa.json", dump(efa)},
      {"scree.csv", scree_csv(model.scree)},
      {"scree.svg", scree_svg(model.scree)},
      {"scores.csv", matrix_csv(scores, factor_columns(model.k), a.features.user_ids, "user_id")},
  };
  if (cfg.format == OutputFormat::kCsv) {
    const auto cols = factor_columns(model.k);
    out.emplace_back("loadings_unrotated.csv", matrix_csv(model.loadings_unrotated.values, cols, model.variables));
    out.emplace_back("loadings_rotated.csv", matrix_csv(model.loadings_rotated.values, cols, model.variables));
  }
  write_artifacts(ctx, out);
  return RunStatus::kOk;
}

struct ScoreTable {
  std::vector<std::string> user_ids;
  Matrix scores;
};

ScoreTable load_scores(const Context& ctx) {
  const std::string p = require_input(ctx, "scores.csv", "efa");
  const auto rows = read_csv_file(p);
  if (rows.empty() || rows.front().fields.size() < 2 || rows.front().fields.front() != "user_id") {
    throw ValidationError(p + ":1: expected header `user_id,f1,...`");
  }
  const std::size_t k = rows.front().fields.size() - 1;
  require_header(rows, [&] {
    std::vector<std::string> h{"user_id"};
    for (const auto& c : factor_columns(k)) h.push_back(c);
    return h;
  }(), p);
  ScoreTable t;
  t.scores = Matrix(rows.size() - 1, k);
  for (std::size_t i = 1; i < rows.size(); ++i) {
    const auto& row = rows[i];
    const std::string loc = p + ":" + std::to_string(row.line);
    if (row.fields.size() != k + 1) throw ValidationError(loc + ": expected " + std::to_string(k + 1) + " fields");
    t.user_ids.push_back(row.fields[0]);
    for (std::size_t j = 0; j < k; ++j) {
      const std::string& f = row.fields[j + 1];
      std::size_t used = 0;
      double v = 0.0;
      try {
        v = std::stod(f, &used);
      } catch (const std::exception&) {
        used = 0;
      }
      if (f.empty() || used != f.size() || !std::isfinite(v)) throw ValidationError(loc + ": invalid score '" + f + "'");
      t.scores(i - 1, j) = v;
    }
  }
  return t;
}

// Reorders rows of `m` (keyed by `ids`) into `order`.
Matrix align_rows(const Matrix& m, const std::vector<std::string>& ids, const std::vector<std::string>& order,
                  const std::string& what) {
  std::map<std::string, std::size_t> pos;
  for (std::size_t i = 0; i < ids.size(); ++i) pos[ids[i]] = i;
  if (ids.size() != order.size()) throw ValidationError(what + " covers " + std::to_string(ids.size()) + " users, features cover " + std::to_string(order.size()));
  Matrix out(order.size(), m.cols());
  for (std::size_t i = 0; i < order.size(); ++i) {
    auto it = pos.find(order[i]);
    if (it == pos.end()) throw ValidationError(what + " has no row for user '" + order[i] + "'");
    std::copy(m.row(it->second).begin(), m.row(it->second).end(), out.row(i).begin());
  }
  return out;
}

RunStatus run_train(const Context& ctx) {
  const auto& cfg = ctx.config;
  const FeatureTable features = load_features(ctx);
  const std::string labels_path = require_input(ctx, "labels.csv", "ingest");
  const LabelTable raw_labels = parse_labels_csv(read_text_file(labels_path), labels_path);
  const ScoreTable scores_raw = load_scores(ctx);

  LabelTable labels;
  {
    Matrix lm(raw_labels.labels.size(), kQuestionCount);
    for (std::size_t i = 0; i < raw_labels.labels.size(); ++i)
      for (int q = 0; q < kQuestionCount; ++q) lm(i, q) = raw_labels.labels[i][q];
    const Matrix aligned = align_rows(lm, raw_labels.user_ids, features.user_ids, labels_path);
    labels.user_ids = features.user_ids;
    for (std::size_t i = 0; i < aligned.rows(); ++i) {
      std::array<int, kQuestionCount> row{};
      for (int q = 0; q < kQuestionCount; ++q) row[q] = static_cast<int>(aligned(i, q));
      labels.labels.push_back(row);
    }
  }
  const Matrix scores = align_rows(scores_raw.scores, scores_raw.user_ids, features.user_ids, ctx.path("scores.csv"));
  const Matrix eight = standardize(features.to_data_matrix(cfg.log1p)).values;
  const std::string factor_variant = factor_variant_name(scores.cols());

  CvOptions cv;
  cv.folds = cfg.folds;
  cv.seed = cfg.seed;
  cv.l2 = cfg.l2;
  cv.averaging = cfg.averaging;
  Warnings warnings;
  const auto comparisons = compare_variants(eight, scores, labels, cfg.questions, factor_variant, cv, &warnings);

  // Full-data fits for the model artifact.
  const std::vector<std::string> eight_names(kFeatureNames.begin(), kFeatureNames.end());
  const auto score_names = factor_columns(scores.cols());
  Json models = Json::array();
  LogisticOptions lopts;
  lopts.l2 = cfg.l2;
  for (int q : cfg.questions) {
    for (bool use_eight : {true, false}) {
      TrainingSet ts{use_eight ? eight : scores, labels.column(q), q, use_eight ? "eight" : factor_variant};
      const LogisticModel m = fit_logistic(ts, lopts, &warnings);
      models.push_back(model_json(m, q, ts.variant, use_eight ? eight_names : score_names));
    }
  }
  ctx.flush(warnings);

  Json evals = Json::array();
  std::vector<EvalReport> flat;
  for (const auto& c : comparisons) {
    for (const EvalReport* r : {&c.eight, &c.factors}) {
      evals.push_back(eval_json(*r));
      flat.push_back(*r);
      ctx.info("question " + std::to_string(r->question) + " " + r->variant + ": P=" + format_number(r->precision) +
               " R=" + format_number(r->recall) + " F=" + format_number(r->f_measure));
    }
  }
  Artifacts out = {{"models.json", dump(models)}, {"eval.json", dump(evals)}};
  if (cfg.format == OutputFormat::kCsv) out.emplace_back("eval.csv", comparison_csv(flat));
  write_artifacts(ctx, out);
  return RunStatus::kOk;
}

RunStatus run_report(const Context& ctx) {
  const std::string p = require_input(ctx, "eval.json", "train");
  Json evals;
  try {
    evals = Json::parse(read_text_file(p));
  } catch (const Json::parse_error& e) {
    throw ValidationError(p + ": invalid JSON: " + e.what());
  }
  if (!evals.is_array()) throw ValidationError(p + ": expected a JSON array");
  std::vector<EvalReport> reports;
  for (const auto& j : evals) {
    EvalReport r = eval_from_json(j);
    if (std::find(ctx.config.questions.begin(), ctx.config.questions.end(), r.question) != ctx.config.questions.end())
      reports.push_back(std::move(r));
  }
  if (reports.empty()) throw ValidationError(p + ": no evaluation records for the selected questions");
  std::stable_sort(reports.begin(), reports.end(), [](const EvalReport& a, const EvalReport& b) {
    if (a.question != b.question) return a.question < b.question;
    return (a.variant == "eight") > (b.variant == "eight");
  });

  std::string table = "question  variant    precision  recall     f_measure";
  for (const auto& r : reports) {
    char line[128];
    std::snprintf(line, sizeof line, "\n%-9d %-10s %-10s %-10s %s", r.question, r.variant.c_str(),
                  format_number(r.precision).c_str(), format_number(r.recall).c_str(), format_number(r.f_measure).c_str());
    table += line;
  }
  ctx.info(table);

  Artifacts out = {{"comparison.csv", comparison_csv(reports)}};
  if (ctx.config.format == OutputFormat::kJson) out.emplace_back("comparison.json", dump(comparison_json(reports)));
  write_artifacts(ctx, out);
  return RunStatus::kOk;
}

RunStatus run_synth(const Context& ctx) {
  const SyntheticDataset ds = make_synthetic_dataset(ctx.config.seed, ctx.config.synthetic_users);
  write_artifacts(ctx, {{"profiles.jsonl", profiles_jsonl(ds.profiles)}, {"survey.csv", survey_csv(ds.responses)}});
  return RunStatus::kOk;
}

}  // namespace

RunStatus run_subcommand(const std::string& name, const PipelineConfig& config, const MessageSink& sink) {
  config.validate();
  const Context ctx{config, sink};
  if (name == "ingest") return run_ingest(ctx);
  if (name == "check") return run_check(ctx);
  if (name == "efa") return run_efa(ctx);
  if (name == "train") return run_train(ctx);
  if (name == "report") return run_report(ctx);
  if (name == "synth") return run_synth(ctx);
  throw ValidationError("unknown subcommand '" + name + "' (expected ingest, check, efa, train, report or synth)");
}

}  // namespace factorlens
