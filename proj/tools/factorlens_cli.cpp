// factorlens - trust-factor analysis pipeline.
//
//   factorlens ingest --profiles p.jsonl --survey s.csv --out run/
//   factorlens check  --out run/
//   factorlens efa    --out run/ --retention kaiser
//   factorlens train  --out run/ --folds 10 --seed 2017
//   factorlens report --out run/
//
// Exit codes: 0 ok, 1 suitability check failed, 2 validation error,
// 3 numerical failure.

#include <cstdio>
#include <map>
#include <memory>
#include <string>

#include <CLI11.hpp>

#include "factorlens/factorlens.h"

namespace {

void print_message(fl_message_level level, const char* message, void* user_data) {
  const bool quiet = *static_cast<bool*>(user_data);
  if (level == FL_MSG_WARNING) {
    std::fprintf(stderr, "warning: %s\n", message);
  } else if (!quiet) {
    std::fprintf(stdout, "%s\n", message);
  }
}

}  // namespace

int main(int argc, char** argv) {
  CLI::App app{"Factor analysis and trust classification over social-profile features", "factorlens"};
  app.require_subcommand(1, 1);
  app.set_version_flag("--version", std::string(fl_version()));

  // Option values are kept as text and handed to the library, which owns
  // parsing and range checks.
  std::map<std::string, std::string> values;
  std::map<std::string, CLI::Option*> options;
  auto text_option = [&](const std::string& flag, const std::string& key, const std::string& help) {
    options[key] = app.add_option(flag, values[key], help);
  };
  text_option("--profiles", "profiles", "Profiles JSONL (ingest)");
  text_option("--survey", "survey", "Survey responses CSV: user_id,question,worker_id,answer (ingest)");
  text_option("--out", "out", "Artifact directory (default factorlens-out)");
  text_option("--window", "window", "Number of most recent posts per profile (default 10)");
  text_option("--retention", "retention", "kaiser | cumvar:<pct> | fixed:<k> (default kaiser)");
  text_option("--cutoff", "cutoff", "Loading cutoff for variable assignment (default 0.36)");
  text_option("--scores", "scores", "Factor score method: regression | sum-of-assigned");
  text_option("--l2", "l2", "L2 penalty on non-intercept logistic weights (default 1e-4)");
  text_option("--folds", "folds", "Cross-validation folds (default 10)");
  text_option("--seed", "seed", "Seed for fold assignment and synthetic data (default 2017)");
  text_option("--format", "format", "json | csv; csv adds CSV companions to JSON artifacts");
  text_option("--question", "question", "1..6 | all (train, report)");
  text_option("--kmo-min", "kmo_min", "KMO pass threshold (default 0.6)");
  text_option("--alpha", "alpha", "Bartlett significance level (default 0.05)");
  text_option("--users", "users", "Number of synthetic users (synth, default 100)");

  bool no_kaiser_normalize = false;
  bool log1p = false;
  bool lenient = false;
  bool positive_only = false;
  bool quiet = false;
  app.add_flag("--no-kaiser-normalize", no_kaiser_normalize, "Rotate without Kaiser row normalization");
  app.add_flag("--log1p", log1p, "Apply log(1+x) to features before correlation");
  app.add_flag("--lenient", lenient, "Map tied or incomplete votes to label 0 with a warning");
  app.add_flag("--positive-only", positive_only, "Report positive-class metrics instead of class-weighted averages");
  app.add_flag("-q,--quiet", quiet, "Only print warnings and errors");

  const std::pair<const char*, const char*> subcommands[] = {
      {"ingest", "Build features.csv and labels.csv from profiles and survey"},
      {"check", "KMO and Bartlett suitability checks -> suitability.json"},
      {"efa", "PCA extraction, retention, varimax -> efa.json, scree.csv, scree.svg, scores.csv"},
      {"train", "Cross-validated logistic regression, eight features vs factor scores -> eval.json"},
      {"report", "Comparison table -> comparison.csv"},
      {"synth", "Write the synthetic three-factor fixture (profiles.jsonl, survey.csv)"},
  };
  for (const auto& [name, help] : subcommands) app.add_subcommand(name, help)->fallthrough();

  try {
    app.parse(argc, argv);
  } catch (const CLI::ParseError& e) {
    const int rc = app.exit(e);
    return e.get_exit_code() == 0 ? rc : FL_ERR_VALIDATION;
  }

  std::unique_ptr<fl_config, decltype(&fl_config_free)> config(fl_config_new(), &fl_config_free);
  if (!config) {
    std::fprintf(stderr, "error: out of memory\n");
    return FL_ERR_INTERNAL;
  }
  fl_config_set_message_callback(config.get(), print_message, &quiet);

  auto set = [&](const std::string& key, const std::string& value) {
    if (fl_config_set(config.get(), key.c_str(), value.c_str()) != FL_OK) {
      std::fprintf(stderr, "error: %s\n", fl_last_error());
      return false;
    }
    return true;
  };
  for (const auto& [key, opt] : options)
    if (opt->count() > 0 && !set(key, values[key])) return FL_ERR_VALIDATION;
  if (no_kaiser_normalize && !set("kaiser_normalize", "false")) return FL_ERR_VALIDATION;
  if (log1p && !set("log1p", "true")) return FL_ERR_VALIDATION;
  if (lenient && !set("lenient", "true")) return FL_ERR_VALIDATION;
  if (positive_only && !set("averaging", "positive")) return FL_ERR_VALIDATION;

  const std::string command = app.get_subcommands().front()->get_name();
  const fl_status status = fl_run(config.get(), command.c_str());
  if (status == FL_CHECK_FAILED) {
    std::fprintf(stderr, "check failed: data do not meet the suitability thresholds\n");
  } else if (status != FL_OK) {
    std::fprintf(stderr, "error: %s\n", fl_last_error());
  }
  return status;
}
