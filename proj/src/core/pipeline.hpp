#pragma once

#include <cstddef>
#include <cstdint>
#include <functional>
#include <string>
#include <vector>

#include "classify.hpp"
#include "efa.hpp"
#include "suitability.hpp"
#include "synthetic.hpp"

namespace factorlens {

enum class OutputFormat { kJson, kCsv };

struct PipelineConfig {
  std::string profiles_path;
  std::string survey_path;
  std::string out_dir = "factorlens-out";
  std::size_t window = 10;
  RetentionRule retention;
  double cutoff = 0.36;
  bool kaiser_normalize = true;
  ScoreMethod score_method = ScoreMethod::kRegression;
  bool log1p = false;
  double l2 = 1e-4;
  int folds = 10;
  std::uint64_t seed = kBundledSeed;
  OutputFormat format = OutputFormat::kJson;
  std::vector<int> questions = {1, 2, 3, 4, 5, 6};
  bool lenient = false;
  Averaging averaging = Averaging::kWeighted;
  SuitabilityThresholds thresholds;
  std::size_t synthetic_users = 100;

  /// Throws ValidationError when a numeric field is out of range.
  void validate() const;
};

enum class MessageLevel { kInfo, kWarning };
using MessageSink = std::function<void(MessageLevel, const std::string&)>;

enum class RunStatus { kOk = 0, kCheckFailed = 1 };

/// Runs one of ingest, check, efa, train, report, synth. Every input is read
/// and validated, and every artifact rendered, before the first file is
/// written. Throws ValidationError / NumericalError.
RunStatus run_subcommand(const std::string& name, const PipelineConfig& config, const MessageSink& sink = {});

/// Parses "1".."6" or "all".
std::vector<int> parse_question_selector(const std::string& text);

}  // namespace factorlens
