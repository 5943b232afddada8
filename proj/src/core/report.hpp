#pragma once

#include <array>
#include <string>
#include <string_view>
#include <vector>

#include <json.hpp>

#include "classify.hpp"
#include "efa.hpp"
#include "suitability.hpp"

namespace factorlens {

using Json = nlohmann::ordered_json;

/// Number rounded to 6 significant digits for deterministic artifacts.
Json json_number(double v);

/// Human rendering of a p-value: "<0.0001" below 1e-4.
std::string format_p_value(double p);

Json suitability_json(const SuitabilityReport& rep, const SuitabilityThresholds& thresholds, std::size_t n,
                      std::size_t p);

Json efa_json(const FactorModel& model, const SuitabilityReport& suitability, const EfaOptions& options,
              std::size_t n_observations);

std::string scree_csv(const ScreeSeries& scree);
std::string scree_svg(const ScreeSeries& scree);

/// Row-major matrix with a header of column names and optional row labels.
std::string matrix_csv(const Matrix& m, const std::vector<std::string>& columns,
                       const std::vector<std::string>& row_labels = {}, std::string_view row_header = "variable");

Json eval_json(const EvalReport& rep);
EvalReport eval_from_json(const Json& j);

Json model_json(const LogisticModel& model, int question, const std::string& variant,
                const std::vector<std::string>& feature_names);

/// Published precision/recall/F per question for the eight-feature and
/// three-factor models, carried in reports for side-by-side reading only.
struct PublishedMetrics {
  double precision;
  double recall;
  double f_measure;
};
inline constexpr std::array<PublishedMetrics, kQuestionCount> kPublishedEight = {{
    {0.783, 0.790, 0.786},
    {0.782, 0.788, 0.782},
    {0.714, 0.730, 0.715},
    {0.609, 0.610, 0.609},
    {0.746, 0.760, 0.750},
    {0.700, 0.710, 0.699},
}};
inline constexpr std::array<PublishedMetrics, kQuestionCount> kPublishedThree = {{
    {0.846, 0.904, 0.874},
    {0.843, 0.868, 0.855},
    {0.797, 0.913, 0.851},
    {0.661, 0.750, 0.703},
    {0.823, 0.890, 0.855},
    {0.726, 0.828, 0.774},
}};

/// `question,variant,precision,recall,f_measure`, rows in input order.
std::string comparison_csv(const std::vector<EvalReport>& reports);
Json comparison_json(const std::vector<EvalReport>& reports);

}  // namespace factorlens
