#include "report.hpp"

#include <algorithm>
#include <cmath>

#include "csv.hpp"
#include "error.hpp"

namespace factorlens {

Json json_number(double v) { return Json(round_sig6(v)); }

std::string format_p_value(double p) {
  if (p < 1e-4) return "<0.0001";
  return format_number(p);
}

Json suitability_json(const SuitabilityReport& rep, const SuitabilityThresholds& thresholds, std::size_t n,
                      std::size_t p) {
  Json j;
  j["kmo"] = json_number(rep.kmo);
  j["bartlett"] = {{"chi2", json_number(rep.bartlett.chi2)}, {"df", rep.bartlett.df}, {"p", json_number(rep.bartlett.p_value)}};
  j["verdict"] = {{"kmo_pass", rep.kmo_pass}, {"bartlett_pass", rep.bartlett_pass}};
  j["thresholds"] = {{"kmo_min", json_number(thresholds.kmo_min)}, {"alpha", json_number(thresholds.alpha)}};
  j["n_observations"] = n;
  j["n_variables"] = p;
  return j;
}

namespace {

Json loading_json(const LoadingMatrix& l) {
  Json rows = Json::array();
  for (std::size_t i = 0; i < l.n_variables(); ++i) {
    Json vals = Json::array();
    for (std::size_t j = 0; j < l.n_factors(); ++j) vals.push_back(json_number(l.values(i, j)));
    rows.push_back({{"variable", l.variables[i]}, {"loadings", vals}});
  }
  return rows;
}

Json variance_panel(const std::vector<double>& totals, std::size_t p) {
  Json panel = Json::array();
  const auto shares = variance_shares(totals, p);
  for (std::size_t i = 0; i < totals.size(); ++i) {
    panel.push_back({{"component", i + 1},
                     {"total", json_number(totals[i])},
                     {"pct_variance", json_number(shares.pct[i])},
                     {"cumulative_pct", json_number(shares.cumulative[i])}});
  }
  return panel;
}

}  // namespace

Json efa_json(const FactorModel& m, const SuitabilityReport& suitability, const EfaOptions& options,
              std::size_t n_observations) {
  const std::size_t p = m.eigenvalues.size();
  Json j;
  j["n_observations"] = n_observations;
  j["variables"] = m.variables;
  j["retention"] = {{"rule", options.retention.to_string()},
                    {"k", m.k},
                    {"kaiser_k", m.kaiser_k},
                    {"cumvar60_k", m.cumvar60_k},
                    {"scree_suggested_k", m.scree.suggested_k ? Json(*m.scree.suggested_k) : Json(nullptr)}};
  std::vector<double> extracted(m.eigenvalues.begin(), m.eigenvalues.begin() + static_cast<std::ptrdiff_t>(m.k));
  j["variance"] = {{"initial", variance_panel(m.eigenvalues, p)},
                   {"extraction", variance_panel(extracted, p)},
                   {"rotation", variance_panel(m.rotation_ssl, p)}};
  Json comm = Json::array();
  for (std::size_t i = 0; i < p; ++i)
    comm.push_back({{"variable", m.variables[i]}, {"initial", 1}, {"extraction", json_number(m.communalities[i])}});
  j["communalities"] = comm;
  j["loadings_unrotated"] = loading_json(m.loadings_unrotated);
  j["loadings_rotated"] = loading_json(m.loadings_rotated);
  Json rot = Json::array();
  for (std::size_t r = 0; r < m.rotation.rows(); ++r) {
    Json row = Json::array();
    for (std::size_t c = 0; c < m.rotation.cols(); ++c) row.push_back(json_number(m.rotation(r, c)));
    rot.push_back(row);
  }
  j["rotation"] = {{"method", "varimax"},
                   {"kaiser_normalize", options.kaiser_normalize},
                   {"sweeps", m.varimax_sweeps},
                   {"converged", m.varimax_converged},
                   {"matrix", rot}};
  Json assign = Json::array();
  for (std::size_t i = 0; i < p; ++i) {
    const auto& f = m.assignment.factor[i];
    assign.push_back({{"variable", m.variables[i]},
                      {"factor", f ? Json(*f + 1) : Json(nullptr)},
                      {"cross_loading", static_cast<bool>(m.assignment.cross_loading[i])}});
  }
  j["assignment"] = {{"cutoff", json_number(m.assignment.cutoff)}, {"variables", assign}};
  j["suitability"] = {{"kmo", json_number(suitability.kmo)},
                      {"bartlett", {{"chi2", json_number(suitability.bartlett.chi2)},
                                    {"df", suitability.bartlett.df},
                                    {"p", json_number(suitability.bartlett.p_value)}}},
                      {"verdict", {{"kmo_pass", suitability.kmo_pass}, {"bartlett_pass", suitability.bartlett_pass}}}};
  return j;
}

std::string scree_csv(const ScreeSeries& scree) {
  std::string out = "component,eigenvalue\n";
  for (const auto& pt : scree.points) out += std::to_string(pt.component) + "," + format_number(pt.eigenvalue) + "\n";
  return out;
}

std::string scree_svg(const ScreeSeries& scree) {
  constexpr double kWidth = 480, kHeight = 320, kLeft = 56, kRight = 20, kTop = 28, kBottom = 48;
  const double plot_w = kWidth - kLeft - kRight;
  const double plot_h = kHeight - kTop - kBottom;
  double ymax = 1.0;
  for (const auto& pt : scree.points) ymax = std::max(ymax, pt.eigenvalue);
  ymax = std::ceil(ymax);
  const std::size_t count = scree.points.size();
  auto x_of = [&](std::size_t c) {
    return count > 1 ? kLeft + plot_w * static_cast<double>(c - 1) / static_cast<double>(count - 1) : kLeft + plot_w / 2;
  };
  auto y_of = [&](double v) { return kTop + plot_h * (1.0 - std::max(0.0, v) / ymax); };
  auto f = [](double v) { return format_number(v); };

  std::string s;
  s += "<svg xmlns=\"http://www.w3.org/2000/svg\" width=\"" + f(kWidth) + "\" height=\"" + f(kHeight) +
       "\" viewBox=\"0 0 " + f(kWidth) + " " + f(kHeight) + "\">\n";
  s += "<rect width=\"100%\" height=\"100%\" fill=\"white\"/>\n";
  s += "<text x=\"" + f(kWidth / 2) + "\" y=\"18\" text-anchor=\"middle\" font-family=\"sans-serif\" font-size=\"14\">Scree Plot</text>\n";
  s += "<line x1=\"" + f(kLeft) + "\" y1=\"" + f(kTop) + "\" x2=\"" + f(kLeft) + "\" y2=\"" + f(kTop + plot_h) +
       "\" stroke=\"black\"/>\n";
  s += "<line x1=\"" + f(kLeft) + "\" y1=\"" + f(kTop + plot_h) + "\" x2=\"" + f(kLeft + plot_w) + "\" y2=\"" +
       f(kTop + plot_h) + "\" stroke=\"black\"/>\n";
  for (int t = 0; t <= static_cast<int>(ymax); ++t) {
    const double y = y_of(t);
    s += "<text x=\"" + f(kLeft - 8) + "\" y=\"" + f(y + 4) +
         "\" text-anchor=\"end\" font-family=\"sans-serif\" font-size=\"11\">" + std::to_string(t) + "</text>\n";
  }
  for (const auto& pt : scree.points) {
    s += "<text x=\"" + f(x_of(pt.component)) + "\" y=\"" + f(kTop + plot_h + 16) +
         "\" text-anchor=\"middle\" font-family=\"sans-serif\" font-size=\"11\">" + std::to_string(pt.component) +
         "</text>\n";
  }
  s += "<text x=\"" + f(kLeft + plot_w / 2) + "\" y=\"" + f(kHeight - 10) +
       "\" text-anchor=\"middle\" font-family=\"sans-serif\" font-size=\"12\">Component Number</text>\n";
  s += "<text x=\"14\" y=\"" + f(kTop + plot_h / 2) + "\" transform=\"rotate(-90 14 " + f(kTop + plot_h / 2) +
       ")\" text-anchor=\"middle\" font-family=\"sans-serif\" font-size=\"12\">Eigenvalue</text>\n";
  s += "<line x1=\"" + f(kLeft) + "\" y1=\"" + f(y_of(1.0)) + "\" x2=\"" + f(kLeft + plot_w) + "\" y2=\"" + f(y_of(1.0)) +
       "\" stroke=\"gray\" stroke-dasharray=\"4 3\"/>\n";
  std::string pts;
  for (const auto& pt : scree.points) pts += (pts.empty() ? "" : " ") + f(x_of(pt.component)) + "," + f(y_of(pt.eigenvalue));
  s += "<polyline fill=\"none\" stroke=\"steelblue\" stroke-width=\"2\" points=\"" + pts + "\"/>\n";
  for (const auto& pt : scree.points) {
    s += "<circle cx=\"" + f(x_of(pt.component)) + "\" cy=\"" + f(y_of(pt.eigenvalue)) + "\" r=\"3.5\" fill=\"steelblue\"/>\n";
  }
  s += "</svg>\n";
  return s;
}

std::string matrix_csv(const Matrix& m, const std::vector<std::string>& columns,
                       const std::vector<std::string>& row_labels, std::string_view row_header) {
  std::string out;
  bool first = true;
  if (!row_labels.empty()) {
    out += row_header;
    first = false;
  }
  for (const auto& c : columns) {
    out += (first ? "" : ",") + csv_escape(c);
    first = false;
  }
  out += '\n';
  for (std::size_t r = 0; r < m.rows(); ++r) {
    first = true;
    if (!row_labels.empty()) {
      out += csv_escape(row_labels[r]);
      first = false;
    }
    for (std::size_t c = 0; c < m.cols(); ++c) {
      out += (first ? "" : ",") + format_number(m(r, c));
      first = false;
    }
    out += '\n';
  }
  return out;
}

namespace {

Json class_json(const ClassMetrics& m) {
  return {{"precision", json_number(m.precision)},
          {"recall", json_number(m.recall)},
          {"f_measure", json_number(m.f_measure)},
          {"support", m.support}};
}

std::string protocol_text(const EvalReport& rep) {
  return "stratified " + std::to_string(rep.folds) + "-fold cross-validation, single repetition, pooled out-of-fold predictions";
}

}  // namespace

Json eval_json(const EvalReport& rep) {
  Json j;
  j["question"] = rep.question;
  j["variant"] = rep.variant;
  j["precision"] = json_number(rep.precision);
  j["recall"] = json_number(rep.recall);
  j["f_measure"] = json_number(rep.f_measure);
  j["folds"] = rep.folds;
  j["seed"] = rep.seed;
  j["confusion"] = {{"tp", rep.confusion.tp}, {"fp", rep.confusion.fp}, {"fn", rep.confusion.fn}, {"tn", rep.confusion.tn}};
  j["averaging"] = rep.averaging == Averaging::kWeighted ? "weighted" : "positive";
  j["per_class"] = {{"positive", class_json(rep.positive)}, {"negative", class_json(rep.negative)}};
  j["l2"] = json_number(rep.l2);
  j["unconverged_fits"] = rep.unconverged_fits;
  j["protocol"] = protocol_text(rep);
  return j;
}

EvalReport eval_from_json(const Json& j) {
  EvalReport rep;
  try {
    rep.question = j.at("question").get<int>();
    rep.variant = j.at("variant").get<std::string>();
    rep.precision = j.at("precision").get<double>();
    rep.recall = j.at("recall").get<double>();
    rep.f_measure = j.at("f_measure").get<double>();
    rep.folds = j.at("folds").get<int>();
    rep.seed = j.at("seed").get<std::uint64_t>();
    const Json& c = j.at("confusion");
    rep.confusion = {c.at("tp").get<std::size_t>(), c.at("fp").get<std::size_t>(), c.at("fn").get<std::size_t>(),
                     c.at("tn").get<std::size_t>()};
    if (j.contains("averaging")) {
      rep.averaging = j.at("averaging").get<std::string>() == "positive" ? Averaging::kPositiveOnly : Averaging::kWeighted;
    }
    if (j.contains("l2")) rep.l2 = j.at("l2").get<double>();
  } catch (const Json::exception& e) {
    throw ValidationError(std::string("malformed evaluation record: ") + e.what());
  }
  if (rep.question < 1 || rep.question > kQuestionCount) throw ValidationError("evaluation record has question outside 1..6");
  return rep;
}

Json model_json(const LogisticModel& model, int question, const std::string& variant,
                const std::vector<std::string>& feature_names) {
  Json w = Json::array();
  for (double v : model.weights) w.push_back(json_number(v));
  Json names = Json::array({"intercept"});
  for (const auto& n : feature_names) names.push_back(n);
  return {{"question", question},
          {"variant", variant},
          {"terms", names},
          {"weights", w},
          {"converged", model.converged},
          {"iterations", model.iterations},
          {"l2", json_number(model.l2)}};
}

std::string comparison_csv(const std::vector<EvalReport>& reports) {
  std::string out = "question,variant,precision,recall,f_measure\n";
  for (const auto& r : reports) {
    out += std::to_string(r.question) + "," + csv_escape(r.variant) + "," + format_number(r.precision) + "," +
           format_number(r.recall) + "," + format_number(r.f_measure) + "\n";
  }
  return out;
}

Json comparison_json(const std::vector<EvalReport>& reports) {
  Json rows = Json::array();
  for (const auto& r : reports) {
    Json row = {{"question", r.question},
                {"variant", r.variant},
                {"precision", json_number(r.precision)},
                {"recall", json_number(r.recall)},
                {"f_measure", json_number(r.f_measure)},
                {"protocol", protocol_text(r)}};
    const auto& table = r.variant == "eight" ? kPublishedEight : kPublishedThree;
    if (r.variant == "eight" || r.variant == "three") {
      const auto& ref = table[r.question - 1];
      row["published_reference"] = {{"precision", ref.precision}, {"recall", ref.recall}, {"f_measure", ref.f_measure}};
    }
    rows.push_back(row);
  }
  return {{"rows", rows}};
}

}  // namespace factorlens
