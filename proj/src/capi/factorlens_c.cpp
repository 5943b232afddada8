#include "factorlens/factorlens.h"

#include <algorithm>
#include <charconv>
#include <cstring>
#include <memory>
#include <new>
#include <string>

#include "core/classify.hpp"
#include "core/efa.hpp"
#include "core/error.hpp"
#include "core/matrix.hpp"
#include "core/pipeline.hpp"
#include "core/special.hpp"
#include "core/suitability.hpp"

using namespace factorlens;

struct fl_config {
  PipelineConfig config;
  fl_message_fn callback = nullptr;
  void* user_data = nullptr;
};

struct fl_efa_model {
  FactorModel model;
  Matrix scores;
};

struct fl_logit_model {
  LogisticModel model;
};

namespace {

thread_local std::string g_last_error;

fl_status fail(fl_status s, const char* what) {
  g_last_error = what;
  return s;
}

template <typename F>
fl_status guarded(F&& body) {
  g_last_error.clear();
  try {
    return body();
  } catch (const ValidationError& e) {
    return fail(FL_ERR_VALIDATION, e.what());
  } catch (const NumericalError& e) {
    return fail(FL_ERR_NUMERICAL, e.what());
  } catch (const std::bad_alloc&) {
    return fail(FL_ERR_INTERNAL, "out of memory");
  } catch (const std::exception& e) {
    return fail(FL_ERR_INTERNAL, e.what());
  } catch (...) {
    return fail(FL_ERR_INTERNAL, "unknown error");
  }
}

void require(const void* p, const char* name) {
  if (!p) throw ValidationError(std::string(name) + " must not be NULL");
}

Matrix copy_in(const double* data, std::size_t rows, std::size_t cols) {
  require(data, "input matrix");
  return Matrix(rows, cols, std::vector<double>(data, data + rows * cols));
}

void copy_out(const Matrix& m, double* out) { std::copy(m.data().begin(), m.data().end(), out); }

DataMatrix data_matrix(const double* data, std::size_t n, std::size_t p, const char* const* names) {
  std::vector<std::string> cols;
  for (std::size_t j = 0; j < p; ++j) cols.push_back(names && names[j] ? names[j] : "v" + std::to_string(j + 1));
  return DataMatrix(copy_in(data, n, p), std::move(cols));
}

bool parse_bool(const std::string& key, const std::string& v) {
  if (v == "true" || v == "1" || v == "yes") return true;
  if (v == "false" || v == "0" || v == "no") return false;
  throw ValidationError(key + ": expected true or false, got '" + v + "'");
}

double parse_double(const std::string& key, const std::string& v) {
  std::size_t used = 0;
  double d = 0.0;
  try {
    d = std::stod(v, &used);
  } catch (const std::exception&) {
    used = 0;
  }
  if (v.empty() || used != v.size()) throw ValidationError(key + ": expected a number, got '" + v + "'");
  return d;
}

std::uint64_t parse_u64(const std::string& key, const std::string& v) {
  std::uint64_t x = 0;
  auto [ptr, ec] = std::from_chars(v.data(), v.data() + v.size(), x);
  if (v.empty() || ec != std::errc{} || ptr != v.data() + v.size()) {
    throw ValidationError(key + ": expected a non-negative integer, got '" + v + "'");
  }
  return x;
}

void apply_option(PipelineConfig& c, const std::string& key, const std::string& v) {
  if (key == "profiles") c.profiles_path = v;
  else if (key == "survey") c.survey_path = v;
  else if (key == "out") c.out_dir = v;
  else if (key == "window") c.window = parse_u64(key, v);
  else if (key == "retention") c.retention = RetentionRule::parse(v);
  else if (key == "cutoff") c.cutoff = parse_double(key, v);
  else if (key == "kaiser_normalize") c.kaiser_normalize = parse_bool(key, v);
  else if (key == "scores") {
    if (v == "regression") c.score_method = ScoreMethod::kRegression;
    else if (v == "sum-of-assigned") c.score_method = ScoreMethod::kSumOfAssigned;
    else throw ValidationError("scores: expected regression or sum-of-assigned, got '" + v + "'");
  } else if (key == "log1p") c.log1p = parse_bool(key, v);
  else if (key == "l2") c.l2 = parse_double(key, v);
  else if (key == "folds") {
    const auto f = parse_u64(key, v);
    if (f < 2 || f > 1000) throw ValidationError("folds: expected 2..1000, got '" + v + "'");
    c.folds = static_cast<int>(f);
  } else if (key == "seed") c.seed = parse_u64(key, v);
  else if (key == "format") {
    if (v == "json") c.format = OutputFormat::kJson;
    else if (v == "csv") c.format = OutputFormat::kCsv;
    else throw ValidationError("format: expected json or csv, got '" + v + "'");
  } else if (key == "question") c.questions = parse_question_selector(v);
  else if (key == "lenient") c.lenient = parse_bool(key, v);
  else if (key == "averaging") {
    if (v == "weighted") c.averaging = Averaging::kWeighted;
    else if (v == "positive") c.averaging = Averaging::kPositiveOnly;
    else throw ValidationError("averaging: expected weighted or positive, got '" + v + "'");
  } else if (key == "kmo_min") c.thresholds.kmo_min = parse_double(key, v);
  else if (key == "alpha") c.thresholds.alpha = parse_double(key, v);
  else if (key == "users") c.synthetic_users = parse_u64(key, v);
  else throw ValidationError("unknown option '" + key + "'");
}

}  // namespace

extern "C" {

const char* fl_version(void) { return "0.1.0"; }

const char* fl_last_error(void) { return g_last_error.c_str(); }

fl_config* fl_config_new(void) { return new (std::nothrow) fl_config(); }

void fl_config_free(fl_config* config) { delete config; }

fl_status fl_config_set(fl_config* config, const char* key, const char* value) {
  return guarded([&] {
    require(config, "config");
    require(key, "key");
    require(value, "value");
    apply_option(config->config, key, value);
    return FL_OK;
  });
}

void fl_config_set_message_callback(fl_config* config, fl_message_fn fn, void* user_data) {
  if (!config) return;
  config->callback = fn;
  config->user_data = user_data;
}

fl_status fl_run(const fl_config* config, const char* subcommand) {
  return guarded([&] {
    require(config, "config");
    require(subcommand, "subcommand");
    MessageSink sink;
    if (config->callback) {
      sink = [config](MessageLevel level, const std::string& msg) {
        config->callback(level == MessageLevel::kWarning ? FL_MSG_WARNING : FL_MSG_INFO, msg.c_str(), config->user_data);
      };
    }
    const RunStatus s = run_subcommand(subcommand, config->config, sink);
    if (s == RunStatus::kCheckFailed) return fail(FL_CHECK_FAILED, "suitability check failed");
    return FL_OK;
  });
}

fl_status fl_correlation(const double* data, size_t n, size_t p, double* out_r) {
  return guarded([&] {
    require(out_r, "out_r");
    copy_out(correlation_matrix(data_matrix(data, n, p, nullptr)).full(), out_r);
    return FL_OK;
  });
}

fl_status fl_eigen_sym(const double* m, size_t p, double* out_values, double* out_vectors) {
  return guarded([&] {
    require(out_values, "out_values");
    const auto eig = eigen_sym(SymMatrix(copy_in(m, p, p)));
    std::copy(eig.eigenvalues.begin(), eig.eigenvalues.end(), out_values);
    if (out_vectors) copy_out(eig.eigenvectors, out_vectors);
    return FL_OK;
  });
}

fl_status fl_kmo(const double* r, size_t p, double* out_kmo) {
  return guarded([&] {
    require(out_kmo, "out_kmo");
    *out_kmo = kmo(SymMatrix(copy_in(r, p, p)));
    return FL_OK;
  });
}

fl_status fl_bartlett(const double* r, size_t p, size_t n, double* out_chi2, int* out_df, double* out_p_value) {
  return guarded([&] {
    const auto b = bartlett_sphericity(SymMatrix(copy_in(r, p, p)), n);
    if (out_chi2) *out_chi2 = b.chi2;
    if (out_df) *out_df = b.df;
    if (out_p_value) *out_p_value = b.p_value;
    return FL_OK;
  });
}

fl_status fl_chi_square_upper_tail(double x, double df, double* out_p) {
  return guarded([&] {
    require(out_p, "out_p");
    *out_p = chi_square_upper_tail(x, df);
    return FL_OK;
  });
}

fl_status fl_varimax(const double* loadings, size_t p, size_t k, int kaiser_normalize, double* out_rotated,
                     double* out_rotation) {
  return guarded([&] {
    require(out_rotated, "out_rotated");
    LoadingMatrix l{copy_in(loadings, p, k), {}};
    for (size_t i = 0; i < p; ++i) l.variables.push_back("v" + std::to_string(i + 1));
    const auto res = varimax_rotate(l, kaiser_normalize != 0);
    copy_out(res.loadings.values, out_rotated);
    if (out_rotation) copy_out(res.rotation, out_rotation);
    return FL_OK;
  });
}

fl_status fl_efa_fit(const double* data, size_t n, size_t p, const char* const* names, const char* retention,
                     double cutoff, int kaiser_normalize, fl_efa_model** out_model) {
  return guarded([&] {
    require(out_model, "out_model");
    *out_model = nullptr;
    const DataMatrix dm = data_matrix(data, n, p, names);
    EfaOptions opts;
    opts.retention = RetentionRule::parse(retention ? retention : "kaiser");
    opts.cutoff = cutoff;
    opts.kaiser_normalize = kaiser_normalize != 0;
    const SymMatrix r = correlation_matrix(dm);
    auto handle = std::make_unique<fl_efa_model>();
    handle->model = fit_efa(r, dm.column_names, opts);
    handle->scores = factor_scores(standardize(dm), r, handle->model.loadings_rotated);
    *out_model = handle.release();
    return FL_OK;
  });
}

void fl_efa_free(fl_efa_model* model) { delete model; }

size_t fl_efa_variables(const fl_efa_model* model) { return model ? model->model.variables.size() : 0; }

size_t fl_efa_factors(const fl_efa_model* model) { return model ? model->model.k : 0; }

fl_status fl_efa_eigenvalues(const fl_efa_model* model, double* out) {
  return guarded([&] {
    require(model, "model");
    require(out, "out");
    std::copy(model->model.eigenvalues.begin(), model->model.eigenvalues.end(), out);
    return FL_OK;
  });
}

fl_status fl_efa_communalities(const fl_efa_model* model, double* out) {
  return guarded([&] {
    require(model, "model");
    require(out, "out");
    std::copy(model->model.communalities.begin(), model->model.communalities.end(), out);
    return FL_OK;
  });
}

fl_status fl_efa_unrotated(const fl_efa_model* model, double* out) {
  return guarded([&] {
    require(model, "model");
    require(out, "out");
    copy_out(model->model.loadings_unrotated.values, out);
    return FL_OK;
  });
}

fl_status fl_efa_rotated(const fl_efa_model* model, double* out) {
  return guarded([&] {
    require(model, "model");
    require(out, "out");
    copy_out(model->model.loadings_rotated.values, out);
    return FL_OK;
  });
}

fl_status fl_efa_assignment(const fl_efa_model* model, int* out) {
  return guarded([&] {
    require(model, "model");
    require(out, "out");
    const auto& f = model->model.assignment.factor;
    for (size_t i = 0; i < f.size(); ++i) out[i] = f[i] ? static_cast<int>(*f[i] + 1) : 0;
    return FL_OK;
  });
}

fl_status fl_efa_scores(const fl_efa_model* model, double* out) {
  return guarded([&] {
    require(model, "model");
    require(out, "out");
    copy_out(model->scores, out);
    return FL_OK;
  });
}

fl_status fl_logit_fit(const double* x, size_t n, size_t d, const int* y, double l2, fl_logit_model** out_model) {
  return guarded([&] {
    require(out_model, "out_model");
    require(y, "y");
    *out_model = nullptr;
    TrainingSet ts;
    ts.features = d ? copy_in(x, n, d) : Matrix(n, 0);
    ts.labels.assign(y, y + n);
    ts.variant = "c-api";
    LogisticOptions opts;
    opts.l2 = l2;
    auto handle = std::make_unique<fl_logit_model>();
    handle->model = fit_logistic(ts, opts);
    *out_model = handle.release();
    return FL_OK;
  });
}

void fl_logit_free(fl_logit_model* model) { delete model; }

fl_status fl_logit_weights(const fl_logit_model* model, double* out) {
  return guarded([&] {
    require(model, "model");
    require(out, "out");
    std::copy(model->model.weights.begin(), model->model.weights.end(), out);
    return FL_OK;
  });
}

int fl_logit_converged(const fl_logit_model* model) { return model && model->model.converged ? 1 : 0; }

fl_status fl_logit_predict(const fl_logit_model* model, const double* x, size_t d, double* out_probability,
                           int* out_label) {
  return guarded([&] {
    require(model, "model");
    if (d) require(x, "x");
    const auto pred = predict(model->model, std::span<const double>(x, d));
    if (out_probability) *out_probability = pred.probability;
    if (out_label) *out_label = pred.label;
    return FL_OK;
  });
}

}  // extern "C"
