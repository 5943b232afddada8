#include <factorlens/factorlens.h>

#include <math.h>
#include <stdio.h>
#include <string.h>

static int failures = 0;

#define EXPECT(cond)                                                   \
  do {                                                                 \
    if (!(cond)) {                                                     \
      fprintf(stderr, "%s:%d: expected %s\n", __FILE__, __LINE__, #cond); \
      ++failures;                                                      \
    }                                                                  \
  } while (0)

static int near(double a, double b, double tol) { return fabs(a - b) <= tol; }

static void count_messages(fl_message_level level, const char* message, void* user_data) {
  (void)level;
  (void)message;
  ++*(int*)user_data;
}

static void kernels(void) {
  const double m[4] = {2, 1, 1, 2};
  double values[2], vectors[4];
  EXPECT(fl_eigen_sym(m, 2, values, vectors) == FL_OK);
  EXPECT(near(values[0], 3.0, 1e-12) && near(values[1], 1.0, 1e-12));
  EXPECT(near(vectors[0], sqrt(0.5), 1e-12));
  EXPECT(fl_eigen_sym(m, 2, values, NULL) == FL_OK);

  const double r2[4] = {1, 0.5, 0.5, 1};
  double kmo = 0;
  EXPECT(fl_kmo(r2, 2, &kmo) == FL_OK);
  EXPECT(near(kmo, 0.5, 1e-12));

  double chi2 = 0, p = 0;
  int df = 0;
  EXPECT(fl_bartlett(r2, 2, 100, &chi2, &df, &p) == FL_OK);
  EXPECT(near(chi2, 28.049002064048636, 1e-9));
  EXPECT(df == 1);
  EXPECT(near(p, erfc(sqrt(chi2 / 2)), 1e-15));

  EXPECT(fl_chi_square_upper_tail(2.0, 2.0, &p) == FL_OK);
  EXPECT(near(p, exp(-1.0), 1e-14));

  const double data[8] = {1, 1, -1, 1, 1, -1, -1, -1};
  double r[4];
  EXPECT(fl_correlation(data, 4, 2, r) == FL_OK);
  EXPECT(r[0] == 1.0 && near(r[1], 0.0, 1e-15));

  const double loadings[6] = {0.8, 0.3, 0.7, 0.4, 0.2, 0.9};
  double rotated[6], rotation[4];
  EXPECT(fl_varimax(loadings, 3, 2, 1, rotated, rotation) == FL_OK);
  EXPECT(near(rotation[0] * rotation[0] + rotation[2] * rotation[2], 1.0, 1e-12));
}

static void errors(void) {
  const double id[4] = {1, 0, 0, 1};
  double kmo = 0;
  EXPECT(fl_kmo(id, 2, &kmo) == FL_ERR_NUMERICAL);
  EXPECT(strstr(fl_last_error(), "degenerate") != NULL);

  const double asym[4] = {1, 0.5, 0.2, 1};
  EXPECT(fl_kmo(asym, 2, &kmo) == FL_ERR_VALIDATION);
  EXPECT(fl_kmo(NULL, 2, &kmo) == FL_ERR_VALIDATION);
  EXPECT(fl_chi_square_upper_tail(1.0, -1.0, &kmo) == FL_ERR_VALIDATION);

  fl_config* cfg = fl_config_new();
  EXPECT(cfg != NULL);
  EXPECT(fl_config_set(cfg, "nonsense", "1") == FL_ERR_VALIDATION);
  EXPECT(strstr(fl_last_error(), "nonsense") != NULL);
  EXPECT(fl_config_set(cfg, "folds", "abc") == FL_ERR_VALIDATION);
  EXPECT(fl_config_set(cfg, "retention", "cumvar:60") == FL_OK);
  EXPECT(fl_run(cfg, "dance") == FL_ERR_VALIDATION);
  fl_config_free(cfg);
  fl_config_free(NULL);
}

static void models(void) {
  /* y = 1 when x0 - x1 is large; two informative columns. */
  double x[40 * 2];
  int y[40];
  for (int i = 0; i < 40; ++i) {
    x[2 * i] = sin(i * 1.7) * 2.0;
    x[2 * i + 1] = cos(i * 0.9);
    y[i] = x[2 * i] - x[2 * i + 1] + 0.3 * sin(i * 5.1) > 0 ? 1 : 0;
  }
  fl_logit_model* m = NULL;
  EXPECT(fl_logit_fit(x, 40, 2, y, 1e-4, &m) == FL_OK);
  EXPECT(m != NULL);
  EXPECT(fl_logit_converged(m) == 1);
  double w[3];
  EXPECT(fl_logit_weights(m, w) == FL_OK);
  EXPECT(w[1] > 0 && w[2] < 0);
  double prob = 0;
  int label = -1;
  const double probe[2] = {3.0, -1.0};
  EXPECT(fl_logit_predict(m, probe, 2, &prob, &label) == FL_OK);
  EXPECT(prob > 0.9 && label == 1);
  EXPECT(fl_logit_predict(m, probe, 3, &prob, &label) == FL_ERR_VALIDATION);
  fl_logit_free(m);

  int ones[4] = {1, 1, 1, 1};
  m = NULL;
  EXPECT(fl_logit_fit(x, 4, 2, ones, 1e-4, &m) == FL_ERR_VALIDATION);
  EXPECT(m == NULL);

  /* Two blocks of three correlated variables. */
  enum { N = 60, P = 6 };
  double d[N * P];
  for (int i = 0; i < N; ++i) {
    const double f1 = sin(i * 0.37) * 1.3, f2 = cos(i * 0.61 + 0.2);
    for (int j = 0; j < P; ++j) {
      const double noise = 0.25 * sin(i * (j + 2) * 1.13 + j);
      d[i * P + j] = (j < 3 ? f1 : f2) + noise;
    }
  }
  fl_efa_model* e = NULL;
  EXPECT(fl_efa_fit(d, N, P, NULL, "kaiser", 0.36, 1, &e) == FL_OK);
  EXPECT(fl_efa_variables(e) == P);
  EXPECT(fl_efa_factors(e) == 2);
  int assign[P];
  EXPECT(fl_efa_assignment(e, assign) == FL_OK);
  EXPECT(assign[0] == assign[1] && assign[1] == assign[2]);
  EXPECT(assign[3] == assign[4] && assign[4] == assign[5]);
  EXPECT(assign[0] != assign[3] && assign[0] > 0 && assign[3] > 0);
  double eig[P], h[P], rot[P * 2], scores[N * 2];
  EXPECT(fl_efa_eigenvalues(e, eig) == FL_OK);
  EXPECT(eig[0] >= eig[1] && eig[1] > 1.0 && eig[2] < 1.0);
  EXPECT(fl_efa_communalities(e, h) == FL_OK);
  EXPECT(fl_efa_rotated(e, rot) == FL_OK);
  EXPECT(near(rot[0] * rot[0] + rot[1] * rot[1], h[0], 1e-10));
  EXPECT(fl_efa_unrotated(e, rot) == FL_OK);
  EXPECT(fl_efa_scores(e, scores) == FL_OK);
  double mean = 0;
  for (int i = 0; i < N; ++i) mean += scores[2 * i] / N;
  EXPECT(near(mean, 0.0, 1e-12));
  fl_efa_free(e);
  fl_efa_free(NULL);
}

static void pipeline(const char* dir) {
  fl_config* cfg = fl_config_new();
  int messages = 0;
  fl_config_set_message_callback(cfg, count_messages, &messages);
  EXPECT(fl_config_set(cfg, "out", dir) == FL_OK);
  EXPECT(fl_config_set(cfg, "users", "60") == FL_OK);
  EXPECT(fl_run(cfg, "synth") == FL_OK);

  char profiles[1024], survey[1024];
  snprintf(profiles, sizeof profiles, "%s/profiles.jsonl", dir);
  snprintf(survey, sizeof survey, "%s/survey.csv", dir);
  EXPECT(fl_config_set(cfg, "profiles", profiles) == FL_OK);
  EXPECT(fl_config_set(cfg, "survey", survey) == FL_OK);
  EXPECT(fl_run(cfg, "ingest") == FL_OK);
  EXPECT(fl_run(cfg, "check") == FL_OK);
  EXPECT(fl_run(cfg, "efa") == FL_OK);
  EXPECT(fl_config_set(cfg, "folds", "5") == FL_OK);
  EXPECT(fl_run(cfg, "train") == FL_OK);
  EXPECT(fl_run(cfg, "report") == FL_OK);
  EXPECT(messages > 0);

  char path[1024];
  snprintf(path, sizeof path, "%s/comparison.csv", dir);
  FILE* f = fopen(path, "r");
  EXPECT(f != NULL);
  if (f) {
    char line[256];
    EXPECT(fgets(line, sizeof line, f) != NULL);
    EXPECT(strcmp(line, "question,variant,precision,recall,f_measure\n") == 0);
    fclose(f);
  }

  EXPECT(fl_config_set(cfg, "kmo_min", "0.99") == FL_OK);
  EXPECT(fl_run(cfg, "check") == FL_CHECK_FAILED);
  fl_config_free(cfg);
}

int main(int argc, char** argv) {
  EXPECT(strlen(fl_version()) > 0);
  kernels();
  errors();
  models();
  if (argc > 1) pipeline(argv[1]);
  if (failures) {
    fprintf(stderr, "%d check(s) failed\n", failures);
    return 1;
  }
  printf("C API: all checks passed\n");
  return 0;
}
