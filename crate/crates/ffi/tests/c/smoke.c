#include <stdio.h>
#include <string.h>
#include "zeroday.h"

#define CHECK(call)                                                   \
  do {                                                                \
    ZdStatus s_ = (call);                                             \
    if (s_ != ZD_STATUS_OK) {                                         \
      char msg[256];                                                  \
      zd_last_error(msg, sizeof msg);                                 \
      fprintf(stderr, "%s -> %d: %s\n", #call, (int)s_, msg);         \
      return 1;                                                       \
    }                                                                 \
  } while (0)

int main(void) {
  ZdDataset *ds = NULL;
  CHECK(zd_dataset_synthesize(2000, 6, 0.2, 3, &ds));
  size_t n = zd_dataset_n_rows(ds), f = zd_dataset_n_features(ds);
  double *x = malloc(n * f * sizeof(double));
  uint8_t *y = malloc(n);
  uint8_t *pred = malloc(n);
  double *score = malloc(n * sizeof(double));
  CHECK(zd_dataset_copy(ds, x, y));

  ZdModel *m = NULL;
  CHECK(zd_model_fit("DT", "{\"max_depth\": 5}", 1, x, n, f, y, &m));
  CHECK(zd_model_predict(m, x, n, f, pred));
  CHECK(zd_model_predict_score(m, x, n, f, score));

  ZdMetrics met;
  double auc = 0.0;
  CHECK(zd_confusion_metrics(y, pred, n, &met));
  CHECK(zd_roc_auc(y, score, n, &auc));

  char *json = NULL;
  CHECK(zd_model_to_json(m, &json));
  ZdModel *back = NULL;
  CHECK(zd_model_from_json(json, &back));
  zd_string_free(json);

  if (zd_model_fit("SVM", NULL, 1, x, n, f, y, &m) != ZD_STATUS_INVALID_ARGUMENT) return 2;
  char msg[64];
  if (zd_last_error(msg, sizeof msg) == 0) return 3;

  printf("rows=%zu accuracy=%.4f auc=%.4f\n", n, met.accuracy, auc);
  zd_model_free(back);
  zd_model_free(m);
  zd_dataset_free(ds);
  free(x); free(y); free(pred); free(score);
  return met.accuracy > 0.8 ? 0 : 4;
}
