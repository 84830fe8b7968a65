/* Sparse dictionary learning toolkit - public C API.
 *
 * The library is a C++ core exposed through opaque handles and status
 * codes. Every function returns sdl_status (SDL_OK on success); on
 * failure sdl_last_error() describes the most recent error in the
 * calling thread. Out-parameters are written only on success. Objects
 * are released with their matching *_free function.
 */
#ifndef SDL_SDL_H
#define SDL_SDL_H

#include <stdint.h>

#ifdef __cplusplus
extern "C" {
#endif

typedef enum sdl_status {
  SDL_OK = 0,
  SDL_ERR_INTERNAL = 1,
  SDL_ERR_CONFIG = 2,
  SDL_ERR_DATA = 3,
  SDL_ERR_DIVERGENCE = 4,
  SDL_ERR_CERTIFY = 5
} sdl_status;

typedef struct sdl_matrix sdl_matrix;   /* dense float64, column-major */
typedef struct sdl_labels sdl_labels;   /* int32 class labels */
typedef struct sdl_config sdl_config;   /* run configuration */
typedef struct sdl_model sdl_model;     /* trained model state */
typedef struct sdl_report sdl_report;   /* training report + certificate */

const char* sdl_last_error(void);
const char* sdl_status_name(sdl_status s);

/* ---- matrices ------------------------------------------------------- */
sdl_status sdl_matrix_create(int64_t rows, int64_t cols, const double* data,
                             sdl_matrix** out);
void sdl_matrix_free(sdl_matrix* m);
int64_t sdl_matrix_rows(const sdl_matrix* m);
int64_t sdl_matrix_cols(const sdl_matrix* m);
const double* sdl_matrix_data(const sdl_matrix* m);

/* SDLFEAT1 feature files (float32 payload, widened to float64). */
sdl_status sdl_features_load(const char* path, sdl_matrix** out);
sdl_status sdl_features_save(const sdl_matrix* m, const char* path);

/* ---- labels ---------------------------------------------------------- */
sdl_status sdl_labels_create(const int32_t* values, int64_t n,
                             sdl_labels** out);
void sdl_labels_free(sdl_labels* l);
int64_t sdl_labels_count(const sdl_labels* l);
const int32_t* sdl_labels_data(const sdl_labels* l);
sdl_status sdl_labels_load(const char* path, sdl_labels** out);
sdl_status sdl_labels_save(const sdl_labels* l, const char* path);

/* ---- synthetic data --------------------------------------------------- */
sdl_status sdl_synthetic_generate(int32_t d, int32_t n, int32_t k, int32_t c,
                                  int32_t t, double noise_sigma,
                                  double cluster_separation, int64_t seed,
                                  sdl_matrix** y, sdl_labels** labels,
                                  sdl_matrix** d_true, sdl_matrix** g_true);

/* ---- configuration ---------------------------------------------------- */
sdl_status sdl_config_load(const char* path, sdl_config** out);
sdl_status sdl_config_parse(const char* text, sdl_config** out);
/* Typed override, e.g. sdl_config_set(cfg, "seed", "7"). Unknown keys are
 * SDL_ERR_CONFIG. Overrides are validated together on the next run. */
sdl_status sdl_config_set(sdl_config* cfg, const char* key, const char* value);
void sdl_config_free(sdl_config* cfg);

/* ---- training / certification ----------------------------------------- */
/* Data may be NULL, in which case the config must describe a synthetic
 * instance. Model and report are always both produced on success. */
sdl_status sdl_train(const sdl_config* cfg, const sdl_matrix* y,
                     const sdl_labels* labels, int32_t with_certificate,
                     sdl_model** out_model, sdl_report** out_report);

/* Runs the convex pipeline plus the certified window. Returns SDL_OK with
 * *out_passed = 0 when the run completed but a certificate check failed. */
sdl_status sdl_certify(const sdl_config* cfg, const sdl_matrix* y,
                       const sdl_labels* labels, sdl_model** out_model,
                       sdl_report** out_report, int32_t* out_passed);

/* ---- model ------------------------------------------------------------ */
sdl_status sdl_model_save(const sdl_model* m, const char* path);
sdl_status sdl_model_load(const char* path, sdl_model** out);
void sdl_model_free(sdl_model* m);
int64_t sdl_model_feature_dim(const sdl_model* m);
int64_t sdl_model_atom_count(const sdl_model* m);
int64_t sdl_model_class_count(const sdl_model* m);
/* 0 = topk, 1 = fista */
int32_t sdl_model_encoder(const sdl_model* m);

/* Sparse-encode test features with the model's encoder. */
sdl_status sdl_model_encode(const sdl_model* m, const sdl_matrix* y,
                            sdl_matrix** out_codes);
/* argmax W g per column; ties to the lowest class index. */
sdl_status sdl_model_classify(const sdl_model* m, const sdl_matrix* codes,
                              sdl_labels** out_pred);
/* Encode + classify + metrics text (free with sdl_string_free). */
sdl_status sdl_model_evaluate(const sdl_model* m, const sdl_matrix* y,
                              const sdl_labels* truth, char** out_metrics_text,
                              double* out_top1);

/* ---- reports ----------------------------------------------------------- */
void sdl_report_free(sdl_report* r);
int64_t sdl_report_iterations(const sdl_report* r);
/* -1 when the report carries no certificate. */
int32_t sdl_report_certificate_passed(const sdl_report* r);
sdl_status sdl_report_write_text(const sdl_report* r, const char* path);
sdl_status sdl_report_write_json(const sdl_report* r, const char* path);

void sdl_string_free(char* s);

#ifdef __cplusplus
} /* extern "C" */
#endif

#endif /* SDL_SDL_H */
