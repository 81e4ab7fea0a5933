#ifndef SHOCKLAB_H
#define SHOCKLAB_H

#include <stddef.h>

#if defined(SHOCKLAB_BUILDING)
#define SHOCKLAB_API __attribute__((visibility("default")))
#else
#define SHOCKLAB_API
#endif

#ifdef __cplusplus
extern "C" {
#endif

/* Status codes; every function returning int returns one of these. */
enum {
  SHOCKLAB_OK = 0,
  SHOCKLAB_E_DOMAIN = 1,
  SHOCKLAB_E_CONFIG = 2,
  SHOCKLAB_E_PRECONDITION = 3,
  SHOCKLAB_E_RESOLUTION = 4,
  SHOCKLAB_E_H2 = 5,
  SHOCKLAB_E_D2 = 6,
  SHOCKLAB_E_NO_CONNECTION = 7,
  SHOCKLAB_E_MANIFOLD_DIMENSION = 8,
  SHOCKLAB_E_UNSUPPORTED = 9,
  SHOCKLAB_E_TRACKING_LOSS = 10,
  SHOCKLAB_E_BLOW_UP = 11,
  SHOCKLAB_E_PERTURBATION_TOO_LARGE = 12,
  SHOCKLAB_E_IO = 13,
  SHOCKLAB_E_INCOMPLETE_RUN = 14,
  SHOCKLAB_E_INPUT = 15,
  SHOCKLAB_E_INTERNAL = 16
};

typedef struct shocklab_model shocklab_model;
typedef struct shocklab_profile shocklab_profile;
typedef struct shocklab_config shocklab_config;
typedef struct shocklab_run shocklab_run;
typedef struct shocklab_acceptance shocklab_acceptance;

SHOCKLAB_API const char* shocklab_version(void);
SHOCKLAB_API const char* shocklab_status_name(int status);
/* Message of the last failure on the calling thread ("" if none). */
SHOCKLAB_API const char* shocklab_last_error(void);

/* Models. Parameters are string pairs; frame_speed is accepted by every model. */
SHOCKLAB_API int shocklab_model_names(char* buf, size_t len); /* comma separated */
SHOCKLAB_API int shocklab_model_create(const char* name, const char* const* keys,
                                       const char* const* values, size_t count,
                                       shocklab_model** out);
SHOCKLAB_API void shocklab_model_destroy(shocklab_model* model);
SHOCKLAB_API int shocklab_model_dim(const shocklab_model* model, int* n);
SHOCKLAB_API int shocklab_model_flux(const shocklab_model* model, const double* u, double* f);
/* Rankine-Hugoniot speed in the physical frame. */
SHOCKLAB_API int shocklab_shock_speed(const shocklab_model* model, const double* um,
                                      const double* up, double* speed);
/* Ascending characteristic speeds and l_k B r_k at u; arrays of length n. */
SHOCKLAB_API int shocklab_spectrum(const shocklab_model* model, const double* u, double* speeds,
                                   double* beta);

typedef struct {
  int ell;             /* profile family dimension */
  int overcompressive; /* ell > 1 */
  int incoming_minus;
  int incoming_plus;
} shocklab_shock_class;

SHOCKLAB_API int shocklab_classify_shock(const shocklab_model* model, const double* um,
                                         const double* up, shocklab_shock_class* out);

typedef struct {
  double majda_pego_value;
  int majda_pego;
  double coupling_margin;
  int genuine_coupling;
  double k2_value;
  int k2;
  int strictly_parabolic;
} shocklab_stability;

SHOCKLAB_API int shocklab_stability_checks(const shocklab_model* model, const double* um,
                                           const double* up, shocklab_stability* out);

/* Stationary profiles. The model must already be in the shock frame. */
SHOCKLAB_API int shocklab_profile_solve(const shocklab_model* model, const double* um,
                                        const double* up, shocklab_profile** out);
SHOCKLAB_API void shocklab_profile_destroy(shocklab_profile* profile);
SHOCKLAB_API int shocklab_profile_eval(const shocklab_profile* profile, double x, double* u);
SHOCKLAB_API int shocklab_profile_residual(const shocklab_profile* profile, double* residual);
SHOCKLAB_API int shocklab_profile_tail_rates(const shocklab_profile* profile, double* alpha_minus,
                                             double* alpha_plus);
/* Family dimension found by perturbed shooting. */
SHOCKLAB_API int shocklab_profile_family_dim(const shocklab_profile* profile, int* ell);
SHOCKLAB_API int shocklab_profile_write_csv(const shocklab_profile* profile, const char* path);

/* Heat kernel and diffusion waves. */
SHOCKLAB_API int shocklab_heat_kernel(double x, double t, double* value);
SHOCKLAB_API int shocklab_diffusion_wave(double mass, double beta, double speed, double gamma,
                                         double x, double t, double* value);

/* Experiment configs (INI text). */
SHOCKLAB_API int shocklab_config_load(const char* path, shocklab_config** out);
SHOCKLAB_API int shocklab_config_parse(const char* text, shocklab_config** out);
SHOCKLAB_API void shocklab_config_destroy(shocklab_config* config);
/* 64 hex digits plus NUL; buf must hold 65 bytes. */
SHOCKLAB_API int shocklab_config_hash(const shocklab_config* config, char* buf, size_t len);
SHOCKLAB_API const char* shocklab_config_name(const shocklab_config* config);

typedef struct {
  int dry_run;       /* stop after validation and classification, write nothing */
  unsigned seed;     /* perturbation placement jitter */
  int write_files;
} shocklab_run_options;

SHOCKLAB_API shocklab_run_options shocklab_run_options_default(void);

/* Runs the pipeline. *out is always set; the return value is the run status, and
   shocklab_run_stage names the failing stage when it is nonzero. */
SHOCKLAB_API int shocklab_run_experiment(const shocklab_config* config, const char* out_dir,
                                         const shocklab_run_options* options, shocklab_run** out);
SHOCKLAB_API void shocklab_run_destroy(shocklab_run* run);
SHOCKLAB_API int shocklab_run_status(const shocklab_run* run);
SHOCKLAB_API const char* shocklab_run_stage(const shocklab_run* run);
SHOCKLAB_API const char* shocklab_run_message(const shocklab_run* run);
SHOCKLAB_API const char* shocklab_run_dir(const shocklab_run* run);
SHOCKLAB_API const char* shocklab_run_hash(const shocklab_run* run);
SHOCKLAB_API size_t shocklab_run_metric_count(const shocklab_run* run);
SHOCKLAB_API int shocklab_run_metric_at(const shocklab_run* run, size_t i, const char** key,
                                        double* value);
SHOCKLAB_API int shocklab_run_metric(const shocklab_run* run, const char* key, double* value);

typedef struct {
  const char* quantity; /* v, phi, separation, delta, delta_k, delta_dot, h3 */
  double p;             /* 1, 2, inf; 0 when not a norm */
  int available;
  double exponent;
  double stderr_;
  double predicted;
  const char* rule;     /* "<=", "==", "<0" */
  double threshold;
  double tolerance;
  int pass;
  const char* note;
} shocklab_rate;

SHOCKLAB_API size_t shocklab_run_rate_count(const shocklab_run* run);
SHOCKLAB_API int shocklab_run_rate_at(const shocklab_run* run, size_t i, shocklab_rate* out);

/* Time series of the decomposition: column names and values at each checkpoint. */
SHOCKLAB_API size_t shocklab_run_series_length(const shocklab_run* run);
SHOCKLAB_API size_t shocklab_run_series_columns(const shocklab_run* run);
SHOCKLAB_API const char* shocklab_run_series_name(const shocklab_run* run, size_t column);
SHOCKLAB_API int shocklab_run_series_value(const shocklab_run* run, size_t row, size_t column,
                                           double* value);

/* Acceptance table of a finished run directory. Writes the formatted table into buf
   (truncated to len, NUL terminated) and the full size into *needed. */
SHOCKLAB_API int shocklab_emit_report(const char* run_dir, char* buf, size_t len, size_t* needed);

/* Acceptance criteria 1..11. */
SHOCKLAB_API int shocklab_acceptance_run(const int* ids, size_t count, const char* configs_dir,
                                         const char* out_dir, int jobs, unsigned seed,
                                         shocklab_acceptance** out);
SHOCKLAB_API void shocklab_acceptance_destroy(shocklab_acceptance* acc);
SHOCKLAB_API size_t shocklab_acceptance_count(const shocklab_acceptance* acc);
SHOCKLAB_API int shocklab_acceptance_result(const shocklab_acceptance* acc, size_t i, int* id,
                                            int* pass, const char** line, const char** details);

#ifdef __cplusplus
}
#endif

#endif
