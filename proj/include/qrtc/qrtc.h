/* C interface to the qrtc tensor completion library.
 *
 * Every function returning qrtc_status reports failures through the code and
 * a thread-local message available from qrtc_last_error(). Objects are opaque
 * and owned by the caller once created; release them with the matching
 * *_free function (NULL is accepted). Modes and band indices are 1-based. */
#ifndef QRTC_H
#define QRTC_H

#include <stddef.h>
#include <stdint.h>

#if defined(_WIN32)
#  if defined(QRTC_BUILDING)
#    define QRTC_API __declspec(dllexport)
#  else
#    define QRTC_API __declspec(dllimport)
#  endif
#else
#  define QRTC_API __attribute__((visibility("default")))
#endif

#ifdef __cplusplus
extern "C" {
#endif

typedef enum qrtc_status {
  QRTC_OK = 0,
  QRTC_ERR_INTERNAL = 1,
  QRTC_ERR_ARGUMENT = 2,
  QRTC_ERR_FORMAT = 3,     /* bad magic or malformed file */
  QRTC_ERR_DIVERGENCE = 4,
  QRTC_ERR_IO = 5,
  QRTC_ERR_TRUNCATED = 6,
  QRTC_ERR_VERSION = 7,
  QRTC_ERR_TYPE = 8        /* tensor file where a mask was expected, or vice versa */
} qrtc_status;

typedef enum qrtc_mask_mode { QRTC_MASK_ELEMENT = 0, QRTC_MASK_PIXEL = 1 } qrtc_mask_mode;
typedef enum qrtc_element_type { QRTC_ELEMENT_FLOAT64 = 0, QRTC_ELEMENT_MASK8 = 1 } qrtc_element_type;
typedef enum qrtc_raw_type { QRTC_RAW_FLOAT32 = 0, QRTC_RAW_FLOAT64 = 1 } qrtc_raw_type;

typedef struct qrtc_tensor qrtc_tensor;
typedef struct qrtc_mask qrtc_mask;
typedef struct qrtc_config qrtc_config;
typedef struct qrtc_report qrtc_report;
typedef struct qrtc_experiment qrtc_experiment;

typedef struct qrtc_quality {
  double mpsnr;
  double mssim; /* NaN when bands are smaller than 11x11 */
  double ergas; /* NaN when a reference band has zero mean */
  double wall_time;
} qrtc_quality;

QRTC_API const char* qrtc_last_error(void);
QRTC_API const char* qrtc_status_name(qrtc_status status);
QRTC_API const char* qrtc_version(void);

/* Tensors: dense float64, first index fastest. `data` may be NULL for zeros. */
QRTC_API qrtc_status qrtc_tensor_create(const size_t* dims, size_t ndim, const double* data, qrtc_tensor** out);
QRTC_API qrtc_status qrtc_tensor_load(const char* path, qrtc_tensor** out);
QRTC_API qrtc_status qrtc_tensor_save(const qrtc_tensor* t, const char* path);
QRTC_API void qrtc_tensor_free(qrtc_tensor* t);
QRTC_API size_t qrtc_tensor_ndim(const qrtc_tensor* t);
QRTC_API size_t qrtc_tensor_size(const qrtc_tensor* t);
/* Copies min(ndim, capacity) extents. */
QRTC_API size_t qrtc_tensor_dims(const qrtc_tensor* t, size_t* dims, size_t capacity);
/* Borrowed pointer valid until the tensor is freed. */
QRTC_API const double* qrtc_tensor_data(const qrtc_tensor* t);
QRTC_API qrtc_status qrtc_tensor_export_pgm(const qrtc_tensor* t, size_t band_mode, size_t band_index,
                                            const char* path);
/* Stacks 2-D band files (.pgm, or raw little-endian row-major floats) into
 * a height x width x bands tensor. width/height only matter for raw files. */
QRTC_API qrtc_status qrtc_tensor_from_bands(const char* const* files, size_t count, size_t width, size_t height,
                                            qrtc_raw_type raw_type, qrtc_tensor** out);

QRTC_API qrtc_status qrtc_file_element_type(const char* path, qrtc_element_type* out);

/* Masks. band_mode 0 selects the last mode (only used in pixel mode). */
QRTC_API qrtc_status qrtc_mask_generate(const size_t* dims, size_t ndim, double sampling_rate, uint64_t seed,
                                        qrtc_mask_mode mode, size_t band_mode, qrtc_mask** out);
QRTC_API qrtc_status qrtc_mask_load(const char* path, qrtc_mask** out);
QRTC_API qrtc_status qrtc_mask_save(const qrtc_mask* m, const char* path);
QRTC_API void qrtc_mask_free(qrtc_mask* m);
QRTC_API size_t qrtc_mask_count(const qrtc_mask* m);
QRTC_API size_t qrtc_mask_size(const qrtc_mask* m);
QRTC_API const uint8_t* qrtc_mask_data(const qrtc_mask* m);

/* Solver configuration. Methods: "tlnm", "tlnmtv", "svt-baseline".
 * Unset parameters keep the method defaults. */
QRTC_API qrtc_status qrtc_config_create(const char* method, qrtc_config** out);
QRTC_API void qrtc_config_free(qrtc_config* c);
QRTC_API qrtc_status qrtc_config_set_alphas(qrtc_config* c, const double* alphas, size_t n);
QRTC_API qrtc_status qrtc_config_set_ranks(qrtc_config* c, const size_t* ranks, size_t n);
QRTC_API qrtc_status qrtc_config_set_betas(qrtc_config* c, const int* betas, size_t n);
QRTC_API qrtc_status qrtc_config_set_mu0(qrtc_config* c, double mu0);
QRTC_API qrtc_status qrtc_config_set_mus(qrtc_config* c, const double mus[5]);
QRTC_API qrtc_status qrtc_config_set_rho(qrtc_config* c, double rho);
QRTC_API qrtc_status qrtc_config_set_eps(qrtc_config* c, double eps);
QRTC_API qrtc_status qrtc_config_set_max_iters(qrtc_config* c, size_t max_iters);
QRTC_API qrtc_status qrtc_config_set_lambda(qrtc_config* c, double lambda);
QRTC_API qrtc_status qrtc_config_set_band_mode(qrtc_config* c, size_t band_mode);

/* Completes `observed` on `mask`. On QRTC_ERR_DIVERGENCE `*report` still
 * receives the partial trace and `*completed` is NULL. */
QRTC_API qrtc_status qrtc_solve(const qrtc_config* c, const qrtc_tensor* observed, const qrtc_mask* mask,
                                qrtc_tensor** completed, qrtc_report** report);

QRTC_API void qrtc_report_free(qrtc_report* r);
QRTC_API size_t qrtc_report_iterations(const qrtc_report* r);
QRTC_API int qrtc_report_converged(const qrtc_report* r);
QRTC_API double qrtc_report_wall_time(const qrtc_report* r);
QRTC_API size_t qrtc_report_history_length(const qrtc_report* r);
QRTC_API qrtc_status qrtc_report_record(const qrtc_report* r, size_t index, double* change,
                                        double* fidelity_residual);
QRTC_API qrtc_status qrtc_report_factor_residuals(const qrtc_report* r, size_t index, double* out, size_t capacity,
                                                  size_t* count);

/* Metrics after scaling both tensors by the reference peak (when above 1). */
QRTC_API qrtc_status qrtc_evaluate(const qrtc_tensor* reference, const qrtc_tensor* estimate, size_t band_mode,
                                   qrtc_quality* out);

/* Full experiment: load, sample, complete, score and write artifacts. */
QRTC_API qrtc_status qrtc_experiment_create(qrtc_experiment** out);
QRTC_API void qrtc_experiment_free(qrtc_experiment* e);
QRTC_API qrtc_status qrtc_experiment_set_input(qrtc_experiment* e, const char* path);
QRTC_API qrtc_status qrtc_experiment_set_output_dir(qrtc_experiment* e, const char* path);
QRTC_API qrtc_status qrtc_experiment_set_config(qrtc_experiment* e, const qrtc_config* c);
QRTC_API qrtc_status qrtc_experiment_set_sampling_rate(qrtc_experiment* e, double sr);
QRTC_API qrtc_status qrtc_experiment_set_seed(qrtc_experiment* e, uint64_t seed);
QRTC_API qrtc_status qrtc_experiment_set_mask_mode(qrtc_experiment* e, qrtc_mask_mode mode);
QRTC_API qrtc_status qrtc_experiment_set_mask_path(qrtc_experiment* e, const char* path);
QRTC_API qrtc_status qrtc_experiment_set_export_pgm(qrtc_experiment* e, int enabled);
/* `quality` and `report` may be NULL. */
QRTC_API qrtc_status qrtc_experiment_run(const qrtc_experiment* e, qrtc_quality* quality, qrtc_report** report);

#ifdef __cplusplus
}
#endif

#endif /* QRTC_H */
