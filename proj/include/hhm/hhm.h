#ifndef HHM_H
#define HHM_H

#include <stddef.h>
#include <stdint.h>

#if defined(HHM_BUILDING_LIBRARY)
#define HHM_API __attribute__((visibility("default")))
#else
#define HHM_API
#endif

#ifdef __cplusplus
extern "C" {
#endif

typedef enum hhm_status {
  HHM_OK = 0,
  HHM_ERR_INVALID = 1,  /* malformed input: spec, dimension, point outside the ball */
  HHM_ERR_GUARD = 2,    /* a numerical guard refused the evaluation */
  HHM_ERR_NUMERIC = 3,  /* non-finite value or failed convergence */
  HHM_ERR_INTERNAL = 4
} hhm_status;

typedef enum hhm_diff_mode { HHM_DIFF_AUTO = 0, HHM_DIFF_ANALYTIC = 1, HHM_DIFF_FD = 2 } hhm_diff_mode;

typedef enum hhm_verdict { HHM_PASS = 0, HHM_FAIL = 1, HHM_SKIP = 2 } hhm_verdict;

typedef struct hhm_rule hhm_rule;
typedef struct hhm_field hhm_field;
typedef struct hhm_report hhm_report;

/* Message of the last failed call on this thread; empty after success. */
HHM_API const char* hhm_last_error(void);
HHM_API const char* hhm_version(void);
/* 0 selects the hardware concurrency. Results do not depend on the count. */
HHM_API void hhm_set_threads(int count);
HHM_API void hhm_string_free(char* s);

/* Sphere rules: n = 2 equispaced, n = 3 Gauss-Legendre x trapezoid, n >= 4
   scrambled Sobol blocks (seeded). */
HHM_API hhm_status hhm_rule_create(int dim, int level, uint64_t seed, hhm_rule** out);
/* As hhm_rule_create, reading and filling the cache directory when given. */
HHM_API hhm_status hhm_rule_cached(int dim, int level, uint64_t seed, const char* cache_dir, hhm_rule** out);
HHM_API hhm_status hhm_rule_load(const char* path, hhm_rule** out);
HHM_API hhm_status hhm_rule_save(const hhm_rule* rule, const char* path);
HHM_API void hhm_rule_free(hhm_rule* rule);
HHM_API int hhm_rule_dim(const hhm_rule* rule);
HHM_API int hhm_rule_level(const hhm_rule* rule);
HHM_API size_t hhm_rule_size(const hhm_rule* rule);
HHM_API hhm_status hhm_rule_node(const hhm_rule* rule, size_t index, double* xi, double* weight);
/* Largest |x| at which fields on this rule may be evaluated. */
HHM_API double hhm_rule_guard_radius(const hhm_rule* rule);
/* sum_i w_i P_h(x, xi_i) */
HHM_API hhm_status hhm_kernel_mass(const hhm_rule* rule, const double* x, double* out);

/* Fields from a boundary-map spec ("identity", "trig:k=3", "table:values=f.txt",
   ...) or a closed-form id ("lacunary", "powersing", "poly"). */
HHM_API hhm_status hhm_field_create(const char* spec, const hhm_rule* rule, int kernel_correction,
                                    hhm_field** out);
/* x -> u(A phi_w(x)); rotation is row-major n x n or NULL for the identity. */
HHM_API hhm_status hhm_field_pullback(const hhm_field* base, const double* w, const double* rotation,
                                      hhm_field** out);
HHM_API void hhm_field_free(hhm_field* field);
HHM_API int hhm_field_dim(const hhm_field* field);
HHM_API int hhm_field_target_dim(const hhm_field* field);
HHM_API double hhm_field_guard_radius(const hhm_field* field);
HHM_API hhm_status hhm_field_set_kernel_correction(hhm_field* field, int on);
HHM_API hhm_status hhm_field_evaluate(const hhm_field* field, const double* x, double* out);
/* Row-major target_dim x dim. */
HHM_API hhm_status hhm_field_jacobian(const hhm_field* field, const double* x, hhm_diff_mode mode, double* out);
HHM_API hhm_status hhm_field_laplacian(const hhm_field* field, const double* x, double h, double* out);

/* M_p(r, u), or M_p(r, ||Du||) when derivative != 0, over the given sphere
   rule; p may be INFINITY. */
HHM_API hhm_status hhm_integral_mean(const hhm_field* field, double r, double p, const hhm_rule* sphere,
                                     int derivative, double* out);
/* Norm estimates. Request keys: functional (bloch | generalized | hardy), p,
   alpha, beta, a, omega, grid {radii, cap, sphere_level, seed, polish}.
   Writes a JSON document to *out_json (free with hhm_string_free). */
HHM_API hhm_status hhm_norm(const hhm_field* field, const char* request_json, char** out_json);

/* kind: rho | pseudo | relative | quasihyperbolic (upper bound with the given
   path resolution). */
HHM_API hhm_status hhm_metric(const char* kind, int dim, const double* x, const double* y, int resolution,
                              double* out);
/* Full quasihyperbolic estimate as JSON: upper, lower, richardson, levels. */
HHM_API hhm_status hhm_quasihyperbolic_json(int dim, const double* x, const double* y, int resolution,
                                            char** out_json);

HHM_API size_t hhm_check_count(void);
HHM_API const char* hhm_check_id(size_t index);
/* Runs one check. Request keys: dim, field, level, seed, kernel_correction,
   cache_dir, options {...}. */
HHM_API hhm_status hhm_verify_run(const char* check_id, const char* request_json, hhm_report** out);
HHM_API void hhm_report_free(hhm_report* report);
HHM_API hhm_verdict hhm_report_verdict(const hhm_report* report);
HHM_API double hhm_report_margin(const hhm_report* report);
HHM_API size_t hhm_report_samples(const hhm_report* report);
HHM_API hhm_status hhm_report_json(const hhm_report* report, char** out_json);

#ifdef __cplusplus
}
#endif

#endif
