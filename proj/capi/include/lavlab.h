#ifndef LAVLAB_H
#define LAVLAB_H

/* C interface to the variational-balance laboratory. All entry points return
 * a lav_status; outputs are written through pointers only on LAV_OK. String
 * outputs are heap copies released with lav_string_free. Handles are opaque
 * and released with their destroy function. lav_last_error returns a
 * thread-local message describing the most recent failure. */

#include <stddef.h>
#include <stdint.h>

#ifdef __cplusplus
extern "C" {
#endif

typedef enum lav_status {
  LAV_OK = 0,
  LAV_EINVAL = 1,        /* argument outside the documented range */
  LAV_EDOMAIN = 2,       /* evaluation point outside the problem domain */
  LAV_EUNSUPPORTED = 3,  /* operation undefined for this structure */
  LAV_ENOMEM = 4,
  LAV_EIO = 5,
  LAV_EINTERNAL = 6
} lav_status;

typedef struct lav_lagrangian lav_lagrangian;
typedef struct lav_report lav_report;

const char* lav_version(void);
const char* lav_last_error(void);
void lav_string_free(char* s);

/* JSON array describing every built-in problem with its defaults. */
lav_status lav_catalog_json(char** out_json);

/* params_json: JSON object of parameter overrides, or NULL/"" for defaults. */
lav_status lav_lagrangian_create(const char* name, const char* params_json,
                                 lav_lagrangian** out);
void lav_lagrangian_destroy(lav_lagrangian* L);
lav_status lav_lagrangian_eval(const lav_lagrangian* L, const double* x, size_t x_len,
                               double t, const double* xi, size_t xi_len,
                               double* out_value);

lav_status lav_inf_over_ball(const lav_lagrangian* L, const double* x, size_t x_len,
                             double eps, double t, const double* xi, size_t xi_len,
                             int ball_samples, double* out_value);

/* Convex minorant of the localized radial profile as JSON
 * {"s": [...], "w": [...], "final_slope": ...}. axis -1 means the first
 * axis (isotropic case). */
lav_status lav_radial_envelope_json(const lav_lagrangian* L, const double* x,
                                    size_t x_len, double eps, double t, double s_cap,
                                    int axis, char** out_json);

/* spec_json keys (all optional): condition ("hiso0"|"hiso"|"hd2"|"hconv"),
 * k1, k2, eps (array) or eps_levels (count), t_grid (array) or t_points
 * (count), x_list (array of points) or x_points (count per axis), xi_list
 * (array of probes) or xi_points (radial grid size), ball_samples,
 * ratio_cap, slope_satisfied, slope_violated, threads. */
lav_status lav_check_condition(const lav_lagrangian* L, const char* spec_json,
                               lav_report** out);
lav_status lav_iso_implies_conv(const lav_lagrangian* L, const char* spec_json,
                                lav_report** out);

/* target: "linear" (the boundary datum), "singular" (the problem's reference
 * profile) or "power:A" for the normalized profile with exponent A > 0. */
lav_status lav_run_scheme(const lav_lagrangian* L, const char* target, int steps,
                          int out_nodes, lav_report** out);
lav_status lav_boundary_match(const lav_lagrangian* L, const char* target, double eps,
                              double delta, double s, int out_nodes, lav_report** out);

/* experiment_json keys (problem required): problem, params, bc ([left,right]),
 * levels (array of cell counts), graded_beta, iters, restarts, quad_order,
 * seed. */
lav_status lav_gap_probe(const char* experiment_json, lav_report** out);

lav_status lav_demo(const char* problem, const char* params_json, int steps,
                    uint64_t seed, lav_report** out);

lav_status lav_report_json(const lav_report* report, char** out_json);
/* LAV_EINVAL when the report carries no table. */
lav_status lav_report_csv(const lav_report* report, char** out_csv);
lav_status lav_report_verdict(const lav_report* report, char** out_verdict);
/* Mesh-probe reports write their file set plus index.json into dir (basename
 * is ignored for them); other reports write basename.json and basename.csv. */
lav_status lav_report_write(const lav_report* report, const char* dir,
                            const char* basename, int write_dat);
void lav_report_destroy(lav_report* report);

#ifdef __cplusplus
}
#endif

#endif /* LAVLAB_H */
