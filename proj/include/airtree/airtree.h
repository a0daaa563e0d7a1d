/* airtree C API: airway-tree reconstruction toolkit.
 *
 * All functions return at_status (AT_OK on success); on failure
 * at_last_error() yields a thread-local message. Objects returned through
 * out-parameters are owned by the caller and released with the matching
 * *_free function. Accessors returning const pointers borrow from the handle.
 */
#ifndef AIRTREE_AIRTREE_H_
#define AIRTREE_AIRTREE_H_

#include <stddef.h>
#include <stdint.h>

#ifdef __cplusplus
extern "C" {
#endif

typedef enum at_status {
  AT_OK = 0,
  AT_E_BAD_ARGS = 1,
  AT_E_DIM_MISMATCH = 2,
  AT_E_EMPTY_FOREGROUND = 3,
  AT_E_DOMAIN = 4,
  AT_E_IO = 5,
  AT_E_BAD_CONFIG = 6,
  AT_E_BOUNDS = 7,
  AT_E_INTERNAL = 8
} at_status;

/* Name of a status code, e.g. "DIM_MISMATCH". */
const char* at_status_name(at_status status);

/* Message of the last failure on this thread; empty string if none. */
const char* at_last_error(void);

/* Dense scalar grid (doubles) and binary grid; x fastest. */
typedef struct at_volume at_volume;
typedef struct at_mask at_mask;

typedef enum at_element_type {
  AT_ELEM_UINT8 = 0,
  AT_ELEM_INT16 = 1,
  AT_ELEM_FLOAT32 = 2
} at_element_type;

typedef enum at_metric {
  AT_METRIC_GRAYVALUE = 0,
  AT_METRIC_GRADIENT = 1,
  AT_METRIC_EUCLIDEAN = 2
} at_metric;

typedef enum at_fusion_mode {
  AT_FUSE_G2F = 0,
  AT_FUSE_F2G = 1,
  AT_FUSE_ADD = 2
} at_fusion_mode;

/* ---- volumes and masks ---- */

at_status at_volume_create(const int64_t dims[3], const double spacing[3],
                           at_volume** out);
at_status at_volume_read(const char* path, at_volume** out,
                         at_element_type* type_out /* nullable */);
at_status at_volume_write(const at_volume* vol, const char* path,
                          at_element_type type);
at_status at_volume_dims(const at_volume* vol, int64_t dims[3]);
at_status at_volume_spacing(const at_volume* vol, double spacing[3]);
/* Borrowed, dims[0]*dims[1]*dims[2] doubles, x fastest. */
at_status at_volume_data(const at_volume* vol, const double** out);
at_status at_volume_data_mut(at_volume* vol, double** out);
void at_volume_free(at_volume* vol);

at_status at_mask_create(const int64_t dims[3], const double spacing[3],
                         at_mask** out);
at_status at_mask_read(const char* path, at_mask** out);
at_status at_mask_write(const at_mask* mask, const char* path);
at_status at_mask_dims(const at_mask* mask, int64_t dims[3]);
at_status at_mask_spacing(const at_mask* mask, double spacing[3]);
/* Borrowed, one byte per voxel, 0 or 1. */
at_status at_mask_data(const at_mask* mask, const uint8_t** out);
at_status at_mask_data_mut(at_mask* mask, uint8_t** out);
at_status at_mask_from_volume(const at_volume* vol, at_mask** out);
at_status at_volume_from_mask(const at_mask* mask, at_volume** out);
void at_mask_free(at_mask* mask);

/* ---- core operations ---- */

at_status at_normalize_hu(const at_volume* vol, double lo, double hi,
                          at_volume** out);
at_status at_binarize(const at_volume* prob, double threshold, at_mask** out);
at_status at_largest_component(const at_mask* mask, at_mask** out);
at_status at_count_components_26(const at_mask* mask, size_t* out);
at_status at_skeletonize(const at_mask* mask, at_mask** out);

/* Multi-source geodesic distance field; unreached voxels hold +inf. */
at_status at_geodesic_map(const at_volume* gray, const at_mask* sources,
                          at_metric metric, int scale_by_step_length,
                          at_volume** out);
/* Truncation: 0 where g >= th, th - g elsewhere. */
at_status at_truncate(const at_volume* field, double th, at_volume** out);
/* Nearest-site linear index per voxel (physical distance, smallest-index
 * ties); out_sites holds one uint64 per voxel. */
at_status at_nearest_site_map(const at_mask* sites, uint64_t** out_sites);
void at_index_buffer_free(uint64_t* buffer);

/* Full geodesic feature pipeline for a CT volume and a stage-1 probability
 * map: normalize -> binarize(0.5) -> largest component -> skeletonize ->
 * geodesic_map -> truncate(th). */
at_status at_gdt_feature(const at_volume* ct_hu, const at_volume* stage1_prob,
                         double th, at_metric metric, int scale_by_step_length,
                         at_volume** raw_out, at_volume** truncated_out);

/* ---- fusion ---- */

typedef struct at_fusion_report {
  size_t missing_centerline_count;
  size_t embedded_voxels;
  size_t components_before;
  size_t components_after;
  int degenerate;
} at_fusion_report;

at_status at_embed_fuse(const at_volume* p_f, const at_volume* p_g,
                        double threshold, at_fusion_mode mode,
                        at_mask** fused_out,
                        at_fusion_report* report /* nullable */);
at_status at_count_breakages(const at_mask* pred, size_t* out);

/* ---- losses ---- */

at_status at_bs_loss(const at_volume* pred, const at_mask* centerline,
                     double epsilon, double* out);
at_status at_bs_loss_grad(const at_volume* pred, const at_mask* centerline,
                          double epsilon, at_volume** out);
at_status at_dice_loss(const at_volume* pred, const at_mask* label, double* out);
at_status at_ce_loss(const at_volume* pred, const at_mask* label, double* out);
at_status at_total_loss(double base, double bs, double w_t, double* out);

/* Sensitivity harness: `losses` is a comma-separated list from {bs,dice,ce}.
 * r_out must hold n_losses * (max_breakages + 1) doubles, laid out loss-major
 * in the order given. centerline may be NULL (the label is skeletonized). */
at_status at_sensitivity(const at_mask* label,
                         const at_mask* centerline /* nullable */,
                         const char* losses, int max_breakages, uint64_t seed,
                         double* r_out);

/* ---- metrics ---- */

typedef struct at_eval_result {
  double precision_pct;
  double tree_length_pct;
  double branch_detected_pct;
  size_t tp, fp, fn;
  size_t branches_total, branches_detected;
  double branch_any_pct;
  double branch_full_pct;
  double tree_total_mm;
  double tree_covered_mm;
  int degenerate;
} at_eval_result;

/* exclude (nullable) masks a region out of both prediction and label. */
at_status at_evaluate(const at_mask* pred, const at_mask* label,
                      double branch_threshold, const at_mask* exclude,
                      at_eval_result* out);

/* ---- phantoms ---- */

typedef struct at_phantom at_phantom;

typedef struct at_phantom_spec {
  int64_t dims[3];
  double spacing[3];
  int depth;
  double root_radius;
  double radius_decay;
  double segment_length;
  double branch_angle_deg;
  uint64_t seed;
} at_phantom_spec;

typedef struct at_render_params {
  double lumen_hu;
  double wall_hu;
  double parenchyma_hu;
  int with_vessel;
  double vessel_hu;
  double wall_thickness;
  double noise_sigma;
  uint64_t seed;
} at_render_params;

void at_phantom_spec_defaults(at_phantom_spec* spec);
void at_render_params_defaults(at_render_params* params);

at_status at_phantom_generate(const at_phantom_spec* spec, at_phantom** out);
/* Borrowed views of the generated phantom. */
at_status at_phantom_label(const at_phantom* ph, const at_mask** out);
at_status at_phantom_centerline(const at_phantom* ph, const at_mask** out);
at_status at_phantom_branch_count(const at_phantom* ph, size_t* out);
/* Renders intensities into a fresh volume owned by the caller. */
at_status at_phantom_render(const at_phantom* ph,
                            const at_render_params* params, at_volume** out);
void at_phantom_free(at_phantom* ph);

/* Cuts k gaps across distinct distal branches; broken_out receives the new
 * mask and gaps_out (nullable) the number of gaps actually cut (== k). */
at_status at_inject_breakages(const at_mask* mask, int k, int gap_width,
                              uint64_t seed, at_mask** broken_out,
                              size_t* gaps_out);

#ifdef __cplusplus
}
#endif

#endif /* AIRTREE_AIRTREE_H_ */
