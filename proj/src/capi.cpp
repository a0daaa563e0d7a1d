#include "airtree/airtree.h"

#include <cstring>
#include <sstream>
#include <string>

#include "airtree/fusion.hpp"
#include "airtree/geodesic.hpp"
#include "airtree/loss.hpp"
#include "airtree/metrics.hpp"
#include "airtree/phantom.hpp"
#include "airtree/skeleton.hpp"
#include "airtree/types.hpp"
#include "airtree/volume.hpp"
#include "airtree/volume_io.hpp"

struct at_volume {
  airtree::ScalarVolume v;
};

struct at_mask {
  airtree::BinaryMask m;
};

struct at_phantom {
  airtree::PhantomOutput out;
  at_mask label_view;
  at_mask centerline_view;
};

namespace {

thread_local std::string g_last_error;

at_status to_status(airtree::ErrorCode code) {
  return static_cast<at_status>(static_cast<int>(code));
}

template <typename Fn>
at_status guarded(Fn&& fn) {
  try {
    fn();
    g_last_error.clear();
    return AT_OK;
  } catch (const airtree::Error& e) {
    g_last_error = e.what();
    return to_status(e.code());
  } catch (const std::exception& e) {
    g_last_error = e.what();
    return AT_E_INTERNAL;
  }
}

at_status fail_bad_args(const char* message) {
  g_last_error = message;
  return AT_E_BAD_ARGS;
}

airtree::Vec3i to_dims(const int64_t dims[3]) {
  if (dims[0] <= 0 || dims[1] <= 0 || dims[2] <= 0 || dims[0] > (1 << 30) ||
      dims[1] > (1 << 30) || dims[2] > (1 << 30)) {
    throw airtree::Error(airtree::ErrorCode::BadArgs, "dims must be positive");
  }
  return airtree::Vec3i{static_cast<int>(dims[0]), static_cast<int>(dims[1]),
                        static_cast<int>(dims[2])};
}

airtree::Vec3d to_spacing(const double spacing[3]) {
  if (!(spacing[0] > 0 && spacing[1] > 0 && spacing[2] > 0)) {
    throw airtree::Error(airtree::ErrorCode::BadArgs,
                         "spacing must be positive");
  }
  return airtree::Vec3d{spacing[0], spacing[1], spacing[2]};
}

airtree::GeodesicMetric to_metric(at_metric metric) {
  switch (metric) {
    case AT_METRIC_GRAYVALUE: return airtree::GeodesicMetric::GrayvalueSum;
    case AT_METRIC_GRADIENT: return airtree::GeodesicMetric::Gradient;
    case AT_METRIC_EUCLIDEAN: return airtree::GeodesicMetric::Euclidean;
  }
  throw airtree::Error(airtree::ErrorCode::BadArgs, "unknown metric");
}

airtree::ElementType to_element_type(at_element_type type) {
  switch (type) {
    case AT_ELEM_UINT8: return airtree::ElementType::UInt8;
    case AT_ELEM_INT16: return airtree::ElementType::Int16;
    case AT_ELEM_FLOAT32: return airtree::ElementType::Float32;
  }
  throw airtree::Error(airtree::ErrorCode::BadArgs, "unknown element type");
}

at_element_type from_element_type(airtree::ElementType type) {
  switch (type) {
    case airtree::ElementType::UInt8: return AT_ELEM_UINT8;
    case airtree::ElementType::Int16: return AT_ELEM_INT16;
    case airtree::ElementType::Float32: return AT_ELEM_FLOAT32;
  }
  return AT_ELEM_FLOAT32;
}

void fill_eval(const airtree::EvalResult& r, at_eval_result* out) {
  out->precision_pct = r.precision_pct;
  out->tree_length_pct = r.tree_length_pct;
  out->branch_detected_pct = r.branch_detected_pct;
  out->tp = r.tp;
  out->fp = r.fp;
  out->fn = r.fn;
  out->branches_total = r.branches_total;
  out->branches_detected = r.branches_detected;
  out->branch_any_pct = r.branch_any_pct;
  out->branch_full_pct = r.branch_full_pct;
  out->tree_total_mm = r.tree_total_mm;
  out->tree_covered_mm = r.tree_covered_mm;
  out->degenerate = r.degenerate ? 1 : 0;
}

std::vector<std::string> split_csv(const std::string& csv) {
  std::vector<std::string> items;
  std::stringstream ss(csv);
  std::string item;
  while (std::getline(ss, item, ',')) {
    if (!item.empty()) items.push_back(item);
  }
  return items;
}

}  // namespace

extern "C" {

const char* at_status_name(at_status status) {
  return airtree::error_code_name(static_cast<airtree::ErrorCode>(status));
}

const char* at_last_error(void) { return g_last_error.c_str(); }

at_status at_volume_create(const int64_t dims[3], const double spacing[3],
                           at_volume** out) {
  if (!dims || !spacing || !out) return fail_bad_args("null argument");
  return guarded([&] {
    *out = new at_volume{airtree::ScalarVolume(to_dims(dims), to_spacing(spacing))};
  });
}

at_status at_volume_read(const char* path, at_volume** out,
                         at_element_type* type_out) {
  if (!path || !out) return fail_bad_args("null argument");
  return guarded([&] {
    airtree::VolumeFile file = airtree::read_volume(path);
    if (type_out) *type_out = from_element_type(file.element_type);
    *out = new at_volume{std::move(file.volume)};
  });
}

at_status at_volume_write(const at_volume* vol, const char* path,
                          at_element_type type) {
  if (!vol || !path) return fail_bad_args("null argument");
  return guarded([&] { airtree::write_volume(vol->v, path, to_element_type(type)); });
}

at_status at_volume_dims(const at_volume* vol, int64_t dims[3]) {
  if (!vol || !dims) return fail_bad_args("null argument");
  dims[0] = vol->v.dims.x;
  dims[1] = vol->v.dims.y;
  dims[2] = vol->v.dims.z;
  return AT_OK;
}

at_status at_volume_spacing(const at_volume* vol, double spacing[3]) {
  if (!vol || !spacing) return fail_bad_args("null argument");
  spacing[0] = vol->v.spacing.x;
  spacing[1] = vol->v.spacing.y;
  spacing[2] = vol->v.spacing.z;
  return AT_OK;
}

at_status at_volume_data(const at_volume* vol, const double** out) {
  if (!vol || !out) return fail_bad_args("null argument");
  *out = vol->v.data.data();
  return AT_OK;
}

at_status at_volume_data_mut(at_volume* vol, double** out) {
  if (!vol || !out) return fail_bad_args("null argument");
  *out = vol->v.data.data();
  return AT_OK;
}

void at_volume_free(at_volume* vol) { delete vol; }

at_status at_mask_create(const int64_t dims[3], const double spacing[3],
                         at_mask** out) {
  if (!dims || !spacing || !out) return fail_bad_args("null argument");
  return guarded([&] {
    *out = new at_mask{airtree::BinaryMask(to_dims(dims), to_spacing(spacing))};
  });
}

at_status at_mask_read(const char* path, at_mask** out) {
  if (!path || !out) return fail_bad_args("null argument");
  return guarded([&] {
    const airtree::VolumeFile file = airtree::read_volume(path);
    *out = new at_mask{airtree::mask_from_volume(file.volume)};
  });
}

at_status at_mask_write(const at_mask* mask, const char* path) {
  if (!mask || !path) return fail_bad_args("null argument");
  return guarded([&] { airtree::write_mask(mask->m, path); });
}

at_status at_mask_dims(const at_mask* mask, int64_t dims[3]) {
  if (!mask || !dims) return fail_bad_args("null argument");
  dims[0] = mask->m.dims.x;
  dims[1] = mask->m.dims.y;
  dims[2] = mask->m.dims.z;
  return AT_OK;
}

at_status at_mask_spacing(const at_mask* mask, double spacing[3]) {
  if (!mask || !spacing) return fail_bad_args("null argument");
  spacing[0] = mask->m.spacing.x;
  spacing[1] = mask->m.spacing.y;
  spacing[2] = mask->m.spacing.z;
  return AT_OK;
}

at_status at_mask_data(const at_mask* mask, const uint8_t** out) {
  if (!mask || !out) return fail_bad_args("null argument");
  *out = mask->m.data.data();
  return AT_OK;
}

at_status at_mask_data_mut(at_mask* mask, uint8_t** out) {
  if (!mask || !out) return fail_bad_args("null argument");
  *out = mask->m.data.data();
  return AT_OK;
}

at_status at_mask_from_volume(const at_volume* vol, at_mask** out) {
  if (!vol || !out) return fail_bad_args("null argument");
  return guarded([&] { *out = new at_mask{airtree::mask_from_volume(vol->v)}; });
}

at_status at_volume_from_mask(const at_mask* mask, at_volume** out) {
  if (!mask || !out) return fail_bad_args("null argument");
  return guarded(
      [&] { *out = new at_volume{airtree::volume_from_mask(mask->m)}; });
}

void at_mask_free(at_mask* mask) { delete mask; }

at_status at_normalize_hu(const at_volume* vol, double lo, double hi,
                          at_volume** out) {
  if (!vol || !out) return fail_bad_args("null argument");
  return guarded(
      [&] { *out = new at_volume{airtree::normalize_hu(vol->v, lo, hi)}; });
}

at_status at_binarize(const at_volume* prob, double threshold, at_mask** out) {
  if (!prob || !out) return fail_bad_args("null argument");
  return guarded(
      [&] { *out = new at_mask{airtree::binarize(prob->v, threshold)}; });
}

at_status at_largest_component(const at_mask* mask, at_mask** out) {
  if (!mask || !out) return fail_bad_args("null argument");
  return guarded(
      [&] { *out = new at_mask{airtree::largest_component(mask->m)}; });
}

at_status at_count_components_26(const at_mask* mask, size_t* out) {
  if (!mask || !out) return fail_bad_args("null argument");
  return guarded([&] {
    *out = airtree::connected_components_26(mask->m).component_count();
  });
}

at_status at_skeletonize(const at_mask* mask, at_mask** out) {
  if (!mask || !out) return fail_bad_args("null argument");
  return guarded([&] { *out = new at_mask{airtree::skeletonize(mask->m)}; });
}

at_status at_geodesic_map(const at_volume* gray, const at_mask* sources,
                          at_metric metric, int scale_by_step_length,
                          at_volume** out) {
  if (!gray || !sources || !out) return fail_bad_args("null argument");
  return guarded([&] {
    airtree::GeodesicOptions options;
    options.scale_by_step_length = scale_by_step_length != 0;
    *out = new at_volume{
        airtree::geodesic_map(gray->v, sources->m, to_metric(metric), options)
            .distances};
  });
}

at_status at_truncate(const at_volume* field, double th, at_volume** out) {
  if (!field || !out) return fail_bad_args("null argument");
  return guarded([&] {
    airtree::GeodesicField wrapped;
    wrapped.distances = field->v;
    *out = new at_volume{airtree::truncate(wrapped, th).values};
  });
}

at_status at_nearest_site_map(const at_mask* sites, uint64_t** out_sites) {
  if (!sites || !out_sites) return fail_bad_args("null argument");
  return guarded([&] {
    const airtree::NearestSiteMap map = airtree::nearest_site_map(sites->m);
    uint64_t* buffer = new uint64_t[map.site_index.size()];
    std::memcpy(buffer, map.site_index.data.data(),
                map.site_index.size() * sizeof(uint64_t));
    *out_sites = buffer;
  });
}

void at_index_buffer_free(uint64_t* buffer) { delete[] buffer; }

at_status at_gdt_feature(const at_volume* ct_hu, const at_volume* stage1_prob,
                         double th, at_metric metric, int scale_by_step_length,
                         at_volume** raw_out, at_volume** truncated_out) {
  if (!ct_hu || !stage1_prob || !raw_out || !truncated_out) {
    return fail_bad_args("null argument");
  }
  return guarded([&] {
    airtree::GeodesicOptions options;
    options.scale_by_step_length = scale_by_step_length != 0;
    airtree::GdtFeature feature = airtree::gdt_feature(
        ct_hu->v, stage1_prob->v, th, to_metric(metric), options);
    *raw_out = new at_volume{std::move(feature.field.distances)};
    *truncated_out = new at_volume{std::move(feature.feature.values)};
  });
}

at_status at_embed_fuse(const at_volume* p_f, const at_volume* p_g,
                        double threshold, at_fusion_mode mode,
                        at_mask** fused_out, at_fusion_report* report) {
  if (!p_f || !p_g || !fused_out) return fail_bad_args("null argument");
  return guarded([&] {
    airtree::FusionMode fusion_mode = airtree::FusionMode::G2F;
    if (mode == AT_FUSE_F2G) fusion_mode = airtree::FusionMode::F2G;
    else if (mode == AT_FUSE_ADD) fusion_mode = airtree::FusionMode::Add;
    airtree::FusionReport r =
        airtree::embed_fuse(p_f->v, p_g->v, threshold, fusion_mode);
    if (report) {
      report->missing_centerline_count = r.missing_centerline.size();
      report->embedded_voxels = r.embedded_voxels;
      report->components_before = r.components_before;
      report->components_after = r.components_after;
      report->degenerate = r.degenerate ? 1 : 0;
    }
    *fused_out = new at_mask{std::move(r.fused)};
  });
}

at_status at_count_breakages(const at_mask* pred, size_t* out) {
  if (!pred || !out) return fail_bad_args("null argument");
  return guarded([&] { *out = airtree::count_breakages(pred->m); });
}

at_status at_bs_loss(const at_volume* pred, const at_mask* centerline,
                     double epsilon, double* out) {
  if (!pred || !centerline || !out) return fail_bad_args("null argument");
  return guarded(
      [&] { *out = airtree::bs_loss(pred->v, centerline->m, epsilon).value; });
}

at_status at_bs_loss_grad(const at_volume* pred, const at_mask* centerline,
                          double epsilon, at_volume** out) {
  if (!pred || !centerline || !out) return fail_bad_args("null argument");
  return guarded([&] {
    *out = new at_volume{airtree::bs_loss_grad(pred->v, centerline->m, epsilon)};
  });
}

at_status at_dice_loss(const at_volume* pred, const at_mask* label,
                       double* out) {
  if (!pred || !label || !out) return fail_bad_args("null argument");
  return guarded([&] { *out = airtree::dice_loss(pred->v, label->m).value; });
}

at_status at_ce_loss(const at_volume* pred, const at_mask* label, double* out) {
  if (!pred || !label || !out) return fail_bad_args("null argument");
  return guarded([&] { *out = airtree::ce_loss(pred->v, label->m).value; });
}

at_status at_total_loss(double base, double bs, double w_t, double* out) {
  if (!out) return fail_bad_args("null argument");
  return guarded([&] {
    *out = airtree::total_loss({base, "base"}, {bs, "bs"}, w_t).value;
  });
}

at_status at_sensitivity(const at_mask* label, const at_mask* centerline,
                         const char* losses, int max_breakages, uint64_t seed,
                         double* r_out) {
  if (!label || !losses || !r_out) return fail_bad_args("null argument");
  return guarded([&] {
    const std::vector<airtree::NamedLoss> named =
        airtree::standard_losses(split_csv(losses));
    airtree::BinaryMask cl =
        centerline ? centerline->m : airtree::skeletonize(label->m);
    const std::vector<airtree::SensitivityCurve> curves =
        airtree::sensitivity_experiment(label->m, cl, named, max_breakages, seed);
    for (std::size_t j = 0; j < curves.size(); ++j) {
      for (std::size_t i = 0; i < curves[j].r.size(); ++i) {
        r_out[j * static_cast<std::size_t>(max_breakages + 1) + i] =
            curves[j].r[i];
      }
    }
  });
}

at_status at_evaluate(const at_mask* pred, const at_mask* label,
                      double branch_threshold, const at_mask* exclude,
                      at_eval_result* out) {
  if (!pred || !label || !out) return fail_bad_args("null argument");
  return guarded([&] {
    fill_eval(airtree::evaluate(pred->m, label->m, branch_threshold,
                                exclude ? &exclude->m : nullptr),
              out);
  });
}

void at_phantom_spec_defaults(at_phantom_spec* spec) {
  if (!spec) return;
  const airtree::PhantomSpec d;
  spec->dims[0] = d.dims.x;
  spec->dims[1] = d.dims.y;
  spec->dims[2] = d.dims.z;
  spec->spacing[0] = d.spacing.x;
  spec->spacing[1] = d.spacing.y;
  spec->spacing[2] = d.spacing.z;
  spec->depth = d.depth;
  spec->root_radius = d.root_radius;
  spec->radius_decay = d.radius_decay;
  spec->segment_length = d.segment_length;
  spec->branch_angle_deg = d.branch_angle_deg;
  spec->seed = d.seed;
}

void at_render_params_defaults(at_render_params* params) {
  if (!params) return;
  const airtree::RenderParams d;
  params->lumen_hu = d.lumen_hu;
  params->wall_hu = d.wall_hu;
  params->parenchyma_hu = d.parenchyma_hu;
  params->with_vessel = d.with_vessel ? 1 : 0;
  params->vessel_hu = d.vessel_hu;
  params->wall_thickness = d.wall_thickness;
  params->noise_sigma = d.noise_sigma;
  params->seed = d.seed;
}

at_status at_phantom_generate(const at_phantom_spec* spec, at_phantom** out) {
  if (!spec || !out) return fail_bad_args("null argument");
  return guarded([&] {
    airtree::PhantomSpec s;
    s.dims = to_dims(spec->dims);
    s.spacing = to_spacing(spec->spacing);
    s.depth = spec->depth;
    s.root_radius = spec->root_radius;
    s.radius_decay = spec->radius_decay;
    s.segment_length = spec->segment_length;
    s.branch_angle_deg = spec->branch_angle_deg;
    s.seed = spec->seed;
    auto* ph = new at_phantom{airtree::generate(s), {}, {}};
    ph->label_view.m = ph->out.label;
    ph->centerline_view.m = ph->out.centerline_gt;
    *out = ph;
  });
}

at_status at_phantom_label(const at_phantom* ph, const at_mask** out) {
  if (!ph || !out) return fail_bad_args("null argument");
  *out = &ph->label_view;
  return AT_OK;
}

at_status at_phantom_centerline(const at_phantom* ph, const at_mask** out) {
  if (!ph || !out) return fail_bad_args("null argument");
  *out = &ph->centerline_view;
  return AT_OK;
}

at_status at_phantom_branch_count(const at_phantom* ph, size_t* out) {
  if (!ph || !out) return fail_bad_args("null argument");
  *out = ph->out.branches_gt.branches.size();
  return AT_OK;
}

at_status at_phantom_render(const at_phantom* ph, const at_render_params* params,
                            at_volume** out) {
  if (!ph || !params || !out) return fail_bad_args("null argument");
  return guarded([&] {
    airtree::RenderParams p;
    p.lumen_hu = params->lumen_hu;
    p.wall_hu = params->wall_hu;
    p.parenchyma_hu = params->parenchyma_hu;
    p.with_vessel = params->with_vessel != 0;
    p.vessel_hu = params->vessel_hu;
    p.wall_thickness = params->wall_thickness;
    p.noise_sigma = params->noise_sigma;
    p.seed = params->seed;
    *out = new at_volume{airtree::render(ph->out, p)};
  });
}

void at_phantom_free(at_phantom* ph) { delete ph; }

at_status at_inject_breakages(const at_mask* mask, int k, int gap_width,
                              uint64_t seed, at_mask** broken_out,
                              size_t* gaps_out) {
  if (!mask || !broken_out) return fail_bad_args("null argument");
  return guarded([&] {
    airtree::BreakageResult r =
        airtree::inject_breakages(mask->m, k, gap_width, seed);
    if (gaps_out) *gaps_out = r.gaps.size();
    *broken_out = new at_mask{std::move(r.mask)};
  });
}

}  // extern "C"
