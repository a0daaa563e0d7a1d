// Exercises the external C surface end to end: handles, status codes, and
// the error message channel.
#include <doctest.h>

#include <cstring>
#include <string>
#include <vector>

#include "airtree/airtree.h"

namespace {

struct VolumeHandle {
  at_volume* ptr = nullptr;
  ~VolumeHandle() { at_volume_free(ptr); }
};

struct MaskHandle {
  at_mask* ptr = nullptr;
  ~MaskHandle() { at_mask_free(ptr); }
};

}  // namespace

TEST_CASE("c api: volume lifecycle and normalize") {
  const int64_t dims[3] = {4, 1, 1};
  const double spacing[3] = {1.0, 1.0, 1.0};
  VolumeHandle vol;
  REQUIRE(at_volume_create(dims, spacing, &vol.ptr) == AT_OK);

  double* data = nullptr;
  REQUIRE(at_volume_data_mut(vol.ptr, &data) == AT_OK);
  data[0] = -1000.0;
  data[1] = 600.0;
  data[2] = -200.0;
  data[3] = 900.0;

  VolumeHandle mapped;
  REQUIRE(at_normalize_hu(vol.ptr, -1000.0, 600.0, &mapped.ptr) == AT_OK);
  const double* out = nullptr;
  REQUIRE(at_volume_data(mapped.ptr, &out) == AT_OK);
  CHECK(out[0] == 0.0);
  CHECK(out[1] == 255.0);
  CHECK(out[2] == 128.0);
  CHECK(out[3] == 255.0);

  int64_t got_dims[3] = {};
  REQUIRE(at_volume_dims(mapped.ptr, got_dims) == AT_OK);
  CHECK(got_dims[0] == 4);
}

TEST_CASE("c api: status codes and the error message channel") {
  const int64_t dims[3] = {2, 2, 2};
  const double spacing[3] = {1.0, 1.0, 1.0};
  MaskHandle empty;
  REQUIRE(at_mask_create(dims, spacing, &empty.ptr) == AT_OK);

  at_mask* out = nullptr;
  const at_status status = at_largest_component(empty.ptr, &out);
  CHECK(status == AT_E_EMPTY_FOREGROUND);
  CHECK(std::string(at_status_name(status)) == "EMPTY_FOREGROUND");
  CHECK(std::string(at_last_error()).find("empty foreground") !=
        std::string::npos);
  CHECK(at_normalize_hu(nullptr, 0, 1, nullptr) == AT_E_BAD_ARGS);
}

TEST_CASE("c api: phantom, skeleton, fusion, metrics round trip") {
  at_phantom_spec spec;
  at_phantom_spec_defaults(&spec);
  spec.dims[0] = spec.dims[1] = spec.dims[2] = 64;
  spec.depth = 3;
  spec.root_radius = 4.0;
  spec.radius_decay = 0.6;
  spec.segment_length = 14.0;
  spec.seed = 7;

  at_phantom* phantom = nullptr;
  REQUIRE(at_phantom_generate(&spec, &phantom) == AT_OK);
  const at_mask* label = nullptr;
  REQUIRE(at_phantom_label(phantom, &label) == AT_OK);
  size_t branch_count = 0;
  REQUIRE(at_phantom_branch_count(phantom, &branch_count) == AT_OK);
  CHECK(branch_count == 7);

  // Break it, then fuse the broken mask with the intact one.
  MaskHandle broken;
  size_t gaps = 0;
  REQUIRE(at_inject_breakages(label, 2, 2, 13, &broken.ptr, &gaps) == AT_OK);
  CHECK(gaps == 2);
  size_t breakages = 0;
  REQUIRE(at_count_breakages(broken.ptr, &breakages) == AT_OK);
  CHECK(breakages == 2);

  VolumeHandle p_f, p_g;
  REQUIRE(at_volume_from_mask(broken.ptr, &p_f.ptr) == AT_OK);
  REQUIRE(at_volume_from_mask(label, &p_g.ptr) == AT_OK);

  MaskHandle fused;
  at_fusion_report report;
  REQUIRE(at_embed_fuse(p_f.ptr, p_g.ptr, 0.5, AT_FUSE_G2F, &fused.ptr,
                        &report) == AT_OK);
  CHECK(report.components_before == 3);
  CHECK(report.components_after == 1);
  CHECK(report.embedded_voxels > 0);
  CHECK(report.degenerate == 0);

  at_eval_result eval;
  REQUIRE(at_evaluate(fused.ptr, label, 0.8, nullptr, &eval) == AT_OK);
  CHECK(eval.precision_pct == doctest::Approx(100.0));
  CHECK(eval.tree_length_pct > 99.0);

  // Loss surface.
  MaskHandle centerline;
  REQUIRE(at_skeletonize(label, &centerline.ptr) == AT_OK);
  double loss = -1.0;
  REQUIRE(at_bs_loss(p_g.ptr, centerline.ptr, 1e-6, &loss) == AT_OK);
  CHECK(loss == doctest::Approx(0.0).epsilon(1e-6));
  REQUIRE(at_bs_loss(p_f.ptr, centerline.ptr, 1e-6, &loss) == AT_OK);
  CHECK(loss > 0.0);

  double total = 0.0;
  REQUIRE(at_total_loss(0.2, 0.4, 0.5, &total) == AT_OK);
  CHECK(total == doctest::Approx(0.4));

  // Sensitivity through the C layout.
  std::vector<double> r(2 * 4, -1.0);
  REQUIRE(at_sensitivity(label, nullptr, "bs,dice", 3, 5, r.data()) == AT_OK);
  CHECK(r[0] == 0.0);      // bs, k=0
  CHECK(r[4] == 0.0);      // dice, k=0
  CHECK(r[3] > r[1]);      // bs grows
  at_phantom_free(phantom);
}

TEST_CASE("c api: geodesic and truncation") {
  const int64_t dims[3] = {3, 3, 3};
  const double spacing[3] = {1.0, 1.0, 1.0};
  VolumeHandle gray;
  REQUIRE(at_volume_create(dims, spacing, &gray.ptr) == AT_OK);
  double* g = nullptr;
  at_volume_data_mut(gray.ptr, &g);
  for (int i = 0; i < 27; ++i) g[i] = 7.0;

  MaskHandle sources;
  REQUIRE(at_mask_create(dims, spacing, &sources.ptr) == AT_OK);
  uint8_t* s = nullptr;
  at_mask_data_mut(sources.ptr, &s);
  s[13] = 1;  // center

  VolumeHandle field;
  REQUIRE(at_geodesic_map(gray.ptr, sources.ptr, AT_METRIC_GRAYVALUE, 0,
                          &field.ptr) == AT_OK);
  const double* d = nullptr;
  at_volume_data(field.ptr, &d);
  CHECK(d[13] == 0.0);
  CHECK(d[14] == 14.0);

  VolumeHandle truncated;
  REQUIRE(at_truncate(field.ptr, 20.0, &truncated.ptr) == AT_OK);
  const double* t = nullptr;
  at_volume_data(truncated.ptr, &t);
  CHECK(t[13] == 20.0);
  CHECK(t[14] == 6.0);

  uint64_t* sites = nullptr;
  REQUIRE(at_nearest_site_map(sources.ptr, &sites) == AT_OK);
  CHECK(sites[0] == 13);
  CHECK(sites[13] == 13);
  at_index_buffer_free(sites);
}
