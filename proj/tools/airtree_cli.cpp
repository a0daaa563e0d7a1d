// airtree CLI: phantoms, geodesic features, fusion, metrics, and the
// end-to-end pipeline. Core functionality comes through the C API; this
// binary only handles flags, config files, and report records.
#include <cstdint>
#include <cstdio>
#include <filesystem>
#include <fstream>
#include <iostream>
#include <set>
#include <string>
#include <vector>

#include <CLI11.hpp>
#include <json.hpp>

#include "airtree/airtree.h"
#include "kvconfig.hpp"

namespace fs = std::filesystem;
using nlohmann::json;

namespace {

constexpr int kSchemaVersion = 1;

struct CliError {
  at_status status;
  std::string message;
};

[[noreturn]] void fail(at_status status, const std::string& message) {
  throw CliError{status, message};
}

void check(at_status status) {
  if (status != AT_OK) fail(status, at_last_error());
}

// Files written by the current command; removed again if it fails.
std::vector<std::string> g_outputs;

void track_output(const std::string& path) { g_outputs.push_back(path); }

void remove_partial_outputs() {
  for (const std::string& path : g_outputs) {
    std::error_code ec;
    fs::remove(path, ec);
    fs::path raw = fs::path(path).replace_extension(".raw");
    if (fs::path(path).extension() == ".mhd") fs::remove(raw, ec);
  }
}

struct VolumePtr {
  at_volume* ptr = nullptr;
  VolumePtr() = default;
  explicit VolumePtr(at_volume* p) : ptr(p) {}
  VolumePtr(VolumePtr&& other) noexcept : ptr(other.ptr) { other.ptr = nullptr; }
  VolumePtr& operator=(VolumePtr&& other) noexcept {
    std::swap(ptr, other.ptr);
    return *this;
  }
  VolumePtr(const VolumePtr&) = delete;
  VolumePtr& operator=(const VolumePtr&) = delete;
  ~VolumePtr() { at_volume_free(ptr); }
};

struct MaskPtr {
  at_mask* ptr = nullptr;
  MaskPtr() = default;
  explicit MaskPtr(at_mask* p) : ptr(p) {}
  MaskPtr(MaskPtr&& other) noexcept : ptr(other.ptr) { other.ptr = nullptr; }
  MaskPtr& operator=(MaskPtr&& other) noexcept {
    std::swap(ptr, other.ptr);
    return *this;
  }
  MaskPtr(const MaskPtr&) = delete;
  MaskPtr& operator=(const MaskPtr&) = delete;
  ~MaskPtr() { at_mask_free(ptr); }
};

VolumePtr read_volume(const std::string& path) {
  VolumePtr vol;
  check(at_volume_read(path.c_str(), &vol.ptr, nullptr));
  return vol;
}

MaskPtr read_mask(const std::string& path) {
  MaskPtr mask;
  check(at_mask_read(path.c_str(), &mask.ptr));
  return mask;
}

void write_volume(const at_volume* vol, const std::string& path,
                  at_element_type type) {
  track_output(path);
  check(at_volume_write(vol, path.c_str(), type));
}

void write_mask(const at_mask* mask, const std::string& path) {
  track_output(path);
  check(at_mask_write(mask, path.c_str()));
}

at_metric parse_metric(const std::string& name) {
  if (name == "grayvalue") return AT_METRIC_GRAYVALUE;
  if (name == "gradient") return AT_METRIC_GRADIENT;
  if (name == "euclidean") return AT_METRIC_EUCLIDEAN;
  fail(AT_E_BAD_ARGS, "unknown metric '" + name +
                          "' (expected grayvalue|gradient|euclidean)");
}

at_fusion_mode parse_mode(const std::string& name) {
  if (name == "g2f") return AT_FUSE_G2F;
  if (name == "f2g") return AT_FUSE_F2G;
  if (name == "add") return AT_FUSE_ADD;
  fail(AT_E_BAD_ARGS, "unknown fusion mode '" + name + "' (expected g2f|f2g|add)");
}

void append_record(const std::string& path, json record) {
  record["schema_version"] = kSchemaVersion;
  track_output(path);
  std::ofstream out(path, std::ios::app);
  if (!out) fail(AT_E_IO, "cannot write record file '" + path + "'");
  out << record.dump() << '\n';
  if (!out) fail(AT_E_IO, "write failed for record file '" + path + "'");
}

std::string derive_raw_path(const std::string& out_path) {
  fs::path p(out_path);
  const std::string stem = p.stem().string();
  fs::path raw = p.parent_path() / (stem + "_raw" + p.extension().string());
  return raw.string();
}

json eval_to_json(const at_eval_result& r, double branch_threshold) {
  return json{{"precision_pct", r.precision_pct},
              {"tree_length_pct", r.tree_length_pct},
              {"branch_detected_pct", r.branch_detected_pct},
              {"branch_any_pct", r.branch_any_pct},
              {"branch_full_pct", r.branch_full_pct},
              {"branch_threshold", branch_threshold},
              {"tp", r.tp},
              {"fp", r.fp},
              {"fn", r.fn},
              {"branches_total", r.branches_total},
              {"branches_detected", r.branches_detected},
              {"tree_total_mm", r.tree_total_mm},
              {"tree_covered_mm", r.tree_covered_mm},
              {"degenerate", r.degenerate != 0}};
}

json fusion_to_json(const at_fusion_report& r, const std::string& mode) {
  return json{{"mode", mode},
              {"missing_centerline", r.missing_centerline_count},
              {"embedded_voxels", r.embedded_voxels},
              {"components_before", r.components_before},
              {"components_after", r.components_after},
              {"breakages_before", r.components_before > 0 ? r.components_before - 1 : 0},
              {"breakages_after", r.components_after > 0 ? r.components_after - 1 : 0},
              {"degenerate", r.degenerate != 0}};
}

// ---- subcommands ----

void run_phantom(const std::string& spec_path, const std::string& out_dir) {
  static const std::set<std::string> keys = {
      "nx", "ny", "nz", "sx", "sy", "sz", "depth", "root_radius",
      "radius_decay", "segment_length", "branch_angle", "seed", "lumen_hu",
      "wall_hu", "parenchyma_hu", "vessel", "vessel_hu", "wall_thickness",
      "noise_sigma", "breakages", "gap_width"};
  const kvconfig::Config cfg = kvconfig::Config::load(spec_path, keys);

  at_phantom_spec spec;
  at_phantom_spec_defaults(&spec);
  spec.dims[0] = cfg.get_int("nx", spec.dims[0], 8, 2048);
  spec.dims[1] = cfg.get_int("ny", spec.dims[1], 8, 2048);
  spec.dims[2] = cfg.get_int("nz", spec.dims[2], 8, 2048);
  spec.spacing[0] = cfg.get_double("sx", spec.spacing[0], 1e-3, 100.0);
  spec.spacing[1] = cfg.get_double("sy", spec.spacing[1], 1e-3, 100.0);
  spec.spacing[2] = cfg.get_double("sz", spec.spacing[2], 1e-3, 100.0);
  spec.depth = static_cast<int>(cfg.get_int("depth", spec.depth, 1, 10));
  spec.root_radius = cfg.get_double("root_radius", spec.root_radius, 1.0, 64.0);
  spec.radius_decay = cfg.get_double("radius_decay", spec.radius_decay, 1e-3, 1.0);
  spec.segment_length =
      cfg.get_double("segment_length", spec.segment_length, 4.0, 512.0);
  spec.branch_angle_deg =
      cfg.get_double("branch_angle", spec.branch_angle_deg, 1.0, 89.0);
  spec.seed = cfg.get_seed("seed", spec.seed);

  at_render_params params;
  at_render_params_defaults(&params);
  params.lumen_hu = cfg.get_double("lumen_hu", params.lumen_hu, -4000, 4000);
  params.wall_hu = cfg.get_double("wall_hu", params.wall_hu, -4000, 4000);
  params.parenchyma_hu =
      cfg.get_double("parenchyma_hu", params.parenchyma_hu, -4000, 4000);
  params.with_vessel = cfg.get_int("vessel", 0, 0, 1) != 0;
  params.vessel_hu = cfg.get_double("vessel_hu", params.vessel_hu, -4000, 4000);
  params.wall_thickness =
      cfg.get_double("wall_thickness", params.wall_thickness, 0.0, 32.0);
  params.noise_sigma = cfg.get_double("noise_sigma", params.noise_sigma, 0.0, 500.0);
  params.seed = spec.seed;

  const int breakages = static_cast<int>(cfg.get_int("breakages", 0, 0, 64));
  const int gap_width = static_cast<int>(cfg.get_int("gap_width", 2, 1, 16));

  fs::create_directories(out_dir);
  at_phantom* phantom = nullptr;
  check(at_phantom_generate(&spec, &phantom));
  const at_mask* label = nullptr;
  const at_mask* centerline = nullptr;
  at_phantom_label(phantom, &label);
  at_phantom_centerline(phantom, &centerline);

  VolumePtr hu;
  const at_status render_status = at_phantom_render(phantom, &params, &hu.ptr);
  if (render_status != AT_OK) {
    at_phantom_free(phantom);
    fail(render_status, at_last_error());
  }

  write_mask(label, (fs::path(out_dir) / "label.mha").string());
  write_mask(centerline, (fs::path(out_dir) / "centerline.mha").string());
  // Integer HU grid unless noise is enabled.
  write_volume(hu.ptr, (fs::path(out_dir) / "hu.mha").string(),
               params.noise_sigma > 0.0 ? AT_ELEM_FLOAT32 : AT_ELEM_INT16);

  if (breakages > 0) {
    MaskPtr broken;
    size_t gaps = 0;
    const at_status status = at_inject_breakages(label, breakages, gap_width,
                                                 spec.seed, &broken.ptr, &gaps);
    if (status != AT_OK) {
      at_phantom_free(phantom);
      fail(status, at_last_error());
    }
    write_mask(broken.ptr, (fs::path(out_dir) / "pf.mha").string());
    write_mask(label, (fs::path(out_dir) / "pg.mha").string());
  }
  at_phantom_free(phantom);
}

void run_normalize(const std::string& in, double lo, double hi,
                   const std::string& out) {
  const VolumePtr vol = read_volume(in);
  VolumePtr mapped;
  check(at_normalize_hu(vol.ptr, lo, hi, &mapped.ptr));
  write_volume(mapped.ptr, out, AT_ELEM_UINT8);
}

void run_skeletonize(const std::string& in, const std::string& out) {
  const MaskPtr mask = read_mask(in);
  MaskPtr skeleton;
  check(at_skeletonize(mask.ptr, &skeleton.ptr));
  write_mask(skeleton.ptr, out);
}

void run_gdt(const std::string& ct, const std::string& stage1, double th,
             const std::string& metric, bool scale_steps,
             const std::string& out, std::string out_raw) {
  const VolumePtr ct_vol = read_volume(ct);
  const VolumePtr stage1_vol = read_volume(stage1);
  VolumePtr raw, truncated;
  check(at_gdt_feature(ct_vol.ptr, stage1_vol.ptr, th, parse_metric(metric),
                       scale_steps ? 1 : 0, &raw.ptr, &truncated.ptr));
  if (out_raw.empty()) out_raw = derive_raw_path(out);
  write_volume(truncated.ptr, out, AT_ELEM_FLOAT32);
  write_volume(raw.ptr, out_raw, AT_ELEM_FLOAT32);
}

at_fusion_report run_fuse(const std::string& pf, const std::string& pg,
                          const std::string& mode, double threshold,
                          const std::string& out, const std::string& report) {
  const VolumePtr p_f = read_volume(pf);
  const VolumePtr p_g = read_volume(pg);
  MaskPtr fused;
  at_fusion_report fusion{};
  check(at_embed_fuse(p_f.ptr, p_g.ptr, threshold, parse_mode(mode), &fused.ptr,
                      &fusion));
  write_mask(fused.ptr, out);
  if (!report.empty()) append_record(report, fusion_to_json(fusion, mode));
  if (fusion.degenerate) {
    std::cerr << "warning: donor prediction empty, base returned unchanged\n";
  }
  return fusion;
}

at_eval_result run_metrics(const std::string& pred, const std::string& label,
                           double tb, const std::string& exclude,
                           const std::string& out) {
  const MaskPtr pred_mask = read_mask(pred);
  const MaskPtr label_mask = read_mask(label);
  MaskPtr exclude_mask;
  if (!exclude.empty()) exclude_mask = read_mask(exclude);
  at_eval_result result{};
  check(at_evaluate(pred_mask.ptr, label_mask.ptr, tb, exclude_mask.ptr,
                    &result));
  if (!out.empty()) append_record(out, eval_to_json(result, tb));
  return result;
}

void run_sensitivity(const std::string& label_path,
                     const std::string& centerline_path,
                     const std::string& losses, int k, std::uint64_t seed,
                     const std::string& out) {
  const MaskPtr label = read_mask(label_path);
  MaskPtr centerline;
  if (!centerline_path.empty()) centerline = read_mask(centerline_path);

  std::vector<std::string> names;
  std::stringstream ss(losses);
  std::string item;
  while (std::getline(ss, item, ',')) {
    if (!item.empty()) names.push_back(item);
  }
  if (names.empty()) fail(AT_E_BAD_ARGS, "no losses given");

  std::vector<double> r(names.size() * static_cast<std::size_t>(k + 1));
  check(at_sensitivity(label.ptr, centerline.ptr, losses.c_str(), k, seed,
                       r.data()));

  json curves = json::array();
  for (std::size_t j = 0; j < names.size(); ++j) {
    json ks = json::array(), rs = json::array();
    for (int i = 0; i <= k; ++i) {
      ks.push_back(i);
      rs.push_back(r[j * static_cast<std::size_t>(k + 1) +
                     static_cast<std::size_t>(i)]);
    }
    curves.push_back(json{{"loss", names[j]}, {"k", ks}, {"r", rs}});
  }
  append_record(out, json{{"curves", curves}, {"seed", seed}});
}

void run_pipeline(const std::string& config_path) {
  static const std::set<std::string> keys = {
      "ct", "stage1", "pf", "pg", "label", "outdir", "threshold", "th",
      "w_t", "metric", "mode", "tb", "seed"};
  const kvconfig::Config cfg = kvconfig::Config::load(config_path, keys);

  const std::string ct = cfg.get_string("ct");
  const std::string stage1 = cfg.get_string("stage1");
  const std::string pf = cfg.get_string("pf");
  const std::string pg = cfg.get_string("pg");
  const std::string label = cfg.get_string("label");
  const std::string outdir = cfg.get_string("outdir");
  const double threshold = cfg.get_double("threshold", 0.5, 0.0, 1.0);
  const double th = cfg.get_double("th", 512.0, 1e-9, 1e12);
  const double w_t = cfg.get_double("w_t", 0.5, 0.0, 100.0);
  const std::string metric = cfg.get_string("metric", "grayvalue");
  const std::string mode = cfg.get_string("mode", "g2f");
  const double tb = cfg.get_double("tb", 0.8, 1e-9, 1.0);
  const std::uint64_t seed = cfg.get_seed("seed", 0);

  fs::create_directories(outdir);
  const auto out = [&](const char* name) {
    return (fs::path(outdir) / name).string();
  };

  run_gdt(ct, stage1, th, metric, false, out("gdt.mha"), out("gdt_raw.mha"));
  const at_fusion_report fusion =
      run_fuse(pf, pg, mode, threshold, out("fused.mha"), out("fusion.json"));
  const at_eval_result eval =
      run_metrics(out("fused.mha"), label, tb, "", "");

  // Bundled training objective on the fused result: Dice stands in for the
  // base loss, weighted with the breakage-sensitive term.
  const MaskPtr fused_mask = read_mask(out("fused.mha"));
  const MaskPtr label_mask = read_mask(label);
  VolumePtr fused_prob;
  check(at_volume_from_mask(fused_mask.ptr, &fused_prob.ptr));
  MaskPtr label_centerline;
  check(at_skeletonize(label_mask.ptr, &label_centerline.ptr));
  double dice = 0.0, bs = 0.0, total = 0.0;
  check(at_dice_loss(fused_prob.ptr, label_mask.ptr, &dice));
  check(at_bs_loss(fused_prob.ptr, label_centerline.ptr, 1e-6, &bs));
  check(at_total_loss(dice, bs, w_t, &total));

  json record = eval_to_json(eval, tb);
  record["fusion"] = fusion_to_json(fusion, mode);
  record["dice_loss"] = dice;
  record["bs_loss"] = bs;
  record["total_loss"] = total;
  record["w_t"] = w_t;
  record["seed"] = seed;
  append_record(out("eval.json"), record);

  std::cout << "pipeline: precision " << eval.precision_pct << "%, length "
            << eval.tree_length_pct << "%, branch " << eval.branch_detected_pct
            << "%, breakages " << (fusion.components_after - 1) << "\n";
}

}  // namespace

int main(int argc, char** argv) {
  CLI::App app{"airway-tree reconstruction toolkit"};
  app.require_subcommand(1);

  // phantom
  std::string spec_path, out_dir;
  auto* phantom = app.add_subcommand("phantom", "generate a synthetic tree");
  phantom->add_option("--spec", spec_path, "phantom spec (key=value)")->required();
  phantom->add_option("--out", out_dir, "output directory")->required();

  // normalize
  std::string norm_in, norm_out;
  double lo = -1000.0, hi = 600.0;
  auto* normalize = app.add_subcommand("normalize", "clamp HU and map to [0,255]");
  normalize->add_option("--in", norm_in)->required();
  normalize->add_option("--lo", lo, "lower HU bound");
  normalize->add_option("--hi", hi, "upper HU bound");
  normalize->add_option("--out", norm_out)->required();

  // skeletonize
  std::string skel_in, skel_out;
  auto* skeletonize = app.add_subcommand("skeletonize", "thin a mask to its centerline");
  skeletonize->add_option("--in", skel_in)->required();
  skeletonize->add_option("--out", skel_out)->required();

  // gdt
  std::string gdt_ct, gdt_stage1, gdt_metric = "grayvalue", gdt_out, gdt_out_raw;
  double gdt_th = 512.0;
  bool gdt_scale = false;
  auto* gdt = app.add_subcommand("gdt", "geodesic feature from CT + stage-1 prediction");
  gdt->add_option("--ct", gdt_ct)->required();
  gdt->add_option("--stage1", gdt_stage1)->required();
  gdt->add_option("--th", gdt_th, "truncation threshold");
  gdt->add_option("--metric", gdt_metric, "grayvalue|gradient|euclidean");
  gdt->add_option("--out", gdt_out, "truncated field output")->required();
  gdt->add_option("--out-raw", gdt_out_raw, "raw field output (default: <out>_raw)");
  gdt->add_flag("--scale-steps", gdt_scale, "multiply weights by step length");

  // fuse
  std::string fuse_pf, fuse_pg, fuse_mode = "g2f", fuse_out, fuse_report;
  double fuse_threshold = 0.5;
  auto* fuse = app.add_subcommand("fuse", "skeleton-embedding fusion");
  fuse->add_option("--pf", fuse_pf)->required();
  fuse->add_option("--pg", fuse_pg)->required();
  fuse->add_option("--mode", fuse_mode, "g2f|f2g|add");
  fuse->add_option("--threshold", fuse_threshold);
  fuse->add_option("--out", fuse_out)->required();
  fuse->add_option("--report", fuse_report, "fusion report record (appended)");

  // metrics
  std::string met_pred, met_label, met_exclude, met_out;
  double met_tb = 0.8;
  auto* metrics = app.add_subcommand("metrics", "precision / tree length / branch detected");
  metrics->add_option("--pred", met_pred)->required();
  metrics->add_option("--label", met_label)->required();
  metrics->add_option("--tb", met_tb, "branch detection threshold");
  metrics->add_option("--exclude", met_exclude, "mask a region out of the scoring");
  metrics->add_option("--out", met_out, "evaluation record (appended)")->required();

  // sensitivity
  std::string sens_label, sens_centerline, sens_losses = "bs,dice,ce", sens_out;
  int sens_k = 10;
  std::uint64_t sens_seed = 0;
  auto* sensitivity = app.add_subcommand("sensitivity", "loss response to injected breakages");
  sensitivity->add_option("--label", sens_label)->required();
  sensitivity->add_option("--centerline", sens_centerline,
                          "centerline mask (default: skeletonize the label)");
  sensitivity->add_option("--losses", sens_losses, "comma list of bs,dice,ce");
  sensitivity->add_option("--k", sens_k, "max breakages");
  sensitivity->add_option("--seed", sens_seed);
  sensitivity->add_option("--out", sens_out, "curve record (appended)")->required();

  // pipeline
  std::string pipeline_config;
  auto* pipeline = app.add_subcommand("pipeline", "gdt -> fuse -> metrics");
  pipeline->add_option("--config", pipeline_config)->required();

  try {
    app.parse(argc, argv);
  } catch (const CLI::ParseError& e) {
    if (e.get_exit_code() == 0) return app.exit(e);  // --help
    std::cerr << "error: BAD_ARGS: " << e.what() << "\n";
    return AT_E_BAD_ARGS;
  }

  try {
    if (phantom->parsed()) run_phantom(spec_path, out_dir);
    else if (normalize->parsed()) run_normalize(norm_in, lo, hi, norm_out);
    else if (skeletonize->parsed()) run_skeletonize(skel_in, skel_out);
    else if (gdt->parsed())
      run_gdt(gdt_ct, gdt_stage1, gdt_th, gdt_metric, gdt_scale, gdt_out,
              gdt_out_raw);
    else if (fuse->parsed())
      run_fuse(fuse_pf, fuse_pg, fuse_mode, fuse_threshold, fuse_out,
               fuse_report);
    else if (metrics->parsed()) {
      const at_eval_result r =
          run_metrics(met_pred, met_label, met_tb, met_exclude, met_out);
      std::cout << "precision " << r.precision_pct << "%, length "
                << r.tree_length_pct << "%, branch " << r.branch_detected_pct
                << "%\n";
    } else if (sensitivity->parsed()) {
      run_sensitivity(sens_label, sens_centerline, sens_losses, sens_k,
                      sens_seed, sens_out);
    } else if (pipeline->parsed()) {
      run_pipeline(pipeline_config);
    }
  } catch (const CliError& e) {
    remove_partial_outputs();
    std::cerr << "error: " << at_status_name(e.status) << ": " << e.message
              << "\n";
    return static_cast<int>(e.status);
  } catch (const kvconfig::ConfigError& e) {
    remove_partial_outputs();
    std::cerr << "error: BAD_CONFIG: " << e.what() << "\n";
    return AT_E_BAD_CONFIG;
  } catch (const std::exception& e) {
    remove_partial_outputs();
    std::cerr << "error: INTERNAL_ERROR: " << e.what() << "\n";
    return AT_E_INTERNAL;
  }
  return 0;
}
