// escat command-line interface: forward simulation, reference-library
// construction, the three locating schemes, and the identity validation
// suite.

#include <cstdio>
#include <iostream>
#include <map>

#include <CLI11.hpp>

#include "escat/io.hpp"
#include "escat/validation.hpp"

namespace {

using namespace escat;

struct MeshFlags {
  std::vector<double> box;  // x0,y0,z0,x1,y1,z1
  double spacing = 0.0;

  SamplingMesh resolve(const SamplingMesh& fallback) const {
    SamplingMesh m = fallback;
    if (!box.empty()) {
      if (box.size() != 6) throw std::invalid_argument("--box needs six numbers");
      m.lo = Vector3(box[0], box[1], box[2]);
      m.hi = Vector3(box[3], box[4], box[5]);
    }
    if (spacing > 0.0) m.spacing = spacing;
    m.validate();
    return m;
  }
};

void add_mesh_flags(CLI::App* cmd, MeshFlags& flags) {
  cmd->add_option("--box", flags.box, "sampling box x0,y0,z0,x1,y1,z1")->delimiter(',');
  cmd->add_option("--spacing", flags.spacing, "sampling mesh spacing");
}

FarField simulate_scene(const Scene& scene, const ExperimentConfig& cfg,
                        const std::string& solver) {
  auto grid = shared_sphere_grid(cfg.grid_polar, cfg.grid_azimuth);
  std::string chosen = solver;
  if (chosen == "auto") chosen = scene.cls == SceneClass::Small ? "foldy" : "mfs";

  FarField f;
  if (chosen == "mfs") {
    const auto sol = solve_mfs(scene, cfg.wave, cfg.material, cfg.mfs);
    if (sol.empty()) throw std::invalid_argument("empty scene");
    for (const auto& s : sol)
      if (s.residual_warning)
        std::cerr << "warning: boundary residual " << s.residual << " on component '"
                  << s.component.shape.name << "' exceeds "
                  << cfg.mfs.residual_tolerance << "\n";
    f = farfield_from_mfs(sol, grid, cfg.material, cfg.wave.omega);
  } else {
    std::vector<Vector3> positions;
    std::vector<PolarizationTensor> tensors;
    std::map<std::string, PolarizationTensor> cache;
    for (const auto& comp : scene.components) {
      char key[128];
      std::snprintf(key, sizeof key, "%s/%.12g/%.12g/%.12g/%.12g", comp.shape.name.c_str(),
                    comp.placement.euler[0], comp.placement.euler[1], comp.placement.euler[2],
                    comp.placement.scale);
      auto it = cache.find(key);
      if (it == cache.end()) {
        Placement ref = comp.placement;
        ref.position = Vector3::Zero();
        it = cache.emplace(key, polarization_tensor_placed(comp.shape, ref, cfg.material,
                                                           cfg.foldy_surface))
                 .first;
      }
      positions.push_back(comp.placement.position);
      tensors.push_back(it->second);
    }
    const FoldySolution foldy =
        foldy_solve(positions, tensors, cfg.wave, cfg.material, cfg.wave.omega);
    f = asymptotic_farfield(foldy, grid, cfg.material, cfg.wave.omega);
  }
  f.meta.config_digest = cfg.digest;
  return f;
}

void print_detections(const std::vector<Detection>& dets) {
  for (const auto& d : dets) {
    std::printf("  (%8.4f, %8.4f, %8.4f)  peak %.4f", d.position[0], d.position[1],
                d.position[2], d.peak_value);
    if (d.entry)
      std::printf("  %s euler=(%.3f, %.3f, %.3f) scale=%.3g", d.entry->shape_name.c_str(),
                  d.entry->euler[0], d.entry->euler[1], d.entry->euler[2], d.entry->scale);
    std::printf("\n");
  }
}

int run(int argc, char** argv) {
  CLI::App app{"forward simulation and direct imaging for 3D elastic rigid-body scattering"};
  app.require_subcommand(1);

  // --- simulate -------------------------------------------------------
  std::string sim_scene, sim_config, sim_out, sim_solver = "";
  double sim_noise = -1.0;
  std::uint64_t sim_seed = std::uint64_t(-1);
  auto* sim = app.add_subcommand("simulate", "synthesize a far-field pattern for a scene");
  sim->add_option("scene", sim_scene, "scene file")->required();
  sim->add_option("config", sim_config, "experiment config")->required();
  sim->add_option("-o,--out", sim_out, "output far-field file")->required();
  sim->add_option("--noise", sim_noise, "multiplicative uniform noise level (overrides config)");
  sim->add_option("--seed", sim_seed, "noise seed (overrides config)");
  sim->add_option("--solver", sim_solver, "auto | mfs | foldy (overrides config)");

  // --- build-lib ------------------------------------------------------
  std::string lib_spec, lib_config, lib_out;
  bool lib_pol = false;
  auto* bl = app.add_subcommand("build-lib", "build a reference library from a libspec");
  bl->add_option("libspec", lib_spec, "library spec file (shapes, rotations, scales)")
      ->required();
  bl->add_option("config", lib_config, "experiment config")->required();
  bl->add_option("-o,--out", lib_out, "output library file")->required();
  bl->add_flag("--with-polarization", lib_pol,
               "cache polarization tensors for every shape/scale pair");

  // --- locate-small ---------------------------------------------------
  std::string ls_ff, ls_config, ls_out, ls_volume, ls_vtk, ls_mode = "";
  double ls_threshold = -1.0, ls_minsep = -1.0;
  MeshFlags ls_mesh;
  auto* ls = app.add_subcommand("locate-small", "locate small scatterers (point indicators)");
  ls->add_option("farfield", ls_ff, "measured far-field file")->required();
  ls->add_option("--config", ls_config, "experiment config for defaults");
  ls->add_option("--mode", ls_mode, "p | s | full");
  add_mesh_flags(ls, ls_mesh);
  ls->add_option("--threshold", ls_threshold, "relative detection threshold");
  ls->add_option("--min-separation", ls_minsep, "peak separation radius");
  ls->add_option("-o,--out", ls_out, "detections output file");
  ls->add_option("--volume", ls_volume, "indicator volume CSV output");
  ls->add_option("--vtk", ls_vtk, "indicator volume legacy VTK output");

  // --- locate-extended --------------------------------------------------
  std::string le_ff, le_lib, le_config, le_out, le_volume_prefix, le_mode = "";
  double le_threshold = -1.0, le_minsep = -1.0;
  MeshFlags le_mesh;
  auto* le = app.add_subcommand("locate-extended",
                                "locate extended scatterers against a reference library");
  le->add_option("farfield", le_ff, "measured far-field file")->required();
  le->add_option("--lib", le_lib, "reference library file")->required();
  le->add_option("--config", le_config, "experiment config for defaults");
  le->add_option("--mode", le_mode, "p | s | full");
  add_mesh_flags(le, le_mesh);
  le->add_option("--threshold", le_threshold, "absolute W threshold");
  le->add_option("--min-separation", le_minsep, "peak separation radius");
  le->add_option("-o,--out", le_out, "detections output file");
  le->add_option("--volume-prefix", le_volume_prefix,
                 "write one W volume CSV per entry pass under this prefix");

  // --- locate-multiscale -------------------------------------------------
  std::string lm_ff, lm_lib, lm_config, lm_out, lm_mode = "";
  double lm_threshold = -1.0, lm_s_threshold = -1.0;
  MeshFlags lm_mesh;
  auto* lm = app.add_subcommand("locate-multiscale",
                                "two-stage multiscale reconstruction (extended then small)");
  lm->add_option("farfield", lm_ff, "measured far-field file")->required();
  lm->add_option("--lib", lm_lib, "reference library file")->required();
  lm->add_option("--config", lm_config, "experiment config for defaults");
  lm->add_option("--mode", lm_mode, "p | s | full");
  add_mesh_flags(lm, lm_mesh);
  lm->add_option("--threshold", lm_threshold, "stage-1 absolute W threshold");
  lm->add_option("--small-threshold", lm_s_threshold, "stage-2 relative threshold");
  lm->add_option("-o,--out", lm_out, "detections output file");

  // --- validate ---------------------------------------------------------
  auto* va = app.add_subcommand("validate", "run the identity validation suite");

  CLI11_PARSE(app, argc, argv);

  auto load_config = [](const std::string& path) {
    return path.empty() ? ExperimentConfig{} : read_config(path);
  };

  if (sim->parsed()) {
    const ExperimentConfig cfg = read_config(sim_config);
    const Scene scene = read_scene(sim_scene);
    const std::string solver = sim_solver.empty() ? cfg.solver : sim_solver;
    FarField f = simulate_scene(scene, cfg, solver);
    const double noise = sim_noise >= 0.0 ? sim_noise : cfg.noise_level;
    const std::uint64_t seed = sim_seed != std::uint64_t(-1) ? sim_seed : cfg.noise_seed;
    if (noise > 0.0) f = add_noise(f, noise, seed);
    write_farfield(sim_out, f);
    std::printf("wrote %s (%d nodes, provenance %s)\n", sim_out.c_str(), f.size(),
                f.meta.provenance.c_str());
    return 0;
  }

  if (bl->parsed()) {
    const ExperimentConfig cfg = read_config(lib_config);
    const LibrarySpec spec = read_libspec(lib_spec);
    auto grid = shared_sphere_grid(cfg.grid_polar, cfg.grid_azimuth);
    const ReferenceLibrary lib = build_library(spec.shapes, spec.rotations, spec.scales,
                                               cfg.material, cfg.wave, grid, cfg.mfs);
    std::vector<PolarizationTensor> cache;
    if (lib_pol)
      for (const auto& shape : spec.shapes)
        for (double scale : spec.scales)
          cache.push_back(polarization_tensor(shape, scale, cfg.material, cfg.foldy_surface));
    write_library(lib_out, lib, cache);
    std::printf("wrote %s: %zu entries, distinctness min gap %.3g (%s)\n", lib_out.c_str(),
                lib.entries.size(), lib.audit.min_gap, lib.audit.pass ? "pass" : "FAIL");
    return 0;
  }

  if (ls->parsed()) {
    const ExperimentConfig cfg = load_config(ls_config);
    const FarField f = read_farfield(ls_ff);
    SchemeSOptions opt;
    opt.mode = ls_mode.empty() ? cfg.mode : indicator_mode_from_name(ls_mode);
    if (ls_threshold > 0.0) opt.relative_threshold = ls_threshold;
    else if (cfg.threshold > 0.0) opt.relative_threshold = cfg.threshold;
    if (ls_minsep > 0.0) opt.min_separation = ls_minsep;
    else if (cfg.min_separation > 0.0) opt.min_separation = cfg.min_separation;
    const SamplingMesh mesh = ls_mesh.resolve(cfg.mesh);
    IndicatorField field;
    const auto dets = scheme_s(f, mesh, opt, &field);
    std::printf("%zu detection(s)\n", dets.size());
    print_detections(dets);
    if (!ls_out.empty()) write_detections(ls_out, dets, f.meta.config_digest);
    if (!ls_volume.empty()) write_indicator_csv(ls_volume, field, f.meta.config_digest);
    if (!ls_vtk.empty()) write_indicator_vtk(ls_vtk, field);
    return 0;
  }

  if (le->parsed()) {
    const ExperimentConfig cfg = load_config(le_config);
    const FarField f = read_farfield(le_ff);
    const LibraryFile lf = read_library(le_lib);
    SchemeROptions opt;
    opt.mode = le_mode.empty() ? cfg.mode : indicator_mode_from_name(le_mode);
    if (le_threshold > 0.0) opt.w_threshold = le_threshold;
    else if (cfg.threshold > 0.0) opt.w_threshold = cfg.threshold;
    if (le_minsep > 0.0) opt.min_separation = le_minsep;
    else if (cfg.min_separation > 0.0) opt.min_separation = cfg.min_separation;
    opt.keep_fields = !le_volume_prefix.empty();
    const SamplingMesh mesh = le_mesh.resolve(cfg.mesh);
    const SchemeRResult res = scheme_r(f, lf.library, mesh, opt);
    for (const auto& w : res.warnings) std::cerr << "warning: " << w << "\n";
    std::printf("%zu detection(s)\n", res.detections.size());
    print_detections(res.detections);
    if (!le_out.empty()) write_detections(le_out, res.detections, f.meta.config_digest);
    for (std::size_t i = 0; i < res.fields.size(); ++i)
      write_indicator_csv(le_volume_prefix + std::to_string(i) + ".csv", res.fields[i],
                          f.meta.config_digest);
    return 0;
  }

  if (lm->parsed()) {
    const ExperimentConfig cfg = load_config(lm_config);
    const FarField f = read_farfield(lm_ff);
    const LibraryFile lf = read_library(lm_lib);
    SchemeROptions ropt;
    SchemeSOptions sopt;
    ropt.mode = lm_mode.empty() ? cfg.mode : indicator_mode_from_name(lm_mode);
    sopt.mode = ropt.mode;
    if (lm_threshold > 0.0) ropt.w_threshold = lm_threshold;
    if (lm_s_threshold > 0.0) sopt.relative_threshold = lm_s_threshold;
    const SamplingMesh mesh = lm_mesh.resolve(cfg.mesh);
    const SchemeMResult res = scheme_m(f, lf.library, mesh, ropt, sopt, cfg.tuning);
    for (const auto& w : res.warnings) std::cerr << "warning: " << w << "\n";
    if (res.small_only_fallback)
      std::printf("stage 1 found no extended component; small-only fallback\n");
    std::printf("stage 1 (%d tune-ups): %zu extended component(s)\n", res.n_tuneups,
                res.extended.size());
    print_detections(res.extended);
    std::printf("stage 2: %zu small component(s)\n", res.small.size());
    print_detections(res.small);
    if (!lm_out.empty()) {
      std::vector<Detection> all = res.extended;
      all.insert(all.end(), res.small.begin(), res.small.end());
      write_detections(lm_out, all, f.meta.config_digest);
    }
    return 0;
  }

  if (va->parsed()) {
    const ValidationConfig vcfg;
    const auto results = run_validation_suite(vcfg);
    bool ok = true;
    std::printf("%-28s %12s %12s  %s\n", "check", "value", "tolerance", "status");
    for (const auto& r : results) {
      ok = ok && r.pass;
      std::printf("%-28s %12.4e %12.4e  %s\n", r.name.c_str(), r.value, r.tolerance,
                  r.pass ? "pass" : "FAIL");
    }
    std::printf("%s\n", ok ? "all identity checks passed" : "identity checks FAILED");
    return ok ? 0 : 1;
  }

  return 0;
}

}  // namespace

int main(int argc, char** argv) {
  try {
    return run(argc, argv);
  } catch (const std::exception& e) {
    std::cerr << "error: " << e.what() << "\n";
    return 1;
  }
}
