#include <chrono>
#include <cstdio>
#include <cstdlib>
#include <filesystem>
#include <string>
#include <vector>

#include "CLI11.hpp"
#include "msfct/config.hpp"
#include "msfct/io.hpp"
#include "msfct/manifest.hpp"
#include "msfct/parallel.hpp"
#include "msfct/pipeline.hpp"

namespace fs = std::filesystem;
using namespace msfct;

namespace {

struct CliState {
  std::string config_path;
  std::string output_dir;
  std::string sinogram_path;
  std::string weights_path;
  std::string estimate_path;
  std::string truth_path;
  std::uint64_t seed{0};
  int threads{0};
  double sigma_xy{0}, sigma_yz{0}, sigma_xz{0}, sigma_bm4d{0};
  bool seed_set{false}, threads_set{false};
  bool sigma_xy_set{false}, sigma_yz_set{false}, sigma_xz_set{false};
  bool sigma_bm4d_set{false};
  bool dry_run{false};
};

struct Stages {
  std::vector<std::pair<std::string, double>> timings_ms;

  template <class Fn>
  auto run(const std::string& name, Fn&& fn) {
    const auto t0 = std::chrono::steady_clock::now();
    if constexpr (std::is_void_v<decltype(fn())>) {
      fn();
      timings_ms.emplace_back(
          name, std::chrono::duration<double, std::milli>(
                    std::chrono::steady_clock::now() - t0)
                    .count());
    } else {
      auto r = fn();
      timings_ms.emplace_back(
          name, std::chrono::duration<double, std::milli>(
                    std::chrono::steady_clock::now() - t0)
                    .count());
      return r;
    }
  }
};

void add_common(CLI::App* sub, CliState& st) {
  sub->add_option("--config", st.config_path, "experiment config file (TOML)");
  sub->add_option("--output-dir", st.output_dir, "output directory override");
  sub->add_option("--seed", st.seed, "seed override")
      ->each([&st](const std::string&) { st.seed_set = true; });
  sub->add_option("--threads", st.threads, "worker threads, 0 = auto")
      ->each([&st](const std::string&) { st.threads_set = true; });
  sub->add_flag("--dry-run", st.dry_run, "validate the config and exit");
}

void add_msf_sigmas(CLI::App* sub, CliState& st) {
  sub->add_option("--sigma-xy", st.sigma_xy, "x-y denoiser sigma override")
      ->each([&st](const std::string&) { st.sigma_xy_set = true; });
  sub->add_option("--sigma-yz", st.sigma_yz, "y-z denoiser sigma override")
      ->each([&st](const std::string&) { st.sigma_yz_set = true; });
  sub->add_option("--sigma-xz", st.sigma_xz, "x-z denoiser sigma override")
      ->each([&st](const std::string&) { st.sigma_xz_set = true; });
}

ExperimentConfig make_config(const CliState& st, bool config_required,
                             std::string* config_bytes) {
  ExperimentConfig cfg;
  if (!st.config_path.empty()) {
    *config_bytes = read_text_file(st.config_path);
    cfg = experiment_config_from_text(*config_bytes);
  } else if (config_required) {
    throw ConfigError("--config is required for this subcommand");
  }
  if (!st.output_dir.empty()) {
    cfg.output_dir = st.output_dir;
  } else if (const char* env = std::getenv("MSFCT_OUTPUT_DIR"); env && *env) {
    cfg.output_dir = env;
  }
  if (st.seed_set) {
    cfg.seed = st.seed;
    cfg.phantom.seed = st.seed;
    cfg.synth.seed = st.seed;
  }
  if (st.threads_set) cfg.threads = st.threads;
  if (st.sigma_xy_set) cfg.msf_sigmas.xy = st.sigma_xy;
  if (st.sigma_yz_set) cfg.msf_sigmas.yz = st.sigma_yz;
  if (st.sigma_xz_set) cfg.msf_sigmas.xz = st.sigma_xz;
  if (st.sigma_bm4d_set) cfg.bm4d_sigma = st.sigma_bm4d;
  cfg.validate();
  set_max_threads(cfg.threads);
  return cfg;
}

std::string out_path(const ExperimentConfig& cfg, const std::string& name) {
  return (fs::path(cfg.output_dir) / name).string();
}

std::string file_stem(const std::string& method) {
  std::string s = method;
  for (auto& c : s)
    if (c == '-') c = '_';
  return s;
}

RunManifest start_manifest(const std::string& subcommand, const CliState& st,
                           const ExperimentConfig& cfg,
                           const std::string& config_bytes) {
  RunManifest m;
  m.subcommand = subcommand;
  m.config_path = st.config_path;
  m.config_hash = config_bytes.empty() ? "" : hash_config_bytes(config_bytes);
  m.seed = cfg.seed;
  m.threads = cfg.threads;
  m.effective = {
      {"seed", std::to_string(cfg.seed)},
      {"threads", std::to_string(cfg.threads)},
      {"output_dir", cfg.output_dir},
      {"msf.sigma_xy", format_double(cfg.msf_sigmas.xy)},
      {"msf.sigma_yz", format_double(cfg.msf_sigmas.yz)},
      {"msf.sigma_xz", format_double(cfg.msf_sigmas.xz)},
      {"bm4d.sigma", format_double(cfg.bm4d_sigma)},
  };
  return m;
}

void finish_manifest(RunManifest& m, const ExperimentConfig& cfg, Stages& stages) {
  m.timings_ms = std::move(stages.timings_ms);
  const std::string path = out_path(cfg, "run_manifest.json");
  m.outputs.push_back(path);
  write_manifest(path, m);
  std::printf("wrote %zu files to %s\n", m.outputs.size(), cfg.output_dir.c_str());
}

// Measurement inputs for the reconstruction subcommands: read from files
// when --sinogram is given, otherwise synthesize from the configured phantom.
SynthesisResult obtain_data(const ExperimentConfig& cfg, const CliState& st,
                            Stages& stages) {
  if (!st.sinogram_path.empty()) {
    SynthesisResult r;
    r.sino = read_sinogram(st.sinogram_path);
    r.geom.angles = r.sino.angles;
    r.geom.n_channels = r.sino.n_channels;
    r.geom.channel_spacing = r.sino.channel_spacing;
    r.geom.center_offset = cfg.center_offset;
    r.geom.n_slices = r.sino.n_slices;
    r.geom.slice_spacing = r.sino.slice_spacing;
    if (!st.weights_path.empty())
      r.weights = read_weights(st.weights_path);
    else if (cfg.synth.weights == WeightModel::Mad)
      r.weights = estimate_weights_mad(r.sino);
    else
      r.weights = WeightMapD::uniform(r.sino, 1.0);
    r.weights.validate(r.geom);
    return r;
  }
  VolumeD ph = stages.run("phantom", [&] { return generate_phantom(cfg.phantom); });
  return stages.run("synthesize",
                    [&] { return synthesize(ph, cfg.full_geometry(), cfg.synth); });
}

void write_recon_outputs(const ExperimentConfig& cfg, const std::string& method,
                         const VolumeD& vol, RunManifest& m, Stages& stages) {
  stages.run("write", [&] {
    const std::string stem = "vol_" + file_stem(method);
    if (cfg.write_volumes) {
      const std::string p = out_path(cfg, stem + ".raw");
      write_volume(p, vol);
      m.outputs.push_back(p);
      m.outputs.push_back(p + ".json");
    }
    if (cfg.write_png) {
      auto paths = write_volume_pngs(out_path(cfg, "png"), stem, vol);
      m.outputs.insert(m.outputs.end(), paths.begin(), paths.end());
    }
  });
}

void warn_max_iter(const std::string& method, const PnpResult& r) {
  if (r.status == SolveStatus::MaxIterations)
    std::fprintf(stderr,
                 "warning: %s stopped at max_iter=%lld before the residual stop rule\n",
                 method.c_str(), static_cast<long long>(r.iterations));
}

int cmd_phantom(const CliState& st) {
  std::string bytes;
  ExperimentConfig cfg = make_config(st, true, &bytes);
  if (st.dry_run) {
    std::printf("config ok\n");
    return 0;
  }
  Stages stages;
  RunManifest m = start_manifest("phantom", st, cfg, bytes);
  VolumeD ph = stages.run("phantom", [&] { return generate_phantom(cfg.phantom); });
  stages.run("write", [&] {
    const std::string p = out_path(cfg, "phantom.raw");
    write_volume(p, ph);
    m.outputs.push_back(p);
    m.outputs.push_back(p + ".json");
    if (cfg.write_png) {
      auto paths = write_volume_pngs(out_path(cfg, "png"), "phantom", ph);
      m.outputs.insert(m.outputs.end(), paths.begin(), paths.end());
    }
  });
  finish_manifest(m, cfg, stages);
  return 0;
}

int cmd_project(const CliState& st) {
  std::string bytes;
  ExperimentConfig cfg = make_config(st, true, &bytes);
  if (st.dry_run) {
    std::printf("config ok\n");
    return 0;
  }
  Stages stages;
  RunManifest m = start_manifest("project", st, cfg, bytes);
  VolumeD ph = stages.run("phantom", [&] { return generate_phantom(cfg.phantom); });
  SynthesisResult data = stages.run(
      "synthesize", [&] { return synthesize(ph, cfg.full_geometry(), cfg.synth); });
  stages.run("write", [&] {
    const std::string sp = out_path(cfg, "sino.raw");
    const std::string wp = out_path(cfg, "weights.raw");
    write_sinogram(sp, data.sino);
    write_weights(wp, data.weights);
    for (const auto& p : {sp, wp}) {
      m.outputs.push_back(p);
      m.outputs.push_back(p + ".json");
    }
  });
  m.effective.emplace_back("noise_sigma", format_double(data.noise_sigma));
  finish_manifest(m, cfg, stages);
  return 0;
}

int cmd_recon(const std::string& method, const CliState& st) {
  std::string bytes;
  ExperimentConfig cfg = make_config(st, true, &bytes);
  if (st.dry_run) {
    std::printf("config ok\n");
    return 0;
  }
  Stages stages;
  RunManifest m = start_manifest(method, st, cfg, bytes);
  SynthesisResult data = obtain_data(cfg, st, stages);

  VolumeD result;
  if (method == "fbp") {
    result = stages.run("fbp", [&] { return run_fbp_method(cfg, data); });
  } else if (method == "mbir") {
    result = stages.run("mbir", [&] { return run_mbir_method(cfg, data); });
  } else {
    VolumeD x0 = stages.run("init", [&] { return pnp_initial_volume(cfg, data); });
    PnpResult r = stages.run(method, [&] {
      return method == "msf" ? run_msf_method(cfg, data, cfg.msf_sigmas, x0)
                             : run_bm4d_method(cfg, data, cfg.bm4d_sigma, x0);
    });
    warn_max_iter(method, r);
    const std::string tp = out_path(cfg, "trace_" + file_stem(method) + ".csv");
    write_residual_trace(tp, r.trace);
    m.outputs.push_back(tp);
    result = std::move(r.x);
  }
  write_recon_outputs(cfg, method, result, m, stages);
  finish_manifest(m, cfg, stages);
  return 0;
}

int cmd_metrics(const CliState& st) {
  std::string bytes;
  ExperimentConfig cfg = make_config(st, false, &bytes);
  if (st.estimate_path.empty() || st.truth_path.empty())
    throw ConfigError("metrics requires --estimate and --truth");
  if (st.dry_run) {
    std::printf("config ok\n");
    return 0;
  }
  Stages stages;
  RunManifest m = start_manifest("metrics", st, cfg, bytes);
  VolumeD est = read_volume(st.estimate_path);
  VolumeD truth = read_volume(st.truth_path);
  MetricsReport report;
  MethodMetrics row;
  row.method = fs::path(st.estimate_path).stem().string();
  stages.run("metrics", [&] {
    row.nrmse = nrmse(est, truth, cfg.nrmse_norm);
    row.psnr_db = psnr(est, truth);
    row.ssim = ssim(est, truth);
    row.ok = true;
  });
  report.rows.push_back(row);
  const std::string cp = out_path(cfg, "metrics.csv");
  const std::string jp = out_path(cfg, "metrics.json");
  write_metrics_csv(cp, report);
  write_metrics_json(jp, report);
  m.outputs.push_back(cp);
  m.outputs.push_back(jp);
  std::printf("nrmse=%s psnr_db=%s ssim=%s\n", format_double(row.nrmse).c_str(),
              format_double(row.psnr_db).c_str(), format_double(row.ssim).c_str());
  finish_manifest(m, cfg, stages);
  return 0;
}

int cmd_compare(const CliState& st) {
  std::string bytes;
  ExperimentConfig cfg = make_config(st, true, &bytes);
  if (st.dry_run) {
    std::printf("config ok\n");
    return 0;
  }
  Stages stages;
  RunManifest m = start_manifest("compare", st, cfg, bytes);
  CompareOutputs out = stages.run("compare", [&] { return compare_methods(cfg); });
  stages.timings_ms.insert(stages.timings_ms.end(), out.timings_ms.begin(),
                           out.timings_ms.end());

  stages.run("write", [&] {
    const std::string cp = out_path(cfg, "metrics.csv");
    const std::string jp = out_path(cfg, "metrics.json");
    write_metrics_csv(cp, out.report);
    write_metrics_json(jp, out.report);
    m.outputs.push_back(cp);
    m.outputs.push_back(jp);
    if (cfg.write_volumes) {
      const std::string tp = out_path(cfg, "truth.raw");
      write_volume(tp, out.truth);
      m.outputs.push_back(tp);
      m.outputs.push_back(tp + ".json");
      const std::string sp = out_path(cfg, "sino.raw");
      write_sinogram(sp, out.data.sino);
      m.outputs.push_back(sp);
      m.outputs.push_back(sp + ".json");
      const std::string wp = out_path(cfg, "weights.raw");
      write_weights(wp, out.data.weights);
      m.outputs.push_back(wp);
      m.outputs.push_back(wp + ".json");
    }
    for (const auto& [method, trace] : out.traces) {
      const std::string tp = out_path(cfg, "trace_" + file_stem(method) + ".csv");
      write_residual_trace(tp, trace);
      m.outputs.push_back(tp);
    }
    for (const auto& [method, vol] : out.volumes) {
      const std::string stem = "vol_" + file_stem(method);
      if (cfg.write_volumes) {
        const std::string p = out_path(cfg, stem + ".raw");
        write_volume(p, vol);
        m.outputs.push_back(p);
        m.outputs.push_back(p + ".json");
      }
      if (cfg.write_png) {
        auto paths = write_volume_pngs(out_path(cfg, "png"), stem, vol);
        m.outputs.insert(m.outputs.end(), paths.begin(), paths.end());
      }
    }
  });

  for (const auto& r : out.report.rows) {
    if (r.ok)
      std::printf("%-9s nrmse=%.4f psnr_db=%.2f ssim=%.4f\n", r.method.c_str(), r.nrmse,
                  r.psnr_db, r.ssim);
    else
      std::printf("%-9s FAILED: %s\n", r.method.c_str(), r.message.c_str());
  }
  finish_manifest(m, cfg, stages);
  return 0;
}

int cmd_tune(const CliState& st) {
  std::string bytes;
  ExperimentConfig cfg = make_config(st, true, &bytes);
  if (st.dry_run) {
    std::printf("config ok\n");
    return 0;
  }
  Stages stages;
  RunManifest m = start_manifest("tune", st, cfg, bytes);
  VolumeD ph = stages.run("phantom", [&] { return generate_phantom(cfg.phantom); });
  SynthesisResult data = stages.run(
      "synthesize", [&] { return synthesize(ph, cfg.full_geometry(), cfg.synth); });
  VolumeD truth = keep_every_nth_slice(ph, cfg.synth.slice_subsample);
  VolumeD x0 = stages.run("init", [&] { return pnp_initial_volume(cfg, data); });

  const bool is_msf = cfg.tune_method == "msf";
  const auto grid = is_msf ? msf_tune_grid(cfg) : bm4d_tune_grid(cfg);
  TuneResult res = stages.run("tune", [&] {
    return tune_sigmas(
        [&](const SigmaTriple& s) {
          PnpResult r = is_msf ? run_msf_method(cfg, data, s, x0)
                               : run_bm4d_method(cfg, data, s.xy, x0);
          return r.x;
        },
        grid, truth, cfg.tune_metric);
  });

  const std::string tp = out_path(cfg, "tune_" + file_stem(cfg.tune_method) + ".csv");
  write_tune_csv(tp, res, cfg.tune_metric);
  m.outputs.push_back(tp);
  m.effective.emplace_back("tune.best_xy", format_double(res.best.xy));
  m.effective.emplace_back("tune.best_yz", format_double(res.best.yz));
  m.effective.emplace_back("tune.best_xz", format_double(res.best.xz));
  std::printf("best sigma_xy=%s sigma_yz=%s sigma_xz=%s (%s=%s)\n",
              format_double(res.best.xy).c_str(), format_double(res.best.yz).c_str(),
              format_double(res.best.xz).c_str(),
              cfg.tune_metric == TuneMetric::Psnr ? "psnr_db" : "nrmse",
              format_double(res.table[res.best_index].score).c_str());
  finish_manifest(m, cfg, stages);
  return 0;
}

}  // namespace

int main(int argc, char** argv) {
  CLI::App app{"sparse-view CT reconstruction toolkit"};
  app.require_subcommand(1);
  CliState st;

  CLI::App* sub_phantom = app.add_subcommand("phantom", "generate the configured phantom");
  CLI::App* sub_project =
      app.add_subcommand("project", "synthesize measurements (project + subsample + noise)");
  CLI::App* sub_fbp = app.add_subcommand("fbp", "filtered back projection reconstruction");
  CLI::App* sub_mbir = app.add_subcommand("mbir", "regularized iterative reconstruction");
  CLI::App* sub_bm4d =
      app.add_subcommand("pnp-bm4d", "plug-and-play with a volumetric denoiser prior");
  CLI::App* sub_msf =
      app.add_subcommand("msf", "plug-and-play with the multi-slice fusion prior");
  CLI::App* sub_metrics = app.add_subcommand("metrics", "score one volume against another");
  CLI::App* sub_compare = app.add_subcommand("compare", "run and score all methods");
  CLI::App* sub_tune = app.add_subcommand("tune", "grid-search denoiser sigmas");

  for (CLI::App* s : {sub_phantom, sub_project, sub_fbp, sub_mbir, sub_bm4d, sub_msf,
                      sub_metrics, sub_compare, sub_tune})
    add_common(s, st);
  for (CLI::App* s : {sub_fbp, sub_mbir, sub_bm4d, sub_msf}) {
    s->add_option("--sinogram", st.sinogram_path, "read measurements from file");
    s->add_option("--weights", st.weights_path, "read weights from file");
  }
  for (CLI::App* s : {sub_msf, sub_compare, sub_tune}) add_msf_sigmas(s, st);
  sub_bm4d->add_option("--sigma", st.sigma_bm4d, "volumetric denoiser sigma override")
      ->each([&st](const std::string&) { st.sigma_bm4d_set = true; });
  sub_metrics->add_option("--estimate", st.estimate_path, "volume to score");
  sub_metrics->add_option("--truth", st.truth_path, "reference volume");

  try {
    app.parse(argc, argv);
  } catch (const CLI::ParseError& e) {
    const int code = app.exit(e);
    return code == 0 ? 0 : 2;
  }

  try {
    if (app.got_subcommand(sub_phantom)) return cmd_phantom(st);
    if (app.got_subcommand(sub_project)) return cmd_project(st);
    if (app.got_subcommand(sub_fbp)) return cmd_recon("fbp", st);
    if (app.got_subcommand(sub_mbir)) return cmd_recon("mbir", st);
    if (app.got_subcommand(sub_bm4d)) return cmd_recon("pnp-bm4d", st);
    if (app.got_subcommand(sub_msf)) return cmd_recon("msf", st);
    if (app.got_subcommand(sub_metrics)) return cmd_metrics(st);
    if (app.got_subcommand(sub_compare)) return cmd_compare(st);
    if (app.got_subcommand(sub_tune)) return cmd_tune(st);
    std::fprintf(stderr, "error: kind=config msg=\"no subcommand\"\n");
    return 2;
  } catch (const ConfigError& e) {
    std::fprintf(stderr, "error: kind=config msg=\"%s\"\n", e.what());
    return 2;
  } catch (const DimensionError& e) {
    std::fprintf(stderr, "error: kind=config msg=\"%s\"\n", e.what());
    return 2;
  } catch (const IoError& e) {
    std::fprintf(stderr, "error: kind=io msg=\"%s\"\n", e.what());
    return 4;
  } catch (const Error& e) {
    std::fprintf(stderr, "error: kind=numerical msg=\"%s\"\n", e.what());
    return 3;
  } catch (const std::exception& e) {
    std::fprintf(stderr, "error: kind=numerical msg=\"%s\"\n", e.what());
    return 3;
  }
}
