#include "msfct/pipeline.hpp"

#include <algorithm>
#include <chrono>
#include <cmath>
#include <limits>
#include <optional>
#include <random>

namespace msfct {

WeightModel weight_model_from_string(const std::string& s) {
  if (s == "known_sigma") return WeightModel::KnownSigma;
  if (s == "mad") return WeightModel::Mad;
  throw ConfigError("synthesize.weights: unknown noise model '" + s + "'");
}

const char* weight_model_name(WeightModel m) {
  return m == WeightModel::KnownSigma ? "known_sigma" : "mad";
}

void SynthSpec::validate() const {
  if (view_subsample < 1)
    throw ConfigError("synthesize.view_subsample: factor must be >= 1");
  if (slice_subsample < 1)
    throw ConfigError("synthesize.slice_subsample: factor must be >= 1");
  if (!(noise_percent >= 0.0))
    throw ConfigError("synthesize.noise_percent: must be >= 0");
}

ScanGeometry subsample_geometry(const ScanGeometry& g, Index view_factor,
                                Index slice_factor) {
  g.validate();
  if (view_factor < 1 || slice_factor < 1)
    throw ConfigError("subsample: factors must be >= 1");
  if (view_factor > g.n_views())
    throw ConfigError("synthesize.view_subsample: factor exceeds view count");
  if (slice_factor > g.n_slices)
    throw ConfigError("synthesize.slice_subsample: factor exceeds slice count");
  ScanGeometry out = g;
  const Index nv = (g.n_views() + view_factor - 1) / view_factor;
  out.angles.resize(nv);
  for (Index i = 0; i < nv; ++i) out.angles[i] = g.angles[i * view_factor];
  out.n_slices = (g.n_slices + slice_factor - 1) / slice_factor;
  out.slice_spacing = g.slice_spacing * static_cast<double>(slice_factor);
  return out;
}

SinogramD subsample_sinogram(const SinogramD& s, Index view_factor, Index slice_factor) {
  s.validate();
  if (view_factor < 1 || slice_factor < 1)
    throw ConfigError("subsample: factors must be >= 1");
  if (view_factor > s.n_views)
    throw ConfigError("synthesize.view_subsample: factor exceeds view count");
  if (slice_factor > s.n_slices)
    throw ConfigError("synthesize.slice_subsample: factor exceeds slice count");
  SinogramD out;
  out.n_views = (s.n_views + view_factor - 1) / view_factor;
  out.n_channels = s.n_channels;
  out.n_slices = (s.n_slices + slice_factor - 1) / slice_factor;
  out.channel_spacing = s.channel_spacing;
  out.slice_spacing = s.slice_spacing * static_cast<double>(slice_factor);
  out.angles.resize(out.n_views);
  for (Index i = 0; i < out.n_views; ++i) out.angles[i] = s.angles[i * view_factor];
  out.data.resize(out.size());
  for (Index is = 0; is < out.n_slices; ++is)
    for (Index iv = 0; iv < out.n_views; ++iv)
      for (Index ic = 0; ic < s.n_channels; ++ic)
        out.at(iv, ic, is) = s.at(iv * view_factor, ic, is * slice_factor);
  return out;
}

VolumeD keep_every_nth_slice(const VolumeD& v, Index m) {
  v.validate();
  if (m < 1) throw ConfigError("keep_every_nth_slice: factor must be >= 1");
  if (m > v.nz) throw ConfigError("keep_every_nth_slice: factor exceeds slice count");
  const Index nz = (v.nz + m - 1) / m;
  VolumeD out = VolumeD::zeros(v.nx, v.ny, nz, v.spacing_xy, v.spacing_z * m);
  for (Index iz = 0; iz < nz; ++iz)
    for (Index iy = 0; iy < v.ny; ++iy)
      for (Index ix = 0; ix < v.nx; ++ix) out.at(ix, iy, iz) = v.at(ix, iy, iz * m);
  return out;
}

SynthesisResult synthesize(const VolumeD& vol, const ScanGeometry& geom_full,
                           const SynthSpec& cfg) {
  cfg.validate();
  SynthesisResult res;
  SinogramD full = project(vol, geom_full);
  res.sino = subsample_sinogram(full, cfg.view_subsample, cfg.slice_subsample);
  res.geom = subsample_geometry(geom_full, cfg.view_subsample, cfg.slice_subsample);

  const double mean_abs = res.sino.data.abs().mean();
  res.noise_sigma = cfg.noise_percent / 100.0 * mean_abs;
  if (res.noise_sigma > 0.0) {
    std::mt19937_64 gen(cfg.seed);
    std::normal_distribution<double> nd(0.0, 1.0);
    for (Index i = 0; i < res.sino.data.size(); ++i)
      res.sino.data[i] += res.noise_sigma * nd(gen);
  }

  res.weights = cfg.weights == WeightModel::KnownSigma
                    ? estimate_weights_known(res.sino, res.noise_sigma)
                    : estimate_weights_mad(res.sino);
  return res;
}

WeightMapD estimate_weights_known(const SinogramD& sino, double sigma) {
  sino.validate();
  if (!(sigma >= 0.0)) throw ConfigError("estimate_weights: sigma must be >= 0");
  const double w = sigma > 0.0 ? 1.0 / (sigma * sigma) : 1.0;
  return WeightMapD::uniform(sino, w);
}

WeightMapD estimate_weights_mad(const SinogramD& sino) {
  sino.validate();
  if (sino.n_channels < 3) return WeightMapD::uniform(sino, 1.0);

  std::vector<double> d;
  d.reserve(static_cast<size_t>(sino.n_slices * sino.n_views * (sino.n_channels - 2)));
  for (Index is = 0; is < sino.n_slices; ++is)
    for (Index iv = 0; iv < sino.n_views; ++iv)
      for (Index ic = 1; ic + 1 < sino.n_channels; ++ic)
        d.push_back(sino.at(iv, ic - 1, is) - 2.0 * sino.at(iv, ic, is) +
                    sino.at(iv, ic + 1, is));

  auto median_of = [](std::vector<double> v) {
    const size_t mid = v.size() / 2;
    std::nth_element(v.begin(), v.begin() + mid, v.end());
    double m = v[mid];
    if (v.size() % 2 == 0) {
      std::nth_element(v.begin(), v.begin() + mid - 1, v.end());
      m = 0.5 * (m + v[mid - 1]);
    }
    return m;
  };

  const double med = median_of(d);
  for (auto& x : d) x = std::abs(x - med);
  const double mad = median_of(d);
  if (!(mad > 0.0)) return WeightMapD::uniform(sino, 1.0);

  // MAD -> Gaussian sigma of the second differences, then back out the
  // per-sample sigma (second differences scale variance by 6).
  const double sigma_d = mad / 0.6744897501960817;
  const double sigma = sigma_d / std::sqrt(6.0);
  return WeightMapD::uniform(sino, 1.0 / (sigma * sigma));
}

TuneResult tune_sigmas(const std::function<VolumeD(const SigmaTriple&)>& reconstruct,
                       const std::vector<SigmaTriple>& grid, const VolumeD& truth,
                       TuneMetric metric) {
  if (grid.empty()) throw ConfigError("tune_sigmas: grid must be nonempty");
  TuneResult res;
  bool have_best = false;
  double best_score = 0.0;
  for (size_t i = 0; i < grid.size(); ++i) {
    TuneEntry e;
    e.sigmas = grid[i];
    try {
      VolumeD x = reconstruct(grid[i]);
      e.score = metric == TuneMetric::Psnr ? psnr(x, truth) : nrmse(x, truth);
      e.ok = true;
    } catch (const std::exception& ex) {
      e.ok = false;
      e.message = ex.what();
    }
    if (e.ok) {
      const bool better = !have_best || (metric == TuneMetric::Psnr ? e.score > best_score
                                                                    : e.score < best_score);
      if (better) {
        have_best = true;
        best_score = e.score;
        res.best = grid[i];
        res.best_index = i;
      }
    }
    res.table.push_back(std::move(e));
  }
  if (!have_best) throw NumericalError("tune_sigmas: every grid point failed");
  return res;
}

void ExperimentConfig::validate() const {
  phantom.validate();
  if (n_views < 1) throw ConfigError("geometry.n_views: must be >= 1");
  if (n_channels < 0) throw ConfigError("geometry.n_channels: must be >= 0");
  if (channel_spacing < 0.0) throw ConfigError("geometry.channel_spacing: must be >= 0");
  synth.validate();
  filter.validate();
  mbir.mrf.validate();
  pnp.validate();
  if (pnp_init != "mbir" && pnp_init != "fbp" && pnp_init != "zero")
    throw ConfigError("pnp.init: must be one of mbir, fbp, zero");
  if (!(msf_sigmas.xy > 0.0) || !(msf_sigmas.yz > 0.0) || !(msf_sigmas.xz > 0.0))
    throw ConfigError("msf.sigma: denoiser sigmas must be > 0");
  bm_plane.validate();
  if (!(bm4d_sigma > 0.0)) throw ConfigError("bm4d.sigma: must be > 0");
  bm_cube.validate();
  if (methods.empty()) throw ConfigError("run.methods: must name at least one method");
  for (const auto& m : methods)
    if (m != "fbp" && m != "mbir" && m != "pnp-bm4d" && m != "msf")
      throw ConfigError("run.methods: unknown method '" + m + "'");
  if (tune_method != "msf" && tune_method != "pnp-bm4d")
    throw ConfigError("tune.method: must be msf or pnp-bm4d");
  for (double s : tune_xy)
    if (!(s > 0.0)) throw ConfigError("tune.xy: sigmas must be > 0");
  for (double s : tune_yz)
    if (!(s > 0.0)) throw ConfigError("tune.yz: sigmas must be > 0");
  for (double s : tune_xz)
    if (!(s > 0.0)) throw ConfigError("tune.xz: sigmas must be > 0");
  for (double s : tune_bm4d)
    if (!(s > 0.0)) throw ConfigError("tune.bm4d: sigmas must be > 0");
}

ScanGeometry ExperimentConfig::full_geometry() const {
  const Index nc = n_channels > 0 ? n_channels : phantom.nx;
  const double cs = channel_spacing > 0.0 ? channel_spacing : phantom.spacing_xy;
  return make_parallel_geometry(n_views, nc, cs, phantom.nz, phantom.spacing_z,
                                center_offset);
}

namespace {

GridShape recon_grid(const ExperimentConfig& cfg, const SynthesisResult& data) {
  GridShape g;
  g.nx = cfg.phantom.nx;
  g.ny = cfg.phantom.ny;
  g.spacing_xy = cfg.phantom.spacing_xy;
  g.spacing_z = data.geom.slice_spacing;
  return g;
}

double elapsed_ms(const std::chrono::steady_clock::time_point& t0) {
  return std::chrono::duration<double, std::milli>(std::chrono::steady_clock::now() - t0)
      .count();
}

}  // namespace

VolumeD run_fbp_method(const ExperimentConfig& cfg, const SynthesisResult& data) {
  return fbp(data.sino, data.geom, cfg.filter, recon_grid(cfg, data));
}

VolumeD run_mbir_method(const ExperimentConfig& cfg, const SynthesisResult& data) {
  return reconstruct_mbir(data.sino, data.weights, data.geom, recon_grid(cfg, data),
                          cfg.mbir);
}

PnpResult run_msf_method(const ExperimentConfig& cfg, const SynthesisResult& data,
                         const SigmaTriple& sigmas, const VolumeD& x0) {
  auto agents = build_msf_agents(data.sino, data.weights, data.geom, sigmas,
                                 cfg.bm_plane, cfg.pnp.rho, cfg.prox_cg);
  return run_pnp(agents, x0, cfg.pnp);
}

PnpResult run_bm4d_method(const ExperimentConfig& cfg, const SynthesisResult& data,
                          double sigma, const VolumeD& x0) {
  auto agents = build_bm4d_agents(data.sino, data.weights, data.geom, sigma,
                                  cfg.bm_cube, cfg.pnp.rho, cfg.prox_cg);
  return run_pnp(agents, x0, cfg.pnp);
}

VolumeD pnp_initial_volume(const ExperimentConfig& cfg, const SynthesisResult& data) {
  if (cfg.pnp_init == "mbir") return run_mbir_method(cfg, data);
  if (cfg.pnp_init == "fbp") return run_fbp_method(cfg, data);
  const GridShape g = recon_grid(cfg, data);
  return VolumeD::zeros(g.nx, g.ny, data.geom.n_slices, g.spacing_xy, g.spacing_z);
}

std::vector<SigmaTriple> msf_tune_grid(const ExperimentConfig& cfg) {
  auto axis = [](const std::vector<double>& v, double fallback) {
    return v.empty() ? std::vector<double>{fallback} : v;
  };
  const auto xs = axis(cfg.tune_xy, cfg.msf_sigmas.xy);
  const auto ys = axis(cfg.tune_yz, cfg.msf_sigmas.yz);
  const auto zs = axis(cfg.tune_xz, cfg.msf_sigmas.xz);
  std::vector<SigmaTriple> grid;
  for (double a : xs)
    for (double b : ys)
      for (double c : zs) grid.push_back({a, b, c});
  return grid;
}

std::vector<SigmaTriple> bm4d_tune_grid(const ExperimentConfig& cfg) {
  std::vector<SigmaTriple> grid;
  const auto& axis =
      cfg.tune_bm4d.empty() ? std::vector<double>{cfg.bm4d_sigma} : cfg.tune_bm4d;
  for (double s : axis) grid.push_back({s, s, s});
  return grid;
}

CompareOutputs compare_methods(const ExperimentConfig& cfg) {
  cfg.validate();
  CompareOutputs out;

  auto t0 = std::chrono::steady_clock::now();
  VolumeD phantom_full = generate_phantom(cfg.phantom);
  out.timings_ms.emplace_back("phantom", elapsed_ms(t0));

  t0 = std::chrono::steady_clock::now();
  out.data = synthesize(phantom_full, cfg.full_geometry(), cfg.synth);
  out.truth = keep_every_nth_slice(phantom_full, cfg.synth.slice_subsample);
  out.timings_ms.emplace_back("synthesize", elapsed_ms(t0));

  auto requested = [&](const std::string& m) {
    return std::find(cfg.methods.begin(), cfg.methods.end(), m) != cfg.methods.end();
  };
  const bool wants_pnp = requested("pnp-bm4d") || requested("msf");

  std::optional<VolumeD> mbir_result;
  std::string mbir_error;
  auto ensure_mbir = [&]() -> const std::optional<VolumeD>& {
    if (!mbir_result && mbir_error.empty()) {
      auto t = std::chrono::steady_clock::now();
      try {
        mbir_result = run_mbir_method(cfg, out.data);
      } catch (const std::exception& e) {
        mbir_error = e.what();
      }
      out.timings_ms.emplace_back("mbir", elapsed_ms(t));
    }
    return mbir_result;
  };

  auto score = [&](MethodMetrics& row, const VolumeD& x) {
    row.nrmse = nrmse(x, out.truth, cfg.nrmse_norm);
    row.psnr_db = psnr(x, out.truth);
    row.ssim = ssim(x, out.truth);
    row.ok = true;
  };

  for (const char* name : {"fbp", "mbir", "pnp-bm4d", "msf"}) {
    if (!requested(name)) continue;
    MethodMetrics row;
    row.method = name;
    const std::string method(name);
    try {
      if (method == "fbp") {
        auto t = std::chrono::steady_clock::now();
        VolumeD x = run_fbp_method(cfg, out.data);
        out.timings_ms.emplace_back("fbp", elapsed_ms(t));
        score(row, x);
        out.volumes.emplace_back(method, std::move(x));
      } else if (method == "mbir") {
        const auto& x = ensure_mbir();
        if (!x) throw NumericalError(mbir_error);
        score(row, *x);
        out.volumes.emplace_back(method, *x);
      } else {
        VolumeD x0;
        if (cfg.pnp_init == "mbir" && wants_pnp) {
          const auto& m = ensure_mbir();
          if (!m) throw NumericalError("pnp init failed: " + mbir_error);
          x0 = *m;
        } else {
          x0 = pnp_initial_volume(cfg, out.data);
        }
        auto t = std::chrono::steady_clock::now();
        PnpResult r = method == "msf"
                          ? run_msf_method(cfg, out.data, cfg.msf_sigmas, x0)
                          : run_bm4d_method(cfg, out.data, cfg.bm4d_sigma, x0);
        out.timings_ms.emplace_back(method, elapsed_ms(t));
        score(row, r.x);
        if (r.status == SolveStatus::MaxIterations)
          row.message = "hit max_iter before the residual stop rule";
        out.volumes.emplace_back(method, std::move(r.x));
        out.traces.emplace_back(method, std::move(r.trace));
      }
    } catch (const std::exception& e) {
      row.ok = false;
      row.message = e.what();
    }
    out.report.rows.push_back(std::move(row));
  }
  return out;
}

}  // namespace msfct
