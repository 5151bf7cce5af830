#include "doctest.h"

#include <cmath>
#include <random>

#include "helpers.hpp"
#include "msfct/metrics.hpp"
#include "msfct/phantom.hpp"
#include "msfct/pipeline.hpp"
#include "msfct/projector.hpp"

using namespace msfct;

using testref::nrmse_ref;
using testref::psnr_ref;
using testref::ssim_ref;

namespace {

ExperimentConfig tiny_compare_config() {
  ExperimentConfig cfg;
  cfg.phantom.kind = PhantomKind::Ellipsoids;
  cfg.phantom.nx = 32;
  cfg.phantom.ny = 32;
  cfg.phantom.nz = 4;
  cfg.phantom.seed = 5;
  cfg.n_views = 100;
  cfg.synth.seed = 5;
  cfg.mbir.mrf.beta = 0.5;
  cfg.pnp.max_iter = 6;
  cfg.prox_cg.max_iter = 30;
  cfg.bm_plane.patch_size = 3;
  cfg.bm_plane.search_radius = 4;
  cfg.bm_plane.step = 2;
  cfg.bm_cube.search_radius = 3;
  cfg.bm_cube.step = 2;
  return cfg;
}

}  // namespace

TEST_CASE("phantom generation is deterministic and in range") {
  PhantomSpec spec;
  spec.nz = 4;
  VolumeD a = generate_phantom(spec);
  VolumeD b = generate_phantom(spec);
  for (Index i = 0; i < a.data.size(); ++i) CHECK(a.data[i] == b.data[i]);
  CHECK(a.data.minCoeff() >= 0.0);
  CHECK(a.data.maxCoeff() <= 1.0);
  CHECK(a.data.maxCoeff() > 0.5);  // skull shell is present

  PhantomSpec ell;
  ell.kind = PhantomKind::Ellipsoids;
  ell.nx = ell.ny = 20;
  ell.nz = 6;
  ell.seed = 3;
  VolumeD e1 = generate_phantom(ell);
  VolumeD e2 = generate_phantom(ell);
  for (Index i = 0; i < e1.data.size(); ++i) CHECK(e1.data[i] == e2.data[i]);
  ell.seed = 4;
  VolumeD e3 = generate_phantom(ell);
  double diff = 0.0;
  for (Index i = 0; i < e1.data.size(); ++i)
    diff = std::max(diff, std::abs(e1.data[i] - e3.data[i]));
  CHECK(diff > 1e-3);

  PhantomSpec c;
  c.kind = PhantomKind::Constant;
  c.nx = c.ny = 5;
  c.nz = 2;
  c.value = 0.42;
  VolumeD cv = generate_phantom(c);
  for (Index i = 0; i < cv.data.size(); ++i) CHECK(cv.data[i] == 0.42);

  c.value = 1.5;
  CHECK_THROWS_AS(generate_phantom(c), ConfigError);
  PhantomSpec bad;
  bad.nx = 0;
  CHECK_THROWS_AS(generate_phantom(bad), ConfigError);
}

TEST_CASE("the head phantom is left-right symmetric") {
  PhantomSpec spec;
  spec.nx = 64;
  spec.ny = 64;
  spec.nz = 8;
  VolumeD v = generate_phantom(spec);
  for (Index iz = 0; iz < spec.nz; ++iz)
    for (Index iy = 0; iy < spec.ny; ++iy)
      for (Index ix = 0; ix < spec.nx; ++ix)
        CHECK(v.at(ix, iy, iz) == v.at(spec.nx - 1 - ix, iy, iz));
}

TEST_CASE("geometry and sinogram subsampling keep every k-th sample") {
  auto full = make_parallel_geometry(20, 12, 1.5, 6, 2.0, 0.25);
  auto sub = subsample_geometry(full, 5, 2);
  CHECK(sub.n_views() == 4);
  for (Index i = 0; i < 4; ++i) CHECK(sub.angles[i] == full.angles[5 * i]);
  CHECK(sub.n_channels == 12);
  CHECK(sub.channel_spacing == 1.5);
  CHECK(sub.center_offset == 0.25);
  CHECK(sub.n_slices == 3);
  CHECK(sub.slice_spacing == 4.0);

  SinogramD s = testutil::random_sinogram(full, 1);
  SinogramD ss = subsample_sinogram(s, 5, 2);
  ss.validate(sub);
  for (Index iv = 0; iv < 4; ++iv)
    for (Index ic = 0; ic < 12; ++ic)
      for (Index is = 0; is < 3; ++is)
        CHECK(ss.at(iv, ic, is) == s.at(5 * iv, ic, 2 * is));

  CHECK_THROWS_AS(subsample_geometry(full, 0, 1), ConfigError);
  CHECK_THROWS_AS(subsample_geometry(full, 21, 1), ConfigError);
  CHECK_THROWS_AS(subsample_geometry(full, 1, 7), ConfigError);

  VolumeD v = testutil::random_volume(6, 6, 6, 2, 0, 1);
  VolumeD kept = keep_every_nth_slice(v, 2);
  CHECK(kept.nz == 3);
  CHECK(kept.spacing_z == 2.0 * v.spacing_z);
  for (Index iz = 0; iz < 3; ++iz)
    for (Index iy = 0; iy < 6; ++iy)
      for (Index ix = 0; ix < 6; ++ix)
        CHECK(kept.at(ix, iy, iz) == v.at(ix, iy, 2 * iz));
  CHECK_THROWS_AS(keep_every_nth_slice(v, 0), ConfigError);
  CHECK_THROWS_AS(keep_every_nth_slice(v, 7), ConfigError);
}

TEST_CASE("subsampling commutes with projection") {
  // Projecting then discarding views/slices equals projecting the kept slices
  // with the subsampled geometry, sample for sample.
  PhantomSpec spec;
  spec.kind = PhantomKind::Ellipsoids;
  spec.nx = spec.ny = 20;
  spec.nz = 6;
  spec.seed = 9;
  VolumeD vol = generate_phantom(spec);
  auto full = make_parallel_geometry(18, 22, 1.0, 6, 1.0);

  SinogramD a = subsample_sinogram(project(vol, full), 3, 2);
  SinogramD b =
      project(keep_every_nth_slice(vol, 2), subsample_geometry(full, 3, 2));
  REQUIRE(a.data.size() == b.data.size());
  for (Index i = 0; i < a.data.size(); ++i) CHECK(a.data[i] == b.data[i]);
}

TEST_CASE("synthesis: noiseless path is exact projection with unit weights") {
  PhantomSpec spec;
  spec.kind = PhantomKind::Ellipsoids;
  spec.nx = spec.ny = 16;
  spec.nz = 4;
  spec.seed = 2;
  VolumeD vol = generate_phantom(spec);
  auto full = make_parallel_geometry(12, 18, 1.0, 4, 1.0);

  SynthSpec sp;
  sp.view_subsample = 3;
  sp.slice_subsample = 2;
  SynthesisResult res = synthesize(vol, full, sp);
  CHECK(res.noise_sigma == 0.0);
  CHECK(res.geom.n_views() == 4);
  CHECK(res.geom.n_slices == 2);

  SinogramD clean = subsample_sinogram(project(vol, full), 3, 2);
  for (Index i = 0; i < clean.data.size(); ++i)
    CHECK(res.sino.data[i] == clean.data[i]);
  for (Index i = 0; i < res.weights.data.size(); ++i)
    CHECK(res.weights.data[i] == 1.0);
}

TEST_CASE("synthesis: noise level, weights, and determinism") {
  PhantomSpec spec;
  spec.kind = PhantomKind::Ellipsoids;
  spec.nx = spec.ny = 32;
  spec.nz = 4;
  spec.seed = 6;
  VolumeD vol = generate_phantom(spec);
  auto full = make_parallel_geometry(100, 40, 1.0, 4, 1.0);

  SynthSpec sp;
  sp.view_subsample = 5;
  sp.slice_subsample = 1;
  sp.noise_percent = 2.0;
  sp.seed = 11;
  SynthesisResult res = synthesize(vol, full, sp);

  SinogramD clean = subsample_sinogram(project(vol, full), 5, 1);
  const double want_sigma = 0.02 * clean.data.abs().mean();
  CHECK(res.noise_sigma == want_sigma);
  CHECK(want_sigma > 0.0);

  // realized noise statistics: mean ~ 0, std within 5% of sigma
  ArrayXd noise = res.sino.data - clean.data;
  const double n = static_cast<double>(noise.size());
  const double mean = noise.mean();
  const double sd = std::sqrt((noise - mean).square().sum() / n);
  CHECK(std::abs(mean) <= 0.05 * want_sigma * 3.0);
  CHECK(sd == doctest::Approx(want_sigma).epsilon(0.05));

  for (Index i = 0; i < res.weights.data.size(); ++i)
    CHECK(res.weights.data[i] == 1.0 / (want_sigma * want_sigma));

  SynthesisResult res2 = synthesize(vol, full, sp);
  for (Index i = 0; i < res.sino.data.size(); ++i)
    CHECK(res.sino.data[i] == res2.sino.data[i]);

  sp.seed = 12;
  SynthesisResult res3 = synthesize(vol, full, sp);
  double diff = (res.sino.data - res3.sino.data).abs().maxCoeff();
  CHECK(diff > 0.0);
}

TEST_CASE("known-sigma and robust weight estimators") {
  auto geom = make_parallel_geometry(20, 64, 1.0, 2, 1.0);
  SinogramD s = SinogramD::zeros(geom);

  WeightMapD w = estimate_weights_known(s, 0.0);
  for (Index i = 0; i < w.data.size(); ++i) CHECK(w.data[i] == 1.0);
  w = estimate_weights_known(s, 2.0);
  for (Index i = 0; i < w.data.size(); ++i) CHECK(w.data[i] == 0.25);
  CHECK_THROWS_AS(estimate_weights_known(s, -1.0), ConfigError);

  // constant sinogram: zero deviation degenerates to unit weights
  s.data.setConstant(3.0);
  w = estimate_weights_mad(s);
  for (Index i = 0; i < w.data.size(); ++i) CHECK(w.data[i] == 1.0);

  // a linear-in-channel ramp is invisible to second differences, so the
  // estimate recovers the injected noise level
  const double sigma = 0.3;
  for (std::uint64_t seed = 1; seed <= 10; ++seed) {
    std::mt19937_64 g(seed);
    std::normal_distribution<double> nd(0.0, sigma);
    for (Index iv = 0; iv < s.n_views; ++iv)
      for (Index ic = 0; ic < s.n_channels; ++ic)
        for (Index is = 0; is < s.n_slices; ++is)
          s.at(iv, ic, is) = 5.0 + 0.1 * static_cast<double>(ic) + nd(g);
    w = estimate_weights_mad(s);
    const double sigma_hat = 1.0 / std::sqrt(w.data[0]);
    CHECK(sigma_hat >= 0.9 * sigma);
    CHECK(sigma_hat <= 1.1 * sigma);
  }
}

TEST_CASE("metric identities") {
  VolumeD t = testutil::random_volume(10, 9, 3, 14, 0.1, 1.0);

  CHECK(nrmse(t, t) == 0.0);
  CHECK(std::isinf(psnr(t, t)));
  CHECK(ssim(t, t) == 1.0);

  VolumeD dbl = t;
  dbl.data *= 2.0;
  CHECK(nrmse(dbl, t, NrmseNorm::Estimate) == 0.5);
  CHECK(nrmse(dbl, t, NrmseNorm::Truth) == 1.0);

  // scaling both inputs leaves nrmse unchanged
  VolumeD e = testutil::random_volume(10, 9, 3, 15, 0.1, 1.0);
  VolumeD es = e, ts = t;
  es.data *= 3.7;
  ts.data *= 3.7;
  CHECK(nrmse(es, ts) == doctest::Approx(nrmse(e, t)).epsilon(1e-12));
  CHECK(nrmse(es, ts, NrmseNorm::Truth) ==
        doctest::Approx(nrmse(e, t, NrmseNorm::Truth)).epsilon(1e-12));

  // peak 1 truth with a uniform 0.1 offset sits exactly at 20 dB
  VolumeD peak = testutil::random_volume(8, 8, 2, 16, 0.2, 0.9);
  peak.at(0, 0, 0) = 1.0;
  VolumeD off = peak;
  off.data += 0.1;
  CHECK(psnr(off, peak) == doctest::Approx(20.0).epsilon(1e-9));

  // heavy noise destroys structural similarity
  VolumeD noisy = t;
  std::mt19937_64 g(17);
  std::normal_distribution<double> nd(0.0, 1.0);
  for (Index i = 0; i < noisy.data.size(); ++i) noisy.data[i] += nd(g);
  CHECK(ssim(noisy, t) < 0.5);
}

TEST_CASE("metric error conditions") {
  VolumeD t = testutil::random_volume(8, 8, 2, 1);
  VolumeD small = testutil::random_volume(6, 8, 2, 1);
  CHECK_THROWS_AS(nrmse(small, t), DimensionError);
  CHECK_THROWS_AS(psnr(small, t), DimensionError);
  CHECK_THROWS_AS(ssim(small, t), DimensionError);

  VolumeD zero = VolumeD::zeros(8, 8, 2);
  CHECK_THROWS_AS(nrmse(zero, t), NumericalError);        // all-zero estimate norm
  CHECK_THROWS_AS(psnr(t, zero), NumericalError);         // nonpositive peak
  CHECK_THROWS_AS(ssim(t, zero), NumericalError);         // zero dynamic range
  CHECK_THROWS_AS(ssim(t, t, 9), DimensionError);         // window exceeds slice
  CHECK_THROWS_AS(ssim(t, t, 0), ConfigError);
}

TEST_CASE("metrics agree with brute-force recomputation on random pairs") {
  std::mt19937_64 g(99);
  for (int pair = 0; pair < 50; ++pair) {
    VolumeD truth = testutil::random_volume(12, 10, 3, 1000 + pair, 0.1, 1.0);
    VolumeD est = truth;
    for (Index i = 0; i < est.data.size(); ++i)
      est.data[i] += 0.2 * (testutil::uniform01(g) - 0.5);

    CHECK(std::abs(nrmse(est, truth) - nrmse_ref(est, truth, NrmseNorm::Estimate)) <=
          1e-12);
    CHECK(std::abs(nrmse(est, truth, NrmseNorm::Truth) -
                   nrmse_ref(est, truth, NrmseNorm::Truth)) <= 1e-12);
    CHECK(std::abs(psnr(est, truth) - psnr_ref(est, truth)) <= 1e-10);
    CHECK(std::abs(ssim(est, truth) - ssim_ref(est, truth, 7)) <= 1e-8);
  }
}

TEST_CASE("sigma tuning selects the best grid entry") {
  VolumeD truth = testutil::random_volume(8, 8, 2, 30, 0.2, 1.0);

  // score landscape: reconstruction error grows with |sigma_xy - 0.06|
  auto recon = [&](const SigmaTriple& s) {
    VolumeD v = truth;
    v.data += std::abs(s.xy - 0.06);
    return v;
  };

  std::vector<SigmaTriple> grid{{0.05, 0.05, 0.05}, {0.06, 0.05, 0.05},
                                {0.07, 0.05, 0.05}};
  TuneResult res = tune_sigmas(recon, grid, truth, TuneMetric::Psnr);
  CHECK(res.best_index == 1);
  CHECK(res.best.xy == 0.06);
  REQUIRE(res.table.size() == 3);
  for (const auto& e : res.table) CHECK(e.ok);
  CHECK(res.table[1].score > res.table[0].score);
  CHECK(res.table[1].score > res.table[2].score);

  TuneResult rn = tune_sigmas(recon, grid, truth, TuneMetric::Nrmse);
  CHECK(rn.best_index == 1);
  CHECK(rn.table[1].score < rn.table[0].score);

  // singleton grid
  TuneResult rs = tune_sigmas(recon, {{0.08, 0.05, 0.05}}, truth);
  CHECK(rs.best_index == 0);
  CHECK(rs.best.xy == 0.08);

  // exact ties keep the first entry
  auto constant_recon = [&](const SigmaTriple&) { return truth; };
  TuneResult rt = tune_sigmas(constant_recon, grid, truth);
  CHECK(rt.best_index == 0);
  CHECK(rt.best.xy == 0.05);

  // failures are recorded and excluded from the argmax
  auto flaky = [&](const SigmaTriple& s) {
    if (s.xy == 0.06) throw NumericalError("diverged");
    VolumeD v = truth;
    v.data += std::abs(s.xy - 0.06);
    return v;
  };
  TuneResult rf = tune_sigmas(flaky, grid, truth);
  CHECK(rf.best_index == 0);
  CHECK(!rf.table[1].ok);
  CHECK(rf.table[1].message.find("diverged") != std::string::npos);

  auto always_fail = [&](const SigmaTriple&) -> VolumeD {
    throw NumericalError("no");
  };
  CHECK_THROWS_AS(tune_sigmas(always_fail, grid, truth), NumericalError);
  CHECK_THROWS_AS(tune_sigmas(recon, {}, truth), ConfigError);
}

TEST_CASE("tune grids expand the configured axes") {
  ExperimentConfig cfg;
  cfg.tune_xy = {0.01, 0.02};
  cfg.tune_yz = {0.03};
  cfg.tune_xz = {0.04, 0.05};
  auto grid = msf_tune_grid(cfg);
  REQUIRE(grid.size() == 4);
  CHECK(grid[0].xy == 0.01);
  CHECK(grid[0].yz == 0.03);
  CHECK(grid[0].xz == 0.04);
  CHECK(grid[1].xz == 0.05);
  CHECK(grid[2].xy == 0.02);
  CHECK(grid[3].xz == 0.05);

  ExperimentConfig defaults;
  defaults.msf_sigmas = {0.11, 0.12, 0.13};
  auto fallback = msf_tune_grid(defaults);
  REQUIRE(fallback.size() == 1);
  CHECK(fallback[0].xy == 0.11);
  CHECK(fallback[0].yz == 0.12);
  CHECK(fallback[0].xz == 0.13);

  ExperimentConfig b4;
  b4.tune_bm4d = {0.2, 0.3};
  auto bg = bm4d_tune_grid(b4);
  REQUIRE(bg.size() == 2);
  CHECK(bg[0].xy == 0.2);
  CHECK(bg[0].yz == 0.2);
  CHECK(bg[1].xy == 0.3);

  ExperimentConfig b4d;
  b4d.bm4d_sigma = 0.07;
  auto bgd = bm4d_tune_grid(b4d);
  REQUIRE(bgd.size() == 1);
  CHECK(bgd[0].xy == 0.07);
}

TEST_CASE("experiment config validation names the offending field") {
  auto message_of = [](const ExperimentConfig& cfg) {
    try {
      cfg.validate();
      return std::string{};
    } catch (const ConfigError& e) {
      return std::string(e.what());
    }
  };

  ExperimentConfig cfg;
  CHECK(message_of(cfg).empty());

  cfg.synth.view_subsample = 0;
  CHECK(message_of(cfg).find("view_subsample") != std::string::npos);

  cfg = ExperimentConfig{};
  cfg.synth.slice_subsample = -1;
  CHECK(message_of(cfg).find("slice_subsample") != std::string::npos);

  cfg = ExperimentConfig{};
  cfg.n_views = 0;
  CHECK(message_of(cfg).find("n_views") != std::string::npos);

  cfg = ExperimentConfig{};
  cfg.pnp_init = "warm";
  CHECK(message_of(cfg).find("pnp.init") != std::string::npos);

  cfg = ExperimentConfig{};
  cfg.methods = {"fbp", "tv"};
  CHECK(message_of(cfg).find("tv") != std::string::npos);

  cfg = ExperimentConfig{};
  cfg.tune_xy = {0.05, -0.01};
  CHECK(message_of(cfg).find("tune.xy") != std::string::npos);

  cfg = ExperimentConfig{};
  cfg.bm4d_sigma = 0.0;
  CHECK(message_of(cfg).find("bm4d.sigma") != std::string::npos);
}

TEST_CASE("full geometry fills channel defaults from the phantom") {
  ExperimentConfig cfg;
  auto geom = cfg.full_geometry();
  CHECK(geom.n_views() == 200);
  CHECK(geom.n_channels == 64);
  CHECK(geom.channel_spacing == 1.0);
  CHECK(geom.n_slices == 8);
  CHECK(geom.angles[0] == 0.0);

  cfg.n_channels = 96;
  cfg.channel_spacing = 0.5;
  geom = cfg.full_geometry();
  CHECK(geom.n_channels == 96);
  CHECK(geom.channel_spacing == 0.5);
}

TEST_CASE("pnp initial volume honors the configured mode") {
  ExperimentConfig cfg = tiny_compare_config();
  cfg.phantom.nx = cfg.phantom.ny = 12;
  cfg.phantom.nz = 2;
  cfg.n_views = 16;
  VolumeD vol = generate_phantom(cfg.phantom);
  SynthesisResult data = synthesize(vol, cfg.full_geometry(), cfg.synth);

  cfg.pnp_init = "zero";
  VolumeD z = pnp_initial_volume(cfg, data);
  for (Index i = 0; i < z.data.size(); ++i) CHECK(z.data[i] == 0.0);

  cfg.pnp_init = "fbp";
  VolumeD f = pnp_initial_volume(cfg, data);
  VolumeD fr = run_fbp_method(cfg, data);
  for (Index i = 0; i < f.data.size(); ++i) CHECK(f.data[i] == fr.data[i]);

  cfg.pnp_init = "mbir";
  VolumeD m = pnp_initial_volume(cfg, data);
  VolumeD mr = run_mbir_method(cfg, data);
  for (Index i = 0; i < m.data.size(); ++i) CHECK(m.data[i] == mr.data[i]);
}

TEST_CASE("noiseless fully-sampled comparison reconstructs every method well") {
  ExperimentConfig cfg = tiny_compare_config();
  CompareOutputs out = compare_methods(cfg);

  REQUIRE(out.report.rows.size() == 4);
  CHECK(out.report.rows[0].method == "fbp");
  CHECK(out.report.rows[1].method == "mbir");
  CHECK(out.report.rows[2].method == "pnp-bm4d");
  CHECK(out.report.rows[3].method == "msf");
  for (const auto& row : out.report.rows) {
    CHECK(row.ok);
    CHECK(row.nrmse < 0.10);
    CHECK(row.psnr_db > 20.0);
    CHECK(row.ssim > 0.5);
  }

  // truth equals the phantom (no slice subsampling here)
  VolumeD phantom = generate_phantom(cfg.phantom);
  for (Index i = 0; i < phantom.data.size(); ++i)
    CHECK(out.truth.data[i] == phantom.data[i]);

  // volumes and timings cover the four methods; traces cover the two solvers
  CHECK(out.volumes.size() == 4);
  CHECK(out.traces.size() == 2);
  CHECK(out.traces[0].first == "pnp-bm4d");
  CHECK(out.traces[1].first == "msf");
  for (const auto& [name, trace] : out.traces) CHECK(trace.size() >= 1);
}

TEST_CASE("a failing method is reported without poisoning the others") {
  ExperimentConfig cfg;
  cfg.phantom.kind = PhantomKind::Ellipsoids;
  cfg.phantom.nx = cfg.phantom.ny = 16;
  cfg.phantom.nz = 4;
  cfg.phantom.seed = 8;
  cfg.n_views = 24;
  cfg.methods = {"pnp-bm4d", "msf"};
  cfg.pnp_init = "zero";
  cfg.pnp.max_iter = 2;
  cfg.prox_cg.max_iter = 15;
  cfg.bm_plane.patch_size = 3;
  cfg.bm_plane.search_radius = 3;
  cfg.bm_plane.step = 2;
  cfg.bm_cube.patch_size = 5;  // taller than the 4-slice volume: must fail
  cfg.bm_cube.search_radius = 2;

  CompareOutputs out = compare_methods(cfg);
  REQUIRE(out.report.rows.size() == 2);
  CHECK(out.report.rows[0].method == "pnp-bm4d");
  CHECK(!out.report.rows[0].ok);
  CHECK(!out.report.rows[0].message.empty());
  CHECK(out.report.rows[1].method == "msf");
  CHECK(out.report.rows[1].ok);
}

TEST_CASE("comparison runs are bit-reproducible") {
  ExperimentConfig cfg;
  cfg.phantom.kind = PhantomKind::Ellipsoids;
  cfg.phantom.nx = cfg.phantom.ny = 16;
  cfg.phantom.nz = 2;
  cfg.phantom.seed = 21;
  cfg.n_views = 40;
  cfg.synth.view_subsample = 2;
  cfg.synth.noise_percent = 2.0;
  cfg.synth.seed = 21;
  cfg.methods = {"fbp", "mbir"};

  CompareOutputs a = compare_methods(cfg);
  CompareOutputs b = compare_methods(cfg);
  REQUIRE(a.report.rows.size() == b.report.rows.size());
  for (size_t i = 0; i < a.report.rows.size(); ++i) {
    CHECK(a.report.rows[i].nrmse == b.report.rows[i].nrmse);
    CHECK(a.report.rows[i].psnr_db == b.report.rows[i].psnr_db);
    CHECK(a.report.rows[i].ssim == b.report.rows[i].ssim);
  }
  REQUIRE(a.volumes.size() == b.volumes.size());
  for (size_t v = 0; v < a.volumes.size(); ++v)
    for (Index i = 0; i < a.volumes[v].second.data.size(); ++i)
      CHECK(a.volumes[v].second.data[i] == b.volumes[v].second.data[i]);
}
