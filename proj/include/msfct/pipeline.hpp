#pragma once

#include <cstdint>
#include <functional>
#include <string>
#include <utility>
#include <vector>

#include "msfct/bm3d.hpp"
#include "msfct/cg.hpp"
#include "msfct/core.hpp"
#include "msfct/fbp.hpp"
#include "msfct/mbir.hpp"
#include "msfct/metrics.hpp"
#include "msfct/phantom.hpp"
#include "msfct/projector.hpp"
#include "msfct/solver.hpp"
#include "msfct/volume.hpp"

namespace msfct {

enum class WeightModel { KnownSigma, Mad };

WeightModel weight_model_from_string(const std::string& s);
const char* weight_model_name(WeightModel m);

// Measurement synthesis: project with the full geometry, keep every k-th view
// and every m-th slice (truncating tails), then add i.i.d. Gaussian noise
// with sigma = (noise_percent/100) * mean(|clean subsampled sinogram|).
struct SynthSpec {
  Index view_subsample{1};
  Index slice_subsample{1};
  double noise_percent{0.0};
  std::uint64_t seed{0};
  WeightModel weights{WeightModel::KnownSigma};

  void validate() const;
};

struct SynthesisResult {
  SinogramD sino;      // subsampled, noisy
  WeightMapD weights;  // per the configured noise model
  ScanGeometry geom;   // subsampled geometry matching sino
  double noise_sigma{0.0};
};

// Keeps indices 0, f, 2f, ... along views and slices; slice_spacing scales by
// the slice factor.  Factors that do not divide the counts truncate the tail.
ScanGeometry subsample_geometry(const ScanGeometry& g, Index view_factor,
                                Index slice_factor);
SinogramD subsample_sinogram(const SinogramD& s, Index view_factor, Index slice_factor);

// Keeps z indices 0, m, 2m, ...; spacing_z scales by m.  Used to form the
// ground-truth volume matching a slice-subsampled scan.
VolumeD keep_every_nth_slice(const VolumeD& v, Index m);

SynthesisResult synthesize(const VolumeD& vol, const ScanGeometry& geom_full,
                           const SynthSpec& cfg);

// Uniform weights 1/sigma^2; sigma = 0 (noiseless) degenerates to weights 1.
WeightMapD estimate_weights_known(const SinogramD& sino, double sigma);

// Robust noise estimate from channel-direction second differences:
// sigma_hat = MAD / 0.6744897501960817 / sqrt(6), weights = 1/sigma_hat^2.
// A zero MAD (e.g. constant sinogram) degenerates to weights 1.
WeightMapD estimate_weights_mad(const SinogramD& sino);

enum class TuneMetric { Psnr, Nrmse };

struct TuneEntry {
  SigmaTriple sigmas;
  double score{0.0};
  bool ok{false};
  std::string message;
};

struct TuneResult {
  SigmaTriple best;
  std::size_t best_index{0};
  std::vector<TuneEntry> table;
};

// Runs `reconstruct` per grid triple and scores against truth (higher PSNR /
// lower NRMSE wins).  Ties keep the first grid entry; failed runs are
// recorded in the table and excluded from the argmax.
TuneResult tune_sigmas(const std::function<VolumeD(const SigmaTriple&)>& reconstruct,
                       const std::vector<SigmaTriple>& grid, const VolumeD& truth,
                       TuneMetric metric = TuneMetric::Psnr);

struct ExperimentConfig {
  // [run]
  std::uint64_t seed{0};
  int threads{0};
  std::string output_dir{"out"};
  std::vector<std::string> methods{"fbp", "mbir", "pnp-bm4d", "msf"};
  bool write_volumes{true};
  bool write_png{true};

  // [phantom]
  PhantomSpec phantom{};

  // [geometry]
  Index n_views{200};
  Index n_channels{0};          // 0 -> phantom nx
  double channel_spacing{0.0};  // 0 -> phantom spacing_xy
  double center_offset{0.0};

  // [synthesize]
  SynthSpec synth{};

  // [metrics]
  NrmseNorm nrmse_norm{NrmseNorm::Estimate};

  // [fbp]
  FilterSpec filter{};

  // [mbir]
  MbirParams mbir{};

  // [pnp]
  PnpConfig pnp{};
  CgParams prox_cg{};
  std::string pnp_init{"mbir"};  // mbir | fbp | zero

  // [msf]
  SigmaTriple msf_sigmas{0.05, 0.05, 0.05};
  BlockMatchConfig bm_plane{default_bm3d_2d()};

  // [bm4d]
  double bm4d_sigma{0.05};
  BlockMatchConfig bm_cube{default_bm4d_3d()};

  // [tune]
  std::string tune_method{"msf"};  // msf | pnp-bm4d
  TuneMetric tune_metric{TuneMetric::Psnr};
  std::vector<double> tune_xy, tune_yz, tune_xz;  // cartesian product
  std::vector<double> tune_bm4d;

  void validate() const;
  ScanGeometry full_geometry() const;
};

struct MethodMetrics {
  std::string method;
  bool ok{false};
  double nrmse{0.0};
  double psnr_db{0.0};
  double ssim{0.0};
  std::string message;  // failure reason when !ok
};

struct MetricsReport {
  std::vector<MethodMetrics> rows;
};

struct CompareOutputs {
  MetricsReport report;
  VolumeD truth;
  SynthesisResult data;
  std::vector<std::pair<std::string, VolumeD>> volumes;
  std::vector<std::pair<std::string, ResidualTrace>> traces;
  std::vector<std::pair<std::string, double>> timings_ms;
};

// Runs the configured methods on one synthesized dataset.  Methods run in the
// fixed order fbp, mbir, pnp-bm4d, msf; the MBIR result initializes the PNP
// solvers when pnp_init = "mbir" (computed on demand even if mbir is not in
// the requested method list).  Per-method failures are recorded in the
// report, not rethrown.
CompareOutputs compare_methods(const ExperimentConfig& cfg);

// Reconstruction entry points shared by compare_methods, tuning, and the CLI.
VolumeD run_fbp_method(const ExperimentConfig& cfg, const SynthesisResult& data);
VolumeD run_mbir_method(const ExperimentConfig& cfg, const SynthesisResult& data);
PnpResult run_msf_method(const ExperimentConfig& cfg, const SynthesisResult& data,
                         const SigmaTriple& sigmas, const VolumeD& x0);
PnpResult run_bm4d_method(const ExperimentConfig& cfg, const SynthesisResult& data,
                          double sigma, const VolumeD& x0);

// Initial volume per cfg.pnp_init ("mbir", "fbp", or "zero").
VolumeD pnp_initial_volume(const ExperimentConfig& cfg, const SynthesisResult& data);

// Cartesian product of the [tune] axis grids; empty axes fall back to the
// configured base sigma for that axis.
std::vector<SigmaTriple> msf_tune_grid(const ExperimentConfig& cfg);
std::vector<SigmaTriple> bm4d_tune_grid(const ExperimentConfig& cfg);

}  // namespace msfct
