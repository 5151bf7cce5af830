#pragma once

#include <string>
#include <vector>

#include "msfct/core.hpp"
#include "msfct/pipeline.hpp"
#include "msfct/solver.hpp"
#include "msfct/volume.hpp"

namespace msfct {

// Raw little-endian float32 arrays with a JSON sidecar at path + ".json"
// holding {dtype, ordering, dims, spacings, angles...}.  Volumes are stored
// z-major ("zyx" ordering), sinograms slice-major with channel fastest
// ("svc").  All writes go through a temp file + rename so readers never see a
// partial file.

void write_volume(const std::string& path, const VolumeD& vol);
VolumeD read_volume(const std::string& path);

void write_sinogram(const std::string& path, const SinogramD& sino);
SinogramD read_sinogram(const std::string& path);

void write_weights(const std::string& path, const WeightMapD& w);
WeightMapD read_weights(const std::string& path);

// CSV with header "iteration,primal,dual", one row per outer iteration.
void write_residual_trace(const std::string& path, const ResidualTrace& trace);
ResidualTrace read_residual_trace(const std::string& path);

// CSV with header "method,status,nrmse,psnr_db,ssim"; failed rows carry
// status=failed and empty metric fields.  Numbers print with %.17g so a
// rerun of the same experiment is byte-comparable.
void write_metrics_csv(const std::string& path, const MetricsReport& report);
void write_metrics_json(const std::string& path, const MetricsReport& report);

// CSV with header "index,sigma_xy,sigma_yz,sigma_xz,status,score".
void write_tune_csv(const std::string& path, const TuneResult& result,
                    TuneMetric metric);

// 16-bit grayscale PNG.  Values map through the window/level ramp:
// out = clamp((v - (level - window/2)) / window, 0, 1) * 65535.
void write_png16(const std::string& path, const MatrixX<double>& image, double window,
                 double level);

// One PNG per transaxial slice, named <stem>_z000.png ... under dir; the
// window/level covers the volume's [min, max] range.  Returns written paths.
std::vector<std::string> write_volume_pngs(const std::string& dir,
                                           const std::string& stem, const VolumeD& vol);

// Atomic small-text-file helper (temp file + rename).
void write_text_file(const std::string& path, const std::string& contents);
std::string read_text_file(const std::string& path);

std::string format_double(double v);  // shortest round-trip decimal (%.17g)

}  // namespace msfct
