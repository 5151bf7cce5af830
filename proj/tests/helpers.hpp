#pragma once

// Shared fixtures for the test suites: deterministic random fields, dense
// operator probes (for closed-form oracles), scratch directories, and a
// subprocess runner for the CLI binary.

#include <algorithm>
#include <cmath>
#include <cstdio>
#include <cstdlib>
#include <filesystem>
#include <fstream>
#include <random>
#include <sstream>
#include <string>
#include <vector>

#include <Eigen/Dense>

#include "msfct/metrics.hpp"
#include "msfct/projector.hpp"
#include "msfct/volume.hpp"

namespace testutil {

using msfct::Index;

inline double uniform01(std::mt19937_64& g) {
  return static_cast<double>(g() >> 11) * 0x1.0p-53;
}

inline msfct::VolumeD random_volume(Index nx, Index ny, Index nz, std::uint64_t seed,
                                    double lo = 0.0, double hi = 1.0) {
  msfct::VolumeD v = msfct::VolumeD::zeros(nx, ny, nz);
  std::mt19937_64 g(seed);
  for (Index i = 0; i < v.data.size(); ++i) v.data[i] = lo + (hi - lo) * uniform01(g);
  return v;
}

inline msfct::SinogramD random_sinogram(const msfct::ScanGeometry& geom,
                                        std::uint64_t seed) {
  msfct::SinogramD s = msfct::SinogramD::zeros(geom);
  std::mt19937_64 g(seed);
  for (Index i = 0; i < s.data.size(); ++i) s.data[i] = uniform01(g);
  return s;
}

// Dense matrix of the forward projector on the given grid, built column by
// column from unit volumes. Only viable for tiny instances.
inline Eigen::MatrixXd dense_forward_matrix(const msfct::ScanGeometry& geom,
                                            const msfct::GridShape& grid) {
  const Index n_vox = grid.nx * grid.ny * geom.n_slices;
  const Index n_meas = geom.n_views() * geom.n_channels * geom.n_slices;
  Eigen::MatrixXd A(n_meas, n_vox);
  msfct::VolumeD e = msfct::VolumeD::zeros(grid.nx, grid.ny, geom.n_slices,
                                           grid.spacing_xy, grid.spacing_z);
  for (Index j = 0; j < n_vox; ++j) {
    e.data.setZero();
    e.data[j] = 1.0;
    msfct::SinogramD col = msfct::project(e, geom);
    A.col(j) = col.data.matrix();
  }
  return A;
}

// Dense matrix of a linear volume->volume operator (e.g. a graph Laplacian).
template <class Op>
Eigen::MatrixXd dense_volume_operator(Index nx, Index ny, Index nz, Op&& op) {
  const Index n = nx * ny * nz;
  Eigen::MatrixXd M(n, n);
  msfct::VolumeD e = msfct::VolumeD::zeros(nx, ny, nz);
  for (Index j = 0; j < n; ++j) {
    e.data.setZero();
    e.data[j] = 1.0;
    msfct::VolumeD out = op(e);
    M.col(j) = out.data.matrix();
  }
  return M;
}

// Fresh empty scratch directory under the build tree's working directory.
inline std::string scratch_dir(const std::string& name) {
  namespace fs = std::filesystem;
  fs::path p = fs::path("scratch") / name;
  fs::remove_all(p);
  fs::create_directories(p);
  return p.string();
}

inline std::string slurp(const std::string& path) {
  std::ifstream in(path, std::ios::binary);
  std::ostringstream ss;
  ss << in.rdbuf();
  return ss.str();
}

inline void spit(const std::string& path, const std::string& text) {
  std::ofstream out(path, std::ios::binary);
  out << text;
}

struct CliResult {
  int exit_code{-1};
  std::string out;
  std::string err;
};

// Runs the CLI binary with the given arguments, capturing exit code, stdout
// and stderr through temp files (args are placed verbatim in a shell line).
inline CliResult run_cli(const std::string& cli_path, const std::string& args,
                         const std::string& tag) {
  namespace fs = std::filesystem;
  fs::create_directories("scratch");
  const std::string out_f = "scratch/" + tag + ".out";
  const std::string err_f = "scratch/" + tag + ".err";
  const std::string cmd = cli_path + " " + args + " >" + out_f + " 2>" + err_f;
  const int rc = std::system(cmd.c_str());
  CliResult r;
  r.exit_code = (rc >= 0 && WIFEXITED(rc)) ? WEXITSTATUS(rc) : -1;
  r.out = slurp(out_f);
  r.err = slurp(err_f);
  return r;
}

}  // namespace testutil

// Independent metric recomputations with deliberately different accumulation
// strategies than the library (flat loops, two-pass moments).  Used as oracles
// by the pipeline and acceptance suites.
namespace testref {

using msfct::Index;
using msfct::NrmseNorm;
using msfct::VolumeD;

inline double nrmse_ref(const VolumeD& est, const VolumeD& truth, NrmseNorm norm) {
  double se = 0.0, sr = 0.0;
  for (Index i = 0; i < est.data.size(); ++i) {
    const double d = est.data[i] - truth.data[i];
    se += d * d;
    const double r = norm == NrmseNorm::Estimate ? est.data[i] : truth.data[i];
    sr += r * r;
  }
  return std::sqrt(se) / std::sqrt(sr);
}

inline double psnr_ref(const VolumeD& est, const VolumeD& truth) {
  double peak = truth.data[0];
  double se = 0.0;
  for (Index i = 0; i < truth.data.size(); ++i) {
    peak = std::max(peak, truth.data[i]);
    const double d = est.data[i] - truth.data[i];
    se += d * d;
  }
  const double mse = se / static_cast<double>(truth.data.size());
  return 20.0 * std::log10(peak / std::sqrt(mse));
}

inline double ssim_ref(const VolumeD& est, const VolumeD& truth, Index win) {
  const double range = truth.data.maxCoeff() - truth.data.minCoeff();
  const double c1 = (0.01 * range) * (0.01 * range);
  const double c2 = (0.03 * range) * (0.03 * range);
  const double n = static_cast<double>(win * win);
  double slice_acc = 0.0;
  for (Index iz = 0; iz < est.nz; ++iz) {
    double acc = 0.0;
    Index count = 0;
    for (Index ry = 0; ry + win <= est.ny; ++ry)
      for (Index rx = 0; rx + win <= est.nx; ++rx) {
        double ma = 0.0, mb = 0.0;
        for (Index j = 0; j < win; ++j)
          for (Index i = 0; i < win; ++i) {
            ma += est.at(rx + i, ry + j, iz);
            mb += truth.at(rx + i, ry + j, iz);
          }
        ma /= n;
        mb /= n;
        double va = 0.0, vb = 0.0, cov = 0.0;
        for (Index j = 0; j < win; ++j)
          for (Index i = 0; i < win; ++i) {
            const double da = est.at(rx + i, ry + j, iz) - ma;
            const double db = truth.at(rx + i, ry + j, iz) - mb;
            va += da * da;
            vb += db * db;
            cov += da * db;
          }
        va /= n;
        vb /= n;
        cov /= n;
        acc += ((2 * ma * mb + c1) * (2 * cov + c2)) /
               ((ma * ma + mb * mb + c1) * (va + vb + c2));
        ++count;
      }
    slice_acc += acc / static_cast<double>(count);
  }
  return slice_acc / static_cast<double>(est.nz);
}

}  // namespace testref
