#pragma once

#include <cmath>
#include <limits>

#include "msfct/core.hpp"
#include "msfct/volume.hpp"

namespace msfct {

enum class NrmseNorm { Estimate, Truth };

// sqrt(sum (est - truth)^2) / sqrt(sum ref^2); the reference defaults to the
// estimate.  An all-zero reference has no meaningful normalization.
template <class T>
double nrmse(const Volume<T>& est, const Volume<T>& truth,
             NrmseNorm norm = NrmseNorm::Estimate) {
  if (!est.same_shape(truth)) throw DimensionError("nrmse: shape mismatch");
  const double err = std::sqrt((est.data - truth.data).matrix().squaredNorm());
  const auto& ref = norm == NrmseNorm::Estimate ? est : truth;
  const double den = std::sqrt(ref.data.matrix().squaredNorm());
  if (!(den > 0.0)) throw NumericalError("nrmse: all-zero normalization reference");
  return err / den;
}

// 20 log10( max(truth) / rmse ).  Identical inputs give +infinity.
template <class T>
double psnr(const Volume<T>& est, const Volume<T>& truth) {
  if (!est.same_shape(truth)) throw DimensionError("psnr: shape mismatch");
  const double peak = truth.data.maxCoeff();
  if (!(peak > 0.0)) throw NumericalError("psnr: truth peak must be > 0");
  const double mse =
      (est.data - truth.data).matrix().squaredNorm() / static_cast<double>(truth.data.size());
  if (mse == 0.0) return std::numeric_limits<double>::infinity();
  return 20.0 * std::log10(peak / std::sqrt(mse));
}

namespace detail {

// Mean SSIM over all fully-contained window positions of one slice pair.
template <class T>
double ssim_slice(const MatrixX<T>& a, const MatrixX<T>& b, Index win, double c1,
                  double c2) {
  const Index nr = a.rows() - win + 1;
  const Index nc = a.cols() - win + 1;
  const double inv_n = 1.0 / static_cast<double>(win * win);
  double acc = 0.0;
  for (Index r = 0; r < nr; ++r)
    for (Index c = 0; c < nc; ++c) {
      double sa = 0.0, sb = 0.0, saa = 0.0, sbb = 0.0, sab = 0.0;
      for (Index i = 0; i < win; ++i)
        for (Index j = 0; j < win; ++j) {
          const double x = static_cast<double>(a(r + i, c + j));
          const double y = static_cast<double>(b(r + i, c + j));
          sa += x;
          sb += y;
          saa += x * x;
          sbb += y * y;
          sab += x * y;
        }
      const double mu_a = sa * inv_n;
      const double mu_b = sb * inv_n;
      const double var_a = saa * inv_n - mu_a * mu_a;
      const double var_b = sbb * inv_n - mu_b * mu_b;
      const double cov = sab * inv_n - mu_a * mu_b;
      const double num = (2.0 * mu_a * mu_b + c1) * (2.0 * cov + c2);
      const double den = (mu_a * mu_a + mu_b * mu_b + c1) * (var_a + var_b + c2);
      acc += num / den;
    }
  return acc / static_cast<double>(nr * nc);
}

}  // namespace detail

// Mean structural similarity with a uniform win x win window (default 7),
// K1 = 0.01, K2 = 0.03, and dynamic range max(truth) - min(truth) taken over
// the whole volume.  Each transaxial slice is averaged over all valid window
// positions; the result averages the slices with equal weight.
template <class T>
double ssim(const Volume<T>& est, const Volume<T>& truth, Index win = 7) {
  if (!est.same_shape(truth)) throw DimensionError("ssim: shape mismatch");
  if (win < 1) throw ConfigError("ssim: window must be >= 1");
  if (win > est.nx || win > est.ny)
    throw DimensionError("ssim: window exceeds slice dimensions");
  const double range = truth.data.maxCoeff() - truth.data.minCoeff();
  if (!(range > 0.0)) throw NumericalError("ssim: truth has zero dynamic range");
  const double c1 = (0.01 * range) * (0.01 * range);
  const double c2 = (0.03 * range) * (0.03 * range);
  double acc = 0.0;
  for (Index iz = 0; iz < est.nz; ++iz) {
    MatrixX<T> a = extract_slice(est, Plane::XY, iz);
    MatrixX<T> b = extract_slice(truth, Plane::XY, iz);
    acc += detail::ssim_slice(a, b, win, c1, c2);
  }
  return acc / static_cast<double>(est.nz);
}

}  // namespace msfct
