#pragma once

#include <unsupported/Eigen/FFT>

#include <complex>
#include <string>
#include <vector>

#include "msfct/parallel.hpp"
#include "msfct/projector.hpp"
#include "msfct/volume.hpp"

namespace msfct {

enum class FilterKind { RamLak, SheppLogan, Cosine };

inline const char* filter_kind_name(FilterKind k) {
  switch (k) {
    case FilterKind::RamLak: return "ram-lak";
    case FilterKind::SheppLogan: return "shepp-logan";
    default: return "cosine";
  }
}

inline FilterKind filter_kind_from_string(const std::string& s) {
  if (s == "ram-lak") return FilterKind::RamLak;
  if (s == "shepp-logan") return FilterKind::SheppLogan;
  if (s == "cosine") return FilterKind::Cosine;
  throw ConfigError("fbp.filter: unknown filter kind '" + s + "'");
}

struct FilterSpec {
  FilterKind kind{FilterKind::RamLak};
  double cutoff{1.0};  // fraction of Nyquist, in (0, 1]

  void validate() const {
    if (!(cutoff > 0.0) || cutoff > 1.0)
      throw ConfigError("FilterSpec: cutoff must lie in (0, 1]");
  }
};

namespace detail {

inline Index next_pow2(Index n) {
  Index p = 1;
  while (p < n) p <<= 1;
  return p;
}

// Frequency response of the band-limited discrete ramp on a length-L circle,
// windowed per filter kind. The spatial taps are the classic ones:
// h[0] = 1/(4 ds^2), h[k] = -1/(pi k ds)^2 for odd k, 0 for even k. The DC
// bin is therefore the (small, nonzero) sum of the taps.
inline Eigen::ArrayXd ramp_response(Index L, double ds, const FilterSpec& f) {
  Eigen::ArrayXd h = Eigen::ArrayXd::Zero(L);
  h[0] = 1.0 / (4.0 * ds * ds);
  for (Index k = 1; k <= L / 2; ++k) {
    if (k % 2 == 0) continue;
    const double v = -1.0 / (kPi * kPi * static_cast<double>(k) * static_cast<double>(k) * ds * ds);
    h[k] = v;
    if (k < L - k) h[L - k] = v;
  }
  Eigen::FFT<double> fft;
  std::vector<double> taps(h.data(), h.data() + L);
  std::vector<std::complex<double>> spec(L);
  fft.fwd(spec, taps);

  Eigen::ArrayXd H(L);
  for (Index j = 0; j < L; ++j) {
    const double frac =
        static_cast<double>(std::min(j, L - j)) / static_cast<double>(L / 2);
    double w = 1.0;
    switch (f.kind) {
      case FilterKind::RamLak: w = 1.0; break;
      case FilterKind::SheppLogan: {
        const double a = 0.5 * kPi * frac;
        w = a == 0.0 ? 1.0 : std::sin(a) / a;
        break;
      }
      case FilterKind::Cosine: w = std::cos(0.5 * kPi * frac); break;
    }
    if (frac > f.cutoff) w = 0.0;
    H[j] = spec[j].real() * w;  // symmetric kernel, real spectrum
  }
  return H;
}

}  // namespace detail

// Convolves every (view, slice) channel row with the discrete ramp filter in
// the frequency domain, zero-padded to the next power of two >= 2x row
// length. Output rows carry the channel_spacing convolution step, so values
// approximate the continuous ramp-filtered projection.
template <class T>
Sinogram<T> filter_sinogram(const Sinogram<T>& sino, const FilterSpec& f) {
  sino.validate();
  f.validate();
  if (sino.n_channels < 2)
    throw DimensionError("filter_sinogram: need at least 2 channels");

  const Index n = sino.n_channels;
  const Index L = detail::next_pow2(2 * n);
  const double ds = sino.channel_spacing;
  const Eigen::ArrayXd H = detail::ramp_response(L, ds, f);

  Sinogram<T> out = sino;
  parallel_for(sino.n_slices, [&](Index is) {
    Eigen::FFT<double> fft;
    std::vector<double> row(L);
    std::vector<std::complex<double>> spec(L);
    for (Index iv = 0; iv < sino.n_views; ++iv) {
      const T* src = sino.data.data() + (is * sino.n_views + iv) * n;
      std::fill(row.begin(), row.end(), 0.0);
      for (Index ic = 0; ic < n; ++ic) row[ic] = static_cast<double>(src[ic]);
      fft.fwd(spec, row);
      for (Index j = 0; j < L; ++j) spec[j] *= H[j];
      fft.inv(row, spec);
      T* dst = out.data.data() + (is * sino.n_views + iv) * n;
      for (Index ic = 0; ic < n; ++ic) dst[ic] = static_cast<T>(row[ic] * ds);
    }
  });
  return out;
}

// Filtered back projection: ramp-filter then adjoint-backproject, scaled by
// pi/n_views (times channel/voxel pitch factors so densities keep their
// units; for matched pitches the factor is exactly pi/n_views).
template <class T>
Volume<T> fbp(const Sinogram<T>& sino, const ScanGeometry& geom, const FilterSpec& f,
              const GridShape& grid) {
  if (sino.n_views < 2) throw DimensionError("fbp: need at least 2 views");
  Sinogram<T> filtered = filter_sinogram(sino, f);
  Volume<T> vol = backproject(filtered, geom, grid);
  const double scale = kPi / static_cast<double>(sino.n_views) * geom.channel_spacing /
                       (grid.spacing_xy * grid.spacing_xy);
  vol.data *= static_cast<T>(scale);
  for (Index i = 0; i < vol.data.size(); ++i)
    if (!std::isfinite(static_cast<double>(vol.data[i]))) vol.data[i] = T(0);
  return vol;
}

template <class T>
Volume<T> fbp(const Sinogram<T>& sino, const ScanGeometry& geom,
              const FilterSpec& f = FilterSpec{}) {
  return fbp(sino, geom, f, default_grid(geom));
}

}  // namespace msfct
