#pragma once

#include <cmath>
#include <utility>

#include "msfct/core.hpp"

namespace msfct {

// 3D grid of attenuation densities (1/mm). Flat storage is z-major, then y,
// then x: data[(iz*ny + iy)*nx + ix]. This ordering is fixed and is the one
// used by the on-disk format.
template <class T>
struct Volume {
  Index nx{0}, ny{0}, nz{0};
  double spacing_xy{1.0};  // mm per voxel in x and y
  double spacing_z{1.0};   // mm per voxel in z
  ArrayX<T> data;

  static Volume zeros(Index nx, Index ny, Index nz, double sxy = 1.0, double sz = 1.0) {
    Volume v;
    v.nx = nx;
    v.ny = ny;
    v.nz = nz;
    v.spacing_xy = sxy;
    v.spacing_z = sz;
    v.data = ArrayX<T>::Zero(nx * ny * nz);
    return v;
  }

  Index size() const { return nx * ny * nz; }

  T& at(Index ix, Index iy, Index iz) { return data[(iz * ny + iy) * nx + ix]; }
  T at(Index ix, Index iy, Index iz) const { return data[(iz * ny + iy) * nx + ix]; }

  bool same_shape(const Volume& o) const {
    return nx == o.nx && ny == o.ny && nz == o.nz;
  }

  void validate() const {
    if (nx < 1 || ny < 1 || nz < 1)
      throw DimensionError("Volume: dimensions must be positive");
    if (!(spacing_xy > 0.0) || !(spacing_z > 0.0))
      throw DimensionError("Volume: spacings must be strictly positive");
    if (data.size() != size())
      throw DimensionError("Volume: data length does not match nx*ny*nz");
    if (!data.isFinite().all())
      throw NumericalError("Volume: non-finite values");
  }
};

using VolumeD = Volume<double>;
using VolumeF = Volume<float>;

// Parallel-beam scanner description. Angle 0 has rays parallel to the y axis,
// counterclockwise positive. Channel (n_channels-1)/2 plus center_offset
// (in channels) is aligned with the rotation center. Slices are independent
// 2D fans of parallel rays.
struct ScanGeometry {
  Eigen::ArrayXd angles;  // radians in [0, pi), strictly increasing
  Index n_channels{0};
  double channel_spacing{1.0};  // mm
  double center_offset{0.0};    // channels
  Index n_slices{0};
  double slice_spacing{1.0};  // mm

  Index n_views() const { return angles.size(); }

  void validate() const {
    if (angles.size() < 1) throw DimensionError("ScanGeometry: no view angles");
    if (n_channels < 1) throw DimensionError("ScanGeometry: n_channels must be >= 1");
    if (!(channel_spacing > 0.0))
      throw DimensionError("ScanGeometry: channel_spacing must be > 0");
    if (n_slices < 1) throw DimensionError("ScanGeometry: n_slices must be >= 1");
    if (!(slice_spacing > 0.0))
      throw DimensionError("ScanGeometry: slice_spacing must be > 0");
    for (Index i = 1; i < angles.size(); ++i)
      if (!(angles[i] > angles[i - 1]))
        throw DimensionError("ScanGeometry: angles must be strictly increasing");
  }
};

// n equispaced angles covering [0, pi).
inline Eigen::ArrayXd uniform_angles(Index n_views) {
  Eigen::ArrayXd a(n_views);
  for (Index i = 0; i < n_views; ++i) a[i] = kPi * static_cast<double>(i) / static_cast<double>(n_views);
  return a;
}

inline ScanGeometry make_parallel_geometry(Index n_views, Index n_channels,
                                           double channel_spacing, Index n_slices,
                                           double slice_spacing,
                                           double center_offset = 0.0) {
  ScanGeometry g;
  g.angles = uniform_angles(n_views);
  g.n_channels = n_channels;
  g.channel_spacing = channel_spacing;
  g.center_offset = center_offset;
  g.n_slices = n_slices;
  g.slice_spacing = slice_spacing;
  return g;
}

// Stack of per-slice view x channel line integrals. Flat storage is slice-
// major, then view, then channel: data[(is*n_views + iv)*n_channels + ic],
// so each (slice, view) channel row is contiguous.
template <class T>
struct Sinogram {
  Index n_views{0}, n_channels{0}, n_slices{0};
  Eigen::ArrayXd angles;
  double channel_spacing{1.0};
  double slice_spacing{1.0};
  ArrayX<T> data;

  static Sinogram zeros(const ScanGeometry& g) {
    Sinogram s;
    s.n_views = g.n_views();
    s.n_channels = g.n_channels;
    s.n_slices = g.n_slices;
    s.angles = g.angles;
    s.channel_spacing = g.channel_spacing;
    s.slice_spacing = g.slice_spacing;
    s.data = ArrayX<T>::Zero(s.n_views * s.n_channels * s.n_slices);
    return s;
  }

  Index size() const { return n_views * n_channels * n_slices; }

  T& at(Index iv, Index ic, Index is) {
    return data[(is * n_views + iv) * n_channels + ic];
  }
  T at(Index iv, Index ic, Index is) const {
    return data[(is * n_views + iv) * n_channels + ic];
  }

  bool same_shape(const Sinogram& o) const {
    return n_views == o.n_views && n_channels == o.n_channels && n_slices == o.n_slices;
  }

  void validate() const {
    if (n_views < 1 || n_channels < 1 || n_slices < 1)
      throw DimensionError("Sinogram: dimensions must be positive");
    if (angles.size() != n_views)
      throw DimensionError("Sinogram: angles length does not match n_views");
    for (Index i = 0; i < n_views; ++i) {
      if (!(angles[i] >= 0.0) || !(angles[i] < kPi))
        throw DimensionError("Sinogram: angles must lie in [0, pi)");
      if (i > 0 && !(angles[i] > angles[i - 1]))
        throw DimensionError("Sinogram: angles must be strictly increasing");
    }
    if (data.size() != size())
      throw DimensionError("Sinogram: data length does not match dims");
    if (!data.isFinite().all()) throw NumericalError("Sinogram: non-finite values");
  }

  void validate(const ScanGeometry& g) const {
    validate();
    if (n_views != g.n_views() || n_channels != g.n_channels || n_slices != g.n_slices)
      throw DimensionError("Sinogram: shape does not match geometry");
  }
};

using SinogramD = Sinogram<double>;

// Per-measurement nonnegative weights, same shape and ordering as Sinogram
// data (the inverse noise covariance).
template <class T>
struct WeightMap {
  Index n_views{0}, n_channels{0}, n_slices{0};
  ArrayX<T> data;

  template <class U>
  static WeightMap uniform(const Sinogram<U>& like, T value) {
    WeightMap w;
    w.n_views = like.n_views;
    w.n_channels = like.n_channels;
    w.n_slices = like.n_slices;
    w.data = ArrayX<T>::Constant(like.size(), value);
    return w;
  }

  Index size() const { return n_views * n_channels * n_slices; }

  template <class U>
  bool same_shape(const Sinogram<U>& s) const {
    return n_views == s.n_views && n_channels == s.n_channels && n_slices == s.n_slices;
  }

  void validate() const {
    if (data.size() != size())
      throw DimensionError("WeightMap: data length does not match dims");
    if (!data.isFinite().all()) throw NumericalError("WeightMap: non-finite weights");
    if ((data < T(0)).any()) throw NumericalError("WeightMap: negative weights");
  }

  void validate(const ScanGeometry& g) const {
    validate();
    if (n_views != g.n_views() || n_channels != g.n_channels || n_slices != g.n_slices)
      throw DimensionError("WeightMap: shape does not match geometry");
  }
};

using WeightMapD = WeightMap<double>;

// Orthogonal slicing planes. The plane names the in-slice axes; slices are
// taken along the remaining (normal) axis.
enum class Plane { XY, YZ, XZ };

inline const char* plane_name(Plane p) {
  switch (p) {
    case Plane::XY: return "x-y";
    case Plane::YZ: return "y-z";
    case Plane::XZ: return "x-z";
  }
  return "?";
}

// Number of slices perpendicular to the plane's normal axis.
template <class T>
Index plane_slice_count(const Volume<T>& v, Plane p) {
  switch (p) {
    case Plane::XY: return v.nz;
    case Plane::YZ: return v.nx;
    case Plane::XZ: return v.ny;
  }
  return 0;
}

// Slice orientation: XY -> (rows=y, cols=x), YZ -> (rows=z, cols=y),
// XZ -> (rows=z, cols=x).
template <class T>
MatrixX<T> extract_slice(const Volume<T>& v, Plane p, Index k) {
  switch (p) {
    case Plane::XY: {
      MatrixX<T> m(v.ny, v.nx);
      for (Index iy = 0; iy < v.ny; ++iy)
        for (Index ix = 0; ix < v.nx; ++ix) m(iy, ix) = v.at(ix, iy, k);
      return m;
    }
    case Plane::YZ: {
      MatrixX<T> m(v.nz, v.ny);
      for (Index iz = 0; iz < v.nz; ++iz)
        for (Index iy = 0; iy < v.ny; ++iy) m(iz, iy) = v.at(k, iy, iz);
      return m;
    }
    case Plane::XZ: {
      MatrixX<T> m(v.nz, v.nx);
      for (Index iz = 0; iz < v.nz; ++iz)
        for (Index ix = 0; ix < v.nx; ++ix) m(iz, ix) = v.at(ix, k, iz);
      return m;
    }
  }
  throw DimensionError("extract_slice: bad plane");
}

template <class T>
void insert_slice(Volume<T>& v, Plane p, Index k, const MatrixX<T>& m) {
  switch (p) {
    case Plane::XY:
      for (Index iy = 0; iy < v.ny; ++iy)
        for (Index ix = 0; ix < v.nx; ++ix) v.at(ix, iy, k) = m(iy, ix);
      return;
    case Plane::YZ:
      for (Index iz = 0; iz < v.nz; ++iz)
        for (Index iy = 0; iy < v.ny; ++iy) v.at(k, iy, iz) = m(iz, iy);
      return;
    case Plane::XZ:
      for (Index iz = 0; iz < v.nz; ++iz)
        for (Index ix = 0; ix < v.nx; ++ix) v.at(ix, k, iz) = m(iz, ix);
      return;
  }
}

}  // namespace msfct
