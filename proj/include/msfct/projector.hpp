#pragma once

#include <cmath>

#include "msfct/parallel.hpp"
#include "msfct/volume.hpp"

namespace msfct {

// Reconstruction grid for the adjoint. nz is taken from the geometry.
struct GridShape {
  Index nx{0}, ny{0};
  double spacing_xy{1.0};
  double spacing_z{1.0};
};

// Default voxel pitch equals channel pitch, grid square over the detector.
inline GridShape default_grid(const ScanGeometry& g) {
  return GridShape{g.n_channels, g.n_channels, g.channel_spacing, g.slice_spacing};
}

namespace detail {

// Sampling positions for one ray, in grid units (pixel-center coordinates).
// The ray is clipped to the bilinear support box [-1, nx] x [-1, ny]; samples
// are spaced spacing_xy/2 apart in world units. Positions depend only on the
// geometry, so forward and adjoint traversals see identical weights.
struct RaySampling {
  double gx0{0.0}, gy0{0.0};  // first sample
  double dgx{0.0}, dgy{0.0};  // per-sample increment
  Index n{0};
  double step{0.0};  // world-space sample spacing (mm)
};

inline RaySampling ray_sampling(Index nx, Index ny, double sxy, double cos_a,
                                double sin_a, double s_mm) {
  RaySampling rs;
  rs.step = 0.5 * sxy;
  const double inv = 1.0 / sxy;
  const double cx = 0.5 * static_cast<double>(nx - 1);
  const double cy = 0.5 * static_cast<double>(ny - 1);
  // Ray: p(t) = s*(cos a, sin a) + t*(-sin a, cos a), t in mm.
  const double ox = s_mm * cos_a * inv + cx;
  const double oy = s_mm * sin_a * inv + cy;
  const double dx = -sin_a * inv;
  const double dy = cos_a * inv;

  const double reach = 0.5 * std::hypot(static_cast<double>(nx + 2) * sxy,
                                        static_cast<double>(ny + 2) * sxy) +
                       rs.step;
  double t_lo = -reach, t_hi = reach;
  auto clip = [&](double o, double d, double lo, double hi) {
    if (std::abs(d) < 1e-300) {
      if (o < lo || o > hi) t_hi = t_lo;  // misses the slab entirely
      return;
    }
    double ta = (lo - o) / d, tb = (hi - o) / d;
    if (ta > tb) std::swap(ta, tb);
    if (ta > t_lo) t_lo = ta;
    if (tb < t_hi) t_hi = tb;
  };
  clip(ox, dx, -1.0, static_cast<double>(nx));
  clip(oy, dy, -1.0, static_cast<double>(ny));
  if (!(t_hi > t_lo)) return rs;

  rs.n = static_cast<Index>(std::ceil((t_hi - t_lo) / rs.step));
  const double t0 = t_lo + 0.5 * rs.step;
  rs.gx0 = ox + t0 * dx;
  rs.gy0 = oy + t0 * dy;
  rs.dgx = rs.step * dx;
  rs.dgy = rs.step * dy;
  return rs;
}

inline double channel_s(const ScanGeometry& g, Index ic) {
  const double c0 = 0.5 * static_cast<double>(g.n_channels - 1) + g.center_offset;
  return (static_cast<double>(ic) - c0) * g.channel_spacing;
}

}  // namespace detail

// Line integrals along parallel rays per (angle, channel, slice). Linear in
// the volume; slices are independent. Samples taken every spacing_xy/2 along
// the ray with bilinear interpolation, out-of-grid samples contribute zero.
template <class T>
Sinogram<T> project(const Volume<T>& vol, const ScanGeometry& geom) {
  vol.validate();
  geom.validate();
  if (vol.nz != geom.n_slices)
    throw DimensionError("project: vol.nz does not match geometry slice count");

  Sinogram<T> sino = Sinogram<T>::zeros(geom);
  const Index nx = vol.nx, ny = vol.ny;
  const Index n_views = geom.n_views();

  parallel_for(geom.n_slices * n_views, [&](Index task) {
    const Index is = task / n_views;
    const Index iv = task % n_views;
    const double ca = std::cos(geom.angles[iv]);
    const double sa = std::sin(geom.angles[iv]);
    const T* sl = vol.data.data() + is * nx * ny;
    T* row = sino.data.data() + (is * n_views + iv) * geom.n_channels;
    for (Index ic = 0; ic < geom.n_channels; ++ic) {
      const auto rs = detail::ray_sampling(nx, ny, vol.spacing_xy, ca, sa,
                                           detail::channel_s(geom, ic));
      double acc = 0.0;
      double gx = rs.gx0, gy = rs.gy0;
      for (Index k = 0; k < rs.n; ++k, gx += rs.dgx, gy += rs.dgy) {
        const double fx = std::floor(gx), fy = std::floor(gy);
        const Index ix0 = static_cast<Index>(fx), iy0 = static_cast<Index>(fy);
        const double ax = gx - fx, ay = gy - fy;
        const bool x0ok = ix0 >= 0 && ix0 < nx, x1ok = ix0 + 1 >= 0 && ix0 + 1 < nx;
        const bool y0ok = iy0 >= 0 && iy0 < ny, y1ok = iy0 + 1 >= 0 && iy0 + 1 < ny;
        if (x0ok && y0ok) acc += (1.0 - ax) * (1.0 - ay) * sl[iy0 * nx + ix0];
        if (x1ok && y0ok) acc += ax * (1.0 - ay) * sl[iy0 * nx + ix0 + 1];
        if (x0ok && y1ok) acc += (1.0 - ax) * ay * sl[(iy0 + 1) * nx + ix0];
        if (x1ok && y1ok) acc += ax * ay * sl[(iy0 + 1) * nx + ix0 + 1];
      }
      row[ic] = static_cast<T>(acc * rs.step);
    }
  });
  return sino;
}

// Exact matrix transpose of project on the given grid: same rays, same
// samples, same bilinear weights, transposed accumulation. Parallel over
// slices only; within a slice views accumulate in a fixed order.
template <class T>
Volume<T> backproject(const Sinogram<T>& sino, const ScanGeometry& geom,
                      const GridShape& grid) {
  sino.validate();
  geom.validate();
  if (!(sino.n_views == geom.n_views() && sino.n_channels == geom.n_channels &&
        sino.n_slices == geom.n_slices))
    throw DimensionError("backproject: sinogram dims do not match geometry");
  if (grid.nx < 1 || grid.ny < 1 || !(grid.spacing_xy > 0.0))
    throw DimensionError("backproject: bad grid shape");

  Volume<T> vol = Volume<T>::zeros(grid.nx, grid.ny, geom.n_slices,
                                   grid.spacing_xy, grid.spacing_z);
  const Index nx = grid.nx, ny = grid.ny;
  const Index n_views = geom.n_views();

  parallel_for(geom.n_slices, [&](Index is) {
    T* sl = vol.data.data() + is * nx * ny;
    for (Index iv = 0; iv < n_views; ++iv) {
      const double ca = std::cos(geom.angles[iv]);
      const double sa = std::sin(geom.angles[iv]);
      const T* row = sino.data.data() + (is * n_views + iv) * geom.n_channels;
      for (Index ic = 0; ic < geom.n_channels; ++ic) {
        const auto rs = detail::ray_sampling(nx, ny, grid.spacing_xy, ca, sa,
                                             detail::channel_s(geom, ic));
        const double val = static_cast<double>(row[ic]) * rs.step;
        if (val == 0.0) continue;  // weights unchanged, skip zero scatter
        double gx = rs.gx0, gy = rs.gy0;
        for (Index k = 0; k < rs.n; ++k, gx += rs.dgx, gy += rs.dgy) {
          const double fx = std::floor(gx), fy = std::floor(gy);
          const Index ix0 = static_cast<Index>(fx), iy0 = static_cast<Index>(fy);
          const double ax = gx - fx, ay = gy - fy;
          const bool x0ok = ix0 >= 0 && ix0 < nx, x1ok = ix0 + 1 >= 0 && ix0 + 1 < nx;
          const bool y0ok = iy0 >= 0 && iy0 < ny, y1ok = iy0 + 1 >= 0 && iy0 + 1 < ny;
          if (x0ok && y0ok) sl[iy0 * nx + ix0] += static_cast<T>((1.0 - ax) * (1.0 - ay) * val);
          if (x1ok && y0ok) sl[iy0 * nx + ix0 + 1] += static_cast<T>(ax * (1.0 - ay) * val);
          if (x0ok && y1ok) sl[(iy0 + 1) * nx + ix0] += static_cast<T>((1.0 - ax) * ay * val);
          if (x1ok && y1ok) sl[(iy0 + 1) * nx + ix0 + 1] += static_cast<T>(ax * ay * val);
        }
      }
    }
  });
  return vol;
}

template <class T>
Volume<T> backproject(const Sinogram<T>& sino, const ScanGeometry& geom) {
  return backproject(sino, geom, default_grid(geom));
}

}  // namespace msfct
