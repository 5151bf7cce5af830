#pragma once

#include <optional>

#include "msfct/cg.hpp"
#include "msfct/core.hpp"
#include "msfct/mrf.hpp"
#include "msfct/projector.hpp"
#include "msfct/volume.hpp"

namespace msfct {

// 0.5 * || y - A x ||^2_W + MRF cost.
template <class T>
double wls_mrf_cost(const Volume<T>& x, const Sinogram<T>& y, const WeightMap<T>& w,
                    const ScanGeometry& geom, const MrfSpec& spec) {
  Sinogram<T> ax = project(x, geom);
  ArrayX<T> r = y.data - ax.data;
  const double fidelity = 0.5 * (w.data * r * r).sum();
  return fidelity + mrf_cost_grad(x, spec).first;
}

struct MbirParams {
  MrfSpec mrf{};
  CgParams cg{};
};

// Weighted-least-squares + MRF reconstruction: minimizes
//   0.5 ||y - A x||^2_W + (beta/2) sum w_ij (x_i - x_j)^2
// by CG on the normal equations (A^T W A + beta L) x = A^T W y.
// Starts from x0 when given (useful for restarts), else from zero.
template <class T>
Volume<T> reconstruct_mbir(const Sinogram<T>& y, const WeightMap<T>& w,
                           const ScanGeometry& geom, const GridShape& grid,
                           const MbirParams& params,
                           const std::optional<Volume<T>>& x0 = std::nullopt) {
  y.validate(geom);
  w.validate(geom);
  params.mrf.validate();

  Volume<T> shape =
      Volume<T>::zeros(grid.nx, grid.ny, geom.n_slices, grid.spacing_xy, grid.spacing_z);
  if (x0) {
    if (!x0->same_shape(shape))
      throw DimensionError("reconstruct_mbir: x0 shape does not match grid");
    shape = *x0;
  }

  auto apply = [&](const ArrayX<T>& xflat) {
    Volume<T> xv = shape;
    xv.data = xflat;
    Sinogram<T> ax = project(xv, geom);
    ax.data *= w.data;
    Volume<T> back = backproject(ax, geom, grid);
    if (params.mrf.beta > 0.0) back.data += mrf_apply(xv, params.mrf).data;
    return ArrayX<T>(back.data);
  };

  Sinogram<T> wy = y;
  wy.data *= w.data;
  Volume<T> aty = backproject(wy, geom, grid);

  auto res = conjugate_gradient<T>(apply, ArrayX<T>(aty.data), ArrayX<T>(shape.data),
                                   params.cg);
  Volume<T> out = shape;
  out.data = res.x;
  return out;
}

}  // namespace msfct
