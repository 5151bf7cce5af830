#pragma once

#include <array>
#include <cmath>
#include <utility>
#include <vector>

#include "msfct/cg.hpp"
#include "msfct/core.hpp"
#include "msfct/volume.hpp"

namespace msfct {

// Quadratic Markov random field regularizer over a 6- or 26-voxel
// neighborhood.  Per-class weights default to inverse Euclidean distance and
// are normalized so that the weights around one interior voxel sum to 1.
struct MrfSpec {
  double beta{1.0};
  int neighborhood{26};          // 6 or 26
  double face_weight{1.0};       // axis neighbors, distance 1
  double edge_weight{1.0 / std::sqrt(2.0)};
  double corner_weight{1.0 / std::sqrt(3.0)};

  void validate() const {
    if (beta < 0.0) throw ConfigError("MrfSpec: beta must be >= 0");
    if (neighborhood != 6 && neighborhood != 26)
      throw ConfigError("MrfSpec: neighborhood must be 6 or 26");
    if (!(face_weight > 0.0) || !(edge_weight > 0.0) || !(corner_weight > 0.0))
      throw ConfigError("MrfSpec: class weights must be > 0");
  }

  // Sum of raw class weights over a full interior neighborhood.
  double interior_weight_sum() const {
    if (neighborhood == 6) return 6.0 * face_weight;
    return 6.0 * face_weight + 12.0 * edge_weight + 8.0 * corner_weight;
  }
};

namespace detail {

struct MrfOffset {
  int dx, dy, dz;
  double w;  // normalized pair weight
};

// Half-space offset list: each neighbor pair appears exactly once.
inline std::vector<MrfOffset> mrf_half_offsets(const MrfSpec& spec) {
  spec.validate();
  const double s = spec.interior_weight_sum();
  std::vector<MrfOffset> offs;
  for (int dz = -1; dz <= 1; ++dz)
    for (int dy = -1; dy <= 1; ++dy)
      for (int dx = -1; dx <= 1; ++dx) {
        if (dx == 0 && dy == 0 && dz == 0) continue;
        // keep lexicographically positive direction (dz, then dy, then dx)
        if (dz < 0 || (dz == 0 && dy < 0) || (dz == 0 && dy == 0 && dx < 0)) continue;
        const int manhattan = std::abs(dx) + std::abs(dy) + std::abs(dz);
        if (spec.neighborhood == 6 && manhattan != 1) continue;
        double w = spec.face_weight;
        if (manhattan == 2) w = spec.edge_weight;
        if (manhattan == 3) w = spec.corner_weight;
        offs.push_back({dx, dy, dz, w / s});
      }
  return offs;
}

}  // namespace detail

// cost = beta * sum over neighbor pairs of w_ij (x_i - x_j)^2 / 2
// grad_i = beta * sum over neighbors j of w_ij (x_i - x_j)
template <class T>
std::pair<double, Volume<T>> mrf_cost_grad(const Volume<T>& vol, const MrfSpec& spec) {
  const auto offs = detail::mrf_half_offsets(spec);
  Volume<T> grad = Volume<T>::zeros(vol.nx, vol.ny, vol.nz, vol.spacing_xy, vol.spacing_z);
  double cost = 0.0;
  for (Index iz = 0; iz < vol.nz; ++iz)
    for (Index iy = 0; iy < vol.ny; ++iy)
      for (Index ix = 0; ix < vol.nx; ++ix) {
        const T xi = vol.at(ix, iy, iz);
        for (const auto& o : offs) {
          const Index jx = ix + o.dx, jy = iy + o.dy, jz = iz + o.dz;
          if (jx < 0 || jx >= vol.nx || jy < 0 || jy >= vol.ny || jz < 0 || jz >= vol.nz)
            continue;
          const T diff = xi - vol.at(jx, jy, jz);
          cost += o.w * static_cast<double>(diff) * static_cast<double>(diff) * 0.5;
          grad.at(ix, iy, iz) += static_cast<T>(spec.beta * o.w) * diff;
          grad.at(jx, jy, jz) -= static_cast<T>(spec.beta * o.w) * diff;
        }
      }
  return {spec.beta * cost, std::move(grad)};
}

// Applies beta * L where L is the graph Laplacian of the weighted neighbor
// graph; this equals the gradient of the (quadratic) MRF cost.
template <class T>
Volume<T> mrf_apply(const Volume<T>& vol, const MrfSpec& spec) {
  return mrf_cost_grad(vol, spec).second;
}

// Proximal map of the MRF cost: solves (beta L + rho I) z = rho v by CG,
// warm-started at v.  With beta = 0 this returns v unchanged.
template <class T>
Volume<T> mrf_prox(const Volume<T>& v, const MrfSpec& spec, double rho,
                   const CgParams& cg = {}) {
  spec.validate();
  if (!(rho > 0.0)) throw ConfigError("mrf_prox: rho must be > 0");
  Volume<T> shape = v;  // carries dims/spacings for the apply wrapper
  auto apply = [&](const ArrayX<T>& x) {
    shape.data = x;
    Volume<T> lx = mrf_apply(shape, spec);
    return ArrayX<T>(lx.data + static_cast<T>(rho) * x);
  };
  ArrayX<T> b = static_cast<T>(rho) * v.data;
  auto res = conjugate_gradient<T>(apply, b, v.data, cg);
  Volume<T> out = v;
  out.data = res.x;
  return out;
}

}  // namespace msfct
