#pragma once

#include <cmath>

#include "msfct/core.hpp"

namespace msfct {

struct CgParams {
  double tol{1e-6};  // relative residual
  Index max_iter{200};
};

template <class T>
struct CgResult {
  ArrayX<T> x;
  Index iterations{0};
  double rel_residual{0.0};
  bool converged{false};
};

// Conjugate gradients on a symmetric positive (semi)definite apply(x).
// Throws NumericalError if an iterate goes non-finite.
template <class T, class Apply>
CgResult<T> conjugate_gradient(Apply&& apply, const ArrayX<T>& b, const ArrayX<T>& x0,
                               const CgParams& params) {
  CgResult<T> res;
  res.x = x0;
  const double b_norm = std::sqrt(static_cast<double>(b.matrix().squaredNorm()));
  const double denom = b_norm > 0.0 ? b_norm : 1.0;

  ArrayX<T> r = b - apply(res.x);
  ArrayX<T> p = r;
  double rs = r.matrix().squaredNorm();
  res.rel_residual = std::sqrt(rs) / denom;
  if (res.rel_residual <= params.tol) {
    res.converged = true;
    return res;
  }
  for (Index it = 0; it < params.max_iter; ++it) {
    ArrayX<T> ap = apply(p);
    const double p_ap = p.matrix().dot(ap.matrix());
    if (!std::isfinite(p_ap))
      throw NumericalError("conjugate_gradient: non-finite iterate");
    if (p_ap <= 0.0) break;  // semidefinite null direction; stop at best iterate
    const double alpha = rs / p_ap;
    res.x += static_cast<T>(alpha) * p;
    r -= static_cast<T>(alpha) * ap;
    const double rs_new = r.matrix().squaredNorm();
    if (!std::isfinite(rs_new))
      throw NumericalError("conjugate_gradient: non-finite iterate");
    res.iterations = it + 1;
    res.rel_residual = std::sqrt(rs_new) / denom;
    if (res.rel_residual <= params.tol) {
      res.converged = true;
      return res;
    }
    p = r + static_cast<T>(rs_new / rs) * p;
    rs = rs_new;
  }
  return res;
}

}  // namespace msfct
