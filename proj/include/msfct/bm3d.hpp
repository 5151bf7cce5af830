#pragma once

#include <algorithm>
#include <array>
#include <vector>

#include "msfct/parallel.hpp"
#include "msfct/transforms.hpp"
#include "msfct/volume.hpp"

namespace msfct {

struct BlockMatchConfig {
  enum class Stage { HardOnly, HardWiener };

  Index patch_size{8};       // pixels (2D) or voxels (3D) per side
  Index search_radius{16};   // window half-width around the reference
  double match_threshold{0.0};  // mean squared distance per pixel; <= 0 selects a sigma-scaled default
  Index max_group_size{16};  // power of two
  Index step{4};             // reference-patch stride
  Stage stage{Stage::HardWiener};
  double hard_threshold_lambda{2.7};

  void validate() const {
    if (patch_size < 2) throw ConfigError("BlockMatchConfig: patch_size must be >= 2");
    if (search_radius < 1) throw ConfigError("BlockMatchConfig: search_radius must be >= 1");
    if (max_group_size < 1 || (max_group_size & (max_group_size - 1)) != 0)
      throw ConfigError("BlockMatchConfig: max_group_size must be a positive power of two");
    if (step < 1) throw ConfigError("BlockMatchConfig: step must be >= 1");
    if (!(hard_threshold_lambda >= 0.0))
      throw ConfigError("BlockMatchConfig: hard_threshold_lambda must be >= 0");
  }
};

inline BlockMatchConfig default_bm3d_2d() { return BlockMatchConfig{}; }

inline BlockMatchConfig default_bm4d_3d() {
  BlockMatchConfig c;
  c.patch_size = 4;
  c.search_radius = 8;
  c.stage = BlockMatchConfig::Stage::HardOnly;
  return c;
}

struct DenoiserSpec {
  enum class Domain { XY, YZ, XZ, Volume };
  Domain domain{Domain::XY};
  double sigma{0.05};
  BlockMatchConfig bm{};

  void validate() const {
    if (!(sigma > 0.0)) throw ConfigError("DenoiserSpec: sigma must be > 0");
    bm.validate();
  }
};

inline Plane domain_plane(DenoiserSpec::Domain d) {
  switch (d) {
    case DenoiserSpec::Domain::XY: return Plane::XY;
    case DenoiserSpec::Domain::YZ: return Plane::YZ;
    case DenoiserSpec::Domain::XZ: return Plane::XZ;
    default: throw ConfigError("domain_plane: volume domain has no plane");
  }
}

// Instrumentation for the search-complexity accounting. One record per
// reference patch; candidates counts every window position whose patch lies
// inside the image and was distance-tested.
struct BlockMatchStats {
  struct RefRecord {
    std::array<Index, 3> pos{{0, 0, 0}};  // (row, col) or (x, y, z)
    long long candidates{0};
  };
  std::vector<RefRecord> refs;
};

// Candidate-window cardinality model per reference: a window of side alpha
// holds 3*alpha^2 candidates across the three plane denoisers and alpha^3
// for a volumetric search.
enum class SearchMode { MSF, BM4D };

inline long long search_cost(long long alpha, SearchMode mode) {
  if (alpha < 1) throw ConfigError("search_cost: alpha must be >= 1");
  return mode == SearchMode::MSF ? 3 * alpha * alpha : alpha * alpha * alpha;
}

namespace detail {

inline Index next_pow2_group(Index n) {
  Index p = 1;
  while (p < n) p <<= 1;
  return p;
}

// Reference positions along one axis: stride `step` from 0, with the far edge
// forced so every pixel is covered by some reference patch.
inline std::vector<Index> reference_positions(Index size, Index patch, Index step) {
  std::vector<Index> pos;
  const Index last = size - patch;
  for (Index p = 0; p <= last; p += step) pos.push_back(p);
  if (pos.empty() || pos.back() != last) pos.push_back(last);
  return pos;
}

struct Candidate {
  double dist;
  long long scan;
};

// Select the <= max_group best candidates by (distance, scan order) and
// return their indices into the candidate array, in stacking order.
inline std::vector<Index> select_group(const std::vector<Candidate>& cands,
                                       Index max_group) {
  std::vector<Index> idx(cands.size());
  for (Index i = 0; i < static_cast<Index>(idx.size()); ++i) idx[i] = i;
  const Index k = std::min<Index>(max_group, static_cast<Index>(cands.size()));
  std::partial_sort(idx.begin(), idx.begin() + k, idx.end(), [&](Index a, Index b) {
    if (cands[a].dist != cands[b].dist) return cands[a].dist < cands[b].dist;
    return cands[a].scan < cands[b].scan;
  });
  idx.resize(k);
  return idx;
}

// Group coefficient stack: rows index the within-patch transform coefficient,
// columns the group members (padded to a power of two by replicating the last
// member). Row 0 / column 0 is the group DC.
template <class T>
void haar_rows(MatrixX<T>& stack, bool forward) {
  const Index g = stack.cols();
  if (g < 2) return;
  VectorX<T> row(g), tmp(g);
  for (Index r = 0; r < stack.rows(); ++r) {
    for (Index c = 0; c < g; ++c) row[c] = stack(r, c);
    if (forward)
      haar_forward(row.data(), g, tmp.data());
    else
      haar_inverse(row.data(), g, tmp.data());
    for (Index c = 0; c < g; ++c) stack(r, c) = row[c];
  }
}

// Zero every coefficient with magnitude <= thresh except the group DC.
// Returns the retained count (the DC always counts as retained).
template <class T>
Index hard_threshold(MatrixX<T>& stack, T thresh) {
  Index retained = 1;
  for (Index c = 0; c < stack.cols(); ++c)
    for (Index r = 0; r < stack.rows(); ++r) {
      if (r == 0 && c == 0) continue;
      if (std::abs(stack(r, c)) > thresh)
        ++retained;
      else
        stack(r, c) = T(0);
    }
  return retained;
}

// Empirical Wiener gains from the pilot stack, applied to the noisy stack.
// The group DC passes through with gain 1. Returns the sum of squared gains.
template <class T>
T wiener_shrink(MatrixX<T>& noisy, const MatrixX<T>& pilot, T sigma) {
  const T s2 = sigma * sigma;
  T gain_energy = T(0);
  for (Index c = 0; c < noisy.cols(); ++c)
    for (Index r = 0; r < noisy.rows(); ++r) {
      T w;
      if (r == 0 && c == 0) {
        w = T(1);
      } else {
        const T p2 = pilot(r, c) * pilot(r, c);
        w = p2 / (p2 + s2);
      }
      noisy(r, c) *= w;
      gain_energy += w * w;
    }
  return gain_energy;
}

// One filtered group: member positions, their filtered patch values and the
// aggregation weight. Values are stored relative to the noisy input (the
// member estimate is noisy + value), which keeps constant regions exactly
// constant through aggregation.
template <class T, int NDIM>
struct GroupEstimate {
  std::vector<std::array<Index, NDIM>> members;
  std::vector<ArrayX<T>> residuals;  // one patch_len array per member
  T weight{T(1)};
};

// ---- 2D engine -----------------------------------------------------------

template <class T>
struct PlaneImage {
  const MatrixX<T>* data;
  Index rows() const { return data->rows(); }
  Index cols() const { return data->cols(); }
};

template <class T>
double patch_distance_2d(const MatrixX<T>& img, Index r0, Index c0, Index r1,
                         Index c1, Index p) {
  double acc = 0.0;
  for (Index j = 0; j < p; ++j)
    for (Index i = 0; i < p; ++i) {
      const double d = static_cast<double>(img(r0 + i, c0 + j)) -
                       static_cast<double>(img(r1 + i, c1 + j));
      acc += d * d;
    }
  return acc / static_cast<double>(p * p);
}

template <class T>
void copy_patch_2d(const MatrixX<T>& img, Index r, Index c, Index p, T mu, T* out) {
  // column-major within the patch: out[i + j*p] = img(r+i, c+j) - mu
  for (Index j = 0; j < p; ++j)
    for (Index i = 0; i < p; ++i) out[i + j * p] = img(r + i, c + j) - mu;
}

template <class T>
GroupEstimate<T, 2> process_reference_2d(const MatrixX<T>& noisy,
                                         const MatrixX<T>* pilot, Index rr, Index rc,
                                         T sigma, const BlockMatchConfig& cfg,
                                         const MatrixX<T>& dct,
                                         long long* candidate_count) {
  const Index p = cfg.patch_size;
  const MatrixX<T>& match_src = pilot ? *pilot : noisy;
  double thr = cfg.match_threshold;
  if (!(thr > 0.0))
    thr = (pilot ? 3.0 : 8.0) * static_cast<double>(sigma) * static_cast<double>(sigma);

  const Index r_lo = std::max<Index>(0, rr - cfg.search_radius);
  const Index r_hi = std::min<Index>(noisy.rows() - p, rr + cfg.search_radius);
  const Index c_lo = std::max<Index>(0, rc - cfg.search_radius);
  const Index c_hi = std::min<Index>(noisy.cols() - p, rc + cfg.search_radius);

  std::vector<Candidate> cands;
  std::vector<std::array<Index, 2>> positions;
  long long scan = 0;
  for (Index r = r_lo; r <= r_hi; ++r)
    for (Index c = c_lo; c <= c_hi; ++c, ++scan) {
      const double d = patch_distance_2d(match_src, rr, rc, r, c, p);
      if (d <= thr) {
        cands.push_back(Candidate{d, scan});
        positions.push_back({r, c});
      }
    }
  if (candidate_count) *candidate_count = scan;

  const std::vector<Index> sel = select_group(cands, cfg.max_group_size);
  const Index k = static_cast<Index>(sel.size());
  const Index g = next_pow2_group(k);
  const Index plen = p * p;

  // Offset both stacks by the reference's noisy corner pixel; only the group
  // DC is affected and that coefficient is never thresholded.
  const T mu = noisy(rr, rc);

  MatrixX<T> stack(plen, g);
  MatrixX<T> pilot_stack;
  if (pilot) pilot_stack.resize(plen, g);
  ArrayX<T> buf(plen);
  Eigen::Map<MatrixX<T>> patch(buf.data(), p, p);
  MatrixX<T> tmp(p, p);
  for (Index m = 0; m < k; ++m) {
    const auto& pos = positions[sel[m]];
    copy_patch_2d(noisy, pos[0], pos[1], p, mu, buf.data());
    tmp.noalias() = dct * patch * dct.transpose();
    stack.col(m) = Eigen::Map<VectorX<T>>(tmp.data(), plen);
    if (pilot) {
      copy_patch_2d(*pilot, pos[0], pos[1], p, mu, buf.data());
      tmp.noalias() = dct * patch * dct.transpose();
      pilot_stack.col(m) = Eigen::Map<VectorX<T>>(tmp.data(), plen);
    }
  }
  for (Index m = k; m < g; ++m) {
    stack.col(m) = stack.col(k - 1);
    if (pilot) pilot_stack.col(m) = pilot_stack.col(k - 1);
  }

  haar_rows(stack, true);
  GroupEstimate<T, 2> est;
  if (pilot) {
    haar_rows(pilot_stack, true);
    const T gain_energy = wiener_shrink(stack, pilot_stack, sigma);
    est.weight = T(1) / (T(1) + gain_energy);
  } else {
    const Index retained =
        hard_threshold(stack, static_cast<T>(cfg.hard_threshold_lambda) * sigma);
    est.weight = T(1) / (T(1) + static_cast<T>(retained));
  }
  haar_rows(stack, false);

  est.members.reserve(k);
  est.residuals.reserve(k);
  for (Index m = 0; m < k; ++m) {
    const auto& pos = positions[sel[m]];
    Eigen::Map<MatrixX<T>> coef(stack.col(m).data(), p, p);
    tmp.noalias() = dct.transpose() * coef * dct;
    ArrayX<T> resid(plen);
    for (Index j = 0; j < p; ++j)
      for (Index i = 0; i < p; ++i)
        resid[i + j * p] = tmp(i, j) + mu - noisy(pos[0] + i, pos[1] + j);
    est.members.push_back(pos);
    est.residuals.push_back(std::move(resid));
  }
  return est;
}

template <class T>
void aggregate_2d(const GroupEstimate<T, 2>& est, Index p, MatrixX<T>& num,
                  MatrixX<T>& den) {
  for (size_t m = 0; m < est.members.size(); ++m) {
    const Index r = est.members[m][0], c = est.members[m][1];
    const ArrayX<T>& resid = est.residuals[m];
    for (Index j = 0; j < p; ++j)
      for (Index i = 0; i < p; ++i) {
        num(r + i, c + j) += est.weight * resid[i + j * p];
        den(r + i, c + j) += est.weight;
      }
  }
}

template <class T>
MatrixX<T> bm3d_pass_2d(const MatrixX<T>& noisy, const MatrixX<T>* pilot, T sigma,
                        const BlockMatchConfig& cfg, BlockMatchStats* stats) {
  const Index p = cfg.patch_size;
  const auto rows_pos = reference_positions(noisy.rows(), p, cfg.step);
  const auto cols_pos = reference_positions(noisy.cols(), p, cfg.step);
  const MatrixX<T> dct = dct_matrix<T>(p);

  MatrixX<T> num = MatrixX<T>::Zero(noisy.rows(), noisy.cols());
  MatrixX<T> den = MatrixX<T>::Zero(noisy.rows(), noisy.cols());
  for (Index rp : rows_pos)
    for (Index cp : cols_pos) {
      long long cand = 0;
      auto est = process_reference_2d(noisy, pilot, rp, cp, sigma, cfg, dct, &cand);
      if (stats) stats->refs.push_back({{rp, cp, 0}, cand});
      aggregate_2d(est, p, num, den);
    }

  MatrixX<T> out(noisy.rows(), noisy.cols());
  for (Index c = 0; c < noisy.cols(); ++c)
    for (Index r = 0; r < noisy.rows(); ++r)
      out(r, c) = den(r, c) > T(0) ? noisy(r, c) + num(r, c) / den(r, c) : noisy(r, c);
  return out;
}

// ---- 3D engine -----------------------------------------------------------

template <class T>
double patch_distance_3d(const Volume<T>& v, const std::array<Index, 3>& a,
                         const std::array<Index, 3>& b, Index p) {
  double acc = 0.0;
  for (Index k = 0; k < p; ++k)
    for (Index j = 0; j < p; ++j)
      for (Index i = 0; i < p; ++i) {
        const double d = static_cast<double>(v.at(a[0] + i, a[1] + j, a[2] + k)) -
                         static_cast<double>(v.at(b[0] + i, b[1] + j, b[2] + k));
        acc += d * d;
      }
  return acc / static_cast<double>(p * p * p);
}

template <class T>
void copy_patch_3d(const Volume<T>& v, const std::array<Index, 3>& pos, Index p,
                   T mu, T* out) {
  Index n = 0;
  for (Index k = 0; k < p; ++k)
    for (Index j = 0; j < p; ++j)
      for (Index i = 0; i < p; ++i, ++n)
        out[n] = v.at(pos[0] + i, pos[1] + j, pos[2] + k) - mu;
}

// Separable in-place DCT along each axis of a p*p*p flat cube (x fastest).
template <class T>
void dct_cube(T* cube, Index p, const MatrixX<T>& dct, bool forward) {
  VectorX<T> line(p), res(p);
  const Index strides[3] = {1, p, p * p};
  for (int axis = 0; axis < 3; ++axis) {
    const Index s = strides[axis];
    const Index sa = strides[(axis + 1) % 3], sb = strides[(axis + 2) % 3];
    for (Index b = 0; b < p; ++b)
      for (Index a = 0; a < p; ++a) {
        T* base = cube + a * sa + b * sb;
        for (Index i = 0; i < p; ++i) line[i] = base[i * s];
        if (forward)
          res.noalias() = dct * line;
        else
          res.noalias() = dct.transpose() * line;
        for (Index i = 0; i < p; ++i) base[i * s] = res[i];
      }
  }
}

template <class T>
GroupEstimate<T, 3> process_reference_3d(const Volume<T>& noisy,
                                         const Volume<T>* pilot,
                                         const std::array<Index, 3>& ref, T sigma,
                                         const BlockMatchConfig& cfg,
                                         const MatrixX<T>& dct,
                                         long long* candidate_count) {
  const Index p = cfg.patch_size;
  const Volume<T>& match_src = pilot ? *pilot : noisy;
  double thr = cfg.match_threshold;
  if (!(thr > 0.0))
    thr = (pilot ? 3.0 : 8.0) * static_cast<double>(sigma) * static_cast<double>(sigma);

  Index lo[3], hi[3];
  const Index dims[3] = {noisy.nx, noisy.ny, noisy.nz};
  for (int a = 0; a < 3; ++a) {
    lo[a] = std::max<Index>(0, ref[a] - cfg.search_radius);
    hi[a] = std::min<Index>(dims[a] - p, ref[a] + cfg.search_radius);
  }

  std::vector<Candidate> cands;
  std::vector<std::array<Index, 3>> positions;
  long long scan = 0;
  for (Index z = lo[2]; z <= hi[2]; ++z)
    for (Index y = lo[1]; y <= hi[1]; ++y)
      for (Index x = lo[0]; x <= hi[0]; ++x, ++scan) {
        const std::array<Index, 3> pos{{x, y, z}};
        const double d = patch_distance_3d(match_src, ref, pos, p);
        if (d <= thr) {
          cands.push_back(Candidate{d, scan});
          positions.push_back(pos);
        }
      }
  if (candidate_count) *candidate_count = scan;

  const std::vector<Index> sel = select_group(cands, cfg.max_group_size);
  const Index k = static_cast<Index>(sel.size());
  const Index g = next_pow2_group(k);
  const Index plen = p * p * p;
  const T mu = noisy.at(ref[0], ref[1], ref[2]);

  MatrixX<T> stack(plen, g);
  MatrixX<T> pilot_stack;
  if (pilot) pilot_stack.resize(plen, g);
  ArrayX<T> buf(plen);
  for (Index m = 0; m < k; ++m) {
    copy_patch_3d(noisy, positions[sel[m]], p, mu, buf.data());
    dct_cube(buf.data(), p, dct, true);
    stack.col(m) = buf.matrix();
    if (pilot) {
      copy_patch_3d(*pilot, positions[sel[m]], p, mu, buf.data());
      dct_cube(buf.data(), p, dct, true);
      pilot_stack.col(m) = buf.matrix();
    }
  }
  for (Index m = k; m < g; ++m) {
    stack.col(m) = stack.col(k - 1);
    if (pilot) pilot_stack.col(m) = pilot_stack.col(k - 1);
  }

  haar_rows(stack, true);
  GroupEstimate<T, 3> est;
  if (pilot) {
    haar_rows(pilot_stack, true);
    const T gain_energy = wiener_shrink(stack, pilot_stack, sigma);
    est.weight = T(1) / (T(1) + gain_energy);
  } else {
    const Index retained =
        hard_threshold(stack, static_cast<T>(cfg.hard_threshold_lambda) * sigma);
    est.weight = T(1) / (T(1) + static_cast<T>(retained));
  }
  haar_rows(stack, false);

  est.members.reserve(k);
  est.residuals.reserve(k);
  for (Index m = 0; m < k; ++m) {
    buf = stack.col(m).array();
    dct_cube(buf.data(), p, dct, false);
    const auto& pos = positions[sel[m]];
    ArrayX<T> resid(plen);
    Index n = 0;
    for (Index zc = 0; zc < p; ++zc)
      for (Index yc = 0; yc < p; ++yc)
        for (Index xc = 0; xc < p; ++xc, ++n)
          resid[n] = buf[n] + mu - noisy.at(pos[0] + xc, pos[1] + yc, pos[2] + zc);
    est.members.push_back(pos);
    est.residuals.push_back(std::move(resid));
  }
  return est;
}

template <class T>
Volume<T> bm4d_pass_3d(const Volume<T>& noisy, const Volume<T>* pilot, T sigma,
                       const BlockMatchConfig& cfg, BlockMatchStats* stats) {
  const Index p = cfg.patch_size;
  const auto xs = reference_positions(noisy.nx, p, cfg.step);
  const auto ys = reference_positions(noisy.ny, p, cfg.step);
  const auto zs = reference_positions(noisy.nz, p, cfg.step);
  const MatrixX<T> dct = dct_matrix<T>(p);

  std::vector<std::array<Index, 3>> refs;
  refs.reserve(xs.size() * ys.size() * zs.size());
  for (Index z : zs)
    for (Index y : ys)
      for (Index x : xs) refs.push_back({{x, y, z}});

  // Groups are computed in parallel (pure per reference), aggregation runs
  // serially in reference order so results are thread-count independent.
  std::vector<GroupEstimate<T, 3>> groups(refs.size());
  std::vector<long long> cand_counts(refs.size(), 0);
  parallel_for(static_cast<Index>(refs.size()), [&](Index i) {
    groups[i] = process_reference_3d(noisy, pilot, refs[i], sigma, cfg, dct,
                                     &cand_counts[i]);
  });

  Volume<T> num = Volume<T>::zeros(noisy.nx, noisy.ny, noisy.nz, noisy.spacing_xy,
                                   noisy.spacing_z);
  Volume<T> den = num;
  for (size_t i = 0; i < refs.size(); ++i) {
    if (stats) stats->refs.push_back({refs[i], cand_counts[i]});
    const auto& est = groups[i];
    for (size_t m = 0; m < est.members.size(); ++m) {
      const auto& pos = est.members[m];
      const ArrayX<T>& resid = est.residuals[m];
      Index n = 0;
      for (Index zc = 0; zc < p; ++zc)
        for (Index yc = 0; yc < p; ++yc)
          for (Index xc = 0; xc < p; ++xc, ++n) {
            num.at(pos[0] + xc, pos[1] + yc, pos[2] + zc) += est.weight * resid[n];
            den.at(pos[0] + xc, pos[1] + yc, pos[2] + zc) += est.weight;
          }
    }
  }

  Volume<T> out = noisy;
  for (Index i = 0; i < out.data.size(); ++i)
    if (den.data[i] > T(0)) out.data[i] += num.data[i] / den.data[i];
  return out;
}

}  // namespace detail

// Grouped-transform collaborative filtering of a 2D image: hard-threshold
// pass, optionally followed by an empirical-Wiener pass piloted by the first
// pass. Constant inputs pass through bit-exactly.
template <class T>
MatrixX<T> bm3d_denoise_2d(const MatrixX<T>& img, T sigma, const BlockMatchConfig& cfg,
                           BlockMatchStats* stats = nullptr) {
  cfg.validate();
  if (!(sigma > T(0))) throw ConfigError("bm3d_denoise_2d: sigma must be > 0");
  if (img.rows() < cfg.patch_size || img.cols() < cfg.patch_size)
    throw DimensionError("bm3d_denoise_2d: image smaller than one patch");

  MatrixX<T> est = detail::bm3d_pass_2d<T>(img, nullptr, sigma, cfg, stats);
  if (cfg.stage == BlockMatchConfig::Stage::HardWiener)
    est = detail::bm3d_pass_2d<T>(img, &est, sigma, cfg, nullptr);
  return est;
}

// Applies the 2D denoiser independently to every slice perpendicular to the
// plane's normal axis and restacks. Slices run in parallel.
template <class T>
Volume<T> apply_plane_denoiser(const Volume<T>& vol, const DenoiserSpec& spec) {
  spec.validate();
  vol.validate();
  if (spec.domain == DenoiserSpec::Domain::Volume)
    throw ConfigError("apply_plane_denoiser: spec must name a plane, not a volume");
  const Plane plane = domain_plane(spec.domain);
  const Index n = plane_slice_count(vol, plane);
  {
    const MatrixX<T> probe = extract_slice(vol, plane, 0);
    if (probe.rows() < spec.bm.patch_size || probe.cols() < spec.bm.patch_size)
      throw DimensionError("apply_plane_denoiser: slice smaller than one patch");
  }
  Volume<T> out = vol;
  parallel_for(n, [&](Index k) {
    MatrixX<T> slice = extract_slice(vol, plane, k);
    slice = bm3d_denoise_2d(slice, static_cast<T>(spec.sigma), spec.bm);
    insert_slice(out, plane, k, slice);
  });
  return out;
}

// Volumetric analogue with cubic patches and a 3D search window.
template <class T>
Volume<T> bm4d_denoise_3d(const Volume<T>& vol, T sigma, const BlockMatchConfig& cfg,
                          BlockMatchStats* stats = nullptr) {
  cfg.validate();
  vol.validate();
  if (!(sigma > T(0))) throw ConfigError("bm4d_denoise_3d: sigma must be > 0");
  if (vol.nx < cfg.patch_size || vol.ny < cfg.patch_size || vol.nz < cfg.patch_size)
    throw DimensionError("bm4d_denoise_3d: volume smaller than one cubic patch");

  Volume<T> est = detail::bm4d_pass_3d<T>(vol, nullptr, sigma, cfg, stats);
  if (cfg.stage == BlockMatchConfig::Stage::HardWiener)
    est = detail::bm4d_pass_3d<T>(vol, &est, sigma, cfg, nullptr);
  return est;
}

}  // namespace msfct
