#pragma once

#include <cmath>
#include <functional>
#include <memory>
#include <string>
#include <utility>
#include <vector>

#include "msfct/bm3d.hpp"
#include "msfct/cg.hpp"
#include "msfct/core.hpp"
#include "msfct/projector.hpp"
#include "msfct/volume.hpp"

namespace msfct {

// One consensus agent: a map v -> z applied once per outer iteration.
struct Agent {
  enum class Kind { DataFidelity, PlaneDenoiser, CubeDenoiser, Custom };
  Kind kind{Kind::Custom};
  std::string label;
  std::function<VolumeD(const VolumeD&)> apply;
};

// Proximal map of the weighted-least-squares data term:
//   argmin_z 0.5 ||y - A z||^2_W + (rho/2) ||z - v||^2
// solved by CG on (A^T W A + rho I) z = A^T W y + rho v.
// Starts CG from warm_start when given, else from v.
inline VolumeD data_fidelity_prox(const VolumeD& v, const SinogramD& y,
                                  const WeightMapD& w, const ScanGeometry& geom,
                                  double rho, const CgParams& cg,
                                  const VolumeD* warm_start = nullptr) {
  if (!(rho > 0.0)) throw ConfigError("data_fidelity_prox: rho must be > 0");
  y.validate(geom);
  w.validate(geom);
  const GridShape grid{v.nx, v.ny, v.spacing_xy, v.spacing_z};

  VolumeD shape = v;
  auto apply = [&](const ArrayXd& xflat) {
    VolumeD xv = shape;
    xv.data = xflat;
    SinogramD ax = project(xv, geom);
    ax.data *= w.data;
    VolumeD back = backproject(ax, geom, grid);
    return ArrayXd(back.data + rho * xflat);
  };

  SinogramD wy = y;
  wy.data *= w.data;
  VolumeD aty = backproject(wy, geom, grid);
  ArrayXd b = aty.data + rho * v.data;

  const ArrayXd& x_init = warm_start ? warm_start->data : v.data;
  auto res = conjugate_gradient<double>(apply, b, x_init, cg);
  VolumeD out = v;
  out.data = res.x;
  return out;
}

// Data-fidelity agent with a warm start carried across outer iterations.
inline Agent make_data_fidelity_agent(SinogramD y, WeightMapD w, ScanGeometry geom,
                                      double rho, CgParams cg) {
  struct State {
    SinogramD y;
    WeightMapD w;
    ScanGeometry geom;
    double rho;
    CgParams cg;
    VolumeD warm;
    bool has_warm{false};
  };
  auto st = std::make_shared<State>();
  st->y = std::move(y);
  st->w = std::move(w);
  st->geom = std::move(geom);
  st->rho = rho;
  st->cg = cg;
  Agent a;
  a.kind = Agent::Kind::DataFidelity;
  a.label = "data-fidelity";
  a.apply = [st](const VolumeD& v) {
    VolumeD z = data_fidelity_prox(v, st->y, st->w, st->geom, st->rho, st->cg,
                                   st->has_warm ? &st->warm : nullptr);
    st->warm = z;
    st->has_warm = true;
    return z;
  };
  return a;
}

inline Agent make_plane_denoiser_agent(DenoiserSpec spec) {
  if (spec.domain == DenoiserSpec::Domain::Volume)
    throw ConfigError("make_plane_denoiser_agent: expected a plane domain");
  Agent a;
  a.kind = Agent::Kind::PlaneDenoiser;
  a.label = std::string("bm3d-") + plane_name(domain_plane(spec.domain));
  a.apply = [spec](const VolumeD& v) { return apply_plane_denoiser(v, spec); };
  return a;
}

inline Agent make_cube_denoiser_agent(DenoiserSpec spec) {
  Agent a;
  a.kind = Agent::Kind::CubeDenoiser;
  a.label = "bm4d";
  a.apply = [spec](const VolumeD& v) {
    return bm4d_denoise_3d(v, spec.sigma, spec.bm, nullptr);
  };
  return a;
}

struct ConsensusState {
  VolumeD x;
  std::vector<VolumeD> z;
  std::vector<VolumeD> u;
  double rho{50.0};
  Index iteration{0};

  void validate() const {
    if (z.size() != u.size() || z.empty())
      throw DimensionError("ConsensusState: z/u agent counts disagree or are empty");
    for (const auto& zi : z)
      if (!zi.same_shape(x)) throw DimensionError("ConsensusState: z shape mismatch");
    for (const auto& ui : u)
      if (!ui.same_shape(x)) throw DimensionError("ConsensusState: u shape mismatch");
    if (!(rho > 0.0)) throw ConfigError("ConsensusState: rho must be > 0");
  }
};

inline ConsensusState make_consensus_state(const VolumeD& x0, Index n_agents, double rho) {
  ConsensusState s;
  s.x = x0;
  s.z.assign(static_cast<size_t>(n_agents), x0);
  VolumeD zero = VolumeD::zeros(x0.nx, x0.ny, x0.nz, x0.spacing_xy, x0.spacing_z);
  s.u.assign(static_cast<size_t>(n_agents), zero);
  s.rho = rho;
  s.validate();
  return s;
}

struct Residuals {
  double primal{0.0};
  double dual{0.0};
};

// primal = sqrt(sum_l rho ||x - z_l||^2)
// dual   = || sum_l rho (z_l - z_prev_l) ||_2
inline Residuals consensus_residuals(const ConsensusState& s,
                                     const std::vector<VolumeD>& z_prev) {
  if (z_prev.size() != s.z.size())
    throw DimensionError("consensus_residuals: z_prev agent count mismatch");
  Residuals r;
  double p2 = 0.0;
  ArrayXd dz = ArrayXd::Zero(s.x.data.size());
  for (size_t l = 0; l < s.z.size(); ++l) {
    p2 += s.rho * (s.x.data - s.z[l].data).matrix().squaredNorm();
    dz += s.z[l].data - z_prev[l].data;
  }
  r.primal = std::sqrt(p2);
  r.dual = s.rho * std::sqrt(dz.matrix().squaredNorm());
  return r;
}

// One consensus iteration.  All agents see the same pre-update snapshot:
//   x      <- (1/L) sum_l (z_l - u_l)
//   z_l    <- agent_l(x + u_l)
//   u_l    <- u_l + x - z_l
// Agent failures propagate with the agent label attached.
inline void consensus_step(ConsensusState& s, const std::vector<Agent>& agents) {
  s.validate();
  if (agents.size() != s.z.size())
    throw DimensionError("consensus_step: agent count does not match state");
  const auto L = s.z.size();

  ArrayXd acc = ArrayXd::Zero(s.x.data.size());
  for (size_t l = 0; l < L; ++l) acc += s.z[l].data - s.u[l].data;
  s.x.data = acc / static_cast<double>(L);

  for (size_t l = 0; l < L; ++l) {
    VolumeD v = s.x;
    v.data += s.u[l].data;
    try {
      s.z[l] = agents[l].apply(v);
    } catch (const Error& e) {
      throw NumericalError("agent '" + agents[l].label + "' failed: " + e.what());
    }
    if (!s.z[l].same_shape(s.x))
      throw DimensionError("agent '" + agents[l].label + "' changed the volume shape");
  }
  for (size_t l = 0; l < L; ++l) s.u[l].data += s.x.data - s.z[l].data;
  s.iteration += 1;
}

struct ResidualTrace {
  std::vector<double> primal;
  std::vector<double> dual;
  size_t size() const { return primal.size(); }
};

struct PnpConfig {
  double rho{50.0};
  double stop_frac{0.05};  // stop when residuals fall to this fraction of iter 1
  enum class StopRule { Both, Either } stop_rule{StopRule::Both};
  Index max_iter{200};

  void validate() const {
    if (!(rho > 0.0)) throw ConfigError("PnpConfig: rho must be > 0");
    if (!(stop_frac > 0.0) || stop_frac > 1.0)
      throw ConfigError("PnpConfig: stop_frac must be in (0, 1]");
    if (max_iter < 1) throw ConfigError("PnpConfig: max_iter must be >= 1");
  }
};

enum class SolveStatus { Converged, MaxIterations };

struct PnpResult {
  VolumeD x;
  ResidualTrace trace;
  SolveStatus status{SolveStatus::Converged};
  Index iterations{0};
};

// Plug-and-play consensus ADMM.  z_l start at x0 and u_l at zero; iterates
// until both (or either, per stop_rule) residuals drop below stop_frac times
// their first-iteration values.  Hitting max_iter is reported via status, not
// an error.
inline PnpResult run_pnp(const std::vector<Agent>& agents, const VolumeD& x0,
                         const PnpConfig& cfg) {
  cfg.validate();
  if (agents.empty()) throw ConfigError("run_pnp: needs at least one agent");
  ConsensusState s = make_consensus_state(x0, static_cast<Index>(agents.size()), cfg.rho);

  PnpResult out;
  double p1 = 0.0, d1 = 0.0;
  std::vector<VolumeD> z_prev;
  for (Index k = 1; k <= cfg.max_iter; ++k) {
    z_prev = s.z;
    consensus_step(s, agents);
    Residuals r = consensus_residuals(s, z_prev);
    out.trace.primal.push_back(r.primal);
    out.trace.dual.push_back(r.dual);
    if (k == 1) {
      p1 = r.primal;
      d1 = r.dual;
    }
    const bool p_ok = r.primal <= cfg.stop_frac * p1;
    const bool d_ok = r.dual <= cfg.stop_frac * d1;
    const bool stop =
        cfg.stop_rule == PnpConfig::StopRule::Both ? (p_ok && d_ok) : (p_ok || d_ok);
    if (stop) {
      out.x = s.x;
      out.iterations = k;
      out.status = SolveStatus::Converged;
      return out;
    }
  }
  out.x = s.x;
  out.iterations = cfg.max_iter;
  out.status = SolveStatus::MaxIterations;
  return out;
}

struct SigmaTriple {
  double xy{0.0};
  double yz{0.0};
  double xz{0.0};
};

// Agents for the multi-slice-fusion prior: the data term plus one 2-D
// denoiser per orthogonal plane family.
inline std::vector<Agent> build_msf_agents(const SinogramD& y, const WeightMapD& w,
                                           const ScanGeometry& geom,
                                           const SigmaTriple& sigmas,
                                           const BlockMatchConfig& bm, double rho,
                                           const CgParams& cg) {
  if (!(sigmas.xy > 0.0) || !(sigmas.yz > 0.0) || !(sigmas.xz > 0.0))
    throw ConfigError("build_msf_agents: denoiser sigmas must be > 0");
  std::vector<Agent> agents;
  agents.push_back(make_data_fidelity_agent(y, w, geom, rho, cg));
  agents.push_back(
      make_plane_denoiser_agent({DenoiserSpec::Domain::XY, sigmas.xy, bm}));
  agents.push_back(
      make_plane_denoiser_agent({DenoiserSpec::Domain::YZ, sigmas.yz, bm}));
  agents.push_back(
      make_plane_denoiser_agent({DenoiserSpec::Domain::XZ, sigmas.xz, bm}));
  return agents;
}

// Agents for the single volumetric prior baseline.
inline std::vector<Agent> build_bm4d_agents(const SinogramD& y, const WeightMapD& w,
                                            const ScanGeometry& geom, double sigma,
                                            const BlockMatchConfig& bm, double rho,
                                            const CgParams& cg) {
  if (!(sigma > 0.0)) throw ConfigError("build_bm4d_agents: sigma must be > 0");
  std::vector<Agent> agents;
  agents.push_back(make_data_fidelity_agent(y, w, geom, rho, cg));
  agents.push_back(make_cube_denoiser_agent({DenoiserSpec::Domain::Volume, sigma, bm}));
  return agents;
}

}  // namespace msfct
