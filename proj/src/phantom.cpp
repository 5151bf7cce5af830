#include "msfct/phantom.hpp"

#include <cmath>
#include <random>

namespace msfct {

PhantomKind phantom_kind_from_string(const std::string& s) {
  if (s == "shepp3d") return PhantomKind::Shepp3d;
  if (s == "ellipsoids") return PhantomKind::Ellipsoids;
  if (s == "constant") return PhantomKind::Constant;
  throw ConfigError("phantom.kind: unknown kind '" + s + "'");
}

const char* phantom_kind_name(PhantomKind k) {
  switch (k) {
    case PhantomKind::Shepp3d: return "shepp3d";
    case PhantomKind::Ellipsoids: return "ellipsoids";
    default: return "constant";
  }
}

void PhantomSpec::validate() const {
  if (nx < 1 || ny < 1 || nz < 1)
    throw ConfigError("phantom: dims must be >= 1");
  if (!(spacing_xy > 0.0) || !(spacing_z > 0.0))
    throw ConfigError("phantom: spacings must be > 0");
  if (kind == PhantomKind::Constant && !(value >= 0.0 && value <= 1.0))
    throw ConfigError("phantom.value: constant density must lie in [0, 1]");
}

namespace {

struct Ellipsoid {
  double amp;            // additive density
  double a, b, c;        // semi-axes in normalized [-1, 1] coordinates
  double x0, y0, z0;     // center
  double phi_deg;        // rotation about z, degrees CCW
};

// Ten-ellipsoid head phantom (modified contrast values), left-right
// symmetrized: asymmetric pairs of the classic table are replaced by exact
// mirror twins so the continuum phantom is invariant under x -> -x.
constexpr Ellipsoid kShepp3d[] = {
    {1.0, 0.6900, 0.920, 0.810, 0.00, 0.0000, 0.00, 0.0},
    {-0.8, 0.6624, 0.874, 0.780, 0.00, -0.0184, 0.00, 0.0},
    {-0.2, 0.1350, 0.360, 0.250, 0.22, 0.0000, 0.00, -18.0},
    {-0.2, 0.1350, 0.360, 0.250, -0.22, 0.0000, 0.00, 18.0},
    {0.1, 0.2100, 0.250, 0.410, 0.00, 0.3500, -0.15, 0.0},
    {0.1, 0.0460, 0.046, 0.050, 0.00, 0.1000, 0.25, 0.0},
    {0.1, 0.0460, 0.046, 0.050, 0.00, -0.1000, 0.25, 0.0},
    {0.1, 0.0460, 0.023, 0.050, -0.08, -0.6050, 0.00, 0.0},
    {0.1, 0.0230, 0.023, 0.020, 0.00, -0.6060, 0.00, 0.0},
    {0.1, 0.0460, 0.023, 0.050, 0.08, -0.6050, 0.00, 0.0},
};

inline double ellipsoid_radius2(const Ellipsoid& e, double x, double y, double z) {
  const double phi = e.phi_deg * kPi / 180.0;
  const double cp = std::cos(phi), sp = std::sin(phi);
  const double dx = x - e.x0, dy = y - e.y0, dz = z - e.z0;
  const double xr = cp * dx + sp * dy;    // rotate into the ellipsoid frame
  const double yr = -sp * dx + cp * dy;
  const double qa = xr / e.a, qb = yr / e.b, qc = dz / e.c;
  return qa * qa + qb * qb + qc * qc;
}

double shepp_value(double x, double y, double z) {
  double v = 0.0;
  for (const auto& e : kShepp3d)
    if (ellipsoid_radius2(e, x, y, z) <= 1.0) v += e.amp;
  return v;
}

// Cosine-tapered profile: 1 inside q0, 0 beyond 1, smooth ramp between.
inline double taper(double q, double q0) {
  if (q <= q0) return 1.0;
  if (q >= 1.0) return 0.0;
  return 0.5 * (1.0 + std::cos(kPi * (q - q0) / (1.0 - q0)));
}

inline double uniform01(std::mt19937_64& g) {
  return static_cast<double>(g() >> 11) * 0x1.0p-53;
}

inline double uniform(std::mt19937_64& g, double lo, double hi) {
  return lo + (hi - lo) * uniform01(g);
}

}  // namespace

VolumeD generate_phantom(const PhantomSpec& spec) {
  spec.validate();
  VolumeD vol =
      VolumeD::zeros(spec.nx, spec.ny, spec.nz, spec.spacing_xy, spec.spacing_z);

  if (spec.kind == PhantomKind::Constant) {
    vol.data.setConstant(spec.value);
    return vol;
  }

  const double ux = 2.0 / static_cast<double>(spec.nx);
  const double uy = 2.0 / static_cast<double>(spec.ny);
  const double uz = 2.0 / static_cast<double>(spec.nz);
  const double cx = (static_cast<double>(spec.nx) - 1.0) / 2.0;
  const double cy = (static_cast<double>(spec.ny) - 1.0) / 2.0;
  const double cz = (static_cast<double>(spec.nz) - 1.0) / 2.0;

  if (spec.kind == PhantomKind::Shepp3d) {
    for (Index iz = 0; iz < spec.nz; ++iz) {
      const double z = (static_cast<double>(iz) - cz) * uz;
      for (Index iy = 0; iy < spec.ny; ++iy) {
        const double y = (static_cast<double>(iy) - cy) * uy;
        for (Index ix = 0; ix < spec.nx; ++ix) {
          const double x = (static_cast<double>(ix) - cx) * ux;
          vol.at(ix, iy, iz) = std::clamp(shepp_value(x, y, z), 0.0, 1.0);
        }
      }
    }
    return vol;
  }

  // Seeded smooth-edged blobs: one broad background ellipsoid plus a few
  // random ones, all with cosine-tapered boundaries so the volume stays
  // band-limited enough for analytic reconstruction tests.
  std::mt19937_64 gen(spec.seed);
  struct Blob {
    Ellipsoid e;
    double q0;
  };
  std::vector<Blob> blobs;
  blobs.push_back({{0.30, 0.75, 0.75, 0.85, 0.0, 0.0, 0.0, 0.0}, 0.70});
  for (int k = 0; k < 4; ++k) {
    Blob b;
    b.e.amp = uniform(gen, 0.08, 0.22);
    b.e.a = uniform(gen, 0.12, 0.35);
    b.e.b = uniform(gen, 0.12, 0.35);
    b.e.c = uniform(gen, 0.15, 0.45);
    b.e.x0 = uniform(gen, -0.40, 0.40);
    b.e.y0 = uniform(gen, -0.40, 0.40);
    b.e.z0 = uniform(gen, -0.35, 0.35);
    b.e.phi_deg = uniform(gen, -90.0, 90.0);
    b.q0 = 0.65;
    blobs.push_back(b);
  }
  for (Index iz = 0; iz < spec.nz; ++iz) {
    const double z = (static_cast<double>(iz) - cz) * uz;
    for (Index iy = 0; iy < spec.ny; ++iy) {
      const double y = (static_cast<double>(iy) - cy) * uy;
      for (Index ix = 0; ix < spec.nx; ++ix) {
        const double x = (static_cast<double>(ix) - cx) * ux;
        double v = 0.0;
        for (const auto& b : blobs) {
          const double q = std::sqrt(ellipsoid_radius2(b.e, x, y, z));
          v += b.e.amp * taper(q, b.q0);
        }
        vol.at(ix, iy, iz) = std::clamp(v, 0.0, 1.0);
      }
    }
  }
  return vol;
}

}  // namespace msfct
