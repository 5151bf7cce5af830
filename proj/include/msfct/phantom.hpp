#pragma once

#include <cstdint>
#include <string>

#include "msfct/core.hpp"
#include "msfct/volume.hpp"

namespace msfct {

enum class PhantomKind { Shepp3d, Ellipsoids, Constant };

PhantomKind phantom_kind_from_string(const std::string& s);
const char* phantom_kind_name(PhantomKind k);

struct PhantomSpec {
  PhantomKind kind{PhantomKind::Shepp3d};
  Index nx{64};
  Index ny{64};
  Index nz{8};
  double spacing_xy{1.0};
  double spacing_z{1.0};
  std::uint64_t seed{0};   // ellipsoids kind only
  double value{1.0};       // constant kind only

  void validate() const;
};

// Deterministic test volumes with densities in [0, 1]:
//  - shepp3d: the classic ten-ellipsoid head phantom extruded to the grid
//  - ellipsoids: seeded random smooth-edged ellipsoids (band-limited enough
//    for analytic reconstruction tests)
//  - constant: uniform value
VolumeD generate_phantom(const PhantomSpec& spec);

}  // namespace msfct
