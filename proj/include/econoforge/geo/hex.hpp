#pragma once

#include <compare>
#include <cstdint>
#include <string>
#include <string_view>

#include "econoforge/core/types.hpp"

namespace econoforge::geo {

inline constexpr int kMaxResolution = 12;

/// Pointy-top hexagon in axial coordinates on the Web-Mercator plane.
struct HexIndex {
  int resolution = 0;
  std::int64_t q = 0;
  std::int64_t r = 0;

  friend auto operator<=>(const HexIndex&, const HexIndex&) = default;
};

/// "<resolution>:<q>:<r>"
std::string to_string(const HexIndex& h);
/// Inverse of to_string; throws DomainError on malformed text or resolution.
HexIndex parse_hex_index(std::string_view text);

struct PlanePoint {
  double x = 0.0;  // metres east
  double y = 0.0;  // metres north
};

/// Latitudes beyond +-85.05112878 are clamped to the square Mercator extent.
PlanePoint project(const LatLon& p);
LatLon unproject(const PlanePoint& p);

/// Hexagon edge length (= circumradius) in projected metres: 1000 km at
/// resolution 0, halving per level.
double edge_length_m(int resolution);

/// Throws DomainError for out-of-range coordinates or resolution.
HexIndex bin_point(double lat, double lon, int resolution);
inline HexIndex bin_point(const LatLon& p, int resolution) { return bin_point(p.lat, p.lon, resolution); }

PlanePoint hex_center_plane(const HexIndex& h);
LatLon hex_center(const HexIndex& h);

/// Axial coordinates of the hexagon containing fractional axial (q, r),
/// by standard cube rounding.
HexIndex cube_round(double q, double r, int resolution);

}  // namespace econoforge::geo
