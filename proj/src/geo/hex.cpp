#include "econoforge/geo/hex.hpp"

#include <algorithm>
#include <charconv>
#include <cmath>
#include <numbers>

#include "econoforge/core/errors.hpp"

namespace econoforge::geo {
namespace {

constexpr double kEarthRadius = 6378137.0;
constexpr double kMaxLat = 85.05112878;
constexpr double kSqrt3 = 1.7320508075688772;

void check_resolution(int resolution) {
  if (resolution < 0 || resolution > kMaxResolution) {
    throw DomainError("resolution must be in [0, " + std::to_string(kMaxResolution) + "], got " +
                      std::to_string(resolution));
  }
}

}  // namespace

std::string to_string(const HexIndex& h) {
  return std::to_string(h.resolution) + ":" + std::to_string(h.q) + ":" + std::to_string(h.r);
}

HexIndex parse_hex_index(std::string_view text) {
  HexIndex h;
  const char* p = text.data();
  const char* end = text.data() + text.size();
  auto field = [&](auto& out, bool last) {
    auto res = std::from_chars(p, end, out);
    if (res.ec != std::errc{}) throw DomainError("malformed bin id '" + std::string(text) + "'");
    p = res.ptr;
    if (last) {
      if (p != end) throw DomainError("malformed bin id '" + std::string(text) + "'");
    } else {
      if (p == end || *p != ':') throw DomainError("malformed bin id '" + std::string(text) + "'");
      ++p;
    }
  };
  field(h.resolution, false);
  field(h.q, false);
  field(h.r, true);
  check_resolution(h.resolution);
  return h;
}

PlanePoint project(const LatLon& p) {
  const double lat = std::clamp(p.lat, -kMaxLat, kMaxLat) * std::numbers::pi / 180.0;
  const double lon = p.lon * std::numbers::pi / 180.0;
  return {kEarthRadius * lon, kEarthRadius * std::log(std::tan(std::numbers::pi / 4.0 + lat / 2.0))};
}

LatLon unproject(const PlanePoint& p) {
  const double lon = p.x / kEarthRadius * 180.0 / std::numbers::pi;
  const double lat = (2.0 * std::atan(std::exp(p.y / kEarthRadius)) - std::numbers::pi / 2.0) * 180.0 /
                     std::numbers::pi;
  return {lat, lon};
}

double edge_length_m(int resolution) {
  check_resolution(resolution);
  return 1'000'000.0 / static_cast<double>(1 << resolution);
}

HexIndex cube_round(double q, double r, int resolution) {
  const double s = -q - r;
  double rq = std::round(q);
  double rr = std::round(r);
  double rs = std::round(s);
  const double dq = std::abs(rq - q);
  const double dr = std::abs(rr - r);
  const double ds = std::abs(rs - s);
  if (dq > dr && dq > ds) {
    rq = -rr - rs;
  } else if (dr > ds) {
    rr = -rq - rs;
  }
  return {resolution, static_cast<std::int64_t>(rq), static_cast<std::int64_t>(rr)};
}

HexIndex bin_point(double lat, double lon, int resolution) {
  check_resolution(resolution);
  if (!std::isfinite(lat) || lat < -90.0 || lat > 90.0) {
    throw DomainError("latitude out of range [-90, 90]");
  }
  if (!std::isfinite(lon) || lon < -180.0 || lon > 180.0) {
    throw DomainError("longitude out of range [-180, 180]");
  }
  const PlanePoint p = project({lat, lon});
  const double size = edge_length_m(resolution);
  const double q = (kSqrt3 / 3.0 * p.x - p.y / 3.0) / size;
  const double r = (2.0 / 3.0 * p.y) / size;
  return cube_round(q, r, resolution);
}

PlanePoint hex_center_plane(const HexIndex& h) {
  const double size = edge_length_m(h.resolution);
  const auto q = static_cast<double>(h.q);
  const auto r = static_cast<double>(h.r);
  return {size * kSqrt3 * (q + r / 2.0), size * 1.5 * r};
}

LatLon hex_center(const HexIndex& h) { return unproject(hex_center_plane(h)); }

}  // namespace econoforge::geo
