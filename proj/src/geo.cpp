// SPDX-License-Identifier: Apache-2.0

#include "ztc/geo.hpp"

#include <algorithm>
#include <cmath>
#include <numbers>

namespace ztc {

namespace {
double to_radians(double deg) { return deg * std::numbers::pi / 180.0; }
}  // namespace

bool is_valid(const GeoPosition& p) {
  return std::isfinite(p.latitudeDeg) && std::isfinite(p.longitudeDeg) &&
         p.latitudeDeg >= -90.0 && p.latitudeDeg <= 90.0 &&
         p.longitudeDeg >= -180.0 && p.longitudeDeg <= 180.0;
}

double geo_distance_km(const GeoPosition& p1, const GeoPosition& p2) {
  if (p1 == p2) return 0.0;
  const double phi1 = to_radians(p1.latitudeDeg);
  const double phi2 = to_radians(p2.latitudeDeg);
  const double dphi = phi2 - phi1;
  const double dlambda = to_radians(p2.longitudeDeg - p1.longitudeDeg);
  const double s1 = std::sin(dphi / 2.0);
  const double s2 = std::sin(dlambda / 2.0);
  double h = s1 * s1 + std::cos(phi1) * std::cos(phi2) * s2 * s2;
  h = std::clamp(h, 0.0, 1.0);
  return 2.0 * kEarthRadiusKm * std::asin(std::sqrt(h));
}

}  // namespace ztc
