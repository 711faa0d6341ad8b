// SPDX-License-Identifier: Apache-2.0

#pragma once

namespace ztc {

inline constexpr double kEarthRadiusKm = 6371.0;

struct GeoPosition {
  double latitudeDeg = 0.0;
  double longitudeDeg = 0.0;

  bool operator==(const GeoPosition&) const = default;
};

bool is_valid(const GeoPosition& p);

// Great-circle distance on a spherical Earth (haversine).
double geo_distance_km(const GeoPosition& p1, const GeoPosition& p2);

}  // namespace ztc
