#pragma once

namespace gridagg {

/// Mean Earth radius (IUGG), km.
inline constexpr double kEarthRadiusKm = 6371.0088;

/// Great-circle distance in km between two points given in degrees.
/// Throws std::domain_error if a latitude is outside [-90, 90] or a
/// longitude outside [-180, 180].
double haversine_km(double lat1, double lon1, double lat2, double lon2);

}  // namespace gridagg
