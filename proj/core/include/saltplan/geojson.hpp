#pragma once

#include <string>

#include "saltplan/routing.hpp"

namespace saltplan {

/// FeatureCollection with one Point per depot and one LineString per route.
/// Steps without geometry use the straight endpoint segment and set
/// `geometry_fallback` on the route.
std::string export_geojson(const Plan& plan, const RoadNetwork& network,
                           const FleetSpec& fleet);

}  // namespace saltplan
