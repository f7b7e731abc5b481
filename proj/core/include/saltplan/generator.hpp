#pragma once

#include <cstdint>
#include <string>
#include <vector>

#include "saltplan/fleet.hpp"
#include "saltplan/network.hpp"

namespace saltplan {

struct GeneratorConfig {
  std::uint64_t seed = 1;
  std::size_t nodes = 400;  // grid nodes before subdivision
  double oneway_fraction = 0.122;
  std::vector<double> speed_tiers{10, 20, 30, 40, 50, 60, 70};
  std::vector<double> speed_weights{0.04, 0.08, 0.13, 0.20, 0.30, 0.15, 0.10};
  std::vector<double> lane_weights{0.62, 0.30, 0.06, 0.02};  // 1, 2, 3, 4 lanes
  double treated_fraction = 0.12;
  std::size_t depot_count = 3;
  double extent = 60000.0;  // square side, coordinate units (metres)
  int max_vehicles = 12;
  double keep_fraction = 0.92;      // grid links kept
  double shortcut_fraction = 0.15;  // cells given a diagonal
  double subdivide_fraction = 0.15; // rows split by a pass-through node
  std::size_t corridors = 2;        // fast rows and columns each way
  SpeedUnit speed_unit = SpeedUnit::mph;
  std::string name = "synthetic";

  void validate() const;  // throws GenerationError
  std::string canonical() const;
};

struct GeneratedInstance {
  RoadNetwork network;  // raw, before SCC and compression
  FleetSpec fleet;
};

/// Jittered grid with diagonal shortcuts and fast corridors. Depots sit at
/// well-separated nodes of the largest SCC. Treated rows that no nearest
/// depot could serve alone are untreated.
GeneratedInstance generate_instance(const GeneratorConfig& config);

struct MicroConfig {
  std::uint64_t seed = 1;
  std::size_t min_required = 1;
  std::size_t max_required = 8;
};

/// Small strongly connected instance with one depot and tight limits,
/// for exhaustive checks.
GeneratedInstance generate_micro_instance(const MicroConfig& config);

}  // namespace saltplan
