#pragma once

#include <cstddef>
#include <string>
#include <vector>

#include "saltplan/routing.hpp"

namespace saltplan {

inline constexpr std::size_t kOracleMaxEdges = 8;

struct OracleOptions {
  // Run the full plan checker on every enumerated partition, not only on
  // each distinct route.
  bool check_all_plans = true;
};

struct OracleResult {
  bool feasible = false;
  // Lexicographic (Z1, Z2) optimum.
  double Z1_minutes = 0.0;
  double Z2_kg = 0.0;
  std::vector<Route> routes;
  // Minimiser of Z1/Z1* + Z2/Z2* with the lexicographic optimum as reference.
  double scalar_Z1_minutes = 0.0;
  double scalar_Z2_kg = 0.0;
  std::vector<Route> scalar_routes;

  std::size_t routes_enumerated = 0;
  std::size_t plans_enumerated = 0;
  std::size_t feasible_plans = 0;
  std::size_t route_disagreements = 0;  // own verdict vs check_route
  std::size_t plan_disagreements = 0;   // own verdict vs check_feasibility
  std::string first_disagreement;
};

/// Exhaustive search over every split of the network's required edges into
/// ordered routes from `depot`, with deadhead legs priced by an all-pairs
/// table. Each candidate's feasibility is decided independently and also
/// compared with the library checker. At most kOracleMaxEdges required edges.
OracleResult brute_force_oracle(const RoadNetwork& network, const Depot& depot,
                                const VehicleClass& vehicle,
                                const OracleOptions& options = {});

}  // namespace saltplan
