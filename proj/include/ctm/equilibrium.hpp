#pragma once

// Wardrop equilibria, social optimum and price of anarchy for routing games on
// parallel CTM networks, with a grid oracle used to cross-check the closed forms.
//
// Route indices are 0-based and follow the network's free-flow ordering.

#include <cstddef>
#include <optional>
#include <string>
#include <vector>

#include "ctm/assignment.hpp"
#include "ctm/fundamental.hpp"
#include "ctm/traveltime.hpp"

namespace ctm {

class GameInstance {
 public:
  // Throws DomainError for phi <= 0 and AssumptionViolation(2) when phi exceeds
  // the min-cut capacity (beyond kRelTol).
  GameInstance(ParallelNetwork network, Flow exogenous_flow);

  const ParallelNetwork& network() const noexcept { return network_; }
  Flow exogenous_flow() const noexcept { return phi_; }

 private:
  ParallelNetwork network_;
  Flow phi_;
};

struct EquilibriumIndices {
  // Fewest leading routes whose capacities cover phi (index of the last one).
  std::size_t k = 0;
  // Routes p <= k whose saturated time does not exceed the free-flow time of a later route q <= k.
  std::vector<std::size_t> U;
  // Member of U with the smallest saturated time.
  std::optional<std::size_t> u;
  // First route after u whose free-flow time reaches the saturated time of u.
  std::optional<std::size_t> j;
};

EquilibriumIndices indices(const GameInstance& game);

enum class WardropKind { unique_fully_transferring, unique_partially_transferring, interval_family };

const char* to_string(WardropKind kind) noexcept;

struct FlowInterval {
  Flow lo = 0;
  Flow hi = 0;
};

struct WardropSolution {
  WardropKind kind = WardropKind::unique_fully_transferring;
  EquilibriumIndices indices;
  // For interval families, the member transferring the most flow.
  TrafficAssignment assignment;
  Duration common_time = 0;
  FlowInterval psi;
  // Admissible range of phi * R_u for interval families.
  std::optional<FlowInterval> family_flow;
  // Per route, target time minus achieved time of the prescribed density vector.
  std::vector<Duration> residuals;

  bool partially_transferring() const noexcept;
};

WardropSolution wardrop(const GameInstance& game, FrontierBound bound = FrontierBound::free_flow);

// Non-transferred flow over all equilibria described by the solution.
FlowInterval psi_bounds(const WardropSolution& solution, const GameInstance& game);

struct WardropCheck {
  bool holds = false;
  // max used-route time minus min route time (h)
  Duration violation = 0;
  std::vector<Duration> route_times;
  // Used routes p having some earlier route q below capacity.
  std::vector<std::size_t> capacity_law_breaches;
  // Support extends beyond route k.
  bool support_beyond_k = false;
};

// Throws DomainError when the assignment is not consistent.
WardropCheck check_wardrop(const GameInstance& game, const TrafficAssignment& assignment, Duration eps);
bool is_wardrop(const GameInstance& game, const TrafficAssignment& assignment, Duration eps);

struct SocialOptimum {
  TrafficAssignment assignment;
  double total_cost = 0;  // veh h per hour of operation
};

SocialOptimum social_optimum(const GameInstance& game);

// Total travel time sum_p phi R_p tau_p of an assignment.
double total_cost(const ParallelNetwork& net, const TrafficAssignment& assignment);

struct PriceOfAnarchy {
  std::optional<double> value;  // empty when the equilibrium is partially transferring
  std::string note;
};

PriceOfAnarchy price_of_anarchy(const GameInstance& game);

struct OracleResult {
  std::vector<RoutingVector> survivors;
  std::size_t evaluated = 0;
  // Set when one grid step moves more flow than the smallest route capacity.
  bool coarse_grid = false;
};

// Enumerates the routing simplex at the given resolution (1/M) and keeps
// points admitting a consistent state in which every used route's time is
// within eps of the fastest route. Routes loaded within half a grid step of
// capacity may take any time attainable at capacity.
OracleResult oracle_wardrop(const GameInstance& game, double resolution, Duration eps);

// All points of the simplex {R : R_p = n_p / M, sum n_p = M}.
std::vector<std::vector<double>> simplex_grid(std::size_t routes, std::size_t divisions);

}  // namespace ctm
