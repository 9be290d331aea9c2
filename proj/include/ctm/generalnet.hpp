#pragma once

// Experimental: CTM links on a general single-origin DAG, steady states by
// forward integration of the cell dynamics, and a simplex-grid search for
// Wardrop-like states.
//
// Dynamics per time step, all links updated simultaneously:
//   * a link's demand is split among its routes in proportion to their share
//     of the link density, each share heading to that route's next link;
//   * a link receiving more than its supply admits every request scaled by
//     supply / total request (merges and the origin alike);
//   * flow leaving the last link of a route exits unconstrained;
//   * flow refused at the origin is lost and counted in psi.

#include <cstddef>
#include <optional>
#include <string>
#include <vector>

#include "ctm/assignment.hpp"
#include "ctm/fundamental.hpp"

namespace ctm {

struct GeneralLink {
  Link link;
  std::size_t tail = 0;
  std::size_t head = 0;
};

class GeneralNetwork {
 public:
  // Throws DomainError unless the graph is acyclic and every route is a simple
  // origin -> destination path.
  GeneralNetwork(std::vector<GeneralLink> links, std::size_t origin, std::size_t destination,
                 std::vector<std::vector<std::size_t>> routes);

  const std::vector<GeneralLink>& links() const noexcept { return links_; }
  const std::vector<std::vector<std::size_t>>& routes() const noexcept { return routes_; }
  std::size_t origin() const noexcept { return origin_; }
  std::size_t destination() const noexcept { return destination_; }
  std::size_t node_count() const noexcept { return nodes_; }

  // Largest stable time step: min over links of L / max(v, w).
  Duration cfl_bound() const noexcept;
  // Free-flow time of each route.
  std::vector<Duration> free_flow_times() const;

 private:
  std::vector<GeneralLink> links_;
  std::size_t origin_;
  std::size_t destination_;
  std::vector<std::vector<std::size_t>> routes_;
  std::size_t nodes_ = 0;
};

// Each route becomes a chain of private links between the shared origin (node 0)
// and destination (node 1).
GeneralNetwork embed(const ParallelNetwork& net);

// Five-link bridge network: links 1: O->A, 2: O->B, 3: A->B, 4: A->D, 5: B->D;
// routes (1,4), (1,3,5), (2,5).
GeneralNetwork wheatstone();

struct SteadyStateOptions {
  Duration step = 0;  // 0 selects half the CFL bound
  double tol = 1e-8;  // max per-step density change relative to jam density
  std::size_t max_steps = 1'000'000;
};

struct GeneralState {
  std::vector<Density> density;                   // per link
  std::vector<Flow> flow;                         // per link outflow
  std::vector<std::vector<Density>> route_share;  // per link, per route
  std::vector<Flow> admitted;                     // per route
  Flow psi = 0;
  bool converged = false;
  std::size_t steps = 0;
};

GeneralState steady_state(const GeneralNetwork& net, Flow phi, const RoutingVector& routing,
                          const SteadyStateOptions& options = {});

// Sum over route links of L x / f (L / v on empty links, infinite on loaded links without flow).
std::vector<Duration> general_route_times(const GeneralNetwork& net, const GeneralState& state);

struct EquilibriumCandidate {
  RoutingVector routing;
  GeneralState state;
  std::vector<Duration> times;
  Duration violation = 0;  // slowest used route minus fastest route
};

struct SearchResult {
  std::vector<EquilibriumCandidate> survivors;  // by violation, then psi
  std::optional<EquilibriumCandidate> best;     // smallest violation on the grid
  std::size_t evaluated = 0;
  std::size_t unconverged = 0;
};

SearchResult search_equilibrium(const GeneralNetwork& net, Flow phi, double resolution, Duration eps,
                                const SteadyStateOptions& options = {});

}  // namespace ctm
