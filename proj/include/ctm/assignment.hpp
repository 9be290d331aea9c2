#pragma once

// Routing vectors, route classification, consistent density vectors and
// transferred-flow accounting on parallel networks.

#include <cstddef>
#include <span>
#include <vector>

#include "ctm/fundamental.hpp"

namespace ctm {

class RoutingVector {
 public:
  // Throws DomainError unless all ratios are non-negative, finite and sum to 1 within 1e-12.
  explicit RoutingVector(std::vector<double> ratios);
  RoutingVector() : ratios_{1.0} {}

  std::span<const double> ratios() const noexcept { return ratios_; }
  double operator[](std::size_t p) const { return ratios_[p]; }
  std::size_t size() const noexcept { return ratios_.size(); }

 private:
  std::vector<double> ratios_;
};

enum class RouteClass { free_flow, critical, saturated };

const char* to_string(RouteClass cls) noexcept;

// Lower end of the frontier-link density interval on a route loaded exactly
// at capacity.
//   free_flow: z/v of the frontier link. This is the full set of consistent
//              densities; frontier intervals of adjacent positions touch, so
//              every time in [tau_F, tau_S] is attainable.
//   critical:  the link's critical density. Frontier intervals are separated
//              by gaps whenever the frontier capacity exceeds the route capacity.
enum class FrontierBound { free_flow, critical };

// Interface flows of one route: entry 0 is the admitted inflow, entry l + 1
// the outflow of link l. Throws DomainError on a length mismatch.
std::vector<Flow> interface_flows(const Route& route, std::span<const Density> densities, Flow nominal_inflow);

// All interface flows equal within `tol` relative to the largest of them (or
// absolute, when flows are below one veh/h).
bool is_route_consistent(const Route& route, std::span<const Density> densities, Flow nominal_inflow,
                         double tol = kRelTol);

struct TrafficAssignment {
  RoutingVector routing;
  Flow exogenous_flow = 0;
  std::vector<std::vector<Density>> densities;  // per route
  std::vector<std::vector<Flow>> flows;         // per route, n_p + 1 interface flows

  // Flow carried by route p (its admitted inflow).
  Flow route_flow(std::size_t p) const { return flows[p].front(); }
  Flow transferred() const;
  Flow psi() const { return exogenous_flow - transferred(); }
};

// Builds an assignment from densities, computing the interface flows.
TrafficAssignment make_assignment(const ParallelNetwork& net, Flow phi, RoutingVector routing,
                                  std::vector<std::vector<Density>> densities);

// Recomputes interface flows from the densities and checks flow balance on every route.
bool is_consistent(const ParallelNetwork& net, const TrafficAssignment& assignment, double tol = kRelTol);

// Free flow below capacity, critical at capacity within kRelTol, saturated above.
RouteClass classify(Flow nominal, Flow capacity) noexcept;
std::vector<RouteClass> classify_routes(const ParallelNetwork& net, Flow phi, const RoutingVector& routing);

// One admissible frontier position of a critical route.
struct FrontierChoice {
  std::size_t link = 0;
  Density lower = 0;
  Density upper = 0;
};

struct RouteFamily {
  RouteClass cls = RouteClass::free_flow;
  Flow nominal = 0;   // phi * R_p
  Flow realized = 0;  // min(nominal, z_p)
  // The unique vector for free-flow and saturated routes; the all-free-flow
  // member for critical routes.
  std::vector<Density> canonical;
  std::vector<FrontierChoice> frontiers;  // empty unless critical with bottleneck beyond link 1

  bool unique() const noexcept { return frontiers.empty(); }
  // Member with frontier at frontiers[choice] set to `frontier_density`. Throws DomainError if
  // the density is outside the frontier interval.
  std::vector<Density> member(const Route& route, std::size_t choice, Density frontier_density) const;
};

struct ConsistentFamily {
  std::vector<RouteFamily> routes;

  std::vector<std::vector<Density>> canonical() const;
};

RouteFamily consistent_route_family(const Route& route, Flow nominal, FrontierBound bound = FrontierBound::free_flow);
ConsistentFamily consistent_density(const ParallelNetwork& net, Flow phi, const RoutingVector& routing,
                                    FrontierBound bound = FrontierBound::free_flow);

// Canonical consistent assignment (critical routes in all-free-flow form).
TrafficAssignment canonical_assignment(const ParallelNetwork& net, Flow phi, const RoutingVector& routing);

struct TransferAccount {
  std::vector<Flow> transferred;  // min(phi R_p, z_p) per route
  Flow psi = 0;                   // phi - sum(transferred)
  Flow phi = 0;
  bool fully_transferring() const noexcept;
};

TransferAccount transfer_accounting(const ParallelNetwork& net, Flow phi, const RoutingVector& routing);

}  // namespace ctm
