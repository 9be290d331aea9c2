#include "ctm/assignment.hpp"

#include <algorithm>
#include <cmath>
#include <numeric>
#include <string>

namespace ctm {

RoutingVector::RoutingVector(std::vector<double> ratios) : ratios_(std::move(ratios)) {
  if (ratios_.empty()) throw DomainError("routing vector must not be empty");
  double sum = 0.0;
  for (double r : ratios_) {
    if (!std::isfinite(r) || r < 0.0) throw DomainError("routing ratios must be non-negative and finite");
    sum += r;
  }
  if (std::abs(sum - 1.0) > 1e-12) {
    throw DomainError("routing ratios must sum to 1 (got " + std::to_string(sum) + ")");
  }
}

const char* to_string(RouteClass cls) noexcept {
  switch (cls) {
    case RouteClass::free_flow: return "free-flow";
    case RouteClass::critical: return "critical";
    case RouteClass::saturated: return "saturated";
  }
  return "?";
}

std::vector<Flow> interface_flows(const Route& route, std::span<const Density> densities, Flow nominal_inflow) {
  if (densities.size() != route.size()) {
    throw DomainError("route has " + std::to_string(route.size()) + " links but " +
                      std::to_string(densities.size()) + " densities were given");
  }
  const std::size_t n = route.size();
  std::vector<Flow> flows(n + 1);
  flows[0] = std::min(nominal_inflow, supply(route[0], densities[0]));
  for (std::size_t l = 0; l + 1 < n; ++l) {
    flows[l + 1] = std::min(demand(route[l], densities[l]), supply(route[l + 1], densities[l + 1]));
  }
  flows[n] = demand(route[n - 1], densities[n - 1]);
  return flows;
}

namespace {

bool flows_balanced(std::span<const Flow> flows, double tol) {
  const auto [lo, hi] = std::minmax_element(flows.begin(), flows.end());
  return *hi - *lo <= tol * std::max(1.0, std::abs(*hi));
}

}  // namespace

bool is_route_consistent(const Route& route, std::span<const Density> densities, Flow nominal_inflow, double tol) {
  const auto flows = interface_flows(route, densities, nominal_inflow);
  return flows_balanced(flows, tol);
}

Flow TrafficAssignment::transferred() const {
  return std::accumulate(flows.begin(), flows.end(), 0.0,
                         [](double acc, const std::vector<Flow>& f) { return acc + f.front(); });
}

TrafficAssignment make_assignment(const ParallelNetwork& net, Flow phi, RoutingVector routing,
                                  std::vector<std::vector<Density>> densities) {
  if (routing.size() != net.size() || densities.size() != net.size()) {
    throw DomainError("assignment size does not match the number of routes");
  }
  std::vector<std::vector<Flow>> flows;
  flows.reserve(net.size());
  for (std::size_t p = 0; p < net.size(); ++p) {
    flows.push_back(interface_flows(net[p], densities[p], phi * routing[p]));
  }
  return TrafficAssignment{std::move(routing), phi, std::move(densities), std::move(flows)};
}

bool is_consistent(const ParallelNetwork& net, const TrafficAssignment& assignment, double tol) {
  if (assignment.densities.size() != net.size() || assignment.routing.size() != net.size()) return false;
  for (std::size_t p = 0; p < net.size(); ++p) {
    const Flow nominal = assignment.exogenous_flow * assignment.routing[p];
    if (!is_route_consistent(net[p], assignment.densities[p], nominal, tol)) return false;
  }
  return true;
}

RouteClass classify(Flow nominal, Flow capacity) noexcept {
  if (nearly_equal(nominal, capacity)) return RouteClass::critical;
  return nominal < capacity ? RouteClass::free_flow : RouteClass::saturated;
}

std::vector<RouteClass> classify_routes(const ParallelNetwork& net, Flow phi, const RoutingVector& routing) {
  if (routing.size() != net.size()) throw DomainError("routing vector size does not match the network");
  std::vector<RouteClass> classes;
  classes.reserve(net.size());
  for (std::size_t p = 0; p < net.size(); ++p) classes.push_back(classify(phi * routing[p], net[p].capacity()));
  return classes;
}

std::vector<Density> RouteFamily::member(const Route& route, std::size_t choice, Density frontier_density) const {
  if (choice >= frontiers.size()) throw DomainError("no such frontier position");
  const FrontierChoice& f = frontiers[choice];
  const double slack = 1e-12 * route[f.link].jam_density();
  if (frontier_density < f.lower - slack || frontier_density > f.upper + slack) {
    throw DomainError("frontier density outside its admissible interval");
  }
  const Flow z = route.capacity();
  std::vector<Density> x(route.size());
  for (std::size_t l = 0; l < route.size(); ++l) {
    if (l < f.link || l >= route.bottleneck_index()) {
      x[l] = route[l].free_flow_density(z);
    } else if (l == f.link) {
      x[l] = frontier_density;
    } else {
      x[l] = route[l].congested_density(z);
    }
  }
  return x;
}

std::vector<std::vector<Density>> ConsistentFamily::canonical() const {
  std::vector<std::vector<Density>> out;
  out.reserve(routes.size());
  for (const auto& r : routes) out.push_back(r.canonical);
  return out;
}

RouteFamily consistent_route_family(const Route& route, Flow nominal, FrontierBound bound) {
  if (!(nominal >= 0.0)) throw DomainError("route inflow must be non-negative");
  const Flow z = route.capacity();
  const std::size_t b = route.bottleneck_index();

  RouteFamily fam;
  fam.nominal = nominal;
  fam.cls = nominal == 0.0 ? RouteClass::free_flow : classify(nominal, z);
  fam.canonical.resize(route.size());

  switch (fam.cls) {
    case RouteClass::free_flow:
      fam.realized = nominal;
      for (std::size_t l = 0; l < route.size(); ++l) fam.canonical[l] = route[l].free_flow_density(nominal);
      break;
    case RouteClass::saturated:
      fam.realized = z;
      for (std::size_t l = 0; l < route.size(); ++l) {
        fam.canonical[l] = l < b ? route[l].congested_density(z) : route[l].free_flow_density(z);
      }
      break;
    case RouteClass::critical:
      fam.realized = z;
      for (std::size_t l = 0; l < route.size(); ++l) fam.canonical[l] = route[l].free_flow_density(z);
      for (std::size_t k = 0; k < b; ++k) {
        const Link& link = route[k];
        const Density lower =
            bound == FrontierBound::free_flow ? link.free_flow_density(z) : link.critical_density();
        fam.frontiers.push_back({k, lower, link.congested_density(z)});
      }
      break;
  }
  return fam;
}

ConsistentFamily consistent_density(const ParallelNetwork& net, Flow phi, const RoutingVector& routing,
                                    FrontierBound bound) {
  if (!(phi >= 0.0)) throw DomainError("exogenous flow must be non-negative");
  if (routing.size() != net.size()) throw DomainError("routing vector size does not match the network");
  ConsistentFamily family;
  family.routes.reserve(net.size());
  for (std::size_t p = 0; p < net.size(); ++p) {
    family.routes.push_back(consistent_route_family(net[p], phi * routing[p], bound));
  }
  return family;
}

TrafficAssignment canonical_assignment(const ParallelNetwork& net, Flow phi, const RoutingVector& routing) {
  auto densities = consistent_density(net, phi, routing).canonical();
  return make_assignment(net, phi, routing, std::move(densities));
}

bool TransferAccount::fully_transferring() const noexcept { return psi <= kRelTol * std::max(1.0, phi); }

TransferAccount transfer_accounting(const ParallelNetwork& net, Flow phi, const RoutingVector& routing) {
  if (!(phi >= 0.0)) throw DomainError("exogenous flow must be non-negative");
  if (routing.size() != net.size()) throw DomainError("routing vector size does not match the network");
  TransferAccount account;
  account.phi = phi;
  Flow total = 0.0;
  for (std::size_t p = 0; p < net.size(); ++p) {
    const Flow moved = std::min(phi * routing[p], net[p].capacity());
    account.transferred.push_back(moved);
    total += moved;
  }
  account.psi = std::max(0.0, phi - total);
  return account;
}

}  // namespace ctm
