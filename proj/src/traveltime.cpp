#include "ctm/traveltime.hpp"

#include <algorithm>
#include <cmath>
#include <string>

namespace ctm {

Duration link_travel_time(const Link& link, Density x, Flow realized_flow) {
  if (!(x >= 0.0) || x > link.jam_density() * (1 + 1e-12)) throw DomainError("density outside [0, jam]");
  if (!(realized_flow >= 0.0)) throw DomainError("realized flow must be non-negative");
  if (x == 0.0) return link.free_flow_time();
  if (realized_flow == 0.0) return kInfiniteTime;
  return link.length() * x / realized_flow;
}

Duration route_travel_time(const Route& route, std::span<const Density> densities, std::span<const Flow> flows) {
  if (densities.size() != route.size() || flows.size() != route.size() + 1) {
    throw DomainError("route state does not match the route length");
  }
  Duration total = 0.0;
  for (std::size_t l = 0; l < route.size(); ++l) total += link_travel_time(route[l], densities[l], flows[l + 1]);
  return total;
}

Duration route_travel_time(const Route& route, std::span<const Density> densities, Flow nominal_inflow) {
  const auto flows = interface_flows(route, densities, nominal_inflow);
  return route_travel_time(route, densities, flows);
}

bool TimeInterval::contains(Duration t, double rel_tol) const noexcept {
  const double slack = rel_tol * std::max(std::abs(lo), std::abs(hi));
  return t >= lo - slack && t <= hi + slack;
}

bool RouteTimeBounds::attainable_time(Duration t, double rel_tol) const noexcept {
  return std::any_of(attainable.begin(), attainable.end(),
                     [&](const TimeInterval& iv) { return iv.contains(t, rel_tol); });
}

Duration RouteTimeBounds::nearest(Duration t) const noexcept {
  Duration best = attainable.front().lo;
  for (const auto& iv : attainable) {
    const Duration candidate = std::clamp(t, iv.lo, iv.hi);
    if (std::abs(candidate - t) < std::abs(best - t)) best = candidate;
  }
  return best;
}

namespace {

// Time of every link except the frontier, with links before it in free flow,
// links between it and the bottleneck congested, and the rest in free flow.
Duration fixed_part(const Route& route, std::size_t frontier) {
  const Flow z = route.capacity();
  const std::size_t b = route.bottleneck_index();
  Duration t = 0.0;
  for (std::size_t l = 0; l < route.size(); ++l) {
    if (l == frontier) continue;
    if (l > frontier && l < b) {
      t += route[l].length() * route[l].congested_density(z) / z;
    } else {
      t += route[l].free_flow_time();
    }
  }
  return t;
}

std::vector<Density> free_flow_vector(const Route& route) {
  std::vector<Density> x(route.size());
  for (std::size_t l = 0; l < route.size(); ++l) x[l] = route[l].free_flow_density(route.capacity());
  return x;
}

}  // namespace

RouteTimeBounds route_time_bounds(const Route& route, FrontierBound bound) {
  RouteTimeBounds out;
  out.free_flow_time = route.free_flow_time();
  out.max_time = route.saturated_time();

  const Flow z = route.capacity();
  const std::size_t b = route.bottleneck_index();
  if (b == 0 || bound == FrontierBound::critical) {
    out.attainable.push_back({out.free_flow_time, out.free_flow_time, std::nullopt});
  }
  const RouteFamily fam = consistent_route_family(route, z, bound);
  for (std::size_t k = b; k-- > 0;) {
    const FrontierChoice& f = fam.frontiers[k];
    const Duration base = fixed_part(route, k);
    const Distance len = route[k].length();
    out.attainable.push_back({base + len * f.lower / z, base + len * f.upper / z, k});
  }
  return out;
}

InverseResult tau_inverse(const Route& route, Duration target, InverseMode mode, FrontierBound bound) {
  const RouteTimeBounds bounds = route_time_bounds(route, bound);
  const Duration lo = bounds.free_flow_time;
  const Duration hi = bounds.max_time;
  if (!std::isfinite(target) || target < lo * (1 - kRelTol) || target > hi * (1 + kRelTol)) {
    throw DomainError("target travel time " + std::to_string(target) + " h outside [" + std::to_string(lo) +
                      ", " + std::to_string(hi) + "]");
  }
  if (nearly_equal(target, lo)) return {free_flow_vector(route), target - lo};

  Duration achievable = target;
  const TimeInterval* hit = nullptr;
  for (const auto& iv : bounds.attainable) {
    if (iv.contains(target)) {
      hit = &iv;
      break;
    }
  }
  if (hit == nullptr) {
    if (mode == InverseMode::exact) {
      throw UnattainableTime("travel time " + std::to_string(target) +
                             " h falls between attainable intervals of the route");
    }
    achievable = bounds.nearest(target);
    for (const auto& iv : bounds.attainable) {
      if (iv.contains(achievable)) {
        hit = &iv;
        break;
      }
    }
  }

  if (!hit->frontier) return {free_flow_vector(route), target - lo};

  const std::size_t k = *hit->frontier;
  const RouteFamily fam = consistent_route_family(route, route.capacity(), bound);
  const FrontierChoice& f = fam.frontiers[k];
  const Density x = std::clamp((achievable - fixed_part(route, k)) * route.capacity() / route[k].length(),
                               f.lower, f.upper);
  std::vector<Density> densities = fam.member(route, k, x);
  const Duration achieved = route_travel_time(route, densities, route.capacity());
  return {std::move(densities), target - achieved};
}

}  // namespace ctm
