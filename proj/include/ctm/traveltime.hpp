#pragma once

#include <cstddef>
#include <limits>
#include <optional>
#include <span>
#include <vector>

#include "ctm/assignment.hpp"
#include "ctm/fundamental.hpp"

namespace ctm {

inline constexpr Duration kInfiniteTime = std::numeric_limits<Duration>::infinity();

// L x / f, with the continuous extension L/v at x = 0. Returns kInfiniteTime
// for a loaded link with zero flow.
Duration link_travel_time(const Link& link, Density x, Flow realized_flow);

// Sum of link times; link l uses its outflow flows[l + 1].
Duration route_travel_time(const Route& route, std::span<const Density> densities, std::span<const Flow> flows);
// Same, with flows recomputed from densities for the given route inflow.
Duration route_travel_time(const Route& route, std::span<const Density> densities, Flow nominal_inflow);

struct TimeInterval {
  Duration lo = 0;
  Duration hi = 0;
  std::optional<std::size_t> frontier;  // empty for the all-free-flow point

  bool contains(Duration t, double rel_tol = kRelTol) const noexcept;
};

// Route travel times reachable while the route carries exactly its capacity.
struct RouteTimeBounds {
  Duration free_flow_time = 0;
  Duration max_time = 0;
  // Increasing, non-overlapping; adjacent intervals may touch.
  std::vector<TimeInterval> attainable;

  bool attainable_time(Duration t, double rel_tol = kRelTol) const noexcept;
  // Closest attainable time to t.
  Duration nearest(Duration t) const noexcept;
};

RouteTimeBounds route_time_bounds(const Route& route, FrontierBound bound = FrontierBound::free_flow);

enum class InverseMode { exact, nearest };

struct InverseResult {
  std::vector<Density> densities;
  Duration residual = 0;  // target minus achieved time
};

// Consistent density vector of a route at capacity with the given travel time.
// Throws DomainError outside [tau_F, tau_S]; in exact mode throws
// UnattainableTime for targets between attainable intervals.
InverseResult tau_inverse(const Route& route, Duration target, InverseMode mode = InverseMode::exact,
                          FrontierBound bound = FrontierBound::free_flow);

}  // namespace ctm
