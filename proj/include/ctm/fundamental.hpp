#pragma once

// CTM links, triangular supply/demand diagrams, routes and the validated
// parallel network.
//
// Units are fixed: veh/h for flows, veh/km for densities, km/h for speeds,
// km for lengths and hours for durations.

#include <cstddef>
#include <span>
#include <vector>

#include "ctm/errors.hpp"

namespace ctm {

using Flow = double;
using Density = double;
using Speed = double;
using Distance = double;
using Duration = double;

// Relative tolerance for structural equalities (ties, critical routes, branch detection).
inline constexpr double kRelTol = 1e-9;

// |a - b| <= tol * max(|a|, |b|); exact zero compares equal only to zero.
bool nearly_equal(double a, double b, double rel_tol = kRelTol) noexcept;

struct LinkParams {
  Flow capacity = 0;
  Density jam_density = 0;
  Speed free_speed = 0;
  Distance length = 0;
};

class Link {
 public:
  // Throws DomainError on non-positive or non-finite parameters, or when the
  // critical density reaches the jam density (congested branch empty).
  explicit Link(const LinkParams& params);

  const LinkParams& params() const noexcept { return params_; }
  Flow capacity() const noexcept { return params_.capacity; }
  Density jam_density() const noexcept { return params_.jam_density; }
  Speed free_speed() const noexcept { return params_.free_speed; }
  Distance length() const noexcept { return params_.length; }

  Density critical_density() const noexcept { return critical_density_; }
  Speed wave_speed() const noexcept { return wave_speed_; }

  Duration free_flow_time() const noexcept { return params_.length / params_.free_speed; }
  // Density on the free-flow branch carrying `flow`.
  Density free_flow_density(Flow flow) const noexcept { return flow / params_.free_speed; }
  // Density on the congested branch whose supply equals `flow`.
  Density congested_density(Flow flow) const noexcept {
    return params_.jam_density - flow / wave_speed_;
  }

 private:
  LinkParams params_;
  Density critical_density_;
  Speed wave_speed_;
};

// min(capacity, w (jam - x)). Throws DomainError outside [0, jam].
Flow supply(const Link& link, Density x);
// min(v x, capacity). Throws DomainError outside [0, jam].
Flow demand(const Link& link, Density x);

class Route {
 public:
  // Throws DomainError on an empty route and AssumptionViolation(1) when the
  // minimum capacity is attained by more than one link, unless all links share
  // it (the bottleneck is then the first link).
  explicit Route(std::vector<Link> links);

  std::span<const Link> links() const noexcept { return links_; }
  const Link& operator[](std::size_t i) const { return links_[i]; }
  std::size_t size() const noexcept { return links_.size(); }

  // Position of the unique minimum-capacity link.
  std::size_t bottleneck_index() const noexcept { return bottleneck_; }
  Flow capacity() const noexcept { return links_[bottleneck_].capacity(); }

  // Sum of link free-flow times.
  Duration free_flow_time() const noexcept;
  // Travel time with the links upstream of the bottleneck congested at route
  // capacity and the rest in free flow.
  Duration saturated_time() const noexcept;

 private:
  std::vector<Link> links_;
  std::size_t bottleneck_ = 0;
};

Flow route_capacity(const Route& route) noexcept;

class ParallelNetwork {
 public:
  std::span<const Route> routes() const noexcept { return routes_; }
  const Route& operator[](std::size_t p) const { return routes_[p]; }
  std::size_t size() const noexcept { return routes_.size(); }

  // Index in the list handed to validate_network for each stored route.
  std::span<const std::size_t> input_order() const noexcept { return input_order_; }

  // Sum of route capacities.
  Flow min_cut_capacity() const noexcept;

 private:
  friend ParallelNetwork validate_network(std::vector<Route> routes);
  std::vector<Route> routes_;
  std::vector<std::size_t> input_order_;
};

// Sorts routes by increasing free-flow time and checks the ordering
// assumptions. Throws DomainError on an empty list and AssumptionViolation(3)
// on tied free-flow or saturated times.
ParallelNetwork validate_network(std::vector<Route> routes);

}  // namespace ctm
