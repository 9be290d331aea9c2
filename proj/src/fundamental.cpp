#include "ctm/fundamental.hpp"

#include <algorithm>
#include <cmath>
#include <numeric>
#include <string>

namespace ctm {

bool nearly_equal(double a, double b, double rel_tol) noexcept {
  if (a == b) return true;
  return std::abs(a - b) <= rel_tol * std::max(std::abs(a), std::abs(b));
}

namespace {

void require_positive(double value, const char* name) {
  if (!std::isfinite(value) || value <= 0.0) {
    throw DomainError(std::string("link ") + name + " must be positive and finite");
  }
}

// Densities computed from closed forms may overshoot [0, jam] by rounding.
Density checked_density(const Link& link, Density x) {
  const double slack = 1e-12 * link.jam_density();
  if (!(x >= -slack && x <= link.jam_density() + slack)) {
    throw DomainError("density " + std::to_string(x) + " outside [0, " +
                      std::to_string(link.jam_density()) + "]");
  }
  return std::clamp(x, 0.0, link.jam_density());
}

}  // namespace

Link::Link(const LinkParams& params) : params_(params) {
  require_positive(params.capacity, "capacity");
  require_positive(params.jam_density, "jam density");
  require_positive(params.free_speed, "free speed");
  require_positive(params.length, "length");
  critical_density_ = params.capacity / params.free_speed;
  if (!(critical_density_ < params.jam_density) ||
      nearly_equal(critical_density_, params.jam_density)) {
    throw DomainError("critical density must be below jam density (capacity < free_speed * jam_density)");
  }
  wave_speed_ = params.capacity / (params.jam_density - critical_density_);
}

Flow supply(const Link& link, Density x) {
  x = checked_density(link, x);
  return std::min(link.capacity(), link.wave_speed() * (link.jam_density() - x));
}

Flow demand(const Link& link, Density x) {
  x = checked_density(link, x);
  return std::min(link.free_speed() * x, link.capacity());
}

Route::Route(std::vector<Link> links) : links_(std::move(links)) {
  if (links_.empty()) throw DomainError("route must contain at least one link");
  const auto it = std::min_element(links_.begin(), links_.end(),
                                   [](const Link& a, const Link& b) { return a.capacity() < b.capacity(); });
  bottleneck_ = static_cast<std::size_t>(it - links_.begin());
  // Uniform capacity: every link admits and discharges exactly the route
  // capacity at its critical density, so the first link acts as the bottleneck.
  const bool uniform = std::all_of(links_.begin(), links_.end(),
                                   [&](const Link& l) { return nearly_equal(l.capacity(), it->capacity()); });
  if (uniform) return;
  for (std::size_t l = 0; l < links_.size(); ++l) {
    if (l != bottleneck_ && nearly_equal(links_[l].capacity(), it->capacity())) {
      throw AssumptionViolation(1, "links " + std::to_string(bottleneck_ + 1) + " and " +
                                       std::to_string(l + 1) + " share the minimum capacity");
    }
  }
}

Duration Route::free_flow_time() const noexcept {
  return std::accumulate(links_.begin(), links_.end(), 0.0,
                         [](double acc, const Link& link) { return acc + link.free_flow_time(); });
}

Duration Route::saturated_time() const noexcept {
  const Flow z = capacity();
  Duration total = 0.0;
  for (std::size_t l = 0; l < links_.size(); ++l) {
    const Link& link = links_[l];
    total += l < bottleneck_ ? link.length() * link.congested_density(z) / z : link.free_flow_time();
  }
  return total;
}

Flow route_capacity(const Route& route) noexcept { return route.capacity(); }

Flow ParallelNetwork::min_cut_capacity() const noexcept {
  return std::accumulate(routes_.begin(), routes_.end(), 0.0,
                         [](double acc, const Route& r) { return acc + r.capacity(); });
}

ParallelNetwork validate_network(std::vector<Route> routes) {
  if (routes.empty()) throw DomainError("network must contain at least one route");

  std::vector<std::size_t> order(routes.size());
  std::iota(order.begin(), order.end(), std::size_t{0});
  std::stable_sort(order.begin(), order.end(), [&](std::size_t a, std::size_t b) {
    return routes[a].free_flow_time() < routes[b].free_flow_time();
  });

  for (std::size_t i = 0; i < order.size(); ++i) {
    for (std::size_t m = i + 1; m < order.size(); ++m) {
      const Route& a = routes[order[i]];
      const Route& b = routes[order[m]];
      const auto names = "routes " + std::to_string(order[i] + 1) + " and " + std::to_string(order[m] + 1);
      if (nearly_equal(a.free_flow_time(), b.free_flow_time())) {
        throw AssumptionViolation(3, names + " have equal free-flow travel times");
      }
      if (nearly_equal(a.saturated_time(), b.saturated_time())) {
        throw AssumptionViolation(3, names + " have equal saturated travel times");
      }
    }
  }

  ParallelNetwork net;
  net.routes_.reserve(routes.size());
  for (std::size_t idx : order) net.routes_.push_back(std::move(routes[idx]));
  net.input_order_ = std::move(order);
  return net;
}

}  // namespace ctm
