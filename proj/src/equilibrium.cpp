#include "ctm/equilibrium.hpp"

#include <algorithm>
#include <cmath>
#include <functional>
#include <limits>
#include <numeric>

namespace ctm {

GameInstance::GameInstance(ParallelNetwork network, Flow exogenous_flow)
    : network_(std::move(network)), phi_(exogenous_flow) {
  if (!std::isfinite(phi_) || phi_ <= 0.0) throw DomainError("exogenous flow must be positive and finite");
  const Flow cut = network_.min_cut_capacity();
  if (phi_ > cut && !nearly_equal(phi_, cut)) {
    throw AssumptionViolation(2, "exogenous flow " + std::to_string(phi_) + " exceeds the min-cut capacity " +
                                     std::to_string(cut));
  }
}

const char* to_string(WardropKind kind) noexcept {
  switch (kind) {
    case WardropKind::unique_fully_transferring: return "fully-transferring";
    case WardropKind::unique_partially_transferring: return "partially-transferring";
    case WardropKind::interval_family: return "interval-family";
  }
  return "?";
}

bool WardropSolution::partially_transferring() const noexcept {
  return psi.lo > kRelTol * std::max(1.0, assignment.exogenous_flow);
}

namespace {

// phi - sum_{p <= last} z_p <= 0, with phi within kRelTol of the sum counting as covered.
bool covers(Flow phi, Flow capacity_sum) { return phi <= capacity_sum || nearly_equal(phi, capacity_sum); }

bool at_most(double a, double b) { return a <= b || nearly_equal(a, b); }

}  // namespace

EquilibriumIndices indices(const GameInstance& game) {
  const ParallelNetwork& net = game.network();
  const Flow phi = game.exogenous_flow();
  const std::size_t n = net.size();

  EquilibriumIndices idx;
  Flow covered = 0.0;
  idx.k = n - 1;
  for (std::size_t p = 0; p < n; ++p) {
    covered += net[p].capacity();
    if (covers(phi, covered)) {
      idx.k = p;
      break;
    }
  }

  // tau_F is increasing, so "tau_p^S <= tau_q^F for some q in (p, k]" reduces to q = k.
  const Duration limit = net[idx.k].free_flow_time();
  for (std::size_t p = 0; p < idx.k; ++p) {
    if (at_most(net[p].saturated_time(), limit)) idx.U.push_back(p);
  }
  if (idx.U.empty()) return idx;

  idx.u = *std::min_element(idx.U.begin(), idx.U.end(), [&](std::size_t a, std::size_t b) {
    return net[a].saturated_time() < net[b].saturated_time();
  });
  const Duration saturated_u = net[*idx.u].saturated_time();
  for (std::size_t p = *idx.u + 1; p <= idx.k; ++p) {
    if (at_most(saturated_u, net[p].free_flow_time())) {
      idx.j = p;
      break;
    }
  }
  return idx;
}

namespace {

struct Prescription {
  std::vector<Flow> flows;
  std::vector<std::vector<Density>> densities;
  std::vector<Duration> residuals;
};

// Routes 0..last-1 (and `extra`, if set) carry their flow at the given common time.
Prescription prescribe(const ParallelNetwork& net, std::vector<Flow> flows, Duration common_time,
                       std::size_t first_free_route, FrontierBound bound) {
  Prescription out;
  out.residuals.assign(net.size(), 0.0);
  for (std::size_t p = 0; p < net.size(); ++p) {
    const Route& route = net[p];
    if (p < first_free_route && at_most(route.capacity(), flows[p])) {
      // Loaded to capacity or beyond: the time selects the member of the consistent family.
      if (classify(flows[p], route.capacity()) == RouteClass::saturated) {
        out.densities.push_back(consistent_route_family(route, flows[p], bound).canonical);
        out.residuals[p] = common_time - route.saturated_time();
      } else {
        auto inv = tau_inverse(route, common_time, InverseMode::nearest, bound);
        out.residuals[p] = inv.residual;
        out.densities.push_back(std::move(inv.densities));
      }
    } else {
      out.densities.push_back(consistent_route_family(route, flows[p], bound).canonical);
    }
  }
  out.flows = std::move(flows);
  return out;
}

RoutingVector to_routing(const std::vector<Flow>& flows, Flow phi) {
  std::vector<double> ratios(flows.size());
  for (std::size_t p = 0; p < flows.size(); ++p) ratios[p] = flows[p] / phi;
  // Absorb rounding so the ratios sum to one.
  const double sum = std::accumulate(ratios.begin(), ratios.end(), 0.0);
  const auto largest = std::max_element(ratios.begin(), ratios.end());
  *largest += 1.0 - sum;
  return RoutingVector(std::move(ratios));
}

}  // namespace

WardropSolution wardrop(const GameInstance& game, FrontierBound bound) {
  const ParallelNetwork& net = game.network();
  const Flow phi = game.exogenous_flow();
  const std::size_t n = net.size();

  WardropSolution sol;
  sol.indices = indices(game);
  const EquilibriumIndices& idx = sol.indices;

  std::vector<Flow> flows(n, 0.0);
  std::size_t first_free = 0;

  if (!idx.u) {
    Flow assigned = 0.0;
    for (std::size_t p = 0; p < idx.k; ++p) {
      flows[p] = net[p].capacity();
      assigned += flows[p];
    }
    flows[idx.k] = phi - assigned;
    first_free = idx.k;
    sol.kind = WardropKind::unique_fully_transferring;
    sol.common_time = net[idx.k].free_flow_time();
    sol.psi = {0.0, 0.0};
  } else {
    const std::size_t u = *idx.u;
    const std::size_t j = *idx.j;
    Flow others = 0.0;  // sum_{p < j, p != u} z_p
    for (std::size_t p = 0; p < j; ++p) {
      if (p == u) continue;
      flows[p] = net[p].capacity();
      others += flows[p];
    }
    first_free = j;
    sol.common_time = net[u].saturated_time();
    const Flow upper = phi - others;
    if (!nearly_equal(net[j].free_flow_time(), net[u].saturated_time())) {
      flows[u] = upper;
      sol.kind = WardropKind::unique_partially_transferring;
      sol.psi = {upper - net[u].capacity(), upper - net[u].capacity()};
    } else {
      // Below z_u route u would run in free flow, faster than route j.
      const Flow lower = std::max(net[u].capacity(), upper - net[j].capacity());
      flows[u] = lower;
      flows[j] = upper - lower;
      sol.kind = WardropKind::interval_family;
      sol.family_flow = FlowInterval{lower, upper};
      sol.psi = {lower - net[u].capacity(), upper - net[u].capacity()};
    }
  }

  Prescription pr = prescribe(net, flows, sol.common_time, first_free, bound);
  sol.residuals = std::move(pr.residuals);
  sol.assignment = make_assignment(net, phi, to_routing(pr.flows, phi), std::move(pr.densities));
  return sol;
}

FlowInterval psi_bounds(const WardropSolution& solution, const GameInstance& game) {
  const ParallelNetwork& net = game.network();
  const Flow phi = game.exogenous_flow();
  const EquilibriumIndices& idx = solution.indices;
  if (!idx.u) return {0.0, 0.0};

  Flow before_j = 0.0;
  for (std::size_t p = 0; p < *idx.j; ++p) before_j += net[p].capacity();
  const Flow hi = phi - before_j;
  if (solution.kind == WardropKind::unique_partially_transferring) return {hi, hi};
  if (*idx.j < idx.k) return {hi - net[*idx.j].capacity(), hi};
  return {0.0, hi};
}

double total_cost(const ParallelNetwork& net, const TrafficAssignment& assignment) {
  double cost = 0.0;
  for (std::size_t p = 0; p < net.size(); ++p) {
    const Flow f = assignment.route_flow(p);
    if (f > 0.0) cost += f * route_travel_time(net[p], assignment.densities[p], assignment.flows[p]);
  }
  return cost;
}

WardropCheck check_wardrop(const GameInstance& game, const TrafficAssignment& assignment, Duration eps) {
  const ParallelNetwork& net = game.network();
  if (!is_consistent(net, assignment)) throw DomainError("assignment is not consistent");

  WardropCheck check;
  const std::size_t n = net.size();
  const EquilibriumIndices idx = indices(game);
  const Flow phi = assignment.exogenous_flow;

  Duration fastest = kInfiniteTime;
  Duration slowest_used = -kInfiniteTime;
  for (std::size_t p = 0; p < n; ++p) {
    const bool used = assignment.routing[p] > 0.0;
    const Duration t = used ? route_travel_time(net[p], assignment.densities[p], assignment.flows[p])
                            : net[p].free_flow_time();
    check.route_times.push_back(t);
    fastest = std::min(fastest, t);
    if (!used) continue;
    slowest_used = std::max(slowest_used, t);
    if (p > idx.k) check.support_beyond_k = true;
    for (std::size_t q = 0; q < p; ++q) {
      const Flow nominal = phi * assignment.routing[q];
      if (nominal < net[q].capacity() && !nearly_equal(nominal, net[q].capacity())) {
        check.capacity_law_breaches.push_back(p);
        break;
      }
    }
  }
  check.violation = slowest_used - fastest;
  check.holds = check.violation <= eps;
  return check;
}

bool is_wardrop(const GameInstance& game, const TrafficAssignment& assignment, Duration eps) {
  return check_wardrop(game, assignment, eps).holds;
}

SocialOptimum social_optimum(const GameInstance& game) {
  const ParallelNetwork& net = game.network();
  const Flow phi = game.exogenous_flow();
  const std::size_t k = indices(game).k;

  std::vector<Flow> flows(net.size(), 0.0);
  Flow assigned = 0.0;
  for (std::size_t p = 0; p < k; ++p) {
    flows[p] = net[p].capacity();
    assigned += flows[p];
  }
  flows[k] = phi - assigned;

  std::vector<std::vector<Density>> densities;
  for (std::size_t p = 0; p < net.size(); ++p) {
    std::vector<Density> x(net[p].size());
    for (std::size_t l = 0; l < x.size(); ++l) x[l] = net[p][l].free_flow_density(flows[p]);
    densities.push_back(std::move(x));
  }
  SocialOptimum so{make_assignment(net, phi, to_routing(flows, phi), std::move(densities)), 0.0};
  so.total_cost = total_cost(net, so.assignment);
  return so;
}

PriceOfAnarchy price_of_anarchy(const GameInstance& game) {
  const WardropSolution we = wardrop(game);
  if (we.partially_transferring()) {
    return {std::nullopt,
            "undefined: the equilibrium is partially transferring and moves less flow than the social optimum"};
  }
  const ParallelNetwork& net = game.network();
  const Flow phi = game.exogenous_flow();
  const std::size_t k = we.indices.k;
  const Duration tk = net[k].free_flow_time();
  Flow assigned = 0.0;
  double optimum = 0.0;
  for (std::size_t p = 0; p < k; ++p) {
    assigned += net[p].capacity();
    optimum += net[p].capacity() * net[p].free_flow_time();
  }
  optimum += (phi - assigned) * tk;
  return {phi * tk / optimum, ""};
}

namespace {

void visit_simplex(std::size_t routes, std::size_t divisions,
                   const std::function<void(const std::vector<std::size_t>&)>& visit) {
  std::vector<std::size_t> counts(routes, 0);
  std::function<void(std::size_t, std::size_t)> rec = [&](std::size_t pos, std::size_t left) {
    if (pos + 1 == routes) {
      counts[pos] = left;
      visit(counts);
      return;
    }
    for (std::size_t c = 0; c <= left; ++c) {
      counts[pos] = c;
      rec(pos + 1, left - c);
    }
  };
  rec(0, divisions);
}

std::size_t divisions_for(double resolution) {
  if (!(resolution > 0.0) || resolution > 1.0) throw DomainError("grid resolution must be in (0, 1]");
  return static_cast<std::size_t>(std::llround(1.0 / resolution));
}

// Times route p can take at a grid point.
std::vector<TimeInterval> time_set(const Route& route, const RouteTimeBounds& bounds, Flow nominal, Flow half_step) {
  if (nominal == 0.0 || nominal < route.capacity() - half_step) {
    return {{bounds.free_flow_time, bounds.free_flow_time, std::nullopt}};
  }
  if (nominal > route.capacity() + half_step) return {{bounds.max_time, bounds.max_time, std::nullopt}};
  return bounds.attainable;
}

double distance(Duration t, const std::vector<TimeInterval>& set) {
  double best = kInfiniteTime;
  for (const auto& iv : set) best = std::min(best, t < iv.lo ? iv.lo - t : (t > iv.hi ? t - iv.hi : 0.0));
  return best;
}

}  // namespace

std::vector<std::vector<double>> simplex_grid(std::size_t routes, std::size_t divisions) {
  std::vector<std::vector<double>> points;
  visit_simplex(routes, divisions, [&](const std::vector<std::size_t>& counts) {
    std::vector<double> r(counts.size());
    for (std::size_t p = 0; p < counts.size(); ++p) r[p] = static_cast<double>(counts[p]) / divisions;
    points.push_back(std::move(r));
  });
  return points;
}

OracleResult oracle_wardrop(const GameInstance& game, double resolution, Duration eps) {
  const ParallelNetwork& net = game.network();
  const Flow phi = game.exogenous_flow();
  const std::size_t n = net.size();
  const std::size_t m = divisions_for(resolution);
  const Flow half_step = 0.5 * phi / static_cast<double>(m) * (1 + 1e-9);

  std::vector<RouteTimeBounds> bounds;
  Flow smallest = kInfiniteTime;
  for (const Route& r : net.routes()) {
    bounds.push_back(route_time_bounds(r, FrontierBound::free_flow));
    smallest = std::min(smallest, r.capacity());
  }

  OracleResult result;
  result.coarse_grid = phi / static_cast<double>(m) > smallest;

  std::vector<std::vector<TimeInterval>> sets(n);
  visit_simplex(n, m, [&](const std::vector<std::size_t>& counts) {
    ++result.evaluated;
    std::vector<Duration> candidates;
    Duration ceiling = kInfiniteTime;  // unused routes cap the common time
    for (std::size_t p = 0; p < n; ++p) {
      const Flow nominal = phi * static_cast<double>(counts[p]) / static_cast<double>(m);
      sets[p] = time_set(net[p], bounds[p], nominal, half_step);
      if (counts[p] == 0) {
        ceiling = std::min(ceiling, bounds[p].free_flow_time);
        continue;
      }
      for (const auto& iv : sets[p]) {
        for (Duration t : {iv.lo, iv.hi, iv.lo - eps, iv.lo + eps, iv.hi - eps, iv.hi + eps}) {
          candidates.push_back(t);
        }
      }
    }
    for (Duration t : candidates) {
      if (t > ceiling + eps) continue;
      bool ok = true;
      for (std::size_t p = 0; p < n && ok; ++p) {
        if (counts[p] > 0) ok = distance(t, sets[p]) <= eps;
      }
      if (ok) {
        std::vector<double> r(n);
        for (std::size_t p = 0; p < n; ++p) r[p] = static_cast<double>(counts[p]) / static_cast<double>(m);
        result.survivors.emplace_back(std::move(r));
        return;
      }
    }
  });
  return result;
}

}  // namespace ctm
