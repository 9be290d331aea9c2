#include "ctm/generalnet.hpp"

#include <algorithm>
#include <cmath>
#include <limits>
#include <numeric>
#include <string>
#include <thread>

#include "ctm/equilibrium.hpp"
#include "ctm/traveltime.hpp"

namespace ctm {

GeneralNetwork::GeneralNetwork(std::vector<GeneralLink> links, std::size_t origin, std::size_t destination,
                               std::vector<std::vector<std::size_t>> routes)
    : links_(std::move(links)), origin_(origin), destination_(destination), routes_(std::move(routes)) {
  if (links_.empty()) throw DomainError("network has no links");
  if (routes_.empty()) throw DomainError("network has no routes");
  if (origin_ == destination_) throw DomainError("origin and destination coincide");
  for (const auto& l : links_) nodes_ = std::max({nodes_, l.tail + 1, l.head + 1});
  if (origin_ >= nodes_ || destination_ >= nodes_) throw DomainError("origin or destination is not a link endpoint");

  // Kahn's algorithm.
  std::vector<std::size_t> indegree(nodes_, 0);
  std::vector<std::vector<std::size_t>> out(nodes_);
  for (const auto& l : links_) {
    if (l.tail == l.head) throw DomainError("self-loop link");
    ++indegree[l.head];
    out[l.tail].push_back(l.head);
  }
  std::vector<std::size_t> ready;
  for (std::size_t v = 0; v < nodes_; ++v)
    if (indegree[v] == 0) ready.push_back(v);
  std::size_t seen = 0;
  while (!ready.empty()) {
    const std::size_t v = ready.back();
    ready.pop_back();
    ++seen;
    for (std::size_t w : out[v])
      if (--indegree[w] == 0) ready.push_back(w);
  }
  if (seen != nodes_) throw DomainError("network contains a cycle");

  for (std::size_t r = 0; r < routes_.size(); ++r) {
    const auto& route = routes_[r];
    const std::string name = "route " + std::to_string(r + 1);
    if (route.empty()) throw DomainError(name + " is empty");
    std::vector<bool> visited(nodes_, false);
    std::size_t at = origin_;
    visited[at] = true;
    for (std::size_t id : route) {
      if (id >= links_.size()) throw DomainError(name + " references an unknown link");
      if (links_[id].tail != at) throw DomainError(name + " is not a connected path from the origin");
      at = links_[id].head;
      if (visited[at]) throw DomainError(name + " revisits a node");
      visited[at] = true;
    }
    if (at != destination_) throw DomainError(name + " does not end at the destination");
  }
}

Duration GeneralNetwork::cfl_bound() const noexcept {
  Duration bound = std::numeric_limits<Duration>::infinity();
  for (const auto& l : links_) {
    bound = std::min(bound, l.link.length() / std::max(l.link.free_speed(), l.link.wave_speed()));
  }
  return bound;
}

std::vector<Duration> GeneralNetwork::free_flow_times() const {
  std::vector<Duration> times;
  for (const auto& route : routes_) {
    Duration t = 0.0;
    for (std::size_t id : route) t += links_[id].link.free_flow_time();
    times.push_back(t);
  }
  return times;
}

GeneralNetwork embed(const ParallelNetwork& net) {
  std::vector<GeneralLink> links;
  std::vector<std::vector<std::size_t>> routes;
  std::size_t next_node = 2;
  for (const Route& route : net.routes()) {
    std::vector<std::size_t> ids;
    for (std::size_t l = 0; l < route.size(); ++l) {
      const std::size_t tail = l == 0 ? 0 : next_node - 1;
      const std::size_t head = l + 1 == route.size() ? 1 : next_node++;
      ids.push_back(links.size());
      links.push_back({route[l], tail, head});
    }
    routes.push_back(std::move(ids));
  }
  return GeneralNetwork(std::move(links), 0, 1, std::move(routes));
}

GeneralNetwork wheatstone() {
  enum Node : std::size_t { O, A, B, D };
  auto link = [](Flow cap, Density jam, Distance len) { return Link({cap, jam, 40.0, len}); };
  std::vector<GeneralLink> links{
      {link(1500, 187.5, 8), O, A},  {link(1500, 187.5, 16), O, B}, {link(800, 100, 4), A, B},
      {link(1500, 187.5, 16), A, D}, {link(1500, 187.5, 8), B, D},
  };
  return GeneralNetwork(std::move(links), O, D, {{0, 3}, {0, 2, 4}, {1, 4}});
}

GeneralState steady_state(const GeneralNetwork& net, Flow phi, const RoutingVector& routing,
                          const SteadyStateOptions& options) {
  const auto& links = net.links();
  const auto& routes = net.routes();
  const std::size_t nl = links.size();
  const std::size_t nr = routes.size();
  if (routing.size() != nr) throw DomainError("routing vector size does not match the number of routes");
  if (!(phi >= 0.0)) throw DomainError("exogenous flow must be non-negative");

  const Duration bound = net.cfl_bound();
  const Duration dt = options.step > 0.0 ? options.step : 0.5 * bound;
  if (dt > bound * (1 + 1e-12)) throw DomainError("time step violates the CFL bound");

  // next_link[r][l]: link after l on route r (nl = exit, only meaningful where r uses l).
  std::vector<std::vector<std::size_t>> next_link(nr, std::vector<std::size_t>(nl, nl));
  for (std::size_t r = 0; r < nr; ++r) {
    for (std::size_t i = 0; i < routes[r].size(); ++i) {
      next_link[r][routes[r][i]] = i + 1 < routes[r].size() ? routes[r][i + 1] : nl;
    }
  }

  GeneralState st;
  st.route_share.assign(nl, std::vector<Density>(nr, 0.0));
  st.density.assign(nl, 0.0);
  st.flow.assign(nl, 0.0);
  st.admitted.assign(nr, 0.0);

  std::vector<Flow> request(nl);
  std::vector<double> scale(nl + 1);
  std::vector<std::vector<Flow>> out_flow(nl, std::vector<Flow>(nr));
  std::vector<std::vector<Flow>> in_flow(nl, std::vector<Flow>(nr));

  for (std::size_t step = 0; step < options.max_steps; ++step) {
    std::fill(request.begin(), request.end(), 0.0);
    for (std::size_t l = 0; l < nl; ++l) {
      const Link& link = links[l].link;
      const Flow d = demand(link, st.density[l]);
      for (std::size_t r = 0; r < nr; ++r) {
        const Flow want = st.density[l] > 0.0 ? d * st.route_share[l][r] / st.density[l] : 0.0;
        out_flow[l][r] = want;
        if (next_link[r][l] < nl) request[next_link[r][l]] += want;
      }
    }
    for (std::size_t r = 0; r < nr; ++r) request[routes[r].front()] += phi * routing[r];

    for (std::size_t l = 0; l < nl; ++l) {
      const Flow s = supply(links[l].link, st.density[l]);
      scale[l] = request[l] > s ? s / request[l] : 1.0;
    }
    scale[nl] = 1.0;

    for (auto& v : in_flow) std::fill(v.begin(), v.end(), 0.0);
    for (std::size_t l = 0; l < nl; ++l) {
      for (std::size_t r = 0; r < nr; ++r) {
        if (out_flow[l][r] == 0.0) continue;
        const std::size_t to = next_link[r][l];
        out_flow[l][r] *= scale[to];
        if (to < nl) in_flow[to][r] += out_flow[l][r];
      }
    }
    for (std::size_t r = 0; r < nr; ++r) {
      const std::size_t first = routes[r].front();
      st.admitted[r] = phi * routing[r] * scale[first];
      in_flow[first][r] += st.admitted[r];
    }

    double change = 0.0;
    for (std::size_t l = 0; l < nl; ++l) {
      const Link& link = links[l].link;
      Density total = 0.0;
      Flow outflow = 0.0;
      for (std::size_t r = 0; r < nr; ++r) {
        Density& x = st.route_share[l][r];
        x = std::max(0.0, x + dt / link.length() * (in_flow[l][r] - out_flow[l][r]));
        total += x;
        outflow += out_flow[l][r];
      }
      if (total > link.jam_density()) {
        for (auto& x : st.route_share[l]) x *= link.jam_density() / total;
        total = link.jam_density();
      }
      change = std::max(change, std::abs(total - st.density[l]) / link.jam_density());
      st.density[l] = total;
      st.flow[l] = outflow;
    }
    st.steps = step + 1;
    if (change <= options.tol) {
      st.converged = true;
      break;
    }
  }

  st.psi = std::max(0.0, phi - std::accumulate(st.admitted.begin(), st.admitted.end(), 0.0));
  return st;
}

std::vector<Duration> general_route_times(const GeneralNetwork& net, const GeneralState& state) {
  std::vector<Duration> times;
  for (const auto& route : net.routes()) {
    Duration t = 0.0;
    for (std::size_t id : route) t += link_travel_time(net.links()[id].link, state.density[id], state.flow[id]);
    times.push_back(t);
  }
  return times;
}

namespace {

EquilibriumCandidate evaluate(const GeneralNetwork& net, Flow phi, RoutingVector routing,
                              const SteadyStateOptions& options) {
  GeneralState state = steady_state(net, phi, routing, options);
  auto times = general_route_times(net, state);
  const Duration fastest = *std::min_element(times.begin(), times.end());
  Duration slowest_used = fastest;
  for (std::size_t r = 0; r < times.size(); ++r) {
    if (routing[r] > 0.0) slowest_used = std::max(slowest_used, times[r]);
  }
  return {std::move(routing), std::move(state), std::move(times), slowest_used - fastest};
}

}  // namespace

SearchResult search_equilibrium(const GeneralNetwork& net, Flow phi, double resolution, Duration eps,
                                const SteadyStateOptions& options) {
  if (!(resolution > 0.0) || resolution > 1.0) throw DomainError("grid resolution must be in (0, 1]");
  const auto divisions = static_cast<std::size_t>(std::llround(1.0 / resolution));
  const auto grid = simplex_grid(net.routes().size(), divisions);

  std::vector<std::optional<EquilibriumCandidate>> results(grid.size());
  const std::size_t workers = std::max(1u, std::min(std::thread::hardware_concurrency(), 16u));
  {
    std::vector<std::jthread> pool;
    for (std::size_t w = 0; w < workers; ++w) {
      pool.emplace_back([&, w] {
        for (std::size_t i = w; i < grid.size(); i += workers) {
          results[i] = evaluate(net, phi, RoutingVector(grid[i]), options);
        }
      });
    }
  }

  SearchResult out;
  out.evaluated = grid.size();
  for (auto& res : results) {
    if (!res->state.converged) ++out.unconverged;
    if (!out.best || res->violation < out.best->violation) out.best = *res;
    if (res->violation <= eps) out.survivors.push_back(std::move(*res));
  }
  std::stable_sort(out.survivors.begin(), out.survivors.end(),
                   [](const EquilibriumCandidate& a, const EquilibriumCandidate& b) {
                     if (a.violation != b.violation) return a.violation < b.violation;
                     return a.state.psi < b.state.psi;
                   });
  return out;
}

}  // namespace ctm
