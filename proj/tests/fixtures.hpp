#pragma once

#include <array>
#include <random>
#include <vector>

#include "ctm/equilibrium.hpp"
#include "ctm/fundamental.hpp"

namespace fixtures {

// Two-route network used by the worked examples: route 1 has capacities
// (1500, 1500, 1000), route 2 four links at 1500; v = 40 everywhere.
inline ctm::ParallelNetwork two_route(const std::array<double, 7>& lengths) {
  auto link = [&](double cap, double jam, std::size_t i) { return ctm::Link({cap, jam, 40.0, lengths[i]}); };
  ctm::Route r1({link(1500, 187.5, 0), link(1500, 187.5, 1), link(1000, 100, 2)});
  ctm::Route r2({link(1500, 187.5, 3), link(1500, 187.5, 4), link(1500, 187.5, 5), link(1500, 187.5, 6)});
  return ctm::validate_network({r1, r2});
}

inline ctm::ParallelNetwork unit_lengths() { return two_route({1, 1, 1, 1, 1, 1, 1}); }
inline ctm::ParallelNetwork short_first() { return two_route({1, 1, 0.5, 2, 2, 2, 2}); }
inline ctm::ParallelNetwork long_first() { return two_route({1.5, 1.5, 1.5, 2, 2, 2, 2}); }

inline constexpr double kMinute = 1.0 / 60.0;

// Random link with x_c < jam, capacities drawn from a small set so ties are rare but possible.
inline ctm::Link random_link(std::mt19937_64& rng) {
  std::uniform_real_distribution<double> cap(500.0, 2500.0), speed(20.0, 120.0), len(0.2, 5.0), slack(1.5, 6.0);
  const double c = cap(rng), v = speed(rng);
  return ctm::Link({c, c / v * slack(rng), v, len(rng)});
}

// Route with a unique bottleneck (resamples until Assumption 1 holds).
inline ctm::Route random_route(std::mt19937_64& rng, std::size_t max_links = 4) {
  std::uniform_int_distribution<std::size_t> count(1, max_links);
  for (;;) {
    std::vector<ctm::Link> links;
    const std::size_t n = count(rng);
    for (std::size_t i = 0; i < n; ++i) links.push_back(random_link(rng));
    try {
      return ctm::Route(std::move(links));
    } catch (const ctm::AssumptionViolation&) {
    }
  }
}

inline ctm::ParallelNetwork random_network(std::mt19937_64& rng, std::size_t max_routes = 3, std::size_t max_links = 4) {
  std::uniform_int_distribution<std::size_t> count(1, max_routes);
  for (;;) {
    std::vector<ctm::Route> routes;
    const std::size_t n = count(rng);
    for (std::size_t i = 0; i < n; ++i) routes.push_back(random_route(rng, max_links));
    try {
      return ctm::validate_network(std::move(routes));
    } catch (const ctm::AssumptionViolation&) {
    }
  }
}

// Game with phi uniform in (0, min-cut].
inline ctm::GameInstance random_game(std::mt19937_64& rng, std::size_t max_routes = 3, std::size_t max_links = 4) {
  auto net = random_network(rng, max_routes, max_links);
  std::uniform_real_distribution<double> frac(0.02, 1.0);
  const double phi = frac(rng) * net.min_cut_capacity();
  return ctm::GameInstance(std::move(net), phi);
}

}  // namespace fixtures
