#define DOCTEST_CONFIG_IMPLEMENT_WITH_MAIN
#include <doctest.h>

#include <cmath>
#include <numeric>
#include <random>

#include "ctm/generalnet.hpp"
#include "ctm/traveltime.hpp"
#include "fixtures.hpp"

using namespace ctm;
using fixtures::kMinute;

namespace {

// Net flow into each internal node from the per-route link flows.
std::vector<double> node_imbalance(const GeneralNetwork& net, const GeneralState& st) {
  std::vector<double> balance(net.node_count(), 0.0);
  for (std::size_t l = 0; l < net.links().size(); ++l) {
    balance[net.links()[l].head] += st.flow[l];
    // Inflow of a link equals its outflow at steady state; use the outflow on both ends.
    balance[net.links()[l].tail] -= st.flow[l];
  }
  return balance;
}

}  // namespace

TEST_CASE("network validation") {
  const Link l({1000, 100, 40, 1});
  CHECK_THROWS_AS(GeneralNetwork({{l, 0, 1}, {l, 1, 0}}, 0, 1, {{0}}), DomainError);
  CHECK_THROWS_AS(GeneralNetwork({{l, 0, 1}, {l, 1, 2}}, 0, 2, {{1}}), DomainError);
  CHECK_THROWS_AS(GeneralNetwork({{l, 0, 1}, {l, 1, 2}}, 0, 2, {{0}}), DomainError);
  CHECK_THROWS_AS(GeneralNetwork({{l, 0, 1}}, 0, 1, {{3}}), DomainError);
  CHECK_THROWS_AS(GeneralNetwork({{l, 0, 0}}, 0, 1, {{0}}), DomainError);
  CHECK_NOTHROW(GeneralNetwork({{l, 0, 1}, {l, 1, 2}}, 0, 2, {{0, 1}}));
}

TEST_CASE("step above the stability bound is rejected") {
  const auto net = wheatstone();
  SteadyStateOptions opt;
  opt.step = net.cfl_bound() * 1.5;
  CHECK_THROWS_AS(steady_state(net, 1000, RoutingVector({1, 0, 0}), opt), DomainError);
  CHECK_THROWS_AS(steady_state(net, 1000, RoutingVector({1, 0})), DomainError);
}

TEST_CASE("zero demand stays empty") {
  const auto net = wheatstone();
  const auto st = steady_state(net, 0, RoutingVector({0, 1, 0}));
  CHECK(st.converged);
  for (double x : st.density) CHECK(x == 0.0);
  CHECK(st.psi == 0.0);
  const auto t = general_route_times(net, st);
  const auto free = net.free_flow_times();
  for (std::size_t r = 0; r < t.size(); ++r) CHECK(t[r] == doctest::Approx(free[r]));
}

TEST_CASE("bridge network free-flow times") {
  const auto free = wheatstone().free_flow_times();
  CHECK(free[0] == doctest::Approx(36 * kMinute));
  CHECK(free[1] == doctest::Approx(30 * kMinute));
  CHECK(free[2] == doctest::Approx(36 * kMinute));
}

TEST_CASE("bridge network at the reported routing") {
  const auto net = wheatstone();
  const auto st = steady_state(net, 1600, RoutingVector({0, 9.0 / 16, 7.0 / 16}));
  REQUIRE(st.converged);
  // The 800 veh/h shortcut backs up onto link 1 until its supply drops to 800.
  CHECK(st.density[0] == doctest::Approx(107.5).epsilon(1e-6));
  CHECK(st.density[2] == doctest::Approx(20).epsilon(1e-6));
  CHECK(st.density[3] == doctest::Approx(0).epsilon(1e-6));
  CHECK(st.density[4] == doctest::Approx(37.5).epsilon(1e-6));
  CHECK(st.admitted[1] == doctest::Approx(800).epsilon(1e-6));
  CHECK(st.admitted[2] == doctest::Approx(700).epsilon(1e-6));
  CHECK(st.psi == doctest::Approx(100).epsilon(1e-5));
  const auto t = general_route_times(net, st);
  CHECK(t[0] == doctest::Approx(88.5 * kMinute).epsilon(1e-6));
  CHECK(t[1] == doctest::Approx(82.5 * kMinute).epsilon(1e-6));
  CHECK(t[2] == doctest::Approx(36 * kMinute).epsilon(1e-6));
  const auto bal = node_imbalance(net, st);
  for (std::size_t v = 0; v < bal.size(); ++v) {
    if (v == net.origin() || v == net.destination()) continue;
    CHECK(std::abs(bal[v]) <= 1e-8 * 1600 * 10);
  }
}

TEST_CASE("light demand follows the shortest free-flow route") {
  const auto res = search_equilibrium(wheatstone(), 100, 1.0 / 8, 2 * kMinute);
  REQUIRE(res.survivors.size() == 1);
  CHECK(res.survivors[0].routing[1] == 1.0);
  CHECK(res.survivors[0].state.psi == doctest::Approx(0));
}

TEST_CASE("single-route network survives at (1)") {
  const Link l({1000, 100, 40, 1});
  const GeneralNetwork net({{l, 0, 1}}, 0, 1, {{0}});
  const auto res = search_equilibrium(net, 500, 0.5, 1e-6);
  REQUIRE(res.survivors.size() == 1);
  CHECK(res.survivors[0].routing[0] == 1.0);
  CHECK(res.evaluated == 1);
}

TEST_CASE("parallel embedding reproduces the canonical consistent density") {
  std::mt19937_64 rng(99);
  std::uniform_real_distribution<double> unit(0.0, 1.0);
  int cases = 0;
  while (cases < 100) {
    const auto net = fixtures::random_network(rng, 3, 3);
    const double phi = unit(rng) * net.min_cut_capacity();
    std::vector<double> w(net.size());
    for (auto& v : w) v = unit(rng);
    const double sum = std::accumulate(w.begin(), w.end(), 0.0);
    for (auto& v : w) v /= sum;
    w.back() = 1.0 - std::accumulate(w.begin(), w.end() - 1, 0.0);
    const RoutingVector r(w);
    // Stay clear of capacity, where the relaxation time grows without bound.
    bool near_capacity = false;
    for (std::size_t p = 0; p < net.size(); ++p) {
      near_capacity = near_capacity || std::abs(phi * r[p] / net[p].capacity() - 1) < 0.05;
    }
    if (near_capacity) continue;
    ++cases;

    const auto embedded = embed(net);
    const auto st = steady_state(embedded, phi, r);
    REQUIRE(st.converged);
    const auto canonical = consistent_density(net, phi, r).canonical();
    const auto times = general_route_times(embedded, st);
    std::size_t id = 0;
    for (std::size_t p = 0; p < net.size(); ++p) {
      for (std::size_t l = 0; l < net[p].size(); ++l, ++id) {
        CHECK(std::abs(st.density[id] - canonical[p][l]) <= 1e-5 * net[p][l].jam_density());
        CHECK(st.density[id] >= 0.0);
        CHECK(st.density[id] <= net[p][l].jam_density());
        CHECK(st.flow[id] <= net[p][l].capacity() * (1 + 1e-12));
      }
      CHECK(st.admitted[p] <= phi * r[p] * (1 + 1e-12));
      const auto a = canonical_assignment(net, phi, r);
      if (a.route_flow(p) > 0) {
        CHECK(times[p] == doctest::Approx(route_travel_time(net[p], a.densities[p], a.flows[p])).epsilon(1e-4));
      }
    }
    CHECK(st.psi >= 0.0);
    CHECK(st.psi == doctest::Approx(transfer_accounting(net, phi, r).psi).epsilon(1e-6).scale(phi));
  }
}

TEST_CASE("forward integration selects the all-free-flow member of a critical route") {
  const auto net = fixtures::long_first();
  const auto st = steady_state(embed(net), 1500, RoutingVector({2.0 / 3, 1.0 / 3}));
  REQUIRE(st.converged);
  CHECK(st.density[1] == doctest::Approx(25).epsilon(1e-6));
  const auto t = general_route_times(embed(net), st);
  CHECK(t[0] == doctest::Approx(6.75 * kMinute).epsilon(1e-6));
}
