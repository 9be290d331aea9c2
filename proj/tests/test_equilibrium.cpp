#define DOCTEST_CONFIG_IMPLEMENT_WITH_MAIN
#include <doctest.h>

#include <algorithm>
#include <cmath>
#include <random>

#include "ctm/equilibrium.hpp"
#include "fixtures.hpp"

using namespace ctm;
using fixtures::kMinute;

namespace {

// Two-link route: a wide approach (w = 10) of length a, then a 1000 veh/h bottleneck of length b.
Route approach_then_bottleneck(double a, double b, double bottleneck = 1000, double jam = 100) {
  return Route({Link({1500, 187.5, 40, a}), Link({bottleneck, jam, 40, b})});
}

// Route flows must be a prefix-supported capacity filling (support within 0..k, earlier routes at capacity).
void check_support_laws(const GameInstance& game, const TrafficAssignment& a) {
  const auto idx = indices(game);
  const auto& net = game.network();
  for (std::size_t p = 0; p < net.size(); ++p) {
    if (a.routing[p] == 0.0) continue;
    CHECK(p <= idx.k);
    for (std::size_t q = 0; q < p; ++q) {
      const double nominal = game.exogenous_flow() * a.routing[q];
      CHECK((nominal >= net[q].capacity() || nearly_equal(nominal, net[q].capacity(), 1e-9)));
    }
  }
}

}  // namespace

TEST_CASE("game instance validation") {
  CHECK_THROWS_AS(GameInstance(fixtures::short_first(), 0), DomainError);
  try {
    GameInstance g(fixtures::short_first(), 2600);
    FAIL("expected an assumption violation");
  } catch (const AssumptionViolation& e) {
    CHECK(e.assumption() == 2);
  }
  CHECK_NOTHROW(GameInstance(fixtures::short_first(), 2500));
}

TEST_CASE("short-first network below the first capacity") {
  const GameInstance game(fixtures::short_first(), 1000);
  const auto idx = indices(game);
  CHECK(idx.k == 0);
  CHECK(idx.U.empty());
  const auto we = wardrop(game);
  CHECK(we.kind == WardropKind::unique_fully_transferring);
  CHECK(we.assignment.routing[0] == 1.0);
  CHECK(we.assignment.routing[1] == 0.0);
  const std::vector<double> want{25, 25, 25};
  for (std::size_t l = 0; l < 3; ++l) CHECK(we.assignment.densities[0][l] == doctest::Approx(want[l]).epsilon(1e-9));
  for (double x : we.assignment.densities[1]) CHECK(x == 0.0);
  CHECK(we.common_time == doctest::Approx(3.75 * kMinute));
  CHECK(price_of_anarchy(game).value.value() == doctest::Approx(1.0));
  check_support_laws(game, we.assignment);
  CHECK(is_wardrop(game, we.assignment, 1e-9));
}

TEST_CASE("short-first network above the first capacity is partially transferring") {
  const GameInstance game(fixtures::short_first(), 1500);
  const auto idx = indices(game);
  CHECK(idx.k == 1);
  REQUIRE(idx.U.size() == 1);
  CHECK(idx.U[0] == 0);
  CHECK(idx.u == 0u);
  CHECK(idx.j == 1u);
  CHECK(game.network()[0].saturated_time() == doctest::Approx(11.25 * kMinute).epsilon(1e-9));
  CHECK(game.network()[1].free_flow_time() == doctest::Approx(12 * kMinute).epsilon(1e-9));
  const auto we = wardrop(game);
  CHECK(we.kind == WardropKind::unique_partially_transferring);
  CHECK(we.partially_transferring());
  CHECK(we.assignment.routing[0] == 1.0);
  const std::vector<double> want{87.5, 87.5, 25};
  for (std::size_t l = 0; l < 3; ++l) CHECK(we.assignment.densities[0][l] == doctest::Approx(want[l]).epsilon(1e-9));
  CHECK(we.assignment.psi() == doctest::Approx(500).epsilon(1e-9));
  CHECK(we.psi.lo == doctest::Approx(500));
  CHECK(we.common_time == doctest::Approx(11.25 * kMinute));
  CHECK_FALSE(price_of_anarchy(game).value.has_value());
  CHECK(is_wardrop(game, we.assignment, 1e-9));
  check_support_laws(game, we.assignment);
}

TEST_CASE("long-first network equilibrium, optimum and price of anarchy") {
  const GameInstance game(fixtures::long_first(), 1500);
  const auto we = wardrop(game);
  CHECK(we.kind == WardropKind::unique_fully_transferring);
  CHECK(we.assignment.routing[0] == doctest::Approx(2.0 / 3));
  CHECK(we.assignment.routing[1] == doctest::Approx(1.0 / 3));
  const std::vector<double> r1{25, 250.0 / 3, 25};
  for (std::size_t l = 0; l < 3; ++l) CHECK(we.assignment.densities[0][l] == doctest::Approx(r1[l]));
  for (double x : we.assignment.densities[1]) CHECK(x == doctest::Approx(12.5));
  CHECK(we.common_time == doctest::Approx(12 * kMinute));
  for (double r : we.residuals) CHECK(std::abs(r) < 1e-12);

  const auto so = social_optimum(game);
  CHECK(so.assignment.routing[0] == doctest::Approx(2.0 / 3));
  CHECK(so.assignment.densities[0][1] == doctest::Approx(25));
  // 1000 * 6.75 min + 500 * 12 min = 12750 veh min.
  CHECK(so.total_cost == doctest::Approx(12750 * kMinute));
  CHECK(total_cost(game.network(), we.assignment) == doctest::Approx(18000 * kMinute));
  const auto poa = price_of_anarchy(game);
  REQUIRE(poa.value.has_value());
  CHECK(std::abs(*poa.value - 24.0 / 17) <= 1e-12 * 24.0 / 17);
}

TEST_CASE("u is the member of U with the smallest saturated time") {
  // Free-flow / saturated times in minutes: 10/20, 12/15, 25/25.
  Route a = approach_then_bottleneck(8.0 / 3, 4);
  Route b = approach_then_bottleneck(0.8, 7.2);
  Route c({Link({1000, 100, 40, 50.0 / 3})});
  const GameInstance game(validate_network({a, b, c}), 2500);
  const auto idx = indices(game);
  CHECK(idx.k == 2);
  CHECK(idx.U == std::vector<std::size_t>{0, 1});
  CHECK(idx.u == 1u);
  CHECK(idx.j == 2u);
  const auto we = wardrop(game);
  CHECK(we.kind == WardropKind::unique_partially_transferring);
  CHECK(we.common_time == doctest::Approx(15 * kMinute));
  CHECK(we.assignment.psi() == doctest::Approx(500));
  const auto check = check_wardrop(game, we.assignment, 1e-9);
  CHECK(check.holds);
  CHECK(check.capacity_law_breaches.empty());
}

TEST_CASE("equal free-flow and saturated times give an interval of equilibria") {
  // Saturated time of the first route (0.1125 h) equals the free-flow time of the second.
  Route u = approach_then_bottleneck(1, 1);
  Route j = Route({Link({1500, 187.5, 40, 2.25}), Link({1200, 100, 40, 2.25})});
  SUBCASE("j = k") {
    const GameInstance game(validate_network({u, j}), 1800);
    const auto we = wardrop(game);
    CHECK(we.kind == WardropKind::interval_family);
    REQUIRE(we.family_flow);
    CHECK(we.family_flow->lo == doctest::Approx(1000));
    CHECK(we.family_flow->hi == doctest::Approx(1800));
    const auto psi = psi_bounds(we, game);
    CHECK(psi.lo == doctest::Approx(0));
    CHECK(psi.hi == doctest::Approx(800));
    CHECK(is_wardrop(game, we.assignment, 1e-9));
    check_support_laws(game, we.assignment);
    // Every member of the interval is an equilibrium.
    for (double s : {1000.0, 1200.0, 1799.0}) {
      const RoutingVector r({s / 1800, 1 - s / 1800});
      auto densities = consistent_density(game.network(), 1800, r).canonical();
      if (s == 1000.0) densities[0] = tau_inverse(game.network()[0], we.common_time).densities;
      const auto a = make_assignment(game.network(), 1800, r, densities);
      CHECK(is_wardrop(game, a, 1e-9));
    }
  }
  SUBCASE("j < k") {
    Route far({Link({1000, 100, 40, 6})});
    const GameInstance game(validate_network({u, j, far}), 2500);
    const auto idx = indices(game);
    CHECK(idx.k == 2);
    CHECK(idx.j == 1u);
    const auto we = wardrop(game);
    CHECK(we.kind == WardropKind::interval_family);
    CHECK(we.family_flow->lo == doctest::Approx(1300));
    CHECK(we.family_flow->hi == doctest::Approx(2500));
    const auto psi = psi_bounds(we, game);
    CHECK(psi.lo == doctest::Approx(300));
    CHECK(psi.hi == doctest::Approx(1500));
    CHECK(we.psi.lo == doctest::Approx(300));
    CHECK(is_wardrop(game, we.assignment, 1e-9));
  }
}

TEST_CASE("check_wardrop reports breaches") {
  const GameInstance game(fixtures::long_first(), 1500);
  const RoutingVector r({0.5, 0.5});
  const auto a = canonical_assignment(game.network(), 1500, r);
  const auto c = check_wardrop(game, a, 1e-9);
  CHECK_FALSE(c.holds);
  CHECK(c.capacity_law_breaches == std::vector<std::size_t>{1});
  auto broken = a;
  broken.densities[0][0] = 100;
  CHECK_THROWS_AS(check_wardrop(game, broken, 1e-9), DomainError);
}

TEST_CASE("simplex grid") {
  const auto g = simplex_grid(3, 4);
  CHECK(g.size() == 15);
  for (const auto& r : g) CHECK(std::accumulate(r.begin(), r.end(), 0.0) == doctest::Approx(1.0));
  CHECK(simplex_grid(1, 7).size() == 1);
}

TEST_CASE("oracle finds the closed-form equilibrium on the worked examples") {
  const GameInstance game(fixtures::long_first(), 1500);
  const auto res = oracle_wardrop(game, 1.0 / 300, 1e-6);
  REQUIRE(res.survivors.size() == 1);
  CHECK(res.survivors[0][0] == doctest::Approx(2.0 / 3));
  const GameInstance partial(fixtures::short_first(), 1500);
  const auto res2 = oracle_wardrop(partial, 1.0 / 200, 1e-6);
  REQUIRE(res2.survivors.size() == 1);
  CHECK(res2.survivors[0][0] == 1.0);
}

TEST_CASE("single-route game") {
  Route r({Link({1000, 100, 40, 1})});
  const GameInstance game(validate_network({r}), 1000);
  const auto we = wardrop(game);
  CHECK(we.assignment.routing[0] == 1.0);
  CHECK(we.assignment.psi() == doctest::Approx(0));
  CHECK(oracle_wardrop(game, 0.1, 1e-6).survivors.size() == 1);
}

TEST_CASE("random equilibria satisfy the Wardrop conditions and support laws") {
  std::mt19937_64 rng(31);
  for (int trial = 0; trial < 300; ++trial) {
    const auto game = fixtures::random_game(rng);
    const auto we = wardrop(game);
    CHECK(is_consistent(game.network(), we.assignment, 1e-9));
    CHECK(is_wardrop(game, we.assignment, 1e-9));
    for (double r : we.residuals) CHECK(std::abs(r) < 1e-9);
    check_support_laws(game, we.assignment);
    const auto psi = psi_bounds(we, game);
    CHECK(we.assignment.psi() >= psi.lo - 1e-6);
    CHECK(we.assignment.psi() <= psi.hi + 1e-6);
  }
}

TEST_CASE("social optimum beats every fully transferring grid point") {
  std::mt19937_64 rng(41);
  for (int trial = 0; trial < 20; ++trial) {
    const auto game = fixtures::random_game(rng);
    const auto so = social_optimum(game);
    for (const auto& point : simplex_grid(game.network().size(), 50)) {
      const RoutingVector r(point);
      if (!transfer_accounting(game.network(), game.exogenous_flow(), r).fully_transferring()) continue;
      const auto a = canonical_assignment(game.network(), game.exogenous_flow(), r);
      CHECK(total_cost(game.network(), a) >= so.total_cost * (1 - 1e-9));
    }
  }
}
