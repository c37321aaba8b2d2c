#include <catch2/catch_amalgamated.hpp>

#include <cmath>
#include <numbers>
#include <random>
#include <set>

#include "mdr/grid.hpp"
#include "test_common.hpp"

using namespace mdr;

TEST_CASE("node_coords decodes row-major indices") {
  GridSpec g1({0.0}, {1.0}, {2});
  CHECK(node_coords(g1, 0) == std::vector<double>{0.0});
  CHECK(node_coords(g1, 1) == std::vector<double>{1.0});

  GridSpec g2({0.0, 0.0}, {1.0, 1.0}, {3, 3});
  // i = 4 -> multi-index (1, 1) with axis 0 slowest
  CHECK(node_coords(g2, 4) == std::vector<double>{0.5, 0.5});

  CHECK_THROWS_AS(node_coords(g2, 9), std::out_of_range);
}

TEST_CASE("interp_weights matches hand-computed tensor products") {
  GridSpec g1({0.0}, {1.0}, {2});
  auto row = interp_weights(g1, {0.25});
  REQUIRE(row.entries.size() == 2);
  CHECK(row.entries[0].index == 0);
  CHECK(row.entries[0].weight == 0.75);
  CHECK(row.entries[1].index == 1);
  CHECK(row.entries[1].weight == 0.25);

  // Exactly at a node: a single unit entry.
  auto at_node = interp_weights(g1, {1.0});
  REQUIRE(at_node.entries.size() == 1);
  CHECK(at_node.entries[0].index == 1);
  CHECK(at_node.entries[0].weight == 1.0);

  GridSpec g2({0.0, 0.0}, {1.0, 1.0}, {2, 2});
  auto row2 = interp_weights(g2, {0.25, 0.5});
  REQUIRE(row2.entries.size() == 4);
  // corners in (axis0, axis1) bit order: (0,0), (0,1), (1,0), (1,1)
  CHECK(row2.entries[0].index == 0);  // node (0,0)
  CHECK(row2.entries[0].weight == 0.375);
  CHECK(row2.entries[1].index == 1);  // node (0,1)
  CHECK(row2.entries[1].weight == 0.375);
  CHECK(row2.entries[2].index == 2);  // node (1,0)
  CHECK(row2.entries[2].weight == 0.125);
  CHECK(row2.entries[3].index == 3);  // node (1,1)
  CHECK(row2.entries[3].weight == 0.125);
}

TEST_CASE("interpolate: linear case, constants and clamping") {
  GridSpec g({0.0}, {1.0}, {2});
  ValueVector vals({0.0, 10.0});
  CHECK(interpolate(g, vals, {0.25}) == 2.5);

  ValueVector c(2, 7.25);
  CHECK(interpolate(g, c, {0.6180339887}) == 7.25);

  // Outside the domain of a non-periodic axis: clamped to the boundary.
  CHECK(interpolate(g, vals, {-3.0}) == 0.0);
  CHECK(interpolate(g, vals, {42.0}) == 10.0);

  CHECK_THROWS_AS(interpolate(g, ValueVector(3, 0.0), {0.5}), std::invalid_argument);
}

TEST_CASE("interp_weights invariants on random points") {
  GridSpec g({-1.0, -5.0, 0.0}, {5.0, 5.0, 2.0 * std::numbers::pi}, {7, 9, 8},
             {0, 0, 1});
  std::mt19937_64 rng(1234);
  std::uniform_real_distribution<double> dx(-2.0, 7.0), dy(-6.0, 6.0), dth(-10.0, 10.0);
  for (int trial = 0; trial < 500; ++trial) {
    std::vector<double> x{dx(rng), dy(rng), dth(rng)};
    auto row = interp_weights(g, x);
    double sum = 0.0;
    std::set<std::int64_t> seen;
    for (const auto& e : row.entries) {
      CHECK(e.weight >= 0.0);
      CHECK(e.weight <= 1.0);
      CHECK(e.index >= 0);
      CHECK(e.index < std::int64_t(g.size()));
      CHECK(seen.insert(e.index).second);  // indices distinct
      sum += e.weight;
    }
    CHECK(std::fabs(sum - 1.0) <= 1e-12);
  }
}

TEST_CASE("interpolate reproduces node values exactly and stays in range") {
  GridSpec g({-1.0, -5.0}, {5.0, 5.0}, {161, 161});
  std::mt19937_64 rng(99);
  ValueVector vals(mdrtest::random_vector(rng, g.size(), -3.0, 3.0));

  for (std::size_t i = 0; i < g.size(); i += 997) {
    CHECK(interpolate(g, vals, node_coords(g, i)) == vals[i]);
  }

  double lo = vals[0], hi = vals[0];
  for (double v : vals) {
    lo = std::min(lo, v);
    hi = std::max(hi, v);
  }
  std::uniform_real_distribution<double> dx(-1.5, 5.5), dy(-5.5, 5.5);
  for (int trial = 0; trial < 300; ++trial) {
    const double v = interpolate(g, vals, {dx(rng), dy(rng)});
    CHECK(v >= lo - 1e-12);
    CHECK(v <= hi + 1e-12);
  }
}

TEST_CASE("periodic axes wrap seamlessly") {
  // Power-of-two period so that x + period is exactly representable: the
  // wrapped coordinate, and hence the value, must match bit for bit.
  GridSpec g({0.0}, {4.0}, {8}, {1});
  std::mt19937_64 rng(7);
  ValueVector vals(mdrtest::random_vector(rng, g.size(), -1.0, 1.0));
  for (int k = 0; k < 200; ++k) {
    const double x = double(k) / 50.0;  // dyadic in [0, 4)
    CHECK(interpolate(g, vals, {x}) == interpolate(g, vals, {x + 4.0}));
    CHECK(interpolate(g, vals, {x}) == interpolate(g, vals, {x - 4.0}));
  }

  // A cell spanning the seam mixes the last and first node.
  GridSpec g2({0.0}, {2.0 * std::numbers::pi}, {4}, {1});
  ValueVector vv({10.0, 0.0, 0.0, 20.0});
  const double seam = 2.0 * std::numbers::pi - 0.25 * g2.spacing(0);
  const double v = interpolate(g2, vv, {seam});
  CHECK(v == Catch::Approx(0.75 * 20.0 + 0.25 * 10.0).margin(1e-12));

  // Node values on the periodic axis reproduce exactly as well.
  for (std::size_t i = 0; i < g2.size(); ++i)
    CHECK(interpolate(g2, vv, node_coords(g2, i)) == vv[i]);
}

TEST_CASE("coarsen halves resolution, keeping endpoints") {
  GridSpec fine({-1.0, -5.0}, {5.0, 5.0}, {161, 161});
  GridSpec coarse = coarsen(fine);
  CHECK(coarse.nodes(0) == 81);
  CHECK(coarse.nodes(1) == 81);
  CHECK(coarse.same_domain(fine));

  GridSpec pe({-6.0, -10.0, 0.0}, {20.0, 10.0, 2.0 * std::numbers::pi}, {41, 41, 41},
              {0, 0, 1});
  GridSpec pec = coarsen(pe);
  CHECK(pec.nodes(0) == 21);
  CHECK(pec.nodes(1) == 21);
  CHECK(pec.nodes(2) == 20);

  GridSpec tiny({0.0, 0.0}, {1.0, 1.0}, {2, 2});
  CHECK_THROWS_AS(coarsen(tiny), std::invalid_argument);
}

TEST_CASE("prolong interpolates coarse solutions onto fine grids") {
  GridSpec coarse({0.0}, {1.0}, {2});
  GridSpec fine({0.0}, {1.0}, {3});

  ValueVector constant(coarse.size(), 3.5);
  ValueVector pc = prolong(constant, coarse, fine);
  for (std::size_t i = 0; i < fine.size(); ++i) CHECK(pc[i] == 3.5);

  ValueVector ramp({0.0, 2.0});
  ValueVector pr = prolong(ramp, coarse, fine);
  CHECK(pr.v == std::vector<double>{0.0, 1.0, 2.0});

  // Coincident nodes (odd refinement) reproduce coarse values exactly.
  GridSpec c5({-1.0}, {3.0}, {5});
  GridSpec f9({-1.0}, {3.0}, {9});
  std::mt19937_64 rng(5);
  ValueVector cv(mdrtest::random_vector(rng, c5.size(), -2.0, 2.0));
  ValueVector fv = prolong(cv, c5, f9);
  for (std::size_t i = 0; i < c5.size(); ++i) CHECK(fv[2 * i] == cv[i]);

  GridSpec other({0.0}, {2.0}, {3});
  CHECK_THROWS_AS(prolong(ramp, coarse, other), std::invalid_argument);
}
