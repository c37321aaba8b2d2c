#include <catch2/catch_amalgamated.hpp>

#include <cmath>
#include <random>

#include "mdr/solver.hpp"
#include "mdr/tdlearn.hpp"
#include "test_common.hpp"

using namespace mdr;
using mdrtest::ChainFixture;

namespace {

double chain_h(const std::vector<double>& x) {
  // piecewise-linear interpolant of h = (-1, -3) on the unit chain
  return -1.0 + x[0] * (-3.0 - -1.0);
}

std::vector<Transition> chain_samples() {
  // Exhaustive on-node transitions of the unit-drift chain (dt = 1).
  return {{{0.0}, {1.0}, 1.0}, {{1.0}, {1.0}, 1.0}};
}

}  // namespace

TEST_CASE("td_update_mdr: scalar arithmetic at a node") {
  GridSpec g({0.0}, {1.0}, {2});
  std::vector<double> theta{-1.0, -3.0};
  Transition sample{{0.0}, {1.0}, 1.0};
  td_update_mdr(g, theta, sample, chain_h, 0.9, 0.5);
  // target = min(-1, 0.9*-3) = -2.7; delta = -1.7; theta_0 += 0.5*(-1.7)
  CHECK(theta[0] == Catch::Approx(-1.85).margin(1e-12));
  CHECK(theta[1] == -3.0);
}

TEST_CASE("td_update_mdr: the fixed point and a zero step size are inert") {
  GridSpec g({0.0}, {1.0}, {2});
  std::vector<double> fixed{-2.7, -3.0};
  for (const auto& s : chain_samples()) {
    std::vector<double> theta = fixed;
    td_update_mdr(g, theta, s, chain_h, 0.9, 1.0);
    CHECK(theta[0] == Catch::Approx(fixed[0]).margin(1e-12));
    CHECK(theta[1] == Catch::Approx(fixed[1]).margin(1e-12));
  }
  std::vector<double> theta{-0.4, -2.2};
  const std::vector<double> before = theta;
  td_update_mdr(g, theta, chain_samples()[0], chain_h, 0.9, 0.0);
  CHECK(theta == before);
}

TEST_CASE("td_update_sdr: self-loop geometric fixed point") {
  GridSpec g({0.0}, {1.0}, {2});
  auto r_one = [](const std::vector<double>&) { return 1.0; };
  Transition self{{0.0}, {0.0}, 1.0};

  std::vector<double> theta{0.0, 0.0};
  td_update_sdr(g, theta, self, r_one, 0.9, 1.0);
  CHECK(theta[0] == 1.0);  // one exact update: dt*r + gamma*0

  std::vector<double> at_fixed{10.0, 0.0};
  td_update_sdr(g, at_fixed, self, r_one, 0.9, 1.0);
  CHECK(at_fixed[0] == Catch::Approx(10.0).margin(1e-12));

  std::vector<double> zeros{0.0, 0.0};
  td_update_sdr(g, zeros, self, [](const std::vector<double>&) { return 0.0; }, 0.9,
                1.0);
  CHECK(zeros == std::vector<double>{0.0, 0.0});
}

TEST_CASE("rollout generates clamped Euler transitions") {
  GridSpec g({-1.0, -5.0}, {5.0, 5.0}, {7, 11});
  SECTION("stationary system repeats the start state") {
    GridSpec g1({0.0}, {1.0}, {2});
    Chain1D still(0.0);
    auto ts = rollout(still, [](const std::vector<double>&) { return 1.0; }, {0.25},
                      0.5, 3, g1);
    REQUIRE(ts.size() == 3);
    for (const auto& t : ts) {
      CHECK(t.x == std::vector<double>{0.25});
      CHECK(t.x_next == std::vector<double>{0.25});
    }
  }
  SECTION("double integrator with zero control") {
    DoubleIntegrator di(2.0);
    auto ts = rollout(di, [](const std::vector<double>&) { return 0.0; }, {0.0, 1.0},
                      0.1, 2, g);
    REQUIRE(ts.size() == 2);
    CHECK(ts[0].x == std::vector<double>{0.0, 1.0});
    CHECK(ts[0].x_next[0] == Catch::Approx(0.1).margin(1e-15));
    CHECK(ts[0].x_next[1] == 1.0);
    CHECK(ts[1].x == ts[0].x_next);
    CHECK(ts[1].x_next[0] == Catch::Approx(0.2).margin(1e-15));
  }
  SECTION("zero horizon") {
    DoubleIntegrator di(2.0);
    CHECK(rollout(di, [](const std::vector<double>&) { return 0.0; }, {0.0, 0.0}, 0.1,
                  0, g)
              .empty());
  }
}

TEST_CASE("td_train converges to the policy-evaluation fixed point") {
  ChainFixture fx(0.9);
  SolverConfig cfg;
  cfg.epsilon = 1e-10;
  PolicyPair only{{0, 0}, {}};
  PolicyBackupOp op(fx.table, fx.h, only);
  auto [u_pi, report] = value_iteration(op, fx.h, cfg, "policy-evaluation");
  REQUIRE(report.converged);

  TDConfig td;
  td.gamma = 0.9;
  td.passes = 500;
  td.schedule = TDConfig::Alpha::visit_decay;

  auto result = td_train(fx.grid, chain_samples(), chain_h, td,
                         std::vector<double>{-1.0, -3.0}, &u_pi.v);
  CHECK(inf_norm_diff(result.theta, u_pi.v) <= 0.01);
  REQUIRE(result.curve.size() == 500);
  CHECK(result.curve.back() <= 0.01);

  SECTION("zero passes return theta0 untouched") {
    TDConfig none = td;
    none.passes = 0;
    auto r0 = td_train(fx.grid, chain_samples(), chain_h, none,
                       std::vector<double>{-1.0, -3.0});
    CHECK(r0.theta == std::vector<double>{-1.0, -3.0});
    CHECK(r0.curve.empty());
  }
  SECTION("shuffled and ordered streams share the limit") {
    TDConfig shuffled = td;
    shuffled.shuffle = true;
    shuffled.seed = 99;
    auto rs = td_train(fx.grid, chain_samples(), chain_h, shuffled,
                       std::vector<double>{-1.0, -3.0}, &u_pi.v);
    CHECK(inf_norm_diff(rs.theta, result.theta) <= 0.02);
  }
  SECTION("the empty stream is rejected") {
    CHECK_THROWS_AS(td_train(fx.grid, {}, chain_h, td, std::vector<double>{0.0, 0.0}),
                    std::invalid_argument);
  }
}

TEST_CASE("td updates touch at most 2^n parameters") {
  GridSpec g({-1.0, -5.0}, {5.0, 5.0}, {9, 9});
  std::mt19937_64 rng(2);
  std::vector<double> theta = mdrtest::random_vector(rng, g.size(), -2.0, 0.0);
  std::uniform_real_distribution<double> dx(-1.0, 5.0), dy(-5.0, 5.0);
  auto h_fn = [](const std::vector<double>&) { return -1.0; };
  for (int trial = 0; trial < 50; ++trial) {
    Transition s{{dx(rng), dy(rng)}, {dx(rng), dy(rng)}, 0.1};
    std::vector<double> before = theta;
    td_update_mdr(g, theta, s, h_fn, 0.9, 0.7);
    int changed = 0;
    for (std::size_t i = 0; i < theta.size(); ++i)
      if (theta[i] != before[i]) ++changed;
    CHECK(changed <= 4);
  }
}

TEST_CASE("on-node training keeps theta inside [-2L, 0]") {
  GridSpec g({0.0}, {1.0}, {3});
  const double L = 1.5;
  auto h_fn = [&](const std::vector<double>& x) {
    return -3.0 + x[0] * 2.0;  // h in [-2L, 0] on [0, 1]
  };
  std::mt19937_64 rng(11);
  std::uniform_int_distribution<int> node(0, 2);
  std::uniform_real_distribution<double> amp(0.0, 1.0);
  std::vector<double> theta{-3.0, -1.5, 0.0};
  for (int k = 0; k < 2000; ++k) {
    const double a = node(rng) * 0.5;
    const double b = node(rng) * 0.5;
    Transition s{{a}, {b}, 1.0};
    td_update_mdr(g, theta, s, h_fn, 0.9, amp(rng));
    for (double v : theta) {
      CHECK(v <= 0.0);
      CHECK(v >= -2.0 * L);
    }
  }
}
