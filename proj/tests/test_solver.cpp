#include <catch2/catch_amalgamated.hpp>

#include <cmath>
#include <random>

#include "mdr/solver.hpp"
#include "test_common.hpp"

using namespace mdr;
using mdrtest::ChainFixture;

namespace {

// Two actions on the chain grid: stay put (u = 0) or drift right (u = 1).
class StayOrRight final : public SystemModel {
 public:
  StayOrRight() { controls_ = InputGrid(std::vector<double>{0.0, 1.0}); }
  int dim() const override { return 1; }
  std::string name() const override { return "stay_or_right"; }
  void flow(const double*, const double* u, const double*, double* out) const override {
    out[0] = u[0];
  }
};

}  // namespace

TEST_CASE("value iteration reaches the chain fixed point in a few sweeps") {
  ChainFixture fx(0.9);
  MdrBackupOp op(fx.table, fx.h);
  SolverConfig cfg;
  cfg.epsilon = 1e-9;
  auto [u, report] = value_iteration(op, fx.h, cfg, "default-h");
  REQUIRE(report.converged);
  CHECK(report.iterations <= 3);
  CHECK(u[0] == Catch::Approx(-2.7).margin(1e-9));
  CHECK(u[1] == -3.0);
  CHECK(report.last_residual() <= cfg.epsilon);

  // Restarting from the fixed point converges immediately.
  auto [u2, report2] = value_iteration(op, u, cfg, "fixed-point");
  CHECK(report2.iterations == 1);
  CHECK(report2.residuals[0] <= 1e-12);
  CHECK(report2.init_provenance == "fixed-point");
}

TEST_CASE("minimum-reward value iteration insists on its default init") {
  ChainFixture fx(1.0);
  ValueVector l({-1.0, -3.0}, ValueRole::surface);
  MrBackupOp op(fx.table, l);
  SolverConfig cfg;

  auto [v, report] = value_iteration(op, l, cfg, "default-l");
  REQUIRE(report.converged);
  CHECK(v[0] == -3.0);
  CHECK(v[1] == -3.0);

  ValueVector alpha(fx.grid.size(), -5.0);
  CHECK_THROWS_AS(value_iteration(op, alpha, cfg), std::invalid_argument);
  ValueVector zeros(fx.grid.size(), 0.0);
  CHECK_THROWS_AS(value_iteration(op, zeros, cfg), std::invalid_argument);
}

TEST_CASE("value iteration residuals decay geometrically under discounting") {
  GridSpec g({-1.0, -5.0}, {5.0, 5.0}, {21, 21});
  DoubleIntegrator di(2.0, 2);
  TargetSpec target = TargetSpec::make_box_complement({0.0, -3.0}, {4.0, 3.0});
  DiscreteProblem p(g, di, target, 0.1);
  MdrBackupOp op(p.table, p.h);
  SolverConfig cfg;
  cfg.epsilon = 1e-6;
  auto [u, report] = value_iteration(op, ValueVector(g.size(), 0.0), cfg, "zeros");
  REQUIRE(report.converged);
  for (std::size_t k = 1; k < report.residuals.size(); ++k)
    CHECK(report.residuals[k] <= p.gamma() * report.residuals[k - 1] + 1e-12);
}

TEST_CASE("discounted fixed point is independent of the initialization") {
  GridSpec g({-1.0, -5.0}, {5.0, 5.0}, {41, 41});
  DoubleIntegrator di(2.0, 2);
  TargetSpec target = TargetSpec::make_box_complement({0.0, -3.0}, {4.0, 3.0});
  DiscreteProblem p(g, di, target, 0.1);
  MdrBackupOp op(p.table, p.h);
  SolverConfig cfg;
  cfg.epsilon = 1e-3;
  auto [ua, ra] = value_iteration(op, p.h, cfg, "default-h");
  auto [ub, rb] = value_iteration(op, ValueVector(g.size(), 0.0), cfg, "zeros");
  REQUIRE(ra.converged);
  REQUIRE(rb.converged);
  CHECK(inf_norm_diff(ua.v, ub.v) <= 2.0 * cfg.epsilon / (1.0 - p.gamma()));
}

TEST_CASE("policy iteration: enumerable two-action chain") {
  // By hand: the stay policy evaluates to (-1, -3), the move-right policy to
  // (-2.7, -3); improvement maximizes, so stay wins and the fixed point is
  // (-1, -3), matching value iteration on the same table.
  GridSpec g({0.0}, {1.0}, {2});
  StayOrRight model;
  TransitionTable tbl(g, model, 1.0, 0.1, TransitionTable::Mode::Auto,
                      TransitionTable::kDefaultBudget, 1, 0.9);
  ValueVector h({-1.0, -3.0}, ValueRole::shifted_reward);
  SolverConfig cfg;
  cfg.epsilon = 1e-9;

  auto [u_pi, r_pi] = policy_iteration(tbl, h, cfg);
  REQUIRE(r_pi.converged);
  CHECK(u_pi[0] == Catch::Approx(-1.0).margin(1e-8));
  CHECK(u_pi[1] == Catch::Approx(-3.0).margin(1e-8));

  MdrBackupOp op(tbl, h);
  auto [u_vi, r_vi] = value_iteration(op, h, cfg, "default-h");
  CHECK(inf_norm_diff(u_pi.v, u_vi.v) <= 2.0 * cfg.epsilon);
}

TEST_CASE("policy iteration with a single action is plain policy evaluation") {
  ChainFixture fx(0.9);
  SolverConfig cfg;
  cfg.epsilon = 1e-9;
  auto [u_pi, r_pi] = policy_iteration(fx.table, fx.h, cfg);
  REQUIRE(r_pi.converged);
  PolicyPair only{{0, 0}, {}};
  PolicyBackupOp op(fx.table, fx.h, only);
  SolverConfig inner = cfg;
  inner.epsilon = cfg.epsilon / 10.0;
  auto [u_eval, r_eval] = value_iteration(op, fx.h, inner, "policy-evaluation");
  CHECK(inf_norm_diff(u_pi.v, u_eval.v) <= cfg.epsilon);
}

TEST_CASE("policy iteration matches value iteration on the double integrator") {
  GridSpec g({-1.0, -5.0}, {5.0, 5.0}, {41, 41});
  DoubleIntegrator di(2.0, 2);
  TargetSpec target = TargetSpec::make_box_complement({0.0, -3.0}, {4.0, 3.0});
  DiscreteProblem p(g, di, target, 0.1);
  SolverConfig cfg;
  cfg.epsilon = 1e-3;

  std::vector<ValueVector> history;
  auto [u_pi, r_pi] = policy_iteration(p.table, p.h, cfg,
                                       [&](const ValueVector& v) { history.push_back(v); });
  REQUIRE(r_pi.converged);

  MdrBackupOp op(p.table, p.h);
  auto [u_vi, r_vi] = value_iteration(op, p.h, cfg, "default-h");
  REQUIRE(r_vi.converged);
  CHECK(inf_norm_diff(u_pi.v, u_vi.v) <= 2.0 * cfg.epsilon);

  // Evaluated policy values are nondecreasing within the inner tolerance.
  const double eps_inner = cfg.epsilon / 10.0;
  REQUIRE(history.size() >= 1);
  for (std::size_t k = 1; k < history.size(); ++k)
    for (std::size_t i = 0; i < history[k].size(); ++i)
      CHECK(history[k][i] >= history[k - 1][i] - eps_inner);

  GridSpec g3({-1.0, -1.0, 0.0}, {1.0, 1.0, 6.0}, {3, 3, 3}, {0, 0, 1});
  PursuitEvasion pe(5.0, 5.0, 1.0, 1.0, 2, 2);
  TransitionTable two_player(g3, pe, 0.01, 0.1);
  CHECK_THROWS_AS(policy_iteration(two_player, ValueVector(g3.size(), 0.0), cfg),
                  std::invalid_argument);
}

TEST_CASE("select_init ranks candidates by the contraction residual bound") {
  ChainFixture fx(0.9);
  MdrBackupOp op(fx.table, fx.h);
  SolverConfig cfg;
  cfg.epsilon = 1e-12;
  auto [u_star, report] = value_iteration(op, fx.h, cfg, "default-h");
  REQUIRE(report.converged);

  SECTION("the fixed point wins with a vanishing bound") {
    ValueVector far(fx.grid.size(), -6.0);
    auto sel = select_init({&u_star, &far}, op);
    CHECK(sel.chosen == 0);
    CHECK(sel.bounds[0] <= 1e-9);
  }
  SECTION("singleton candidate list") {
    auto sel = select_init({&fx.h}, op);
    CHECK(sel.chosen == 0);
  }
  SECTION("hand-computed bound for the default init") {
    auto sel = select_init({&fx.h, &u_star}, op);
    CHECK(sel.chosen == 1);
    // B[h] = (-2.7, -3), so the residual is 1.7 and the bound 1.7/(1-0.9).
    CHECK(sel.residuals[0] == Catch::Approx(1.7).margin(1e-12));
    CHECK(sel.bounds[0] == Catch::Approx(17.0).margin(1e-9));
  }
  SECTION("empty candidate list is rejected") {
    CHECK_THROWS_AS(select_init({}, op), std::invalid_argument);
  }
}

TEST_CASE("warm start with the unchanged problem converges in one sweep") {
  GridSpec g({-1.0, -5.0}, {5.0, 5.0}, {21, 21});
  DoubleIntegrator di(2.0, 2);
  TargetSpec target = TargetSpec::make_box_complement({0.0, -3.0}, {4.0, 3.0});
  DiscreteProblem p(g, di, target, 0.1);
  SolverConfig cfg;
  cfg.epsilon = 1e-3;
  MdrBackupOp op(p.table, p.h);
  auto [u_star, r0] = value_iteration(op, p.h, cfg, "default-h");
  REQUIRE(r0.converged);

  auto [u_ws, r_ws] = warm_start_solve(u_star, p, cfg);
  CHECK(r_ws.init_provenance == "warm-start");
  CHECK(r_ws.iterations == 1);
  CHECK(inf_norm_diff(u_ws.v, u_star.v) <= cfg.epsilon);

  CHECK_THROWS_AS(warm_start_solve(ValueVector(7, 0.0), p, cfg), std::invalid_argument);
}

TEST_CASE("multigrid: degenerate chain equals value iteration") {
  GridSpec g({-1.0, -5.0}, {5.0, 5.0}, {21, 21});
  DoubleIntegrator di(2.0, 2);
  TargetSpec target = TargetSpec::make_box_complement({0.0, -3.0}, {4.0, 3.0});
  SolverConfig cfg;
  cfg.epsilon = 1e-3;
  MultigridResult mg = multigrid_solve({g}, di, target, 0.1, cfg);
  REQUIRE(mg.levels.size() == 1);

  DiscreteProblem p(g, di, target, 0.1);
  MdrBackupOp op(p.table, p.h);
  auto [u_vi, r_vi] = value_iteration(op, p.h, cfg, "default-h");
  CHECK(mg.values.v == u_vi.v);
  CHECK(mg.levels[0].iterations == r_vi.iterations);
}

TEST_CASE("multigrid fine level beats a cold start and lands on the same point") {
  GridSpec fine({-1.0, -5.0}, {5.0, 5.0}, {41, 41});
  GridSpec coarse = coarsen(fine);
  DoubleIntegrator di(2.0, 2);
  TargetSpec target = TargetSpec::make_box_complement({0.0, -3.0}, {4.0, 3.0});
  SolverConfig cfg;
  cfg.epsilon = 1e-3;

  MultigridResult mg = multigrid_solve({coarse, fine}, di, target, 0.1, cfg);
  REQUIRE(mg.levels.size() == 2);
  REQUIRE(mg.levels[1].converged);

  DiscreteProblem p(fine, di, target, 0.1);
  MdrBackupOp op(p.table, p.h);
  auto [u_cold, r_cold] = value_iteration(op, p.h, cfg, "default-h");
  REQUIRE(r_cold.converged);

  CHECK(mg.levels[1].iterations < r_cold.iterations);
  CHECK(inf_norm_diff(mg.values.v, u_cold.v) <= 2.0 * cfg.epsilon);

  GridSpec mismatched({0.0, -5.0}, {5.0, 5.0}, {21, 21});
  CHECK_THROWS_AS(multigrid_solve({mismatched, fine}, di, target, 0.1, cfg),
                  std::invalid_argument);
}

TEST_CASE("contraction residual bound holds around a tightly solved fixed point") {
  ChainFixture fx(0.9);
  MdrBackupOp op(fx.table, fx.h);
  SolverConfig cfg;
  cfg.epsilon = 1e-10;
  auto [u_star, report] = value_iteration(op, fx.h, cfg, "default-h");
  REQUIRE(report.converged);

  std::mt19937_64 rng(808);
  ValueVector mapped;
  for (int trial = 0; trial < 100; ++trial) {
    ValueVector a(mdrtest::random_vector(rng, fx.grid.size(), -6.0, 0.0));
    op.apply(a, mapped);
    const double bound = inf_norm_diff(mapped.v, a.v) / (1.0 - 0.9);
    CHECK(inf_norm_diff(u_star.v, a.v) <= bound + 1e-9);
  }
}

TEST_CASE("default iteration cap follows the contraction estimate") {
  // ceil(log(eps/2L)/log(gamma)) * 10 with eps=1e-3, L=2, gamma=0.9.
  const double k = std::log(1e-3 / 4.0) / std::log(0.9);
  CHECK(default_max_iterations(1e-3, 2.0, 0.9) == std::int64_t(std::ceil(k)) * 10);
  CHECK(default_max_iterations(1e-3, 2.0, 1.0) == 100000);
}
