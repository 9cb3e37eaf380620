#include "phi4lab/solvers.hpp"
#include "phi4lab/stochastic.hpp"

#include <doctest.h>

#include <cmath>
#include <random>

using namespace phi4lab;

namespace {

RealArray smooth_field(const TorusGrid& g, unsigned seed) {
  NoiseSpec s;
  s.seed = seed;
  s.grid = g;
  return sample_X_elliptic(s, 1.0);
}

ParabolicNoise noise_for(const SolverConfig& cfg, double amplitude = 1) {
  NoiseSpec s;
  s.seed = cfg.seed;
  s.grid = cfg.grid;
  s.kind = NoiseSpec::Kind::Spacetime;
  s.dt = cfg.dt;
  s.amplitude = amplitude;
  return ParabolicNoise(s, cfg.mu);
}

}  // namespace

TEST_CASE("cubic ODE closed form") {
  CHECK(cubic_ode_solution(0.0, 1.0, 3.0) == 0.0);
  CHECK(cubic_ode_solution(2.0, 1.0, 0.0) == doctest::Approx(2.0));
  // c' = -mu c - c^3 by central differences
  for (double c0 : {-3.0, 0.5, 10.0}) {
    const double t = 0.3, e = 1e-5;
    const double c = cubic_ode_solution(c0, 0.7, t);
    const double dc = (cubic_ode_solution(c0, 0.7, t + e) - cubic_ode_solution(c0, 0.7, t - e)) / (2 * e);
    CHECK(dc == doctest::Approx(-0.7 * c - c * c * c).epsilon(1e-6));
  }
}

TEST_CASE("energy gradient is the derivative of the energy") {
  const TorusGrid g = make_grid(2, 2 * kPi, 16);
  const RealArray u = smooth_field(g, 1), Psi = smooth_field(g, 2), dir = smooth_field(g, 3);
  const double e = 1e-6;
  const double fd =
      (energy_functional(g, u + e * dir, Psi, 0.5) - energy_functional(g, u - e * dir, Psi, 0.5)) / (2 * e);
  const double an = g.cell_volume() * (energy_gradient(g, u, Psi, 0.5) * dir).sum();
  CHECK(fd == doctest::Approx(an).epsilon(1e-7));
}

TEST_CASE("monotone solver decreases the energy and solves the equation") {
  const TorusGrid g = make_grid(2, 2 * kPi, 32);
  const RealArray Psi = 20.0 * smooth_field(g, 4);
  const MonotoneResult r = solve_elliptic_monotone(g, Psi, 1.0, 1e-12);
  CHECK(r.converged);
  CHECK(r.residual < 1e-12);
  for (std::size_t i = 1; i < r.energy.size(); ++i)
    CHECK(r.energy[i] <= r.energy[i - 1] + 1e-13 * std::max(1.0, std::abs(r.energy[i - 1])));
  CHECK(r.energy.back() < r.energy.front());
  CHECK((apply_Q(g, r.psi, 1.0) + r.psi.cube() + Psi).abs().maxCoeff() < 1e-9 * Psi.abs().maxCoeff());
}

TEST_CASE("maximum principle on a solved pair") {
  const TorusGrid g = make_grid(2, 8.0, 32);
  const RealArray Psi = 5.0 * smooth_field(g, 5);
  const MonotoneResult r = solve_elliptic_monotone(g, Psi, 1.0, 1e-13);
  const MaxPrincipleReport mp = check_max_principle(g, r.psi, Psi, 1.0, Weight::poly_space(1.0));
  CHECK(mp.holds);
  CHECK(mp.c > 1.0);
  CHECK_THROWS(check_max_principle(g, RealArray::Zero(g.size()), Psi, 1.0, Weight::poly_space(1.0)));
}

TEST_CASE("localizer constant") {
  CHECK(localizer_K(0.0, 0.1, 0.2) == 0.0);
  CHECK(localizer_K(1.0, 0.1, 0.2) == doctest::Approx(2.0 / 1.7));
  CHECK(localizer_K(10.0, 0.1, 0.2) > localizer_K(5.0, 0.1, 0.2));
}

TEST_CASE("exponential step is exact for linear constant data") {
  const TorusGrid g = make_grid(2, 2 * kPi, 8);
  const RealArray v = RealArray::Constant(g.size(), 2.0), f = RealArray::Constant(g.size(), 3.0);
  const RealArray out = step_parabolic(g, v, f, 0.1, 1.5);
  const double expect = 2.0 * std::exp(-0.15) + 3.0 * (1 - std::exp(-0.15)) / 1.5;
  CHECK((out - expect).abs().maxCoeff() < 1e-14);
}

TEST_CASE("storage stride keeps about a hundred snapshots") {
  CHECK(storage_stride(0.05, 1e-3) == 1);
  CHECK(storage_stride(1.0, 1e-3) == 10);
  CHECK(storage_stride(2.0, 3e-3) == 7);
}

TEST_CASE("split and monolithic solvers agree") {
  SolverConfig cfg;
  cfg.grid = make_grid(2, 2 * kPi, 16);
  cfg.seed = 3;
  cfg.T = 0.2;
  cfg.dt = 1e-3;
  const DyadicPartition p = build_partition(cfg.grid);
  const ParabolicNoise noise = noise_for(cfg);
  const RealArray phi0 = 2.0 * coming_down_profile(cfg.grid, 3);
  const ParabolicResult mono = solve_phi42_monolithic(noise, phi0, cfg);
  cfg.L = 2;
  const ParabolicResult split = solve_phi42_split(p, noise, phi0, RealArray::Zero(cfg.grid.size()), cfg);
  REQUIRE_FALSE(mono.blew_up);
  REQUIRE_FALSE(split.blew_up);
  CHECK(trajectory_distance(mono.v, split.v) < 1e-10 * trajectory_sup(mono.v));
  CHECK(split.phi.snapshots.size() == split.v.snapshots.size());
  for (std::size_t i = 0; i < split.v.snapshots.size(); ++i)
    CHECK((split.phi.snapshots[i] + split.psi.snapshots[i] - split.v.snapshots[i]).abs().maxCoeff() < 1e-12);
}

TEST_CASE("zero noise reduces to the cubic ODE") {
  SolverConfig cfg;
  cfg.grid = make_grid(2, 2 * kPi, 8);
  cfg.T = 0.5;
  cfg.dt = 1e-4;
  const ParabolicResult r =
      solve_phi42_monolithic(noise_for(cfg, 0), RealArray::Constant(cfg.grid.size(), 1.5), cfg);
  CHECK(r.norms.back().sup_norm == doctest::Approx(cubic_ode_solution(1.5, 1.0, 0.5)).epsilon(1e-3));
}

TEST_CASE("huge initial data comes down") {
  SolverConfig cfg;
  cfg.grid = make_grid(2, 2 * kPi, 16);
  cfg.T = 0.5;
  cfg.dt = 1e-3;
  const ParabolicResult r =
      solve_phi42_monolithic(noise_for(cfg, 0), RealArray::Constant(cfg.grid.size(), 1e4), cfg);
  REQUIRE_FALSE(r.blew_up);
  // sup |v(t)| <= 1/sqrt(2t) for the cubic ODE, independent of the start
  CHECK(r.norms.back().sup_norm <= 1.0 / std::sqrt(2 * 0.5) + 1e-3);
  CHECK(r.substeps > 0);
}

TEST_CASE("profile is normalized and band limited on request") {
  const TorusGrid g = make_grid(2, 2 * kPi, 32);
  const RealArray f = coming_down_profile(g, 4);
  CHECK(f.abs().maxCoeff() == doctest::Approx(1.0));
  const RealArray low = coming_down_profile(g, 4, 2);
  const DyadicPartition p = build_partition(g);
  CHECK(lp_block(p, low, p.j_max).abs().maxCoeff() < 1e-12);
}
