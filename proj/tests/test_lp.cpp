#include "phi4lab/lp.hpp"

#include <doctest.h>

#include <cmath>
#include <random>

using namespace phi4lab;

namespace {

RealArray random_field(const TorusGrid& g, unsigned seed) {
  std::mt19937_64 rng(seed);
  std::normal_distribution<double> n;
  RealArray f(g.size());
  for (auto& v : f) v = n(rng);
  return f;
}

RealArray wave(const TorusGrid& g, int m) {
  RealArray f(g.size());
  for (std::int64_t i = 0; i < g.size(); ++i) f[i] = std::cos(g.k_unit() * m * double(i % g.N) * g.h);
  return f;
}

}  // namespace

TEST_CASE("partition multipliers sum to one and stay in [0, 1]") {
  for (int d : {2, 3, 4}) {
    const DyadicPartition p = build_partition(make_grid(d, 3.0, 32));
    CHECK(p.j_max == 3);
    RealArray sum = RealArray::Zero(p.block(0).size());
    for (const auto& m : p.multipliers) {
      CHECK(m.minCoeff() >= 0.0);
      CHECK(m.maxCoeff() <= 1.0 + 1e-15);
      sum += m;
    }
    CHECK((sum - 1.0).abs().maxCoeff() < 1e-14);
  }
  CHECK_THROWS(build_partition(make_grid(2, 1.0, 4)));
}

TEST_CASE("blocks reconstruct the field and isolate single modes") {
  const TorusGrid g = make_grid(2, 2 * kPi, 64);
  const DyadicPartition p = build_partition(g);
  const RealArray f = random_field(g, 1);
  RealArray sum = RealArray::Zero(f.size());
  for (const auto& b : lp_blocks(p, f)) sum += b;
  CHECK((sum - f).abs().maxCoeff() < 1e-13);

  // |m| = 12 lies in the flat part of block 3 (annulus 2^3 * [4/3, 3/2])
  const RealArray w = wave(g, 12);
  CHECK((lp_block(p, w, 3) - w).abs().maxCoeff() < 1e-13);
  CHECK(lp_block(p, w, 2).abs().maxCoeff() < 1e-13);
  CHECK((lp_low(p, w, 4) - w).abs().maxCoeff() < 1e-13);
  CHECK(lp_low(p, w, 3).abs().maxCoeff() < 1e-13);
  CHECK(lp_block(p, w, 99).abs().maxCoeff() == 0.0);
}

TEST_CASE("constant weight Besov norm of a single block") {
  const TorusGrid g = make_grid(2, 2 * kPi, 64);
  const DyadicPartition p = build_partition(g);
  const RealArray w = wave(g, 12);
  CHECK(besov_norm(p, w, 0.5, Weight::constant()) == doctest::Approx(std::pow(2.0, 1.5)));
  CHECK(besov_norm(p, 2.0 * w, 0.5, Weight::constant()) == doctest::Approx(2 * std::pow(2.0, 1.5)));
  const auto table = besov_table(p, w, Weight::constant());
  CHECK(table.size() == std::size_t(p.count()));
  CHECK(table[4].block_sup == doctest::Approx(1.0));
}

TEST_CASE("weights") {
  const TorusGrid g = make_grid(2, 4.0, 16);
  const RealArray one = weight_eval(Weight::constant(), g);
  CHECK((one == 1.0).all());
  const RealArray rho = weight_eval(Weight::poly_space(2.0), g);
  CHECK(rho[0] == doctest::Approx(1.0));
  CHECK(rho.minCoeff() > 0);
  const RealArray sq = weight_eval(Weight::poly_space(2.0).pow(2.0), g);
  CHECK((sq - rho.square()).abs().maxCoeff() < 1e-14);
  const RealArray inv = weight_eval(Weight::poly_space(1.0).pow(-1.0), g);
  CHECK((inv * weight_eval(Weight::poly_space(1.0), g) - 1.0).abs().maxCoeff() < 1e-14);
  const RealArray tau = weight_eval(Weight::tau_power(0.5), g, 0.25);
  CHECK(tau.maxCoeff() == doctest::Approx(std::sqrt(1 - std::exp(-0.25))));
}

TEST_CASE("finite-difference norm") {
  const TorusGrid g = make_grid(2, 2 * kPi, 32);
  const RealArray c = RealArray::Constant(g.size(), -1.5);
  CHECK(fd_norm(g, c, 0.5, 2, Weight::constant()) == doctest::Approx(1.5));
  CHECK_THROWS(fd_norm(g, c, 2.5, 2, Weight::constant()));
  CHECK_THROWS(fd_norm(g, c, 0.0, 2, Weight::constant()));

  // the ratio to the Besov norm is homogeneous of degree zero
  const DyadicPartition p = build_partition(g);
  const RealArray f = random_field(g, 3);
  const double r1 = fd_norm(g, f, 0.5, 2, Weight::constant()) / besov_norm(p, f, 0.5, Weight::constant());
  const double r2 = fd_norm(g, 2 * f, 0.5, 2, Weight::constant()) / besov_norm(p, 2 * f, 0.5, Weight::constant());
  CHECK(r1 == doctest::Approx(r2).epsilon(1e-12));
}

TEST_CASE("regularity fit") {
  // synthetic per-sample statistics with slope -0.75 exactly
  std::vector<std::vector<double>> samples;
  for (int s = 0; s < 4; ++s) samples.push_back({0.1 * s, 0.1 * s - 0.75, 0.1 * s - 1.5, 0.1 * s - 2.25});
  const RegularityFit a = fit_regularity(0, samples);
  CHECK(a.slope == doctest::Approx(-0.75));
  CHECK(a.std_error == doctest::Approx(0.0).epsilon(1e-12));
  const RegularityFit b = fit_regularity(0, samples, Pooling::RootMeanSquare);
  CHECK(b.slope == doctest::Approx(-0.75));
  CHECK_THROWS(fit_regularity(0, {{1.0, 2.0}}));
  CHECK_THROWS(fit_regularity(0, {}));

  // a field living in one block has no fittable slope
  const TorusGrid g = make_grid(2, 2 * kPi, 64);
  const DyadicPartition p = build_partition(g);
  CHECK_THROWS(estimate_regularity(p, {wave(g, 12)}, 0, p.j_max));
}
