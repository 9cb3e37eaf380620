#include "phi4lab/paracalc.hpp"

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

double rel(const RealArray& a, const RealArray& b) { return (a - b).abs().maxCoeff() / b.abs().maxCoeff(); }

}  // namespace

TEST_CASE("paraproduct trichotomy and symmetry") {
  const TorusGrid g = make_grid(2, 2 * kPi, 64);
  const DyadicPartition p = build_partition(g);
  const RealArray f = random_field(g, 1), h = random_field(g, 2);
  CHECK(rel(para_lt(p, f, h) + para_res(p, f, h) + para_gt(p, f, h), f * h) < 1e-12);
  CHECK(rel(para_gt(p, f, h), para_lt(p, h, f)) < 1e-13);
  CHECK(rel(para_res(p, f, h), para_res(p, h, f)) < 1e-13);
  CHECK(rel(para_geq(p, f, h), para_gt(p, f, h) + para_res(p, f, h)) < 1e-13);
  const Blocks fb = lp_blocks(p, f), hb = lp_blocks(p, h);
  CHECK((para_lt(fb, hb) - para_lt(p, f, h)).abs().maxCoeff() < 1e-13);
}

TEST_CASE("a constant only paramultiplies") {
  const TorusGrid g = make_grid(2, 2 * kPi, 32);
  const DyadicPartition p = build_partition(g);
  const RealArray c = RealArray::Constant(g.size(), 2.0), h = random_field(g, 3);
  const RealArray hi = h - lp_low(p, h, 2);  // blocks -1 and 0 of hi vanish
  CHECK(rel(para_lt(p, c, hi), 2.0 * hi) < 1e-13);
  CHECK(para_res(p, c, hi).abs().maxCoeff() < 1e-12);
}

TEST_CASE("commutator is bilinear in its last two slots") {
  const TorusGrid g = make_grid(2, 2 * kPi, 32);
  const DyadicPartition p = build_partition(g);
  const RealArray f = random_field(g, 4), a = random_field(g, 5), b = random_field(g, 6);
  CHECK(rel(commutator(p, f, 2.0 * a, b), 2.0 * commutator(p, f, a, b)) < 1e-12);
  CHECK(rel(commutator(p, f, a, b + a), commutator(p, f, a, b) + commutator(p, f, a, a)) < 1e-11);
}

TEST_CASE("radial slices partition unity") {
  const TorusGrid g = make_grid(3, 20.0, 32);
  const RadialSlices s = radial_slices(g);
  RealArray sum = RealArray::Zero(g.size());
  for (const auto& w : s.w) {
    CHECK(w.minCoeff() >= 0.0);
    sum += w;
  }
  CHECK((sum - 1.0).abs().maxCoeff() < 1e-14);
  CHECK(s.k.front() == -1);
}

TEST_CASE("spatial localizer splits exactly and moves mass up with L") {
  const TorusGrid g = make_grid(2, 16.0, 64);
  const DyadicPartition p = build_partition(g);
  const RealArray f = random_field(g, 7);
  double prev = -1;
  for (double L : {0.0, 2.0, 4.0, 8.0}) {
    const Localizer loc = build_localizer(p, Weight::poly_space(1.0), L);
    const RealArray hi = localize_above(loc, f), lo = localize_below(loc, f);
    CHECK(rel(hi + lo, f) < 1e-13);
    const double low_mass = lo.square().sum();
    CHECK(low_mass >= prev);
    prev = low_mass;
  }
  // once L exceeds every threshold nothing is above
  const Localizer big = build_localizer(p, Weight::poly_space(1.0), 100.0);
  CHECK(localize_above(big, f).abs().maxCoeff() == 0.0);
}

TEST_CASE("time slices and mollifier") {
  for (double t : {0.0, 0.01, 0.3, 0.99, 1.0}) {
    const TimeSlices s = time_slices(t, 1.0);
    double sum = 0;
    for (double v : s.v) sum += v;
    CHECK(sum == doctest::Approx(1.0));
  }
  CHECK(time_mollifier(0.0) == doctest::Approx(35.0 / 32));
  CHECK(time_mollifier(1.0) == 0.0);
  CHECK(time_mollifier(-1.5) == 0.0);
  double mass = 0;
  const int n = 20000;
  for (int i = 0; i < n; ++i) mass += time_mollifier(-1.0 + (i + 0.5) * 2.0 / n) * 2.0 / n;
  CHECK(mass == doctest::Approx(1.0).epsilon(1e-8));
}

TEST_CASE("time paraproduct of a time-constant factor is the spatial paraproduct") {
  const TorusGrid g = make_grid(2, 2 * kPi, 32);
  const DyadicPartition p = build_partition(g);
  const RealArray f = random_field(g, 8), h = random_field(g, 9);
  Trajectory F{g, {}, {}, 1}, H{g, {}, {}, 1};
  for (int i = 0; i <= 10; ++i) {
    F.times.push_back(0.01 * i);
    H.times.push_back(0.01 * i);
    F.snapshots.push_back(f);
    H.snapshots.push_back(std::cos(0.3 * i) * h);
  }
  const Trajectory out = para_lt_time(p, F, H);
  for (std::size_t i = 0; i < out.snapshots.size(); ++i)
    CHECK(rel(out.snapshots[i], para_lt(p, f, H.snapshots[i])) < 1e-12);
}
