#pragma once

#include "phi4lab/lp.hpp"

#include <utility>
#include <vector>

namespace phi4lab {

using Blocks = std::vector<RealArray>;  // output of lp_blocks, index j + 1

// f < g = sum_i (S_{i-1} f)(Delta_i g), S_{i-1} = sum_{j <= i-2} Delta_j
RealArray para_lt(const DyadicPartition& p, const RealArray& f, const RealArray& g);
RealArray para_lt(const Blocks& fb, const Blocks& gb);
RealArray para_gt(const DyadicPartition& p, const RealArray& f, const RealArray& g);
// f o g = sum_{|i-j| <= 1} Delta_i f Delta_j g
RealArray para_res(const DyadicPartition& p, const RealArray& f, const RealArray& g);
RealArray para_res(const Blocks& fb, const Blocks& gb);
// f >= g, i.e. (f > g) + (f o g)
RealArray para_geq(const DyadicPartition& p, const RealArray& f, const RealArray& g);
RealArray para_geq(const Blocks& fb, const Blocks& gb);

// (f < g) o h - f (g o h)
RealArray commutator(const DyadicPartition& p, const RealArray& f, const RealArray& g, const RealArray& h);

// Physical radial slices w_k, k = -1..K: raised-cosine annuli of ratio 2 around
// the box center, renormalized to sum to one. Empty slices are dropped.
struct RadialSlices {
  std::vector<int> k;
  std::vector<RealArray> w;
};
RadialSlices radial_slices(const TorusGrid& grid);

// Holds a pointer to its partition, which must outlive it.
struct Localizer {
  const DyadicPartition* partition = nullptr;
  Weight rho;
  double L = 0;
  RadialSlices slices;
  std::vector<double> c;  // c_k = -log2 max_x rho w_k; thresholds are c_k + L
};

Localizer build_localizer(const DyadicPartition& p, const Weight& rho, double L);

RealArray localize_above(const Localizer& loc, const RealArray& f);
RealArray localize_below(const Localizer& loc, const RealArray& f);
// (U_> f, U_<= f) from precomputed blocks and an explicit base parameter.
std::pair<RealArray, RealArray> localize_split(const Localizer& loc, const Blocks& fb, double L);

// Dyadic time slices v_l on [0, T] at time t, renormalized to sum to one.
struct TimeSlices {
  std::vector<int> l;
  std::vector<double> v;
};
TimeSlices time_slices(double t, double T);

struct SpacetimeLocalizer {
  const DyadicPartition* partition = nullptr;
  Weight rho;
  double L = 0;
  double T = 1;
  RadialSlices slices;
  std::vector<int> time_index;         // l values present on [0, T]
  std::vector<std::vector<double>> c;  // c[k][l] = -log2 max_{t,x} rho v_l w_k
};

// The maxima defining c are taken over sample_times (and the grid).
SpacetimeLocalizer build_spacetime_localizer(const DyadicPartition& p, const Weight& rho, double L, double T,
                                             const std::vector<double>& sample_times);

std::pair<RealArray, RealArray> localize_spacetime_split(const SpacetimeLocalizer& loc, const Blocks& fb, double t,
                                                         double L);
Trajectory localize_spacetime_above(const SpacetimeLocalizer& loc, const Trajectory& f);
Trajectory localize_spacetime_below(const SpacetimeLocalizer& loc, const Trajectory& f);

// Q(s) = (35/32)(1 - s^2)^3 on [-1, 1].
double time_mollifier(double s);

// f << g = sum_i (S_{i-1} Q_i f) Delta_i g with Q_i f(t) = int 2^{2i} Q(2^{2i}(t-s)) f(s v 0) ds.
// Trapezoid rule on the shared mesh; f is held at f(0) before the mesh and at
// f(T) after it, and the discrete kernel is renormalized to unit mass.
Trajectory para_lt_time(const DyadicPartition& p, const Trajectory& f, const Trajectory& g);

}  // namespace phi4lab
