#pragma once

#include "phi4lab/grid.hpp"

#include <vector>

namespace phi4lab {

// Raised-cosine cutoff: 1 on [0, 3/4], 0 on [4/3, inf).
double dyadic_profile(double r);

// Littlewood-Paley blocks j = -1..j_max on the lattice, in r2c layout.
// Blocks are functions of r = |m| (dyadic units, m = k M / 2pi). The top block
// is high-pass so lattice corners beyond the last annulus are still covered.
struct DyadicPartition {
  TorusGrid grid;
  int j_max = 0;
  std::vector<RealArray> multipliers;  // index j + 1

  const RealArray& block(int j) const { return multipliers.at(std::size_t(j + 1)); }
  int count() const { return j_max + 2; }
};

DyadicPartition build_partition(const TorusGrid& grid);

// All blocks of f, index j + 1. One forward transform.
std::vector<RealArray> lp_blocks(const DyadicPartition& p, const RealArray& f);
RealArray lp_block(const DyadicPartition& p, const RealArray& f, int j);
RealArray lp_low(const DyadicPartition& p, const RealArray& f, int j);      // S_j = sum_{i <= j-1}
RealArray lp_above(const DyadicPartition& p, const RealArray& f, double L);  // sum_{j > L}

struct Weight {
  enum class Kind { Constant, PolySpace, PolySpacetime, TauPower };
  Kind kind = Kind::Constant;
  double nu = 0;     // polynomial decay exponent
  double theta = 0;  // tau-power exponent
  double power = 1;  // evaluates w^power, so rho^{-a} is poly_space(nu).pow(-a)

  static Weight constant() { return {}; }
  static Weight poly_space(double nu) { return {Kind::PolySpace, nu, 0, 1}; }
  static Weight poly_spacetime(double nu) { return {Kind::PolySpacetime, nu, 0, 1}; }
  static Weight tau_power(double theta) { return {Kind::TauPower, 0, theta, 1}; }
  Weight pow(double p) const {
    Weight w = *this;
    w.power *= p;
    return w;
  }
};

RealArray weight_eval(const Weight& w, const TorusGrid& grid, double t = 0);

// sup_j 2^{j alpha} max_x w |Delta_j f|
double besov_norm(const DyadicPartition& p, const RealArray& f, double alpha, const Weight& w, double t = 0);
double besov_norm(const DyadicPartition& p, const std::vector<RealArray>& blocks, double alpha,
                  const RealArray& weight);

struct BlockRow {
  int j;
  double block_sup;
  double weighted_block_sup;
};
std::vector<BlockRow> besov_table(const DyadicPartition& p, const RealArray& f, const Weight& w, double t = 0);

double l2_besov_norm(const DyadicPartition& p, const RealArray& f, double alpha, const Weight& w, double t = 0);

// ||f||_{L^inf(w)} + sup over axis shifts s = m h e_i, 1 <= m <= N/4, of
// |s|^{-alpha} ||Delta_s^order f||_{L^inf(w)}.
double fd_norm(const TorusGrid& g, const RealArray& f, double alpha, int order, const Weight& w, double t = 0);

enum class BlockStat { Sup, Rms };

// How per-sample block statistics are pooled across the ensemble. RootMeanSquare
// with BlockStat::Rms estimates sqrt(E|Delta_j f(x)|^2) for stationary fields.
enum class Pooling { MeanOfLogs, RootMeanSquare };

struct RegularityFit {
  std::vector<int> j;
  std::vector<double> log2_mean;  // log2 of the pooled block statistic
  double slope = 0;
  double std_error = 0;
};

// Least-squares slope of the pooled log2 block size against j. The standard error
// is the spread of per-sample slopes over sqrt(n); a single sample falls back
// to the residual error of the fit.
RegularityFit estimate_regularity(const DyadicPartition& p, const std::vector<RealArray>& ensemble, int j_lo,
                                  int j_hi, BlockStat stat = BlockStat::Sup, Pooling pool = Pooling::MeanOfLogs);
RegularityFit estimate_regularity(const DyadicPartition& p, const std::vector<RealArray>& ensemble);

// Per-sample block statistics, useful when the ensemble is streamed.
std::vector<double> block_log2_stats(const DyadicPartition& p, const RealArray& f, int j_lo, int j_hi,
                                     BlockStat stat);
RegularityFit fit_regularity(int j_lo, const std::vector<std::vector<double>>& per_sample,
                             Pooling pool = Pooling::MeanOfLogs);

}  // namespace phi4lab
