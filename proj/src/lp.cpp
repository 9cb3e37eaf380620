#include "phi4lab/lp.hpp"

#include "phi4lab/parallel.hpp"

#include <algorithm>
#include <cmath>
#include <limits>
#include <stdexcept>

namespace phi4lab {

double dyadic_profile(double r) {
  constexpr double a = 0.75, b = 4.0 / 3.0;
  if (r <= a) return 1.0;
  if (r >= b) return 0.0;
  return 0.5 * (1.0 + std::cos(kPi * (r - a) / (b - a)));
}

DyadicPartition build_partition(const TorusGrid& grid) {
  if (grid.N < 8) throw std::invalid_argument("dyadic partition needs N >= 8");
  DyadicPartition p;
  p.grid = grid;
  p.j_max = int(std::lround(std::log2(grid.N / 2))) - 1;
  const RealArray r = spectral(grid).modes().msq.sqrt();
  const std::int64_t n = r.size();
  p.multipliers.assign(std::size_t(p.count()), RealArray::Zero(n));
  RealArray sum = RealArray::Zero(n);
  for (std::int64_t i = 0; i < n; ++i) {
    for (int j = -1; j <= p.j_max; ++j) {
      double v;
      if (j == -1)
        v = dyadic_profile(r[i]);
      else if (j < p.j_max)
        v = dyadic_profile(r[i] / std::ldexp(1.0, j + 1)) - dyadic_profile(r[i] / std::ldexp(1.0, j));
      else
        v = 1.0 - dyadic_profile(r[i] / std::ldexp(1.0, j));
      p.multipliers[std::size_t(j + 1)][i] = v;
      sum[i] += v;
    }
  }
  for (auto& m : p.multipliers) m /= sum;
  return p;
}

std::vector<RealArray> lp_blocks(const DyadicPartition& p, const RealArray& f) {
  const Spectral& sp = spectral(p.grid);
  const ComplexArray c = sp.forward(f);
  std::vector<RealArray> out(std::size_t(p.count()));
  parallel_for(p.count(), [&](std::int64_t b) {
    out[std::size_t(b)] = sp.inverse(c * p.multipliers[std::size_t(b)].cast<std::complex<double>>());
  });
  return out;
}

RealArray lp_block(const DyadicPartition& p, const RealArray& f, int j) {
  if (j < -1 || j > p.j_max) return RealArray::Zero(f.size());
  return spectral(p.grid).apply(f, p.block(j));
}

RealArray lp_low(const DyadicPartition& p, const RealArray& f, int j) {
  RealArray m = RealArray::Zero(p.multipliers[0].size());
  for (int i = -1; i <= std::min(j - 1, p.j_max); ++i) m += p.block(i);
  return spectral(p.grid).apply(f, m);
}

RealArray lp_above(const DyadicPartition& p, const RealArray& f, double L) {
  RealArray m = RealArray::Zero(p.multipliers[0].size());
  for (int j = -1; j <= p.j_max; ++j)
    if (j > L) m += p.block(j);
  return spectral(p.grid).apply(f, m);
}

RealArray weight_eval(const Weight& w, const TorusGrid& grid, double t) {
  switch (w.kind) {
    case Weight::Kind::Constant:
      return RealArray::Ones(grid.size());
    case Weight::Kind::PolySpace:
      return (1.0 + centered_radius_sq(grid)).pow(-0.5 * w.nu * w.power);
    case Weight::Kind::PolySpacetime:
      return (1.0 + t * t + centered_radius_sq(grid)).pow(-0.5 * w.nu * w.power);
    case Weight::Kind::TauPower:
      return RealArray::Constant(grid.size(), std::pow(1.0 - std::exp(-t), w.theta * w.power));
  }
  throw std::logic_error("unknown weight kind");
}

double besov_norm(const DyadicPartition& p, const std::vector<RealArray>& blocks, double alpha,
                  const RealArray& weight) {
  double best = 0;
  for (int j = -1; j <= p.j_max; ++j)
    best = std::max(best, std::exp2(j * alpha) * (weight * blocks[std::size_t(j + 1)].abs()).maxCoeff());
  return best;
}

double besov_norm(const DyadicPartition& p, const RealArray& f, double alpha, const Weight& w, double t) {
  return besov_norm(p, lp_blocks(p, f), alpha, weight_eval(w, p.grid, t));
}

std::vector<BlockRow> besov_table(const DyadicPartition& p, const RealArray& f, const Weight& w, double t) {
  const auto blocks = lp_blocks(p, f);
  const RealArray wt = weight_eval(w, p.grid, t);
  std::vector<BlockRow> rows;
  for (int j = -1; j <= p.j_max; ++j) {
    const RealArray& b = blocks[std::size_t(j + 1)];
    rows.push_back({j, b.abs().maxCoeff(), (wt * b.abs()).maxCoeff()});
  }
  return rows;
}

double l2_besov_norm(const DyadicPartition& p, const RealArray& f, double alpha, const Weight& w, double t) {
  const auto blocks = lp_blocks(p, f);
  const RealArray wt = weight_eval(w, p.grid, t);
  double s = 0;
  for (int j = -1; j <= p.j_max; ++j) {
    double n = std::exp2(j * alpha) * l2_norm(p.grid, wt * blocks[std::size_t(j + 1)]);
    s += n * n;
  }
  return std::sqrt(s);
}

namespace {

// f(x + m h e_axis) on the periodic grid.
RealArray shifted(const TorusGrid& g, const RealArray& f, int axis, int m) {
  std::int64_t stride = 1;
  for (int a = g.d - 1; a > axis; --a) stride *= g.N;
  RealArray out(f.size());
  for (std::int64_t i = 0; i < f.size(); ++i) {
    std::int64_t n = (i / stride) % g.N;
    std::int64_t src = i - n * stride + ((n + m) % g.N) * stride;
    out[i] = f[src];
  }
  return out;
}

double binomial(int n, int k) {
  double r = 1;
  for (int i = 1; i <= k; ++i) r = r * (n - k + i) / i;
  return r;
}

}  // namespace

double fd_norm(const TorusGrid& g, const RealArray& f, double alpha, int order, const Weight& w, double t) {
  if (order < 1 || !(alpha > 0) || !(alpha < order))
    throw std::invalid_argument("fd_norm requires 0 < alpha < order");
  const RealArray wt = weight_eval(w, g, t);
  double diff = 0;
  for (int axis = 0; axis < g.d; ++axis) {
    for (int m = 1; m <= g.N / 4; ++m) {
      RealArray delta = RealArray::Zero(f.size());
      for (int r = 0; r <= order; ++r) {
        double c = binomial(order, r) * (((order - r) % 2) ? -1.0 : 1.0);
        delta += c * (r == 0 ? f : shifted(g, f, axis, (r * m) % g.N));
      }
      diff = std::max(diff, std::pow(m * g.h, -alpha) * (wt * delta.abs()).maxCoeff());
    }
  }
  return (wt * f.abs()).maxCoeff() + diff;
}

std::vector<double> block_log2_stats(const DyadicPartition& p, const RealArray& f, int j_lo, int j_hi,
                                     BlockStat stat) {
  const auto blocks = lp_blocks(p, f);
  std::vector<double> out;
  for (int j = j_lo; j <= j_hi; ++j) {
    const RealArray& b = blocks[std::size_t(j + 1)];
    double v = stat == BlockStat::Sup ? b.abs().maxCoeff() : std::sqrt(b.square().mean());
    if (!std::isfinite(v)) throw std::runtime_error("non-finite block " + std::to_string(j) + " in regularity fit");
    out.push_back(v);
  }
  // blocks at rounding level relative to the largest carry no slope information
  const double top = *std::max_element(out.begin(), out.end());
  for (std::size_t i = 0; i < out.size(); ++i) {
    if (!(out[i] > 1e-12 * top))
      throw std::invalid_argument("degenerate block " + std::to_string(j_lo + int(i)) + " in regularity fit");
    out[i] = std::log2(out[i]);
  }
  return out;
}

namespace {

double ols_slope(const std::vector<double>& x, const std::vector<double>& y, double* resid_se) {
  const double n = double(x.size());
  double mx = 0, my = 0;
  for (std::size_t i = 0; i < x.size(); ++i) mx += x[i] / n, my += y[i] / n;
  double sxx = 0, sxy = 0;
  for (std::size_t i = 0; i < x.size(); ++i) sxx += (x[i] - mx) * (x[i] - mx), sxy += (x[i] - mx) * (y[i] - my);
  const double slope = sxy / sxx;
  if (resid_se) {
    double ss = 0;
    for (std::size_t i = 0; i < x.size(); ++i) {
      double e = y[i] - my - slope * (x[i] - mx);
      ss += e * e;
    }
    *resid_se = x.size() > 2 ? std::sqrt(ss / (n - 2) / sxx) : 0.0;
  }
  return slope;
}

}  // namespace

RegularityFit fit_regularity(int j_lo, const std::vector<std::vector<double>>& per_sample, Pooling pool) {
  if (per_sample.empty()) throw std::invalid_argument("regularity fit needs a nonempty ensemble");
  const std::size_t levels = per_sample.front().size();
  if (levels < 3) throw std::invalid_argument("regularity fit needs at least 3 block levels");
  RegularityFit fit;
  std::vector<double> x(levels);
  fit.log2_mean.assign(levels, 0.0);
  for (std::size_t l = 0; l < levels; ++l) {
    fit.j.push_back(j_lo + int(l));
    x[l] = j_lo + double(l);
    if (pool == Pooling::MeanOfLogs) {
      for (const auto& s : per_sample) fit.log2_mean[l] += s[l] / double(per_sample.size());
    } else {
      double ms = 0;
      for (const auto& s : per_sample) ms += std::exp2(2 * s[l]) / double(per_sample.size());
      fit.log2_mean[l] = 0.5 * std::log2(ms);
    }
  }
  double resid_se = 0;
  fit.slope = ols_slope(x, fit.log2_mean, &resid_se);
  if (per_sample.size() < 2) {
    fit.std_error = resid_se;
    return fit;
  }
  const double n = double(per_sample.size());
  double m = 0, ss = 0;
  std::vector<double> slopes;
  for (const auto& s : per_sample) slopes.push_back(ols_slope(x, s, nullptr));
  for (double s : slopes) m += s / n;
  for (double s : slopes) ss += (s - m) * (s - m);
  fit.std_error = std::sqrt(ss / (n - 1) / n);
  return fit;
}

RegularityFit estimate_regularity(const DyadicPartition& p, const std::vector<RealArray>& ensemble, int j_lo,
                                  int j_hi, BlockStat stat, Pooling pool) {
  if (ensemble.empty()) throw std::invalid_argument("regularity fit needs a nonempty ensemble");
  if (j_lo < -1 || j_hi > p.j_max || j_hi - j_lo + 1 < 3)
    throw std::invalid_argument("regularity fit needs at least 3 block levels inside the partition");
  std::vector<std::vector<double>> per_sample(ensemble.size());
  for (std::size_t s = 0; s < ensemble.size(); ++s) per_sample[s] = block_log2_stats(p, ensemble[s], j_lo, j_hi, stat);
  return fit_regularity(j_lo, per_sample, pool);
}

RegularityFit estimate_regularity(const DyadicPartition& p, const std::vector<RealArray>& ensemble) {
  return estimate_regularity(p, ensemble, 1, p.j_max - 1);
}

}  // namespace phi4lab
