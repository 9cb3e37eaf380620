#include "phi4lab/paracalc.hpp"

#include <cmath>
#include <limits>
#include <stdexcept>

namespace phi4lab {

RealArray para_lt(const Blocks& fb, const Blocks& gb) {
  if (fb.size() != gb.size() || fb.empty()) throw std::invalid_argument("paraproduct of mismatched block sets");
  const std::size_t nb = fb.size();
  RealArray out = RealArray::Zero(fb[0].size());
  RealArray low = RealArray::Zero(fb[0].size());
  for (std::size_t b = 2; b < nb; ++b) {
    low += fb[b - 2];
    out += low * gb[b];
  }
  return out;
}

RealArray para_res(const Blocks& fb, const Blocks& gb) {
  if (fb.size() != gb.size() || fb.empty()) throw std::invalid_argument("resonant product of mismatched block sets");
  const std::size_t nb = fb.size();
  RealArray out = RealArray::Zero(fb[0].size());
  for (std::size_t b = 0; b < nb; ++b) {
    RealArray near = gb[b];
    if (b > 0) near += gb[b - 1];
    if (b + 1 < nb) near += gb[b + 1];
    out += fb[b] * near;
  }
  return out;
}

RealArray para_geq(const Blocks& fb, const Blocks& gb) { return para_lt(gb, fb) + para_res(fb, gb); }

RealArray para_lt(const DyadicPartition& p, const RealArray& f, const RealArray& g) {
  return para_lt(lp_blocks(p, f), lp_blocks(p, g));
}

RealArray para_gt(const DyadicPartition& p, const RealArray& f, const RealArray& g) { return para_lt(p, g, f); }

RealArray para_res(const DyadicPartition& p, const RealArray& f, const RealArray& g) {
  return para_res(lp_blocks(p, f), lp_blocks(p, g));
}

RealArray para_geq(const DyadicPartition& p, const RealArray& f, const RealArray& g) {
  return para_geq(lp_blocks(p, f), lp_blocks(p, g));
}

RealArray commutator(const DyadicPartition& p, const RealArray& f, const RealArray& g, const RealArray& h) {
  const Blocks gb = lp_blocks(p, g), hb = lp_blocks(p, h);
  return para_res(lp_blocks(p, para_lt(lp_blocks(p, f), gb)), hb) - f * para_res(gb, hb);
}

namespace {

// Profiles of ratio-2 dyadic slices in a radial variable s >= 0: index -1 is
// the unit ball, index top absorbs everything beyond 2^top.
double slice_profile(int k, int top, double s) {
  if (k == -1) return dyadic_profile(s);
  if (k < top) return dyadic_profile(s / std::ldexp(1.0, k + 1)) - dyadic_profile(s / std::ldexp(1.0, k));
  return 1.0 - dyadic_profile(s / std::ldexp(1.0, k));
}

int top_slice(double extent) { return std::max(0, int(std::floor(std::log2(extent))) + 1); }

double neg_log2(double m) { return m > 0 ? -std::log2(m) : std::numeric_limits<double>::infinity(); }

// Tail sums tail[b] = sum_{b' >= b} blocks, head[b] = sum_{b' < b}.
struct Cumulative {
  std::vector<RealArray> tail, head;
};

Cumulative cumulate(const Blocks& fb) {
  const std::size_t nb = fb.size();
  Cumulative c;
  c.tail.assign(nb + 1, RealArray::Zero(fb[0].size()));
  c.head.assign(nb + 1, RealArray::Zero(fb[0].size()));
  for (std::size_t b = nb; b-- > 0;) c.tail[b] = c.tail[b + 1] + fb[b];
  for (std::size_t b = 0; b < nb; ++b) c.head[b + 1] = c.head[b] + fb[b];
  return c;
}

// First block index b = j + 1 with j > threshold.
std::size_t first_above(double threshold, std::size_t nb) {
  if (!std::isfinite(threshold)) return nb;
  double j = std::floor(threshold) + 1;
  double b = std::max(0.0, j + 1);
  return std::size_t(std::min<double>(b, double(nb)));
}

}  // namespace

RadialSlices radial_slices(const TorusGrid& grid) {
  const int top = top_slice(grid.M / 2);
  const RealArray r = centered_radius_sq(grid).sqrt();
  RadialSlices raw;
  RealArray sum = RealArray::Zero(r.size());
  for (int k = -1; k <= top; ++k) {
    RealArray w(r.size());
    for (std::int64_t i = 0; i < r.size(); ++i) w[i] = slice_profile(k, top, r[i]);
    sum += w;
    raw.k.push_back(k);
    raw.w.push_back(std::move(w));
  }
  RadialSlices out;
  for (std::size_t s = 0; s < raw.k.size(); ++s) {
    if (raw.w[s].maxCoeff() <= 0) continue;
    out.k.push_back(raw.k[s]);
    out.w.push_back(raw.w[s] / sum);
  }
  return out;
}

Localizer build_localizer(const DyadicPartition& p, const Weight& rho, double L) {
  Localizer loc;
  loc.partition = &p;
  loc.rho = rho;
  loc.L = L;
  loc.slices = radial_slices(p.grid);
  const RealArray r = weight_eval(rho, p.grid, 0.0);
  for (const auto& w : loc.slices.w) loc.c.push_back(neg_log2((r * w).maxCoeff()));
  return loc;
}

std::pair<RealArray, RealArray> localize_split(const Localizer& loc, const Blocks& fb, double L) {
  const Cumulative cum = cumulate(fb);
  const std::size_t nb = fb.size();
  RealArray above = RealArray::Zero(fb[0].size()), below = RealArray::Zero(fb[0].size());
  for (std::size_t s = 0; s < loc.slices.w.size(); ++s) {
    std::size_t b = first_above(loc.c[s] + L, nb);
    above += loc.slices.w[s] * cum.tail[b];
    below += loc.slices.w[s] * cum.head[b];
  }
  return {above, below};
}

RealArray localize_above(const Localizer& loc, const RealArray& f) {
  return localize_split(loc, lp_blocks(*loc.partition, f), loc.L).first;
}

RealArray localize_below(const Localizer& loc, const RealArray& f) {
  return localize_split(loc, lp_blocks(*loc.partition, f), loc.L).second;
}

TimeSlices time_slices(double t, double T) {
  const int top = top_slice(T);
  TimeSlices out;
  double sum = 0;
  for (int l = -1; l <= top; ++l) {
    double v = slice_profile(l, top, std::max(t, 0.0));
    out.l.push_back(l);
    out.v.push_back(v);
    sum += v;
  }
  for (double& v : out.v) v /= sum;
  return out;
}

SpacetimeLocalizer build_spacetime_localizer(const DyadicPartition& p, const Weight& rho, double L, double T,
                                             const std::vector<double>& sample_times) {
  if (sample_times.empty()) throw std::invalid_argument("spacetime localizer needs sample times");
  SpacetimeLocalizer loc;
  loc.partition = &p;
  loc.rho = rho;
  loc.L = L;
  loc.T = T;
  loc.slices = radial_slices(p.grid);
  const TimeSlices probe = time_slices(0.0, T);
  loc.time_index = probe.l;
  const std::size_t nk = loc.slices.w.size(), nl = probe.l.size();
  std::vector<std::vector<double>> best(nk, std::vector<double>(nl, 0.0));
  for (double t : sample_times) {
    const RealArray r = weight_eval(rho, p.grid, t);
    const TimeSlices ts = time_slices(t, T);
    for (std::size_t k = 0; k < nk; ++k) {
      const double m = (r * loc.slices.w[k]).maxCoeff();
      for (std::size_t l = 0; l < nl; ++l) best[k][l] = std::max(best[k][l], m * ts.v[l]);
    }
  }
  loc.c.assign(nk, std::vector<double>(nl));
  for (std::size_t k = 0; k < nk; ++k)
    for (std::size_t l = 0; l < nl; ++l) loc.c[k][l] = neg_log2(best[k][l]);
  return loc;
}

std::pair<RealArray, RealArray> localize_spacetime_split(const SpacetimeLocalizer& loc, const Blocks& fb, double t,
                                                         double L) {
  const Cumulative cum = cumulate(fb);
  const std::size_t nb = fb.size();
  const TimeSlices ts = time_slices(t, loc.T);
  RealArray above = RealArray::Zero(fb[0].size()), below = RealArray::Zero(fb[0].size());
  for (std::size_t l = 0; l < ts.v.size(); ++l) {
    if (ts.v[l] == 0) continue;
    for (std::size_t k = 0; k < loc.slices.w.size(); ++k) {
      std::size_t b = first_above(loc.c[k][l] + L, nb);
      above += (ts.v[l] * loc.slices.w[k]) * cum.tail[b];
      below += (ts.v[l] * loc.slices.w[k]) * cum.head[b];
    }
  }
  return {above, below};
}

namespace {

Trajectory localize_trajectory(const SpacetimeLocalizer& loc, const Trajectory& f, bool above) {
  Trajectory out;
  out.grid = f.grid;
  out.times = f.times;
  out.stride = f.stride;
  for (std::size_t n = 0; n < f.times.size(); ++n) {
    auto split = localize_spacetime_split(loc, lp_blocks(*loc.partition, f.snapshots[n]), f.times[n], loc.L);
    out.snapshots.push_back(above ? split.first : split.second);
  }
  return out;
}

// Antiderivative of the mollifier, 0 at -1 and 1 at +1.
double mollifier_cdf(double x) {
  if (x <= -1) return 0;
  if (x >= 1) return 1;
  return 35.0 / 32.0 * (x - x * x * x + 0.6 * std::pow(x, 5) - std::pow(x, 7) / 7.0 + 16.0 / 35.0);
}

}  // namespace

Trajectory localize_spacetime_above(const SpacetimeLocalizer& loc, const Trajectory& f) {
  return localize_trajectory(loc, f, true);
}

Trajectory localize_spacetime_below(const SpacetimeLocalizer& loc, const Trajectory& f) {
  return localize_trajectory(loc, f, false);
}

double time_mollifier(double s) {
  if (s <= -1 || s >= 1) return 0;
  double u = 1 - s * s;
  return 35.0 / 32.0 * u * u * u;
}

Trajectory para_lt_time(const DyadicPartition& p, const Trajectory& f, const Trajectory& g) {
  if (f.times != g.times || f.grid != g.grid || f.snapshots.size() != f.times.size() ||
      g.snapshots.size() != g.times.size())
    throw std::invalid_argument("para_lt_time needs trajectories on a shared mesh");
  const std::size_t nt = f.times.size(), nb = std::size_t(p.count());
  const auto& ts = f.times;
  std::vector<Blocks> fb(nt), gb(nt);
  for (std::size_t n = 0; n < nt; ++n) {
    fb[n] = lp_blocks(p, f.snapshots[n]);
    gb[n] = lp_blocks(p, g.snapshots[n]);
  }
  Trajectory out;
  out.grid = f.grid;
  out.times = ts;
  out.stride = f.stride;
  out.snapshots.assign(nt, RealArray::Zero(p.grid.size()));
  for (std::size_t b = 2; b < nb; ++b) {
    const int i = int(b) - 1;
    const double scale = std::ldexp(1.0, 2 * i);  // 2^{2i}
    for (std::size_t n = 0; n < nt; ++n) {
      // Quadrature weights of s -> scale Q(scale (t_n - s)) over the mesh.
      std::vector<double> w(nt, 0.0);
      for (std::size_t m = 0; m + 1 < nt; ++m) {
        double hm = ts[m + 1] - ts[m];
        w[m] += 0.5 * hm * scale * time_mollifier(scale * (ts[n] - ts[m]));
        w[m + 1] += 0.5 * hm * scale * time_mollifier(scale * (ts[n] - ts[m + 1]));
      }
      if (nt == 1) w[0] = 1;
      // Kernel mass before the mesh start goes to f(t_0), after the end to f(T).
      double before = 1.0 - mollifier_cdf(scale * (ts[n] - ts.front()));
      double after = mollifier_cdf(scale * (ts[n] - ts.back()));
      w.front() += before;
      w.back() += after;
      double total = 0;
      for (double x : w) total += x;
      RealArray qf = RealArray::Zero(p.grid.size());
      for (std::size_t m = 0; m < nt; ++m) {
        if (w[m] == 0) continue;
        RealArray low = RealArray::Zero(p.grid.size());
        for (std::size_t bb = 0; bb + 2 <= b; ++bb) low += fb[m][bb];
        qf += (w[m] / total) * low;
      }
      out.snapshots[n] += qf * gb[n][b];
    }
  }
  return out;
}

}  // namespace phi4lab
