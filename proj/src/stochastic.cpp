#include "phi4lab/stochastic.hpp"

#include "phi4lab/paracalc.hpp"
#include "phi4lab/parallel.hpp"
#include "phi4lab/philox.hpp"

#include <cmath>
#include <stdexcept>

namespace phi4lab {

namespace {

double cutoff_radius(const NoiseSpec& spec) { return spec.cutoff > 0 ? spec.cutoff : spec.grid.N / 2.0; }

std::array<int, kMaxDim> signed_mode(const HalfModes& hm, std::int64_t i, const TorusGrid& g) {
  auto n = hm.multi_index(i, g);
  std::array<int, kMaxDim> m{};
  for (int a = 0; a < g.d; ++a) m[a] = signed_index(n[a], g.N);
  return m;
}

// Multiplicity of an r2c entry in the full lattice.
double half_weight(const HalfModes& hm, std::int64_t i, const TorusGrid& g) {
  int last = hm.multi_index(i, g)[g.d - 1];
  return (last == 0 || last == g.N / 2) ? 1.0 : 2.0;
}

PhiloxCounter mode_counter(const std::array<int, kMaxDim>& m, int d, std::uint64_t time_index, NoiseStream stream,
                           std::uint32_t sample) {
  std::uint64_t packed = 0;
  for (int a = 0; a < d; ++a) packed |= std::uint64_t(m[a] + 2048) << (12 * a);
  PhiloxCounter c;
  c[0] = std::uint32_t(packed);
  c[1] = std::uint32_t(packed >> 32) | (std::uint32_t(d) << 28);
  c[2] = std::uint32_t(time_index);
  c[3] = std::uint32_t(stream) | (sample << 8);
  return c;
}

void check_mu(double mu) {
  if (!(mu > 0)) throw std::invalid_argument("mass mu must be positive");
}

}  // namespace

ComplexArray hermitian_gaussian(const NoiseSpec& spec, NoiseStream stream, std::uint64_t time_index,
                                const RealArray& variance) {
  const TorusGrid& g = spec.grid;
  if (g.N > 4096) throw std::invalid_argument("mode packing supports N <= 4096");
  if (time_index > 0xffffffffull) throw std::invalid_argument("time index exceeds counter range");
  if (spec.sample >= (1u << 24)) throw std::invalid_argument("sample index exceeds counter range");
  const HalfModes& hm = spectral(g).modes();
  const PhiloxKey key = {std::uint32_t(spec.seed), std::uint32_t(spec.seed >> 32)};
  ComplexArray out = ComplexArray::Zero(g.half_size());
  parallel_for(out.size(), [&](std::int64_t i) {
    const double var = variance[i];
    if (var <= 0) return;
    const auto m = signed_mode(hm, i, g);
    std::array<int, kMaxDim> partner{};
    for (int a = 0; a < g.d; ++a) partner[a] = m[a] == -g.N / 2 ? m[a] : -m[a];
    const bool self = partner == m;
    const bool canonical = m >= partner;  // lexicographic
    const auto z = philox_normal_pair(mode_counter(canonical ? m : partner, g.d, time_index, stream, spec.sample), key);
    if (self) {
      out[i] = std::sqrt(var) * z[0];
    } else {
      const double s = std::sqrt(var / 2);
      out[i] = std::complex<double>(s * z[0], canonical ? s * z[1] : -s * z[1]);
    }
  });
  return out * spec.amplitude;
}

RealArray retained_modes(const NoiseSpec& spec) {
  const TorusGrid& g = spec.grid;
  const HalfModes& hm = spectral(g).modes();
  const double r = cutoff_radius(spec);
  RealArray keep(g.half_size());
  for (std::int64_t i = 0; i < keep.size(); ++i) {
    bool in = hm.msq[i] < r * r;
    if (in && spec.max_mode >= 0) {
      auto m = signed_mode(hm, i, g);
      for (int a = 0; a < g.d; ++a) in = in && std::abs(m[a]) <= spec.max_mode;
    }
    keep[i] = in ? 1.0 : 0.0;
  }
  return keep;
}

RealArray sample_space_white_noise(const NoiseSpec& spec) {
  if (spec.kind != NoiseSpec::Kind::Spatial) throw std::invalid_argument("white noise sampler needs a spatial spec");
  const TorusGrid& g = spec.grid;
  const RealArray var = RealArray::Constant(g.half_size(), g.volume());
  return spectral(g).inverse(hermitian_gaussian(spec, NoiseStream::White, 0, var));
}

RealArray sample_X_elliptic(const NoiseSpec& spec, double mu) {
  check_mu(mu);
  const TorusGrid& g = spec.grid;
  const Spectral& sp = spectral(g);
  const RealArray var = RealArray::Constant(g.half_size(), g.volume());
  ComplexArray xi = hermitian_gaussian(spec, NoiseStream::White, 0, var);
  const RealArray mult = retained_modes(spec) / (sp.modes().ksq + mu);
  return sp.inverse(xi * mult.cast<std::complex<double>>());
}

ParabolicNoise::ParabolicNoise(const NoiseSpec& spec, double mu) : spec_(spec), mu_(mu) {
  check_mu(mu);
  if (spec.kind != NoiseSpec::Kind::Spacetime) throw std::invalid_argument("parabolic noise needs a spacetime spec");
  if (!(spec.dt > 0)) throw std::invalid_argument("parabolic noise needs dt > 0");
  const TorusGrid& g = spec.grid;
  const Spectral& sp = spectral(g);
  const RealArray keep = retained_modes(spec);
  const RealArray lambda = sp.modes().ksq + mu;
  decay_ = (-lambda * spec.dt).exp();
  step_var_ = keep * g.volume() * (1.0 - (-2.0 * lambda * spec.dt).exp()) / (2.0 * lambda);
  const RealArray init_var = keep * g.volume() / (2.0 * lambda);
  xhat_ = hermitian_gaussian(spec, NoiseStream::ParabolicInit, 0, init_var);
  x_ = sp.inverse(xhat_);
}

void ParabolicNoise::advance() {
  ++step_;
  xhat_ = xhat_ * decay_.cast<std::complex<double>>() +
          hermitian_gaussian(spec_, NoiseStream::ParabolicStep, std::uint64_t(step_), step_var_);
  x_ = spectral(spec_.grid).inverse(xhat_);
}

Trajectory sample_X_parabolic(const NoiseSpec& spec, double mu, double T, int stride) {
  ParabolicNoise noise(spec, mu);
  const std::int64_t steps = std::llround(T / spec.dt);
  Trajectory traj;
  traj.grid = spec.grid;
  traj.stride = std::max(1, stride);
  for (std::int64_t n = 0; n <= steps; ++n) {
    if (n % traj.stride == 0 || n == steps) {
      traj.times.push_back(noise.time());
      traj.snapshots.push_back(noise.field());
    }
    if (n < steps) noise.advance();
  }
  return traj;
}

namespace {

template <class Term>
double lattice_sum(const NoiseSpec& spec, Term term) {
  const TorusGrid& g = spec.grid;
  const HalfModes& hm = spectral(g).modes();
  const RealArray keep = retained_modes(spec);
  double s = 0;
  for (std::int64_t i = 0; i < keep.size(); ++i)
    if (keep[i] > 0) s += half_weight(hm, i, g) * term(hm.ksq[i]);
  return spec.amplitude * spec.amplitude * s / g.volume();
}

}  // namespace

double wick_constant_elliptic(const NoiseSpec& spec, double mu) {
  check_mu(mu);
  return lattice_sum(spec, [mu](double k2) { return 1.0 / ((mu + k2) * (mu + k2)); });
}

double wick_constant_parabolic(const NoiseSpec& spec, double mu) {
  check_mu(mu);
  return lattice_sum(spec, [mu](double k2) { return 1.0 / (2.0 * (mu + k2)); });
}

double wick_constant_elliptic(const TorusGrid& grid, double mu) {
  NoiseSpec s;
  s.grid = grid;
  return wick_constant_elliptic(s, mu);
}

double wick_constant_parabolic(const TorusGrid& grid, double mu) {
  NoiseSpec s;
  s.grid = grid;
  return wick_constant_parabolic(s, mu);
}

WickPowers wick_powers(const RealArray& X, double a) {
  return {X.square() - a, X.cube() - 3.0 * a * X};
}

TreeSample elliptic_trees(const DyadicPartition& p, const RealArray& X, double a, double mu) {
  const TorusGrid& g = p.grid;
  WickPowers w = wick_powers(X, a);
  TreeSample s;
  RealArray Y3 = helmholtz_solve(g, w.x3, mu);
  RealArray Y2 = helmholtz_solve(g, w.x2, mu);
  const Blocks xb = lp_blocks(p, X), x2b = lp_blocks(p, w.x2), y3b = lp_blocks(p, Y3), y2b = lp_blocks(p, Y2);
  s.objects["Y3oX"] = para_res(y3b, xb);
  s.objects["Y2oX2"] = para_res(y2b, x2b);
  s.objects["Y3oX2"] = para_res(y3b, x2b);
  s.objects["X"] = X;
  s.objects["X2"] = std::move(w.x2);
  s.objects["X3"] = std::move(w.x3);
  s.objects["Y3"] = std::move(Y3);
  s.objects["Y2"] = std::move(Y2);
  s.resonant_mean.push_back(s.objects["Y2oX2"].mean());
  return s;
}

TreeSample parabolic_trees(const DyadicPartition& p, const NoiseSpec& spec, double mu, double T, int record_every) {
  const TorusGrid& g = p.grid;
  const Spectral& sp = spectral(g);
  ParabolicNoise noise(spec, mu);
  const double a = wick_constant_parabolic(spec, mu);
  const RealArray lambda = sp.modes().ksq + mu;
  const Eigen::ArrayXcd decay = (-lambda * spec.dt).exp().cast<std::complex<double>>();
  const Eigen::ArrayXcd phi1 = ((1.0 - (-lambda * spec.dt).exp()) / lambda).cast<std::complex<double>>();
  ComplexArray y3 = ComplexArray::Zero(g.half_size()), y2 = ComplexArray::Zero(g.half_size());
  const std::int64_t steps = std::llround(T / spec.dt);
  record_every = std::max(1, record_every);
  TreeSample s;
  auto record = [&](const RealArray& x2) {
    s.times.push_back(noise.time());
    s.resonant_mean.push_back(para_res(lp_blocks(p, sp.inverse(y2)), lp_blocks(p, x2)).mean());
  };
  for (std::int64_t n = 0; n < steps; ++n) {
    const RealArray& X = noise.field();
    WickPowers w = wick_powers(X, a);
    if (n > 0 && n % record_every == 0) record(w.x2);
    y3 = decay * y3 + phi1 * sp.forward(w.x3);
    y2 = decay * y2 + phi1 * sp.forward(w.x2);
    noise.advance();
  }
  const RealArray X = noise.field();
  RealArray X2 = X.square() - a;
  record(X2);
  RealArray Y3 = sp.inverse(y3), Y2 = sp.inverse(y2);
  const Blocks xb = lp_blocks(p, X), x2b = lp_blocks(p, X2), y3b = lp_blocks(p, Y3), y2b = lp_blocks(p, Y2);
  s.objects["Y3oX"] = para_res(y3b, xb);
  s.objects["Y2oX2"] = para_res(y2b, x2b);
  s.objects["Y3oX2"] = para_res(y3b, x2b);
  s.objects["X"] = X;
  s.objects["X2"] = std::move(X2);
  s.objects["Y3"] = std::move(Y3);
  s.objects["Y2"] = std::move(Y2);
  return s;
}

WickData tree_objects(TreeDomain domain, const DyadicPartition& p, const NoiseSpec& spec, double mu, int n_samples,
                      double T) {
  if (n_samples < 2) throw std::invalid_argument("tree_objects needs at least 2 samples for a standard error");
  const bool elliptic = domain == TreeDomain::EllipticD5;
  if (spec.grid != p.grid) throw std::invalid_argument("tree_objects: partition and noise grids differ");
  if (elliptic && spec.grid.d != 5) throw std::invalid_argument("elliptic trees are built in d = 5");
  if (!elliptic && spec.grid.d != 3) throw std::invalid_argument("parabolic trees are built in d = 3");
  WickData out;
  out.a = elliptic ? wick_constant_elliptic(spec, mu) : wick_constant_parabolic(spec, mu);
  std::vector<TreeSample> samples(static_cast<std::size_t>(n_samples));
  const int record_every = elliptic ? 1 : std::max(1, int(std::llround(T / spec.dt / 20)));
  for (int s = 0; s < n_samples; ++s) {
    NoiseSpec ss = spec;
    ss.sample = spec.sample + std::uint32_t(s);
    if (elliptic) {
      samples[std::size_t(s)] = elliptic_trees(p, sample_X_elliptic(ss, mu), out.a, mu);
    } else {
      samples[std::size_t(s)] = parabolic_trees(p, ss, mu, T, record_every);
    }
    if (s > 0) samples[std::size_t(s)].objects.clear();  // keep memory flat; only sample 0 is returned
  }
  const std::size_t nt = samples[0].resonant_mean.size();
  out.b_times = elliptic ? std::vector<double>{0.0} : samples[0].times;
  for (std::size_t t = 0; t < nt; ++t) {
    double m = 0, ss = 0;
    for (const auto& s : samples) m += 3.0 * s.resonant_mean[t] / n_samples;
    for (const auto& s : samples) ss += (3.0 * s.resonant_mean[t] - m) * (3.0 * s.resonant_mean[t] - m);
    out.b.push_back(m);
    out.b_stderr.push_back(std::sqrt(ss / (n_samples - 1) / n_samples));
  }
  const double b_final = out.b.back();
  auto& obj = samples[0].objects;
  for (auto& [name, v] : obj) {
    if (!elliptic && name == "X3") continue;
    out.objects[name] = Field{p.grid, v};
  }
  out.objects["Y2oX2-b/3"] = Field{p.grid, obj["Y2oX2"] - b_final / 3.0};
  out.objects["Y3oX2-bX"] = Field{p.grid, obj["Y3oX2"] - b_final * obj["X"]};
  return out;
}

ConvergenceReport coupled_convergence(const std::string& symbol, bool parabolic, int d, double M,
                                      const std::vector<int>& resolutions, std::uint64_t seed, double mu,
                                      double exponent, const Weight& w, int n_samples) {
  if (resolutions.size() < 2) throw std::invalid_argument("coupled_convergence needs at least two resolutions");
  if (symbol != "X" && symbol != "X2" && symbol != "X2raw" && symbol != "X3")
    throw std::invalid_argument("symbol unavailable: " + symbol);
  int finest = 0;
  for (int n : resolutions) finest = std::max(finest, n);
  const TorusGrid g = make_grid(d, M, 2 * finest);
  const DyadicPartition p = build_partition(g);
  const RealArray wt = weight_eval(w, g, 0.0);
  ConvergenceReport rep;
  rep.symbol = symbol;
  rep.resolutions = resolutions;
  rep.exponent = exponent;
  rep.distances.assign(resolutions.size() - 1, 0.0);
  rep.sup_norms.assign(resolutions.size(), 0.0);
  rep.besov_norms.assign(resolutions.size(), 0.0);
  for (int s = 0; s < n_samples; ++s) {
    std::vector<RealArray> tau;
    for (int n : resolutions) {
      NoiseSpec spec;
      spec.seed = seed;
      spec.grid = g;
      spec.sample = std::uint32_t(s);
      spec.cutoff = n / 2.0;
      spec.kind = parabolic ? NoiseSpec::Kind::Spacetime : NoiseSpec::Kind::Spatial;
      spec.dt = parabolic ? 1.0 : 0.0;
      RealArray X = parabolic ? ParabolicNoise(spec, mu).field() : sample_X_elliptic(spec, mu);
      double a = parabolic ? wick_constant_parabolic(spec, mu) : wick_constant_elliptic(spec, mu);
      if (symbol == "X")
        tau.push_back(X);
      else if (symbol == "X2")
        tau.push_back(X.square() - a);
      else if (symbol == "X2raw")
        tau.push_back(X.square());
      else
        tau.push_back(X.cube() - 3 * a * X);
    }
    for (std::size_t r = 0; r < resolutions.size(); ++r) {
      rep.sup_norms[r] += sup_norm(tau[r]) / n_samples;
      rep.besov_norms[r] += besov_norm(p, lp_blocks(p, tau[r]), exponent, wt) / n_samples;
    }
    for (std::size_t r = 0; r + 1 < resolutions.size(); ++r)
      rep.distances[r] += besov_norm(p, lp_blocks(p, tau[r + 1] - tau[r]), exponent, wt) / n_samples;
  }
  return rep;
}

}  // namespace phi4lab
