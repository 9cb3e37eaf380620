#include "phi4lab/solvers.hpp"

#include <algorithm>
#include <cmath>
#include <limits>
#include <stdexcept>

namespace phi4lab {

namespace {

double dot(const TorusGrid& g, const RealArray& a, const RealArray& b) { return g.cell_volume() * (a * b).sum(); }

double norm2(const RealArray& a) { return std::sqrt(a.square().sum()); }

// Solves (Q + 3 u^2) x = b by preconditioned conjugate gradients.
RealArray newton_direction(const TorusGrid& g, const RealArray& u, const RealArray& b, double mu) {
  const RealArray pot = 3.0 * u.square();
  const double shift = pot.mean();
  auto A = [&](const RealArray& x) { return RealArray(apply_Q(g, x, mu) + pot * x); };
  auto P = [&](const RealArray& r) { return helmholtz_solve(g, r, mu + shift); };
  RealArray x = RealArray::Zero(b.size());
  RealArray r = b;
  RealArray z = P(r);
  RealArray d = z;
  double rz = (r * z).sum();
  const double target = 1e-13 * norm2(b);
  for (int k = 0; k < 500 && norm2(r) > target; ++k) {
    const RealArray Ad = A(d);
    const double step = rz / (d * Ad).sum();
    x += step * d;
    r -= step * Ad;
    z = P(r);
    const double rz_new = (r * z).sum();
    d = z + (rz_new / rz) * d;
    rz = rz_new;
  }
  return x;
}

}  // namespace

double energy_functional(const TorusGrid& g, const RealArray& u, const RealArray& Psi, double mu) {
  const RealArray lap = laplacian(g, u);
  return g.cell_volume() * (-0.5 * u * lap + 0.5 * mu * u.square() + 0.25 * u.square().square() + Psi * u).sum();
}

RealArray energy_gradient(const TorusGrid& g, const RealArray& u, const RealArray& Psi, double mu) {
  return apply_Q(g, u, mu) + u.cube() + Psi;
}

MonotoneResult solve_elliptic_monotone(const TorusGrid& g, const RealArray& Psi, double mu, double tol, int max_iter,
                                       const RealArray* initial) {
  if (!(mu > 0)) throw std::invalid_argument("solve_elliptic_monotone requires mu > 0");
  MonotoneResult out;
  RealArray u = initial ? *initial : RealArray::Zero(Psi.size());
  const double scale = norm2(Psi) > 0 ? norm2(Psi) : 1.0;
  out.energy.push_back(energy_functional(g, u, Psi, mu));
  for (int it = 0;; ++it) {
    const RealArray G = energy_gradient(g, u, Psi, mu);
    out.residual = norm2(G) / scale;
    out.iterations = it;
    if (out.residual < tol) {
      out.converged = true;
      break;
    }
    if (it >= max_iter) break;
    const RealArray s = newton_direction(g, u, -G, mu);
    const RealArray Qs = apply_Q(g, s, mu);
    const double slope = dot(g, G, s);
    if (!(slope < 0)) break;
    // Energy change I(u + t s) - I(u), expanded so small decreases are resolved.
    auto delta = [&](double t) {
      const RealArray q = t * s;
      return g.cell_volume() *
             (q * G + 0.5 * t * q * Qs + 1.5 * u.square() * q.square() + u * q.cube() + 0.25 * q.square().square())
                 .sum();
    };
    double t = 1.0, dI = delta(t);
    int halvings = 0;
    while (!(dI <= 1e-4 * t * slope) && halvings < 50) {
      t *= 0.5;
      dI = delta(t);
      ++halvings;
    }
    if (!(dI < 0)) break;  // no representable decrease left
    u += t * s;
    out.energy.push_back(out.energy.back() + dI);
  }
  out.psi = std::move(u);
  return out;
}

double localizer_K(double weighted_sup, double kappa, double alpha) {
  return 2.0 * std::log2(1.0 + weighted_sup) / (2.0 - kappa - alpha);
}

SolutionPair solve_elliptic_phi44(const DyadicPartition& p, const EllipticNoise& noise, const SolverConfig& cfg) {
  const TorusGrid& g = p.grid;
  if (!(cfg.mu > 0)) throw std::invalid_argument("solve_elliptic_phi44 requires mu > 0");
  const Weight rho = Weight::poly_space(cfg.nu);
  const RealArray rho_x = weight_eval(rho, g);
  const Localizer loc = build_localizer(p, rho, cfg.L);
  const Blocks Xb = lp_blocks(p, noise.X), X2b = lp_blocks(p, noise.X2);
  const double scale = norm2(noise.X3) > 0 ? norm2(noise.X3) : 1.0;

  SolutionPair out;
  RealArray phi = RealArray::Zero(g.size()), psi = RealArray::Zero(g.size());
  double theta = cfg.theta, K = 0, prev = std::numeric_limits<double>::infinity();
  bool frozen = false;
  for (int it = 0; it <= cfg.max_iter; ++it) {
    const RealArray v = phi + psi;
    const Blocks vb = lp_blocks(p, v), v2b = lp_blocks(p, v.square());
    const auto [x2_hi, x2_lo] = localize_split(loc, X2b, cfg.L + K / 2);
    const auto [x_hi, x_lo] = localize_split(loc, Xb, cfg.L + K);
    const RealArray Phi = noise.X3 + 3.0 * para_lt(vb, lp_blocks(p, x2_hi)) + 3.0 * para_lt(v2b, lp_blocks(p, x_hi));
    RealArray Psi = phi.cube() + 3.0 * psi * phi.square() + 3.0 * psi.square() * phi +
                    3.0 * para_lt(vb, lp_blocks(p, x2_lo)) + 3.0 * para_lt(v2b, lp_blocks(p, x_lo)) +
                    3.0 * para_geq(vb, X2b) + 3.0 * para_geq(v2b, Xb);

    const RealArray r_phi = apply_Q(g, phi, cfg.mu) + Phi;
    const RealArray r_psi = energy_gradient(g, psi, Psi, cfg.mu);
    const double res = std::sqrt(r_phi.square().sum() + r_psi.square().sum()) / scale;
    out.iterations = it;
    out.residual = res;
    out.Psi = Psi;
    if (frozen && res < cfg.tol) {
      out.converged = true;
      break;
    }
    if (it == cfg.max_iter) break;

    const RealArray phi_new = -helmholtz_solve(g, Phi, cfg.mu);
    const MonotoneResult inner = solve_elliptic_monotone(g, Psi, cfg.mu, 1e-13, 100, &psi);
    if (res > prev && theta > cfg.theta_floor) theta = std::max(cfg.theta_floor, theta / 2);
    prev = res;
    phi = (1 - theta) * phi + theta * phi_new;
    psi = (1 - theta) * psi + theta * inner.psi;

    if (!frozen) {
      const double K_new = localizer_K((rho_x * (phi + psi)).abs().maxCoeff(), cfg.kappa, cfg.alpha);
      frozen = std::abs(K_new - K) <= 0.1 * std::max(K, K_new) || (K_new == 0 && K == 0);
      K = K_new;
    }
  }
  const RealArray v = phi + psi;
  const RealArray total =
      apply_Q(g, v, cfg.mu) + noise.X3 + 3.0 * v * noise.X2 + 3.0 * v.square() * noise.X + v.cube();
  out.total_residual = norm2(total) / scale;
  out.theta = theta;
  out.K = K;
  out.K_frozen = frozen;
  out.phi_besov = besov_norm(p, phi, cfg.alpha, rho);
  out.psi_weighted = (rho_x * psi).abs().maxCoeff();
  out.phi = std::move(phi);
  out.psi = std::move(psi);
  return out;
}

RealArray step_parabolic(const TorusGrid& g, const RealArray& state, const RealArray& forcing, double dt, double mu) {
  if (!(dt > 0)) throw std::invalid_argument("step_parabolic requires dt > 0");
  const Spectral& sp = spectral(g);
  const RealArray lambda = sp.modes().ksq + mu;
  const RealArray decay = (-lambda * dt).exp();
  // (1 - e^{-x}) / lambda via expm1 keeps small lambda dt accurate
  const RealArray phi1 = -(-lambda * dt).unaryExpr([](double x) { return std::expm1(x); }) / lambda;
  const ComplexArray c = sp.forward(state) * decay.cast<std::complex<double>>() +
                         sp.forward(forcing) * phi1.cast<std::complex<double>>();
  return sp.inverse(c);
}

int storage_stride(double T, double dt) { return std::max(1, int(std::ceil(T / (100.0 * dt) - 1e-9))); }

namespace {

int substep_count(double dt, double mu, double vsup) {
  const double limit = 0.5 / (mu + 3.0 * vsup * vsup);
  return std::max(1, int(std::ceil(dt / limit - 1e-12)));
}

bool blown(const RealArray& v) { return !v.allFinite() || v.abs().maxCoeff() > 1e12; }

struct Recorder {
  const DyadicPartition* p;
  RealArray rho;
  Weight w;
  double alpha;
  int stride;

  NormRow row(double t, const RealArray& v) const {
    return {t, sup_norm(v), (rho * v).abs().maxCoeff(),
            p ? besov_norm(*p, lp_blocks(*p, v), alpha, rho) : std::numeric_limits<double>::quiet_NaN()};
  }
};

void init_trajectory(Trajectory& tr, const TorusGrid& g, int stride) {
  tr.grid = g;
  tr.stride = stride;
}

void store(Trajectory& tr, double t, const RealArray& v) {
  tr.times.push_back(t);
  tr.snapshots.push_back(v);
}

}  // namespace

ParabolicResult solve_phi42_monolithic(const ParabolicNoise& noise0, const RealArray& v0, const SolverConfig& cfg) {
  ParabolicNoise noise = noise0;
  const TorusGrid& g = noise.spec().grid;
  const double dt = noise.spec().dt;
  const double a = cfg.renormalize ? wick_constant_parabolic(noise.spec(), cfg.mu) : 0.0;
  const std::int64_t steps = std::llround(cfg.T / dt);
  const int stride = storage_stride(cfg.T, dt);
  const DyadicPartition part = g.N >= 8 ? build_partition(g) : DyadicPartition{};
  const Recorder rec{g.N >= 8 ? &part : nullptr, weight_eval(Weight::poly_space(cfg.nu), g), {}, cfg.alpha, stride};

  ParabolicResult out;
  init_trajectory(out.v, g, stride);
  RealArray v = v0;
  out.norms.push_back(rec.row(0.0, v));
  store(out.v, 0.0, v);
  for (std::int64_t n = 0; n < steps; ++n) {
    const RealArray& X = noise.field();
    const RealArray X2 = X.square() - a;
    const RealArray X3 = X.cube() - 3.0 * a * X;
    const int ns = substep_count(dt, cfg.mu, sup_norm(v));
    for (int s = 0; s < ns; ++s) {
      const RealArray F = -(X3 + 3.0 * X2 * v + 3.0 * X * v.square() + v.cube());
      v = step_parabolic(g, v, F, dt / ns, cfg.mu);
    }
    out.substeps += ns;
    noise.advance();
    const double t = double(n + 1) * dt;
    if (blown(v)) {
      out.blew_up = true;
      out.diagnostic = "blow-up at t=" + std::to_string(t) + " (||v||_inf > 1e12 or non-finite)";
      break;
    }
    out.norms.push_back(rec.row(t, v));
    if ((n + 1) % stride == 0 || n + 1 == steps) store(out.v, t, v);
  }
  return out;
}

ParabolicResult solve_phi42_split(const DyadicPartition& p, const ParabolicNoise& noise0, const RealArray& phi0,
                                  const RealArray& psi0, const SolverConfig& cfg) {
  ParabolicNoise noise = noise0;
  const TorusGrid& g = p.grid;
  if (noise.spec().grid != g) throw std::invalid_argument("split solver: noise and partition grids differ");
  const double dt = noise.spec().dt;
  const double a = cfg.renormalize ? wick_constant_parabolic(noise.spec(), cfg.mu) : 0.0;
  const std::int64_t steps = std::llround(cfg.T / dt);
  const int stride = storage_stride(cfg.T, dt);
  const Weight rho_st = Weight::poly_spacetime(cfg.nu);
  std::vector<double> sample_times;
  for (int i = 0; i <= 64; ++i) sample_times.push_back(cfg.T * i / 64.0);
  const SpacetimeLocalizer loc = build_spacetime_localizer(p, rho_st, cfg.L, cfg.T, sample_times);
  const Recorder rec{&p, weight_eval(Weight::poly_space(cfg.nu), g), {}, cfg.alpha, stride};

  ParabolicResult out;
  init_trajectory(out.v, g, stride);
  init_trajectory(out.phi, g, stride);
  init_trajectory(out.psi, g, stride);
  RealArray phi = phi0, psi = psi0;
  auto keep = [&](double t) {
    store(out.v, t, phi + psi);
    store(out.phi, t, phi);
    store(out.psi, t, psi);
  };
  out.norms.push_back(rec.row(0.0, phi + psi));
  keep(0.0);
  for (std::int64_t n = 0; n < steps; ++n) {
    const RealArray& X = noise.field();
    const RealArray X2 = X.square() - a;
    const RealArray X3 = X.cube() - 3.0 * a * X;
    const Blocks Xb = lp_blocks(p, X), X2b = lp_blocks(p, X2);
    const int ns = substep_count(dt, cfg.mu, sup_norm(phi + psi));
    const double h = dt / ns;
    for (int s = 0; s < ns; ++s) {
      const double t = double(n) * dt + s * h;
      const RealArray v = phi + psi;
      const double K = localizer_K((weight_eval(rho_st, g, t) * v).abs().maxCoeff(), cfg.kappa, cfg.alpha);
      if (s == 0) out.K.push_back(K);
      const auto [x2_hi, x2_lo] = localize_spacetime_split(loc, X2b, t, cfg.L + K / 2);
      const auto [x_hi, x_lo] = localize_spacetime_split(loc, Xb, t, cfg.L + K);
      const Blocks vb = lp_blocks(p, v), v2b = lp_blocks(p, v.square());
      const RealArray Phi = X3 + 3.0 * para_lt(vb, lp_blocks(p, x2_hi)) + 3.0 * para_lt(v2b, lp_blocks(p, x_hi));
      const RealArray Psi = phi.cube() + 3.0 * psi * phi.square() + 3.0 * psi.square() * phi +
                            3.0 * para_lt(vb, lp_blocks(p, x2_lo)) + 3.0 * para_lt(v2b, lp_blocks(p, x_lo)) +
                            3.0 * para_geq(vb, X2b) + 3.0 * para_geq(v2b, Xb);
      RealArray psi_forcing = -(psi.cube() + Psi);
      phi = step_parabolic(g, phi, -Phi, h, cfg.mu);
      psi = step_parabolic(g, psi, psi_forcing, h, cfg.mu);
    }
    out.substeps += ns;
    noise.advance();
    const double t = double(n + 1) * dt;
    if (blown(phi + psi)) {
      out.blew_up = true;
      out.diagnostic = "blow-up at t=" + std::to_string(t) + " (||phi+psi||_inf > 1e12 or non-finite)";
      break;
    }
    out.norms.push_back(rec.row(t, phi + psi));
    if ((n + 1) % stride == 0 || n + 1 == steps) keep(t);
  }
  return out;
}

double cubic_ode_solution(double c0, double mu, double t) {
  const double e = std::exp(-2.0 * mu * t);
  const double v2 = mu * c0 * c0 * e / (mu + c0 * c0 * (1.0 - e));
  return std::copysign(std::sqrt(v2), c0);
}

ComingDownIC prepare_coming_down_ic(const DyadicPartition& p, const RealArray& phi0_rough, const RealArray& X0,
                                    double eps, const Weight& rho0) {
  if (!(eps > 0 && eps < 1)) throw std::invalid_argument("prepare_coming_down_ic requires eps in (0, 1)");
  const double norm = besov_norm(p, phi0_rough, -1.0 + eps, rho0.pow(1.0 + eps));
  ComingDownIC ic;
  ic.L = norm > 0 ? std::max(0.0, std::log2(norm) / eps) : 0.0;
  const Localizer loc = build_localizer(p, rho0, ic.L);
  auto [hi, lo] = localize_split(loc, lp_blocks(p, phi0_rough), ic.L);
  ic.phi0 = hi - X0;
  ic.psi0 = std::move(lo);
  return ic;
}

RealArray coming_down_profile(const TorusGrid& g, std::uint64_t seed, int max_mode) {
  NoiseSpec spec;
  spec.seed = seed;
  spec.grid = g;
  spec.sample = 1u << 20;  // separate from every ensemble member used by the solvers
  spec.max_mode = max_mode;
  const RealArray var = RealArray::Constant(g.half_size(), g.volume());
  const Spectral& sp = spectral(g);
  ComplexArray c = hermitian_gaussian(spec, NoiseStream::Profile, 0, var);
  c *= (retained_modes(spec) / (sp.modes().ksq + 1.0)).cast<std::complex<double>>();
  RealArray f = sp.inverse(c);
  const double s = sup_norm(f);
  return s > 0 ? RealArray(f / s) : f;
}

ComingDownReport coming_down_experiment(const DyadicPartition& p, const std::vector<double>& magnitudes,
                                        const SolverConfig& cfg, double noise_amplitude, double collapse_factor,
                                        int profile_modes) {
  if (magnitudes.empty()) throw std::invalid_argument("coming_down_experiment needs magnitudes");
  const TorusGrid& g = p.grid;
  NoiseSpec spec;
  spec.seed = cfg.seed;
  spec.kind = NoiseSpec::Kind::Spacetime;
  spec.grid = g;
  spec.dt = cfg.dt;
  spec.amplitude = noise_amplitude;
  const ParabolicNoise noise(spec, cfg.mu);
  const Weight rho = Weight::poly_space(cfg.nu);
  // magnitudes are measured in the norm the initial-data preparation uses
  RealArray profile = coming_down_profile(g, cfg.seed, profile_modes);
  const double unit = besov_norm(p, profile, -1.0 + kComingDownEps, rho.pow(1.0 + kComingDownEps));
  if (unit > 0) profile /= unit;

  ComingDownReport rep;
  rep.magnitudes = magnitudes;
  for (double m : magnitudes) {
    const ComingDownIC ic = prepare_coming_down_ic(p, m * profile, noise.field(), kComingDownEps, rho);
    const ParabolicResult r = solve_phi42_split(p, noise, ic.phi0, ic.psi0, cfg);
    if (r.blew_up) rep.blew_up = true;
    std::vector<double> s;
    if (rep.times.empty())
      for (const auto& row : r.norms) rep.times.push_back(row.t);
    for (const auto& row : r.norms) s.push_back(row.weighted_sup);
    rep.series.push_back(std::move(s));
  }
  std::size_t nt = rep.times.size();
  for (const auto& s : rep.series) nt = std::min(nt, s.size());
  rep.times.resize(nt);

  // collapse time: the earliest t after which every ratio stays within the factor
  std::size_t first_ok = nt;
  for (std::size_t i = nt; i-- > 0;) {
    double lo = std::numeric_limits<double>::infinity(), hi = 0;
    for (const auto& s : rep.series) lo = std::min(lo, s[i]), hi = std::max(hi, s[i]);
    if (!(hi <= collapse_factor * lo)) break;
    first_ok = i;
  }
  rep.collapsed = first_ok < nt && !rep.blew_up;
  rep.t_star = rep.collapsed ? rep.times[first_ok] : std::numeric_limits<double>::infinity();

  const std::size_t largest = std::size_t(std::max_element(magnitudes.begin(), magnitudes.end()) - magnitudes.begin());
  auto envelope = [](double t) { return 1.0 + 1.0 / std::sqrt(t); };
  for (std::size_t i = 0; i < nt; ++i)
    if (rep.times[i] > 0) rep.C = std::max(rep.C, rep.series[largest][i] / envelope(rep.times[i]));
  rep.envelope_margin = std::numeric_limits<double>::infinity();
  for (const auto& s : rep.series)
    for (std::size_t i = 0; i < nt; ++i)
      if (rep.times[i] > 0) rep.envelope_margin = std::min(rep.envelope_margin, rep.C * envelope(rep.times[i]) - s[i]);
  rep.envelope_ok = !rep.blew_up && rep.envelope_margin >= -1e-12 * rep.C;
  return rep;
}

MaxPrincipleReport check_max_principle(const TorusGrid& g, const RealArray& psi, const RealArray& Psi, double mu,
                                       const Weight& w, double residual_tol) {
  // relative to the size of the individual terms, so a small forcing does not inflate it
  const double terms = norm2(apply_Q(g, psi, mu)) + norm2(psi.cube()) + norm2(Psi);
  const double res = norm2(energy_gradient(g, psi, Psi, mu)) / (terms > 0 ? terms : 1.0);
  if (!(res < residual_tol))
    throw std::runtime_error("check_max_principle: psi does not solve Q psi + psi^3 + Psi = 0 (residual " +
                             std::to_string(res) + ")");
  const RealArray rho = weight_eval(w, g);
  MaxPrincipleReport rep;
  double grad2 = 0, lap = 0;
  if (w.kind == Weight::Kind::PolySpace) {
    const double nu = w.nu * w.power;
    const RealArray r2 = centered_radius_sq(g);
    const RealArray s = 1.0 + r2;
    grad2 = (nu * nu * r2 / s.square()).maxCoeff();
    lap = (-nu * g.d / s + nu * (nu + 2) * r2 / s.square()).abs().maxCoeff();
  } else if (w.kind != Weight::Kind::Constant) {
    throw std::invalid_argument("check_max_principle supports constant and poly-space weights");
  }
  rep.c = std::abs(mu) + grad2 + lap;
  const RealArray rpsi = rho * psi;
  const double top = std::max(rpsi.maxCoeff(), 0.0), bottom = std::max(-rpsi.minCoeff(), 0.0);
  rep.lhs = std::pow(std::max(top, bottom), 3);
  const double forcing = (rho.cube() * Psi).abs().maxCoeff();
  rep.rhs = forcing + rep.c * (rho.square() * rpsi).abs().maxCoeff();
  rep.slack = 1e-6 * std::max({1.0, forcing, rep.lhs});
  rep.holds = rep.lhs <= rep.rhs + rep.slack;
  return rep;
}

double trajectory_distance(const Trajectory& a, const Trajectory& b) {
  const std::size_t n = std::min(a.snapshots.size(), b.snapshots.size());
  double d = 0;
  for (std::size_t i = 0; i < n; ++i) d = std::max(d, sup_norm(a.snapshots[i] - b.snapshots[i]));
  return d;
}

double trajectory_sup(const Trajectory& a) {
  double s = 0;
  for (const auto& v : a.snapshots) s = std::max(s, sup_norm(v));
  return s;
}

UniquenessReport uniqueness_probe(const DyadicPartition& p, const ParabolicNoise& noise, const RealArray& phi0,
                                  const SolverConfig& cfg, const std::vector<double>& L_values) {
  UniquenessReport rep;
  rep.L_values = L_values;
  std::vector<Trajectory> runs;
  const RealArray zero = RealArray::Zero(phi0.size());
  for (double L : L_values) {
    SolverConfig c = cfg;
    c.L = L;
    ParabolicResult r = solve_phi42_split(p, noise, phi0, zero, c);
    if (r.blew_up) throw std::runtime_error("uniqueness_probe: " + r.diagnostic);
    runs.push_back(std::move(r.v));
  }
  for (const auto& r : runs) rep.scale = std::max(rep.scale, trajectory_sup(r));
  const double scale = rep.scale > 0 ? rep.scale : 1.0;
  rep.discrepancy.assign(runs.size(), std::vector<double>(runs.size(), 0.0));
  for (std::size_t i = 0; i < runs.size(); ++i)
    for (std::size_t j = 0; j < runs.size(); ++j) {
      rep.discrepancy[i][j] = trajectory_distance(runs[i], runs[j]) / scale;
      rep.max_discrepancy = std::max(rep.max_discrepancy, rep.discrepancy[i][j]);
    }
  return rep;
}

TrajectoryConvergence coupled_trajectory_convergence(const SolverConfig& cfg, const std::vector<int>& resolutions,
                                                     double exponent) {
  if (resolutions.size() < 2) throw std::invalid_argument("need at least two resolutions");
  int finest = *std::max_element(resolutions.begin(), resolutions.end());
  const TorusGrid g = make_grid(cfg.grid.d, cfg.grid.M, finest);
  const DyadicPartition p = build_partition(g);
  const RealArray rho = weight_eval(Weight::poly_space(cfg.nu), g);
  TrajectoryConvergence rep;
  rep.resolutions = resolutions;
  std::vector<Trajectory> runs;
  for (int n : resolutions) {
    NoiseSpec spec;
    spec.seed = cfg.seed;
    spec.kind = NoiseSpec::Kind::Spacetime;
    spec.grid = g;
    spec.dt = cfg.dt;
    spec.cutoff = n / 2.0;
    ParabolicResult r = solve_phi42_monolithic(ParabolicNoise(spec, cfg.mu), RealArray::Zero(g.size()), cfg);
    if (r.blew_up) throw std::runtime_error("coupled_trajectory_convergence: " + r.diagnostic);
    rep.sup_norms.push_back(trajectory_sup(r.v));
    double b = 0;
    for (const auto& v : r.v.snapshots) b = std::max(b, besov_norm(p, lp_blocks(p, v), exponent, rho));
    rep.besov_norms.push_back(b);
    runs.push_back(std::move(r.v));
  }
  for (std::size_t r = 0; r + 1 < runs.size(); ++r) {
    double d = 0;
    const std::size_t n = std::min(runs[r].snapshots.size(), runs[r + 1].snapshots.size());
    for (std::size_t i = 0; i < n; ++i)
      d = std::max(d, besov_norm(p, lp_blocks(p, runs[r + 1].snapshots[i] - runs[r].snapshots[i]), exponent, rho));
    rep.distances.push_back(d);
  }
  return rep;
}

}  // namespace phi4lab
