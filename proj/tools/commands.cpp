#include "commands.hpp"

#include "phi4lab/lp.hpp"
#include "phi4lab/paracalc.hpp"
#include "phi4lab/philox.hpp"
#include "phi4lab/solvers.hpp"
#include "phi4lab/stochastic.hpp"

#include <chrono>
#include <cmath>
#include <cstdio>
#include <fstream>
#include <iostream>
#include <random>
#include <sstream>

namespace phi4lab::cli {

namespace fs = std::filesystem;
using io::Config;
using io::KeySpec;
using io::ValueType;

namespace {

const std::string kTwoPi = "6.283185307179586";

KeySpec key(std::string name, ValueType t, std::string fallback, std::string help, bool required = false) {
  return {std::move(name), t, required, std::move(fallback), std::move(help)};
}

io::Schema with_common(io::Schema s, bool stochastic) {
  s.push_back(key("out", ValueType::String, "", "output directory", true));
  if (stochastic) s.push_back(key("seed", ValueType::Int, "", "random seed (required)", true));
  return s;
}

TorusGrid grid_from(const Config& c, int d) { return make_grid(d, io::get_double(c, "M"), io::get_int(c, "N")); }

NoiseSpec noise_from(const Config& c, const TorusGrid& g, bool spacetime) {
  NoiseSpec s;
  s.seed = std::uint64_t(io::get_int(c, "seed"));
  s.grid = g;
  s.kind = spacetime ? NoiseSpec::Kind::Spacetime : NoiseSpec::Kind::Spatial;
  if (io::has(c, "dt")) s.dt = io::get_double(c, "dt");
  if (io::has(c, "cutoff")) s.cutoff = io::get_double(c, "cutoff");
  if (io::has(c, "noise_amplitude")) s.amplitude = io::get_double(c, "noise_amplitude");
  return s;
}

SolverConfig solver_from(const Config& c, const TorusGrid& g) {
  SolverConfig s;
  s.grid = g;
  s.mu = io::get_double(c, "mu");
  s.seed = std::uint64_t(io::get_int(c, "seed"));
  auto opt = [&](const char* k, double& v) {
    if (io::has(c, k)) v = io::get_double(c, k);
  };
  opt("L", s.L);
  opt("dt", s.dt);
  opt("T", s.T);
  opt("theta", s.theta);
  opt("tol", s.tol);
  opt("nu", s.nu);
  opt("kappa", s.kappa);
  opt("alpha", s.alpha);
  if (io::has(c, "max_iter")) s.max_iter = io::get_int(c, "max_iter");
  if (io::has(c, "renormalize")) s.renormalize = io::get_bool(c, "renormalize");
  return s;
}

std::string file_name(const std::string& stem, int index) {
  char buf[64];
  std::snprintf(buf, sizeof buf, "%s_%04d.fld", stem.c_str(), index);
  return buf;
}

std::string safe_name(std::string s) {
  for (auto& ch : s)
    if (ch == '/') ch = '_';
  return s;
}

void write_trajectory(const fs::path& out, const std::string& stem, const Trajectory& tr) {
  for (std::size_t i = 0; i < tr.snapshots.size(); ++i)
    write_fld1((out / file_name(stem, int(i))).string(), Field{tr.grid, tr.snapshots[i]});
  std::vector<std::vector<double>> rows;
  for (std::size_t i = 0; i < tr.times.size(); ++i) rows.push_back({double(i), tr.times[i]});
  io::write_csv(out / (stem + "_times.csv"), {"index", "t"}, rows);
}

void write_norms(const fs::path& path, const std::vector<NormRow>& norms) {
  std::vector<std::vector<double>> rows;
  for (const auto& r : norms) rows.push_back({r.t, r.sup_norm, r.weighted_sup, r.besov_alpha});
  io::write_csv(path, {"t", "sup_norm", "weighted_sup", "besov_alpha"}, rows);
}

// ---------------------------------------------------------------- commands

int cmd_sample_noise(const Config& c, const fs::path& out, std::ostream& log) {
  const std::string field = io::get_string(c, "field");
  const TorusGrid g = grid_from(c, io::get_int(c, "d"));
  const double mu = io::get_double(c, "mu");
  const int samples = io::get_int(c, "samples");
  if (samples < 1) throw UsageError("samples must be >= 1");
  std::ofstream ens(out / "ensemble.csv");
  ens << "seed,N,M,mu,dt,symbol,path\n";
  auto record = [&](const NoiseSpec& s, const std::string& symbol, const std::string& path) {
    ens << s.seed << ',' << g.N << ',' << io::format_number(g.M) << ',' << io::format_number(mu) << ','
        << io::format_number(s.dt) << ',' << symbol << ',' << path << '\n';
  };
  int written = 0;
  for (int k = 0; k < samples; ++k) {
    NoiseSpec s = noise_from(c, g, field == "X-parabolic");
    s.sample = std::uint32_t(k);
    if (field == "white" || field == "X-elliptic") {
      const RealArray v = field == "white" ? sample_space_white_noise(s) : sample_X_elliptic(s, mu);
      const std::string path = file_name("sample", k);
      write_fld1((out / path).string(), Field{g, v});
      record(s, field, path);
      ++written;
    } else if (field == "X-parabolic") {
      const Trajectory tr = sample_X_parabolic(s, mu, io::get_double(c, "T"), io::get_int(c, "stride"));
      for (std::size_t i = 0; i < tr.snapshots.size(); ++i) {
        const std::string path = file_name("sample_" + std::to_string(k), int(i));
        write_fld1((out / path).string(), Field{g, tr.snapshots[i]});
        record(s, field + "@t=" + io::format_number(tr.times[i]), path);
        ++written;
      }
    } else {
      throw UsageError("field must be white, X-elliptic or X-parabolic, got '" + field + "'");
    }
  }
  log << "wrote " << written << " snapshots\n";
  return 0;
}

int cmd_build_objects(const Config& c, const fs::path& out, std::ostream& log) {
  const std::string domain = io::get_string(c, "domain");
  if (domain != "elliptic" && domain != "parabolic") throw UsageError("domain must be elliptic or parabolic");
  const bool elliptic = domain == "elliptic";
  const TorusGrid g = grid_from(c, elliptic ? 5 : 3);
  const DyadicPartition p = build_partition(g);
  const NoiseSpec s = noise_from(c, g, !elliptic);
  const double mu = io::get_double(c, "mu");
  const WickData w = tree_objects(elliptic ? TreeDomain::EllipticD5 : TreeDomain::ParabolicD3, p, s, mu,
                                  io::get_int(c, "samples"), io::get_double(c, "T"));
  for (const auto& [name, f] : w.objects) write_fld1((out / (safe_name(name) + ".fld")).string(), f);
  std::vector<std::vector<double>> rows;
  for (std::size_t i = 0; i < w.b.size(); ++i) rows.push_back({w.b_times[i], w.b[i], w.b_stderr[i]});
  io::write_csv(out / "b.csv", {"t", "b", "b_stderr"}, rows);
  io::write_csv(out / "a.csv", {"a"}, {{w.a}});
  log << "a = " << io::format_number(w.a) << ", b = " << io::format_number(w.b.back()) << " +- "
      << io::format_number(w.b_stderr.back()) << '\n';
  return 0;
}

int cmd_norms(const Config& c, const fs::path& out, std::ostream& log) {
  std::vector<std::string> paths;
  {
    std::istringstream in(io::get_string(c, "input"));
    std::string s;
    while (std::getline(in, s, ','))
      if (!s.empty()) paths.push_back(s);
  }
  if (paths.empty()) throw UsageError("input lists no files");
  std::vector<RealArray> ensemble;
  TorusGrid g;
  for (std::size_t i = 0; i < paths.size(); ++i) {
    Field f = read_fld1(paths[i]);
    if (i == 0) g = f.grid;
    if (f.grid != g) throw UsageError("input files are on different grids: " + paths[i]);
    ensemble.push_back(std::move(f.values));
  }
  const DyadicPartition p = build_partition(g);
  const Weight w = Weight::poly_space(io::get_double(c, "nu"));
  const double alpha = io::get_double(c, "alpha");
  std::vector<std::vector<double>> rows;
  for (const auto& r : besov_table(p, ensemble[0], w)) rows.push_back({double(r.j), r.block_sup, r.weighted_block_sup});
  io::write_csv(out / "blocks.csv", {"j", "block_sup", "weighted_block_sup"}, rows);
  rows.clear();
  for (std::size_t i = 0; i < ensemble.size(); ++i) rows.push_back({double(i), besov_norm(p, ensemble[i], alpha, w)});
  io::write_csv(out / "besov.csv", {"index", "besov_norm"}, rows);
  if (p.j_max >= 2) {
    const std::string stat = io::get_string(c, "stat");
    if (stat != "sup" && stat != "rms" && stat != "moment") throw UsageError("stat must be sup, rms or moment");
    const RegularityFit fit =
        estimate_regularity(p, ensemble, 0, p.j_max, stat == "sup" ? BlockStat::Sup : BlockStat::Rms,
                            stat == "moment" ? Pooling::RootMeanSquare : Pooling::MeanOfLogs);
    rows.clear();
    for (std::size_t i = 0; i < fit.j.size(); ++i)
      rows.push_back({double(fit.j[i]), fit.log2_mean[i], fit.slope, fit.std_error});
    io::write_csv(out / "regularity.csv", {"j", "log2_mean", "fit_slope", "stderr"}, rows);
    log << "fitted slope " << io::format_number(fit.slope) << " +- " << io::format_number(fit.std_error) << '\n';
  }
  return 0;
}

int cmd_solve_elliptic(const Config& c, const fs::path& out, std::ostream& log) {
  const TorusGrid g = grid_from(c, io::get_int(c, "d"));
  const DyadicPartition p = build_partition(g);
  const SolverConfig cfg = solver_from(c, g);
  const NoiseSpec s = noise_from(c, g, false);
  EllipticNoise noise;
  noise.X = sample_X_elliptic(s, cfg.mu);
  const double a = cfg.renormalize ? wick_constant_elliptic(s, cfg.mu) : 0.0;
  const WickPowers wp = wick_powers(noise.X, a);
  noise.X2 = wp.x2;
  noise.X3 = wp.x3;
  const SolutionPair sol = solve_elliptic_phi44(p, noise, cfg);
  write_fld1((out / "phi.fld").string(), Field{g, sol.phi});
  write_fld1((out / "psi.fld").string(), Field{g, sol.psi});
  write_fld1((out / "v.fld").string(), Field{g, RealArray(sol.phi + sol.psi)});
  MaxPrincipleReport mp;
  bool mp_checked = false;
  try {
    mp = check_max_principle(g, sol.psi, sol.Psi, cfg.mu, Weight::poly_space(cfg.nu), 1e-6);
    mp_checked = true;
  } catch (const std::runtime_error& e) {
    log << "maximum principle not checked: " << e.what() << '\n';
  }
  io::write_csv(out / "report.csv",
                {"iterations", "residual", "total_residual", "converged", "K", "K_frozen", "theta", "phi_besov",
                 "psi_weighted", "a", "maxp_lhs", "maxp_rhs", "maxp_c", "maxp_holds"},
                {{double(sol.iterations), sol.residual, sol.total_residual, double(sol.converged), sol.K,
                  double(sol.K_frozen), sol.theta, sol.phi_besov, sol.psi_weighted, a, mp.lhs, mp.rhs, mp.c,
                  double(mp_checked && mp.holds)}});
  log << (sol.converged ? "converged" : "did not converge") << " after " << sol.iterations
      << " iterations, residual " << io::format_number(sol.residual) << '\n';
  return sol.converged && mp_checked && mp.holds ? 0 : 1;
}

int cmd_solve_parabolic(const Config& c, const fs::path& out, std::ostream& log) {
  const TorusGrid g = grid_from(c, io::get_int(c, "d"));
  const SolverConfig cfg = solver_from(c, g);
  const ParabolicNoise noise(noise_from(c, g, true), cfg.mu);
  const RealArray v0 = RealArray::Constant(g.size(), io::get_double(c, "v0"));
  const std::string solver = io::get_string(c, "solver");
  ParabolicResult r;
  if (solver == "monolithic") {
    r = solve_phi42_monolithic(noise, v0, cfg);
  } else if (solver == "split") {
    const DyadicPartition p = build_partition(g);
    r = solve_phi42_split(p, noise, RealArray::Zero(g.size()), v0, cfg);
    write_trajectory(out, "phi", r.phi);
    write_trajectory(out, "psi", r.psi);
  } else {
    throw UsageError("solver must be monolithic or split, got '" + solver + "'");
  }
  write_norms(out / "norms.csv", r.norms);
  write_trajectory(out, "v", r.v);
  if (r.blew_up) {
    std::ofstream(out / "diagnostic.txt") << r.diagnostic << '\n';
    log << r.diagnostic << '\n';
    return 1;
  }
  log << "completed " << r.norms.size() - 1 << " steps (" << r.substeps << " substeps)\n";
  return 0;
}

int cmd_coming_down(const Config& c, const fs::path& out, std::ostream& log) {
  const TorusGrid g = grid_from(c, io::get_int(c, "d"));
  const DyadicPartition p = build_partition(g);
  const SolverConfig cfg = solver_from(c, g);
  const std::vector<double> mags = io::get_doubles(c, "magnitudes");
  const ComingDownReport rep = coming_down_experiment(p, mags, cfg, io::get_double(c, "noise_amplitude"),
                                                      io::get_double(c, "collapse_factor"),
                                                      io::get_int(c, "profile_modes"));
  std::vector<std::string> header{"t"};
  for (double m : mags) header.push_back("s_" + io::format_number(m));
  std::vector<std::vector<double>> rows;
  for (std::size_t i = 0; i < rep.times.size(); ++i) {
    std::vector<double> row{rep.times[i]};
    for (const auto& s : rep.series) row.push_back(s[i]);
    rows.push_back(std::move(row));
  }
  io::write_csv(out / "series.csv", header, rows);
  const double t_max = io::get_double(c, "t_star_max");
  const bool ok = rep.collapsed && rep.t_star <= t_max && rep.envelope_ok;
  io::write_csv(out / "report.csv", {"t_star", "collapsed", "C", "envelope_margin", "envelope_ok", "blew_up"},
                {{rep.t_star, double(rep.collapsed), rep.C, rep.envelope_margin, double(rep.envelope_ok),
                  double(rep.blew_up)}});
  log << "t* = " << io::format_number(rep.t_star) << ", C = " << io::format_number(rep.C)
      << ", envelope " << (rep.envelope_ok ? "holds" : "violated") << '\n';
  return ok ? 0 : 1;
}

int cmd_uniqueness(const Config& c, const fs::path& out, std::ostream& log) {
  const TorusGrid g = grid_from(c, io::get_int(c, "d"));
  const DyadicPartition p = build_partition(g);
  const SolverConfig cfg = solver_from(c, g);
  const ParabolicNoise noise(noise_from(c, g, true), cfg.mu);
  const RealArray phi0 = io::get_double(c, "phi0_scale") * coming_down_profile(g, cfg.seed);
  const UniquenessReport rep = uniqueness_probe(p, noise, phi0, cfg, io::get_doubles(c, "L_values"));
  std::vector<std::vector<double>> rows;
  for (std::size_t i = 0; i < rep.L_values.size(); ++i)
    for (std::size_t j = 0; j < rep.L_values.size(); ++j)
      rows.push_back({rep.L_values[i], rep.L_values[j], rep.discrepancy[i][j]});
  io::write_csv(out / "discrepancy.csv", {"L_i", "L_j", "relative_discrepancy"}, rows);
  const double threshold = io::get_double(c, "threshold");
  log << "max relative discrepancy " << io::format_number(rep.max_discrepancy) << '\n';
  return rep.max_discrepancy < threshold ? 0 : 1;
}

int cmd_convergence(const Config& c, const fs::path& out, std::ostream& log) {
  const std::string symbol = io::get_string(c, "symbol");
  const std::vector<int> res = io::get_ints(c, "resolutions");
  const double exponent = io::get_double(c, "exponent");
  const double nu = io::get_double(c, "nu");
  std::vector<double> distances, sups, besov;
  if (symbol == "v" || symbol == "v-raw") {
    SolverConfig cfg = solver_from(c, make_grid(io::get_int(c, "d"), io::get_double(c, "M"), res.back()));
    cfg.renormalize = symbol == "v";
    const TrajectoryConvergence r = coupled_trajectory_convergence(cfg, res, exponent);
    distances = r.distances;
    sups = r.sup_norms;
    besov = r.besov_norms;
  } else {
    const ConvergenceReport r = coupled_convergence(
        symbol, io::get_bool(c, "parabolic"), io::get_int(c, "d"), io::get_double(c, "M"), res,
        std::uint64_t(io::get_int(c, "seed")), io::get_double(c, "mu"), exponent, Weight::poly_space(nu),
        io::get_int(c, "samples"));
    distances = r.distances;
    sups = r.sup_norms;
    besov = r.besov_norms;
  }
  std::vector<std::vector<double>> rows;
  for (std::size_t i = 0; i < distances.size(); ++i) rows.push_back({double(res[i]), double(res[i + 1]), distances[i]});
  io::write_csv(out / "convergence.csv", {"N_coarse", "N_fine", "distance"}, rows);
  rows.clear();
  for (std::size_t i = 0; i < sups.size(); ++i) rows.push_back({double(res[i]), sups[i], besov[i]});
  io::write_csv(out / "norms.csv", {"N", "sup_norm", "besov_norm"}, rows);
  for (std::size_t i = 0; i < distances.size(); ++i)
    log << res[i] << " -> " << res[i + 1] << ": " << io::format_number(distances[i]) << '\n';
  return 0;
}

std::vector<Command> make_commands() {
  const auto grid_keys = [](int d, int N) {
    return io::Schema{key("d", ValueType::Int, std::to_string(d), "dimension"),
                      key("N", ValueType::Int, std::to_string(N), "points per axis (power of two)"),
                      key("M", ValueType::Double, kTwoPi, "torus side length")};
  };
  auto cat = [](io::Schema a, const io::Schema& b) {
    a.insert(a.end(), b.begin(), b.end());
    return a;
  };
  const io::Schema solver_keys{
      key("mu", ValueType::Double, "1", "mass"),
      key("L", ValueType::Double, "0", "base localizer parameter"),
      key("nu", ValueType::Double, "1", "weight exponent, rho = <x>^-nu"),
      key("kappa", ValueType::Double, "0.1", "small regularity loss entering K"),
      key("alpha", ValueType::Double, "0.2", "regularity of the reported Besov norm"),
      key("renormalize", ValueType::Bool, "true", "subtract the Wick constant")};
  const io::Schema time_keys{key("T", ValueType::Double, "1", "final time"),
                             key("dt", ValueType::Double, "1e-3", "time step"),
                             key("noise_amplitude", ValueType::Double, "1", "noise scale")};

  std::vector<Command> cmds;
  cmds.push_back({"sample-noise", "sample white noise or the Gaussian field X",
                  with_common(cat(grid_keys(2, 32),
                                  {key("field", ValueType::String, "X-elliptic", "white | X-elliptic | X-parabolic"),
                                   key("mu", ValueType::Double, "1", "mass"),
                                   key("dt", ValueType::Double, "1e-3", "time step (X-parabolic)"),
                                   key("T", ValueType::Double, "0.01", "final time (X-parabolic)"),
                                   key("stride", ValueType::Int, "1", "snapshot stride (X-parabolic)"),
                                   key("cutoff", ValueType::Double, "-1", "spectral cutoff, <= 0 means N/2"),
                                   key("samples", ValueType::Int, "1", "ensemble size")}),
                              true),
                  cmd_sample_noise});
  cmds.push_back({"build-objects", "build Wick powers, tree objects and the constant b",
                  with_common({key("domain", ValueType::String, "elliptic", "elliptic (d=5) | parabolic (d=3)"),
                               key("N", ValueType::Int, "16", "points per axis"),
                               key("M", ValueType::Double, kTwoPi, "torus side length"),
                               key("mu", ValueType::Double, "1", "mass"),
                               key("samples", ValueType::Int, "64", "Monte-Carlo samples for b"),
                               key("T", ValueType::Double, "1", "final time (parabolic)"),
                               key("dt", ValueType::Double, "1e-2", "time step (parabolic)")},
                              true),
                  cmd_build_objects});
  cmds.push_back({"norms", "block tables, weighted Besov norms and regularity fits of FLD1 files",
                  with_common({key("input", ValueType::String, "", "comma-separated FLD1 paths", true),
                               key("alpha", ValueType::Double, "0", "Besov regularity"),
                               key("nu", ValueType::Double, "1", "weight exponent"),
                               key("stat", ValueType::String, "sup", "block statistic for the fit: sup | rms | moment (ensemble second moment)")},
                              false),
                  cmd_norms});
  cmds.push_back({"solve-elliptic", "paracontrolled elliptic solve with the maximum principle check",
                  with_common(cat(cat(grid_keys(4, 16), solver_keys),
                                  {key("tol", ValueType::Double, "1e-8", "residual tolerance"),
                                   key("max_iter", ValueType::Int, "400", "Picard iteration cap"),
                                   key("theta", ValueType::Double, "1", "initial damping")}),
                              true),
                  cmd_solve_elliptic});
  cmds.push_back({"solve-parabolic", "parabolic solve (monolithic or split) with norm series",
                  with_common(cat(cat(cat(grid_keys(2, 64), solver_keys), time_keys),
                                  {key("solver", ValueType::String, "monolithic", "monolithic | split"),
                                   key("v0", ValueType::Double, "0", "constant initial condition")}),
                              true),
                  cmd_solve_parabolic});
  cmds.push_back({"coming-down", "coming down from infinity for a family of initial magnitudes",
                  with_common(cat(cat(cat(grid_keys(2, 64), solver_keys), time_keys),
                                  {key("magnitudes", ValueType::DoubleList, "1,10,100", "initial magnitudes"),
                                   key("collapse_factor", ValueType::Double, "2", "max/min ratio for collapse"),
                                   key("t_star_max", ValueType::Double, "1", "latest acceptable collapse time"),
                                   key("profile_modes", ValueType::Int, "-1", "profile keeps |m|_inf <= this; -1 keeps all")}),
                              true),
                  cmd_coming_down});
  cmds.push_back({"uniqueness-probe", "compare split solves across localizer parameters",
                  with_common(cat(cat(cat(grid_keys(2, 32), solver_keys), time_keys),
                                  {key("L_values", ValueType::DoubleList, "0,2,4", "localizer parameters"),
                                   key("phi0_scale", ValueType::Double, "1", "initial profile magnitude"),
                                   key("threshold", ValueType::Double, "0.02", "max relative discrepancy")}),
                              true),
                  cmd_uniqueness});
  cmds.push_back({"convergence", "coupled-resolution distances of objects or trajectories",
                  with_common(cat(cat(grid_keys(2, 64), time_keys),
                                  {key("symbol", ValueType::String, "X2", "X | X2 | X2raw | X3 | v | v-raw"),
                                   key("parabolic", ValueType::Bool, "false", "use the stationary OU field"),
                                   key("resolutions", ValueType::IntList, "16,32,64", "coupled resolutions"),
                                   key("exponent", ValueType::Double, "-0.5", "Besov exponent of the distance"),
                                   key("mu", ValueType::Double, "1", "mass"),
                                   key("nu", ValueType::Double, "1", "weight exponent"),
                                   key("samples", ValueType::Int, "4", "samples averaged (objects only)")}),
                              true),
                  cmd_convergence});
  return cmds;
}

// ---------------------------------------------------------------- verify

struct Check {
  std::ostream& log;
  int failures = 0;
  void operator()(const std::string& name, bool ok, const std::string& detail) {
    log << (ok ? "PASS " : "FAIL ") << name << "  " << detail << '\n';
    if (!ok) ++failures;
  }
};

std::string sci(double x) {
  char buf[32];
  std::snprintf(buf, sizeof buf, "%.3e", x);
  return buf;
}

double rel(const RealArray& a, const RealArray& b) {
  const double s = std::max(sup_norm(b), 1e-300);
  return sup_norm(a - b) / s;
}

}  // namespace

const std::vector<Command>& commands() {
  static const std::vector<Command> cmds = make_commands();
  return cmds;
}

const Command* find_command(const std::string& name) {
  for (const auto& c : commands())
    if (c.name == name) return &c;
  return nullptr;
}

int run_recorded(const Command& cmd, const Config& cfg, std::ostream& log) {
  const fs::path out = io::get_string(cfg, "out");
  fs::create_directories(out);
  const auto t0 = std::chrono::steady_clock::now();
  const int code = cmd.run(cfg, out, log);
  io::Manifest m;
  m.command = cmd.name;
  m.tool_version = kToolVersion;
  m.config = cfg;
  m.artifacts = io::collect_artifacts(out);
  m.wall_clock_seconds = std::chrono::duration<double>(std::chrono::steady_clock::now() - t0).count();
  io::write_manifest(out / io::kManifestName, m);
  return code;
}

TorusGrid parse_grid_spec(const std::string& spec) {
  int d = 2, N = 32;
  double M = 2 * kPi;
  std::istringstream in(spec);
  std::string item;
  while (std::getline(in, item, ',')) {
    const auto eq = item.find('=');
    if (eq == std::string::npos) throw UsageError("grid entry '" + item + "' is not key=value");
    const std::string k = item.substr(0, eq), v = item.substr(eq + 1);
    try {
      if (k == "d") d = std::stoi(v);
      else if (k == "N") N = std::stoi(v);
      else if (k == "M") M = std::stod(v);
      else throw UsageError("unknown grid key '" + k + "'");
    } catch (const std::logic_error&) {
      throw UsageError("bad value for grid key '" + k + "'");
    }
  }
  try {
    return make_grid(d, M, N);
  } catch (const std::invalid_argument& e) {
    throw UsageError(e.what());
  }
}

int run_invariant_suite(const TorusGrid& g, std::uint64_t seed, std::ostream& log) {
  Check check{log};
  const DyadicPartition p = build_partition(g);
  NoiseSpec s;
  s.seed = seed;
  s.grid = g;
  const RealArray f = sample_X_elliptic(s, 1.0);
  s.sample = 1;
  const RealArray h = sample_X_elliptic(s, 1.0);

  {
    const RealArray back = fft_inverse(fft_forward(Field{g, f})).values;
    const double e = rel(back, f);
    check("fft_round_trip", e < 1e-12, "rel err " + sci(e));
  }
  {
    RealArray sum = RealArray::Zero(f.size());
    for (const auto& b : lp_blocks(p, f)) sum += b;
    const double e = rel(sum, f);
    check("littlewood_paley_resolution", e < 1e-11, "rel err " + sci(e));
  }
  {
    const RealArray lhs = f * h;
    const RealArray rhs = para_lt(p, f, h) + para_res(p, f, h) + para_gt(p, f, h);
    const double e = rel(rhs, lhs);
    check("paraproduct_decomposition", e < 1e-11, "rel err " + sci(e));
  }
  const Weight rho = Weight::poly_space(1.0);
  {
    const Localizer loc = build_localizer(p, rho, 1.0);
    const double e = rel(localize_above(loc, f) + localize_below(loc, f), f);
    check("localizer_split", e < 1e-11, "rel err " + sci(e));
  }
  {
    const SpacetimeLocalizer loc = build_spacetime_localizer(p, Weight::poly_spacetime(1.0), 1.0, 1.0, {0, 0.5, 1});
    const auto [hi, lo] = localize_spacetime_split(loc, lp_blocks(p, f), 0.3, 1.0);
    const double e = rel(hi + lo, f);
    check("spacetime_localizer_split", e < 1e-11, "rel err " + sci(e));
  }
  {
    std::mt19937_64 rng(seed);
    std::uniform_real_distribution<double> U(0, 1);
    bool ok = true;
    double worst = 0;
    for (int trial = 0; trial < 8; ++trial) {
      const double kappa = U(rng), alpha = U(rng) * (2 + kappa), theta = alpha / (2 + kappa);
      const RealArray r1 = weight_eval(rho, g), ra = weight_eval(rho.pow(1 + alpha), g),
                      r3 = weight_eval(rho.pow(3 + kappa), g);
      for (const auto& b : lp_blocks(p, f)) {
        const double lhs = (ra * b).abs().maxCoeff();
        const double rhs = std::pow((r1 * b).abs().maxCoeff(), 1 - theta) * std::pow((r3 * b).abs().maxCoeff(), theta);
        worst = std::max(worst, lhs / std::max(rhs, 1e-300));
        ok = ok && lhs <= rhs * (1 + 1e-12);
      }
    }
    check("interpolation_inequality", ok, "max lhs/rhs " + sci(worst));
  }
  {
    struct Kat {
      PhiloxCounter c;
      PhiloxKey k;
      PhiloxCounter want;
    };
    const Kat kats[] = {
        {{0, 0, 0, 0}, {0, 0}, {0x6627e8d5, 0xe169c58d, 0xbc57ac4c, 0x9b00dbd8}},
        {{~0u, ~0u, ~0u, ~0u}, {~0u, ~0u}, {0x408f276d, 0x41c83b0e, 0xa20bc7c6, 0x6d5451fd}},
        {{0x243f6a88, 0x85a308d3, 0x13198a2e, 0x03707344},
         {0xa4093822, 0x299f31d0},
         {0xd16cfe09, 0x94fdcceb, 0x5001e420, 0x24126ea1}}};
    bool ok = true;
    for (const auto& k : kats) ok = ok && philox4x32(k.c, k.k) == k.want;
    check("philox_known_answers", ok, "3 vectors");
  }
  if (g.N >= 8) {
    // the same seed at two resolutions shares every retained mode
    const TorusGrid fine = make_grid(g.d, g.M, 2 * g.N);
    NoiseSpec a = s, b = s;
    a.sample = b.sample = 0;
    b.grid = fine;
    a.cutoff = b.cutoff = g.N / 2.0;
    const RealArray coarse = prolong(g, sample_X_elliptic(a, 1.0), fine);
    const RealArray fine_x = sample_X_elliptic(b, 1.0);
    const double e = rel(coarse, fine_x);
    check("noise_resolution_coupling", e < 1e-12, "rel err " + sci(e));
  }
  {
    const RealArray Psi = 5.0 * f;
    const MonotoneResult m = solve_elliptic_monotone(g, Psi, 1.0, 1e-10);
    bool decreasing = true;
    for (std::size_t i = 1; i < m.energy.size(); ++i)
      decreasing = decreasing && m.energy[i] <= m.energy[i - 1] + 1e-13 * std::max(1.0, std::abs(m.energy[i - 1]));
    check("monotone_solver", m.converged && decreasing,
          "residual " + sci(m.residual) + ", " + std::to_string(m.iterations) + " Newton steps");
    const MaxPrincipleReport mp = check_max_principle(g, m.psi, Psi, 1.0, rho);
    check("maximum_principle", mp.holds, "lhs " + sci(mp.lhs) + " <= rhs " + sci(mp.rhs));
  }
  {
    const fs::path tmp = fs::temp_directory_path() / ("phi4lab_verify_" + std::to_string(seed) + ".fld");
    write_fld1(tmp.string(), Field{g, f});
    const Field back = read_fld1(tmp.string());
    fs::remove(tmp);
    check("fld1_round_trip", back.grid == g && (back.values == f).all(), "bitwise");
  }
  {
    const double dt = 1e-3;
    RealArray v = RealArray::Constant(g.size(), 2.0);
    for (int n = 0; n < 1000; ++n) v = step_parabolic(g, v, -v.cube(), dt, 1.0);
    const double e = std::abs(v(0) - cubic_ode_solution(2.0, 1.0, 1.0));
    check("cubic_ode_closed_form", e < 5 * dt, "max err " + sci(e));
  }
  log << (check.failures ? std::to_string(check.failures) + " invariant(s) failed" : "all invariants hold") << '\n';
  return check.failures;
}

int verify_manifest(const fs::path& manifest, std::ostream& log) {
  const io::Manifest m = io::read_manifest(manifest);
  int bad = 0;
  for (const auto& p : io::check_artifacts(m, manifest.parent_path())) {
    log << "FAIL recorded checksum " << p << '\n';
    ++bad;
  }
  const Command* cmd = find_command(m.command);
  if (!cmd) throw std::runtime_error("manifest names unknown command '" + m.command + "'");
  Config cfg = m.config;
  const fs::path scratch = fs::temp_directory_path() / ("phi4lab_rerun_" + io::sha256_hex(manifest.string()).substr(0, 12));
  fs::remove_all(scratch);
  cfg["out"] = scratch.string();
  std::ostringstream quiet;
  run_recorded(*cmd, cfg, quiet);
  const io::Manifest again = io::read_manifest(scratch / io::kManifestName);
  if (again.artifacts.size() != m.artifacts.size()) {
    log << "FAIL artifact count " << again.artifacts.size() << " vs " << m.artifacts.size() << '\n';
    ++bad;
  }
  for (std::size_t i = 0; i < std::min(again.artifacts.size(), m.artifacts.size()); ++i) {
    const auto &x = m.artifacts[i], &y = again.artifacts[i];
    const bool ok = x.path == y.path && x.sha256 == y.sha256;
    log << (ok ? "PASS " : "FAIL ") << "rerun " << x.path << '\n';
    bad += ok ? 0 : 1;
  }
  fs::remove_all(scratch);
  return bad;
}

}  // namespace phi4lab::cli
