#pragma once

#include "phi4lab/paracalc.hpp"
#include "phi4lab/stochastic.hpp"

#include <string>
#include <vector>

namespace phi4lab {

struct SolverConfig {
  double mu = 1;
  TorusGrid grid;
  std::uint64_t seed = 0;
  double L = 0;  // base localizer parameter, added to the K-derived values
  bool renormalize = true;
  double dt = 1e-3;
  double T = 1;
  double theta = 1;  // initial Picard damping
  double theta_floor = 1.0 / 64;
  double tol = 1e-8;
  int max_iter = 400;
  double nu = 1;       // weight rho = <x>^{-nu}
  double kappa = 0.1;  // exponents entering K and the reported Besov norm
  double alpha = 0.2;
};

// I(u) = h^d sum [ |grad u|^2 / 2 + mu u^2 / 2 + u^4 / 4 + Psi u ]
double energy_functional(const TorusGrid& g, const RealArray& u, const RealArray& Psi, double mu);
// L^2 gradient Q u + u^3 + Psi (the discrete gradient is h^d times this)
RealArray energy_gradient(const TorusGrid& g, const RealArray& u, const RealArray& Psi, double mu);

struct MonotoneResult {
  RealArray psi;
  double residual = 0;  // ||Q psi + psi^3 + Psi|| / ||Psi|| in l2
  int iterations = 0;
  bool converged = false;
  std::vector<double> energy;  // one entry per accepted step, decreasing up to rounding
};

// Damped Newton on I with Armijo backtracking; Newton systems solved by
// conjugate gradients preconditioned with (Q + c)^{-1}.
MonotoneResult solve_elliptic_monotone(const TorusGrid& g, const RealArray& Psi, double mu, double tol,
                                       int max_iter = 100, const RealArray* initial = nullptr);

struct EllipticNoise {
  RealArray X, X2, X3;  // X, [[X^2]], [[X^3]]
};

struct SolutionPair {
  RealArray phi, psi;
  double residual = 0;        // combined residual of both equations, relative to ||[[X^3]]||
  double total_residual = 0;  // Q v + [[X^3]] + 3 v [[X^2]] + 3 v^2 X + v^3, relative
  int iterations = 0;
  bool converged = false;
  double theta = 1;
  double K = 0;
  bool K_frozen = false;
  double phi_besov = 0;   // ||phi||_{C^alpha(rho)}
  double psi_weighted = 0;  // ||psi||_{L^inf(rho)}
  RealArray Psi;          // forcing of the last psi solve (for the maximum principle check)
};

// K with 1 + ||phi + psi||_{L^inf(rho)} = 2^{(2 - kappa - alpha) K / 2}
double localizer_K(double weighted_sup, double kappa, double alpha);

SolutionPair solve_elliptic_phi44(const DyadicPartition& p, const EllipticNoise& noise, const SolverConfig& cfg);

// psi+ = e^{-lambda dt} psi + (1 - e^{-lambda dt}) / lambda * forcing, per mode.
RealArray step_parabolic(const TorusGrid& g, const RealArray& state, const RealArray& forcing, double dt, double mu);

struct NormRow {
  double t, sup_norm, weighted_sup, besov_alpha;
};

struct ParabolicResult {
  Trajectory v;  // thinned
  std::vector<NormRow> norms;  // every step
  bool blew_up = false;
  std::string diagnostic;
  std::int64_t substeps = 0;
  // split solver only
  Trajectory phi, psi;
  std::vector<double> K;
};

// Snapshot stride ceil(T / (100 dt)).
int storage_stride(double T, double dt);

// Monolithic L v = -[[X^3]] - 3 [[X^2]] v - 3 X v^2 - v^3 with a = 0 when
// renormalize is false. The cubic is explicit; each step is split into
// substeps obeying dt <= 0.5 / (mu + 3 ||v||_inf^2), holding X fixed.
ParabolicResult solve_phi42_monolithic(const ParabolicNoise& noise, const RealArray& v0, const SolverConfig& cfg);

// Split system L phi + Phi = 0, L psi + psi^3 + Psi = 0 with space-time
// localizers; K is recomputed every step from ||phi + psi||_{L^inf(rho)}.
ParabolicResult solve_phi42_split(const DyadicPartition& p, const ParabolicNoise& noise, const RealArray& phi0,
                                  const RealArray& psi0, const SolverConfig& cfg);

// Closed form of v' = -mu v - v^3, v(0) = c0.
double cubic_ode_solution(double c0, double mu, double t);

struct ComingDownIC {
  RealArray phi0, psi0;
  double L = 0;
};

// L with 2^{eps L} = ||phi0||_{C^{-1+eps}(rho0^{1+eps})}, phi0 := U_> phi0 - X0, psi0 := U_<= phi0.
ComingDownIC prepare_coming_down_ic(const DyadicPartition& p, const RealArray& phi0_rough, const RealArray& X0,
                                    double eps, const Weight& rho0);

inline constexpr double kComingDownEps = 0.5;

struct ComingDownReport {
  std::vector<double> magnitudes;
  std::vector<double> times;
  std::vector<std::vector<double>> series;  // ||(phi + psi)(t)||_{L^inf(rho)} per magnitude
  double t_star = 0;  // first time after which max/min <= collapse_factor throughout
  bool collapsed = false;
  double C = 0;       // fitted on the largest magnitude
  double envelope_margin = 0;  // min over series and t > 0 of C(1 + t^{-1/2}) - s(t)
  bool envelope_ok = false;
  bool blew_up = false;
};

// Random profile with spectrum 1/(1 + |k|^2), normalized to sup 1; max_mode >= 0
// keeps only modes with |m|_inf <= max_mode.
RealArray coming_down_profile(const TorusGrid& g, std::uint64_t seed, int max_mode = -1);

// Initial data m * g with g the profile rescaled to unit C^{-1+eps}(rho^{1+eps}) norm.
ComingDownReport coming_down_experiment(const DyadicPartition& p, const std::vector<double>& magnitudes,
                                        const SolverConfig& cfg, double noise_amplitude = 1.0,
                                        double collapse_factor = 2.0, int profile_modes = -1);

struct MaxPrincipleReport {
  double lhs = 0;  // max over signs of max_x ((+-) rho psi)_+^3
  double rhs = 0;  // ||rho^3 Psi|| + c ||rho^2 rho psi||
  double c = 0;
  double slack = 0;
  bool holds = false;
};

MaxPrincipleReport check_max_principle(const TorusGrid& g, const RealArray& psi, const RealArray& Psi, double mu,
                                       const Weight& w, double residual_tol = 1e-6);

struct UniquenessReport {
  std::vector<double> L_values;
  std::vector<std::vector<double>> discrepancy;
  double max_discrepancy = 0;
  double scale = 0;
};

UniquenessReport uniqueness_probe(const DyadicPartition& p, const ParabolicNoise& noise, const RealArray& phi0,
                                  const SolverConfig& cfg, const std::vector<double>& L_values);

// max over stored snapshots of ||a - b||_inf, and the reference sup
double trajectory_distance(const Trajectory& a, const Trajectory& b);
double trajectory_sup(const Trajectory& a);

struct TrajectoryConvergence {
  std::vector<int> resolutions;
  std::vector<double> distances;  // besov distance of v, max over stored times
  std::vector<double> sup_norms;
  std::vector<double> besov_norms;  // max over stored times of besov_norm(v_N, exponent)
};

// Monolithic runs with noise cutoffs N/2 on the finest grid and v0 = 0.
TrajectoryConvergence coupled_trajectory_convergence(const SolverConfig& cfg, const std::vector<int>& resolutions,
                                                     double exponent);

}  // namespace phi4lab
