#pragma once

#include "phi4lab/lp.hpp"

#include <cstdint>
#include <map>
#include <string>
#include <vector>

namespace phi4lab {

struct NoiseSpec {
  enum class Kind { Spatial, Spacetime };
  std::uint64_t seed = 0;
  Kind kind = Kind::Spatial;
  TorusGrid grid;
  double dt = 0;
  std::uint32_t sample = 0;  // ensemble member; part of the counter
  double cutoff = -1;        // retain |m| < cutoff for X; <= 0 means N/2
  int max_mode = -1;         // if >= 0, additionally retain |m|_inf <= max_mode
  double amplitude = 1;      // scales every sampled mode (0 gives the zero field)
};

// Counter streams. The counter is (packed signed mode, time index, stream | sample << 8).
enum class NoiseStream : std::uint32_t { White = 1, ParabolicInit = 2, ParabolicStep = 3, Profile = 4 };

// Hermitian Gaussian spectrum in r2c layout with E|c(k)|^2 = variance(k).
// Each conjugate pair is drawn from the lexicographically larger signed mode,
// so common modes of different resolutions receive identical draws.
ComplexArray hermitian_gaussian(const NoiseSpec& spec, NoiseStream stream, std::uint64_t time_index,
                                const RealArray& variance);

// 1 on retained modes (|m| < cutoff and the optional max_mode box), in r2c layout.
RealArray retained_modes(const NoiseSpec& spec);

// Discrete white noise on the full lattice: E|xi(k)|^2 = M^d, Var xi(x) = h^-d.
RealArray sample_space_white_noise(const NoiseSpec& spec);

// X = Q^{-1} xi restricted to retained modes.
RealArray sample_X_elliptic(const NoiseSpec& spec, double mu);

// Stationary Ornstein-Uhlenbeck field, advanced by the exact per-mode recursion.
class ParabolicNoise {
 public:
  ParabolicNoise(const NoiseSpec& spec, double mu);
  const RealArray& field() const { return x_; }
  const ComplexArray& modes() const { return xhat_; }
  double time() const { return double(step_) * spec_.dt; }
  std::int64_t step() const { return step_; }
  const NoiseSpec& spec() const { return spec_; }
  void advance();

 private:
  NoiseSpec spec_;
  double mu_;
  RealArray decay_, step_var_;
  ComplexArray xhat_;
  RealArray x_;
  std::int64_t step_ = 0;
};

Trajectory sample_X_parabolic(const NoiseSpec& spec, double mu, double T, int stride = 1);

// Exact lattice sums over retained modes, scaled by amplitude^2.
double wick_constant_elliptic(const NoiseSpec& spec, double mu);
double wick_constant_parabolic(const NoiseSpec& spec, double mu);
double wick_constant_elliptic(const TorusGrid& grid, double mu);
double wick_constant_parabolic(const TorusGrid& grid, double mu);

struct WickPowers {
  RealArray x2;  // X^2 - a
  RealArray x3;  // X^3 - 3aX
};
WickPowers wick_powers(const RealArray& X, double a);

enum class TreeDomain { EllipticD5, ParabolicD3 };

// Fixed-time objects of one sample. Resonant products are stored before the
// b shift: "Y2oX2" is Y2 o [[X^2]], "Y3oX2" is Y3 o [[X^2]].
struct TreeSample {
  std::map<std::string, RealArray> objects;  // X, X2, Y3, Y2, Y3oX, Y2oX2, Y3oX2 (and X3 for elliptic)
  std::vector<double> times;                 // parabolic record times
  std::vector<double> resonant_mean;         // spatial mean of Y2 o [[X^2]] at those times
};

TreeSample elliptic_trees(const DyadicPartition& p, const RealArray& X, double a, double mu);
// Y3, Y2 solve L Y = [[X^3]], [[X^2]] with zero initial data by exponential
// Euler on the OU mesh; [[X^3]] is used only inside the time integration.
TreeSample parabolic_trees(const DyadicPartition& p, const NoiseSpec& spec, double mu, double T, int record_every);

struct WickData {
  double a = 0;
  std::vector<double> b_times;
  std::vector<double> b, b_stderr;  // one entry for elliptic, a time series for parabolic
  std::map<std::string, Field> objects;
};

// Builds the trees for samples 0..n_samples-1 of spec, estimates b as the
// Monte-Carlo mean of 3 (Y2 o [[X^2]]) (spatially averaged, which has the same
// expectation by stationarity), and returns the renormalized objects of sample 0:
// "Y2oX2-b/3" and "Y3oX2-bX".
WickData tree_objects(TreeDomain domain, const DyadicPartition& p, const NoiseSpec& spec, double mu, int n_samples,
                      double T = 1.0);

struct ConvergenceReport {
  std::string symbol;
  std::vector<int> resolutions;
  std::vector<double> distances;  // consecutive pairs, mean over samples
  std::vector<double> sup_norms;    // mean sup norm at each resolution
  std::vector<double> besov_norms;  // mean besov_norm(tau_N, exponent, w) at each resolution
  double exponent = 0;
};

// Objects at resolution N carry the spectral cutoff |m| < N/2 and are
// evaluated on the grid of the finest resolution, so coupled resolutions
// share every common mode. The evaluation grid is twice the finest resolution
// so that squares of retained modes do not alias. Symbols: X, X2 (Wick), X2raw, X3 (Wick).
// distance = besov_norm(tau_fine - tau_coarse, exponent, w).
ConvergenceReport coupled_convergence(const std::string& symbol, bool parabolic, int d, double M,
                                      const std::vector<int>& resolutions, std::uint64_t seed, double mu,
                                      double exponent, const Weight& w, int n_samples);

}  // namespace phi4lab
