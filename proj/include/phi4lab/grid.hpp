#pragma once

#include <Eigen/Core>

#include <array>
#include <complex>
#include <cstdint>
#include <stdexcept>
#include <string>
#include <vector>

namespace phi4lab {

using RealArray = Eigen::ArrayXd;
using ComplexArray = Eigen::ArrayXcd;

constexpr double kPi = 3.14159265358979323846;
constexpr int kMaxDim = 5;

struct TorusGrid {
  int d = 2;
  double M = 2 * kPi;
  int N = 8;
  double h = 2 * kPi / 8;

  std::int64_t size() const;       // N^d grid points
  std::int64_t half_size() const;  // N^(d-1) * (N/2 + 1) r2c coefficients
  double k_unit() const { return 2 * kPi / M; }
  double cell_volume() const;      // h^d
  double volume() const;           // M^d
  bool operator==(const TorusGrid& o) const { return d == o.d && N == o.N && M == o.M; }
  bool operator!=(const TorusGrid& o) const { return !(*this == o); }
};

TorusGrid make_grid(int d, double M, int N);

struct Field {
  TorusGrid grid;
  RealArray values;
};

// Full complex lattice, same row-major layout as Field.
struct SpectralField {
  TorusGrid grid;
  ComplexArray coeffs;
};

struct Trajectory {
  TorusGrid grid;
  std::vector<double> times;
  std::vector<RealArray> snapshots;
  int stride = 1;
};

// Signed lattice index m in {-N/2..N/2-1} for FFT index n.
inline int signed_index(int n, int N) { return n < N / 2 ? n : n - N; }

// Lattice geometry in r2c layout: the last axis keeps n = 0..N/2.
struct HalfModes {
  RealArray msq;  // |m|^2
  RealArray ksq;  // |k|^2 = (2pi/M)^2 |m|^2
  std::array<int, kMaxDim> multi_index(std::int64_t idx, const TorusGrid& g) const;
};

// Cached per grid. All transforms use the conventions
//   c(k) = h^d sum_x f(x) e^{-ikx},   f(x) = M^{-d} sum_k c(k) e^{ikx}.
class Spectral {
 public:
  explicit Spectral(const TorusGrid& grid);
  ~Spectral();
  Spectral(const Spectral&) = delete;
  Spectral& operator=(const Spectral&) = delete;

  const TorusGrid& grid() const { return grid_; }
  const HalfModes& modes() const { return modes_; }

  ComplexArray forward(const RealArray& f) const;
  RealArray inverse(const ComplexArray& c) const;
  ComplexArray forward_full(const RealArray& f) const;
  RealArray inverse_full(const ComplexArray& c) const;  // real part of the inverse

  // Fourier multiplier m(k) given in half layout.
  RealArray apply(const RealArray& f, const RealArray& multiplier) const;

 private:
  TorusGrid grid_;
  HalfModes modes_;
  void* r2c_ = nullptr;
  void* c2r_ = nullptr;
  void* fwd_ = nullptr;
  void* bwd_ = nullptr;
};

const Spectral& spectral(const TorusGrid& grid);

SpectralField fft_forward(const Field& f);
Field fft_inverse(const SpectralField& c);

RealArray helmholtz_solve(const TorusGrid& g, const RealArray& f, double mu);
Field helmholtz_solve(const Field& f, double mu);
RealArray apply_Q(const TorusGrid& g, const RealArray& f, double mu);  // (-Lap + mu) f
RealArray laplacian(const TorusGrid& g, const RealArray& f);
RealArray heat_step(const TorusGrid& g, const RealArray& f, double t, double mu);
Field heat_step(const Field& f, double t, double mu);

// Trigonometric interpolation of a coarse field onto a finer grid with the
// same M. Coarse Nyquist rows are dropped.
RealArray prolong(const TorusGrid& coarse, const RealArray& f, const TorusGrid& fine);

// Centered coordinate of grid point idx along each axis, in [-M/2, M/2).
std::array<double, kMaxDim> centered_coord(const TorusGrid& g, std::int64_t idx);
RealArray centered_radius_sq(const TorusGrid& g);

void write_fld1(const std::string& path, const Field& f);
Field read_fld1(const std::string& path);

double sup_norm(const RealArray& f);
double l2_norm(const TorusGrid& g, const RealArray& f);  // with measure h^d

}  // namespace phi4lab
