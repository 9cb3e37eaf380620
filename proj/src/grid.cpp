#include "phi4lab/grid.hpp"

#include <fftw3.h>

#include <bit>
#include <cmath>
#include <cstring>
#include <fstream>
#include <map>
#include <memory>
#include <mutex>
#include <tuple>

namespace phi4lab {

namespace {

static_assert(std::endian::native == std::endian::little, "FLD1 I/O assumes a little-endian host");

std::mutex& planner_mutex() {
  static std::mutex m;
  return m;
}

constexpr unsigned kPlanFlags = FFTW_ESTIMATE | FFTW_UNALIGNED;

std::int64_t ipow(std::int64_t b, int e) {
  std::int64_t r = 1;
  for (int i = 0; i < e; ++i) r *= b;
  return r;
}

}  // namespace

std::int64_t TorusGrid::size() const { return ipow(N, d); }
std::int64_t TorusGrid::half_size() const { return ipow(N, d - 1) * (N / 2 + 1); }
double TorusGrid::cell_volume() const { return std::pow(h, d); }
double TorusGrid::volume() const { return std::pow(M, d); }

TorusGrid make_grid(int d, double M, int N) {
  if (d < 2 || d > kMaxDim) throw std::invalid_argument("grid dimension must be in 2..5");
  if (!(M > 0) || !std::isfinite(M)) throw std::invalid_argument("grid side length M must be positive");
  if (N < 4 || (N & (N - 1)) != 0) throw std::invalid_argument("grid N must be a power of two >= 4");
  // Keep N^d well inside int (FFTW plan dims) and addressable memory.
  double points = std::pow(double(N), d);
  if (points > double(1 << 30)) throw std::invalid_argument("grid N^d too large");
  TorusGrid g;
  g.d = d;
  g.M = M;
  g.N = N;
  g.h = M / N;
  return g;
}

std::array<int, kMaxDim> HalfModes::multi_index(std::int64_t idx, const TorusGrid& g) const {
  std::array<int, kMaxDim> n{};
  int nh = g.N / 2 + 1;
  n[g.d - 1] = int(idx % nh);
  idx /= nh;
  for (int a = g.d - 2; a >= 0; --a) {
    n[a] = int(idx % g.N);
    idx /= g.N;
  }
  return n;
}

Spectral::Spectral(const TorusGrid& grid) : grid_(grid) {
  const std::int64_t hs = grid.half_size();
  modes_.msq.resize(hs);
  for (std::int64_t i = 0; i < hs; ++i) {
    auto n = modes_.multi_index(i, grid);
    double s = 0;
    for (int a = 0; a < grid.d; ++a) {
      int m = signed_index(n[a], grid.N);
      s += double(m) * m;
    }
    modes_.msq[i] = s;
  }
  modes_.ksq = modes_.msq * (grid.k_unit() * grid.k_unit());

  std::vector<int> dims(grid.d, grid.N);
  const std::int64_t n = grid.size();
  std::lock_guard<std::mutex> lock(planner_mutex());
  double* rbuf = fftw_alloc_real(n);
  fftw_complex* hbuf = fftw_alloc_complex(hs);
  fftw_complex* cbuf = fftw_alloc_complex(n);
  fftw_complex* cbuf2 = fftw_alloc_complex(n);
  r2c_ = fftw_plan_dft_r2c(grid.d, dims.data(), rbuf, hbuf, kPlanFlags);
  c2r_ = fftw_plan_dft_c2r(grid.d, dims.data(), hbuf, rbuf, kPlanFlags);
  fwd_ = fftw_plan_dft(grid.d, dims.data(), cbuf, cbuf2, FFTW_FORWARD, kPlanFlags);
  bwd_ = fftw_plan_dft(grid.d, dims.data(), cbuf, cbuf2, FFTW_BACKWARD, kPlanFlags);
  fftw_free(rbuf);
  fftw_free(hbuf);
  fftw_free(cbuf);
  fftw_free(cbuf2);
  if (!r2c_ || !c2r_ || !fwd_ || !bwd_) throw std::runtime_error("FFTW planning failed");
}

Spectral::~Spectral() {
  std::lock_guard<std::mutex> lock(planner_mutex());
  for (void* p : {r2c_, c2r_, fwd_, bwd_})
    if (p) fftw_destroy_plan(static_cast<fftw_plan>(p));
}

ComplexArray Spectral::forward(const RealArray& f) const {
  if (f.size() != grid_.size()) throw std::invalid_argument("field size does not match grid");
  RealArray in = f;  // FFTW signature is non-const
  ComplexArray out(grid_.half_size());
  fftw_execute_dft_r2c(static_cast<fftw_plan>(r2c_), in.data(),
                       reinterpret_cast<fftw_complex*>(out.data()));
  out *= grid_.cell_volume();
  return out;
}

RealArray Spectral::inverse(const ComplexArray& c) const {
  if (c.size() != grid_.half_size()) throw std::invalid_argument("spectrum size does not match grid");
  ComplexArray in = c;  // c2r overwrites its input
  RealArray out(grid_.size());
  fftw_execute_dft_c2r(static_cast<fftw_plan>(c2r_), reinterpret_cast<fftw_complex*>(in.data()),
                       out.data());
  out /= grid_.volume();
  return out;
}

ComplexArray Spectral::forward_full(const RealArray& f) const {
  if (f.size() != grid_.size()) throw std::invalid_argument("field size does not match grid");
  ComplexArray in = f.cast<std::complex<double>>();
  ComplexArray out(grid_.size());
  fftw_execute_dft(static_cast<fftw_plan>(fwd_), reinterpret_cast<fftw_complex*>(in.data()),
                   reinterpret_cast<fftw_complex*>(out.data()));
  out *= grid_.cell_volume();
  return out;
}

RealArray Spectral::inverse_full(const ComplexArray& c) const {
  if (c.size() != grid_.size()) throw std::invalid_argument("spectrum size does not match grid");
  ComplexArray in = c;
  ComplexArray out(grid_.size());
  fftw_execute_dft(static_cast<fftw_plan>(bwd_), reinterpret_cast<fftw_complex*>(in.data()),
                   reinterpret_cast<fftw_complex*>(out.data()));
  return out.real() / grid_.volume();
}

RealArray Spectral::apply(const RealArray& f, const RealArray& multiplier) const {
  ComplexArray c = forward(f);
  c *= multiplier.cast<std::complex<double>>();
  return inverse(c);
}

const Spectral& spectral(const TorusGrid& grid) {
  static std::mutex m;
  static std::map<std::tuple<int, int, double>, std::unique_ptr<Spectral>> cache;
  std::lock_guard<std::mutex> lock(m);
  auto key = std::make_tuple(grid.d, grid.N, grid.M);
  auto it = cache.find(key);
  if (it == cache.end()) it = cache.emplace(key, std::make_unique<Spectral>(grid)).first;
  return *it->second;
}

SpectralField fft_forward(const Field& f) {
  return {f.grid, spectral(f.grid).forward_full(f.values)};
}

Field fft_inverse(const SpectralField& c) {
  return {c.grid, spectral(c.grid).inverse_full(c.coeffs)};
}

RealArray helmholtz_solve(const TorusGrid& g, const RealArray& f, double mu) {
  if (!(mu > 0)) throw std::invalid_argument("helmholtz_solve requires mu > 0");
  const Spectral& sp = spectral(g);
  return sp.apply(f, (sp.modes().ksq + mu).inverse());
}

Field helmholtz_solve(const Field& f, double mu) { return {f.grid, helmholtz_solve(f.grid, f.values, mu)}; }

RealArray apply_Q(const TorusGrid& g, const RealArray& f, double mu) {
  const Spectral& sp = spectral(g);
  return sp.apply(f, sp.modes().ksq + mu);
}

RealArray laplacian(const TorusGrid& g, const RealArray& f) {
  const Spectral& sp = spectral(g);
  return sp.apply(f, -sp.modes().ksq);
}

RealArray heat_step(const TorusGrid& g, const RealArray& f, double t, double mu) {
  if (!(t >= 0)) throw std::invalid_argument("heat_step requires t >= 0");
  if (t == 0) return f;
  const Spectral& sp = spectral(g);
  return sp.apply(f, (-t * (sp.modes().ksq + mu)).exp());
}

Field heat_step(const Field& f, double t, double mu) { return {f.grid, heat_step(f.grid, f.values, t, mu)}; }

RealArray prolong(const TorusGrid& coarse, const RealArray& f, const TorusGrid& fine) {
  if (coarse.d != fine.d || coarse.M != fine.M || fine.N < coarse.N)
    throw std::invalid_argument("prolong needs a finer grid of the same box");
  if (coarse == fine) return f;
  const Spectral& cs = spectral(coarse);
  ComplexArray cc = cs.forward(f);
  ComplexArray fc = ComplexArray::Zero(fine.half_size());
  const int nhf = fine.N / 2 + 1;
  for (std::int64_t i = 0; i < cc.size(); ++i) {
    auto n = cs.modes().multi_index(i, coarse);
    bool nyquist = false;
    std::int64_t j = 0;
    for (int a = 0; a < coarse.d; ++a) {
      int m = signed_index(n[a], coarse.N);
      if (m == -coarse.N / 2) nyquist = true;
      int nf = m < 0 ? m + fine.N : m;
      j = j * (a == coarse.d - 1 ? nhf : fine.N) + nf;
    }
    if (!nyquist) fc[j] = cc[i];
  }
  return spectral(fine).inverse(fc);
}

std::array<double, kMaxDim> centered_coord(const TorusGrid& g, std::int64_t idx) {
  std::array<double, kMaxDim> x{};
  for (int a = g.d - 1; a >= 0; --a) {
    int n = int(idx % g.N);
    idx /= g.N;
    double c = n * g.h;
    if (c >= g.M / 2) c -= g.M;
    x[a] = c;
  }
  return x;
}

RealArray centered_radius_sq(const TorusGrid& g) {
  RealArray r2(g.size());
  for (std::int64_t i = 0; i < r2.size(); ++i) {
    auto x = centered_coord(g, i);
    double s = 0;
    for (int a = 0; a < g.d; ++a) s += x[a] * x[a];
    r2[i] = s;
  }
  return r2;
}

void write_fld1(const std::string& path, const Field& f) {
  if (f.values.size() != f.grid.size()) throw std::invalid_argument("field size does not match grid");
  std::ofstream out(path, std::ios::binary);
  if (!out) throw std::runtime_error("cannot open " + path + " for writing");
  const char magic[8] = {'F', 'L', 'D', '1', 0, 0, 0, 0};
  std::uint32_t d = f.grid.d, n = f.grid.N;
  double m = f.grid.M;
  out.write(magic, 8);
  out.write(reinterpret_cast<const char*>(&d), 4);
  out.write(reinterpret_cast<const char*>(&n), 4);
  out.write(reinterpret_cast<const char*>(&m), 8);
  out.write(reinterpret_cast<const char*>(f.values.data()), std::streamsize(f.values.size() * 8));
  if (!out) throw std::runtime_error("write failed: " + path);
}

Field read_fld1(const std::string& path) {
  std::ifstream in(path, std::ios::binary);
  if (!in) throw std::runtime_error("cannot open " + path);
  char magic[8];
  std::uint32_t d = 0, n = 0;
  double m = 0;
  in.read(magic, 8);
  if (!in || std::memcmp(magic, "FLD1\0\0\0\0", 8) != 0) throw std::runtime_error("not an FLD1 file: " + path);
  in.read(reinterpret_cast<char*>(&d), 4);
  in.read(reinterpret_cast<char*>(&n), 4);
  in.read(reinterpret_cast<char*>(&m), 8);
  Field f{make_grid(int(d), m, int(n)), {}};
  f.values.resize(f.grid.size());
  in.read(reinterpret_cast<char*>(f.values.data()), std::streamsize(f.values.size() * 8));
  if (!in) throw std::runtime_error("truncated FLD1 file: " + path);
  if (!f.values.isFinite().all()) throw std::runtime_error("non-finite values in " + path);
  return f;
}

double sup_norm(const RealArray& f) { return f.size() ? f.abs().maxCoeff() : 0.0; }

double l2_norm(const TorusGrid& g, const RealArray& f) {
  return std::sqrt(g.cell_volume() * f.square().sum());
}

}  // namespace phi4lab
