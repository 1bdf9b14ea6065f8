#include "helistab/dns.hpp"

#include <unsupported/Eigen/MatrixFunctions>

#include <array>
#include <cmath>
#include <random>

#include "helistab/error.hpp"
#include "helistab/fit.hpp"

namespace helistab {

SpectralField steady_state(const TorusGrid& grid) {
  const double d2 = grid.delta() * grid.delta();
  SpectralField U(grid, Rank::vector);
  // sin(m0 y) = (e^{i m0 y} - e^{-i m0 y}) / 2i, cos(m0 y) = (e^{i m0 y} + e^{-i m0 y}) / 2.
  U.set_mode(0, 0, 0, 1, Complex(0, -0.5 * d2));
  U.set_mode(1, 0, 0, 1, Complex(0.5 * d2, 0));
  return U;
}

SpectralField helical_forcing(const TorusGrid& grid, double nu) {
  SpectralField F(grid, Rank::vector);
  F.set_mode(0, 0, 0, 1, Complex(0, -0.5 * nu));
  F.set_mode(1, 0, 0, 1, Complex(0.5 * nu, 0));
  return F;
}

SpectralField momentum_residual(const SpectralField& U, double nu) {
  require(U.rank() == Rank::vector, "momentum_residual: vector field required");
  const TorusGrid& g = U.grid();
  SpectralTransform fft(g);
  std::vector<std::vector<double>> u(3, std::vector<double>(g.points()));
  std::vector<std::vector<double>> du(9, std::vector<double>(g.points()));
  const Axis axes[3] = {Axis::x1, Axis::x2, Axis::y};
  for (std::size_t c = 0; c < 3; ++c) {
    fft.to_physical(U, c, u[c]);
    for (std::size_t j = 0; j < 3; ++j) {
      const SpectralField d = derivative(U.component_field(c), axes[j]);
      fft.to_physical(d, 0, du[3 * c + j]);
    }
  }
  SpectralField adv(g, Rank::vector);
  std::vector<double> a(g.points());
  for (std::size_t c = 0; c < 3; ++c) {
    for (std::size_t p = 0; p < g.points(); ++p)
      a[p] = u[0][p] * du[3 * c][p] + u[1][p] * du[3 * c + 1][p] + u[2][p] * du[3 * c + 2][p];
    fft.to_spectral(a, adv, c);
  }
  SpectralField r = laplacian(U);
  r *= nu;
  r -= adv;
  r += helical_forcing(g, nu);
  return leray_project(r);
}

namespace {
constexpr int pair_index[3][3] = {{0, 1, 2}, {1, 3, 4}, {2, 4, 5}};
}

struct PerturbationSolver::Block {
  int k1 = 0, k2 = 0;
  std::vector<int> mode;                   // y-wavenumber of each reduced coordinate
  std::vector<std::array<double, 3>> dir;  // orthonormal direction of each coordinate
  std::vector<std::size_t> off, partner;   // field offsets of (c, m), index c*n + m + Ky
  Eigen::MatrixXcd A;                      // reduced generator
  Eigen::MatrixXcd E;                      // exp(h A)
};

struct PerturbationSolver::Mode {
  std::size_t field;  // offset of component 0
  std::size_t prod;   // offset into the half-spectrum products
  bool conj;          // product read from the conjugate partner
  double k[3];
  double inv_k2;      // 0 for the mean
};

PerturbationSolver::PerturbationSolver(const TorusGrid& grid, double nu, const DnsOptions& opt)
    : grid_(grid), nu_(nu), opt_(opt), stage_(grid, Rank::vector), nl_(grid, Rank::vector) {
  require(nu > 0 && std::isfinite(nu), "PerturbationSolver: nu must be > 0");
  K1_ = TorusGrid::dealias_cutoff(grid.n1());
  K2_ = TorusGrid::dealias_cutoff(grid.n2());
  Ky_ = TorusGrid::dealias_cutoff(grid.ny());
  // Aliasing guard: quadratic interactions of retained modes must not fold back.
  require(3 * K1_ < int(grid.n1()) && 3 * K2_ < int(grid.n2()) && 3 * Ky_ < int(grid.ny()),
          "PerturbationSolver: retained band violates the 2/3 rule");
  fft_ = std::make_unique<SpectralTransform>(grid, opt.effort);
  phys_.assign(3, std::vector<double>(grid.points()));
  products_.assign(6, std::vector<Complex>(grid.n1() * grid.n2() * (grid.ny() / 2 + 1)));

  const int n = 2 * Ky_ + 1;
  const double d = grid.delta(), d2 = d * d, s = opt.advection_scale;
  for (int k1 = 0; k1 <= K1_; ++k1)
    for (int k2 = -K2_; k2 <= K2_; ++k2) {
      if (k1 == 0 && k2 < 0) continue;
      Block b;
      b.k1 = k1;
      b.k2 = k2;
      const bool zero = k1 == 0 && k2 == 0;
      const double kh = std::sqrt(double(k1) * k1 + double(k2) * k2);
      for (int m = -Ky_; m <= Ky_; ++m) {
        const double ky = m * grid.m0();
        if (zero) {
          b.mode.push_back(m), b.dir.push_back({1, 0, 0});
          b.mode.push_back(m), b.dir.push_back({0, 1, 0});
          if (m == 0) b.mode.push_back(m), b.dir.push_back({0, 0, 1});
        } else {
          const double kn = std::sqrt(kh * kh + ky * ky);
          b.mode.push_back(m), b.dir.push_back({-k2 / kh, k1 / kh, 0});
          b.mode.push_back(m), b.dir.push_back({-ky * k1 / (kh * kn), -ky * k2 / (kh * kn), kh / kn});
        }
      }
      // Unprojected generator on the 3n full coordinates, index c*n + (m + Ky).
      Eigen::MatrixXcd G = Eigen::MatrixXcd::Zero(3 * n, 3 * n);
      auto at = [&](int c, int m) { return c * n + (m + Ky_); };
      const Complex up = -0.5 * s * d2 * Complex(k1, k2);
      const Complex down = 0.5 * s * d2 * Complex(k1, -k2);
      for (int m = -Ky_; m <= Ky_; ++m) {
        const double k2n = double(k1) * k1 + double(k2) * k2 + m * m * grid.m0() * grid.m0();
        for (int c = 0; c < 3; ++c) {
          G(at(c, m), at(c, m)) = -nu * k2n;
          if (m < Ky_) G(at(c, m + 1), at(c, m)) += up;
          if (m > -Ky_) G(at(c, m - 1), at(c, m)) += down;
        }
        // -(V.grad)U* = (-delta cos(m0 y) v3, +delta sin(m0 y) v3, 0)
        if (m < Ky_) {
          G(at(0, m + 1), at(2, m)) += -0.5 * s * d;
          G(at(1, m + 1), at(2, m)) += Complex(0, -0.5 * s * d);
        }
        if (m > -Ky_) {
          G(at(0, m - 1), at(2, m)) += -0.5 * s * d;
          G(at(1, m - 1), at(2, m)) += Complex(0, 0.5 * s * d);
        }
      }
      const std::size_t comp = grid.points();
      for (int c = 0; c < 3; ++c)
        for (int m = -Ky_; m <= Ky_; ++m) {
          b.off.push_back(c * comp + stage_.offset(0, TorusGrid::fft_index(k1, grid.n1()),
                                                   TorusGrid::fft_index(k2, grid.n2()),
                                                   TorusGrid::fft_index(m, grid.ny())));
          b.partner.push_back(c * comp + stage_.offset(0, TorusGrid::fft_index(-k1, grid.n1()),
                                                       TorusGrid::fft_index(-k2, grid.n2()),
                                                       TorusGrid::fft_index(-m, grid.ny())));
        }
      const Eigen::Index r = Eigen::Index(b.mode.size());
      Eigen::MatrixXd B = Eigen::MatrixXd::Zero(3 * n, r);
      for (Eigen::Index j = 0; j < r; ++j)
        for (int c = 0; c < 3; ++c) B(at(c, b.mode[j]), j) = b.dir[j][c];
      b.A = B.transpose().cast<Complex>() * G * B.cast<Complex>();
      blocks_.push_back(std::move(b));
    }

  const std::size_t hy = grid.ny() / 2 + 1;
  for (int k1 = -K1_; k1 <= K1_; ++k1)
    for (int k2 = -K2_; k2 <= K2_; ++k2)
      for (int m = -Ky_; m <= Ky_; ++m) {
        Mode md;
        md.conj = m < 0;
        const std::size_t i1 = TorusGrid::fft_index(md.conj ? -k1 : k1, grid.n1());
        const std::size_t i2 = TorusGrid::fft_index(md.conj ? -k2 : k2, grid.n2());
        md.prod = (i1 * grid.n2() + i2) * hy + std::size_t(md.conj ? -m : m);
        md.field = stage_.offset(0, TorusGrid::fft_index(k1, grid.n1()),
                                 TorusGrid::fft_index(k2, grid.n2()), TorusGrid::fft_index(m, grid.ny()));
        const auto kv = wavevector(grid, k1, k2, m);
        md.k[0] = kv.k1, md.k[1] = kv.k2, md.k[2] = kv.ky;
        md.inv_k2 = kv.norm2() > 0 ? 1.0 / kv.norm2() : 0.0;
        modes_.push_back(md);
      }
}

PerturbationSolver::~PerturbationSolver() = default;

int PerturbationSolver::cutoff(Axis a) const {
  return a == Axis::x1 ? K1_ : a == Axis::x2 ? K2_ : Ky_;
}

double PerturbationSolver::max_wavenumber() const {
  return std::max({double(K1_), double(K2_), Ky_ * grid_.m0()});
}

bool PerturbationSolver::retained(int k1, int k2, int m) const {
  return std::abs(k1) <= K1_ && std::abs(k2) <= K2_ && std::abs(m) <= Ky_;
}

SpectralField PerturbationSolver::truncate(const SpectralField& V) const {
  SpectralField out = V;
  out.for_each([&](std::size_t, int k1, int k2, int m, Complex& v) {
    if (!retained(k1, k2, m)) v = 0;
  });
  return out;
}

SpectralField PerturbationSolver::linear_tendency(const SpectralField& V) const {
  require(V.grid() == grid_ && V.rank() == Rank::vector, "linear_tendency: shape mismatch");
  const double d = grid_.delta(), d2 = d * d, s = opt_.advection_scale;
  SpectralField out(grid_, Rank::vector);
  for (int k1 = -K1_; k1 <= K1_; ++k1)
    for (int k2 = -K2_; k2 <= K2_; ++k2)
      for (int m = -Ky_; m <= Ky_; ++m) {
        const auto kv = wavevector(grid_, k1, k2, m);
        auto get = [&](std::size_t c, int mm) {
          return std::abs(mm) <= Ky_ ? V.coeff(c, k1, k2, mm) : Complex{};
        };
        Complex r[3];
        for (std::size_t c = 0; c < 3; ++c) {
          // Input m-1 feeds output m through "up", input m+1 through "down".
          r[c] = -nu_ * kv.norm2() * get(c, m) - 0.5 * s * d2 * Complex(k1, k2) * get(c, m - 1) +
                 0.5 * s * d2 * Complex(k1, -k2) * get(c, m + 1);
        }
        r[0] += -0.5 * s * d * (get(2, m - 1) + get(2, m + 1));
        r[1] += Complex(0, -0.5 * s * d) * get(2, m - 1) + Complex(0, 0.5 * s * d) * get(2, m + 1);
        const double k2n = kv.norm2();
        if (k2n > 0) {
          const double kk[3] = {kv.k1, kv.k2, kv.ky};
          const Complex dot = kk[0] * r[0] + kk[1] * r[1] + kk[2] * r[2];
          for (int c = 0; c < 3; ++c) r[c] -= kk[c] * dot / k2n;
        }
        for (std::size_t c = 0; c < 3; ++c) out.coeff_ref(c, k1, k2, m) = r[c];
      }
  return out;
}

void PerturbationSolver::nonlinear_products(const SpectralField& V, double* vmax) {
  for (std::size_t c = 0; c < 3; ++c) fft_->to_physical(V, c, phys_[c]);
  if (vmax) {
    double mx = 0;
    for (std::size_t p = 0; p < grid_.points(); ++p)
      mx = std::max(mx, phys_[0][p] * phys_[0][p] + phys_[1][p] * phys_[1][p] + phys_[2][p] * phys_[2][p]);
    *vmax = std::sqrt(mx);
  }
  std::vector<double> prod(grid_.points());
  std::size_t idx = 0;
  for (std::size_t i = 0; i < 3; ++i)
    for (std::size_t j = i; j < 3; ++j, ++idx) {
      const double* a = phys_[i].data();
      const double* b = phys_[j].data();
      for (std::size_t p = 0; p < prod.size(); ++p) prod[p] = a[p] * b[p];
      fft_->to_spectral_half(prod, products_[idx]);
    }
}

SpectralField PerturbationSolver::nonlinear_tendency(const SpectralField& V) {
  require(V.grid() == grid_ && V.rank() == Rank::vector, "nonlinear_tendency: shape mismatch");
  SpectralField out(grid_, Rank::vector);
  if (!opt_.nonlinear) return out;
  nonlinear_products(V, nullptr);
  assemble_nonlinear(out);
  return out;
}

void PerturbationSolver::assemble_nonlinear(SpectralField& out) const {
  Complex* o = out.data().data();
  const std::size_t comp = grid_.points();
  for (const Mode& md : modes_) {
    double re[3], im[3];
    for (int c = 0; c < 3; ++c) {
      double ar = 0, ai = 0;
      for (int j = 0; j < 3; ++j) {
        const Complex P = products_[pair_index[c][j]][md.prod];
        ar += md.k[j] * P.real();
        ai += md.k[j] * P.imag();
      }
      if (md.conj) ai = -ai;
      // -i (ar + i ai)
      re[c] = ai;
      im[c] = -ar;
    }
    const double dr = (md.k[0] * re[0] + md.k[1] * re[1] + md.k[2] * re[2]) * md.inv_k2;
    const double di = (md.k[0] * im[0] + md.k[1] * im[1] + md.k[2] * im[2]) * md.inv_k2;
    for (int c = 0; c < 3; ++c)
      o[c * comp + md.field] = Complex(re[c] - md.k[c] * dr, im[c] - md.k[c] * di);
  }
}

SpectralField PerturbationSolver::rhs(const SpectralField& V) {
  SpectralField r = linear_tendency(V);
  r += nonlinear_tendency(V);
  return r;
}

SpectralField PerturbationSolver::pressure_laplacian(const SpectralField& V) {
  require(V.grid() == grid_ && V.rank() == Rank::vector, "pressure_laplacian: shape mismatch");
  nonlinear_products(V, nullptr);
  SpectralField out(grid_, Rank::scalar);
  Complex* o = out.data().data();
  for (const Mode& md : modes_) {
    Complex acc = 0;
    for (int i = 0; i < 3; ++i)
      for (int j = 0; j < 3; ++j) acc += md.k[i] * md.k[j] * products_[pair_index[i][j]][md.prod];
    o[md.field] = md.conj ? std::conj(acc) : acc;
  }
  return out;
}

double PerturbationSolver::max_speed(const SpectralField& V) {
  double vmax = 0;
  for (std::size_t c = 0; c < 3; ++c) fft_->to_physical(V, c, phys_[c]);
  for (std::size_t p = 0; p < grid_.points(); ++p)
    vmax = std::max(vmax, phys_[0][p] * phys_[0][p] + phys_[1][p] * phys_[1][p] + phys_[2][p] * phys_[2][p]);
  return std::sqrt(vmax);
}

double PerturbationSolver::cfl_number(double dt, double vmax) const {
  return dt * std::max(grid_.delta() * grid_.delta(), vmax) * max_wavenumber();
}

void PerturbationSolver::ensure_blocks(double h) {
  if (h == block_h_) return;
  for (Block& b : blocks_) b.E = (h * b.A).exp();
  block_h_ = h;
}

bool PerturbationSolver::exp_apply(const SpectralField& a, const SpectralField* b, double s,
                                   SpectralField& out) const {
  const Complex* pa = a.data().data();
  const Complex* pb = b ? b->data().data() : nullptr;
  Complex* po = out.data().data();
  const std::size_t n = std::size_t(2 * Ky_ + 1);
  bool finite = true;
  Eigen::VectorXcd x, y;
  for (const Block& blk : blocks_) {
    const std::size_t r = blk.mode.size();
    x.resize(Eigen::Index(r));
    for (std::size_t j = 0; j < r; ++j) {
      const std::size_t slot = std::size_t(blk.mode[j] + Ky_);
      Complex acc = 0;
      for (std::size_t c = 0; c < 3; ++c) {
        const double e = blk.dir[j][c];
        if (e == 0) continue;
        const std::size_t o = blk.off[c * n + slot];
        acc += e * (pb ? pa[o] + s * pb[o] : pa[o]);
      }
      x(Eigen::Index(j)) = acc;
    }
    y.noalias() = blk.E * x;
    for (std::size_t o : blk.off) po[o] = 0;
    for (std::size_t j = 0; j < r; ++j) {
      const std::size_t slot = std::size_t(blk.mode[j] + Ky_);
      const Complex v = y(Eigen::Index(j));
      finite = finite && std::isfinite(v.real()) && std::isfinite(v.imag());
      for (std::size_t c = 0; c < 3; ++c)
        if (blk.dir[j][c] != 0) po[blk.off[c * n + slot]] += blk.dir[j][c] * v;
    }
    if (blk.k1 == 0 && blk.k2 == 0) {
      // The zero block is real-symmetric in m; remove rounding asymmetry.
      for (std::size_t c = 0; c < 3; ++c)
        for (std::size_t i = 0; i <= std::size_t(Ky_); ++i) {
          const std::size_t o = blk.off[c * n + std::size_t(Ky_) + i];
          const std::size_t p = blk.partner[c * n + std::size_t(Ky_) + i];
          const Complex avg = 0.5 * (po[o] + std::conj(po[p]));
          po[o] = avg;
          po[p] = std::conj(avg);
        }
    } else {
      for (std::size_t i = 0; i < blk.off.size(); ++i) po[blk.partner[i]] = std::conj(po[blk.off[i]]);
    }
  }
  return finite;
}

void PerturbationSolver::apply_linear_exponential(SpectralField& V, double h) {
  require(V.grid() == grid_ && V.rank() == Rank::vector, "apply_linear_exponential: shape mismatch");
  ensure_blocks(h);
  exp_apply(V, nullptr, 0, V);
}

void PerturbationSolver::step(SpectralField& V, double dt) {
  require(dt > 0, "step: dt must be positive");
  require(V.grid() == grid_ && V.rank() == Rank::vector, "step: shape mismatch");
  if (!opt_.nonlinear) {
    if (cfl_number(dt, 0.0) > opt_.cfl_limit * (1 + 1e-12)) throw NumericalError("step: CFL violation");
    ensure_blocks(0.5 * dt);
    exp_apply(V, nullptr, 0, V);
    if (!exp_apply(V, nullptr, 0, V)) throw NumericalError("step: non-finite state");
    return;
  }
  // Lawson midpoint:
  //   V* = E(V + dt/2 N(V)),  V' = E(E V + dt N(V*)),  E = exp(dt/2 L).
  double vmax = 0;
  nonlinear_products(V, &vmax);
  if (!std::isfinite(vmax)) throw NumericalError("step: non-finite state");
  if (cfl_number(dt, vmax) > opt_.cfl_limit * (1 + 1e-12))
    throw NumericalError("step: CFL violation");
  ensure_blocks(0.5 * dt);
  assemble_nonlinear(nl_);
  exp_apply(V, &nl_, 0.5 * dt, stage_);
  nonlinear_products(stage_, nullptr);
  assemble_nonlinear(nl_);
  exp_apply(V, nullptr, 0, V);
  if (!exp_apply(V, &nl_, dt, V)) throw NumericalError("step: non-finite state");
}

SpectralField pressure_diagnostic(PerturbationSolver& solver, const SpectralField& V) {
  return inverse_laplacian(solver.pressure_laplacian(V));
}

double cfl_dt(const PerturbationSolver& solver, double vmax) {
  const double d2 = solver.grid().delta() * solver.grid().delta();
  return solver.options().cfl_limit / (std::max(d2, vmax) * solver.max_wavenumber());
}

SpectralField init_random(const TorusGrid& grid, double target_x0, std::uint64_t seed) {
  require(target_x0 > 0 && std::isfinite(target_x0), "init_random: target must be > 0");
  std::mt19937_64 rng(seed);
  std::normal_distribution<double> gauss;
  const int B1 = int(grid.n1() / 4), B2 = int(grid.n2() / 4), By = int(grid.ny() / 4);
  SpectralField V(grid, Rank::vector);
  for (std::size_t c = 0; c < 3; ++c)
    for (int k1 = -B1; k1 <= B1; ++k1)
      for (int k2 = -B2; k2 <= B2; ++k2)
        for (int m = -By; m <= By; ++m) {
          const double a = gauss(rng), b = gauss(rng);
          // Visit each Hermitian pair once: draw for the lexicographically positive member.
          const bool positive = k1 > 0 || (k1 == 0 && (k2 > 0 || (k2 == 0 && m >= 0)));
          if (positive) V.set_mode(c, k1, k2, m, Complex(a, b));
        }
  V = leray_project(V);
  V *= target_x0 / norm_X0(V);
  return V;
}

namespace {

struct Sums {
  double v3_x0 = 0, V_x0 = 0;
  double lap_v3[2] = {0, 0}, lap_v3_g[2] = {0, 0};
  double om[2] = {0, 0}, om_g[2] = {0, 0};
  double lapV[2] = {0, 0}, lapV_g[2] = {0, 0};
  double p0lap_v3 = 0, p0lap_v3_g = 0;
  double lap_p0v[3] = {0, 0, 0};
  double e_nonzero = 0;
};

Sums spectral_sums(const SpectralField& V) {
  const TorusGrid& g = V.grid();
  Sums s;
  for (std::size_t i1 = 0; i1 < g.n1(); ++i1)
    for (std::size_t i2 = 0; i2 < g.n2(); ++i2)
      for (std::size_t iy = 0; iy < g.ny(); ++iy) {
        const int k1 = TorusGrid::wavenumber(i1, g.n1()), k2 = TorusGrid::wavenumber(i2, g.n2());
        const auto kv = wavevector(g, k1, k2, TorusGrid::wavenumber(iy, g.ny()));
        const Complex v1 = V.at(0, i1, i2, iy), v2 = V.at(1, i1, i2, iy), v3 = V.at(2, i1, i2, iy);
        const double a3 = std::norm(v3), aV = std::norm(v1) + std::norm(v2) + a3;
        if (aV == 0) continue;
        const double K2 = kv.norm2(), K4 = K2 * K2, h2 = h2_weight(kv);
        const bool zero = k1 == 0 && k2 == 0;
        const double x0w = ((zero ? 1.0 : 0.0) + kv.k1 * kv.k1 + kv.k2 * kv.k2) * h2;
        s.v3_x0 += x0w * a3;
        s.V_x0 += x0w * aV;
        const double om = std::norm(Complex(0, kv.k1) * v2 - Complex(0, kv.k2) * v1);
        const double ki2[2] = {kv.k1 * kv.k1, kv.k2 * kv.k2};
        for (int i = 0; i < 2; ++i) {
          s.lap_v3[i] += ki2[i] * K4 * a3;
          s.lap_v3_g[i] += ki2[i] * K4 * K2 * a3;
          s.om[i] += ki2[i] * om;
          s.om_g[i] += ki2[i] * K2 * om;
          s.lapV[i] += ki2[i] * K4 * aV;
          s.lapV_g[i] += ki2[i] * K4 * K2 * aV;
        }
        if (zero) {
          s.p0lap_v3 += K4 * a3;
          s.p0lap_v3_g += K4 * K2 * a3;
          s.lap_p0v[0] += K4 * std::norm(v1);
          s.lap_p0v[1] += K4 * std::norm(v2);
          s.lap_p0v[2] += K4 * a3;
        } else {
          s.e_nonzero += aV;
        }
      }
  const double vol = g.volume();
  for (double* p : {&s.v3_x0, &s.V_x0, &s.p0lap_v3, &s.p0lap_v3_g, &s.e_nonzero}) *p *= vol;
  for (int i = 0; i < 2; ++i)
    for (double* p : {&s.lap_v3[i], &s.lap_v3_g[i], &s.om[i], &s.om_g[i], &s.lapV[i], &s.lapV_g[i]})
      *p *= vol;
  for (double& v : s.lap_p0v) v *= vol;
  return s;
}

}  // namespace

TrajectoryResult run_trajectory(PerturbationSolver& solver, const SpectralField& V0, double T,
                                double dt, const TrajectoryOptions& opt) {
  require(V0.grid() == solver.grid() && V0.rank() == Rank::vector, "run_trajectory: shape mismatch");
  require(T >= 0 && dt > 0 && opt.sample_every >= 1, "run_trajectory: bad horizon or step");
  const double scale = std::max(1.0, V0.max_abs());
  require(max_divergence(V0) <= 1e-10 * scale, "run_trajectory: V0 must be divergence-free");

  const double nu = solver.nu();
  const double rate = opt.epsilon * std::sqrt(nu);
  TrajectoryResult res(PerturbationState(solver.truncate(V0), 0.0, nu));
  res.diagnostics.epsilon = opt.epsilon;
  SpectralField& V = res.state.V;

  XedAccumulator x_lap_v3[2] = {XedAccumulator(opt.epsilon, nu), XedAccumulator(opt.epsilon, nu)};
  XedAccumulator x_om[2] = {XedAccumulator(opt.epsilon, nu), XedAccumulator(opt.epsilon, nu)};
  XedAccumulator x_lapV[2] = {XedAccumulator(opt.epsilon, nu), XedAccumulator(opt.epsilon, nu)};
  XedAccumulator x_lap_p[2] = {XedAccumulator(opt.epsilon, nu), XedAccumulator(opt.epsilon, nu)};
  XedAccumulator x_p0 = XedAccumulator(0.0, nu);
  double sup_a = 0, sup_b = 0, sup_x0 = 0, x0_initial = 0;

  auto sample = [&](double t) {
    const Sums s = spectral_sums(V);
    const SpectralField lap_p = solver.pressure_laplacian(V);
    double dp[2] = {0, 0}, dp_g[2] = {0, 0};
    lap_p.for_each([&](std::size_t, int k1, int k2, int m, const Complex& v) {
      const double a = std::norm(v);
      if (a == 0) return;
      const double K2 = wavevector(V.grid(), k1, k2, m).norm2();
      dp[0] += double(k1) * k1 * a, dp[1] += double(k2) * k2 * a;
      dp_g[0] += double(k1) * k1 * K2 * a, dp_g[1] += double(k2) * k2 * K2 * a;
    });
    const double vol = V.grid().volume();
    DiagnosticRow r;
    r.t = t;
    r.v3_x0 = std::sqrt(s.v3_x0);
    r.V_x0 = std::sqrt(s.V_x0);
    r.d1_lap_v3 = std::sqrt(s.lap_v3[0]);
    r.d2_lap_v3 = std::sqrt(s.lap_v3[1]);
    r.d1_omega3 = std::sqrt(s.om[0]);
    r.d2_omega3 = std::sqrt(s.om[1]);
    r.lap_P0v1 = std::sqrt(s.lap_p0v[0]);
    r.lap_P0v2 = std::sqrt(s.lap_p0v[1]);
    r.lap_P0v3 = std::sqrt(s.lap_p0v[2]);
    r.d1_lap_V = std::sqrt(s.lapV[0]);
    r.d2_lap_V = std::sqrt(s.lapV[1]);
    r.d1_lap_p = std::sqrt(vol * dp[0]);
    r.d2_lap_p = std::sqrt(vol * dp[1]);
    r.energy_nonzero = s.e_nonzero;
    for (int i = 0; i < 2; ++i) {
      x_lap_v3[i].add(t, s.lap_v3[i], s.lap_v3_g[i]);
      x_om[i].add(t, s.om[i], s.om_g[i]);
      x_lapV[i].add(t, s.lapV[i], s.lapV_g[i]);
      x_lap_p[i].add(t, vol * dp[i], vol * dp_g[i]);
    }
    x_p0.add(t, s.p0lap_v3, s.p0lap_v3_g);
    const double w = std::exp(rate * t);
    sup_a = std::max(sup_a, r.v3_x0 + w * (r.d1_lap_v3 + r.d2_lap_v3));
    sup_b = std::max(sup_b, w * (r.d1_omega3 + r.d2_omega3));
    sup_x0 = std::max(sup_x0, r.V_x0);
    r.E1 = sup_a + sup_b;
    r.E2 = sup_x0;
    res.energy.times.push_back(t);
    res.energy.E1_series.push_back(r.E1);
    res.energy.E2_series.push_back(r.E2);
    res.diagnostics.rows.push_back(r);
  };

  sample(0.0);
  res.energy.E1_initial = res.diagnostics.rows.front().E1;
  x0_initial = res.diagnostics.rows.front().V_x0;

  const auto steps = static_cast<std::size_t>(std::ceil(T / dt - 1e-9));
  double t = 0;
  for (std::size_t n = 1; n <= steps; ++n) {
    const double h = (n == steps) ? T - t : dt;
    try {
      solver.step(V, h);
    } catch (const NumericalError& e) {
      res.diverged = true;
      res.failure = e.what();
      break;
    }
    t = (n == steps) ? T : double(n) * dt;
    res.steps = n;
    if (opt.check_invariants) {
      const double vs = std::max(V.max_abs(), 1e-300);
      res.diagnostics.max_divergence = std::max(res.diagnostics.max_divergence, max_divergence(V) / vs);
      res.diagnostics.max_hermitian_defect =
          std::max(res.diagnostics.max_hermitian_defect, V.hermitian_defect() / vs);
    }
    if (n % opt.sample_every == 0 || n == steps) {
      sample(t);
      const DiagnosticRow& r = res.diagnostics.rows.back();
      if (opt.abort_E1_factor > 0 && r.E1 > opt.abort_E1_factor * res.energy.E1_initial) break;
      if (opt.abort_X0_factor > 0 && nu * r.V_x0 > opt.abort_X0_factor * x0_initial) break;
    }
  }
  res.state.t = t;

  auto& d = res.diagnostics;
  res.energy.E1 = d.rows.back().E1;
  res.energy.E2 = d.rows.back().E2;
  if (d.rows.size() >= 2) {
    const double inv_nu = 1.0 / nu;
    d.M1 = x_p0.result().x1_sq;
    for (int i = 0; i < 2; ++i) {
      d.M1 += x_lap_v3[i].result().x1_sq + inv_nu * x_lap_p[i].result().l2_integral_weighted +
              x_lap_v3[i].result().xed_sq + x_om[i].result().xed_sq;
      d.M2 += x_lapV[i].result().xed_sq;
    }
    std::vector<double> ts;
    std::vector<double> series[4];
    for (const auto& r : d.rows) {
      ts.push_back(r.t);
      series[0].push_back(r.d1_lap_v3);
      series[1].push_back(r.d2_lap_v3);
      series[2].push_back(r.d1_omega3);
      series[3].push_back(r.d2_omega3);
    }
    double* rates[4] = {&d.rate_d1_lap_v3, &d.rate_d2_lap_v3, &d.rate_d1_omega3, &d.rate_d2_omega3};
    for (int q = 0; q < 4; ++q) {
      bool ok = ts.size() >= 3;
      for (double v : series[q]) ok = ok && v > 0 && std::isfinite(v);
      *rates[q] = ok ? fit_decay_rate(ts, series[q]).rate : std::nan("");
    }
  }
  return res;
}

LiftUpReport lift_up_experiment(double c, double nu, double delta, double T, const LiftUpOptions& opt) {
  require(nu > 0 && T > 0, "lift_up_experiment: need nu > 0 and T > 0");
  const TorusGrid grid(opt.n1, opt.n2, opt.ny, delta);
  PerturbationSolver solver(grid, nu);
  SpectralField V(grid, Rank::vector);
  V.set_mode(2, 0, 0, 0, c);  // P0 v3 = c: the only divergence-free zero mode of v3

  LiftUpReport r;
  r.c = c;
  r.nu = nu;
  r.delta = delta;
  r.T = T;
  r.predicted = std::pow(delta, 3) * c / nu;
  const double m0 = grid.m0(), rate = nu * m0 * m0;
  const double amp = delta * c / rate;
  const double dt = opt.dt > 0 ? opt.dt : cfl_dt(solver, std::abs(c));
  const auto steps = static_cast<std::size_t>(std::ceil(T / dt - 1e-9));
  auto observe = [&](double t) {
    // P0 v1 = a cos(m0 y): coefficient of e^{i m0 y} is a/2; P0 v2 = b sin(m0 y): coefficient -i b/2.
    const double a = 2 * V.coeff(0, 0, 0, 1).real();
    const double b = -2 * V.coeff(1, 0, 0, 1).imag();
    r.peak_v1 = std::max(r.peak_v1, std::abs(a));
    r.peak_v2 = std::max(r.peak_v2, std::abs(b));
    const double closed = -amp * (1 - std::exp(-rate * t));
    if (r.predicted > 0)
      r.max_closed_form_error = std::max(r.max_closed_form_error, std::abs(a - closed) / r.predicted);
  };
  observe(0);
  double t = 0;
  for (std::size_t n = 1; n <= steps; ++n) {
    const double h = n == steps ? T - t : dt;
    solver.step(V, h);
    t = n == steps ? T : double(n) * dt;
    if (n % opt.sample_every == 0 || n == steps) observe(t);
  }
  r.closed_form_at_T = amp * (1 - std::exp(-rate * T));
  r.ratio = r.predicted > 0 ? r.peak_v1 / r.predicted : 0;
  r.nonlinear_flag = r.predicted > 0 && r.max_closed_form_error > 0.1;
  return r;
}

}  // namespace helistab
