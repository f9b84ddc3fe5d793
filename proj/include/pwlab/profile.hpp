#pragma once

// Wave profile W by shooting from W(0) = r2, W'(0) = i J / r2 and its
// 2pi-periodic representation Q(z) = e^{-i p x} W(x), z = 2 k x.

#include <algorithm>
#include <cmath>
#include <vector>

#include "pwlab/error.hpp"
#include "pwlab/fourier.hpp"
#include "pwlab/model.hpp"
#include "pwlab/ode.hpp"
#include "pwlab/quadrature.hpp"

namespace pwlab {

struct ProfileOptions {
  double tol = 1e-12;
  bool escalate = true;  // double gridN while the spectral tail is too large
  int max_gridN = 4096;
  double tail_tol = 1e-12;
  double period_tol = 1e-8;
};

struct WaveProfile {
  ModelCase mc = ModelCase::defocusing();
  Invariants inv;
  WaveNumbers wn;
  int gridN = 0;
  CVec Q;
  Complex W0, dW0;
  double period_defect = 0.0;        // |e^{-ipT} W(T) - W(0)| / max|W|
  double floquet_defect = NAN;       // |W(T) - e^{i Phi} W(0)| / max|W|, J != 0
  double conservation_error = 0.0;  // max over samples of |J(x)-J| + |E(x)-E|
  double spectral_tail = 0.0;       // relative size of modes |m| >= gridN/4
  int requested_gridN = 0;

  double k() const { return wn.k; }
  double p() const { return wn.p; }
};

namespace detail {

inline bool is_power_of_two(int n) { return n > 0 && (n & (n - 1)) == 0; }

struct ShotData {
  std::vector<OdeState<4>> states;  // samples j = 0..n (last one at x = T)
};

inline ShotData shoot(const ModelCase& mc, const Invariants& inv, double T, int n, double tol) {
  const CubicRoots roots = cubic_roots(mc, inv);
  const double r2 = std::sqrt(roots.y2);
  const double g = mc.gamma(), w = mc.omega();
  auto rhs = [g, w](double, const OdeState<4>& y) {
    const double m2 = y[0] * y[0] + y[1] * y[1];
    const double f = -(w + g * m2);
    return OdeState<4>{y[2], y[3], f * y[0], f * y[1]};
  };
  std::vector<double> ts(n + 1);
  for (int j = 0; j <= n; ++j) ts[j] = T * j / n;
  OdeOptions opt;
  opt.abs_tol = tol;
  opt.rel_tol = tol;
  opt.h_init = T / n;
  return {dopri5<4>(rhs, OdeState<4>{r2, 0.0, 0.0, inv.J / r2}, ts, opt)};
}

}  // namespace detail

/// Value of the case's J and E along a sampled state (Re W, Im W, Re W', Im W').
inline Invariants invariants_of_state(const ModelCase& mc, const OdeState<4>& y) {
  const double m2 = y[0] * y[0] + y[1] * y[1];
  const double J = y[0] * y[3] - y[1] * y[2];
  const double E = 0.5 * (y[2] * y[2] + y[3] * y[3]) + 0.5 * mc.omega() * m2 + 0.25 * mc.gamma() * m2 * m2;
  return {J, E};
}

inline WaveProfile build_profile(const ModelCase& mc, const Invariants& inv, const WaveNumbers& wn, int n,
                                 double tol) {
  const auto shot = detail::shoot(mc, inv, wn.T, n, tol);
  WaveProfile prof;
  prof.mc = mc;
  prof.inv = inv;
  prof.wn = wn;
  prof.gridN = n;
  prof.Q.resize(n);
  double maxW = 0.0, cons = 0.0;
  for (int j = 0; j <= n; ++j) {
    const auto& y = shot.states[j];
    const Invariants here = invariants_of_state(mc, y);
    cons = std::max(cons, std::abs(here.J - inv.J) + std::abs(here.E - inv.E));
    const Complex W(y[0], y[1]);
    maxW = std::max(maxW, std::abs(W));
    if (j < n) {
      const double x = wn.T * j / n;
      prof.Q[j] = std::polar(1.0, -wn.p * x) * W;
    }
  }
  const auto& y0 = shot.states.front();
  const auto& yT = shot.states.back();
  prof.W0 = Complex(y0[0], y0[1]);
  prof.dW0 = Complex(y0[2], y0[3]);
  const Complex WT(yT[0], yT[1]);
  prof.period_defect = std::abs(std::polar(1.0, -wn.p * wn.T) * WT - prof.W0) / maxW;
  if (wn.Phi) prof.floquet_defect = std::abs(WT - std::polar(1.0, *wn.Phi) * prof.W0) / maxW;
  prof.conservation_error = cons;
  prof.spectral_tail = spectral_tail(Fourier(n).forward(prof.Q), n / 4);
  return prof;
}

/// Shoots the profile at (J,E) and samples Q on gridN points. With
/// escalation the grid is doubled until the spectral tail is resolved.
inline WaveProfile shoot_profile(const ModelCase& mc, const Invariants& inv, int gridN,
                                 const ProfileOptions& opt = {}) {
  if (gridN < 64 || !detail::is_power_of_two(gridN))
    throw Error(ErrorKind::InvalidArgument, "gridN must be a power of two >= 64");
  detail::require_interior(mc, inv);
  const WaveNumbers wn = wave_numbers(mc, inv);
  int n = gridN;
  WaveProfile prof = build_profile(mc, inv, wn, n, opt.tol);
  while (opt.escalate && prof.spectral_tail > opt.tail_tol && 2 * n <= opt.max_gridN) {
    n *= 2;
    prof = build_profile(mc, inv, wn, n, opt.tol);
  }
  if (prof.period_defect > opt.period_tol) {
    prof = build_profile(mc, inv, wn, n, opt.tol * 0.1);
    if (prof.period_defect > opt.period_tol)
      throw Error(ErrorKind::PeriodMismatch, "e^{-ipT} W(T) != W(0): wave numbers inconsistent with the orbit");
  }
  prof.requested_gridN = gridN;
  return prof;
}

// ---------------------------------------------------------------------------
// Functionals of the reduced equation

struct Functionals {
  double N = 0.0;
  double M = 0.0;
  double E = 0.0;  // energy with the case's quartic sign
};

/// Trapezoid sums on the uniform grid (spectrally accurate for periodic data).
inline Functionals functionals(const ModelCase& mc, double k, const CVec& Q) {
  const int n = static_cast<int>(Q.size());
  if (n == 0) return {};
  const Fourier fr(n);
  const CVec dQ = fr.derivative(Q, 1);
  const double dz = 2.0 * kPi / n;
  double N = 0.0, M = 0.0, E = 0.0;
  for (int j = 0; j < n; ++j) {
    const double a2 = std::norm(Q[j]);
    N += a2;
    M += (std::conj(Q[j]) * dQ[j]).imag();
    E += 2.0 * k * k * std::norm(dQ[j]) - 0.25 * mc.gamma() * a2 * a2;
  }
  return {0.5 * N * dz, -0.5 * M * dz, E * dz};
}

inline Functionals functionals(const WaveProfile& prof) { return functionals(prof.mc, prof.k(), prof.Q); }

/// E - mu N - 4 p k M, whose critical point is the profile.
inline double modified_energy(const ModelCase& mc, double k, double p, const CVec& Q) {
  const Functionals f = functionals(mc, k, Q);
  return f.E - mc.mu(p) * f.N - 4.0 * p * k * f.M;
}

/// max_j |4k^2 Q'' + 4ipk Q' + mu Q + g |Q|^2 Q|.
inline double stationarity_residual(const ModelCase& mc, double k, double p, const CVec& Q) {
  const int n = static_cast<int>(Q.size());
  const Fourier fr(n);
  const CVec d1 = fr.derivative(Q, 1);
  const CVec d2 = fr.derivative(Q, 2);
  const double mu = mc.mu(p);
  double r = 0.0;
  for (int j = 0; j < n; ++j) {
    const Complex v = 4.0 * k * k * d2[j] + Complex(0.0, 4.0 * p * k) * d1[j] + mu * Q[j] +
                      static_cast<double>(mc.gamma()) * std::norm(Q[j]) * Q[j];
    r = std::max(r, std::abs(v));
  }
  return r;
}

inline double stationarity_residual(const WaveProfile& prof) {
  return stationarity_residual(prof.mc, prof.k(), prof.p(), prof.Q);
}

/// |Q'(0)^2 - Q(0) Q''(0)|; the kernel functions R1, R2 could combine into a
/// periodic function only if this vanishes.
inline double qcond_defect(const WaveProfile& prof) {
  const Fourier fr(prof.gridN);
  const CVec d1 = fr.derivative(prof.Q, 1);
  const CVec d2 = fr.derivative(prof.Q, 2);
  return std::abs(d1[0] * d1[0] - prof.Q[0] * d2[0]);
}

/// omega y2^2 + gamma y2^3 - J^2, nonzero because r2 is not a critical
/// radius of V_J. Positive in the defocusing case.
inline double nondegeneracy_margin(const ModelCase& mc, const Invariants& inv) {
  const CubicRoots r = cubic_roots(mc, inv);
  return mc.omega() * r.y2 * r.y2 + mc.gamma() * r.y2 * r.y2 * r.y2 - inv.J * inv.J;
}

/// P(y) = e^{i y} Q(2 y) sampled at y_j = z_j / 2; P(y + pi) = -P(y).
inline CVec representation_P(const WaveProfile& prof) {
  CVec P(prof.gridN);
  for (int j = 0; j < prof.gridN; ++j) {
    const double z = 2.0 * kPi * j / prof.gridN;
    P[j] = std::polar(1.0, 0.5 * z) * prof.Q[j];
  }
  return P;
}

}  // namespace pwlab
