#pragma once

// Two-parameter family of travelling rotating waves around Q_{J,E}, the
// matrices M = d(omega,c)/d(E',J') and K = d(N,M)(lambda Q')/d(E',J'),
// the Hessian H = -M^{-1} K of d(omega,c), and determinant scans.

#include <cmath>
#include <optional>
#include <string>
#include <vector>

#include <Eigen/Dense>

#include "pwlab/error.hpp"
#include "pwlab/parallel.hpp"
#include "pwlab/profile.hpp"
#include "pwlab/quadrature.hpp"

namespace pwlab {

/// Shifts Psi by a multiple of 2 pi so that it lies within pi of ref.
inline int phase_shift_to(double Psi, double ref) {
  return static_cast<int>(std::lround((ref - Psi) / (2.0 * kPi)));
}

struct FamilyMap {
  double omega = 0.0, c = 0.0;
  double Jp = 0.0, Ep = 0.0;
  double lambda = 1.0, v = 0.0;
  double kp = 0.0, pp = 0.0, Tp = 0.0, Psip = 0.0;
  int psi_shift = 0;  // Psi' was continued by psi_shift * 2 pi across a phase jump
};

namespace detail {

struct Primed {
  WaveNumbers wn;
  int shift = 0;
  double Psi = 0.0, p = 0.0;
};

inline Primed primed(const ModelCase& mc, const Invariants& invp, double Psi_ref) {
  Primed r;
  r.wn = wave_numbers(mc, invp);
  r.shift = phase_shift_to(r.wn.Psi, Psi_ref);
  r.Psi = r.wn.Psi + 2.0 * kPi * r.shift;
  r.p = (kPi + r.Psi) / r.wn.T;
  return r;
}

inline std::array<double, 2> omega_c(const ModelCase& mc, const WaveNumbers& base, double Tp, double Psip) {
  const double T = base.T;
  const double om = (mc.omega() * Tp * Tp - (kPi + Psip) * (kPi + Psip)) / (T * T) - mc.mu(base.p);
  const double c = 4.0 * base.k * base.k / kPi * (kPi + Psip) - 4.0 * base.k * base.p;
  return {om, c};
}

}  // namespace detail

/// Forward map (J',E') -> (omega, c) about the base point inv.
inline FamilyMap family_at(const ModelCase& mc, const Invariants& inv, const Invariants& invp) {
  const WaveNumbers base = wave_numbers(mc, inv);
  const auto pr = detail::primed(mc, invp, base.Psi);
  const auto oc = detail::omega_c(mc, base, pr.wn.T, pr.Psi);
  FamilyMap fm;
  fm.omega = oc[0];
  fm.c = oc[1];
  fm.Jp = invp.J;
  fm.Ep = invp.E;
  fm.kp = pr.wn.k;
  fm.Tp = pr.wn.T;
  fm.Psip = pr.Psi;
  fm.pp = pr.p;
  fm.psi_shift = pr.shift;
  fm.lambda = base.k / fm.kp;
  fm.v = 2.0 * (fm.lambda * fm.pp - base.p);
  return fm;
}

/// Solves for (J',E') with the given (omega, c) by Newton's method from (J,E).
inline FamilyMap family_map(const ModelCase& mc, const Invariants& inv, double omega, double c) {
  detail::require_interior(mc, inv);
  const WaveNumbers base = wave_numbers(mc, inv);
  const double T = base.T, k = base.k;
  Invariants x = inv;
  auto residual = [&](const Invariants& p, detail::Primed& pr) {
    pr = detail::primed(mc, p, base.Psi);
    const auto oc = detail::omega_c(mc, base, pr.wn.T, pr.Psi);
    return std::array<double, 2>{oc[0] - omega, oc[1] - c};
  };
  detail::Primed pr;
  auto F = residual(x, pr);
  auto norm = [](const std::array<double, 2>& r) { return std::max(std::abs(r[0]), std::abs(r[1])); };
  for (int it = 0; it < 60; ++it) {
    if (norm(F) <= 1e-14) break;
    Jacobian jac;
    try {
      jac = derivatives(mc, x).jac;
    } catch (const Error& e) {
      // only iterates pressed against the boundary of D get here
      throw Error(ErrorKind::LeftDomain, std::string("family map iterate reached the boundary of D: ") + e.what());
    }
    const double Tp = pr.wn.T, a = kPi + pr.Psi;
    // rows (omega, c), columns (J', E')
    const double wJ = 2.0 * (mc.omega() * Tp * jac.T_J - a * jac.Psi_J) / (T * T);
    const double wE = 2.0 * (mc.omega() * Tp * jac.T_E - a * jac.Psi_E) / (T * T);
    const double cJ = 4.0 * k * k / kPi * jac.Psi_J;
    const double cE = 4.0 * k * k / kPi * jac.Psi_E;
    const double det = wJ * cE - wE * cJ;
    if (!std::isfinite(det) || det == 0.0) throw Error(ErrorKind::SingularM, "family map Jacobian is singular");
    const double dJ = -(cE * F[0] - wE * F[1]) / det;
    const double dE = -(-cJ * F[0] + wJ * F[1]) / det;
    double step = 1.0;
    bool moved = false;
    for (int ls = 0; ls < 30; ++ls, step *= 0.5) {
      const Invariants trial{x.J + step * dJ, x.E + step * dE};
      if (!is_interior(mc, trial)) continue;
      detail::Primed prt;
      std::array<double, 2> Ft;
      try {
        Ft = residual(trial, prt);
      } catch (const Error&) {
        continue;
      }
      if (norm(Ft) < norm(F) || step < 1e-3) {
        x = trial;
        F = Ft;
        pr = prt;
        moved = true;
        break;
      }
    }
    if (!moved) throw Error(ErrorKind::LeftDomain, "family map iterate left D");
    if (std::abs(step * dJ) + std::abs(step * dE) < 1e-16 * (1.0 + std::abs(x.E))) break;
  }
  if (norm(F) > 1e-10) throw Error(ErrorKind::NoConvergence, "family map Newton did not converge");
  return family_at(mc, inv, x);
}

// ---------------------------------------------------------------------------

using Mat2 = Eigen::Matrix2d;

/// Rows (d/dE', d/dJ'), columns (omega, c). det M = omega_case (8k^3/pi^2) Delta.
inline Mat2 matrix_M(const ModelCase& mc, const Invariants& inv) {
  const WaveNumbers wn = wave_numbers(mc, inv);
  const Jacobian jac = derivatives(mc, inv).jac;
  const double k = wn.k, p = wn.p, w = mc.omega();
  Mat2 M;
  M << 2.0 * k / kPi * (w * jac.T_E - p * jac.Psi_E), 4.0 * k * k / kPi * jac.Psi_E,
      2.0 * k / kPi * (w * jac.T_J - p * jac.Psi_J), 4.0 * k * k / kPi * jac.Psi_J;
  return M;
}

/// K from the charge kernels C1, C2, C3. The assembly does not depend on the
/// sign case; matrix_K uses it for the defocusing case only.
inline Mat2 matrix_K_analytic(const ModelCase& mc, const Invariants& inv) {
  const WaveNumbers wn = wave_numbers(mc, inv);
  const Derivatives d = derivatives(mc, inv);
  const DerivCoeffs& C = d.coeffs;
  const Jacobian& j = d.jac;
  const double NE = C.C1 * C.dy_dE[0] + C.C2 * C.dy_dE[1] + C.C3 * j.T_E;
  const double NJ = C.C1 * C.dy_dJ[0] + C.C2 * C.dy_dJ[1] + C.C3 * j.T_J;
  const double r = wn.p / (2.0 * wn.k), q = wn.N / (2.0 * kPi);
  const double ME = r * NE + q * j.Psi_E - 1.5 * inv.J * j.T_E;
  const double MJ = r * NJ + q * j.Psi_J - 1.5 * inv.J * j.T_J - 0.5 * wn.T;
  Mat2 K;
  K << NE, ME, NJ, MJ;
  return K;
}

/// (N, M)(lambda Q_{J',E'}) from the quadrature formulas, with Psi' continued
/// from the base point.
inline std::array<double, 2> scaled_charges(const ModelCase& mc, const WaveNumbers& base, const Invariants& invp) {
  const auto pr = detail::primed(mc, invp, base.Psi);
  const double l2 = (pr.wn.T / base.T) * (pr.wn.T / base.T);
  const double N = pr.wn.N;
  const double M = pr.p / (2.0 * pr.wn.k) * N - 0.5 * invp.J * pr.wn.T;
  return {l2 * N, l2 * M};
}

/// K by central differences with steps h and h/2, Richardson-extrapolated.
inline Mat2 matrix_K_fd(const ModelCase& mc, const Invariants& inv, double h = 1e-5) {
  detail::require_interior(mc, inv);
  const WaveNumbers base = wave_numbers(mc, inv);
  double hE = h, hJ = h;
  while (hE > 1e-12 && !(is_interior(mc, {inv.J, inv.E - 2.0 * hE}) && is_interior(mc, {inv.J, inv.E + 2.0 * hE})))
    hE *= 0.25;
  while (hJ > 1e-12 && !(is_interior(mc, {inv.J - 2.0 * hJ, inv.E}) && is_interior(mc, {inv.J + 2.0 * hJ, inv.E})))
    hJ *= 0.25;
  auto diff = [&](double dJ, double dE, double s) {
    const auto a = scaled_charges(mc, base, {inv.J + s * dJ, inv.E + s * dE});
    const auto b = scaled_charges(mc, base, {inv.J - s * dJ, inv.E - s * dE});
    return std::array<double, 2>{(a[0] - b[0]) / (2.0 * s), (a[1] - b[1]) / (2.0 * s)};
  };
  auto rich = [&](double dJ, double dE, double step) {
    const auto d1 = diff(dJ, dE, step), d2 = diff(dJ, dE, 0.5 * step);
    return std::array<double, 2>{(4.0 * d2[0] - d1[0]) / 3.0, (4.0 * d2[1] - d1[1]) / 3.0};
  };
  const auto gE = rich(0.0, 1.0, hE);
  const auto gJ = rich(1.0, 0.0, hJ);
  Mat2 K;
  K << gE[0], gE[1], gJ[0], gJ[1];
  return K;
}

enum class KMethod { Analytic, FiniteDifference };

inline Mat2 matrix_K(const ModelCase& mc, const Invariants& inv, KMethod* used = nullptr) {
  if (mc.regime() == Regime::Defocusing) {
    if (used) *used = KMethod::Analytic;
    return matrix_K_analytic(mc, inv);
  }
  if (used) *used = KMethod::FiniteDifference;
  return matrix_K_fd(mc, inv);
}

struct StabilityReport {
  Mat2 M, K, H;
  double detM = 0, detK = 0, detH = 0;
  double delta = 0;
  KMethod k_method = KMethod::Analytic;
};

inline StabilityReport hessian_H(const ModelCase& mc, const Invariants& inv) {
  StabilityReport r;
  r.M = matrix_M(mc, inv);
  r.K = matrix_K(mc, inv, &r.k_method);
  r.detM = r.M.determinant();
  r.detK = r.K.determinant();
  if (std::abs(r.detM) < 1e-12) throw Error(ErrorKind::SingularM, "det M is below 1e-12");
  r.H = -r.M.inverse() * r.K;
  r.detH = r.H.determinant();
  r.delta = kam_delta(mc, inv);
  return r;
}

// ---------------------------------------------------------------------------
// d(omega, c) evaluated on shot profiles

struct DOptions {
  int gridN = 256;
  double tol = 1e-13;
};

struct DValue {
  double d = 0.0;
  double N = 0.0;  // N(lambda Q')
  double M = 0.0;  // M(lambda Q')
  FamilyMap fm;
};

/// Profile at (J,E) with Psi continued by shift * 2 pi: Q -> e^{-i shift z} Q.
inline void apply_phase_shift(WaveProfile& prof, int shift) {
  if (shift == 0) return;
  prof.wn.Psi += 2.0 * kPi * shift;
  prof.wn.ell = prof.wn.Psi / prof.wn.T;
  prof.wn.p = prof.wn.k + prof.wn.ell;
  for (int j = 0; j < prof.gridN; ++j) prof.Q[j] *= std::polar(1.0, -2.0 * kPi * shift * j / prof.gridN);
}

inline DValue d_function(const ModelCase& mc, const Invariants& inv, double omega, double c, const DOptions& opt = {}) {
  DValue out;
  out.fm = family_map(mc, inv, omega, c);
  ProfileOptions po;
  po.tol = opt.tol;
  po.escalate = false;
  WaveProfile prof = shoot_profile(mc, {out.fm.Jp, out.fm.Ep}, opt.gridN, po);
  apply_phase_shift(prof, out.fm.psi_shift);
  const Functionals f = functionals(prof);
  const double kp = prof.wn.k, pp = prof.wn.p;
  const double Emod = f.E - mc.mu(pp) * f.N - 4.0 * pp * kp * f.M;
  const double l2 = out.fm.lambda * out.fm.lambda;
  out.d = l2 * l2 * Emod;
  out.N = l2 * f.N;
  out.M = l2 * f.M;
  return out;
}

/// Step for (omega, c) differences that keeps (J',E') well inside D.
inline double safe_family_step(const ModelCase& mc, const Invariants& inv, double h_max = 1e-3) {
  const Mat2 M = matrix_M(mc, inv);
  const double gain = M.inverse().cwiseAbs().rowwise().sum().maxCoeff();
  double dist = inv.E - e_minus(mc, inv.J);
  if (mc.regime() == Regime::Defocusing) dist = std::min(dist, e_plus(inv.J) - inv.E);
  return std::min(h_max, 0.02 * dist / gain);
}

/// Hessian of d at (0,0) by Richardson-extrapolated second differences.
inline Mat2 hessian_from_d(const ModelCase& mc, const Invariants& inv, double h = 0.0, const DOptions& opt = {}) {
  if (h <= 0.0) h = safe_family_step(mc, inv);
  const double d0 = d_function(mc, inv, 0.0, 0.0, opt).d;
  auto second = [&](double s) {
    auto d = [&](double a, double b) { return d_function(mc, inv, a * s, b * s, opt).d; };
    const double ww = (d(1, 0) - 2.0 * d0 + d(-1, 0)) / (s * s);
    const double cc = (d(0, 1) - 2.0 * d0 + d(0, -1)) / (s * s);
    const double wc = (d(1, 1) - d(1, -1) - d(-1, 1) + d(-1, -1)) / (4.0 * s * s);
    Mat2 H;
    H << ww, wc, wc, cc;
    return H;
  };
  return (4.0 * second(0.5 * h) - second(h)) / 3.0;
}

// ---------------------------------------------------------------------------

struct ScanRow {
  double J = 0, E = 0;
  double T = NAN, Phi = NAN, Psi = NAN;
  double delta = NAN, detM = NAN, detK = NAN, detH = NAN;
  bool flagged = false;
  std::string note;
};

inline ScanRow scan_point(const ModelCase& mc, const Invariants& inv) {
  ScanRow row;
  row.J = inv.J;
  row.E = inv.E;
  try {
    const WaveNumbers wn = wave_numbers(mc, inv);
    row.T = wn.T;
    row.Phi = wn.Phi.value_or(NAN);
    row.Psi = wn.Psi;
    const StabilityReport r = hessian_H(mc, inv);
    row.delta = r.delta;
    row.detM = r.detM;
    row.detK = r.detK;
    row.detH = r.detH;
    if (!std::isfinite(r.detH)) {
      row.flagged = true;
      row.note = "non-finite determinant";
    } else if (!(r.detH < 0.0) || !(r.delta > 0.0)) {
      // a sign reversal is a finding, surfaced through the flag
      row.flagged = true;
      row.note = !(r.detH < 0.0) ? "detH >= 0" : "Delta <= 0";
    }
  } catch (const Error& e) {
    row.flagged = true;
    row.note = e.what();
  }
  return row;
}

/// Rows over E in [E_-(J) + e_offset, E_max] (n_points, uniform) for each J.
/// Failures are recorded as flagged rows.
inline std::vector<ScanRow> scan_det_hessian(const ModelCase& mc, const std::vector<double>& J_values, double E_max,
                                             int n_points, double e_offset = 0.05) {
  std::vector<Invariants> pts;
  for (double J : J_values) {
    double lo;
    try {
      lo = e_minus(mc, J) + e_offset;
    } catch (const Error&) {
      lo = NAN;
    }
    for (int i = 0; i < n_points; ++i) {
      const double t = n_points > 1 ? static_cast<double>(i) / (n_points - 1) : 0.0;
      pts.push_back({J, lo + (E_max - lo) * t});
    }
  }
  std::vector<ScanRow> rows(pts.size());
  parallel_for(pts.size(), [&](std::size_t i) { rows[i] = scan_point(mc, pts[i]); });
  return rows;
}

}  // namespace pwlab
