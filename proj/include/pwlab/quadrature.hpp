#pragma once

// Period, phase increments, action and charge of the quasi-periodic waves
// as single integrals over phi in [0, pi/2], their analytic (J,E)
// derivatives, the KAM determinant and the (J,E) <-> (T,Psi) map.
//
// Conventions: s(phi) = y1 cos^2 + y2 sin^2, gap(phi) = |y3 - s(phi)|,
// b = |y3|, and sg = +1 (defocusing) / -1 (focusing) so that
// gap = sg (y3 - s) and b = sg y3. With y3 = S - y1 - y2 every kernel
// below is the derivative of a base integral with respect to y1 or y2.

#include <array>
#include <cmath>
#include <limits>
#include <mutex>
#include <numbers>
#include <optional>
#include <vector>

#include "pwlab/error.hpp"
#include "pwlab/gauss_legendre.hpp"
#include "pwlab/model.hpp"

namespace pwlab {

inline constexpr double kPi = std::numbers::pi;
inline const double kSqrt2 = std::numbers::sqrt2;

struct QuadratureFrame {
  ModelCase mc;
  CubicRoots roots;

  double s(double phi) const {
    const double c = std::cos(phi), sn = std::sin(phi);
    return roots.y1 * c * c + roots.y2 * sn * sn;
  }
  double gap(double phi) const { return std::abs(roots.y3 - s(phi)); }
  /// (1 - s/y3)^{1/2}; equals sqrt(gap / |y3|) in every case.
  double sigma(double phi) const { return std::sqrt(1.0 - s(phi) / roots.y3); }
  double base() const { return std::abs(roots.y3); }
  int sg() const { return mc.gap_sign(); }
};

inline QuadratureFrame make_frame(const ModelCase& mc, const Invariants& inv) {
  return QuadratureFrame{mc, cubic_roots(mc, inv)};
}

/// Which phase integral carries the (J,E) dependence. The renormalized
/// phase degenerates on y3 = 0 (corotating dnoidal line), the raw phase on
/// y1 = 0 (every J = 0 line); the corotating case switches between them.
enum class PhaseBranch { Psi, Phi };

struct WaveNumbers {
  double T = 0.0;
  std::optional<double> Phi;  // undefined when y1 = 0
  double Psi = 0.0;
  double action = 0.0;
  double N = 0.0;  // charge of the 2pi-periodic profile
  double k = 0.0;
  double ell = 0.0;
  double p = 0.0;
  PhaseBranch branch = PhaseBranch::Psi;
};

/// Kernels of the analytic derivatives. B1..B3 are the renormalized-phase
/// kernels (NaN on the Phi branch), PB1..PB3 the raw-phase kernels (NaN when
/// y1 = 0). C1..C3 are the charge kernels.
struct DerivCoeffs {
  double A1 = 0, A2 = 0;
  double B1 = NAN, B2 = NAN, B3 = NAN;
  double PB1 = NAN, PB2 = NAN, PB3 = NAN;
  double C1 = 0, C2 = 0, C3 = 0;
  std::array<double, 3> dy_dE{};
  std::array<double, 3> dy_dJ{};
};

/// Rows are (d/dE, d/dJ), columns (T, Psi), as in the KAM determinant.
struct Jacobian {
  double T_E = 0, Psi_E = 0;
  double T_J = 0, Psi_J = 0;
  double det() const { return T_E * Psi_J - T_J * Psi_E; }
};

struct Derivatives {
  DerivCoeffs coeffs;
  Jacobian jac;
  PhaseBranch branch = PhaseBranch::Psi;
};

namespace detail {

inline const QuadratureOptions& default_quad() {
  static const QuadratureOptions opt{};
  return opt;
}

inline void require_interior(const ModelCase& mc, const Invariants& inv) {
  const DomainClass d = domain_contains(mc, inv);
  if (d.region != Region::Interior)
    throw Error(ErrorKind::BoundaryDegeneracy, "(J,E) is not an interior point of D");
}

inline PhaseBranch choose_branch(const QuadratureFrame& f) {
  if (f.mc.regime() != Regime::FocusingCoro) return PhaseBranch::Psi;
  return (f.base() < f.roots.y1) ? PhaseBranch::Phi : PhaseBranch::Psi;
}

// Base integrals: {int gap^-1/2, int 1/(u v (u+v)), int s/sqrt(gap), int sin^2 cos^2 sqrt(gap)/s}.
inline std::array<double, 4> base_integrals(const QuadratureFrame& f, bool with_psi) {
  const double u = std::sqrt(f.base());
  auto integrand = [&](double phi) {
    const double c = std::cos(phi), sn = std::sin(phi);
    const double c2 = c * c, s2 = sn * sn;
    const double s = f.roots.y1 * c2 + f.roots.y2 * s2;
    const double g = std::abs(f.roots.y3 - s);
    const double v = std::sqrt(g);
    std::array<double, 4> r;
    r[0] = 1.0 / v;
    r[1] = with_psi ? 1.0 / (u * v * (u + v)) : 0.0;
    r[2] = s / v;
    r[3] = (s > 0.0) ? s2 * c2 * v / s : 0.0;
    return r;
  };
  return integrate_gl<4>(integrand, 0.0, kPi / 2, default_quad());
}

inline double phi_integral(const QuadratureFrame& f) {
  auto integrand = [&](double phi) {
    const double s = f.s(phi);
    return std::array<double, 1>{1.0 / (s * std::sqrt(f.gap(phi)))};
  };
  return integrate_gl<1>(integrand, 0.0, kPi / 2, default_quad())[0];
}

}  // namespace detail

inline double period_T(const ModelCase& mc, const Invariants& inv) {
  detail::require_interior(mc, inv);
  const auto f = make_frame(mc, inv);
  auto integrand = [&](double phi) { return std::array<double, 1>{1.0 / std::sqrt(f.gap(phi))}; };
  return 2.0 * kSqrt2 * integrate_gl<1>(integrand, 0.0, kPi / 2, detail::default_quad())[0];
}

/// Phase increment of W over one period of |W|.
inline double phase_Phi(const ModelCase& mc, const Invariants& inv) {
  if (inv.J == 0.0) throw Error(ErrorKind::UndefinedAtZeroJ, "phase increment is undefined at J = 0");
  detail::require_interior(mc, inv);
  const auto f = make_frame(mc, inv);
  return 2.0 * kSqrt2 * inv.J * detail::phi_integral(f);
}

/// Renormalized phase Phi - pi sign(J), from its regularized integral.
inline double renorm_Psi(const ModelCase& mc, const Invariants& inv) {
  detail::require_interior(mc, inv);
  const auto f = make_frame(mc, inv);
  if (f.roots.y3 == 0.0 || (mc.regime() == Regime::FocusingCoro && std::abs(inv.J) <= kBoundaryMargin &&
                            inv.E < 0.0))
    throw Error(ErrorKind::PhaseBranch, "renormalized phase jumps on the corotating dnoidal line");
  if (inv.J == 0.0) return 0.0;
  const auto b = detail::base_integrals(f, true);
  return -mc.gamma() * inv.J * 2.0 * kSqrt2 * b[1];
}

/// T, Phi, Psi, action and charge together with the Floquet data k, ell, p.
/// On the corotating dnoidal line (J = 0, E < 0) Psi is continued from J > 0,
/// so that p = Phi / T.
inline WaveNumbers wave_numbers(const ModelCase& mc, const Invariants& inv) {
  detail::require_interior(mc, inv);
  const auto f = make_frame(mc, inv);
  WaveNumbers wn;
  wn.branch = detail::choose_branch(f);
  const bool psi_integral = f.roots.y3 != 0.0;
  const auto b = detail::base_integrals(f, psi_integral);
  wn.T = 2.0 * kSqrt2 * b[0];
  wn.k = kPi / wn.T;
  wn.N = 2.0 * kSqrt2 * wn.k * b[2];
  const double dy = f.roots.y2 - f.roots.y1;
  wn.action = kSqrt2 * dy * dy * b[3];
  if (f.roots.y1 > 0.0) wn.Phi = 2.0 * kSqrt2 * inv.J * detail::phi_integral(f);
  if (psi_integral) {
    wn.Psi = -mc.gamma() * inv.J * 2.0 * kSqrt2 * b[1];
  } else {
    const double sgnJ = inv.J < 0 ? -1.0 : 1.0;
    wn.Psi = wn.Phi.value_or(0.0) - kPi * sgnJ;
  }
  wn.ell = wn.Psi / wn.T;
  wn.p = wn.k + wn.ell;
  return wn;
}

/// Charge of the 2pi-periodic profile.
inline double charge_N(const ModelCase& mc, const Invariants& inv) { return wave_numbers(mc, inv).N; }

/// Momentum from the identity M = (p/2k) N - J T / 2.
inline double momentum_M(const ModelCase& mc, const Invariants& inv) {
  const WaveNumbers wn = wave_numbers(mc, inv);
  return wn.p / (2.0 * wn.k) * wn.N - 0.5 * inv.J * wn.T;
}

inline double momentum_from(const WaveNumbers& wn, double J) { return wn.p / (2.0 * wn.k) * wn.N - 0.5 * J * wn.T; }

/// Analytic derivatives of T and of the phase (Psi, or Phi on the Phi
/// branch; both have the same Jacobian) plus all kernels.
inline Derivatives derivatives(const ModelCase& mc, const Invariants& inv,
                               std::optional<PhaseBranch> force_branch = std::nullopt) {
  detail::require_interior(mc, inv);
  const auto f = make_frame(mc, inv);
  const double y1 = f.roots.y1, y2 = f.roots.y2, y3 = f.roots.y3;
  const double sg = f.sg();
  const double u = std::sqrt(f.base());
  Derivatives d;
  d.branch = force_branch.value_or(detail::choose_branch(f));
  if (d.branch == PhaseBranch::Psi && y3 == 0.0) d.branch = PhaseBranch::Phi;
  if (d.branch == PhaseBranch::Phi && y1 <= 0.0)
    throw Error(ErrorKind::PhaseBranch, "raw phase is singular where y1 = 0");
  DerivCoeffs& k = d.coeffs;

  const std::array<double, 3> ys{y1, y2, y3};
  for (int i = 0; i < 3; ++i) {
    const double dp = cubic_slope(mc, inv, ys[i]);
    k.dy_dE[i] = -4.0 * ys[i] / dp;
    k.dy_dJ[i] = 4.0 * inv.J / dp;
  }

  const bool psi = d.branch == PhaseBranch::Psi;
  const bool phi = y1 > 0.0;
  // 0,1: A1,A2  2,3: B1,B2  4: I_B3  5,6: C-kernels  7: I_N  8,9: PB1,PB2
  auto integrand = [&](double ph) {
    const double c = std::cos(ph), sn = std::sin(ph);
    const double c2 = c * c, s2 = sn * sn;
    const double s = y1 * c2 + y2 * s2;
    const double g = std::abs(y3 - s);
    const double v = std::sqrt(g);
    const double g32 = g * v;
    std::array<double, 10> r{};
    r[0] = (1.0 + c2) / g32;
    r[1] = (1.0 + s2) / g32;
    if (psi) {
      const double uv2 = (u + v) * (u + v);
      const double first = (2.0 * u + v) / (u * u * u * v * uv2);
      const double second = (u + 2.0 * v) / (u * g32 * uv2);
      r[2] = first + second * (1.0 + c2);
      r[3] = first + second * (1.0 + s2);
      r[4] = 1.0 / (u * v * (u + v));
    }
    r[5] = (2.0 * c2 * g + sg * s * (1.0 + c2)) / g32;
    r[6] = (2.0 * s2 * g + sg * s * (1.0 + s2)) / g32;
    r[7] = s / v;
    if (phi && !psi) {
      r[8] = 2.0 * c2 / (s * s * v) - sg * (1.0 + c2) / (s * g32);
      r[9] = 2.0 * s2 / (s * s * v) - sg * (1.0 + s2) / (s * g32);
    }
    return r;
  };
  const auto I = integrate_gl<10>(integrand, 0.0, kPi / 2, detail::default_quad());

  const double T = 2.0 * kSqrt2 * [&] {
    auto t = [&](double ph) { return std::array<double, 1>{1.0 / std::sqrt(f.gap(ph))}; };
    return integrate_gl<1>(t, 0.0, kPi / 2, detail::default_quad())[0];
  }();
  const double kk = kPi / T;
  k.A1 = kSqrt2 * I[0];
  k.A2 = kSqrt2 * I[1];
  k.C1 = kSqrt2 * kk * I[5];
  k.C2 = kSqrt2 * kk * I[6];
  const double N = 2.0 * kSqrt2 * kk * I[7];
  k.C3 = kk / kPi * N;

  Jacobian& jac = d.jac;
  // dT/dy_i = sg A_i
  jac.T_E = sg * (k.A1 * k.dy_dE[0] + k.A2 * k.dy_dE[1]);
  jac.T_J = sg * (k.A1 * k.dy_dJ[0] + k.A2 * k.dy_dJ[1]);
  if (psi) {
    k.B1 = kSqrt2 * I[2];
    k.B2 = kSqrt2 * I[3];
    k.B3 = 2.0 * kSqrt2 * I[4];
    // Psi = -g J B3 and dB3/dy_i = sg B_i, with -g sg = +1 in all cases.
    jac.Psi_E = inv.J * (k.B1 * k.dy_dE[0] + k.B2 * k.dy_dE[1]);
    jac.Psi_J = -mc.gamma() * k.B3 + inv.J * (k.B1 * k.dy_dJ[0] + k.B2 * k.dy_dJ[1]);
  } else {
    k.PB1 = kSqrt2 * I[8];
    k.PB2 = kSqrt2 * I[9];
    k.PB3 = 2.0 * kSqrt2 * detail::phi_integral(f);
    // Phi = J PB3 and dPB3/dy_i = -PB_i.
    jac.Psi_E = -inv.J * (k.PB1 * k.dy_dE[0] + k.PB2 * k.dy_dE[1]);
    jac.Psi_J = k.PB3 - inv.J * (k.PB1 * k.dy_dJ[0] + k.PB2 * k.dy_dJ[1]);
  }
  return d;
}

/// KAM determinant: det [[T_E, Psi_E], [T_J, Psi_J]].
inline double kam_delta(const ModelCase& mc, const Invariants& inv) { return derivatives(mc, inv).jac.det(); }

/// Kernels rescaled by powers of |y3|, written with sigma(phi). The
/// relations B_i = A_i + Bt_i and C_i = A_i - Ct_i hold for these.
struct RescaledKernels {
  double A1, A2, B1, B2, Bt1, Bt2, C1, C2, Ct1, Ct2;
};

inline RescaledKernels rescaled_kernels(const ModelCase& mc, const Invariants& inv) {
  detail::require_interior(mc, inv);
  const auto f = make_frame(mc, inv);
  if (f.roots.y3 == 0.0) throw Error(ErrorKind::PhaseBranch, "sigma is undefined for y3 = 0");
  auto integrand = [&](double ph) {
    const double c = std::cos(ph), sn = std::sin(ph);
    const double c2 = c * c, s2 = sn * sn;
    const double sig = f.sigma(ph);
    const double s3 = sig * sig * sig;
    const double op2 = (1.0 + sig) * (1.0 + sig);
    const double first = (2.0 + sig) / (sig * op2);
    const double second = (1.0 + 2.0 * sig) / (s3 * op2);
    std::array<double, 10> r;
    r[0] = (1.0 + c2) / s3;
    r[1] = (1.0 + s2) / s3;
    r[2] = first + second * (1.0 + c2);
    r[3] = first + second * (1.0 + s2);
    r[4] = (sig + s2) / (sig * op2);
    r[5] = (sig + c2) / (sig * op2);
    r[6] = (2.0 * c2 + (1.0 - sig * sig) * s2) / s3;
    r[7] = (2.0 * s2 + (1.0 - sig * sig) * c2) / s3;
    r[8] = s2 / sig;
    r[9] = c2 / sig;
    return r;
  };
  const auto I = integrate_gl<10>(integrand, 0.0, kPi / 2, detail::default_quad());
  return {I[0], I[1], I[2], I[3], I[4], I[5], I[6], I[7], I[8], I[9]};
}

// ---------------------------------------------------------------------------
// (J,E) <-> (T, Psi)

/// Upper bound of |Psi| at fixed T (defocusing and counter-rotating cases).
inline double psi_hat(const ModelCase& mc, double T) {
  const double r = std::sqrt((T * T + 2.0 * kPi * kPi) / 3.0);
  return mc.regime() == Regime::FocusingCounter ? kPi - r : r - kPi;
}

inline std::array<double, 2> map_to_TPsi(const ModelCase& mc, const Invariants& inv) {
  const WaveNumbers wn = wave_numbers(mc, inv);
  return {wn.T, wn.Psi};
}

namespace detail {

struct SeedPoint {
  double T, Psi;
  Invariants inv;
};

inline std::vector<Invariants> seed_invariants(const ModelCase& mc) {
  std::vector<Invariants> pts;
  constexpr int n = 32;
  for (int i = 0; i < n; ++i) {
    const double a = -1.0 + 2.0 * (i + 0.5) / n;
    for (int j = 0; j < n; ++j) {
      const double t = (j + 0.5) / n;
      Invariants inv;
      switch (mc.regime()) {
        case Regime::Defocusing: {
          inv.J = 0.995 * a * std::sqrt(kJ2MaxDefocusing);
          const double lo = e_minus(mc, inv.J), hi = e_plus(inv.J);
          inv.E = lo + (hi - lo) * (0.002 + 0.996 * t);
          break;
        }
        case Regime::FocusingCounter:
          inv.J = 6.0 * a * std::abs(a);
          inv.E = e_minus(mc, inv.J) + 0.005 * std::pow(1e4, t);
          break;
        case Regime::FocusingCoro:
          inv.J = 3.0 * a * std::abs(a);
          inv.E = e_minus(mc, inv.J) + 0.005 * std::pow(1e4, t);
          break;
      }
      pts.push_back(inv);
    }
  }
  return pts;
}

inline const std::vector<SeedPoint>& seed_grid(const ModelCase& mc) {
  static std::mutex mtx;
  static std::array<std::vector<SeedPoint>, 3> grids;
  std::lock_guard lock(mtx);
  auto& g = grids[static_cast<int>(mc.regime())];
  if (g.empty()) {
    for (const Invariants& inv : seed_invariants(mc)) {
      try {
        const auto tp = map_to_TPsi(mc, inv);
        g.push_back({tp[0], tp[1], inv});
      } catch (const Error&) {
      }
    }
  }
  return g;
}

}  // namespace detail

struct InvertOptions {
  int max_iter = 50;
  double tol = 1e-13;
  std::optional<Invariants> seed;  // replaces the nearest grid seed when set
};

/// Newton inversion of (J,E) -> (T, Psi) seeded from a coarse grid over D.
inline Invariants invert_TPsi(const ModelCase& mc, double T, double Psi, const InvertOptions& opt = {}) {
  if (mc.regime() == Regime::Defocusing && (T <= kPi || std::abs(Psi) >= psi_hat(mc, T)))
    throw Error(ErrorKind::OutsideImage, "(T,Psi) outside T > pi, |Psi| < psi_hat(T)");
  if (mc.regime() == Regime::FocusingCounter && (T <= 0.0 || T >= kPi || std::abs(Psi) >= psi_hat(mc, T)))
    throw Error(ErrorKind::OutsideImage, "(T,Psi) outside 0 < T < pi, |Psi| < psi_hat(T)");

  const auto& seeds = detail::seed_grid(mc);
  const detail::SeedPoint* best = nullptr;
  double best_d = std::numeric_limits<double>::infinity();
  for (const auto& s : seeds) {
    const double d = std::hypot((s.T - T) / T, s.Psi - Psi);
    if (d < best_d) {
      best_d = d;
      best = &s;
    }
  }
  if (!best) throw Error(ErrorKind::NoConvergence, "empty seed grid");

  Invariants x = opt.seed && is_interior(mc, *opt.seed) ? *opt.seed : best->inv;
  // corotating Psi jumps by 2pi across J = 0 with E < 0, so only its class mod 2pi is matched
  const bool wrap = mc.regime() == Regime::FocusingCoro;
  auto residual = [&](const Invariants& p) {
    const auto tp = map_to_TPsi(mc, p);
    const double dpsi = tp[1] - Psi;
    return std::array<double, 2>{tp[0] - T, wrap ? std::remainder(dpsi, 2.0 * kPi) : dpsi};
  };
  auto norm = [&](const std::array<double, 2>& r) { return std::hypot(r[0] / T, r[1]); };
  auto F = residual(x);
  for (int it = 0; it < opt.max_iter; ++it) {
    if (norm(F) < opt.tol) return x;
    const Jacobian jac = derivatives(mc, x).jac;
    // [T_J T_E; Psi_J Psi_E] [dJ; dE] = -F
    const double a = jac.T_J, b = jac.T_E, c = jac.Psi_J, d = jac.Psi_E;
    const double det = a * d - b * c;
    if (det == 0.0 || !std::isfinite(det)) break;
    const double dJ = -(d * F[0] - b * F[1]) / det;
    const double dE = -(-c * F[0] + a * F[1]) / det;
    double lambda = 1.0;
    bool moved = false;
    for (int ls = 0; ls < 40; ++ls, lambda *= 0.5) {
      const Invariants trial{x.J + lambda * dJ, x.E + lambda * dE};
      if (!is_interior(mc, trial)) continue;
      std::array<double, 2> Ft;
      try {
        Ft = residual(trial);
      } catch (const Error&) {
        continue;
      }
      if (norm(Ft) < norm(F) || lambda < 1e-6) {
        x = trial;
        F = Ft;
        moved = true;
        break;
      }
    }
    if (!moved) break;
    if (std::abs(dJ) * lambda < 1e-15 && std::abs(dE) * lambda < 1e-15 * (1.0 + std::abs(x.E))) {
      if (norm(F) < 1e-10) return x;
      break;
    }
  }
  if (norm(F) < 1e-11) return x;
  throw Error(ErrorKind::NoConvergence, "Newton inversion of (T,Psi) did not converge");
}

}  // namespace pwlab
