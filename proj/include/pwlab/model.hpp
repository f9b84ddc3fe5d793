#pragma once

// Model cases of the cubic NLS profile equation W'' + w W + g |W|^2 W = 0,
// their effective potentials, existence domains and the cubic whose roots
// are the squared turning radii of |W|.

#include <algorithm>
#include <array>
#include <cmath>
#include <complex>
#include <numbers>
#include <optional>
#include <string>
#include <string_view>

#include "pwlab/error.hpp"

namespace pwlab {

enum class Regime { Defocusing, FocusingCounter, FocusingCoro };

/// Sign pair (gamma, omega). Only the three generic combinations are valid.
class ModelCase {
 public:
  static ModelCase defocusing() { return ModelCase(-1, 1); }
  static ModelCase focusing_counter() { return ModelCase(1, 1); }
  static ModelCase focusing_coro() { return ModelCase(1, -1); }

  static ModelCase from_signs(int gamma, int omega) {
    if ((gamma != 1 && gamma != -1) || (omega != 1 && omega != -1))
      throw Error(ErrorKind::InvalidCase, "gamma and omega must be +1 or -1");
    if (gamma == -1 && omega == -1)
      throw Error(ErrorKind::InvalidCase, "defocusing with omega=-1 has no nontrivial bounded solutions");
    return ModelCase(gamma, omega);
  }

  static ModelCase from_name(std::string_view name) {
    if (name == "defocusing") return defocusing();
    if (name == "focusing-counter") return focusing_counter();
    if (name == "focusing-coro") return focusing_coro();
    throw Error(ErrorKind::InvalidCase, "unknown case '" + std::string(name) + "'");
  }

  int gamma() const noexcept { return gamma_; }
  int omega() const noexcept { return omega_; }
  bool focusing() const noexcept { return gamma_ == 1; }

  Regime regime() const noexcept {
    if (gamma_ == -1) return Regime::Defocusing;
    return omega_ == 1 ? Regime::FocusingCounter : Regime::FocusingCoro;
  }

  std::string_view name() const noexcept {
    switch (regime()) {
      case Regime::Defocusing: return "defocusing";
      case Regime::FocusingCounter: return "focusing-counter";
      case Regime::FocusingCoro: return "focusing-coro";
    }
    return "";
  }

  /// Coefficient of Q in the reduced evolution equation: w - p^2.
  double mu(double p) const noexcept { return omega_ - p * p; }

  /// +1 when the integrand gap is y3 - s (defocusing), -1 when it is s - y3.
  int gap_sign() const noexcept { return focusing() ? -1 : 1; }

  /// Sum of the three roots of the case cubic.
  double root_sum() const noexcept { return -2.0 * omega_ / gamma_; }

  friend bool operator==(const ModelCase&, const ModelCase&) = default;

 private:
  ModelCase(int g, int w) : gamma_(g), omega_(w) {}
  int gamma_;
  int omega_;
};

struct Invariants {
  double J = 0.0;
  double E = 0.0;
};

/// Roots of P(y) = -g y^3 - 2w y^2 + 4E y - 2J^2 in the case convention:
/// defocusing 0 <= y1 < y2 < y3, focusing y3 <= 0 <= y1 < y2.
struct CubicRoots {
  double y1 = 0.0;
  double y2 = 0.0;
  double y3 = 0.0;
};

struct PotentialFrame {
  double q = 0.0;
  std::optional<double> Q;  // defocusing only
  double r_q = 0.0;
  std::optional<double> r_Q;
  std::optional<std::array<double, 3>> radii;  // sqrt(y_i); NaN where y_i < 0
};

enum class Region { Interior, Boundary, Outside };
enum class BoundaryKind { None, PlaneWave, Homoclinic, Soliton };

struct DomainClass {
  Region region = Region::Outside;
  BoundaryKind kind = BoundaryKind::None;
};

inline constexpr double kBoundaryMargin = 1e-9;
inline constexpr double kRootGapMin = 1e-10;
inline const double kJ2MaxDefocusing = 4.0 / 27.0;

inline double cubic_value(const ModelCase& mc, const Invariants& inv, double y) {
  return ((-mc.gamma() * y - 2.0 * mc.omega()) * y + 4.0 * inv.E) * y - 2.0 * inv.J * inv.J;
}

inline double cubic_slope(const ModelCase& mc, const Invariants& inv, double y) {
  return (-3.0 * mc.gamma() * y - 4.0 * mc.omega()) * y + 4.0 * inv.E;
}

/// Effective radial potential V_J(r).
inline double effective_potential(const ModelCase& mc, double J, double r) {
  const double r2 = r * r;
  return J * J / (2.0 * r2) + 0.5 * mc.omega() * r2 + 0.25 * mc.gamma() * r2 * r2;
}

namespace detail {

// Root of a strictly monotone f on [lo, hi] with f(lo) <= target <= f(hi)
// (or reversed): bisection to a coarse bracket, then Newton.
template <class F, class DF>
double solve_monotone(F f, DF df, double lo, double hi, double target) {
  double flo = f(lo) - target;
  for (int i = 0; i < 60 && hi - lo > 1e-7 * (1.0 + std::abs(lo)); ++i) {
    const double mid = 0.5 * (lo + hi);
    const double fm = f(mid) - target;
    if ((fm < 0) == (flo < 0)) {
      lo = mid;
      flo = fm;
    } else {
      hi = mid;
    }
  }
  double x = 0.5 * (lo + hi);
  for (int i = 0; i < 8; ++i) {
    const double d = df(x);
    if (d == 0.0) break;
    const double step = (f(x) - target) / d;
    const double xn = x - step;
    if (xn < lo - 1e-6 || xn > hi + 1e-6) break;
    x = xn;
    if (std::abs(step) <= 1e-16 * (1.0 + std::abs(x))) break;
  }
  return x;
}

inline std::array<double, 3> sorted_real_roots(const ModelCase& mc, const Invariants& inv) {
  // Monic form y^3 + a y^2 + b y + c.
  const double g = mc.gamma();
  const double a = 2.0 * mc.omega() / g;
  const double b = -4.0 * inv.E / g;
  const double c = 2.0 * inv.J * inv.J / g;
  std::array<double, 3> r{};
  if (inv.J == 0.0) {
    // y (y^2 + a y + b)
    const double disc = a * a - 4.0 * b;
    if (disc < 0.0) throw Error(ErrorKind::DegenerateRoots, "cubic has complex roots");
    const double sq = std::sqrt(disc);
    const double t = -0.5 * (a + std::copysign(sq, a));
    double u = t;
    double v = (t != 0.0) ? b / t : 0.0;
    r = {0.0, u, v};
  } else {
    const double p = b - a * a / 3.0;
    const double q = 2.0 * a * a * a / 27.0 - a * b / 3.0 + c;
    if (p >= 0.0) throw Error(ErrorKind::DegenerateRoots, "cubic has a single real root");
    const double m = 2.0 * std::sqrt(-p / 3.0);
    double arg = 3.0 * q / (p * m);
    if (arg > 1.0 + 1e-12 || arg < -1.0 - 1e-12)
      throw Error(ErrorKind::DegenerateRoots, "cubic has a single real root");
    arg = std::clamp(arg, -1.0, 1.0);
    const double theta = std::acos(arg) / 3.0;
    for (int k = 0; k < 3; ++k)
      r[k] = m * std::cos(theta - 2.0 * std::numbers::pi * k / 3.0) - a / 3.0;
  }
  std::sort(r.begin(), r.end());
  return r;
}

}  // namespace detail

/// Roots of the case cubic: closed-form trigonometric solution, the root
/// closest to zero recomputed from the product rule, then one Newton polish.
inline CubicRoots cubic_roots(const ModelCase& mc, const Invariants& inv) {
  auto r = detail::sorted_real_roots(mc, inv);
  // |y1 y2 y3| = 2 J^2; the smallest-magnitude root loses relative accuracy
  // in the trigonometric formula, the product rule restores it.
  if (inv.J != 0.0) {
    int small = 0;
    for (int i = 1; i < 3; ++i)
      if (std::abs(r[i]) < std::abs(r[small])) small = i;
    const double prod = -2.0 * inv.J * inv.J / mc.gamma();
    const double other = r[(small + 1) % 3] * r[(small + 2) % 3];
    if (other != 0.0) r[small] = prod / other;
  }
  for (double& y : r) {
    const double d = cubic_slope(mc, inv, y);
    if (d != 0.0) {
      const double yn = y - cubic_value(mc, inv, y) / d;
      if (std::abs(cubic_value(mc, inv, yn)) < std::abs(cubic_value(mc, inv, y))) y = yn;
    }
  }
  std::sort(r.begin(), r.end());
  CubicRoots out;
  if (mc.focusing()) {
    out = {r[1], r[2], r[0]};
  } else {
    out = {r[0], r[1], r[2]};
  }
  // On J = 0 the exact zero root keeps its place in the ordering.
  if (inv.J == 0.0) {
    if (mc.focusing() && out.y3 > 0.0) out.y3 = 0.0;
    if (out.y1 < 0.0 && out.y1 > -1e-300) out.y1 = 0.0;
  }
  const double motion_gap = out.y2 - out.y1;
  const double edge_gap = mc.focusing() ? out.y1 - out.y3 : out.y3 - out.y2;
  if (motion_gap < kRootGapMin || edge_gap < kRootGapMin)
    throw Error(ErrorKind::DegenerateRoots, "root gap below 1e-10 (boundary of D)");
  return out;
}

/// Parameters q (and Q for the defocusing case) of J together with the
/// critical radii of V_J.
inline PotentialFrame parametrize_J(const ModelCase& mc, double J) {
  PotentialFrame f;
  const double aj = std::abs(J);
  const double sgn = J < 0 ? -1.0 : 1.0;
  switch (mc.regime()) {
    case Regime::Defocusing: {
      // one ulp of slack so that J = 2/(3 sqrt 3) itself is accepted
      if (J * J > kJ2MaxDefocusing * (1.0 + 4e-16))
        throw Error(ErrorKind::OutOfRange, "defocusing requires J^2 <= 4/27");
      const double s3 = 1.0 / std::sqrt(3.0);
      auto g = [](double x) { return x * (1.0 - x * x); };
      auto dg = [](double x) { return 1.0 - 3.0 * x * x; };
      double q, Q;
      if (J * J >= kJ2MaxDefocusing * (1.0 - 1e-15)) {
        q = Q = s3;
      } else {
        q = aj == 0.0 ? 0.0 : detail::solve_monotone(g, dg, 0.0, s3, aj);
        Q = aj == 0.0 ? 1.0 : detail::solve_monotone(g, dg, s3, 1.0, aj);
      }
      f.q = sgn * q;
      f.Q = sgn * Q;
      f.r_q = std::sqrt(std::max(0.0, 1.0 - q * q));
      f.r_Q = std::sqrt(std::max(0.0, 1.0 - Q * Q));
      break;
    }
    case Regime::FocusingCounter: {
      auto g = [](double x) { return x * (x * x - 1.0); };
      auto dg = [](double x) { return 3.0 * x * x - 1.0; };
      const double hi = 1.0 + std::cbrt(aj) + 1.0;
      const double q = aj == 0.0 ? 1.0 : detail::solve_monotone(g, dg, 1.0, hi, aj);
      f.q = sgn * q;
      f.r_q = std::sqrt(q * q - 1.0);
      break;
    }
    case Regime::FocusingCoro: {
      auto g = [](double x) { return x * (1.0 + x * x); };
      auto dg = [](double x) { return 1.0 + 3.0 * x * x; };
      const double q = aj == 0.0 ? 0.0 : detail::solve_monotone(g, dg, 0.0, std::cbrt(aj) + 1.0, aj);
      f.q = sgn * q;
      f.r_q = std::sqrt(1.0 + q * q);
      break;
    }
  }
  return f;
}

/// Lower edge of the existence domain, the minimum of V_J.
inline double e_minus(const ModelCase& mc, double J) {
  const PotentialFrame f = parametrize_J(mc, J);
  switch (mc.regime()) {
    case Regime::Defocusing: {
      const double Q2 = (*f.Q) * (*f.Q);
      return 0.25 * (1.0 - Q2) * (1.0 + 3.0 * Q2);
    }
    case Regime::FocusingCounter: {
      const double q2 = f.q * f.q;
      return 0.25 * (q2 - 1.0) * (3.0 * q2 + 1.0);
    }
    case Regime::FocusingCoro: {
      const double q2 = f.q * f.q;
      return 0.25 * (q2 + 1.0) * (3.0 * q2 - 1.0);
    }
  }
  return 0.0;
}

/// Upper edge of the defocusing domain, the local maximum of V_J.
inline double e_plus(double J) {
  const PotentialFrame f = parametrize_J(ModelCase::defocusing(), J);
  const double q2 = f.q * f.q;
  return 0.25 * (1.0 - q2) * (1.0 + 3.0 * q2);
}

inline DomainClass domain_contains(const ModelCase& mc, const Invariants& inv) {
  const double J = inv.J, E = inv.E;
  if (!std::isfinite(J) || !std::isfinite(E)) return {};
  switch (mc.regime()) {
    case Regime::Defocusing: {
      if (J * J > kJ2MaxDefocusing) return {Region::Outside, BoundaryKind::None};
      const double lo = e_minus(mc, J), hi = e_plus(J);
      if (E < lo - kBoundaryMargin || E > hi + kBoundaryMargin) return {Region::Outside, BoundaryKind::None};
      if (E - lo <= kBoundaryMargin) return {Region::Boundary, BoundaryKind::PlaneWave};
      if (hi - E <= kBoundaryMargin) return {Region::Boundary, BoundaryKind::Homoclinic};
      if (kJ2MaxDefocusing - J * J <= kBoundaryMargin) return {Region::Boundary, BoundaryKind::PlaneWave};
      return {Region::Interior, BoundaryKind::None};
    }
    case Regime::FocusingCounter: {
      const double lo = e_minus(mc, J);
      if (E < lo - kBoundaryMargin) return {Region::Outside, BoundaryKind::None};
      if (E - lo <= kBoundaryMargin) return {Region::Boundary, BoundaryKind::PlaneWave};
      return {Region::Interior, BoundaryKind::None};
    }
    case Regime::FocusingCoro: {
      if (std::abs(J) <= kBoundaryMargin && std::abs(E) <= kBoundaryMargin)
        return {Region::Outside, BoundaryKind::Soliton};
      const double lo = e_minus(mc, J);
      if (E < lo - kBoundaryMargin) return {Region::Outside, BoundaryKind::None};
      if (E - lo <= kBoundaryMargin) return {Region::Boundary, BoundaryKind::PlaneWave};
      return {Region::Interior, BoundaryKind::None};
    }
  }
  return {};
}

inline bool is_interior(const ModelCase& mc, const Invariants& inv) {
  return domain_contains(mc, inv).region == Region::Interior;
}

/// Parameters plus turning radii sqrt(y_i) at an interior point.
inline PotentialFrame potential_frame(const ModelCase& mc, const Invariants& inv) {
  PotentialFrame f = parametrize_J(mc, inv.J);
  const CubicRoots r = cubic_roots(mc, inv);
  auto rt = [](double y) { return y >= 0.0 ? std::sqrt(y) : std::nan(""); };
  f.radii = std::array<double, 3>{rt(r.y1), rt(r.y2), rt(r.y3)};
  return f;
}

/// Defocusing solution homoclinic to the plane waves of wavenumber q, q^2 < 1/3.
inline std::complex<double> homoclinic_reference(double q, double x) {
  if (q * q >= 1.0 / 3.0) throw Error(ErrorKind::OutOfRange, "homoclinic orbit needs q^2 < 1/3");
  const double c = std::sqrt((1.0 - 3.0 * q * q) / 2.0);
  const double th = std::tanh(c * x);
  if (q == 0.0) return {std::tanh(x / std::sqrt(2.0)), 0.0};
  const double mod = std::sqrt(2.0 * (q * q + c * c * th * th));
  const double phase = q * x + std::atan((c / q) * th);
  return std::polar(mod, phase);
}

}  // namespace pwlab
