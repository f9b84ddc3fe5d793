#pragma once

// Independent oracles and samplers shared by the test programs.

#include <cmath>
#include <random>
#include <vector>

#include "pwlab.hpp"

namespace oracle {

/// Complete elliptic integral of the first kind, parameter m < 1, by the
/// arithmetic-geometric mean: K(m) = pi / (2 AGM(1, sqrt(1 - m))).
inline double ellipk_agm(double m) {
  double a = 1.0, b = std::sqrt(1.0 - m);
  for (int i = 0; i < 60 && std::abs(a - b) > 1e-16 * a; ++i) {
    const double an = 0.5 * (a + b);
    b = std::sqrt(a * b);
    a = an;
  }
  return std::numbers::pi / (a + b);
}

inline double rel(double a, double b) { return std::abs(a - b) / std::max(std::abs(b), 1e-300); }

/// Central difference of f at x with step h.
template <class F>
double central(const F& f, double x, double h) {
  return (f(x + h) - f(x - h)) / (2.0 * h);
}

/// Uniform interior samples with a relative margin from the edges of D.
/// Focusing energies span [E_-(J), E_-(J) + e_span].
inline std::vector<pwlab::Invariants> interior_samples(const pwlab::ModelCase& mc, int count, std::uint64_t seed,
                                                       double margin = 0.02, double j_max = 3.0,
                                                       double e_span = 6.0) {
  std::mt19937_64 rng(seed);
  std::uniform_real_distribution<double> u(0.0, 1.0);
  std::vector<pwlab::Invariants> out;
  while (static_cast<int>(out.size()) < count) {
    pwlab::Invariants inv;
    if (mc.regime() == pwlab::Regime::Defocusing) {
      const double jm = std::sqrt(4.0 / 27.0);
      inv.J = (2.0 * u(rng) - 1.0) * jm * (1.0 - margin);
      const double lo = pwlab::e_minus(mc, inv.J), hi = pwlab::e_plus(inv.J);
      inv.E = lo + (hi - lo) * (margin + (1.0 - 2.0 * margin) * u(rng));
    } else {
      inv.J = (2.0 * u(rng) - 1.0) * j_max;
      const double lo = pwlab::e_minus(mc, inv.J);
      inv.E = lo + e_span * (margin + (1.0 - margin) * u(rng));
    }
    if (mc.regime() == pwlab::Regime::FocusingCoro && std::hypot(inv.J, inv.E) < 0.05) continue;
    if (pwlab::is_interior(mc, inv)) out.push_back(inv);
  }
  return out;
}

inline const std::vector<pwlab::ModelCase>& all_cases() {
  static const std::vector<pwlab::ModelCase> c = {pwlab::ModelCase::defocusing(), pwlab::ModelCase::focusing_counter(),
                                                  pwlab::ModelCase::focusing_coro()};
  return c;
}

}  // namespace oracle
