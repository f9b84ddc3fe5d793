#pragma once

// Dormand-Prince 5(4) with FSAL and standard step-size control. Steps are
// clipped so that every requested output time is hit exactly.

#include <algorithm>
#include <array>
#include <cmath>
#include <cstddef>
#include <vector>

#include "pwlab/error.hpp"

namespace pwlab {

struct OdeOptions {
  double abs_tol = 1e-12;
  double rel_tol = 1e-12;
  double h_init = 1e-3;
  long max_steps = 2000000;
};

struct OdeStats {
  long accepted = 0;
  long rejected = 0;
};

template <std::size_t D>
using OdeState = std::array<double, D>;

/// Integrates y' = f(t, y) from t_out.front() and returns y at every t_out
/// (which must be nondecreasing). y at t_out.front() is y0.
template <std::size_t D, class F>
std::vector<OdeState<D>> dopri5(const F& f, const OdeState<D>& y0, const std::vector<double>& t_out,
                                const OdeOptions& opt = {}, OdeStats* stats = nullptr) {
  using S = OdeState<D>;
  static constexpr double c2 = 1.0 / 5, c3 = 3.0 / 10, c4 = 4.0 / 5, c5 = 8.0 / 9;
  static constexpr double a21 = 1.0 / 5;
  static constexpr double a31 = 3.0 / 40, a32 = 9.0 / 40;
  static constexpr double a41 = 44.0 / 45, a42 = -56.0 / 15, a43 = 32.0 / 9;
  static constexpr double a51 = 19372.0 / 6561, a52 = -25360.0 / 2187, a53 = 64448.0 / 6561, a54 = -212.0 / 729;
  static constexpr double a61 = 9017.0 / 3168, a62 = -355.0 / 33, a63 = 46732.0 / 5247, a64 = 49.0 / 176,
                          a65 = -5103.0 / 18656;
  static constexpr double b1 = 35.0 / 384, b3 = 500.0 / 1113, b4 = 125.0 / 192, b5 = -2187.0 / 6784,
                          b6 = 11.0 / 84;
  static constexpr double e1 = 71.0 / 57600, e3 = -71.0 / 16695, e4 = 71.0 / 1920, e5 = -17253.0 / 339200,
                          e6 = 22.0 / 525, e7 = -1.0 / 40;

  std::vector<S> out;
  out.reserve(t_out.size());
  if (t_out.empty()) return out;
  double t = t_out.front();
  S y = y0;
  out.push_back(y);
  S k1 = f(t, y), k2, k3, k4, k5, k6, k7, tmp, ynew;
  double h = opt.h_init;
  long steps = 0;
  OdeStats st;

  for (std::size_t idx = 1; idx < t_out.size(); ++idx) {
    const double target = t_out[idx];
    while (t < target) {
      if (++steps > opt.max_steps) throw Error(ErrorKind::ToleranceNotMet, "ODE step budget exhausted");
      bool last = false;
      if (t + h >= target) {
        h = target - t;
        last = true;
      }
      for (std::size_t i = 0; i < D; ++i) tmp[i] = y[i] + h * a21 * k1[i];
      k2 = f(t + c2 * h, tmp);
      for (std::size_t i = 0; i < D; ++i) tmp[i] = y[i] + h * (a31 * k1[i] + a32 * k2[i]);
      k3 = f(t + c3 * h, tmp);
      for (std::size_t i = 0; i < D; ++i) tmp[i] = y[i] + h * (a41 * k1[i] + a42 * k2[i] + a43 * k3[i]);
      k4 = f(t + c4 * h, tmp);
      for (std::size_t i = 0; i < D; ++i)
        tmp[i] = y[i] + h * (a51 * k1[i] + a52 * k2[i] + a53 * k3[i] + a54 * k4[i]);
      k5 = f(t + c5 * h, tmp);
      for (std::size_t i = 0; i < D; ++i)
        tmp[i] = y[i] + h * (a61 * k1[i] + a62 * k2[i] + a63 * k3[i] + a64 * k4[i] + a65 * k5[i]);
      k6 = f(t + h, tmp);
      for (std::size_t i = 0; i < D; ++i)
        ynew[i] = y[i] + h * (b1 * k1[i] + b3 * k3[i] + b4 * k4[i] + b5 * k5[i] + b6 * k6[i]);
      k7 = f(t + h, ynew);

      double err = 0.0;
      for (std::size_t i = 0; i < D; ++i) {
        const double ei = h * (e1 * k1[i] + e3 * k3[i] + e4 * k4[i] + e5 * k5[i] + e6 * k6[i] + e7 * k7[i]);
        const double sc = opt.abs_tol + opt.rel_tol * std::max(std::abs(y[i]), std::abs(ynew[i]));
        err += (ei / sc) * (ei / sc);
      }
      err = std::sqrt(err / D);
      if (!std::isfinite(err)) throw Error(ErrorKind::ToleranceNotMet, "non-finite ODE error estimate");

      const double fac = std::clamp(0.9 * std::pow(std::max(err, 1e-10), -0.2), 0.2, 5.0);
      if (err <= 1.0) {
        t = last ? target : t + h;
        y = ynew;
        k1 = k7;
        ++st.accepted;
        // a step shortened to land on target says nothing about the natural step
        if (!last) h *= fac;
        else h = std::max(h, opt.h_init * 1e-3) * fac;
      } else {
        ++st.rejected;
        h *= std::max(fac, 0.2);
        if (h < 1e-14 * std::max(1.0, std::abs(t)))
          throw Error(ErrorKind::ToleranceNotMet, "ODE step size underflow");
      }
    }
    out.push_back(y);
  }
  if (stats) *stats = st;
  return out;
}

}  // namespace pwlab
