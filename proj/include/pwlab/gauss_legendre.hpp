#pragma once

#include <algorithm>
#include <array>
#include <cmath>
#include <cstddef>
#include <numbers>

#include "pwlab/error.hpp"

namespace pwlab {

/// Nodes and weights of the n-point Gauss-Legendre rule on [-1, 1].
template <std::size_t N>
struct GaussLegendreRule {
  std::array<double, N> x{};
  std::array<double, N> w{};

  GaussLegendreRule() {
    for (std::size_t i = 0; i < (N + 1) / 2; ++i) {
      double z = std::cos(std::numbers::pi * (i + 0.75) / (N + 0.5));
      double dp = 0.0;
      for (int it = 0; it < 100; ++it) {
        double p0 = 1.0, p1 = 0.0;
        for (std::size_t j = 1; j <= N; ++j) {
          const double p2 = p1;
          p1 = p0;
          p0 = ((2.0 * j - 1.0) * z * p1 - (j - 1.0) * p2) / j;
        }
        dp = N * (z * p0 - p1) / (z * z - 1.0);
        const double dz = p0 / dp;
        z -= dz;
        if (std::abs(dz) < 1e-16) break;
      }
      x[i] = -z;
      x[N - 1 - i] = z;
      w[i] = w[N - 1 - i] = 2.0 / ((1.0 - z * z) * dp * dp);
    }
  }

  static const GaussLegendreRule& instance() {
    static const GaussLegendreRule rule;
    return rule;
  }
};

struct QuadratureOptions {
  double abs_tol = 1e-11;
  double rel_tol = 1e-11;
  int max_depth = 40;  // must stay below the refinement stack size
  int max_panels = 20000;
};

namespace detail {

template <std::size_t M, class F>
std::array<double, M> gl_panel(const F& f, double a, double b) {
  const auto& rule = GaussLegendreRule<16>::instance();
  const double half = 0.5 * (b - a), mid = 0.5 * (a + b);
  std::array<double, M> acc{};
  for (std::size_t i = 0; i < 16; ++i) {
    const std::array<double, M> v = f(mid + half * rule.x[i]);
    for (std::size_t k = 0; k < M; ++k) acc[k] += rule.w[i] * v[k];
  }
  for (double& v : acc) v *= half;
  return acc;
}

template <std::size_t M>
double inf_norm(const std::array<double, M>& v) {
  double m = 0.0;
  for (double x : v) m = std::max(m, std::abs(x));
  return m;
}

}  // namespace detail

/// Adaptive 16-point Gauss-Legendre quadrature of M integrands sharing one
/// panel refinement. A panel is accepted when it agrees with its two halves
/// to abs_tol + rel_tol * |whole-interval estimate| (componentwise max norm).
template <std::size_t M, class F>
std::array<double, M> integrate_gl(const F& f, double a, double b, const QuadratureOptions& opt = {}) {
  struct Panel {
    double a, b;
    std::array<double, M> value;
    int depth;
  };
  const auto whole = detail::gl_panel<M>(f, a, b);
  std::array<double, M> scale{};
  for (std::size_t k = 0; k < M; ++k) scale[k] = std::abs(whole[k]);

  std::array<double, M> total{};
  // Depth-first refinement; the stack never holds more than max_depth + 2 panels.
  std::array<Panel, 64> stack;
  std::size_t top = 0;
  stack[top++] = {a, b, whole, 0};
  int panels = 0;
  while (top > 0) {
    const Panel p = stack[--top];
    const double m = 0.5 * (p.a + p.b);
    const auto left = detail::gl_panel<M>(f, p.a, m);
    const auto right = detail::gl_panel<M>(f, m, p.b);
    bool ok = true;
    for (std::size_t k = 0; k < M; ++k) {
      const double err = std::abs(left[k] + right[k] - p.value[k]);
      const double tol = std::max(opt.abs_tol, opt.rel_tol * scale[k]) * (p.b - p.a) / (b - a);
      if (!(err <= std::max(tol, 1e-15 * std::abs(p.value[k])))) ok = false;
    }
    if (!ok && (p.depth >= opt.max_depth || ++panels > opt.max_panels))
      throw Error(ErrorKind::BoundaryDegeneracy, "quadrature did not converge (integrand too singular)");
    if (ok) {
      for (std::size_t k = 0; k < M; ++k) total[k] += left[k] + right[k];
      continue;
    }
    stack[top++] = {m, p.b, right, p.depth + 1};
    stack[top++] = {p.a, m, left, p.depth + 1};
  }
  return total;
}

}  // namespace pwlab
