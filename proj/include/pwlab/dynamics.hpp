#pragma once

// Strang split-step evolution of the reduced NLS equation
//   i Q_t + 4ipk Q_z + 4k^2 Q_zz + mu Q + g |Q|^2 Q = 0
// and of the reduced Ginzburg-Landau flow (defocusing case), together with
// the orbital semi-distance rho modulo phase rotation and translation.

#include <algorithm>
#include <cmath>
#include <limits>
#include <optional>
#include <random>
#include <vector>

#include <Eigen/Dense>

#include "pwlab/error.hpp"
#include "pwlab/fourier.hpp"
#include "pwlab/profile.hpp"
#include "pwlab/spectral.hpp"

namespace pwlab {

/// (R u)(z) = e^{-i phi} u(z + xi).
struct SymmetryAction {
  double phi = 0.0;
  double xi = 0.0;
};

inline CVec apply_symmetry(const CVec& u, const SymmetryAction& g) {
  const int N = static_cast<int>(u.size());
  const Fourier fr(N);
  CVec c = fr.forward(u);
  const Complex rot = std::polar(1.0, -g.phi);
  for (int j = 0; j < N; ++j) c[j] *= rot * std::polar(1.0, mode_of(j, N) * g.xi);
  return fr.inverse(c);
}

/// Discrete H^1 norm with multiplier (1 + m^2); equals the continuum norm
/// on [0, 2pi] for band-limited data.
inline double h1_norm(const CVec& u) {
  const int N = static_cast<int>(u.size());
  const CVec c = Fourier(N).forward(u);
  double s = 0.0;
  for (int j = 0; j < N; ++j) {
    const double m = mode_of(j, N);
    s += (1.0 + m * m) * std::norm(c[j]);
  }
  return std::sqrt(2.0 * kPi * s);
}

struct OrbitalDistance {
  double rho = 0.0;
  SymmetryAction best;
};

/// rho(u, v) = inf over (phi, xi) of |u - R_{(phi,xi)} v|_{H^1}.
inline OrbitalDistance orbital_distance(const CVec& u, const CVec& v) {
  const int N = static_cast<int>(u.size());
  if (static_cast<int>(v.size()) != N) throw Error(ErrorKind::InvalidArgument, "orbital_distance: grid mismatch");
  const Fourier fr(N);
  const CVec a = fr.forward(u), b = fr.forward(v);
  std::vector<double> w(N);
  CVec prod(N);
  for (int j = 0; j < N; ++j) {
    const double m = mode_of(j, N);
    w[j] = 1.0 + m * m;
    prod[j] = w[j] * std::conj(a[j]) * b[j];
  }
  // C(xi) = sum_m w_m conj(a_m) b_m e^{i m xi}; on the grid this is one inverse FFT
  const CVec corr = fr.inverse(prod);
  int best = 0;
  for (int s = 1; s < N; ++s)
    if (std::abs(corr[s]) > std::abs(corr[best])) best = s;
  auto C = [&](double xi) {
    Complex s = 0.0;
    for (int j = 0; j < N; ++j) s += prod[j] * std::polar(1.0, mode_of(j, N) * xi);
    return s;
  };
  const double h = 2.0 * kPi / N;
  double lo = (best - 1) * h, hi = (best + 1) * h;
  const double gr = 0.5 * (std::sqrt(5.0) - 1.0);
  double x1 = hi - gr * (hi - lo), x2 = lo + gr * (hi - lo);
  double f1 = std::abs(C(x1)), f2 = std::abs(C(x2));
  for (int it = 0; it < 80 && hi - lo > 1e-15; ++it) {
    if (f1 < f2) {
      lo = x1;
      x1 = x2;
      f1 = f2;
      x2 = lo + gr * (hi - lo);
      f2 = std::abs(C(x2));
    } else {
      hi = x2;
      x2 = x1;
      f2 = f1;
      x1 = hi - gr * (hi - lo);
      f1 = std::abs(C(x1));
    }
  }
  double xi = 0.5 * (lo + hi);
  if (std::abs(C(xi)) < std::abs(corr[best])) xi = best * h;
  // |C| is flat at its maximum, so golden section leaves xi accurate to ~sqrt(eps);
  // Newton on d|C|^2/dxi = 2 Re(conj(C) C') restores full precision
  for (int it = 0; it < 8; ++it) {
    Complex c0 = 0.0, c1 = 0.0, c2 = 0.0;
    for (int j = 0; j < N; ++j) {
      const double m = mode_of(j, N);
      const Complex t = prod[j] * std::polar(1.0, m * xi);
      c0 += t;
      c1 += Complex(0.0, m) * t;
      c2 -= m * m * t;
    }
    const double g1 = (std::conj(c0) * c1).real();
    const double g2 = std::norm(c1) + (std::conj(c0) * c2).real();
    if (!(g2 < 0.0)) break;
    const double step = -g1 / g2;
    if (!(std::abs(step) < h)) break;
    xi += step;
    if (std::abs(step) < 1e-16) break;
  }
  const double phi = std::arg(C(xi));
  // direct evaluation of the distance avoids cancellation in |u|^2 + |v|^2 - 2|C|
  double s = 0.0;
  const Complex rot = std::polar(1.0, -phi);
  for (int j = 0; j < N; ++j) s += w[j] * std::norm(a[j] - rot * b[j] * std::polar(1.0, mode_of(j, N) * xi));
  OrbitalDistance out;
  out.rho = std::sqrt(2.0 * kPi * s);
  const double two_pi = 2.0 * kPi;
  out.best.phi = std::fmod(std::fmod(phi, two_pi) + two_pi, two_pi);
  out.best.xi = std::fmod(std::fmod(xi, two_pi) + two_pi, two_pi);
  return out;
}

inline OrbitalDistance orbital_distance(const CVec& u, const WaveProfile& prof) { return orbital_distance(u, prof.Q); }

// ---------------------------------------------------------------------------

struct EvolveOptions {
  double dt = 1e-3;
  double t_end = 10.0;
  int record_every = 100;
  std::optional<CVec> reference;  // rho is recorded against this state
  double blowup_threshold = 1e6;
};

struct EvolutionTrace {
  std::vector<double> times;
  std::vector<double> rho;  // empty without a reference
  std::vector<double> driftN, driftM, driftE;
  std::vector<double> deviation;  // |Q(t) - reference|_{H^1}, empty without a reference
  CVec finalState;
  bool blow_up = false;
  double blow_up_time = NAN;
};

namespace detail {

/// lambda_m = 4k^2 m^2 + 4pkm - mu, the symbol of the linear part of H.
inline std::vector<double> linear_symbol(const ModelCase& mc, double k, double p, int N) {
  std::vector<double> lam(N);
  const double mu = mc.mu(p);
  for (int j = 0; j < N; ++j) {
    const double m = mode_of(j, N);
    lam[j] = 4.0 * k * k * m * m + 4.0 * p * k * m - mu;
  }
  return lam;
}

enum class Flow { Nls, GinzburgLandau };

inline EvolutionTrace evolve(Flow flow, const ModelCase& mc, const CVec& Q0, double k, double p,
                             const EvolveOptions& opt) {
  const int N = static_cast<int>(Q0.size());
  if (N < 4 || (N & (N - 1)) != 0) throw Error(ErrorKind::InvalidArgument, "grid size must be a power of two");
  if (!(opt.dt > 0.0) || opt.dt > 1e-2) throw Error(ErrorKind::InvalidArgument, "dt must lie in (0, 1e-2]");
  if (opt.record_every < 1) throw Error(ErrorKind::InvalidArgument, "record_every must be >= 1");
  const Fourier fr(N);
  const auto lam = linear_symbol(mc, k, p, N);
  const double dt = opt.dt;
  const long nsteps = std::max(1L, std::lround(opt.t_end / dt));
  auto make_prop = [&](double h) {
    CVec e(N);
    for (int j = 0; j < N; ++j)
      e[j] = flow == Flow::Nls ? std::polar(1.0, -lam[j] * h) : Complex(std::exp(-lam[j] * h), 0.0);
    return e;
  };
  const CVec half = make_prop(0.5 * dt), full = make_prop(dt);
  const double g = mc.gamma();

  CVec Q = Q0;
  auto linear = [&](const CVec& prop) {
    CVec c = fr.forward(Q);
    for (int j = 0; j < N; ++j) c[j] *= prop[j];
    Q = fr.inverse(c);
  };
  auto nonlinear = [&] {
    if (flow == Flow::Nls) {
      for (auto& q : Q) q *= std::polar(1.0, g * std::norm(q) * dt);
    } else {
      // r' = -r^3 with the phase frozen
      for (auto& q : Q) q /= std::sqrt(1.0 + 2.0 * std::norm(q) * dt);
    }
  };

  EvolutionTrace tr;
  const Functionals f0 = functionals(mc, k, Q0);
  auto record = [&](double t) {
    const Functionals f = functionals(mc, k, Q);
    tr.times.push_back(t);
    tr.driftN.push_back(std::abs(f.N - f0.N));
    tr.driftM.push_back(std::abs(f.M - f0.M));
    tr.driftE.push_back(std::abs(f.E - f0.E));
    if (opt.reference) {
      tr.rho.push_back(orbital_distance(Q, *opt.reference).rho);
      CVec d(N);
      for (int j = 0; j < N; ++j) d[j] = Q[j] - (*opt.reference)[j];
      tr.deviation.push_back(h1_norm(d));
    }
  };
  record(0.0);
  bool lead_half = true;
  for (long step = 1; step <= nsteps; ++step) {
    linear(lead_half ? half : full);
    nonlinear();
    const bool rec = step % opt.record_every == 0 || step == nsteps;
    double amax = 0.0;
    if (rec) {
      linear(half);
      lead_half = true;
      for (const auto& q : Q) amax = std::max(amax, std::abs(q));
    } else {
      lead_half = false;
    }
    if (rec) {
      if (!(amax <= opt.blowup_threshold)) {
        tr.blow_up = true;
        tr.blow_up_time = step * dt;
        break;
      }
      record(step * dt);
    }
  }
  if (!lead_half) linear(half);
  tr.finalState = Q;
  return tr;
}

}  // namespace detail

inline EvolutionTrace evolve_nls(const ModelCase& mc, const CVec& Q0, double k, double p, const EvolveOptions& opt) {
  return detail::evolve(detail::Flow::Nls, mc, Q0, k, p, opt);
}

/// Reduced Ginzburg-Landau flow; its linearization at the profile is Q_t = -H Q.
inline EvolutionTrace evolve_gl(const ModelCase& mc, const CVec& Q0, double k, double p, const EvolveOptions& opt) {
  if (mc.regime() != Regime::Defocusing)
    throw Error(ErrorKind::InvalidCase, "the Ginzburg-Landau flow is defined for the defocusing case only");
  return detail::evolve(detail::Flow::GinzburgLandau, mc, Q0, k, p, opt);
}

/// Largest eigenvalue of the collocation matrix of -H on the profile grid,
/// the exponential rate of the most unstable Ginzburg-Landau mode.
inline double gl_growth_rate(const WaveProfile& prof) {
  const int N = prof.gridN;
  Eigen::MatrixXd L(2 * N, 2 * N);
  for (int col = 0; col < 2 * N; ++col) {
    CVec e(N, 0.0);
    e[col % N] = col < N ? Complex(1.0, 0.0) : Complex(0.0, 1.0);
    const CVec He = apply_H_grid(prof.mc, prof.k(), prof.p(), prof.Q, e);
    for (int j = 0; j < N; ++j) {
      L(j, col) = -He[j].real();
      L(N + j, col) = -He[j].imag();
    }
  }
  const Eigen::MatrixXd S = 0.5 * (L + L.transpose());
  Eigen::SelfAdjointEigenSolver<Eigen::MatrixXd> es(S, Eigen::EigenvaluesOnly);
  return es.eigenvalues().maxCoeff();
}

// ---------------------------------------------------------------------------

/// Random field with modes |m| <= N/8 normalized to unit H^1 norm.
inline CVec random_perturbation(int N, std::uint64_t seed) {
  std::mt19937_64 rng(seed);
  std::normal_distribution<double> nd(0.0, 1.0);
  const int band = N / 8;
  CVec c(N, 0.0);
  for (int m = -band; m <= band; ++m) {
    const double re = nd(rng), im = nd(rng);
    c[m >= 0 ? m : N + m] = Complex(re, im) / (1.0 + m * m);
  }
  CVec r = Fourier(N).inverse(c);
  const double nrm = h1_norm(r);
  for (auto& v : r) v /= nrm;
  return r;
}

struct StabilityExperiment {
  double max_ratio = 0.0;  // sup_t rho / epsilon
  double initial_rho = 0.0;
  EvolutionTrace trace;
};

inline StabilityExperiment stability_experiment(const ModelCase& mc, const Invariants& inv, double epsilon, double t_end,
                                                std::uint64_t seed, int gridN = 256, double dt = 1e-3,
                                                int record_every = 100) {
  if (!(epsilon > 0.0) || epsilon > 1e-2) throw Error(ErrorKind::InvalidArgument, "epsilon must lie in (0, 1e-2]");
  ProfileOptions po;
  po.escalate = false;
  const WaveProfile prof = shoot_profile(mc, inv, gridN, po);
  const CVec R = random_perturbation(gridN, seed);
  CVec Q0(gridN);
  for (int j = 0; j < gridN; ++j) Q0[j] = prof.Q[j] + epsilon * R[j];
  EvolveOptions eo;
  eo.dt = dt;
  eo.t_end = t_end;
  eo.record_every = record_every;
  eo.reference = prof.Q;
  StabilityExperiment ex;
  ex.trace = evolve_nls(mc, Q0, prof.k(), prof.p(), eo);
  ex.initial_rho = ex.trace.rho.empty() ? 0.0 : ex.trace.rho.front();
  ex.max_ratio = ex.trace.blow_up ? std::numeric_limits<double>::infinity() : 0.0;
  for (double r : ex.trace.rho) ex.max_ratio = std::max(ex.max_ratio, r / epsilon);
  return ex;
}

}  // namespace pwlab
