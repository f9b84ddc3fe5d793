// Acceptance battery: one PASS/FAIL line per criterion, tolerances pinned below.

#include <gtest/gtest.h>

#include <cstdio>
#include <string>

#include "support.hpp"

using namespace pwlab;

namespace {

const ModelCase kDef = ModelCase::defocusing();
const ModelCase kCnt = ModelCase::focusing_counter();
const ModelCase kCor = ModelCase::focusing_coro();

namespace tol {
constexpr double kDetM = 1e-6;
constexpr double kSmallHessian = 2e-2;
constexpr double kLambdaBand = 0.2;
constexpr double kAlignment = 0.999;
constexpr double kDerivative = 1e-4;
constexpr double kRoundTrip = 1e-8;
constexpr double kPeriodEdge = 1e-3;
constexpr double kRhoStationary = 1e-6;
constexpr double kDriftNM = 1e-8;
constexpr double kStrangLo = 3.6, kStrangHi = 4.4;
constexpr double kOrbitalRatio = 10.0;
constexpr double kGrowth = 0.2;
constexpr double kCharge = 1e-7;
constexpr double kKMatrix = 1e-4;
constexpr double kHessianD = 1e-3;
}  // namespace tol

void verdict(int n, bool ok, const std::string& detail) {
  std::printf("%s criterion %d: %s\n", ok ? "PASS" : "FAIL", n, detail.c_str());
  std::fflush(stdout);
  EXPECT_TRUE(ok) << "criterion " << n << ": " << detail;
}

std::string fmt(const char* f, double a, double b = 0, double c = 0, double d = 0) {
  char buf[256];
  std::snprintf(buf, sizeof buf, f, a, b, c, d);
  return buf;
}

double rel_entry(const Mat2& a, const Mat2& b) {
  double m = 0.0;
  for (int i = 0; i < 2; ++i)
    for (int j = 0; j < 2; ++j) m = std::max(m, oracle::rel(a(i, j), b(i, j)));
  return m;
}

double sup(const std::vector<double>& v) { return v.empty() ? 0.0 : *std::max_element(v.begin(), v.end()); }

CVec axpy(const CVec& x, double a, const CVec& y) {
  CVec out(x.size());
  for (std::size_t j = 0; j < x.size(); ++j) out[j] = x[j] + a * y[j];
  return out;
}

ProfileOptions fixed_grid() {
  ProfileOptions po;
  po.escalate = false;
  return po;
}

}  // namespace

TEST(Acceptance, Criterion01_CounterRotatingScan) {
  const auto rows = scan_det_hessian(kCnt, {0, 1, 2, 3, 4, 5}, 20.0, 100);
  int bad = 0;
  double worst = INFINITY;
  for (const auto& r : rows) {
    if (r.flagged || !(r.detH < 0)) ++bad;
    worst = std::min(worst, -r.detH);
  }
  verdict(1, rows.size() == 600 && bad == 0,
          fmt("%.0f points, %.0f with -detH <= 0 or flagged, min(-detH) = %.3e", rows.size(), bad, worst));
}

TEST(Acceptance, Criterion02_DefocusingGrid) {
  const double jm = std::sqrt(4.0 / 27.0);
  int bad_delta = 0, bad_det = 0;
  double worst_rel = 0.0;
  for (int a = 0; a < 20; ++a)
    for (int b = 0; b < 20; ++b) {
      const double J = jm * (-1.0 + 2.0 * (a + 0.5) / 20.0) * 0.98;
      const double lo = e_minus(kDef, J), hi = e_plus(J);
      const Invariants inv{J, lo + (hi - lo) * (b + 0.5) / 20.0};
      const StabilityReport r = hessian_H(kDef, inv);
      const double k = wave_numbers(kDef, inv).k;
      if (!(r.delta > 0)) ++bad_delta;
      if (!(r.detH < 0)) ++bad_det;
      worst_rel = std::max(worst_rel, oracle::rel(r.detM, 8 * k * k * k / (kPi * kPi) * r.delta));
    }
  verdict(2, bad_delta == 0 && bad_det == 0 && worst_rel <= tol::kDetM,
          fmt("400 points, Delta<=0 at %.0f, detH>=0 at %.0f, max rel(detM, 8k^3/pi^2 Delta) = %.2e", bad_delta,
              bad_det, worst_rel));
}

TEST(Acceptance, Criterion03_SmallAmplitudeHessians) {
  Mat2 ed, ec;
  ed << -2, -1, -1, 1;
  ec << 2, 1, 1, -1;
  ed *= kPi / 3;
  ec *= kPi / 3;
  const double rd = rel_entry(hessian_H(kDef, {0.0, 1e-3}).H, ed);
  const double rc = rel_entry(hessian_H(kCnt, {0.0, 1e-3}).H, ec);
  verdict(3, rd <= tol::kSmallHessian && rc <= tol::kSmallHessian,
          fmt("entrywise rel error defocusing %.2e, focusing-counter %.2e (tol %.0e)", rd, rc, tol::kSmallHessian));
}

TEST(Acceptance, Criterion04_EigenvalueAsymptotics) {
  const double E = 0.01;
  auto low = [&](const ModelCase& mc) { return spectrum_low(assemble_H(shoot_profile(mc, {0.0, E}, 256), 64)); };
  // the first eigenvalue above the double zero is lambda_2
  const SpectralReport d = low(kDef), c = low(kCnt);
  const double d1 = d.eigenvalues[0] / E, d2 = d.eigenvalues[3] / E;
  const double c1 = c.eigenvalues[0] / E, c2 = c.eigenvalues[3] / E;
  auto in = [](double v, double centre) { return std::abs(v - centre) <= tol::kLambdaBand * std::abs(centre); };
  verdict(4, in(d1, -1) && in(d2, 3) && in(c1, -3) && in(c2, 1),
          fmt("lambda/E defocusing (%.4f, %.4f), focusing-counter (%.4f, %.4f)", d1, d2, c1, c2));
}

TEST(Acceptance, Criterion05_Eigencount) {
  int bad = 0, total = 0;
  double worst_align = 1.0;
  for (const auto& mc : oracle::all_cases()) {
    const auto pts = mc.regime() == Regime::Defocusing ? oracle::interior_samples(mc, 20, 12, 0.25)
                                                       : oracle::interior_samples(mc, 20, 12, 0.05, 2.0, 3.0);
    for (const auto& inv : pts) {
      const SpectralReport r = spectrum_low(assemble_H(shoot_profile(mc, inv, 256), 64));
      ++total;
      if (r.n_negative != 1 || r.kernel_dim_estimate != 2) ++bad;
      worst_align = std::min(worst_align, r.kernel_alignment);
    }
  }
  verdict(5, bad == 0 && worst_align >= tol::kAlignment,
          fmt("%.0f points, %.0f with a wrong count, min kernel alignment %.8f", total, bad, worst_align));
}

TEST(Acceptance, Criterion06_MonotonicitySigns) {
  int bad = 0;
  for (const auto& inv : oracle::interior_samples(kDef, 50, 53)) {
    const DerivCoeffs c = derivatives(kDef, inv).coeffs;
    const Jacobian j = derivatives(kDef, inv).jac;
    if (!(j.T_E > 0) || !(c.dy_dE[0] < 0) || !(c.dy_dE[1] > 0)) ++bad;
  }
  for (const auto& inv : oracle::interior_samples(kCnt, 50, 59)) {
    const DerivCoeffs c = derivatives(kCnt, inv).coeffs;
    const Jacobian j = derivatives(kCnt, inv).jac;
    if (!(j.T_E < 0) || !(c.dy_dE[0] < 0) || !(c.dy_dE[1] > 0)) ++bad;
  }
  for (int i = 1; i <= 25; ++i) {
    if (!(derivatives(kCor, {0.0, -0.25 + 0.25 * i / 26.0}).jac.T_E > 0)) ++bad;
    if (!(derivatives(kCor, {0.0, 0.02 + 0.2 * i}).jac.T_E < 0)) ++bad;
  }
  // analytic derivatives against central differences, all cases off the corotating phase line
  double worst = 0.0;
  const double h = 1e-5;
  for (const auto& mc : oracle::all_cases()) {
    int used = 0;
    for (const auto& inv : oracle::interior_samples(mc, 200, 37, 0.05, 2.0, 4.0)) {
      if (mc.regime() == Regime::FocusingCoro && std::abs(inv.J) < 0.05) continue;
      if (++used > 50) break;
      const Jacobian j = derivatives(mc, inv).jac;
      auto T = [&](double J, double E) { return period_T(mc, {J, E}); };
      auto P = [&](double J, double E) { return renorm_Psi(mc, {J, E}); };
      const double fd[4] = {(T(inv.J, inv.E + h) - T(inv.J, inv.E - h)) / (2 * h),
                            (T(inv.J + h, inv.E) - T(inv.J - h, inv.E)) / (2 * h),
                            (P(inv.J, inv.E + h) - P(inv.J, inv.E - h)) / (2 * h),
                            (P(inv.J + h, inv.E) - P(inv.J - h, inv.E)) / (2 * h)};
      const double an[4] = {j.T_E, j.T_J, j.Psi_E, j.Psi_J};
      const double scale = std::max({std::abs(an[0]), std::abs(an[1]), std::abs(an[2]), std::abs(an[3])});
      for (int q = 0; q < 4; ++q) worst = std::max(worst, std::abs(an[q] - fd[q]) / scale);
    }
  }
  verdict(6, bad == 0 && worst <= tol::kDerivative,
          fmt("%.0f sign violations over 150 points, max scaled |analytic - central| = %.2e", bad, worst));
}

TEST(Acceptance, Criterion07_DiffeomorphismRoundTrip) {
  double worst = 0.0;
  int range_bad = 0;
  for (const auto& mc : {kDef, kCnt})
    for (const auto& inv : oracle::interior_samples(mc, 100, 83, 0.01)) {
      const auto tp = map_to_TPsi(mc, inv);
      if (mc.regime() == Regime::Defocusing ? !(tp[0] > kPi) : !(tp[0] < kPi)) ++range_bad;
      const Invariants back = invert_TPsi(mc, tp[0], tp[1]);
      worst = std::max({worst, std::abs(back.J - inv.J), std::abs(back.E - inv.E)});
    }
  double edge = 0.0;
  for (double Q : {0.8, 0.95, -0.7}) {
    const double J = Q * (1 - Q * Q), Em = e_minus(kDef, J);
    edge = std::max(edge, oracle::rel(period_T(kDef, {J, Em + 1e-6}), kPi / std::pow(1 - 3 * Em, 0.25)));
  }
  verdict(7, worst <= tol::kRoundTrip && range_bad == 0 && edge <= tol::kPeriodEdge,
          fmt("max round-trip error %.2e over 200 points, %.0f T-range violations, edge limit rel %.2e", worst,
              range_bad, edge));
}

TEST(Acceptance, Criterion08_DynamicsConsistency) {
  const WaveProfile prof = shoot_profile(kDef, {0.0, 0.1875}, 256, fixed_grid());
  EvolveOptions eo;
  eo.dt = 1e-3;
  eo.t_end = 10.0;
  eo.reference = prof.Q;
  const EvolutionTrace tr = evolve_nls(kDef, prof.Q, prof.k(), prof.p(), eo);
  const double rho = sup(tr.rho), dn = sup(tr.driftN), dm = sup(tr.driftM);

  // dt halving on a smooth band-8 perturbation against a fine reference
  const WaveProfile p2 = shoot_profile(kDef, {0.1, 0.15}, 256, fixed_grid());
  const CVec Q0 = axpy(p2.Q, 0.1, resample(random_perturbation(64, 17), 256));
  auto run = [&](double dt) {
    EvolveOptions o;
    o.dt = dt;
    o.t_end = 1.0;
    o.record_every = 1 << 30;
    return evolve_nls(kDef, Q0, p2.k(), p2.p(), o).finalState;
  };
  const CVec fine = run(3.125e-5);
  auto err = [&](double dt) { return h1_norm(axpy(run(dt), -1.0, fine)); };
  const double e1 = err(1e-3), e2 = err(5e-4), e3 = err(2.5e-4);
  const double r1 = e1 / e2, r2 = e2 / e3;
  const bool order = r1 >= tol::kStrangLo && r1 <= tol::kStrangHi && r2 >= tol::kStrangLo && r2 <= tol::kStrangHi;
  verdict(8, rho <= tol::kRhoStationary && dn <= tol::kDriftNM && dm <= tol::kDriftNM && order,
          fmt("sup rho %.2e, drift N %.2e, drift M %.2e; halving ratios %.3f", rho, dn, dm, r1) +
              fmt(", %.3f", r2));
}

TEST(Acceptance, Criterion09_OrbitalStabilityExperiment) {
  struct Run {
    ModelCase mc;
    Invariants inv;
  };
  const std::vector<Run> runs = {{kDef, {0.0, 0.1875}}, {kDef, {0.1, 0.15}}, {kCnt, {0.1, 0.15}}};
  bool ok = true;
  std::string detail;
  for (const auto& r : runs) {
    const bool stable_side = hessian_H(r.mc, r.inv).detH < 0;
    const StabilityExperiment ex = stability_experiment(r.mc, r.inv, 1e-3, 100.0, 1);
    ok = ok && stable_side && !ex.trace.blow_up && ex.max_ratio <= tol::kOrbitalRatio;
    detail += std::string(r.mc.name()) + fmt(" (%.2g, %.4g): max rho/eps %.3f; ", r.inv.J, r.inv.E, ex.max_ratio);
  }
  verdict(9, ok, detail);
}

TEST(Acceptance, Criterion10_GinzburgLandauInstability) {
  const WaveProfile prof = shoot_profile(kDef, {0.0, 0.1875}, 128, fixed_grid());
  const OperatorMatrix op = assemble_H(prof, 48);
  const SpectralReport rep = spectrum_low(op, 1);
  CVec g = op.basis().to_grid(rep.low_vectors.col(0), prof.gridN);
  const double nrm = h1_norm(g);
  for (auto& v : g) v /= nrm;
  const double eps = 1e-6;
  const CVec Q0 = axpy(prof.Q, eps, g);
  EvolveOptions eo;
  eo.t_end = 80.0;
  eo.record_every = 100;
  eo.reference = prof.Q;
  const EvolutionTrace gl = evolve_gl(kDef, Q0, prof.k(), prof.p(), eo);
  const EvolutionTrace nls = evolve_nls(kDef, Q0, prof.k(), prof.p(), eo);
  // least-squares slope of log deviation in the linear regime
  double st = 0, sy = 0, stt = 0, sty = 0;
  int n = 0;
  for (std::size_t i = 0; i < gl.times.size(); ++i)
    if (gl.deviation[i] >= 1e-5 && gl.deviation[i] <= 1e-2) {
      const double t = gl.times[i], y = std::log(gl.deviation[i]);
      st += t;
      sy += y;
      stt += t * t;
      sty += t * y;
      ++n;
    }
  const double slope = n >= 5 ? (n * sty - st * sy) / (n * stt - st * st) : NAN;
  const double ratio = slope / -rep.eigenvalues[0];
  const double nls_ratio = sup(nls.rho) / eps;
  verdict(10, std::abs(ratio - 1.0) <= tol::kGrowth && nls_ratio <= tol::kOrbitalRatio,
          fmt("GL growth %.5f vs |lambda_1| %.5f (ratio %.4f); NLS sup rho/eps %.3f", slope, -rep.eigenvalues[0], ratio,
              nls_ratio));
}

TEST(Acceptance, Criterion11_CrossOracleIdentities) {
  double wN = 0.0, wM = 0.0;
  for (const auto& mc : oracle::all_cases())
    for (const auto& inv : oracle::interior_samples(mc, 10, 8, 0.05, 2.0, 3.0)) {
      const WaveProfile prof = shoot_profile(mc, inv, 256);
      const Functionals f = functionals(prof);
      wN = std::max(wN, oracle::rel(f.N, charge_N(mc, inv)));
      wM = std::max(wM, oracle::rel(f.M, prof.p() / (2 * prof.k()) * f.N - 0.5 * inv.J * prof.wn.T));
    }
  double wK = 0.0;
  for (const auto& inv : oracle::interior_samples(kDef, 10, 6, 0.05))
    wK = std::max(wK, rel_entry(matrix_K_analytic(kDef, inv), matrix_K_fd(kDef, inv)));
  double wH = 0.0;
  for (const auto& mc : oracle::all_cases())
    for (const auto& inv : oracle::interior_samples(mc, 3, 9, 0.05, 2.0, 3.0)) {
      const Mat2 H = hessian_H(mc, inv).H;
      wH = std::max(wH, rel_entry(hessian_from_d(mc, inv), 0.5 * (H + H.transpose())));
    }
  verdict(11, wN <= tol::kCharge && wM <= tol::kCharge && wK <= tol::kKMatrix && wH <= tol::kHessianD,
          fmt("max rel: N %.2e, M %.2e, K analytic vs FD %.2e, H vs d-differences %.2e", wN, wM, wK, wH));
}
