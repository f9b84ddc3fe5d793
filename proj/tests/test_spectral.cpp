#include <gtest/gtest.h>

#include <algorithm>

#include "support.hpp"

using namespace pwlab;

namespace {

const ModelCase kDef = ModelCase::defocusing();
const ModelCase kCnt = ModelCase::focusing_counter();
const ModelCase kCor = ModelCase::focusing_coro();

// Eigenvalue gaps must clear tol_zero, so points stay away from the plane-wave edge.
std::vector<Invariants> sample_points(const ModelCase& mc, int count, std::uint64_t seed) {
  if (mc.regime() == Regime::Defocusing) return oracle::interior_samples(mc, count, seed, 0.25);
  return oracle::interior_samples(mc, count, seed, 0.05, 2.0, 3.0);
}

Invariants reference_point(const ModelCase& mc) {
  switch (mc.regime()) {
    case Regime::Defocusing: return {0.1, 0.15};
    case Regime::FocusingCounter: return {0.3, 1.0};
    default: return {1.0, e_minus(mc, 1.0) + 1.0};
  }
}

}  // namespace

TEST(Assembly, ZeroProfileGivesTheFourierSymbol) {
  const int n = 16;
  for (const auto& mc : oracle::all_cases()) {
    const double k = 0.9, p = 0.35, mu = mc.mu(p);
    const OperatorMatrix op = assemble_H(mc, k, p, CVec(64, 0.0), n);
    std::vector<double> expected;
    for (int m = -n; m <= n; ++m) {
      const double s = 4 * k * k * m * m + 4 * p * k * m - mu;
      expected.push_back(s);
      expected.push_back(s);
    }
    std::sort(expected.begin(), expected.end());
    const SpectralReport r = spectrum_low(op);
    ASSERT_EQ(r.eigenvalues.size(), static_cast<Eigen::Index>(expected.size()));
    for (std::size_t i = 0; i < expected.size(); ++i)
      EXPECT_NEAR(r.eigenvalues[i], expected[i], 1e-12 * (1 + std::abs(expected[i]))) << mc.name() << " " << i;
  }
}

TEST(Assembly, SymmetricDimensionedAndCountsAddUp) {
  for (const auto& mc : oracle::all_cases()) {
    const WaveProfile prof = shoot_profile(mc, reference_point(mc), 256);
    const OperatorMatrix op = assemble_H(prof, 32);
    EXPECT_EQ(op.H.rows(), 2 * (2 * 32 + 1));
    EXPECT_LE(op.symmetry_drift, 1e-13);
    EXPECT_EQ((op.H - op.H.transpose()).cwiseAbs().maxCoeff(), 0.0);
    const SpectralReport r = spectrum_low(op);
    EXPECT_EQ(r.n_negative + r.kernel_dim_estimate + r.n_positive, op.H.rows());
    EXPECT_DOUBLE_EQ(r.tol_zero, 1e-6 * r.op_norm);
    EXPECT_TRUE(std::is_sorted(r.eigenvalues.begin(), r.eigenvalues.end()));
  }
}

TEST(Assembly, UnresolvedProfileRaisesAliasWarning) {
  const WaveProfile prof = shoot_profile(kDef, {0.0, 0.2499999}, 256);
  try {
    assemble_H(prof, 16);
    FAIL() << "expected AliasWarning";
  } catch (const Error& e) {
    EXPECT_EQ(e.kind(), ErrorKind::AliasWarning);
  }
  AssembleOptions lax;
  lax.strict_alias = false;
  EXPECT_GT(assemble_H(prof, 16, lax).profile_tail, 1e-10);
  EXPECT_NO_THROW(assemble_H(prof, 64));
  try {
    assemble_H(prof, 8);
    FAIL() << "expected InvalidArgument";
  } catch (const Error& e) {
    EXPECT_EQ(e.kind(), ErrorKind::InvalidArgument);
  }
}

TEST(Kernel, TranslationAndPhaseDirectionsAreAnnihilated) {
  for (const auto& mc : oracle::all_cases())
    for (const auto& inv : sample_points(mc, 5, 11)) {
      const WaveProfile prof = shoot_profile(mc, inv, 256);
      const SpectralReport r = spectrum_low(assemble_H(prof, 64));
      EXPECT_LE(r.kernel_residual_dQ, 1e-6) << mc.name() << " " << inv.J << " " << inv.E;
      EXPECT_LE(r.kernel_residual_iQ, 1e-6);
      EXPECT_GE(r.kernel_alignment, 0.999);
    }
}

TEST(Eigencount, OneNegativeAndADoubleZeroAcrossAllCases) {
  for (const auto& mc : oracle::all_cases()) {
    const auto pts = sample_points(mc, 20, 12);
    for (const auto& inv : pts) {
      const WaveProfile prof = shoot_profile(mc, inv, 256);
      const SpectralReport r = spectrum_low(assemble_H(prof, 64));
      EXPECT_EQ(r.n_negative, 1) << mc.name() << " " << inv.J << " " << inv.E;
      EXPECT_EQ(r.kernel_dim_estimate, 2) << mc.name() << " " << inv.J << " " << inv.E;
    }
  }
}

TEST(Eigencount, SmallWaveAsymptotics) {
  // lambda_2 is the first eigenvalue above the double zero
  const double E = 0.01;
  {
    const SpectralReport r = spectrum_low(assemble_H(shoot_profile(kDef, {0.0, E}, 256), 64));
    EXPECT_NEAR(r.eigenvalues[0] / E, -1.0, 0.2);
    EXPECT_NEAR(r.eigenvalues[3] / E, 3.0, 0.6);
    EXPECT_LE(std::abs(r.eigenvalues[1]), 1e-9);
    EXPECT_LE(std::abs(r.eigenvalues[2]), 1e-9);
  }
  {
    const SpectralReport r = spectrum_low(assemble_H(shoot_profile(kCnt, {0.0, E}, 256), 64));
    EXPECT_NEAR(r.eigenvalues[0] / E, -3.0, 0.6);
    EXPECT_NEAR(r.eigenvalues[3] / E, 1.0, 0.2);
    EXPECT_LE(std::abs(r.eigenvalues[1]), 1e-9);
    EXPECT_LE(std::abs(r.eigenvalues[2]), 1e-9);
  }
}

TEST(Eigencount, DoublingTheTruncationConverges) {
  for (const auto& mc : oracle::all_cases()) {
    const WaveProfile prof = shoot_profile(mc, reference_point(mc), 256);
    const SpectralReport a = spectrum_low(assemble_H(prof, 32)), b = spectrum_low(assemble_H(prof, 64));
    for (int i = 0; i < 5; ++i) {
      // the exact-zero pair is compared on the scale of the gap
      const double scale = (i == 1 || i == 2) ? std::abs(b.eigenvalues[0]) : std::abs(b.eigenvalues[i]);
      EXPECT_LE(std::abs(a.eigenvalues[i] - b.eigenvalues[i]), 1e-8 * scale) << mc.name() << " " << i;
    }
  }
}

TEST(Eigencount, GinzburgLandauRateIsTheGroundEigenvalue) {
  for (const auto& mc : oracle::all_cases()) {
    const WaveProfile prof = shoot_profile(mc, reference_point(mc), 128);
    const SpectralReport r = spectrum_low(assemble_H(prof, 32));
    EXPECT_LE(oracle::rel(gl_growth_rate(prof), -r.eigenvalues[0]), 1e-6) << mc.name();
  }
}

TEST(Constrained, PositiveAndBelowTheInterlacingBound) {
  for (const auto& mc : oracle::all_cases())
    for (const auto& inv : sample_points(mc, 6, 13)) {
      const OperatorMatrix op = assemble_H(shoot_profile(mc, inv, 256), 48);
      const ConstrainedResult c = constrained_positivity(op);
      EXPECT_GT(c.min_value, 0.0) << mc.name() << " " << inv.J << " " << inv.E;
      EXPECT_LE(c.min_value, c.fifth_eigenvalue * (1 + 1e-12));
      EXPECT_GT(c.smallest_positive, 0.0);
    }
}

TEST(Constrained, KernelDirectionsHaveZeroRayleighQuotient) {
  for (const auto& mc : oracle::all_cases()) {
    const OperatorMatrix op = assemble_H(shoot_profile(mc, reference_point(mc), 256), 48);
    const SpectralReport r = spectrum_low(op);
    EXPECT_LE(std::abs(rayleigh_quotient(op, op.dQ + 0.7 * op.iQ)), r.tol_zero);
    EXPECT_LE(std::abs(rayleigh_quotient(op, op.iQ)), r.tol_zero);
    // the ground state is excluded by the constraints and carries the negative value
    EXPECT_LT(rayleigh_quotient(op, r.low_vectors.col(0)), -r.tol_zero);
  }
}

TEST(KernelOde, SecularSolutionsSolveTheLinearizedEquation) {
  for (const auto& mc : oracle::all_cases()) {
    const WaveProfile prof = shoot_profile(mc, reference_point(mc), 256);
    for (double h : {1e-4, 1e-5}) {
      const KernelSolutions ks = kernel_ode_solutions(prof, h);
      EXPECT_LE(ks.residual_R1, 1e-4) << mc.name() << " h=" << h;
      EXPECT_LE(ks.residual_R2, 1e-4) << mc.name() << " h=" << h;
      EXPECT_GT(ks.periodicity_defect_R1, 0.1);
      EXPECT_GT(ks.periodicity_defect_R2, 0.1);
    }
  }
}

TEST(NormalSpace, FamilyDerivativesReproduceTheHessian) {
  for (const auto& mc : oracle::all_cases()) {
    const Invariants inv = reference_point(mc);
    const WaveProfile prof = shoot_profile(mc, inv, 256);
    const NormalSpace ns = normal_space(prof, 1e-4);
    EXPECT_LE(ns.residual_w, 1e-5) << mc.name();
    EXPECT_LE(ns.residual_c, 1e-5) << mc.name();
    const Mat2 hd = hessian_from_d(mc, inv);
    for (int i = 0; i < 2; ++i)
      for (int j = 0; j < 2; ++j) EXPECT_NEAR(ns.H(i, j), hd(i, j), 1e-5 * hd.cwiseAbs().maxCoeff()) << mc.name();
  }
}
