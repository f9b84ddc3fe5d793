#pragma once

// Second variation H_{J,E} as a real symmetric Galerkin matrix on
// (Re q, Im q), each expanded in the orthonormal basis
// 1/sqrt(2pi), cos(mz)/sqrt(pi), sin(mz)/sqrt(pi), m = 1..n.

#include <algorithm>
#include <cmath>
#include <vector>

#include <Eigen/Dense>

#include "pwlab/error.hpp"
#include "pwlab/fourier.hpp"
#include "pwlab/profile.hpp"
#include "pwlab/stability.hpp"

namespace pwlab {

using Eigen::MatrixXd;
using Eigen::VectorXd;

/// Index layout of one real component: 0 -> constant, 2m-1 -> cos m, 2m -> sin m.
struct RealBasis {
  int n;
  int block() const { return 2 * n + 1; }
  int dim() const { return 2 * block(); }

  /// L2-orthonormal coefficients of a complex grid function.
  VectorXd to_basis(const CVec& q) const {
    const int N = static_cast<int>(q.size());
    const CVec c = Fourier(N).forward(q);
    VectorXd x = VectorXd::Zero(dim());
    const double s0 = std::sqrt(2.0 * kPi), s1 = std::sqrt(kPi);
    auto coef = [&](int m) { return m >= 0 ? c[m] : c[N + m]; };
    // u = Re q has coefficients (c_m + conj c_{-m}) / 2, v = Im q has (c_m - conj c_{-m}) / 2i
    auto put = [&](int comp, auto fhat) {
      const int off = comp * block();
      x[off] = fhat(0).real() * s0;
      for (int m = 1; m <= n && m < N / 2; ++m) {
        const Complex f = fhat(m);
        x[off + 2 * m - 1] = 2.0 * f.real() * s1;
        x[off + 2 * m] = -2.0 * f.imag() * s1;
      }
    };
    put(0, [&](int m) { return 0.5 * (coef(m) + std::conj(coef(-m))); });
    put(1, [&](int m) { return Complex(0.0, -0.5) * (coef(m) - std::conj(coef(-m))); });
    return x;
  }

  CVec to_grid(const VectorXd& x, int N) const {
    CVec q(N);
    const double s0 = 1.0 / std::sqrt(2.0 * kPi), s1 = 1.0 / std::sqrt(kPi);
    for (int j = 0; j < N; ++j) {
      const double z = 2.0 * kPi * j / N;
      double u = x[0] * s0, v = x[block()] * s0;
      for (int m = 1; m <= n; ++m) {
        const double cm = std::cos(m * z) * s1, sm = std::sin(m * z) * s1;
        u += x[2 * m - 1] * cm + x[2 * m] * sm;
        v += x[block() + 2 * m - 1] * cm + x[block() + 2 * m] * sm;
      }
      q[j] = Complex(u, v);
    }
    return q;
  }
};

struct OperatorMatrix {
  int n = 0;
  double k = 0, p = 0, mu = 0;
  MatrixXd H;
  double symmetry_drift = 0.0;
  double profile_tail = 0.0;  // relative profile coefficient size at |m| >= n
  VectorXd dQ, iQ, Q, idQ;    // basis vectors of Q', iQ, Q, iQ'
  RealBasis basis() const { return RealBasis{n}; }
};

struct AssembleOptions {
  bool strict_alias = true;
  double alias_tol = 1e-10;
};

namespace detail {

inline int next_pow2(int v) {
  int p = 1;
  while (p < v) p <<= 1;
  return p;
}

}  // namespace detail

/// Galerkin matrix of H for the reference state Q (any grid size).
inline OperatorMatrix assemble_H(const ModelCase& mc, double k, double p, const CVec& Qref, int n,
                                 const AssembleOptions& opt = {}) {
  if (n < 16) throw Error(ErrorKind::InvalidArgument, "Fourier truncation n must be >= 16");
  const int N0 = static_cast<int>(Qref.size());
  OperatorMatrix op;
  op.n = n;
  op.k = k;
  op.p = p;
  op.mu = mc.mu(p);
  {
    const CVec c = Fourier(N0).forward(Qref);
    op.profile_tail = n < N0 / 2 ? spectral_tail(c, n) : 0.0;
  }
  if (opt.strict_alias && op.profile_tail > opt.alias_tol)
    throw Error(ErrorKind::AliasWarning, "profile is not resolved by n Fourier modes");

  const int Ng = std::max(N0, detail::next_pow2(8 * n));
  const CVec Q = resample(Qref, Ng);
  const double g = mc.gamma();
  CVec fa(Ng), fb(Ng), fc(Ng);
  for (int j = 0; j < Ng; ++j) {
    const double R = Q[j].real(), I = Q[j].imag();
    fa[j] = -g * (3.0 * R * R + I * I);
    fb[j] = -g * 2.0 * R * I;
    fc[j] = -g * (R * R + 3.0 * I * I);
  }
  const Fourier fr(Ng);
  const CVec ca = fr.forward(fa), cb = fr.forward(fb), cc = fr.forward(fc);
  auto coef = [&](const CVec& c, int m) { return m >= 0 ? c[m] : c[Ng + m]; };

  const int B = 2 * n + 1;
  using CMat = Eigen::MatrixXcd;
  CMat U = CMat::Zero(B, B);  // columns: real basis functions in the e_m = e^{imz}/sqrt(2pi) basis
  const double r2 = 1.0 / std::sqrt(2.0);
  U(n, 0) = 1.0;
  for (int m = 1; m <= n; ++m) {
    U(n + m, 2 * m - 1) = r2;
    U(n - m, 2 * m - 1) = r2;
    U(n + m, 2 * m) = Complex(0.0, -r2);
    U(n - m, 2 * m) = Complex(0.0, r2);
  }
  auto mult = [&](const CVec& c) {
    CMat A(B, B);
    for (int i = 0; i < B; ++i)
      for (int j = 0; j < B; ++j) A(i, j) = coef(c, i - j);
    return A;
  };
  CMat uu = mult(ca), vv = mult(cc), uv = mult(cb), vu = uv;
  for (int i = 0; i < B; ++i) {
    const double m = i - n;
    uu(i, i) += 4.0 * k * k * m * m - op.mu;
    vv(i, i) += 4.0 * k * k * m * m - op.mu;
    uv(i, i) += Complex(0.0, 4.0 * p * k * m);
    vu(i, i) += Complex(0.0, -4.0 * p * k * m);
  }
  const CMat Uh = U.adjoint();
  op.H.resize(2 * B, 2 * B);
  op.H.block(0, 0, B, B) = (Uh * uu * U).real();
  op.H.block(0, B, B, B) = (Uh * uv * U).real();
  op.H.block(B, 0, B, B) = (Uh * vu * U).real();
  op.H.block(B, B, B, B) = (Uh * vv * U).real();
  const MatrixXd sym = 0.5 * (op.H + op.H.transpose());
  op.symmetry_drift = (op.H - sym).cwiseAbs().maxCoeff();
  op.H = sym;

  const RealBasis rb{n};
  const Fourier f0(N0);
  const CVec d1 = f0.derivative(Qref, 1);
  CVec iq(N0), idq(N0);
  for (int j = 0; j < N0; ++j) {
    iq[j] = Complex(0.0, 1.0) * Qref[j];
    idq[j] = Complex(0.0, 1.0) * d1[j];
  }
  op.Q = rb.to_basis(Qref);
  op.dQ = rb.to_basis(d1);
  op.iQ = rb.to_basis(iq);
  op.idQ = rb.to_basis(idq);
  return op;
}

inline OperatorMatrix assemble_H(const WaveProfile& prof, int n, const AssembleOptions& opt = {}) {
  return assemble_H(prof.mc, prof.k(), prof.p(), prof.Q, n, opt);
}

struct SpectralReport {
  VectorXd eigenvalues;  // ascending, full spectrum
  MatrixXd low_vectors;  // eigenvectors of the `count` lowest eigenvalues
  int n_negative = 0, kernel_dim_estimate = 0, n_positive = 0;
  double tol_zero = 0.0;
  double op_norm = 0.0;
  double kernel_residual_dQ = 0.0;  // |H Q'| / |Q'|
  double kernel_residual_iQ = 0.0;  // |H iQ| / |iQ|
  double kernel_alignment = 0.0;    // cosine of the largest principal angle
};

/// Cosine of the largest principal angle between span(A) and span(B).
inline double subspace_alignment(const MatrixXd& A, const MatrixXd& B) {
  const MatrixXd qa = Eigen::HouseholderQR<MatrixXd>(A).householderQ() * MatrixXd::Identity(A.rows(), A.cols());
  const MatrixXd qb = Eigen::HouseholderQR<MatrixXd>(B).householderQ() * MatrixXd::Identity(B.rows(), B.cols());
  Eigen::JacobiSVD<MatrixXd> svd(qa.transpose() * qb);
  return svd.singularValues().minCoeff();
}

inline SpectralReport spectrum_low(const OperatorMatrix& op, int count = 5) {
  Eigen::SelfAdjointEigenSolver<MatrixXd> es(op.H);
  if (es.info() != Eigen::Success) throw Error(ErrorKind::NoConvergence, "symmetric eigensolver failed");
  SpectralReport r;
  r.eigenvalues = es.eigenvalues();
  const int D = static_cast<int>(r.eigenvalues.size());
  count = std::min(count, D);
  r.low_vectors = es.eigenvectors().leftCols(count);
  r.op_norm = r.eigenvalues.cwiseAbs().maxCoeff();
  r.tol_zero = 1e-6 * r.op_norm;
  for (int i = 0; i < D; ++i) {
    const double l = r.eigenvalues[i];
    if (l < -r.tol_zero) ++r.n_negative;
    else if (l > r.tol_zero) ++r.n_positive;
    else ++r.kernel_dim_estimate;
  }
  r.kernel_residual_dQ = (op.H * op.dQ).norm() / op.dQ.norm();
  r.kernel_residual_iQ = (op.H * op.iQ).norm() / op.iQ.norm();

  // the two eigenvalues closest to zero span the numerical kernel
  std::vector<int> idx(D);
  for (int i = 0; i < D; ++i) idx[i] = i;
  std::partial_sort(idx.begin(), idx.begin() + 2, idx.end(),
                    [&](int a, int b) { return std::abs(r.eigenvalues[a]) < std::abs(r.eigenvalues[b]); });
  MatrixXd V(D, 2), Kq(D, 2);
  V.col(0) = es.eigenvectors().col(idx[0]);
  V.col(1) = es.eigenvectors().col(idx[1]);
  Kq.col(0) = op.dQ;
  Kq.col(1) = op.iQ;
  r.kernel_alignment = subspace_alignment(Kq, V);
  return r;
}

struct ConstrainedResult {
  double min_value = 0.0;             // smallest Rayleigh quotient on the constrained space
  double smallest_positive = 0.0;     // smallest unconstrained eigenvalue above tol_zero
  double fifth_eigenvalue = 0.0;      // interlacing bound for the 4-constraint compression
};

/// Minimum of <Hq,q>/<q,q> over q orthogonal to Q, iQ', Q', iQ.
inline ConstrainedResult constrained_positivity(const OperatorMatrix& op) {
  const int D = static_cast<int>(op.H.rows());
  MatrixXd C(D, 4);
  C.col(0) = op.Q;
  C.col(1) = op.idQ;
  C.col(2) = op.dQ;
  C.col(3) = op.iQ;
  const MatrixXd full = Eigen::HouseholderQR<MatrixXd>(C).householderQ();
  const MatrixXd P = full.rightCols(D - 4);
  const MatrixXd Hc = P.transpose() * op.H * P;
  Eigen::SelfAdjointEigenSolver<MatrixXd> es(0.5 * (Hc + Hc.transpose()), Eigen::EigenvaluesOnly);
  Eigen::SelfAdjointEigenSolver<MatrixXd> eu(op.H, Eigen::EigenvaluesOnly);
  ConstrainedResult r;
  r.min_value = es.eigenvalues()[0];
  const double tol = 1e-6 * eu.eigenvalues().cwiseAbs().maxCoeff();
  for (int i = 0; i < D; ++i)
    if (eu.eigenvalues()[i] > tol) {
      r.smallest_positive = eu.eigenvalues()[i];
      break;
    }
  r.fifth_eigenvalue = eu.eigenvalues()[4];
  return r;
}

inline double rayleigh_quotient(const OperatorMatrix& op, const VectorXd& q) { return q.dot(op.H * q) / q.squaredNorm(); }

// ---------------------------------------------------------------------------
// Pointwise action of H on grid functions

/// H f for a periodic grid function f.
inline CVec apply_H_grid(const ModelCase& mc, double k, double p, const CVec& Q, const CVec& f) {
  const int N = static_cast<int>(f.size());
  const Fourier fr(N);
  const CVec f1 = fr.derivative(f, 1), f2 = fr.derivative(f, 2);
  const double mu = mc.mu(p), g = mc.gamma();
  CVec out(N);
  for (int j = 0; j < N; ++j) {
    const Complex q = Q[j];
    // |Q|^2 f + 2 Q Re(conj(Q) f) is the second variation of |Q|^4 / 4
    const Complex pot = std::norm(q) * f[j] + 2.0 * q * (std::conj(q) * f[j]).real();
    out[j] = -4.0 * k * k * f2[j] - Complex(0.0, 4.0 * p * k) * f1[j] - mu * f[j] - g * pot;
  }
  return out;
}

namespace detail {

inline double max_abs(const CVec& v) {
  double m = 0.0;
  for (const auto& x : v) m = std::max(m, std::abs(x));
  return m;
}

}  // namespace detail

struct KernelSolutions {
  double residual_R1 = 0.0;  // max |H R1| / max |R1| over [0, 2pi)
  double residual_R2 = 0.0;
  double periodicity_defect_R1 = 0.0;  // |R1(2pi) - R1(0)|
  double periodicity_defect_R2 = 0.0;
  double qcond_defect = 0.0;
};

/// R1 = dQ/dk + 2x Q', R2 = dQ/dp + i x Q with x = z/(2k); dQ/dk, dQ/dp from
/// central differences over the (k,p) family with step h.
inline KernelSolutions kernel_ode_solutions(const WaveProfile& prof, double h) {
  const ModelCase& mc = prof.mc;
  const int N = prof.gridN;
  const double k = prof.k(), p = prof.p();
  ProfileOptions po;
  po.escalate = false;
  auto profile_at = [&](double kk, double pp) {
    const double T = kPi / kk;
    const double Psi = pp * T - kPi;
    InvertOptions io;
    io.seed = prof.inv;
    const Invariants inv = invert_TPsi(mc, T, Psi, io);
    WaveProfile q = shoot_profile(mc, inv, N, po);
    apply_phase_shift(q, phase_shift_to(q.wn.Psi, Psi));
    return q.Q;
  };
  const CVec kp = profile_at(k + h, p), km = profile_at(k - h, p);
  const CVec pp = profile_at(k, p + h), pm = profile_at(k, p - h);
  const Fourier fr(N);
  const CVec& Q = prof.Q;
  const CVec d1 = fr.derivative(Q, 1), d2 = fr.derivative(Q, 2);
  CVec dk(N), dp(N), iQ(N);
  for (int j = 0; j < N; ++j) {
    dk[j] = (kp[j] - km[j]) / (2.0 * h);
    dp[j] = (pp[j] - pm[j]) / (2.0 * h);
    iQ[j] = Complex(0.0, 1.0) * Q[j];
  }
  // H(x f) = x H f - 4k f' - 2ip f for real x = z/(2k)
  const CVec Hdk = apply_H_grid(mc, k, p, Q, dk), Hdp = apply_H_grid(mc, k, p, Q, dp);
  const CVec Hd1 = apply_H_grid(mc, k, p, Q, d1), HiQ = apply_H_grid(mc, k, p, Q, iQ);
  const CVec diQ = fr.derivative(iQ, 1);
  double r1 = 0.0, r2 = 0.0, n1 = 0.0, n2 = 0.0;
  for (int j = 0; j < N; ++j) {
    const double x = (2.0 * kPi * j / N) / (2.0 * k);
    const Complex R1 = dk[j] + 2.0 * x * d1[j];
    const Complex R2 = dp[j] + Complex(0.0, x) * Q[j];
    const Complex HR1 = Hdk[j] + 2.0 * (x * Hd1[j] - 4.0 * k * d2[j] - Complex(0.0, 2.0 * p) * d1[j]);
    const Complex HR2 = Hdp[j] + x * HiQ[j] - 4.0 * k * diQ[j] - Complex(0.0, 2.0 * p) * iQ[j];
    r1 = std::max(r1, std::abs(HR1));
    r2 = std::max(r2, std::abs(HR2));
    n1 = std::max(n1, std::abs(R1));
    n2 = std::max(n2, std::abs(R2));
  }
  KernelSolutions ks;
  ks.residual_R1 = r1 / n1;
  ks.residual_R2 = r2 / n2;
  const double xend = kPi / k;
  ks.periodicity_defect_R1 = std::abs(2.0 * xend * d1[0]);
  ks.periodicity_defect_R2 = std::abs(xend * Q[0]);
  ks.qcond_defect = qcond_defect(prof);
  return ks;
}

// ---------------------------------------------------------------------------
// Normal-space form of the Hessian

struct NormalSpace {
  CVec dw, dc;        // d/d omega and d/dc of Q^{omega,c} at (0,0)
  Mat2 H;             // -<H dQ_i, dQ_j>
  double residual_w;  // |H dQ_w - Q| / |Q|
  double residual_c;  // |H dQ_c - iQ'| / |Q'|
};

inline NormalSpace normal_space(const WaveProfile& prof, double h, int gridN = 0) {
  const ModelCase& mc = prof.mc;
  if (gridN == 0) gridN = prof.gridN;
  ProfileOptions po;
  po.escalate = false;
  po.tol = 1e-13;
  auto member = [&](double w, double c) {
    const FamilyMap fm = family_map(mc, prof.inv, w, c);
    WaveProfile q = shoot_profile(mc, {fm.Jp, fm.Ep}, gridN, po);
    apply_phase_shift(q, fm.psi_shift);
    for (auto& v : q.Q) v *= fm.lambda;
    return q.Q;
  };
  const CVec wp = member(h, 0), wm = member(-h, 0), cp = member(0, h), cm = member(0, -h);
  NormalSpace ns;
  ns.dw.resize(gridN);
  ns.dc.resize(gridN);
  for (int j = 0; j < gridN; ++j) {
    ns.dw[j] = (wp[j] - wm[j]) / (2.0 * h);
    ns.dc[j] = (cp[j] - cm[j]) / (2.0 * h);
  }
  const CVec Q = resample(prof.Q, gridN);
  const double k = prof.k(), p = prof.p();
  const CVec Hw = apply_H_grid(mc, k, p, Q, ns.dw), Hc = apply_H_grid(mc, k, p, Q, ns.dc);
  const double dz = 2.0 * kPi / gridN;
  auto inner = [&](const CVec& a, const CVec& b) {
    double s = 0.0;
    for (int j = 0; j < gridN; ++j) s += (std::conj(a[j]) * b[j]).real();
    return s * dz;
  };
  ns.H << -inner(Hw, ns.dw), -inner(Hc, ns.dw), -inner(Hw, ns.dc), -inner(Hc, ns.dc);
  const CVec d1 = Fourier(gridN).derivative(Q, 1);
  double rw = 0.0, rc = 0.0, nq = 0.0, nd = 0.0;
  for (int j = 0; j < gridN; ++j) {
    rw = std::max(rw, std::abs(Hw[j] - Q[j]));
    rc = std::max(rc, std::abs(Hc[j] - Complex(0.0, 1.0) * d1[j]));
    nq = std::max(nq, std::abs(Q[j]));
    nd = std::max(nd, std::abs(d1[j]));
  }
  ns.residual_w = rw / nq;
  ns.residual_c = rc / nd;
  return ns;
}

}  // namespace pwlab
