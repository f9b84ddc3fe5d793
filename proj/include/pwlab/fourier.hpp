#pragma once

// Periodic samples on z_j = 2 pi j / n and their Fourier coefficients
// c_m with Q(z) = sum_m c_m e^{i m z}, m = -n/2 .. n/2 - 1.

#include <complex>
#include <vector>

#include <unsupported/Eigen/FFT>

namespace pwlab {

using Complex = std::complex<double>;
using CVec = std::vector<Complex>;

/// Signed wave number of FFT slot j; the Nyquist slot maps to -n/2.
inline int mode_of(int j, int n) { return j < n / 2 ? j : j - n; }

class Fourier {
 public:
  explicit Fourier(int n) : n_(n) {}

  int size() const { return n_; }

  CVec forward(const CVec& q) const {
    CVec c(n_);
    fft_.fwd(c, q);
    const double s = 1.0 / n_;
    for (auto& v : c) v *= s;
    return c;
  }

  CVec inverse(const CVec& c) const {
    CVec q(n_);
    fft_.inv(q, c);
    for (auto& v : q) v *= static_cast<double>(n_);
    return q;
  }

  /// d^order/dz^order by spectral differentiation. Odd orders drop the
  /// Nyquist mode so that real data stays real.
  CVec derivative(const CVec& q, int order) const {
    CVec c = forward(q);
    for (int j = 0; j < n_; ++j) {
      const int m = mode_of(j, n_);
      if (order % 2 == 1 && j == n_ / 2) {
        c[j] = 0.0;
        continue;
      }
      c[j] *= std::pow(Complex(0.0, m), order);
    }
    return inverse(c);
  }

 private:
  int n_;
  mutable Eigen::FFT<double> fft_;
};

/// Largest |c_m| with |m| >= from, relative to the largest coefficient.
inline double spectral_tail(const CVec& coeffs, int from) {
  const int n = static_cast<int>(coeffs.size());
  double top = 0.0, tail = 0.0;
  for (int j = 0; j < n; ++j) {
    const double a = std::abs(coeffs[j]);
    top = std::max(top, a);
    if (std::abs(mode_of(j, n)) >= from) tail = std::max(tail, a);
  }
  return top > 0.0 ? tail / top : 0.0;
}

/// Spectral resampling to m points (zero padding or truncation).
inline CVec resample(const CVec& q, int m) {
  const int n = static_cast<int>(q.size());
  if (n == m) return q;
  const CVec c = Fourier(n).forward(q);
  CVec d(m, 0.0);
  const int half = std::min(n, m) / 2;
  for (int j = 0; j < n; ++j) {
    const int k = mode_of(j, n);
    if (k >= half || k < -half) continue;
    d[k >= 0 ? k : k + m] = c[j];
  }
  return Fourier(m).inverse(d);
}

}  // namespace pwlab
