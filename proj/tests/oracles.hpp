// Test-side oracles, independent of the library implementation paths they
// check: Beta/binomial/multinomial closed forms, stars-and-bars counts, the
// Fubini-Study Legendre transform, and a plain Simpson integrator.
#pragma once

#include <cmath>
#include <complex>
#include <cstdint>
#include <functional>
#include <vector>

namespace oracle {

inline double log_beta(double a, double b) {
  return std::lgamma(a) + std::lgamma(b) - std::lgamma(a + b);
}

// B(alpha+1, k-alpha+1) = 1/((k+1) C(k,alpha)): FS(1) norming constant.
inline double beta_norming(int alpha, int k) {
  return std::exp(log_beta(alpha + 1.0, k - alpha + 1.0));
}

inline double log_binomial_coeff(int n, int k) {
  return std::lgamma(n + 1.0) - std::lgamma(k + 1.0) - std::lgamma(n - k + 1.0);
}

inline double binomial_pmf(int n, int k, double p) {
  return std::exp(log_binomial_coeff(n, k) + k * std::log(p) + (n - k) * std::log1p(-p));
}

// Binomial count of lattice points of the dilated unit m-simplex.
inline std::int64_t stars_and_bars(int k, int m) {
  std::int64_t r = 1;
  for (int i = 1; i <= m; ++i) r = r * (k + i) / i;
  return r;
}

// Characteristic function E e^{-i t Y} of Y = sqrt(k)(X/k - p), X ~ Bin(k,p).
inline std::complex<double> binomial_char_fn(int k, double p, double t) {
  const std::complex<double> i(0.0, 1.0);
  double theta = t / std::sqrt(static_cast<double>(k));
  std::complex<double> base = (1.0 - p) + p * std::exp(-i * theta);
  return std::pow(base, k) * std::exp(i * t * std::sqrt(static_cast<double>(k)) * p);
}

// Trinomial pmf at (a1, a2) with a3 = k - a1 - a2 for CP^2 checks.
inline double multinomial_pmf(int k, int a1, int a2, double p1, double p2) {
  int a3 = k - a1 - a2;
  double p3 = 1.0 - p1 - p2;
  double lg = std::lgamma(k + 1.0) - std::lgamma(a1 + 1.0) - std::lgamma(a2 + 1.0) -
              std::lgamma(a3 + 1.0);
  return std::exp(lg + a1 * std::log(p1) + a2 * std::log(p2) + a3 * std::log(p3));
}

// Dirichlet integral over the unit 2-simplex: Q(alpha) = a1! a2! a3! / (k+2)!.
inline double dirichlet_norming(int k, int a1, int a2) {
  int a3 = k - a1 - a2;
  return std::exp(std::lgamma(a1 + 1.0) + std::lgamma(a2 + 1.0) + std::lgamma(a3 + 1.0) -
                  std::lgamma(k + 3.0));
}

// Legendre transform of log(1 + e^rho): u(x) = x log x + (1-x) log(1-x).
inline double fs1_symplectic(double x) {
  auto xlogx = [](double v) { return v <= 0.0 ? 0.0 : v * std::log(v); };
  return xlogx(x) + xlogx(1.0 - x);
}

// Composite Simpson rule on [a, b].
inline double simpson(const std::function<double(double)>& f, double a, double b, int n) {
  if (n % 2 == 1) ++n;
  double h = (b - a) / n;
  double s = f(a) + f(b);
  for (int i = 1; i < n; ++i) s += f(a + i * h) * (i % 2 == 1 ? 4.0 : 2.0);
  return s * h / 3.0;
}

inline double simpson2d(const std::function<double(double, double)>& f, double ax, double bx,
                        double ay, double by, int n) {
  return simpson(
      [&](double x) {
        return simpson([&](double y) { return f(x, y); }, ay, by, n);
      },
      ax, bx, n);
}

}  // namespace oracle
