#pragma once

#include <Eigen/Dense>

#include <cstdint>
#include <functional>
#include <stdexcept>
#include <string>
#include <vector>

namespace toric {

using Vec = Eigen::VectorXd;
using Mat = Eigen::MatrixXd;
using IVec = Eigen::VectorXi;

/// Base class for all errors raised by the library.
class error : public std::runtime_error {
 public:
  using std::runtime_error::runtime_error;
};

class unbounded_domain_error : public error {
 public:
  using error::error;
};

class invalid_polytope_error : public error {
 public:
  using error::error;
};

class non_interior_point_error : public error {
 public:
  using error::error;
};

class non_convergence_error : public error {
 public:
  using error::error;
};

class positivity_violation_error : public error {
 public:
  using error::error;
};

class alpha_outside_polytope_error : public error {
 public:
  using error::error;
};

class boundary_alpha_error : public error {
 public:
  using error::error;
};

class empty_window_error : public error {
 public:
  using error::error;
};

class nonpositive_error : public error {
 public:
  using error::error;
};

class config_error : public error {
 public:
  using error::error;
};

/// Exact rational with normalized sign (den > 0) and gcd(|num|, den) = 1.
/// Used for facet offsets so lattice membership can be decided exactly.
struct Rational {
  long long num = 0;
  long long den = 1;

  Rational() = default;
  Rational(long long n) : num(n), den(1) {}
  Rational(long long n, long long d);

  /// Parses "3", "-2", "1/2", "-3/4" or a plain decimal like "0.25".
  static Rational parse(const std::string& text);

  double to_double() const { return static_cast<double>(num) / static_cast<double>(den); }

  bool operator==(const Rational& o) const { return num == o.num && den == o.den; }
};

Rational operator+(const Rational& a, const Rational& b);

struct GaussLegendreRule {
  std::vector<double> nodes;    // on [-1, 1], ascending
  std::vector<double> weights;  // sum to 2
};

/// Nodes and weights of the n-point Gauss-Legendre rule on [-1,1].
/// Rules are computed once and cached; the reference stays valid for the
/// lifetime of the process.
const GaussLegendreRule& gauss_legendre(int n);

/// Runs body(i) for i in [0, n). With threads <= 0 the hardware concurrency
/// is used. Results must be written to disjoint slots; the decomposition is
/// deterministic in the sense that each index always computes the same value.
void parallel_for(std::size_t n, const std::function<void(std::size_t)>& body, int threads = 0);

/// Centered finite-difference gradient of f at x with step h.
Vec fd_gradient(const std::function<double(const Vec&)>& f, const Vec& x, double h = 1e-5);

/// Centered finite-difference Hessian of f at x with step h.
Mat fd_hessian(const std::function<double(const Vec&)>& f, const Vec& x, double h = 1e-4);

/// log(sum(exp(v))) with the max factored out; -inf entries are skipped.
double log_sum_exp(const std::vector<double>& v);

}  // namespace toric
