#pragma once

#include "toric/bergman.hpp"
#include "toric/common.hpp"

#include <string>
#include <vector>

namespace toric {

/// Gaussian law with density (2 pi)^{-m/2} (det Sigma)^{-1/2}
/// e^{-<Sigma^{-1}(x-mean), x-mean>/2}; this is the unique constant that
/// normalizes to total mass one.
class GaussianLaw {
 public:
  GaussianLaw(Vec mean, Mat covariance);

  int dim() const { return static_cast<int>(mean_.size()); }
  const Vec& mean() const { return mean_; }
  const Mat& covariance() const { return cov_; }
  double density(const Vec& x) const;
  double log_density(const Vec& x) const;

 private:
  Vec mean_;
  Mat cov_;
  Eigen::LLT<Mat> llt_;
  double log_norm_;
};

/// Admissible test functions: both kinds have absolutely integrable Fourier
/// transforms dominated by a radially decreasing integrable function.
struct TestFunction {
  enum class Kind { GaussianBump, CosineGaussian };

  Kind kind = Kind::GaussianBump;
  Vec center;   // a
  double width = 1.0;  // s
  Vec freq;     // xi, used by the cosine kind

  /// gaussian-bump:    e^{-|x-a|^2 / (2 s^2)}
  /// cosine-gaussian:  cos(<xi, x-a>) e^{-|x-a|^2 / (2 s^2)}
  double operator()(const Vec& x) const;
  std::string label() const;

  static TestFunction bump(Vec center, double width);
  static TestFunction cosine(Vec center, double width, Vec freq);
};

/// Closed-form integral of f against the Gaussian law (product-of-Gaussians
/// formula; the cosine kind goes through the complex completion of squares).
double gaussian_integral(const TestFunction& f, const GaussianLaw& gamma);

/// <f, D_{sqrt k} mu~_k^z> as the finite atom sum.
double integrate_against_dilated(const TestFunction& f, const std::vector<DilatedAtom>& dilated);

/// |<f, dilated measure> - integral of f against gamma_{0, Hess phi(rho_z)}|.
double clt_error(const BergmanModel& model, const BasePoint& z, int k, const TestFunction& f);
double clt_error(const BergmanModel& model, const BergmanMeasure& measure, const TestFunction& f);

/// Local limit law discrepancy: max over lattice alpha with
/// |alpha/k - mu_h(z)| <= 2/sqrt(k) of
/// |normalized_weight(alpha) / (k^{-m/2} gamma(sqrt k (alpha/k - mu))) - 1|.
double llt_error(const BergmanModel& model, const BasePoint& z, int k);
double llt_error(const BergmanModel& model, const BergmanMeasure& measure);

/// max over the grid of |char_fn(t) - e^{-<H t, t>/2}|, H = Hess phi(rho_z).
double charfn_error(const BergmanModel& model, const BasePoint& z, int k,
                    const std::vector<Vec>& t_grid);
double charfn_error(const BergmanModel& model, const BergmanMeasure& measure,
                    const std::vector<Vec>& t_grid);

/// Default grid: per-axis uniform ticks, restricted to |t| <= radius.
std::vector<Vec> default_t_grid(int m, double radius = 3.0);

/// Default family: five Gaussian bumps (widths 0.5/1/2, centers 0 and
/// 0.7 e_1) and four cosine-Gaussians (frequencies up to |xi| = 2).
std::vector<TestFunction> default_test_family(int m);

struct ConvergenceReport {
  std::vector<int> ks;
  std::vector<double> errors;
  double fitted_slope = 0.0;
  double intercept = 0.0;   // of the least-squares line in (log k, log err)
  double r_squared = 0.0;
};

/// Ordinary least squares on (log k, log error). Requires at least four
/// points and strictly positive errors.
ConvergenceReport fit_rate(const std::vector<int>& ks, const std::vector<double>& errors);

}  // namespace toric
