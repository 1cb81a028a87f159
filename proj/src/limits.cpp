#include "toric/limits.hpp"

#include <cmath>
#include <sstream>

namespace toric {

GaussianLaw::GaussianLaw(Vec mean, Mat covariance)
    : mean_(std::move(mean)), cov_(std::move(covariance)) {
  if (cov_.rows() != mean_.size() || cov_.cols() != mean_.size())
    throw error("GaussianLaw: covariance shape does not match mean");
  llt_ = cov_.llt();
  if (llt_.info() != Eigen::Success)
    throw error("GaussianLaw: covariance is not positive definite");
  double log_det = 0.0;
  for (int i = 0; i < cov_.rows(); ++i) log_det += 2.0 * std::log(llt_.matrixL()(i, i));
  log_norm_ = -0.5 * mean_.size() * std::log(2.0 * M_PI) - 0.5 * log_det;
}

double GaussianLaw::log_density(const Vec& x) const {
  Vec d = x - mean_;
  return log_norm_ - 0.5 * d.dot(llt_.solve(d));
}

double GaussianLaw::density(const Vec& x) const { return std::exp(log_density(x)); }

double TestFunction::operator()(const Vec& x) const {
  Vec d = x - center;
  double bump = std::exp(-0.5 * d.squaredNorm() / (width * width));
  if (kind == Kind::GaussianBump) return bump;
  return std::cos(freq.dot(d)) * bump;
}

std::string TestFunction::label() const {
  std::ostringstream os;
  if (kind == Kind::GaussianBump)
    os << "bump(s=" << width << ",a=" << center.transpose() << ")";
  else
    os << "cos(s=" << width << ",a=" << center.transpose() << ",xi=" << freq.transpose() << ")";
  return os.str();
}

TestFunction TestFunction::bump(Vec center, double width) {
  TestFunction f;
  f.kind = Kind::GaussianBump;
  f.center = std::move(center);
  f.width = width;
  f.freq = Vec::Zero(f.center.size());
  return f;
}

TestFunction TestFunction::cosine(Vec center, double width, Vec freq) {
  TestFunction f;
  f.kind = Kind::CosineGaussian;
  f.center = std::move(center);
  f.width = width;
  f.freq = std::move(freq);
  return f;
}

double gaussian_integral(const TestFunction& f, const GaussianLaw& gamma) {
  // With B = I/s^2, c = a - mean, M = Sigma^{-1} + B:
  //   int gamma(x) e^{-(x-a)' B (x-a)/2 + i <xi, x-a>} dx
  //     = det(I + Sigma B)^{-1/2}
  //       exp( (Bc + i xi)' M^{-1} (Bc + i xi)/2 - c' B c/2 - i <xi, c> );
  // the test function is the real part of the integrand.
  const int m = gamma.dim();
  const Mat& sigma = gamma.covariance();
  const double b = 1.0 / (f.width * f.width);
  Vec c = f.center - gamma.mean();
  Mat sigma_inv = sigma.llt().solve(Mat::Identity(m, m));
  Mat big_m = sigma_inv + b * Mat::Identity(m, m);
  Eigen::LLT<Mat> mllt(big_m);

  Vec bc = b * c;
  Vec mi_bc = mllt.solve(bc);
  double det_factor = (Mat::Identity(m, m) + b * sigma).determinant();

  if (f.kind == TestFunction::Kind::GaussianBump) {
    double expo = 0.5 * bc.dot(mi_bc) - 0.5 * b * c.squaredNorm();
    return std::exp(expo) / std::sqrt(det_factor);
  }
  Vec mi_xi = mllt.solve(f.freq);
  double re_quad = bc.dot(mi_bc) - f.freq.dot(mi_xi);
  double im_quad = 2.0 * bc.dot(mi_xi);
  double expo = 0.5 * re_quad - 0.5 * b * c.squaredNorm();
  double phase = 0.5 * im_quad - f.freq.dot(c);
  return std::exp(expo) * std::cos(phase) / std::sqrt(det_factor);
}

double integrate_against_dilated(const TestFunction& f, const std::vector<DilatedAtom>& dilated) {
  double s = 0.0;
  for (const DilatedAtom& atom : dilated) s += f(atom.point) * atom.prob;
  return s;
}

double clt_error(const BergmanModel& model, const BergmanMeasure& measure,
                 const TestFunction& f) {
  auto dilated = recentered_dilated(measure, model.potential());
  Mat h = model.potential().hessian(measure.base_point().rho);
  GaussianLaw gamma(Vec::Zero(model.dim()), h);
  return std::abs(integrate_against_dilated(f, dilated) - gaussian_integral(f, gamma));
}

double clt_error(const BergmanModel& model, const BasePoint& z, int k, const TestFunction& f) {
  return clt_error(model, model.build_measure(k, z), f);
}

double llt_error(const BergmanModel& model, const BergmanMeasure& measure) {
  const int m = model.dim();
  const double k = measure.level();
  const double sqrt_k = std::sqrt(k);
  const Vec& mu = measure.moment_image();
  Mat h = model.potential().hessian(measure.base_point().rho);
  GaussianLaw gamma(Vec::Zero(m), h);
  const double window = 2.0 / sqrt_k;
  double worst = -1.0;
  for (std::size_t i = 0; i < measure.atoms().size(); ++i) {
    Vec d = measure.atoms()[i].alpha.coords.cast<double>() / k - mu;
    if (d.norm() > window) continue;
    double target = std::pow(k, -0.5 * m) * gamma.density(sqrt_k * d);
    double ratio_err = std::abs(measure.normalized_weight(i) / target - 1.0);
    if (ratio_err > worst) worst = ratio_err;
  }
  if (worst < 0.0)
    throw empty_window_error("llt_error: no lattice point within 2/sqrt(k) of mu_h(z)");
  return worst;
}

double llt_error(const BergmanModel& model, const BasePoint& z, int k) {
  return llt_error(model, model.build_measure(k, z));
}

double charfn_error(const BergmanModel& model, const BergmanMeasure& measure,
                    const std::vector<Vec>& t_grid) {
  Mat h = model.potential().hessian(measure.base_point().rho);
  std::vector<double> errs(t_grid.size());
  parallel_for(t_grid.size(), [&](std::size_t i) {
    const Vec& t = t_grid[i];
    std::complex<double> value = char_fn(measure, model.potential(), t);
    double target = std::exp(-0.5 * t.dot(h * t));
    errs[i] = std::abs(value - std::complex<double>(target, 0.0));
  });
  double worst = 0.0;
  for (double e : errs) worst = std::max(worst, e);
  return worst;
}

double charfn_error(const BergmanModel& model, const BasePoint& z, int k,
                    const std::vector<Vec>& t_grid) {
  return charfn_error(model, model.build_measure(k, z), t_grid);
}

std::vector<Vec> default_t_grid(int m, double radius) {
  int per_axis = m == 1 ? 25 : (m == 2 ? 13 : 7);
  std::vector<double> ticks(per_axis);
  for (int i = 0; i < per_axis; ++i)
    ticks[i] = -radius + 2.0 * radius * i / (per_axis - 1);
  std::vector<Vec> grid;
  Vec t(m);
  std::function<void(int)> rec = [&](int axis) {
    if (axis == m) {
      if (t.norm() <= radius + 1e-12) grid.push_back(t);
      return;
    }
    for (double v : ticks) {
      t(axis) = v;
      rec(axis + 1);
    }
  };
  rec(0);
  return grid;
}

std::vector<TestFunction> default_test_family(int m) {
  Vec zero = Vec::Zero(m);
  Vec shift = Vec::Zero(m);
  shift(0) = 0.7;
  std::vector<TestFunction> family;
  family.push_back(TestFunction::bump(zero, 0.5));
  family.push_back(TestFunction::bump(zero, 1.0));
  family.push_back(TestFunction::bump(zero, 2.0));
  family.push_back(TestFunction::bump(shift, 1.0));
  family.push_back(TestFunction::bump(shift, 0.5));
  for (double xi : {0.5, 1.0, 1.5, 2.0}) {
    Vec f = Vec::Zero(m);
    f(0) = xi;
    family.push_back(TestFunction::cosine(shift, 1.0, f));
  }
  return family;
}

ConvergenceReport fit_rate(const std::vector<int>& ks, const std::vector<double>& errors) {
  if (ks.size() != errors.size()) throw error("fit_rate: ks and errors differ in length");
  if (ks.size() < 4) throw error("fit_rate: need at least 4 points");
  for (double e : errors)
    if (!(e > 0.0)) throw nonpositive_error("fit_rate: errors must be strictly positive");

  const std::size_t n = ks.size();
  double sx = 0.0, sy = 0.0;
  std::vector<double> xs(n), ys(n);
  for (std::size_t i = 0; i < n; ++i) {
    xs[i] = std::log(static_cast<double>(ks[i]));
    ys[i] = std::log(errors[i]);
    sx += xs[i];
    sy += ys[i];
  }
  const double mx = sx / n, my = sy / n;
  double sxx = 0.0, sxy = 0.0, syy = 0.0;
  for (std::size_t i = 0; i < n; ++i) {
    sxx += (xs[i] - mx) * (xs[i] - mx);
    sxy += (xs[i] - mx) * (ys[i] - my);
    syy += (ys[i] - my) * (ys[i] - my);
  }
  if (sxx == 0.0) throw error("fit_rate: k values must not all coincide");
  ConvergenceReport report;
  report.ks = ks;
  report.errors = errors;
  report.fitted_slope = sxy / sxx;
  report.intercept = my - report.fitted_slope * mx;
  report.r_squared = syy == 0.0 ? 1.0 : (sxy * sxy) / (sxx * syy);
  return report;
}

}  // namespace toric
