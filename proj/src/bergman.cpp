#include "toric/bergman.hpp"

#include <cmath>
#include <sstream>

namespace toric {

BergmanMeasure::BergmanMeasure(BasePoint z, int k, Vec moment_image,
                               std::vector<MeasureAtom> atoms, double density,
                               double log_density)
    : z_(std::move(z)),
      k_(k),
      moment_image_(std::move(moment_image)),
      atoms_(std::move(atoms)),
      density_(density),
      log_density_(log_density) {}

BergmanModel::BergmanModel(ToricPotential phi, QuadratureSpec spec)
    : phi_(std::move(phi)), u_(phi_), spec_(spec) {
  spec_.validate();
}

const XQuadratureGrid& BergmanModel::x_grid(int nodes) const {
  {
    std::lock_guard<std::mutex> lock(mutex_);
    auto it = x_grids_.find(nodes);
    if (it != x_grids_.end()) return *it->second;
  }
  auto grid = std::make_shared<const XQuadratureGrid>(u_, phi_.polytope(), nodes);
  std::lock_guard<std::mutex> lock(mutex_);
  auto [it, inserted] = x_grids_.emplace(nodes, std::move(grid));
  (void)inserted;
  return *it->second;
}

double BergmanModel::compute_log_q(const IVec& alpha, int k) const {
  if (spec_.route == Route::X) {
    return x_grid(spec_.nodes_per_axis).log_integral(alpha, k);
  }
  return norming_constant_rho(phi_, LatticePoint(alpha), k, spec_).log_value;
}

double BergmanModel::log_norming_constant(const LatticePoint& alpha, int k) const {
  if (!phi_.polytope().lattice_contains(alpha.coords, k))
    throw alpha_outside_polytope_error("weight: alpha is outside kP");
  std::vector<int> key_alpha(alpha.coords.data(), alpha.coords.data() + alpha.coords.size());
  auto key = std::make_pair(k, std::move(key_alpha));
  {
    std::lock_guard<std::mutex> lock(mutex_);
    auto it = log_q_.find(key);
    if (it != log_q_.end()) return it->second;
  }
  double log_q = compute_log_q(alpha.coords, k);
  std::lock_guard<std::mutex> lock(mutex_);
  auto [it, inserted] = log_q_.emplace(std::move(key), log_q);
  (void)inserted;
  return it->second;
}

const std::vector<LatticePoint>& BergmanModel::lattice_points(int k) const {
  {
    std::lock_guard<std::mutex> lock(mutex_);
    auto it = lattice_.find(k);
    if (it != lattice_.end()) return *it->second;
  }
  auto points = std::make_shared<const std::vector<LatticePoint>>(phi_.polytope().lattice_points(k));
  std::lock_guard<std::mutex> lock(mutex_);
  auto [it, inserted] = lattice_.emplace(k, std::move(points));
  (void)inserted;
  return *it->second;
}

void BergmanModel::prefetch_norming_constants(int k, int threads) const {
  const std::vector<LatticePoint>& points = lattice_points(k);
  std::vector<std::pair<int, std::vector<int>>> keys(points.size());
  std::vector<double> values(points.size());
  std::vector<char> missing(points.size(), 0);
  {
    std::lock_guard<std::mutex> lock(mutex_);
    for (std::size_t i = 0; i < points.size(); ++i) {
      const IVec& a = points[i].coords;
      keys[i] = {k, std::vector<int>(a.data(), a.data() + a.size())};
      missing[i] = log_q_.find(keys[i]) == log_q_.end() ? 1 : 0;
    }
  }
  if (spec_.route == Route::X) x_grid(spec_.nodes_per_axis);  // build once, outside the loop
  parallel_for(
      points.size(),
      [&](std::size_t i) {
        if (missing[i]) values[i] = compute_log_q(points[i].coords, k);
      },
      threads);
  std::lock_guard<std::mutex> lock(mutex_);
  for (std::size_t i = 0; i < points.size(); ++i)
    if (missing[i]) log_q_.emplace(std::move(keys[i]), values[i]);
}

double BergmanModel::weight(const LatticePoint& alpha, int k, const BasePoint& z) const {
  double log_q = log_norming_constant(alpha, k);
  double log_w = alpha.coords.cast<double>().dot(z.rho) - k * phi_.value(z.rho) - log_q;
  return std::exp(log_w);
}

BergmanMeasure BergmanModel::build_measure(int k, const BasePoint& z, int threads) const {
  if (k < 1) throw error("build_measure: dilation level must be >= 1");
  if (z.rho.size() != phi_.dim()) throw error("build_measure: base point has wrong dimension");
  Vec mu = phi_.gradient(z.rho);
  if (!phi_.polytope().is_interior(mu, 0.0))
    throw non_interior_point_error("build_measure: moment image of z is not interior");

  prefetch_norming_constants(k, threads);
  const std::vector<LatticePoint>& points = lattice_points(k);
  const double k_phi = k * phi_.value(z.rho);

  std::vector<MeasureAtom> atoms(points.size());
  std::vector<double> log_w(points.size());
  for (std::size_t i = 0; i < points.size(); ++i) {
    const LatticePoint& a = points[i];
    double lw = a.coords.cast<double>().dot(z.rho) - k_phi - log_norming_constant(a, k);
    atoms[i] = MeasureAtom{a, std::exp(lw), lw};
    log_w[i] = lw;
  }
  double log_density = log_sum_exp(log_w);
  return BergmanMeasure(z, k, std::move(mu), std::move(atoms), std::exp(log_density),
                        log_density);
}

double weight(const BergmanModel& model, const LatticePoint& alpha, int k, const BasePoint& z) {
  return model.weight(alpha, k, z);
}

BergmanMeasure build_measure(const BergmanModel& model, int k, const BasePoint& z) {
  return model.build_measure(k, z);
}

double density_of_states(const BergmanMeasure& measure) { return measure.density(); }

MomentSummary moments(const BergmanMeasure& measure) {
  const int m = measure.dim();
  const double k = measure.level();
  Vec mean = Vec::Zero(m);
  for (std::size_t i = 0; i < measure.atoms().size(); ++i)
    mean += measure.normalized_weight(i) * (measure.atoms()[i].alpha.coords.cast<double>() / k);
  Mat cov = Mat::Zero(m, m);
  for (std::size_t i = 0; i < measure.atoms().size(); ++i) {
    Vec d = measure.atoms()[i].alpha.coords.cast<double>() / k - mean;
    cov += measure.normalized_weight(i) * (d * d.transpose());
  }
  return MomentSummary{std::move(mean), std::move(cov)};
}

std::vector<DilatedAtom> recentered_dilated(const BergmanMeasure& measure,
                                            const ToricPotential& phi) {
  const double k = measure.level();
  const double sqrt_k = std::sqrt(k);
  Vec mu = phi.gradient(measure.base_point().rho);
  std::vector<DilatedAtom> out(measure.atoms().size());
  for (std::size_t i = 0; i < measure.atoms().size(); ++i) {
    out[i].point = sqrt_k * (measure.atoms()[i].alpha.coords.cast<double>() / k - mu);
    out[i].prob = measure.normalized_weight(i);
  }
  return out;
}

std::complex<double> char_fn(const BergmanMeasure& measure, const ToricPotential& phi,
                             const Vec& t) {
  const double k = measure.level();
  const double sqrt_k = std::sqrt(k);
  Vec mu = phi.gradient(measure.base_point().rho);
  double re = 0.0, im = 0.0;
  for (std::size_t i = 0; i < measure.atoms().size(); ++i) {
    Vec y = sqrt_k * (measure.atoms()[i].alpha.coords.cast<double>() / k - mu);
    double phase = -t.dot(y);  // E e^{-i<t, X>} convention
    double p = measure.normalized_weight(i);
    re += p * std::cos(phase);
    im += p * std::sin(phase);
  }
  return {re, im};
}

}  // namespace toric
