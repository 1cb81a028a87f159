#pragma once

#include "toric/common.hpp"
#include "toric/polytope.hpp"
#include "toric/potential.hpp"
#include "toric/quadrature.hpp"

#include <complex>
#include <map>
#include <memory>
#include <mutex>
#include <vector>

namespace toric {

struct MeasureAtom {
  LatticePoint alpha;
  double weight = 0.0;      // P_{h^k}(alpha, z)
  double log_weight = 0.0;
};

/// Lattice measure mu_k^z: atoms at alpha/k for alpha in kP with weights
/// e^{<alpha, rho_z> - k phi(rho_z)} / Q_{h^k}(alpha); density is the sum of
/// all weights (the density of states Pi_{h^k}(z)).
class BergmanMeasure {
 public:
  BergmanMeasure(BasePoint z, int k, Vec moment_image, std::vector<MeasureAtom> atoms,
                 double density, double log_density);

  const BasePoint& base_point() const { return z_; }
  int level() const { return k_; }
  int dim() const { return static_cast<int>(moment_image_.size()); }
  /// mu_h(z), cached at construction.
  const Vec& moment_image() const { return moment_image_; }
  const std::vector<MeasureAtom>& atoms() const { return atoms_; }
  double density() const { return density_; }
  double log_density() const { return log_density_; }
  double normalized_weight(std::size_t i) const {
    return std::exp(atoms_[i].log_weight - log_density_);
  }

 private:
  BasePoint z_;
  int k_;
  Vec moment_image_;
  std::vector<MeasureAtom> atoms_;
  double density_;
  double log_density_;
};

/// Potential + quadrature policy + caches. Norming constants are cached per
/// (k, alpha) keyed by exact integer data, so measures at many base points
/// reuse the expensive integrals. Safe for concurrent use.
class BergmanModel {
 public:
  explicit BergmanModel(ToricPotential phi, QuadratureSpec spec = {});

  BergmanModel(const BergmanModel&) = delete;
  BergmanModel& operator=(const BergmanModel&) = delete;

  int dim() const { return phi_.dim(); }
  const ToricPotential& potential() const { return phi_; }
  const SymplecticPotential& symplectic() const { return u_; }
  const DelzantPolytope& polytope() const { return phi_.polytope(); }
  const QuadratureSpec& quadrature_spec() const { return spec_; }

  /// Cached log Q_{h^k}(alpha) along the route selected by the spec.
  double log_norming_constant(const LatticePoint& alpha, int k) const;

  /// Lattice points of kP, cached per k.
  const std::vector<LatticePoint>& lattice_points(int k) const;

  /// Precomputes Q for every alpha in kP (parallel over alpha).
  void prefetch_norming_constants(int k, int threads = 0) const;

  double weight(const LatticePoint& alpha, int k, const BasePoint& z) const;
  BergmanMeasure build_measure(int k, const BasePoint& z, int threads = 0) const;

 private:
  const XQuadratureGrid& x_grid(int nodes) const;
  double compute_log_q(const IVec& alpha, int k) const;

  ToricPotential phi_;
  SymplecticPotential u_;
  QuadratureSpec spec_;

  mutable std::mutex mutex_;
  mutable std::map<int, std::shared_ptr<const XQuadratureGrid>> x_grids_;
  mutable std::map<std::pair<int, std::vector<int>>, double> log_q_;
  mutable std::map<int, std::shared_ptr<const std::vector<LatticePoint>>> lattice_;
};

double weight(const BergmanModel& model, const LatticePoint& alpha, int k, const BasePoint& z);
BergmanMeasure build_measure(const BergmanModel& model, int k, const BasePoint& z);

double density_of_states(const BergmanMeasure& measure);

struct MomentSummary {
  Vec mean;
  Mat covariance;
};

MomentSummary moments(const BergmanMeasure& measure);

struct DilatedAtom {
  Vec point;   // sqrt(k) (alpha/k - mu_h(z))
  double prob; // weight / density
};

/// Recentered and sqrt(k)-dilated measure D_{sqrt k} mu~_k^z.
std::vector<DilatedAtom> recentered_dilated(const BergmanMeasure& measure,
                                            const ToricPotential& phi);

/// Exact torus characteristic function of the dilated measure,
///   Pi^{-1} sum_alpha w_alpha e^{-i <t/sqrt k, alpha>} e^{i sqrt k <mu_h(z), t>}
/// = E e^{-i<t, X>} with X the dilated atom. Tends to e^{-<H_z t, t>/2}.
std::complex<double> char_fn(const BergmanMeasure& measure, const ToricPotential& phi,
                             const Vec& t);

}  // namespace toric
