#pragma once

#include "toric/common.hpp"
#include "toric/polytope.hpp"
#include "toric/potential.hpp"

#include <memory>
#include <vector>

namespace toric {

enum class Route { Rho, X };

/// Fixed (non-adaptive) tensor Gauss-Legendre settings. The recentered
/// rho-space box has half-width truncation_radius standard deviations of the
/// local Gaussian model, so the defaults exceed double-precision needs for
/// interior alpha.
struct QuadratureSpec {
  int nodes_per_axis = 80;
  bool recenter = true;
  Route route = Route::X;
  double truncation_radius = 12.0;

  void validate() const;
};

/// Norm-square Q_{h^k}(alpha) of the monomial section z^alpha. The value is
/// kept both linearly and in log scale; est_error is an absolute error
/// estimate from node-count doubling (zero for the asymptotic Laplace
/// formula). boundary marks the widened-box fallback for boundary alpha.
struct NormingConstant {
  LatticePoint alpha;
  int k = 0;
  double value = 0.0;
  double log_value = 0.0;
  double est_error = 0.0;
  bool boundary = false;
};

/// rho-space route: integral over R^m of e^{<alpha,rho> - k phi(rho)}
/// det Hess phi(rho) d rho. For interior alpha the integrand is recentered
/// at rho* = invert_moment_map(alpha/k); boundary alpha fall back to a
/// widened box centered at rho = 0.
NormingConstant norming_constant_rho(const ToricPotential& phi, const LatticePoint& alpha,
                                     int k, const QuadratureSpec& spec = {});

/// x-space route: integral over P of e^{k(u(x) + <alpha/k - x, grad u(x)>)}.
/// Tensor Gauss-Legendre with per-axis bounds obtained by eliminating the
/// trailing coordinates (Fourier-Motzkin), so every node is interior to P
/// and the integrand stays smooth along each slice. Node data (one
/// moment-map inversion per node) is shared across alpha and k.
class XQuadratureGrid {
 public:
  XQuadratureGrid(const SymplecticPotential& u, const DelzantPolytope& polytope,
                  int nodes_per_axis);

  int nodes_per_axis() const { return nodes_per_axis_; }
  std::size_t node_count() const { return log_weight_.size(); }

  /// log of the x-space integral for (alpha, k), max-shifted.
  double log_integral(const IVec& alpha, long long k) const;

 private:
  int dim_;
  int nodes_per_axis_;
  std::vector<double> log_weight_;  // per node: log of the GL tensor weight
  std::vector<double> phi_at_node_; // per node: phi(rho(x))
  std::vector<Vec> rho_at_node_;    // per node: rho(x) = grad u(x)
};

NormingConstant norming_constant_x(const SymplecticPotential& u, const DelzantPolytope& polytope,
                                   const LatticePoint& alpha, int k,
                                   const QuadratureSpec& spec = {});

/// Steepest-descent approximation
///   Q = k^{-m/2} (2 pi)^{m/2} |det Hess u(alpha/k)|^{-1/2} e^{k u(alpha/k)}
/// valid for interior alpha; requires l_r(alpha/k) > interior_margin for
/// every facet and throws boundary_alpha_error otherwise.
NormingConstant norming_constant_laplace(const SymplecticPotential& u, const LatticePoint& alpha,
                                         int k, double interior_margin = 0.02);

}  // namespace toric
