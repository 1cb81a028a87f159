#pragma once

#include "toric/common.hpp"
#include "toric/polytope.hpp"

#include <functional>
#include <string>
#include <vector>

namespace toric {

/// Base point z = e^{rho/2 + i theta} of the open orbit; only rho matters
/// because every quantity here is torus invariant.
struct BasePoint {
  Vec rho;

  BasePoint() = default;
  explicit BasePoint(Vec r) : rho(std::move(r)) {}
};

/// Strictly convex torus-invariant potential phi(rho) on R^m together with
/// its gradient (the moment map), Hessian, and the moment polytope equal to
/// the closure of the gradient range.
class ToricPotential {
 public:
  using ValueFn = std::function<double(const Vec&)>;
  using GradFn = std::function<Vec(const Vec&)>;
  using HessFn = std::function<Mat(const Vec&)>;

  ToricPotential(int dim, ValueFn value, GradFn grad, HessFn hess, DelzantPolytope polytope);

  int dim() const { return dim_; }
  double value(const Vec& rho) const { return value_(rho); }
  Vec gradient(const Vec& rho) const { return grad_(rho); }
  Mat hessian(const Vec& rho) const { return hess_(rho); }
  const DelzantPolytope& polytope() const { return polytope_; }

 private:
  int dim_;
  ValueFn value_;
  GradFn grad_;
  HessFn hess_;
  DelzantPolytope polytope_;
};

/// Fubini-Study potential phi(rho) = log(1 + sum_j e^{rho_j}) of CP^m with
/// the unit simplex as moment polytope.
ToricPotential fubini_study(int m);

/// Sum of the factors on the product of their domains; the polytope is the
/// product and gradient/Hessian are block diagonal.
ToricPotential product_potential(const std::vector<ToricPotential>& factors);

/// Smooth perturbation direction psi(rho) with optional analytic
/// derivatives; missing derivatives fall back to central differences.
struct BumpFunction {
  std::string name;
  ToricPotential::ValueFn value;
  ToricPotential::GradFn grad;   // may be empty
  ToricPotential::HessFn hess;   // may be empty
};

/// Named bumps: "gaussian" (e^{-|rho|^2/2}) and "invquad" (1/(1+|rho|^2)).
BumpFunction bump_by_name(const std::string& id, int m);

/// phi + eps * psi. Positive definiteness of the perturbed Hessian is
/// validated on a uniform grid over [-grid_radius, grid_radius]^m; the
/// constructor throws positivity_violation_error when the check fails.
/// The grid check is a soundness caveat, not a proof of global convexity.
ToricPotential perturbed_potential(const ToricPotential& base, double eps,
                                   const BumpFunction& bump, double grid_radius = 12.0,
                                   int grid_points_per_axis = 25);

/// Moment map mu_h(z) = grad phi(rho).
Vec moment_map(const ToricPotential& phi, const Vec& rho);

/// Solves grad phi(rho) = x for interior x by damped Newton descent of the
/// strictly convex objective phi(rho) - <x, rho> from rho = 0. The default
/// tolerance is tighter than the guaranteed 1e-10 so that round trips
/// through ill-conditioned Hessians stay below 1e-8.
/// Throws non_interior_point_error when x is not interior with margin 1e-12
/// and non_convergence_error after max_iter iterations.
Vec invert_moment_map(const ToricPotential& phi, const Vec& x, double tol = 1e-12,
                      int max_iter = 200);

/// Legendre dual u(x) = <x, rho(x)> - phi(rho(x)) on the polytope interior.
/// grad u(x) = rho(x) and Hess u(x) = (Hess phi(rho(x)))^{-1}; everything is
/// computed through the moment-map inversion, never by a separate formula.
class SymplecticPotential {
 public:
  explicit SymplecticPotential(ToricPotential phi);

  int dim() const { return phi_.dim(); }
  double value(const Vec& x) const;
  Vec gradient(const Vec& x) const;
  Mat hessian(const Vec& x) const;
  const ToricPotential& primal() const { return phi_; }
  const DelzantPolytope& polytope() const { return phi_.polytope(); }

 private:
  ToricPotential phi_;
};

SymplecticPotential legendre_dual(const ToricPotential& phi);

/// Rate function I^z(x) = u(x) - <x, rho_z> + phi(rho_z); convex,
/// nonnegative, and zero exactly at x = mu_h(z).
double rate_function(const ToricPotential& phi, const BasePoint& z, const Vec& x);

}  // namespace toric
