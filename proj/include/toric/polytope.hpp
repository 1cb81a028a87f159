#pragma once

#include "toric/common.hpp"

#include <utility>
#include <vector>

namespace toric {

/// One facet inequality l_r(x) = <x, normal> - offset >= 0 with a primitive
/// integer normal and a rational offset.
struct Facet {
  IVec normal;
  Rational offset;
};

/// Integer point alpha of a dilate kP.
struct LatticePoint {
  IVec coords;

  LatticePoint() = default;
  explicit LatticePoint(IVec c) : coords(std::move(c)) {}
  int dim() const { return static_cast<int>(coords.size()); }
  bool operator==(const LatticePoint& o) const { return coords == o.coords; }
};

/// Delzant polytope P = {x : l_r(x) >= 0 for all r} given by facet
/// inequalities. Construction verifies that P is bounded with nonempty
/// interior by enumerating vertex candidates and recession directions.
/// The Delzant vertex condition itself is not checked; the shipped
/// polytopes (simplices, cubes, products) satisfy it by construction.
class DelzantPolytope {
 public:
  DelzantPolytope(int dim, std::vector<Facet> facets);

  static DelzantPolytope unit_simplex(int m);
  static DelzantPolytope unit_cube(int m);
  static DelzantPolytope product(const DelzantPolytope& a, const DelzantPolytope& b);

  int dim() const { return dim_; }
  const std::vector<Facet>& facets() const { return facets_; }

  /// l_r(x) in floating point.
  double facet_value(std::size_t r, const Vec& x) const;

  /// true iff l_r(x) >= -tol for all r.
  bool contains(const Vec& x, double tol = 0.0) const;

  /// true iff l_r(x) > margin for all r.
  bool is_interior(const Vec& x, double margin = 0.0) const;

  /// Exact membership of alpha in kP using integer/rational arithmetic.
  bool lattice_contains(const IVec& alpha, long long k) const;

  /// Exact strict interiority of alpha/k.
  bool lattice_interior(const IVec& alpha, long long k) const;

  /// Axis-aligned box [lo, hi] containing P (coordinate extrema over the
  /// vertex set).
  std::pair<Vec, Vec> bounding_box() const;

  /// All integer points of kP, sorted lexicographically. Enumerates the
  /// integer bounding box of kP and keeps the points passing the exact
  /// membership test.
  std::vector<LatticePoint> lattice_points(int k) const;

  const std::vector<Vec>& vertices() const { return vertices_; }

 private:
  void validate_and_build();

  int dim_;
  std::vector<Facet> facets_;
  std::vector<Vec> vertices_;
  Vec box_lo_, box_hi_;
};

}  // namespace toric
