#include "toric/polytope.hpp"

#include <algorithm>
#include <cmath>
#include <numeric>
#include <sstream>

namespace toric {

namespace {

long long gcd_ll(long long a, long long b) {
  a = std::llabs(a);
  b = std::llabs(b);
  while (b != 0) {
    long long t = a % b;
    a = b;
    b = t;
  }
  return a;
}

// All index subsets of size c from {0,...,d-1}.
void for_each_subset(int d, int c, const std::function<void(const std::vector<int>&)>& fn) {
  std::vector<int> idx(c);
  std::function<void(int, int)> rec = [&](int start, int depth) {
    if (depth == c) {
      fn(idx);
      return;
    }
    for (int i = start; i <= d - (c - depth); ++i) {
      idx[depth] = i;
      rec(i + 1, depth + 1);
    }
  };
  if (c == 0)
    fn({});
  else
    rec(0, 0);
}

}  // namespace

DelzantPolytope::DelzantPolytope(int dim, std::vector<Facet> facets)
    : dim_(dim), facets_(std::move(facets)) {
  validate_and_build();
}

void DelzantPolytope::validate_and_build() {
  if (dim_ < 1) throw invalid_polytope_error("polytope dimension must be positive");
  if (facets_.empty()) throw invalid_polytope_error("polytope needs at least one facet");
  for (std::size_t r = 0; r < facets_.size(); ++r) {
    const Facet& f = facets_[r];
    if (f.normal.size() != dim_) {
      std::ostringstream os;
      os << "facet " << r << ": normal has dimension " << f.normal.size() << ", expected "
         << dim_;
      throw invalid_polytope_error(os.str());
    }
    long long g = 0;
    for (int i = 0; i < dim_; ++i) g = gcd_ll(g, f.normal(i));
    if (g != 1) {
      std::ostringstream os;
      os << "facet " << r << ": normal is not a primitive integer vector";
      throw invalid_polytope_error(os.str());
    }
  }

  const int d = static_cast<int>(facets_.size());
  Mat normals(d, dim_);
  Vec offsets(d);
  for (int r = 0; r < d; ++r) {
    for (int i = 0; i < dim_; ++i) normals(r, i) = facets_[r].normal(i);
    offsets(r) = facets_[r].offset.to_double();
  }

  // Unbounded iff the recession cone {y : <v_r, y> >= 0} is nontrivial.
  // A lineality direction exists when the normals do not span R^m; otherwise
  // any nonzero recession vector lies on an extreme ray cut out by m-1
  // independent active normals.
  Eigen::FullPivLU<Mat> full_lu(normals);
  if (full_lu.rank() < dim_)
    throw unbounded_domain_error("polytope is unbounded: facet normals do not span");
  auto in_recession_cone = [&](const Vec& y) {
    for (int r = 0; r < d; ++r)
      if (normals.row(r).dot(y) < -1e-12 * y.lpNorm<1>()) return false;
    return true;
  };
  std::vector<Vec> ray_candidates;
  if (dim_ == 1) {
    Vec e(1);
    e << 1.0;
    ray_candidates.push_back(e);
  } else {
    for_each_subset(d, dim_ - 1, [&](const std::vector<int>& idx) {
      Mat sub(dim_ - 1, dim_);
      for (int i = 0; i < dim_ - 1; ++i) sub.row(i) = normals.row(idx[i]);
      Eigen::FullPivLU<Mat> lu(sub);
      lu.setThreshold(1e-10);
      if (lu.rank() != dim_ - 1) return;
      Mat kernel = lu.kernel();
      if (kernel.cols() != 1) return;
      ray_candidates.push_back(kernel.col(0).normalized());
    });
  }
  for (const Vec& y : ray_candidates) {
    if (in_recession_cone(y) || in_recession_cone(Vec(-y)))
      throw unbounded_domain_error("polytope is unbounded: recession direction found");
  }

  // Vertex candidates: intersection of every m-subset of facet hyperplanes.
  for_each_subset(d, dim_, [&](const std::vector<int>& idx) {
    Mat a(dim_, dim_);
    Vec b(dim_);
    for (int i = 0; i < dim_; ++i) {
      a.row(i) = normals.row(idx[i]);
      b(i) = offsets(idx[i]);
    }
    Eigen::FullPivLU<Mat> lu(a);
    lu.setThreshold(1e-10);
    if (lu.rank() != dim_) return;
    Vec x = lu.solve(b);
    const double scale = 1.0 + x.lpNorm<Eigen::Infinity>();
    for (int r = 0; r < d; ++r)
      if (normals.row(r).dot(x) - offsets(r) < -1e-9 * scale) return;
    for (const Vec& v : vertices_)
      if ((v - x).lpNorm<Eigen::Infinity>() < 1e-8 * scale) return;
    vertices_.push_back(x);
  });
  if (vertices_.empty())
    throw invalid_polytope_error("polytope is empty: no feasible vertex");

  // Nonempty interior: the vertex centroid must satisfy every inequality
  // strictly (all vertices on one facet would flatten the polytope).
  Vec centroid = Vec::Zero(dim_);
  for (const Vec& v : vertices_) centroid += v;
  centroid /= static_cast<double>(vertices_.size());
  for (int r = 0; r < d; ++r) {
    const double scale = 1.0 + std::abs(offsets(r)) + centroid.lpNorm<Eigen::Infinity>();
    if (normals.row(r).dot(centroid) - offsets(r) <= 1e-10 * scale)
      throw invalid_polytope_error("polytope has empty interior");
  }

  box_lo_ = vertices_.front();
  box_hi_ = vertices_.front();
  for (const Vec& v : vertices_) {
    box_lo_ = box_lo_.cwiseMin(v);
    box_hi_ = box_hi_.cwiseMax(v);
  }
}

DelzantPolytope DelzantPolytope::unit_simplex(int m) {
  std::vector<Facet> facets;
  for (int j = 0; j < m; ++j) {
    IVec e = IVec::Zero(m);
    e(j) = 1;
    facets.push_back({e, Rational(0)});
  }
  IVec all = IVec::Constant(m, -1);
  facets.push_back({all, Rational(-1)});
  return DelzantPolytope(m, std::move(facets));
}

DelzantPolytope DelzantPolytope::unit_cube(int m) {
  std::vector<Facet> facets;
  for (int j = 0; j < m; ++j) {
    IVec e = IVec::Zero(m);
    e(j) = 1;
    facets.push_back({e, Rational(0)});
    IVec me = IVec::Zero(m);
    me(j) = -1;
    facets.push_back({me, Rational(-1)});
  }
  return DelzantPolytope(m, std::move(facets));
}

DelzantPolytope DelzantPolytope::product(const DelzantPolytope& a, const DelzantPolytope& b) {
  const int m = a.dim() + b.dim();
  std::vector<Facet> facets;
  for (const Facet& f : a.facets()) {
    IVec n = IVec::Zero(m);
    n.head(a.dim()) = f.normal;
    facets.push_back({n, f.offset});
  }
  for (const Facet& f : b.facets()) {
    IVec n = IVec::Zero(m);
    n.tail(b.dim()) = f.normal;
    facets.push_back({n, f.offset});
  }
  return DelzantPolytope(m, std::move(facets));
}

double DelzantPolytope::facet_value(std::size_t r, const Vec& x) const {
  const Facet& f = facets_[r];
  double s = 0.0;
  for (int i = 0; i < dim_; ++i) s += x(i) * f.normal(i);
  return s - f.offset.to_double();
}

bool DelzantPolytope::contains(const Vec& x, double tol) const {
  for (std::size_t r = 0; r < facets_.size(); ++r)
    if (facet_value(r, x) < -tol) return false;
  return true;
}

bool DelzantPolytope::is_interior(const Vec& x, double margin) const {
  for (std::size_t r = 0; r < facets_.size(); ++r)
    if (facet_value(r, x) <= margin) return false;
  return true;
}

bool DelzantPolytope::lattice_contains(const IVec& alpha, long long k) const {
  for (const Facet& f : facets_) {
    long long s = 0;
    for (int i = 0; i < dim_; ++i) s += static_cast<long long>(alpha(i)) * f.normal(i);
    if (s * f.offset.den < k * f.offset.num) return false;
  }
  return true;
}

bool DelzantPolytope::lattice_interior(const IVec& alpha, long long k) const {
  for (const Facet& f : facets_) {
    long long s = 0;
    for (int i = 0; i < dim_; ++i) s += static_cast<long long>(alpha(i)) * f.normal(i);
    if (s * f.offset.den <= k * f.offset.num) return false;
  }
  return true;
}

std::pair<Vec, Vec> DelzantPolytope::bounding_box() const { return {box_lo_, box_hi_}; }

std::vector<LatticePoint> DelzantPolytope::lattice_points(int k) const {
  if (k < 1) throw error("lattice_points: dilation level must be >= 1");
  std::vector<long long> lo(dim_), hi(dim_);
  for (int i = 0; i < dim_; ++i) {
    lo[i] = static_cast<long long>(std::ceil(k * box_lo_(i) - 1e-9));
    hi[i] = static_cast<long long>(std::floor(k * box_hi_(i) + 1e-9));
  }
  std::vector<LatticePoint> points;
  IVec alpha(dim_);
  // First coordinate outermost so the scan emits lexicographic order.
  std::function<void(int)> scan = [&](int axis) {
    if (axis == dim_) {
      if (lattice_contains(alpha, k)) points.push_back(LatticePoint(alpha));
      return;
    }
    for (long long v = lo[axis]; v <= hi[axis]; ++v) {
      alpha(axis) = static_cast<int>(v);
      scan(axis + 1);
    }
  };
  scan(0);
  return points;
}

}  // namespace toric
