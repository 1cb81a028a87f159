#include "toric/quadrature.hpp"

#include <cmath>
#include <limits>
#include <sstream>

namespace toric {

namespace {

constexpr double kNegInf = -std::numeric_limits<double>::infinity();

void check_alpha(const DelzantPolytope& polytope, const IVec& alpha, int k) {
  if (k < 1) throw error("norming constant: dilation level must be >= 1");
  if (alpha.size() != polytope.dim())
    throw alpha_outside_polytope_error("norming constant: alpha has wrong dimension");
  if (!polytope.lattice_contains(alpha, k)) {
    std::ostringstream os;
    os << "norming constant: alpha is outside " << k << "P";
    throw alpha_outside_polytope_error(os.str());
  }
}

// Tensor iteration over per-axis tick lists; emits the index tuple.
void for_each_tensor_index(int m, int n, const std::function<void(const std::vector<int>&)>& fn) {
  std::vector<int> idx(m, 0);
  for (;;) {
    fn(idx);
    int axis = m - 1;
    while (axis >= 0) {
      if (++idx[axis] < n) break;
      idx[axis] = 0;
      --axis;
    }
    if (axis < 0) return;
  }
}

// log of the rho-route integral over the box [center - half, center + half]
// (per-axis half-widths) with n Gauss-Legendre nodes per axis.
double log_rho_integral(const ToricPotential& phi, const IVec& alpha, int k, const Vec& center,
                        const Vec& half, int n) {
  const int m = phi.dim();
  const GaussLegendreRule& rule = gauss_legendre(n);
  double log_jac = 0.0;
  for (int i = 0; i < m; ++i) log_jac += std::log(half(i));
  std::vector<double> exponents;
  exponents.reserve(static_cast<std::size_t>(std::pow(n, m)));
  Vec rho(m);
  Vec alpha_d = alpha.cast<double>();
  for_each_tensor_index(m, n, [&](const std::vector<int>& idx) {
    double log_w = log_jac;
    for (int i = 0; i < m; ++i) {
      rho(i) = center(i) + half(i) * rule.nodes[idx[i]];
      log_w += std::log(rule.weights[idx[i]]);
    }
    double det = phi.hessian(rho).determinant();
    if (det <= 0.0) {
      // numerically flat tail (or a perturbed metric far out); contributes 0
      exponents.push_back(kNegInf);
      return;
    }
    exponents.push_back(alpha_d.dot(rho) - k * phi.value(rho) + std::log(det) + log_w);
  });
  return log_sum_exp(exponents);
}

double value_from_logs(double log_main, double log_other, double* est_error) {
  double value = std::exp(log_main);
  double diff = value * std::abs(1.0 - std::exp(log_other - log_main));
  *est_error = 1.25 * diff + 8.0 * std::numeric_limits<double>::epsilon() * value;
  return value;
}

}  // namespace

void QuadratureSpec::validate() const {
  if (nodes_per_axis < 8) throw error("QuadratureSpec: nodes_per_axis must be >= 8");
  if (truncation_radius < 4.0) throw error("QuadratureSpec: truncation_radius must be >= 4");
}

NormingConstant norming_constant_rho(const ToricPotential& phi, const LatticePoint& alpha, int k,
                                     const QuadratureSpec& spec) {
  spec.validate();
  const DelzantPolytope& P = phi.polytope();
  check_alpha(P, alpha.coords, k);
  const int m = phi.dim();

  NormingConstant out;
  out.alpha = alpha;
  out.k = k;

  Vec center;
  Vec half;
  int n = spec.nodes_per_axis;
  const double log_k1 = std::log(static_cast<double>(k) + 1.0);
  const bool interior = P.lattice_interior(alpha.coords, k);
  // Gauss-Legendre on these integrands converges like e^{-c n / hw} with a
  // prefactor that grows with k (the analyticity strip of e^{-k phi} is
  // |Im rho| < pi), so the node count gets a floor proportional to the box
  // half-width times 5 + 2.2 log(k+1). Measured against the FS Beta and
  // Dirichlet oracles this keeps the relative error below ~1e-9 for
  // k <= 400 while leaving the default 80 nodes untouched whenever the
  // recentered box is narrow.
  auto node_floor = [&](double hw) {
    return std::max(n, static_cast<int>(std::ceil(hw * (5.0 + 2.2 * log_k1))));
  };
  if (spec.recenter && interior) {
    Vec x = alpha.coords.cast<double>() / static_cast<double>(k);
    center = invert_moment_map(phi, x);
    Eigen::SelfAdjointEigenSolver<Mat> es(phi.hessian(center));
    double lambda_min = es.eigenvalues()(0);
    if (lambda_min <= 0.0)
      throw error("norming_constant_rho: Hessian not positive definite at recentering point");
    double hw = spec.truncation_radius / std::sqrt(k * lambda_min);
    half = Vec::Constant(m, hw);
    n = node_floor(hw);
  } else {
    // Boundary alpha (or recentering disabled): the integrand peaks at
    // rho-distance ~ log k from the origin with O(1) width and only the
    // det Hess factor decays in the flat directions, so widen the box.
    out.boundary = !interior;
    center = Vec::Zero(m);
    double hw = 2.0 * spec.truncation_radius + 2.0 * log_k1;
    half = Vec::Constant(m, hw);
    n = node_floor(hw);
  }

  double log_n = log_rho_integral(phi, alpha.coords, k, center, half, n);
  double log_2n = log_rho_integral(phi, alpha.coords, k, center, half, 2 * n);
  out.log_value = log_n;
  out.value = value_from_logs(log_n, log_2n, &out.est_error);
  return out;
}

namespace {

// One inequality sum_i coef_i x_i >= bound over a prefix of the coordinates.
struct SliceInequality {
  Vec coef;
  double bound;
};

// Systems S_1, ..., S_m where S_j constrains (x_1, ..., x_j); produced by
// eliminating the trailing coordinate one level at a time.
std::vector<std::vector<SliceInequality>> fourier_motzkin(const DelzantPolytope& polytope) {
  const int m = polytope.dim();
  std::vector<std::vector<SliceInequality>> levels(m);
  std::vector<SliceInequality> current;
  for (const Facet& f : polytope.facets())
    current.push_back({f.normal.cast<double>(), f.offset.to_double()});
  levels[m - 1] = current;
  for (int j = m - 1; j >= 1; --j) {
    std::vector<SliceInequality> reduced;
    std::vector<const SliceInequality*> pos, neg;
    for (const SliceInequality& q : current) {
      double c = q.coef(j);
      if (c > 1e-12) pos.push_back(&q);
      else if (c < -1e-12) neg.push_back(&q);
      else reduced.push_back({q.coef.head(j), q.bound});
    }
    for (const SliceInequality* p : pos)
      for (const SliceInequality* q : neg) {
        // scale so the x_j coefficients cancel
        double cp = p->coef(j), cq = -q->coef(j);
        Vec coef = (cq * p->coef.head(j) + cp * q->coef.head(j)) / (cp + cq);
        double bound = (cq * p->bound + cp * q->bound) / (cp + cq);
        reduced.push_back({coef, bound});
      }
    levels[j - 1] = reduced;
    current = std::move(reduced);
  }
  return levels;
}

// Feasible interval of x_j given the fixed prefix, from the level-j system.
std::pair<double, double> slice_interval(const std::vector<SliceInequality>& system,
                                         const Vec& prefix, int j) {
  double lo = -std::numeric_limits<double>::infinity();
  double hi = std::numeric_limits<double>::infinity();
  for (const SliceInequality& q : system) {
    double c = q.coef(j);
    double rest = q.bound;
    for (int i = 0; i < j; ++i) rest -= q.coef(i) * prefix(i);
    if (c > 1e-12)
      lo = std::max(lo, rest / c);
    else if (c < -1e-12)
      hi = std::min(hi, rest / c);
    else if (rest > 1e-12)
      return {1.0, 0.0};  // infeasible slice
  }
  return {lo, hi};
}

}  // namespace

XQuadratureGrid::XQuadratureGrid(const SymplecticPotential& u, const DelzantPolytope& polytope,
                                 int nodes_per_axis)
    : dim_(polytope.dim()), nodes_per_axis_(nodes_per_axis) {
  const int m = dim_;
  const int n = nodes_per_axis_;
  const GaussLegendreRule& rule = gauss_legendre(n);
  const auto levels = fourier_motzkin(polytope);

  Vec x(m);
  std::function<void(int, double)> descend = [&](int axis, double log_w) {
    auto [lo, hi] = slice_interval(levels[axis], x, axis);
    if (!(hi - lo > 1e-13)) return;  // empty or degenerate slice
    double mid = 0.5 * (lo + hi);
    double half = 0.5 * (hi - lo);
    for (int i = 0; i < n; ++i) {
      x(axis) = mid + half * rule.nodes[i];
      double w = log_w + std::log(rule.weights[i] * half);
      if (axis + 1 < m) {
        descend(axis + 1, w);
      } else {
        if (!polytope.is_interior(x, 0.0)) continue;
        Vec rho = u.gradient(x);
        log_weight_.push_back(w);
        rho_at_node_.push_back(rho);
        phi_at_node_.push_back(u.primal().value(rho));
      }
    }
  };
  descend(0, 0.0);
  if (log_weight_.empty())
    throw error("XQuadratureGrid: no interior quadrature nodes (degenerate polytope?)");
}

double XQuadratureGrid::log_integral(const IVec& alpha, long long k) const {
  // Integrand at node x is e^{<alpha, rho(x)> - k phi(rho(x))}: the exponent
  // of the SPNORM formula rewritten through u(x) = <x, rho(x)> - phi(rho(x)).
  Vec alpha_d = alpha.cast<double>();
  double mx = kNegInf;
  const std::size_t nn = log_weight_.size();
  std::vector<double> e(nn);
  for (std::size_t i = 0; i < nn; ++i) {
    e[i] = alpha_d.dot(rho_at_node_[i]) - static_cast<double>(k) * phi_at_node_[i] +
           log_weight_[i];
    if (e[i] > mx) mx = e[i];
  }
  if (!std::isfinite(mx)) return kNegInf;
  double s = 0.0;
  for (std::size_t i = 0; i < nn; ++i) s += std::exp(e[i] - mx);
  return mx + std::log(s);
}

NormingConstant norming_constant_x(const SymplecticPotential& u, const DelzantPolytope& polytope,
                                   const LatticePoint& alpha, int k, const QuadratureSpec& spec) {
  spec.validate();
  check_alpha(polytope, alpha.coords, k);

  XQuadratureGrid grid_n(u, polytope, spec.nodes_per_axis);
  XQuadratureGrid grid_2n(u, polytope, 2 * spec.nodes_per_axis);
  double log_n = grid_n.log_integral(alpha.coords, k);
  double log_2n = grid_2n.log_integral(alpha.coords, k);

  NormingConstant out;
  out.alpha = alpha;
  out.k = k;
  out.boundary = !polytope.lattice_interior(alpha.coords, k);
  out.log_value = log_n;
  out.value = value_from_logs(log_n, log_2n, &out.est_error);
  return out;
}

NormingConstant norming_constant_laplace(const SymplecticPotential& u, const LatticePoint& alpha,
                                         int k, double interior_margin) {
  const DelzantPolytope& P = u.polytope();
  check_alpha(P, alpha.coords, k);
  const int m = P.dim();
  Vec x = alpha.coords.cast<double>() / static_cast<double>(k);
  if (!P.is_interior(x, interior_margin)) {
    std::ostringstream os;
    os << "norming_constant_laplace: alpha/k within margin " << interior_margin
       << " of the boundary";
    throw boundary_alpha_error(os.str());
  }
  double det_hess_u = u.hessian(x).determinant();
  NormingConstant out;
  out.alpha = alpha;
  out.k = k;
  out.log_value = -0.5 * m * std::log(static_cast<double>(k)) +
                  0.5 * m * std::log(2.0 * M_PI) - 0.5 * std::log(std::abs(det_hess_u)) +
                  k * u.value(x);
  out.value = std::exp(out.log_value);
  out.est_error = 0.0;
  return out;
}

}  // namespace toric
