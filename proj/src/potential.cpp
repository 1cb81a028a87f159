#include "toric/potential.hpp"

#include <cmath>
#include <sstream>

namespace toric {

ToricPotential::ToricPotential(int dim, ValueFn value, GradFn grad, HessFn hess,
                               DelzantPolytope polytope)
    : dim_(dim),
      value_(std::move(value)),
      grad_(std::move(grad)),
      hess_(std::move(hess)),
      polytope_(std::move(polytope)) {
  if (polytope_.dim() != dim_) throw error("potential/polytope dimension mismatch");
}

ToricPotential fubini_study(int m) {
  if (m < 1) throw error("fubini_study: dimension must be positive");
  // softmax weights over {1, e^{rho_1}, ..., e^{rho_m}}, computed stably
  auto weights = [m](const Vec& rho) {
    double mx = 0.0;
    for (int i = 0; i < m; ++i) mx = std::max(mx, rho(i));
    double denom = std::exp(-mx);
    Vec w(m);
    for (int i = 0; i < m; ++i) {
      w(i) = std::exp(rho(i) - mx);
      denom += w(i);
    }
    w /= denom;
    return w;
  };
  auto value = [m](const Vec& rho) {
    double mx = 0.0;
    for (int i = 0; i < m; ++i) mx = std::max(mx, rho(i));
    double s = std::exp(-mx);
    for (int i = 0; i < m; ++i) s += std::exp(rho(i) - mx);
    return mx + std::log(s);
  };
  auto grad = [weights](const Vec& rho) { return weights(rho); };
  auto hess = [weights](const Vec& rho) {
    Vec g = weights(rho);
    Mat h = g.asDiagonal();
    h -= g * g.transpose();
    return h;
  };
  return ToricPotential(m, value, grad, hess, DelzantPolytope::unit_simplex(m));
}

ToricPotential product_potential(const std::vector<ToricPotential>& factors) {
  if (factors.empty()) throw error("product_potential: empty factor list");
  if (factors.size() == 1) return factors.front();
  int m = 0;
  for (const auto& f : factors) m += f.dim();
  std::vector<int> offset;
  int at = 0;
  for (const auto& f : factors) {
    offset.push_back(at);
    at += f.dim();
  }
  auto fs = factors;  // captured by value
  auto value = [fs, offset](const Vec& rho) {
    double s = 0.0;
    for (std::size_t i = 0; i < fs.size(); ++i)
      s += fs[i].value(rho.segment(offset[i], fs[i].dim()));
    return s;
  };
  auto grad = [fs, offset, m](const Vec& rho) {
    Vec g(m);
    for (std::size_t i = 0; i < fs.size(); ++i)
      g.segment(offset[i], fs[i].dim()) = fs[i].gradient(rho.segment(offset[i], fs[i].dim()));
    return g;
  };
  auto hess = [fs, offset, m](const Vec& rho) {
    Mat h = Mat::Zero(m, m);
    for (std::size_t i = 0; i < fs.size(); ++i)
      h.block(offset[i], offset[i], fs[i].dim(), fs[i].dim()) =
          fs[i].hessian(rho.segment(offset[i], fs[i].dim()));
    return h;
  };
  DelzantPolytope polytope = factors[0].polytope();
  for (std::size_t i = 1; i < factors.size(); ++i)
    polytope = DelzantPolytope::product(polytope, factors[i].polytope());
  return ToricPotential(m, value, grad, hess, std::move(polytope));
}

BumpFunction bump_by_name(const std::string& id, int m) {
  if (id == "gaussian") {
    auto value = [](const Vec& rho) { return std::exp(-0.5 * rho.squaredNorm()); };
    auto grad = [value](const Vec& rho) { return Vec(-rho * value(rho)); };
    auto hess = [value, m](const Vec& rho) {
      return Mat((rho * rho.transpose() - Mat::Identity(m, m)) * value(rho));
    };
    return BumpFunction{"gaussian", value, grad, hess};
  }
  if (id == "invquad") {
    auto value = [](const Vec& rho) { return 1.0 / (1.0 + rho.squaredNorm()); };
    auto grad = [](const Vec& rho) {
      double q = 1.0 + rho.squaredNorm();
      return Vec(-2.0 * rho / (q * q));
    };
    auto hess = [m](const Vec& rho) {
      double q = 1.0 + rho.squaredNorm();
      Mat h = -2.0 / (q * q) * Mat::Identity(m, m);
      h += 8.0 / (q * q * q) * rho * rho.transpose();
      return h;
    };
    return BumpFunction{"invquad", value, grad, hess};
  }
  throw error("unknown bump '" + id + "' (available: gaussian, invquad)");
}

ToricPotential perturbed_potential(const ToricPotential& base, double eps,
                                   const BumpFunction& bump, double grid_radius,
                                   int grid_points_per_axis) {
  const int m = base.dim();
  BumpFunction b = bump;
  if (!b.grad) {
    auto v = b.value;
    b.grad = [v](const Vec& rho) { return fd_gradient(v, rho, 1e-5); };
  }
  if (!b.hess) {
    auto v = b.value;
    b.hess = [v](const Vec& rho) { return fd_hessian(v, rho, 1e-4); };
  }

  auto value = [base, b, eps](const Vec& rho) { return base.value(rho) + eps * b.value(rho); };
  auto grad = [base, b, eps](const Vec& rho) { return Vec(base.gradient(rho) + eps * b.grad(rho)); };
  auto hess = [base, b, eps](const Vec& rho) { return Mat(base.hessian(rho) + eps * b.hess(rho)); };

  // Positivity sweep over the grid; rejects before any caller can evaluate.
  const int n = grid_points_per_axis;
  std::vector<double> ticks(n);
  for (int i = 0; i < n; ++i)
    ticks[i] = n == 1 ? 0.0 : -grid_radius + 2.0 * grid_radius * i / (n - 1);
  Vec rho = Vec::Zero(m);
  std::function<void(int)> sweep = [&](int axis) {
    if (axis == m) {
      Eigen::SelfAdjointEigenSolver<Mat> es(hess(rho));
      if (es.eigenvalues()(0) <= 0.0) {
        std::ostringstream os;
        os << "perturbed potential loses convexity at rho = (";
        for (int i = 0; i < m; ++i) os << (i ? ", " : "") << rho(i);
        os << "): min Hessian eigenvalue " << es.eigenvalues()(0);
        throw positivity_violation_error(os.str());
      }
      return;
    }
    for (double t : ticks) {
      rho(axis) = t;
      sweep(axis + 1);
    }
  };
  sweep(0);

  return ToricPotential(m, value, grad, hess, base.polytope());
}

Vec moment_map(const ToricPotential& phi, const Vec& rho) { return phi.gradient(rho); }

Vec invert_moment_map(const ToricPotential& phi, const Vec& x, double tol, int max_iter) {
  if (!phi.polytope().is_interior(x, 1e-12))
    throw non_interior_point_error("invert_moment_map: point is not interior to the polytope");
  const auto objective = [&](const Vec& rho) { return phi.value(rho) - x.dot(rho); };
  Vec rho = Vec::Zero(phi.dim());
  double f = objective(rho);
  for (int iter = 0; iter < max_iter; ++iter) {
    Vec g = phi.gradient(rho) - x;
    const double gn = g.norm();
    if (gn <= tol) return rho;
    Mat h = phi.hessian(rho);
    Eigen::LLT<Mat> llt(h);
    Vec step;
    if (llt.info() == Eigen::Success) {
      step = llt.solve(-g);
    } else {
      // near-singular Hessian close to the boundary; regularize slightly
      Mat hr = h + 1e-14 * (1.0 + h.trace()) * Mat::Identity(h.rows(), h.cols());
      step = hr.ldlt().solve(-g);
    }
    bool accepted = false;
    for (double t = 1.0; t >= 1e-14; t *= 0.5) {
      double f_trial = objective(rho + t * step);
      if (f_trial < f) {
        rho += t * step;
        f = f_trial;
        accepted = true;
        break;
      }
    }
    if (!accepted) {
      // The objective is flat at machine precision; the residual can still
      // contract under full Newton steps.
      if ((phi.gradient(rho + step) - x).norm() < gn) {
        rho += step;
        f = objective(rho);
      } else {
        break;
      }
    }
  }
  if ((phi.gradient(rho) - x).norm() <= tol) return rho;
  std::ostringstream os;
  os << "invert_moment_map: Newton did not converge (residual "
     << (phi.gradient(rho) - x).norm() << ")";
  throw non_convergence_error(os.str());
}

SymplecticPotential::SymplecticPotential(ToricPotential phi) : phi_(std::move(phi)) {}

double SymplecticPotential::value(const Vec& x) const {
  Vec rho = invert_moment_map(phi_, x);
  return x.dot(rho) - phi_.value(rho);
}

Vec SymplecticPotential::gradient(const Vec& x) const { return invert_moment_map(phi_, x); }

Mat SymplecticPotential::hessian(const Vec& x) const {
  Vec rho = invert_moment_map(phi_, x);
  Mat h = phi_.hessian(rho);
  return h.llt().solve(Mat::Identity(h.rows(), h.cols()));
}

SymplecticPotential legendre_dual(const ToricPotential& phi) { return SymplecticPotential(phi); }

double rate_function(const ToricPotential& phi, const BasePoint& z, const Vec& x) {
  SymplecticPotential u(phi);
  return u.value(x) - x.dot(z.rho) + phi.value(z.rho);
}

}  // namespace toric
