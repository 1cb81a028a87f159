// Acceptance suite: runs every acceptance criterion at its stated tolerance
// and prints one PASS/FAIL line per criterion (with sub-check detail).
// Exits nonzero if any criterion fails.

#include "toric/experiments.hpp"
#include "toric/limits.hpp"

#include <cmath>
#include <cstdarg>
#include <cstdio>
#include <map>
#include <random>
#include <string>
#include <vector>

#include "../tests/oracles.hpp"

using namespace toric;

namespace {

Vec v1(double a) {
  Vec v(1);
  v << a;
  return v;
}

Vec v2(double a, double b) {
  Vec v(2);
  v << a, b;
  return v;
}

LatticePoint lp(std::initializer_list<int> vals) {
  IVec v(static_cast<int>(vals.size()));
  int i = 0;
  for (int x : vals) v(i++) = x;
  return LatticePoint(v);
}

const std::vector<int> kSweep = {25, 50, 100, 200, 400};

struct Criterion {
  int id;
  std::string name;
  bool pass = true;
  std::vector<std::string> detail;

  void check(bool ok, const std::string& line) {
    pass = pass && ok;
    detail.push_back(std::string(ok ? "  ok   " : "  FAIL ") + line);
  }
};

std::string fmt(const char* format, ...) {
  char buf[512];
  va_list args;
  va_start(args, format);
  std::vsnprintf(buf, sizeof(buf), format, args);
  va_end(args);
  return buf;
}

bool in_band(double slope, double lo, double hi) { return slope >= lo && slope <= hi; }

// ---------------------------------------------------------------------------
// Shared measure store so criteria 4, 5, 6 reuse the expensive FS(2) builds.

struct ModelPoint {
  std::string name;
  BergmanModel* model;
  Vec rho;
  std::map<int, std::shared_ptr<const BergmanMeasure>> measures;

  const BergmanMeasure& at(int k) {
    auto it = measures.find(k);
    if (it == measures.end())
      it = measures
               .emplace(k, std::make_shared<const BergmanMeasure>(
                               model->build_measure(k, BasePoint(rho))))
               .first;
    return *it->second;
  }
};

// ---------------------------------------------------------------------------

Criterion criterion1_fs1_exactness() {
  Criterion c{1, "FS(1) exactness: Q = B(a+1, k-a+1) both routes; binomial weights"};
  auto phi = fubini_study(1);
  SymplecticPotential u(phi);
  QuadratureSpec spec;

  const int k_max = 200;
  std::vector<double> worst_rho(k_max + 1, 0.0), worst_x(k_max + 1, 0.0);
  parallel_for(k_max, [&](std::size_t idx) {
    int k = static_cast<int>(idx) + 1;
    XQuadratureGrid grid(u, phi.polytope(), spec.nodes_per_axis);
    for (int a = 0; a <= k; ++a) {
      double log_exact = oracle::log_beta(a + 1.0, k - a + 1.0);
      double e_rho = std::abs(
          std::exp(norming_constant_rho(phi, lp({a}), k, spec).log_value - log_exact) - 1.0);
      double e_x = std::abs(std::exp(grid.log_integral(lp({a}).coords, k) - log_exact) - 1.0);
      worst_rho[k] = std::max(worst_rho[k], e_rho);
      worst_x[k] = std::max(worst_x[k], e_x);
    }
  });
  double max_rho = 0.0, max_x = 0.0;
  for (int k = 1; k <= k_max; ++k) {
    max_rho = std::max(max_rho, worst_rho[k]);
    max_x = std::max(max_x, worst_x[k]);
  }
  c.check(max_rho <= 1e-8, fmt("rho route, all alpha, k <= 200: max rel err %.2e <= 1e-8",
                               max_rho));
  c.check(max_x <= 1e-8, fmt("x route,   all alpha, k <= 200: max rel err %.2e <= 1e-8",
                             max_x));

  BergmanModel model(std::move(phi), spec);
  double max_w = 0.0;
  for (double rho_z : {0.0, 1.0}) {
    double p = std::exp(rho_z) / (1.0 + std::exp(rho_z));
    for (int k : {1, 5, 25, 100, 200}) {
      BergmanMeasure mu = model.build_measure(k, BasePoint(v1(rho_z)));
      for (int a = 0; a <= k; ++a)
        max_w = std::max(max_w, std::abs(mu.normalized_weight(a) /
                                             oracle::binomial_pmf(k, a, p) -
                                         1.0));
    }
  }
  c.check(max_w <= 1e-8,
          fmt("normalized weights vs Binomial(k, p), rho in {0,1}: max rel err %.2e <= 1e-8",
              max_w));
  return c;
}

Criterion criterion2_derivative_identities() {
  Criterion c{2, "exact derivative identities of Pi (rel. tol 1e-5, 5 base points, k in {10,40})"};
  BergmanModel fs1(fubini_study(1));
  BergmanModel fs2(fubini_study(2));
  BergmanModel pert(perturbed_potential(fubini_study(1), 0.05, bump_by_name("gaussian", 1)));

  auto residuals = [](const BergmanModel& model, const Vec& rho, int k, double* r1, double* r2) {
    const int m = model.dim();
    const double h = 1e-5;
    auto density_at = [&](const Vec& r) {
      return model.build_measure(k, BasePoint(r)).density();
    };
    auto scaled_grad = [&](const Vec& r) {
      BergmanMeasure mu = model.build_measure(k, BasePoint(r));
      Vec g = Vec::Zero(m);
      Vec gp = model.potential().gradient(r);
      for (const auto& atom : mu.atoms())
        g += (atom.alpha.coords.cast<double>() / double(k) - gp) * atom.weight;
      return g;
    };
    BergmanMeasure mu = model.build_measure(k, BasePoint(rho));
    const double pi = mu.density();
    MomentSummary ms = moments(mu);
    Vec delta = ms.mean - mu.moment_image();
    Mat hess = model.potential().hessian(rho);
    *r1 = 0.0;
    *r2 = 0.0;
    for (int j = 0; j < m; ++j) {
      Vec rp = rho, rm = rho;
      rp(j) += h;
      rm(j) -= h;
      double lhs = (density_at(rp) - density_at(rm)) / (2.0 * h) / (k * pi);
      *r1 = std::max(*r1, std::abs(lhs - delta(j)) / (1.0 + std::abs(delta(j))));
    }
    Mat rhs = ms.covariance + delta * delta.transpose() - hess / double(k);
    for (int i = 0; i < m; ++i) {
      Vec rp = rho, rm = rho;
      rp(i) += h;
      rm(i) -= h;
      Vec lhs_row = (scaled_grad(rp) - scaled_grad(rm)) / (2.0 * h) / (k * pi);
      for (int j = 0; j < m; ++j)
        *r2 = std::max(*r2, std::abs(lhs_row(j) - rhs(i, j)) /
                                (std::abs(rhs(i, j)) + (1.0 + hess.norm()) / k));
    }
  };

  const std::vector<Vec> points1 = {v1(0.0), v1(0.4), v1(-0.7), v1(1.1), v1(-1.5)};
  const std::vector<Vec> points2 = {v2(0.0, 0.0), v2(0.3, -0.2), v2(-0.5, 0.6), v2(0.8, 0.1),
                                    v2(-0.3, -0.9)};
  struct Entry {
    const char* name;
    BergmanModel* model;
    const std::vector<Vec>* points;
  };
  for (Entry e : {Entry{"FS(1)", &fs1, &points1}, Entry{"FS(2)", &fs2, &points2},
                  Entry{"perturbed-FS", &pert, &points1}}) {
    double worst1 = 0.0, worst2 = 0.0;
    for (int k : {10, 40})
      for (const Vec& rho : *e.points) {
        double r1, r2;
        residuals(*e.model, rho, k, &r1, &r2);
        worst1 = std::max(worst1, r1);
        worst2 = std::max(worst2, r2);
      }
    c.check(worst1 <= 1e-5,
            fmt("%-12s k^-1 dPi = Pi (m_k - mu): max scaled residual %.2e <= 1e-5", e.name,
                worst1));
    c.check(worst2 <= 1e-5,
            fmt("%-12s second-order identity:    max scaled residual %.2e <= 1e-5", e.name,
                worst2));
  }
  return c;
}

Criterion criterion3_mvar_orders() {
  Criterion c{3, "moment deviation orders on perturbed-FS: slopes in [-1.25, -0.75]"};
  BergmanModel pert(perturbed_potential(fubini_study(1), 0.05, bump_by_name("gaussian", 1)));
  Vec rho = v1(0.7);
  Vec mu = pert.potential().gradient(rho);
  Mat h = pert.potential().hessian(rho);
  std::vector<double> mean_err, cov_err;
  for (int k : kSweep) {
    MomentSummary ms = moments(pert.build_measure(k, BasePoint(rho)));
    mean_err.push_back((ms.mean - mu).norm());
    cov_err.push_back((double(k) * ms.covariance - h).norm());
  }
  auto fm = fit_rate(kSweep, mean_err);
  auto fc = fit_rate(kSweep, cov_err);
  c.check(in_band(fm.fitted_slope, -1.25, -0.75),
          fmt("|m_k - mu_h| slope %.3f in [-1.25, -0.75] (R2=%.3f)", fm.fitted_slope,
              fm.r_squared));
  c.check(in_band(fc.fitted_slope, -1.25, -0.75),
          fmt("|k Sigma_k - Hess phi| slope %.3f in [-1.25, -0.75] (R2=%.3f)", fc.fitted_slope,
              fc.r_squared));
  return c;
}

Criterion criterion4_clt_be(std::vector<ModelPoint>& points) {
  Criterion c{4, "CLT + Berry-Esseen: per test function, slope in [-0.65, -0.35], err(400) <= 0.05"};
  for (ModelPoint& mp : points) {
    auto family = default_test_family(mp.model->dim());
    int in_band_count = 0;
    double worst_abs = 0.0;
    bool all_decreasing = true;
    double worst_out_slope = 0.0;
    std::string worst_label;
    std::vector<double> agg(kSweep.size(), 0.0);
    for (const TestFunction& f : family) {
      std::vector<double> errs;
      for (std::size_t i = 0; i < kSweep.size(); ++i) {
        double e = clt_error(*mp.model, mp.at(kSweep[i]), f);
        errs.push_back(e);
        agg[i] = std::max(agg[i], e);
      }
      auto fit = fit_rate(kSweep, errs);
      bool band_ok = in_band(fit.fitted_slope, -0.65, -0.35);
      if (band_ok) ++in_band_count;
      else if (worst_label.empty() || std::abs(fit.fitted_slope + 0.5) >
                                          std::abs(worst_out_slope + 0.5)) {
        worst_out_slope = fit.fitted_slope;
        worst_label = f.label();
      }
      all_decreasing = all_decreasing && errs.back() < errs.front();
      worst_abs = std::max(worst_abs, errs.back());
    }
    auto agg_fit = fit_rate(kSweep, agg);
    c.check(all_decreasing, fmt("%-14s every clt_error decreases from k=25 to k=400", mp.name.c_str()));
    c.check(worst_abs <= 0.05,
            fmt("%-14s max error at k=400: %.2e <= 0.05", mp.name.c_str(), worst_abs));
    bool per_f_ok = in_band_count == static_cast<int>(family.size());
    c.check(per_f_ok,
            fmt("%-14s per-f slopes in band: %d/%zu (worst outlier %s slope=%.3f; family max slope=%.3f)",
                mp.name.c_str(), in_band_count, family.size(),
                worst_label.empty() ? "-" : worst_label.c_str(), worst_out_slope,
                agg_fit.fitted_slope));
  }
  return c;
}

Criterion criterion5_charfn(std::vector<ModelPoint>& points) {
  Criterion c{5, "pointwise characteristic function: slope in [-0.65, -0.35] on |t| <= 3"};
  for (ModelPoint& mp : points) {
    auto grid = default_t_grid(mp.model->dim());
    std::vector<double> errs;
    for (int k : kSweep) errs.push_back(charfn_error(*mp.model, mp.at(k), grid));
    auto fit = fit_rate(kSweep, errs);
    c.check(in_band(fit.fitted_slope, -0.65, -0.35),
            fmt("%-14s charfn slope %.3f in [-0.65, -0.35] (err@400=%.2e)", mp.name.c_str(),
                fit.fitted_slope, errs.back()));
  }
  return c;
}

Criterion criterion6_llt(std::vector<ModelPoint>& points) {
  Criterion c{6, "local limit law: slope in [-1.25, -0.75]; window error <= 0.05 by k=400"};
  for (ModelPoint& mp : points) {
    if (mp.name == "FS(1) rho=1") continue;  // criterion pins FS(1) and FS(2)
    std::vector<double> errs;
    for (int k : kSweep) errs.push_back(llt_error(*mp.model, mp.at(k)));
    auto fit = fit_rate(kSweep, errs);
    c.check(in_band(fit.fitted_slope, -1.25, -0.75),
            fmt("%-14s llt slope %.3f in [-1.25, -0.75]", mp.name.c_str(), fit.fitted_slope));
    c.check(errs.back() <= 0.05,
            fmt("%-14s window error at k=400: %.2e <= 0.05", mp.name.c_str(), errs.back()));
  }
  return c;
}

Criterion criterion7_laplace() {
  Criterion c{7, "Laplace formula: ratio error slope in [-1.25, -0.75] at fixed alpha/k"};
  BergmanModel fs1(fubini_study(1));
  BergmanModel fs2(fubini_study(2));
  struct Entry {
    const char* name;
    BergmanModel* model;
    Vec x_star;
  };
  for (Entry e : {Entry{"FS(1) x*=0.37", &fs1, v1(0.37)},
                  Entry{"FS(2) x*=(0.3,0.4)", &fs2, v2(0.3, 0.4)}}) {
    std::vector<double> errs;
    for (int k : kSweep) {
      IVec a(e.model->dim());
      for (int i = 0; i < e.model->dim(); ++i)
        a(i) = static_cast<int>(std::lround(e.x_star(i) * k));
      LatticePoint alpha(a);
      auto lap = norming_constant_laplace(e.model->symplectic(), alpha, k);
      errs.push_back(std::abs(
          std::exp(lap.log_value - e.model->log_norming_constant(alpha, k)) - 1.0));
    }
    auto fit = fit_rate(kSweep, errs);
    c.check(in_band(fit.fitted_slope, -1.25, -0.75),
            fmt("%-20s slope %.3f in [-1.25, -0.75] (R2=%.3f)", e.name, fit.fitted_slope,
                fit.r_squared));
  }
  return c;
}

Criterion criterion8_tyz(std::vector<ModelPoint>& points) {
  Criterion c{8, "TYZ leading order: |Pi/k^m - 1| slope in [-1.25, -0.75]; FS(1) Pi = k+1"};
  BergmanModel fs1(fubini_study(1));
  double worst = 0.0;
  for (int k : {1, 2, 3, 5, 10, 25, 50, 100, 200}) {
    double pi = fs1.build_measure(k, BasePoint(v1(0.3))).density();
    worst = std::max(worst, std::abs(pi / (k + 1.0) - 1.0));
  }
  c.check(worst <= 1e-8, fmt("FS(1) Pi = k+1 exactly, k <= 200: max rel err %.2e <= 1e-8", worst));

  BergmanModel pert(perturbed_potential(fubini_study(1), 0.05, bump_by_name("gaussian", 1)));
  struct Entry {
    std::string name;
    BergmanModel* model;
    Vec rho;
  };
  std::vector<Entry> entries = {{"perturbed-FS", &pert, v1(0.7)}};
  for (ModelPoint& mp : points)
    if (mp.name != "FS(1) rho=1") entries.push_back({mp.name, mp.model, mp.rho});
  for (Entry& e : entries) {
    std::vector<double> errs;
    for (int k : kSweep) {
      double pi = e.model->build_measure(k, BasePoint(e.rho)).density();
      errs.push_back(std::abs(pi / std::pow(double(k), e.model->dim()) - 1.0));
    }
    auto fit = fit_rate(kSweep, errs);
    c.check(in_band(fit.fitted_slope, -1.25, -0.75),
            fmt("%-14s TYZ slope %.3f in [-1.25, -0.75]", e.name.c_str(), fit.fitted_slope));
  }
  return c;
}

Criterion criterion9_legendre_invariants() {
  Criterion c{9, "Legendre/rate-function invariants on 100 random points per model"};
  struct Entry {
    std::string name;
    ToricPotential phi;
  };
  std::vector<Entry> models;
  models.push_back({"FS(1)", fubini_study(1)});
  models.push_back({"FS(2)", fubini_study(2)});
  models.push_back(
      {"perturbed-FS", perturbed_potential(fubini_study(1), 0.05, bump_by_name("gaussian", 1))});
  models.push_back({"FS(1)xFS(1)", product_potential({fubini_study(1), fubini_study(1)})});

  std::mt19937 gen(2024);
  std::uniform_real_distribution<double> dist(-5.0, 5.0);
  for (Entry& e : models) {
    const int m = e.phi.dim();
    SymplecticPotential u(e.phi);
    double worst_grad = 0.0, worst_hess = 0.0, worst_inv = 0.0, worst_invol = 0.0;
    double worst_roundtrip = 0.0;
    bool rate_ok = true;
    auto value = [&](const Vec& r) { return e.phi.value(r); };
    for (int trial = 0; trial < 100; ++trial) {
      Vec rho(m);
      for (int i = 0; i < m; ++i) rho(i) = dist(gen);
      // gradient and Hessian vs centered differences
      Vec g = e.phi.gradient(rho);
      worst_grad = std::max(worst_grad,
                            (g - fd_gradient(value, rho, 1e-5)).norm() / (1.0 + g.norm()));
      Mat h = e.phi.hessian(rho);
      Mat h_fd(m, m);
      for (int j = 0; j < m; ++j) {
        Vec rp = rho, rm = rho;
        rp(j) += 1e-5;
        rm(j) -= 1e-5;
        h_fd.col(j) = (e.phi.gradient(rp) - e.phi.gradient(rm)) / 2e-5;
      }
      worst_hess = std::max(worst_hess, (h - h_fd).norm() / (1.0 + h.norm()));
      // Legendre involution and inverse-Hessian identity at x = grad phi(rho)
      Vec x = g;
      double phi_back = x.dot(u.gradient(x)) - u.value(x);
      worst_invol = std::max(worst_invol, std::abs(phi_back - e.phi.value(rho)));
      worst_inv = std::max(worst_inv, (u.hessian(x) * h - Mat::Identity(m, m)).norm());
      worst_roundtrip = std::max(worst_roundtrip, (invert_moment_map(e.phi, x) - rho).norm());
      // rate function: nonnegative, zero exactly at the moment image
      BasePoint z(rho);
      if (rate_function(e.phi, z, x) > 1e-10) rate_ok = false;
      Vec x_off = 0.5 * (x + e.phi.polytope().bounding_box().first) +
                  0.1 * Vec::Ones(m).cwiseProduct(x);
      if (e.phi.polytope().is_interior(x_off, 1e-6)) {
        double val = rate_function(e.phi, z, x_off);
        if (val < -1e-12) rate_ok = false;
        if (val < 1e-10 && (x_off - x).norm() > 1e-3) rate_ok = false;
      }
    }
    c.check(worst_grad <= 1e-6, fmt("%-12s gradient vs FD: %.2e <= 1e-6", e.name.c_str(),
                                    worst_grad));
    c.check(worst_hess <= 1e-6, fmt("%-12s Hessian vs FD:  %.2e <= 1e-6", e.name.c_str(),
                                    worst_hess));
    c.check(worst_invol <= 1e-8, fmt("%-12s Legendre involution: %.2e <= 1e-8", e.name.c_str(),
                                     worst_invol));
    c.check(worst_inv <= 1e-6, fmt("%-12s Hess u * Hess phi = I: %.2e <= 1e-6", e.name.c_str(),
                                   worst_inv));
    c.check(worst_roundtrip <= 1e-8, fmt("%-12s moment map round trip: %.2e <= 1e-8",
                                         e.name.c_str(), worst_roundtrip));
    c.check(rate_ok, fmt("%-12s I^z >= 0 with zero exactly at mu_h(z)", e.name.c_str()));
  }
  return c;
}

}  // namespace

int main() {
  std::printf("toric-clt acceptance suite (k sweep {25, 50, 100, 200, 400})\n");
  std::printf("============================================================\n");

  BergmanModel fs1(fubini_study(1));
  BergmanModel fs2(fubini_study(2));
  std::vector<ModelPoint> points;
  points.push_back({"FS(1) rho=0", &fs1, v1(0.0), {}});
  points.push_back({"FS(1) rho=1", &fs1, v1(1.0), {}});
  points.push_back({"FS(2) rho=0", &fs2, v2(0.0, 0.0), {}});

  std::vector<Criterion> results;
  results.push_back(criterion1_fs1_exactness());
  results.push_back(criterion2_derivative_identities());
  results.push_back(criterion3_mvar_orders());
  results.push_back(criterion4_clt_be(points));
  results.push_back(criterion5_charfn(points));
  results.push_back(criterion6_llt(points));
  results.push_back(criterion7_laplace());
  results.push_back(criterion8_tyz(points));
  results.push_back(criterion9_legendre_invariants());

  int passed = 0;
  for (const Criterion& c : results) {
    std::printf("[%d] %-75s %s\n", c.id, c.name.c_str(), c.pass ? "PASS" : "FAIL");
    for (const std::string& line : c.detail) std::printf("%s\n", line.c_str());
    if (c.pass) ++passed;
  }
  std::printf("============================================================\n");
  std::printf("%d/%zu criteria passed\n", passed, results.size());
  return passed == static_cast<int>(results.size()) ? 0 : 1;
}
