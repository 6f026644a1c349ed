// One PASS/FAIL line per acceptance criterion; nonzero exit on any FAIL.

#include <chrono>
#include <cmath>
#include <cstdio>
#include <functional>
#include <numeric>
#include <random>
#include <string>

#include "biot/verify.hpp"
#include "random_fields.hpp"

using namespace biot;

namespace {

struct Outcome {
  bool pass = true;
  std::string detail;

  void require(bool ok, const std::string& what) {
    if (!ok) {
      pass = false;
      if (!detail.empty()) detail += "; ";
      detail += what;
    }
  }
  void note(const std::string& s) {
    if (!detail.empty()) detail += "; ";
    detail += s;
  }
};

std::string fmt(const char* f, double a) {
  char buf[64];
  std::snprintf(buf, sizeof buf, f, a);
  return buf;
}

std::string fmt(const char* f, double a, double b) {
  char buf[96];
  std::snprintf(buf, sizeof buf, f, a, b);
  return buf;
}

double drift(double a, double b) { return std::abs(b - a) / std::abs(a); }

// Edge flux of w along the global normal of edge e.
template <class Field>
double edge_flux(const Mesh& m, std::size_t e, Field&& w) {
  const auto q = edge_rule(m, e, data_degree);
  const Point n = m.edge_normal(e);
  double s = 0.0;
  for (std::size_t i = 0; i < q.points.size(); ++i) {
    const Vec2 v = w(q.points[i]);
    s += q.weights[i] * (v[0] * n.x + v[1] * n.y);
  }
  return s;
}

template <class Scalar>
double triangle_mean(const Mesh& m, std::size_t t, Scalar&& f) {
  const auto pq = map_rule(m, t, quadrature(data_degree));
  double s = 0.0;
  for (std::size_t i = 0; i < pq.points.size(); ++i) s += pq.weights[i] * f(pq.points[i]);
  return s / m.area(t);
}

Outcome element_certification() {
  Outcome o;
  double duality = 0.0, div_const = 0.0, p1 = 0.0, rt = 0.0;
  const std::vector<std::function<Vec2(Point)>> p1_basis{
      [](Point) { return Vec2(1, 0); },   [](Point) { return Vec2(0, 1); },
      [](Point x) { return Vec2(x.x, 0); }, [](Point x) { return Vec2(x.y, 0); },
      [](Point x) { return Vec2(0, x.x); }, [](Point x) { return Vec2(0, x.y); }};
  for (std::size_t n : {1u, 2u, 4u}) {
    const auto d = Discretization::structured(n);
    const auto& m = d.mesh;
    for (std::size_t t = 0; t < m.num_triangles(); ++t) {
      const auto& b = d.mtw[t];
      const auto pq = map_rule(m, t, quadrature(6));
      for (int j = 0; j < 9; ++j) {
        const auto f = b.functionals_of(
            m, [&](Point x) { return Vec2(b.eval(x).value.col(j)); }, 8);
        for (int i = 0; i < 9; ++i) duality = std::max(duality, std::abs(f[i] - (i == j ? 1.0 : 0.0)));
        const double h = m.diameter(t);
        for (const Point x : pq.points)
          div_const = std::max(div_const, h * std::abs(b.eval(x).grad[j].trace() - b.divergence()[j]));
      }
      for (const auto& v : p1_basis) {
        const auto c = b.functionals_of(m, v, 8);
        for (const Point x : pq.points) p1 = std::max(p1, (b.eval(x).value * c - v(x)).norm());
      }
      // RT0: constants and the position field
      const std::vector<std::function<Vec2(Point)>> rt_fields{[](Point) { return Vec2(1, 0); },
                                                              [](Point) { return Vec2(0, 1); },
                                                              [](Point x) { return Vec2(x.x, x.y); }};
      for (const auto& w : rt_fields) {
        Vec2 sum;
        for (const Point x : pq.points) {
          sum.setZero();
          for (int k = 0; k < 3; ++k) sum += edge_flux(m, m.triangle_edges[t][k].edge, w) * d.rt[t].value(k, x);
          rt = std::max(rt, (sum - w(x)).norm());
        }
      }
    }
  }
  o.require(duality <= 1e-10, "duality " + fmt("%.2e", duality));
  o.require(div_const <= 1e-10, "divergence variation " + fmt("%.2e", div_const));
  o.require(p1 <= 1e-12, "P1 reproduction " + fmt("%.2e", p1));
  o.require(rt <= 1e-12, "RT0 reproduction " + fmt("%.2e", rt));
  if (o.pass)
    o.note("max duality defect " + fmt("%.1e", duality) + ", P1 " + fmt("%.1e", p1) + ", RT0 " + fmt("%.1e", rt));
  return o;
}

Outcome commuting_diagrams() {
  Outcome o;
  double worst_mtw = 0.0, worst_rt = 0.0;
  for (std::size_t n : {2u, 4u, 8u}) {
    const auto d = Discretization::structured(n);
    const auto& m = d.mesh;
    for (std::uint64_t seed = 1; seed <= 10; ++seed) {
      const testing_fields::TrigField w(seed);
      auto field = [&](Point x) { return w.value(x); };
      auto div = [&](Point x) { return w.divergence(x); };
      for (std::size_t t = 0; t < m.num_triangles(); ++t) {
        const double q = triangle_mean(m, t, div);
        const double scale = std::max(1.0, std::abs(q));
        const auto c = d.mtw[t].functionals_of(m, field, data_degree);
        double div_pi = 0.0;
        for (int j = 0; j < 9; ++j) div_pi += c[j] * d.mtw[t].divergence()[j];
        worst_mtw = std::max(worst_mtw, std::abs(div_pi - q) / scale);
        double div_rt = 0.0;
        for (int k = 0; k < 3; ++k) div_rt += edge_flux(m, m.triangle_edges[t][k].edge, field) * d.rt[t].divergence(k);
        worst_rt = std::max(worst_rt, std::abs(div_rt - q) / scale);
      }
    }
  }
  o.require(worst_mtw <= 1e-9, "MTW " + fmt("%.2e", worst_mtw));
  o.require(worst_rt <= 1e-9, "RT0 " + fmt("%.2e", worst_rt));
  if (o.pass) o.note("max relative defect MTW " + fmt("%.1e", worst_mtw) + ", RT0 " + fmt("%.1e", worst_rt));
  return o;
}

Outcome stability_constants() {
  Outcome o;
  std::vector<double> beta, beta_s, korn;
  double lmax = 0.0;
  for (std::size_t n : {2u, 4u, 8u}) {
    const auto d = Discretization::structured(n);
    beta.push_back(estimate_inf_sup_rt(d));
    beta_s.push_back(estimate_inf_sup_sigma(d));
    const auto k = korn_constant(d);
    korn.push_back(k.constant);
    lmax = std::max(lmax, k.lambda_max);
  }
  for (std::size_t i = 0; i < beta.size(); ++i) {
    o.require(beta[i] > 0.0 && beta_s[i] > 0.0, "non-positive inf-sup constant");
    o.require(std::isfinite(korn[i]), "Korn constant not finite");
  }
  for (std::size_t i = 1; i < beta.size(); ++i) {
    o.require(drift(beta[i - 1], beta[i]) <= 0.15, "beta_h drift " + fmt("%.3f", drift(beta[i - 1], beta[i])));
    o.require(drift(beta_s[i - 1], beta_s[i]) <= 0.15,
              "beta'_h drift " + fmt("%.3f", drift(beta_s[i - 1], beta_s[i])));
    o.require(drift(korn[i - 1], korn[i]) <= 0.20, "Korn drift " + fmt("%.3f", drift(korn[i - 1], korn[i])));
  }
  o.require(lmax <= 1.0 + 1e-10, "Korn lambda_max " + fmt("%.17g", lmax));
  o.note("beta_h " + fmt("%.4f..%.4f", beta.front(), beta.back()) + ", beta'_h " +
         fmt("%.4f..%.4f", beta_s.front(), beta_s.back()) + ", c_K " + fmt("%.4f..%.4f", korn.front(), korn.back()));
  return o;
}

Outcome convergence() {
  Outcome o;
  const auto rep = convergence_study("smooth", {1, 1, 1}, {4, 8, 16, 32}, 0.5);
  for (const auto& l : rep.levels) o.require(l.ok(), l.failure);
  const auto& r = rep.finest_rates();
  o.require(r.u >= 0.9, "rate u " + fmt("%.3f", r.u));
  o.require(r.p >= 0.9, "rate p " + fmt("%.3f", r.p));
  o.require(r.z >= 0.9, "rate z " + fmt("%.3f", r.z));
  o.note("finest rates u " + fmt("%.3f", r.u) + ", p " + fmt("%.3f", r.p) + ", z " + fmt("%.3f", r.z));
  return o;
}

Outcome locking() {
  Outcome o;
  const auto cells = locking_sweep({4, 8, 16}, 1.0, 0.5);
  double min_rate = 1e300, worst_ratio = 0.0;
  for (const auto& cell : cells) {
    for (const auto& l : cell.report.levels) {
      o.require(l.ok(), l.failure);
      o.require(std::isfinite(l.errors.u_1h) && std::isfinite(l.errors.p_l2) && std::isfinite(l.errors.z_l2),
                "non-finite error");
    }
    const double rp = cell.report.finest_rates().p;
    min_rate = std::min(min_rate, std::isnan(rp) ? -1e300 : rp);
    o.require(rp >= 0.9, "p rate " + fmt("%.3f", rp) + " at " + fmt("c0=%g lambda=%g", cell.c0, cell.lambda));
  }
  for (const auto& a : cells) {
    if (a.c0 != 0.0) continue;
    for (const auto& b : cells) {
      if (b.c0 != 1.0 || b.lambda != a.lambda) continue;
      for (std::size_t i = 0; i < a.report.levels.size(); ++i) {
        const auto& ea = a.report.levels[i].errors;
        const auto& eb = b.report.levels[i].errors;
        for (const double r : {ea.u_1h / eb.u_1h, ea.p_l2 / eb.p_l2, ea.z_l2 / eb.z_l2}) worst_ratio = std::max(worst_ratio, r);
      }
    }
  }
  o.require(worst_ratio <= 10.0, "c0=0 / c0=1 error ratio " + fmt("%.3f", worst_ratio));
  o.note(std::to_string(cells.size()) + " cells, min p rate " + fmt("%.3f", min_rate) + ", max c0=0/c0=1 ratio " +
         fmt("%.3f", worst_ratio));
  return o;
}

Outcome degenerate_well_posedness() {
  Outcome o;
  const MaterialParams prm{1, 1, 0};
  const auto d = Discretization::structured(2);
  const auto ops = assemble_operators(d, prm);
  std::mt19937_64 rng(2718);
  std::uniform_real_distribution<double> u(-1, 1);
  auto rnd = [&](std::size_t k) {
    DenseVector v(static_cast<Eigen::Index>(k));
    for (auto& x : v) x = u(rng);
    return v;
  };
  const double dt = 0.1;
  const SystemState prev{0.0, rnd(ops.num_u()), rnd(ops.num_z()), rnd(ops.num_p())};
  const DenseVector f = rnd(ops.num_u()), g = rnd(ops.num_p());
  const auto next = backward_euler_step(ops, prev, dt, f, g);
  // residual of the monolithic system rebuilt from freshly assembled blocks
  const auto a = assemble_elasticity(d, prm), mz = assemble_rt_mass(d);
  const auto bu = assemble_div_coupling_u(d), bz = assemble_div_coupling_z(d);
  DenseVector r(static_cast<Eigen::Index>(ops.num_u() + ops.num_z() + ops.num_p())), rhs(r.size());
  r << spmv(a, next.u) - spmv(bu.transpose(), next.p) - f, spmv(mz, next.z) + spmv(bz.transpose(), next.p),
      spmv(bu, next.u - prev.u) - dt * spmv(bz, next.z) - dt * g;
  rhs << f, DenseVector::Zero(ops.num_z()), spmv(bu, prev.u) + dt * g;
  const double res = r.norm() / rhs.norm();
  o.require(res <= 1e-10, "residual " + fmt("%.2e", res));
  const auto zero = backward_euler_step(ops, SystemState::zero(ops), dt, DenseVector::Zero(ops.num_u()),
                                        DenseVector::Zero(ops.num_p()));
  o.require(zero.max_abs() <= 1e-12, "zero data gives " + fmt("%.2e", zero.max_abs()));
  o.note("relative residual " + fmt("%.1e", res) + ", zero-data state " + fmt("%.1e", zero.max_abs()));
  return o;
}

Outcome consistency() {
  Outcome o;
  const auto c = builtin_case("smooth", {1, 1, 1});
  std::vector<std::uint64_t> seeds(10);
  std::iota(seeds.begin(), seeds.end(), 1);
  const auto coarse = consistency_measure(Discretization::structured(8), c, 0.0, seeds);
  const auto fine = consistency_measure(Discretization::structured(16), c, 0.0, seeds);
  const double rate = observed_rate(coarse.rms_ratio, fine.rms_ratio);
  const double dual_rate = observed_rate(coarse.dual_norm, fine.dual_norm);
  o.require(rate >= 0.9, "RMS ratio rate " + fmt("%.3f", rate));
  o.note("RMS ratio " + fmt("%.3e -> %.3e", coarse.rms_ratio, fine.rms_ratio) + " (rate " + fmt("%.3f", rate) +
         "), dual norm rate " + fmt("%.3f", dual_rate));
  return o;
}

Outcome compatibility() {
  Outcome o;
  const auto rep = compatibility_experiment("smooth", {1, 1, 1}, 8, 8, 0.5, true);
  for (const auto* r : {&rep.be_compatible, &rep.be_initial, &rep.cn_compatible, &rep.cn_initial})
    o.require(std::isfinite(r->max_state_norm) && std::isfinite(r->pressure_increment), "non-finite run");
  const double ratio = rep.be_initial.max_state_norm / rep.be_compatible.max_state_norm;
  o.require(ratio <= 10.0, "BE max-norm ratio " + fmt("%.3f", ratio));
  o.note("BE max-norm ratio " + fmt("%.3f", ratio) + "; step-1 increment incompatible BE " +
         fmt("%.3e, CN %.3e", rep.be_initial.pressure_increment, rep.cn_initial.pressure_increment));
  return o;
}

}  // namespace

int main() {
  const std::vector<std::pair<const char*, Outcome (*)()>> criteria{
      {"element certification", element_certification},
      {"commuting diagrams", commuting_diagrams},
      {"stability constants", stability_constants},
      {"convergence", convergence},
      {"locking-freedom", locking},
      {"degenerate well-posedness", degenerate_well_posedness},
      {"consistency functional", consistency},
      {"compatibility experiment", compatibility}};
  int failed = 0;
  for (std::size_t i = 0; i < criteria.size(); ++i) {
    const auto start = std::chrono::steady_clock::now();
    Outcome o;
    try {
      o = criteria[i].second();
    } catch (const std::exception& e) {
      o.pass = false;
      o.detail = std::string("exception: ") + e.what();
    }
    const double secs = std::chrono::duration<double>(std::chrono::steady_clock::now() - start).count();
    std::printf("%s criterion %zu: %s (%s) [%.1fs]\n", o.pass ? "PASS" : "FAIL", i + 1, criteria[i].first,
                o.detail.c_str(), secs);
    std::fflush(stdout);
    if (!o.pass) ++failed;
  }
  return failed == 0 ? 0 : 1;
}
