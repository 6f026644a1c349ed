#ifndef BIOT_CASES_HPP
#define BIOT_CASES_HPP

#include <cmath>
#include <functional>
#include <numbers>
#include <stdexcept>
#include <string>

#include "assembly.hpp"

namespace biot {

/// Time-independent part of a manufactured solution u = tau(t) U(x),
/// p = tau(t) P(x). `div_stress` is div C eps(U).
struct SpatialProfile {
  std::function<Vec2(Point)> u;
  std::function<Mat2(Point)> grad_u;
  std::function<Vec2(Point)> div_stress;
  std::function<double(Point)> p;
  std::function<Vec2(Point)> grad_p;
  std::function<double(Point)> laplace_p;
};

/// tau(t) and its derivative.
struct TemporalProfile {
  std::function<double(double)> value;
  std::function<double(double)> derivative;

  static TemporalProfile decay() {
    return {[](double t) { return std::exp(-t); }, [](double t) { return -std::exp(-t); }};
  }
  static TemporalProfile constant() {
    return {[](double) { return 1.0; }, [](double) { return 0.0; }};
  }
};

/// Closed-form exact solution with its induced body force f and source g:
///   -div C eps(u) + grad p = f,  z = grad p,  c0 dp/dt + div du/dt - div z = g.
class ManufacturedCase {
 public:
  ManufacturedCase(std::string name, MaterialParams params, SpatialProfile space, TemporalProfile time)
      : name_(std::move(name)), params_(params), space_(std::move(space)), time_(std::move(time)) {
    params_.validate();
  }

  const std::string& name() const { return name_; }
  const MaterialParams& params() const { return params_; }

  Vec2 u(Point x, double t) const { return time_.value(t) * space_.u(x); }
  Mat2 grad_u(Point x, double t) const { return time_.value(t) * space_.grad_u(x); }
  double div_u(Point x, double t) const { return grad_u(x, t).trace(); }
  double p(Point x, double t) const { return time_.value(t) * space_.p(x); }
  Vec2 z(Point x, double t) const { return time_.value(t) * space_.grad_p(x); }
  double div_z(Point x, double t) const { return time_.value(t) * space_.laplace_p(x); }

  Vec2 f(Point x, double t) const { return time_.value(t) * (space_.grad_p(x) - space_.div_stress(x)); }

  double g(Point x, double t) const {
    const double dtau = time_.derivative(t);
    return params_.c0 * dtau * space_.p(x) + dtau * space_.grad_u(x).trace() - time_.value(t) * space_.laplace_p(x);
  }

  /// sigma = C eps(u) - p I.
  Mat2 stress(Point x, double t) const {
    const Mat2 gu = grad_u(x, t);
    const Mat2 eps = 0.5 * (gu + gu.transpose());
    return 2.0 * params_.mu * eps + (params_.lambda * gu.trace() - p(x, t)) * Mat2::Identity();
  }

 private:
  std::string name_;
  MaterialParams params_;
  SpatialProfile space_;
  TemporalProfile time_;
};

/// U = (S, S), P = S with S = sin(pi x) sin(pi y).
inline SpatialProfile smooth_profile(const MaterialParams& prm) {
  using std::cos, std::sin;
  constexpr double pi = std::numbers::pi;
  SpatialProfile s;
  s.u = [](Point x) {
    const double v = sin(pi * x.x) * sin(pi * x.y);
    return Vec2(v, v);
  };
  s.grad_u = [](Point x) {
    const double sx = pi * cos(pi * x.x) * sin(pi * x.y);
    const double sy = pi * sin(pi * x.x) * cos(pi * x.y);
    Mat2 g;
    g << sx, sy, sx, sy;
    return g;
  };
  s.div_stress = [prm](Point x) {
    const double sv = sin(pi * x.x) * sin(pi * x.y);
    const double sxy = pi * pi * cos(pi * x.x) * cos(pi * x.y);
    const double sxx = -pi * pi * sv, syy = -pi * pi * sv;
    const double lap = -2.0 * pi * pi * sv;
    // mu Lap U + (mu + lambda) grad div U
    return Vec2(prm.mu * lap + (prm.mu + prm.lambda) * (sxx + sxy),
                prm.mu * lap + (prm.mu + prm.lambda) * (sxy + syy));
  };
  s.p = [](Point x) { return sin(pi * x.x) * sin(pi * x.y); };
  s.grad_p = [](Point x) {
    return Vec2(pi * cos(pi * x.x) * sin(pi * x.y), pi * sin(pi * x.x) * cos(pi * x.y));
  };
  s.laplace_p = [](Point x) { return -2.0 * pi * pi * sin(pi * x.x) * sin(pi * x.y); };
  return s;
}

/// U = curl psi with psi = (x(1-x) y(1-y))^2, so div U = 0; P as in smooth.
inline SpatialProfile divfree_profile(const MaterialParams& prm) {
  // psi = A(x) A(y) with A(s) = s^2 (1 - s)^2.
  struct Poly {
    static double a0(double s) { return s * s * (1 - s) * (1 - s); }
    static double a1(double s) { return 2 * s - 6 * s * s + 4 * s * s * s; }
    static double a2(double s) { return 2 - 12 * s + 12 * s * s; }
    static double a3(double s) { return -12 + 24 * s; }
  };
  auto s = smooth_profile(prm);
  s.u = [](Point x) {
    return Vec2(Poly::a0(x.x) * Poly::a1(x.y), -Poly::a1(x.x) * Poly::a0(x.y));
  };
  s.grad_u = [](Point x) {
    Mat2 g;
    g << Poly::a1(x.x) * Poly::a1(x.y), Poly::a0(x.x) * Poly::a2(x.y), -Poly::a2(x.x) * Poly::a0(x.y),
        -Poly::a1(x.x) * Poly::a1(x.y);
    return g;
  };
  s.div_stress = [prm](Point x) {
    const double lap1 = Poly::a2(x.x) * Poly::a1(x.y) + Poly::a0(x.x) * Poly::a3(x.y);
    const double lap2 = -(Poly::a3(x.x) * Poly::a0(x.y) + Poly::a1(x.x) * Poly::a2(x.y));
    return Vec2(prm.mu * lap1, prm.mu * lap2);
  };
  return s;
}

/// "smooth" or "divfree", both decaying like exp(-t) on the unit square with
/// u = 0 and p = 0 on the whole boundary.
inline ManufacturedCase builtin_case(const std::string& name, const MaterialParams& params) {
  if (name == "smooth") return ManufacturedCase(name, params, smooth_profile(params), TemporalProfile::decay());
  if (name == "divfree") return ManufacturedCase(name, params, divfree_profile(params), TemporalProfile::decay());
  throw std::invalid_argument("unknown case '" + name + "' (expected smooth or divfree)");
}

}  // namespace biot

#endif  // BIOT_CASES_HPP
