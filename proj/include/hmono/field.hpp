#pragma once

#include <array>
#include <cmath>
#include <functional>
#include <memory>
#include <string>
#include <utility>
#include <vector>

#include "core.hpp"
#include "geom.hpp"
#include "ode.hpp"

namespace hmono {

// Orientation of the Hodge star in  D_i Phi = kOrientation * eps_ijk F_jk / (2 lambda).
// With Phi = +h(rho) xhat.t the spherically symmetric reduction is solvable for -1.
inline constexpr double kOrientation = -1.0;

// su(2) basis t_a = -(i/2) sigma_a.
inline const std::array<Mat2c, 3>& su2_basis() {
  static const std::array<Mat2c, 3> t = [] {
    std::array<Mat2c, 3> b;
    b[0] << 0.0, -0.5 * I, -0.5 * I, 0.0;
    b[1] << 0.0, -0.5, 0.5, 0.0;
    b[2] << -0.5 * I, 0.0, 0.0, 0.5 * I;
    return b;
  }();
  return t;
}

inline double op_norm(const Mat2c& m) {
  Eigen::JacobiSVD<Mat2c> svd(m);
  return svd.singularValues()(0);
}

struct FieldSample {
  std::array<Mat2c, 3> A{Mat2c::Zero(), Mat2c::Zero(), Mat2c::Zero()};
  Mat2c Phi = Mat2c::Zero();
};

class RadialProfile;

// A gauge field and Higgs field given as an evaluation map on the ball.
class MonopoleField {
 public:
  using Eval = std::function<FieldSample(const Vec3&)>;

  MonopoleField(Eval eval, double mass, int charge, std::string label,
                std::shared_ptr<const RadialProfile> profile = nullptr)
      : eval_(std::move(eval)), mass_(mass), charge_(charge), label_(std::move(label)), profile_(std::move(profile)) {
    if (!(mass > 0.0)) throw Error(ErrorCode::InvalidArgument, "mass must be positive");
  }

  FieldSample operator()(const Vec3& x) const { return eval_(x); }
  FieldSample eval(const BulkPoint& p) const { return eval_(p.x); }

  double mass() const { return mass_; }
  int charge() const { return charge_; }
  const std::string& label() const { return label_; }
  const std::shared_ptr<const RadialProfile>& profile() const { return profile_; }

 private:
  Eval eval_;
  double mass_;
  int charge_;
  std::string label_;
  std::shared_ptr<const RadialProfile> profile_;
};

inline MonopoleField abelian_field(double m) {
  if (!(m > 0.0)) throw Error(ErrorCode::InvalidArgument, "mass must be positive");
  FieldSample s;
  s.Phi << I * m, 0.0, 0.0, -I * m;
  return MonopoleField([s](const Vec3&) { return s; }, m, 0, "abelian");
}

// Radial profiles of the charge-one spherically symmetric solution,
//   Phi = h(rho) xhat_a t_a,   A_i = -(1 - K(rho))/r eps_abi xhat_b t_a,
// with rho the hyperbolic distance from the origin and r the ball radius.
// The reduced equations are h' = (1 - K^2)/sinh^2 rho and K' = -h K, with
// h ~ a rho and K ~ 1 - a rho^2/2 at the origin; a is fixed by h(inf) = 2m.
class RadialProfile {
 public:
  struct Options {
    double rho_max = 20.0;
    double rho0 = 1e-3;
    double rtol = 1e-13;
    double atol = 1e-15;
    double certify_tol = 1e-8;
  };

  explicit RadialProfile(double m) : RadialProfile(m, Options{}) {}

  RadialProfile(double m, const Options& opt) : m_(m), opt_(opt) {
    if (!(m > 0.0)) throw Error(ErrorCode::InvalidArgument, "mass must be positive");
    shoot();
    tabulate();
  }

  double mass() const { return m_; }
  double slope() const { return a_; }
  double rho_max() const { return opt_.rho_max; }
  double spacing() const { return drho_; }
  double certified_error() const { return cert_err_; }

  // Returns (h, K) at hyperbolic radius rho.
  std::pair<double, double> operator()(double rho) const {
    if (rho >= rho_end_) return {h_inf_, 0.0};
    const double u = rho / drho_;
    std::size_t i = static_cast<std::size_t>(u);
    if (i + 1 >= hv_.size()) i = hv_.size() - 2;
    const double s = u - static_cast<double>(i);
    return {hermite(hv_, hd_, i, s), hermite(kv_, kd_, i, s)};
  }

  // Rows (rho, h, K) on a uniform grid; used for CSV export.
  std::vector<std::array<double, 3>> sample(std::size_t n, double rho_hi) const {
    std::vector<std::array<double, 3>> rows;
    rows.reserve(n);
    for (std::size_t i = 0; i < n; ++i) {
      const double rho = rho_hi * static_cast<double>(i) / static_cast<double>(n - 1);
      auto [h, k] = (*this)(rho);
      rows.push_back({rho, h, k});
    }
    return rows;
  }

 private:
  using State = Eigen::Vector2d;

  static State rhs(double rho, const State& y) {
    const double sh = std::sinh(rho);
    return State((1.0 - y(1) * y(1)) / (sh * sh), -y(0) * y(1));
  }

  // Power series at the origin through O(rho^4).
  static State series(double a, double rho) {
    const double h3 = -(a * a + 2.0 * a / 3.0) / 5.0;
    const double k4 = (a * a / 2.0 - h3) / 4.0;
    const double r2 = rho * rho;
    return State(a * rho + h3 * rho * r2, 1.0 - 0.5 * a * r2 + k4 * r2 * r2);
  }
  static State series_deriv(double a, double rho) {
    const double h3 = -(a * a + 2.0 * a / 3.0) / 5.0;
    const double k4 = (a * a / 2.0 - h3) / 4.0;
    return State(a + 3.0 * h3 * rho * rho, -a * rho + 4.0 * k4 * rho * rho * rho);
  }

  ode::DenseTrajectory<State> run(double a) const {
    ode::Options o;
    o.rtol = opt_.rtol;
    o.atol = opt_.atol;
    return ode::integrate<State>(rhs, opt_.rho0, series(a, opt_.rho0), opt_.rho_max, o);
  }

  double endpoint(double a) const { return run(a).final_state()(0) - 2.0 * m_; }

  void shoot() {
    double lo = 0.0, flo = -2.0 * m_;
    double hi = std::max(1.0, ((2.0 * m_ + 1.0) * (2.0 * m_ + 1.0) - 1.0) / 6.0);
    double fhi = endpoint(hi);
    for (int it = 0; fhi < 0.0; ++it) {
      if (it > 60) throw Error(ErrorCode::SolveFailed, "radial shooting could not bracket the slope");
      lo = hi;
      flo = fhi;
      hi *= 2.0;
      fhi = endpoint(hi);
    }
    // Illinois false position.
    int side = 0;
    double a = hi;
    for (int it = 0; it < 200; ++it) {
      a = (lo * fhi - hi * flo) / (fhi - flo);
      const double fa = endpoint(a);
      if (std::abs(fa) < 1e-13 * (1.0 + 2.0 * m_) || (hi - lo) < 1e-15 * hi) {
        a_ = a;
        return;
      }
      if ((fa < 0.0) == (flo < 0.0)) {
        lo = a;
        flo = fa;
        if (side == -1) fhi *= 0.5;
        side = -1;
      } else {
        hi = a;
        fhi = fa;
        if (side == 1) flo *= 0.5;
        side = 1;
      }
    }
    throw Error(ErrorCode::SolveFailed, "radial shooting did not converge");
  }

  static double hermite(const std::vector<double>& v, const std::vector<double>& d, std::size_t i, double s) {
    // This table stores derivatives already multiplied by the spacing.
    const double s2 = s * s, s3 = s2 * s;
    const double h00 = 2 * s3 - 3 * s2 + 1, h10 = s3 - 2 * s2 + s, h01 = -2 * s3 + 3 * s2, h11 = s3 - s2;
    return h00 * v[i] + h10 * d[i] + h01 * v[i + 1] + h11 * d[i + 1];
  }

  void tabulate() {
    const double C = 2.0 * m_ + 1.0;
    drho_ = std::min(0.005, 0.02 / C);
    const auto traj = run(a_);
    const std::size_t n = static_cast<std::size_t>(std::floor(opt_.rho_max / drho_ + 1e-9));
    rho_end_ = std::min(drho_ * static_cast<double>(n), opt_.rho_max);
    auto exact = [&](double rho) -> std::pair<State, State> {
      if (rho < opt_.rho0) return {series(a_, rho), series_deriv(a_, rho)};
      State y = traj(rho);
      return {y, rhs(rho, y)};
    };
    hv_.resize(n + 1);
    hd_.resize(n + 1);
    kv_.resize(n + 1);
    kd_.resize(n + 1);
    for (std::size_t i = 0; i <= n; ++i) {
      auto [y, dy] = exact(drho_ * static_cast<double>(i));
      hv_[i] = y(0);
      kv_[i] = y(1);
      hd_[i] = dy(0) * drho_;
      kd_[i] = dy(1) * drho_;
    }
    h_inf_ = hv_[n];
    cert_err_ = 0.0;
    for (std::size_t i = 0; i < n; ++i) {
      const double rho = drho_ * (static_cast<double>(i) + 0.5);
      auto [y, dy] = exact(rho);
      cert_err_ = std::max({cert_err_, std::abs(hermite(hv_, hd_, i, 0.5) - y(0)),
                            std::abs(hermite(kv_, kd_, i, 0.5) - y(1))});
    }
    if (cert_err_ > opt_.certify_tol) throw Error(ErrorCode::SolveFailed, "profile interpolation error above tolerance");
  }

  double m_;
  Options opt_;
  double a_ = 0.0;
  double drho_ = 0.005;
  double rho_end_ = 0.0;
  double h_inf_ = 0.0;
  double cert_err_ = 0.0;
  std::vector<double> hv_, hd_, kv_, kd_;
};

inline double ball_to_rho(double r) { return std::log1p(2.0 * r / (1.0 - r)); }

inline MonopoleField hedgehog_field(double m) {
  auto prof = std::make_shared<const RadialProfile>(m);
  auto eval = [prof](const Vec3& x) {
    FieldSample s;
    const double r = x.norm();
    if (r < 1e-300) return s;
    const Vec3 n = x / r;
    auto [h, K] = (*prof)(ball_to_rho(r));
    const auto& t = su2_basis();
    s.Phi = h * (n(0) * t[0] + n(1) * t[1] + n(2) * t[2]);
    const double c = (1.0 - K) / r;
    // A_i = c (n x t)_i
    s.A[0] = c * (n(1) * t[2] - n(2) * t[1]);
    s.A[1] = c * (n(2) * t[0] - n(0) * t[2]);
    s.A[2] = c * (n(0) * t[1] - n(1) * t[0]);
    return s;
  };
  return MonopoleField(eval, m, 1, "hedgehog", prof);
}

// ---------------------------------------------------------------- gauge maps

struct GaugeMap {
  std::function<Mat2c(const Vec3&)> g;
  // Optional analytic partial derivatives d_i g.
  std::function<std::array<Mat2c, 3>(const Vec3&)> dg;
};

inline std::array<Mat2c, 3> gauge_derivative(const GaugeMap& gm, const Vec3& x) {
  if (gm.dg) return gm.dg(x);
  const double h = 1e-5 * (1.0 - x.norm());
  std::array<Mat2c, 3> out;
  for (int i = 0; i < 3; ++i) {
    Vec3 xp = x, xm = x;
    xp(i) += h;
    xm(i) -= h;
    out[i] = (gm.g(xp) - gm.g(xm)) / (2.0 * h);
  }
  return out;
}

inline MonopoleField gauge_transform(const MonopoleField& f, GaugeMap gm) {
  auto eval = [f, gm](const Vec3& x) {
    const FieldSample s = f(x);
    const Mat2c g = gm.g(x);
    const Mat2c gi = g.adjoint();
    const auto dg = gauge_derivative(gm, x);
    FieldSample o;
    o.Phi = g * s.Phi * gi;
    for (int i = 0; i < 3; ++i) o.A[i] = g * s.A[i] * gi - dg[i] * gi;
    return o;
  };
  return MonopoleField(eval, f.mass(), f.charge(), f.label() + "+gauge", f.profile());
}

// g(x) = exp(theta(x) tau) for a unit traceless anti-Hermitian tau
// (tau^2 = -1), with analytic derivative.
inline GaugeMap exp_gauge(const Vec3& axis, std::function<double(const Vec3&)> theta,
                          std::function<Vec3(const Vec3&)> grad_theta) {
  const Vec3 n = axis.normalized();
  Mat2c tau = 2.0 * (n(0) * su2_basis()[0] + n(1) * su2_basis()[1] + n(2) * su2_basis()[2]);
  GaugeMap gm;
  gm.g = [tau, theta](const Vec3& x) -> Mat2c {
    const double th = theta(x);
    return std::cos(th) * Mat2c::Identity() + std::sin(th) * tau;
  };
  gm.dg = [tau, theta, grad_theta](const Vec3& x) {
    const double th = theta(x);
    const Vec3 gt = grad_theta(x);
    const Mat2c gx = std::cos(th) * Mat2c::Identity() + std::sin(th) * tau;
    std::array<Mat2c, 3> d;
    for (int i = 0; i < 3; ++i) d[i] = gt(i) * (tau * gx);
    return d;
  };
  return gm;
}

// ------------------------------------------------------------- isometries

// Hyperbolic translation by distance d along the x3 axis, as a map of the
// ball. On the boundary it acts as z -> e^d z.
inline Vec3 boost_x3(const Vec3& x, double d) {
  const double r2 = x.squaredNorm();
  const double den = 1.0 - r2;
  const double X0 = (1.0 + r2) / den;
  Vec3 Xs = 2.0 * x / den;
  const double ch = std::cosh(d), sh = std::sinh(d);
  const double Y0 = ch * X0 + sh * Xs(2);
  Xs(2) = sh * X0 + ch * Xs(2);
  return Xs / (1.0 + Y0);
}

// Field moved by the translation: f_d = (boost_{-d})^* f. Its centre sits at
// boost_x3(0, d).
inline MonopoleField translated_field(const MonopoleField& f, double d) {
  auto eval = [f, d](const Vec3& x) {
    const Vec3 y = boost_x3(x, -d);
    const FieldSample s = f(y);
    const double h = 1e-6 * (1.0 - x.norm());
    Eigen::Matrix3d J;  // J(j, i) = d y_j / d x_i
    for (int i = 0; i < 3; ++i) {
      Vec3 xp = x, xm = x;
      xp(i) += h;
      xm(i) -= h;
      J.col(i) = (boost_x3(xp, -d) - boost_x3(xm, -d)) / (2.0 * h);
    }
    FieldSample o;
    o.Phi = s.Phi;
    for (int i = 0; i < 3; ++i) o.A[i] = J(0, i) * s.A[0] + J(1, i) * s.A[1] + J(2, i) * s.A[2];
    return o;
  };
  return MonopoleField(eval, f.mass(), f.charge(), f.label() + "+translated", f.profile());
}

// --------------------------------------------------------------- residual

namespace detail {

struct FieldDerivatives {
  std::array<Mat2c, 3> dPhi;
  std::array<std::array<Mat2c, 3>, 3> dA;  // dA[j][k] = d_j A_k
};

inline FieldDerivatives central_derivatives(const MonopoleField& f, const Vec3& x, double h) {
  FieldDerivatives d;
  for (int j = 0; j < 3; ++j) {
    Vec3 xp = x, xm = x;
    xp(j) += h;
    xm(j) -= h;
    const FieldSample p = f(xp), m = f(xm);
    d.dPhi[j] = (p.Phi - m.Phi) / (2.0 * h);
    for (int k = 0; k < 3; ++k) d.dA[j][k] = (p.A[k] - m.A[k]) / (2.0 * h);
  }
  return d;
}

inline double residual_norm(const FieldSample& c, const FieldDerivatives& d, double lam) {
  double acc = 0.0;
  for (int i = 0; i < 3; ++i) {
    const int j = (i + 1) % 3, k = (i + 2) % 3;
    const Mat2c F = d.dA[j][k] - d.dA[k][j] + c.A[j] * c.A[k] - c.A[k] * c.A[j];
    const Mat2c DPhi = d.dPhi[i] + c.A[i] * c.Phi - c.Phi * c.A[i];
    // eps_ijk F_jk / 2 = F_{j k} for the cyclic pair
    acc += (DPhi - kOrientation * F / lam).squaredNorm();
  }
  return std::sqrt(acc);
}

inline double bogomolny_residual_at_step(const MonopoleField& f, const Vec3& x, double h) {
  return residual_norm(f(x), central_derivatives(f, x, h), conformal_factor(x));
}

}  // namespace detail

// Frobenius norm of the Bogomolny residual at x, with Richardson-extrapolated
// central differences at steps h and h/2. h <= 0 selects 1e-3 (1 - |x|).
// StepTooLarge: the stencil leaves the ball, or the extrapolation error
// estimate exceeds the plain h/2 residual (derivatives not resolved).
inline double bogomolny_residual(const MonopoleField& f, const BulkPoint& p, double h = 0.0) {
  const Vec3& x = p.x;
  const double edge = 1.0 - x.norm();
  if (h <= 0.0) h = 1e-3 * edge;
  if (h >= 0.5 * edge) throw Error(ErrorCode::StepTooLarge, "difference stencil leaves the ball");
  const FieldSample c = f(x);
  const double lam = conformal_factor(x);
  const detail::FieldDerivatives d1 = detail::central_derivatives(f, x, h), d2 = detail::central_derivatives(f, x, 0.5 * h);
  detail::FieldDerivatives de;
  for (int j = 0; j < 3; ++j) {
    de.dPhi[j] = (4.0 * d2.dPhi[j] - d1.dPhi[j]) / 3.0;
    for (int k = 0; k < 3; ++k) de.dA[j][k] = (4.0 * d2.dA[j][k] - d1.dA[j][k]) / 3.0;
  }
  const double r = detail::residual_norm(c, de, lam);
  double change = 0.0;
  for (int j = 0; j < 3; ++j) {
    change += (de.dPhi[j] - d2.dPhi[j]).squaredNorm();
    for (int k = 0; k < 3; ++k) change += (de.dA[j][k] - d2.dA[j][k]).squaredNorm();
  }
  change = std::sqrt(change);
  double scale = 0.0;
  for (int j = 0; j < 3; ++j) {
    scale += de.dPhi[j].squaredNorm();
    for (int k = 0; k < 3; ++k) scale += de.dA[j][k].squaredNorm();
  }
  if (change > 0.1 * std::sqrt(scale) + 1e-12)
    throw Error(ErrorCode::StepTooLarge, "derivatives change by more than 10% under step refinement");
  return r;
}

}  // namespace hmono
