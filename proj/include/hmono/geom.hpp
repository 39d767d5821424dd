#pragma once

// Ball model of hyperbolic 3-space, its boundary sphere charted as the
// Riemann sphere, and unit-speed geodesics between boundary points.

#include <cmath>

#include "core.hpp"

namespace hmono {

// Extended complex number: a finite value or the point at infinity.
class BoundaryPoint {
 public:
  BoundaryPoint() = default;
  BoundaryPoint(cplx z) : z_(z) {}  // NOLINT: implicit by design
  BoundaryPoint(double x) : z_(x, 0.0) {}  // NOLINT
  static BoundaryPoint infinity() {
    BoundaryPoint p;
    p.inf_ = true;
    return p;
  }

  bool is_infinite() const { return inf_; }
  cplx value() const {
    if (inf_) throw Error(ErrorCode::OutOfRange, "value() of the point at infinity");
    return z_;
  }
  // Finite value or a huge stand-in; only for display or sorting.
  cplx value_or_large() const { return inf_ ? cplx(1e300, 0.0) : z_; }

  friend bool operator==(const BoundaryPoint& a, const BoundaryPoint& b) {
    return a.inf_ == b.inf_ && (a.inf_ || a.z_ == b.z_);
  }

 private:
  cplx z_{0.0, 0.0};
  bool inf_ = false;
};

// Inverse stereographic chart: z = (x1 + i x2)/(1 - x3).
inline Vec3 to_sphere(const BoundaryPoint& p) {
  if (p.is_infinite()) return {0.0, 0.0, 1.0};
  const cplx z = p.value();
  const double r = std::abs(z);
  if (r <= 1.0) {
    const double d = 1.0 + r * r;
    return {2.0 * z.real() / d, 2.0 * z.imag() / d, (r * r - 1.0) / d};
  }
  // Work with 1/z to avoid overflow for large |z|.
  const cplx w = 1.0 / z;
  const double s = std::norm(w);
  const double d = 1.0 + s;
  const cplx c = 2.0 * std::conj(w) / d;
  return {c.real(), c.imag(), (1.0 - s) / d};
}

inline BoundaryPoint from_sphere(const Vec3& u) {
  const Vec3 n = u.normalized();
  if (n.z() > 0.0) {
    // Stable form for the upper hemisphere: (x1 + i x2)/(1 - x3) = (1 + x3)/(x1 - i x2).
    const cplx d(n.x(), -n.y());
    if (std::abs(d) == 0.0) return BoundaryPoint::infinity();
    return BoundaryPoint((1.0 + n.z()) / d);
  }
  return BoundaryPoint(cplx(n.x(), n.y()) / (1.0 - n.z()));
}

inline BoundaryPoint antipode(const BoundaryPoint& p) {
  if (p.is_infinite()) return BoundaryPoint(cplx(0.0, 0.0));
  const cplx z = p.value();
  if (z == cplx(0.0, 0.0)) return BoundaryPoint::infinity();
  return BoundaryPoint(-1.0 / std::conj(z));
}

// Euclidean distance between the images on the unit sphere.
inline double chordal_distance(const BoundaryPoint& a, const BoundaryPoint& b) {
  return (to_sphere(a) - to_sphere(b)).norm();
}

struct BulkPoint {
  Vec3 x = Vec3::Zero();
  BulkPoint() = default;
  explicit BulkPoint(const Vec3& v) : x(v) {
    if (!(v.squaredNorm() < 1.0)) throw Error(ErrorCode::OutOfRange, "bulk point outside the open unit ball");
  }
};

inline double conformal_factor(const Vec3& x) { return 2.0 / (1.0 - x.squaredNorm()); }

inline double hyperbolic_distance_to_origin(const Vec3& x) {
  const double r = x.norm();
  return 2.0 * std::atanh(r);
}

struct GeodesicSample {
  BulkPoint point;
  Vec3 tangent;  // Euclidean components of dx/dt
};

// Oriented geodesic from `start` to `end`, unit speed, with t = 0 at the point
// nearest the origin. Built on the hyperboloid: X(t) = (e^{-t} Na + e^{t} Nb)/c
// with null vectors Na = (1, ua), Nb = (1, ub) and c^2 = -2<Na,Nb>.
class Geodesic {
 public:
  Geodesic(BoundaryPoint start, BoundaryPoint end, double T) : start_(start), end_(end), T_(T) {
    if (!(T > 0.0)) throw Error(ErrorCode::InvalidArgument, "truncation half-length must be positive");
    ua_ = to_sphere(start);
    ub_ = to_sphere(end);
    const double chord = (ua_ - ub_).norm();
    if (chord < 1e-9) throw Error(ErrorCode::CoincidentEndpoints, "geodesic endpoints coincide");
    c_ = chord;  // sqrt(2(1 - ua.ub)) equals the chordal distance
  }

  const BoundaryPoint& start() const { return start_; }
  const BoundaryPoint& end() const { return end_; }
  double T() const { return T_; }
  const Vec3& start_dir() const { return ua_; }
  const Vec3& end_dir() const { return ub_; }

  Geodesic with_T(double T) const { return Geodesic(start_, end_, T); }
  Geodesic reversed() const { return Geodesic(end_, start_, T_); }

  bool same_curve(const Geodesic& o) const { return start_ == o.start_ && end_ == o.end_ && T_ == o.T_; }

  // No range check: used by the integrator and by tail estimates.
  void eval_unchecked(double t, Vec3& x, Vec3& dx) const {
    const double em = std::exp(-t) / c_, ep = std::exp(t) / c_;
    const double X0 = em + ep;
    const double dX0 = ep - em;
    const Vec3 Xs = em * ua_ + ep * ub_;
    const Vec3 dXs = ep * ub_ - em * ua_;
    const double d = 1.0 + X0;
    x = Xs / d;
    dx = dXs / d - Xs * (dX0 / (d * d));
  }

  GeodesicSample at(double t) const {
    if (std::abs(t) > T_ * (1.0 + 1e-14)) throw Error(ErrorCode::OutOfRange, "geodesic parameter beyond truncation");
    Vec3 x, dx;
    eval_unchecked(t, x, dx);
    GeodesicSample s;
    s.point.x = x;
    s.tangent = dx;
    return s;
  }

 private:
  BoundaryPoint start_, end_;
  double T_;
  Vec3 ua_, ub_;
  double c_ = 1.0;
};

inline Geodesic make_geodesic(const BoundaryPoint& a, const BoundaryPoint& b, double T) { return Geodesic(a, b, T); }

inline GeodesicSample geodesic_point(const Geodesic& g, double t) { return g.at(t); }

}  // namespace hmono
