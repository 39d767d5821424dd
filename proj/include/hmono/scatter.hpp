#pragma once

// Decaying solutions of (d/dt + A_t -/+ i Phi) psi = 0 along geodesics.
//
// Both solution types are integrated in exponentially rescaled form,
// u = e^{+mt} s for s-type and u = e^{-mt} r for r-type, which keeps every
// quantity O(1) on [-T, T]; the pairing (r, s) equals (u_r, u_s) because
// the scale factors cancel.

#include <cmath>
#include <cstdint>
#include <cstring>
#include <memory>

#include <Eigen/Eigenvalues>

#include "field.hpp"
#include "geom.hpp"
#include "ode.hpp"

namespace hmono {

struct ScatterOptions {
  double rtol = 1e-10;
  double atol = 1e-12;
  double T = 0.0;          // truncation half-length; 0 selects it from T_tol
  double T_tol = 1e-8;     // target for the truncation error e^{-mT}
  double T_min = 8.0;
  double T_max = 28.0;
  double drift_tol = 1e-8; // Richardson drift that triggers a longer truncation
  int constancy_samples = 41;
  double coalesce_tol = 1e-3;
  std::uint64_t phase_seed = 0;  // 0 keeps the deterministic convention
  bool richardson = true;
};

inline double auto_truncation(double m, const ScatterOptions& o) {
  if (o.T > 0.0) return o.T;
  const double rate = std::min(m, 1.0);
  return std::min(o.T_max, std::max(o.T_min, std::log(1.0 / o.T_tol) / rate));
}

enum class End { Start, Finish };

class ScatterSolution {
 public:
  using Traj = ode::DenseTrajectory<Vec2c>;

  ScatterSolution(Geodesic g, int sign, double m, std::shared_ptr<const Traj> traj, double norm_residual)
      : geodesic_(std::move(g)), sign_(sign), m_(m), traj_(std::move(traj)), norm_residual_(norm_residual) {}

  const Geodesic& geodesic() const { return geodesic_; }
  int sign() const { return sign_; }
  double mass() const { return m_; }
  double norm_residual() const { return norm_residual_; }
  const Traj& trajectory() const { return *traj_; }

  // Rescaled solution u(t).
  Vec2c rescaled(double t) const { return (*traj_)(t); }
  // Actual solution: s(t) = e^{-mt} u(t) or r(t) = e^{mt} u(t).
  Vec2c value(double t) const { return std::exp(-sign_ * m_ * t) * rescaled(t); }
  // ln ||solution(t)||, without overflow.
  double log_norm(double t) const { return std::log(rescaled(t).norm()) - sign_ * m_ * t; }

 private:
  Geodesic geodesic_;
  int sign_;
  double m_;
  std::shared_ptr<const Traj> traj_;
  double norm_residual_;
};

namespace detail {

inline std::uint64_t mix_double(std::uint64_t h, double v) {
  std::uint64_t bits;
  std::memcpy(&bits, &v, sizeof bits);
  return splitmix(h ^ bits);
}

// Deterministic pseudo-random phase attached to (seed, geodesic, sign).
inline double seeded_phase(std::uint64_t seed, const Geodesic& g, int sign) {
  std::uint64_t h = splitmix(seed);
  for (const Vec3* u : {&g.start_dir(), &g.end_dir()})
    for (int i = 0; i < 3; ++i) h = mix_double(h, (*u)(i));
  h = splitmix(h ^ static_cast<std::uint64_t>(sign + 2));
  return 2.0 * M_PI * static_cast<double>(h >> 11) * 0x1.0p-53;
}

// Simpson estimate of 2 * integral of (m - |Phi|) over the tail beyond the
// truncation point, the first-order drift of the norm normalization.
inline double tail_drift(const MonopoleField& f, const Geodesic& g, int sign) {
  const double m = f.mass();
  const double L = 8.0;
  const int n = 32;
  const double T = g.T();
  double acc = 0.0;
  for (int i = 0; i <= n; ++i) {
    const double t = sign * (T + L * i / n);
    Vec3 x, dx;
    g.eval_unchecked(t, x, dx);
    if (!(x.squaredNorm() < 1.0)) break;
    const double gap = std::max(0.0, m - op_norm(f(x).Phi));
    const double w = (i == 0 || i == n) ? 1.0 : (i % 2 ? 4.0 : 2.0);
    acc += w * gap;
  }
  return 2.0 * acc * (L / n) / 3.0;
}

}  // namespace detail

// sign = +1: s-type, decays at the end (t -> +T). sign = -1: r-type, decays
// at the start (t -> -T).
inline ScatterSolution decaying_solution(const MonopoleField& f, const Geodesic& g, int sign,
                                         const ScatterOptions& opt = {}) {
  if (sign != 1 && sign != -1) throw Error(ErrorCode::InvalidArgument, "sign must be +1 or -1");
  const double m = f.mass();
  const double T = g.T();
  const double t0 = sign * T;

  const GeodesicSample p0 = g.at(t0);
  const Mat2c H = I * f(p0.point.x).Phi;
  const double phi_norm = op_norm(H);
  if (phi_norm < 0.9 * m)
    throw Error(ErrorCode::TruncationTooShort, "Higgs field at the truncation point is below 0.9 m");
  Eigen::SelfAdjointEigenSolver<Mat2c> es(H);
  const auto ev = es.eigenvalues();
  if (ev(1) - ev(0) < 0.5 * m) throw Error(ErrorCode::EigenGapTooSmall, "eigenvalue gap below 0.5 m");

  Vec2c u0 = es.eigenvectors().col(0);
  u0.normalize();
  for (int i = 0; i < 2; ++i) {
    if (std::abs(u0(i)) > 1e-10) {
      u0 *= std::abs(u0(i)) / u0(i);
      break;
    }
  }
  if (opt.phase_seed != 0) u0 *= std::polar(1.0, detail::seeded_phase(opt.phase_seed, g, sign));

  const double sg = static_cast<double>(sign);
  auto rhs = [&f, &g, m, sg](double t, const Vec2c& u) -> Vec2c {
    Vec3 x, dx;
    g.eval_unchecked(t, x, dx);
    const FieldSample s = f(x);
    const Mat2c At = dx(0) * s.A[0] + dx(1) * s.A[1] + dx(2) * s.A[2];
    return sg * (I * (s.Phi * u) + m * u) - At * u;
  };
  ode::Options o;
  o.rtol = opt.rtol;
  o.atol = opt.atol;
  auto traj = std::make_shared<const ScatterSolution::Traj>(ode::integrate<Vec2c>(rhs, t0, u0, -t0, o));
  return ScatterSolution(g, sign, m, traj, detail::tail_drift(f, g, sign));
}

struct PairingResult {
  cplx value;
  double constancy_dev = 0.0;
};

inline PairingResult pairing(const ScatterSolution& r, const ScatterSolution& s, int samples = 41) {
  if (r.sign() != -1 || s.sign() != 1) throw Error(ErrorCode::MismatchedGeodesic, "pairing needs an r-type and an s-type solution");
  if (!r.geodesic().same_curve(s.geodesic())) throw Error(ErrorCode::MismatchedGeodesic, "solutions live on different geodesics");
  PairingResult out;
  out.value = herm(r.rescaled(0.0), s.rescaled(0.0));
  const double T = s.geodesic().T();
  samples = std::max(samples, 2);
  for (int i = 0; i < samples; ++i) {
    const double t = -T + 2.0 * T * i / (samples - 1);
    out.constancy_dev = std::max(out.constancy_dev, std::abs(herm(r.rescaled(t), s.rescaled(t)) - out.value));
  }
  return out;
}

// Unit limit vector in the global trivialization at one end of the geodesic.
inline Vec2c boundary_limit(const ScatterSolution& sol, End at) {
  const double T = sol.geodesic().T();
  return sol.rescaled(at == End::Finish ? T : -T).normalized();
}

// Both decaying solutions on one geodesic and their pairing.
struct GeodesicScatter {
  Geodesic geodesic;
  ScatterSolution r;
  ScatterSolution s;
  PairingResult pair;
  Vec2c limit_r_start() const { return boundary_limit(r, End::Start); }
  Vec2c limit_s_end() const { return boundary_limit(s, End::Finish); }
};

inline GeodesicScatter scatter_geodesic(const MonopoleField& f, const BoundaryPoint& a, const BoundaryPoint& b,
                                        double T, const ScatterOptions& opt = {}) {
  Geodesic g(a, b, T);
  ScatterSolution r = decaying_solution(f, g, -1, opt);
  ScatterSolution s = decaying_solution(f, g, +1, opt);
  PairingResult p = pairing(r, s, opt.constancy_samples);
  return GeodesicScatter{g, std::move(r), std::move(s), p};
}

}  // namespace hmono
