#pragma once

// Boundary n-point functions: cyclic products of pairings along the
// geodesic polygon z1 -> z2 -> ... -> zn -> z1, with the phase of each
// r-solution chained to the preceding s-solution at their shared endpoint.

#include <cmath>
#include <functional>
#include <string>
#include <vector>

#include "parallel.hpp"
#include "scatter.hpp"

namespace hmono {

struct PointTuple {
  std::vector<BoundaryPoint> points;
};

struct NPointValue {
  cplx value{0.0, 0.0};
  double err = 0.0;
  double constancy = 0.0;   // summed pairing constancy deviations
  double drift = 0.0;       // change under T -> 1.25 T
  double T = 0.0;           // truncation used for `value`
  std::size_t effective_n = 0;
  bool reduced = false;     // coalescent points were merged
};

// Cyclically merges consecutive points closer than `tol` (P_z P_z = P_z).
inline std::vector<BoundaryPoint> reduce_coalescent(std::vector<BoundaryPoint> pts, double tol) {
  bool changed = true;
  while (changed && pts.size() > 1) {
    changed = false;
    for (std::size_t i = 0; i < pts.size() && pts.size() > 1; ++i) {
      const std::size_t j = (i + 1) % pts.size();
      if (chordal_distance(pts[i], pts[j]) < tol) {
        pts.erase(pts.begin() + static_cast<std::ptrdiff_t>(j));
        changed = true;
        break;
      }
    }
  }
  return pts;
}

namespace detail {

struct ChainResult {
  cplx value;
  double constancy;
};

inline ChainResult chain_product(const MonopoleField& f, const std::vector<BoundaryPoint>& pts, double T,
                                 const ScatterOptions& opt) {
  const std::size_t n = pts.size();
  std::vector<GeodesicScatter> gs;
  gs.reserve(n);
  for (std::size_t i = 0; i < n; ++i) gs.push_back(scatter_geodesic(f, pts[i], pts[(i + 1) % n], T, opt));
  static const double kCosMaxAngle = std::cos(1e-2);
  ChainResult out{cplx(1.0, 0.0), 0.0};
  for (std::size_t i = 0; i < n; ++i) {
    const GeodesicScatter& prev = gs[(i + n - 1) % n];
    const cplx c = herm(gs[i].limit_r_start(), prev.limit_s_end());
    if (std::abs(c) < kCosMaxAngle)
      throw Error(ErrorCode::ChainingFailure, "boundary limits at a shared endpoint are not parallel");
    out.value *= gs[i].pair.value * std::conj(c / std::abs(c));
    out.constancy += gs[i].pair.constancy_dev;
  }
  return out;
}

struct Extrapolated {
  double T;
  double drift;
};

// Runs eval(T) and eval(1.25 T), lengthening T while the two disagree by
// more than drift_tol. eval returns a scalar summary whose drift is
// monitored; the caller keeps the full results.
inline Extrapolated richardson_loop(double m, const ScatterOptions& opt, const std::function<cplx(double)>& eval,
                                    cplx& value_out) {
  double T = auto_truncation(m, opt);
  cplx v = eval(T);
  if (!opt.richardson) {
    value_out = v;
    return {T, 0.0};
  }
  for (;;) {
    const cplx v2 = eval(1.25 * T);
    const double drift = std::abs(v2 - v);
    const bool fixed = opt.T > 0.0;
    if (drift <= opt.drift_tol || fixed || 1.25 * 1.25 * T > opt.T_max) {
      value_out = v;
      return {T, drift};
    }
    T *= 1.25;
    v = v2;
  }
}

inline double constancy_at(const std::vector<std::pair<double, double>>& runs, double T) {
  for (const auto& [t, c] : runs)
    if (t == T) return c;
  return 0.0;
}

}  // namespace detail

inline NPointValue two_point(const MonopoleField& f, const BoundaryPoint& z1, const BoundaryPoint& z2,
                             const ScatterOptions& opt = {}) {
  NPointValue out;
  if (chordal_distance(z1, z2) < opt.coalesce_tol) {
    out.value = 1.0;
    out.reduced = true;
    out.effective_n = 1;
    return out;
  }
  std::vector<std::pair<double, double>> constancy;  // (T, deviation) per run
  auto eval = [&](double T) {
    GeodesicScatter gs = scatter_geodesic(f, z1, z2, T, opt);
    constancy.emplace_back(T, gs.pair.constancy_dev);
    return cplx(std::norm(gs.pair.value), 0.0);
  };
  cplx v;
  const auto ex = detail::richardson_loop(f.mass(), opt, eval, v);
  out.value = cplx(v.real(), 0.0);
  out.T = ex.T;
  out.drift = ex.drift;
  out.constancy = detail::constancy_at(constancy, ex.T);
  out.err = 2.0 * std::sqrt(v.real()) * out.constancy + ex.drift;
  out.effective_n = 2;
  return out;
}

inline NPointValue n_point(const MonopoleField& f, const PointTuple& tuple, const ScatterOptions& opt = {}) {
  if (tuple.points.empty()) throw Error(ErrorCode::InvalidArgument, "empty point tuple");
  NPointValue out;
  const auto pts = reduce_coalescent(tuple.points, opt.coalesce_tol);
  out.reduced = pts.size() != tuple.points.size();
  out.effective_n = pts.size();
  if (pts.size() == 1) {
    out.value = 1.0;
    return out;
  }
  std::vector<std::pair<double, double>> constancy;
  auto eval = [&](double T) {
    auto c = detail::chain_product(f, pts, T, opt);
    constancy.emplace_back(T, c.constancy);
    return c.value;
  };
  cplx v;
  const auto ex = detail::richardson_loop(f.mass(), opt, eval, v);
  out.value = v;
  out.T = ex.T;
  out.drift = ex.drift;
  out.constancy = detail::constancy_at(constancy, ex.T);
  out.err = out.constancy + ex.drift;
  return out;
}

struct GramResult {
  Eigen::MatrixXd M;
  double max_err = 0.0;
};

inline GramResult gram_matrix(const MonopoleField& f, const std::vector<BoundaryPoint>& pts,
                              const ScatterOptions& opt = {}, unsigned workers = 1) {
  const std::size_t n = pts.size();
  if (n < 2) throw Error(ErrorCode::InvalidArgument, "gram matrix needs at least two points");
  std::vector<std::pair<std::size_t, std::size_t>> idx;
  for (std::size_t i = 0; i < n; ++i)
    for (std::size_t j = i + 1; j < n; ++j) idx.emplace_back(i, j);
  auto vals = parallel_map(idx.size(), workers, [&](std::size_t k) {
    return two_point(f, pts[idx[k].first], pts[idx[k].second], opt);
  });
  GramResult g;
  g.M = Eigen::MatrixXd::Identity(static_cast<Eigen::Index>(n), static_cast<Eigen::Index>(n));
  for (std::size_t k = 0; k < idx.size(); ++k) {
    const auto [i, j] = idx[k];
    g.M(static_cast<Eigen::Index>(i), static_cast<Eigen::Index>(j)) = vals[k].value.real();
    g.M(static_cast<Eigen::Index>(j), static_cast<Eigen::Index>(i)) = vals[k].value.real();
    g.max_err = std::max(g.max_err, vals[k].err);
  }
  return g;
}

struct RelationResult {
  cplx c;
  double err = 0.0;
  BoundaryPoint z0;
};

// c = <P_z0 P_z1 a P_z2> / <P_z0 P_z1 b P_z2> for the first probe z0 whose
// denominator exceeds ten times its error.
inline RelationResult relation_constant(const MonopoleField& f, const std::vector<BoundaryPoint>& z0_candidates,
                                        const BoundaryPoint& z1, const BoundaryPoint& z2, const PointTuple& a,
                                        const PointTuple& b, const ScatterOptions& opt = {}) {
  auto build = [&](const BoundaryPoint& z0, const PointTuple& mid) {
    PointTuple t;
    t.points.push_back(z0);
    t.points.push_back(z1);
    t.points.insert(t.points.end(), mid.points.begin(), mid.points.end());
    t.points.push_back(z2);
    return t;
  };
  const bool same = a.points == b.points;
  for (const auto& z0 : z0_candidates) {
    const NPointValue den = n_point(f, build(z0, b), opt);
    if (!(std::abs(den.value) > 10.0 * std::max(den.err, 1e-14))) continue;
    if (same) return {cplx(1.0, 0.0), 0.0, z0};
    const NPointValue num = n_point(f, build(z0, a), opt);
    RelationResult r;
    r.c = num.value / den.value;
    r.err = (num.err + std::abs(r.c) * den.err) / std::abs(den.value);
    r.z0 = z0;
    return r;
  }
  throw Error(ErrorCode::DegenerateProbe, "no probe point gives a usable denominator");
}

// Central-difference derivatives (d/dz, d/dzbar) of the n-point function in
// one slot.
inline std::pair<cplx, cplx> npoint_derivatives(const MonopoleField& f, const PointTuple& tuple, std::size_t slot,
                                                double step = 1e-3, const ScatterOptions& opt = {}) {
  if (slot >= tuple.points.size() || tuple.points[slot].is_infinite())
    throw Error(ErrorCode::InvalidArgument, "derivative slot must hold a finite point");
  auto at = [&](cplx dz) {
    PointTuple t = tuple;
    t.points[slot] = BoundaryPoint(tuple.points[slot].value() + dz);
    return n_point(f, t, opt).value;
  };
  const cplx dx = (at(step) - at(-step)) / (2.0 * step);
  const cplx dy = (at(cplx(0, step)) - at(cplx(0, -step))) / (2.0 * step);
  return {0.5 * (dx - I * dy), 0.5 * (dx + I * dy)};
}

}  // namespace hmono
