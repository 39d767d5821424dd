#pragma once

// Boundary data extracted from the 2-point function: the connection
// coefficient lambda(w, z), its curvature, and the spectral curve as the
// zero set of <P_{w^} P_z>.

#include <algorithm>
#include <array>
#include <cmath>
#include <vector>

#include <Eigen/SVD>

#include "npoint.hpp"
#include "parallel.hpp"

namespace hmono {

struct ConnectionSample {
  BoundaryPoint w, z;
  cplx lambda;
  double err = 0.0;        // |D(h) - D(h/2)|
  bool converged = true;   // halving agreed to 10%
};

namespace detail {

inline double log_two_point(const MonopoleField& f, const BoundaryPoint& w, cplx z, const ScatterOptions& o) {
  const double v = two_point(f, w, BoundaryPoint(z), o).value.real();
  if (!(v > 0.0)) throw Error(ErrorCode::NearSingular, "2-point function vanishes at a stencil point");
  return std::log(v);
}

inline void require_off_singular(const MonopoleField& f, const BoundaryPoint& w, const BoundaryPoint& z,
                                 const ScatterOptions& o) {
  const NPointValue v = two_point(f, w, z, o);
  if (!(v.value.real() > 10.0 * std::max(v.err, 1e-13)))
    throw Error(ErrorCode::NearSingular, "2-point function too small relative to its error");
}

inline ScatterOptions stencil_options(const ScatterOptions& opt, double h, cplx z) {
  ScatterOptions o = opt;
  // Stencil points must never be merged with the base point.
  o.coalesce_tol = std::min(opt.coalesce_tol, 1e-2 * h / (1.0 + std::norm(z)));
  return o;
}

}  // namespace detail

// lambda(w, z) = (1/2) d/dzbar ln <P_w P_z>, by central differences with one
// Richardson halving.
inline ConnectionSample lambda_fd(const MonopoleField& f, const BoundaryPoint& w, const BoundaryPoint& z,
                                  double h = 1e-3, const ScatterOptions& opt = {}) {
  if (z.is_infinite()) throw Error(ErrorCode::InvalidArgument, "lambda_fd needs a finite z");
  const cplx z0 = z.value();
  const ScatterOptions o = detail::stencil_options(opt, 0.5 * h, z0);
  detail::require_off_singular(f, w, z, o);
  auto D = [&](double s) {
    const double dx = (detail::log_two_point(f, w, z0 + s, o) - detail::log_two_point(f, w, z0 - s, o)) / (2 * s);
    const double dy =
        (detail::log_two_point(f, w, z0 + cplx(0, s), o) - detail::log_two_point(f, w, z0 - cplx(0, s), o)) / (2 * s);
    return 0.25 * cplx(dx, dy);
  };
  const cplx d1 = D(h), d2 = D(0.5 * h);
  ConnectionSample c{w, z, (4.0 * d2 - d1) / 3.0, std::abs(d1 - d2), true};
  c.converged = std::abs(d1 - d2) <= 0.1 * std::abs(d2) + 1e-6;
  return c;
}

// d_z d_zbar ln <P_w P_z> = (1/4) Laplacian, five-point stencil with one
// Richardson halving.
inline double curvature_fd(const MonopoleField& f, const BoundaryPoint& z, const BoundaryPoint& w, double h = 5e-3,
                           const ScatterOptions& opt = {}) {
  if (z.is_infinite()) throw Error(ErrorCode::InvalidArgument, "curvature_fd needs a finite z");
  const cplx z0 = z.value();
  const ScatterOptions o = detail::stencil_options(opt, 0.5 * h, z0);
  detail::require_off_singular(f, w, z, o);
  const double c = detail::log_two_point(f, w, z0, o);
  auto L = [&](double s) {
    double acc = -4.0 * c;
    for (cplx d : {cplx(s, 0), cplx(-s, 0), cplx(0, s), cplx(0, -s)}) acc += detail::log_two_point(f, w, z0 + d, o);
    return 0.25 * acc / (s * s);
  };
  const double l1 = L(h), l2 = L(0.5 * h);
  return (4.0 * l2 - l1) / 3.0;
}

// ------------------------------------------------------------------ scans

struct Grid2D {
  double re_min = -2.0, re_max = 2.0, im_min = -2.0, im_max = 2.0;
  int n_re = 40, n_im = 40;

  static Grid2D square(double half_width, int n) { return {-half_width, half_width, -half_width, half_width, n, n}; }
  cplx at(int i, int j) const {
    const double x = n_re > 1 ? re_min + (re_max - re_min) * i / (n_re - 1) : re_min;
    const double y = n_im > 1 ? im_min + (im_max - im_min) * j / (n_im - 1) : im_min;
    return {x, y};
  }
  double spacing() const {
    return std::max(n_re > 1 ? (re_max - re_min) / (n_re - 1) : 0.0, n_im > 1 ? (im_max - im_min) / (n_im - 1) : 0.0);
  }
  std::vector<cplx> points() const {
    std::vector<cplx> out;
    out.reserve(static_cast<std::size_t>(n_re * n_im));
    for (int i = 0; i < n_re; ++i)
      for (int j = 0; j < n_im; ++j) out.push_back(at(i, j));
    return out;
  }
};

struct LocusPoint {
  cplx w, z;
  double value = 0.0;
};

namespace detail {

// Nelder-Mead in the plane.
template <class F>
std::pair<cplx, double> nelder_mead(F&& fn, cplx start, double size, double ftol, int max_iter = 200) {
  std::array<cplx, 3> x{start, start + size, start + cplx(0, size)};
  std::array<double, 3> v{fn(x[0]), fn(x[1]), fn(x[2])};
  for (int it = 0; it < max_iter; ++it) {
    std::array<int, 3> ord{0, 1, 2};
    std::sort(ord.begin(), ord.end(), [&](int a, int b) { return v[a] < v[b]; });
    const int b = ord[0], m = ord[1], wst = ord[2];
    if (v[b] < ftol) break;
    const double extent = std::max(std::abs(x[m] - x[b]), std::abs(x[wst] - x[b]));
    if (extent < 1e-12) break;
    const cplx cen = 0.5 * (x[b] + x[m]);
    const cplx xr = cen + (cen - x[wst]);
    const double vr = fn(xr);
    if (vr < v[b]) {
      const cplx xe = cen + 2.0 * (cen - x[wst]);
      const double ve = fn(xe);
      if (ve < vr) { x[wst] = xe; v[wst] = ve; } else { x[wst] = xr; v[wst] = vr; }
    } else if (vr < v[m]) {
      x[wst] = xr;
      v[wst] = vr;
    } else {
      const bool outside = vr < v[wst];
      const cplx xc = outside ? cen + 0.5 * (xr - cen) : cen + 0.5 * (x[wst] - cen);
      const double vc = fn(xc);
      if (vc < (outside ? vr : v[wst])) {
        x[wst] = xc;
        v[wst] = vc;
      } else {
        for (int i : {m, wst}) {
          x[i] = x[b] + 0.5 * (x[i] - x[b]);
          v[i] = fn(x[i]);
        }
      }
    }
  }
  const int best = static_cast<int>(std::min_element(v.begin(), v.end()) - v.begin());
  return {x[best], v[best]};
}

// Newton iteration on the complex pairing p(z) along (w^, z) at a fixed
// truncation; p is smooth in z and has a simple zero on the spectral curve,
// unlike |p|^2 whose minimum is flat.
inline std::pair<cplx, bool> refine_zero(const MonopoleField& f, const BoundaryPoint& wh, cplx z,
                                         const ScatterOptions& opt, int max_iter = 8) {
  const double T = auto_truncation(f.mass(), opt);
  auto p = [&](cplx x) { return scatter_geodesic(f, wh, BoundaryPoint(x), T, opt).pair.value; };
  for (int it = 0; it < max_iter; ++it) {
    const double h = 1e-5 * (1.0 + std::abs(z));
    const cplx p0 = p(z);
    const cplx px = (p(z + h) - p0) / h, py = (p(z + cplx(0, h)) - p0) / h;
    Eigen::Matrix2d J;
    J << px.real(), py.real(), px.imag(), py.imag();
    if (!(std::abs(J.determinant()) > 0.0)) return {z, false};
    const Eigen::Vector2d d = J.partialPivLu().solve(Eigen::Vector2d(-p0.real(), -p0.imag()));
    z += cplx(d(0), d(1));
    if (std::hypot(d(0), d(1)) < 1e-12 * (1.0 + std::abs(z))) return {z, true};
  }
  return {z, true};
}

}  // namespace detail

struct ScanOptions {
  double threshold = 1e-3;
  unsigned workers = 1;
  double dedup_radius = 1e-3;
};

// Local minima of z -> <P_{w^} P_z> over the z grid for each w, polished by
// Nelder-Mead and kept when below the threshold. Ordered by (w, z).
inline std::vector<LocusPoint> spectral_scan(const MonopoleField& f, const std::vector<cplx>& w_grid,
                                             const Grid2D& z_grid, const ScanOptions& so = {},
                                             const ScatterOptions& opt = {}) {
  ScatterOptions fast = opt;
  fast.richardson = false;
  const int nr = z_grid.n_re, ni = z_grid.n_im;
  const double cutoff = std::max(10.0 * so.threshold, z_grid.spacing() * z_grid.spacing());

  struct Candidate {
    std::size_t w_index;
    cplx z;
  };
  std::vector<std::pair<std::size_t, std::size_t>> jobs;  // (w, z) grid evaluations
  const std::size_t nz = static_cast<std::size_t>(nr * ni);
  for (std::size_t a = 0; a < w_grid.size(); ++a)
    for (std::size_t b = 0; b < nz; ++b) jobs.emplace_back(a, b);
  const auto zs = z_grid.points();
  std::vector<BoundaryPoint> what;
  for (cplx w : w_grid) what.push_back(antipode(BoundaryPoint(w)));
  const auto vals = parallel_map(jobs.size(), so.workers, [&](std::size_t k) {
    return two_point(f, what[jobs[k].first], BoundaryPoint(zs[jobs[k].second]), fast).value.real();
  });

  std::vector<Candidate> cands;
  for (std::size_t a = 0; a < w_grid.size(); ++a) {
    auto V = [&](int i, int j) { return vals[a * nz + static_cast<std::size_t>(i * ni + j)]; };
    for (int i = 0; i < nr; ++i)
      for (int j = 0; j < ni; ++j) {
        const double v = V(i, j);
        if (v >= cutoff) continue;
        bool is_min = true;
        for (int di = -1; di <= 1 && is_min; ++di)
          for (int dj = -1; dj <= 1; ++dj) {
            if (!di && !dj) continue;
            const int ii = i + di, jj = j + dj;
            if (ii < 0 || jj < 0 || ii >= nr || jj >= ni) continue;
            if (V(ii, jj) < v) { is_min = false; break; }
          }
        if (is_min) cands.push_back({a, z_grid.at(i, j)});
      }
  }

  const double size = 0.5 * z_grid.spacing();
  auto polished = parallel_map(cands.size(), so.workers, [&](std::size_t k) {
    const BoundaryPoint wh = what[cands[k].w_index];
    auto fn = [&](cplx z) { return two_point(f, wh, BoundaryPoint(z), fast).value.real(); };
    auto [z, v] = detail::nelder_mead(fn, cands[k].z, size, 1e-3 * so.threshold);
    if (v < so.threshold) {
      const auto [zr, ok] = detail::refine_zero(f, wh, z, opt);
      if (ok && std::abs(zr - z) < size) z = zr;
    }
    const double final_v = two_point(f, wh, BoundaryPoint(z), opt).value.real();
    return LocusPoint{w_grid[cands[k].w_index], z, final_v};
  });

  std::vector<LocusPoint> out;
  for (const auto& p : polished) {
    if (!(p.value < so.threshold)) continue;
    const bool dup = std::any_of(out.begin(), out.end(), [&](const LocusPoint& q) {
      return q.w == p.w && std::abs(q.z - p.z) < so.dedup_radius;
    });
    if (!dup) out.push_back(p);
  }
  std::sort(out.begin(), out.end(), [](const LocusPoint& a, const LocusPoint& b) {
    auto key = [](const LocusPoint& p) {
      return std::array<double, 4>{p.w.real(), p.w.imag(), p.z.real(), p.z.imag()};
    };
    return key(a) < key(b);
  });
  return out;
}

// Number of locus points on the line w = w0: a scan-based charge estimate.
inline int estimate_charge(const MonopoleField& f, cplx w0, const Grid2D& z_grid, const ScanOptions& so = {},
                           const ScatterOptions& opt = {}) {
  return static_cast<int>(spectral_scan(f, {w0}, z_grid, so, opt).size());
}

// ------------------------------------------------------------------ fits

// psi(w, z) = sum_{a,b} c(a, b) w^a z^b, bidegree (k, k).
struct SpectralCurveFit {
  int k = 0;
  MatXc coeffs;
  double fit_residual = 0.0;  // rms of psi over the locus

  cplx operator()(cplx w, cplx z) const {
    cplx acc = 0.0, wa = 1.0;
    for (int a = 0; a <= k; ++a, wa *= w) {
      cplx zb = 1.0;
      for (int b = 0; b <= k; ++b, zb *= z) acc += coeffs(a, b) * wa * zb;
    }
    return acc;
  }
};

// Trace of the Hermitian form G_ab = (-1)^a c(k-a, b), used to fix the phase.
inline cplx spectral_trace(const MatXc& c) {
  const int k = static_cast<int>(c.rows()) - 1;
  cplx t = 0.0;
  for (int a = 0; a <= k; ++a) t += (a % 2 ? -1.0 : 1.0) * c(k - a, a);
  return t;
}

inline SpectralCurveFit normalize_fit(int k, MatXc c) {
  c /= c.norm();
  cplx t = spectral_trace(c);
  cplx ref = t;
  if (std::abs(t) < 1e-8) {
    for (Eigen::Index i = 0; i < c.size(); ++i)
      if (std::abs(c.data()[i]) > 1e-8) { ref = c.data()[i]; break; }
  }
  if (std::abs(ref) > 0.0) c *= std::abs(ref) / ref;
  SpectralCurveFit fit;
  fit.k = k;
  fit.coeffs = c;
  return fit;
}

inline SpectralCurveFit fit_spectral_poly(const std::vector<LocusPoint>& locus, int k) {
  if (k < 1) throw Error(ErrorCode::InvalidArgument, "bidegree must be at least 1");
  const int nb = (k + 1) * (k + 1);
  if (static_cast<int>(locus.size()) < 2 * nb)
    throw Error(ErrorCode::RankDeficient, "too few locus points for a bidegree-(k,k) fit");
  MatXc D(static_cast<Eigen::Index>(locus.size()), nb);
  for (std::size_t r = 0; r < locus.size(); ++r) {
    cplx wa = 1.0;
    for (int a = 0; a <= k; ++a, wa *= locus[r].w) {
      cplx zb = 1.0;
      for (int b = 0; b <= k; ++b, zb *= locus[r].z) D(static_cast<Eigen::Index>(r), a * (k + 1) + b) = wa * zb;
    }
  }
  Eigen::JacobiSVD<MatXc> svd(D, Eigen::ComputeFullV);
  const auto& sv = svd.singularValues();
  const double smax = sv(0);
  if (!(smax > 0.0) || sv(nb - 2) < 1e-8 * smax)
    throw Error(ErrorCode::RankDeficient, "design matrix has more than one null direction");
  const Eigen::VectorXcd v = svd.matrixV().col(nb - 1);
  MatXc c(k + 1, k + 1);
  for (int a = 0; a <= k; ++a)
    for (int b = 0; b <= k; ++b) c(a, b) = v(a * (k + 1) + b);
  SpectralCurveFit fit = normalize_fit(k, c);
  double acc = 0.0;
  for (const auto& p : locus) acc += std::norm(fit(p.w, p.z));
  fit.fit_residual = std::sqrt(acc / static_cast<double>(locus.size()));
  return fit;
}

// Rows (z, lambda, F) of the connection map over a z grid; entries on the
// singular set are NaN.
struct ConnectionMapRow {
  cplx z;
  cplx lambda;
  double F;
};

inline std::vector<ConnectionMapRow> connection_map(const MonopoleField& f, const BoundaryPoint& w, const Grid2D& grid,
                                                    unsigned workers = 1, const ScatterOptions& opt = {}) {
  const auto zs = grid.points();
  return parallel_map(zs.size(), workers, [&](std::size_t k) {
    ConnectionMapRow row{zs[k], cplx(NAN, NAN), NAN};
    try {
      row.lambda = lambda_fd(f, w, zs[k], 1e-3, opt).lambda;
      row.F = curvature_fd(f, zs[k], w, 5e-3, opt);
    } catch (const Error& e) {
      if (e.code() != ErrorCode::NearSingular) throw;
    }
    return row;
  });
}

}  // namespace hmono
