#pragma once

// Holomorphic spheres q: S^2 -> CP^N given by polynomial representatives,
// the rank-one projections they induce, and trace n-point functions.

#include <algorithm>
#include <array>
#include <cmath>
#include <vector>

#include <Eigen/Eigenvalues>
#include <Eigen/SVD>

#include "boundary.hpp"
#include "nahm.hpp"
#include "poly.hpp"

namespace hmono {

// Component i of the unnormalized representative is sum_b U(i, b) z^b.
struct HoloSphere {
  int k = 1;
  MatXc U;

  int components() const { return static_cast<int>(U.rows()); }

  VecXc at(cplx z) const { return U * powers(z, k); }

  // Value at a boundary point; at infinity, the highest nonvanishing column.
  VecXc at(const BoundaryPoint& z) const {
    if (!z.is_infinite()) return at(z.value());
    const double scale = U.norm();
    for (Eigen::Index j = U.cols() - 1; j >= 0; --j)
      if (U.col(j).norm() > 1e-14 * scale) return U.col(j);
    return U.col(U.cols() - 1);
  }

  VecXc derivative(cplx z) const {
    VecXc dp = VecXc::Zero(k + 1);
    cplx a = 1.0;
    for (int b = 1; b <= k; ++b, a *= z) dp(b) = static_cast<double>(b) * a;
    return U * dp;
  }

  // Same map in the chart w = 1/z: w^k q(1/w).
  HoloSphere flipped() const { return HoloSphere{k, U.rowwise().reverse()}; }

  static HoloSphere identity() { return HoloSphere{1, MatXc::Identity(2, 2)}; }
  static HoloSphere veronese() {
    MatXc U = MatXc::Zero(3, 3);
    U(0, 0) = 1.0;
    U(1, 1) = std::sqrt(2.0);
    U(2, 2) = 1.0;
    return HoloSphere{2, U};
  }
};

struct Projection {
  MatXc R;
};

namespace detail {

inline VecXc unit_representative(const HoloSphere& q, const BoundaryPoint& z) {
  const VecXc v = q.at(z);
  const double n = v.norm();
  const double scale = q.U.norm() * (z.is_infinite() ? 1.0 : std::max(1.0, std::pow(std::abs(z.value()), q.k)));
  if (!(n > 1e-12 * scale)) throw Error(ErrorCode::BasePoint, "all components vanish at this point");
  return v / n;
}

}  // namespace detail

inline Projection projection(const HoloSphere& q, const BoundaryPoint& z) {
  const VecXc u = detail::unit_representative(q, z);
  return Projection{u * u.adjoint()};
}

// tr R_{z1} ... R_{zn} = <q1|q2><q2|q3>...<qn|q1> for unit representatives.
inline cplx trace_npoint(const HoloSphere& q, const PointTuple& tuple) {
  if (tuple.points.empty()) throw Error(ErrorCode::InvalidArgument, "empty point tuple");
  std::vector<VecXc> u;
  u.reserve(tuple.points.size());
  for (const auto& z : tuple.points) u.push_back(detail::unit_representative(q, z));
  cplx acc = 1.0;
  for (std::size_t i = 0; i < u.size(); ++i) acc *= herm(u[i], u[(i + 1) % u.size()]);
  return acc;
}

// ------------------------------------------------------------------ degree

struct DegreeInfo {
  int degree = 0;                   // max component degree after removing common roots
  int root_count = 0;               // zeros of z -> (q(w0^), q(z)), common roots excluded
  std::vector<cplx> common_roots;
};

inline DegreeInfo degree_info(const HoloSphere& q, cplx w0 = cplx(0.37, -0.61)) {
  DegreeInfo info;
  const double scale = q.U.norm();
  if (scale == 0.0) throw Error(ErrorCode::BasePoint, "zero map");
  auto deg = [&](const VecXc& c) {
    for (Eigen::Index i = c.size() - 1; i >= 0; --i)
      if (std::abs(c(i)) > 1e-12 * scale) return static_cast<int>(i);
    return -1;
  };
  std::vector<VecXc> comps;
  for (int i = 0; i < q.components(); ++i) comps.push_back(q.U.row(i).transpose());
  // Roots of the highest-degree component are the only common-root candidates.
  std::size_t lead = 0;
  for (std::size_t i = 1; i < comps.size(); ++i)
    if (deg(comps[i]) > deg(comps[lead])) lead = i;
  for (cplx r : poly::roots(comps[lead].head(std::max(deg(comps[lead]), 0) + 1))) {
    bool common = true;
    for (const auto& c : comps) {
      const double sz = c.cwiseAbs().sum() * std::max(1.0, std::pow(std::abs(r), q.k));
      if (std::abs(poly::eval(c, r)) > 1e-7 * std::max(sz, 1e-300)) common = false;
    }
    if (common) {
      info.common_roots.push_back(r);
      for (auto& c : comps) {
        VecXc d = poly::deflate(c, r);
        c = VecXc::Zero(c.size());
        c.head(d.size()) = d;
      }
    }
  }
  info.degree = 0;
  for (const auto& c : comps) info.degree = std::max(info.degree, deg(c));
  // Independent count: zeros in z of the pairing against q(antipode(w0)).
  const VecXc qa = q.at(BoundaryPoint(antipode(w0)));
  VecXc pz = VecXc::Zero(q.k + 1);
  for (std::size_t i = 0; i < comps.size(); ++i)
    pz += std::conj(qa(static_cast<Eigen::Index>(i))) * q.U.row(static_cast<Eigen::Index>(i)).transpose();
  for (cplx r : info.common_roots) {
    VecXc d = poly::deflate(pz, r);
    pz = VecXc::Zero(pz.size());
    pz.head(d.size()) = d;
  }
  info.root_count = static_cast<int>(poly::roots(pz, 1e-10).size());
  return info;
}

inline int degree(const HoloSphere& q) { return degree_info(q).degree; }

// ------------------------------------------------------------ construction

inline HoloSphere q_from_monad(const MonadData& md, bool allow_degenerate = false) {
  HoloSphere q{md.k(), monad_coefficients(md)};
  if (!allow_degenerate) {
    const int d = degree(q);
    if (d < q.k)
      throw Error(ErrorCode::DegenerateMap, "map degree " + std::to_string(d) + " is below the charge " + std::to_string(q.k));
  }
  return q;
}

struct SpectralFactorization {
  HoloSphere q;
  MatXc G;
  int rank = 0;
  double hermitian_defect = 0.0;
  double min_eigenvalue = 0.0;  // relative to the largest
};

// G_ab = (-1)^a psi_{(k-a), b} with psi indexed (w power, z power).
inline MatXc gram_from_spectral(const MatXc& coeffs) {
  const Eigen::Index k = coeffs.rows() - 1;
  MatXc G(k + 1, k + 1);
  for (Eigen::Index a = 0; a <= k; ++a)
    for (Eigen::Index b = 0; b <= k; ++b) G(a, b) = ((a % 2) ? -1.0 : 1.0) * coeffs(k - a, b);
  return G;
}

inline MatXc spectral_from_gram(const MatXc& G) {
  const Eigen::Index k = G.rows() - 1;
  MatXc c(k + 1, k + 1);
  for (Eigen::Index a = 0; a <= k; ++a)
    for (Eigen::Index b = 0; b <= k; ++b) c(k - a, b) = ((a % 2) ? -1.0 : 1.0) * G(a, b);
  return c;
}

inline SpectralFactorization factor_spectral(const MatXc& coeffs) {
  if (coeffs.rows() != coeffs.cols() || coeffs.rows() < 2)
    throw Error(ErrorCode::ShapeMismatch, "spectral coefficients must be (k+1)x(k+1), k >= 1");
  SpectralFactorization out;
  out.G = gram_from_spectral(coeffs);
  const double gn = out.G.norm();
  if (gn == 0.0) throw Error(ErrorCode::NotPositive, "zero spectral polynomial");
  out.hermitian_defect = (out.G - out.G.adjoint()).norm() / gn;
  if (out.hermitian_defect > 1e-6)
    throw Error(ErrorCode::NotPositive, "coefficient matrix is not Hermitian (defect " + std::to_string(out.hermitian_defect) + ")");
  const MatXc H = 0.5 * (out.G + out.G.adjoint());
  Eigen::SelfAdjointEigenSolver<MatXc> es(H);
  const Eigen::VectorXd lam = es.eigenvalues();
  const double top = lam.cwiseAbs().maxCoeff();
  out.min_eigenvalue = lam.minCoeff() / top;
  if (out.min_eigenvalue < -1e-6)
    throw Error(ErrorCode::NotPositive, "coefficient matrix has a negative eigenvalue (" + std::to_string(out.min_eigenvalue) + ")");
  const Eigen::Index n = lam.size();
  MatXc U = MatXc::Zero(n, n);
  for (Eigen::Index i = 0; i < n; ++i) {
    if (lam(i) > 1e-8 * top) ++out.rank;
    U.row(i) = std::sqrt(std::max(lam(i), 0.0)) * es.eigenvectors().col(i).adjoint();
  }
  out.q = HoloSphere{static_cast<int>(n - 1), U};
  return out;
}

inline HoloSphere q_from_spectral(const SpectralCurveFit& fit) { return factor_spectral(fit.coeffs).q; }

// psi(w, z) = w^k (q(w^), q(z)) as coefficients (w power, z power).
inline MatXc spectral_coefficients(const HoloSphere& q) { return spectral_from_gram(q.U.adjoint() * q.U); }

// --------------------------------------------------------------- curvature

namespace detail {

inline double log_norm2(const HoloSphere& q, cplx z) {
  const double n = q.at(z).squaredNorm();
  if (!(n > 0.0)) throw Error(ErrorCode::BasePoint, "all components vanish at this point");
  return std::log(n);
}

}  // namespace detail

// kappa = d_z d_zbar ln |q(z)|^2, exact for the polynomial representative.
inline double fs_curvature_exact(const HoloSphere& q, const BoundaryPoint& z) {
  if (z.is_infinite()) return fs_curvature_exact(q.flipped(), BoundaryPoint(cplx(0.0, 0.0)));
  const VecXc a = q.at(z.value());
  const VecXc d = q.derivative(z.value());
  const double n2 = a.squaredNorm();
  if (!(n2 > 0.0)) throw Error(ErrorCode::BasePoint, "all components vanish at this point");
  return (n2 * d.squaredNorm() - std::norm(herm(a, d))) / (n2 * n2);
}

// Same quantity from a Richardson-extrapolated five-point Laplacian.
inline double fs_curvature(const HoloSphere& q, const BoundaryPoint& z, double h = 1e-3) {
  if (h <= 0.0) throw Error(ErrorCode::InvalidArgument, "step must be positive");
  if (z.is_infinite()) return fs_curvature(q.flipped(), BoundaryPoint(cplx(0.0, 0.0)), h);
  const cplx z0 = z.value();
  detail::unit_representative(q, z);
  auto lap = [&](double s) {
    const double c = detail::log_norm2(q, z0);
    return (detail::log_norm2(q, z0 + s) + detail::log_norm2(q, z0 - s) + detail::log_norm2(q, z0 + cplx(0, s)) +
            detail::log_norm2(q, z0 - cplx(0, s)) - 4.0 * c) /
           (s * s);
  };
  return 0.25 * (4.0 * lap(0.5 * h) - lap(h)) / 3.0;
}

// (1/pi) * integral of kappa over the sphere; equals the degree.
inline double fs_degree_integral(const HoloSphere& q, int n_theta = 256, int n_phi = 64) {
  double acc = 0.0;
  const double dth = M_PI / n_theta, dph = 2.0 * M_PI / n_phi;
  for (int i = 0; i < n_theta; ++i) {
    const double th = (i + 0.5) * dth;
    const double r = std::tan(0.5 * th);
    const double c = std::cos(0.5 * th);
    const double jac = r * 0.5 / (c * c);  // r dr/dtheta
    for (int j = 0; j < n_phi; ++j) acc += fs_curvature_exact(q, BoundaryPoint(std::polar(r, j * dph))) * jac;
  }
  return acc * dth * dph / M_PI;
}

// -------------------------------------------------------- 4-point tensor

struct FourPointTensor {
  std::vector<BoundaryPoint> basepoints;
  MatXc g;     // g((i,j),(k,l)) = tr R_i R_j R_k R_l, pair index i*n + j
  MatXc ginv;  // truncated-SVD pseudo-inverse
  double cond = 0.0;
  int rank = 0;
};

inline FourPointTensor four_point_tensor(const HoloSphere& q, const std::vector<BoundaryPoint>& basepoints,
                                         double pinv_tol = 1e-10, double max_cond = 1e8) {
  const std::size_t n = basepoints.size();
  if (n < 1) throw Error(ErrorCode::InvalidArgument, "need base points");
  std::vector<VecXc> u;
  for (const auto& b : basepoints) u.push_back(detail::unit_representative(q, b));
  MatXc ip(n, n);
  for (std::size_t i = 0; i < n; ++i)
    for (std::size_t j = 0; j < n; ++j) ip(static_cast<Eigen::Index>(i), static_cast<Eigen::Index>(j)) = herm(u[i], u[j]);
  const auto nn = static_cast<Eigen::Index>(n);
  const Eigen::Index N = nn * nn;
  FourPointTensor t;
  t.basepoints = basepoints;
  t.g.resize(N, N);
  for (Eigen::Index i = 0; i < nn; ++i)
    for (Eigen::Index j = 0; j < nn; ++j)
      for (Eigen::Index k = 0; k < nn; ++k)
        for (Eigen::Index l = 0; l < nn; ++l)
          t.g(i * nn + j, k * nn + l) = ip(i, j) * ip(j, k) * ip(k, l) * ip(l, i);
  Eigen::JacobiSVD<MatXc> svd(t.g, Eigen::ComputeFullU | Eigen::ComputeFullV);
  const Eigen::VectorXd s = svd.singularValues();
  const double smax = s(0);
  t.cond = s(s.size() - 1) > 0.0 ? smax / s(s.size() - 1) : INFINITY;
  Eigen::VectorXd sinv = Eigen::VectorXd::Zero(s.size());
  for (Eigen::Index i = 0; i < s.size(); ++i)
    if (s(i) > pinv_tol * smax) {
      sinv(i) = 1.0 / s(i);
      ++t.rank;
    }
  t.ginv = svd.matrixV() * sinv.asDiagonal() * svd.matrixU().adjoint();
  if (!(t.cond < max_cond))
    throw Error(ErrorCode::DegenerateBasepoints, "4-point tensor condition number " + std::to_string(t.cond));
  return t;
}

// <P_w P_z> from 3-point data alone: sum b_kl g^{(kl),(ij)} c_ij with
// b_kl = <P_w P_k P_l> and c_ij = <P_i P_j P_z>.
inline cplx four_point_reconstruct(const HoloSphere& q, const FourPointTensor& t, const BoundaryPoint& w,
                                   const BoundaryPoint& z) {
  const std::size_t n = t.basepoints.size();
  VecXc b(static_cast<Eigen::Index>(n * n)), c(static_cast<Eigen::Index>(n * n));
  for (std::size_t i = 0; i < n; ++i)
    for (std::size_t j = 0; j < n; ++j) {
      const auto idx = static_cast<Eigen::Index>(i * n + j);
      b(idx) = trace_npoint(q, PointTuple{{w, t.basepoints[i], t.basepoints[j]}});
      c(idx) = trace_npoint(q, PointTuple{{t.basepoints[i], t.basepoints[j], z}});
    }
  return (b.transpose() * t.ginv * c)(0, 0);
}

inline cplx four_point_reconstruct(const HoloSphere& q, const std::vector<BoundaryPoint>& basepoints,
                                   const BoundaryPoint& w, const BoundaryPoint& z) {
  return four_point_reconstruct(q, four_point_tensor(q, basepoints), w, z);
}

// ------------------------------------------------- k = 2 subalgebra at w

struct SubalgebraStructure {
  BoundaryPoint w, z1, z2;
  cplx tau;                       // tr R1 R2
  std::array<MatXc, 4> basis;     // R1, R2, R1R2, R2R1
  // table[a](c, b): coefficient of basis c in basis[a] * basis[b]
  std::array<MatXc, 4> table;
  double closure_residual = 0.0;
};

inline SubalgebraStructure subalgebra_structure(const HoloSphere& q, const BoundaryPoint& w) {
  if (q.k != 2) throw Error(ErrorCode::InvalidArgument, "subalgebra structure needs a degree-2 sphere");
  const VecXc qw = detail::unit_representative(q, w);
  const VecXc pz = (q.U.adjoint() * qw).conjugate();  // coefficients of <q(w)|q(z)> in z
  const double scale = pz.cwiseAbs().maxCoeff();
  if (!(scale > 0.0)) throw Error(ErrorCode::DegenerateRoots, "pairing vanishes identically");
  std::vector<BoundaryPoint> zs;
  for (cplx r : poly::roots(pz, 1e-12)) zs.emplace_back(r);
  while (zs.size() < 2) zs.push_back(BoundaryPoint::infinity());  // lost leading degree
  SubalgebraStructure s;
  s.w = w;
  s.z1 = zs[0];
  s.z2 = zs[1];
  if (chordal_distance(s.z1, s.z2) < 1e-5) throw Error(ErrorCode::DegenerateRoots, "the two orthogonal points coincide");
  const MatXc R1 = projection(q, s.z1).R, R2 = projection(q, s.z2).R;
  s.tau = (R1 * R2).trace();
  s.basis = {R1, R2, R1 * R2, R2 * R1};
  const Eigen::Index d = R1.size();
  MatXc B(d, 4);
  for (int a = 0; a < 4; ++a) B.col(a) = Eigen::Map<const VecXc>(s.basis[static_cast<std::size_t>(a)].data(), d);
  const Eigen::CompleteOrthogonalDecomposition<MatXc> cod(B);
  for (int a = 0; a < 4; ++a) {
    s.table[static_cast<std::size_t>(a)] = MatXc(4, 4);
    for (int b = 0; b < 4; ++b) {
      const MatXc P = s.basis[static_cast<std::size_t>(a)] * s.basis[static_cast<std::size_t>(b)];
      const VecXc pv = Eigen::Map<const VecXc>(P.data(), d);
      const VecXc coef = cod.solve(pv);
      s.table[static_cast<std::size_t>(a)].col(b) = coef;
      s.closure_residual = std::max(s.closure_residual, (B * coef - pv).norm());
    }
  }
  return s;
}

}  // namespace hmono
