#pragma once

// Discrete Nahm data for half-integer mass, the gauge action, a
// least-squares solver, and the monad map z -> beta(z) in CP^k.

#include <cmath>
#include <cstdint>
#include <map>
#include <random>
#include <string>
#include <vector>

#include <Eigen/Eigenvalues>

#include "geom.hpp"
#include "parallel.hpp"
#include "poly.hpp"

namespace hmono {

// Half-integer mass stored as the odd integer 2m.
struct HalfInt {
  int twice = 3;
  double value() const { return 0.5 * twice; }
  std::string str() const { return std::to_string(twice) + "/2"; }
  static HalfInt parse(const std::string& s);
};

inline HalfInt HalfInt::parse(const std::string& s) {
  int two = 0;
  const auto slash = s.find('/');
  try {
    if (slash != std::string::npos) {
      if (std::stoi(s.substr(slash + 1)) != 2) throw Error(ErrorCode::ParseError, "mass denominator must be 2");
      two = std::stoi(s.substr(0, slash));
    } else {
      const double v = std::stod(s);
      two = static_cast<int>(std::lround(2.0 * v));
      if (std::abs(2.0 * v - two) > 1e-12) throw Error(ErrorCode::ParseError, "mass is not a half-integer");
    }
  } catch (const std::logic_error&) {
    throw Error(ErrorCode::ParseError, "cannot parse mass '" + s + "'");
  }
  if (two <= 0 || two % 2 == 0) throw Error(ErrorCode::ParseError, "mass must be a positive half-odd-integer");
  return HalfInt{two};
}

struct NahmData {
  int k = 1;
  HalfInt m;
  std::map<int, MatXc> beta;   // even j, |j| <= 2m - 1
  std::map<int, MatXc> gamma;  // odd j, |j| <= 2m - 2
  VecXc v;

  int top() const { return m.twice - 1; }  // 2m - 1

  static NahmData zero(int k, HalfInt m) {
    NahmData d;
    d.k = k;
    d.m = m;
    for (int j = -d.top(); j <= d.top(); j += 2) d.beta[j] = MatXc::Zero(k, k);
    for (int j = -d.top() + 1; j <= d.top() - 1; j += 2) d.gamma[j] = MatXc::Zero(k, k);
    d.v = VecXc::Zero(k);
    return d;
  }
};

// Unitary g_j on the same (even) index set as beta, with g_{-j} = conj(g_j).
struct GaugeTuple {
  int k = 1;
  HalfInt m;
  std::map<int, MatXc> g;

  static GaugeTuple identity(int k, HalfInt m) {
    GaugeTuple t;
    t.k = k;
    t.m = m;
    for (int j = -(m.twice - 1); j <= m.twice - 1; j += 2) t.g[j] = MatXc::Identity(k, k);
    return t;
  }
};

struct MonadData {
  MatXc beta0;  // beta_{-2m+1}
  VecXc v;
  int k() const { return static_cast<int>(beta0.rows()); }
};

inline MonadData monad(const NahmData& d) { return MonadData{d.beta.at(-d.top()), d.v}; }

namespace detail {

inline void check_shapes(const NahmData& d) {
  const int t = d.top();
  auto ok = [&](const MatXc& M) { return M.rows() == d.k && M.cols() == d.k; };
  if (d.k < 1 || d.v.size() != d.k) throw Error(ErrorCode::ShapeMismatch, "v has the wrong length");
  if (static_cast<int>(d.beta.size()) != t + 1 || static_cast<int>(d.gamma.size()) != t)
    throw Error(ErrorCode::ShapeMismatch, "wrong number of blocks for this mass");
  for (int j = -t; j <= t; j += 2)
    if (!d.beta.count(j) || !ok(d.beta.at(j))) throw Error(ErrorCode::ShapeMismatch, "beta block missing or misshapen");
  for (int j = -t + 1; j <= t - 1; j += 2)
    if (!d.gamma.count(j) || !ok(d.gamma.at(j))) throw Error(ErrorCode::ShapeMismatch, "gamma block missing or misshapen");
}

inline MatXc comm(const MatXc& a, const MatXc& b) { return a * b - b * a; }

// Calls sink(block) for every equation block, in a fixed order.
template <class Sink>
void nahm_equations(const NahmData& d, Sink&& sink) {
  const int t = d.top();
  const auto& B = d.beta;
  const auto& G = d.gamma;
  for (int j = -t + 1; j <= t - 1; j += 2) sink(MatXc(B.at(j - 1) * G.at(j) - G.at(j) * B.at(j + 1)));
  for (int j = -t + 2; j <= t - 2; j += 2) {
    const MatXc& b = B.at(j);
    sink(MatXc(comm(b.adjoint(), b) + G.at(j - 1).adjoint() * G.at(j - 1) - G.at(j + 1) * G.at(j + 1).adjoint()));
  }
  const MatXc& bt = B.at(t);
  MatXc last = comm(bt, bt.adjoint()) + d.v * d.v.adjoint();
  if (t >= 2) last -= G.at(t - 1).adjoint() * G.at(t - 1);
  sink(last);
}

}  // namespace detail

// Sum of squared Frobenius norms of the equations plus transpose-symmetry
// violations.
inline double nahm_residual(const NahmData& d) {
  detail::check_shapes(d);
  double acc = 0.0;
  detail::nahm_equations(d, [&](const MatXc& M) { acc += M.squaredNorm(); });
  for (const auto& [j, b] : d.beta) acc += (b - d.beta.at(-j).transpose()).squaredNorm();
  for (const auto& [j, c] : d.gamma) acc += (c - d.gamma.at(-j).transpose()).squaredNorm();
  return acc;
}

inline NahmData gauge_act(const NahmData& d, const GaugeTuple& g) {
  detail::check_shapes(d);
  if (g.k != d.k || g.m.twice != d.m.twice || static_cast<int>(g.g.size()) != d.top() + 1)
    throw Error(ErrorCode::ShapeMismatch, "gauge tuple does not match the data");
  NahmData o = d;
  for (auto& [j, b] : o.beta) b = g.g.at(j) * d.beta.at(j) * g.g.at(j).inverse();
  for (auto& [j, c] : o.gamma) c = g.g.at(j - 1) * d.gamma.at(j) * g.g.at(j + 1).inverse();
  o.v = g.g.at(d.top()) * d.v;
  return o;
}

inline MatXc random_unitary(int k, std::mt19937_64& rng) {
  std::normal_distribution<double> N(0.0, 1.0);
  MatXc Z(k, k);
  for (Eigen::Index i = 0; i < Z.size(); ++i) Z.data()[i] = cplx(N(rng), N(rng));
  Eigen::HouseholderQR<MatXc> qr(Z);
  MatXc Q = qr.householderQ();
  const MatXc R = qr.matrixQR().triangularView<Eigen::Upper>();
  for (int i = 0; i < k; ++i) {
    const cplx r = R(i, i);
    if (std::abs(r) > 0.0) Q.col(i) *= r / std::abs(r);
  }
  return Q;
}

inline GaugeTuple random_gauge_tuple(int k, HalfInt m, std::mt19937_64& rng) {
  GaugeTuple t = GaugeTuple::identity(k, m);
  std::normal_distribution<double> N(0.0, 1.0);
  for (int j = 2; j <= m.twice - 1; j += 2) {
    t.g[j] = random_unitary(k, rng);
    t.g[-j] = t.g[j].conjugate();
  }
  // g_0 = conj(g_0): real orthogonal.
  Eigen::MatrixXd Z(k, k);
  for (Eigen::Index i = 0; i < Z.size(); ++i) Z.data()[i] = N(rng);
  Eigen::HouseholderQR<Eigen::MatrixXd> qr(Z);
  Eigen::MatrixXd Q = qr.householderQ();
  t.g[0] = Q.cast<cplx>();
  return t;
}

inline NahmData random_nahm_data(int k, HalfInt m, std::mt19937_64& rng, double scale = 1.0) {
  std::normal_distribution<double> N(0.0, scale);
  auto rnd = [&] {
    MatXc M(k, k);
    for (Eigen::Index i = 0; i < M.size(); ++i) M.data()[i] = cplx(N(rng), N(rng));
    return M;
  };
  NahmData d = NahmData::zero(k, m);
  for (int j = 0; j <= d.top(); j += 2) {
    d.beta[j] = rnd();
    if (j == 0) d.beta[0] = 0.5 * (d.beta[0] + d.beta[0].transpose()).eval();
    if (j > 0) d.beta[-j] = d.beta[j].transpose();
  }
  for (int j = 1; j <= d.top() - 1; j += 2) {
    d.gamma[j] = rnd();
    d.gamma[-j] = d.gamma[j].transpose();
  }
  for (int i = 0; i < k; ++i) d.v(i) = cplx(N(rng), N(rng));
  return d;
}

// ------------------------------------------------------------------ solver

struct NahmSolveOptions {
  int restarts = 20;
  int max_iter = 400;
  double target = 1e-24;  // stop once the objective drops below this
  double accept = 1e-8;   // certificate on nahm_residual
  unsigned workers = 1;
};

struct NahmSolveResult {
  NahmData data;
  double residual = 0.0;
  int restart = -1;
  int iterations = 0;
};

namespace detail {

// Real parameter vector for the j >= 0 blocks; beta_0 is symmetric.
struct NahmParam {
  int k;
  HalfInt m;
  int size() const {
    const int t = m.twice - 1;
    const int nbeta = t / 2;  // j = 2, 4, ..., t
    const int ngamma = (t + 1) / 2;  // j = 1, 3, ..., t - 1
    return 2 * (k * (k + 1) / 2 + (nbeta + ngamma) * k * k + k);
  }
  NahmData unpack(const Eigen::VectorXd& x) const {
    NahmData d = NahmData::zero(k, m);
    const int t = d.top();
    int p = 0;
    auto next = [&] {
      const cplx c(x(p), x(p + 1));
      p += 2;
      return c;
    };
    MatXc b0(k, k);
    for (int i = 0; i < k; ++i)
      for (int j = i; j < k; ++j) b0(i, j) = b0(j, i) = next();
    d.beta[0] = b0;
    for (int j = 2; j <= t; j += 2) {
      MatXc M(k, k);
      for (Eigen::Index q = 0; q < M.size(); ++q) M.data()[q] = next();
      d.beta[j] = M;
      d.beta[-j] = M.transpose();
    }
    for (int j = 1; j <= t - 1; j += 2) {
      MatXc M(k, k);
      for (Eigen::Index q = 0; q < M.size(); ++q) M.data()[q] = next();
      d.gamma[j] = M;
      d.gamma[-j] = M.transpose();
    }
    for (int i = 0; i < k; ++i) d.v(i) = next();
    return d;
  }
};

inline Eigen::VectorXd solver_residuals(const NahmParam& P, const Eigen::VectorXd& x) {
  const NahmData d = P.unpack(x);
  std::vector<double> r;
  nahm_equations(d, [&](const MatXc& M) {
    for (Eigen::Index q = 0; q < M.size(); ++q) {
      r.push_back(M.data()[q].real());
      r.push_back(M.data()[q].imag());
    }
  });
  // The equations are homogeneous; pin the scale with |v| = 1.
  r.push_back(d.v.squaredNorm() - 1.0);
  return Eigen::Map<Eigen::VectorXd>(r.data(), static_cast<Eigen::Index>(r.size()));
}

struct LMOutcome {
  Eigen::VectorXd x;
  double cost;
  int iterations;
};

inline LMOutcome levenberg_marquardt(const NahmParam& P, Eigen::VectorXd x, const NahmSolveOptions& o) {
  Eigen::VectorXd r = solver_residuals(P, x);
  double cost = r.squaredNorm();
  double mu = -1.0;
  int it = 0;
  for (; it < o.max_iter && cost > o.target; ++it) {
    Eigen::MatrixXd J(r.size(), x.size());
    for (Eigen::Index i = 0; i < x.size(); ++i) {
      const double h = 1e-7 * std::max(1.0, std::abs(x(i)));
      Eigen::VectorXd xp = x, xm = x;
      xp(i) += h;
      xm(i) -= h;
      J.col(i) = (solver_residuals(P, xp) - solver_residuals(P, xm)) / (2.0 * h);
    }
    const Eigen::MatrixXd JtJ = J.transpose() * J;
    const Eigen::VectorXd g = J.transpose() * r;
    if (mu < 0.0) mu = 1e-3 * JtJ.diagonal().maxCoeff();
    bool improved = false;
    for (int tries = 0; tries < 30; ++tries) {
      Eigen::MatrixXd A = JtJ;
      A.diagonal().array() += mu * JtJ.diagonal().array().max(1e-12);
      const Eigen::VectorXd step = A.ldlt().solve(-g);
      const Eigen::VectorXd xn = x + step;
      const Eigen::VectorXd rn = solver_residuals(P, xn);
      const double cn = rn.squaredNorm();
      if (cn < cost) {
        x = xn;
        r = rn;
        cost = cn;
        mu = std::max(mu / 3.0, 1e-15);
        improved = true;
        break;
      }
      mu *= 4.0;
    }
    if (!improved) break;
  }
  return {x, cost, it};
}

// Canonical representative: v = |v| e1 and beta_{-2m+1} upper Hessenberg.
inline NahmData gauge_fix(const NahmData& d) {
  const int k = d.k;
  const int t = d.top();
  GaugeTuple g = GaugeTuple::identity(k, d.m);
  // Householder reflection sending v to |v| e1, made unitary-with-phase.
  MatXc H = MatXc::Identity(k, k);
  const double nv = d.v.norm();
  if (nv > 0.0) {
    const cplx v0 = d.v(0);
    const cplx ph = std::abs(v0) > 0.0 ? v0 / std::abs(v0) : cplx(1.0, 0.0);
    VecXc u = d.v;
    u(0) += ph * nv;
    const double un = u.squaredNorm();
    if (un > 0.0) H -= 2.0 * u * u.adjoint() / un;
    H *= -std::conj(ph);  // H v = |v| e1
  }
  MatXc W = H;
  if (k > 2) {
    // beta_{-t} -> conj(W) beta_{-t} conj(W)^{-1}; choose W = P^T H with
    // conj(H) beta conj(H)^* = P Hess P^* and P e1 = e1.
    const MatXc Hb = H.conjugate() * d.beta.at(-t) * H.conjugate().adjoint();
    Eigen::HessenbergDecomposition<MatXc> hd(Hb);
    const MatXc P = hd.matrixQ();
    W = P.transpose() * H;
  }
  g.g[t] = W;
  g.g[-t] = W.conjugate();
  return gauge_act(d, g);
}

}  // namespace detail

inline NahmSolveResult solve_nahm(int k, HalfInt m, std::uint64_t seed, const NahmSolveOptions& o = {}) {
  if (k < 1) throw Error(ErrorCode::InvalidArgument, "charge must be at least 1");
  if (m.twice == 1)
    throw Error(ErrorCode::DegenerateMass,
                "m = 1/2: no gamma blocks, so [beta_0, beta_0^*] + v v^* = 0 with beta_0 symmetric; the trace forces v = 0 and the monad is degenerate");
  const detail::NahmParam P{k, m};
  const double scale = 1.0 / std::sqrt(static_cast<double>(k));
  auto runs = parallel_map(static_cast<std::size_t>(o.restarts), o.workers, [&](std::size_t idx) {
    std::mt19937_64 rng(detail::stream_seed(seed, idx));
    std::normal_distribution<double> N(0.0, scale);
    Eigen::VectorXd x(P.size());
    for (Eigen::Index i = 0; i < x.size(); ++i) x(i) = N(rng);
    return detail::levenberg_marquardt(P, x, o);
  });
  int best = 0;
  for (int i = 1; i < o.restarts; ++i)
    if (runs[static_cast<std::size_t>(i)].cost < runs[static_cast<std::size_t>(best)].cost) best = i;
  NahmSolveResult res;
  res.data = detail::gauge_fix(P.unpack(runs[static_cast<std::size_t>(best)].x));
  res.residual = nahm_residual(res.data);
  res.restart = best;
  res.iterations = runs[static_cast<std::size_t>(best)].iterations;
  if (!(res.residual < o.accept))
    throw Error(ErrorCode::NonConvergence, "best restart left residual " + std::to_string(res.residual));
  return res;
}

// ------------------------------------------------------------- monad map

// Coefficient matrix U of beta(z): rows are components (k top entries, then
// the determinant), columns powers of z.
//   top(z) = -adj(beta^T - z) v,   bottom(z) = det(beta - z).
inline MatXc monad_coefficients(const MonadData& md) {
  const int k = md.k();
  if (md.beta0.cols() != k || md.v.size() != k) throw Error(ErrorCode::ShapeMismatch, "monad shapes disagree");
  const poly::CharAdj ca = poly::char_adj(md.beta0.transpose());
  const double sgn = (k % 2) ? -1.0 : 1.0;  // (-1)^k
  MatXc U = MatXc::Zero(k + 1, k + 1);
  // adj(beta^T - z) = (-1)^{k-1} adj(z - beta^T), det(beta - z) = (-1)^k det(z - beta)
  for (int i = 1; i <= k; ++i) U.block(0, k - i, k, 1) = sgn * (ca.M[static_cast<std::size_t>(i - 1)] * md.v);
  for (int j = 0; j <= k; ++j) U(k, j) = sgn * ca.charpoly(j);
  return U;
}

inline VecXc powers(cplx z, int k) {
  VecXc p(k + 1);
  cplx a = 1.0;
  for (int i = 0; i <= k; ++i, a *= z) p(i) = a;
  return p;
}

inline VecXc beta_map(const MonadData& md, const BoundaryPoint& z) {
  const MatXc U = monad_coefficients(md);
  if (!z.is_infinite()) return U * powers(z.value(), md.k());
  for (Eigen::Index j = U.cols() - 1; j >= 0; --j)
    if (U.col(j).norm() > 0.0) return U.col(j);
  return U.col(U.cols() - 1);
}

// (beta(w^), beta(z)) in closed form: det((beta^T - z)(conj(beta) + 1/w) + v v^*).
// w = infinity drops the 1/w term.
inline cplx spectral_det(const MonadData& md, const BoundaryPoint& w, const BoundaryPoint& z) {
  if (z.is_infinite()) throw Error(ErrorCode::InvalidArgument, "spectral_det needs a finite z");
  const int k = md.k();
  const MatXc Id = MatXc::Identity(k, k);
  cplx winv = 0.0;
  if (!w.is_infinite()) {
    if (w.value() == cplx(0.0, 0.0)) throw Error(ErrorCode::InvalidArgument, "w = 0: use spectral_poly");
    winv = 1.0 / w.value();
  }
  const MatXc M = (md.beta0.transpose() - z.value() * Id) * (md.beta0.conjugate() + winv * Id) + md.v * md.v.adjoint();
  return M.determinant();
}

// w^k spectral_det, a polynomial of bidegree (k, k).
inline cplx spectral_poly(const MonadData& md, cplx w, cplx z) {
  const int k = md.k();
  const MatXc Id = MatXc::Identity(k, k);
  const MatXc M = (md.beta0.transpose() - z * Id) * (w * md.beta0.conjugate() + Id) + w * (md.v * md.v.adjoint());
  return M.determinant();
}

// (det(1 + u v^*), 1 + (v, u)).
inline std::pair<cplx, cplx> rank_one_det(const VecXc& u, const VecXc& v) {
  if (u.size() != v.size()) throw Error(ErrorCode::ShapeMismatch, "vectors differ in length");
  const MatXc M = MatXc::Identity(u.size(), u.size()) + u * v.adjoint();
  return {M.determinant(), 1.0 + herm(v, u)};
}

}  // namespace hmono
