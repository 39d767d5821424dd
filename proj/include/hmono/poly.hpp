#pragma once

// Dense complex polynomials in ascending coefficient order.

#include <vector>

#include <Eigen/Eigenvalues>

#include "core.hpp"

namespace hmono::poly {

inline cplx eval(const VecXc& c, cplx z) {
  cplx acc = 0.0;
  for (Eigen::Index i = c.size() - 1; i >= 0; --i) acc = acc * z + c(i);
  return acc;
}

inline VecXc derivative(const VecXc& c) {
  if (c.size() <= 1) return VecXc::Zero(1);
  VecXc d(c.size() - 1);
  for (Eigen::Index i = 1; i < c.size(); ++i) d(i - 1) = static_cast<double>(i) * c(i);
  return d;
}

// Index of the highest coefficient above tol * max|c|; -1 for the zero polynomial.
inline int degree(const VecXc& c, double rel_tol = 1e-12) {
  const double scale = c.size() ? c.cwiseAbs().maxCoeff() : 0.0;
  if (scale == 0.0) return -1;
  for (Eigen::Index i = c.size() - 1; i >= 0; --i)
    if (std::abs(c(i)) > rel_tol * scale) return static_cast<int>(i);
  return -1;
}

// Roots via companion-matrix eigenvalues.
inline std::vector<cplx> roots(const VecXc& c, double rel_tol = 1e-12) {
  const int d = degree(c, rel_tol);
  if (d <= 0) return {};
  MatXc comp = MatXc::Zero(d, d);
  for (int i = 1; i < d; ++i) comp(i, i - 1) = 1.0;
  for (int i = 0; i < d; ++i) comp(i, d - 1) = -c(i) / c(d);
  Eigen::ComplexEigenSolver<MatXc> es(comp, false);
  std::vector<cplx> out(es.eigenvalues().data(), es.eigenvalues().data() + d);
  return out;
}

// Synthetic division by (z - r); the remainder is dropped.
inline VecXc deflate(const VecXc& c, cplx r) {
  const Eigen::Index n = c.size();
  if (n <= 1) return VecXc::Zero(1);
  VecXc q(n - 1);
  cplx carry = c(n - 1);
  q(n - 2) = carry;
  for (Eigen::Index i = n - 2; i >= 1; --i) {
    carry = c(i) + carry * r;
    q(i - 1) = carry;
  }
  return q;
}

// Faddeev-LeVerrier: det(zI - A) = sum_j c_j z^j (monic) and
// adj(zI - A) = sum_{i=1}^{k} M_i z^{k-i}.
struct CharAdj {
  VecXc charpoly;
  std::vector<MatXc> M;  // M[i-1] multiplies z^{k-i}
};

inline CharAdj char_adj(const MatXc& A) {
  const Eigen::Index k = A.rows();
  CharAdj out;
  out.charpoly = VecXc::Zero(k + 1);
  out.charpoly(k) = 1.0;
  MatXc Mprev = MatXc::Zero(k, k);
  for (Eigen::Index i = 1; i <= k; ++i) {
    MatXc Mi = A * Mprev + out.charpoly(k - i + 1) * MatXc::Identity(k, k);
    out.charpoly(k - i) = -(A * Mi).trace() / static_cast<double>(i);
    out.M.push_back(Mi);
    Mprev = Mi;
  }
  return out;
}

}  // namespace hmono::poly
