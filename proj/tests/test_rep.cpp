#include <gtest/gtest.h>

#include <functional>
#include <random>

#include <hmono/rep.hpp>

using namespace hmono;

namespace {

MatXc random_matrix(int r, int c, std::mt19937_64& rng) {
  std::normal_distribution<double> N(0.0, 1.0);
  MatXc M(r, c);
  for (Eigen::Index i = 0; i < M.size(); ++i) M.data()[i] = cplx(N(rng), N(rng));
  return M;
}

cplx random_point(std::mt19937_64& rng, double rmax = 2.0) {
  std::uniform_real_distribution<double> U(-rmax, rmax);
  return {U(rng), U(rng)};
}

HoloSphere random_sphere(int k, std::mt19937_64& rng) { return HoloSphere{k, random_matrix(k + 1, k + 1, rng)}; }

PointTuple tuple(std::initializer_list<BoundaryPoint> p) { return PointTuple{std::vector<BoundaryPoint>(p)}; }

// Best-conditioned of a few near-regular base point sets.
FourPointTensor spread_tensor(const HoloSphere& q) {
  FourPointTensor best;
  best.cond = INFINITY;
  const int n = q.k + 1;
  for (double r : {0.5, 1.0, 2.0})
    for (double ph : {0.1, 0.7}) {
      std::vector<BoundaryPoint> bp;
      for (int i = 0; i < n; ++i) bp.emplace_back(std::polar(i == 0 ? 1.0 / r : r, ph + 2.0 * M_PI * i / n));
      try {
        FourPointTensor t = four_point_tensor(q, bp);
        if (t.cond < best.cond) best = t;
      } catch (const Error&) {
      }
    }
  return best;
}

ErrorCode code_of(const std::function<void()>& f) {
  try {
    f();
  } catch (const Error& e) {
    return e.code();
  }
  return ErrorCode::InvalidArgument;
}

}  // namespace

TEST(Rep, QFromMonadChargeOne) {
  const MonadData md{MatXc::Zero(1, 1), VecXc::Ones(1)};
  const HoloSphere q = q_from_monad(md);
  EXPECT_LT((q.U + MatXc::Identity(2, 2)).norm(), 1e-15);
  EXPECT_EQ(degree(q), 1);
}

TEST(Rep, QFromMonadDegenerate) {
  std::mt19937_64 rng(71);
  const MonadData md{random_matrix(2, 2, rng), VecXc::Zero(2)};
  EXPECT_EQ(code_of([&] { q_from_monad(md); }), ErrorCode::DegenerateMap);
  EXPECT_NO_THROW(q_from_monad(md, true));
}

TEST(Rep, QFromMonadGenericDegree) {
  std::mt19937_64 rng(72);
  for (int k : {2, 3}) {
    const MonadData md{random_matrix(k, k, rng), random_matrix(k, 1, rng).col(0)};
    const DegreeInfo info = degree_info(q_from_monad(md));
    EXPECT_EQ(info.degree, k);
    EXPECT_EQ(info.root_count, k);
    EXPECT_TRUE(info.common_roots.empty());
  }
}

TEST(Rep, DegreeExamples) {
  EXPECT_EQ(degree(HoloSphere::identity()), 1);
  EXPECT_EQ(degree(HoloSphere::veronese()), 2);
  MatXc U = MatXc::Zero(2, 3);
  U(0, 0) = 1.0;
  U(1, 2) = 1.0;  // (1, z^2)
  EXPECT_EQ(degree(HoloSphere{2, U}), 2);
  // (z, z^2) = z (1, z): the common root drops the degree.
  MatXc V = MatXc::Zero(2, 3);
  V(0, 1) = 1.0;
  V(1, 2) = 1.0;
  const DegreeInfo info = degree_info(HoloSphere{2, V});
  EXPECT_EQ(info.degree, 1);
  ASSERT_EQ(info.common_roots.size(), 1u);
  EXPECT_LT(std::abs(info.common_roots[0]), 1e-12);
}

TEST(Rep, SpectralOfDiagonalGivesIdentity) {
  SpectralCurveFit fit;
  fit.k = 1;
  fit.coeffs = MatXc::Zero(2, 2);
  fit.coeffs(1, 0) = 1.0;
  fit.coeffs(0, 1) = -1.0;
  const SpectralFactorization f = factor_spectral(fit.coeffs);
  EXPECT_LT((f.G - MatXc::Identity(2, 2)).norm(), 1e-15);
  EXPECT_EQ(f.rank, 2);
  const HoloSphere q = q_from_spectral(fit);
  // Same correlators as (1, z).
  const PointTuple t = tuple({cplx(0.3, 1.0), cplx(-2.0, 0.5), 1.0});
  EXPECT_LT(std::abs(trace_npoint(q, t) - trace_npoint(HoloSphere::identity(), t)), 1e-12);
}

TEST(Rep, GramRoundTrip) {
  std::mt19937_64 rng(73);
  for (int k : {1, 2, 3}) {
    const MatXc A = random_matrix(k + 1, k + 1, rng);
    const MatXc G = A.adjoint() * A;
    const MatXc c = spectral_from_gram(G);
    EXPECT_LT((gram_from_spectral(c) - G).norm(), 1e-10 * G.norm());
    const SpectralFactorization f = factor_spectral(c);
    EXPECT_LT((f.q.U.adjoint() * f.q.U - G).norm(), 1e-10 * G.norm());
    // psi(w, z) = w^k (q(w^), q(z)) on samples.
    SpectralCurveFit fit{k, c, 0.0};
    for (int i = 0; i < 10; ++i) {
      const cplx w = random_point(rng), z = random_point(rng);
      const cplx lhs = std::pow(w, k) * herm(f.q.at(antipode(BoundaryPoint(w))), f.q.at(z));
      EXPECT_LT(std::abs(lhs - fit(w, z)), 1e-9 * (1.0 + std::abs(lhs)));
    }
  }
}

TEST(Rep, SpectralFactorizationGuards) {
  MatXc c = MatXc::Zero(2, 2);
  c(1, 0) = 1.0;
  c(0, 1) = -1.0;
  c(0, 0) = 0.5;  // G10 = -0.5 with G01 = 0: not Hermitian
  EXPECT_EQ(code_of([&] { factor_spectral(c); }), ErrorCode::NotPositive);
  MatXc neg = MatXc::Zero(2, 2);
  neg(1, 0) = -1.0;
  neg(0, 1) = 1.0;  // G = -identity
  EXPECT_EQ(code_of([&] { factor_spectral(neg); }), ErrorCode::NotPositive);
  EXPECT_EQ(code_of([&] { factor_spectral(MatXc::Zero(2, 3)); }), ErrorCode::ShapeMismatch);
}

TEST(Rep, ProjectionExamples) {
  const HoloSphere id = HoloSphere::identity();
  const MatXc R0 = projection(id, 0.0).R;
  MatXc e = MatXc::Zero(2, 2);
  e(0, 0) = 1.0;
  EXPECT_LT((R0 - e).norm(), 1e-15);
  EXPECT_LT((R0 * projection(id, BoundaryPoint::infinity()).R).norm(), 1e-15);
}

TEST(Rep, ProjectionInvariants) {
  std::mt19937_64 rng(74);
  for (int k : {1, 2, 3}) {
    const HoloSphere q = random_sphere(k, rng);
    for (int i = 0; i < 20; ++i) {
      const MatXc R = projection(q, random_point(rng)).R;
      ASSERT_LT((R * R - R).norm(), 1e-14);
      ASSERT_LT((R - R.adjoint()).norm(), 1e-14);
      ASSERT_LT(std::abs(R.trace() - 1.0), 1e-14);
    }
  }
}

TEST(Rep, BasePointDetected) {
  MatXc V = MatXc::Zero(2, 3);
  V(0, 1) = 1.0;
  V(1, 2) = 1.0;  // vanishes at z = 0
  const HoloSphere q{2, V};
  EXPECT_EQ(code_of([&] { projection(q, 0.0); }), ErrorCode::BasePoint);
  EXPECT_EQ(code_of([&] { trace_npoint(q, tuple({0.0, 1.0})); }), ErrorCode::BasePoint);
  EXPECT_EQ(code_of([&] { fs_curvature(q, 0.0); }), ErrorCode::BasePoint);
}

TEST(Rep, TraceExamples) {
  const HoloSphere id = HoloSphere::identity();
  EXPECT_LT(std::abs(trace_npoint(id, tuple({0.0, BoundaryPoint::infinity()}))), 1e-15);
  EXPECT_LT(std::abs(trace_npoint(id, tuple({1.0, I})) - 0.5), 1e-15);
  EXPECT_LT(std::abs(trace_npoint(id, tuple({1.0, I, 2.0 * I})) - cplx(9, -3) / 20.0), 1e-15);
  // Matrix-trace form agrees.
  const MatXc P = projection(id, 1.0).R * projection(id, I).R * projection(id, 2.0 * I).R;
  EXPECT_LT(std::abs(P.trace() - cplx(9, -3) / 20.0), 1e-15);
}

TEST(Rep, TraceCyclicAndReversal) {
  std::mt19937_64 rng(75);
  const HoloSphere q = random_sphere(2, rng);
  const BoundaryPoint a = random_point(rng), b = random_point(rng), c = random_point(rng), d = random_point(rng);
  const cplx v = trace_npoint(q, tuple({a, b, c, d}));
  EXPECT_LT(std::abs(v - trace_npoint(q, tuple({b, c, d, a}))), 1e-14);
  EXPECT_LT(std::abs(v - std::conj(trace_npoint(q, tuple({d, c, b, a})))), 1e-14);
  EXPECT_LE(std::abs(v), 1.0);
  EXPECT_THROW(trace_npoint(q, PointTuple{}), Error);
}

TEST(Rep, CurvatureExamples) {
  const HoloSphere id = HoloSphere::identity();
  EXPECT_NEAR(fs_curvature(id, 0.0), 1.0, 1e-6);
  EXPECT_NEAR(fs_curvature_exact(id, 0.0), 1.0, 1e-15);
  EXPECT_NEAR(fs_curvature_exact(id, BoundaryPoint::infinity()), 1.0, 1e-15);
  MatXc U = MatXc::Zero(2, 3);
  U(0, 0) = 1.0;
  U(1, 2) = 1.0;
  const HoloSphere sq{2, U};
  EXPECT_NEAR(fs_curvature(sq, 0.0), 0.0, 1e-6);
  EXPECT_EQ(fs_curvature_exact(sq, 0.0), 0.0);
  EXPECT_THROW(fs_curvature(id, 0.0, 0.0), Error);
}

TEST(Rep, CurvatureFiniteDifferenceAgreesWithExact) {
  std::mt19937_64 rng(76);
  for (int k : {1, 2, 3}) {
    const HoloSphere q = random_sphere(k, rng);
    for (int i = 0; i < 10; ++i) {
      const cplx z = random_point(rng, 1.5);
      const double ex = fs_curvature_exact(q, z);
      EXPECT_GE(ex, -1e-8);
      EXPECT_NEAR(fs_curvature(q, z), ex, 1e-5 * (1.0 + ex));
    }
  }
}

TEST(Rep, CurvatureIntegratesToDegree) {
  std::mt19937_64 rng(77);
  EXPECT_NEAR(fs_degree_integral(HoloSphere::identity()), 1.0, 2e-2);
  EXPECT_NEAR(fs_degree_integral(HoloSphere::veronese()), 2.0, 4e-2);
  const MonadData md{random_matrix(3, 3, rng), random_matrix(3, 1, rng).col(0)};
  EXPECT_NEAR(fs_degree_integral(q_from_monad(md)), 3.0, 6e-2);
}

TEST(Rep, SingularPointsOfTheMap) {
  // kappa vanishes exactly where the projective differential does.
  MatXc U = MatXc::Zero(2, 3);
  U(0, 0) = 1.0;
  U(1, 2) = 1.0;
  U(1, 1) = cplx(-2.0, 0.6);  // (1, z^2 + b z): branch point at z = -b/2
  const HoloSphere q{2, U};
  const cplx zc = -U(1, 1) / 2.0;
  EXPECT_LT(fs_curvature_exact(q, zc), 1e-12);
  const VecXc a = q.at(zc), d = q.derivative(zc);
  EXPECT_LT((d - a * herm(a, d) / a.squaredNorm()).norm(), 1e-12);
  EXPECT_GT(fs_curvature_exact(q, zc + 1e-2), 1e-6);
}

TEST(Rep, HolomorphyRelation) {
  // (1 - R_z) applied to d/dzbar of the unit representative vanishes.
  std::mt19937_64 rng(78);
  const HoloSphere q = random_sphere(2, rng);
  const double h = 1e-5;
  for (int i = 0; i < 10; ++i) {
    const cplx z = random_point(rng);
    auto u = [&](cplx x) {
      VecXc v = q.at(x);
      return VecXc(v / v.norm());
    };
    const VecXc dzb = 0.5 * ((u(z + h) - u(z - h)) / (2 * h) + I * (u(z + I * h) - u(z - I * h)) / (2 * h));
    const MatXc R = projection(q, z).R;
    EXPECT_LT(((MatXc::Identity(3, 3) - R) * dzb).norm(), 1e-3);
  }
}

TEST(Rep, PositivityOfTraceForm) {
  std::mt19937_64 rng(79);
  const HoloSphere q = random_sphere(2, rng);
  std::vector<BoundaryPoint> z;
  for (int i = 0; i < 6; ++i) z.emplace_back(random_point(rng));
  for (int trial = 0; trial < 20; ++trial) {
    const VecXc c = random_matrix(6, 1, rng).col(0);
    MatXc a = MatXc::Zero(3, 3);
    for (int i = 0; i < 6; ++i) a += c(i) * projection(q, z[static_cast<std::size_t>(i)]).R;
    const cplx t = (a.adjoint() * a).trace();
    EXPECT_GE(t.real(), 0.0);
    EXPECT_LT(std::abs(t.imag()), 1e-12);
    cplx quad = 0.0;
    for (int i = 0; i < 6; ++i)
      for (int j = 0; j < 6; ++j)
        quad += std::conj(c(i)) * c(j) * trace_npoint(q, tuple({z[static_cast<std::size_t>(i)], z[static_cast<std::size_t>(j)]}));
    EXPECT_LT(std::abs(quad - t), 1e-10 * (1.0 + std::abs(t)));
  }
}

TEST(Rep, DistinctPointsGiveDistinctProjections) {
  std::mt19937_64 rng(80);
  const HoloSphere q = random_sphere(2, rng);
  for (int i = 0; i < 50; ++i) {
    const BoundaryPoint a = random_point(rng), b = random_point(rng);
    EXPECT_LT(trace_npoint(q, tuple({a, b})).real(), 1.0 - 1e-6);
  }
}

TEST(Rep, OrthogonalityMatchesSpectralDeterminant) {
  std::mt19937_64 rng(81);
  for (int k : {1, 2, 3}) {
    const MonadData md{random_matrix(k, k, rng), random_matrix(k, 1, rng).col(0)};
    const HoloSphere q = q_from_monad(md);
    const MatXc psi = spectral_coefficients(q);
    const SpectralCurveFit fit{k, psi, 0.0};
    for (int i = 0; i < 20; ++i) {
      const cplx w = random_point(rng), z = random_point(rng);
      const cplx p = spectral_poly(md, w, z);
      EXPECT_LT(std::abs(fit(w, z) - p), 1e-9 * (1.0 + std::abs(p)));
    }
    // A point on the curve: root in z of psi(w0, z) is orthogonal to q(w0^).
    const cplx w0(0.3, -0.8);
    VecXc pz(k + 1);
    for (int b = 0; b <= k; ++b) {
      cplx acc = 0.0, wa = 1.0;
      for (int a = 0; a <= k; ++a, wa *= w0) acc += psi(a, b) * wa;
      pz(b) = acc;
    }
    for (cplx r : poly::roots(pz)) {
      const VecXc a = q.at(antipode(BoundaryPoint(w0))), b = q.at(r);
      EXPECT_LT(std::abs(herm(a, b)), 1e-9 * a.norm() * b.norm());
    }
  }
}

TEST(Rep, FourPointIdentityExample) {
  const HoloSphere id = HoloSphere::identity();
  const cplx v = four_point_reconstruct(id, {0.0, 1.0}, I, 2.0);
  EXPECT_LT(std::abs(v - 0.5), 1e-12);
  EXPECT_LT(std::abs(trace_npoint(id, tuple({I, 2.0})) - 0.5), 1e-15);
  // w in the base point set.
  EXPECT_LT(std::abs(four_point_reconstruct(id, {0.0, 1.0}, 1.0, 2.0) - trace_npoint(id, tuple({1.0, 2.0}))), 1e-12);
}

TEST(Rep, FourPointRandomSpheres) {
  std::mt19937_64 rng(82);
  for (int k : {1, 2}) {
    const HoloSphere q = random_sphere(k, rng);
    const FourPointTensor t = spread_tensor(q);
    ASSERT_LT(t.cond, 1e8);
    const Eigen::Index N = t.g.rows();
    EXPECT_LT((t.ginv * t.g - MatXc::Identity(N, N)).norm(), 1e-14 * t.cond * N);
    EXPECT_LT((t.g - t.g.transpose()).norm(), 1e-12);  // cyclicity makes g symmetric
    const Eigen::Index n = static_cast<Eigen::Index>(t.basepoints.size());
    for (Eigen::Index i = 0; i < n; ++i)
      for (Eigen::Index j = 0; j < n; ++j)
        for (Eigen::Index a = 0; a < n; ++a)
          for (Eigen::Index b = 0; b < n; ++b)
            EXPECT_LT(std::abs(std::conj(t.g(i * n + j, a * n + b)) - t.g(b * n + a, j * n + i)), 1e-14);
    for (int s = 0; s < 50; ++s) {
      const BoundaryPoint w = random_point(rng), z = random_point(rng);
      ASSERT_LT(std::abs(four_point_reconstruct(q, t, w, z) - trace_npoint(q, tuple({w, z}))), 1e-8);
    }
  }
}

TEST(Rep, FourPointDegenerateBasepoints) {
  std::mt19937_64 rng(83);
  const HoloSphere q = random_sphere(2, rng);
  EXPECT_EQ(code_of([&] { four_point_tensor(q, {0.5, 0.5, 0.5}); }), ErrorCode::DegenerateBasepoints);
  EXPECT_EQ(code_of([&] { four_point_tensor(q, {}); }), ErrorCode::InvalidArgument);
}

TEST(Rep, SubalgebraOfRandomSphere) {
  std::mt19937_64 rng(84);
  const HoloSphere q = random_sphere(2, rng);
  const BoundaryPoint w = cplx(0.4, -0.3);
  const SubalgebraStructure s = subalgebra_structure(q, w);
  EXPECT_LT(s.closure_residual, 1e-8);
  // Orthogonal points.
  EXPECT_LT(std::abs(trace_npoint(q, tuple({w, s.z1}))), 1e-10);
  EXPECT_LT(std::abs(trace_npoint(q, tuple({w, s.z2}))), 1e-10);
  // (P1 P2) P1 = tau P1.
  const MatXc& t = s.table[2];
  EXPECT_LT(std::abs(t(0, 0) - s.tau), 1e-10);
  for (int c = 1; c < 4; ++c) EXPECT_LT(std::abs(t(c, 0)), 1e-10);
  // P1 P1 = P1.
  EXPECT_LT(std::abs(s.table[0](0, 0) - 1.0), 1e-10);
  EXPECT_LT(std::abs(s.tau - trace_npoint(q, tuple({s.z1, s.z2}))), 1e-12);
}

TEST(Rep, SubalgebraGuards) {
  EXPECT_EQ(code_of([] { subalgebra_structure(HoloSphere::veronese(), cplx(0.3, 0.2)); }), ErrorCode::DegenerateRoots);
  EXPECT_EQ(code_of([] { subalgebra_structure(HoloSphere::identity(), 0.0); }), ErrorCode::InvalidArgument);
}

TEST(Rep, FlippedChart) {
  std::mt19937_64 rng(85);
  const HoloSphere q = random_sphere(2, rng);
  const HoloSphere f = q.flipped();
  const cplx z(0.7, -1.2);
  // Same projective point: f(1/z) is proportional to q(z).
  const VecXc a = q.at(z), b = f.at(1.0 / z);
  EXPECT_LT(std::abs(std::abs(herm(a, b)) - a.norm() * b.norm()), 1e-12 * a.norm() * b.norm());
}
