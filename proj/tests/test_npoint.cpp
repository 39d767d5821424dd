#include <gtest/gtest.h>

#include <random>

#include <hmono/npoint.hpp>

using namespace hmono;

namespace {

const MonopoleField& hedgehog1() {
  static const MonopoleField f = hedgehog_field(1.0);
  return f;
}

// Identity-sphere values, computed by hand.
double oracle_two_point(cplx a, cplx b) {
  return std::norm(1.0 + std::conj(a) * b) / ((1.0 + std::norm(a)) * (1.0 + std::norm(b)));
}

cplx oracle_npoint(const std::vector<cplx>& z) {
  cplx acc = 1.0;
  for (std::size_t i = 0; i < z.size(); ++i) {
    const cplx a = z[i], b = z[(i + 1) % z.size()];
    acc *= (1.0 + std::conj(a) * b) / std::sqrt((1.0 + std::norm(a)) * (1.0 + std::norm(b)));
  }
  return acc;
}

PointTuple tuple(std::initializer_list<BoundaryPoint> p) { return PointTuple{std::vector<BoundaryPoint>(p)}; }

}  // namespace

TEST(NPoint, AbelianValuesAreOne) {
  const MonopoleField f = abelian_field(1.0);
  const NPointValue v2 = two_point(f, 0.3, cplx(-1, 2));
  EXPECT_NEAR(v2.value.real(), 1.0, 1e-6);
  const NPointValue v3 = n_point(f, tuple({0.0, 1.0, BoundaryPoint::infinity()}));
  EXPECT_NEAR(std::abs(v3.value - 1.0), 0.0, 1e-6);
}

TEST(NPoint, HedgehogTwoPointExamples) {
  EXPECT_NEAR(two_point(hedgehog1(), 0.0, BoundaryPoint::infinity()).value.real(), 0.0, 1e-3);
  const NPointValue v = two_point(hedgehog1(), 1.0, I);
  EXPECT_NEAR(v.value.real(), 0.5, 1e-2);
  EXPECT_EQ(v.value.imag(), 0.0);
  EXPECT_LT(v.err, 1e-5);
}

TEST(NPoint, HedgehogTwoPointMatchesClosedForm) {
  std::mt19937_64 rng(31);
  std::uniform_real_distribution<double> U(-2.0, 2.0);
  for (int i = 0; i < 8; ++i) {
    const cplx a(U(rng), U(rng)), b(U(rng), U(rng));
    const NPointValue v = two_point(hedgehog1(), a, b);
    EXPECT_NEAR(v.value.real(), oracle_two_point(a, b), 1e-6) << a << " " << b;
  }
}

TEST(NPoint, TwoPointSymmetric) {
  const NPointValue a = two_point(hedgehog1(), cplx(0.2, -0.7), cplx(1.3, 0.4));
  const NPointValue b = two_point(hedgehog1(), cplx(1.3, 0.4), cplx(0.2, -0.7));
  EXPECT_NEAR(a.value.real(), b.value.real(), a.err + b.err + 1e-9);
  EXPECT_GE(a.value.real(), 0.0);
  EXPECT_LE(a.value.real(), 1.0 + a.err);
}

TEST(NPoint, HedgehogThreePoint) {
  const NPointValue v = n_point(hedgehog1(), tuple({1.0, I, 2.0 * I}));
  EXPECT_LT(std::abs(v.value - cplx(9.0, -3.0) / 20.0), 2e-2);
  EXPECT_LT(std::abs(v.value - oracle_npoint({1.0, I, 2.0 * I})), 1e-6);
}

TEST(NPoint, FourPointMatchesIdentitySphere) {
  const std::vector<cplx> z{cplx(0.5, 0.1), cplx(-1.0, 0.8), cplx(0.2, -1.4), cplx(2.0, 0.3)};
  const NPointValue v = n_point(hedgehog1(), PointTuple{{z[0], z[1], z[2], z[3]}});
  EXPECT_LT(std::abs(v.value - oracle_npoint(z)), 1e-6);
}

TEST(NPoint, CoalescentReduction) {
  const NPointValue full = n_point(hedgehog1(), tuple({1.0, I, I, 2.0 * I}));
  const NPointValue red = n_point(hedgehog1(), tuple({1.0, I, 2.0 * I}));
  EXPECT_TRUE(full.reduced);
  EXPECT_EQ(full.effective_n, 3u);
  EXPECT_EQ(full.value, red.value);

  const NPointValue same = n_point(hedgehog1(), tuple({0.0, 0.0}));
  EXPECT_TRUE(same.reduced);
  EXPECT_EQ(same.value, cplx(1.0, 0.0));
  EXPECT_EQ(two_point(hedgehog1(), 0.5, 0.5).value, cplx(1.0, 0.0));
}

TEST(NPoint, ReduceCoalescentIsCyclic) {
  const auto r = reduce_coalescent({1.0, 2.0, 2.0, 3.0, 1.0}, 1e-3);
  ASSERT_EQ(r.size(), 3u);
  EXPECT_EQ(reduce_coalescent({4.0, 4.0, 4.0}, 1e-3).size(), 1u);
}

TEST(NPoint, CyclicInvariance) {
  const std::vector<BoundaryPoint> p{cplx(0.4, 0.9), cplx(-1.2, 0.1), cplx(0.3, -0.8)};
  const NPointValue a = n_point(hedgehog1(), PointTuple{{p[0], p[1], p[2]}});
  const NPointValue b = n_point(hedgehog1(), PointTuple{{p[1], p[2], p[0]}});
  EXPECT_LT(std::abs(a.value - b.value), 2.0 * (a.err + b.err) + 1e-9);
}

TEST(NPoint, ReversalConjugates) {
  const std::vector<BoundaryPoint> p{cplx(0.4, 0.9), cplx(-1.2, 0.1), cplx(0.3, -0.8), 2.0};
  const NPointValue a = n_point(hedgehog1(), PointTuple{{p[0], p[1], p[2], p[3]}});
  const NPointValue b = n_point(hedgehog1(), PointTuple{{p[3], p[2], p[1], p[0]}});
  EXPECT_LT(std::abs(a.value - std::conj(b.value)), 2.0 * (a.err + b.err) + 1e-9);
}

TEST(NPoint, StrictBound) {
  std::mt19937_64 rng(32);
  std::uniform_real_distribution<double> U(-1.5, 1.5);
  for (int i = 0; i < 10; ++i) {
    PointTuple t;
    for (int j = 0; j < 2 + i % 3; ++j) t.points.emplace_back(cplx(U(rng), U(rng)));
    EXPECT_LT(std::abs(n_point(hedgehog1(), t).value), 1.0);
  }
}

TEST(NPoint, PhaseSeedIndependence) {
  ScatterOptions o;
  o.phase_seed = 4242;
  const PointTuple t = tuple({cplx(0.1, 0.2), cplx(1.0, -1.0), cplx(-0.6, 0.5)});
  const NPointValue a = n_point(hedgehog1(), t);
  const NPointValue b = n_point(hedgehog1(), t, o);
  EXPECT_LT(std::abs(a.value - b.value), 1e-8);
}

TEST(NPoint, GaugeInvariance) {
  const GaugeMap gm = exp_gauge(
      Vec3(1, 1, 0), [](const Vec3& x) { return 1.5 * x(2) + x(0) * x(1); },
      [](const Vec3& x) { return Vec3(x(1), x(0), 1.5); });
  const MonopoleField g = gauge_transform(hedgehog1(), gm);
  const PointTuple t = tuple({cplx(0.7, 0.2), cplx(-0.3, 1.1), cplx(-1.0, -0.9)});
  EXPECT_LT(std::abs(n_point(g, t).value - n_point(hedgehog1(), t).value), 1e-5);
}

TEST(NPoint, GramAbelianAllOnes) {
  const GramResult g = gram_matrix(abelian_field(1.0), {0.0, 1.0, I});
  EXPECT_LT((g.M - Eigen::MatrixXd::Ones(3, 3)).norm(), 3e-6);
}

TEST(NPoint, GramHedgehogPair) {
  const GramResult g = gram_matrix(hedgehog1(), {1.0, I});
  Eigen::Matrix2d expect;
  expect << 1.0, 0.5, 0.5, 1.0;
  EXPECT_LT((g.M - expect).norm(), 1e-2);
  Eigen::SelfAdjointEigenSolver<Eigen::MatrixXd> es(g.M);
  EXPECT_NEAR(es.eigenvalues()(0), 0.5, 1e-2);
  EXPECT_NEAR(es.eigenvalues()(1), 1.5, 1e-2);
}

TEST(NPoint, GramPositivityAndRank) {
  std::mt19937_64 rng(33);
  std::uniform_real_distribution<double> U(-2.0, 2.0);
  std::vector<BoundaryPoint> pts;
  for (int i = 0; i < 12; ++i) pts.emplace_back(cplx(U(rng), U(rng)));
  const GramResult g = gram_matrix(hedgehog1(), pts);
  Eigen::SelfAdjointEigenSolver<Eigen::MatrixXd> es(g.M);
  const auto ev = es.eigenvalues();
  EXPECT_GT(ev.minCoeff(), -1e-8);
  int rank = 0;
  for (int i = 0; i < ev.size(); ++i) rank += ev(i) > 1e-6 * ev.maxCoeff();
  EXPECT_LE(rank, 4);
  EXPECT_THROW(gram_matrix(hedgehog1(), {1.0}), Error);
}

TEST(NPoint, RelationConstants) {
  const std::vector<BoundaryPoint> probes{cplx(0.3, 0.4), cplx(-0.8, 1.2)};
  const RelationResult ab = relation_constant(abelian_field(1.0), probes, 1.0, cplx(-1, 0.3), tuple({I}), tuple({2.0 * I}));
  EXPECT_LT(std::abs(ab.c - 1.0), 1e-6);
  const RelationResult same = relation_constant(hedgehog1(), probes, 1.0, cplx(-1, 0.3), tuple({I}), tuple({I}));
  EXPECT_EQ(same.c, cplx(1.0, 0.0));
  const RelationResult c1 = relation_constant(hedgehog1(), {probes[0]}, 1.0, cplx(-1, 0.3), tuple({I}), tuple({2.0 * I}));
  const RelationResult c2 = relation_constant(hedgehog1(), {probes[1]}, 1.0, cplx(-1, 0.3), tuple({I}), tuple({2.0 * I}));
  EXPECT_LT(std::abs(c1.c - c2.c), 2e-2);
}

TEST(NPoint, RelationNeedsUsableProbe) {
  // z0 = antipode(z1) makes every tuple vanish.
  try {
    relation_constant(hedgehog1(), {antipode(BoundaryPoint(1.0))}, 1.0, cplx(-1, 0.3), tuple({I}), tuple({2.0 * I}));
    FAIL();
  } catch (const Error& e) {
    EXPECT_EQ(e.code(), ErrorCode::DegenerateProbe);
  }
}

TEST(NPoint, DerivativeOfTwoPoint) {
  // d/dzbar of the identity-sphere 2-point at (w, z) by hand.
  const cplx w(0.4, -0.3), z(0.9, 0.5);
  const auto [dz, dzb] = npoint_derivatives(hedgehog1(), PointTuple{{w, z}}, 1);
  const double p = oracle_two_point(w, z);
  const cplx lam = 0.5 * (w / (1.0 + w * std::conj(z)) - z / (1.0 + std::norm(z)));
  EXPECT_LT(std::abs(dzb - 2.0 * p * lam), 1e-5);
  EXPECT_LT(std::abs(dz - std::conj(dzb)), 1e-5);
  EXPECT_THROW(npoint_derivatives(hedgehog1(), PointTuple{{w, BoundaryPoint::infinity()}}, 1), Error);
}

TEST(NPoint, EmptyTupleRejected) { EXPECT_THROW(n_point(hedgehog1(), PointTuple{}), Error); }
