#include <gtest/gtest.h>

#include <random>

#include <hmono/geom.hpp>

using namespace hmono;

namespace {

BoundaryPoint random_point(std::mt19937_64& rng) {
  std::normal_distribution<double> N(0.0, 1.0);
  return from_sphere(Vec3(N(rng), N(rng), N(rng)));
}

double hyperbolic_speed(const Geodesic& g, double t) {
  const double h = 1e-5;
  const Vec3 d = (g.at(t + h).point.x - g.at(t - h).point.x) / (2 * h);
  return conformal_factor(g.at(t).point.x) * d.norm();
}

}  // namespace

TEST(Geom, AntipodeExamples) {
  EXPECT_TRUE(antipode(BoundaryPoint(0.0)).is_infinite());
  EXPECT_EQ(antipode(BoundaryPoint::infinity()).value(), cplx(0.0, 0.0));
  EXPECT_NEAR(std::abs(antipode(BoundaryPoint(I)).value() - (-I)), 0.0, 1e-15);
  EXPECT_NEAR(std::abs(antipode(BoundaryPoint(cplx(1, 1))).value() - (-cplx(1, 1) / 2.0)), 0.0, 1e-15);
}

TEST(Geom, AntipodeIsFixedPointFreeInvolution) {
  std::mt19937_64 rng(11);
  for (int i = 0; i < 10000; ++i) {
    const BoundaryPoint z = random_point(rng);
    const BoundaryPoint zz = antipode(antipode(z));
    ASSERT_LT(chordal_distance(z, zz), 1e-12);
    // Antipodal on the sphere: chordal distance 2.
    ASSERT_NEAR(chordal_distance(z, antipode(z)), 2.0, 1e-12);
  }
}

TEST(Geom, ChartRoundTrip) {
  std::mt19937_64 rng(12);
  std::uniform_real_distribution<double> U(-5.0, 5.0);
  for (int i = 0; i < 2000; ++i) {
    const cplx z(U(rng), U(rng));
    const Vec3 s = to_sphere(z);
    ASSERT_NEAR(s.norm(), 1.0, 1e-14);
    ASSERT_LT(std::abs(from_sphere(s).value() - z), 1e-12 * (1.0 + std::norm(z)));
  }
  EXPECT_EQ(to_sphere(BoundaryPoint(0.0)), Vec3(0, 0, -1));
  EXPECT_EQ(to_sphere(BoundaryPoint::infinity()), Vec3(0, 0, 1));
  EXPECT_TRUE(from_sphere(Vec3(0, 0, 1)).is_infinite());
  // Large |z| stays finite and accurate.
  EXPECT_LT(std::abs(from_sphere(to_sphere(cplx(1e8, -3e8))).value() / cplx(1e8, -3e8) - 1.0), 1e-10);
}

TEST(Geom, DiameterGeodesic) {
  const Geodesic g = make_geodesic(0.0, BoundaryPoint::infinity(), 10.0);
  EXPECT_LT(geodesic_point(g, 0.0).point.x.norm(), 1e-15);
  for (double t : {-3.0, -0.5, 0.7, 2.0, 9.5}) {
    const Vec3 x = geodesic_point(g, t).point.x;
    EXPECT_LT((x - Vec3(0, 0, std::tanh(t / 2))).norm(), 1e-14) << t;
    EXPECT_NEAR(hyperbolic_speed(g, t), 1.0, 1e-8);
  }
}

TEST(Geom, AntipodalPairPassesThroughOrigin) {
  const Geodesic g = make_geodesic(1.0, -1.0, 10.0);
  EXPECT_LT(g.at(0.0).point.x.norm(), 1e-14);
  EXPECT_LT(std::abs(g.at(0.0).point.x.y()), 1e-15);
}

TEST(Geom, CoincidentEndpointsRejected) {
  try {
    make_geodesic(0.0, 0.0, 10.0);
    FAIL();
  } catch (const Error& e) {
    EXPECT_EQ(e.code(), ErrorCode::CoincidentEndpoints);
  }
  EXPECT_THROW(make_geodesic(BoundaryPoint::infinity(), BoundaryPoint::infinity(), 1.0), Error);
}

TEST(Geom, OutOfRangeParameter) {
  const Geodesic g = make_geodesic(1.0, I, 4.0);
  EXPECT_NO_THROW(g.at(4.0));
  try {
    g.at(4.01);
    FAIL();
  } catch (const Error& e) {
    EXPECT_EQ(e.code(), ErrorCode::OutOfRange);
  }
}

TEST(Geom, UnitSpeedProperty) {
  std::mt19937_64 rng(13);
  std::uniform_real_distribution<double> T(-6.0, 6.0);
  for (int i = 0; i < 100; ++i) {
    const BoundaryPoint a = random_point(rng), b = random_point(rng);
    if (chordal_distance(a, b) < 1e-3) continue;
    const Geodesic g(a, b, 8.0);
    for (int j = 0; j < 10; ++j) ASSERT_NEAR(hyperbolic_speed(g, T(rng)), 1.0, 1e-6);
  }
}

TEST(Geom, ReversalSymmetry) {
  std::mt19937_64 rng(14);
  std::uniform_real_distribution<double> T(-5.0, 5.0);
  for (int i = 0; i < 100; ++i) {
    const BoundaryPoint a = random_point(rng), b = random_point(rng);
    const Geodesic g(a, b, 6.0), r = g.reversed();
    const double t = T(rng);
    ASSERT_LT((g.at(t).point.x - r.at(-t).point.x).norm(), 1e-10);
  }
}

TEST(Geom, OriginAtClosestPoint) {
  std::mt19937_64 rng(15);
  for (int i = 0; i < 50; ++i) {
    const Geodesic g(random_point(rng), random_point(rng), 6.0);
    const double r0 = g.at(0.0).point.x.norm();
    EXPECT_LE(r0, g.at(0.01).point.x.norm() + 1e-15);
    EXPECT_LE(r0, g.at(-0.01).point.x.norm() + 1e-15);
  }
}

TEST(Geom, EndpointApproachIsExponential) {
  std::mt19937_64 rng(16);
  for (int i = 0; i < 30; ++i) {
    const BoundaryPoint a = random_point(rng), b = random_point(rng);
    double prev_a = 10.0, prev_b = 10.0;
    for (double T : {2.0, 4.0, 8.0, 12.0}) {
      const Geodesic g(a, b, T);
      const Vec3 xa = g.at(-T).point.x, xb = g.at(T).point.x;
      const double da = (xa.normalized() - to_sphere(a)).norm() + (1.0 - xa.norm());
      const double db = (xb.normalized() - to_sphere(b)).norm() + (1.0 - xb.norm());
      EXPECT_LT(da, prev_a);
      EXPECT_LT(db, prev_b);
      // Rate e^{-T}, constant set by the endpoint separation.
      EXPECT_LT(da, 2.0 * std::exp(-T) * 4.0 / chordal_distance(a, b));
      prev_a = da;
      prev_b = db;
    }
  }
}

TEST(Geom, BulkPointRejectsOutside) {
  EXPECT_NO_THROW(BulkPoint(Vec3(0.5, 0.5, 0.5)));
  try {
    BulkPoint(Vec3(1.0, 0.0, 0.0));
    FAIL();
  } catch (const Error& e) {
    EXPECT_EQ(e.code(), ErrorCode::OutOfRange);
  }
}
