#include <gtest/gtest.h>

#include <cmath>
#include <random>

#include "fixtures.hpp"
#include "hypkob/error.hpp"

using namespace hypkob;
using hypkob::testing::ball_projection;

namespace {

std::shared_ptr<Domain> ellipsoid2111() { return make_ellipsoid(make_vec({2.0, 1.0, 1.0, 1.0})); }

// nearest point of the ellipse x^2/4 + y^2 = 1 to (a, b) by scan and golden refinement
Vec ellipse_argmin(double a, double b) {
  auto dist2 = [&](double th) {
    const double x = 2.0 * std::cos(th) - a, y = std::sin(th) - b;
    return x * x + y * y;
  };
  const int n = 20000;
  int best = 0;
  for (int i = 1; i < n; ++i)
    if (dist2(2 * M_PI * i / n) < dist2(2 * M_PI * best / n)) best = i;
  double lo = 2 * M_PI * (best - 1) / n, hi = 2 * M_PI * (best + 1) / n;
  const double phi = (std::sqrt(5.0) - 1) / 2;
  for (int it = 0; it < 200; ++it) {
    const double m1 = hi - phi * (hi - lo), m2 = lo + phi * (hi - lo);
    if (dist2(m1) < dist2(m2))
      hi = m2;
    else
      lo = m1;
  }
  const double th = 0.5 * (lo + hi);
  return make_vec({2.0 * std::cos(th), std::sin(th), 0.0, 0.0});
}

}  // namespace

TEST(Domain, BallSignsAndNormal) {
  auto ball = make_ball(4);
  EXPECT_LT(ball->rho(make_vec({0.3, 0.1, -0.2, 0.4})), 0.0);
  const Vec p = make_vec({0.5, 0.5, 0.5, 0.5});
  EXPECT_NEAR(ball->rho(p), 0.0, 1e-15);
  EXPECT_GT(ball->gradient(p).norm(), 0.0);
  const Vec n = ball->normal(p);
  EXPECT_NEAR((n - p).norm(), 0.0, 1e-12);
  EXPECT_GT(ball->rho(p + 1e-4 * n), 0.0);
}

TEST(Domain, FiniteDifferenceDerivativesMatchAnalytic) {
  auto f = std::make_shared<EllipsoidFunction>(make_vec({2.0, 1.0, 1.5, 1.0}));
  DomainOptions fd;
  fd.use_analytic = false;
  Box box{make_vec({-2.1, -1.1, -1.6, -1.1}), make_vec({2.1, 1.1, 1.6, 1.1})};
  Domain numeric(f, box, fd), exact(f, box);
  const Vec x = make_vec({0.7, -0.3, 0.9, 0.2});
  EXPECT_LT((numeric.gradient(x) - exact.gradient(x)).norm(), 1e-7);
  EXPECT_LT((numeric.hessian(x) - exact.hessian(x)).norm(), 1e-4);
}

TEST(Domain, BoundarySamplesLieOnBoundaryAndAreDeterministic) {
  auto e = ellipsoid2111();
  auto a = sample_boundary(*e, 200, 9);
  auto b = sample_boundary(*e, 200, 9);
  ASSERT_EQ(a.size(), 200u);
  for (std::size_t i = 0; i < a.size(); ++i) {
    EXPECT_NEAR(e->rho(a[i]), 0.0, 1e-10);
    EXPECT_EQ(a[i], b[i]);
  }
}

TEST(Domain, InteriorSamplesAreInterior) {
  auto e = ellipsoid2111();
  for (const auto& x : sample_interior(*e, 300, 4)) EXPECT_LT(e->rho(x), 0.0);
}

TEST(Domain, PullToBoundaryFromBothSides) {
  auto e = ellipsoid2111();
  for (const Vec& y : {make_vec({1.0, 0.2, 0.1, 0.0}), make_vec({2.5, 0.4, -0.3, 0.2})}) {
    auto p = e->pull_to_boundary(y);
    ASSERT_TRUE(p.has_value());
    EXPECT_NEAR(e->rho(*p), 0.0, 1e-12);
  }
}

TEST(HeightProjection, BallHeights) {
  auto proj = ball_projection();
  EXPECT_NEAR(proj->height(make_vec({0.5, 0, 0, 0})), std::sqrt(0.5), 1e-9);
  EXPECT_NEAR(proj->height(make_vec({0.9, 0, 0, 0})), std::sqrt(0.1), 1e-9);
}

TEST(HeightProjection, BallProjectionIsRadial) {
  auto proj = ball_projection();
  const auto f = proj->project(make_vec({0.5, 0, 0, 0}));
  EXPECT_LT((f.point - make_vec({1, 0, 0, 0})).norm(), 1e-9);
}

TEST(HeightProjection, CenterProjectionIsDeterministicUnitVector) {
  auto proj = ball_projection();
  const auto a = proj->project(Vec::Zero(4));
  const auto b = proj->project(Vec::Zero(4));
  EXPECT_NEAR(a.point.norm(), 1.0, 1e-9);
  EXPECT_EQ(a.point, b.point);
}

TEST(HeightProjection, BallReachAndEpsilon) {
  auto proj = ball_projection();
  EXPECT_NEAR(proj->reach().reach, 1.0, 1e-6);
  EXPECT_NEAR(proj->epsilon(), 0.5, 1e-6);
}

TEST(HeightProjection, EllipsoidReachMatchesCurvatureRadius) {
  // min curvature radius of x^2/4 + y^2 + z^2 + w^2 = 1 is b^2/a = 1/2 at (+-2,0,0,0)
  const auto r = estimate_reach(*ellipsoid2111(), 4000);
  EXPECT_NEAR(r.reach, 0.5, 0.5 * 0.03);
  EXPECT_NEAR(max_principal_curvature(*ellipsoid2111(), make_vec({2, 0, 0, 0})), 2.0, 1e-6);
}

TEST(HeightProjection, EpsilonCappedByCeiling) {
  ProjectionOptions o;
  o.ceiling_fraction = 0.05;
  const auto r = estimate_reach(*make_ball(4), 2000, o);
  EXPECT_TRUE(r.capped);
  EXPECT_NEAR(r.epsilon, 0.05 * r.diameter, 1e-12);
  EXPECT_LT(r.epsilon, 0.5 * r.reach);
}

TEST(HeightProjection, EllipsoidHeightMatchesBruteForce) {
  HeightProjection proj(ellipsoid2111());
  const Vec x = make_vec({1.0, 0.0, 0.0, 0.0});
  const Vec p = ellipse_argmin(1.0, 0.0);
  EXPECT_NEAR(proj.project(x).distance, (x - p).norm(), 1e-8);
  EXPECT_NEAR(proj.project(x).distance, std::sqrt(2.0 / 3.0), 1e-8);
}

TEST(HeightProjection, EllipsoidProjectionMatchesBruteForce) {
  HeightProjection proj(ellipsoid2111());
  const Vec p = ellipse_argmin(0.2, 0.3);
  EXPECT_LT((proj.project(make_vec({0.2, 0.3, 0.0, 0.0})).point - p).norm(), 1e-6);
}

TEST(HeightProjection, FootOnShellBall) {
  auto proj = ball_projection();
  EXPECT_LT((proj->foot_on_shell(make_vec({0.9, 0, 0, 0}), 0.25) - make_vec({0.75, 0, 0, 0})).norm(), 1e-9);
  const Vec x = make_vec({0.3, 0.6, 0.2, -0.1});
  const double t = proj->project(x).distance;
  EXPECT_LT((proj->foot_on_shell(x, t) - x).norm(), 1e-9);
}

TEST(HeightProjection, FootOnShellEllipsoidHasRequestedHeight) {
  HeightProjection proj(ellipsoid2111());
  const Vec x = make_vec({1.6, 0.3, -0.2, 0.1});
  for (double t : {0.01, 0.05, 0.2}) EXPECT_NEAR(proj.project(proj.foot_on_shell(x, t)).distance, t, 1e-6);
}

TEST(HeightProjection, FootOnShellRejectsDeepShell) {
  auto proj = ball_projection();
  EXPECT_THROW(proj->foot_on_shell(make_vec({0.9, 0, 0, 0}), 0.9), Error);
}

TEST(HeightProjection, PropertyCollarPointsProjectAlongNormal) {
  HeightProjection proj(ellipsoid2111());
  const double eps = proj.epsilon();
  int checked = 0;
  for (const auto& x : sample_interior(proj.domain(), 4000, 3)) {
    const auto f = proj.project(x);
    if (f.distance > eps) continue;
    ++checked;
    EXPECT_NEAR((x - f.point).norm(), f.distance, 1e-8);
    const Vec d = (f.point - x).normalized();
    EXPECT_LT((d - d.dot(f.normal) * f.normal).norm(), 1e-6);
  }
  EXPECT_GT(checked, 100);
}

TEST(HeightProjection, PropertySegmentToShellKeepsProjection) {
  HeightProjection proj(ellipsoid2111());
  const double eps = proj.epsilon();
  for (const auto& x : sample_interior(proj.domain(), 300, 8)) {
    const auto f = proj.project(x);
    if (f.distance > eps) continue;
    const Vec xe = proj.foot_on_shell(x, eps);
    for (double s : {0.1, 0.5, 0.9}) {
      const Vec y = xe + s * (f.point - xe);
      EXPECT_LT((proj.project(y).point - f.point).norm(), 1e-7);
    }
  }
}

TEST(HeightProjection, PropertySquaredHeightIsLipschitz) {
  HeightProjection proj(ellipsoid2111());
  auto pts = sample_interior(proj.domain(), 400, 12);
  for (std::size_t i = 0; i + 1 < pts.size(); i += 2) {
    const double a = proj.project(pts[i]).distance, b = proj.project(pts[i + 1]).distance;
    EXPECT_LE(std::abs(a - b), (pts[i] - pts[i + 1]).norm() + 1e-10);
  }
}

TEST(HeightProjection, OutsidePointRejected) {
  auto proj = ball_projection();
  EXPECT_THROW(proj->project(make_vec({1.2, 0, 0, 0})), Error);
}
