#include <gtest/gtest.h>

#include <cmath>
#include <random>
#include <tuple>
#include <thread>

#include "fixtures.hpp"
#include "hypkob/error.hpp"
#include "hypkob/gromov.hpp"

using namespace hypkob;
using namespace hypkob::testing;

namespace {

std::vector<Vec> collar_points(int n, std::uint64_t seed) {
  return sample_points(*ball_projection(), n, {SamplerKind::BoundaryBiased, seed});
}

Polyline join(std::initializer_list<Polyline> parts) {
  std::vector<Vec> pts;
  for (const auto& p : parts) pts.insert(pts.end(), p.points.begin(), p.points.end());
  Polyline out = Polyline::from_points(std::move(pts));
  out.compact(1e-12);
  return out;
}

}  // namespace

TEST(G, SamePointIsZero) {
  auto m = ball_model();
  const Vec x = at_height(make_vec({0.5, 0.5, 0.5, 0.5}), 0.3);
  EXPECT_EQ(m->g_value(x, x), 0.0);
}

TEST(G, VerticalPairIsLogTwo) {
  auto m = ball_model();
  const Vec x = make_vec({0.96, 0, 0, 0}), y = make_vec({0.99, 0, 0, 0});
  EXPECT_NEAR(m->g_value(x, y), std::log(2.0), 1e-9);
}

TEST(G, Symmetric) {
  auto m = ball_model();
  auto pts = collar_points(200, 3);
  for (std::size_t i = 0; i + 1 < pts.size(); i += 2)
    EXPECT_NEAR(m->g_value(pts[i], pts[i + 1]), m->g_value(pts[i + 1], pts[i]), 1e-12);
}

TEST(G, OutsidePointRejected) {
  auto m = ball_model();
  EXPECT_THROW(m->g_value(make_vec({1.1, 0, 0, 0}), make_vec({0.5, 0, 0, 0})), Error);
}

TEST(G, RemarkEqualityOnVerticalTriples) {
  auto m = ball_model();
  const Vec p = make_vec({0, 0.6, 0, 0.8});
  const Vec x = at_height(p, 0.5), z = at_height(p, 0.3), y = at_height(p, 0.1);
  EXPECT_NEAR(m->g_value(x, y), m->g_value(x, z) + m->g_value(z, y), 1e-9);
  // z off the fibre or outside the height interval breaks the equality
  const Vec z_side = at_height(m->graph().node(m->graph().node_path(m->graph().snap(p), 40)[1]), 0.3);
  EXPECT_GT(m->g_value(x, z_side) + m->g_value(z_side, y) - m->g_value(x, y), 1e-6);
  const Vec z_low = at_height(p, 0.05);
  EXPECT_GT(m->g_value(x, z_low) + m->g_value(z_low, y) - m->g_value(x, y), 1e-6);
}

TEST(PathLength, SinglePointIsZero) {
  auto m = ball_model();
  GFunctional g(m);
  EXPECT_EQ(path_length(Polyline::from_points({make_vec({0.9, 0, 0, 0})}), g).value, 0.0);
}

TEST(PathLength, VerticalSegmentIsLogTwo) {
  auto m = ball_model();
  GFunctional g(m);
  const auto path = m->vertical_path(make_vec({0.96, 0, 0, 0}), make_vec({0.99, 0, 0, 0}));
  EXPECT_NEAR(path_length(path, g).value, std::log(2.0), 1e-6);
  EXPECT_NEAR(path_length(path.reversed(), g).value, std::log(2.0), 1e-6);
}

TEST(PathLength, VerticalDilationClosedForm) {
  auto m = ball_model();
  GFunctional g(m);
  const double hy = 0.1;
  const auto path = m->vertical_path(make_vec({0.96, 0, 0, 0}), make_vec({0.99, 0, 0, 0}));
  ASSERT_NEAR(path.points.front()(0), 0.99, 1e-15);
  for (double s : {0.005, 0.01, 0.02, 0.029}) EXPECT_NEAR(dilation(path, g, s), 0.5 / (hy * hy + s), 1e-4);
}

TEST(VerticalPath, DegenerateAndProjectionMismatch) {
  auto m = ball_model();
  const Vec x = make_vec({0.9, 0, 0, 0});
  GFunctional g(m);
  EXPECT_EQ(path_length(m->vertical_path(x, x), g).value, 0.0);
  EXPECT_THROW(m->vertical_path(x, make_vec({0, 0.9, 0, 0})), Error);
}

TEST(HorizontalPath, LengthMatchesGraphDistance) {
  auto m = ball_model();
  GFunctional g(m);
  const auto& G = m->graph();
  for (int b : {7, 123, 411}) {
    for (double h : {0.3, 0.1}) {
      const Vec x = at_height(G.node(0), h), y = at_height(G.node(b), h);
      const double expected = 2.0 * G.node_distance(0, b) / h;
      EXPECT_NEAR(path_length(m->horizontal_path(x, y), g).value, expected, 0.02 * expected);
    }
  }
}

TEST(HorizontalPath, ScalesInverselyWithHeight) {
  auto m = ball_model();
  GFunctional g(m);
  const auto& G = m->graph();
  const double l1 = path_length(m->horizontal_path(at_height(G.node(2), 0.2), at_height(G.node(90), 0.2)), g).value;
  const double l2 = path_length(m->horizontal_path(at_height(G.node(2), 0.1), at_height(G.node(90), 0.1)), g).value;
  EXPECT_NEAR(l2 / l1, 2.0, 0.04);
}

TEST(HorizontalPath, SameProjectionIsDegenerate) {
  auto m = ball_model();
  GFunctional g(m);
  const Vec x = at_height(m->graph().node(5), 0.2);
  const auto path = m->horizontal_path(x, x);
  EXPECT_EQ(path.points.size(), 1u);
  EXPECT_EQ(path_length(path, g).value, 0.0);
}

TEST(HorizontalPath, HeightsMustAgree) {
  auto m = ball_model();
  EXPECT_THROW(m->horizontal_path(at_height(m->graph().node(5), 0.2), at_height(m->graph().node(9), 0.3)), Error);
}

TEST(D, OutsideSameProjectionIsEuclidean) {
  auto m = ball_model();
  const Vec x = make_vec({0.2, 0, 0, 0}), y = make_vec({0.4, 0, 0, 0});
  EXPECT_EQ(m->d_value(x, y).value, (x - y).norm());
}

TEST(D, VerticalPairInCollar) {
  auto m = ball_model();
  const Vec p = make_vec({0.5, -0.5, 0.5, 0.5});
  for (auto [a, b] : {std::pair{0.05, 0.4}, std::pair{0.2, 0.1}, std::pair{0.3, 0.31}})
    EXPECT_NEAR(m->d_value(at_height(p, a), at_height(p, b)).value, std::abs(std::log(a / b)), 1e-6);
}

TEST(D, ShellPointsCountAsCollar) {
  auto m = ball_model();
  const double h = std::sqrt(m->epsilon());
  EXPECT_TRUE(m->locate(at_height(make_vec({1, 0, 0, 0}), h)).in_collar);
}

TEST(D, DominatesGAndIsCapped) {
  auto m = ball_model();
  auto pts = collar_points(400, 11);
  for (std::size_t i = 0; i + 1 < pts.size(); i += 2) {
    const DValue v = m->d_value(pts[i], pts[i + 1]);
    EXPECT_GE(v.value, m->g_value(pts[i], pts[i + 1]) - 1e-9);
    EXPECT_LE(v.value, std::max(v.upper, v.lower) + 1e-12);
  }
}

TEST(D, MetricAxiomsOnSampledTriples) {
  auto m = ball_model();
  auto pts = sample_points(*ball_projection(), 300, {SamplerKind::Uniform, 21});
  auto more = collar_points(300, 22);
  pts.insert(pts.end(), more.begin(), more.end());
  std::mt19937_64 rng(9);
  std::uniform_int_distribution<std::size_t> pick(0, pts.size() - 1);
  int violations = 0;
  for (int it = 0; it < 1000; ++it) {
    const Vec &x = pts[pick(rng)], &y = pts[pick(rng)], &z = pts[pick(rng)];
    const double xy = m->d_value(x, y).value, yz = m->d_value(y, z).value, xz = m->d_value(x, z).value;
    EXPECT_NEAR(xy, m->d_value(y, x).value, 1e-9);
    EXPECT_GE(xy, 0.0);
    if (xz > xy + yz + 1e-9) ++violations;
  }
  EXPECT_EQ(violations, 0);
}

TEST(D, ManyMatchesSingle) {
  auto m = ball_model();
  auto pts = collar_points(40, 31);
  const Vec x = pts.back();
  pts.pop_back();
  const auto many = m->d_many(x, pts);
  for (std::size_t i = 0; i < pts.size(); ++i) EXPECT_NEAR(many[i], m->d_value(x, pts[i]).value, 1e-9);
}

TEST(D, ConcurrentEvaluationIsDeterministic) {
  auto m = std::make_shared<const HyperbolicModel>(ball_graph());
  auto pts = collar_points(60, 41);
  std::vector<double> serial, a(30), b(30);
  for (std::size_t i = 0; i < 30; ++i) serial.push_back(m->d_value(pts[2 * i], pts[2 * i + 1]).value);
  auto m2 = std::make_shared<const HyperbolicModel>(ball_graph());
  auto run = [&](std::vector<double>& out) {
    for (std::size_t i = 0; i < 30; ++i) out[i] = m2->d_value(pts[2 * i], pts[2 * i + 1]).value;
  };
  std::thread t1(run, std::ref(a)), t2(run, std::ref(b));
  t1.join();
  t2.join();
  EXPECT_EQ(a, serial);
  EXPECT_EQ(b, serial);
}

TEST(Geodesic, VerticalPairIsSegment) {
  auto m = ball_model();
  const Vec p = make_vec({0, 0, 1, 0});
  const auto path = m->geodesic(at_height(p, 0.3), at_height(p, 0.1));
  ASSERT_GE(path.points.size(), 2u);
  for (const auto& q : path.points) EXPECT_LT((q.normalized() - p).norm(), 1e-9);
}

TEST(Geodesic, LengthMatchesDAndReverses) {
  // endpoints above graph nodes, so the polyline needs no snapping hops
  auto m = ball_model();
  DFunctional d(m);
  const auto& G = m->graph();
  const std::vector<std::tuple<int, int, double, double>> cases{
      {0, 40, 0.16, 0.5}, {3, 200, 0.3, 0.05}, {10, 377, 0.12, 0.045}, {21, 22, 0.6, 0.05}, {50, 500, 0.49, 0.49}};
  for (const auto& [i, j, hi, hj] : cases) {
    const Vec x = at_height(G.node(i), hi), y = at_height(G.node(j), hj);
    const auto fwd = m->geodesic(x, y);
    const auto bwd = m->geodesic(y, x);
    const double dv = m->d_value(x, y).value;
    EXPECT_NEAR(path_length(fwd, d).value, dv, 0.05 * dv);
    EXPECT_NEAR(path_length(bwd, d).value, path_length(fwd, d).value, 1e-6 * dv);
  }
}

TEST(Geodesic, OutsidePairVisitsShell) {
  auto m = ball_model();
  const Vec x = make_vec({0.3, 0, 0, 0}), y = make_vec({0, 0, 0, -0.2});
  const auto path = m->geodesic(x, y);
  const Vec xe = ball_projection()->foot_on_shell(x, m->epsilon());
  const Vec ye = ball_projection()->foot_on_shell(y, m->epsilon());
  auto visits = [&](const Vec& q) {
    for (const auto& p : path.points)
      if ((p - q).norm() < 1e-9) return true;
    return false;
  };
  EXPECT_TRUE(visits(xe));
  EXPECT_TRUE(visits(ye));
}

TEST(Composite, SameProjectionBoundIsG) {
  auto m = ball_model();
  const Vec p = make_vec({0.6, 0, 0.8, 0});
  const Vec x = at_height(p, 0.4), y = at_height(p, 0.07);
  const auto c = m->composite_upper_path(x, y);
  EXPECT_NEAR(c.bound, m->g_value(x, y), 1e-9);
  EXPECT_EQ(c.regime, 0);
}

TEST(Composite, CaseOneExcessAtMostTwo) {
  auto m = ball_model();
  const auto& G = m->graph();
  int seen = 0;
  for (int a = 0; a < G.size() && seen < 40; a += 7)
    for (int b = a + 1; b < G.size() && seen < 40; ++b) {
      if (G.node_distance(a, b) > 0.6) continue;
      const Vec x = at_height(G.node(a), 0.65), y = at_height(G.node(b), 0.6);
      const auto c = m->composite_upper_path(x, y);
      if (c.regime != 1) continue;
      ++seen;
      EXPECT_LE(c.bound - m->g_value(x, y), 2.0 + 1e-9);
    }
  EXPECT_GT(seen, 10);
}

TEST(Composite, CaseThreeExcessWithinDiameterBound) {
  auto m = ball_model();
  const auto& G = m->graph();
  const double M = G.diameter(), se = std::sqrt(m->epsilon());
  const double bound = 2.0 * M / se - 2.0 * std::log(M / se);
  auto pts = collar_points(200, 61);
  for (std::size_t i = 0; i + 1 < pts.size(); i += 2) {
    const Site a = m->locate(pts[i]), b = m->locate(pts[i + 1]);
    int regime = 0;
    const double cap = m->composite_bound(a, b, &regime);
    if (regime != 3) continue;
    EXPECT_LE(cap - m->g(a, b), bound + 1e-9);
  }
}

TEST(Surgery, DippingPathIsNotShorter) {
  auto m = ball_model();
  GFunctional g(m);
  const auto& G = m->graph();
  const Vec p = G.node(4), q = G.node(77);
  for (double low : {0.15, 0.05}) {
    const Polyline dip = join({m->vertical_path(at_height(p, low), at_height(p, 0.3)).reversed(),
                               m->horizontal_path(at_height(p, low), at_height(q, low)),
                               m->vertical_path(at_height(q, 0.3), at_height(q, low)).reversed()});
    const Polyline flat = m->horizontal_path(at_height(p, 0.3), at_height(q, 0.3));
    EXPECT_LE(path_length(flat, g).value, path_length(dip, g).value);
  }
}

TEST(EstimateC, VerticalPairsContributeNothing) {
  auto m = ball_model();
  std::vector<std::pair<Vec, Vec>> pairs;
  for (const auto& p : sample_boundary(m->domain(), 20, 3)) pairs.emplace_back(at_height(p, 0.05), at_height(p, 0.5));
  const auto c = estimate_C(*m, pairs);
  EXPECT_LT(c.vertical, 1e-6);
  EXPECT_LT(c.C, 1e-6);
}

TEST(EstimateC, FiniteOnMixedSample) {
  auto m = ball_model();
  auto a = sample_points(*ball_projection(), 200, {SamplerKind::Uniform, 71});
  auto b = collar_points(200, 72);
  std::vector<std::pair<Vec, Vec>> pairs;
  for (std::size_t i = 0; i < a.size(); ++i) pairs.emplace_back(a[i], b[i]);
  for (std::size_t i = 0; i + 1 < b.size(); i += 2) pairs.emplace_back(b[i], b[i + 1]);
  const auto c = estimate_C(*m, pairs);
  EXPECT_TRUE(std::isfinite(c.C));
  EXPECT_GT(c.C, 0.0);
  EXPECT_GE(c.min_margin, -1e-9);
}

TEST(EstimateC, StableUnderDoubledLayerResolution) {
  auto coarse = ball_model();
  LayerOptions fine_opts;
  fine_opts.level_ratio = std::sqrt(fine_opts.level_ratio);
  const HyperbolicModel fine(ball_graph(), fine_opts);
  auto a = sample_points(*ball_projection(), 500, {SamplerKind::Uniform, 91});
  auto b = collar_points(1500, 92);
  std::vector<std::pair<Vec, Vec>> pairs;
  for (std::size_t i = 0; i < a.size(); ++i) pairs.emplace_back(a[i], b[i]);
  for (std::size_t i = a.size(); i + 1 < b.size(); i += 2) pairs.emplace_back(b[i], b[i + 1]);
  ASSERT_GE(pairs.size(), 1000u);
  const double c0 = estimate_C(*coarse, pairs).C, c1 = estimate_C(fine, pairs).C;
  EXPECT_TRUE(std::isfinite(c0));
  EXPECT_LT(std::abs(c1 - c0) / c0, 0.1) << c0 << " vs " << c1;
}

TEST(RoughIsometry, AnisotropyChangeIsBoundedAdditively) {
  auto m8 = ball_model(600, 8.0), m12 = ball_model(600, 12.0);
  auto pts = collar_points(200, 81);
  double sup = 0.0;
  for (std::size_t i = 0; i + 1 < pts.size(); i += 2)
    sup = std::max(sup, std::abs(m8->d_value(pts[i], pts[i + 1]).value - m12->d_value(pts[i], pts[i + 1]).value));
  EXPECT_TRUE(std::isfinite(sup));
  EXPECT_LT(sup, 2.0 * std::log(12.0 / 1.0) + 2.0);
}
