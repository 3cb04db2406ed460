#include <gtest/gtest.h>

#include <cmath>
#include <cstdio>
#include <random>

#include "fixtures.hpp"
#include "hypkob/dynamics.hpp"
#include "hypkob/error.hpp"

using namespace hypkob;
using namespace hypkob::testing;

TEST(BoundaryGraph, DefaultSphereGraphConnectedWithPositiveWeights) {
  auto g = ball_graph(2000);
  EXPECT_EQ(g->size(), 2000);
  for (const auto& e : g->edges()) EXPECT_GT(e.weight, 0.0);
  for (int j = 0; j < g->size(); ++j) EXPECT_TRUE(std::isfinite(g->node_distance(0, j)));
}

TEST(BoundaryGraph, IsotropicWeightsAreChords) {
  auto g = ball_graph(600, 1.0);
  for (const auto& e : g->edges()) EXPECT_NEAR(e.weight, (g->node(e.u) - g->node(e.v)).norm(), 1e-12);
}

TEST(BoundaryGraph, MetricAxiomsOnNodes) {
  auto g = ball_graph();
  std::mt19937_64 rng(3);
  std::uniform_int_distribution<int> pick(0, g->size() - 1);
  for (int it = 0; it < 3000; ++it) {
    const int a = pick(rng), b = pick(rng), c = pick(rng);
    EXPECT_EQ(g->node_distance(a, b), g->node_distance(b, a));
    EXPECT_LE(g->node_distance(a, c), g->node_distance(a, b) + g->node_distance(b, c) + 1e-12);
    if (a != b) EXPECT_GT(g->node_distance(a, b), 0.0);
  }
  EXPECT_EQ(g->node_distance(5, 5), 0.0);
}

TEST(BoundaryGraph, SamePointHasZeroDistance) {
  auto g = ball_graph();
  const Vec p = g->node(17);
  EXPECT_EQ(g->d_H(p, p), 0.0);
  const auto path = g->boundary_geodesic(p, p);
  EXPECT_EQ(path.nodes.size(), 1u);
  EXPECT_EQ(path.length, 0.0);
}

TEST(BoundaryGraph, DominatesIsotropicDistance) {
  auto g8 = ball_graph(600, 8.0), g1 = ball_graph(600, 1.0);
  ASSERT_EQ(g8->size(), g1->size());
  for (int a = 0; a < g8->size(); a += 37)
    for (int b = 0; b < g8->size(); b += 53) {
      ASSERT_EQ(g8->node(a), g1->node(a));
      EXPECT_GE(g8->node_distance(a, b), g1->node_distance(a, b) - 1e-12);
    }
}

TEST(BoundaryGraph, MonotoneInAnisotropy) {
  auto g8 = ball_graph(600, 8.0), g12 = ball_graph(600, 12.0);
  for (int a = 0; a < g8->size(); a += 29)
    for (int b = 0; b < g8->size(); b += 41) EXPECT_GE(g12->node_distance(a, b), g8->node_distance(a, b) - 1e-12);
}

TEST(BoundaryGraph, GeodesicLengthEqualsDistance) {
  auto g = ball_graph();
  for (int b : {3, 99, 250, 511}) {
    const auto path = g->boundary_geodesic(g->node(0), g->node(b));
    EXPECT_EQ(path.length, g->node_distance(0, b));
    EXPECT_EQ(path.nodes.front(), 0);
    EXPECT_EQ(path.nodes.back(), b);
    double sum = 0.0;
    for (std::size_t i = 0; i + 1 < path.nodes.size(); ++i) {
      double w = std::numeric_limits<double>::infinity();
      for (auto* a = g->adj_begin(path.nodes[i]); a != g->adj_end(path.nodes[i]); ++a)
        if (a->node == path.nodes[i + 1]) w = std::min(w, a->weight);
      sum += w;
    }
    EXPECT_NEAR(sum, path.length, 1e-12 * path.length);
  }
}

TEST(BoundaryGraph, GeodesicMidpointProperty) {
  auto g = ball_graph();
  for (int b : {40, 300, 580}) {
    const auto path = g->boundary_geodesic(g->node(1), g->node(b));
    const double D = path.length;
    double best = std::numeric_limits<double>::infinity();
    for (int m : path.nodes) best = std::min(best, std::max(g->node_distance(1, m), g->node_distance(m, b)));
    EXPECT_LE(best, 0.5 * D + g->max_edge_weight());
  }
}

TEST(BoundaryGraph, AntipodalDistanceStabilizesUnderRefinement) {
  const Vec p = make_vec({1, 0, 0, 0}), q = make_vec({-1, 0, 0, 0});
  const double d1 = ball_graph(600, 8.0, 1)->d_H(p, q);
  const double d2 = ball_graph(600, 8.0, 2)->d_H(p, q);
  const double d0 = ball_graph(600, 8.0, 0)->d_H(p, q);
  EXPECT_LT(std::abs(d2 - d1), std::abs(d1 - d0) + 0.1 * d1);
  EXPECT_LT(std::abs(d2 - d1) / d1, 0.1);
}

TEST(BoundaryGraph, RefinementChangesDistancesLittle) {
  auto a = ball_graph(600, 8.0, 1), b = ball_graph(600, 8.0, 2);
  auto pts = sample_boundary(*make_ball(4), 40, 77);
  double worst = 0.0;
  for (std::size_t i = 0; i + 1 < pts.size(); i += 2) {
    const double da = a->d_H(pts[i], pts[i + 1]), db = b->d_H(pts[i], pts[i + 1]);
    if (da < 5 * a->median_edge_weight()) continue;
    worst = std::max(worst, std::abs(da - db) / da);
  }
  EXPECT_LT(worst, 0.2);
}

TEST(BoundaryGraph, TopologyAgreesWithEuclidean) {
  auto g = ball_graph();
  const Vec p = g->node(0);
  double prev = std::numeric_limits<double>::infinity();
  for (double r : {1.0, 0.6, 0.35}) {
    double worst = 0.0;
    for (int j = 1; j < g->size(); ++j)
      if ((g->node(j) - p).norm() <= r) worst = std::max(worst, g->node_distance(0, j));
    EXPECT_LT(worst, prev);
    prev = worst;
  }
}

TEST(BoundaryGraph, SaveLoadRoundTrip) {
  auto g = ball_graph();
  const std::string path = ::testing::TempDir() + "hypkob_graph.json";
  g->save(path);
  auto h = BoundaryGraph::load(path, ball_projection(), standard4());
  ASSERT_EQ(h->size(), g->size());
  for (int a = 0; a < g->size(); a += 61)
    for (int b = 0; b < g->size(); b += 67) EXPECT_EQ(h->node_distance(a, b), g->node_distance(a, b));
  std::remove(path.c_str());
}

TEST(Lipschitz, IdentityOnSameGraph) {
  auto g = ball_graph(2000);
  const auto r = lipschitz_estimate(*g, *g, {[](const Vec& p) { return p; }}, 500, 4);
  EXPECT_NEAR(r.ratio, 1.0, 1e-12);
  EXPECT_EQ(r.pairs_used, 500);
}

TEST(Lipschitz, ConstantMapIsZero) {
  auto g = ball_graph(2000);
  const Vec c = g->node(3);
  const auto r = lipschitz_estimate(*g, *g, {[c](const Vec&) { return c; }}, 200, 4);
  EXPECT_EQ(r.ratio, 0.0);
}

TEST(Lipschitz, ComplexRotationIsNearIsometry) {
  auto g = ball_graph(600, 8.0, 1);
  const Mat R = complex_rotation({0.4, -0.9});
  const auto r = lipschitz_estimate(*g, *g, {[R](const Vec& p) -> Vec { return R * p; }}, 600, 4);
  EXPECT_GT(r.ratio, 0.9);
  EXPECT_LT(r.ratio, 1.6);
}

TEST(Lipschitz, MapOffBoundaryRejected) {
  auto g = ball_graph();
  EXPECT_THROW(lipschitz_estimate(*g, *g, {[](const Vec& p) -> Vec { return 0.5 * p; }}, 50, 4), Error);
}

TEST(BoundaryGraph, AuxiliaryConformalFactorGivesBiLipschitzBand) {
  GraphParams p;
  p.n_nodes = 600;
  p.aux_conformal = 0.5;
  auto aux = BoundaryGraph::build(ball_projection(), standard4(), p);
  auto base = ball_graph();
  double lo = std::numeric_limits<double>::infinity(), hi = 0.0;
  for (int a = 0; a < base->size(); a += 23)
    for (int b = a + 1; b < base->size(); b += 31) {
      const double r = aux->node_distance(a, b) / base->node_distance(a, b);
      lo = std::min(lo, r);
      hi = std::max(hi, r);
    }
  EXPECT_GE(lo, 1.0 - 1e-12);
  EXPECT_LE(hi, 1.5 + 1e-12);
}
