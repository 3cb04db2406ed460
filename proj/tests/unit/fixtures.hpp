#pragma once

#include <map>
#include <memory>
#include <mutex>
#include <tuple>

#include "hypkob/hyperbolic_metric.hpp"

namespace hypkob::testing {

inline std::shared_ptr<const HeightProjection> ball_projection() {
  static auto p = std::make_shared<const HeightProjection>(make_ball(4));
  return p;
}

inline std::shared_ptr<const Structure> standard4() {
  static auto s = std::make_shared<const StandardStructure>(4);
  return s;
}

inline std::shared_ptr<const BoundaryGraph> ball_graph(int nodes = 600, double lambda = 8.0, int refinement = 0) {
  static std::mutex mu;
  static std::map<std::tuple<int, double, int>, std::shared_ptr<const BoundaryGraph>> cache;
  std::lock_guard<std::mutex> lock(mu);
  auto& slot = cache[{nodes, lambda, refinement}];
  if (!slot) {
    GraphParams p;
    p.n_nodes = nodes;
    p.anisotropy = lambda;
    p.refinement = refinement;
    slot = BoundaryGraph::build(ball_projection(), standard4(), p);
  }
  return slot;
}

inline std::shared_ptr<const HyperbolicModel> ball_model(int nodes = 600, double lambda = 8.0) {
  static std::mutex mu;
  static std::map<std::pair<int, double>, std::shared_ptr<const HyperbolicModel>> cache;
  auto g = ball_graph(nodes, lambda);
  std::lock_guard<std::mutex> lock(mu);
  auto& slot = cache[{nodes, lambda}];
  if (!slot) slot = std::make_shared<const HyperbolicModel>(g);
  return slot;
}

/// Point of the unit ball at height h above the boundary point p.
inline Vec at_height(const Vec& p, double h) { return p.normalized() * (1.0 - h * h); }

}  // namespace hypkob::testing
