#pragma once

#include <functional>
#include <memory>
#include <string>
#include <vector>

#include "hypkob/almost_complex.hpp"
#include "hypkob/height_projection.hpp"
#include "hypkob/kdtree.hpp"

namespace hypkob {

struct GraphParams {
  int n_nodes = 2000;
  int k_neighbors = 12;
  double anisotropy = 8.0;  ///< lambda, penalty on the non-horizontal chord component
  std::uint64_t seed = 1;
  int max_k = 96;           ///< cap when doubling k to reconnect
  int refinement = 0;       ///< node count is n_nodes * 2^refinement
  double aux_conformal = 0.0;  ///< auxiliary metric factor 1 + a * x_1^2 on edge weights
};

/// Undirected edge with the frame used to split chords into horizontal and
/// non-horizontal parts.
struct GraphEdge {
  int u = 0, v = 0;
  double weight = 0.0;
  Mat vertical;      ///< N x 2 orthonormal basis of span{n, J^T n} at pi(chord midpoint)
  double sagitta = 0.0;  ///< distance from the chord midpoint to the boundary
};

struct BoundaryPath {
  std::vector<int> nodes;
  std::vector<Vec> points;
  double length = 0.0;
};

/// Discrete approximation of the Carnot-Caratheodory metric d_H. Immutable
/// after construction; all queries are const and thread-safe.
class BoundaryGraph {
 public:
  static std::shared_ptr<const BoundaryGraph> build(std::shared_ptr<const HeightProjection> projection,
                                                    std::shared_ptr<const Structure> structure, GraphParams params);
  static std::shared_ptr<const BoundaryGraph> load(const std::string& path,
                                                   std::shared_ptr<const HeightProjection> projection,
                                                   std::shared_ptr<const Structure> structure);
  void save(const std::string& path) const;

  int size() const { return static_cast<int>(nodes_.size()); }
  const GraphParams& params() const { return params_; }
  const Vec& node(int i) const { return nodes_[static_cast<std::size_t>(i)]; }
  const Vec& node_normal(int i) const { return normals_[static_cast<std::size_t>(i)]; }
  const std::vector<GraphEdge>& edges() const { return edges_; }
  const HeightProjection& projection() const { return *projection_; }
  const Structure& structure() const { return *structure_; }
  std::shared_ptr<const HeightProjection> projection_ptr() const { return projection_; }
  std::shared_ptr<const Structure> structure_ptr() const { return structure_; }

  /// Adjacent (node, weight, edge index) triples of u.
  struct Adj {
    int node;
    double weight;
    int edge;
  };
  const Adj* adj_begin(int u) const { return adj_.data() + offsets_[static_cast<std::size_t>(u)]; }
  const Adj* adj_end(int u) const { return adj_.data() + offsets_[static_cast<std::size_t>(u) + 1]; }

  /// Shortest-path distance between nodes; exactly symmetric.
  double node_distance(int a, int b) const {
    if (a > b) std::swap(a, b);
    return apsp_[static_cast<std::size_t>(a) * nodes_.size() + static_cast<std::size_t>(b)];
  }
  int snap(const Vec& p) const;
  /// d_H between the nodes nearest to p and q.
  double d_H(const Vec& p, const Vec& q) const { return node_distance(snap(p), snap(q)); }
  /// Node sequence of a shortest path; summing weights in order from the smaller
  /// index reproduces node_distance bit-for-bit.
  std::vector<int> node_path(int a, int b) const;
  BoundaryPath boundary_geodesic(const Vec& p, const Vec& q) const;

  /// Anisotropic chord length with the frame at the nearest boundary point of the midpoint.
  double chord_weight(const Vec& p, const Vec& q) const;
  /// Continuous version of d_H for arbitrary boundary points: a local chord below
  /// the resolution radius, otherwise the best route through nearby nodes.
  double resolved_distance(const Vec& p, const Vec& q) const;
  BoundaryPath resolved_geodesic(const Vec& p, const Vec& q) const;

  double max_edge_weight() const { return max_edge_; }
  double median_edge_weight() const { return median_edge_; }
  double median_spacing() const { return median_spacing_; }
  double max_spacing() const { return max_spacing_; }
  double resolution_radius() const { return 0.5 * median_spacing_; }
  double diameter() const { return diameter_; }
  int k_used() const { return k_used_; }

 private:
  BoundaryGraph() = default;
  void finalize();  // normals, CSR, APSP, statistics
  void dijkstra(int src, std::vector<double>& dist, std::vector<int>* pred) const;
  Mat vertical_frame(const Vec& p) const;
  double aux_factor(const Vec& mid) const;
  std::vector<std::pair<double, int>> near_nodes(const Vec& p, int k) const;

  std::shared_ptr<const HeightProjection> projection_;
  std::shared_ptr<const Structure> structure_;
  GraphParams params_;
  std::vector<Vec> nodes_;
  std::vector<Vec> normals_;
  std::vector<GraphEdge> edges_;
  std::vector<std::size_t> offsets_;
  std::vector<Adj> adj_;
  std::vector<double> apsp_;
  KdTree tree_;
  double max_edge_ = 0.0, median_edge_ = 0.0, median_spacing_ = 0.0, max_spacing_ = 0.0, diameter_ = 0.0;
  int k_used_ = 0;
};

/// Boundary map F: dD -> dD'.
struct BoundaryMap {
  std::function<Vec(const Vec&)> f;
  double tolerance = 1e-8;
};

struct LipschitzReport {
  double ratio = 0.0;
  int pairs_used = 0;
  double floor = 0.0;
};

/// max d'_H(F p, F q) / d_H(p, q) over sampled node pairs with d_H above
/// 5 x median edge weight.
LipschitzReport lipschitz_estimate(const BoundaryGraph& graph, const BoundaryGraph& target, const BoundaryMap& map,
                                   int n_pairs, std::uint64_t seed = 1);

}  // namespace hypkob
