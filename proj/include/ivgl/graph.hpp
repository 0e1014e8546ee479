#pragma once

// Undirected weighted graphs over exposure nodes, their Laplacians, and the
// helpers the simulation protocols need (ring graphs, distance graphs,
// contiguous clusters for placing true supports).

#include <Eigen/Dense>
#include <string>
#include <vector>

namespace ivgl {

/// One undirected edge; endpoints are 0-based with src < dst.
struct Edge {
  int src = 0;
  int dst = 0;
  double weight = 1.0;
};

class Graph {
 public:
  Graph() = default;

  /// Validates and canonicalizes the edge list: endpoints in range, no
  /// self-loops, no duplicate pairs, finite non-negative weights. Edges are
  /// stored sorted by (src, dst).
  Graph(int node_count, std::vector<Edge> edges);

  int node_count() const { return node_count_; }
  const std::vector<Edge>& edges() const { return edges_; }

  /// Weighted degree d_j = sum of incident edge weights.
  const Eigen::VectorXd& degrees() const { return degrees_; }

  /// Dense symmetric adjacency matrix (zero diagonal).
  Eigen::MatrixXd adjacency() const;

  /// Sorted neighbor lists (ascending node index).
  const std::vector<std::vector<int>>& neighbors() const { return neighbors_; }

 private:
  int node_count_ = 0;
  std::vector<Edge> edges_;
  Eigen::VectorXd degrees_;
  std::vector<std::vector<int>> neighbors_;
};

/// Cycle 1-2-...-p-1 with unit weights; requires node_count >= 3.
Graph build_ring(int node_count);

/// Edge (j,k) iff the Euclidean distance between rows j and k of coords
/// (p x 3) is strictly below threshold; unit weights. threshold must be > 0.
Graph build_distance_graph(const Eigen::MatrixXd& coords, double threshold);

enum class LaplacianKind { normalized, unnormalized };

/// Laplacian matrix together with a factor S (rank x p) satisfying S'S = L,
/// obtained from the eigendecomposition with tiny negative eigenvalues
/// (clamped at -1e-12) treated as zero.
struct Laplacian {
  LaplacianKind kind = LaplacianKind::normalized;
  Eigen::MatrixXd matrix;
  Eigen::MatrixXd sqrt_factor;

  int size() const { return static_cast<int>(matrix.rows()); }
  int rank() const { return static_cast<int>(sqrt_factor.rows()); }
};

/// Unnormalized: L = D - A. Normalized: diagonal 1 where d_j > 0 (else 0),
/// off-diagonal -w_jk / sqrt(d_j d_k) for adjacent pairs.
Laplacian laplacian(const Graph& g, LaplacianKind kind);

/// Connected node set of the requested size grown from seed_node by
/// breadth-first search, visiting neighbors in ascending index order. If the
/// seed's component is smaller than size, remaining slots are filled with the
/// unused nodes nearest to the seed by index distance (ties: lower index).
std::vector<int> contiguous_cluster(const Graph& g, int seed_node, int size);

std::string to_string(LaplacianKind kind);

}  // namespace ivgl
