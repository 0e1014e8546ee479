#include "ivgl/graph.hpp"

#include <algorithm>
#include <cmath>
#include <queue>
#include <stdexcept>

namespace ivgl {

Graph::Graph(int node_count, std::vector<Edge> edges)
    : node_count_(node_count), edges_(std::move(edges)) {
  if (node_count_ < 0) throw std::invalid_argument("graph: negative node count");
  for (const Edge& e : edges_) {
    if (e.src < 0 || e.src >= node_count_ || e.dst < 0 || e.dst >= node_count_) {
      throw std::invalid_argument("graph: edge endpoint out of range");
    }
    if (e.src == e.dst) throw std::invalid_argument("graph: self-loop not allowed");
    if (!std::isfinite(e.weight) || e.weight < 0.0) {
      throw std::invalid_argument("graph: edge weight must be finite and non-negative");
    }
  }
  for (Edge& e : edges_) {
    if (e.src > e.dst) std::swap(e.src, e.dst);
  }
  std::sort(edges_.begin(), edges_.end(), [](const Edge& a, const Edge& b) {
    return a.src != b.src ? a.src < b.src : a.dst < b.dst;
  });
  for (std::size_t i = 1; i < edges_.size(); ++i) {
    if (edges_[i].src == edges_[i - 1].src && edges_[i].dst == edges_[i - 1].dst) {
      throw std::invalid_argument("graph: duplicate edge");
    }
  }
  degrees_ = Eigen::VectorXd::Zero(node_count_);
  neighbors_.assign(node_count_, {});
  for (const Edge& e : edges_) {
    degrees_[e.src] += e.weight;
    degrees_[e.dst] += e.weight;
    neighbors_[e.src].push_back(e.dst);
    neighbors_[e.dst].push_back(e.src);
  }
  for (auto& nb : neighbors_) std::sort(nb.begin(), nb.end());
}

Eigen::MatrixXd Graph::adjacency() const {
  Eigen::MatrixXd a = Eigen::MatrixXd::Zero(node_count_, node_count_);
  for (const Edge& e : edges_) {
    a(e.src, e.dst) = e.weight;
    a(e.dst, e.src) = e.weight;
  }
  return a;
}

Graph build_ring(int node_count) {
  if (node_count < 3) {
    throw std::invalid_argument("build_ring: need at least 3 nodes");
  }
  std::vector<Edge> edges;
  edges.reserve(node_count);
  for (int j = 0; j + 1 < node_count; ++j) edges.push_back({j, j + 1, 1.0});
  edges.push_back({0, node_count - 1, 1.0});
  return Graph(node_count, std::move(edges));
}

Graph build_distance_graph(const Eigen::MatrixXd& coords, double threshold) {
  if (coords.cols() != 3) {
    throw std::invalid_argument("build_distance_graph: coords must be p x 3");
  }
  if (!coords.allFinite()) {
    throw std::invalid_argument("build_distance_graph: coords must be finite");
  }
  if (!(threshold > 0.0)) {
    throw std::invalid_argument("build_distance_graph: threshold must be positive");
  }
  const int p = static_cast<int>(coords.rows());
  std::vector<Edge> edges;
  for (int j = 0; j < p; ++j) {
    for (int k = j + 1; k < p; ++k) {
      double dist = (coords.row(j) - coords.row(k)).norm();
      if (dist < threshold) edges.push_back({j, k, 1.0});
    }
  }
  return Graph(p, std::move(edges));
}

Laplacian laplacian(const Graph& g, LaplacianKind kind) {
  const int p = g.node_count();
  const Eigen::VectorXd& d = g.degrees();
  Laplacian out;
  out.kind = kind;
  out.matrix = Eigen::MatrixXd::Zero(p, p);
  if (kind == LaplacianKind::unnormalized) {
    for (int j = 0; j < p; ++j) out.matrix(j, j) = d[j];
    for (const Edge& e : g.edges()) {
      out.matrix(e.src, e.dst) = -e.weight;
      out.matrix(e.dst, e.src) = -e.weight;
    }
  } else {
    for (int j = 0; j < p; ++j) out.matrix(j, j) = d[j] > 0.0 ? 1.0 : 0.0;
    for (const Edge& e : g.edges()) {
      double v = 0.0;
      if (e.weight > 0.0 && d[e.src] > 0.0 && d[e.dst] > 0.0) {
        v = -e.weight / std::sqrt(d[e.src] * d[e.dst]);
      }
      out.matrix(e.src, e.dst) = v;
      out.matrix(e.dst, e.src) = v;
    }
  }

  Eigen::SelfAdjointEigenSolver<Eigen::MatrixXd> eig(out.matrix);
  if (eig.info() != Eigen::Success) {
    throw std::runtime_error("laplacian: eigendecomposition failed");
  }
  Eigen::VectorXd vals = eig.eigenvalues();
  int rank = 0;
  for (int i = 0; i < p; ++i) {
    if (vals[i] < 0.0) vals[i] = 0.0;  // clamp -1e-12 < lambda < 0 float noise
    if (vals[i] > 0.0) ++rank;
  }
  out.sqrt_factor.resize(rank, p);
  int row = 0;
  for (int i = 0; i < p; ++i) {
    if (vals[i] > 0.0) {
      out.sqrt_factor.row(row++) =
          std::sqrt(vals[i]) * eig.eigenvectors().col(i).transpose();
    }
  }
  return out;
}

std::vector<int> contiguous_cluster(const Graph& g, int seed_node, int size) {
  const int p = g.node_count();
  if (seed_node < 0 || seed_node >= p) {
    throw std::invalid_argument("contiguous_cluster: seed node out of range");
  }
  if (size < 1 || size > p) {
    throw std::invalid_argument("contiguous_cluster: size must be in [1, node_count]");
  }
  std::vector<int> picked;
  picked.reserve(size);
  std::vector<bool> seen(p, false);
  std::queue<int> frontier;
  frontier.push(seed_node);
  seen[seed_node] = true;
  while (!frontier.empty() && static_cast<int>(picked.size()) < size) {
    int node = frontier.front();
    frontier.pop();
    picked.push_back(node);
    for (int nb : g.neighbors()[node]) {
      if (!seen[nb]) {
        seen[nb] = true;
        frontier.push(nb);
      }
    }
  }
  if (static_cast<int>(picked.size()) < size) {
    // Component exhausted: take the unused nodes closest to the seed by index.
    std::vector<int> rest;
    for (int j = 0; j < p; ++j) {
      if (std::find(picked.begin(), picked.end(), j) == picked.end()) rest.push_back(j);
    }
    std::sort(rest.begin(), rest.end(), [seed_node](int a, int b) {
      int da = std::abs(a - seed_node), db = std::abs(b - seed_node);
      return da != db ? da < db : a < b;
    });
    for (int j : rest) {
      if (static_cast<int>(picked.size()) == size) break;
      picked.push_back(j);
    }
  }
  return picked;
}

std::string to_string(LaplacianKind kind) {
  return kind == LaplacianKind::normalized ? "normalized" : "unnormalized";
}

}  // namespace ivgl
