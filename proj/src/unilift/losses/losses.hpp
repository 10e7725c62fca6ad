#pragma once

#include "unilift/core/label_map.hpp"
#include "unilift/core/scene.hpp"

#include <cstdint>
#include <span>
#include <vector>

namespace unilift::losses {

// Centroid clustering loss on s = sigmoid(map):
//   intra     = sum_seg sum_{u in seg} |s(u) - m_seg|^2
//   repulsion = sum_{i < j} |m_i - m_j|^2
//   value     = intra - repulsion
// Background pixels are ignored. Centroids are differentiated through.
struct ClusterLoss {
  double value = 0.0;
  double intra = 0.0;
  double repulsion = 0.0;
  std::vector<double> pixel_grad;  // d value / d map.values
};

ClusterLoss cluster_loss(const EmbeddingMap& map, const Partition& partition);

struct LinearProjection {
  int dim = 0;
  std::vector<double> matrix;  // row-major dim x dim

  static LinearProjection identity(int dim);
  // Identity plus N(0, noise_std^2) entries.
  static LinearProjection perturbed_identity(int dim, std::uint64_t seed, double noise_std = 0.01);
};

struct Triplet {
  int anchor = 0;
  int positive = 0;
  int negative = 0;
};

struct TripletBatch {
  std::vector<Triplet> triplets;
  double margin = 1.0;
};

// Anchors uniform over segment pixels (without replacement), positives uniform over the
// anchor segment's boundary, negatives uniform over the union of the other segments'
// boundaries. Fewer than two segments yields an empty batch.
TripletBatch mine_triplets(const EmbeddingMap& map, const Partition& partition, int max_triplets,
                           std::uint64_t seed, double margin = 1.0);

// Sum over the batch of max(0, |a-p|^2 - |a-n|^2 + margin) with a = W sigmoid(V(anchor)) etc.
struct TripletLoss {
  double value = 0.0;
  int active = 0;
  std::vector<double> pixel_grad;
  std::vector<double> proj_grad;
};

TripletLoss triplet_loss(const EmbeddingMap& map, const TripletBatch& batch, const LinearProjection& proj);

struct NeighborGraph {
  std::vector<std::vector<int>> adjacency;  // ascending, symmetric, no self-edges
  double threshold = 1e-2;

  std::size_t directed_edge_count() const;
};

// Exact graph of pairs with squared centre distance <= threshold, via a uniform grid
// of cell size sqrt(threshold).
NeighborGraph build_neighbor_graph(const Scene& scene, double threshold);

// sum_i sum_{j in N(i)} |v_i - v_j|^2 on raw embeddings (each unordered pair counted twice).
struct RegularizationLoss {
  double value = 0.0;
  std::vector<double> grad;  // per primitive, row-major
};

RegularizationLoss regularization_3d(std::span<const double> table, int dim, const NeighborGraph& graph);
RegularizationLoss regularization_3d(const Scene& scene, const NeighborGraph& graph, Channel channel);

}  // namespace unilift::losses
