#pragma once

#include "unilift/core/label_map.hpp"

#include <span>
#include <vector>

namespace unilift::baseline {

inline constexpr int kNoise = -1;

struct DensityClustering {
  std::vector<int> labels;  // cluster index per sample, kNoise for noise
  int num_clusters = 0;
};

// DBSCAN: eps-ball neighbourhoods (inclusive, self included), core points have at
// least min_pts neighbours, clusters grow breadth-first from the lowest unvisited
// index. Deterministic for a fixed sample order.
DensityClustering dbscan(std::span<const double> samples, int dim, double eps, int min_pts);

struct ClusterModel {
  int dim = 0;
  std::vector<std::vector<double>> centroids;  // sigmoid space
  double radius = 0.0;
};

// Centroids are the means of each cluster's members; noise is excluded.
ClusterModel fit_density_clusters(std::span<const double> samples, int dim, double eps, int min_pts);

// Covered pixels get 1 + index of the nearest centroid in sigmoid space (ties to the
// lower index); pixels with coverage below 0.5 stay background.
LabelMap assign_labels(const EmbeddingMap& map, const ClusterModel& model, LabelKind kind = LabelKind::Instance);

// Sigmoid embeddings of covered pixels across maps, evenly strided down to max_samples.
std::vector<double> sample_sigmoid_embeddings(const std::vector<EmbeddingMap>& maps, std::size_t max_samples);

}  // namespace unilift::baseline
