#include "unilift/losses/losses.hpp"

#include "unilift/core/error.hpp"

#include <algorithm>
#include <cmath>
#include <unordered_map>

namespace unilift::losses {

namespace {

struct CellKey {
  std::int64_t x, y, z;
  bool operator==(const CellKey&) const = default;
};

struct CellHash {
  std::size_t operator()(const CellKey& k) const noexcept {
    std::uint64_t h = static_cast<std::uint64_t>(k.x) * 0x9e3779b97f4a7c15ull;
    h ^= static_cast<std::uint64_t>(k.y) * 0xc2b2ae3d27d4eb4full + (h << 6) + (h >> 2);
    h ^= static_cast<std::uint64_t>(k.z) * 0x165667b19e3779f9ull + (h << 6) + (h >> 2);
    return static_cast<std::size_t>(h);
  }
};

}  // namespace

std::size_t NeighborGraph::directed_edge_count() const {
  std::size_t n = 0;
  for (const auto& a : adjacency) n += a.size();
  return n;
}

NeighborGraph build_neighbor_graph(const Scene& scene, double threshold) {
  if (!(threshold > 0.0)) fail(ErrorCode::InvalidArgument, "neighbor threshold must be positive");
  NeighborGraph graph;
  graph.threshold = threshold;
  graph.adjacency.resize(scene.size());
  const double cell = std::sqrt(threshold);

  auto key_of = [cell](const Vec3& p) {
    return CellKey{static_cast<std::int64_t>(std::floor(p.x() / cell)), static_cast<std::int64_t>(std::floor(p.y() / cell)),
                   static_cast<std::int64_t>(std::floor(p.z() / cell))};
  };
  std::unordered_map<CellKey, std::vector<int>, CellHash> grid;
  for (std::size_t i = 0; i < scene.size(); ++i) grid[key_of(scene.primitives[i].position)].push_back(static_cast<int>(i));

  for (std::size_t i = 0; i < scene.size(); ++i) {
    const Vec3& pi = scene.primitives[i].position;
    const CellKey k = key_of(pi);
    for (std::int64_t dx = -1; dx <= 1; ++dx) {
      for (std::int64_t dy = -1; dy <= 1; ++dy) {
        for (std::int64_t dz = -1; dz <= 1; ++dz) {
          const auto it = grid.find(CellKey{k.x + dx, k.y + dy, k.z + dz});
          if (it == grid.end()) continue;
          for (int j : it->second) {
            if (static_cast<std::size_t>(j) == i) continue;
            if ((scene.primitives[j].position - pi).squaredNorm() <= threshold) graph.adjacency[i].push_back(j);
          }
        }
      }
    }
    std::sort(graph.adjacency[i].begin(), graph.adjacency[i].end());
  }
  return graph;
}

RegularizationLoss regularization_3d(std::span<const double> table, int dim, const NeighborGraph& graph) {
  if (table.size() != graph.adjacency.size() * dim) fail(ErrorCode::InvalidArgument, "graph and embedding table sizes differ");
  RegularizationLoss out;
  out.grad.assign(table.size(), 0.0);
  for (std::size_t i = 0; i < graph.adjacency.size(); ++i) {
    const double* vi = table.data() + i * dim;
    double* gi = out.grad.data() + i * dim;
    for (int j : graph.adjacency[i]) {
      const double* vj = table.data() + static_cast<std::size_t>(j) * dim;
      double* gj = out.grad.data() + static_cast<std::size_t>(j) * dim;
      for (int c = 0; c < dim; ++c) {
        const double diff = vi[c] - vj[c];
        out.value += diff * diff;
        gi[c] += 2.0 * diff;
        gj[c] -= 2.0 * diff;
      }
    }
  }
  return out;
}

RegularizationLoss regularization_3d(const Scene& scene, const NeighborGraph& graph, Channel channel) {
  const auto table = embedding_table(scene, channel);
  return regularization_3d(table, channel_dim(scene, channel), graph);
}

}  // namespace unilift::losses
