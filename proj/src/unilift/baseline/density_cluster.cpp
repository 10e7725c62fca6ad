#include "unilift/baseline/density_cluster.hpp"

#include "unilift/codec/label_codec.hpp"
#include "unilift/core/error.hpp"
#include "unilift/core/numeric.hpp"

#include <algorithm>
#include <numeric>

namespace unilift::baseline {

namespace {

constexpr int kUnvisited = -2;

// eps-neighbourhood queries over samples sorted by their first coordinate.
class SweepIndex {
 public:
  SweepIndex(std::span<const double> samples, int dim, double eps)
      : samples_(samples), dim_(dim), eps_(eps), eps2_(eps * eps) {
    const std::size_t n = samples.size() / dim;
    order_.resize(n);
    std::iota(order_.begin(), order_.end(), 0);
    std::stable_sort(order_.begin(), order_.end(), [&](int a, int b) { return first(a) < first(b); });
    keys_.resize(n);
    for (std::size_t i = 0; i < n; ++i) keys_[i] = first(order_[i]);
  }

  void query(int i, std::vector<int>& out) const {
    out.clear();
    const double x = first(i);
    auto lo = std::lower_bound(keys_.begin(), keys_.end(), x - eps_);
    auto hi = std::upper_bound(keys_.begin(), keys_.end(), x + eps_);
    const double* a = samples_.data() + static_cast<std::size_t>(i) * dim_;
    for (auto it = lo; it != hi; ++it) {
      const int j = order_[static_cast<std::size_t>(it - keys_.begin())];
      const double* b = samples_.data() + static_cast<std::size_t>(j) * dim_;
      double d2 = 0.0;
      for (int c = 0; c < dim_ && d2 <= eps2_; ++c) {
        const double diff = a[c] - b[c];
        d2 += diff * diff;
      }
      if (d2 <= eps2_) out.push_back(j);
    }
    std::sort(out.begin(), out.end());
  }

 private:
  double first(int i) const { return samples_[static_cast<std::size_t>(i) * dim_]; }

  std::span<const double> samples_;
  int dim_;
  double eps_;
  double eps2_;
  std::vector<int> order_;
  std::vector<double> keys_;
};

}  // namespace

DensityClustering dbscan(std::span<const double> samples, int dim, double eps, int min_pts) {
  if (dim <= 0 || samples.size() % dim != 0) fail(ErrorCode::InvalidArgument, "sample buffer is not a multiple of dim");
  if (!(eps > 0.0) || min_pts < 1) fail(ErrorCode::Config, "dbscan needs eps > 0 and min_pts >= 1");
  const std::size_t n = samples.size() / dim;
  DensityClustering out;
  out.labels.assign(n, kUnvisited);
  const SweepIndex index(samples, dim, eps);
  std::vector<int> neighbours, queue;
  for (std::size_t i = 0; i < n; ++i) {
    if (out.labels[i] != kUnvisited) continue;
    index.query(static_cast<int>(i), neighbours);
    if (static_cast<int>(neighbours.size()) < min_pts) {
      out.labels[i] = kNoise;
      continue;
    }
    const int cluster = out.num_clusters++;
    out.labels[i] = cluster;
    queue.clear();
    auto absorb = [&](const std::vector<int>& nb) {
      for (int q : nb) {
        if (out.labels[q] == kNoise) {
          out.labels[q] = cluster;  // border point, never expanded
        } else if (out.labels[q] == kUnvisited) {
          out.labels[q] = cluster;
          queue.push_back(q);
        }
      }
    };
    absorb(neighbours);
    for (std::size_t head = 0; head < queue.size(); ++head) {
      index.query(queue[head], neighbours);
      if (static_cast<int>(neighbours.size()) >= min_pts) absorb(neighbours);
    }
  }
  return out;
}

ClusterModel fit_density_clusters(std::span<const double> samples, int dim, double eps, int min_pts) {
  if (dim <= 0 || samples.size() / dim < static_cast<std::size_t>(min_pts)) {
    fail(ErrorCode::InvalidArgument, "density clustering needs at least min_pts samples");
  }
  const auto clustering = dbscan(samples, dim, eps, min_pts);
  if (clustering.num_clusters == 0) {
    fail(ErrorCode::Numerical, "density clustering found no cluster; try a larger eps or a smaller min_pts");
  }
  ClusterModel model;
  model.dim = dim;
  model.radius = eps;
  model.centroids.assign(clustering.num_clusters, std::vector<double>(dim, 0.0));
  std::vector<std::size_t> counts(clustering.num_clusters, 0);
  for (std::size_t i = 0; i < clustering.labels.size(); ++i) {
    const int c = clustering.labels[i];
    if (c < 0) continue;
    const double inv = 1.0 / static_cast<double>(++counts[c]);
    for (int k = 0; k < dim; ++k) model.centroids[c][k] += (samples[i * dim + k] - model.centroids[c][k]) * inv;
  }
  return model;
}

LabelMap assign_labels(const EmbeddingMap& map, const ClusterModel& model, LabelKind kind) {
  if (model.centroids.empty()) fail(ErrorCode::InvalidArgument, "cluster model has no centroids");
  if (model.dim != map.dim) fail(ErrorCode::InvalidArgument, "cluster model dimension does not match the map");
  LabelMap out(map.width, map.height, kind);
  std::vector<double> s(map.dim);
  const bool gated = map.coverage.size() == map.pixel_count();
  for (std::size_t p = 0; p < map.pixel_count(); ++p) {
    if (gated && map.coverage[p] < codec::kCoverageGate) continue;
    const auto v = map.pixel(p);
    for (int k = 0; k < map.dim; ++k) s[k] = sigmoid(v[k]);
    std::size_t best = 0;
    double best_d2 = 0.0;
    for (std::size_t c = 0; c < model.centroids.size(); ++c) {
      double d2 = 0.0;
      for (int k = 0; k < map.dim; ++k) {
        const double diff = s[k] - model.centroids[c][k];
        d2 += diff * diff;
      }
      if (c == 0 || d2 < best_d2) {
        best = c;
        best_d2 = d2;
      }
    }
    out.labels[p] = static_cast<Label>(best + 1);
  }
  return out;
}

std::vector<double> sample_sigmoid_embeddings(const std::vector<EmbeddingMap>& maps, std::size_t max_samples) {
  std::vector<std::pair<std::size_t, std::size_t>> covered;  // (map, pixel)
  int dim = 0;
  for (std::size_t m = 0; m < maps.size(); ++m) {
    dim = maps[m].dim;
    for (std::size_t p = 0; p < maps[m].pixel_count(); ++p) {
      if (maps[m].coverage[p] >= codec::kCoverageGate) covered.emplace_back(m, p);
    }
  }
  std::vector<double> out;
  if (covered.empty() || max_samples == 0) return out;
  const std::size_t take = std::min(max_samples, covered.size());
  out.reserve(take * dim);
  for (std::size_t i = 0; i < take; ++i) {
    const auto [m, p] = covered[i * covered.size() / take];
    for (double v : maps[m].pixel(p)) out.push_back(sigmoid(v));
  }
  return out;
}

}  // namespace unilift::baseline
