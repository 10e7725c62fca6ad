#include "unilift/losses/losses.hpp"

#include "unilift/core/error.hpp"
#include "unilift/core/numeric.hpp"

namespace unilift::losses {

ClusterLoss cluster_loss(const EmbeddingMap& map, const Partition& partition) {
  if (partition.width != map.width || partition.height != map.height) {
    fail(ErrorCode::InvalidArgument, "partition and embedding map dimensions differ");
  }
  ClusterLoss out;
  out.pixel_grad.assign(map.values.size(), 0.0);
  const std::size_t n = partition.labeled_pixel_count();
  const std::size_t k = partition.segments.size();
  if (n == 0) return out;
  const int d = map.dim;

  // sigmoid values for labeled pixels, stored per segment in pixel order
  std::vector<std::vector<double>> sig(k);
  std::vector<double> means(k * d, 0.0);
  for (std::size_t s = 0; s < k; ++s) {
    const auto& pix = partition.segments[s].pixels;
    auto& vals = sig[s];
    vals.resize(pix.size() * d);
    double* m = means.data() + s * d;
    // running mean: exact when every value in the segment is the same
    for (std::size_t i = 0; i < pix.size(); ++i) {
      const double* v = map.values.data() + static_cast<std::size_t>(pix[i]) * d;
      const double inv = 1.0 / static_cast<double>(i + 1);
      for (int c = 0; c < d; ++c) {
        vals[i * d + c] = sigmoid(v[c]);
        m[c] += (vals[i * d + c] - m[c]) * inv;
      }
    }
  }

  double intra = 0.0;
  for (std::size_t s = 0; s < k; ++s) {
    const double* m = means.data() + s * d;
    const auto& vals = sig[s];
    for (std::size_t i = 0; i < partition.segments[s].pixels.size(); ++i) {
      for (int c = 0; c < d; ++c) {
        const double diff = vals[i * d + c] - m[c];
        intra += diff * diff;
      }
    }
  }

  double repulsion = 0.0;
  std::vector<double> mean_grad(k * d, 0.0);  // d(-repulsion)/d m_s
  if (k >= 2) {
    // every unordered pair once
    const double norm = 0.5;
    for (std::size_t i = 0; i < k; ++i) {
      for (std::size_t j = 0; j < k; ++j) {
        if (i == j) continue;
        for (int c = 0; c < d; ++c) {
          const double diff = means[i * d + c] - means[j * d + c];
          repulsion += diff * diff;
          // each ordered pair contributes 2 diff to m_i and -2 diff to m_j
          mean_grad[i * d + c] -= 2.0 * norm * diff;
          mean_grad[j * d + c] += 2.0 * norm * diff;
        }
      }
    }
    repulsion *= norm;
  }

  for (std::size_t s = 0; s < k; ++s) {
    const auto& pix = partition.segments[s].pixels;
    const double* m = means.data() + s * d;
    const double* mg = mean_grad.data() + s * d;
    const double inv_size = 1.0 / static_cast<double>(pix.size());
    const auto& vals = sig[s];
    for (std::size_t i = 0; i < pix.size(); ++i) {
      double* g = out.pixel_grad.data() + static_cast<std::size_t>(pix[i]) * d;
      for (int c = 0; c < d; ++c) {
        const double sv = vals[i * d + c];
        // intra term: the centroid's own derivative cancels since sum(s - m) = 0
        const double gs = 2.0 * (sv - m[c]) + mg[c] * inv_size;
        g[c] = gs * sv * (1.0 - sv);
      }
    }
  }

  out.intra = intra;
  out.repulsion = repulsion;
  out.value = intra - repulsion;
  return out;
}

}  // namespace unilift::losses
