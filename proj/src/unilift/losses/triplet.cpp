#include "unilift/losses/losses.hpp"

#include "unilift/core/error.hpp"
#include "unilift/core/numeric.hpp"

#include <algorithm>
#include <numeric>

namespace unilift::losses {

LinearProjection LinearProjection::identity(int dim) {
  LinearProjection p;
  p.dim = dim;
  p.matrix.assign(static_cast<std::size_t>(dim) * dim, 0.0);
  for (int i = 0; i < dim; ++i) p.matrix[static_cast<std::size_t>(i) * dim + i] = 1.0;
  return p;
}

LinearProjection LinearProjection::perturbed_identity(int dim, std::uint64_t seed, double noise_std) {
  auto p = identity(dim);
  Rng rng(seed);
  for (auto& w : p.matrix) w += noise_std * standard_normal(rng);
  return p;
}

TripletBatch mine_triplets(const EmbeddingMap& map, const Partition& partition, int max_triplets,
                           std::uint64_t seed, double margin) {
  if (partition.width != map.width || partition.height != map.height) {
    fail(ErrorCode::InvalidArgument, "partition and embedding map dimensions differ");
  }
  TripletBatch batch;
  batch.margin = margin;
  const auto& segs = partition.segments;
  if (segs.size() < 2 || max_triplets <= 0) return batch;

  // anchor candidates: (segment, pixel) in partition order
  std::vector<std::pair<int, int>> anchors;
  anchors.reserve(partition.labeled_pixel_count());
  for (std::size_t s = 0; s < segs.size(); ++s) {
    if (segs[s].boundary.empty()) continue;
    for (int p : segs[s].pixels) anchors.emplace_back(static_cast<int>(s), p);
  }
  std::vector<std::size_t> boundary_prefix(segs.size() + 1, 0);
  for (std::size_t s = 0; s < segs.size(); ++s) boundary_prefix[s + 1] = boundary_prefix[s] + segs[s].boundary.size();
  const std::size_t total_boundary = boundary_prefix.back();

  Rng rng(seed);
  const std::size_t count = std::min<std::size_t>(static_cast<std::size_t>(max_triplets), anchors.size());
  if (count < anchors.size()) {
    // partial Fisher-Yates: the first `count` entries become a uniform sample
    for (std::size_t i = 0; i < count; ++i) {
      const std::size_t j = i + uniform_index(rng, anchors.size() - i);
      std::swap(anchors[i], anchors[j]);
    }
    anchors.resize(count);
  }

  batch.triplets.reserve(count);
  for (const auto& [s, pixel] : anchors) {
    const auto& own = segs[s].boundary;
    const std::size_t others = total_boundary - own.size();
    if (others == 0) continue;
    Triplet t;
    t.anchor = pixel;
    t.positive = own[uniform_index(rng, own.size())];
    std::size_t r = uniform_index(rng, others);
    if (r >= boundary_prefix[s]) r += own.size();  // skip the anchor's own segment
    const auto it = std::upper_bound(boundary_prefix.begin(), boundary_prefix.end(), r);
    const std::size_t neg_seg = static_cast<std::size_t>(it - boundary_prefix.begin()) - 1;
    t.negative = segs[neg_seg].boundary[r - boundary_prefix[neg_seg]];
    batch.triplets.push_back(t);
  }
  return batch;
}

TripletLoss triplet_loss(const EmbeddingMap& map, const TripletBatch& batch, const LinearProjection& proj) {
  const int d = map.dim;
  if (proj.dim != d) fail(ErrorCode::InvalidArgument, "projection dimension does not match embedding dimension");
  TripletLoss out;
  out.pixel_grad.assign(map.values.size(), 0.0);
  out.proj_grad.assign(proj.matrix.size(), 0.0);
  if (batch.triplets.empty()) return out;

  const std::size_t npix = map.pixel_count();
  const double* w = proj.matrix.data();
  std::vector<double> s[3], z[3], gz[3];
  for (int r = 0; r < 3; ++r) {
    s[r].resize(d);
    z[r].resize(d);
    gz[r].resize(d);
  }

  for (const auto& t : batch.triplets) {
    const int idx[3] = {t.anchor, t.positive, t.negative};
    for (int r = 0; r < 3; ++r) {
      if (idx[r] < 0 || static_cast<std::size_t>(idx[r]) >= npix) fail(ErrorCode::InvalidArgument, "triplet index out of range");
      const double* v = map.values.data() + static_cast<std::size_t>(idx[r]) * d;
      for (int c = 0; c < d; ++c) s[r][c] = sigmoid(v[c]);
      for (int row = 0; row < d; ++row) {
        double acc = 0.0;
        for (int c = 0; c < d; ++c) acc += w[row * d + c] * s[r][c];
        z[r][row] = acc;
      }
    }
    double dap = 0.0, dan = 0.0;
    for (int c = 0; c < d; ++c) {
      const double ap = z[0][c] - z[1][c];
      const double an = z[0][c] - z[2][c];
      dap += ap * ap;
      dan += an * an;
    }
    const double hinge = dap - dan + batch.margin;
    if (!(hinge > 0.0)) continue;
    out.value += hinge;
    ++out.active;
    for (int c = 0; c < d; ++c) {
      gz[0][c] = 2.0 * (z[2][c] - z[1][c]);
      gz[1][c] = -2.0 * (z[0][c] - z[1][c]);
      gz[2][c] = 2.0 * (z[0][c] - z[2][c]);
    }
    for (int r = 0; r < 3; ++r) {
      double* pg = out.pixel_grad.data() + static_cast<std::size_t>(idx[r]) * d;
      for (int row = 0; row < d; ++row) {
        for (int c = 0; c < d; ++c) out.proj_grad[row * d + c] += gz[r][row] * s[r][c];
      }
      for (int c = 0; c < d; ++c) {
        double gs = 0.0;
        for (int row = 0; row < d; ++row) gs += w[row * d + c] * gz[r][row];
        pg[c] += gs * s[r][c] * (1.0 - s[r][c]);
      }
    }
  }
  return out;
}

}  // namespace unilift::losses
