// Random instances and reference implementations shared by the unit tests and the
// acceptance runner. The oracles here deliberately avoid the library's own helpers
// so that agreement means something.
#pragma once

#include "unilift/core/label_map.hpp"
#include "unilift/core/numeric.hpp"
#include "unilift/core/scene.hpp"
#include "unilift/losses/losses.hpp"
#include "unilift/metrics/seg_metrics.hpp"
#include "unilift/raster/splat.hpp"

#include <algorithm>
#include <cmath>
#include <functional>
#include <map>
#include <set>
#include <span>
#include <vector>

namespace fixtures {

using namespace unilift;

// Identity pose: camera at the origin looking down +z.
inline Camera axis_camera(int width, int height, double focal) {
  Camera cam;
  cam.world_to_camera.setIdentity();
  cam.focal = Vec2(focal, focal);
  cam.principal_point = Vec2((width - 1) * 0.5, (height - 1) * 0.5);
  cam.width = width;
  cam.height = height;
  return cam;
}

inline double uniform(Rng& rng, double lo, double hi) { return lo + (hi - lo) * uniform_unit(rng); }

// Primitives inside the frustum of axis_camera(w, h, f) at depths 2..4.
inline Scene random_scene(Rng& rng, int count, int dim, const Camera& cam) {
  Scene scene;
  scene.embedding_dim = dim;
  scene.semantic_dim = dim;
  scene.bound.min = Vec3::Constant(-10.0);
  scene.bound.max = Vec3::Constant(10.0);
  const double half_x = 0.5 * cam.width / cam.focal.x();
  const double half_y = 0.5 * cam.height / cam.focal.y();
  for (int i = 0; i < count; ++i) {
    GaussianPrimitive p;
    const double z = uniform(rng, 2.0, 4.0);
    p.position = Vec3(uniform(rng, -half_x, half_x) * z, uniform(rng, -half_y, half_y) * z, z);
    p.scale = Vec3(uniform(rng, 0.08, 0.4), uniform(rng, 0.08, 0.4), uniform(rng, 0.08, 0.4));
    Eigen::Quaterniond q(standard_normal(rng), standard_normal(rng), standard_normal(rng), standard_normal(rng));
    p.rotation = q.normalized();
    p.opacity = uniform(rng, 0.3, 0.95);
    p.color = Vec3(uniform_unit(rng), uniform_unit(rng), uniform_unit(rng));
    p.instance_embedding.resize(dim);
    p.semantic_embedding.resize(dim);
    for (auto& v : p.instance_embedding) v = 1.5 * standard_normal(rng);
    for (auto& v : p.semantic_embedding) v = 1.5 * standard_normal(rng);
    scene.primitives.push_back(p);
  }
  return scene;
}

// Voronoi-style blocks over `labels` random sites, with some background pixels.
inline LabelMap random_mask(Rng& rng, int width, int height, int labels, double background = 0.1) {
  std::vector<Vec2> sites;
  for (int k = 0; k < labels; ++k) sites.emplace_back(uniform(rng, 0, width), uniform(rng, 0, height));
  LabelMap mask(width, height, LabelKind::Instance);
  for (int y = 0; y < height; ++y) {
    for (int x = 0; x < width; ++x) {
      int best = 0;
      for (int k = 1; k < labels; ++k) {
        if ((sites[k] - Vec2(x, y)).squaredNorm() < (sites[best] - Vec2(x, y)).squaredNorm()) best = k;
      }
      mask.at(x, y) = uniform_unit(rng) < background ? kBackground : static_cast<Label>(best + 1);
    }
  }
  return mask;
}

// Random bijection of the non-background labels onto arbitrary large values.
inline LabelMap scramble_labels(Rng& rng, const LabelMap& mask) {
  Label max_label = 0;
  for (Label l : mask.labels) max_label = std::max(max_label, l);
  std::vector<Label> targets;
  std::set<Label> used;
  while (targets.size() < max_label) {
    const Label t = 1 + static_cast<Label>(uniform_index(rng, 60000));
    if (used.insert(t).second) targets.push_back(t);
  }
  LabelMap out = mask;
  for (auto& l : out.labels) {
    if (l != kBackground) l = targets[l - 1];
  }
  return out;
}

inline std::vector<double> random_table(Rng& rng, std::size_t count, double scale = 1.5) {
  std::vector<double> t(count);
  for (auto& v : t) v = scale * standard_normal(rng);
  return t;
}

inline std::vector<double> central_difference(const std::function<double(const std::vector<double>&)>& f,
                                              std::vector<double> x, double step) {
  std::vector<double> g(x.size());
  for (std::size_t i = 0; i < x.size(); ++i) {
    const double keep = x[i];
    x[i] = keep + step;
    const double up = f(x);
    x[i] = keep - step;
    const double down = f(x);
    x[i] = keep;
    g[i] = (up - down) / (2.0 * step);
  }
  return g;
}

// |a - b| / max(|a|, |b|) in the Euclidean norm; 0 when both vanish.
inline double relative_error(std::span<const double> a, std::span<const double> b) {
  double diff = 0.0, na = 0.0, nb = 0.0;
  for (std::size_t i = 0; i < a.size(); ++i) {
    diff += (a[i] - b[i]) * (a[i] - b[i]);
    na += a[i] * a[i];
    nb += b[i] * b[i];
  }
  const double denom = std::sqrt(std::max(na, nb));
  return denom == 0.0 ? 0.0 : std::sqrt(diff) / denom;
}

struct GradientCheck {
  double relative_error = 0.0;
  std::size_t parameters = 0;
  double gradient_norm = 0.0;
};

inline double norm(std::span<const double> v) {
  double s = 0.0;
  for (double x : v) s += x * x;
  return std::sqrt(s);
}

constexpr double kFiniteDifferenceStep = 1e-3;

// Cluster loss through the splat blend: d loss / d per-primitive embedding.
inline GradientCheck check_cluster_gradient(std::uint64_t seed) {
  Rng rng(seed);
  const int dim = 4;
  const Camera cam = axis_camera(8, 8, 8.0);
  const Scene scene = random_scene(rng, 10 + static_cast<int>(uniform_index(rng, 41)), dim, cam);
  const auto plan = raster::rasterize(scene, cam);
  const Partition part = partition_from_mask(random_mask(rng, 8, 8, 2 + static_cast<int>(uniform_index(rng, 3))));
  const auto table = random_table(rng, scene.size() * dim);
  auto f = [&](const std::vector<double>& t) { return losses::cluster_loss(raster::compose(plan, t, dim), part).value; };
  const auto map = raster::compose(plan, table, dim);
  const auto analytic = raster::backward_embeddings(map, losses::cluster_loss(map, part).pixel_grad);
  const auto numeric = central_difference(f, table, kFiniteDifferenceStep);
  return {relative_error(analytic, numeric), table.size(), norm(analytic)};
}

// Smallest |hinge| over a batch; finite differences are meaningless near the kink.
inline double min_abs_hinge(const EmbeddingMap& map, const losses::TripletBatch& batch, const losses::LinearProjection& proj) {
  const int d = map.dim;
  double best = std::numeric_limits<double>::infinity();
  auto project = [&](int pixel) {
    std::vector<double> z(d, 0.0);
    for (int r = 0; r < d; ++r) {
      for (int c = 0; c < d; ++c) z[r] += proj.matrix[r * d + c] * sigmoid(map.values[static_cast<std::size_t>(pixel) * d + c]);
    }
    return z;
  };
  for (const auto& t : batch.triplets) {
    const auto a = project(t.anchor), p = project(t.positive), n = project(t.negative);
    double dap = 0.0, dan = 0.0;
    for (int c = 0; c < d; ++c) {
      dap += (a[c] - p[c]) * (a[c] - p[c]);
      dan += (a[c] - n[c]) * (a[c] - n[c]);
    }
    best = std::min(best, std::abs(dap - dan + batch.margin));
  }
  return best;
}

// Triplet loss through sigmoid, W and the splat blend; checks both the embedding and
// the W gradient. Instances with a hinge within 0.05 of its kink are redrawn.
inline GradientCheck check_triplet_gradient(std::uint64_t seed) {
  for (std::uint64_t attempt = 0;; ++attempt) {
    Rng rng(mix_seed(seed, attempt));
    const int dim = 4;
    const Camera cam = axis_camera(8, 8, 8.0);
    const Scene scene = random_scene(rng, 10 + static_cast<int>(uniform_index(rng, 41)), dim, cam);
    const auto plan = raster::rasterize(scene, cam);
    const Partition part = partition_from_mask(random_mask(rng, 8, 8, 2 + static_cast<int>(uniform_index(rng, 3))));
    const auto table = random_table(rng, scene.size() * dim);
    auto proj = losses::LinearProjection::perturbed_identity(dim, mix_seed(seed, 100 + attempt), 0.5);
    const auto map = raster::compose(plan, table, dim);
    const auto batch = losses::mine_triplets(map, part, 24, mix_seed(seed, 200 + attempt), 0.3);
    if (batch.triplets.empty() || min_abs_hinge(map, batch, proj) < 0.05) continue;

    const auto loss = losses::triplet_loss(map, batch, proj);
    if (loss.active == 0) continue;
    std::vector<double> analytic = raster::backward_embeddings(map, loss.pixel_grad);
    analytic.insert(analytic.end(), loss.proj_grad.begin(), loss.proj_grad.end());

    std::vector<double> params = table;
    params.insert(params.end(), proj.matrix.begin(), proj.matrix.end());
    auto f = [&](const std::vector<double>& x) {
      losses::LinearProjection w = proj;
      std::copy(x.begin() + table.size(), x.end(), w.matrix.begin());
      const std::vector<double> t(x.begin(), x.begin() + table.size());
      return losses::triplet_loss(raster::compose(plan, t, dim), batch, w).value;
    };
    const auto numeric = central_difference(f, params, kFiniteDifferenceStep);
    return {relative_error(analytic, numeric), params.size(), norm(analytic)};
  }
}

inline Scene random_cloud(Rng& rng, int count, int dim) {
  Scene scene;
  scene.embedding_dim = dim;
  scene.semantic_dim = dim;
  for (int i = 0; i < count; ++i) {
    GaussianPrimitive p;
    p.position = Vec3(uniform_unit(rng), uniform_unit(rng), uniform_unit(rng)) * 0.6;
    p.opacity = 0.5;
    p.instance_embedding.assign(dim, 0.0);
    p.semantic_embedding.assign(dim, 0.0);
    scene.primitives.push_back(p);
  }
  return scene;
}

inline GradientCheck check_regularization_gradient(std::uint64_t seed) {
  Rng rng(seed);
  const int dim = 4;
  const Scene scene = random_cloud(rng, 50, dim);
  const auto graph = losses::build_neighbor_graph(scene, 0.04);
  const auto table = random_table(rng, scene.size() * dim);
  auto f = [&](const std::vector<double>& t) { return losses::regularization_3d(t, dim, graph).value; };
  const auto analytic = losses::regularization_3d(table, dim, graph).grad;
  const auto numeric = central_difference(f, table, kFiniteDifferenceStep);
  return {relative_error(analytic, numeric), table.size(), norm(analytic)};
}

// Losses and gradients on a mask and on a scrambled relabelling of it must agree bit
// for bit. Returns the number of mismatching quantities (0 on success).
inline int permutation_mismatches(std::uint64_t seed) {
  Rng rng(seed);
  const int dim = 4;
  const Camera cam = axis_camera(8, 8, 8.0);
  const Scene scene = random_scene(rng, 30, dim, cam);
  const auto plan = raster::rasterize(scene, cam);
  const LabelMap mask = random_mask(rng, 8, 8, 2 + static_cast<int>(uniform_index(rng, 4)));
  const LabelMap scrambled = scramble_labels(rng, mask);
  const auto map = raster::compose(plan, random_table(rng, scene.size() * dim), dim);
  const auto proj = losses::LinearProjection::perturbed_identity(dim, seed, 0.1);
  const Partition a = partition_from_mask(mask);
  const Partition b = partition_from_mask(scrambled);

  int bad = 0;
  const auto ca = losses::cluster_loss(map, a), cb = losses::cluster_loss(map, b);
  bad += ca.value != cb.value;
  bad += ca.pixel_grad != cb.pixel_grad;
  const auto ta = losses::triplet_loss(map, losses::mine_triplets(map, a, 50, seed), proj);
  const auto tb = losses::triplet_loss(map, losses::mine_triplets(map, b, 50, seed), proj);
  bad += ta.value != tb.value;
  bad += ta.pixel_grad != tb.pixel_grad;
  bad += ta.proj_grad != tb.proj_grad;
  const auto graph = losses::build_neighbor_graph(scene, 0.25);
  const auto ra = losses::regularization_3d(scene, graph, Channel::Instance);
  const auto rb = losses::regularization_3d(scene, graph, Channel::Instance);
  bad += ra.value != rb.value;
  bad += ra.grad != rb.grad;
  return bad;
}

// ---- scene-level panoptic quality by exhaustive matching ----

struct OracleClass {
  Label class_id = 0;
  int tp = 0, fp = 0, fn = 0;
  double pq = 0.0;
};

struct OraclePq {
  double pq = 0.0;
  std::vector<OracleClass> per_class;
};

struct OracleSegment {
  Label instance = 0;
  Label class_id = 0;
  std::set<std::pair<int, int>> pixels;  // (view, pixel)
};

inline std::vector<OracleSegment> oracle_segments(const std::vector<metrics::PanopticView>& views) {
  std::map<Label, OracleSegment> segs;
  std::map<Label, std::map<Label, int>> votes;
  for (int v = 0; v < static_cast<int>(views.size()); ++v) {
    for (int p = 0; p < static_cast<int>(views[v].instance.labels.size()); ++p) {
      const Label inst = views[v].instance.labels[p];
      if (inst == 0) continue;
      segs[inst].instance = inst;
      segs[inst].pixels.insert({v, p});
      ++votes[inst][views[v].semantic.labels[p]];
    }
  }
  std::vector<OracleSegment> out;
  for (auto& [inst, seg] : segs) {
    int best = -1;
    for (const auto& [cls, n] : votes[inst]) {
      if (n > best) {  // strict: the smallest class wins ties
        best = n;
        seg.class_id = cls;
      }
    }
    out.push_back(seg);
  }
  return out;
}

// Best injective matching (max total IoU over pairs with IoU > 1/2) by exhaustive search.
inline void best_matching(const std::vector<std::vector<double>>& iou, std::size_t g, std::vector<bool>& used, int count,
                          double sum, int& best_count, double& best_sum) {
  if (g == iou.size()) {
    if (sum > best_sum || (sum == best_sum && count > best_count)) {
      best_sum = sum;
      best_count = count;
    }
    return;
  }
  best_matching(iou, g + 1, used, count, sum, best_count, best_sum);
  for (std::size_t p = 0; p < used.size(); ++p) {
    if (used[p] || iou[g][p] < 0.0) continue;
    used[p] = true;
    best_matching(iou, g + 1, used, count + 1, sum + iou[g][p], best_count, best_sum);
    used[p] = false;
  }
}

inline OraclePq oracle_pq(const std::vector<metrics::PanopticView>& pred, const std::vector<metrics::PanopticView>& gt) {
  const auto ps = oracle_segments(pred);
  const auto gs = oracle_segments(gt);
  std::set<Label> classes;
  for (const auto& s : gs) classes.insert(s.class_id);
  OraclePq out;
  for (Label c : classes) {
    std::vector<const OracleSegment*> P, G;
    for (const auto& s : ps) {
      if (s.class_id == c) P.push_back(&s);
    }
    for (const auto& s : gs) {
      if (s.class_id == c) G.push_back(&s);
    }
    std::vector<std::vector<double>> iou(G.size(), std::vector<double>(P.size(), -1.0));
    for (std::size_t g = 0; g < G.size(); ++g) {
      for (std::size_t p = 0; p < P.size(); ++p) {
        std::size_t inter = 0;
        for (const auto& px : G[g]->pixels) inter += P[p]->pixels.count(px);
        const std::size_t uni = G[g]->pixels.size() + P[p]->pixels.size() - inter;
        if (2 * inter > uni) iou[g][p] = static_cast<double>(inter) / static_cast<double>(uni);
      }
    }
    std::vector<bool> used(P.size(), false);
    int tp = 0;
    double sum = 0.0;
    best_matching(iou, 0, used, 0, 0.0, tp, sum);
    OracleClass oc;
    oc.class_id = c;
    oc.tp = tp;
    oc.fp = static_cast<int>(P.size()) - tp;
    oc.fn = static_cast<int>(G.size()) - tp;
    oc.pq = sum / (tp + 0.5 * oc.fp + 0.5 * oc.fn);
    out.per_class.push_back(oc);
  }
  double total = 0.0;
  for (const auto& c : out.per_class) total += c.pq;
  out.pq = out.per_class.empty() ? 0.0 : total / static_cast<double>(out.per_class.size());
  return out;
}

// Random panoptic case: ground truth of up to 9 instances over 3 classes, and a
// prediction derived from it by renaming, pixel noise, merges, splits and per-view
// relabelling. Both sides have at most 5 segments per class.
struct PqCase {
  std::vector<metrics::PanopticView> pred;
  std::vector<metrics::PanopticView> gt;
};

inline bool within_segment_limit(const std::vector<metrics::PanopticView>& views, int limit) {
  std::map<Label, int> per_class;
  for (const auto& s : oracle_segments(views)) ++per_class[s.class_id];
  for (const auto& [c, n] : per_class) {
    if (n > limit) return false;
  }
  return true;
}

inline PqCase random_pq_case(std::uint64_t seed) {
  for (std::uint64_t attempt = 0;; ++attempt) {
    Rng rng(mix_seed(seed, attempt));
    const int views = 1 + static_cast<int>(uniform_index(rng, 3));
    const int w = 5 + static_cast<int>(uniform_index(rng, 4));
    const int h = 5 + static_cast<int>(uniform_index(rng, 4));
    const int instances = 1 + static_cast<int>(uniform_index(rng, 9));
    std::vector<Label> cls(instances + 1, 0);
    for (int i = 1; i <= instances; ++i) cls[i] = 1 + static_cast<Label>(uniform_index(rng, 3));
    std::vector<Label> rename(instances + 1, 0);
    for (int i = 1; i <= instances; ++i) rename[i] = static_cast<Label>(100 + 7 * i + uniform_index(rng, 5));
    const double noise = uniform(rng, 0.0, 0.35);
    const bool merge = uniform_unit(rng) < 0.2;
    const bool per_view_relabel = uniform_unit(rng) < 0.2;
    PqCase out;
    for (int v = 0; v < views; ++v) {
      LabelMap gi = random_mask(rng, w, h, instances, 0.15);
      LabelMap gsem(w, h, LabelKind::Semantic);
      for (std::size_t p = 0; p < gi.labels.size(); ++p) gsem.labels[p] = cls[gi.labels[p]];
      LabelMap pi = gi, psem = gsem;
      for (std::size_t p = 0; p < gi.labels.size(); ++p) {
        Label inst = gi.labels[p];
        if (uniform_unit(rng) < noise) inst = static_cast<Label>(uniform_index(rng, instances + 1));
        if (merge && inst == 2) inst = 1;
        Label id = inst == 0 ? 0 : rename[inst];
        if (per_view_relabel && id != 0) id += 1000 * v;
        if (id != 0 && uniform_unit(rng) < 0.05) id += 50000;  // occasional stray split
        pi.labels[p] = id;
        psem.labels[p] = uniform_unit(rng) < noise * 0.5 ? static_cast<Label>(uniform_index(rng, 4)) : cls[inst];
      }
      out.gt.push_back({gi, gsem});
      out.pred.push_back({pi, psem});
    }
    if (within_segment_limit(out.pred, 5) && within_segment_limit(out.gt, 5)) return out;
  }
}

}  // namespace fixtures
