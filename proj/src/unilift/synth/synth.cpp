#include "unilift/synth/synth.hpp"

#include "unilift/core/error.hpp"
#include "unilift/core/numeric.hpp"
#include "unilift/raster/splat.hpp"

#include <algorithm>
#include <limits>
#include <cmath>
#include <numbers>

namespace unilift::synth {

namespace {

constexpr int kMaxPlacementAttempts = 10000;
constexpr double kMinCenterSeparation = 2.6;  // in object radii

Vec3 random_in_ball(Rng& rng, double sigma, double radius) {
  for (;;) {
    const Vec3 p(sigma * standard_normal(rng), sigma * standard_normal(rng), sigma * standard_normal(rng));
    if (p.norm() <= radius) return p;
  }
}

Eigen::Quaterniond random_rotation(Rng& rng) {
  Eigen::Vector4d q(standard_normal(rng), standard_normal(rng), standard_normal(rng), standard_normal(rng));
  q.normalize();
  return Eigen::Quaterniond(q[0], q[1], q[2], q[3]);
}

}  // namespace

void validate(const SynthSpec& spec) {
  if (spec.num_objects < 1) fail(ErrorCode::Config, "num_objects must be at least 1");
  if (spec.primitives_per_object < 1) fail(ErrorCode::Config, "primitives_per_object must be at least 1");
  if (spec.num_classes < 1 || spec.num_classes > spec.num_objects) {
    fail(ErrorCode::Config, "num_classes must lie in [1, num_objects]");
  }
  if (spec.num_views < 1 || spec.num_heldout < 0) fail(ErrorCode::Config, "need at least one training view");
  if (spec.width <= 0 || spec.height <= 0) fail(ErrorCode::Config, "image size must be positive");
  if (spec.num_objects > 65535) fail(ErrorCode::Capacity, "more than 65535 objects cannot be stored in 16-bit masks");
  if (!(spec.camera_radius > 0.0) || !(spec.object_radius > 0.0)) fail(ErrorCode::Config, "radii must be positive");
  auto capacity = [](int dim) { return dim >= 31 ? (1ull << 31) : (1ull << dim); };
  if (spec.embedding_dim < 1 || spec.embedding_dim > 31 || capacity(spec.embedding_dim) <= static_cast<unsigned long long>(spec.num_objects)) {
    fail(ErrorCode::Capacity, "embedding_dim " + std::to_string(spec.embedding_dim) + " gives " +
                                  std::to_string(capacity(spec.embedding_dim)) + " codes, not enough for " +
                                  std::to_string(spec.num_objects) + " objects plus background");
  }
  if (spec.semantic_dim < 1 || spec.semantic_dim > 31 || capacity(spec.semantic_dim) <= static_cast<unsigned long long>(spec.num_classes)) {
    fail(ErrorCode::Capacity, "semantic_dim " + std::to_string(spec.semantic_dim) + " cannot encode " +
                                  std::to_string(spec.num_classes) + " classes");
  }
}

LabelMap ground_truth_instance_mask(const Scene& scene, const std::vector<int>& primitive_object, const Camera& camera) {
  const auto plan = raster::rasterize(scene, camera);
  LabelMap mask(camera.width, camera.height, LabelKind::Instance);
  std::vector<std::pair<int, double>> mass;
  for (std::size_t p = 0; p < plan->pixel_count(); ++p) {
    if (plan->coverage[p] < 0.5) continue;
    mass.clear();
    for (const auto& e : plan->pixel(p)) {
      const int obj = primitive_object[e.primitive];
      auto it = std::find_if(mass.begin(), mass.end(), [obj](const auto& m) { return m.first == obj; });
      if (it == mass.end()) {
        mass.emplace_back(obj, e.weight);
      } else {
        it->second += e.weight;
      }
    }
    int best = 0;
    double best_mass = -1.0;
    for (const auto& [obj, m] : mass) {
      if (m > best_mass || (m == best_mass && obj < best)) {
        best = obj;
        best_mass = m;
      }
    }
    mask.labels[p] = static_cast<Label>(best);
  }
  return mask;
}

LabelMap semantic_from_instance(const LabelMap& instance, const std::vector<Label>& object_class) {
  LabelMap out(instance.width, instance.height, LabelKind::Semantic);
  for (std::size_t i = 0; i < instance.labels.size(); ++i) {
    const Label l = instance.labels[i];
    if (l >= object_class.size()) fail(ErrorCode::InvalidArgument, "instance label without a class");
    out.labels[i] = object_class[l];
  }
  return out;
}

SynthDataset generate(const SynthSpec& spec) {
  validate(spec);
  Rng rng(mix_seed(spec.rng_seed, 11));
  SynthDataset data;
  Scene& scene = data.scene;
  scene.embedding_dim = spec.embedding_dim;
  scene.semantic_dim = spec.semantic_dim;

  // object centres on a jittered plane, kept apart by rejection sampling
  const double extent = 0.6 * std::sqrt(std::max(1.0, spec.num_objects / 8.0));
  const double min_sep = kMinCenterSeparation * spec.object_radius;
  std::vector<Vec3> centers;
  for (int o = 0; o < spec.num_objects; ++o) {
    bool placed = false;
    for (int attempt = 0; attempt < kMaxPlacementAttempts && !placed; ++attempt) {
      const Vec3 c(extent * (2.0 * uniform_unit(rng) - 1.0), extent * (2.0 * uniform_unit(rng) - 1.0),
                   spec.object_radius * (uniform_unit(rng) - 0.5));
      placed = std::all_of(centers.begin(), centers.end(), [&](const Vec3& o2) { return (c - o2).norm() >= min_sep; });
      if (placed) centers.push_back(c);
    }
    if (!placed) {
      fail(ErrorCode::Infeasible, "could not place object " + std::to_string(o + 1) + " after " +
                                      std::to_string(kMaxPlacementAttempts) + " attempts");
    }
  }

  const double r = spec.object_radius;
  Vec3 lo = Vec3::Constant(std::numeric_limits<double>::max());
  Vec3 hi = -lo;
  for (int o = 0; o < spec.num_objects; ++o) {
    const Vec3 base_color(uniform_unit(rng), uniform_unit(rng), uniform_unit(rng));
    for (int k = 0; k < spec.primitives_per_object; ++k) {
      GaussianPrimitive prim;
      prim.position = centers[o] + random_in_ball(rng, 0.45 * r, r);
      prim.scale = Vec3(r * (0.25 + 0.2 * uniform_unit(rng)), r * (0.25 + 0.2 * uniform_unit(rng)),
                        r * (0.25 + 0.2 * uniform_unit(rng)));
      prim.rotation = random_rotation(rng);
      prim.opacity = 0.55 + 0.4 * uniform_unit(rng);
      for (int c = 0; c < 3; ++c) prim.color[c] = std::clamp(base_color[c] + 0.1 * (uniform_unit(rng) - 0.5), 0.0, 1.0);
      prim.instance_embedding.assign(spec.embedding_dim, 0.0);
      prim.semantic_embedding.assign(spec.semantic_dim, 0.0);
      lo = lo.cwiseMin(prim.position);
      hi = hi.cwiseMax(prim.position);
      scene.primitives.push_back(std::move(prim));
      data.primitive_object.push_back(o + 1);
    }
  }
  scene.bound.min = lo - Vec3::Constant(r);
  scene.bound.max = hi + Vec3::Constant(r);

  // classes: shuffled round-robin so every class owns at least one object
  std::vector<int> objs(spec.num_objects);
  for (int o = 0; o < spec.num_objects; ++o) objs[o] = o + 1;
  for (std::size_t i = objs.size(); i > 1; --i) std::swap(objs[i - 1], objs[uniform_index(rng, i)]);
  data.object_class.assign(spec.num_objects + 1, kBackground);
  for (int i = 0; i < spec.num_objects; ++i) data.object_class[objs[i]] = static_cast<Label>(i % spec.num_classes + 1);

  Vec3 centroid = Vec3::Zero();
  for (const auto& c : centers) centroid += c;
  centroid /= static_cast<double>(centers.size());
  const double focal = 0.5 * spec.width / std::tan(0.5 * spec.field_of_view_deg * std::numbers::pi / 180.0);
  auto ring_camera = [&](double azimuth, double elevation_deg) {
    const double el = elevation_deg * std::numbers::pi / 180.0;
    const Vec3 eye = centroid + spec.camera_radius * Vec3(std::cos(azimuth) * std::cos(el),
                                                          std::sin(azimuth) * std::cos(el), std::sin(el));
    return Camera::look_at(eye, centroid, Vec3::UnitZ(), focal, spec.width, spec.height);
  };
  const double two_pi = 2.0 * std::numbers::pi;
  for (int v = 0; v < spec.num_views; ++v) {
    data.cameras.push_back(ring_camera(two_pi * v / spec.num_views, spec.camera_elevation_deg));
    data.heldout.push_back(false);
  }
  for (int v = 0; v < spec.num_heldout; ++v) {
    const double az = two_pi * (v + 0.5) / spec.num_heldout + 0.5 * two_pi / spec.num_views;
    data.cameras.push_back(ring_camera(az, spec.camera_elevation_deg + 7.5));
    data.heldout.push_back(true);
  }

  std::vector<bool> seen(spec.num_objects + 1, false);
  for (std::size_t v = 0; v < data.cameras.size(); ++v) {
    data.gt_instance.push_back(ground_truth_instance_mask(scene, data.primitive_object, data.cameras[v]));
    data.gt_semantic.push_back(semantic_from_instance(data.gt_instance.back(), data.object_class));
    if (!data.heldout[v]) {
      for (Label l : data.gt_instance.back().labels) seen[l] = true;
    }
  }
  for (int o = 1; o <= spec.num_objects; ++o) {
    if (!seen[o]) fail(ErrorCode::Infeasible, "object " + std::to_string(o) + " is not visible in any training view");
  }
  return data;
}

PermutedMasks make_inconsistent(const std::vector<LabelMap>& masks, int num_objects, std::uint64_t seed) {
  if (masks.empty()) fail(ErrorCode::InvalidArgument, "no masks to permute");
  PermutedMasks out;
  for (std::size_t v = 0; v < masks.size(); ++v) {
    Rng rng(mix_seed(seed, v));
    std::vector<Label> perm(num_objects + 1);
    for (int l = 0; l <= num_objects; ++l) perm[l] = static_cast<Label>(l);
    for (int i = num_objects; i > 1; --i) std::swap(perm[i], perm[1 + uniform_index(rng, static_cast<std::uint64_t>(i))]);
    out.masks.push_back(relabel(masks[v], perm));
    out.permutations.push_back(std::move(perm));
  }
  return out;
}

}  // namespace unilift::synth
