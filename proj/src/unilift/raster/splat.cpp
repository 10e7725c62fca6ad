#include "unilift/raster/splat.hpp"

#include "unilift/core/error.hpp"

#include <algorithm>
#include <cmath>
#include <numeric>

namespace unilift::raster {

std::vector<Splat2D> project(const Scene& scene, const Camera& camera, double near_plane) {
  if (const auto problems = validate_camera(camera); !problems.empty()) {
    fail(ErrorCode::InvalidArgument, "invalid camera: " + problems.front());
  }
  const Mat3 rot = camera.rotation();
  const Vec3 trans = camera.translation();
  const double fx = camera.focal.x();
  const double fy = camera.focal.y();

  std::vector<Splat2D> splats;
  splats.reserve(scene.size());
  for (std::size_t i = 0; i < scene.size(); ++i) {
    const auto& prim = scene.primitives[i];
    const Vec3 pc = rot * prim.position + trans;
    const double z = pc.z();
    if (!(z > near_plane)) continue;

    Eigen::Matrix<double, 2, 3> jac;
    jac << fx / z, 0.0, -fx * pc.x() / (z * z),  //
        0.0, fy / z, -fy * pc.y() / (z * z);
    const Mat3 cov_cam = rot * prim.covariance() * rot.transpose();
    Mat2 cov2d = jac * cov_cam * jac.transpose();
    cov2d(0, 0) += kCovarianceRegularizer;
    cov2d(1, 1) += kCovarianceRegularizer;
    cov2d(0, 1) = cov2d(1, 0) = 0.5 * (cov2d(0, 1) + cov2d(1, 0));

    Splat2D s;
    s.center = Vec2(fx * pc.x() / z + camera.principal_point.x(), fy * pc.y() / z + camera.principal_point.y());
    s.cov2d = cov2d;
    s.depth = z;
    s.primitive_index = static_cast<int>(i);
    s.base_opacity = prim.opacity;
    splats.push_back(s);
  }
  std::stable_sort(splats.begin(), splats.end(), [](const Splat2D& a, const Splat2D& b) { return a.depth < b.depth; });
  return splats;
}

std::shared_ptr<const BlendPlan> rasterize(const Scene& scene, const Camera& camera) {
  const auto splats = project(scene, camera);
  const int w = camera.width;
  const int h = camera.height;
  const std::size_t npix = camera.pixel_count();

  std::vector<double> transmittance(npix, 1.0);
  std::vector<unsigned char> done(npix, 0);

  struct Contribution {
    int pixel;
    int primitive;
    double weight;
  };
  std::vector<Contribution> contribs;

  for (const auto& s : splats) {
    const double det = s.cov2d.determinant();
    if (!(det > 0.0) || s.base_opacity <= 0.0) continue;
    const Mat2 conic = s.cov2d.inverse();
    const double rx = kFootprintSigma * std::sqrt(s.cov2d(0, 0));
    const double ry = kFootprintSigma * std::sqrt(s.cov2d(1, 1));
    if (s.center.x() + rx < 0.0 || s.center.x() - rx > w - 1 || s.center.y() + ry < 0.0 ||
        s.center.y() - ry > h - 1) {
      continue;
    }
    const int x0 = std::max(0, static_cast<int>(std::ceil(s.center.x() - rx)));
    const int x1 = std::min(w - 1, static_cast<int>(std::floor(s.center.x() + rx)));
    const int y0 = std::max(0, static_cast<int>(std::ceil(s.center.y() - ry)));
    const int y1 = std::min(h - 1, static_cast<int>(std::floor(s.center.y() + ry)));
    constexpr double kMaxMahalanobis = kFootprintSigma * kFootprintSigma;
    for (int y = y0; y <= y1; ++y) {
      const double dy = y - s.center.y();
      for (int x = x0; x <= x1; ++x) {
        const int p = y * w + x;
        if (done[p]) continue;
        const double dx = x - s.center.x();
        const double m = conic(0, 0) * dx * dx + 2.0 * conic(0, 1) * dx * dy + conic(1, 1) * dy * dy;
        if (m > kMaxMahalanobis) continue;
        const double alpha = s.base_opacity * std::exp(-0.5 * m);
        if (alpha <= 0.0) continue;
        contribs.push_back({p, s.primitive_index, alpha * transmittance[p]});
        transmittance[p] *= 1.0 - alpha;
        if (transmittance[p] < kMinTransmittance) done[p] = 1;
      }
    }
  }

  auto plan = std::make_shared<BlendPlan>();
  plan->width = w;
  plan->height = h;
  plan->num_primitives = static_cast<int>(scene.size());
  plan->offsets.assign(npix + 1, 0);
  for (const auto& c : contribs) ++plan->offsets[c.pixel + 1];
  std::partial_sum(plan->offsets.begin(), plan->offsets.end(), plan->offsets.begin());
  plan->entries.resize(contribs.size());
  std::vector<std::size_t> cursor(plan->offsets.begin(), plan->offsets.end() - 1);
  // Splats were visited in depth order, so a stable scatter keeps each pixel front-to-back.
  for (const auto& c : contribs) plan->entries[cursor[c.pixel]++] = BlendEntry{c.primitive, c.weight};
  plan->coverage.resize(npix);
  for (std::size_t p = 0; p < npix; ++p) plan->coverage[p] = 1.0 - transmittance[p];
  return plan;
}

EmbeddingMap compose(std::shared_ptr<const BlendPlan> plan, std::span<const double> table, int dim) {
  if (!plan) fail(ErrorCode::InvalidArgument, "compose requires a blend plan");
  if (table.size() != static_cast<std::size_t>(plan->num_primitives) * dim) {
    fail(ErrorCode::InvalidArgument, "embedding table does not match primitive count");
  }
  EmbeddingMap map(plan->width, plan->height, dim);
  map.coverage = plan->coverage;
  const std::size_t npix = plan->pixel_count();
  for (std::size_t p = 0; p < npix; ++p) {
    double* out = map.values.data() + p * dim;
    for (const auto& e : plan->pixel(p)) {
      const double* v = table.data() + static_cast<std::size_t>(e.primitive) * dim;
      for (int k = 0; k < dim; ++k) out[k] += e.weight * v[k];
    }
  }
  map.plan = std::move(plan);
  return map;
}

EmbeddingMap render(const Scene& scene, const Camera& camera, Channel channel) {
  const auto table = embedding_table(scene, channel);
  return compose(rasterize(scene, camera), table, channel_dim(scene, channel));
}

std::vector<double> backward_embeddings(const EmbeddingMap& map, std::span<const double> pixel_grad) {
  if (!map.plan) fail(ErrorCode::InvalidArgument, "embedding map has no retained blend weights");
  if (pixel_grad.size() != map.values.size()) {
    fail(ErrorCode::InvalidArgument, "pixel gradient size " + std::to_string(pixel_grad.size()) +
                                         " does not match map size " + std::to_string(map.values.size()));
  }
  const int dim = map.dim;
  const auto& plan = *map.plan;
  std::vector<double> grad(static_cast<std::size_t>(plan.num_primitives) * dim, 0.0);
  for (std::size_t p = 0; p < plan.pixel_count(); ++p) {
    const double* g = pixel_grad.data() + p * dim;
    for (const auto& e : plan.pixel(p)) {
      double* out = grad.data() + static_cast<std::size_t>(e.primitive) * dim;
      for (int k = 0; k < dim; ++k) out[k] += e.weight * g[k];
    }
  }
  return grad;
}

}  // namespace unilift::raster
