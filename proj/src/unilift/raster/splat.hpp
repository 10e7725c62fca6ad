#pragma once

#include "unilift/core/label_map.hpp"
#include "unilift/core/scene.hpp"

#include <memory>
#include <span>
#include <vector>

namespace unilift::raster {

inline constexpr double kNearPlane = 0.01;
inline constexpr double kCovarianceRegularizer = 0.3;  // px^2 added to the 2D covariance diagonal
inline constexpr double kFootprintSigma = 3.0;
inline constexpr double kMinTransmittance = 1e-4;

struct Splat2D {
  Vec2 center = Vec2::Zero();
  Mat2 cov2d = Mat2::Identity();
  double depth = 0.0;
  int primitive_index = 0;
  double base_opacity = 0.0;
};

// Splats of primitives in front of the near plane, ascending depth, ties by primitive index.
std::vector<Splat2D> project(const Scene& scene, const Camera& camera, double near_plane = kNearPlane);

// Front-to-back blend weights for every pixel. Depends only on geometry and opacity,
// so one plan serves every channel of a view.
std::shared_ptr<const BlendPlan> rasterize(const Scene& scene, const Camera& camera);

// Blends a (num_primitives x dim) table through a plan.
EmbeddingMap compose(std::shared_ptr<const BlendPlan> plan, std::span<const double> table, int dim);

EmbeddingMap render(const Scene& scene, const Camera& camera, Channel channel);

// d(loss)/d(table) given d(loss)/d(map values). The blend is linear in the table, so
// this is the transpose of `compose`. Primitives with no coverage get zero.
std::vector<double> backward_embeddings(const EmbeddingMap& map, std::span<const double> pixel_grad);

}  // namespace unilift::raster
