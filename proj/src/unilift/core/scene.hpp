#pragma once

#include <Eigen/Core>
#include <Eigen/Geometry>

#include <span>
#include <string>
#include <vector>

namespace unilift {

using Vec2 = Eigen::Vector2d;
using Vec3 = Eigen::Vector3d;
using Mat2 = Eigen::Matrix2d;
using Mat3 = Eigen::Matrix3d;
using Mat4 = Eigen::Matrix4d;

struct GaussianPrimitive {
  Vec3 position = Vec3::Zero();
  Vec3 scale = Vec3::Constant(0.05);
  Eigen::Quaterniond rotation = Eigen::Quaterniond::Identity();
  double opacity = 1.0;
  Vec3 color = Vec3::Zero();
  std::vector<double> instance_embedding;
  std::vector<double> semantic_embedding;

  // R S S^T R^T
  Mat3 covariance() const;
};

struct Aabb {
  Vec3 min = Vec3::Constant(-1.0);
  Vec3 max = Vec3::Constant(1.0);

  bool contains(const Vec3& p) const;
};

struct Scene {
  std::vector<GaussianPrimitive> primitives;
  int embedding_dim = 12;
  int semantic_dim = 12;
  Aabb bound;

  std::size_t size() const { return primitives.size(); }
};

// Which per-primitive quantity a render blends. Color is treated as a 3-vector.
enum class Channel { Color, Instance, Semantic };

int channel_dim(const Scene& scene, Channel channel);

// Flat row-major (primitive x dim) copy of one channel, and its inverse.
std::vector<double> embedding_table(const Scene& scene, Channel channel);
void set_embedding_table(Scene& scene, Channel channel, std::span<const double> table);

// Pinhole camera; world_to_camera maps world points into an x-right, y-down,
// z-forward camera frame.
struct Camera {
  Mat4 world_to_camera = Mat4::Identity();
  Vec2 focal = Vec2(100.0, 100.0);
  Vec2 principal_point = Vec2::Zero();
  int width = 0;
  int height = 0;

  Mat3 rotation() const { return world_to_camera.topLeftCorner<3, 3>(); }
  Vec3 translation() const { return world_to_camera.topRightCorner<3, 1>(); }
  std::size_t pixel_count() const { return static_cast<std::size_t>(width) * height; }

  // Same view at a different resolution. Pixel centers sit on integer coordinates.
  Camera scaled(double factor) const;

  static Camera look_at(const Vec3& eye, const Vec3& target, const Vec3& up, double focal,
                        int width, int height);
};

// Empty iff every type invariant holds. Never throws.
std::vector<std::string> validate_scene(const Scene& scene);
std::vector<std::string> validate_camera(const Camera& camera);

}  // namespace unilift
