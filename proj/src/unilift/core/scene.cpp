#include "unilift/core/scene.hpp"

#include "unilift/core/error.hpp"

#include <cmath>
#include <sstream>

namespace unilift {

Mat3 GaussianPrimitive::covariance() const {
  const Mat3 r = rotation.normalized().toRotationMatrix();
  const Mat3 s = scale.asDiagonal();
  const Mat3 m = r * s;
  return m * m.transpose();
}

bool Aabb::contains(const Vec3& p) const {
  return (p.array() >= min.array()).all() && (p.array() <= max.array()).all();
}

int channel_dim(const Scene& scene, Channel channel) {
  switch (channel) {
    case Channel::Color:
      return 3;
    case Channel::Instance:
      return scene.embedding_dim;
    case Channel::Semantic:
      return scene.semantic_dim;
  }
  return 0;
}

std::vector<double> embedding_table(const Scene& scene, Channel channel) {
  const int dim = channel_dim(scene, channel);
  std::vector<double> table(scene.size() * dim, 0.0);
  for (std::size_t i = 0; i < scene.size(); ++i) {
    const auto& prim = scene.primitives[i];
    double* row = table.data() + i * dim;
    if (channel == Channel::Color) {
      for (int k = 0; k < 3; ++k) row[k] = prim.color[k];
      continue;
    }
    const auto& src = channel == Channel::Instance ? prim.instance_embedding : prim.semantic_embedding;
    if (static_cast<int>(src.size()) != dim) {
      fail(ErrorCode::InvalidArgument, "primitive " + std::to_string(i) + " has embedding length " +
                                           std::to_string(src.size()) + ", expected " + std::to_string(dim));
    }
    std::copy(src.begin(), src.end(), row);
  }
  return table;
}

void set_embedding_table(Scene& scene, Channel channel, std::span<const double> table) {
  const int dim = channel_dim(scene, channel);
  if (table.size() != scene.size() * dim) {
    fail(ErrorCode::InvalidArgument, "embedding table size mismatch");
  }
  for (std::size_t i = 0; i < scene.size(); ++i) {
    auto& prim = scene.primitives[i];
    const double* row = table.data() + i * dim;
    if (channel == Channel::Color) {
      prim.color = Vec3(row[0], row[1], row[2]);
    } else {
      auto& dst = channel == Channel::Instance ? prim.instance_embedding : prim.semantic_embedding;
      dst.assign(row, row + dim);
    }
  }
}

Camera Camera::scaled(double factor) const {
  Camera out = *this;
  out.width = static_cast<int>(std::lround(width * factor));
  out.height = static_cast<int>(std::lround(height * factor));
  out.focal = focal * factor;
  out.principal_point = (principal_point.array() + 0.5) * factor - 0.5;
  return out;
}

Camera Camera::look_at(const Vec3& eye, const Vec3& target, const Vec3& up, double focal, int width,
                       int height) {
  const Vec3 forward = (target - eye).normalized();
  Vec3 right = forward.cross(up);
  if (right.norm() < 1e-12) right = forward.unitOrthogonal();
  right.normalize();
  const Vec3 down = forward.cross(right);
  Mat3 r;
  r.row(0) = right.transpose();
  r.row(1) = down.transpose();
  r.row(2) = forward.transpose();
  Camera cam;
  cam.world_to_camera.setIdentity();
  cam.world_to_camera.topLeftCorner<3, 3>() = r;
  cam.world_to_camera.topRightCorner<3, 1>() = -r * eye;
  cam.focal = Vec2(focal, focal);
  cam.principal_point = Vec2((width - 1) * 0.5, (height - 1) * 0.5);
  cam.width = width;
  cam.height = height;
  return cam;
}

std::vector<std::string> validate_scene(const Scene& scene) {
  std::vector<std::string> out;
  auto report = [&](std::size_t i, const std::string& what) {
    std::ostringstream msg;
    msg << "primitive " << i << ": " << what;
    out.push_back(msg.str());
  };
  if (scene.primitives.empty()) out.emplace_back("scene has no primitives");
  if (scene.embedding_dim <= 0) out.emplace_back("embedding_dim must be positive");
  if (scene.semantic_dim <= 0) out.emplace_back("semantic_dim must be positive");
  for (std::size_t i = 0; i < scene.size(); ++i) {
    const auto& p = scene.primitives[i];
    const double qn = p.rotation.coeffs().norm();
    if (!(std::abs(qn - 1.0) <= 1e-6)) report(i, "rotation norm " + std::to_string(qn) + " is not 1");
    if (!((p.scale.array() > 0.0).all())) report(i, "scale must be strictly positive");
    if (!(p.opacity >= 0.0 && p.opacity <= 1.0)) report(i, "opacity " + std::to_string(p.opacity) + " outside [0,1]");
    if (!((p.color.array() >= 0.0).all() && (p.color.array() <= 1.0).all())) report(i, "color outside [0,1]");
    if (static_cast<int>(p.instance_embedding.size()) != scene.embedding_dim) {
      report(i, "instance_embedding length " + std::to_string(p.instance_embedding.size()) +
                    " != embedding_dim " + std::to_string(scene.embedding_dim));
    }
    if (static_cast<int>(p.semantic_embedding.size()) != scene.semantic_dim) {
      report(i, "semantic_embedding length " + std::to_string(p.semantic_embedding.size()) +
                    " != semantic_dim " + std::to_string(scene.semantic_dim));
    }
    if (!scene.bound.contains(p.position)) report(i, "position outside scene bound");
  }
  return out;
}

std::vector<std::string> validate_camera(const Camera& camera) {
  std::vector<std::string> out;
  const Mat3 r = camera.rotation();
  if ((r * r.transpose() - Mat3::Identity()).cwiseAbs().maxCoeff() > 1e-6) {
    out.emplace_back("camera rotation block is not orthonormal");
  }
  if (camera.width <= 0 || camera.height <= 0) out.emplace_back("camera dimensions must be positive");
  if (!((camera.focal.array() > 0.0).all())) out.emplace_back("camera focal length must be positive");
  return out;
}

}  // namespace unilift
