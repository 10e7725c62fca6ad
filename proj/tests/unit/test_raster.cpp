#include <doctest.h>

#include "support/fixtures.hpp"
#include "unilift/core/error.hpp"

using namespace unilift;

namespace {

GaussianPrimitive on_axis(double depth, double opacity, std::vector<double> embedding) {
  GaussianPrimitive p;
  p.position = Vec3(0.0, 0.0, depth);
  p.scale = Vec3::Constant(0.1);
  p.opacity = opacity;
  p.instance_embedding = std::move(embedding);
  p.semantic_embedding = p.instance_embedding;
  return p;
}

Scene scene_of(std::vector<GaussianPrimitive> prims, int dim) {
  Scene s;
  s.embedding_dim = dim;
  s.semantic_dim = dim;
  s.primitives = std::move(prims);
  return s;
}

}  // namespace

TEST_CASE("on-axis primitive projects to the principal point") {
  Camera cam = fixtures::axis_camera(129, 129, 100.0);
  REQUIRE(cam.principal_point == Vec2(64.0, 64.0));
  const auto splats = raster::project(scene_of({on_axis(2.0, 0.5, {0.0})}, 1), cam);
  REQUIRE(splats.size() == 1);
  CHECK(splats[0].center.x() == doctest::Approx(64.0));
  CHECK(splats[0].center.y() == doctest::Approx(64.0));
  CHECK(splats[0].depth == doctest::Approx(2.0));
}

TEST_CASE("splats come out front to back") {
  const Camera cam = fixtures::axis_camera(16, 16, 100.0);
  const auto splats = raster::project(scene_of({on_axis(3.0, 0.5, {0.0}), on_axis(1.0, 0.5, {0.0})}, 1), cam);
  REQUIRE(splats.size() == 2);
  CHECK(splats[0].depth == doctest::Approx(1.0));
  CHECK(splats[0].primitive_index == 1);
  CHECK(splats[1].depth == doctest::Approx(3.0));
}

TEST_CASE("primitives behind the near plane are culled") {
  const Camera cam = fixtures::axis_camera(16, 16, 100.0);
  CHECK(raster::project(scene_of({on_axis(-1.0, 0.5, {0.0})}, 1), cam).empty());
}

TEST_CASE("isotropic footprint at depth two") {
  const Camera cam = fixtures::axis_camera(129, 129, 100.0);
  const auto splats = raster::project(scene_of({on_axis(2.0, 0.5, {0.0})}, 1), cam);
  REQUIRE(splats.size() == 1);
  // (f / z)^2 * s^2 = 50^2 * 0.01 = 25, plus the regularizer
  CHECK(splats[0].cov2d(0, 0) == doctest::Approx(25.3).epsilon(1e-12));
  CHECK(splats[0].cov2d(1, 1) == doctest::Approx(25.3).epsilon(1e-12));
  CHECK(splats[0].cov2d(0, 1) == doctest::Approx(0.0));
}

TEST_CASE("off-axis footprint matches the full Jacobian") {
  Camera cam = fixtures::axis_camera(64, 64, 80.0);
  GaussianPrimitive p = on_axis(2.0, 0.5, {0.0});
  p.position = Vec3(0.4, -0.3, 2.0);
  p.scale = Vec3(0.1, 0.2, 0.05);
  p.rotation = Eigen::Quaterniond(0.9, 0.1, -0.3, 0.2).normalized();
  const auto splats = raster::project(scene_of({p}, 1), cam);
  REQUIRE(splats.size() == 1);
  const double x = 0.4, y = -0.3, z = 2.0, f = 80.0;
  Eigen::Matrix<double, 2, 3> J;
  J << f / z, 0.0, -f * x / (z * z), 0.0, f / z, -f * y / (z * z);
  const Mat2 expected = J * p.covariance() * J.transpose() + 0.3 * Mat2::Identity();
  CHECK((splats[0].cov2d - expected).norm() < 1e-10);
  CHECK(splats[0].center.x() == doctest::Approx(f * x / z + 31.5));
}

TEST_CASE("single opaque splat reproduces its embedding") {
  Camera cam = fixtures::axis_camera(1, 1, 100.0);
  const auto map = raster::render(scene_of({on_axis(2.0, 1.0, {0.7, -0.2})}, 2), cam, Channel::Instance);
  CHECK(map.values[0] == doctest::Approx(0.7));
  CHECK(map.values[1] == doctest::Approx(-0.2));
  CHECK(map.coverage[0] == doctest::Approx(1.0));
}

TEST_CASE("half-transparent splat over an opaque one") {
  Camera cam = fixtures::axis_camera(1, 1, 100.0);
  const Vec2 a(1.0, 2.0), b(-3.0, 5.0);
  const auto map = raster::render(scene_of({on_axis(3.0, 1.0, {b.x(), b.y()}), on_axis(1.0, 0.5, {a.x(), a.y()})}, 2),
                                  cam, Channel::Instance);
  CHECK(map.values[0] == doctest::Approx(0.5 * a.x() + 0.5 * b.x()));
  CHECK(map.values[1] == doctest::Approx(0.5 * a.y() + 0.5 * b.y()));
  CHECK(map.coverage[0] == doctest::Approx(1.0));
}

TEST_CASE("empty scene renders nothing") {
  Camera cam = fixtures::axis_camera(5, 4, 10.0);
  const auto map = raster::render(scene_of({}, 3), cam, Channel::Instance);
  CHECK(map.values == std::vector<double>(5 * 4 * 3, 0.0));
  CHECK(map.coverage == std::vector<double>(5 * 4, 0.0));
}

TEST_CASE("blend weights are non-negative and sum to coverage") {
  Rng rng(21);
  const Camera cam = fixtures::axis_camera(16, 12, 14.0);
  const Scene scene = fixtures::random_scene(rng, 40, 2, cam);
  const auto plan = raster::rasterize(scene, cam);
  for (std::size_t p = 0; p < plan->pixel_count(); ++p) {
    double sum = 0.0;
    for (const auto& e : plan->pixel(p)) {
      CHECK(e.weight > 0.0);
      sum += e.weight;
    }
    CHECK(sum == doctest::Approx(plan->coverage[p]).epsilon(1e-12));
    CHECK(plan->coverage[p] <= 1.0);
  }
}

TEST_CASE("backward pass of a full-weight splat") {
  Camera cam = fixtures::axis_camera(1, 1, 100.0);
  const auto map = raster::render(scene_of({on_axis(2.0, 1.0, {0.0, 0.0})}, 2), cam, Channel::Instance);
  const std::vector<double> g{1.5, -2.0};
  CHECK(raster::backward_embeddings(map, g) == g);
}

TEST_CASE("backward pass scales by the blend weight") {
  Camera cam = fixtures::axis_camera(1, 1, 100.0);
  const auto map = raster::render(scene_of({on_axis(2.0, 0.25, {0.0, 0.0}), on_axis(5.0, 0.0, {0.0, 0.0})}, 2), cam,
                                  Channel::Instance);
  const auto grad = raster::backward_embeddings(map, std::vector<double>{4.0, -8.0});
  REQUIRE(grad.size() == 4);
  CHECK(grad[0] == doctest::Approx(1.0));
  CHECK(grad[1] == doctest::Approx(-2.0));
  CHECK(grad[2] == 0.0);  // never blended
  CHECK(grad[3] == 0.0);
}

TEST_CASE("backward pass matches finite differences of a linear functional") {
  Rng rng(8);
  const int dim = 3;
  const Camera cam = fixtures::axis_camera(8, 8, 8.0);
  const Scene scene = fixtures::random_scene(rng, 30, dim, cam);
  const auto plan = raster::rasterize(scene, cam);
  const auto table = fixtures::random_table(rng, scene.size() * dim);
  const auto weights = fixtures::random_table(rng, 8 * 8 * dim);
  auto f = [&](const std::vector<double>& t) {
    const auto m = raster::compose(plan, t, dim);
    double s = 0.0;
    for (std::size_t i = 0; i < m.values.size(); ++i) s += weights[i] * m.values[i] * m.values[i];
    return s;
  };
  const auto map = raster::compose(plan, table, dim);
  std::vector<double> pixel_grad(map.values.size());
  for (std::size_t i = 0; i < pixel_grad.size(); ++i) pixel_grad[i] = 2.0 * weights[i] * map.values[i];
  const auto analytic = raster::backward_embeddings(map, pixel_grad);
  const auto numeric = fixtures::central_difference(f, table, 1e-3);
  CHECK(fixtures::relative_error(analytic, numeric) <= 1e-4);
}

TEST_CASE("compose rejects a mismatched table") {
  Rng rng(1);
  const Camera cam = fixtures::axis_camera(4, 4, 4.0);
  const auto plan = raster::rasterize(fixtures::random_scene(rng, 3, 2, cam), cam);
  CHECK_THROWS_AS(raster::compose(plan, std::vector<double>(5, 0.0), 2), Error);
}

TEST_CASE("scaled camera keeps pixel centres aligned") {
  const Camera cam = fixtures::axis_camera(64, 64, 60.0);
  const Camera half = cam.scaled(0.5);
  CHECK(half.width == 32);
  CHECK(half.principal_point == Vec2(15.5, 15.5));
  CHECK(half.focal == Vec2(30.0, 30.0));
}
