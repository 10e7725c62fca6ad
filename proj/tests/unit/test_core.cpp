#include <doctest.h>

#include "support/fixtures.hpp"
#include "unilift/core/error.hpp"
#include "unilift/core/formats.hpp"

#include <sstream>

using namespace unilift;

namespace {

Scene one_primitive_scene() {
  Scene scene;
  scene.embedding_dim = 2;
  scene.semantic_dim = 3;
  GaussianPrimitive p;
  p.opacity = 0.5;
  p.instance_embedding = {0.25, -1.0};
  p.semantic_embedding = {1.0, 2.0, 3.0};
  scene.primitives.push_back(p);
  return scene;
}

LabelMap mask_from(int w, int h, std::vector<Label> labels) {
  LabelMap m(w, h, LabelKind::Instance);
  m.labels = std::move(labels);
  return m;
}

}  // namespace

TEST_CASE("a valid primitive passes validation") {
  CHECK(validate_scene(one_primitive_scene()).empty());
}

TEST_CASE("opacity above one is reported against the primitive") {
  Scene s = one_primitive_scene();
  s.primitives[0].opacity = 1.5;
  const auto problems = validate_scene(s);
  REQUIRE(problems.size() == 1);
  CHECK(problems[0].find("primitive 0") != std::string::npos);
  CHECK(problems[0].find("opacity") != std::string::npos);
}

TEST_CASE("non-unit rotation is reported") {
  Scene s = one_primitive_scene();
  s.primitives[0].rotation = Eigen::Quaterniond(0.9, 0.0, 0.0, 0.0);
  const auto problems = validate_scene(s);
  REQUIRE(problems.size() == 1);
  CHECK(problems[0].find("rotation") != std::string::npos);
}

TEST_CASE("embedding length must match the declared dimension") {
  Scene s = one_primitive_scene();
  s.primitives[0].instance_embedding.push_back(0.0);
  CHECK(validate_scene(s).size() == 1);
}

TEST_CASE("two-by-two mask with two rows") {
  const Partition part = partition_from_mask(mask_from(2, 2, {1, 1, 2, 2}));
  REQUIRE(part.segments.size() == 2);
  CHECK(part.segments[0].pixels == std::vector<int>{0, 1});
  CHECK(part.segments[1].pixels == std::vector<int>{2, 3});
  CHECK(part.segments[0].boundary == std::vector<int>{0, 1});
  CHECK(part.segments[1].boundary == std::vector<int>{2, 3});
}

TEST_CASE("uniform mask is one segment without boundary") {
  const Partition part = partition_from_mask(mask_from(3, 3, std::vector<Label>(9, 1)));
  REQUIRE(part.segments.size() == 1);
  CHECK(part.segments[0].pixels.size() == 9);
  CHECK(part.segments[0].boundary.empty());
}

TEST_CASE("all-background mask gives an empty partition") {
  const Partition part = partition_from_mask(LabelMap(4, 3, LabelKind::Instance));
  CHECK(part.segments.empty());
  CHECK(part.labeled_pixel_count() == 0);
}

TEST_CASE("partition boundary agrees with a direct neighbour scan") {
  Rng rng(11);
  for (int trial = 0; trial < 20; ++trial) {
    const LabelMap mask = fixtures::random_mask(rng, 9, 7, 4, 0.2);
    const Partition part = partition_from_mask(mask);
    std::set<int> expected_boundary, actual_boundary;
    for (int y = 0; y < mask.height; ++y) {
      for (int x = 0; x < mask.width; ++x) {
        const Label l = mask.at(x, y);
        if (l == kBackground) continue;
        const bool edge = (x > 0 && mask.at(x - 1, y) != l) || (x + 1 < mask.width && mask.at(x + 1, y) != l) ||
                          (y > 0 && mask.at(x, y - 1) != l) || (y + 1 < mask.height && mask.at(x, y + 1) != l);
        if (edge) expected_boundary.insert(y * mask.width + x);
      }
    }
    for (const auto& s : part.segments) actual_boundary.insert(s.boundary.begin(), s.boundary.end());
    CHECK(actual_boundary == expected_boundary);
    CHECK(part.to_mask(LabelKind::Instance).labels.size() == mask.labels.size());
  }
}

TEST_CASE("partition structure ignores label values") {
  Rng rng(3);
  const LabelMap mask = fixtures::random_mask(rng, 8, 8, 5);
  const LabelMap scrambled = fixtures::scramble_labels(rng, mask);
  const Partition a = partition_from_mask(mask), b = partition_from_mask(scrambled);
  REQUIRE(a.segments.size() == b.segments.size());
  for (std::size_t s = 0; s < a.segments.size(); ++s) {
    CHECK(a.segments[s].pixels == b.segments[s].pixels);
    CHECK(a.segments[s].boundary == b.segments[s].boundary);
  }
}

TEST_CASE("nearest resampling keeps labels categorical") {
  const LabelMap m = mask_from(2, 2, {1, 2, 3, 4});
  const LabelMap up = resample_nearest(m, 4, 4);
  CHECK(up.at(0, 0) == 1);
  CHECK(up.at(3, 0) == 2);
  CHECK(up.at(0, 3) == 3);
  CHECK(up.at(3, 3) == 4);
  CHECK(resample_nearest(up, 2, 2) == m);
}

TEST_CASE("scene text round trip is exact") {
  Rng rng(5);
  const Camera cam = fixtures::axis_camera(8, 8, 8.0);
  const Scene scene = fixtures::random_scene(rng, 12, 3, cam);
  std::stringstream io;
  write_scene(io, scene, {"seed = 5"});
  const Scene back = read_scene(io);
  REQUIRE(back.size() == scene.size());
  for (std::size_t i = 0; i < scene.size(); ++i) {
    CHECK(back.primitives[i].position == scene.primitives[i].position);
    CHECK(back.primitives[i].rotation.coeffs() == scene.primitives[i].rotation.coeffs());
    CHECK(back.primitives[i].instance_embedding == scene.primitives[i].instance_embedding);
    CHECK(back.primitives[i].semantic_embedding == scene.primitives[i].semantic_embedding);
  }
}

TEST_CASE("truncated scene text is rejected") {
  std::stringstream io("UNILIFT_SCENE 1 2 2 -1 -1 -1 1 1 1\n0 0 0 0.1\n");
  CHECK_THROWS_AS(read_scene(io), Error);
}

TEST_CASE("sixteen-bit mask round trip") {
  LabelMap m = mask_from(3, 2, {0, 1, 65535, 7, 300, 2});
  std::stringstream io;
  write_pgm16(io, m, {"seed = 1"});
  CHECK(read_pgm16(io, LabelKind::Instance) == m);
  m.labels[0] = 70000;
  std::stringstream bad;
  CHECK_THROWS_AS(write_pgm16(bad, m), Error);
}

TEST_CASE("embedding dump stores float32 values") {
  EmbeddingMap map(3, 2, 2);
  for (std::size_t i = 0; i < map.values.size(); ++i) map.values[i] = 0.5 * static_cast<double>(i) - 1.0;
  std::stringstream io;
  write_embedding_map(io, map);
  CHECK(io.str().size() == 16 + 3 * 2 * 2 * 4);
  const EmbeddingMap back = read_embedding_map(io);
  CHECK(back.width == 3);
  CHECK(back.height == 2);
  CHECK(back.values == map.values);  // these values are exact in float32
}

TEST_CASE("camera token round trip") {
  const Camera cam = Camera::look_at(Vec3(1.0, -2.0, 0.5), Vec3::Zero(), Vec3(0, 0, 1), 90.0, 64, 48);
  const auto tokens = split_whitespace(format_camera(cam));
  REQUIRE(tokens.size() == kCameraTokenCount);
  const Camera back = parse_camera(tokens, 0);
  CHECK(back.world_to_camera == cam.world_to_camera);
  CHECK(back.focal == cam.focal);
  CHECK(back.principal_point == cam.principal_point);
  CHECK(back.width == 64);
  CHECK(validate_camera(back).empty());
}

TEST_CASE("look_at puts the target on the optical axis") {
  const Camera cam = Camera::look_at(Vec3(3.0, 1.0, 2.0), Vec3(0.2, 0.1, 0.0), Vec3(0, 0, 1), 50.0, 33, 21);
  const Vec3 t = cam.rotation() * Vec3(0.2, 0.1, 0.0) + cam.translation();
  CHECK(t.x() == doctest::Approx(0.0).epsilon(1e-12));
  CHECK(t.y() == doctest::Approx(0.0).epsilon(1e-12));
  CHECK(t.z() > 0.0);
  CHECK(cam.principal_point == Vec2(16.0, 10.0));
}

TEST_CASE("shortest double text parses back exactly") {
  for (double v : {0.1, 1.0 / 3.0, -2.5e-300, 6.02214076e23, 0.0}) CHECK(parse_double(format_double(v)) == v);
  CHECK_THROWS_AS(parse_double("1.5x"), Error);
}
