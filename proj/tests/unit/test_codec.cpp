#include <doctest.h>

#include "support/fixtures.hpp"
#include "unilift/codec/label_codec.hpp"
#include "unilift/core/error.hpp"

using namespace unilift;

namespace {

double logit(double s) { return std::log(s / (1.0 - s)); }

}  // namespace

TEST_CASE("two set bits decode to three") {
  codec::DecodeConfig cfg{0.5, 2};
  const std::vector<double> v{logit(0.9), logit(0.8)};
  CHECK(codec::decode_pixel(v, cfg) == 3);
}

TEST_CASE("bit order is least significant first") {
  codec::DecodeConfig cfg{0.5, 3};
  CHECK(codec::decode_pixel(std::vector<double>{2.0, -2.0, -2.0}, cfg) == 1);
  CHECK(codec::decode_pixel(std::vector<double>{-2.0, -2.0, 2.0}, cfg) == 4);
}

TEST_CASE("negative embeddings decode to background") {
  codec::DecodeConfig cfg{0.5, 12};
  CHECK(codec::decode_pixel(std::vector<double>(12, -30.0), cfg) == 0);
}

TEST_CASE("the threshold itself is not above the threshold") {
  codec::DecodeConfig cfg{0.5, 12};
  CHECK(codec::decode_pixel(std::vector<double>(12, 0.0), cfg) == 0);
}

TEST_CASE("uniform code over a covered map") {
  EmbeddingMap map(5, 3, 4);
  for (std::size_t p = 0; p < map.pixel_count(); ++p) {
    const double code[4] = {3.0, -3.0, 3.0, -3.0};
    std::copy(code, code + 4, map.pixel(p).begin());
  }
  std::fill(map.coverage.begin(), map.coverage.end(), 1.0);
  const LabelMap out = codec::decode_map(map, {0.5, 4});
  CHECK(out == LabelMap(5, 3, LabelKind::Instance, 5));
}

TEST_CASE("uncovered pixels stay background") {
  EmbeddingMap map(4, 4, 2);
  std::fill(map.values.begin(), map.values.end(), 5.0);
  CHECK(codec::decode_map(map, {0.5, 2}) == LabelMap(4, 4, LabelKind::Instance));
  map.coverage[3] = 0.5;
  CHECK(codec::decode_map(map, {0.5, 2}).labels[3] == 3);
}

TEST_CASE("more than thirty-one bits cannot be decoded") {
  codec::DecodeConfig cfg{0.5, 32};
  CHECK_THROWS_AS(codec::validate(cfg), Error);
  CHECK_THROWS_AS(codec::decode_pixel(std::vector<double>(32, 1.0), {0.5, 31}), Error);
  cfg.embedding_dim = 12;
  cfg.decode_threshold = 1.0;
  CHECK_THROWS_AS(codec::validate(cfg), Error);
}

TEST_CASE("exact decode has no collisions") {
  Rng rng(4);
  const LabelMap mask = fixtures::random_mask(rng, 8, 8, 5);
  const auto report = codec::collision_report(mask, partition_from_mask(mask));
  CHECK(report.collisions == 0);
  for (const auto& s : report.segments) CHECK(s.purity == 1.0);
}

TEST_CASE("two segments decoded alike count as one collision") {
  LabelMap ref(4, 1, LabelKind::Instance);
  ref.labels = {1, 1, 2, 2};
  LabelMap dec(4, 1, LabelKind::Instance, 9);
  const auto report = codec::collision_report(dec, partition_from_mask(ref));
  CHECK(report.collisions == 1);
}

TEST_CASE("collision tally agrees with a direct count") {
  Rng rng(17);
  for (int trial = 0; trial < 50; ++trial) {
    const LabelMap ref = fixtures::random_mask(rng, 6, 6, 2 + static_cast<int>(uniform_index(rng, 5)));
    LabelMap dec(6, 6, LabelKind::Instance);
    for (auto& l : dec.labels) l = static_cast<Label>(uniform_index(rng, 3));
    const auto report = codec::collision_report(dec, partition_from_mask(ref));

    std::map<Label, std::map<Label, int>> votes;  // reference label -> decoded -> count
    for (std::size_t p = 0; p < ref.labels.size(); ++p) {
      if (ref.labels[p] != 0) ++votes[ref.labels[p]][dec.labels[p]];
    }
    std::vector<Label> majority;
    for (const auto& [r, counts] : votes) {
      Label best = 0;
      int best_n = -1;
      for (const auto& [d, n] : counts) {
        if (n > best_n) {
          best_n = n;
          best = d;
        }
      }
      majority.push_back(best);
    }
    int pairs = 0;
    for (std::size_t i = 0; i < majority.size(); ++i) {
      for (std::size_t j = i + 1; j < majority.size(); ++j) pairs += majority[i] == majority[j];
    }
    CHECK(report.collisions == pairs);
  }
}
