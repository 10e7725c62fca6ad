#pragma once

#include "unilift/core/label_map.hpp"

#include <span>
#include <vector>

namespace unilift::codec {

inline constexpr int kMaxCodeBits = 31;
inline constexpr double kCoverageGate = 0.5;

struct DecodeConfig {
  double decode_threshold = 0.5;
  int embedding_dim = 12;
};

void validate(const DecodeConfig& cfg);

// Bit k (k = 0 is least significant) is set iff sigmoid(embedding[k]) > threshold.
Label decode_pixel(std::span<const double> embedding, const DecodeConfig& cfg);

// decode_pixel on every pixel; pixels with coverage below 0.5 become background.
// Single pass, linear in the pixel count.
LabelMap decode_map(const EmbeddingMap& map, const DecodeConfig& cfg, LabelKind kind = LabelKind::Instance);

struct SegmentPurity {
  Label reference_label = kBackground;
  Label majority_label = kBackground;
  double purity = 0.0;
  std::size_t pixels = 0;
};

struct CollisionReport {
  std::vector<SegmentPurity> segments;  // partition order
  int collisions = 0;                   // reference-segment pairs with the same majority label
};

// Majority ties resolve to the smaller label.
CollisionReport collision_report(const LabelMap& decoded, const Partition& reference);

}  // namespace unilift::codec
