#include "unilift/codec/label_codec.hpp"

#include "unilift/core/error.hpp"
#include "unilift/core/numeric.hpp"

#include <map>

namespace unilift::codec {

void validate(const DecodeConfig& cfg) {
  if (!(cfg.decode_threshold > 0.0 && cfg.decode_threshold < 1.0)) {
    fail(ErrorCode::Config, "decode_threshold must lie strictly between 0 and 1");
  }
  if (cfg.embedding_dim <= 0 || cfg.embedding_dim > kMaxCodeBits) {
    fail(ErrorCode::Capacity, "embedding dimension " + std::to_string(cfg.embedding_dim) +
                                  " exceeds the 31-bit label width");
  }
}

Label decode_pixel(std::span<const double> embedding, const DecodeConfig& cfg) {
  if (embedding.size() > static_cast<std::size_t>(kMaxCodeBits)) {
    fail(ErrorCode::Capacity, "cannot decode a " + std::to_string(embedding.size()) + "-dimensional embedding into 31 bits");
  }
  Label label = 0;
  for (std::size_t k = 0; k < embedding.size(); ++k) {
    if (sigmoid(embedding[k]) > cfg.decode_threshold) label |= Label{1} << k;
  }
  return label;
}

LabelMap decode_map(const EmbeddingMap& map, const DecodeConfig& cfg, LabelKind kind) {
  if (map.dim > kMaxCodeBits) fail(ErrorCode::Capacity, "embedding dimension exceeds the 31-bit label width");
  LabelMap out(map.width, map.height, kind);
  const std::size_t npix = map.pixel_count();
  const bool gated = map.coverage.size() == npix;
  for (std::size_t p = 0; p < npix; ++p) {
    if (gated && map.coverage[p] < kCoverageGate) continue;
    out.labels[p] = decode_pixel(map.pixel(p), cfg);
  }
  return out;
}

CollisionReport collision_report(const LabelMap& decoded, const Partition& reference) {
  if (decoded.width != reference.width || decoded.height != reference.height) {
    fail(ErrorCode::InvalidArgument, "decoded map and reference partition dimensions differ");
  }
  CollisionReport report;
  for (const auto& seg : reference.segments) {
    std::map<Label, std::size_t> counts;
    for (int p : seg.pixels) ++counts[decoded.labels[p]];
    SegmentPurity sp;
    sp.reference_label = seg.label;
    sp.pixels = seg.pixels.size();
    std::size_t best = 0;
    for (const auto& [label, n] : counts) {
      if (n > best) {
        best = n;
        sp.majority_label = label;
      }
    }
    sp.purity = sp.pixels ? static_cast<double>(best) / static_cast<double>(sp.pixels) : 0.0;
    report.segments.push_back(sp);
  }
  for (std::size_t i = 0; i < report.segments.size(); ++i) {
    for (std::size_t j = i + 1; j < report.segments.size(); ++j) {
      if (report.segments[i].majority_label == report.segments[j].majority_label) ++report.collisions;
    }
  }
  return report;
}

}  // namespace unilift::codec
