#include "unilift/core/label_map.hpp"

#include "unilift/core/error.hpp"

#include <algorithm>
#include <unordered_map>

namespace unilift {

LabelMap::LabelMap(int w, int h, LabelKind k, Label fill)
    : width(w), height(h), kind(k), labels(static_cast<std::size_t>(w) * h, fill) {}

EmbeddingMap::EmbeddingMap(int w, int h, int d)
    : width(w), height(h), dim(d), values(static_cast<std::size_t>(w) * h * d, 0.0),
      coverage(static_cast<std::size_t>(w) * h, 0.0) {}

LabelMap resample_nearest(const LabelMap& mask, int width, int height) {
  if (width <= 0 || height <= 0) fail(ErrorCode::InvalidArgument, "resample target must be positive");
  LabelMap out(width, height, mask.kind);
  const double sx = static_cast<double>(mask.width) / width;
  const double sy = static_cast<double>(mask.height) / height;
  for (int y = 0; y < height; ++y) {
    const int src_y = std::min(mask.height - 1, static_cast<int>((y + 0.5) * sy));
    for (int x = 0; x < width; ++x) {
      const int src_x = std::min(mask.width - 1, static_cast<int>((x + 0.5) * sx));
      out.at(x, y) = mask.at(src_x, src_y);
    }
  }
  return out;
}

std::size_t Partition::labeled_pixel_count() const {
  std::size_t n = 0;
  for (const auto& s : segments) n += s.pixels.size();
  return n;
}

LabelMap Partition::to_mask(LabelKind kind) const {
  LabelMap out(width, height, kind);
  for (const auto& s : segments) {
    for (int p : s.pixels) out.labels[p] = s.label;
  }
  return out;
}

Partition partition_from_mask(const LabelMap& mask) {
  if (mask.width <= 0 || mask.height <= 0) fail(ErrorCode::InvalidArgument, "mask dimensions must be positive");
  Partition part;
  part.width = mask.width;
  part.height = mask.height;
  std::unordered_map<Label, int> index;
  const int w = mask.width;
  const int h = mask.height;
  for (int y = 0; y < h; ++y) {
    for (int x = 0; x < w; ++x) {
      const Label l = mask.at(x, y);
      if (l == kBackground) continue;
      auto [it, inserted] = index.try_emplace(l, static_cast<int>(part.segments.size()));
      if (inserted) part.segments.push_back(Segment{l, {}, {}});
      Segment& seg = part.segments[it->second];
      const int p = y * w + x;
      seg.pixels.push_back(p);
      const bool edge = (x > 0 && mask.at(x - 1, y) != l) || (x + 1 < w && mask.at(x + 1, y) != l) ||
                        (y > 0 && mask.at(x, y - 1) != l) || (y + 1 < h && mask.at(x, y + 1) != l);
      if (edge) seg.boundary.push_back(p);
    }
  }
  return part;
}

std::vector<int> segment_index_map(const Partition& partition) {
  std::vector<int> out(static_cast<std::size_t>(partition.width) * partition.height, -1);
  for (std::size_t s = 0; s < partition.segments.size(); ++s) {
    for (int p : partition.segments[s].pixels) out[p] = static_cast<int>(s);
  }
  return out;
}

LabelMap relabel(const LabelMap& mask, std::span<const Label> mapping) {
  LabelMap out = mask;
  for (auto& l : out.labels) {
    if (l == kBackground) continue;
    if (l >= mapping.size()) fail(ErrorCode::InvalidArgument, "relabel mapping does not cover label " + std::to_string(l));
    l = mapping[l];
  }
  return out;
}

}  // namespace unilift
