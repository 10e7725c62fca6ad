#pragma once

#include <cstdint>
#include <memory>
#include <span>
#include <vector>

namespace unilift {

using Label = std::uint32_t;
inline constexpr Label kBackground = 0;
inline constexpr Label kMaxLabel = 0x7fffffffu;

enum class LabelKind { Instance, Semantic };

// Per-view H x W integer mask, row-major.
struct LabelMap {
  int width = 0;
  int height = 0;
  LabelKind kind = LabelKind::Instance;
  std::vector<Label> labels;

  LabelMap() = default;
  LabelMap(int w, int h, LabelKind k, Label fill = kBackground);

  std::size_t size() const { return labels.size(); }
  Label at(int x, int y) const { return labels[static_cast<std::size_t>(y) * width + x]; }
  Label& at(int x, int y) { return labels[static_cast<std::size_t>(y) * width + x]; }

  friend bool operator==(const LabelMap&, const LabelMap&) = default;
};

// Nearest-neighbour resampling; labels are categorical so no interpolation.
LabelMap resample_nearest(const LabelMap& mask, int width, int height);

struct Segment {
  Label label = kBackground;
  std::vector<int> pixels;    // ascending raster indices
  std::vector<int> boundary;  // subset of pixels with a 4-neighbour of a different label
};

// Segments appear in order of their first pixel in raster order, so the
// structure depends only on the induced partition and never on label values.
struct Partition {
  int width = 0;
  int height = 0;
  std::vector<Segment> segments;

  std::size_t labeled_pixel_count() const;
  LabelMap to_mask(LabelKind kind) const;
};

Partition partition_from_mask(const LabelMap& mask);

// Per-pixel segment index (-1 for background).
std::vector<int> segment_index_map(const Partition& partition);

// One splat's contribution to one pixel: weight = alpha'_i * T_i.
struct BlendEntry {
  int primitive = 0;
  double weight = 0.0;
};

// Geometry-only rasterization result; reused for every channel of a view.
struct BlendPlan {
  int width = 0;
  int height = 0;
  int num_primitives = 0;
  std::vector<std::size_t> offsets;  // pixel_count + 1, CSR into entries
  std::vector<BlendEntry> entries;   // front-to-back per pixel
  std::vector<double> coverage;      // 1 - final transmittance

  std::span<const BlendEntry> pixel(std::size_t index) const {
    return {entries.data() + offsets[index], offsets[index + 1] - offsets[index]};
  }
  std::size_t pixel_count() const { return coverage.size(); }
};

struct EmbeddingMap {
  int width = 0;
  int height = 0;
  int dim = 0;
  std::vector<double> values;    // H x W x dim
  std::vector<double> coverage;  // H x W
  std::shared_ptr<const BlendPlan> plan;

  EmbeddingMap() = default;
  EmbeddingMap(int w, int h, int d);

  std::size_t pixel_count() const { return static_cast<std::size_t>(width) * height; }
  std::span<const double> pixel(std::size_t index) const { return {values.data() + index * dim, static_cast<std::size_t>(dim)}; }
  std::span<double> pixel(std::size_t index) { return {values.data() + index * dim, static_cast<std::size_t>(dim)}; }
};

// Relabels non-background values through `mapping` (index = old label).
LabelMap relabel(const LabelMap& mask, std::span<const Label> mapping);

}  // namespace unilift
