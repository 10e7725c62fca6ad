#pragma once

#include "unilift/core/label_map.hpp"

#include <map>
#include <vector>

namespace unilift::metrics {

// Per-class IoU pooled over all views, averaged over the non-background classes
// present in the ground truth. Throws if the ground truth has no such class.
double miou(const std::vector<LabelMap>& pred, const std::vector<LabelMap>& gt);

struct PanopticView {
  LabelMap instance;
  LabelMap semantic;
};

// One (class, instance) segment merged over every view.
struct SceneSegment {
  Label class_id = kBackground;
  Label instance_id = kBackground;
  std::size_t pixels = 0;
};

// Segments keyed by non-background instance id; the class of a segment is the
// majority semantic label over its merged pixels (ties to the smaller label).
std::vector<SceneSegment> scene_segments(const std::vector<PanopticView>& views);

struct ClassPq {
  Label class_id = kBackground;
  double pq = 0.0;
  double iou_sum = 0.0;
  int tp = 0;
  int fp = 0;
  int fn = 0;
};

struct MatchedPair {
  Label class_id = kBackground;
  Label pred_instance = kBackground;
  Label gt_instance = kBackground;
  double iou = 0.0;
};

struct PqResult {
  double pq = 0.0;                  // mean over ground-truth classes, in [0, 1]
  std::vector<ClassPq> per_class;   // ascending class id
  std::vector<MatchedPair> matches; // ascending (class, gt instance)
};

// Scene-level panoptic quality. Within a class a pair matches iff IoU > 0.5,
// evaluated exactly in integers (2 * intersection > union).
PqResult pq_scene(const std::vector<PanopticView>& pred, const std::vector<PanopticView>& gt);

// Maps arbitrary predicted codes to reference labels by pooled majority vote
// (ties to the smaller label). Background predictions stay background.
std::map<Label, Label> majority_label_mapping(const std::vector<LabelMap>& pred, const std::vector<LabelMap>& reference);
LabelMap apply_mapping(const LabelMap& pred, const std::map<Label, Label>& mapping, Label unmapped = kBackground);

}  // namespace unilift::metrics
