#include "unilift/metrics/seg_metrics.hpp"

#include "unilift/core/error.hpp"

#include <algorithm>
#include <unordered_map>

namespace unilift::metrics {

namespace {

void check_aligned(const std::vector<LabelMap>& a, const std::vector<LabelMap>& b) {
  if (a.size() != b.size()) fail(ErrorCode::InvalidArgument, "prediction and ground truth view counts differ");
  for (std::size_t v = 0; v < a.size(); ++v) {
    if (a[v].width != b[v].width || a[v].height != b[v].height) {
      fail(ErrorCode::InvalidArgument, "view " + std::to_string(v) + ": prediction and ground truth dimensions differ");
    }
  }
}

std::uint64_t pair_key(Label a, Label b) { return (static_cast<std::uint64_t>(a) << 32) | b; }

Label majority(const std::map<Label, std::size_t>& counts) {
  Label best = kBackground;
  std::size_t best_n = 0;
  for (const auto& [label, n] : counts) {
    if (n > best_n) {
      best = label;
      best_n = n;
    }
  }
  return best;
}

}  // namespace

double miou(const std::vector<LabelMap>& pred, const std::vector<LabelMap>& gt) {
  check_aligned(pred, gt);
  std::map<Label, std::size_t> tp, fp, fn;
  for (std::size_t v = 0; v < gt.size(); ++v) {
    for (std::size_t i = 0; i < gt[v].labels.size(); ++i) {
      const Label g = gt[v].labels[i];
      const Label p = pred[v].labels[i];
      if (g != kBackground) {
        if (p == g) {
          ++tp[g];
        } else {
          ++fn[g];
        }
      }
      if (p != kBackground && p != g) ++fp[p];
    }
  }
  std::vector<Label> classes;
  for (const auto& [c, n] : tp) classes.push_back(c);
  for (const auto& [c, n] : fn) classes.push_back(c);
  std::sort(classes.begin(), classes.end());
  classes.erase(std::unique(classes.begin(), classes.end()), classes.end());
  if (classes.empty()) fail(ErrorCode::InvalidArgument, "mIoU is undefined: ground truth has no non-background class");
  double sum = 0.0;
  for (Label c : classes) {
    const double t = static_cast<double>(tp[c]);
    sum += t / (t + static_cast<double>(fp[c]) + static_cast<double>(fn[c]));
  }
  return sum / static_cast<double>(classes.size());
}

std::vector<SceneSegment> scene_segments(const std::vector<PanopticView>& views) {
  std::map<Label, std::map<Label, std::size_t>> class_votes;
  for (const auto& view : views) {
    if (view.instance.width != view.semantic.width || view.instance.height != view.semantic.height) {
      fail(ErrorCode::InvalidArgument, "instance and semantic maps of a view differ in size");
    }
    for (std::size_t i = 0; i < view.instance.labels.size(); ++i) {
      const Label inst = view.instance.labels[i];
      if (inst == kBackground) continue;
      ++class_votes[inst][view.semantic.labels[i]];
    }
  }
  std::vector<SceneSegment> out;
  for (const auto& [inst, votes] : class_votes) {
    SceneSegment seg;
    seg.instance_id = inst;
    seg.class_id = majority(votes);
    for (const auto& [c, n] : votes) seg.pixels += n;
    out.push_back(seg);
  }
  return out;
}

PqResult pq_scene(const std::vector<PanopticView>& pred, const std::vector<PanopticView>& gt) {
  if (pred.size() != gt.size()) fail(ErrorCode::InvalidArgument, "prediction and ground truth view counts differ");
  for (std::size_t v = 0; v < gt.size(); ++v) {
    if (pred[v].instance.width != gt[v].instance.width || pred[v].instance.height != gt[v].instance.height) {
      fail(ErrorCode::InvalidArgument, "view " + std::to_string(v) + ": prediction and ground truth dimensions differ");
    }
  }
  const auto pred_segs = scene_segments(pred);
  const auto gt_segs = scene_segments(gt);
  std::unordered_map<Label, const SceneSegment*> pred_by_id, gt_by_id;
  for (const auto& s : pred_segs) pred_by_id[s.instance_id] = &s;
  for (const auto& s : gt_segs) gt_by_id[s.instance_id] = &s;

  std::unordered_map<std::uint64_t, std::size_t> overlap;
  for (std::size_t v = 0; v < gt.size(); ++v) {
    const auto& pi = pred[v].instance.labels;
    const auto& gi = gt[v].instance.labels;
    for (std::size_t i = 0; i < gi.size(); ++i) {
      if (pi[i] != kBackground && gi[i] != kBackground) ++overlap[pair_key(pi[i], gi[i])];
    }
  }

  PqResult result;
  std::map<Label, ClassPq> classes;
  for (const auto& s : gt_segs) {
    auto& c = classes[s.class_id];
    c.class_id = s.class_id;
    ++c.fn;
  }
  for (const auto& s : pred_segs) {
    auto it = classes.find(s.class_id);
    if (it != classes.end()) ++it->second.fp;
  }
  for (const auto& [key, inter] : overlap) {
    const Label p = static_cast<Label>(key >> 32);
    const Label g = static_cast<Label>(key & 0xffffffffu);
    const SceneSegment& ps = *pred_by_id.at(p);
    const SceneSegment& gs = *gt_by_id.at(g);
    if (ps.class_id != gs.class_id) continue;
    const std::size_t uni = ps.pixels + gs.pixels - inter;
    if (2 * inter <= uni) continue;
    const double iou = static_cast<double>(inter) / static_cast<double>(uni);
    result.matches.push_back(MatchedPair{gs.class_id, p, g, iou});
  }
  std::sort(result.matches.begin(), result.matches.end(), [](const MatchedPair& a, const MatchedPair& b) {
    return a.class_id != b.class_id ? a.class_id < b.class_id : a.gt_instance < b.gt_instance;
  });
  for (const auto& m : result.matches) {
    auto& c = classes.at(m.class_id);
    ++c.tp;
    --c.fp;
    --c.fn;
    c.iou_sum += m.iou;
  }
  double sum = 0.0;
  for (auto& [id, c] : classes) {
    const double denom = c.tp + 0.5 * c.fp + 0.5 * c.fn;
    c.pq = denom > 0.0 ? c.iou_sum / denom : 0.0;
    sum += c.pq;
    result.per_class.push_back(c);
  }
  result.pq = classes.empty() ? 0.0 : sum / static_cast<double>(classes.size());
  return result;
}

std::map<Label, Label> majority_label_mapping(const std::vector<LabelMap>& pred, const std::vector<LabelMap>& reference) {
  check_aligned(pred, reference);
  std::map<Label, std::map<Label, std::size_t>> votes;
  for (std::size_t v = 0; v < pred.size(); ++v) {
    for (std::size_t i = 0; i < pred[v].labels.size(); ++i) {
      const Label p = pred[v].labels[i];
      if (p == kBackground) continue;
      ++votes[p][reference[v].labels[i]];
    }
  }
  std::map<Label, Label> mapping;
  for (const auto& [p, counts] : votes) mapping[p] = majority(counts);
  return mapping;
}

LabelMap apply_mapping(const LabelMap& pred, const std::map<Label, Label>& mapping, Label unmapped) {
  LabelMap out = pred;
  for (auto& l : out.labels) {
    if (l == kBackground) continue;
    const auto it = mapping.find(l);
    l = it == mapping.end() ? unmapped : it->second;
  }
  return out;
}

}  // namespace unilift::metrics
