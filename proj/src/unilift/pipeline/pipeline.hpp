#pragma once

#include "unilift/baseline/density_cluster.hpp"
#include "unilift/metrics/seg_metrics.hpp"
#include "unilift/metrics/timing.hpp"
#include "unilift/pipeline/dataset.hpp"

#include <json.hpp>

#include <filesystem>
#include <map>
#include <string>
#include <vector>

namespace unilift::pipeline {

struct SynthSummary {
  int objects = 0;
  int training_views = 0;
  int heldout_views = 0;
  std::size_t pixels = 0;  // over all views
};

SynthSummary summarize(const Dataset& dataset);

struct TrainOutcome {
  Model model;
  std::vector<optim::LossRecord> history;
  std::vector<int> masked_views;  // dataset view indices that carried masks
};

TrainOutcome train_on_dataset(const RunConfig& cfg, const Dataset& dataset);

// scene.txt, projection_*.txt, loss.csv, loss.svg, masked_views.txt, config.txt.
void save_train_outputs(const TrainOutcome& outcome, const RunConfig& cfg, const std::filesystem::path& dir);

struct RenderedView {
  int view = 0;
  EmbeddingMap instance;
  EmbeddingMap semantic;
};

std::vector<RenderedView> render_views(const Model& model, const Dataset& dataset, const std::vector<int>& views);

struct DecodedView {
  int view = 0;
  LabelMap instance;
  LabelMap semantic;  // raw decoded codes
};

std::vector<DecodedView> decode_views(const std::vector<RenderedView>& rendered, const codec::DecodeConfig& cfg);

// Panoptic evaluation of one labelling path against consistent ground truth.
struct PathEvaluation {
  metrics::PqResult pq;
  double miou = 0.0;
  std::size_t predicted_segments = 0;
  std::map<Label, Label> semantic_mapping;  // code/cluster -> class
};

struct Evaluation {
  std::vector<int> views;
  PathEvaluation single_stage;
  std::vector<codec::CollisionReport> collisions;  // per evaluated view
  int total_collisions = 0;
  bool has_baseline = false;
  PathEvaluation baseline;
  int baseline_instance_clusters = 0;
  int baseline_semantic_clusters = 0;
  metrics::TimingComparison timing;
};

// Renders the held-out views, decodes them and scores PQ^scene, mIoU and code
// collisions. Semantic codes are mapped to classes by majority vote against the
// training views' semantic masks, never against held-out ground truth. With
// `with_baseline`, the same rendered maps also go through density clustering plus
// nearest-centroid assignment, and both paths are timed.
Evaluation evaluate(const RunConfig& cfg, const Model& model, const Dataset& dataset, bool with_baseline);

// Deterministic report: no wall-clock values.
nlohmann::json metrics_json(const Evaluation& eval, const RunConfig& cfg);
nlohmann::json timings_json(const Evaluation& eval, const metrics::ScalingReport* scaling, const RunConfig& cfg);

// Decode wall time for one held-out view rendered at 64^2, 128^2 and 256^2.
metrics::ScalingReport decode_scaling(const RunConfig& cfg, const Model& model, const Dataset& dataset);

struct ToyOutcome {
  optim::ToyResult result;
  std::vector<Vec2> nearest_corner;     // per group
  std::vector<double> corner_deviation; // per group, max over coordinates
  bool distinct_corners = false;
  double min_pairwise_distance = 0.0;
};

ToyOutcome run_toy(const RunConfig& cfg);
nlohmann::json toy_json(const ToyOutcome& outcome, const RunConfig& cfg);

// Canonical JSON text: sorted keys, two-space indent, trailing newline.
std::string dump_json(const nlohmann::json& doc);

}  // namespace unilift::pipeline
