#pragma once

#include "unilift/core/label_map.hpp"
#include "unilift/core/scene.hpp"
#include "unilift/losses/losses.hpp"
#include "unilift/optim/adam.hpp"

#include <cstdint>
#include <memory>
#include <optional>
#include <string>
#include <vector>

namespace unilift::optim {

struct TrainConfig {
  int iterations = 3000;
  double learning_rate = 1e-4;
  double lambda_cluster = 0.1;
  double lambda_triplet = 0.1;
  double lambda_3d = 0.1;
  double margin = 1.0;
  double neighbor_threshold = 1e-2;
  int late_loss_start = -1;  // negative: iterations / 2
  int max_triplets = 3000;
  int embedding_dim = 12;
  int semantic_dim = 12;
  std::uint64_t rng_seed = 0;
  double mask_fraction = 1.0;
  double mask_scale = 1.0;

  int effective_late_start() const { return late_loss_start >= 0 ? late_loss_start : iterations / 2; }
};

void validate(const TrainConfig& cfg);

struct LossRecord {
  int iteration = 0;
  double cluster = 0.0;  // unweighted, instance + semantic
  double triplet = 0.0;
  double reg3d = 0.0;
  double total = 0.0;  // lambda-weighted sum
};

// A view with its geometry rasterized once (geometry never changes during training)
// and its masks already turned into partitions at training resolution.
struct PreparedView {
  Camera camera;
  std::shared_ptr<const BlendPlan> plan;
  Partition instance;
  Partition semantic;
};

PreparedView prepare_view(const Scene& scene, const Camera& camera, const LabelMap& instance_mask,
                          const LabelMap& semantic_mask, double mask_scale = 1.0);

struct TrainState {
  Scene scene;
  losses::LinearProjection proj_instance;
  losses::LinearProjection proj_semantic;
  std::vector<double> instance_table;
  std::vector<double> semantic_table;
  Adam adam_instance, adam_semantic, adam_proj_instance, adam_proj_semantic;
  int iteration = 0;
  std::vector<LossRecord> history;
  std::optional<losses::NeighborGraph> graph;
};

// Embeddings drawn from N(0, 1); projections start at identity plus N(0, 0.01^2) noise.
TrainState init_train_state(Scene scene, const TrainConfig& cfg);

void train_step(TrainState& state, const PreparedView& view, const TrainConfig& cfg);
void train_step(TrainState& state, const Camera& camera, const LabelMap& instance_mask,
                const LabelMap& semantic_mask, const TrainConfig& cfg);

struct TrainResult {
  Scene scene;
  losses::LinearProjection proj_instance;
  losses::LinearProjection proj_semantic;
  std::vector<LossRecord> history;
  std::vector<int> masked_views;
};

// Views chosen to carry segmentation masks under cfg.mask_fraction (ascending indices).
std::vector<int> select_masked_views(int num_views, const TrainConfig& cfg);

TrainResult train(const Scene& scene, const std::vector<Camera>& cameras, const std::vector<LabelMap>& instance_masks,
                  const std::vector<LabelMap>& semantic_masks, const TrainConfig& cfg);

std::string loss_history_csv(const std::vector<LossRecord>& history, const std::vector<std::string>& header_comments = {});
std::string loss_history_svg(const std::vector<LossRecord>& history);

// Fixed-label 2-D experiment: free parameters per point, cluster loss only.
struct ToyConfig {
  int num_points = 200;
  int num_groups = 4;
  int steps = 5000;
  double learning_rate = 0.05;
  std::uint64_t rng_seed = 0;
};

struct ToyResult {
  int num_points = 0;
  int num_groups = 0;
  int steps = 0;
  std::vector<int> groups;          // per point
  std::vector<double> trajectory;   // (steps + 1) x num_points x 2, sigmoid space
  std::vector<Vec2> final_means;    // per group
  std::vector<double> final_spread; // per group mean squared distance to its mean
};

ToyResult toy_corner_experiment(const ToyConfig& cfg);
std::string toy_trajectory_csv(const ToyResult& result, int stride = 1, const std::vector<std::string>& header_comments = {});

}  // namespace unilift::optim
