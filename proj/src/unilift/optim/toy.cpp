#include "unilift/core/error.hpp"
#include "unilift/core/formats.hpp"
#include "unilift/core/numeric.hpp"
#include "unilift/losses/losses.hpp"
#include "unilift/optim/trainer.hpp"

#include <sstream>

namespace unilift::optim {

ToyResult toy_corner_experiment(const ToyConfig& cfg) {
  if (cfg.num_groups < 1 || cfg.num_groups > 4) fail(ErrorCode::Config, "toy experiment supports 1 to 4 groups in 2-D");
  if (cfg.num_points < cfg.num_groups) fail(ErrorCode::Config, "toy experiment needs at least one point per group");
  if (cfg.steps < 0) fail(ErrorCode::Config, "toy steps must be non-negative");

  ToyResult result;
  result.num_points = cfg.num_points;
  result.num_groups = cfg.num_groups;
  result.steps = cfg.steps;
  result.groups.resize(cfg.num_points);

  // The points form a 1 x N "image" whose mask is the group assignment.
  LabelMap mask(cfg.num_points, 1, LabelKind::Instance);
  for (int i = 0; i < cfg.num_points; ++i) {
    result.groups[i] = i % cfg.num_groups;
    mask.labels[i] = static_cast<Label>(result.groups[i] + 1);
  }
  const Partition partition = partition_from_mask(mask);

  EmbeddingMap map(cfg.num_points, 1, 2);
  std::fill(map.coverage.begin(), map.coverage.end(), 1.0);
  Rng rng(mix_seed(cfg.rng_seed, 77));
  for (auto& v : map.values) v = standard_normal(rng);

  AdamParams params;
  params.learning_rate = cfg.learning_rate;
  Adam adam(map.values.size(), params);

  const std::size_t frame = static_cast<std::size_t>(cfg.num_points) * 2;
  result.trajectory.resize((static_cast<std::size_t>(cfg.steps) + 1) * frame);
  auto record = [&](int step) {
    double* out = result.trajectory.data() + static_cast<std::size_t>(step) * frame;
    for (std::size_t i = 0; i < frame; ++i) out[i] = sigmoid(map.values[i]);
  };
  record(0);
  for (int step = 1; step <= cfg.steps; ++step) {
    const auto loss = losses::cluster_loss(map, partition);
    adam.update(map.values, loss.pixel_grad, step);
    record(step);
  }

  result.final_means.assign(cfg.num_groups, Vec2::Zero());
  result.final_spread.assign(cfg.num_groups, 0.0);
  std::vector<int> counts(cfg.num_groups, 0);
  const double* last = result.trajectory.data() + static_cast<std::size_t>(cfg.steps) * frame;
  for (int i = 0; i < cfg.num_points; ++i) {
    result.final_means[result.groups[i]] += Vec2(last[2 * i], last[2 * i + 1]);
    ++counts[result.groups[i]];
  }
  for (int g = 0; g < cfg.num_groups; ++g) result.final_means[g] /= counts[g];
  for (int i = 0; i < cfg.num_points; ++i) {
    const int g = result.groups[i];
    result.final_spread[g] += (Vec2(last[2 * i], last[2 * i + 1]) - result.final_means[g]).squaredNorm() / counts[g];
  }
  return result;
}

std::string toy_trajectory_csv(const ToyResult& result, int stride, const std::vector<std::string>& header_comments) {
  if (stride < 1) stride = 1;
  std::ostringstream out;
  for (const auto& c : header_comments) out << "# " << c << '\n';
  out << "step,point,group,x,y\n";
  const std::size_t frame = static_cast<std::size_t>(result.num_points) * 2;
  for (int step = 0; step <= result.steps; ++step) {
    if (step % stride != 0 && step != result.steps) continue;
    const double* f = result.trajectory.data() + static_cast<std::size_t>(step) * frame;
    for (int i = 0; i < result.num_points; ++i) {
      out << step << ',' << i << ',' << result.groups[i] << ',' << format_double(f[2 * i]) << ','
          << format_double(f[2 * i + 1]) << '\n';
    }
  }
  return out.str();
}

}  // namespace unilift::optim
