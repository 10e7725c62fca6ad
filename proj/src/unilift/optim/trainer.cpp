#include "unilift/optim/trainer.hpp"

#include "unilift/core/error.hpp"
#include "unilift/core/formats.hpp"
#include "unilift/core/numeric.hpp"
#include "unilift/raster/splat.hpp"

#include <algorithm>
#include <cmath>
#include <sstream>

namespace unilift::optim {

namespace {

constexpr std::uint64_t kEmbeddingInitStream = 1;
constexpr std::uint64_t kProjectionInitStream = 2;
constexpr std::uint64_t kViewOrderStream = 3;
constexpr std::uint64_t kMaskSelectStream = 4;
constexpr std::uint64_t kTripletStream = 5;

AdamParams adam_params(const TrainConfig& cfg) {
  AdamParams p;
  p.learning_rate = cfg.learning_rate;
  return p;
}

void check_finite(double value, const char* term, int iteration) {
  if (!std::isfinite(value)) {
    fail(ErrorCode::Numerical, std::string("non-finite ") + term + " loss at iteration " + std::to_string(iteration));
  }
}

struct ChannelTerms {
  double cluster = 0.0;
  double triplet = 0.0;
  double reg3d = 0.0;
};

// Accumulates one channel's weighted gradients into table_grad / proj_grad.
ChannelTerms channel_step(const std::shared_ptr<const BlendPlan>& plan, const Partition& partition,
                          std::span<const double> table, int dim, const losses::LinearProjection& proj,
                          const std::optional<losses::NeighborGraph>& graph, bool late, std::uint64_t mining_seed,
                          const TrainConfig& cfg, std::vector<double>& table_grad, std::vector<double>& proj_grad) {
  ChannelTerms terms;
  const EmbeddingMap map = raster::compose(plan, table, dim);
  auto cl = losses::cluster_loss(map, partition);
  terms.cluster = cl.value;
  std::vector<double> pixel_grad(map.values.size(), 0.0);
  for (std::size_t i = 0; i < pixel_grad.size(); ++i) pixel_grad[i] = cfg.lambda_cluster * cl.pixel_grad[i];

  if (late) {
    const auto batch = losses::mine_triplets(map, partition, cfg.max_triplets, mining_seed, cfg.margin);
    const auto tl = losses::triplet_loss(map, batch, proj);
    terms.triplet = tl.value;
    for (std::size_t i = 0; i < pixel_grad.size(); ++i) pixel_grad[i] += cfg.lambda_triplet * tl.pixel_grad[i];
    for (std::size_t i = 0; i < proj_grad.size(); ++i) proj_grad[i] += cfg.lambda_triplet * tl.proj_grad[i];
  }

  table_grad = raster::backward_embeddings(map, pixel_grad);
  if (late && graph) {
    const auto reg = losses::regularization_3d(table, dim, *graph);
    terms.reg3d = reg.value;
    for (std::size_t i = 0; i < table_grad.size(); ++i) table_grad[i] += cfg.lambda_3d * reg.grad[i];
  }
  return terms;
}

}  // namespace

void validate(const TrainConfig& cfg) {
  if (cfg.iterations < 0) fail(ErrorCode::Config, "iterations must be non-negative");
  if (!(cfg.learning_rate > 0.0)) fail(ErrorCode::Config, "learning_rate must be positive");
  if (cfg.lambda_cluster < 0.0 || cfg.lambda_triplet < 0.0 || cfg.lambda_3d < 0.0) {
    fail(ErrorCode::Config, "loss weights must be non-negative");
  }
  if (cfg.iterations > 0 && cfg.effective_late_start() >= cfg.iterations) {
    fail(ErrorCode::Config, "late_loss_start must be smaller than iterations");
  }
  if (!(cfg.neighbor_threshold > 0.0)) fail(ErrorCode::Config, "neighbor_threshold must be positive");
  if (cfg.max_triplets < 0) fail(ErrorCode::Config, "max_triplets must be non-negative");
  if (cfg.embedding_dim <= 0 || cfg.semantic_dim <= 0) fail(ErrorCode::Config, "embedding dimensions must be positive");
  if (!(cfg.mask_fraction > 0.0 && cfg.mask_fraction <= 1.0)) fail(ErrorCode::Config, "mask_fraction must lie in (0, 1]");
  if (cfg.mask_scale != 0.25 && cfg.mask_scale != 0.5 && cfg.mask_scale != 1.0) {
    fail(ErrorCode::Config, "mask_scale must be one of 0.25, 0.5, 1");
  }
}

PreparedView prepare_view(const Scene& scene, const Camera& camera, const LabelMap& instance_mask,
                          const LabelMap& semantic_mask, double mask_scale) {
  if (instance_mask.width != camera.width || instance_mask.height != camera.height ||
      semantic_mask.width != camera.width || semantic_mask.height != camera.height) {
    fail(ErrorCode::InvalidArgument, "mask dimensions do not match the camera");
  }
  PreparedView view;
  view.camera = mask_scale == 1.0 ? camera : camera.scaled(mask_scale);
  view.plan = raster::rasterize(scene, view.camera);
  if (mask_scale == 1.0) {
    view.instance = partition_from_mask(instance_mask);
    view.semantic = partition_from_mask(semantic_mask);
  } else {
    view.instance = partition_from_mask(resample_nearest(instance_mask, view.camera.width, view.camera.height));
    view.semantic = partition_from_mask(resample_nearest(semantic_mask, view.camera.width, view.camera.height));
  }
  return view;
}

TrainState init_train_state(Scene scene, const TrainConfig& cfg) {
  validate(cfg);
  TrainState state;
  scene.embedding_dim = cfg.embedding_dim;
  scene.semantic_dim = cfg.semantic_dim;
  Rng rng(mix_seed(cfg.rng_seed, kEmbeddingInitStream));
  for (auto& prim : scene.primitives) {
    prim.instance_embedding.resize(cfg.embedding_dim);
    for (auto& v : prim.instance_embedding) v = standard_normal(rng);
    prim.semantic_embedding.resize(cfg.semantic_dim);
    for (auto& v : prim.semantic_embedding) v = standard_normal(rng);
  }
  state.instance_table = embedding_table(scene, Channel::Instance);
  state.semantic_table = embedding_table(scene, Channel::Semantic);
  const std::uint64_t proj_seed = mix_seed(cfg.rng_seed, kProjectionInitStream);
  state.proj_instance = losses::LinearProjection::perturbed_identity(cfg.embedding_dim, mix_seed(proj_seed, 0));
  state.proj_semantic = losses::LinearProjection::perturbed_identity(cfg.semantic_dim, mix_seed(proj_seed, 1));
  const auto params = adam_params(cfg);
  state.adam_instance = Adam(state.instance_table.size(), params);
  state.adam_semantic = Adam(state.semantic_table.size(), params);
  state.adam_proj_instance = Adam(state.proj_instance.matrix.size(), params);
  state.adam_proj_semantic = Adam(state.proj_semantic.matrix.size(), params);
  state.scene = std::move(scene);
  return state;
}

void train_step(TrainState& state, const PreparedView& view, const TrainConfig& cfg) {
  const int it = state.iteration;
  const bool late = it >= cfg.effective_late_start();
  if (late && !state.graph) state.graph = losses::build_neighbor_graph(state.scene, cfg.neighbor_threshold);

  const std::uint64_t mining_seed = mix_seed(mix_seed(cfg.rng_seed, kTripletStream), static_cast<std::uint64_t>(it));
  std::vector<double> grad_inst, grad_sem;
  std::vector<double> grad_proj_inst(state.proj_instance.matrix.size(), 0.0);
  std::vector<double> grad_proj_sem(state.proj_semantic.matrix.size(), 0.0);

  const auto inst = channel_step(view.plan, view.instance, state.instance_table, cfg.embedding_dim, state.proj_instance,
                                 state.graph, late, mix_seed(mining_seed, 0), cfg, grad_inst, grad_proj_inst);
  const auto sem = channel_step(view.plan, view.semantic, state.semantic_table, cfg.semantic_dim, state.proj_semantic,
                                state.graph, late, mix_seed(mining_seed, 1), cfg, grad_sem, grad_proj_sem);

  LossRecord rec;
  rec.iteration = it;
  rec.cluster = inst.cluster + sem.cluster;
  rec.triplet = inst.triplet + sem.triplet;
  rec.reg3d = inst.reg3d + sem.reg3d;
  rec.total = cfg.lambda_cluster * rec.cluster + cfg.lambda_triplet * rec.triplet + cfg.lambda_3d * rec.reg3d;
  check_finite(rec.cluster, "cluster", it);
  check_finite(rec.triplet, "triplet", it);
  check_finite(rec.reg3d, "reg3d", it);
  check_finite(rec.total, "total", it);

  const int step = it + 1;
  state.adam_instance.update(state.instance_table, grad_inst, step);
  state.adam_semantic.update(state.semantic_table, grad_sem, step);
  state.adam_proj_instance.update(state.proj_instance.matrix, grad_proj_inst, step);
  state.adam_proj_semantic.update(state.proj_semantic.matrix, grad_proj_sem, step);
  set_embedding_table(state.scene, Channel::Instance, state.instance_table);
  set_embedding_table(state.scene, Channel::Semantic, state.semantic_table);

  state.history.push_back(rec);
  ++state.iteration;
}

void train_step(TrainState& state, const Camera& camera, const LabelMap& instance_mask, const LabelMap& semantic_mask,
                const TrainConfig& cfg) {
  train_step(state, prepare_view(state.scene, camera, instance_mask, semantic_mask, cfg.mask_scale), cfg);
}

std::vector<int> select_masked_views(int num_views, const TrainConfig& cfg) {
  std::vector<int> idx(num_views);
  for (int i = 0; i < num_views; ++i) idx[i] = i;
  if (cfg.mask_fraction >= 1.0 || num_views == 0) return idx;
  const int count = std::clamp(static_cast<int>(std::lround(cfg.mask_fraction * num_views)), 1, num_views);
  Rng rng(mix_seed(cfg.rng_seed, kMaskSelectStream));
  for (int i = 0; i < count; ++i) {
    const int j = i + static_cast<int>(uniform_index(rng, static_cast<std::uint64_t>(num_views - i)));
    std::swap(idx[i], idx[j]);
  }
  idx.resize(count);
  std::sort(idx.begin(), idx.end());
  return idx;
}

TrainResult train(const Scene& scene, const std::vector<Camera>& cameras, const std::vector<LabelMap>& instance_masks,
                  const std::vector<LabelMap>& semantic_masks, const TrainConfig& cfg) {
  validate(cfg);
  if (cameras.empty()) fail(ErrorCode::Config, "training needs at least one view");
  if (instance_masks.size() != cameras.size() || semantic_masks.size() != cameras.size()) {
    fail(ErrorCode::Config, "every training view needs an instance and a semantic mask");
  }
  TrainResult result;
  result.masked_views = select_masked_views(static_cast<int>(cameras.size()), cfg);
  if (result.masked_views.empty()) fail(ErrorCode::Config, "no view has a segmentation mask");

  TrainState state = init_train_state(scene, cfg);
  std::vector<PreparedView> views;
  views.reserve(result.masked_views.size());
  for (int v : result.masked_views) {
    views.push_back(prepare_view(state.scene, cameras[v], instance_masks[v], semantic_masks[v], cfg.mask_scale));
  }

  std::vector<int> order(views.size());
  std::size_t cursor = order.size();
  std::uint64_t epoch = 0;
  for (int it = 0; it < cfg.iterations; ++it) {
    if (cursor == order.size()) {
      for (std::size_t i = 0; i < order.size(); ++i) order[i] = static_cast<int>(i);
      Rng rng(mix_seed(mix_seed(cfg.rng_seed, kViewOrderStream), epoch++));
      for (std::size_t i = order.size(); i > 1; --i) std::swap(order[i - 1], order[uniform_index(rng, i)]);
      cursor = 0;
    }
    train_step(state, views[order[cursor++]], cfg);
  }

  result.scene = std::move(state.scene);
  result.proj_instance = std::move(state.proj_instance);
  result.proj_semantic = std::move(state.proj_semantic);
  result.history = std::move(state.history);
  return result;
}

std::string loss_history_csv(const std::vector<LossRecord>& history, const std::vector<std::string>& header_comments) {
  std::ostringstream out;
  for (const auto& c : header_comments) out << "# " << c << '\n';
  out << "iteration,cluster,triplet,reg3d,total\n";
  for (const auto& r : history) {
    out << r.iteration << ',' << format_double(r.cluster) << ',' << format_double(r.triplet) << ','
        << format_double(r.reg3d) << ',' << format_double(r.total) << '\n';
  }
  return out.str();
}

std::string loss_history_svg(const std::vector<LossRecord>& history) {
  constexpr double kWidth = 800.0, kHeight = 400.0, kPad = 40.0;
  std::ostringstream out;
  out << "<svg xmlns=\"http://www.w3.org/2000/svg\" width=\"" << kWidth << "\" height=\"" << kHeight << "\">\n";
  out << "<rect width=\"100%\" height=\"100%\" fill=\"white\"/>\n";
  if (!history.empty()) {
    double lo = history.front().total, hi = lo;
    for (const auto& r : history) {
      for (double v : {r.cluster, r.triplet, r.reg3d, r.total}) {
        lo = std::min(lo, v);
        hi = std::max(hi, v);
      }
    }
    if (hi - lo < 1e-12) hi = lo + 1.0;
    const double n = std::max<double>(1.0, static_cast<double>(history.size() - 1));
    auto line = [&](auto getter, const char* color, const char* name) {
      out << "<polyline fill=\"none\" stroke=\"" << color << "\" stroke-width=\"1\" points=\"";
      const std::size_t stride = std::max<std::size_t>(1, history.size() / 2000);
      for (std::size_t i = 0; i < history.size(); i += stride) {
        const double x = kPad + (kWidth - 2 * kPad) * static_cast<double>(i) / n;
        const double y = kHeight - kPad - (kHeight - 2 * kPad) * (getter(history[i]) - lo) / (hi - lo);
        out << x << ',' << y << ' ';
      }
      out << "\"><title>" << name << "</title></polyline>\n";
    };
    line([](const LossRecord& r) { return r.cluster; }, "steelblue", "cluster");
    line([](const LossRecord& r) { return r.triplet; }, "darkorange", "triplet");
    line([](const LossRecord& r) { return r.reg3d; }, "seagreen", "reg3d");
    line([](const LossRecord& r) { return r.total; }, "black", "total");
    out << "<text x=\"" << kPad << "\" y=\"20\" font-size=\"12\">cluster (blue) triplet (orange) reg3d (green) total "
           "(black); y range ["
        << format_double(lo) << ", " << format_double(hi) << "]</text>\n";
  }
  out << "</svg>\n";
  return out.str();
}

}  // namespace unilift::optim
