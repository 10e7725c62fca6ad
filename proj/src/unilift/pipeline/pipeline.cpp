#include "unilift/pipeline/pipeline.hpp"

#include "unilift/core/error.hpp"
#include "unilift/core/formats.hpp"
#include "unilift/raster/splat.hpp"

#include <algorithm>
#include <cmath>
#include <limits>
#include <sstream>

namespace fs = std::filesystem;
using nlohmann::json;

namespace unilift::pipeline {

namespace {

std::vector<LabelMap> pick(const Dataset& dataset, const std::vector<int>& views, LabelMap ViewRecord::*member) {
  std::vector<LabelMap> out;
  for (int v : views) out.push_back(dataset.views[v].*member);
  return out;
}

PathEvaluation score_path(const std::vector<LabelMap>& instance, const std::vector<LabelMap>& semantic_codes,
                          const std::map<Label, Label>& mapping, const Dataset& dataset, const std::vector<int>& views) {
  PathEvaluation out;
  out.semantic_mapping = mapping;
  std::vector<metrics::PanopticView> pred, gt;
  std::vector<LabelMap> sem_pred;
  for (std::size_t i = 0; i < views.size(); ++i) {
    LabelMap sem = metrics::apply_mapping(semantic_codes[i], mapping);
    pred.push_back({instance[i], sem});
    gt.push_back({dataset.views[views[i]].instance_gt, dataset.views[views[i]].semantic_gt});
    sem_pred.push_back(std::move(sem));
  }
  out.pq = metrics::pq_scene(pred, gt);
  out.predicted_segments = metrics::scene_segments(pred).size();
  out.miou = metrics::miou(sem_pred, pick(dataset, views, &ViewRecord::semantic_gt));
  return out;
}

json pq_json(const PathEvaluation& path) {
  json per_class = json::array();
  for (const auto& c : path.pq.per_class) {
    per_class.push_back({{"class", c.class_id}, {"pq", c.pq}, {"iou_sum", c.iou_sum}, {"tp", c.tp}, {"fp", c.fp}, {"fn", c.fn}});
  }
  json matches = json::array();
  for (const auto& m : path.pq.matches) {
    matches.push_back({{"class", m.class_id}, {"pred_instance", m.pred_instance}, {"gt_instance", m.gt_instance}, {"iou", m.iou}});
  }
  json mapping = json::object();
  for (const auto& [code, cls] : path.semantic_mapping) mapping[std::to_string(code)] = cls;
  return {{"pq_scene", path.pq.pq},
          {"miou", path.miou},
          {"per_class", per_class},
          {"matches", matches},
          {"predicted_segments", path.predicted_segments},
          {"semantic_mapping", mapping}};
}

json config_json(const RunConfig& cfg) {
  json out = json::object();
  for (const auto& [k, v] : cfg.entries()) out[k] = v;
  return out;
}

double final_total(const std::vector<optim::LossRecord>& history) { return history.empty() ? 0.0 : history.back().total; }

}  // namespace

SynthSummary summarize(const Dataset& dataset) {
  SynthSummary s;
  s.objects = static_cast<int>(dataset.object_class.size()) - 1;
  for (const auto& v : dataset.views) {
    (v.heldout ? s.heldout_views : s.training_views) += 1;
    s.pixels += v.camera.pixel_count();
  }
  return s;
}

TrainOutcome train_on_dataset(const RunConfig& cfg, const Dataset& dataset) {
  const auto train_views = dataset.training_views();
  if (train_views.empty()) fail(ErrorCode::InvalidArgument, "dataset has no training views");
  std::vector<Camera> cameras;
  for (int v : train_views) cameras.push_back(dataset.views[v].camera);
  auto result = optim::train(dataset.scene, cameras, pick(dataset, train_views, &ViewRecord::instance_input),
                             pick(dataset, train_views, &ViewRecord::semantic_input), cfg.train_config());
  TrainOutcome out;
  out.model.scene = std::move(result.scene);
  out.model.proj_instance = std::move(result.proj_instance);
  out.model.proj_semantic = std::move(result.proj_semantic);
  out.history = std::move(result.history);
  for (int local : result.masked_views) out.masked_views.push_back(train_views[local]);
  return out;
}

void save_train_outputs(const TrainOutcome& outcome, const RunConfig& cfg, const fs::path& dir) {
  const auto header = cfg.header_lines();
  save_model(outcome.model, header, dir);
  write_text_file(dir / "loss.csv", optim::loss_history_csv(outcome.history, header));
  std::string svg = optim::loss_history_svg(outcome.history);
  std::string meta = "<!--\n";
  for (const auto& line : header) meta += line + "\n";
  meta += "-->\n";
  if (const auto pos = svg.find("<svg"); pos != std::string::npos) svg.insert(pos, meta);
  write_text_file(dir / "loss.svg", svg);
  std::ostringstream masked;
  for (const auto& line : header) masked << "# " << line << "\n";
  masked << "# dataset views carrying segmentation masks\n";
  for (int v : outcome.masked_views) masked << v << "\n";
  write_text_file(dir / "masked_views.txt", masked.str());
  write_text_file(dir / "config.txt", cfg.to_text());
  if (!std::isfinite(final_total(outcome.history))) fail(ErrorCode::Numerical, "final training loss is not finite");
}

std::vector<RenderedView> render_views(const Model& model, const Dataset& dataset, const std::vector<int>& views) {
  std::vector<RenderedView> out;
  for (int v : views) {
    const auto plan = raster::rasterize(model.scene, dataset.views[v].camera);
    RenderedView r;
    r.view = v;
    r.instance = raster::compose(plan, embedding_table(model.scene, Channel::Instance), model.scene.embedding_dim);
    r.semantic = raster::compose(plan, embedding_table(model.scene, Channel::Semantic), model.scene.semantic_dim);
    out.push_back(std::move(r));
  }
  return out;
}

std::vector<DecodedView> decode_views(const std::vector<RenderedView>& rendered, const codec::DecodeConfig& cfg) {
  std::vector<DecodedView> out;
  for (const auto& r : rendered) {
    out.push_back({r.view, codec::decode_map(r.instance, cfg, LabelKind::Instance),
                   codec::decode_map(r.semantic, cfg, LabelKind::Semantic)});
  }
  return out;
}

Evaluation evaluate(const RunConfig& cfg, const Model& model, const Dataset& dataset, bool with_baseline) {
  Evaluation out;
  out.views = dataset.heldout_views();
  if (out.views.empty()) fail(ErrorCode::InvalidArgument, "dataset has no held-out views to evaluate");
  const auto train_views = dataset.training_views();
  if (train_views.empty()) fail(ErrorCode::InvalidArgument, "semantic code mapping needs training views");

  const auto rendered = render_views(model, dataset, out.views);
  const auto decoded = decode_views(rendered, cfg.decode);
  const auto rendered_train = render_views(model, dataset, train_views);
  const auto decoded_train = decode_views(rendered_train, cfg.decode);
  const auto train_semantic_masks = pick(dataset, train_views, &ViewRecord::semantic_input);

  std::vector<LabelMap> inst, sem, train_sem;
  for (const auto& d : decoded) {
    inst.push_back(d.instance);
    sem.push_back(d.semantic);
  }
  for (const auto& d : decoded_train) train_sem.push_back(d.semantic);
  out.single_stage = score_path(inst, sem, metrics::majority_label_mapping(train_sem, train_semantic_masks), dataset, out.views);

  for (std::size_t i = 0; i < out.views.size(); ++i) {
    out.collisions.push_back(codec::collision_report(inst[i], partition_from_mask(dataset.views[out.views[i]].instance_gt)));
    out.total_collisions += out.collisions.back().collisions;
  }
  if (!with_baseline) return out;

  out.has_baseline = true;
  std::vector<EmbeddingMap> inst_maps, sem_maps;
  for (const auto& r : rendered) {
    inst_maps.push_back(r.instance);
    sem_maps.push_back(r.semantic);
  }
  const auto& bc = cfg.baseline;
  auto fit = [&](const std::vector<EmbeddingMap>& maps) {
    const auto samples = baseline::sample_sigmoid_embeddings(maps, bc.max_samples);
    return baseline::fit_density_clusters(samples, maps.front().dim, bc.eps, bc.min_pts);
  };
  const auto inst_model = fit(inst_maps);
  const auto sem_model = fit(sem_maps);
  out.baseline_instance_clusters = static_cast<int>(inst_model.centroids.size());
  out.baseline_semantic_clusters = static_cast<int>(sem_model.centroids.size());
  std::vector<LabelMap> b_inst, b_sem, b_train_sem;
  for (std::size_t i = 0; i < rendered.size(); ++i) {
    b_inst.push_back(baseline::assign_labels(inst_maps[i], inst_model, LabelKind::Instance));
    b_sem.push_back(baseline::assign_labels(sem_maps[i], sem_model, LabelKind::Semantic));
  }
  for (const auto& r : rendered_train) b_train_sem.push_back(baseline::assign_labels(r.semantic, sem_model, LabelKind::Semantic));
  out.baseline = score_path(b_inst, b_sem, metrics::majority_label_mapping(b_train_sem, train_semantic_masks), dataset, out.views);

  std::size_t pixels = 0;
  for (const auto& m : inst_maps) pixels += m.pixel_count();
  out.timing = metrics::timing_compare(
      [&] {
        for (std::size_t i = 0; i < inst_maps.size(); ++i) {
          codec::decode_map(inst_maps[i], cfg.decode, LabelKind::Instance);
          codec::decode_map(sem_maps[i], cfg.decode, LabelKind::Semantic);
        }
      },
      [&] {
        const auto mi = fit(inst_maps);
        const auto ms = fit(sem_maps);
        for (std::size_t i = 0; i < inst_maps.size(); ++i) {
          baseline::assign_labels(inst_maps[i], mi, LabelKind::Instance);
          baseline::assign_labels(sem_maps[i], ms, LabelKind::Semantic);
        }
      },
      pixels);
  return out;
}

json metrics_json(const Evaluation& eval, const RunConfig& cfg) {
  json collisions = json::array();
  for (std::size_t i = 0; i < eval.views.size(); ++i) {
    json segments = json::array();
    for (const auto& s : eval.collisions[i].segments) {
      segments.push_back({{"reference_label", s.reference_label},
                          {"majority_label", s.majority_label},
                          {"purity", s.purity},
                          {"pixels", s.pixels}});
    }
    collisions.push_back({{"view", eval.views[i]}, {"collisions", eval.collisions[i].collisions}, {"segments", segments}});
  }
  json doc = {{"seed", cfg.seed},
              {"config", config_json(cfg)},
              {"views", eval.views},
              {"single_stage", pq_json(eval.single_stage)},
              {"collisions", eval.total_collisions},
              {"collision_report", collisions}};
  if (eval.has_baseline) {
    json b = pq_json(eval.baseline);
    b["instance_clusters"] = eval.baseline_instance_clusters;
    b["semantic_clusters"] = eval.baseline_semantic_clusters;
    doc["baseline"] = b;
  }
  return doc;
}

json timings_json(const Evaluation& eval, const metrics::ScalingReport* scaling, const RunConfig& cfg) {
  json doc = {{"seed", cfg.seed}, {"config", config_json(cfg)}};
  if (eval.has_baseline) {
    const auto& t = eval.timing;
    doc["comparison"] = {{"pixels", t.pixels},
                         {"decode_seconds", t.decode_seconds},
                         {"baseline_seconds", t.baseline_seconds},
                         {"decode_pixels_per_second", t.decode_pixels_per_second},
                         {"baseline_pixels_per_second", t.baseline_pixels_per_second},
                         {"ratio", t.ratio}};
  }
  if (scaling) {
    doc["decode_scaling"] = {{"pixels", scaling->pixels},
                             {"seconds", scaling->seconds},
                             {"seconds_per_pixel", scaling->seconds_per_pixel},
                             {"slope_ratio", scaling->slope_ratio}};
  }
  return doc;
}

metrics::ScalingReport decode_scaling(const RunConfig& cfg, const Model& model, const Dataset& dataset) {
  const auto views = dataset.heldout_views();
  const Camera& base = dataset.views[views.empty() ? 0 : views.front()].camera;
  std::vector<std::size_t> pixels;
  std::vector<double> seconds;
  for (int side : {64, 128, 256}) {
    const Camera cam = base.scaled(static_cast<double>(side) / base.width);
    const auto map = raster::render(model.scene, cam, Channel::Instance);
    pixels.push_back(map.pixel_count());
    seconds.push_back(metrics::median_call_seconds([&] { codec::decode_map(map, cfg.decode); }, 5, 0.05));
  }
  return metrics::scaling_report(pixels, seconds);
}

ToyOutcome run_toy(const RunConfig& cfg) {
  ToyOutcome out;
  out.result = optim::toy_corner_experiment(cfg.toy_config());
  for (const auto& m : out.result.final_means) {
    const Vec2 corner(m.x() > 0.5 ? 1.0 : 0.0, m.y() > 0.5 ? 1.0 : 0.0);
    out.nearest_corner.push_back(corner);
    out.corner_deviation.push_back((m - corner).cwiseAbs().maxCoeff());
  }
  out.distinct_corners = true;
  out.min_pairwise_distance = out.result.final_means.size() > 1 ? std::numeric_limits<double>::infinity() : 0.0;
  for (std::size_t a = 0; a < out.nearest_corner.size(); ++a) {
    for (std::size_t b = a + 1; b < out.nearest_corner.size(); ++b) {
      if (out.nearest_corner[a] == out.nearest_corner[b]) out.distinct_corners = false;
      out.min_pairwise_distance =
          std::min(out.min_pairwise_distance, (out.result.final_means[a] - out.result.final_means[b]).norm());
    }
  }
  return out;
}

json toy_json(const ToyOutcome& outcome, const RunConfig& cfg) {
  json groups = json::array();
  for (std::size_t g = 0; g < outcome.result.final_means.size(); ++g) {
    const auto& m = outcome.result.final_means[g];
    groups.push_back({{"group", g + 1},
                      {"mean", {m.x(), m.y()}},
                      {"spread", outcome.result.final_spread[g]},
                      {"nearest_corner", {outcome.nearest_corner[g].x(), outcome.nearest_corner[g].y()}},
                      {"corner_deviation", outcome.corner_deviation[g]}});
  }
  return {{"seed", cfg.seed},
          {"config", config_json(cfg)},
          {"steps", outcome.result.steps},
          {"groups", groups},
          {"distinct_corners", outcome.distinct_corners},
          {"min_pairwise_distance", outcome.min_pairwise_distance}};
}

std::string dump_json(const json& doc) { return doc.dump(2) + "\n"; }

}  // namespace unilift::pipeline
