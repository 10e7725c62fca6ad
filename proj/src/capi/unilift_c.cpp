#include "unilift/unilift.h"

#include "unilift/core/error.hpp"
#include "unilift/core/formats.hpp"
#include "unilift/pipeline/pipeline.hpp"

#include <algorithm>
#include <cstdio>
#include <cstring>
#include <fstream>
#include <new>

namespace fs = std::filesystem;
using namespace unilift;

struct ul_config {
  pipeline::RunConfig cfg;
};

namespace {

thread_local std::string g_last_error;

ul_status to_status(ErrorCode code) {
  switch (code) {
    case ErrorCode::InvalidArgument: return UL_ERR_INVALID_ARGUMENT;
    case ErrorCode::Config: return UL_ERR_CONFIG;
    case ErrorCode::Io: return UL_ERR_IO;
    case ErrorCode::Numerical: return UL_ERR_NUMERICAL;
    case ErrorCode::Infeasible: return UL_ERR_INFEASIBLE;
    case ErrorCode::Capacity: return UL_ERR_CAPACITY;
  }
  return UL_ERR_INTERNAL;
}

template <typename F>
ul_status guarded(F&& body) {
  try {
    body();
    return UL_OK;
  } catch (const Error& e) {
    g_last_error = e.what();
    return to_status(e.code());
  } catch (const std::bad_alloc&) {
    g_last_error = "out of memory";
    return UL_ERR_INTERNAL;
  } catch (const std::exception& e) {
    g_last_error = e.what();
    return UL_ERR_INTERNAL;
  } catch (...) {
    g_last_error = "unknown error";
    return UL_ERR_INTERNAL;
  }
}

void require(const void* p, const char* what) {
  if (!p) fail(ErrorCode::InvalidArgument, std::string(what) + " must not be null");
}

void copy_out(const std::string& text, char* buffer, std::size_t capacity, std::size_t* needed) {
  if (needed) *needed = text.size() + 1;
  if (!buffer || capacity < text.size() + 1) {
    fail(ErrorCode::InvalidArgument, "buffer too small: need " + std::to_string(text.size() + 1) + " bytes");
  }
  std::memcpy(buffer, text.c_str(), text.size() + 1);
}

pipeline::RunConfig validated(const ul_config* config) {
  require(config, "config");
  config->cfg.validate();
  return config->cfg;
}

void fill(ul_eval_summary* summary, const pipeline::Evaluation& eval, double slope_ratio) {
  if (!summary) return;
  *summary = ul_eval_summary{};
  summary->pq_scene = eval.single_stage.pq.pq;
  summary->miou = eval.single_stage.miou;
  summary->collisions = eval.total_collisions;
  summary->has_baseline = eval.has_baseline ? 1 : 0;
  summary->baseline_pq_scene = eval.baseline.pq.pq;
  summary->baseline_miou = eval.baseline.miou;
  summary->decode_seconds = eval.timing.decode_seconds;
  summary->baseline_seconds = eval.timing.baseline_seconds;
  summary->scaling_slope_ratio = slope_ratio;
}

void make_dir(const fs::path& dir) {
  std::error_code ec;
  fs::create_directories(dir, ec);
  if (ec) fail(ErrorCode::Io, "cannot create " + dir.string() + ": " + ec.message());
}

}  // namespace

extern "C" {

UL_API const char* ul_version(void) { return "1.0.0"; }

UL_API const char* ul_status_name(ul_status status) {
  switch (status) {
    case UL_OK: return "ok";
    case UL_ERR_INVALID_ARGUMENT: return "invalid argument";
    case UL_ERR_CONFIG: return "config error";
    case UL_ERR_IO: return "i/o error";
    case UL_ERR_NUMERICAL: return "numerical failure";
    case UL_ERR_INFEASIBLE: return "infeasible";
    case UL_ERR_CAPACITY: return "capacity exceeded";
    case UL_ERR_INTERNAL: return "internal error";
  }
  return "unknown status";
}

UL_API const char* ul_last_error_message(void) { return g_last_error.c_str(); }

UL_API ul_status ul_config_create(ul_config** out) {
  return guarded([&] {
    require(out, "out");
    *out = new ul_config();
  });
}

UL_API void ul_config_destroy(ul_config* config) { delete config; }

UL_API ul_status ul_config_set(ul_config* config, const char* key, const char* value) {
  return guarded([&] {
    require(config, "config");
    require(key, "key");
    require(value, "value");
    config->cfg.set(key, value);
  });
}

UL_API ul_status ul_config_load_file(ul_config* config, const char* path) {
  return guarded([&] {
    require(config, "config");
    require(path, "path");
    config->cfg.load_file(path);
  });
}

UL_API ul_status ul_config_get(const ul_config* config, const char* key, char* buffer, size_t capacity, size_t* needed) {
  return guarded([&] {
    require(config, "config");
    require(key, "key");
    copy_out(config->cfg.get(key), buffer, capacity, needed);
  });
}

UL_API ul_status ul_config_to_text(const ul_config* config, char* buffer, size_t capacity, size_t* needed) {
  return guarded([&] {
    require(config, "config");
    copy_out(config->cfg.to_text(), buffer, capacity, needed);
  });
}

UL_API ul_status ul_config_validate(const ul_config* config) {
  return guarded([&] { validated(config); });
}

UL_API ul_status ul_synth_write(const ul_config* config, const char* out_dir, ul_synth_summary* summary) {
  return guarded([&] {
    const auto cfg = validated(config);
    require(out_dir, "out_dir");
    const auto dataset = pipeline::make_dataset(cfg);
    pipeline::save_dataset(dataset, cfg, out_dir);
    if (summary) {
      const auto s = pipeline::summarize(dataset);
      *summary = ul_synth_summary{s.objects, s.training_views, s.heldout_views, s.pixels};
    }
  });
}

UL_API ul_status ul_train(const ul_config* config, const char* dataset, const char* out_dir, ul_train_summary* summary) {
  return guarded([&] {
    const auto cfg = validated(config);
    require(dataset, "dataset");
    require(out_dir, "out_dir");
    const auto data = pipeline::load_dataset(dataset);
    const auto outcome = pipeline::train_on_dataset(cfg, data);
    if (summary) {
      *summary = ul_train_summary{};
      summary->iterations = static_cast<int>(outcome.history.size());
      summary->training_views = static_cast<int>(data.training_views().size());
      summary->masked_views = static_cast<int>(outcome.masked_views.size());
      if (!outcome.history.empty()) {
        const auto& last = outcome.history.back();
        summary->final_cluster = last.cluster;
        summary->final_triplet = last.triplet;
        summary->final_reg3d = last.reg3d;
        summary->final_total = last.total;
      }
    }
    pipeline::save_train_outputs(outcome, cfg, out_dir);
  });
}

UL_API ul_status ul_decode(const ul_config* config, const char* dataset, const char* model_dir, const char* out_dir,
                           int* views_written) {
  return guarded([&] {
    const auto cfg = validated(config);
    require(dataset, "dataset");
    require(model_dir, "model_dir");
    require(out_dir, "out_dir");
    const auto data = pipeline::load_dataset(dataset);
    const auto model = pipeline::load_model(model_dir);
    const auto rendered = pipeline::render_views(model, data, data.heldout_views());
    const auto decoded = pipeline::decode_views(rendered, cfg.decode);
    const fs::path dir(out_dir);
    make_dir(dir);
    const auto header = cfg.header_lines();
    for (std::size_t i = 0; i < decoded.size(); ++i) {
      char stem[32];
      std::snprintf(stem, sizeof stem, "view_%03d", decoded[i].view);
      const std::string s(stem);
      save_pgm16(dir / (s + "_instance.pgm"), decoded[i].instance, header);
      save_pgm16(dir / (s + "_semantic.pgm"), decoded[i].semantic, header);
      for (const auto& [map, suffix] : {std::pair{&rendered[i].instance, "_instance.emb"}, std::pair{&rendered[i].semantic, "_semantic.emb"}}) {
        std::ofstream out(dir / (s + suffix), std::ios::binary);
        if (!out) fail(ErrorCode::Io, "cannot write " + (dir / (s + suffix)).string());
        write_embedding_map(out, *map);
      }
    }
    pipeline::write_text_file(dir / "config.txt", cfg.to_text());
    if (views_written) *views_written = static_cast<int>(decoded.size());
  });
}

UL_API ul_status ul_evaluate(const ul_config* config, const char* dataset, const char* model_dir, const char* out_dir,
                             int compare_baseline, ul_eval_summary* summary) {
  return guarded([&] {
    const auto cfg = validated(config);
    require(dataset, "dataset");
    require(model_dir, "model_dir");
    require(out_dir, "out_dir");
    const auto data = pipeline::load_dataset(dataset);
    const auto model = pipeline::load_model(model_dir);
    const auto eval = pipeline::evaluate(cfg, model, data, compare_baseline != 0);
    const fs::path dir(out_dir);
    make_dir(dir);
    pipeline::write_text_file(dir / "metrics.json", pipeline::dump_json(pipeline::metrics_json(eval, cfg)));
    if (eval.has_baseline) {
      pipeline::write_text_file(dir / "timings.json", pipeline::dump_json(pipeline::timings_json(eval, nullptr, cfg)));
    }
    fill(summary, eval, 0.0);
  });
}

UL_API ul_status ul_compare(const ul_config* config, const char* dataset, const char* model_dir, const char* out_dir,
                            ul_eval_summary* summary) {
  return guarded([&] {
    const auto cfg = validated(config);
    require(dataset, "dataset");
    require(model_dir, "model_dir");
    require(out_dir, "out_dir");
    const auto data = pipeline::load_dataset(dataset);
    const auto model = pipeline::load_model(model_dir);
    const auto eval = pipeline::evaluate(cfg, model, data, true);
    const auto scaling = pipeline::decode_scaling(cfg, model, data);
    const fs::path dir(out_dir);
    make_dir(dir);
    pipeline::write_text_file(dir / "metrics.json", pipeline::dump_json(pipeline::metrics_json(eval, cfg)));
    pipeline::write_text_file(dir / "timings.json", pipeline::dump_json(pipeline::timings_json(eval, &scaling, cfg)));
    fill(summary, eval, scaling.slope_ratio);
  });
}

UL_API ul_status ul_toy(const ul_config* config, const char* out_dir, ul_toy_summary* summary) {
  return guarded([&] {
    const auto cfg = validated(config);
    require(out_dir, "out_dir");
    const auto outcome = pipeline::run_toy(cfg);
    const fs::path dir(out_dir);
    make_dir(dir);
    pipeline::write_text_file(dir / "toy_trajectory.csv",
                              optim::toy_trajectory_csv(outcome.result, cfg.toy_stride, cfg.header_lines()));
    pipeline::write_text_file(dir / "toy_report.json", pipeline::dump_json(pipeline::toy_json(outcome, cfg)));
    if (summary) {
      *summary = ul_toy_summary{};
      summary->groups = outcome.result.num_groups;
      summary->steps = outcome.result.steps;
      summary->distinct_corners = outcome.distinct_corners ? 1 : 0;
      summary->min_pairwise_distance = outcome.min_pairwise_distance;
      for (double d : outcome.corner_deviation) summary->max_corner_deviation = std::max(summary->max_corner_deviation, d);
      for (double v : outcome.result.final_spread) summary->max_final_spread = std::max(summary->max_final_spread, v);
    }
  });
}

UL_API ul_status ul_decode_embedding_buffer(const double* values, const double* coverage, int width, int height, int dim,
                                            double threshold, uint32_t* labels) {
  return guarded([&] {
    require(values, "values");
    require(labels, "labels");
    if (width <= 0 || height <= 0 || dim <= 0) fail(ErrorCode::InvalidArgument, "width, height and dim must be positive");
    codec::DecodeConfig cfg{threshold, dim};
    codec::validate(cfg);
    EmbeddingMap map(width, height, dim);
    std::copy(values, values + map.values.size(), map.values.begin());
    if (coverage) {
      map.coverage.assign(coverage, coverage + map.pixel_count());
    } else {
      map.coverage.assign(map.pixel_count(), 1.0);
    }
    const auto decoded = codec::decode_map(map, cfg);
    std::copy(decoded.labels.begin(), decoded.labels.end(), labels);
  });
}

}  // extern "C"
