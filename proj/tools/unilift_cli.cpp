// Command-line front end. Everything goes through the C API in unilift/unilift.h.
#include "unilift/unilift.h"

#include <CLI11.hpp>

#include <cstdio>
#include <map>
#include <memory>
#include <optional>
#include <sstream>
#include <string>
#include <vector>

namespace {

using ConfigPtr = std::unique_ptr<ul_config, decltype(&ul_config_destroy)>;

int exit_code(ul_status status) {
  if (status == UL_OK) return 0;
  return status == UL_ERR_NUMERICAL ? 2 : 1;
}

int report(ul_status status, const char* what) {
  if (status != UL_OK) {
    std::fprintf(stderr, "unilift %s: %s: %s\n", what, ul_status_name(status), ul_last_error_message());
  }
  return exit_code(status);
}

std::vector<std::string> config_keys() {
  ul_config* raw = nullptr;
  if (ul_config_create(&raw) != UL_OK) return {};
  ConfigPtr cfg(raw, ul_config_destroy);
  std::size_t needed = 0;
  ul_config_to_text(cfg.get(), nullptr, 0, &needed);
  std::string text(needed, '\0');
  if (ul_config_to_text(cfg.get(), text.data(), text.size(), &needed) != UL_OK) return {};
  std::vector<std::string> keys;
  std::istringstream in(text.c_str());
  std::string line;
  while (std::getline(in, line)) {
    if (const auto eq = line.find(" = "); eq != std::string::npos) keys.push_back(line.substr(0, eq));
  }
  return keys;
}

std::string flag_name(const std::string& key) {
  std::string out = "--";
  for (char c : key) out += c == '_' ? '-' : c;
  return out;
}

// Each subcommand accepts --config plus one flag per config key; flags win over the file.
struct Overrides {
  std::string config_file;
  std::map<std::string, std::string> values;

  void attach(CLI::App* cmd, const std::vector<std::string>& keys) {
    cmd->add_option("--config", config_file, "key = value config file")->check(CLI::ExistingFile);
    for (const auto& key : keys) {
      cmd->add_option_function<std::string>(flag_name(key), [this, key](const std::string& v) { values[key] = v; },
                                            "override config key " + key);
    }
  }

  void alias(CLI::App* cmd, const std::string& flag, const std::string& key) {
    cmd->add_option_function<std::string>(flag, [this, key](const std::string& v) { values[key] = v; },
                                          "shorthand for " + flag_name(key));
  }

  ul_status build(ConfigPtr& out) const {
    ul_config* raw = nullptr;
    if (const auto s = ul_config_create(&raw); s != UL_OK) return s;
    out.reset(raw);
    if (!config_file.empty()) {
      if (const auto s = ul_config_load_file(out.get(), config_file.c_str()); s != UL_OK) return s;
    }
    for (const auto& [k, v] : values) {
      if (const auto s = ul_config_set(out.get(), k.c_str(), v.c_str()); s != UL_OK) return s;
    }
    return ul_config_validate(out.get());
  }
};

std::string get(const ul_config* cfg, const char* key) {
  char buffer[128] = {};
  std::size_t needed = 0;
  return ul_config_get(cfg, key, buffer, sizeof buffer, &needed) == UL_OK ? buffer : "?";
}

}  // namespace

int main(int argc, char** argv) {
  CLI::App app{"unilift: single-stage lifting of inconsistent 2D instance masks onto Gaussian splats"};
  app.require_subcommand(1);
  const auto keys = config_keys();

  std::string out_dir, data_dir, model_dir;
  bool compare_baseline = false;

  Overrides synth_opts, train_opts, decode_opts, eval_opts, toy_opts, compare_opts;

  auto* synth = app.add_subcommand("synth", "generate a synthetic scene, camera ring and masks");
  synth->add_option("--out", out_dir, "output directory")->required();
  synth_opts.attach(synth, keys);

  auto* train = app.add_subcommand("train", "optimize per-primitive embeddings on a dataset");
  train->add_option("--data", data_dir, "dataset directory or manifest")->required();
  train->add_option("--out", out_dir, "model output directory")->required();
  train_opts.attach(train, keys);

  auto* decode = app.add_subcommand("decode", "render held-out views and decode labels");
  decode->add_option("--data", data_dir, "dataset directory or manifest")->required();
  decode->add_option("--model", model_dir, "trained model directory")->required();
  decode->add_option("--out", out_dir, "output directory")->required();
  decode_opts.attach(decode, keys);

  auto* eval = app.add_subcommand("eval", "score decoded held-out views against consistent ground truth");
  eval->add_option("--data", data_dir, "dataset directory or manifest")->required();
  eval->add_option("--model", model_dir, "trained model directory")->required();
  eval->add_option("--out", out_dir, "output directory")->required();
  eval->add_flag("--compare-baseline", compare_baseline, "also run density clustering + nearest-centroid assignment");
  eval_opts.attach(eval, keys);

  auto* toy = app.add_subcommand("toy", "2-D cluster-loss experiment with fixed labels");
  toy->add_option("--out", out_dir, "output directory")->required();
  toy_opts.attach(toy, keys);
  toy_opts.alias(toy, "--points", "toy_points");
  toy_opts.alias(toy, "--groups", "toy_groups");
  toy_opts.alias(toy, "--steps", "toy_steps");

  auto* compare = app.add_subcommand("compare", "single-stage decode vs two-stage clustering: accuracy and timing");
  compare->add_option("--data", data_dir, "dataset directory or manifest")->required();
  compare->add_option("--model", model_dir, "trained model directory")->required();
  compare->add_option("--out", out_dir, "output directory")->required();
  compare_opts.attach(compare, keys);

  try {
    app.parse(argc, argv);
  } catch (const CLI::CallForHelp& e) {
    return app.exit(e);
  } catch (const CLI::CallForAllHelp& e) {
    return app.exit(e);
  } catch (const CLI::ParseError& e) {
    app.exit(e);
    return 1;
  }

  ConfigPtr cfg(nullptr, ul_config_destroy);
  auto build = [&](const Overrides& o) { return o.build(cfg); };

  if (synth->parsed()) {
    if (const auto s = build(synth_opts); s != UL_OK) return report(s, "synth");
    ul_synth_summary summary{};
    if (const auto s = ul_synth_write(cfg.get(), out_dir.c_str(), &summary); s != UL_OK) return report(s, "synth");
    std::printf("objects %d  views %d train + %d held-out  pixels %llu  seed %s\n", summary.objects, summary.training_views,
                summary.heldout_views, static_cast<unsigned long long>(summary.pixels), get(cfg.get(), "seed").c_str());
    std::printf("wrote %s/manifest.txt\n", out_dir.c_str());
    return 0;
  }
  if (train->parsed()) {
    if (const auto s = build(train_opts); s != UL_OK) return report(s, "train");
    ul_train_summary summary{};
    const auto s = ul_train(cfg.get(), data_dir.c_str(), out_dir.c_str(), &summary);
    if (s == UL_OK || s == UL_ERR_NUMERICAL) {
      std::printf("iterations %d  masked views %d of %d\n", summary.iterations, summary.masked_views, summary.training_views);
      std::printf("final loss: cluster %.6g  triplet %.6g  reg3d %.6g  total %.6g\n", summary.final_cluster,
                  summary.final_triplet, summary.final_reg3d, summary.final_total);
    }
    return report(s, "train");
  }
  if (decode->parsed()) {
    if (const auto s = build(decode_opts); s != UL_OK) return report(s, "decode");
    int written = 0;
    if (const auto s = ul_decode(cfg.get(), data_dir.c_str(), model_dir.c_str(), out_dir.c_str(), &written); s != UL_OK) {
      return report(s, "decode");
    }
    std::printf("decoded %d held-out views into %s\n", written, out_dir.c_str());
    return 0;
  }
  if (eval->parsed() || compare->parsed()) {
    const bool is_compare = compare->parsed();
    const char* what = is_compare ? "compare" : "eval";
    if (const auto s = build(is_compare ? compare_opts : eval_opts); s != UL_OK) return report(s, what);
    ul_eval_summary summary{};
    const auto s = is_compare ? ul_compare(cfg.get(), data_dir.c_str(), model_dir.c_str(), out_dir.c_str(), &summary)
                              : ul_evaluate(cfg.get(), data_dir.c_str(), model_dir.c_str(), out_dir.c_str(),
                                            compare_baseline ? 1 : 0, &summary);
    if (s != UL_OK) return report(s, what);
    std::printf("single-stage  PQ^scene %.1f  mIoU %.1f  collisions %d\n", 100.0 * summary.pq_scene, 100.0 * summary.miou,
                summary.collisions);
    if (summary.has_baseline) {
      std::printf("two-stage     PQ^scene %.1f  mIoU %.1f\n", 100.0 * summary.baseline_pq_scene, 100.0 * summary.baseline_miou);
      std::printf("wall time     decode %.3g s  cluster+assign %.3g s  (ratio %.1fx)\n", summary.decode_seconds,
                  summary.baseline_seconds, summary.decode_seconds > 0 ? summary.baseline_seconds / summary.decode_seconds : 0.0);
    }
    if (is_compare) std::printf("decode scaling slope ratio %.2f over 64^2, 128^2, 256^2\n", summary.scaling_slope_ratio);
    std::printf("wrote %s/metrics.json\n", out_dir.c_str());
    return 0;
  }
  if (toy->parsed()) {
    if (const auto s = build(toy_opts); s != UL_OK) return report(s, "toy");
    ul_toy_summary summary{};
    if (const auto s = ul_toy(cfg.get(), out_dir.c_str(), &summary); s != UL_OK) return report(s, "toy");
    if (summary.groups == 1) {
      std::printf("1 group: variance-only shrinkage, no repulsion; final spread %.3g\n", summary.max_final_spread);
    } else {
      std::printf("%d groups after %d steps: %s corners, max corner deviation %.3g, min pairwise distance %.3g\n",
                  summary.groups, summary.steps, summary.distinct_corners ? "distinct" : "shared",
                  summary.max_corner_deviation, summary.min_pairwise_distance);
    }
    std::printf("wrote %s/toy_trajectory.csv and toy_report.json\n", out_dir.c_str());
    return 0;
  }
  return 1;
}
