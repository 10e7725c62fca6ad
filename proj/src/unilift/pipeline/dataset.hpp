#pragma once

#include "unilift/core/label_map.hpp"
#include "unilift/core/scene.hpp"
#include "unilift/losses/losses.hpp"
#include "unilift/pipeline/run_config.hpp"

#include <filesystem>
#include <string>
#include <vector>

namespace unilift::pipeline {

struct ViewRecord {
  Camera camera;
  bool heldout = false;
  LabelMap instance_input;  // what training sees (possibly permuted per view)
  LabelMap semantic_input;
  LabelMap instance_gt;     // consistent across views
  LabelMap semantic_gt;
};

struct Dataset {
  Scene scene;
  std::vector<ViewRecord> views;
  std::vector<Label> object_class;                // index = object id, entry 0 = background
  std::vector<std::vector<Label>> permutations;   // diagnostics only, may be empty
  std::uint64_t seed = 0;

  std::vector<int> training_views() const;
  std::vector<int> heldout_views() const;
};

// Generates the synthetic scene and applies the configured mask inconsistency.
Dataset make_dataset(const RunConfig& cfg);

// Writes manifest.txt, scene.txt, masks/*.pgm, permutations.txt and config.txt.
void save_dataset(const Dataset& dataset, const RunConfig& cfg, const std::filesystem::path& dir);

// Accepts the dataset directory or its manifest. Every referenced file must exist.
Dataset load_dataset(const std::filesystem::path& location);

struct Model {
  Scene scene;
  losses::LinearProjection proj_instance;
  losses::LinearProjection proj_semantic;
};

void save_projection(const std::filesystem::path& path, const losses::LinearProjection& proj,
                     const std::vector<std::string>& comments = {});
losses::LinearProjection load_projection(const std::filesystem::path& path);

// Model directory: scene.txt, projection_instance.txt, projection_semantic.txt.
void save_model(const Model& model, const std::vector<std::string>& comments, const std::filesystem::path& dir);
Model load_model(const std::filesystem::path& dir);

void write_text_file(const std::filesystem::path& path, const std::string& text);

}  // namespace unilift::pipeline
