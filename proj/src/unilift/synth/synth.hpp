#pragma once

#include "unilift/core/label_map.hpp"
#include "unilift/core/scene.hpp"

#include <cstdint>
#include <vector>

namespace unilift::synth {

enum class Inconsistency { None, PermutePerView };

struct SynthSpec {
  int num_objects = 8;
  int primitives_per_object = 24;
  int num_classes = 3;
  int num_views = 20;    // training ring
  int num_heldout = 5;   // evaluation ring, interleaved with the training ring
  int width = 128;
  int height = 128;
  double camera_radius = 2.5;
  double camera_elevation_deg = 40.0;
  double field_of_view_deg = 50.0;
  double object_radius = 0.12;
  int embedding_dim = 12;
  int semantic_dim = 12;
  std::uint64_t rng_seed = 0;
  Inconsistency inconsistency = Inconsistency::PermutePerView;
};

// Throws Config/Capacity errors for specs that cannot be generated or decoded.
void validate(const SynthSpec& spec);

struct SynthDataset {
  Scene scene;
  std::vector<int> primitive_object;  // 1-based object id per primitive
  std::vector<Camera> cameras;        // training views first, then held-out views
  std::vector<bool> heldout;
  std::vector<LabelMap> gt_instance;
  std::vector<LabelMap> gt_semantic;
  std::vector<Label> object_class;    // index = object id; entry 0 is background
};

SynthDataset generate(const SynthSpec& spec);

// Per-pixel argmax of per-object accumulated blend weight; background where coverage < 0.5.
LabelMap ground_truth_instance_mask(const Scene& scene, const std::vector<int>& primitive_object, const Camera& camera);

LabelMap semantic_from_instance(const LabelMap& instance, const std::vector<Label>& object_class);

struct PermutedMasks {
  std::vector<LabelMap> masks;
  // permutations[v][old] = new label; entry 0 stays 0. Diagnostics only.
  std::vector<std::vector<Label>> permutations;
};

// Remaps each view's object labels by an independent uniform permutation of 1..num_objects.
PermutedMasks make_inconsistent(const std::vector<LabelMap>& masks, int num_objects, std::uint64_t seed);

}  // namespace unilift::synth
