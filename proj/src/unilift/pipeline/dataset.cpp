#include "unilift/pipeline/dataset.hpp"

#include "unilift/core/error.hpp"
#include "unilift/core/formats.hpp"
#include "unilift/core/numeric.hpp"

#include <cstdio>
#include <fstream>
#include <sstream>

namespace fs = std::filesystem;

namespace unilift::pipeline {

namespace {

constexpr const char* kManifestMagic = "UNILIFT_MANIFEST";
constexpr const char* kProjectionMagic = "UNILIFT_PROJECTION";
constexpr std::uint64_t kPermutationStream = 9;

std::string view_file(int view, const char* what) {
  char name[64];
  std::snprintf(name, sizeof name, "masks/view_%03d_%s.pgm", view, what);
  return name;
}

std::vector<std::string> with_prefix(const std::string& first, const std::vector<std::string>& rest) {
  std::vector<std::string> out{first};
  out.insert(out.end(), rest.begin(), rest.end());
  return out;
}

fs::path require_file(const fs::path& base, const std::string& relative) {
  const fs::path p = base / relative;
  if (!fs::is_regular_file(p)) fail(ErrorCode::Io, "missing file referenced by manifest: " + p.string());
  return p;
}

}  // namespace

std::vector<int> Dataset::training_views() const {
  std::vector<int> out;
  for (std::size_t v = 0; v < views.size(); ++v) {
    if (!views[v].heldout) out.push_back(static_cast<int>(v));
  }
  return out;
}

std::vector<int> Dataset::heldout_views() const {
  std::vector<int> out;
  for (std::size_t v = 0; v < views.size(); ++v) {
    if (views[v].heldout) out.push_back(static_cast<int>(v));
  }
  return out;
}

Dataset make_dataset(const RunConfig& cfg) {
  const auto spec = cfg.synth_spec();
  auto generated = synth::generate(spec);
  Dataset out;
  out.seed = cfg.seed;
  out.scene = std::move(generated.scene);
  out.object_class = generated.object_class;

  std::vector<LabelMap> inputs = generated.gt_instance;
  if (spec.inconsistency == synth::Inconsistency::PermutePerView) {
    auto permuted = synth::make_inconsistent(generated.gt_instance, spec.num_objects, mix_seed(cfg.seed, kPermutationStream));
    inputs = std::move(permuted.masks);
    out.permutations = std::move(permuted.permutations);
  }
  for (std::size_t v = 0; v < generated.cameras.size(); ++v) {
    ViewRecord rec;
    rec.camera = generated.cameras[v];
    rec.heldout = generated.heldout[v];
    rec.instance_input = std::move(inputs[v]);
    rec.semantic_input = generated.gt_semantic[v];
    rec.instance_gt = std::move(generated.gt_instance[v]);
    rec.semantic_gt = std::move(generated.gt_semantic[v]);
    out.views.push_back(std::move(rec));
  }
  return out;
}

void write_text_file(const fs::path& path, const std::string& text) {
  std::ofstream out(path, std::ios::binary);
  if (!out) fail(ErrorCode::Io, "cannot write " + path.string());
  out << text;
  if (!out) fail(ErrorCode::Io, "failed writing " + path.string());
}

void save_dataset(const Dataset& dataset, const RunConfig& cfg, const fs::path& dir) {
  std::error_code ec;
  fs::create_directories(dir / "masks", ec);
  if (ec) fail(ErrorCode::Io, "cannot create " + (dir / "masks").string() + ": " + ec.message());
  const auto header = cfg.header_lines();

  std::ostringstream manifest;
  manifest << kManifestMagic << " 1\n";
  for (const auto& line : header) manifest << "# " << line << "\n";
  manifest << "seed " << dataset.seed << "\n";
  manifest << "scene scene.txt\n";
  manifest << "objects " << dataset.object_class.size() - 1 << "\n";
  for (std::size_t obj = 1; obj < dataset.object_class.size(); ++obj) {
    manifest << "object_class " << obj << " " << dataset.object_class[obj] << "\n";
  }
  for (std::size_t v = 0; v < dataset.views.size(); ++v) {
    const auto& rec = dataset.views[v];
    const int id = static_cast<int>(v);
    const std::string view_tag = "view " + std::to_string(id);
    save_pgm16(dir / view_file(id, "instance"), rec.instance_input, with_prefix(view_tag + " instance input", header));
    save_pgm16(dir / view_file(id, "semantic"), rec.semantic_input, with_prefix(view_tag + " semantic input", header));
    save_pgm16(dir / view_file(id, "instance_gt"), rec.instance_gt, with_prefix(view_tag + " instance ground truth", header));
    save_pgm16(dir / view_file(id, "semantic_gt"), rec.semantic_gt, with_prefix(view_tag + " semantic ground truth", header));
    manifest << "view " << id << (rec.heldout ? " heldout " : " train ") << view_file(id, "instance") << " "
             << view_file(id, "semantic") << " " << view_file(id, "instance_gt") << " " << view_file(id, "semantic_gt")
             << " " << format_camera(rec.camera) << "\n";
  }
  save_scene(dir / "scene.txt", dataset.scene, header);
  write_text_file(dir / "manifest.txt", manifest.str());

  std::ostringstream perms;
  for (const auto& line : header) perms << "# " << line << "\n";
  perms << "# view: label mapping old->new for labels 1..n (diagnostics only)\n";
  for (std::size_t v = 0; v < dataset.permutations.size(); ++v) {
    perms << v;
    for (std::size_t l = 1; l < dataset.permutations[v].size(); ++l) perms << " " << dataset.permutations[v][l];
    perms << "\n";
  }
  write_text_file(dir / "permutations.txt", perms.str());
  write_text_file(dir / "config.txt", cfg.to_text());
}

Dataset load_dataset(const fs::path& location) {
  const fs::path manifest_path = fs::is_directory(location) ? location / "manifest.txt" : location;
  std::ifstream in(manifest_path);
  if (!in) fail(ErrorCode::Io, "cannot read manifest " + manifest_path.string());
  const fs::path base = manifest_path.parent_path();

  Dataset out;
  std::string line;
  int number = 0;
  bool seen_magic = false;
  int objects = -1;
  auto bad = [&](const std::string& what) {
    fail(ErrorCode::Io, manifest_path.string() + ":" + std::to_string(number) + ": " + what);
  };
  while (std::getline(in, line)) {
    ++number;
    if (line.empty() || line[0] == '#') continue;
    const auto tok = split_whitespace(line);
    if (!seen_magic) {
      if (tok.size() != 2 || tok[0] != kManifestMagic || tok[1] != "1") bad("not a version 1 manifest");
      seen_magic = true;
      continue;
    }
    const std::string& kind = tok[0];
    if (kind == "seed" && tok.size() == 2) {
      out.seed = std::stoull(tok[1]);
    } else if (kind == "scene" && tok.size() == 2) {
      out.scene = load_scene(require_file(base, tok[1]));
    } else if (kind == "objects" && tok.size() == 2) {
      objects = std::stoi(tok[1]);
      if (objects < 1) bad("objects must be >= 1");
      out.object_class.assign(static_cast<std::size_t>(objects) + 1, kBackground);
    } else if (kind == "object_class" && tok.size() == 3) {
      const long obj = std::stol(tok[1]);
      if (obj < 1 || obj > objects) bad("object id out of range");
      out.object_class[obj] = static_cast<Label>(std::stoul(tok[2]));
    } else if (kind == "view" && tok.size() == 7 + kCameraTokenCount) {
      if (std::stoi(tok[1]) != static_cast<int>(out.views.size())) bad("views must be listed in order");
      if (tok[2] != "train" && tok[2] != "heldout") bad("view split must be train or heldout");
      ViewRecord rec;
      rec.heldout = tok[2] == "heldout";
      rec.instance_input = load_pgm16(require_file(base, tok[3]), LabelKind::Instance);
      rec.semantic_input = load_pgm16(require_file(base, tok[4]), LabelKind::Semantic);
      rec.instance_gt = load_pgm16(require_file(base, tok[5]), LabelKind::Instance);
      rec.semantic_gt = load_pgm16(require_file(base, tok[6]), LabelKind::Semantic);
      rec.camera = parse_camera(tok, 7);
      for (const LabelMap* m : {&rec.instance_input, &rec.semantic_input, &rec.instance_gt, &rec.semantic_gt}) {
        if (m->width != rec.camera.width || m->height != rec.camera.height) bad("mask size does not match the camera");
      }
      out.views.push_back(std::move(rec));
    } else {
      bad("unrecognised record '" + kind + "'");
    }
  }
  if (!seen_magic) fail(ErrorCode::Io, manifest_path.string() + ": empty manifest");
  if (out.scene.primitives.empty()) fail(ErrorCode::Io, manifest_path.string() + ": no scene record");
  if (out.views.empty()) fail(ErrorCode::Io, manifest_path.string() + ": no views");
  return out;
}

void save_projection(const fs::path& path, const losses::LinearProjection& proj, const std::vector<std::string>& comments) {
  std::ostringstream out;
  out << kProjectionMagic << " 1 " << proj.dim << "\n";
  for (const auto& c : comments) out << "# " << c << "\n";
  for (int r = 0; r < proj.dim; ++r) {
    for (int c = 0; c < proj.dim; ++c) out << (c ? " " : "") << format_double(proj.matrix[static_cast<std::size_t>(r) * proj.dim + c]);
    out << "\n";
  }
  write_text_file(path, out.str());
}

losses::LinearProjection load_projection(const fs::path& path) {
  std::ifstream in(path);
  if (!in) fail(ErrorCode::Io, "cannot read projection " + path.string());
  std::string line;
  std::vector<std::string> values;
  int dim = -1;
  while (std::getline(in, line)) {
    if (line.empty() || line[0] == '#') continue;
    const auto tok = split_whitespace(line);
    if (dim < 0) {
      if (tok.size() != 3 || tok[0] != kProjectionMagic || tok[1] != "1") {
        fail(ErrorCode::Io, path.string() + ": not a version 1 projection file");
      }
      dim = std::stoi(tok[2]);
      if (dim < 1) fail(ErrorCode::Io, path.string() + ": bad dimension");
      continue;
    }
    values.insert(values.end(), tok.begin(), tok.end());
  }
  if (dim < 1 || values.size() != static_cast<std::size_t>(dim) * dim) {
    fail(ErrorCode::Io, path.string() + ": expected a square matrix");
  }
  auto proj = losses::LinearProjection::identity(dim);
  for (int r = 0; r < dim; ++r) {
    for (int c = 0; c < dim; ++c) proj.matrix[static_cast<std::size_t>(r) * dim + c] = parse_double(values[static_cast<std::size_t>(r) * dim + c]);
  }
  return proj;
}

void save_model(const Model& model, const std::vector<std::string>& comments, const fs::path& dir) {
  std::error_code ec;
  fs::create_directories(dir, ec);
  if (ec) fail(ErrorCode::Io, "cannot create " + dir.string() + ": " + ec.message());
  save_scene(dir / "scene.txt", model.scene, comments);
  save_projection(dir / "projection_instance.txt", model.proj_instance, comments);
  save_projection(dir / "projection_semantic.txt", model.proj_semantic, comments);
}

Model load_model(const fs::path& dir) {
  for (const char* name : {"scene.txt", "projection_instance.txt", "projection_semantic.txt"}) {
    if (!fs::is_regular_file(dir / name)) fail(ErrorCode::Io, "trained model is missing " + (dir / name).string());
  }
  Model model;
  model.scene = load_scene(dir / "scene.txt");
  model.proj_instance = load_projection(dir / "projection_instance.txt");
  model.proj_semantic = load_projection(dir / "projection_semantic.txt");
  return model;
}

}  // namespace unilift::pipeline
