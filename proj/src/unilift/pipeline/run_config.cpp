#include "unilift/pipeline/run_config.hpp"

#include "unilift/core/error.hpp"
#include "unilift/core/formats.hpp"

#include <charconv>
#include <fstream>
#include <functional>
#include <map>
#include <sstream>

namespace unilift::pipeline {

namespace {

std::string trim(const std::string& s) {
  const auto b = s.find_first_not_of(" \t\r");
  if (b == std::string::npos) return {};
  const auto e = s.find_last_not_of(" \t\r");
  return s.substr(b, e - b + 1);
}

template <typename Int>
Int parse_int(const std::string& key, const std::string& value) {
  Int out{};
  const auto* end = value.data() + value.size();
  const auto [ptr, ec] = std::from_chars(value.data(), end, out);
  if (ec != std::errc() || ptr != end) fail(ErrorCode::Config, key + ": expected an integer, got '" + value + "'");
  return out;
}

double parse_real(const std::string& key, const std::string& value) {
  try {
    return parse_double(value);
  } catch (const std::exception&) {
    fail(ErrorCode::Config, key + ": expected a number, got '" + value + "'");
  }
}

struct Field {
  std::function<std::string(const RunConfig&)> get;
  std::function<void(RunConfig&, const std::string&, const std::string&)> set;
};

#define UL_INT_FIELD(expr, type)                                                                  \
  Field {                                                                                         \
    [](const RunConfig& c) { return std::to_string(c.expr); },                                    \
        [](RunConfig& c, const std::string& k, const std::string& v) { c.expr = parse_int<type>(k, v); } \
  }
#define UL_REAL_FIELD(expr)                                                                       \
  Field {                                                                                         \
    [](const RunConfig& c) { return format_double(c.expr); },                                     \
        [](RunConfig& c, const std::string& k, const std::string& v) { c.expr = parse_real(k, v); } \
  }

const std::vector<std::pair<std::string, Field>>& field_table() {
  static const std::vector<std::pair<std::string, Field>> table = {
      {"seed", UL_INT_FIELD(seed, std::uint64_t)},
      {"objects", UL_INT_FIELD(synth.num_objects, int)},
      {"primitives_per_object", UL_INT_FIELD(synth.primitives_per_object, int)},
      {"classes", UL_INT_FIELD(synth.num_classes, int)},
      {"views", UL_INT_FIELD(synth.num_views, int)},
      {"heldout", UL_INT_FIELD(synth.num_heldout, int)},
      {"width", UL_INT_FIELD(synth.width, int)},
      {"height", UL_INT_FIELD(synth.height, int)},
      {"camera_radius", UL_REAL_FIELD(synth.camera_radius)},
      {"camera_elevation", UL_REAL_FIELD(synth.camera_elevation_deg)},
      {"field_of_view", UL_REAL_FIELD(synth.field_of_view_deg)},
      {"object_radius", UL_REAL_FIELD(synth.object_radius)},
      {"inconsistency",
       Field{[](const RunConfig& c) {
               return std::string(c.synth.inconsistency == synth::Inconsistency::None ? "none" : "permute_per_view");
             },
             [](RunConfig& c, const std::string& k, const std::string& v) {
               if (v == "none") {
                 c.synth.inconsistency = synth::Inconsistency::None;
               } else if (v == "permute_per_view") {
                 c.synth.inconsistency = synth::Inconsistency::PermutePerView;
               } else {
                 fail(ErrorCode::Config, k + ": expected none or permute_per_view, got '" + v + "'");
               }
             }}},
      {"embedding_dim",
       Field{[](const RunConfig& c) { return std::to_string(c.train.embedding_dim); },
             [](RunConfig& c, const std::string& k, const std::string& v) {
               const int d = parse_int<int>(k, v);
               c.train.embedding_dim = c.synth.embedding_dim = c.decode.embedding_dim = d;
             }}},
      {"semantic_dim",
       Field{[](const RunConfig& c) { return std::to_string(c.train.semantic_dim); },
             [](RunConfig& c, const std::string& k, const std::string& v) {
               c.train.semantic_dim = c.synth.semantic_dim = parse_int<int>(k, v);
             }}},
      {"iterations", UL_INT_FIELD(train.iterations, int)},
      {"learning_rate", UL_REAL_FIELD(train.learning_rate)},
      {"lambda_cluster", UL_REAL_FIELD(train.lambda_cluster)},
      {"lambda_triplet", UL_REAL_FIELD(train.lambda_triplet)},
      {"lambda_3d", UL_REAL_FIELD(train.lambda_3d)},
      {"margin", UL_REAL_FIELD(train.margin)},
      {"neighbor_threshold", UL_REAL_FIELD(train.neighbor_threshold)},
      {"late_loss_start",
       Field{[](const RunConfig& c) {
               return c.train.late_loss_start < 0 ? std::string("auto") : std::to_string(c.train.late_loss_start);
             },
             [](RunConfig& c, const std::string& k, const std::string& v) {
               c.train.late_loss_start = v == "auto" ? -1 : parse_int<int>(k, v);
               if (v != "auto" && c.train.late_loss_start < 0) fail(ErrorCode::Config, k + ": must be >= 0 or auto");
             }}},
      {"max_triplets", UL_INT_FIELD(train.max_triplets, int)},
      {"mask_fraction", UL_REAL_FIELD(train.mask_fraction)},
      {"mask_scale", UL_REAL_FIELD(train.mask_scale)},
      {"decode_threshold", UL_REAL_FIELD(decode.decode_threshold)},
      {"dbscan_eps", UL_REAL_FIELD(baseline.eps)},
      {"dbscan_min_pts", UL_INT_FIELD(baseline.min_pts, int)},
      {"dbscan_max_samples", UL_INT_FIELD(baseline.max_samples, std::size_t)},
      {"toy_points", UL_INT_FIELD(toy.num_points, int)},
      {"toy_groups", UL_INT_FIELD(toy.num_groups, int)},
      {"toy_steps", UL_INT_FIELD(toy.steps, int)},
      {"toy_learning_rate", UL_REAL_FIELD(toy.learning_rate)},
      {"toy_stride", UL_INT_FIELD(toy_stride, int)},
  };
  return table;
}

#undef UL_INT_FIELD
#undef UL_REAL_FIELD

const Field& find_field(const std::string& key) {
  for (const auto& [name, field] : field_table()) {
    if (name == key) return field;
  }
  fail(ErrorCode::Config, "unknown config key '" + key + "'");
}

}  // namespace

RunConfig::RunConfig() {
  synth.embedding_dim = train.embedding_dim;
  synth.semantic_dim = train.semantic_dim;
  decode.embedding_dim = train.embedding_dim;
}

void RunConfig::load_text(const std::string& text, const std::string& origin) {
  std::istringstream in(text);
  std::string line;
  int number = 0;
  while (std::getline(in, line)) {
    ++number;
    if (const auto hash = line.find('#'); hash != std::string::npos) line.erase(hash);
    line = trim(line);
    if (line.empty()) continue;
    const auto eq = line.find('=');
    if (eq == std::string::npos) {
      fail(ErrorCode::Config, origin + ":" + std::to_string(number) + ": expected 'key = value'");
    }
    const std::string key = trim(line.substr(0, eq));
    const std::string value = trim(line.substr(eq + 1));
    try {
      set(key, value);
    } catch (const Error& e) {
      fail(ErrorCode::Config, origin + ":" + std::to_string(number) + ": " + e.what());
    }
  }
}

void RunConfig::load_file(const std::filesystem::path& path) {
  std::ifstream in(path);
  if (!in) fail(ErrorCode::Config, "cannot read config file " + path.string());
  std::stringstream buffer;
  buffer << in.rdbuf();
  load_text(buffer.str(), path.string());
}

void RunConfig::set(const std::string& key, const std::string& value) { find_field(key).set(*this, key, value); }

std::string RunConfig::get(const std::string& key) const { return find_field(key).get(*this); }

const std::vector<std::string>& RunConfig::keys() {
  static const std::vector<std::string> names = [] {
    std::vector<std::string> out;
    for (const auto& [name, field] : field_table()) out.push_back(name);
    return out;
  }();
  return names;
}

std::vector<std::pair<std::string, std::string>> RunConfig::entries() const {
  std::vector<std::pair<std::string, std::string>> out;
  for (const auto& [name, field] : field_table()) out.emplace_back(name, field.get(*this));
  return out;
}

std::vector<std::string> RunConfig::header_lines() const {
  std::vector<std::string> out;
  for (const auto& [k, v] : entries()) out.push_back(k + " = " + v);
  return out;
}

std::string RunConfig::to_text() const {
  std::string out;
  for (const auto& line : header_lines()) out += line + "\n";
  return out;
}

void RunConfig::validate() const {
  synth::validate(synth_spec());
  optim::validate(train_config());
  codec::validate(decode);
  if (!(baseline.eps > 0.0)) fail(ErrorCode::Config, "dbscan_eps must be > 0");
  if (baseline.min_pts < 1) fail(ErrorCode::Config, "dbscan_min_pts must be >= 1");
  if (baseline.max_samples < 1) fail(ErrorCode::Config, "dbscan_max_samples must be >= 1");
  if (toy.num_points < 1 || toy.num_groups < 1 || toy.num_groups > toy.num_points || toy.steps < 0) {
    fail(ErrorCode::Config, "toy settings need 1 <= toy_groups <= toy_points and toy_steps >= 0");
  }
  if (!(toy.learning_rate > 0.0)) fail(ErrorCode::Config, "toy_learning_rate must be > 0");
  if (toy_stride < 1) fail(ErrorCode::Config, "toy_stride must be >= 1");
}

synth::SynthSpec RunConfig::synth_spec() const {
  auto s = synth;
  s.rng_seed = seed;
  return s;
}

optim::TrainConfig RunConfig::train_config() const {
  auto t = train;
  t.rng_seed = seed;
  return t;
}

optim::ToyConfig RunConfig::toy_config() const {
  auto t = toy;
  t.rng_seed = seed;
  return t;
}

}  // namespace unilift::pipeline
