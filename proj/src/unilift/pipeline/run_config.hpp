#pragma once

#include "unilift/codec/label_codec.hpp"
#include "unilift/optim/trainer.hpp"
#include "unilift/synth/synth.hpp"

#include <cstdint>
#include <filesystem>
#include <string>
#include <utility>
#include <vector>

namespace unilift::pipeline {

struct BaselineConfig {
  double eps = 0.05;
  int min_pts = 64;
  std::size_t max_samples = 50000;
};

// Everything one run needs. A single seed feeds every stage; stages derive their
// own streams from it.
struct RunConfig {
  std::uint64_t seed = 7;
  synth::SynthSpec synth;
  optim::TrainConfig train;
  codec::DecodeConfig decode;
  BaselineConfig baseline;
  optim::ToyConfig toy;
  int toy_stride = 50;

  RunConfig();

  // `key = value` lines; '#' starts a comment. Unknown keys and malformed values throw
  // ErrorCode::Config naming the line.
  void load_text(const std::string& text, const std::string& origin = "config");
  void load_file(const std::filesystem::path& path);

  void set(const std::string& key, const std::string& value);
  std::string get(const std::string& key) const;
  static const std::vector<std::string>& keys();

  // Canonical `key = value` listing in keys() order.
  std::vector<std::pair<std::string, std::string>> entries() const;
  std::string to_text() const;
  std::vector<std::string> header_lines() const;  // entries formatted as "key = value"

  void validate() const;

  synth::SynthSpec synth_spec() const;
  optim::TrainConfig train_config() const;
  optim::ToyConfig toy_config() const;
};

}  // namespace unilift::pipeline
