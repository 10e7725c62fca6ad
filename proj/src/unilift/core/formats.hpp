#pragma once

#include "unilift/core/label_map.hpp"
#include "unilift/core/scene.hpp"

#include <filesystem>
#include <iosfwd>
#include <string>
#include <vector>

namespace unilift {

// Shortest decimal text that parses back to the same double.
std::string format_double(double value);
double parse_double(const std::string& text);

// Plain-text scene format, documented in docs/formats.md:
//   UNILIFT_SCENE 1 <d> <d_s> <minx> <miny> <minz> <maxx> <maxy> <maxz>
//   # comment lines are allowed anywhere after the header
//   <px py pz> <sx sy sz> <qw qx qy qz> <opacity> <r g b> <d instance values> <d_s semantic values>
void write_scene(std::ostream& out, const Scene& scene, const std::vector<std::string>& comments = {});
Scene read_scene(std::istream& in);
void save_scene(const std::filesystem::path& path, const Scene& scene,
                const std::vector<std::string>& comments = {});
Scene load_scene(const std::filesystem::path& path);

// 16-bit binary PGM (P5, maxval 65535, big-endian samples). Labels above 65535 are rejected.
void write_pgm16(std::ostream& out, const LabelMap& mask, const std::vector<std::string>& comments = {});
LabelMap read_pgm16(std::istream& in, LabelKind kind);
void save_pgm16(const std::filesystem::path& path, const LabelMap& mask,
                const std::vector<std::string>& comments = {});
LabelMap load_pgm16(const std::filesystem::path& path, LabelKind kind);

// Raw embedding dump: 16-byte header {magic "UEMB", H, W, d as little-endian u32}
// followed by H*W*d little-endian float32 values. Coverage is not stored.
inline constexpr char kEmbeddingMagic[4] = {'U', 'E', 'M', 'B'};
void write_embedding_map(std::ostream& out, const EmbeddingMap& map);
EmbeddingMap read_embedding_map(std::istream& in);

// Camera as 18 tokens: W H fx fy cx cy r00 r01 r02 r10 r11 r12 r20 r21 r22 tx ty tz,
// where r and t are the rotation and translation of world_to_camera.
std::string format_camera(const Camera& camera);
Camera parse_camera(const std::vector<std::string>& tokens, std::size_t first);
inline constexpr std::size_t kCameraTokenCount = 18;

std::vector<std::string> split_whitespace(const std::string& line);

}  // namespace unilift
