#include "unilift/core/formats.hpp"

#include "unilift/core/error.hpp"

#include <array>
#include <charconv>
#include <cstring>
#include <cctype>
#include <fstream>
#include <istream>
#include <ostream>
#include <sstream>

namespace unilift {

std::string format_double(double value) {
  std::array<char, 64> buf{};
  auto [end, ec] = std::to_chars(buf.data(), buf.data() + buf.size(), value);
  if (ec != std::errc()) fail(ErrorCode::InvalidArgument, "cannot format number");
  return std::string(buf.data(), end);
}

double parse_double(const std::string& text) {
  double value = 0.0;
  const char* first = text.data();
  const char* last = text.data() + text.size();
  auto [ptr, ec] = std::from_chars(first, last, value);
  if (ec != std::errc() || ptr != last) fail(ErrorCode::Io, "malformed number '" + text + "'");
  return value;
}

std::vector<std::string> split_whitespace(const std::string& line) {
  std::vector<std::string> out;
  std::istringstream in(line);
  std::string tok;
  while (in >> tok) out.push_back(tok);
  return out;
}

namespace {

constexpr const char* kSceneMagic = "UNILIFT_SCENE";

std::ofstream open_out(const std::filesystem::path& path) {
  std::ofstream out(path, std::ios::binary);
  if (!out) fail(ErrorCode::Io, "cannot open '" + path.string() + "' for writing");
  return out;
}

std::ifstream open_in(const std::filesystem::path& path) {
  std::ifstream in(path, std::ios::binary);
  if (!in) fail(ErrorCode::Io, "cannot open '" + path.string() + "'");
  return in;
}

void put_u32le(std::ostream& out, std::uint32_t v) {
  const unsigned char b[4] = {static_cast<unsigned char>(v), static_cast<unsigned char>(v >> 8),
                              static_cast<unsigned char>(v >> 16), static_cast<unsigned char>(v >> 24)};
  out.write(reinterpret_cast<const char*>(b), 4);
}

std::uint32_t get_u32le(std::istream& in) {
  unsigned char b[4];
  if (!in.read(reinterpret_cast<char*>(b), 4)) fail(ErrorCode::Io, "truncated embedding header");
  return static_cast<std::uint32_t>(b[0]) | (static_cast<std::uint32_t>(b[1]) << 8) |
         (static_cast<std::uint32_t>(b[2]) << 16) | (static_cast<std::uint32_t>(b[3]) << 24);
}

// PGM header tokens, skipping '#' comments.
std::string pgm_token(std::istream& in) {
  std::string tok;
  int c;
  while ((c = in.get()) != EOF) {
    if (c == '#') {
      while ((c = in.get()) != EOF && c != '\n') {
      }
      continue;
    }
    if (std::isspace(c)) {
      if (!tok.empty()) return tok;
      continue;
    }
    tok.push_back(static_cast<char>(c));
  }
  if (tok.empty()) fail(ErrorCode::Io, "truncated PGM header");
  return tok;
}

int parse_int(const std::string& text) {
  int value = 0;
  auto [ptr, ec] = std::from_chars(text.data(), text.data() + text.size(), value);
  if (ec != std::errc() || ptr != text.data() + text.size()) fail(ErrorCode::Io, "malformed integer '" + text + "'");
  return value;
}

}  // namespace

void write_scene(std::ostream& out, const Scene& scene, const std::vector<std::string>& comments) {
  out << kSceneMagic << " 1 " << scene.embedding_dim << ' ' << scene.semantic_dim;
  for (int k = 0; k < 3; ++k) out << ' ' << format_double(scene.bound.min[k]);
  for (int k = 0; k < 3; ++k) out << ' ' << format_double(scene.bound.max[k]);
  out << '\n';
  for (const auto& c : comments) out << "# " << c << '\n';
  for (const auto& p : scene.primitives) {
    std::string line;
    auto put = [&line](double v) {
      if (!line.empty()) line.push_back(' ');
      line += format_double(v);
    };
    for (int k = 0; k < 3; ++k) put(p.position[k]);
    for (int k = 0; k < 3; ++k) put(p.scale[k]);
    put(p.rotation.w());
    put(p.rotation.x());
    put(p.rotation.y());
    put(p.rotation.z());
    put(p.opacity);
    for (int k = 0; k < 3; ++k) put(p.color[k]);
    for (double v : p.instance_embedding) put(v);
    for (double v : p.semantic_embedding) put(v);
    out << line << '\n';
  }
}

Scene read_scene(std::istream& in) {
  std::string line;
  if (!std::getline(in, line)) fail(ErrorCode::Io, "empty scene file");
  const auto header = split_whitespace(line);
  if (header.size() != 10 || header[0] != kSceneMagic || header[1] != "1") {
    fail(ErrorCode::Io, "bad scene header: '" + line + "'");
  }
  Scene scene;
  scene.embedding_dim = parse_int(header[2]);
  scene.semantic_dim = parse_int(header[3]);
  if (scene.embedding_dim <= 0 || scene.semantic_dim <= 0) fail(ErrorCode::Io, "scene dimensions must be positive");
  for (int k = 0; k < 3; ++k) {
    scene.bound.min[k] = parse_double(header[4 + k]);
    scene.bound.max[k] = parse_double(header[7 + k]);
  }
  const std::size_t expected = 14 + scene.embedding_dim + scene.semantic_dim;
  std::size_t line_no = 1;
  while (std::getline(in, line)) {
    ++line_no;
    if (line.empty() || line[0] == '#') continue;
    const auto tok = split_whitespace(line);
    if (tok.empty()) continue;
    if (tok.size() != expected) {
      fail(ErrorCode::Io, "scene line " + std::to_string(line_no) + ": expected " + std::to_string(expected) +
                              " fields, got " + std::to_string(tok.size()));
    }
    GaussianPrimitive p;
    std::size_t i = 0;
    auto next = [&] { return parse_double(tok[i++]); };
    for (int k = 0; k < 3; ++k) p.position[k] = next();
    for (int k = 0; k < 3; ++k) p.scale[k] = next();
    const double qw = next(), qx = next(), qy = next(), qz = next();
    p.rotation = Eigen::Quaterniond(qw, qx, qy, qz);
    p.opacity = next();
    for (int k = 0; k < 3; ++k) p.color[k] = next();
    p.instance_embedding.resize(scene.embedding_dim);
    for (auto& v : p.instance_embedding) v = next();
    p.semantic_embedding.resize(scene.semantic_dim);
    for (auto& v : p.semantic_embedding) v = next();
    scene.primitives.push_back(std::move(p));
  }
  return scene;
}

void save_scene(const std::filesystem::path& path, const Scene& scene, const std::vector<std::string>& comments) {
  auto out = open_out(path);
  write_scene(out, scene, comments);
  if (!out) fail(ErrorCode::Io, "failed writing '" + path.string() + "'");
}

Scene load_scene(const std::filesystem::path& path) {
  auto in = open_in(path);
  return read_scene(in);
}

void write_pgm16(std::ostream& out, const LabelMap& mask, const std::vector<std::string>& comments) {
  for (Label l : mask.labels) {
    if (l > 65535) {
      fail(ErrorCode::Capacity, "label " + std::to_string(l) + " does not fit a 16-bit PGM (max 65535)");
    }
  }
  out << "P5\n";
  for (const auto& c : comments) out << "# " << c << '\n';
  out << mask.width << ' ' << mask.height << "\n65535\n";
  std::vector<unsigned char> bytes(mask.labels.size() * 2);
  for (std::size_t i = 0; i < mask.labels.size(); ++i) {
    bytes[2 * i] = static_cast<unsigned char>(mask.labels[i] >> 8);
    bytes[2 * i + 1] = static_cast<unsigned char>(mask.labels[i] & 0xff);
  }
  out.write(reinterpret_cast<const char*>(bytes.data()), static_cast<std::streamsize>(bytes.size()));
}

LabelMap read_pgm16(std::istream& in, LabelKind kind) {
  if (pgm_token(in) != "P5") fail(ErrorCode::Io, "not a binary PGM (P5)");
  const int w = parse_int(pgm_token(in));
  const int h = parse_int(pgm_token(in));
  const int maxval = parse_int(pgm_token(in));
  if (w <= 0 || h <= 0) fail(ErrorCode::Io, "PGM dimensions must be positive");
  if (maxval != 65535) fail(ErrorCode::Io, "expected 16-bit PGM (maxval 65535), got maxval " + std::to_string(maxval));
  LabelMap mask(w, h, kind);
  std::vector<unsigned char> bytes(mask.labels.size() * 2);
  if (!in.read(reinterpret_cast<char*>(bytes.data()), static_cast<std::streamsize>(bytes.size()))) {
    fail(ErrorCode::Io, "truncated PGM pixel data");
  }
  for (std::size_t i = 0; i < mask.labels.size(); ++i) {
    mask.labels[i] = (static_cast<Label>(bytes[2 * i]) << 8) | bytes[2 * i + 1];
  }
  return mask;
}

void save_pgm16(const std::filesystem::path& path, const LabelMap& mask, const std::vector<std::string>& comments) {
  auto out = open_out(path);
  write_pgm16(out, mask, comments);
  if (!out) fail(ErrorCode::Io, "failed writing '" + path.string() + "'");
}

LabelMap load_pgm16(const std::filesystem::path& path, LabelKind kind) {
  auto in = open_in(path);
  return read_pgm16(in, kind);
}

void write_embedding_map(std::ostream& out, const EmbeddingMap& map) {
  out.write(kEmbeddingMagic, 4);
  put_u32le(out, static_cast<std::uint32_t>(map.height));
  put_u32le(out, static_cast<std::uint32_t>(map.width));
  put_u32le(out, static_cast<std::uint32_t>(map.dim));
  std::vector<unsigned char> bytes(map.values.size() * 4);
  for (std::size_t i = 0; i < map.values.size(); ++i) {
    const float f = static_cast<float>(map.values[i]);
    std::uint32_t bits;
    std::memcpy(&bits, &f, 4);
    for (int b = 0; b < 4; ++b) bytes[4 * i + b] = static_cast<unsigned char>(bits >> (8 * b));
  }
  out.write(reinterpret_cast<const char*>(bytes.data()), static_cast<std::streamsize>(bytes.size()));
}

EmbeddingMap read_embedding_map(std::istream& in) {
  char magic[4];
  if (!in.read(magic, 4) || std::memcmp(magic, kEmbeddingMagic, 4) != 0) fail(ErrorCode::Io, "bad embedding map magic");
  const auto h = get_u32le(in);
  const auto w = get_u32le(in);
  const auto d = get_u32le(in);
  if (h == 0 || w == 0 || d == 0 || h > 1u << 15 || w > 1u << 15 || d > 4096) fail(ErrorCode::Io, "bad embedding map dimensions");
  EmbeddingMap map(static_cast<int>(w), static_cast<int>(h), static_cast<int>(d));
  std::vector<unsigned char> bytes(map.values.size() * 4);
  if (!in.read(reinterpret_cast<char*>(bytes.data()), static_cast<std::streamsize>(bytes.size()))) {
    fail(ErrorCode::Io, "truncated embedding map");
  }
  for (std::size_t i = 0; i < map.values.size(); ++i) {
    std::uint32_t bits = 0;
    for (int b = 0; b < 4; ++b) bits |= static_cast<std::uint32_t>(bytes[4 * i + b]) << (8 * b);
    float f;
    std::memcpy(&f, &bits, 4);
    map.values[i] = f;
  }
  return map;
}

std::string format_camera(const Camera& camera) {
  std::string out = std::to_string(camera.width) + ' ' + std::to_string(camera.height);
  auto put = [&out](double v) {
    out.push_back(' ');
    out += format_double(v);
  };
  put(camera.focal.x());
  put(camera.focal.y());
  put(camera.principal_point.x());
  put(camera.principal_point.y());
  for (int r = 0; r < 3; ++r)
    for (int c = 0; c < 3; ++c) put(camera.world_to_camera(r, c));
  for (int r = 0; r < 3; ++r) put(camera.world_to_camera(r, 3));
  return out;
}

Camera parse_camera(const std::vector<std::string>& tokens, std::size_t first) {
  if (tokens.size() < first + kCameraTokenCount) fail(ErrorCode::Io, "camera record too short");
  Camera cam;
  std::size_t i = first;
  cam.width = parse_int(tokens[i++]);
  cam.height = parse_int(tokens[i++]);
  cam.focal.x() = parse_double(tokens[i++]);
  cam.focal.y() = parse_double(tokens[i++]);
  cam.principal_point.x() = parse_double(tokens[i++]);
  cam.principal_point.y() = parse_double(tokens[i++]);
  cam.world_to_camera.setIdentity();
  for (int r = 0; r < 3; ++r)
    for (int c = 0; c < 3; ++c) cam.world_to_camera(r, c) = parse_double(tokens[i++]);
  for (int r = 0; r < 3; ++r) cam.world_to_camera(r, 3) = parse_double(tokens[i++]);
  return cam;
}

}  // namespace unilift
