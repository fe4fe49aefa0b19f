#pragma once

// Triangle meshes from OBJ, OFF and PLY (ascii or binary little-endian);
// point clouds and polylines to and from PLY.

#include <algorithm>
#include <bit>
#include <charconv>
#include <cstdint>
#include <cstring>
#include <filesystem>
#include <fstream>
#include <iomanip>
#include <map>
#include <sstream>
#include <string>
#include <string_view>
#include <vector>

#include "mapnbv/errors.hpp"
#include "mapnbv/geometry.hpp"
#include "mapnbv/mesh.hpp"

namespace mapnbv::io {

namespace fs = std::filesystem;

struct IoError : std::runtime_error {
  using std::runtime_error::runtime_error;
};

namespace detail {

inline std::string slurp(const fs::path& path) {
  std::ifstream in(path, std::ios::binary);
  if (!in) throw IoError("cannot open " + path.string());
  std::ostringstream ss;
  ss << in.rdbuf();
  return ss.str();
}

inline std::vector<std::string_view> tokens(std::string_view line) {
  std::vector<std::string_view> out;
  std::size_t i = 0;
  while (i < line.size()) {
    while (i < line.size() && (line[i] == ' ' || line[i] == '\t' || line[i] == '\r')) ++i;
    std::size_t j = i;
    while (j < line.size() && line[j] != ' ' && line[j] != '\t' && line[j] != '\r') ++j;
    if (j > i) out.push_back(line.substr(i, j - i));
    i = j;
  }
  return out;
}

// Line-oriented cursor that remembers the 1-based line number.
class Lines {
 public:
  Lines(std::string_view text, std::string file) : text_(text), file_(std::move(file)) {}

  bool next(std::string_view& line) {
    if (pos_ >= text_.size()) return false;
    const auto end = text_.find('\n', pos_);
    line = text_.substr(pos_, end == std::string_view::npos ? std::string_view::npos : end - pos_);
    pos_ = end == std::string_view::npos ? text_.size() : end + 1;
    ++line_;
    return true;
  }
  std::size_t line() const { return line_; }
  std::size_t offset() const { return pos_; }
  [[noreturn]] void fail(const std::string& what) const { throw ParseError(file_, line_, what); }

 private:
  std::string_view text_;
  std::string file_;
  std::size_t pos_{0};
  std::size_t line_{0};
};

template <class T>
T number(std::string_view tok, const Lines& at) {
  T v{};
  const auto [p, ec] = std::from_chars(tok.data(), tok.data() + tok.size(), v);
  if (ec != std::errc{} || p != tok.data() + tok.size()) at.fail("bad number '" + std::string(tok) + "'");
  return v;
}

inline Triangle checked_triangle(const Point3& a, const Point3& b, const Point3& c, const Lines& at) {
  if (!is_finite(a) || !is_finite(b) || !is_finite(c)) at.fail("non-finite vertex");
  return Triangle{{a, b, c}};
}

// Fan triangulation of one polygon.
inline void add_polygon(TriangleMesh& out, const std::vector<Point3>& verts, const std::vector<std::int64_t>& idx,
                        const Lines& at) {
  if (idx.size() < 3) at.fail("face with fewer than 3 vertices");
  for (auto i : idx)
    if (i < 0 || static_cast<std::size_t>(i) >= verts.size())
      at.fail("vertex index " + std::to_string(i) + " out of range");
  for (std::size_t k = 1; k + 1 < idx.size(); ++k)
    out.push_back(checked_triangle(verts[static_cast<std::size_t>(idx[0])], verts[static_cast<std::size_t>(idx[k])],
                                   verts[static_cast<std::size_t>(idx[k + 1])], at));
}

}  // namespace detail

inline TriangleMesh parse_obj(std::string_view text, const std::string& file = "<obj>") {
  detail::Lines lines(text, file);
  std::vector<Point3> verts;
  TriangleMesh out;
  std::string_view line;
  while (lines.next(line)) {
    const auto t = detail::tokens(line);
    if (t.empty() || t[0][0] == '#') continue;
    if (t[0] == "v") {
      if (t.size() < 4) lines.fail("vertex needs 3 coordinates");
      verts.emplace_back(detail::number<double>(t[1], lines), detail::number<double>(t[2], lines),
                         detail::number<double>(t[3], lines));
    } else if (t[0] == "f") {
      std::vector<std::int64_t> idx;
      for (std::size_t k = 1; k < t.size(); ++k) {
        // i, i/j, i//k, i/j/k; negative indices count back from the last vertex.
        const auto v = detail::number<std::int64_t>(t[k].substr(0, t[k].find('/')), lines);
        if (v == 0) lines.fail("vertex index 0");
        idx.push_back(v > 0 ? v - 1 : static_cast<std::int64_t>(verts.size()) + v);
      }
      detail::add_polygon(out, verts, idx, lines);
    }
  }
  return out;
}

inline TriangleMesh parse_off(std::string_view text, const std::string& file = "<off>") {
  detail::Lines lines(text, file);
  std::string_view line;
  // Tokens of the next non-empty, non-comment line.
  auto content = [&]() {
    while (lines.next(line)) {
      auto t = detail::tokens(line.substr(0, line.find('#')));
      if (!t.empty()) return t;
    }
    lines.fail("unexpected end of file");
  };
  auto t = content();
  if (t[0] != "OFF") lines.fail("missing OFF header");
  t.erase(t.begin());
  if (t.empty()) t = content();
  if (t.size() < 2) lines.fail("expected vertex and face counts");
  const auto nv = detail::number<std::size_t>(t[0], lines);
  const auto nf = detail::number<std::size_t>(t[1], lines);
  std::vector<Point3> verts;
  verts.reserve(nv);
  for (std::size_t i = 0; i < nv; ++i) {
    t = content();
    if (t.size() < 3) lines.fail("vertex needs 3 coordinates");
    verts.emplace_back(detail::number<double>(t[0], lines), detail::number<double>(t[1], lines),
                       detail::number<double>(t[2], lines));
  }
  TriangleMesh out;
  for (std::size_t i = 0; i < nf; ++i) {
    t = content();
    const auto k = detail::number<std::size_t>(t[0], lines);
    if (t.size() < k + 1) lines.fail("face lists fewer indices than its count");
    std::vector<std::int64_t> idx;
    for (std::size_t j = 1; j <= k; ++j) idx.push_back(detail::number<std::int64_t>(t[j], lines));
    detail::add_polygon(out, verts, idx, lines);
  }
  return out;
}

namespace detail {

enum class PlyType { i8, u8, i16, u16, i32, u32, f32, f64 };

inline std::optional<PlyType> ply_type(std::string_view s) {
  if (s == "char" || s == "int8") return PlyType::i8;
  if (s == "uchar" || s == "uint8") return PlyType::u8;
  if (s == "short" || s == "int16") return PlyType::i16;
  if (s == "ushort" || s == "uint16") return PlyType::u16;
  if (s == "int" || s == "int32") return PlyType::i32;
  if (s == "uint" || s == "uint32") return PlyType::u32;
  if (s == "float" || s == "float32") return PlyType::f32;
  if (s == "double" || s == "float64") return PlyType::f64;
  return std::nullopt;
}

inline std::size_t ply_size(PlyType t) {
  switch (t) {
    case PlyType::i8:
    case PlyType::u8: return 1;
    case PlyType::i16:
    case PlyType::u16: return 2;
    case PlyType::i32:
    case PlyType::u32:
    case PlyType::f32: return 4;
    case PlyType::f64: return 8;
  }
  return 0;
}

struct PlyProperty {
  std::string name;
  PlyType type{PlyType::f32};
  bool is_list{false};
  PlyType count_type{PlyType::u8};
};

struct PlyElement {
  std::string name;
  std::size_t count{0};
  std::vector<PlyProperty> props;
};

struct PlyData {
  std::vector<Point3> vertices;
  std::vector<std::vector<std::int64_t>> faces;
  std::vector<std::pair<std::int64_t, std::int64_t>> edges;
};

template <class T>
T load_le(const char* p) {
  static_assert(std::endian::native == std::endian::little, "binary PLY reader assumes a little-endian host");
  T v;
  std::memcpy(&v, p, sizeof(T));
  return v;
}

// Value readers for the body: one for ascii tokens, one for raw bytes.
class PlyBody {
 public:
  PlyBody(std::string_view body, bool binary, Lines& lines, std::string file)
      : body_(body), binary_(binary), lines_(lines), file_(std::move(file)) {}

  double read(PlyType t) {
    if (!binary_) return ascii();
    const std::size_t n = ply_size(t);
    if (pos_ + n > body_.size())
      throw ParseError(file_, 0, "truncated binary body at byte offset " + std::to_string(base_ + pos_));
    const char* p = body_.data() + pos_;
    pos_ += n;
    switch (t) {
      case PlyType::i8: return load_le<std::int8_t>(p);
      case PlyType::u8: return load_le<std::uint8_t>(p);
      case PlyType::i16: return load_le<std::int16_t>(p);
      case PlyType::u16: return load_le<std::uint16_t>(p);
      case PlyType::i32: return load_le<std::int32_t>(p);
      case PlyType::u32: return load_le<std::uint32_t>(p);
      case PlyType::f32: return load_le<float>(p);
      case PlyType::f64: return load_le<double>(p);
    }
    return 0.0;
  }
  // Ascii records are one per line.
  void begin_record() {
    if (binary_) return;
    std::string_view line;
    do {
      if (!lines_.next(line)) lines_.fail("unexpected end of file");
      toks_ = tokens(line);
    } while (toks_.empty());
    tok_ = 0;
  }
  void end_record() {
    if (!binary_ && tok_ != toks_.size()) lines_.fail("extra values in record");
  }
  void set_base(std::size_t b) { base_ = b; }
  [[noreturn]] void fail(const std::string& what) const {
    if (binary_) throw ParseError(file_, 0, what + " at byte offset " + std::to_string(base_ + pos_));
    lines_.fail(what);
  }

 private:
  double ascii() {
    if (tok_ >= toks_.size()) lines_.fail("record has too few values");
    return number<double>(toks_[tok_++], lines_);
  }

  std::string_view body_;
  bool binary_;
  Lines& lines_;
  std::string file_;
  std::size_t pos_{0};
  std::size_t base_{0};
  std::vector<std::string_view> toks_;
  std::size_t tok_{0};
};

inline PlyData parse_ply_data(std::string_view text, const std::string& file) {
  Lines lines(text, file);
  std::string_view line;
  if (!lines.next(line) || tokens(line).empty() || tokens(line)[0] != "ply") lines.fail("missing ply magic");
  bool binary = false;
  bool have_format = false;
  std::vector<PlyElement> elements;
  for (;;) {
    if (!lines.next(line)) lines.fail("header without end_header");
    const auto t = tokens(line);
    if (t.empty() || t[0] == "comment" || t[0] == "obj_info") continue;
    if (t[0] == "end_header") break;
    if (t[0] == "format") {
      if (t.size() < 2) lines.fail("bad format line");
      if (t[1] == "ascii") binary = false;
      else if (t[1] == "binary_little_endian") binary = true;
      else lines.fail("unsupported ply format '" + std::string(t[1]) + "'");
      have_format = true;
    } else if (t[0] == "element") {
      if (t.size() != 3) lines.fail("bad element line");
      elements.push_back({std::string(t[1]), number<std::size_t>(t[2], lines), {}});
    } else if (t[0] == "property") {
      if (elements.empty()) lines.fail("property before any element");
      PlyProperty p;
      if (t.size() == 5 && t[1] == "list") {
        const auto ct = ply_type(t[2]);
        const auto it = ply_type(t[3]);
        if (!ct || !it) lines.fail("unknown list property type");
        p = {std::string(t[4]), *it, true, *ct};
      } else if (t.size() == 3) {
        const auto ty = ply_type(t[1]);
        if (!ty) lines.fail("unknown property type '" + std::string(t[1]) + "'");
        p = {std::string(t[2]), *ty, false, PlyType::u8};
      } else {
        lines.fail("bad property line");
      }
      elements.back().props.push_back(p);
    } else {
      lines.fail("unexpected header keyword '" + std::string(t[0]) + "'");
    }
  }
  if (!have_format) lines.fail("missing format line");

  PlyData out;
  PlyBody body(text.substr(lines.offset()), binary, lines, file);
  body.set_base(lines.offset());
  for (const auto& el : elements) {
    int xi = -1, yi = -1, zi = -1, fi = -1, e0 = -1, e1 = -1;
    for (std::size_t k = 0; k < el.props.size(); ++k) {
      const auto& n = el.props[k].name;
      const int ki = static_cast<int>(k);
      if (n == "x") xi = ki;
      if (n == "y") yi = ki;
      if (n == "z") zi = ki;
      if (n == "vertex_indices" || n == "vertex_index") fi = ki;
      if (n == "vertex1") e0 = ki;
      if (n == "vertex2") e1 = ki;
    }
    if (el.name == "vertex" && (xi < 0 || yi < 0 || zi < 0)) lines.fail("vertex element lacks x/y/z");
    if (el.name == "face" && fi < 0) lines.fail("face element lacks vertex_indices");
    for (std::size_t r = 0; r < el.count; ++r) {
      body.begin_record();
      Point3 p = Point3::Zero();
      std::vector<std::int64_t> face;
      std::int64_t a = 0, b = 0;
      for (std::size_t k = 0; k < el.props.size(); ++k) {
        const auto& pr = el.props[k];
        const int ki = static_cast<int>(k);
        if (pr.is_list) {
          const double n = body.read(pr.count_type);
          if (!(n >= 0.0) || n != std::floor(n)) body.fail("bad list length");
          for (std::size_t j = 0; j < static_cast<std::size_t>(n); ++j) {
            const double v = body.read(pr.type);
            if (ki == fi) face.push_back(static_cast<std::int64_t>(v));
          }
          continue;
        }
        const double v = body.read(pr.type);
        if (ki == xi) p.x() = v;
        if (ki == yi) p.y() = v;
        if (ki == zi) p.z() = v;
        if (ki == e0) a = static_cast<std::int64_t>(v);
        if (ki == e1) b = static_cast<std::int64_t>(v);
      }
      body.end_record();
      if (el.name == "vertex") {
        if (!is_finite(p)) body.fail("non-finite vertex");
        out.vertices.push_back(p);
      } else if (el.name == "face") {
        out.faces.push_back(std::move(face));
      } else if (el.name == "edge" && e0 >= 0 && e1 >= 0) {
        out.edges.emplace_back(a, b);
      }
    }
  }
  return out;
}

}  // namespace detail

inline TriangleMesh parse_ply(std::string_view text, const std::string& file = "<ply>") {
  const auto d = detail::parse_ply_data(text, file);
  TriangleMesh out;
  detail::Lines at("", file);
  for (const auto& f : d.faces) detail::add_polygon(out, d.vertices, f, at);
  return out;
}

inline PointCloud parse_ply_points(std::string_view text, const std::string& file = "<ply>") {
  return detail::parse_ply_data(text, file).vertices;
}

// Dispatch on extension (case-insensitive); errors name the file.
inline TriangleMesh load_mesh(const fs::path& path) {
  std::string ext = path.extension().string();
  std::transform(ext.begin(), ext.end(), ext.begin(), [](unsigned char c) { return std::tolower(c); });
  const std::string text = detail::slurp(path);
  TriangleMesh mesh;
  if (ext == ".obj") mesh = parse_obj(text, path.string());
  else if (ext == ".off") mesh = parse_off(text, path.string());
  else if (ext == ".ply") mesh = parse_ply(text, path.string());
  else throw IoError("unsupported mesh format '" + ext + "' for " + path.string());
  if (mesh.empty()) throw ParseError(path.string(), 0, "mesh has no faces");
  return mesh;
}

inline PointCloud load_point_cloud(const fs::path& path) { return parse_ply_points(detail::slurp(path), path.string()); }

namespace detail {

inline std::ofstream open_out(const fs::path& path, bool binary = false) {
  if (path.has_parent_path()) fs::create_directories(path.parent_path());
  std::ofstream out(path, binary ? std::ios::binary : std::ios::out);
  if (!out) throw IoError("cannot write " + path.string());
  out << std::setprecision(17);
  return out;
}

inline void finish(std::ofstream& out, const fs::path& path) {
  out.flush();
  if (!out) throw IoError("write failed for " + path.string());
}

}  // namespace detail

// Ascii PLY with full double precision, so a reload is exact.
inline void write_ply(const fs::path& path, std::span<const Point3> cloud) {
  auto out = detail::open_out(path);
  out << "ply\nformat ascii 1.0\nelement vertex " << cloud.size()
      << "\nproperty double x\nproperty double y\nproperty double z\nend_header\n";
  for (const auto& p : cloud) out << p.x() << ' ' << p.y() << ' ' << p.z() << '\n';
  detail::finish(out, path);
}

// One polyline per entry, as vertices tagged with their polyline id plus edges.
inline void write_polylines_ply(const fs::path& path, const std::vector<std::vector<Point3>>& lines) {
  std::size_t nv = 0, ne = 0;
  for (const auto& l : lines) {
    nv += l.size();
    ne += l.empty() ? 0 : l.size() - 1;
  }
  auto out = detail::open_out(path);
  out << "ply\nformat ascii 1.0\nelement vertex " << nv
      << "\nproperty double x\nproperty double y\nproperty double z\nproperty int agent\nelement edge " << ne
      << "\nproperty int vertex1\nproperty int vertex2\nend_header\n";
  for (std::size_t a = 0; a < lines.size(); ++a)
    for (const auto& p : lines[a]) out << p.x() << ' ' << p.y() << ' ' << p.z() << ' ' << a << '\n';
  std::size_t base = 0;
  for (const auto& l : lines) {
    for (std::size_t i = 1; i < l.size(); ++i) out << base + i - 1 << ' ' << base + i << '\n';
    base += l.size();
  }
  detail::finish(out, path);
}

// Shared vertices, 1-based faces.
inline void write_obj(const fs::path& path, std::span<const Triangle> mesh) {
  std::map<std::tuple<double, double, double>, std::size_t> index;
  std::vector<Point3> verts;
  std::vector<std::array<std::size_t, 3>> faces;
  for (const auto& t : mesh) {
    std::array<std::size_t, 3> f{};
    for (int k = 0; k < 3; ++k) {
      const auto key = std::make_tuple(t.v[k].x(), t.v[k].y(), t.v[k].z());
      auto [it, fresh] = index.emplace(key, verts.size());
      if (fresh) verts.push_back(t.v[k]);
      f[k] = it->second + 1;
    }
    faces.push_back(f);
  }
  auto out = detail::open_out(path);
  for (const auto& v : verts) out << "v " << v.x() << ' ' << v.y() << ' ' << v.z() << '\n';
  for (const auto& f : faces) out << "f " << f[0] << ' ' << f[1] << ' ' << f[2] << '\n';
  detail::finish(out, path);
}

}  // namespace mapnbv::io
