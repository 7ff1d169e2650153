#include "canonmap/mesh.hpp"

#include <bit>
#include <charconv>
#include <cmath>
#include <cstring>
#include <fstream>
#include <iomanip>
#include <istream>
#include <numeric>
#include <ostream>
#include <sstream>
#include <string_view>

#include "canonmap/error.hpp"

namespace canonmap {
namespace {

std::vector<std::string_view> split_ws(std::string_view line) {
  std::vector<std::string_view> out;
  std::size_t i = 0;
  while (i < line.size()) {
    while (i < line.size() && std::isspace(static_cast<unsigned char>(line[i]))) ++i;
    const std::size_t start = i;
    while (i < line.size() && !std::isspace(static_cast<unsigned char>(line[i]))) ++i;
    if (i > start) out.push_back(line.substr(start, i - start));
  }
  return out;
}

template <typename T>
bool parse_number(std::string_view token, T& value) {
  const char* first = token.data();
  const char* last = token.data() + token.size();
  if (first != last && *first == '+') ++first;
  const auto [ptr, ec] = std::from_chars(first, last, value);
  return ec == std::errc() && ptr == last;
}

[[noreturn]] void parse_fail(const std::string& what, std::size_t line) {
  throw Error(ErrorCode::ParseError, what + " (line " + std::to_string(line) + ")");
}

class UnionFind {
 public:
  explicit UnionFind(std::size_t n) : parent_(n) { std::iota(parent_.begin(), parent_.end(), 0); }
  std::size_t find(std::size_t x) {
    while (parent_[x] != x) {
      parent_[x] = parent_[parent_[x]];
      x = parent_[x];
    }
    return x;
  }
  void unite(std::size_t a, std::size_t b) { parent_[find(a)] = find(b); }

 private:
  std::vector<std::size_t> parent_;
};

// ---------------------------------------------------------------------------
// PLY

enum class PlyType { Int8, UInt8, Int16, UInt16, Int32, UInt32, Float32, Float64 };

PlyType ply_type(std::string_view name, std::size_t line) {
  if (name == "char" || name == "int8") return PlyType::Int8;
  if (name == "uchar" || name == "uint8") return PlyType::UInt8;
  if (name == "short" || name == "int16") return PlyType::Int16;
  if (name == "ushort" || name == "uint16") return PlyType::UInt16;
  if (name == "int" || name == "int32") return PlyType::Int32;
  if (name == "uint" || name == "uint32") return PlyType::UInt32;
  if (name == "float" || name == "float32") return PlyType::Float32;
  if (name == "double" || name == "float64") return PlyType::Float64;
  parse_fail("unknown PLY property type '" + std::string(name) + "'", line);
}

std::size_t ply_size(PlyType t) {
  switch (t) {
    case PlyType::Int8:
    case PlyType::UInt8: return 1;
    case PlyType::Int16:
    case PlyType::UInt16: return 2;
    case PlyType::Int32:
    case PlyType::UInt32:
    case PlyType::Float32: return 4;
    case PlyType::Float64: return 8;
  }
  return 0;
}

struct PlyProperty {
  std::string name;
  PlyType type = PlyType::Float32;
  bool is_list = false;
  PlyType count_type = PlyType::UInt8;
};

struct PlyElement {
  std::string name;
  std::size_t count = 0;
  std::vector<PlyProperty> properties;
};

template <typename T>
T load_le(const unsigned char* p) {
  T v;
  std::memcpy(&v, p, sizeof(T));
  if constexpr (std::endian::native == std::endian::big) {
    auto* b = reinterpret_cast<unsigned char*>(&v);
    for (std::size_t i = 0; i < sizeof(T) / 2; ++i) std::swap(b[i], b[sizeof(T) - 1 - i]);
  }
  return v;
}

double read_binary_value(std::istream& in, PlyType t) {
  unsigned char buf[8];
  const std::size_t n = ply_size(t);
  const auto offset = static_cast<long long>(in.tellg());
  if (!in.read(reinterpret_cast<char*>(buf), static_cast<std::streamsize>(n)))
    throw Error(ErrorCode::ParseError,
                "unexpected end of binary PLY data (byte offset " + std::to_string(offset) + ")");
  switch (t) {
    case PlyType::Int8: return static_cast<double>(static_cast<std::int8_t>(buf[0]));
    case PlyType::UInt8: return static_cast<double>(buf[0]);
    case PlyType::Int16: return load_le<std::int16_t>(buf);
    case PlyType::UInt16: return load_le<std::uint16_t>(buf);
    case PlyType::Int32: return load_le<std::int32_t>(buf);
    case PlyType::UInt32: return load_le<std::uint32_t>(buf);
    case PlyType::Float32: return load_le<float>(buf);
    case PlyType::Float64: return load_le<double>(buf);
  }
  return 0.0;
}

bool is_integer_type(PlyType t) { return t != PlyType::Float32 && t != PlyType::Float64; }

void put_le(std::ostream& out, const void* p, std::size_t n) {
  const auto* b = static_cast<const unsigned char*>(p);
  if constexpr (std::endian::native == std::endian::little) {
    out.write(reinterpret_cast<const char*>(b), static_cast<std::streamsize>(n));
  } else {
    for (std::size_t i = n; i-- > 0;) out.put(static_cast<char>(b[i]));
  }
}

// Appends the polygon as a triangle fan.
void add_polygon(CanonicalMesh& mesh, const std::vector<long long>& poly, std::size_t line) {
  if (poly.size() < 3) parse_fail("face with fewer than 3 vertices", line);
  for (std::size_t k = 1; k + 1 < poly.size(); ++k) {
    mesh.faces.push_back({static_cast<int>(poly[0]), static_cast<int>(poly[k]),
                          static_cast<int>(poly[k + 1])});
  }
}

long long clamp_index(long long v) {
  // Out-of-int-range indices become an obviously invalid value for validation.
  if (v > std::numeric_limits<int>::max() || v < std::numeric_limits<int>::min()) return -1;
  return v;
}

}  // namespace

// ---------------------------------------------------------------------------

CanonicalMesh read_obj(std::istream& in) {
  CanonicalMesh mesh;
  std::vector<Eigen::Vector3d> colors;
  bool all_colored = true;
  std::string raw;
  std::size_t line_no = 0;
  std::vector<long long> poly;
  while (std::getline(in, raw)) {
    ++line_no;
    std::string_view line(raw);
    if (const auto hash = line.find('#'); hash != std::string_view::npos) line = line.substr(0, hash);
    const auto tok = split_ws(line);
    if (tok.empty()) continue;
    if (tok[0] == "v") {
      if (tok.size() < 4) parse_fail("vertex record needs 3 coordinates", line_no);
      double vals[6] = {};
      const std::size_t count = std::min<std::size_t>(tok.size() - 1, 6);
      for (std::size_t i = 0; i < count; ++i)
        if (!parse_number(tok[i + 1], vals[i]))
          parse_fail("malformed number '" + std::string(tok[i + 1]) + "'", line_no);
      mesh.vertices.emplace_back(vals[0], vals[1], vals[2]);
      if (tok.size() == 7) {
        colors.emplace_back(vals[3], vals[4], vals[5]);
      } else {
        all_colored = false;
      }
    } else if (tok[0] == "f") {
      poly.clear();
      for (std::size_t i = 1; i < tok.size(); ++i) {
        const std::string_view ref = tok[i].substr(0, tok[i].find('/'));
        long long idx = 0;
        if (!parse_number(ref, idx) || idx == 0)
          parse_fail("malformed face index '" + std::string(tok[i]) + "'", line_no);
        const auto n = static_cast<long long>(mesh.vertices.size());
        poly.push_back(clamp_index(idx > 0 ? idx - 1 : n + idx));
      }
      add_polygon(mesh, poly, line_no);
    }
    // vn, vt, o, g, s, usemtl, mtllib, l: not used
  }
  if (in.bad()) throw Error(ErrorCode::IoError, "read error while parsing OBJ");
  if (all_colored && !colors.empty()) mesh.colors = std::move(colors);
  return mesh;
}

CanonicalMesh read_ply(std::istream& in) {
  std::string raw;
  std::size_t line_no = 0;
  auto next_line = [&](std::string& out) {
    if (!std::getline(in, out)) return false;
    ++line_no;
    if (!out.empty() && out.back() == '\r') out.pop_back();
    return true;
  };
  if (!next_line(raw) || raw != "ply") parse_fail("missing 'ply' magic", line_no);

  bool binary = false;
  bool have_format = false;
  std::vector<PlyElement> elements;
  for (;;) {
    if (!next_line(raw)) parse_fail("unterminated PLY header", line_no);
    const auto tok = split_ws(raw);
    if (tok.empty()) continue;
    if (tok[0] == "end_header") break;
    if (tok[0] == "comment" || tok[0] == "obj_info") continue;
    if (tok[0] == "format") {
      if (tok.size() < 2) parse_fail("malformed format line", line_no);
      if (tok[1] == "ascii") {
        binary = false;
      } else if (tok[1] == "binary_little_endian") {
        binary = true;
      } else {
        parse_fail("unsupported PLY format '" + std::string(tok[1]) + "'", line_no);
      }
      have_format = true;
    } else if (tok[0] == "element") {
      std::size_t count = 0;
      if (tok.size() != 3 || !parse_number(tok[2], count)) parse_fail("malformed element line", line_no);
      elements.push_back({std::string(tok[1]), count, {}});
    } else if (tok[0] == "property") {
      if (elements.empty()) parse_fail("property before any element", line_no);
      PlyProperty prop;
      if (tok.size() == 5 && tok[1] == "list") {
        prop.is_list = true;
        prop.count_type = ply_type(tok[2], line_no);
        prop.type = ply_type(tok[3], line_no);
        prop.name = tok[4];
      } else if (tok.size() == 3) {
        prop.type = ply_type(tok[1], line_no);
        prop.name = tok[2];
      } else {
        parse_fail("malformed property line", line_no);
      }
      elements.back().properties.push_back(prop);
    } else {
      parse_fail("unknown PLY header keyword '" + std::string(tok[0]) + "'", line_no);
    }
  }
  if (!have_format) parse_fail("PLY header lacks a format line", line_no);

  CanonicalMesh mesh;
  std::vector<Eigen::Vector3d> colors;
  std::vector<double> scalars;
  std::vector<long long> poly;
  std::vector<std::string_view> tokens;
  for (const auto& el : elements) {
    const bool is_vertex = el.name == "vertex";
    const bool is_face = el.name == "face";
    int ix = -1, iy = -1, iz = -1, ir = -1, ig = -1, ib = -1, ilist = -1;
    for (std::size_t p = 0; p < el.properties.size(); ++p) {
      const auto& n = el.properties[p].name;
      const int pi = static_cast<int>(p);
      if (n == "x") ix = pi;
      if (n == "y") iy = pi;
      if (n == "z") iz = pi;
      if (n == "red" || n == "r") ir = pi;
      if (n == "green" || n == "g") ig = pi;
      if (n == "blue" || n == "b") ib = pi;
      if (el.properties[p].is_list && (n == "vertex_indices" || n == "vertex_index")) ilist = pi;
    }
    if (is_vertex && (ix < 0 || iy < 0 || iz < 0)) parse_fail("vertex element lacks x/y/z", line_no);
    if (is_face && ilist < 0) parse_fail("face element lacks vertex_indices list", line_no);
    const bool colored = is_vertex && ir >= 0 && ig >= 0 && ib >= 0;

    for (std::size_t row = 0; row < el.count; ++row) {
      scalars.assign(el.properties.size(), 0.0);
      poly.clear();
      if (binary) {
        for (std::size_t p = 0; p < el.properties.size(); ++p) {
          const auto& prop = el.properties[p];
          if (prop.is_list) {
            const double cnt = read_binary_value(in, prop.count_type);
            if (cnt < 0) throw Error(ErrorCode::ParseError, "negative PLY list length");
            for (std::size_t k = 0; k < static_cast<std::size_t>(cnt); ++k) {
              const double v = read_binary_value(in, prop.type);
              if (static_cast<int>(p) == ilist) poly.push_back(clamp_index(static_cast<long long>(v)));
            }
          } else {
            scalars[p] = read_binary_value(in, prop.type);
          }
        }
      } else {
        if (!next_line(raw)) parse_fail("unexpected end of PLY body", line_no);
        tokens = split_ws(raw);
        std::size_t t = 0;
        auto take = [&](double& v) {
          if (t >= tokens.size()) parse_fail("too few values in PLY row", line_no);
          if (!parse_number(tokens[t], v))
            parse_fail("malformed number '" + std::string(tokens[t]) + "'", line_no);
          ++t;
        };
        for (std::size_t p = 0; p < el.properties.size(); ++p) {
          const auto& prop = el.properties[p];
          if (prop.is_list) {
            double cnt = 0;
            take(cnt);
            if (cnt < 0 || cnt != std::floor(cnt)) parse_fail("bad PLY list length", line_no);
            for (std::size_t k = 0; k < static_cast<std::size_t>(cnt); ++k) {
              double v = 0;
              take(v);
              if (static_cast<int>(p) == ilist) poly.push_back(clamp_index(static_cast<long long>(v)));
            }
          } else {
            take(scalars[p]);
          }
        }
        if (t != tokens.size()) parse_fail("extra values in PLY row", line_no);
      }
      if (is_vertex) {
        mesh.vertices.emplace_back(scalars[ix], scalars[iy], scalars[iz]);
        if (colored) {
          Eigen::Vector3d c(scalars[ir], scalars[ig], scalars[ib]);
          if (is_integer_type(el.properties[ir].type)) c /= 255.0;
          colors.push_back(c);
        }
      } else if (is_face) {
        add_polygon(mesh, poly, line_no);
      }
    }
  }
  if (in.bad()) throw Error(ErrorCode::IoError, "read error while parsing PLY");
  if (!colors.empty()) mesh.colors = std::move(colors);
  return mesh;
}

std::size_t connected_components(const CanonicalMesh& mesh) {
  const std::size_t m = mesh.vertex_count();
  UnionFind uf(m);
  for (const auto& f : mesh.faces) {
    uf.unite(static_cast<std::size_t>(f[0]), static_cast<std::size_t>(f[1]));
    uf.unite(static_cast<std::size_t>(f[1]), static_cast<std::size_t>(f[2]));
  }
  std::size_t roots = 0;
  for (std::size_t i = 0; i < m; ++i)
    if (uf.find(i) == i) ++roots;
  return roots;
}

void validate_mesh(const CanonicalMesh& mesh) {
  const auto m = static_cast<long long>(mesh.vertex_count());
  if (m < 3) throw Error(ErrorCode::ValidationError, "mesh needs at least 3 vertices");
  if (mesh.faces.empty()) throw Error(ErrorCode::ValidationError, "mesh has no faces");
  for (std::size_t i = 0; i < mesh.vertices.size(); ++i)
    if (!mesh.vertices[i].allFinite())
      throw Error(ErrorCode::ValidationError, "vertex " + std::to_string(i) + " has non-finite coordinates");
  if (!mesh.colors.empty() && mesh.colors.size() != mesh.vertices.size())
    throw Error(ErrorCode::ValidationError, "color count does not match vertex count");
  for (std::size_t f = 0; f < mesh.faces.size(); ++f) {
    const auto& face = mesh.faces[f];
    for (int idx : face)
      if (idx < 0 || idx >= m)
        throw Error(ErrorCode::ValidationError, "face " + std::to_string(f) + " references vertex " +
                                                    std::to_string(idx) + " outside [0, " +
                                                    std::to_string(m) + ")");
    if (face[0] == face[1] || face[1] == face[2] || face[0] == face[2])
      throw Error(ErrorCode::ValidationError, "face " + std::to_string(f) + " is degenerate");
  }
  const std::size_t components = connected_components(mesh);
  if (components != 1)
    throw Error(ErrorCode::ValidationError,
                "mesh is not connected (" + std::to_string(components) + " components)");
}

CanonicalMesh parse_mesh(const std::filesystem::path& path, std::optional<MeshFormat> format) {
  if (!format) {
    std::string ext = path.extension().string();
    for (auto& c : ext) c = static_cast<char>(std::tolower(static_cast<unsigned char>(c)));
    if (ext == ".obj") {
      format = MeshFormat::Obj;
    } else if (ext == ".ply") {
      format = MeshFormat::Ply;
    } else {
      throw Error(ErrorCode::ParseError, "cannot infer mesh format from '" + path.string() + "'");
    }
  }
  std::ifstream in(path, std::ios::binary);
  if (!in) throw Error(ErrorCode::IoError, "cannot open mesh file '" + path.string() + "'");
  CanonicalMesh mesh = *format == MeshFormat::Obj ? read_obj(in) : read_ply(in);
  validate_mesh(mesh);
  return mesh;
}

void write_obj(std::ostream& out, const CanonicalMesh& mesh) {
  const auto old_precision = out.precision(17);
  for (std::size_t i = 0; i < mesh.vertices.size(); ++i) {
    const auto& v = mesh.vertices[i];
    out << "v " << v.x() << ' ' << v.y() << ' ' << v.z();
    if (!mesh.colors.empty()) {
      const auto& c = mesh.colors[i];
      out << ' ' << c.x() << ' ' << c.y() << ' ' << c.z();
    }
    out << '\n';
  }
  for (const auto& f : mesh.faces) out << "f " << f[0] + 1 << ' ' << f[1] + 1 << ' ' << f[2] + 1 << '\n';
  out.precision(old_precision);
}

void write_ply(std::ostream& out, const CanonicalMesh& mesh, bool binary) {
  const bool colored = !mesh.colors.empty();
  out << "ply\nformat " << (binary ? "binary_little_endian" : "ascii") << " 1.0\n";
  out << "element vertex " << mesh.vertex_count() << '\n';
  out << "property double x\nproperty double y\nproperty double z\n";
  if (colored) out << "property uchar red\nproperty uchar green\nproperty uchar blue\n";
  out << "element face " << mesh.face_count() << '\n';
  out << "property list uchar int vertex_indices\nend_header\n";
  auto to_byte = [](double c) {
    return static_cast<unsigned char>(std::lround(std::clamp(c, 0.0, 1.0) * 255.0));
  };
  if (binary) {
    for (std::size_t i = 0; i < mesh.vertices.size(); ++i) {
      for (int a = 0; a < 3; ++a) put_le(out, &mesh.vertices[i][a], sizeof(double));
      if (colored)
        for (int a = 0; a < 3; ++a) out.put(static_cast<char>(to_byte(mesh.colors[i][a])));
    }
    for (const auto& f : mesh.faces) {
      out.put(3);
      for (int idx : f) {
        const std::int32_t v = idx;
        put_le(out, &v, sizeof(v));
      }
    }
  } else {
    const auto old_precision = out.precision(17);
    for (std::size_t i = 0; i < mesh.vertices.size(); ++i) {
      const auto& v = mesh.vertices[i];
      out << v.x() << ' ' << v.y() << ' ' << v.z();
      if (colored)
        for (int a = 0; a < 3; ++a) out << ' ' << static_cast<int>(to_byte(mesh.colors[i][a]));
      out << '\n';
    }
    for (const auto& f : mesh.faces) out << "3 " << f[0] << ' ' << f[1] << ' ' << f[2] << '\n';
    out.precision(old_precision);
  }
}

void save_mesh(const std::filesystem::path& path, const CanonicalMesh& mesh) {
  std::ofstream out(path, std::ios::binary);
  if (!out) throw Error(ErrorCode::IoError, "cannot write mesh file '" + path.string() + "'");
  std::string ext = path.extension().string();
  for (auto& c : ext) c = static_cast<char>(std::tolower(static_cast<unsigned char>(c)));
  if (ext == ".ply") {
    write_ply(out, mesh, true);
  } else {
    write_obj(out, mesh);
  }
  if (!out) throw Error(ErrorCode::IoError, "failed writing mesh file '" + path.string() + "'");
}

std::uint64_t mesh_checksum(const CanonicalMesh& mesh) {
  std::uint64_t hash = 0xcbf29ce484222325ULL;
  for (const auto& v : mesh.vertices) {
    for (int a = 0; a < 3; ++a) {
      const auto bits = std::bit_cast<std::uint64_t>(v[a]);
      for (int byte = 0; byte < 8; ++byte) {
        hash ^= (bits >> (8 * byte)) & 0xffULL;
        hash *= 0x100000001b3ULL;
      }
    }
  }
  return hash;
}

std::string checksum_hex(std::uint64_t checksum) {
  std::ostringstream os;
  os << std::hex << std::setw(16) << std::setfill('0') << checksum;
  return os.str();
}

Eigen::AlignedBox3d bounding_box(const CanonicalMesh& mesh) {
  Eigen::AlignedBox3d box;
  for (const auto& v : mesh.vertices) box.extend(v);
  return box;
}

std::vector<Eigen::Vector3d> vertex_normals(const CanonicalMesh& mesh) {
  std::vector<Eigen::Vector3d> normals(mesh.vertex_count(), Eigen::Vector3d::Zero());
  for (const auto& f : mesh.faces) {
    const Eigen::Vector3d& a = mesh.vertices[f[0]];
    const Eigen::Vector3d& b = mesh.vertices[f[1]];
    const Eigen::Vector3d& c = mesh.vertices[f[2]];
    // Cross product magnitude is twice the area: area weighting comes for free.
    const Eigen::Vector3d n = (b - a).cross(c - a);
    for (int idx : f) normals[idx] += n;
  }
  for (auto& n : normals) {
    const double len = n.norm();
    if (len > 0) n /= len;
  }
  return normals;
}

}  // namespace canonmap
