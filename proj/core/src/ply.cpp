#include "ctpack/ply.hpp"

#include <bit>
#include <cstring>
#include <fstream>
#include <sstream>
#include <string>
#include <vector>

#include "ctpack/error.hpp"

static_assert(std::endian::native == std::endian::little, "PLY writer assumes a little-endian host");

namespace ctpack {

void write_ply(const std::filesystem::path& file, const Mesh& mesh) {
  std::ofstream out(file, std::ios::binary | std::ios::trunc);
  if (!out) fail(Errc::WriteError, "cannot open " + file.string());
  out << "ply\nformat binary_little_endian 1.0\n"
      << "element vertex " << mesh.vertices.size() << "\n"
      << "property float x\nproperty float y\nproperty float z\n"
      << "element face " << mesh.faces.size() << "\n"
      << "property list uchar uint vertex_indices\nend_header\n";

  std::vector<char> buffer;
  buffer.reserve(mesh.vertices.size() * 12);
  for (const Vec3& v : mesh.vertices) {
    const float xyz[3] = {static_cast<float>(v.x), static_cast<float>(v.y), static_cast<float>(v.z)};
    const auto* p = reinterpret_cast<const char*>(xyz);
    buffer.insert(buffer.end(), p, p + sizeof(xyz));
  }
  out.write(buffer.data(), static_cast<std::streamsize>(buffer.size()));

  buffer.clear();
  buffer.reserve(mesh.faces.size() * 13);
  for (const Face& f : mesh.faces) {
    buffer.push_back(3);
    const auto* p = reinterpret_cast<const char*>(f.data());
    buffer.insert(buffer.end(), p, p + 12);
  }
  out.write(buffer.data(), static_cast<std::streamsize>(buffer.size()));
  out.flush();
  if (!out) fail(Errc::WriteError, "failed writing " + file.string());
}

namespace {

struct Property {
  std::string name;
  std::string type;        // scalar type, or the item type for lists
  std::string count_type;  // non-empty for list properties
};

std::size_t type_size(const std::string& t) {
  if (t == "char" || t == "uchar" || t == "int8" || t == "uint8") return 1;
  if (t == "short" || t == "ushort" || t == "int16" || t == "uint16") return 2;
  if (t == "int" || t == "uint" || t == "float" || t == "int32" || t == "uint32" || t == "float32") return 4;
  if (t == "double" || t == "float64") return 8;
  fail(Errc::ParseError, "unknown PLY type " + t);
}

double read_scalar(const char* p, const std::string& t) {
  if (t == "char" || t == "int8") return static_cast<std::int8_t>(*p);
  if (t == "uchar" || t == "uint8") return static_cast<std::uint8_t>(*p);
  auto get = [p](auto v) {
    std::memcpy(&v, p, sizeof(v));
    return static_cast<double>(v);
  };
  if (t == "short" || t == "int16") return get(std::int16_t{});
  if (t == "ushort" || t == "uint16") return get(std::uint16_t{});
  if (t == "int" || t == "int32") return get(std::int32_t{});
  if (t == "uint" || t == "uint32") return get(std::uint32_t{});
  if (t == "float" || t == "float32") return get(float{});
  return get(double{});
}

}  // namespace

Mesh read_ply(const std::filesystem::path& file) {
  std::ifstream in(file, std::ios::binary);
  if (!in) fail(Errc::IoError, "cannot open " + file.string());
  std::string line;
  std::getline(in, line);
  if (line != "ply") fail(Errc::ParseError, file.string() + ": not a PLY file");

  struct Element {
    std::string name;
    std::size_t count = 0;
    std::vector<Property> props;
  };
  std::vector<Element> elements;
  while (std::getline(in, line)) {
    std::istringstream ss(line);
    std::string word;
    ss >> word;
    if (word == "format") {
      std::string fmt;
      ss >> fmt;
      if (fmt != "binary_little_endian") fail(Errc::ParseError, "unsupported PLY format " + fmt);
    } else if (word == "element") {
      Element e;
      ss >> e.name >> e.count;
      elements.push_back(std::move(e));
    } else if (word == "property") {
      if (elements.empty()) fail(Errc::ParseError, "PLY property before element");
      Property p;
      std::string t;
      ss >> t;
      if (t == "list") {
        ss >> p.count_type >> p.type >> p.name;
      } else {
        p.type = t;
        ss >> p.name;
      }
      elements.back().props.push_back(std::move(p));
    } else if (word == "end_header") {
      break;
    }
  }

  Mesh mesh;
  for (const Element& e : elements) {
    for (std::size_t i = 0; i < e.count; ++i) {
      Vec3 v;
      for (const Property& p : e.props) {
        char buf[8];
        if (p.count_type.empty()) {
          in.read(buf, static_cast<std::streamsize>(type_size(p.type)));
          const double value = read_scalar(buf, p.type);
          if (p.name == "x") v.x = value;
          if (p.name == "y") v.y = value;
          if (p.name == "z") v.z = value;
        } else {
          in.read(buf, static_cast<std::streamsize>(type_size(p.count_type)));
          const auto n = static_cast<std::size_t>(read_scalar(buf, p.count_type));
          std::vector<std::uint32_t> idx(n);
          for (std::size_t k = 0; k < n; ++k) {
            in.read(buf, static_cast<std::streamsize>(type_size(p.type)));
            idx[k] = static_cast<std::uint32_t>(read_scalar(buf, p.type));
          }
          if (e.name == "face") {
            for (std::size_t k = 1; k + 1 < n; ++k) mesh.faces.push_back({idx[0], idx[k], idx[k + 1]});
          }
        }
      }
      if (!in) fail(Errc::ParseError, file.string() + ": truncated PLY body");
      if (e.name == "vertex") mesh.vertices.push_back(v);
    }
  }
  return mesh;
}

}  // namespace ctpack
