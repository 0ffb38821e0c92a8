// SPDX-License-Identifier: Apache-2.0
//
// Copyright 2026 The echosim Authors
//
// Licensed under the Apache License, Version 2.0 (the "License");
// you may not use this file except in compliance with the License.
// You may obtain a copy of the License at
// http://www.apache.org/licenses/LICENSE-2.0
//
// Unless required by applicable law or agreed to in writing, software
// distributed under the License is distributed on an "AS IS" BASIS,
// WITHOUT WARRANTIES OR CONDITIONS OF ANY KIND, either express or implied.
// See the License for the specific language governing permissions and
// limitations under the License.

#include "echosim/mesh.hpp"

#include <algorithm>
#include <array>
#include <bit>
#include <cmath>
#include <cstdint>
#include <cstring>
#include <fstream>
#include <map>
#include <queue>
#include <set>
#include <sstream>
#include <unordered_map>

#include "echosim/error.hpp"

namespace echosim {

namespace {

// STL stores little-endian data; these helpers keep the reader portable.
float read_f32_le(const unsigned char* p) {
  std::uint32_t bits = std::uint32_t(p[0]) | (std::uint32_t(p[1]) << 8) | (std::uint32_t(p[2]) << 16) |
                       (std::uint32_t(p[3]) << 24);
  return std::bit_cast<float>(bits);
}

std::uint32_t read_u32_le(const unsigned char* p) {
  return std::uint32_t(p[0]) | (std::uint32_t(p[1]) << 8) | (std::uint32_t(p[2]) << 16) |
         (std::uint32_t(p[3]) << 24);
}

void write_u32_le(std::ostream& out, std::uint32_t v) {
  const char b[4] = {char(v & 0xff), char((v >> 8) & 0xff), char((v >> 16) & 0xff), char((v >> 24) & 0xff)};
  out.write(b, 4);
}

void write_f32_le(std::ostream& out, float f) { write_u32_le(out, std::bit_cast<std::uint32_t>(f)); }

bool starts_with_solid(const std::string& bytes) {
  std::size_t i = 0;
  while (i < bytes.size() && std::isspace(static_cast<unsigned char>(bytes[i]))) ++i;
  return bytes.compare(i, 5, "solid") == 0;
}

RawMesh parse_binary(const std::string& bytes) {
  if (bytes.size() < 84) throw Error(ErrorCode::parse_error, "binary STL shorter than its 84-byte header");
  const auto* data = reinterpret_cast<const unsigned char*>(bytes.data());
  const std::uint32_t count = read_u32_le(data + 80);
  const std::uint64_t expected = 84ULL + 50ULL * count;
  if (expected != bytes.size()) {
    std::ostringstream msg;
    msg << "binary STL declares " << count << " facets (" << expected << " bytes) but file has " << bytes.size()
        << " bytes";
    throw Error(ErrorCode::parse_error, msg.str());
  }
  RawMesh mesh;
  mesh.source_format = StlFormat::binary;
  mesh.vertices.resize(3 * Eigen::Index(count), 3);
  mesh.faces.resize(count, 3);
  for (std::uint32_t f = 0; f < count; ++f) {
    const unsigned char* rec = data + 84 + 50ULL * f;
    for (int k = 0; k < 3; ++k) {
      const Eigen::Index v = 3 * Eigen::Index(f) + k;
      for (int c = 0; c < 3; ++c) mesh.vertices(v, c) = read_f32_le(rec + 12 + 12 * k + 4 * c);
      mesh.faces(f, k) = static_cast<int>(v);
    }
  }
  return mesh;
}

RawMesh parse_ascii(const std::string& bytes) {
  std::istringstream in(bytes);
  std::string token;
  std::vector<double> coords;
  auto expect = [&](std::string_view word) {
    if (!(in >> token) || token != word) {
      throw Error(ErrorCode::parse_error, "ASCII STL: expected '" + std::string(word) + "', got '" + token + "'");
    }
  };
  auto read_double = [&] {
    if (!(in >> token)) throw Error(ErrorCode::parse_error, "ASCII STL: truncated coordinate");
    try {
      std::size_t used = 0;
      const double v = std::stod(token, &used);
      if (used != token.size()) throw std::invalid_argument(token);
      return v;
    } catch (const std::exception&) {
      throw Error(ErrorCode::parse_error, "ASCII STL: bad number '" + token + "'");
    }
  };

  bool saw_solid = false;
  while (in >> token) {
    if (token == "solid") {
      saw_solid = true;
      std::string rest;
      std::getline(in, rest);
      continue;
    }
    if (token == "endsolid") {
      std::string rest;
      std::getline(in, rest);
      continue;
    }
    if (token != "facet") throw Error(ErrorCode::parse_error, "ASCII STL: unexpected token '" + token + "'");
    if (!saw_solid) throw Error(ErrorCode::parse_error, "ASCII STL: facet before 'solid'");
    expect("normal");
    for (int c = 0; c < 3; ++c) read_double();
    expect("outer");
    expect("loop");
    for (int k = 0; k < 3; ++k) {
      expect("vertex");
      for (int c = 0; c < 3; ++c) coords.push_back(read_double());
    }
    expect("endloop");
    expect("endfacet");
  }
  if (!saw_solid) throw Error(ErrorCode::parse_error, "ASCII STL: missing 'solid'");

  RawMesh mesh;
  mesh.source_format = StlFormat::ascii;
  const Eigen::Index nv = static_cast<Eigen::Index>(coords.size() / 3);
  mesh.vertices.resize(nv, 3);
  for (Eigen::Index v = 0; v < nv; ++v)
    for (int c = 0; c < 3; ++c) mesh.vertices(v, c) = coords[3 * v + c];
  mesh.faces.resize(nv / 3, 3);
  for (Eigen::Index f = 0; f < nv / 3; ++f)
    for (int k = 0; k < 3; ++k) mesh.faces(f, k) = static_cast<int>(3 * f + k);
  return mesh;
}

struct CellKey {
  std::int64_t x, y, z;
  bool operator==(const CellKey&) const = default;
};

struct CellHash {
  std::size_t operator()(const CellKey& k) const noexcept {
    std::uint64_t h = static_cast<std::uint64_t>(k.x) * 0x9e3779b97f4a7c15ULL;
    h ^= static_cast<std::uint64_t>(k.y) * 0xc2b2ae3d27d4eb4fULL + (h << 6) + (h >> 2);
    h ^= static_cast<std::uint64_t>(k.z) * 0x165667b19e3779f9ULL + (h << 6) + (h >> 2);
    return static_cast<std::size_t>(h);
  }
};

// Maps every vertex to the first earlier vertex within `tol`; representatives
// are pairwise farther apart than `tol`, so a second pass merges nothing.
std::vector<int> merge_vertices(const Points& v, double tol) {
  std::vector<int> rep(v.rows());
  if (tol <= 0.0) {
    std::map<std::array<double, 3>, int> seen;
    for (Eigen::Index i = 0; i < v.rows(); ++i) {
      auto [it, inserted] = seen.try_emplace({v(i, 0), v(i, 1), v(i, 2)}, static_cast<int>(i));
      rep[i] = it->second;
    }
    return rep;
  }
  std::unordered_map<CellKey, std::vector<int>, CellHash> cells;
  const double tol2 = tol * tol;
  for (Eigen::Index i = 0; i < v.rows(); ++i) {
    const CellKey key{static_cast<std::int64_t>(std::floor(v(i, 0) / tol)),
                      static_cast<std::int64_t>(std::floor(v(i, 1) / tol)),
                      static_cast<std::int64_t>(std::floor(v(i, 2) / tol))};
    int found = -1;
    for (int dx = -1; dx <= 1 && found < 0; ++dx)
      for (int dy = -1; dy <= 1 && found < 0; ++dy)
        for (int dz = -1; dz <= 1 && found < 0; ++dz) {
          auto it = cells.find({key.x + dx, key.y + dy, key.z + dz});
          if (it == cells.end()) continue;
          for (int r : it->second) {
            if ((v.row(i) - v.row(r)).squaredNorm() <= tol2 && (found < 0 || r < found)) found = r;
          }
        }
    if (found >= 0) {
      rep[i] = found;
    } else {
      rep[i] = static_cast<int>(i);
      cells[key].push_back(static_cast<int>(i));
    }
  }
  return rep;
}

std::uint64_t edge_key(int a, int b) {
  const auto lo = static_cast<std::uint64_t>(std::min(a, b));
  const auto hi = static_cast<std::uint64_t>(std::max(a, b));
  return (lo << 32) | hi;
}

// True when face f traverses edge (a, b) in the a -> b direction.
bool traverses(const Triangles& faces, Eigen::Index f, int a, int b) {
  for (int k = 0; k < 3; ++k)
    if (faces(f, k) == a && faces(f, (k + 1) % 3) == b) return true;
  return false;
}

}  // namespace

RawMesh parse_stl(const std::string& bytes) {
  if (bytes.empty()) throw Error(ErrorCode::parse_error, "empty STL data");
  if (starts_with_solid(bytes)) {
    // Some exporters write "solid" into binary headers; the exact binary
    // length is the tie breaker.
    if (bytes.size() >= 84) {
      const auto* data = reinterpret_cast<const unsigned char*>(bytes.data());
      const std::uint64_t expected = 84ULL + 50ULL * read_u32_le(data + 80);
      if (expected == bytes.size() && bytes.find("facet") == std::string::npos) return parse_binary(bytes);
    }
    return parse_ascii(bytes);
  }
  return parse_binary(bytes);
}

RawMesh load_stl(const std::filesystem::path& path) {
  std::ifstream in(path, std::ios::binary);
  if (!in) throw Error(ErrorCode::io_error, "cannot open '" + path.string() + "'");
  std::ostringstream buffer;
  buffer << in.rdbuf();
  if (in.bad()) throw Error(ErrorCode::io_error, "read failure on '" + path.string() + "'");
  return parse_stl(buffer.str());
}

void save_stl(const std::filesystem::path& path, const RawMesh& mesh, StlFormat format) {
  std::ofstream out(path, std::ios::binary);
  if (!out) throw Error(ErrorCode::io_error, "cannot write '" + path.string() + "'");
  auto normal_of = [&](Eigen::Index f) {
    const Vec3 a = mesh.vertices.row(mesh.faces(f, 0)).transpose();
    const Vec3 b = mesh.vertices.row(mesh.faces(f, 1)).transpose();
    const Vec3 c = mesh.vertices.row(mesh.faces(f, 2)).transpose();
    const Vec3 n = (b - a).cross(c - a);
    return n.norm() > 0 ? Vec3(n.normalized()) : Vec3::Zero();
  };
  if (format == StlFormat::ascii) {
    out.precision(9);
    out << "solid echosim\n";
    for (Eigen::Index f = 0; f < mesh.face_count(); ++f) {
      const Vec3 n = normal_of(f);
      out << "  facet normal " << n.x() << ' ' << n.y() << ' ' << n.z() << "\n    outer loop\n";
      for (int k = 0; k < 3; ++k) {
        const auto v = mesh.vertices.row(mesh.faces(f, k));
        out << "      vertex " << v(0) << ' ' << v(1) << ' ' << v(2) << '\n';
      }
      out << "    endloop\n  endfacet\n";
    }
    out << "endsolid echosim\n";
  } else {
    char header[80] = {};
    std::memcpy(header, "echosim binary STL", 18);
    out.write(header, 80);
    write_u32_le(out, static_cast<std::uint32_t>(mesh.face_count()));
    for (Eigen::Index f = 0; f < mesh.face_count(); ++f) {
      const Vec3 n = normal_of(f);
      for (int c = 0; c < 3; ++c) write_f32_le(out, static_cast<float>(n(c)));
      for (int k = 0; k < 3; ++k)
        for (int c = 0; c < 3; ++c) write_f32_le(out, static_cast<float>(mesh.vertices(mesh.faces(f, k), c)));
      out.write("\0\0", 2);
    }
  }
  if (!out) throw Error(ErrorCode::io_error, "write failure on '" + path.string() + "'");
}

void compute_normals(Mesh& mesh) {
  const Eigen::Index nf = mesh.face_count();
  const Eigen::Index nv = mesh.vertex_count();
  mesh.geometric_normals.resize(nf, 3);
  mesh.face_normals.resize(nf, 3);
  mesh.face_areas.resize(nf);
  mesh.vertex_normals = Points::Zero(nv, 3);
  for (Eigen::Index f = 0; f < nf; ++f) {
    const Vec3 a = mesh.corner(f, 0);
    const Vec3 cross = (mesh.corner(f, 1) - a).cross(mesh.corner(f, 2) - a);
    const double len = cross.norm();
    mesh.face_areas(f) = 0.5 * len;
    mesh.geometric_normals.row(f) = (len > 0 ? Vec3(cross / len) : Vec3(Vec3::UnitZ())).transpose();
    // Max (1999) corner weights, exact for vertices on a sphere.
    for (int k = 0; k < 3; ++k) {
      const Vec3 e1 = mesh.corner(f, (k + 1) % 3) - mesh.corner(f, k);
      const Vec3 e2 = mesh.corner(f, (k + 2) % 3) - mesh.corner(f, k);
      const double w = e1.squaredNorm() * e2.squaredNorm();
      if (w > 0) mesh.vertex_normals.row(mesh.faces(f, k)) += (cross / w).transpose();
    }
  }
  for (Eigen::Index v = 0; v < nv; ++v) {
    const double len = mesh.vertex_normals.row(v).norm();
    if (len > 0) mesh.vertex_normals.row(v) /= len;
  }
  // Vertices whose incident normals cancel fall back to an incident face.
  for (Eigen::Index f = 0; f < nf; ++f)
    for (int k = 0; k < 3; ++k)
      if (mesh.vertex_normals.row(mesh.faces(f, k)).squaredNorm() == 0.0)
        mesh.vertex_normals.row(mesh.faces(f, k)) = mesh.geometric_normals.row(f);
  for (Eigen::Index f = 0; f < nf; ++f) {
    Vec3 avg = Vec3::Zero();
    for (int k = 0; k < 3; ++k) avg += mesh.vertex_normals.row(mesh.faces(f, k)).transpose();
    const double len = avg.norm();
    mesh.face_normals.row(f) = len > 1e-300 ? Vec3(avg / len).transpose() : Vec3(mesh.geometric_normals.row(f));
  }
}

Mesh repair_mesh(const RawMesh& raw, double merge_tolerance, RepairReport* report) {
  RepairReport local;
  RepairReport& rep = report ? *report : local;
  rep = RepairReport{};
  rep.raw_vertices = raw.vertex_count();
  rep.raw_faces = raw.face_count();
  if (raw.face_count() == 0) throw Error(ErrorCode::empty_mesh, "mesh has no faces");
  if ((raw.faces.array() < 0).any() || (raw.faces.array() >= raw.vertex_count()).any())
    throw Error(ErrorCode::invalid_argument, "face index out of range");
  if (!raw.vertices.allFinite()) throw Error(ErrorCode::invalid_argument, "non-finite vertex coordinate");

  const std::vector<int> rep_of = merge_vertices(raw.vertices, merge_tolerance);

  // Faces on representatives; drop degenerate (collapsed or altitude below
  // the merge tolerance) and duplicate (same vertex set) faces.
  std::vector<std::array<int, 3>> kept;
  kept.reserve(raw.face_count());
  std::set<std::array<int, 3>> seen;
  for (Eigen::Index f = 0; f < raw.face_count(); ++f) {
    std::array<int, 3> tri{rep_of[raw.faces(f, 0)], rep_of[raw.faces(f, 1)], rep_of[raw.faces(f, 2)]};
    if (tri[0] == tri[1] || tri[1] == tri[2] || tri[0] == tri[2]) {
      ++rep.degenerate_faces;
      continue;
    }
    const Vec3 a = raw.vertices.row(tri[0]).transpose();
    const Vec3 b = raw.vertices.row(tri[1]).transpose();
    const Vec3 c = raw.vertices.row(tri[2]).transpose();
    const double twice_area = (b - a).cross(c - a).norm();
    const double longest = std::max({(b - a).norm(), (c - b).norm(), (a - c).norm()});
    if (twice_area == 0.0 || twice_area / longest < merge_tolerance) {
      ++rep.degenerate_faces;
      continue;
    }
    std::array<int, 3> sorted = tri;
    std::sort(sorted.begin(), sorted.end());
    if (!seen.insert(sorted).second) {
      ++rep.duplicate_faces;
      continue;
    }
    kept.push_back(tri);
  }
  if (kept.empty()) throw Error(ErrorCode::empty_mesh, "all faces are degenerate");

  // Compact to referenced vertices, preserving first-occurrence order.
  std::vector<int> new_index(raw.vertex_count(), -1);
  std::vector<int> order;
  for (auto& tri : kept)
    for (int& v : tri) {
      if (new_index[v] < 0) {
        new_index[v] = static_cast<int>(order.size());
        order.push_back(v);
      }
    }
  std::sort(order.begin(), order.end());
  for (std::size_t i = 0; i < order.size(); ++i) new_index[order[i]] = static_cast<int>(i);

  Mesh mesh;
  mesh.vertices.resize(static_cast<Eigen::Index>(order.size()), 3);
  for (std::size_t i = 0; i < order.size(); ++i) mesh.vertices.row(i) = raw.vertices.row(order[i]);
  mesh.faces.resize(static_cast<Eigen::Index>(kept.size()), 3);
  for (std::size_t f = 0; f < kept.size(); ++f)
    for (int k = 0; k < 3; ++k) mesh.faces(f, k) = new_index[kept[f][k]];
  rep.merged_vertices = raw.vertex_count() - mesh.vertex_count();

  // Edge -> incident faces.
  const Eigen::Index nf = mesh.face_count();
  std::unordered_map<std::uint64_t, std::vector<int>> edges;
  edges.reserve(3 * nf);
  for (Eigen::Index f = 0; f < nf; ++f)
    for (int k = 0; k < 3; ++k) edges[edge_key(mesh.faces(f, k), mesh.faces(f, (k + 1) % 3))].push_back(int(f));
  for (const auto& [key, list] : edges) {
    if (list.size() == 1) ++rep.boundary_edges;
    if (list.size() > 2) ++rep.nonmanifold_edges;
  }

  // Consistent winding by BFS across manifold edges.
  std::vector<int> flip(nf, 0);
  std::vector<int> component(nf, -1);
  int n_components = 0;
  for (Eigen::Index seed = 0; seed < nf; ++seed) {
    if (component[seed] >= 0) continue;
    const int comp = n_components++;
    std::queue<int> queue;
    queue.push(int(seed));
    component[seed] = comp;
    while (!queue.empty()) {
      const int f = queue.front();
      queue.pop();
      for (int k = 0; k < 3; ++k) {
        const int a = mesh.faces(f, k);
        const int b = mesh.faces(f, (k + 1) % 3);
        const auto& list = edges[edge_key(a, b)];
        if (list.size() != 2) continue;
        const int g = list[0] == f ? list[1] : list[0];
        // Original direction along a->b for f is true; g must run b->a once
        // both orientations are applied.
        const bool same_direction = traverses(mesh.faces, g, a, b);
        const int wanted = flip[f] ^ (same_direction ? 1 : 0);
        if (component[g] < 0) {
          component[g] = comp;
          flip[g] = wanted;
          queue.push(g);
        } else if (flip[g] != wanted) {
          rep.orientation_failure = true;
        }
      }
    }
  }
  rep.components = n_components;
  if (rep.orientation_failure) rep.warnings.emplace_back("non-orientable surface; best-effort orientation kept");
  if (rep.boundary_edges > 0) rep.warnings.emplace_back("open mesh: boundary edges present, holes are not filled");
  if (rep.nonmanifold_edges > 0) rep.warnings.emplace_back("non-manifold edges present");

  auto apply_flip = [&](Eigen::Index f) { std::swap(mesh.faces(f, 1), mesh.faces(f, 2)); };
  for (Eigen::Index f = 0; f < nf; ++f)
    if (flip[f]) apply_flip(f);

  // Outward orientation per component: area-weighted vote of face normals
  // against the direction from the component centroid to each face.
  std::vector<Vec3> centroid(n_components, Vec3::Zero());
  std::vector<double> area(n_components, 0.0);
  std::vector<Vec3> cross(nf);
  for (Eigen::Index f = 0; f < nf; ++f) {
    const Vec3 a = mesh.corner(f, 0);
    cross[f] = (mesh.corner(f, 1) - a).cross(mesh.corner(f, 2) - a);
    const double w = 0.5 * cross[f].norm();
    centroid[component[f]] += w * mesh.face_center(f);
    area[component[f]] += w;
  }
  for (int c = 0; c < n_components; ++c) centroid[c] /= area[c];
  std::vector<double> vote(n_components, 0.0);
  std::vector<double> scale(n_components, 0.0);
  for (Eigen::Index f = 0; f < nf; ++f) {
    const Vec3 radial = mesh.face_center(f) - centroid[component[f]];
    vote[component[f]] += 0.5 * cross[f].dot(radial);
    scale[component[f]] += 0.5 * cross[f].norm() * radial.norm();
  }
  for (Eigen::Index f = 0; f < nf; ++f) {
    const int c = component[f];
    if (vote[c] < -1e-9 * scale[c]) {
      apply_flip(f);
      flip[f] ^= 1;
    }
  }
  for (Eigen::Index f = 0; f < nf; ++f) rep.flipped_faces += flip[f];

  compute_normals(mesh);
  return mesh;
}

RawMesh to_raw(const Mesh& mesh) {
  RawMesh raw;
  raw.vertices = mesh.vertices;
  raw.faces = mesh.faces;
  return raw;
}

Mesh transformed(const Mesh& mesh, const Mat4& transform) {
  const Mat3 rot = transform.topLeftCorner<3, 3>();
  const Vec3 shift = transform.topRightCorner<3, 1>();
  Mesh out = mesh;
  out.vertices = (mesh.vertices * rot.transpose()).rowwise() + shift.transpose();
  out.vertex_normals = mesh.vertex_normals * rot.transpose();
  out.face_normals = mesh.face_normals * rot.transpose();
  out.geometric_normals = mesh.geometric_normals * rot.transpose();
  return out;
}

RawMesh scaled(const RawMesh& mesh, double scale) {
  RawMesh out = mesh;
  out.vertices *= scale;
  return out;
}

RawMesh transformed(const RawMesh& mesh, const Mat4& transform) {
  RawMesh out = mesh;
  const Mat3 rot = transform.topLeftCorner<3, 3>();
  out.vertices = (mesh.vertices * rot.transpose()).rowwise() + transform.topRightCorner<3, 1>().transpose();
  return out;
}

namespace {

template <typename M>
void append_geometry(M& out, const M& part, Eigen::Index v0, Eigen::Index f0) {
  out.vertices.middleRows(v0, part.vertex_count()) = part.vertices;
  out.faces.middleRows(f0, part.face_count()) = part.faces.array() + static_cast<int>(v0);
}

}  // namespace

Mesh concatenate(const std::vector<Mesh>& parts) {
  Eigen::Index nv = 0, nf = 0;
  for (const auto& p : parts) {
    nv += p.vertex_count();
    nf += p.face_count();
  }
  Mesh out;
  out.vertices.resize(nv, 3);
  out.faces.resize(nf, 3);
  out.vertex_normals.resize(nv, 3);
  out.face_normals.resize(nf, 3);
  out.geometric_normals.resize(nf, 3);
  out.face_areas.resize(nf);
  Eigen::Index v0 = 0, f0 = 0;
  for (const auto& p : parts) {
    append_geometry(out, p, v0, f0);
    out.vertex_normals.middleRows(v0, p.vertex_count()) = p.vertex_normals;
    out.face_normals.middleRows(f0, p.face_count()) = p.face_normals;
    out.geometric_normals.middleRows(f0, p.face_count()) = p.geometric_normals;
    out.face_areas.segment(f0, p.face_count()) = p.face_areas;
    v0 += p.vertex_count();
    f0 += p.face_count();
  }
  return out;
}

RawMesh concatenate(const std::vector<RawMesh>& parts) {
  Eigen::Index nv = 0, nf = 0;
  for (const auto& p : parts) {
    nv += p.vertex_count();
    nf += p.face_count();
  }
  RawMesh out;
  out.vertices.resize(nv, 3);
  out.faces.resize(nf, 3);
  Eigen::Index v0 = 0, f0 = 0;
  for (const auto& p : parts) {
    append_geometry(out, p, v0, f0);
    v0 += p.vertex_count();
    f0 += p.face_count();
  }
  if (!parts.empty()) out.source_format = parts.front().source_format;
  return out;
}

BoundingBox bounding_box(const Points& vertices) {
  if (vertices.rows() == 0) return {Vec3::Zero(), Vec3::Zero()};
  return {vertices.colwise().minCoeff().transpose(), vertices.colwise().maxCoeff().transpose()};
}

namespace primitives {

namespace {

RawMesh from_lists(const std::vector<Vec3>& verts, const std::vector<std::array<int, 3>>& tris) {
  RawMesh mesh;
  mesh.vertices.resize(static_cast<Eigen::Index>(verts.size()), 3);
  for (std::size_t i = 0; i < verts.size(); ++i) mesh.vertices.row(i) = verts[i].transpose();
  mesh.faces.resize(static_cast<Eigen::Index>(tris.size()), 3);
  for (std::size_t i = 0; i < tris.size(); ++i)
    for (int k = 0; k < 3; ++k) mesh.faces(i, k) = tris[i][k];
  return mesh;
}

}  // namespace

RawMesh icosphere(double radius, int subdivisions) {
  const double t = (1.0 + std::sqrt(5.0)) / 2.0;
  std::vector<Vec3> verts = {{-1, t, 0}, {1, t, 0}, {-1, -t, 0}, {1, -t, 0}, {0, -1, t}, {0, 1, t},
                             {0, -1, -t}, {0, 1, -t}, {t, 0, -1}, {t, 0, 1}, {-t, 0, -1}, {-t, 0, 1}};
  for (auto& v : verts) v.normalize();
  std::vector<std::array<int, 3>> tris = {{0, 11, 5}, {0, 5, 1},  {0, 1, 7},   {0, 7, 10}, {0, 10, 11},
                                          {1, 5, 9},  {5, 11, 4}, {11, 10, 2}, {10, 7, 6}, {7, 1, 8},
                                          {3, 9, 4},  {3, 4, 2},  {3, 2, 6},   {3, 6, 8},  {3, 8, 9},
                                          {4, 9, 5},  {2, 4, 11}, {6, 2, 10},  {8, 6, 7},  {9, 8, 1}};
  for (int s = 0; s < subdivisions; ++s) {
    std::map<std::pair<int, int>, int> midpoint;
    auto mid = [&](int a, int b) {
      const auto key = std::minmax(a, b);
      auto it = midpoint.find(key);
      if (it != midpoint.end()) return it->second;
      verts.push_back((verts[a] + verts[b]).normalized());
      const int idx = static_cast<int>(verts.size()) - 1;
      midpoint.emplace(key, idx);
      return idx;
    };
    std::vector<std::array<int, 3>> next;
    next.reserve(tris.size() * 4);
    for (const auto& tri : tris) {
      const int ab = mid(tri[0], tri[1]);
      const int bc = mid(tri[1], tri[2]);
      const int ca = mid(tri[2], tri[0]);
      next.push_back({tri[0], ab, ca});
      next.push_back({tri[1], bc, ab});
      next.push_back({tri[2], ca, bc});
      next.push_back({ab, bc, ca});
    }
    tris = std::move(next);
  }
  for (auto& v : verts) v *= radius;
  return from_lists(verts, tris);
}

RawMesh plate(double size, int divisions) {
  std::vector<Vec3> verts;
  std::vector<std::array<int, 3>> tris;
  const int n = std::max(1, divisions);
  for (int j = 0; j <= n; ++j)
    for (int i = 0; i <= n; ++i)
      verts.emplace_back(0.0, size * (double(i) / n - 0.5), size * (double(j) / n - 0.5));
  auto id = [n](int i, int j) { return j * (n + 1) + i; };
  for (int j = 0; j < n; ++j)
    for (int i = 0; i < n; ++i) {
      tris.push_back({id(i, j), id(i + 1, j), id(i + 1, j + 1)});
      tris.push_back({id(i, j), id(i + 1, j + 1), id(i, j + 1)});
    }
  return from_lists(verts, tris);
}

RawMesh grid(double size, int divisions) {
  std::vector<Vec3> verts;
  std::vector<std::array<int, 3>> tris;
  const int n = std::max(1, divisions);
  for (int j = 0; j <= n; ++j)
    for (int i = 0; i <= n; ++i) verts.emplace_back(size * (double(i) / n - 0.5), size * (double(j) / n - 0.5), 0.0);
  auto id = [n](int i, int j) { return j * (n + 1) + i; };
  for (int j = 0; j < n; ++j)
    for (int i = 0; i < n; ++i) {
      tris.push_back({id(i, j), id(i + 1, j), id(i + 1, j + 1)});
      tris.push_back({id(i, j), id(i + 1, j + 1), id(i, j + 1)});
    }
  return from_lists(verts, tris);
}

RawMesh box(const Vec3& extent) {
  const Vec3 h = extent / 2.0;
  std::vector<Vec3> verts;
  for (int i = 0; i < 8; ++i)
    verts.emplace_back((i & 1) ? h.x() : -h.x(), (i & 2) ? h.y() : -h.y(), (i & 4) ? h.z() : -h.z());
  const std::vector<std::array<int, 3>> tris = {{0, 2, 3}, {0, 3, 1}, {4, 5, 7}, {4, 7, 6}, {0, 1, 5}, {0, 5, 4},
                                                {2, 6, 7}, {2, 7, 3}, {0, 4, 6}, {0, 6, 2}, {1, 3, 7}, {1, 7, 5}};
  return from_lists(verts, tris);
}

RawMesh cylinder(double radius, double height, int segments, int rings) {
  std::vector<Vec3> verts;
  std::vector<std::array<int, 3>> tris;
  for (int k = 0; k <= rings; ++k)
    for (int s = 0; s < segments; ++s) {
      const double phi = 2.0 * kPi * s / segments;
      verts.emplace_back(radius * std::cos(phi), radius * std::sin(phi), height * (double(k) / rings - 0.5));
    }
  auto id = [segments](int s, int k) { return k * segments + (s % segments); };
  for (int k = 0; k < rings; ++k)
    for (int s = 0; s < segments; ++s) {
      tris.push_back({id(s, k), id(s + 1, k), id(s + 1, k + 1)});
      tris.push_back({id(s, k), id(s + 1, k + 1), id(s, k + 1)});
    }
  return from_lists(verts, tris);
}

}  // namespace primitives

}  // namespace echosim
