#pragma once

#include <algorithm>
#include <array>
#include <cmath>
#include <fstream>
#include <functional>
#include <map>
#include <sstream>
#include <string>
#include <utility>
#include <vector>

#include "tedg/types.hpp"

namespace tedg {

// Triangulation of a planar domain plus the derived geometry the solver
// needs. Element k maps the reference triangle (-1,-1),(1,-1),(-1,1) to the
// physical triangle through an affine map; local face f joins local vertices
// f and (f+1)%3, so face 0 is the reference edge s=-1, face 1 the hypotenuse,
// face 2 the edge r=-1.
struct Mesh {
  Matrix vertices;       // NV x 2
  IntMatrix triangles;   // K x 3, counter-clockwise
  IntVector region_tags; // K

  // Affine map derivatives d(x,y)/d(r,s) and their inverses, per element.
  Vector xr, xs, yr, ys;
  Vector rx, ry, sx, sy;
  Vector jac; // xr*ys - xs*yr, positive; physical area = 2*jac

  Matrix normal_x, normal_y; // K x 3, outward unit normals
  Matrix face_length;        // K x 3
  Matrix face_scaling;       // K x 3, face length / reference edge length

  Vector h;   // longest edge per element
  Vector tau; // inscribed circle diameter per element

  // neighbor(k,f) is the element across face f, or -1 on the boundary;
  // neighbor_face(k,f) is the matching local face id on that element.
  IntMatrix neighbor;
  IntMatrix neighbor_face;

  int num_elements() const { return static_cast<int>(triangles.rows()); }
  int num_vertices() const { return static_cast<int>(vertices.rows()); }

  bool is_boundary(int k, int f) const { return neighbor(k, f) < 0; }

  Vec2 vertex(int v) const { return {vertices(v, 0), vertices(v, 1)}; }

  Vec2 centroid(int k) const {
    Vec2 c{0.0, 0.0};
    for (int i = 0; i < 3; ++i) {
      c.x += vertices(triangles(k, i), 0) / 3.0;
      c.y += vertices(triangles(k, i), 1) / 3.0;
    }
    return c;
  }

  // Physical image of reference coordinates (r,s) under element k's map.
  Vec2 map_to_physical(int k, Real r, Real s) const {
    const Vec2 v0 = vertex(triangles(k, 0));
    const Vec2 v1 = vertex(triangles(k, 1));
    const Vec2 v2 = vertex(triangles(k, 2));
    return {0.5 * (-(r + s) * v0.x + (1.0 + r) * v1.x + (1.0 + s) * v2.x),
            0.5 * (-(r + s) * v0.y + (1.0 + r) * v1.y + (1.0 + s) * v2.y)};
  }

  // Reference coordinates of a physical point under element k's inverse map.
  Vec2 map_to_reference(int k, Real x, Real y) const {
    const Vec2 v0 = vertex(triangles(k, 0));
    const Real dx = x - v0.x;
    const Real dy = y - v0.y;
    return {rx[k] * dx + ry[k] * dy - 1.0, sx[k] * dx + sy[k] * dy - 1.0};
  }
};

namespace detail {

inline void finalize_geometry(Mesh& mesh) {
  const int K = mesh.num_elements();
  if (K == 0) throw MeshError("mesh has no triangles");

  // Repair orientation so every jacobian is positive.
  for (int k = 0; k < K; ++k) {
    const Vec2 a = mesh.vertex(mesh.triangles(k, 0));
    const Vec2 b = mesh.vertex(mesh.triangles(k, 1));
    const Vec2 c = mesh.vertex(mesh.triangles(k, 2));
    const Real twice_area = cross(b - a, c - a);
    if (std::abs(twice_area) < 1e-14 * (norm(b - a) + norm(c - a) + 1e-300))
      throw MeshError("degenerate triangle " + std::to_string(k));
    if (twice_area < 0.0) std::swap(mesh.triangles(k, 1), mesh.triangles(k, 2));
  }

  mesh.xr.resize(K); mesh.xs.resize(K); mesh.yr.resize(K); mesh.ys.resize(K);
  mesh.rx.resize(K); mesh.ry.resize(K); mesh.sx.resize(K); mesh.sy.resize(K);
  mesh.jac.resize(K);
  mesh.normal_x.resize(K, 3);
  mesh.normal_y.resize(K, 3);
  mesh.face_length.resize(K, 3);
  mesh.face_scaling.resize(K, 3);
  mesh.h.resize(K);
  mesh.tau.resize(K);

  const Real ref_edge_length[3] = {2.0, 2.0 * std::sqrt(2.0), 2.0};

  for (int k = 0; k < K; ++k) {
    const Vec2 v0 = mesh.vertex(mesh.triangles(k, 0));
    const Vec2 v1 = mesh.vertex(mesh.triangles(k, 1));
    const Vec2 v2 = mesh.vertex(mesh.triangles(k, 2));

    mesh.xr[k] = 0.5 * (v1.x - v0.x);
    mesh.xs[k] = 0.5 * (v2.x - v0.x);
    mesh.yr[k] = 0.5 * (v1.y - v0.y);
    mesh.ys[k] = 0.5 * (v2.y - v0.y);
    const Real J = mesh.xr[k] * mesh.ys[k] - mesh.xs[k] * mesh.yr[k];
    if (J <= 0.0) throw MeshError("non-positive jacobian in triangle " + std::to_string(k));
    mesh.jac[k] = J;
    mesh.rx[k] = mesh.ys[k] / J;
    mesh.ry[k] = -mesh.xs[k] / J;
    mesh.sx[k] = -mesh.yr[k] / J;
    mesh.sy[k] = mesh.xr[k] / J;

    Real perimeter = 0.0;
    Real h_max = 0.0;
    const Vec2 verts[3] = {v0, v1, v2};
    for (int f = 0; f < 3; ++f) {
      const Vec2 a = verts[f];
      const Vec2 b = verts[(f + 1) % 3];
      const Vec2 t = b - a;
      const Real len = norm(t);
      mesh.face_length(k, f) = len;
      mesh.face_scaling(k, f) = len / ref_edge_length[f];
      mesh.normal_x(k, f) = t.y / len;
      mesh.normal_y(k, f) = -t.x / len;
      perimeter += len;
      h_max = std::max(h_max, len);
    }
    mesh.h[k] = h_max;
    mesh.tau[k] = 4.0 * (2.0 * J) / perimeter;
  }
}

inline void finalize_connectivity(Mesh& mesh) {
  const int K = mesh.num_elements();
  mesh.neighbor = IntMatrix::Constant(K, 3, -1);
  mesh.neighbor_face = IntMatrix::Constant(K, 3, -1);

  std::map<std::pair<int, int>, std::pair<int, int>> open_edges;
  for (int k = 0; k < K; ++k) {
    for (int f = 0; f < 3; ++f) {
      const int a = mesh.triangles(k, f);
      const int b = mesh.triangles(k, (f + 1) % 3);
      const auto key = std::minmax(a, b);
      auto it = open_edges.find(key);
      if (it == open_edges.end()) {
        open_edges.emplace(key, std::make_pair(k, f));
      } else if (it->second.first < 0) {
        throw MeshError("edge shared by more than two triangles near triangle " +
                        std::to_string(k));
      } else {
        const auto [k2, f2] = it->second;
        mesh.neighbor(k, f) = k2;
        mesh.neighbor_face(k, f) = f2;
        mesh.neighbor(k2, f2) = k;
        mesh.neighbor_face(k2, f2) = f;
        it->second.first = -1;
      }
    }
  }
}

// Reject meshes where boundary edges of different elements overlap along a
// segment of positive length without sharing both endpoints (hanging nodes,
// partial edge contact). Interior edges were already matched exactly by
// vertex ids, so only boundary faces can exhibit this.
inline void check_conformity(const Mesh& mesh) {
  struct Edge {
    Vec2 a, b;
    int k, f;
  };
  std::vector<Edge> boundary;
  for (int k = 0; k < mesh.num_elements(); ++k)
    for (int f = 0; f < 3; ++f)
      if (mesh.is_boundary(k, f))
        boundary.push_back({mesh.vertex(mesh.triangles(k, f)),
                            mesh.vertex(mesh.triangles(k, (f + 1) % 3)), k, f});

  const int B = static_cast<int>(boundary.size());
  for (int i = 0; i < B; ++i) {
    for (int j = i + 1; j < B; ++j) {
      if (boundary[i].k == boundary[j].k) continue;
      const Vec2 a1 = boundary[i].a, b1 = boundary[i].b;
      const Vec2 a2 = boundary[j].a, b2 = boundary[j].b;
      const Vec2 t1 = b1 - a1;
      const Real len1 = norm(t1);
      const Real tol = 1e-12 * std::max(len1, norm(b2 - a2));
      if (std::abs(cross(t1, a2 - a1)) > tol || std::abs(cross(t1, b2 - a1)) > tol)
        continue; // not collinear
      // Project the second edge onto the first and measure the overlap.
      const Real p0 = dot(a2 - a1, t1) / (len1 * len1);
      const Real p1 = dot(b2 - a1, t1) / (len1 * len1);
      const Real lo = std::max(0.0, std::min(p0, p1));
      const Real hi = std::min(1.0, std::max(p0, p1));
      if ((hi - lo) * len1 > 1e-10 * len1)
        throw MeshError("non-conforming mesh: boundary edges of triangles " +
                        std::to_string(boundary[i].k) + " and " + std::to_string(boundary[j].k) +
                        " overlap without matching");
    }
  }
}

}  // namespace detail

inline Mesh build_mesh(Matrix vertices, IntMatrix triangles, IntVector region_tags) {
  if (vertices.cols() != 2) throw MeshError("vertices must have two columns");
  if (triangles.cols() != 3) throw MeshError("triangles must have three columns");
  const int NV = static_cast<int>(vertices.rows());
  for (int k = 0; k < triangles.rows(); ++k) {
    for (int i = 0; i < 3; ++i) {
      const int v = triangles(k, i);
      if (v < 0 || v >= NV)
        throw MeshError("triangle " + std::to_string(k) + " references invalid vertex " +
                        std::to_string(v));
    }
    if (triangles(k, 0) == triangles(k, 1) || triangles(k, 1) == triangles(k, 2) ||
        triangles(k, 0) == triangles(k, 2))
      throw MeshError("triangle " + std::to_string(k) + " has repeated vertices");
  }

  Mesh mesh;
  mesh.vertices = std::move(vertices);
  mesh.triangles = std::move(triangles);
  if (region_tags.size() == 0)
    mesh.region_tags = IntVector::Zero(mesh.triangles.rows());
  else if (region_tags.size() == mesh.triangles.rows())
    mesh.region_tags = std::move(region_tags);
  else
    throw MeshError("region tag count does not match triangle count");

  detail::finalize_geometry(mesh);
  detail::finalize_connectivity(mesh);
  detail::check_conformity(mesh);
  return mesh;
}

// Uniform triangulation of the square [lo,hi]^2: n x n cells, each split along
// the diagonal from its lower-left to upper-right corner.
inline Mesh generate_structured_square(int n_per_side, Real lo = -1.0, Real hi = 1.0) {
  if (n_per_side < 1) throw MeshError("generate_structured_square: need n_per_side >= 1");
  if (!(hi > lo)) throw MeshError("generate_structured_square: empty interval");
  const int n = n_per_side;
  const int nv = n + 1;

  Matrix vertices(nv * nv, 2);
  for (int j = 0; j < nv; ++j) {
    for (int i = 0; i < nv; ++i) {
      vertices(j * nv + i, 0) = lo + (hi - lo) * static_cast<Real>(i) / n;
      vertices(j * nv + i, 1) = lo + (hi - lo) * static_cast<Real>(j) / n;
    }
  }

  IntMatrix triangles(2 * n * n, 3);
  int t = 0;
  for (int j = 0; j < n; ++j) {
    for (int i = 0; i < n; ++i) {
      const int a = j * nv + i;
      const int b = j * nv + i + 1;
      const int c = (j + 1) * nv + i + 1;
      const int d = (j + 1) * nv + i;
      triangles.row(t++) << a, b, c;
      triangles.row(t++) << a, c, d;
    }
  }
  return build_mesh(std::move(vertices), std::move(triangles), IntVector());
}

namespace detail {

inline Mesh load_simple_ascii(std::istream& in) {
  long line_no = 0;
  auto next_line = [&](std::string& line) {
    while (std::getline(in, line)) {
      ++line_no;
      const auto pos = line.find_first_not_of(" \t\r");
      if (pos != std::string::npos && line[pos] != '#') return true;
    }
    return false;
  };

  std::string line;
  if (!next_line(line)) throw ParseError("empty mesh file", line_no);
  std::istringstream header(line);
  long nv = 0, nt = 0;
  if (!(header >> nv >> nt) || nv < 3 || nt < 1)
    throw ParseError("expected vertex and triangle counts", line_no);

  Matrix vertices(nv, 2);
  for (long i = 0; i < nv; ++i) {
    if (!next_line(line)) throw ParseError("unexpected end of file in vertex block", line_no);
    std::istringstream ls(line);
    if (!(ls >> vertices(i, 0) >> vertices(i, 1)))
      throw ParseError("expected two vertex coordinates", line_no);
  }

  IntMatrix triangles(nt, 3);
  IntVector tags(nt);
  for (long i = 0; i < nt; ++i) {
    if (!next_line(line)) throw ParseError("unexpected end of file in triangle block", line_no);
    std::istringstream ls(line);
    if (!(ls >> triangles(i, 0) >> triangles(i, 1) >> triangles(i, 2) >> tags(i)))
      throw ParseError("expected three vertex ids and a region tag", line_no);
  }
  return build_mesh(std::move(vertices), std::move(triangles), std::move(tags));
}

inline Mesh load_gmsh22(std::istream& in) {
  long line_no = 0;
  std::string line;
  auto read_line = [&]() {
    if (!std::getline(in, line)) throw ParseError("unexpected end of gmsh file", line_no);
    ++line_no;
    while (!line.empty() && (line.back() == '\r' || line.back() == '\n')) line.pop_back();
  };

  std::map<long, int> node_index;
  std::vector<std::array<Real, 2>> coords;
  std::vector<std::array<int, 3>> tris;
  std::vector<int> tags;
  bool saw_format = false;

  while (std::getline(in, line)) {
    ++line_no;
    while (!line.empty() && (line.back() == '\r' || line.back() == '\n')) line.pop_back();
    if (line == "$MeshFormat") {
      read_line();
      std::istringstream fs(line);
      Real version = 0.0;
      int file_type = -1, data_size = 0;
      if (!(fs >> version >> file_type >> data_size) || file_type != 0)
        throw ParseError("unsupported gmsh format header", line_no);
      if (version < 2.0 || version >= 3.0)
        throw ParseError("unsupported gmsh version (need 2.x ASCII)", line_no);
      saw_format = true;
      read_line();
      if (line != "$EndMeshFormat") throw ParseError("expected $EndMeshFormat", line_no);
    } else if (line == "$Nodes") {
      read_line();
      const long count = std::stol(line);
      for (long i = 0; i < count; ++i) {
        read_line();
        std::istringstream ns(line);
        long id = 0;
        Real x = 0, y = 0, z = 0;
        if (!(ns >> id >> x >> y >> z)) throw ParseError("malformed node line", line_no);
        node_index[id] = static_cast<int>(coords.size());
        coords.push_back({x, y});
      }
      read_line();
      if (line != "$EndNodes") throw ParseError("expected $EndNodes", line_no);
    } else if (line == "$Elements") {
      read_line();
      const long count = std::stol(line);
      for (long i = 0; i < count; ++i) {
        read_line();
        std::istringstream es(line);
        long id = 0;
        int type = 0, ntags = 0;
        if (!(es >> id >> type >> ntags)) throw ParseError("malformed element line", line_no);
        int physical_tag = 0;
        for (int t = 0; t < ntags; ++t) {
          int tag = 0;
          if (!(es >> tag)) throw ParseError("malformed element tags", line_no);
          if (t == 0) physical_tag = tag;
        }
        if (type == 2) {
          long a = 0, b = 0, c = 0;
          if (!(es >> a >> b >> c)) throw ParseError("malformed triangle connectivity", line_no);
          std::array<int, 3> tri{};
          const long ids[3] = {a, b, c};
          for (int v = 0; v < 3; ++v) {
            auto it = node_index.find(ids[v]);
            if (it == node_index.end())
              throw ParseError("triangle references unknown node " + std::to_string(ids[v]),
                               line_no);
            tri[v] = it->second;
          }
          tris.push_back(tri);
          tags.push_back(physical_tag);
        } else if (type != 1 && type != 15) {
          throw ParseError("unsupported gmsh element type " + std::to_string(type), line_no);
        }
      }
      read_line();
      if (line != "$EndElements") throw ParseError("expected $EndElements", line_no);
    }
    // other sections are ignored
  }

  if (!saw_format) throw ParseError("missing $MeshFormat section", line_no);
  if (tris.empty()) throw ParseError("gmsh file contains no triangles", line_no);

  Matrix vertices(coords.size(), 2);
  for (size_t i = 0; i < coords.size(); ++i) {
    vertices(i, 0) = coords[i][0];
    vertices(i, 1) = coords[i][1];
  }
  IntMatrix triangles(tris.size(), 3);
  IntVector region(tris.size());
  for (size_t i = 0; i < tris.size(); ++i) {
    triangles(i, 0) = tris[i][0];
    triangles(i, 1) = tris[i][1];
    triangles(i, 2) = tris[i][2];
    region(i) = tags[i];
  }
  return build_mesh(std::move(vertices), std::move(triangles), std::move(region));
}

}  // namespace detail

enum class MeshFormat { simple_ascii, gmsh22_ascii };

inline MeshFormat mesh_format_from_string(const std::string& name) {
  if (name == "simple_ascii") return MeshFormat::simple_ascii;
  if (name == "gmsh22_ascii") return MeshFormat::gmsh22_ascii;
  throw ConfigError("unknown mesh format '" + name + "'");
}

inline Mesh load_mesh(std::istream& in, MeshFormat format) {
  switch (format) {
    case MeshFormat::simple_ascii: return detail::load_simple_ascii(in);
    case MeshFormat::gmsh22_ascii: return detail::load_gmsh22(in);
  }
  throw ConfigError("unhandled mesh format");
}

inline Mesh load_mesh(const std::string& path, MeshFormat format) {
  std::ifstream in(path);
  if (!in) throw IoError("cannot open mesh file '" + path + "'");
  return load_mesh(in, format);
}

inline Mesh load_mesh(const std::string& path, const std::string& format) {
  return load_mesh(path, mesh_format_from_string(format));
}

// Overwrite region tags by evaluating a point classifier at element centroids.
inline void assign_regions(Mesh& mesh, const std::function<int(Real, Real)>& region_at) {
  for (int k = 0; k < mesh.num_elements(); ++k) {
    const Vec2 c = mesh.centroid(k);
    mesh.region_tags[k] = region_at(c.x, c.y);
  }
}

struct MeshQuality {
  Vector h;     // longest edge per element
  Vector tau;   // inscribed circle diameter per element
  Vector ratio; // h / tau (shape regularity)
  Real h_min = 0.0, h_max = 0.0, ratio_max = 0.0;
};

inline MeshQuality mesh_quality(const Mesh& mesh) {
  MeshQuality q;
  q.h = mesh.h;
  q.tau = mesh.tau;
  q.ratio = (mesh.h.array() / mesh.tau.array()).matrix();
  q.h_min = mesh.h.minCoeff();
  q.h_max = mesh.h.maxCoeff();
  q.ratio_max = q.ratio.maxCoeff();
  return q;
}

}  // namespace tedg
