#include "poroadapt/mesh.hpp"

#include <algorithm>
#include <cmath>
#include <functional>
#include <map>
#include <ostream>
#include <stdexcept>
#include <string>

namespace poroadapt {

std::string_view to_string(BoundaryTag tag) {
  switch (tag) {
    case BoundaryTag::Top: return "TOP";
    case BoundaryTag::Bottom: return "BOTTOM";
    case BoundaryTag::Left: return "LEFT";
    case BoundaryTag::Right: return "RIGHT";
    case BoundaryTag::ReentrantH: return "REENTRANT_H";
    case BoundaryTag::ReentrantV: return "REENTRANT_V";
    case BoundaryTag::None: return "NONE";
  }
  return "NONE";
}

double TriMesh::signed_area(std::size_t t) const {
  const auto& tri = triangles[t];
  const Point2& p0 = nodes[tri[0]];
  const Point2& p1 = nodes[tri[1]];
  const Point2& p2 = nodes[tri[2]];
  return 0.5 * ((p1.x - p0.x) * (p2.y - p0.y) - (p2.x - p0.x) * (p1.y - p0.y));
}

double TriMesh::total_area() const {
  double sum = 0.0;
  for (std::size_t t = 0; t < triangles.size(); ++t) sum += signed_area(t);
  return sum;
}

double TriMesh::mesh_size() const {
  double h = 0.0;
  for (const auto& tri : triangles) {
    for (int e = 0; e < 3; ++e) {
      const Point2& a = nodes[tri[e]];
      const Point2& b = nodes[tri[(e + 1) % 3]];
      h = std::max(h, std::hypot(b.x - a.x, b.y - a.y));
    }
  }
  return h;
}

namespace {

// Collect edges owned by a single triangle, in triangle order, and tag them.
void tag_boundary(TriMesh& mesh, const std::function<BoundaryTag(Point2, Point2)>& classify) {
  std::map<std::pair<int, int>, int> count;
  for (const auto& tri : mesh.triangles) {
    for (int e = 0; e < 3; ++e) {
      int a = tri[e];
      int b = tri[(e + 1) % 3];
      ++count[{std::min(a, b), std::max(a, b)}];
    }
  }
  mesh.boundary_edges.clear();
  for (const auto& tri : mesh.triangles) {
    for (int e = 0; e < 3; ++e) {
      int a = tri[e];
      int b = tri[(e + 1) % 3];
      if (count[{std::min(a, b), std::max(a, b)}] == 1) {
        mesh.boundary_edges.push_back({a, b, classify(mesh.nodes[a], mesh.nodes[b])});
      }
    }
  }
}

bool near(double a, double b, double scale) { return std::abs(a - b) <= 1e-12 * scale; }

}  // namespace

TriMesh build_rect_mesh(int nx, int ny, const Rect& rect) {
  if (nx < 1 || ny < 1) throw std::invalid_argument("build_rect_mesh: nx and ny must be >= 1");
  TriMesh mesh;
  mesh.nodes.reserve(static_cast<std::size_t>((nx + 1) * (ny + 1)));
  for (int j = 0; j <= ny; ++j) {
    for (int i = 0; i <= nx; ++i) {
      // Exact end points keep boundary classification robust.
      double x = (i == nx) ? rect.x1 : rect.x0 + (rect.x1 - rect.x0) * i / nx;
      double y = (j == ny) ? rect.y1 : rect.y0 + (rect.y1 - rect.y0) * j / ny;
      mesh.nodes.push_back({x, y});
    }
  }
  auto id = [nx](int i, int j) { return j * (nx + 1) + i; };
  mesh.triangles.reserve(static_cast<std::size_t>(2 * nx * ny));
  for (int j = 0; j < ny; ++j) {
    for (int i = 0; i < nx; ++i) {
      int a = id(i, j), b = id(i + 1, j), c = id(i + 1, j + 1), d = id(i, j + 1);
      mesh.triangles.push_back({a, b, c});
      mesh.triangles.push_back({a, c, d});
    }
  }
  const double scale = std::max(rect.x1 - rect.x0, rect.y1 - rect.y0);
  tag_boundary(mesh, [&](Point2 p, Point2 q) {
    if (near(p.y, rect.y0, scale) && near(q.y, rect.y0, scale)) return BoundaryTag::Bottom;
    if (near(p.y, rect.y1, scale) && near(q.y, rect.y1, scale)) return BoundaryTag::Top;
    if (near(p.x, rect.x0, scale) && near(q.x, rect.x0, scale)) return BoundaryTag::Left;
    if (near(p.x, rect.x1, scale) && near(q.x, rect.x1, scale)) return BoundaryTag::Right;
    return BoundaryTag::None;
  });
  return mesh;
}

TriMesh build_lshape_mesh(int n) {
  if (n < 2 || n % 2 != 0) {
    throw std::invalid_argument("build_lshape_mesh: n must be even and >= 2 (got " +
                                std::to_string(n) + ")");
  }
  const int half = n / 2;
  auto removed_node = [half](int i, int j) { return i > half && j > half; };
  std::vector<int> id(static_cast<std::size_t>((n + 1) * (n + 1)), -1);
  TriMesh mesh;
  for (int j = 0; j <= n; ++j) {
    for (int i = 0; i <= n; ++i) {
      if (removed_node(i, j)) continue;
      id[static_cast<std::size_t>(j * (n + 1) + i)] = static_cast<int>(mesh.nodes.size());
      double x = (i == n) ? 1.0 : static_cast<double>(i) / n;
      double y = (j == n) ? 1.0 : static_cast<double>(j) / n;
      mesh.nodes.push_back({x, y});
    }
  }
  auto node = [&](int i, int j) { return id[static_cast<std::size_t>(j * (n + 1) + i)]; };
  for (int j = 0; j < n; ++j) {
    for (int i = 0; i < n; ++i) {
      if (i >= half && j >= half) continue;
      int a = node(i, j), b = node(i + 1, j), c = node(i + 1, j + 1), d = node(i, j + 1);
      mesh.triangles.push_back({a, b, c});
      mesh.triangles.push_back({a, c, d});
    }
  }
  tag_boundary(mesh, [](Point2 p, Point2 q) {
    if (near(p.y, 0.0, 1.0) && near(q.y, 0.0, 1.0)) return BoundaryTag::Bottom;
    if (near(p.x, 0.0, 1.0) && near(q.x, 0.0, 1.0)) return BoundaryTag::Left;
    if (near(p.x, 1.0, 1.0) && near(q.x, 1.0, 1.0)) return BoundaryTag::Right;
    if (near(p.y, 1.0, 1.0) && near(q.y, 1.0, 1.0)) return BoundaryTag::Top;
    if (near(p.y, 0.5, 1.0) && near(q.y, 0.5, 1.0)) return BoundaryTag::ReentrantH;
    if (near(p.x, 0.5, 1.0) && near(q.x, 0.5, 1.0)) return BoundaryTag::ReentrantV;
    return BoundaryTag::None;
  });
  return mesh;
}

void write_mesh(std::ostream& os, const TriMesh& mesh) {
  os.precision(17);
  os << "nodes " << mesh.nodes.size() << '\n';
  for (const auto& p : mesh.nodes) os << p.x << ' ' << p.y << '\n';
  os << "triangles " << mesh.triangles.size() << '\n';
  for (const auto& t : mesh.triangles) os << t[0] << ' ' << t[1] << ' ' << t[2] << '\n';
  os << "boundary " << mesh.boundary_edges.size() << '\n';
  for (const auto& e : mesh.boundary_edges) os << e.a << ' ' << e.b << ' ' << to_string(e.tag) << '\n';
}

}  // namespace poroadapt
