#pragma once

#include <array>
#include <cstddef>
#include <iosfwd>
#include <string_view>
#include <vector>

namespace poroadapt {

struct Point2 {
  double x = 0.0;
  double y = 0.0;
};

enum class BoundaryTag { Top, Bottom, Left, Right, ReentrantH, ReentrantV, None };

std::string_view to_string(BoundaryTag tag);

struct BoundaryEdge {
  int a = 0;
  int b = 0;
  BoundaryTag tag = BoundaryTag::None;
};

struct Rect {
  double x0 = 0.0;
  double y0 = 0.0;
  double x1 = 1.0;
  double y1 = 1.0;
};

/// Conforming triangulation of a planar domain. Triangles are stored
/// counterclockwise; every boundary edge carries the tag of the side it lies on.
struct TriMesh {
  std::vector<Point2> nodes;
  std::vector<std::array<int, 3>> triangles;
  std::vector<BoundaryEdge> boundary_edges;

  std::size_t num_nodes() const { return nodes.size(); }
  std::size_t num_triangles() const { return triangles.size(); }

  double signed_area(std::size_t t) const;
  double total_area() const;
  /// Longest edge over all triangles.
  double mesh_size() const;
};

/// Structured split of an nx-by-ny cell grid, each cell cut along its
/// lower-left to upper-right diagonal (2*nx*ny triangles).
TriMesh build_rect_mesh(int nx, int ny, const Rect& rect = {});

/// (0,1)^2 minus [0.5,1]^2 with n cells per unit edge. n must be even.
TriMesh build_lshape_mesh(int n);

/// Plain-text listing: node lines "x y", triangle lines "i j k",
/// boundary lines "i j TAG", each block preceded by a count header.
void write_mesh(std::ostream& os, const TriMesh& mesh);

}  // namespace poroadapt
