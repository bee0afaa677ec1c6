#pragma once

#include <array>
#include <cstddef>
#include <functional>
#include <memory>
#include <span>
#include <vector>

#include "poroadapt/mesh.hpp"

namespace poroadapt {

struct Vec2 {
  double x = 0.0;
  double y = 0.0;

  Vec2& operator+=(Vec2 o) { x += o.x; y += o.y; return *this; }
  Vec2& operator-=(Vec2 o) { x -= o.x; y -= o.y; return *this; }
  friend Vec2 operator+(Vec2 a, Vec2 b) { return {a.x + b.x, a.y + b.y}; }
  friend Vec2 operator-(Vec2 a, Vec2 b) { return {a.x - b.x, a.y - b.y}; }
  friend Vec2 operator*(double s, Vec2 a) { return {s * a.x, s * a.y}; }
  friend double dot(Vec2 a, Vec2 b) { return a.x * b.x + a.y * b.y; }
  double norm2() const { return x * x + y * y; }
};

/// Affine map of one triangle and the gradients of its barycentric coordinates.
struct ElementGeometry {
  Point2 origin;
  double jac[2][2] = {{0, 0}, {0, 0}};
  double det = 0.0;
  std::array<Vec2, 3> grad_lambda;

  Point2 map(const std::array<double, 3>& bary) const;
};

ElementGeometry element_geometry(const TriMesh& mesh, std::size_t element);

/// Lagrange basis on a triangle at a barycentric point: 3 functions for
/// order 1, 6 for order 2 (vertices, then edges 01, 12, 20).
void lagrange_basis(int order, const std::array<double, 3>& bary, const std::array<Vec2, 3>& grad_lambda,
                    std::span<double> values, std::span<Vec2> grads);

using BoundaryValue = std::function<double(Point2, double)>;

struct DirichletCondition {
  std::vector<BoundaryTag> tags;
  int component = 0;
  BoundaryValue value;
};

/// Constrained global DOFs with prescribed values, sorted by DOF index.
struct DirichletSet {
  std::vector<std::size_t> dofs;
  std::vector<double> values;

  void merge(const DirichletSet& other);
};

/// Continuous Lagrange space (P1 or P2), scalar or 2-vector. Vector DOFs are
/// blocked by component: dof(c, s) = c * num_scalar_dofs() + s.
class FeSpace {
 public:
  FeSpace(std::shared_ptr<const TriMesh> mesh, int order, int components = 1);

  const TriMesh& mesh() const { return *mesh_; }
  const std::shared_ptr<const TriMesh>& mesh_ptr() const { return mesh_; }
  int order() const { return order_; }
  int components() const { return components_; }
  int dofs_per_element() const { return order_ == 1 ? 3 : 6; }
  std::size_t num_scalar_dofs() const { return coords_.size(); }
  std::size_t num_dofs() const { return coords_.size() * static_cast<std::size_t>(components_); }
  std::size_t dof(int component, std::size_t scalar_dof) const {
    return static_cast<std::size_t>(component) * num_scalar_dofs() + scalar_dof;
  }

  std::span<const int> element_dofs(std::size_t element) const {
    const auto n = static_cast<std::size_t>(dofs_per_element());
    return {element_dofs_.data() + element * n, n};
  }
  const std::vector<Point2>& dof_coords() const { return coords_; }

  /// Scalar DOFs lying on boundary edges with the given tag (ascending).
  std::vector<std::size_t> boundary_scalar_dofs(BoundaryTag tag) const;
  /// Scalar DOFs of mesh boundary edge k: its two end nodes, then the midpoint for P2.
  const std::vector<std::size_t>& boundary_edge_dofs(std::size_t k) const { return boundary_edge_dofs_[k]; }

  void add_dirichlet(DirichletCondition condition);
  bool has_dirichlet() const { return !dirichlet_.empty(); }
  /// Constrained DOFs at time t, shifted by `offset` into a block system.
  DirichletSet dirichlet_set(double t, std::size_t offset = 0) const;

 private:
  std::shared_ptr<const TriMesh> mesh_;
  int order_;
  int components_;
  std::vector<int> element_dofs_;
  std::vector<Point2> coords_;
  // scalar dofs on each boundary edge (2 or 3 entries)
  std::vector<std::vector<std::size_t>> boundary_edge_dofs_;
  std::vector<DirichletCondition> dirichlet_;
};

/// Nodal interpolation of f into a scalar space (or one component of a vector space).
std::vector<double> interpolate(const FeSpace& space, const std::function<double(Point2)>& f);

}  // namespace poroadapt
