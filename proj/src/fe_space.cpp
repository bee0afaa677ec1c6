#include "poroadapt/fe_space.hpp"

#include <algorithm>
#include <map>
#include <numeric>
#include <stdexcept>

namespace poroadapt {

Point2 ElementGeometry::map(const std::array<double, 3>& bary) const {
  const double xi = bary[1], eta = bary[2];
  return {origin.x + jac[0][0] * xi + jac[0][1] * eta, origin.y + jac[1][0] * xi + jac[1][1] * eta};
}

ElementGeometry element_geometry(const TriMesh& mesh, std::size_t element) {
  const auto& tri = mesh.triangles[element];
  const Point2& p0 = mesh.nodes[tri[0]];
  const Point2& p1 = mesh.nodes[tri[1]];
  const Point2& p2 = mesh.nodes[tri[2]];
  ElementGeometry g;
  g.origin = p0;
  g.jac[0][0] = p1.x - p0.x;
  g.jac[0][1] = p2.x - p0.x;
  g.jac[1][0] = p1.y - p0.y;
  g.jac[1][1] = p2.y - p0.y;
  g.det = g.jac[0][0] * g.jac[1][1] - g.jac[0][1] * g.jac[1][0];
  // rows of J^{-1} are the gradients of lambda_1 and lambda_2
  const double inv = 1.0 / g.det;
  g.grad_lambda[1] = {g.jac[1][1] * inv, -g.jac[0][1] * inv};
  g.grad_lambda[2] = {-g.jac[1][0] * inv, g.jac[0][0] * inv};
  g.grad_lambda[0] = {-g.grad_lambda[1].x - g.grad_lambda[2].x, -g.grad_lambda[1].y - g.grad_lambda[2].y};
  return g;
}

void lagrange_basis(int order, const std::array<double, 3>& l, const std::array<Vec2, 3>& gl,
                    std::span<double> values, std::span<Vec2> grads) {
  if (order == 1) {
    for (int i = 0; i < 3; ++i) {
      values[i] = l[i];
      grads[i] = gl[i];
    }
    return;
  }
  for (int i = 0; i < 3; ++i) {
    values[i] = l[i] * (2.0 * l[i] - 1.0);
    grads[i] = (4.0 * l[i] - 1.0) * gl[i];
  }
  constexpr int edge[3][2] = {{0, 1}, {1, 2}, {2, 0}};
  for (int e = 0; e < 3; ++e) {
    const int a = edge[e][0], b = edge[e][1];
    values[3 + e] = 4.0 * l[a] * l[b];
    grads[3 + e] = 4.0 * (l[a] * gl[b] + l[b] * gl[a]);
  }
}

void DirichletSet::merge(const DirichletSet& other) {
  std::map<std::size_t, double> all;
  for (std::size_t i = 0; i < dofs.size(); ++i) all.emplace(dofs[i], values[i]);
  for (std::size_t i = 0; i < other.dofs.size(); ++i) all.emplace(other.dofs[i], other.values[i]);
  dofs.clear();
  values.clear();
  for (const auto& [d, v] : all) {
    dofs.push_back(d);
    values.push_back(v);
  }
}

FeSpace::FeSpace(std::shared_ptr<const TriMesh> mesh, int order, int components)
    : mesh_(std::move(mesh)), order_(order), components_(components) {
  if (order_ != 1 && order_ != 2) throw std::invalid_argument("FeSpace: order must be 1 or 2");
  if (components_ != 1 && components_ != 2) throw std::invalid_argument("FeSpace: components must be 1 or 2");
  const TriMesh& m = *mesh_;
  coords_ = m.nodes;
  const int per = dofs_per_element();
  element_dofs_.reserve(m.num_triangles() * static_cast<std::size_t>(per));

  std::map<std::pair<int, int>, int> edge_id;
  auto edge_dof = [&](int a, int b) {
    auto key = std::make_pair(std::min(a, b), std::max(a, b));
    auto it = edge_id.find(key);
    if (it != edge_id.end()) return it->second;
    const int id = static_cast<int>(coords_.size());
    edge_id.emplace(key, id);
    const Point2& pa = m.nodes[a];
    const Point2& pb = m.nodes[b];
    coords_.push_back({0.5 * (pa.x + pb.x), 0.5 * (pa.y + pb.y)});
    return id;
  };

  for (const auto& tri : m.triangles) {
    for (int v = 0; v < 3; ++v) element_dofs_.push_back(tri[v]);
    if (order_ == 2) {
      element_dofs_.push_back(edge_dof(tri[0], tri[1]));
      element_dofs_.push_back(edge_dof(tri[1], tri[2]));
      element_dofs_.push_back(edge_dof(tri[2], tri[0]));
    }
  }

  boundary_edge_dofs_.reserve(m.boundary_edges.size());
  for (const auto& be : m.boundary_edges) {
    std::vector<std::size_t> d{static_cast<std::size_t>(be.a), static_cast<std::size_t>(be.b)};
    if (order_ == 2) {
      d.push_back(static_cast<std::size_t>(edge_id.at({std::min(be.a, be.b), std::max(be.a, be.b)})));
    }
    boundary_edge_dofs_.push_back(std::move(d));
  }
}

std::vector<std::size_t> FeSpace::boundary_scalar_dofs(BoundaryTag tag) const {
  std::vector<std::size_t> out;
  const auto& edges = mesh_->boundary_edges;
  for (std::size_t e = 0; e < edges.size(); ++e) {
    if (edges[e].tag != tag) continue;
    out.insert(out.end(), boundary_edge_dofs_[e].begin(), boundary_edge_dofs_[e].end());
  }
  std::sort(out.begin(), out.end());
  out.erase(std::unique(out.begin(), out.end()), out.end());
  return out;
}

void FeSpace::add_dirichlet(DirichletCondition condition) {
  if (condition.component < 0 || condition.component >= components_) {
    throw std::invalid_argument("FeSpace::add_dirichlet: component out of range");
  }
  dirichlet_.push_back(std::move(condition));
}

DirichletSet FeSpace::dirichlet_set(double t, std::size_t offset) const {
  // First condition listed wins on shared DOFs (corners).
  std::map<std::size_t, double> fixed;
  for (const auto& cond : dirichlet_) {
    for (BoundaryTag tag : cond.tags) {
      for (std::size_t s : boundary_scalar_dofs(tag)) {
        fixed.emplace(offset + dof(cond.component, s), cond.value(coords_[s], t));
      }
    }
  }
  DirichletSet set;
  for (const auto& [d, v] : fixed) {
    set.dofs.push_back(d);
    set.values.push_back(v);
  }
  return set;
}

std::vector<double> interpolate(const FeSpace& space, const std::function<double(Point2)>& f) {
  std::vector<double> out(space.num_scalar_dofs());
  const auto& coords = space.dof_coords();
  for (std::size_t i = 0; i < out.size(); ++i) out[i] = f(coords[i]);
  return out;
}

}  // namespace poroadapt
