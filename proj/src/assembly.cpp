#include "poroadapt/assembly.hpp"

#include <algorithm>
#include <cmath>
#include <string>

namespace poroadapt {

NonFiniteCoefficient::NonFiniteCoefficient(std::size_t e, std::size_t qp)
    : std::runtime_error("non-finite coefficient at element " + std::to_string(e) + ", quadrature point " +
                         std::to_string(qp)),
      element(e),
      q(qp) {}

NegativeWeight::NegativeWeight(std::size_t e, std::size_t qp, double value)
    : std::runtime_error("negative norm weight " + std::to_string(value) + " at element " + std::to_string(e) +
                         ", quadrature point " + std::to_string(qp)),
      element(e),
      q(qp) {}

BlockLayout::BlockLayout(std::vector<const FeSpace*> spaces) : spaces_(std::move(spaces)), offsets_{0} {
  for (const FeSpace* s : spaces_) {
    if (&s->mesh() != &spaces_.front()->mesh()) throw std::invalid_argument("BlockLayout: spaces must share a mesh");
    offsets_.push_back(offsets_.back() + s->num_dofs());
  }
}

namespace {

struct BasisAt {
  std::array<double, 6> v{};
  std::array<Vec2, 6> g{};
};

}  // namespace

/// Evaluates basis functions and registered fields on one element at a time.
class QpEvaluator {
 public:
  QpEvaluator(const TriMesh& mesh, const std::vector<FieldSlot>& slots, int degree)
      : mesh_(mesh), slots_(slots), rule_(triangle_rule(degree)) {
    for (const auto& s : slots_) {
      if (&s.space->mesh() != &mesh_) throw std::invalid_argument("field slot on a different mesh");
      if (s.coeffs.size() != s.space->num_dofs()) throw std::invalid_argument("field slot has wrong length");
    }
    contexts_.resize(rule_.size());
    for (auto& c : contexts_) {
      c.values_.resize(slots_.size());
      c.grads_.resize(slots_.size());
    }
    basis_[0].resize(rule_.size());
    basis_[1].resize(rule_.size());
  }

  const QuadRule& rule() const { return rule_; }

  void bind(std::size_t e) {
    const ElementGeometry geo = element_geometry(mesh_, e);
    const double area2 = std::abs(geo.det);
    for (std::size_t q = 0; q < rule_.size(); ++q) {
      for (int order = 1; order <= 2; ++order) {
        auto& b = basis_[order - 1][q];
        lagrange_basis(order, rule_.points[q], geo.grad_lambda, b.v, b.g);
      }
      QpContext& ctx = contexts_[q];
      ctx.element = e;
      ctx.q = q;
      ctx.x = geo.map(rule_.points[q]);
      ctx.jxw = rule_.weights[q] * area2;
      for (std::size_t s = 0; s < slots_.size(); ++s) {
        const FeSpace& sp = *slots_[s].space;
        const auto dofs = sp.element_dofs(e);
        const auto& b = basis_[sp.order() - 1][q];
        const std::size_t ns = sp.num_scalar_dofs();
        std::array<Vec2, 2> val{};
        Tensor2 grad{};
        for (int c = 0; c < sp.components(); ++c) {
          double v = 0.0;
          Vec2 g;
          for (std::size_t a = 0; a < dofs.size(); ++a) {
            const double coef = slots_[s].coeffs[static_cast<std::size_t>(c) * ns + static_cast<std::size_t>(dofs[a])];
            v += coef * b.v[a];
            g += coef * b.g[a];
          }
          grad[c] = g;
          if (sp.components() == 1) {
            val[0].x = v;
          } else if (c == 0) {
            val[1].x = v;
          } else {
            val[1].y = v;
          }
        }
        ctx.values_[s] = val;
        ctx.grads_[s] = grad;
      }
    }
  }

  const QpContext& context(std::size_t q) const { return contexts_[q]; }
  const BasisAt& basis(int order, std::size_t q) const { return basis_[order - 1][q]; }

 private:
  const TriMesh& mesh_;
  const std::vector<FieldSlot>& slots_;
  const QuadRule& rule_;
  std::vector<QpContext> contexts_;
  std::array<std::vector<BasisAt>, 2> basis_;
};

namespace {

double checked(double v, const QpContext& ctx) {
  if (!std::isfinite(v)) throw NonFiniteCoefficient(ctx.element, ctx.q);
  return v;
}

Vec2 checked(Vec2 v, const QpContext& ctx) {
  if (!std::isfinite(v.x) || !std::isfinite(v.y)) throw NonFiniteCoefficient(ctx.element, ctx.q);
  return v;
}

double eval(const ScalarCoefficient& f, const QpContext& ctx) { return f ? checked(f(ctx), ctx) : 1.0; }

void require(bool ok, const char* what) {
  if (!ok) throw std::invalid_argument(what);
}

// Global indices of the local DOFs of a block on element e, component-major.
void block_dofs(const BlockLayout& layout, std::size_t b, std::size_t e, std::vector<std::size_t>& out) {
  const FeSpace& sp = layout.space(b);
  const auto dofs = sp.element_dofs(e);
  out.clear();
  for (int c = 0; c < sp.components(); ++c) {
    for (int d : dofs) out.push_back(layout.offset(b) + sp.dof(c, static_cast<std::size_t>(d)));
  }
}

}  // namespace

CsrMatrix assemble(const BlockLayout& layout, const std::vector<BilinearTerm>& terms,
                   const std::vector<FieldSlot>& slots, int degree) {
  for (const auto& t : terms) {
    require(t.test_block < layout.num_blocks() && t.trial_block < layout.num_blocks(), "assemble: bad block index");
    const FeSpace& ts = layout.space(t.test_block);
    const FeSpace& rs = layout.space(t.trial_block);
    switch (t.kind) {
      case BilinearKind::Mass:
      case BilinearKind::Stiffness:
        require(ts.components() == 1 && rs.components() == 1, "assemble: scalar term on vector space");
        break;
      case BilinearKind::TrialValueTestGrad:
        require(ts.components() == 1 && rs.components() == 1 && t.vcoef, "assemble: advective term needs b");
        break;
      case BilinearKind::Elasticity:
        require(ts.components() == 2 && t.test_block == t.trial_block && t.coef && t.coef2,
                "assemble: elasticity needs one vector block and mu, lambda");
        break;
      case BilinearKind::TrialGradTestVector:
        require(ts.components() == 2 && rs.components() == 1, "assemble: grad coupling needs vector test");
        break;
      case BilinearKind::TrialDivTestValue:
        require(ts.components() == 1 && rs.components() == 2, "assemble: div coupling needs vector trial");
        break;
    }
  }
  const TriMesh& mesh = layout.space(0).mesh();
  QpEvaluator ev(mesh, slots, degree);
  const std::size_t nq = ev.rule().size();
  std::vector<Triplet> triplets;
  std::vector<std::size_t> test_dofs, trial_dofs;
  std::vector<double> local;

  for (std::size_t e = 0; e < mesh.num_triangles(); ++e) {
    ev.bind(e);
    for (const auto& t : terms) {
      const FeSpace& ts = layout.space(t.test_block);
      const FeSpace& rs = layout.space(t.trial_block);
      block_dofs(layout, t.test_block, e, test_dofs);
      block_dofs(layout, t.trial_block, e, trial_dofs);
      const std::size_t ni = test_dofs.size(), nj = trial_dofs.size();
      const std::size_t nbi = static_cast<std::size_t>(ts.dofs_per_element());
      const std::size_t nbj = static_cast<std::size_t>(rs.dofs_per_element());
      local.assign(ni * nj, 0.0);
      for (std::size_t q = 0; q < nq; ++q) {
        const QpContext& ctx = ev.context(q);
        const BasisAt& bi = ev.basis(ts.order(), q);
        const BasisAt& bj = ev.basis(rs.order(), q);
        const double w = ctx.jxw;
        switch (t.kind) {
          case BilinearKind::Mass: {
            const double c = eval(t.coef, ctx) * w;
            for (std::size_t i = 0; i < ni; ++i)
              for (std::size_t j = 0; j < nj; ++j) local[i * nj + j] += c * bj.v[j] * bi.v[i];
            break;
          }
          case BilinearKind::Stiffness: {
            const double c = eval(t.coef, ctx) * w;
            for (std::size_t i = 0; i < ni; ++i)
              for (std::size_t j = 0; j < nj; ++j) local[i * nj + j] += c * dot(bj.g[j], bi.g[i]);
            break;
          }
          case BilinearKind::TrialValueTestGrad: {
            const Vec2 b = w * checked(t.vcoef(ctx), ctx);
            for (std::size_t i = 0; i < ni; ++i) {
              const double bg = dot(b, bi.g[i]);
              for (std::size_t j = 0; j < nj; ++j) local[i * nj + j] += bj.v[j] * bg;
            }
            break;
          }
          case BilinearKind::Elasticity: {
            const double mu = eval(t.coef, ctx) * w;
            const double lam = eval(t.coef2, ctx) * w;
            for (std::size_t d = 0; d < 2; ++d) {
              for (std::size_t b = 0; b < nbi; ++b) {
                const Vec2 gb = bi.g[b];
                const double gb_d = d == 0 ? gb.x : gb.y;
                for (std::size_t c = 0; c < 2; ++c) {
                  for (std::size_t a = 0; a < nbj; ++a) {
                    const Vec2 ga = bj.g[a];
                    const double ga_c = c == 0 ? ga.x : ga.y;
                    const double ga_d = d == 0 ? ga.x : ga.y;
                    const double gb_c = c == 0 ? gb.x : gb.y;
                    double v = mu * ga_d * gb_c + lam * ga_c * gb_d;
                    if (c == d) v += mu * dot(ga, gb);
                    local[(d * nbi + b) * nj + c * nbj + a] += v;
                  }
                }
              }
            }
            break;
          }
          case BilinearKind::TrialGradTestVector: {
            const double c = eval(t.coef, ctx) * w;
            for (std::size_t d = 0; d < 2; ++d)
              for (std::size_t b = 0; b < nbi; ++b)
                for (std::size_t a = 0; a < nj; ++a) {
                  const double ga_d = d == 0 ? bj.g[a].x : bj.g[a].y;
                  local[(d * nbi + b) * nj + a] += c * ga_d * bi.v[b];
                }
            break;
          }
          case BilinearKind::TrialDivTestValue: {
            const double c = eval(t.coef, ctx) * w;
            for (std::size_t i = 0; i < ni; ++i)
              for (std::size_t cc = 0; cc < 2; ++cc)
                for (std::size_t a = 0; a < nbj; ++a) {
                  const double ga_c = cc == 0 ? bj.g[a].x : bj.g[a].y;
                  local[i * nj + cc * nbj + a] += c * ga_c * bi.v[i];
                }
            break;
          }
        }
      }
      for (std::size_t i = 0; i < ni; ++i)
        for (std::size_t j = 0; j < nj; ++j) triplets.push_back({test_dofs[i], trial_dofs[j], local[i * nj + j]});
    }
  }
  return CsrMatrix::from_triplets(layout.size(), layout.size(), std::move(triplets));
}

Vector assemble_functional(const BlockLayout& layout, const std::vector<LinearTerm>& terms,
                           const std::vector<FieldSlot>& slots, int degree) {
  for (const auto& t : terms) {
    require(t.block < layout.num_blocks(), "assemble_functional: bad block index");
    const int comps = layout.space(t.block).components();
    switch (t.kind) {
      case LinearKind::Value: require(comps == 1 && bool(t.f), "assemble_functional: Value needs scalar f"); break;
      case LinearKind::Gradient: require(comps == 1 && bool(t.g), "assemble_functional: Gradient needs g"); break;
      case LinearKind::VectorValue: require(comps == 2 && bool(t.g), "assemble_functional: VectorValue needs g"); break;
      case LinearKind::Divergence: require(comps == 2 && bool(t.f), "assemble_functional: Divergence needs f"); break;
    }
  }
  const TriMesh& mesh = layout.space(0).mesh();
  QpEvaluator ev(mesh, slots, degree);
  Vector out(layout.size(), 0.0);
  std::vector<std::size_t> dofs;
  std::vector<double> local;
  for (std::size_t e = 0; e < mesh.num_triangles(); ++e) {
    ev.bind(e);
    for (const auto& t : terms) {
      const FeSpace& sp = layout.space(t.block);
      block_dofs(layout, t.block, e, dofs);
      const std::size_t nb = static_cast<std::size_t>(sp.dofs_per_element());
      local.assign(dofs.size(), 0.0);
      for (std::size_t q = 0; q < ev.rule().size(); ++q) {
        const QpContext& ctx = ev.context(q);
        const BasisAt& b = ev.basis(sp.order(), q);
        switch (t.kind) {
          case LinearKind::Value: {
            const double f = checked(t.f(ctx), ctx) * ctx.jxw;
            for (std::size_t i = 0; i < nb; ++i) local[i] += f * b.v[i];
            break;
          }
          case LinearKind::Gradient: {
            const Vec2 g = ctx.jxw * checked(t.g(ctx), ctx);
            for (std::size_t i = 0; i < nb; ++i) local[i] += dot(g, b.g[i]);
            break;
          }
          case LinearKind::VectorValue: {
            const Vec2 g = ctx.jxw * checked(t.g(ctx), ctx);
            for (std::size_t i = 0; i < nb; ++i) {
              local[i] += g.x * b.v[i];
              local[nb + i] += g.y * b.v[i];
            }
            break;
          }
          case LinearKind::Divergence: {
            const double f = checked(t.f(ctx), ctx) * ctx.jxw;
            for (std::size_t i = 0; i < nb; ++i) {
              local[i] += f * b.g[i].x;
              local[nb + i] += f * b.g[i].y;
            }
            break;
          }
        }
      }
      for (std::size_t i = 0; i < dofs.size(); ++i) out[dofs[i]] += local[i];
    }
  }
  return out;
}

Vector assemble_boundary_load(const FeSpace& space, BoundaryTag tag, const std::function<Vec2(Point2)>& g) {
  require(space.components() == 2, "assemble_boundary_load: vector space required");
  const TriMesh& mesh = space.mesh();
  const LineRule& rule = gauss_line_rule3();
  Vector out(space.num_dofs(), 0.0);
  for (std::size_t k = 0; k < mesh.boundary_edges.size(); ++k) {
    const BoundaryEdge& be = mesh.boundary_edges[k];
    if (be.tag != tag) continue;
    const Point2 pa = mesh.nodes[be.a], pb = mesh.nodes[be.b];
    const double len = std::hypot(pb.x - pa.x, pb.y - pa.y);
    const std::vector<std::size_t>& dofs = space.boundary_edge_dofs(k);
    for (std::size_t q = 0; q < rule.points.size(); ++q) {
      const double s = rule.points[q];
      const Point2 x{pa.x + s * (pb.x - pa.x), pa.y + s * (pb.y - pa.y)};
      const Vec2 gv = g(x);
      std::array<double, 3> phi{};
      if (space.order() == 1) {
        phi = {1.0 - s, s, 0.0};
      } else {
        phi = {(1.0 - s) * (1.0 - 2.0 * s), s * (2.0 * s - 1.0), 4.0 * s * (1.0 - s)};
      }
      const double w = rule.weights[q] * len;
      for (std::size_t a = 0; a < dofs.size(); ++a) {
        out[space.dof(0, dofs[a])] += w * gv.x * phi[a];
        out[space.dof(1, dofs[a])] += w * gv.y * phi[a];
      }
    }
  }
  return out;
}

double weighted_norm(const TriMesh& mesh, const std::vector<NormTerm>& terms, const std::vector<FieldSlot>& slots,
                     int degree) {
  QpEvaluator ev(mesh, slots, degree);
  double sum = 0.0;
  for (std::size_t e = 0; e < mesh.num_triangles(); ++e) {
    ev.bind(e);
    for (std::size_t q = 0; q < ev.rule().size(); ++q) {
      const QpContext& ctx = ev.context(q);
      for (const auto& t : terms) {
        const double w = eval(t.weight, ctx);
        if (w < 0.0) throw NegativeWeight(e, q, w);
        if (w == 0.0) continue;
        double v = 0.0;
        switch (t.selector) {
          case NormSelector::Value: v = ctx.value(t.slot) * ctx.value(t.slot); break;
          case NormSelector::Gradient: v = ctx.grad(t.slot).norm2(); break;
          case NormSelector::VectorValue: v = ctx.vec_value(t.slot).norm2(); break;
          case NormSelector::SymGrad: {
            const Tensor2& g = ctx.vec_grad(t.slot);
            const double off = 0.5 * (g[0].y + g[1].x);
            v = g[0].x * g[0].x + g[1].y * g[1].y + 2.0 * off * off;
            break;
          }
          case NormSelector::Div: v = ctx.div(t.slot) * ctx.div(t.slot); break;
        }
        sum += w * v * ctx.jxw;
      }
    }
  }
  return std::sqrt(sum);
}

double integrate(const TriMesh& mesh, const std::vector<FieldSlot>& slots, const ScalarCoefficient& f, int degree) {
  QpEvaluator ev(mesh, slots, degree);
  double sum = 0.0;
  for (std::size_t e = 0; e < mesh.num_triangles(); ++e) {
    ev.bind(e);
    for (std::size_t q = 0; q < ev.rule().size(); ++q) {
      const QpContext& ctx = ev.context(q);
      sum += checked(f(ctx), ctx) * ctx.jxw;
    }
  }
  return sum;
}

void apply_dirichlet(CsrMatrix& a, Vector& rhs, const DirichletSet& bc) {
  const std::size_t n = a.rows();
  if (rhs.size() != n) throw std::invalid_argument("apply_dirichlet: size mismatch");
  std::vector<char> fixed(n, 0);
  std::vector<double> value(n, 0.0);
  for (std::size_t k = 0; k < bc.dofs.size(); ++k) {
    fixed[bc.dofs[k]] = 1;
    value[bc.dofs[k]] = bc.values[k];
  }
  bool has_diag = true;
  for (std::size_t d : bc.dofs) {
    const auto first = a.col_idx().begin() + static_cast<std::ptrdiff_t>(a.row_ptr()[d]);
    const auto last = a.col_idx().begin() + static_cast<std::ptrdiff_t>(a.row_ptr()[d + 1]);
    if (!std::binary_search(first, last, d)) has_diag = false;
  }
  if (!has_diag) {
    std::vector<Triplet> t;
    for (std::size_t i = 0; i < n; ++i)
      for (std::size_t k = a.row_ptr()[i]; k < a.row_ptr()[i + 1]; ++k) t.push_back({i, a.col_idx()[k], a.values()[k]});
    for (std::size_t d : bc.dofs) t.push_back({d, d, 0.0});
    a = CsrMatrix::from_triplets(n, n, std::move(t));
  }
  const auto& ptr = a.row_ptr();
  const auto& idx = a.col_idx();
  auto& vals = a.values();
  for (std::size_t i = 0; i < n; ++i) {
    for (std::size_t k = ptr[i]; k < ptr[i + 1]; ++k) {
      const std::size_t j = idx[k];
      if (fixed[i]) {
        vals[k] = i == j ? 1.0 : 0.0;
      } else if (fixed[j]) {
        rhs[i] -= vals[k] * value[j];
        vals[k] = 0.0;
      }
    }
  }
  for (std::size_t d : bc.dofs) rhs[d] = value[d];
}

void impose_dirichlet(Vector& x, const DirichletSet& bc) {
  for (std::size_t k = 0; k < bc.dofs.size(); ++k) x[bc.dofs[k]] = bc.values[k];
}

void zero_dirichlet(Vector& x, const DirichletSet& bc) {
  for (std::size_t d : bc.dofs) x[d] = 0.0;
}

}  // namespace poroadapt
