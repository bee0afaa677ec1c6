#pragma once

#include <array>
#include <cstddef>
#include <functional>
#include <span>
#include <stdexcept>
#include <vector>

#include "poroadapt/fe_space.hpp"
#include "poroadapt/quadrature.hpp"
#include "poroadapt/sparse.hpp"

namespace poroadapt {

/// A finite-element function registered for evaluation at quadrature points.
struct FieldSlot {
  const FeSpace* space = nullptr;
  std::span<const double> coeffs;
};

using Tensor2 = std::array<Vec2, 2>;  // row c = gradient of component c

/// State available to coefficient callbacks at one quadrature point.
class QpContext {
 public:
  std::size_t element = 0;
  std::size_t q = 0;
  Point2 x;
  double jxw = 0.0;

  double value(std::size_t slot) const { return values_[slot][0].x; }
  Vec2 grad(std::size_t slot) const { return grads_[slot][0]; }
  Vec2 vec_value(std::size_t slot) const { return values_[slot][1]; }
  const Tensor2& vec_grad(std::size_t slot) const { return grads_[slot]; }
  double div(std::size_t slot) const { return grads_[slot][0].x + grads_[slot][1].y; }

 private:
  friend class QpEvaluator;
  // values_[s][0].x holds the scalar value; values_[s][1] the vector value
  std::vector<std::array<Vec2, 2>> values_;
  std::vector<Tensor2> grads_;
};

using ScalarCoefficient = std::function<double(const QpContext&)>;
using VectorCoefficient = std::function<Vec2(const QpContext&)>;

class NonFiniteCoefficient : public std::runtime_error {
 public:
  NonFiniteCoefficient(std::size_t element, std::size_t q);
  std::size_t element;
  std::size_t q;
};

class NegativeWeight : public std::runtime_error {
 public:
  NegativeWeight(std::size_t element, std::size_t q, double value);
  std::size_t element;
  std::size_t q;
};

/// Blocks of a coupled system; block b occupies [offset(b), offset(b)+size).
class BlockLayout {
 public:
  explicit BlockLayout(std::vector<const FeSpace*> spaces);
  std::size_t num_blocks() const { return spaces_.size(); }
  const FeSpace& space(std::size_t b) const { return *spaces_[b]; }
  std::size_t offset(std::size_t b) const { return offsets_[b]; }
  std::size_t size() const { return offsets_.back(); }

 private:
  std::vector<const FeSpace*> spaces_;
  std::vector<std::size_t> offsets_;
};

enum class BilinearKind {
  Mass,                 // c phi_j psi_i (scalar spaces)
  Stiffness,            // c grad phi_j . grad psi_i
  TrialValueTestGrad,   // phi_j b . grad psi_i
  Elasticity,           // 2 mu eps(u):eps(v) + lambda div u div v  (coef = mu, coef2 = lambda)
  TrialGradTestVector,  // c grad phi_j . v_i (scalar trial, vector test)
  TrialDivTestValue,    // c div u_j psi_i (vector trial, scalar test)
};

struct BilinearTerm {
  BilinearKind kind = BilinearKind::Mass;
  std::size_t test_block = 0;
  std::size_t trial_block = 0;
  ScalarCoefficient coef;
  ScalarCoefficient coef2;
  VectorCoefficient vcoef;
};

enum class LinearKind {
  Value,        // f psi_i
  Gradient,     // g . grad psi_i
  VectorValue,  // g . v_i
  Divergence,   // f div v_i
};

struct LinearTerm {
  LinearKind kind = LinearKind::Value;
  std::size_t block = 0;
  ScalarCoefficient f;
  VectorCoefficient g;
};

/// Entry (i,j) = sum_K sum_q w_q integrand(phi_j, psi_i); elements visited in
/// ascending order, local indices ascending, duplicates summed in that order.
CsrMatrix assemble(const BlockLayout& layout, const std::vector<BilinearTerm>& terms,
                   const std::vector<FieldSlot>& slots = {}, int degree = 4);

Vector assemble_functional(const BlockLayout& layout, const std::vector<LinearTerm>& terms,
                           const std::vector<FieldSlot>& slots = {}, int degree = 4);

/// Boundary load sum_edges int g(x) . v_i ds over edges carrying `tag`
/// (vector space) using three-point Gauss-Legendre per edge.
Vector assemble_boundary_load(const FeSpace& space, BoundaryTag tag, const std::function<Vec2(Point2)>& g);

enum class NormSelector { Value, Gradient, VectorValue, SymGrad, Div };

struct NormTerm {
  ScalarCoefficient weight;  // empty means 1
  NormSelector selector = NormSelector::Value;
  std::size_t slot = 0;
};

/// sqrt of sum over terms of int w |selected quantity|^2.
double weighted_norm(const TriMesh& mesh, const std::vector<NormTerm>& terms, const std::vector<FieldSlot>& slots,
                     int degree = 4);

/// int f dx with the given rule.
double integrate(const TriMesh& mesh, const std::vector<FieldSlot>& slots, const ScalarCoefficient& f,
                 int degree = 4);

/// Row/column elimination: constrained rows become identity rows with the
/// prescribed value, and constrained columns are moved to the right-hand side.
void apply_dirichlet(CsrMatrix& a, Vector& rhs, const DirichletSet& bc);

/// Overwrites constrained entries of x with their prescribed values.
void impose_dirichlet(Vector& x, const DirichletSet& bc);

/// Zeroes constrained entries of x.
void zero_dirichlet(Vector& x, const DirichletSet& bc);

}  // namespace poroadapt
