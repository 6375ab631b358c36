#pragma once

// Deferred expressions over sp_mat.
//
// An Expr is an immutable tree of lightweight nodes. Leaves hold a pointer
// to an existing matrix, never a copy, so every referenced matrix must
// outlive the expressions built on it. Nothing is computed until one of the
// eval functions is called.
//
// Before evaluation a rewrite pass annotates the sites that have a fused
// kernel:
//
//   trace( t(A) * B )   ->  trace_fused_atb(A, B)      (only in trace context)
//   diagmat( A + B )    ->  diagmat_fused_add(A, B)
//
// and removes double transposes. Everything else is evaluated bottom-up with
// the eager kernels.

#include <cstddef>
#include <memory>
#include <string>
#include <utility>
#include <variant>

#include "hsparse/spmat.hpp"

namespace hsparse::expr {

enum class UnaryOp { transpose, scalar_mul, diagmat };
enum class BinaryOp { add, mul };

enum class Fusion {
  none,
  trace_of_transpose_product,  ///< Mul(Transpose(a), b) under trace
  diagmat_of_sum,              ///< DiagMat(Add(a, b))
};

struct Node;
using NodePtr = std::shared_ptr<const Node>;

struct Leaf {
  const sp_mat* matrix;
};

struct Unary {
  UnaryOp op;
  double scalar;  ///< only meaningful for scalar_mul
  NodePtr child;
};

struct Binary {
  BinaryOp op;
  NodePtr left;
  NodePtr right;
};

struct Node {
  std::variant<Leaf, Unary, Binary> kind;
  Fusion fusion = Fusion::none;
};

/// Value handle on an expression tree. Cheap to copy (shared nodes).
class Expr {
 public:
  explicit Expr(NodePtr node) : node_(std::move(node)) {}

  const Node& node() const noexcept { return *node_; }
  const NodePtr& ptr() const noexcept { return node_; }

  /// Structural equality: same shape of tree, same ops and scalars, same
  /// annotations, and leaves referring to the same matrix objects.
  friend bool operator==(const Expr& a, const Expr& b);

 private:
  NodePtr node_;
};

Expr leaf(const sp_mat& m);
Expr leaf(const sp_mat&&) = delete;
Expr t(const Expr& e);
Expr diagmat(const Expr& e);
Expr operator*(double k, const Expr& e);
Expr operator+(const Expr& a, const Expr& b);
Expr operator*(const Expr& a, const Expr& b);

struct Shape {
  index_t n_rows;
  index_t n_cols;
  friend bool operator==(const Shape&, const Shape&) = default;
};

/// Result shape. Throws DimensionError naming the offending node by its path
/// from the root, e.g. "root.left.child".
Shape infer_shape(const Expr& e);

/// Where the expression is consumed; the trace-of-transpose-product fusion
/// only applies under a trace.
enum class Context { value, trace };

/// Annotates fusable sites and removes double transposes. Idempotent, and
/// never changes the shape of any node.
Expr rewrite(const Expr& e, Context ctx = Context::value);

/// Number of fusion annotations in the tree.
std::size_t count_fusions(const Expr& e);

struct EvalOptions {
  /// false forces the plain eager evaluation of the tree as written.
  bool fuse = true;
};

sp_mat eval(const Expr& e, EvalOptions opts = {});

/// trace of the expression's value; the result must be square.
double eval_trace(const Expr& e, EvalOptions opts = {});

/// Square diagonal matrix built from the expression's main diagonal.
sp_mat eval_diagmat(const Expr& e, EvalOptions opts = {});

}  // namespace hsparse::expr
