#include "hsparse/expr.hpp"

#include <memory>

#include "hsparse/kernels.hpp"

namespace hsparse::expr {

namespace {

NodePtr make(std::variant<Leaf, Unary, Binary> kind, Fusion fusion = Fusion::none) {
  return std::make_shared<const Node>(Node{std::move(kind), fusion});
}

const Unary* as_unary(const NodePtr& n, UnaryOp op) {
  const auto* u = std::get_if<Unary>(&n->kind);
  return u != nullptr && u->op == op ? u : nullptr;
}

const Binary* as_binary(const NodePtr& n, BinaryOp op) {
  const auto* b = std::get_if<Binary>(&n->kind);
  return b != nullptr && b->op == op ? b : nullptr;
}

bool same_tree(const Node& a, const Node& b) {
  if (a.fusion != b.fusion || a.kind.index() != b.kind.index()) return false;
  if (const auto* la = std::get_if<Leaf>(&a.kind)) return la->matrix == std::get<Leaf>(b.kind).matrix;
  if (const auto* ua = std::get_if<Unary>(&a.kind)) {
    const auto& ub = std::get<Unary>(b.kind);
    return ua->op == ub.op && (ua->op != UnaryOp::scalar_mul || ua->scalar == ub.scalar) &&
           same_tree(*ua->child, *ub.child);
  }
  const auto& ba = std::get<Binary>(a.kind);
  const auto& bb = std::get<Binary>(b.kind);
  return ba.op == bb.op && same_tree(*ba.left, *bb.left) && same_tree(*ba.right, *bb.right);
}

std::string shape_str(Shape s) { return std::to_string(s.n_rows) + "x" + std::to_string(s.n_cols); }

Shape shape_of(const Node& n, const std::string& path) {
  if (const auto* leaf = std::get_if<Leaf>(&n.kind)) return {leaf->matrix->n_rows(), leaf->matrix->n_cols()};
  if (const auto* u = std::get_if<Unary>(&n.kind)) {
    const Shape s = shape_of(*u->child, path + ".child");
    switch (u->op) {
      case UnaryOp::transpose: return {s.n_cols, s.n_rows};
      case UnaryOp::scalar_mul: return s;
      case UnaryOp::diagmat: {
        const index_t k = std::min(s.n_rows, s.n_cols);
        return {k, k};
      }
    }
  }
  const auto& b = std::get<Binary>(n.kind);
  const Shape l = shape_of(*b.left, path + ".left");
  const Shape r = shape_of(*b.right, path + ".right");
  if (b.op == BinaryOp::add) {
    if (l != r) throw DimensionError("shape mismatch at " + path + ": add of " + shape_str(l) + " and " + shape_str(r));
    return l;
  }
  if (l.n_cols != r.n_rows) {
    throw DimensionError("shape mismatch at " + path + ": multiply of " + shape_str(l) + " by " + shape_str(r));
  }
  return {l.n_rows, r.n_cols};
}

NodePtr rewrite_node(const NodePtr& n, Context ctx) {
  if (std::holds_alternative<Leaf>(n->kind)) return n;

  if (const auto* u = std::get_if<Unary>(&n->kind)) {
    NodePtr child = rewrite_node(u->child, Context::value);
    if (u->op == UnaryOp::transpose) {
      if (const auto* inner = as_unary(child, UnaryOp::transpose)) return inner->child;
    }
    const bool fusable = u->op == UnaryOp::diagmat && as_binary(child, BinaryOp::add) != nullptr;
    return make(Unary{u->op, u->scalar, std::move(child)}, fusable ? Fusion::diagmat_of_sum : Fusion::none);
  }

  const auto& b = std::get<Binary>(n->kind);
  NodePtr left = rewrite_node(b.left, Context::value);
  NodePtr right = rewrite_node(b.right, Context::value);
  const bool fusable =
      ctx == Context::trace && b.op == BinaryOp::mul && as_unary(left, UnaryOp::transpose) != nullptr;
  return make(Binary{b.op, std::move(left), std::move(right)},
              fusable ? Fusion::trace_of_transpose_product : Fusion::none);
}

std::size_t fusions_in(const Node& n) {
  const std::size_t here = n.fusion == Fusion::none ? 0 : 1;
  if (const auto* u = std::get_if<Unary>(&n.kind)) return here + fusions_in(*u->child);
  if (const auto* b = std::get_if<Binary>(&n.kind)) return here + fusions_in(*b->left) + fusions_in(*b->right);
  return here;
}

// Either a borrowed leaf matrix or an owned intermediate.
class Operand {
 public:
  static Operand borrow(const sp_mat& m) { return Operand(nullptr, &m); }
  static Operand own(sp_mat m) {
    auto p = std::make_unique<sp_mat>(std::move(m));
    const sp_mat* raw = p.get();
    return Operand(std::move(p), raw);
  }

  const sp_mat& get() const noexcept { return *ptr_; }

  sp_mat take() && { return owned_ ? std::move(*owned_) : *ptr_; }

 private:
  Operand(std::unique_ptr<sp_mat> owned, const sp_mat* ptr) : owned_(std::move(owned)), ptr_(ptr) {}

  std::unique_ptr<sp_mat> owned_;
  const sp_mat* ptr_;
};

Operand evaluate(const NodePtr& n, bool fuse);

sp_mat evaluate_diagmat(const Unary& u, Fusion fusion, bool fuse) {
  if (fuse && fusion == Fusion::diagmat_of_sum) {
    const auto& sum = std::get<Binary>(u.child->kind);
    ++counters().fused_diagmat_dispatches;
    const Operand a = evaluate(sum.left, fuse);
    const Operand b = evaluate(sum.right, fuse);
    return diagmat_fused_add(a.get(), b.get());
  }
  if (fuse && std::holds_alternative<Leaf>(u.child->kind)) {
    ++counters().leaf_diagmat_dispatches;
    return diagmat(*std::get<Leaf>(u.child->kind).matrix);
  }
  ++counters().fallback_diagmat_dispatches;
  return diagmat(evaluate(u.child, fuse).get());
}

Operand evaluate(const NodePtr& n, bool fuse) {
  if (const auto* leaf = std::get_if<Leaf>(&n->kind)) return Operand::borrow(*leaf->matrix);

  if (const auto* u = std::get_if<Unary>(&n->kind)) {
    switch (u->op) {
      case UnaryOp::transpose: return Operand::own(transpose(evaluate(u->child, fuse).get()));
      case UnaryOp::scalar_mul: return Operand::own(scalar_mul(evaluate(u->child, fuse).get(), u->scalar));
      case UnaryOp::diagmat: return Operand::own(evaluate_diagmat(*u, n->fusion, fuse));
    }
  }

  const auto& b = std::get<Binary>(n->kind);
  const Operand left = evaluate(b.left, fuse);
  const Operand right = evaluate(b.right, fuse);
  return Operand::own(b.op == BinaryOp::add ? sp_add(left.get(), right.get()) : sp_mul(left.get(), right.get()));
}

}  // namespace

bool operator==(const Expr& a, const Expr& b) { return same_tree(a.node(), b.node()); }

Expr leaf(const sp_mat& m) { return Expr(make(Leaf{&m})); }
Expr t(const Expr& e) { return Expr(make(Unary{UnaryOp::transpose, 0.0, e.ptr()})); }
Expr diagmat(const Expr& e) { return Expr(make(Unary{UnaryOp::diagmat, 0.0, e.ptr()})); }
Expr operator*(double k, const Expr& e) { return Expr(make(Unary{UnaryOp::scalar_mul, k, e.ptr()})); }
Expr operator+(const Expr& a, const Expr& b) { return Expr(make(Binary{BinaryOp::add, a.ptr(), b.ptr()})); }
Expr operator*(const Expr& a, const Expr& b) { return Expr(make(Binary{BinaryOp::mul, a.ptr(), b.ptr()})); }

Shape infer_shape(const Expr& e) { return shape_of(e.node(), "root"); }

Expr rewrite(const Expr& e, Context ctx) { return Expr(rewrite_node(e.ptr(), ctx)); }

std::size_t count_fusions(const Expr& e) { return fusions_in(e.node()); }

sp_mat eval(const Expr& e, EvalOptions opts) {
  infer_shape(e);
  const NodePtr root = opts.fuse ? rewrite_node(e.ptr(), Context::value) : e.ptr();
  return evaluate(root, opts.fuse).take();
}

double eval_trace(const Expr& e, EvalOptions opts) {
  const Shape s = infer_shape(e);
  if (s.n_rows != s.n_cols) throw DimensionError("trace of non-square " + shape_str(s) + " expression");

  const NodePtr root = opts.fuse ? rewrite_node(e.ptr(), Context::trace) : e.ptr();
  if (opts.fuse && root->fusion == Fusion::trace_of_transpose_product) {
    const auto& product = std::get<Binary>(root->kind);
    const auto& transposed = std::get<Unary>(product.left->kind);
    ++counters().fused_trace_dispatches;
    const Operand a = evaluate(transposed.child, opts.fuse);
    const Operand b = evaluate(product.right, opts.fuse);
    return trace_fused_atb(a.get(), b.get());
  }
  ++counters().fallback_trace_dispatches;
  return trace(evaluate(root, opts.fuse).get());
}

sp_mat eval_diagmat(const Expr& e, EvalOptions opts) { return eval(diagmat(e), opts); }

}  // namespace hsparse::expr
