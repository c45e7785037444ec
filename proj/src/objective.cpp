#include "ihom/objective.hpp"

#include <cmath>
#include <unordered_map>
#include <vector>

namespace ihom {

enum class Op { kConst, kEntry, kAdd, kSub, kMul, kDiv, kPow, kLog, kExp, kNeg };

struct Expr::Node {
  Op op;
  double value = 0.0;  // kConst payload or kPow exponent
  int i = 0, j = 0;    // kEntry payload
  std::shared_ptr<const Node> a, b;
};

namespace {

using NodePtr = std::shared_ptr<const Expr::Node>;

NodePtr make_node(Op op, double value, int i, int j, NodePtr a, NodePtr b) {
  auto n = std::make_shared<Expr::Node>();
  n->op = op;
  n->value = value;
  n->i = i;
  n->j = j;
  n->a = std::move(a);
  n->b = std::move(b);
  return n;
}

std::string node_str(const Expr::Node* n);

std::string binary_str(const Expr::Node* n, const char* op) {
  return "(" + node_str(n->a.get()) + op + node_str(n->b.get()) + ")";
}

std::string node_str(const Expr::Node* n) {
  switch (n->op) {
    case Op::kConst: {
      char buf[32];
      std::snprintf(buf, sizeof(buf), "%g", n->value);
      return buf;
    }
    case Op::kEntry:
      return "C(" + std::to_string(n->i) + "," + std::to_string(n->j) + ")";
    case Op::kAdd: return binary_str(n, "+");
    case Op::kSub: return binary_str(n, "-");
    case Op::kMul: return binary_str(n, "*");
    case Op::kDiv: return binary_str(n, "/");
    case Op::kPow: {
      char buf[32];
      std::snprintf(buf, sizeof(buf), "%g", n->value);
      return "pow(" + node_str(n->a.get()) + "," + buf + ")";
    }
    case Op::kLog: return "log(" + node_str(n->a.get()) + ")";
    case Op::kExp: return "exp(" + node_str(n->a.get()) + ")";
    case Op::kNeg: return "-" + node_str(n->a.get());
  }
  return "?";
}

[[noreturn]] void domain_error(const char* what, const Expr::Node* n) {
  std::string where = node_str(n);
  if (where.size() > 120) where = where.substr(0, 117) + "...";
  throw EvalError(std::string(what) + " at " + where);
}

double eval_node(const Expr::Node* n, const Matrix6& c,
                 std::unordered_map<const Expr::Node*, double>& memo) {
  const auto it = memo.find(n);
  if (it != memo.end()) return it->second;
  double v = 0.0;
  switch (n->op) {
    case Op::kConst: v = n->value; break;
    case Op::kEntry: v = c(n->i, n->j); break;
    case Op::kAdd: v = eval_node(n->a.get(), c, memo) + eval_node(n->b.get(), c, memo); break;
    case Op::kSub: v = eval_node(n->a.get(), c, memo) - eval_node(n->b.get(), c, memo); break;
    case Op::kMul: v = eval_node(n->a.get(), c, memo) * eval_node(n->b.get(), c, memo); break;
    case Op::kDiv: {
      const double den = eval_node(n->b.get(), c, memo);
      if (den == 0.0) domain_error("division by zero", n);
      v = eval_node(n->a.get(), c, memo) / den;
      break;
    }
    case Op::kPow: {
      const double base = eval_node(n->a.get(), c, memo);
      const double e = n->value;
      if (base < 0.0 && e != std::floor(e)) domain_error("fractional power of negative value", n);
      if (base == 0.0 && e < 1.0 && e != 0.0) domain_error("non-positive base of power", n);
      v = std::pow(base, e);
      break;
    }
    case Op::kLog: {
      const double x = eval_node(n->a.get(), c, memo);
      if (!(x > 0.0)) domain_error("log of non-positive value", n);
      v = std::log(x);
      break;
    }
    case Op::kExp: v = std::exp(eval_node(n->a.get(), c, memo)); break;
    case Op::kNeg: v = -eval_node(n->a.get(), c, memo); break;
  }
  memo.emplace(n, v);
  return v;
}

void topo_order(const Expr::Node* n, std::unordered_map<const Expr::Node*, bool>& seen,
                std::vector<const Expr::Node*>& order) {
  if (seen.count(n)) return;
  seen.emplace(n, true);
  if (n->a) topo_order(n->a.get(), seen, order);
  if (n->b) topo_order(n->b.get(), seen, order);
  order.push_back(n);
}

}  // namespace

Expr Expr::constant(double v) { return Expr(make_node(Op::kConst, v, 0, 0, nullptr, nullptr)); }

Expr Expr::entry(int i, int j) {
  if (i < 0 || i > 5 || j < 0 || j > 5)
    throw std::invalid_argument("tensor entry index out of range");
  return Expr(make_node(Op::kEntry, 0.0, i, j, nullptr, nullptr));
}

double Expr::eval(const Matrix6& c) const {
  std::unordered_map<const Node*, double> memo;
  return eval_node(node_.get(), c, memo);
}

Matrix6 Expr::backward(double seed, const Matrix6& c) const {
  std::unordered_map<const Node*, double> values;
  eval_node(node_.get(), c, values);

  std::unordered_map<const Node*, bool> seen;
  std::vector<const Node*> order;
  topo_order(node_.get(), seen, order);

  std::unordered_map<const Node*, double> adj;
  adj[node_.get()] = seed;
  Matrix6 grad = Matrix6::Zero();
  for (auto it = order.rbegin(); it != order.rend(); ++it) {
    const Node* n = *it;
    const auto ait = adj.find(n);
    if (ait == adj.end()) continue;
    const double g = ait->second;
    switch (n->op) {
      case Op::kConst: break;
      case Op::kEntry: grad(n->i, n->j) += g; break;
      case Op::kAdd:
        adj[n->a.get()] += g;
        adj[n->b.get()] += g;
        break;
      case Op::kSub:
        adj[n->a.get()] += g;
        adj[n->b.get()] -= g;
        break;
      case Op::kMul:
        adj[n->a.get()] += g * values.at(n->b.get());
        adj[n->b.get()] += g * values.at(n->a.get());
        break;
      case Op::kDiv: {
        const double bv = values.at(n->b.get());
        adj[n->a.get()] += g / bv;
        adj[n->b.get()] -= g * values.at(n->a.get()) / (bv * bv);
        break;
      }
      case Op::kPow: {
        const double av = values.at(n->a.get());
        adj[n->a.get()] += g * n->value * std::pow(av, n->value - 1.0);
        break;
      }
      case Op::kLog: adj[n->a.get()] += g / values.at(n->a.get()); break;
      case Op::kExp: adj[n->a.get()] += g * values.at(n); break;
      case Op::kNeg: adj[n->a.get()] -= g; break;
    }
  }
  return grad;
}

namespace {

bool both_const(const NodePtr& a, const NodePtr& b) {
  return a->op == Op::kConst && b->op == Op::kConst;
}

}  // namespace

Expr operator+(const Expr& a, const Expr& b) {
  if (both_const(a.node_, b.node_)) return Expr::constant(a.node_->value + b.node_->value);
  return Expr(make_node(Op::kAdd, 0.0, 0, 0, a.node_, b.node_));
}

Expr operator-(const Expr& a, const Expr& b) {
  if (both_const(a.node_, b.node_)) return Expr::constant(a.node_->value - b.node_->value);
  return Expr(make_node(Op::kSub, 0.0, 0, 0, a.node_, b.node_));
}

Expr operator*(const Expr& a, const Expr& b) {
  if (both_const(a.node_, b.node_)) return Expr::constant(a.node_->value * b.node_->value);
  return Expr(make_node(Op::kMul, 0.0, 0, 0, a.node_, b.node_));
}

Expr operator/(const Expr& a, const Expr& b) {
  if (both_const(a.node_, b.node_)) {
    if (b.node_->value == 0.0) throw EvalError("division by zero in constant fold");
    return Expr::constant(a.node_->value / b.node_->value);
  }
  return Expr(make_node(Op::kDiv, 0.0, 0, 0, a.node_, b.node_));
}

Expr Expr::pow(double e) const {
  if (node_->op == Op::kConst) return constant(std::pow(node_->value, e));
  return Expr(make_node(Op::kPow, e, 0, 0, node_, nullptr));
}

Expr Expr::log() const {
  if (node_->op == Op::kConst) {
    if (!(node_->value > 0.0)) throw EvalError("log of non-positive constant");
    return constant(std::log(node_->value));
  }
  return Expr(make_node(Op::kLog, 0.0, 0, 0, node_, nullptr));
}

Expr Expr::exp() const {
  if (node_->op == Op::kConst) return constant(std::exp(node_->value));
  return Expr(make_node(Op::kExp, 0.0, 0, 0, node_, nullptr));
}

Expr Expr::operator-() const {
  if (node_->op == Op::kConst) return constant(-node_->value);
  return Expr(make_node(Op::kNeg, 0.0, 0, 0, node_, nullptr));
}

std::string Expr::str() const { return node_str(node_.get()); }

Expr bulk_objective() {
  const Expr diag = Expr::entry(0, 0) + Expr::entry(1, 1) + Expr::entry(2, 2);
  const Expr off = Expr::entry(0, 1) + Expr::entry(0, 2) + Expr::entry(1, 2);
  return -((diag + 2.0 * off) / 9.0);
}

Expr shear_objective() {
  return -((Expr::entry(3, 3) + Expr::entry(4, 4) + Expr::entry(5, 5)) / 3.0);
}

Expr npr_relaxed(double beta, int iter) {
  if (!(beta > 0.0 && beta < 1.0))
    throw std::invalid_argument("npr-relaxed beta must lie in (0,1)");
  const Expr off = Expr::entry(0, 1) + Expr::entry(0, 2) + Expr::entry(1, 2);
  const Expr diag = Expr::entry(0, 0) + Expr::entry(1, 1) + Expr::entry(2, 2);
  return off - std::pow(beta, double(iter)) * diag;
}

Expr npr_log(double eta, double tau, double gamma) {
  const Expr off = Expr::entry(0, 1) + Expr::entry(1, 2) + Expr::entry(2, 0);
  const Expr diag = Expr::entry(0, 0) + Expr::entry(1, 1) + Expr::entry(2, 2);
  return (1.0 + eta * off / diag).log() + tau * diag.pow(gamma);
}

double poisson_ratio_report(const Matrix6& c) {
  const double c00 = (c(0, 0) + c(1, 1) + c(2, 2)) / 3.0;
  const double c01 = (c(0, 1) + c(0, 2) + c(1, 2)) / 3.0;
  const double den = c00 + c01;
  if (den == 0.0) return 0.0;
  return c01 / den;
}

}  // namespace ihom
