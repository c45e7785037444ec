#pragma once

#include <memory>
#include <stdexcept>
#include <string>

#include "ihom/material.hpp"

namespace ihom {

class EvalError : public std::runtime_error {
 public:
  using std::runtime_error::runtime_error;
};

// Immutable scalar expression over the entries of the homogenized tensor.
// Expressions are cheap value-semantics handles into a shared DAG; eval and
// backward are side-effect free. Constants fold eagerly on construction.
class Expr {
 public:
  static Expr constant(double v);
  static Expr entry(int i, int j);

  double eval(const Matrix6& c) const;
  // Reverse-mode gradient: d(seed * expr)/dC. Entries (i,j) and (j,i)
  // accumulate separately, exactly as referenced by the expression.
  Matrix6 backward(double seed, const Matrix6& c) const;

  Expr pow(double e) const;
  Expr log() const;
  Expr exp() const;
  Expr operator-() const;

  std::string str() const;

  friend Expr operator+(const Expr& a, const Expr& b);
  friend Expr operator-(const Expr& a, const Expr& b);
  friend Expr operator*(const Expr& a, const Expr& b);
  friend Expr operator/(const Expr& a, const Expr& b);

  struct Node;

 private:
  explicit Expr(std::shared_ptr<const Node> n) : node_(std::move(n)) {}
  std::shared_ptr<const Node> node_;
};

inline Expr operator+(const Expr& a, double b) { return a + Expr::constant(b); }
inline Expr operator+(double a, const Expr& b) { return Expr::constant(a) + b; }
inline Expr operator-(const Expr& a, double b) { return a - Expr::constant(b); }
inline Expr operator-(double a, const Expr& b) { return Expr::constant(a) - b; }
inline Expr operator*(const Expr& a, double b) { return a * Expr::constant(b); }
inline Expr operator*(double a, const Expr& b) { return Expr::constant(a) * b; }
inline Expr operator/(const Expr& a, double b) { return a / Expr::constant(b); }
inline Expr operator/(double a, const Expr& b) { return Expr::constant(a) / b; }

// Predefined objectives (all minimized).
Expr bulk_objective();
Expr shear_objective();
Expr npr_relaxed(double beta, int iter);
Expr npr_log(double eta, double tau, double gamma);

// Isotropic Poisson's-ratio estimate used for reporting only.
double poisson_ratio_report(const Matrix6& c);

}  // namespace ihom
