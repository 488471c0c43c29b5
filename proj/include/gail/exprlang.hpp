#pragma once

#include <memory>
#include <string>
#include <vector>

#include "gail/core.hpp"

namespace gail {

/// Syntax, arity, or dimension error with a 0-based character position.
class ParseError : public ConfigError {
 public:
  ParseError(const std::string& msg, std::size_t pos)
      : ConfigError("at position " + std::to_string(pos) + ": " + msg), pos_(pos) {}
  std::size_t position() const { return pos_; }

 private:
  std::size_t pos_;
};

enum class Op { Num, Var, AllVars, Neg, Add, Sub, Mul, Div, Pow, Call };

enum class Fn { Sin, Cos, Exp, Log, Sqrt, Abs, Max, Min, Prod, NormCdf };

struct ExprNode {
  Op op = Op::Num;
  double value = 0.0;  // Num
  Index var = 0;       // Var, 0-based coordinate
  Fn fn = Fn::Sin;     // Call
  std::vector<std::shared_ptr<const ExprNode>> args;
};

/// Immutable expression tree over x (1-D) or x1..xd.
class Expr {
 public:
  Expr() = default;
  Expr(std::shared_ptr<const ExprNode> root, Index dim) : root_(std::move(root)), dim_(dim) {}

  Index dim() const { return dim_; }
  const ExprNode& root() const { return *root_; }

  /// One value per row of `points` (n x dim).
  Eigen::VectorXd eval_batch(const Eigen::MatrixXd& points) const;
  double eval(const Eigen::VectorXd& point) const;

  /// Fully parenthesized canonical text; parses back to the same tree.
  std::string render() const;

  bool operator==(const Expr& other) const;

 private:
  std::shared_ptr<const ExprNode> root_;
  Index dim_ = 1;
};

/// expr    := term (('+' | '-') term)*
/// term    := unary (('*' | '/') unary)*
/// unary   := ('-' | '+') unary | power
/// power   := primary (('^') unary)?
/// primary := number | 'pi' | 'e' | var | func '(' args ')' | '(' expr ')'
/// ".^", ".*" and "./" are accepted as aliases.
Expr parse(const std::string& text, Index dim);

Eigen::VectorXd eval_batch(const Expr& e, const Eigen::MatrixXd& points);

}  // namespace gail
