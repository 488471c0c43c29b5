#include "gail/exprlang.hpp"

#include <cctype>
#include <cmath>
#include <cstdio>
#include <cstdlib>
#include <functional>

namespace gail {

namespace {

using NodePtr = std::shared_ptr<const ExprNode>;

struct FnInfo {
  const char* name;
  Fn fn;
  int arity;
};

constexpr FnInfo kFunctions[] = {
    {"sin", Fn::Sin, 1},   {"cos", Fn::Cos, 1},   {"exp", Fn::Exp, 1},   {"log", Fn::Log, 1},
    {"sqrt", Fn::Sqrt, 1}, {"abs", Fn::Abs, 1},   {"max", Fn::Max, 2},   {"min", Fn::Min, 2},
    {"prod", Fn::Prod, 1}, {"normcdf", Fn::NormCdf, 1}};

const FnInfo* find_fn(const std::string& name) {
  for (const auto& f : kFunctions)
    if (name == f.name) return &f;
  return nullptr;
}

const char* fn_name(Fn fn) {
  for (const auto& f : kFunctions)
    if (f.fn == fn) return f.name;
  return "?";
}

NodePtr make(Op op, std::vector<NodePtr> args = {}) {
  auto n = std::make_shared<ExprNode>();
  n->op = op;
  n->args = std::move(args);
  return n;
}

class Parser {
 public:
  Parser(const std::string& text, Index dim) : s_(text), dim_(dim) {}

  NodePtr parse_all() {
    NodePtr e = expr();
    skip();
    if (pos_ < s_.size()) fail("unexpected '" + std::string(1, s_[pos_]) + "', expected an operator or end of input");
    return e;
  }

 private:
  [[noreturn]] void fail(const std::string& msg) const { throw ParseError(msg, pos_); }

  void skip() {
    while (pos_ < s_.size() && std::isspace(static_cast<unsigned char>(s_[pos_]))) ++pos_;
  }

  // Consumes `op` or its MATLAB element-wise spelling ".op".
  bool accept_op(char op) {
    skip();
    if (pos_ < s_.size() && s_[pos_] == op) {
      ++pos_;
      return true;
    }
    if (op != '+' && op != '-' && pos_ + 1 < s_.size() && s_[pos_] == '.' && s_[pos_ + 1] == op) {
      pos_ += 2;
      return true;
    }
    return false;
  }

  NodePtr expr() {
    NodePtr lhs = term();
    for (;;) {
      if (accept_op('+')) lhs = make(Op::Add, {lhs, term()});
      else if (accept_op('-')) lhs = make(Op::Sub, {lhs, term()});
      else return lhs;
    }
  }

  NodePtr term() {
    NodePtr lhs = unary();
    for (;;) {
      if (accept_op('*')) lhs = make(Op::Mul, {lhs, unary()});
      else if (accept_op('/')) lhs = make(Op::Div, {lhs, unary()});
      else return lhs;
    }
  }

  NodePtr unary() {
    if (accept_op('-')) return make(Op::Neg, {unary()});
    if (accept_op('+')) return unary();
    return power();
  }

  NodePtr power() {
    NodePtr base = primary();
    if (accept_op('^')) return make(Op::Pow, {base, unary()});
    return base;
  }

  NodePtr number() {
    const char* begin = s_.c_str() + pos_;
    char* end = nullptr;
    double v = std::strtod(begin, &end);
    if (end == begin) fail("expected a number");
    if (!std::isfinite(v)) fail("numeric literal out of range");
    pos_ += static_cast<std::size_t>(end - begin);
    auto n = std::make_shared<ExprNode>();
    n->op = Op::Num;
    n->value = v;
    return n;
  }

  NodePtr variable(const std::string& id, std::size_t at, bool allow_all) {
    if (id == "x") {
      if (dim_ == 1) {
        auto n = std::make_shared<ExprNode>();
        n->op = Op::Var;
        n->var = 0;
        return n;
      }
      if (allow_all) return make(Op::AllVars);
      pos_ = at;
      fail("'x' is ambiguous in dimension " + std::to_string(dim_) + "; use x1..x" + std::to_string(dim_));
    }
    const std::string digits = id.substr(1);
    Index k = 0;
    for (char c : digits) k = k * 10 + (c - '0');
    if (k < 1 || k > dim_) {
      pos_ = at;
      fail("variable " + id + " is out of range for dimension " + std::to_string(dim_));
    }
    auto n = std::make_shared<ExprNode>();
    n->op = Op::Var;
    n->var = k - 1;
    return n;
  }

  static bool is_var_name(const std::string& id) {
    if (id.empty() || id[0] != 'x') return false;
    for (std::size_t i = 1; i < id.size(); ++i)
      if (!std::isdigit(static_cast<unsigned char>(id[i]))) return false;
    return id.size() == 1 || id[1] != '0';
  }

  NodePtr primary() {
    skip();
    if (pos_ >= s_.size()) fail("unexpected end of input, expected an operand");
    const char c = s_[pos_];
    if (std::isdigit(static_cast<unsigned char>(c)) || c == '.') return number();
    if (c == '(') {
      ++pos_;
      NodePtr e = expr();
      skip();
      if (pos_ >= s_.size() || s_[pos_] != ')') fail("expected ')'");
      ++pos_;
      return e;
    }
    if (std::isalpha(static_cast<unsigned char>(c)) || c == '_') {
      const std::size_t at = pos_;
      while (pos_ < s_.size() && (std::isalnum(static_cast<unsigned char>(s_[pos_])) || s_[pos_] == '_')) ++pos_;
      const std::string id = s_.substr(at, pos_ - at);
      skip();
      const bool call = pos_ < s_.size() && s_[pos_] == '(';
      if (!call) {
        if (id == "pi" || id == "e") {
          auto n = std::make_shared<ExprNode>();
          n->op = Op::Num;
          n->value = id == "pi" ? M_PI : M_E;
          return n;
        }
        if (is_var_name(id)) return variable(id, at, false);
        pos_ = at;
        fail("unknown identifier '" + id + "'");
      }
      const FnInfo* info = find_fn(id);
      if (!info) {
        pos_ = at;
        fail("unknown function '" + id + "'");
      }
      ++pos_;  // '('
      std::vector<NodePtr> args;
      if (info->fn == Fn::Prod) {
        skip();
        const std::size_t vat = pos_;
        std::size_t p = pos_;
        while (p < s_.size() && std::isalnum(static_cast<unsigned char>(s_[p]))) ++p;
        const std::string arg = s_.substr(vat, p - vat);
        if (arg != "x") fail("prod takes the coordinate vector x as its argument");
        pos_ = p;
        args.push_back(variable(arg, vat, true));
      } else {
        skip();
        if (pos_ < s_.size() && s_[pos_] != ')') {
          args.push_back(expr());
          while (true) {
            skip();
            if (pos_ < s_.size() && s_[pos_] == ',') {
              ++pos_;
              args.push_back(expr());
            } else {
              break;
            }
          }
        }
      }
      skip();
      if (pos_ >= s_.size() || s_[pos_] != ')') fail("expected ')' to close call to " + id);
      if (static_cast<int>(args.size()) != info->arity) {
        pos_ = at;
        fail(id + " expects " + std::to_string(info->arity) + " argument(s), got " + std::to_string(args.size()));
      }
      ++pos_;
      auto n = std::make_shared<ExprNode>();
      n->op = Op::Call;
      n->fn = info->fn;
      n->args = std::move(args);
      return n;
    }
    fail("unexpected '" + std::string(1, c) + "', expected an operand");
  }

  const std::string& s_;
  Index dim_;
  std::size_t pos_ = 0;
};

Eigen::ArrayXd eval_node(const ExprNode& n, const Eigen::MatrixXd& x) {
  const Index rows = x.rows();
  switch (n.op) {
    case Op::Num: return Eigen::ArrayXd::Constant(rows, n.value);
    case Op::Var: return x.col(n.var).array();
    case Op::AllVars: return x.array().rowwise().prod();
    case Op::Neg: return -eval_node(*n.args[0], x);
    case Op::Add: return eval_node(*n.args[0], x) + eval_node(*n.args[1], x);
    case Op::Sub: return eval_node(*n.args[0], x) - eval_node(*n.args[1], x);
    case Op::Mul: return eval_node(*n.args[0], x) * eval_node(*n.args[1], x);
    case Op::Div: return eval_node(*n.args[0], x) / eval_node(*n.args[1], x);
    case Op::Pow: {
      Eigen::ArrayXd a = eval_node(*n.args[0], x);
      Eigen::ArrayXd b = eval_node(*n.args[1], x);
      return a.binaryExpr(b, [](double u, double v) { return std::pow(u, v); });
    }
    case Op::Call: {
      Eigen::ArrayXd a = eval_node(*n.args[0], x);
      switch (n.fn) {
        case Fn::Sin: return a.sin();
        case Fn::Cos: return a.cos();
        case Fn::Exp: return a.exp();
        case Fn::Log: return a.log();
        case Fn::Sqrt: return a.sqrt();
        case Fn::Abs: return a.abs();
        case Fn::Max: {
          Eigen::ArrayXd b = eval_node(*n.args[1], x);
          return a.binaryExpr(b, [](double u, double v) { return std::isnan(u) || std::isnan(v) ? NAN : std::max(u, v); });
        }
        case Fn::Min: {
          Eigen::ArrayXd b = eval_node(*n.args[1], x);
          return a.binaryExpr(b, [](double u, double v) { return std::isnan(u) || std::isnan(v) ? NAN : std::min(u, v); });
        }
        case Fn::Prod: return a;
        case Fn::NormCdf: return a.unaryExpr([](double u) { return norm_cdf(u); });
      }
    }
  }
  return Eigen::ArrayXd::Constant(rows, NAN);
}

void render_node(const ExprNode& n, std::string& out) {
  auto bin = [&](const char* op) {
    out += '(';
    render_node(*n.args[0], out);
    out += op;
    render_node(*n.args[1], out);
    out += ')';
  };
  switch (n.op) {
    case Op::Num: {
      char buf[40];
      std::snprintf(buf, sizeof buf, "%.17g", n.value);
      out += buf;
      return;
    }
    case Op::Var: out += "x" + std::to_string(n.var + 1); return;
    case Op::AllVars: out += "x"; return;
    case Op::Neg:
      out += "(-";
      render_node(*n.args[0], out);
      out += ')';
      return;
    case Op::Add: bin("+"); return;
    case Op::Sub: bin("-"); return;
    case Op::Mul: bin("*"); return;
    case Op::Div: bin("/"); return;
    case Op::Pow: bin("^"); return;
    case Op::Call:
      out += fn_name(n.fn);
      out += '(';
      for (std::size_t i = 0; i < n.args.size(); ++i) {
        if (i) out += ',';
        render_node(*n.args[i], out);
      }
      out += ')';
      return;
  }
}

bool same(const ExprNode& a, const ExprNode& b) {
  if (a.op != b.op || a.args.size() != b.args.size()) return false;
  if (a.op == Op::Num && !(a.value == b.value || (std::isnan(a.value) && std::isnan(b.value)))) return false;
  if (a.op == Op::Var && a.var != b.var) return false;
  if (a.op == Op::Call && a.fn != b.fn) return false;
  for (std::size_t i = 0; i < a.args.size(); ++i)
    if (!same(*a.args[i], *b.args[i])) return false;
  return true;
}

}  // namespace

Expr parse(const std::string& text, Index dim) {
  if (dim < 1) throw ConfigError("expression dimension must be at least 1");
  Parser p(text, dim);
  return Expr(p.parse_all(), dim);
}

Eigen::VectorXd Expr::eval_batch(const Eigen::MatrixXd& points) const {
  if (points.cols() != dim_)
    throw ConfigError("expression expects " + std::to_string(dim_) + " coordinates, got " +
                      std::to_string(points.cols()));
  return eval_node(*root_, points).matrix();
}

double Expr::eval(const Eigen::VectorXd& point) const {
  return eval_batch(point.transpose())[0];
}

std::string Expr::render() const {
  std::string out;
  render_node(*root_, out);
  return out;
}

bool Expr::operator==(const Expr& other) const {
  return dim_ == other.dim_ && same(*root_, *other.root_);
}

Eigen::VectorXd eval_batch(const Expr& e, const Eigen::MatrixXd& points) { return e.eval_batch(points); }

}  // namespace gail
