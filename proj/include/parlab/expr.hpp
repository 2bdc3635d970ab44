#pragma once

#include <cctype>
#include <cmath>
#include <memory>
#include <string>
#include <string_view>

#include "parlab/errors.hpp"

namespace parlab {

// Closed-form expression trees for coefficient and source fields.
// Grammar: symbols y1, y2, t; operations + - * /; functions sin, cos, exp;
// decimal constants and the named constant pi. This is the config-facing
// field representation: reproducible, serializable, language-neutral.
class Expr {
  struct Node;
  using NodePtr = std::shared_ptr<const Node>;

  struct Node {
    enum class Kind { constant, y1, y2, t, add, sub, mul, div, neg, sin_fn, cos_fn, exp_fn };
    Kind kind;
    double value = 0.0;
    NodePtr a, b;
  };

 public:
  Expr() : Expr(constant(0.0)) {}

  double operator()(double y1, double y2, double t) const { return eval(root_.get(), y1, y2, t); }

  bool uses_time() const { return uses(root_.get(), Node::Kind::t); }

  const std::string& text() const { return text_; }

  static Expr constant(double v) {
    auto n = std::make_shared<Node>();
    n->kind = Node::Kind::constant;
    n->value = v;
    Expr e{nullptr};
    e.root_ = n;
    e.text_ = std::to_string(v);
    return e;
  }

  static Expr parse(std::string_view src) {
    Parser p{src, 0};
    Expr e{nullptr};
    e.root_ = p.parse_expr();
    p.skip_ws();
    if (p.pos != src.size())
      throw Error(errc::bad_expression, "trailing input at position " + std::to_string(p.pos) +
                                            " in '" + std::string(src) + "'");
    e.text_ = std::string(src);
    return e;
  }

 private:
  explicit Expr(std::nullptr_t) {}

  static double eval(const Node* n, double y1, double y2, double t) {
    switch (n->kind) {
      case Node::Kind::constant: return n->value;
      case Node::Kind::y1: return y1;
      case Node::Kind::y2: return y2;
      case Node::Kind::t: return t;
      case Node::Kind::add: return eval(n->a.get(), y1, y2, t) + eval(n->b.get(), y1, y2, t);
      case Node::Kind::sub: return eval(n->a.get(), y1, y2, t) - eval(n->b.get(), y1, y2, t);
      case Node::Kind::mul: return eval(n->a.get(), y1, y2, t) * eval(n->b.get(), y1, y2, t);
      case Node::Kind::div: return eval(n->a.get(), y1, y2, t) / eval(n->b.get(), y1, y2, t);
      case Node::Kind::neg: return -eval(n->a.get(), y1, y2, t);
      case Node::Kind::sin_fn: return std::sin(eval(n->a.get(), y1, y2, t));
      case Node::Kind::cos_fn: return std::cos(eval(n->a.get(), y1, y2, t));
      case Node::Kind::exp_fn: return std::exp(eval(n->a.get(), y1, y2, t));
    }
    return 0.0;
  }

  static bool uses(const Node* n, Node::Kind k) {
    if (!n) return false;
    if (n->kind == k) return true;
    return uses(n->a.get(), k) || uses(n->b.get(), k);
  }

  struct Parser {
    std::string_view src;
    std::size_t pos;

    void skip_ws() {
      while (pos < src.size() && std::isspace(static_cast<unsigned char>(src[pos]))) ++pos;
    }

    bool eat(char c) {
      skip_ws();
      if (pos < src.size() && src[pos] == c) {
        ++pos;
        return true;
      }
      return false;
    }

    [[noreturn]] void fail(const std::string& msg) {
      throw Error(errc::bad_expression,
                  msg + " at position " + std::to_string(pos) + " in '" + std::string(src) + "'");
    }

    NodePtr make(Node::Kind k, NodePtr a = nullptr, NodePtr b = nullptr, double v = 0.0) {
      auto n = std::make_shared<Node>();
      n->kind = k;
      n->a = std::move(a);
      n->b = std::move(b);
      n->value = v;
      return n;
    }

    NodePtr parse_expr() {
      auto lhs = parse_term();
      for (;;) {
        if (eat('+'))
          lhs = make(Node::Kind::add, lhs, parse_term());
        else if (eat('-'))
          lhs = make(Node::Kind::sub, lhs, parse_term());
        else
          return lhs;
      }
    }

    NodePtr parse_term() {
      auto lhs = parse_factor();
      for (;;) {
        if (eat('*'))
          lhs = make(Node::Kind::mul, lhs, parse_factor());
        else if (eat('/'))
          lhs = make(Node::Kind::div, lhs, parse_factor());
        else
          return lhs;
      }
    }

    NodePtr parse_factor() {
      if (eat('-')) return make(Node::Kind::neg, parse_factor());
      if (eat('+')) return parse_factor();
      return parse_primary();
    }

    NodePtr parse_primary() {
      skip_ws();
      if (pos >= src.size()) fail("unexpected end of expression");
      char c = src[pos];
      if (c == '(') {
        ++pos;
        auto inner = parse_expr();
        if (!eat(')')) fail("expected ')'");
        return inner;
      }
      if (std::isdigit(static_cast<unsigned char>(c)) || c == '.') return parse_number();
      if (std::isalpha(static_cast<unsigned char>(c)) || c == '_') return parse_ident();
      fail(std::string("unexpected character '") + c + "'");
    }

    NodePtr parse_number() {
      std::size_t start = pos;
      while (pos < src.size() &&
             (std::isdigit(static_cast<unsigned char>(src[pos])) || src[pos] == '.' ||
              src[pos] == 'e' || src[pos] == 'E' ||
              ((src[pos] == '+' || src[pos] == '-') && pos > start &&
               (src[pos - 1] == 'e' || src[pos - 1] == 'E'))))
        ++pos;
      try {
        std::size_t used = 0;
        double v = std::stod(std::string(src.substr(start, pos - start)), &used);
        if (used != pos - start) fail("malformed number");
        return make(Node::Kind::constant, nullptr, nullptr, v);
      } catch (const std::exception&) {
        pos = start;
        fail("malformed number");
      }
    }

    NodePtr parse_ident() {
      std::size_t start = pos;
      while (pos < src.size() && (std::isalnum(static_cast<unsigned char>(src[pos])) || src[pos] == '_'))
        ++pos;
      std::string_view name = src.substr(start, pos - start);
      if (name == "y1") return make(Node::Kind::y1);
      if (name == "y2") return make(Node::Kind::y2);
      if (name == "t") return make(Node::Kind::t);
      if (name == "pi") return make(Node::Kind::constant, nullptr, nullptr, 3.14159265358979323846);
      Node::Kind fn;
      if (name == "sin")
        fn = Node::Kind::sin_fn;
      else if (name == "cos")
        fn = Node::Kind::cos_fn;
      else if (name == "exp")
        fn = Node::Kind::exp_fn;
      else
        fail("unknown symbol '" + std::string(name) + "'");
      if (!eat('(')) fail("expected '(' after function name");
      auto arg = parse_expr();
      if (!eat(')')) fail("expected ')'");
      return make(fn, arg);
    }
  };

  NodePtr root_;
  std::string text_;
};

}  // namespace parlab
