#include "dynbc/expr.hpp"

#include <charconv>
#include <cmath>
#include <cstdlib>

namespace dynbc::expr {

namespace {

const char* kVarNames[kNumVars] = {"t", "x", "y", "u", "p1", "p2"};

bool is_const(const Ast& a, double c) {
  return a.is_constant() && a.constant_value() == c;
}

double apply_unary(UnaryOp op, double a) {
  switch (op) {
    case UnaryOp::Neg:  return -a;
    case UnaryOp::Sin:  return std::sin(a);
    case UnaryOp::Cos:  return std::cos(a);
    case UnaryOp::Exp:  return std::exp(a);
    case UnaryOp::Tanh: return std::tanh(a);
    case UnaryOp::Sqrt: return std::sqrt(a);
  }
  return 0.0;
}

const char* unary_name(UnaryOp op) {
  switch (op) {
    case UnaryOp::Neg:  return "-";
    case UnaryOp::Sin:  return "sin";
    case UnaryOp::Cos:  return "cos";
    case UnaryOp::Exp:  return "exp";
    case UnaryOp::Tanh: return "tanh";
    case UnaryOp::Sqrt: return "sqrt";
  }
  return "?";
}

}  // namespace

const char* var_name(Var v) { return kVarNames[static_cast<int>(v)]; }

std::optional<Var> var_from_name(std::string_view name) {
  for (int i = 0; i < kNumVars; ++i)
    if (name == kVarNames[i]) return static_cast<Var>(i);
  return std::nullopt;
}

Ast::Ast() {
  nodes_.push_back(Node{Node::Kind::Constant, 0.0, Var::T, UnaryOp::Neg,
                        BinaryOp::Add, -1, -1});
  root_ = 0;
}

Ast Ast::constant(double c) {
  Ast a;
  a.nodes_[0].value = c;
  return a;
}

Ast Ast::variable(Var v) {
  Ast a;
  a.nodes_[0].kind = Node::Kind::Variable;
  a.nodes_[0].var = v;
  return a;
}

int Ast::append(const std::vector<Node>& other, int index) {
  const Node& n = other[static_cast<std::size_t>(index)];
  Node copy = n;
  if (n.lhs >= 0) copy.lhs = append(other, n.lhs);
  if (n.rhs >= 0) copy.rhs = append(other, n.rhs);
  nodes_.push_back(copy);
  return static_cast<int>(nodes_.size()) - 1;
}

Ast Ast::unary(UnaryOp op, const Ast& a) {
  if (a.is_constant()) {
    double r = apply_unary(op, a.constant_value());
    if (std::isfinite(r)) return constant(r);
  }
  Ast out;
  out.nodes_.clear();
  int child = out.append(a.nodes_, a.root_);
  out.nodes_.push_back(Node{Node::Kind::Unary, 0.0, Var::T, op, BinaryOp::Add,
                            child, -1});
  out.root_ = static_cast<int>(out.nodes_.size()) - 1;
  return out;
}

Ast Ast::binary(BinaryOp op, const Ast& a, const Ast& b) {
  if (op == BinaryOp::Pow && !b.is_constant())
    throw InvalidArgument("exponent of ^ must be a constant");

  if (a.is_constant() && b.is_constant()) {
    double x = a.constant_value(), y = b.constant_value();
    bool safe = true;
    double r = 0.0;
    switch (op) {
      case BinaryOp::Add: r = x + y; break;
      case BinaryOp::Sub: r = x - y; break;
      case BinaryOp::Mul: r = x * y; break;
      case BinaryOp::Div: safe = (y != 0.0); if (safe) r = x / y; break;
      case BinaryOp::Pow: r = std::pow(x, y); break;
    }
    if (safe && std::isfinite(r)) return constant(r);
  }
  // Identity simplifications keep derivative trees in a stable form.
  switch (op) {
    case BinaryOp::Add:
      if (is_const(a, 0.0)) return b;
      if (is_const(b, 0.0)) return a;
      break;
    case BinaryOp::Sub:
      if (is_const(b, 0.0)) return a;
      if (is_const(a, 0.0)) return unary(UnaryOp::Neg, b);
      break;
    case BinaryOp::Mul:
      if (is_const(a, 1.0)) return b;
      if (is_const(b, 1.0)) return a;
      if (is_const(a, 0.0) || is_const(b, 0.0)) return constant(0.0);
      break;
    case BinaryOp::Div:
      if (is_const(b, 1.0)) return a;
      break;
    case BinaryOp::Pow:
      if (is_const(b, 1.0)) return a;
      if (is_const(b, 0.0)) return constant(1.0);
      break;
  }
  Ast out;
  out.nodes_.clear();
  int lhs = out.append(a.nodes_, a.root_);
  int rhs = out.append(b.nodes_, b.root_);
  out.nodes_.push_back(Node{Node::Kind::Binary, 0.0, Var::T, UnaryOp::Neg, op,
                            lhs, rhs});
  out.root_ = static_cast<int>(out.nodes_.size()) - 1;
  return out;
}

bool Ast::uses(Var v) const {
  // Every node is reachable from the root by construction.
  for (const Node& n : nodes_)
    if (n.kind == Node::Kind::Variable && n.var == v) return true;
  return false;
}

bool Ast::is_constant() const {
  return nodes_[static_cast<std::size_t>(root_)].kind == Node::Kind::Constant;
}

double Ast::constant_value() const {
  if (!is_constant()) throw InvalidArgument("expression is not a constant");
  return nodes_[static_cast<std::size_t>(root_)].value;
}

namespace {

bool structurally_equal(const std::vector<Node>& an, int ai,
                        const std::vector<Node>& bn, int bi) {
  const Node& a = an[static_cast<std::size_t>(ai)];
  const Node& b = bn[static_cast<std::size_t>(bi)];
  if (a.kind != b.kind) return false;
  switch (a.kind) {
    case Node::Kind::Constant:
      return a.value == b.value;
    case Node::Kind::Variable:
      return a.var == b.var;
    case Node::Kind::Unary:
      return a.uop == b.uop && structurally_equal(an, a.lhs, bn, b.lhs);
    case Node::Kind::Binary:
      return a.bop == b.bop && structurally_equal(an, a.lhs, bn, b.lhs) &&
             structurally_equal(an, a.rhs, bn, b.rhs);
  }
  return false;
}

}  // namespace

bool operator==(const Ast& a, const Ast& b) {
  return structurally_equal(a.nodes(), a.root(), b.nodes(), b.root());
}

// ---------------------------------------------------------------------------
// Parsing

namespace {

struct Token {
  enum class Type { Num, Ident, Plus, Minus, Star, Slash, Caret, LParen,
                    RParen, Comma, End } type;
  double num = 0.0;
  std::string_view text;
  std::size_t offset = 0;
};

std::vector<Token> lex(std::string_view s) {
  std::vector<Token> out;
  std::size_t i = 0;
  while (i < s.size()) {
    char c = s[i];
    if (c == ' ' || c == '\t') { ++i; continue; }
    Token tok;
    tok.offset = i;
    if ((c >= '0' && c <= '9') || c == '.') {
      double value = 0.0;
      auto [ptr, ec] = std::from_chars(s.data() + i, s.data() + s.size(), value);
      if (ec != std::errc())
        throw ParseError("malformed number", i);
      tok.type = Token::Type::Num;
      tok.num = value;
      tok.text = s.substr(i, static_cast<std::size_t>(ptr - (s.data() + i)));
      i += tok.text.size();
    } else if ((c >= 'a' && c <= 'z') || (c >= 'A' && c <= 'Z') || c == '_') {
      std::size_t j = i;
      while (j < s.size() && ((s[j] >= 'a' && s[j] <= 'z') ||
                              (s[j] >= 'A' && s[j] <= 'Z') ||
                              (s[j] >= '0' && s[j] <= '9') || s[j] == '_'))
        ++j;
      tok.type = Token::Type::Ident;
      tok.text = s.substr(i, j - i);
      i = j;
    } else {
      switch (c) {
        case '+': tok.type = Token::Type::Plus; break;
        case '-': tok.type = Token::Type::Minus; break;
        case '*': tok.type = Token::Type::Star; break;
        case '/': tok.type = Token::Type::Slash; break;
        case '^': tok.type = Token::Type::Caret; break;
        case '(': tok.type = Token::Type::LParen; break;
        case ')': tok.type = Token::Type::RParen; break;
        case ',': tok.type = Token::Type::Comma; break;
        default:
          throw ParseError("unexpected character", i);
      }
      tok.text = s.substr(i, 1);
      ++i;
    }
    out.push_back(tok);
  }
  out.push_back(Token{Token::Type::End, 0.0, {}, s.size()});
  return out;
}

class Parser {
 public:
  explicit Parser(std::string_view s) : toks_(lex(s)) {}

  Ast run() {
    Ast a = parse_sum();
    if (cur().type != Token::Type::End)
      throw ParseError("unexpected trailing input", cur().offset);
    return a;
  }

 private:
  const Token& cur() const { return toks_[pos_]; }
  void advance() { ++pos_; }

  Ast parse_sum() {
    Ast a = parse_product();
    while (cur().type == Token::Type::Plus || cur().type == Token::Type::Minus) {
      BinaryOp op = cur().type == Token::Type::Plus ? BinaryOp::Add : BinaryOp::Sub;
      advance();
      a = Ast::binary(op, a, parse_product());
    }
    return a;
  }

  Ast parse_product() {
    Ast a = parse_prefix();
    while (cur().type == Token::Type::Star || cur().type == Token::Type::Slash) {
      BinaryOp op = cur().type == Token::Type::Star ? BinaryOp::Mul : BinaryOp::Div;
      advance();
      a = Ast::binary(op, a, parse_prefix());
    }
    return a;
  }

  Ast parse_prefix() {
    if (++depth_ > 200) throw ParseError("expression too deeply nested", cur().offset);
    Ast result = [&] {
      if (cur().type == Token::Type::Minus) {
        advance();
        return Ast::unary(UnaryOp::Neg, parse_prefix());
      }
      return parse_power();
    }();
    --depth_;
    return result;
  }

  Ast parse_power() {
    Ast base = parse_atom();
    if (cur().type == Token::Type::Caret) {
      advance();
      std::size_t exp_offset = cur().offset;
      Ast exponent = parse_prefix();
      if (!exponent.is_constant())
        throw ParseError("exponent of ^ must be a constant", exp_offset);
      base = Ast::binary(BinaryOp::Pow, base, exponent);
    }
    return base;
  }

  Ast parse_atom() {
    const Token& t = cur();
    switch (t.type) {
      case Token::Type::Num:
        advance();
        return Ast::constant(t.num);
      case Token::Type::Ident: {
        if (auto v = var_from_name(t.text)) {
          advance();
          return Ast::variable(*v);
        }
        UnaryOp op;
        if (t.text == "sin") op = UnaryOp::Sin;
        else if (t.text == "cos") op = UnaryOp::Cos;
        else if (t.text == "exp") op = UnaryOp::Exp;
        else if (t.text == "tanh") op = UnaryOp::Tanh;
        else if (t.text == "sqrt") op = UnaryOp::Sqrt;
        else throw ParseError("unknown identifier '" + std::string(t.text) + "'",
                              t.offset);
        advance();
        if (cur().type != Token::Type::LParen)
          throw ParseError("expected '(' after function name", cur().offset);
        advance();
        Ast arg = parse_sum();
        if (cur().type != Token::Type::RParen)
          throw ParseError("expected ')'", cur().offset);
        advance();
        return Ast::unary(op, arg);
      }
      case Token::Type::LParen: {
        advance();
        Ast a = parse_sum();
        if (cur().type != Token::Type::RParen)
          throw ParseError("expected ')'", cur().offset);
        advance();
        return a;
      }
      default:
        throw ParseError("expected operand", t.offset);
    }
  }

  std::vector<Token> toks_;
  std::size_t pos_ = 0;
  int depth_ = 0;
};

}  // namespace

Ast parse(std::string_view text) { return Parser(text).run(); }

// ---------------------------------------------------------------------------
// Evaluation

namespace {

double eval_node(const std::vector<Node>& nodes, int idx, const EvalContext& ctx) {
  const Node& n = nodes[static_cast<std::size_t>(idx)];
  switch (n.kind) {
    case Node::Kind::Constant:
      return n.value;
    case Node::Kind::Variable: {
      int v = static_cast<int>(n.var);
      if (!ctx.bound[static_cast<std::size_t>(v)])
        throw EvalError(std::string("unbound variable '") + kVarNames[v] + "'");
      return ctx.value[static_cast<std::size_t>(v)];
    }
    case Node::Kind::Unary: {
      double a = eval_node(nodes, n.lhs, ctx);
      double r = apply_unary(n.uop, a);
      if (!std::isfinite(r))
        throw EvalError(std::string("non-finite result of ") + unary_name(n.uop));
      return r;
    }
    case Node::Kind::Binary: {
      double a = eval_node(nodes, n.lhs, ctx);
      double b = eval_node(nodes, n.rhs, ctx);
      double r = 0.0;
      switch (n.bop) {
        case BinaryOp::Add: r = a + b; break;
        case BinaryOp::Sub: r = a - b; break;
        case BinaryOp::Mul: r = a * b; break;
        case BinaryOp::Div:
          if (b == 0.0) throw EvalError("division by zero");
          r = a / b;
          break;
        case BinaryOp::Pow: r = std::pow(a, b); break;
      }
      if (!std::isfinite(r)) throw EvalError("non-finite result of binary operator");
      return r;
    }
  }
  throw EvalError("corrupt expression node");
}

}  // namespace

double eval(const Ast& ast, const EvalContext& ctx) {
  return eval_node(ast.nodes(), ast.root(), ctx);
}

// ---------------------------------------------------------------------------
// Differentiation / substitution

namespace {

// Reconstruct the subtree rooted at `idx` as a standalone Ast.
Ast rebuild(const std::vector<Node>& nodes, int idx) {
  const Node& n = nodes[static_cast<std::size_t>(idx)];
  switch (n.kind) {
    case Node::Kind::Constant:
      return Ast::constant(n.value);
    case Node::Kind::Variable:
      return Ast::variable(n.var);
    case Node::Kind::Unary:
      return Ast::unary(n.uop, rebuild(nodes, n.lhs));
    case Node::Kind::Binary:
      return Ast::binary(n.bop, rebuild(nodes, n.lhs), rebuild(nodes, n.rhs));
  }
  throw InvalidArgument("corrupt expression node");
}

Ast diff_node(const std::vector<Node>& nodes, int idx, Var v) {
  const Node& n = nodes[static_cast<std::size_t>(idx)];
  switch (n.kind) {
    case Node::Kind::Constant:
      return Ast::constant(0.0);
    case Node::Kind::Variable:
      return Ast::constant(n.var == v ? 1.0 : 0.0);
    case Node::Kind::Unary: {
      Ast a = rebuild(nodes, n.lhs);
      Ast da = diff_node(nodes, n.lhs, v);
      switch (n.uop) {
        case UnaryOp::Neg:
          return Ast::unary(UnaryOp::Neg, da);
        case UnaryOp::Sin:
          return Ast::binary(BinaryOp::Mul, Ast::unary(UnaryOp::Cos, a), da);
        case UnaryOp::Cos:
          return Ast::unary(UnaryOp::Neg,
                            Ast::binary(BinaryOp::Mul, Ast::unary(UnaryOp::Sin, a), da));
        case UnaryOp::Exp:
          return Ast::binary(BinaryOp::Mul, Ast::unary(UnaryOp::Exp, a), da);
        case UnaryOp::Tanh: {
          Ast th = Ast::unary(UnaryOp::Tanh, a);
          Ast sech2 = Ast::binary(BinaryOp::Sub, Ast::constant(1.0),
                                  Ast::binary(BinaryOp::Pow, th, Ast::constant(2.0)));
          return Ast::binary(BinaryOp::Mul, sech2, da);
        }
        case UnaryOp::Sqrt:
          return Ast::binary(BinaryOp::Div, da,
                             Ast::binary(BinaryOp::Mul, Ast::constant(2.0),
                                         Ast::unary(UnaryOp::Sqrt, a)));
      }
      break;
    }
    case Node::Kind::Binary: {
      Ast a = rebuild(nodes, n.lhs);
      Ast b = rebuild(nodes, n.rhs);
      Ast da = diff_node(nodes, n.lhs, v);
      Ast db = diff_node(nodes, n.rhs, v);
      switch (n.bop) {
        case BinaryOp::Add: return Ast::binary(BinaryOp::Add, da, db);
        case BinaryOp::Sub: return Ast::binary(BinaryOp::Sub, da, db);
        case BinaryOp::Mul:
          return Ast::binary(BinaryOp::Add, Ast::binary(BinaryOp::Mul, da, b),
                             Ast::binary(BinaryOp::Mul, a, db));
        case BinaryOp::Div:
          return Ast::binary(
              BinaryOp::Div,
              Ast::binary(BinaryOp::Sub, Ast::binary(BinaryOp::Mul, da, b),
                          Ast::binary(BinaryOp::Mul, a, db)),
              Ast::binary(BinaryOp::Pow, b, Ast::constant(2.0)));
        case BinaryOp::Pow: {
          double c = b.constant_value();
          if (c == 0.0) return Ast::constant(0.0);
          Ast factor = Ast::binary(
              BinaryOp::Mul, Ast::constant(c),
              Ast::binary(BinaryOp::Pow, a, Ast::constant(c - 1.0)));
          return Ast::binary(BinaryOp::Mul, factor, da);
        }
      }
      break;
    }
  }
  throw InvalidArgument("corrupt expression node");
}

}  // namespace

Ast differentiate(const Ast& ast, Var v) {
  return diff_node(ast.nodes(), ast.root(), v);
}

namespace {

Ast subst_node(const std::vector<Node>& nodes, int idx, Var v, const Ast& repl) {
  const Node& n = nodes[static_cast<std::size_t>(idx)];
  switch (n.kind) {
    case Node::Kind::Constant:
      return Ast::constant(n.value);
    case Node::Kind::Variable:
      return n.var == v ? repl : Ast::variable(n.var);
    case Node::Kind::Unary:
      return Ast::unary(n.uop, subst_node(nodes, n.lhs, v, repl));
    case Node::Kind::Binary:
      return Ast::binary(n.bop, subst_node(nodes, n.lhs, v, repl),
                         subst_node(nodes, n.rhs, v, repl));
  }
  throw InvalidArgument("corrupt expression node");
}

}  // namespace

Ast substitute(const Ast& ast, Var v, const Ast& replacement) {
  return subst_node(ast.nodes(), ast.root(), v, replacement);
}

// ---------------------------------------------------------------------------
// Printing

namespace {

// Binding tiers: + - (1) < * / (2) < unary minus (3) < ^ (4) < atoms (5).
int node_level(const Node& n) {
  switch (n.kind) {
    case Node::Kind::Constant:
      // A negative constant prints with a leading '-', so it re-lexes as a
      // unary minus applied to a literal and must parenthesize like one.
      return std::signbit(n.value) ? 3 : 5;
    case Node::Kind::Variable:
      return 5;
    case Node::Kind::Unary:
      return n.uop == UnaryOp::Neg ? 3 : 5;  // named functions print as atoms
    case Node::Kind::Binary:
      switch (n.bop) {
        case BinaryOp::Add:
        case BinaryOp::Sub: return 1;
        case BinaryOp::Mul:
        case BinaryOp::Div: return 2;
        case BinaryOp::Pow: return 4;
      }
  }
  return 5;
}

void print_number(std::string& out, double v) {
  char buf[64];
  auto [ptr, ec] = std::to_chars(buf, buf + sizeof(buf), v);
  (void)ec;
  out.append(buf, ptr);
}

void print_node(std::string& out, const std::vector<Node>& nodes, int idx,
                int min_level) {
  const Node& n = nodes[static_cast<std::size_t>(idx)];
  bool parens = node_level(n) < min_level;
  if (parens) out.push_back('(');
  switch (n.kind) {
    case Node::Kind::Constant:
      print_number(out, n.value);
      break;
    case Node::Kind::Variable:
      out += kVarNames[static_cast<int>(n.var)];
      break;
    case Node::Kind::Unary:
      if (n.uop == UnaryOp::Neg) {
        out.push_back('-');
        print_node(out, nodes, n.lhs, 3);
      } else {
        out += unary_name(n.uop);
        out.push_back('(');
        print_node(out, nodes, n.lhs, 0);
        out.push_back(')');
      }
      break;
    case Node::Kind::Binary: {
      const char* opname = "?";
      int level = node_level(n);
      switch (n.bop) {
        case BinaryOp::Add: opname = " + "; break;
        case BinaryOp::Sub: opname = " - "; break;
        case BinaryOp::Mul: opname = " * "; break;
        case BinaryOp::Div: opname = " / "; break;
        case BinaryOp::Pow: opname = "^"; break;
      }
      if (n.bop == BinaryOp::Pow) {
        // Base must be an atom; the constant exponent prints bare.
        print_node(out, nodes, n.lhs, 5);
        out += opname;
        print_node(out, nodes, n.rhs, 0);
      } else {
        // Left-associative: the right child needs strictly higher binding.
        print_node(out, nodes, n.lhs, level);
        out += opname;
        print_node(out, nodes, n.rhs, level + 1);
      }
      break;
    }
  }
  if (parens) out.push_back(')');
}

}  // namespace

std::string to_string(const Ast& ast) {
  std::string out;
  print_node(out, ast.nodes(), ast.root(), 0);
  return out;
}

}  // namespace dynbc::expr
