#pragma once

#include <array>
#include <cstdint>
#include <optional>
#include <string>
#include <string_view>
#include <vector>

#include "dynbc/errors.hpp"

namespace dynbc::expr {

/// Variables an expression may reference.  `t` is time, `x`/`y` are spatial
/// coordinates, `u` is the solution value, `p1`/`p2` are the components of
/// the solution gradient.
enum class Var : int { T = 0, X = 1, Y = 2, U = 3, P1 = 4, P2 = 5 };

inline constexpr int kNumVars = 6;

const char* var_name(Var v);
std::optional<Var> var_from_name(std::string_view name);

enum class UnaryOp : int { Neg, Sin, Cos, Exp, Tanh, Sqrt };
enum class BinaryOp : int { Add, Sub, Mul, Div, Pow };

/// One node of an expression tree.  Children are indices into Ast::nodes();
/// a child index always refers to an earlier slot, so node order is a valid
/// evaluation order.  Unary nodes use `lhs` only.
struct Node {
  enum class Kind : int { Constant, Variable, Unary, Binary } kind;
  double value = 0.0;
  Var var = Var::T;
  UnaryOp uop = UnaryOp::Neg;
  BinaryOp bop = BinaryOp::Add;
  int lhs = -1;
  int rhs = -1;
};

/// Immutable expression tree with value semantics.  Construction goes
/// through the static builders, which apply conservative constant folding
/// (constants combine when the result is finite; x+0, x*1, x*0, x^1, x^0
/// simplify) so that derivative trees have a stable printed form.
class Ast {
 public:
  /// Default-constructed tree is the constant 0.
  Ast();

  static Ast constant(double c);
  static Ast variable(Var v);
  static Ast unary(UnaryOp op, const Ast& a);
  /// For BinaryOp::Pow the exponent must be a constant; throws
  /// InvalidArgument otherwise.
  static Ast binary(BinaryOp op, const Ast& a, const Ast& b);

  const std::vector<Node>& nodes() const { return nodes_; }
  int root() const { return root_; }

  bool uses(Var v) const;
  bool is_constant() const;
  /// Value of the root constant; throws InvalidArgument if not constant.
  double constant_value() const;

  /// Structural equality (same tree shape, ops, variables, constants).
  friend bool operator==(const Ast& a, const Ast& b);

 private:
  int append(const std::vector<Node>& other, int index);

  std::vector<Node> nodes_;
  int root_ = 0;
};

/// Values bound to variables during evaluation.  Unbound variables cause
/// an EvalError when referenced.
struct EvalContext {
  std::array<double, kNumVars> value{};
  std::array<bool, kNumVars> bound{};

  EvalContext& set(Var v, double x) {
    value[static_cast<int>(v)] = x;
    bound[static_cast<int>(v)] = true;
    return *this;
  }
};

/// Parse expression text.  Grammar: `+ -` < `* /` < unary minus < `^`,
/// with left association for the binary tiers; `^` takes a constant
/// exponent.  Unary functions: sin cos exp tanh sqrt.  Throws ParseError
/// with the byte offset of the offending token.
Ast parse(std::string_view text);

/// Evaluate.  Throws EvalError on unbound variables, division by zero, or
/// non-finite intermediate results.
double eval(const Ast& ast, const EvalContext& ctx);

/// Exact symbolic derivative with respect to `v`, constant-folded.
Ast differentiate(const Ast& ast, Var v);

/// Replace every occurrence of variable `v` by the tree `replacement`.
Ast substitute(const Ast& ast, Var v, const Ast& replacement);

/// Render with minimal parentheses; parse(to_string(a)) reproduces `a`.
std::string to_string(const Ast& ast);

}  // namespace dynbc::expr
