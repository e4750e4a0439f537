#pragma once

// Expression language for Lagrangians and symmetry data.
//
//   expr    := term (('+' | '-') term)*
//   term    := unary (('*' | '/') unary)*
//   unary   := '-' unary | power
//   power   := atom ('^' unary)?            (right associative)
//   atom    := number | identifier | func '(' expr ')' | '(' expr ')'
//   func    := sin | cos | tan | exp | log | sqrt | abs
//
// Numbers are decimal with an optional exponent. Identifiers match
// [a-zA-Z_][a-zA-Z0-9_]* and must be declared as a variable or parameter.

#include <cstddef>
#include <map>
#include <memory>
#include <set>
#include <span>
#include <string>
#include <string_view>
#include <vector>

#include "routh/autodiff.hpp"

namespace routh::expr {

enum class NodeKind { Number, Variable, Parameter, Negate, Binary, Call };
enum class BinaryOp { Add, Sub, Mul, Div, Pow };
enum class Function { Sin, Cos, Tan, Exp, Log, Sqrt, Abs };

struct Node {
  NodeKind kind = NodeKind::Number;
  double number = 0.0;
  std::string name;
  BinaryOp op = BinaryOp::Add;
  Function fn = Function::Sin;
  int lhs = -1;  // operand of Negate / Call
  int rhs = -1;
  std::size_t offset = 0;  // byte offset in the source
};

using NameSet = std::set<std::string, std::less<>>;

class Expr {
 public:
  Expr() = default;
  Expr(std::vector<Node> nodes, int root, std::string source);

  std::span<const Node> nodes() const { return {nodes_->data(), nodes_->size()}; }
  int root() const noexcept { return root_; }
  const std::string& source() const noexcept { return *source_; }

  /// Names of every variable and parameter referenced.
  NameSet free_names() const;

 private:
  std::shared_ptr<const std::vector<Node>> nodes_;
  std::shared_ptr<const std::string> source_;
  int root_ = -1;
};

/// Throws ParseError on syntax errors and on identifiers that are neither in
/// `variables` nor in `parameters`.
Expr parse(std::string_view src, const NameSet& variables, const NameSet& parameters = {});

/// Fully parenthesised canonical text; parse(print(e)) evaluates identically.
std::string print(const Expr& e);

template <class T>
using EvalEnv = std::map<std::string, T, std::less<>>;

/// Evaluates with every free name looked up in `env`. Throws InputError for
/// unbound names and EvaluationError (with node offset) for domain errors.
template <class T>
T eval(const Expr& e, const EvalEnv<T>& env);

extern template double eval<double>(const Expr&, const EvalEnv<double>&);
extern template ad::Dual eval<ad::Dual>(const Expr&, const EvalEnv<ad::Dual>&);
extern template ad::HyperDual eval<ad::HyperDual>(const Expr&, const EvalEnv<ad::HyperDual>&);

/// Binds variables to argument slots and parameters to constants.
/// Argument i of the resulting field feeds the variable named slots[i].
ScalarField bind(const Expr& e, std::span<const std::string> slots, const std::map<std::string, double>& parameters);

}  // namespace routh::expr
