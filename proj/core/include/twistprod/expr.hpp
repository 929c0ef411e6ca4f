#pragma once

#include <cstddef>
#include <memory>
#include <span>
#include <string>
#include <string_view>
#include <vector>

#include "twistprod/jet.hpp"

namespace twistprod {

/// The fixed function set of the expression language.
enum class Function { kExp, kLn, kSin, kCos, kTan, kSinh, kCosh, kTanh, kSqrt, kPow };

const char* function_name(Function f);

/// Immutable expression tree over an ordered list of named variables.
///
/// Grammar (see docs/expression_grammar.md):
///
///   expr    = term { ("+" | "-") term }
///   term    = unary { ("*" | "/") unary }
///   unary   = "-" unary | power
///   power   = primary [ "^" unary ]
///   primary = number | variable | function "(" args ")" | "(" expr ")"
///
/// The exponent of "^" must be free of variables. pow(a, b) with a
/// variable exponent is evaluated as exp(b ln a) and needs a > 0.
///
/// Nodes are shared and never mutated, so an Expression can be copied
/// cheaply and evaluated from several threads at once.
class Expression {
 public:
  enum class Kind { kLiteral, kVariable, kAdd, kSub, kMul, kDiv, kPow, kNeg, kCall };

  struct Node {
    Kind kind = Kind::kLiteral;
    double literal = 0.0;       // kLiteral; exponent value for kPow
    std::size_t variable = 0;   // kVariable
    Function function = Function::kExp;  // kCall
    std::vector<std::shared_ptr<const Node>> args;
  };
  using NodePtr = std::shared_ptr<const Node>;

  /// Parses source over the given variables (non-empty, pairwise distinct,
  /// none named like a function). Throws ParseError.
  static Expression parse(std::string_view source, std::vector<std::string> variables);

  static Expression literal(double value, std::vector<std::string> variables);
  static Expression variable(std::size_t index, std::vector<std::string> variables);

  const std::vector<std::string>& variables() const { return *variables_; }
  std::size_t arity() const { return variables_->size(); }
  const Node& root() const { return *root_; }

  double evaluate(std::span<const double> point) const;
  /// Value, gradient and Hessian at point with respect to this expression's
  /// own variables.
  Jet2 eval_jet2(std::span<const double> point) const;
  /// Composition: each variable is replaced by the corresponding jet.
  Jet2 eval_jet2(std::span<const Jet2> arguments) const;

  /// Minimal-parenthesis printing; parse(to_string()) is structurally equal
  /// to *this for any parsed expression.
  std::string to_string() const;

  /// Which variables occur in the tree.
  std::vector<bool> occurring_variables() const;
  bool is_variable_free() const;

  /// Replaces variable i by replacements[i]. All replacements must share
  /// one variable list, which becomes the variable list of the result.
  Expression substitute(std::span<const Expression> replacements) const;

  /// Same tree evaluated over a larger variable list: variable i becomes
  /// variable index_map[i] of new_variables.
  Expression rebind(std::vector<std::string> new_variables,
                    std::span<const std::size_t> index_map) const;

  friend bool operator==(const Expression& a, const Expression& b);

  friend Expression operator+(const Expression& a, const Expression& b);
  friend Expression operator-(const Expression& a, const Expression& b);
  friend Expression operator*(const Expression& a, const Expression& b);
  friend Expression operator/(const Expression& a, const Expression& b);
  friend Expression operator-(const Expression& a);
  /// a^exponent with a constant exponent.
  friend Expression power(const Expression& a, double exponent);
  friend Expression apply(Function f, const Expression& a);

 private:
  Expression(NodePtr root, std::shared_ptr<const std::vector<std::string>> variables)
      : root_(std::move(root)), variables_(std::move(variables)) {}

  NodePtr root_;
  std::shared_ptr<const std::vector<std::string>> variables_;
};

}  // namespace twistprod
