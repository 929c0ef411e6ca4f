#include "twistprod/expr.hpp"

#include <array>
#include <charconv>
#include <cmath>
#include <stdexcept>
#include <system_error>
#include <unordered_set>

#include "twistprod/error.hpp"

namespace twistprod {

namespace {

using Kind = Expression::Kind;
using Node = Expression::Node;
using NodePtr = Expression::NodePtr;

struct FunctionEntry {
  const char* name;
  Function function;
  std::size_t arity;
};

constexpr std::array<FunctionEntry, 10> kFunctions{{
    {"exp", Function::kExp, 1},
    {"ln", Function::kLn, 1},
    {"sin", Function::kSin, 1},
    {"cos", Function::kCos, 1},
    {"tan", Function::kTan, 1},
    {"sinh", Function::kSinh, 1},
    {"cosh", Function::kCosh, 1},
    {"tanh", Function::kTanh, 1},
    {"sqrt", Function::kSqrt, 1},
    {"pow", Function::kPow, 2},
}};

const FunctionEntry* find_function(std::string_view name) {
  for (const auto& entry : kFunctions)
    if (name == entry.name) return &entry;
  return nullptr;
}

NodePtr make_literal(double v) {
  auto n = std::make_shared<Node>();
  n->kind = Kind::kLiteral;
  n->literal = v;
  return n;
}

NodePtr make_variable(std::size_t i) {
  auto n = std::make_shared<Node>();
  n->kind = Kind::kVariable;
  n->variable = i;
  return n;
}

NodePtr make_node(Kind kind, std::vector<NodePtr> args) {
  auto n = std::make_shared<Node>();
  n->kind = kind;
  n->args = std::move(args);
  return n;
}

NodePtr make_call(Function f, std::vector<NodePtr> args) {
  auto n = make_node(Kind::kCall, std::move(args));
  std::const_pointer_cast<Node>(n)->function = f;
  return n;
}

bool uses_variables(const Node& n) {
  if (n.kind == Kind::kVariable) return true;
  for (const auto& a : n.args)
    if (uses_variables(*a)) return true;
  return false;
}

// ---------------------------------------------------------------------------
// Printing
// ---------------------------------------------------------------------------

int precedence(const Node& n) {
  switch (n.kind) {
    case Kind::kAdd:
    case Kind::kSub:
      return 1;
    case Kind::kMul:
    case Kind::kDiv:
      return 2;
    case Kind::kNeg:
      return 3;
    case Kind::kPow:
      return 4;
    case Kind::kLiteral:
      return n.literal < 0.0 || std::signbit(n.literal) ? 0 : 5;
    default:
      return 5;
  }
}

std::string format_number(double v) {
  std::array<char, 64> buf{};
  auto [end, ec] = std::to_chars(buf.data(), buf.data() + buf.size(), v);
  if (ec != std::errc()) return std::to_string(v);
  return std::string(buf.data(), end);
}

void print(const Node& n, const std::vector<std::string>& vars, std::string& out);

void print_child(const Node& child, bool paren, const std::vector<std::string>& vars,
                 std::string& out) {
  if (paren) out += '(';
  print(child, vars, out);
  if (paren) out += ')';
}

void print(const Node& n, const std::vector<std::string>& vars, std::string& out) {
  switch (n.kind) {
    case Kind::kLiteral:
      out += format_number(n.literal);
      return;
    case Kind::kVariable:
      out += n.variable < vars.size() ? vars[n.variable] : "?";
      return;
    case Kind::kAdd:
    case Kind::kSub:
    case Kind::kMul:
    case Kind::kDiv: {
      const int p = precedence(n);
      const char* op = n.kind == Kind::kAdd   ? " + "
                       : n.kind == Kind::kSub ? " - "
                       : n.kind == Kind::kMul ? "*"
                                              : "/";
      print_child(*n.args[0], precedence(*n.args[0]) < p, vars, out);
      out += op;
      print_child(*n.args[1], precedence(*n.args[1]) <= p, vars, out);
      return;
    }
    case Kind::kNeg:
      out += '-';
      print_child(*n.args[0], precedence(*n.args[0]) < 3, vars, out);
      return;
    case Kind::kPow:
      print_child(*n.args[0], precedence(*n.args[0]) < 5, vars, out);
      out += '^';
      print_child(*n.args[1], precedence(*n.args[1]) < 3, vars, out);
      return;
    case Kind::kCall:
      out += function_name(n.function);
      out += '(';
      for (std::size_t i = 0; i < n.args.size(); ++i) {
        if (i) out += ", ";
        print(*n.args[i], vars, out);
      }
      out += ')';
      return;
  }
}

std::string print(const Node& n, const std::vector<std::string>& vars) {
  std::string out;
  print(n, vars, out);
  return out;
}

// ---------------------------------------------------------------------------
// Evaluation (shared by double and Jet2)
// ---------------------------------------------------------------------------

double checked_log(double x) {
  if (!(x > 0.0)) throw std::domain_error("ln of non-positive value");
  return std::log(x);
}

double checked_sqrt(double x) {
  if (!(x > 0.0)) throw std::domain_error("sqrt of non-positive value");
  return std::sqrt(x);
}

double checked_tan(double x) {
  if (std::cos(x) == 0.0) throw std::domain_error("tan at a pole");
  return std::tan(x);
}

double checked_pow(double x, double c) {
  if (c == 0.0) return 1.0;
  if (std::floor(c) == c) {
    if (x == 0.0 && c < 0.0) throw std::domain_error("division by zero");
    return std::pow(x, c);
  }
  if (!(x > 0.0)) throw std::domain_error("non-integer power of non-positive value");
  return std::pow(x, c);
}

double checked_div(double a, double b) {
  if (b == 0.0) throw std::domain_error("division by zero");
  return a / b;
}

struct DoubleOps {
  using T = double;
  static T constant(double v, std::size_t) { return v; }
  static T div(T a, T b) { return checked_div(a, b); }
  static T pow_const(T a, double c) { return checked_pow(a, c); }
  static T pow_var(T a, T b) {
    if (!(a > 0.0)) {
      throw std::domain_error("pow with variable exponent needs a positive base");
    }
    return std::exp(b * std::log(a));
  }
  static T call(Function f, T x) {
    switch (f) {
      case Function::kExp: return std::exp(x);
      case Function::kLn: return checked_log(x);
      case Function::kSin: return std::sin(x);
      case Function::kCos: return std::cos(x);
      case Function::kTan: return checked_tan(x);
      case Function::kSinh: return std::sinh(x);
      case Function::kCosh: return std::cosh(x);
      case Function::kTanh: return std::tanh(x);
      case Function::kSqrt: return checked_sqrt(x);
      case Function::kPow: break;
    }
    throw std::logic_error("bad unary function");
  }
};

struct JetOps {
  using T = Jet2;
  static T constant(double v, std::size_t n) { return Jet2::constant(v, n); }
  static T div(const T& a, const T& b) { return a / b; }
  static T pow_const(const T& a, double c) { return pow(a, c); }
  static T pow_var(const T& a, const T& b) { return pow(a, b); }
  static T call(Function f, const T& x) {
    switch (f) {
      case Function::kExp: return exp(x);
      case Function::kLn: return log(x);
      case Function::kSin: return sin(x);
      case Function::kCos: return cos(x);
      case Function::kTan: return tan(x);
      case Function::kSinh: return sinh(x);
      case Function::kCosh: return cosh(x);
      case Function::kTanh: return tanh(x);
      case Function::kSqrt: return sqrt(x);
      case Function::kPow: break;
    }
    throw std::logic_error("bad unary function");
  }
};

template <class Ops>
typename Ops::T eval_node(const Node& n, std::span<const typename Ops::T> args,
                          std::size_t dim, const std::vector<std::string>& vars) {
  using T = typename Ops::T;
  switch (n.kind) {
    case Kind::kLiteral:
      return Ops::constant(n.literal, dim);
    case Kind::kVariable:
      return args[n.variable];
    case Kind::kNeg:
      return -eval_node<Ops>(*n.args[0], args, dim, vars);
    case Kind::kAdd:
      return eval_node<Ops>(*n.args[0], args, dim, vars) +
             eval_node<Ops>(*n.args[1], args, dim, vars);
    case Kind::kSub:
      return eval_node<Ops>(*n.args[0], args, dim, vars) -
             eval_node<Ops>(*n.args[1], args, dim, vars);
    case Kind::kMul:
      return eval_node<Ops>(*n.args[0], args, dim, vars) *
             eval_node<Ops>(*n.args[1], args, dim, vars);
    default:
      break;
  }

  std::vector<T> values;
  values.reserve(n.args.size());
  if (n.kind != Kind::kPow) {
    for (const auto& a : n.args) values.push_back(eval_node<Ops>(*a, args, dim, vars));
  } else {
    values.push_back(eval_node<Ops>(*n.args[0], args, dim, vars));
  }

  try {
    switch (n.kind) {
      case Kind::kDiv:
        return Ops::div(values[0], values[1]);
      case Kind::kPow:
        return Ops::pow_const(values[0], n.literal);
      case Kind::kCall:
        if (n.function == Function::kPow) {
          if (!uses_variables(*n.args[1])) {
            return Ops::pow_const(values[0], eval_node<DoubleOps>(*n.args[1], {}, 0, vars));
          }
          return Ops::pow_var(values[0], values[1]);
        }
        return Ops::call(n.function, values[0]);
      default:
        break;
    }
  } catch (const std::domain_error& e) {
    throw DomainError(print(n, vars), e.what());
  }
  throw std::logic_error("unhandled expression node");
}

// ---------------------------------------------------------------------------
// Parsing
// ---------------------------------------------------------------------------

class Parser {
 public:
  Parser(std::string_view src, const std::vector<std::string>& vars)
      : src_(src), vars_(vars) {}

  NodePtr parse() {
    NodePtr n = expr();
    skip_ws();
    if (pos_ != src_.size()) fail("unexpected character '" + std::string(1, src_[pos_]) + "'");
    return n;
  }

 private:
  [[noreturn]] void fail(const std::string& what, ErrorCode code = ErrorCode::kSyntax) {
    throw ParseError(code, pos_, "syntax error: " + what);
  }

  void skip_ws() {
    while (pos_ < src_.size() &&
           (src_[pos_] == ' ' || src_[pos_] == '\t' || src_[pos_] == '\n' ||
            src_[pos_] == '\r'))
      ++pos_;
  }

  bool accept(char c) {
    skip_ws();
    if (pos_ < src_.size() && src_[pos_] == c) {
      ++pos_;
      return true;
    }
    return false;
  }

  NodePtr expr() {
    NodePtr lhs = term();
    for (;;) {
      if (accept('+')) {
        lhs = make_node(Kind::kAdd, {lhs, term()});
      } else if (accept('-')) {
        lhs = make_node(Kind::kSub, {lhs, term()});
      } else {
        return lhs;
      }
    }
  }

  NodePtr term() {
    NodePtr lhs = unary();
    for (;;) {
      if (accept('*')) {
        lhs = make_node(Kind::kMul, {lhs, unary()});
      } else if (accept('/')) {
        lhs = make_node(Kind::kDiv, {lhs, unary()});
      } else {
        return lhs;
      }
    }
  }

  NodePtr unary() {
    if (accept('-')) return make_node(Kind::kNeg, {unary()});
    return power();
  }

  NodePtr power() {
    NodePtr base = primary();
    skip_ws();
    const std::size_t caret = pos_;
    if (accept('^')) {
      NodePtr exponent = unary();
      if (uses_variables(*exponent)) {
        pos_ = caret;
        fail("exponent of '^' must be constant; use pow(a, b)",
             ErrorCode::kNonConstantExponent);
      }
      auto n = make_node(Kind::kPow, {base, exponent});
      double value = 0.0;
      try {
        value = eval_node<DoubleOps>(*exponent, {}, 0, vars_);
      } catch (const DomainError&) {
        pos_ = caret;
        fail("exponent is not a finite constant");
      }
      std::const_pointer_cast<Node>(n)->literal = value;
      return n;
    }
    return base;
  }

  NodePtr primary() {
    skip_ws();
    if (pos_ >= src_.size()) fail("expected expression");
    const char c = src_[pos_];
    if (c == '(') {
      ++pos_;
      NodePtr inner = expr();
      if (!accept(')')) fail("expected ')'");
      return inner;
    }
    if ((c >= '0' && c <= '9') || c == '.') return number();
    if (is_ident_start(c)) return identifier();
    fail("unexpected character '" + std::string(1, c) + "'");
  }

  static bool is_ident_start(char c) {
    return (c >= 'a' && c <= 'z') || (c >= 'A' && c <= 'Z') || c == '_';
  }
  static bool is_ident_char(char c) { return is_ident_start(c) || (c >= '0' && c <= '9'); }
  static bool is_digit(char c) { return c >= '0' && c <= '9'; }

  NodePtr number() {
    const std::size_t start = pos_;
    std::size_t p = pos_;
    std::size_t digits = 0;
    while (p < src_.size() && is_digit(src_[p])) ++p, ++digits;
    if (p < src_.size() && src_[p] == '.') {
      ++p;
      while (p < src_.size() && is_digit(src_[p])) ++p, ++digits;
    }
    if (digits == 0) fail("malformed number");
    if (p < src_.size() && (src_[p] == 'e' || src_[p] == 'E')) {
      std::size_t q = p + 1;
      if (q < src_.size() && (src_[q] == '+' || src_[q] == '-')) ++q;
      if (q < src_.size() && is_digit(src_[q])) {
        while (q < src_.size() && is_digit(src_[q])) ++q;
        p = q;
      } else {
        pos_ = q;
        fail("malformed exponent in number");
      }
    }
    double value = 0.0;
    auto [ptr, ec] = std::from_chars(src_.data() + start, src_.data() + p, value);
    if (ec != std::errc() || ptr != src_.data() + p) fail("numeric literal out of range");
    pos_ = p;
    return make_literal(value);
  }

  NodePtr identifier() {
    const std::size_t start = pos_;
    while (pos_ < src_.size() && is_ident_char(src_[pos_])) ++pos_;
    const std::string_view name = src_.substr(start, pos_ - start);

    for (std::size_t i = 0; i < vars_.size(); ++i)
      if (vars_[i] == name) return make_variable(i);

    const FunctionEntry* f = find_function(name);
    if (!f) {
      pos_ = start;
      fail("unknown identifier '" + std::string(name) + "'", ErrorCode::kUnknownIdentifier);
    }
    if (!accept('(')) fail("expected '(' after function '" + std::string(name) + "'");
    std::vector<NodePtr> args;
    skip_ws();
    if (!(pos_ < src_.size() && src_[pos_] == ')')) {
      args.push_back(expr());
      while (accept(',')) args.push_back(expr());
    }
    if (!accept(')')) fail("expected ')' or ','");
    if (args.size() != f->arity) {
      pos_ = start;
      fail("function '" + std::string(name) + "' takes " + std::to_string(f->arity) +
               " argument(s), got " + std::to_string(args.size()),
           ErrorCode::kArity);
    }
    return make_call(f->function, std::move(args));
  }

  std::string_view src_;
  const std::vector<std::string>& vars_;
  std::size_t pos_ = 0;
};

bool nodes_equal(const Node& a, const Node& b) {
  if (a.kind != b.kind || a.args.size() != b.args.size()) return false;
  switch (a.kind) {
    case Kind::kLiteral:
      if (a.literal != b.literal) return false;
      break;
    case Kind::kVariable:
      if (a.variable != b.variable) return false;
      break;
    case Kind::kCall:
      if (a.function != b.function) return false;
      break;
    default:
      break;
  }
  for (std::size_t i = 0; i < a.args.size(); ++i)
    if (!nodes_equal(*a.args[i], *b.args[i])) return false;
  return true;
}

NodePtr substitute_node(const NodePtr& n, std::span<const NodePtr> replacements) {
  if (n->kind == Kind::kVariable) return replacements[n->variable];
  if (n->args.empty()) return n;
  auto copy = std::make_shared<Node>(*n);
  for (auto& a : copy->args) a = substitute_node(a, replacements);
  return copy;
}

void mark_variables(const Node& n, std::vector<bool>& used) {
  if (n.kind == Kind::kVariable) used[n.variable] = true;
  for (const auto& a : n.args) mark_variables(*a, used);
}

void validate_variables(const std::vector<std::string>& vars) {
  std::unordered_set<std::string> seen;
  for (const auto& v : vars) {
    if (v.empty()) throw std::invalid_argument("empty variable name");
    if (find_function(v)) {
      throw std::invalid_argument("variable name '" + v + "' collides with a function");
    }
    if (!seen.insert(v).second) {
      throw std::invalid_argument("duplicate variable name '" + v + "'");
    }
  }
}

std::shared_ptr<const std::vector<std::string>> share(std::vector<std::string> vars) {
  return std::make_shared<const std::vector<std::string>>(std::move(vars));
}

}  // namespace

const char* function_name(Function f) {
  for (const auto& entry : kFunctions)
    if (entry.function == f) return entry.name;
  return "?";
}

Expression Expression::parse(std::string_view source, std::vector<std::string> variables) {
  if (variables.empty()) throw std::invalid_argument("expression needs at least one variable");
  validate_variables(variables);
  auto vars = share(std::move(variables));
  Parser parser(source, *vars);
  NodePtr root = parser.parse();
  return Expression(std::move(root), std::move(vars));
}

Expression Expression::literal(double value, std::vector<std::string> variables) {
  validate_variables(variables);
  return Expression(make_literal(value), share(std::move(variables)));
}

Expression Expression::variable(std::size_t index, std::vector<std::string> variables) {
  validate_variables(variables);
  if (index >= variables.size()) throw std::out_of_range("variable index out of range");
  return Expression(make_variable(index), share(std::move(variables)));
}

double Expression::evaluate(std::span<const double> point) const {
  if (point.size() != arity()) {
    throw Error(ErrorCode::kDimension, "expression '" + to_string() + "' expects " +
                                           std::to_string(arity()) + " coordinates, got " +
                                           std::to_string(point.size()));
  }
  return eval_node<DoubleOps>(*root_, point, 0, *variables_);
}

Jet2 Expression::eval_jet2(std::span<const double> point) const {
  if (point.size() != arity()) {
    throw Error(ErrorCode::kDimension, "expression '" + to_string() + "' expects " +
                                           std::to_string(arity()) + " coordinates, got " +
                                           std::to_string(point.size()));
  }
  const std::vector<Jet2> seeds = seed_variables(point);
  return eval_node<JetOps>(*root_, std::span<const Jet2>(seeds), point.size(), *variables_);
}

Jet2 Expression::eval_jet2(std::span<const Jet2> arguments) const {
  if (arguments.size() != arity()) {
    throw Error(ErrorCode::kDimension, "expression '" + to_string() + "' expects " +
                                           std::to_string(arity()) + " arguments, got " +
                                           std::to_string(arguments.size()));
  }
  const std::size_t dim = arguments.empty() ? 0 : arguments.front().dim();
  return eval_node<JetOps>(*root_, arguments, dim, *variables_);
}

std::string Expression::to_string() const { return print(*root_, *variables_); }

std::vector<bool> Expression::occurring_variables() const {
  std::vector<bool> used(arity(), false);
  mark_variables(*root_, used);
  return used;
}

bool Expression::is_variable_free() const { return !uses_variables(*root_); }

Expression Expression::substitute(std::span<const Expression> replacements) const {
  if (replacements.size() != arity()) {
    throw std::invalid_argument("substitute: expected " + std::to_string(arity()) +
                                " replacements, got " + std::to_string(replacements.size()));
  }
  if (replacements.empty()) return *this;
  const auto& target_vars = replacements.front().variables_;
  std::vector<NodePtr> nodes;
  nodes.reserve(replacements.size());
  for (const auto& r : replacements) {
    if (*r.variables_ != *target_vars) {
      throw std::invalid_argument("substitute: replacements use different variable lists");
    }
    nodes.push_back(r.root_);
  }
  return Expression(substitute_node(root_, nodes), target_vars);
}

Expression Expression::rebind(std::vector<std::string> new_variables,
                              std::span<const std::size_t> index_map) const {
  if (index_map.size() != arity()) throw std::invalid_argument("rebind: index map size");
  validate_variables(new_variables);
  auto vars = share(std::move(new_variables));
  std::vector<NodePtr> nodes;
  for (std::size_t i : index_map) {
    if (i >= vars->size()) throw std::out_of_range("rebind: index out of range");
    nodes.push_back(make_variable(i));
  }
  return Expression(substitute_node(root_, nodes), std::move(vars));
}

bool operator==(const Expression& a, const Expression& b) {
  return *a.variables_ == *b.variables_ && nodes_equal(*a.root_, *b.root_);
}

namespace {

void require_same_variables(const Expression& a, const Expression& b) {
  if (a.variables() != b.variables()) {
    throw std::invalid_argument("expressions over different variable lists");
  }
}

}  // namespace

Expression operator+(const Expression& a, const Expression& b) {
  require_same_variables(a, b);
  return Expression(make_node(Kind::kAdd, {a.root_, b.root_}), a.variables_);
}

Expression operator-(const Expression& a, const Expression& b) {
  require_same_variables(a, b);
  return Expression(make_node(Kind::kSub, {a.root_, b.root_}), a.variables_);
}

Expression operator*(const Expression& a, const Expression& b) {
  require_same_variables(a, b);
  return Expression(make_node(Kind::kMul, {a.root_, b.root_}), a.variables_);
}

Expression operator/(const Expression& a, const Expression& b) {
  require_same_variables(a, b);
  return Expression(make_node(Kind::kDiv, {a.root_, b.root_}), a.variables_);
}

Expression operator-(const Expression& a) {
  return Expression(make_node(Kind::kNeg, {a.root_}), a.variables_);
}

Expression power(const Expression& a, double exponent) {
  if (!std::isfinite(exponent)) throw std::invalid_argument("power: non-finite exponent");
  NodePtr e = exponent < 0.0 ? make_node(Kind::kNeg, {make_literal(-exponent)})
                             : make_literal(exponent);
  auto n = make_node(Kind::kPow, {a.root_, e});
  std::const_pointer_cast<Node>(n)->literal = exponent;
  return Expression(n, a.variables_);
}

Expression apply(Function f, const Expression& a) {
  if (f == Function::kPow) throw std::invalid_argument("apply: pow takes two arguments");
  return Expression(make_call(f, {a.root_}), a.variables_);
}

const char* to_string(ErrorCode code) {
  switch (code) {
    case ErrorCode::kSyntax: return "Syntax";
    case ErrorCode::kUnknownIdentifier: return "UnknownIdentifier";
    case ErrorCode::kArity: return "Arity";
    case ErrorCode::kNonConstantExponent: return "NonConstantExponent";
    case ErrorCode::kDomain: return "Domain";
    case ErrorCode::kDimension: return "Dimension";
    case ErrorCode::kNotPositiveDefinite: return "NotPositiveDefinite";
    case ErrorCode::kNonPositiveTwist: return "NonPositiveTwist";
    case ErrorCode::kMixedBlockField: return "MixedBlockField";
    case ErrorCode::kRankDeficient: return "RankDeficient";
    case ErrorCode::kDegenerateSplit: return "DegenerateSplit";
    case ErrorCode::kMissingTargetSplit: return "MissingTargetSplit";
    case ErrorCode::kFlatnessRequired: return "FlatnessRequired";
    case ErrorCode::kNotIsometric: return "NotIsometric";
    case ErrorCode::kScenario: return "Scenario";
    case ErrorCode::kScene: return "Scene";
  }
  return "Unknown";
}

}  // namespace twistprod
