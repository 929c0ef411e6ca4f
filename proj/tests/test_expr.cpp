#include <gtest/gtest.h>

#include <cmath>

#include "support.hpp"
#include "twistprod/error.hpp"
#include "twistprod/expr.hpp"

namespace tp = twistprod;
using tp::Expression;

namespace {

const std::vector<std::string> kXY = {"x", "y"};

double eval(const std::string& src, std::vector<double> p, std::vector<std::string> vars = kXY) {
  return Expression::parse(src, vars).evaluate(p);
}

template <typename F>
tp::ErrorCode code_of(F&& f) {
  try {
    f();
  } catch (const tp::Error& e) {
    return e.code();
  }
  ADD_FAILURE() << "no error thrown";
  return tp::ErrorCode::kScene;
}

}  // namespace

TEST(ExprParse, PrecedenceAndAssociativity) {
  EXPECT_DOUBLE_EQ(eval("1 + 2 * 3", {0, 0}), 7.0);
  EXPECT_DOUBLE_EQ(eval("8 / 4 / 2", {0, 0}), 1.0);
  EXPECT_DOUBLE_EQ(eval("2 - 3 - 4", {0, 0}), -5.0);
  EXPECT_DOUBLE_EQ(eval("-x^2", {3, 0}), -9.0);
  EXPECT_DOUBLE_EQ(eval("2^3^2", {0, 0}), 512.0);
  EXPECT_DOUBLE_EQ(eval("(x + y) * (x - y)", {3, 2}), 5.0);
}

TEST(ExprParse, NumbersAndFunctions) {
  EXPECT_DOUBLE_EQ(eval("1.5e1", {0, 0}), 15.0);
  EXPECT_DOUBLE_EQ(eval(".25", {0, 0}), 0.25);
  EXPECT_NEAR(eval("exp(ln(x))", {2.5, 0}), 2.5, 1e-15);
  EXPECT_NEAR(eval("sin(x)^2 + cos(x)^2", {0.7, 0}), 1.0, 1e-15);
  EXPECT_NEAR(eval("cosh(x)^2 - sinh(x)^2", {0.7, 0}), 1.0, 1e-14);
  EXPECT_NEAR(eval("tanh(x) - sinh(x)/cosh(x)", {0.7, 0}), 0.0, 1e-15);
  EXPECT_NEAR(eval("pow(x, y)", {2.0, 0.5}), std::sqrt(2.0), 1e-15);
  EXPECT_NEAR(eval("sqrt(x) * tan(y)", {4.0, 0.3}), 2 * std::tan(0.3), 1e-15);
}

TEST(ExprParse, SyntaxErrorsCarryOffsets) {
  try {
    Expression::parse("x + * y", kXY);
    FAIL();
  } catch (const tp::ParseError& e) {
    EXPECT_EQ(e.code(), tp::ErrorCode::kSyntax);
    EXPECT_EQ(e.offset(), 4u);
  }
  EXPECT_EQ(code_of([] { Expression::parse("(x + y", kXY); }), tp::ErrorCode::kSyntax);
  EXPECT_EQ(code_of([] { Expression::parse("", kXY); }), tp::ErrorCode::kSyntax);
  EXPECT_EQ(code_of([] { Expression::parse("x y", kXY); }), tp::ErrorCode::kSyntax);
}

TEST(ExprParse, UnknownIdentifierAndArity) {
  try {
    Expression::parse("x + z", kXY);
    FAIL();
  } catch (const tp::ParseError& e) {
    EXPECT_EQ(e.code(), tp::ErrorCode::kUnknownIdentifier);
    EXPECT_EQ(e.offset(), 4u);
  }
  EXPECT_EQ(code_of([] { Expression::parse("sin(x, y)", kXY); }), tp::ErrorCode::kArity);
  EXPECT_EQ(code_of([] { Expression::parse("pow(x)", kXY); }), tp::ErrorCode::kArity);
}

TEST(ExprParse, VariableExponentNeedsPow) {
  EXPECT_EQ(code_of([] { Expression::parse("x^y", kXY); }), tp::ErrorCode::kNonConstantExponent);
  EXPECT_NO_THROW(Expression::parse("x^(2*3)", kXY));
}

TEST(ExprEval, DomainErrorsNameTheSubexpression) {
  const Expression e = Expression::parse("1 + ln(x - 1)", kXY);
  try {
    e.evaluate(std::vector<double>{0.5, 0.0});
    FAIL();
  } catch (const tp::DomainError& err) {
    EXPECT_EQ(err.code(), tp::ErrorCode::kDomain);
    EXPECT_NE(err.subexpression().find("ln"), std::string::npos);
  }
  EXPECT_EQ(code_of([] { eval("sqrt(x)", {-1, 0}); }), tp::ErrorCode::kDomain);
  EXPECT_EQ(code_of([] { eval("x / y", {1, 0}); }), tp::ErrorCode::kDomain);
  EXPECT_EQ(code_of([] { eval("pow(x, y)", {-2, 0.5}); }), tp::ErrorCode::kDomain);
}

TEST(ExprEval, WrongPointDimension) {
  const Expression e = Expression::parse("x + y", kXY);
  EXPECT_EQ(code_of([&] { e.evaluate(std::vector<double>{1.0}); }), tp::ErrorCode::kDimension);
}

TEST(ExprPrint, RoundTripsStructurally) {
  tp::testing::RandomExpression gen(5);
  for (int i = 0; i < 50; ++i) {
    const auto vars = gen.variables(3);
    const Expression e = Expression::parse(gen(3), vars);
    const Expression again = Expression::parse(e.to_string(), vars);
    EXPECT_TRUE(e == again) << e.to_string();
  }
}

TEST(ExprAnalysis, OccurringVariables) {
  const Expression e = Expression::parse("exp(x) + 0*2", {"x", "y", "z"});
  EXPECT_EQ(e.occurring_variables(), (std::vector<bool>{true, false, false}));
  EXPECT_TRUE(Expression::parse("2 + 3", kXY).is_variable_free());
  EXPECT_FALSE(Expression::parse("2 + y", kXY).is_variable_free());
}

TEST(ExprTransform, SubstituteComposes) {
  const Expression f = Expression::parse("x * y + sin(x)", kXY);
  const std::vector<std::string> st = {"s", "t"};
  const std::vector<Expression> repl = {Expression::parse("s + t", st),
                                        Expression::parse("s * t", st)};
  const Expression g = f.substitute(repl);
  EXPECT_EQ(g.variables(), st);
  const double s = 0.4, t = -1.3;
  EXPECT_NEAR(g.evaluate(std::vector<double>{s, t}), (s + t) * (s * t) + std::sin(s + t), 1e-15);
}

TEST(ExprTransform, RebindMovesVariables) {
  const Expression f = Expression::parse("x - 2*y", kXY);
  const std::vector<std::size_t> map = {2, 0};
  const Expression g = f.rebind({"a", "b", "c"}, map);
  EXPECT_DOUBLE_EQ(g.evaluate(std::vector<double>{5.0, 9.0, 1.0}), 1.0 - 10.0);
}

TEST(ExprJet, RandomExpressionsMatchFiniteDifferences) {
  tp::testing::RandomExpression gen(20240101);
  int checked = 0;
  for (int i = 0; i < 120; ++i) {
    const std::size_t n = 1 + static_cast<std::size_t>(i % 4);
    const auto vars = gen.variables(n);
    const Expression e = Expression::parse(gen(n), vars);
    const std::vector<double> x = gen.point(n);
    const tp::Jet2 j = e.eval_jet2(x);
    auto f = [&](const std::vector<double>& p) { return e.evaluate(p); };
    const Eigen::VectorXd g = tp::testing::fd_gradient(f, x, 1e-5);
    const Eigen::MatrixXd H = tp::testing::fd_hessian(f, x, 1e-4);
    for (std::size_t a = 0; a < n; ++a) {
      EXPECT_LE(tp::testing::relative_error(j.grad(a), g[static_cast<Eigen::Index>(a)]), 1e-6)
          << e.to_string();
      for (std::size_t b = 0; b < n; ++b)
        EXPECT_LE(tp::testing::relative_error(j.hess(a, b), H(static_cast<Eigen::Index>(a),
                                                              static_cast<Eigen::Index>(b))),
                  1e-4)
            << e.to_string();
    }
    ++checked;
  }
  EXPECT_GE(checked, 100);
}

TEST(ExprJet, ChainedJetArgumentsComposeDerivatives) {
  // f(u) with u = jets of (s^2, s t): derivatives with respect to (s, t).
  const Expression f = Expression::parse("x * exp(y)", kXY);
  const tp::Jet2 s = tp::Jet2::variable(0.5, 0, 2);
  const tp::Jet2 t = tp::Jet2::variable(-0.4, 1, 2);
  const std::vector<tp::Jet2> args = {s * s, s * t};
  const tp::Jet2 r = f.eval_jet2(args);
  auto plain = [](const std::vector<double>& p) { return p[0] * p[0] * std::exp(p[0] * p[1]); };
  const Eigen::VectorXd g = tp::testing::fd_gradient(plain, {0.5, -0.4});
  EXPECT_NEAR(r.grad(0), g[0], 1e-8);
  EXPECT_NEAR(r.grad(1), g[1], 1e-8);
}
