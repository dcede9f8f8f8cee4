#ifndef BICON_EXPRESSION_HPP
#define BICON_EXPRESSION_HPP

#include <memory>
#include <string>
#include <vector>

#include "bicon/jet.hpp"

namespace bicon {

using Chart = std::shared_ptr<const std::vector<std::string>>;

Chart make_chart(std::vector<std::string> names);

struct ParseError : Error {
  ParseError(const std::string& msg, int pos)
      : Error(msg + " (at position " + std::to_string(pos) + ")"), position(pos) {}
  int position;
};

enum class Fn { Exp, Log, Sin, Cos, Sinh, Cosh, Tanh, Sqrt };

struct Expr;
using ExprPtr = std::shared_ptr<const Expr>;

// Immutable AST for coordinate scalar expressions.
struct Expr {
  enum Kind { Num, Coord, Neg, Add, Sub, Mul, Div, Pow, Func } kind;
  double num = 0.0;   // Num
  int coord = -1;     // Coord: index into the chart
  Fn fn = Fn::Exp;    // Func
  ExprPtr a, b;
};

// smart constructors with light constant folding
ExprPtr e_num(double v);
ExprPtr e_coord(int i);
ExprPtr e_neg(ExprPtr a);
ExprPtr e_add(ExprPtr a, ExprPtr b);
ExprPtr e_sub(ExprPtr a, ExprPtr b);
ExprPtr e_mul(ExprPtr a, ExprPtr b);
ExprPtr e_div(ExprPtr a, ExprPtr b);
ExprPtr e_pow(ExprPtr a, ExprPtr b);
ExprPtr e_fn(Fn f, ExprPtr a);

ExprPtr parse(const std::string& source, const Chart& chart);
std::string print(const ExprPtr& e, const Chart& chart);
bool expr_equal(const ExprPtr& a, const ExprPtr& b);
ExprPtr derive(const ExprPtr& e, int var);

Jet evaluate_jet(const ExprPtr& e, const Chart& chart,
                 std::span<const double> at, int order);

// A parsed coordinate expression bound to its chart; evaluation yields the
// value plus all mixed partials to the requested order.
class ScalarField {
 public:
  ScalarField() = default;
  ScalarField(Chart chart, ExprPtr ast) : chart_(std::move(chart)), ast_(std::move(ast)) {}
  static ScalarField parse(const std::string& src, const Chart& chart);
  static ScalarField constant(const Chart& chart, double v);
  static ScalarField coordinate(const Chart& chart, int i);

  bool valid() const { return ast_ != nullptr; }
  const Chart& chart() const { return chart_; }
  const ExprPtr& ast() const { return ast_; }

  Jet eval(std::span<const double> x, int order) const;
  double value(std::span<const double> x) const;
  ScalarField derivative(int var) const;
  std::string printed() const { return print(ast_, chart_); }

  ScalarField operator+(const ScalarField& o) const { return {chart_, e_add(ast_, o.ast_)}; }
  ScalarField operator-(const ScalarField& o) const { return {chart_, e_sub(ast_, o.ast_)}; }
  ScalarField operator*(const ScalarField& o) const { return {chart_, e_mul(ast_, o.ast_)}; }
  ScalarField operator/(const ScalarField& o) const { return {chart_, e_div(ast_, o.ast_)}; }

 private:
  Chart chart_;
  ExprPtr ast_;
};

}  // namespace bicon

#endif
