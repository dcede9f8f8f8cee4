#include "bicon/expression.hpp"

#include <cctype>
#include <cmath>
#include <cstdio>
#include <cstring>

namespace bicon {

Chart make_chart(std::vector<std::string> names) {
  return std::make_shared<const std::vector<std::string>>(std::move(names));
}

namespace {

ExprPtr mk(Expr e) { return std::make_shared<const Expr>(std::move(e)); }

bool is_num(const ExprPtr& e, double v) {
  return e->kind == Expr::Num && e->num == v;
}

}  // namespace

ExprPtr e_num(double v) {
  Expr e;
  e.kind = Expr::Num;
  e.num = v;
  return mk(e);
}

ExprPtr e_coord(int i) {
  Expr e;
  e.kind = Expr::Coord;
  e.coord = i;
  return mk(e);
}

ExprPtr e_neg(ExprPtr a) {
  if (a->kind == Expr::Num) return e_num(-a->num);
  if (a->kind == Expr::Neg) return a->a;
  Expr e;
  e.kind = Expr::Neg;
  e.a = std::move(a);
  return mk(e);
}

ExprPtr e_add(ExprPtr a, ExprPtr b) {
  if (is_num(a, 0.0)) return b;
  if (is_num(b, 0.0)) return a;
  if (a->kind == Expr::Num && b->kind == Expr::Num) return e_num(a->num + b->num);
  Expr e;
  e.kind = Expr::Add;
  e.a = std::move(a);
  e.b = std::move(b);
  return mk(e);
}

ExprPtr e_sub(ExprPtr a, ExprPtr b) {
  if (is_num(b, 0.0)) return a;
  if (is_num(a, 0.0)) return e_neg(b);
  if (a->kind == Expr::Num && b->kind == Expr::Num) return e_num(a->num - b->num);
  Expr e;
  e.kind = Expr::Sub;
  e.a = std::move(a);
  e.b = std::move(b);
  return mk(e);
}

ExprPtr e_mul(ExprPtr a, ExprPtr b) {
  if (is_num(a, 0.0) || is_num(b, 0.0)) return e_num(0.0);
  if (is_num(a, 1.0)) return b;
  if (is_num(b, 1.0)) return a;
  if (a->kind == Expr::Num && b->kind == Expr::Num) return e_num(a->num * b->num);
  Expr e;
  e.kind = Expr::Mul;
  e.a = std::move(a);
  e.b = std::move(b);
  return mk(e);
}

ExprPtr e_div(ExprPtr a, ExprPtr b) {
  if (is_num(a, 0.0)) return e_num(0.0);
  if (is_num(b, 1.0)) return a;
  Expr e;
  e.kind = Expr::Div;
  e.a = std::move(a);
  e.b = std::move(b);
  return mk(e);
}

ExprPtr e_pow(ExprPtr a, ExprPtr b) {
  if (is_num(b, 1.0)) return a;
  if (is_num(b, 0.0)) return e_num(1.0);
  Expr e;
  e.kind = Expr::Pow;
  e.a = std::move(a);
  e.b = std::move(b);
  return mk(e);
}

ExprPtr e_fn(Fn f, ExprPtr a) {
  Expr e;
  e.kind = Expr::Func;
  e.fn = f;
  e.a = std::move(a);
  return mk(e);
}

namespace {

struct Parser {
  const std::string& src;
  const Chart& chart;
  std::size_t pos = 0;

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

  char peek() {
    skip_ws();
    return pos < src.size() ? src[pos] : '\0';
  }

  ExprPtr parse_expr() {
    ExprPtr a = parse_term();
    while (true) {
      if (eat('+')) a = e_add(a, parse_term());
      else if (eat('-')) a = e_sub(a, parse_term());
      else return a;
    }
  }

  ExprPtr parse_term() {
    ExprPtr a = parse_unary();
    while (true) {
      if (eat('*')) a = e_mul(a, parse_unary());
      else if (eat('/')) a = e_div(a, parse_unary());
      else return a;
    }
  }

  // '^' binds tighter than unary minus and is right-associative
  ExprPtr parse_unary() {
    if (eat('-')) return e_neg(parse_unary());
    if (eat('+')) return parse_unary();
    return parse_power();
  }

  ExprPtr parse_power() {
    ExprPtr a = parse_primary();
    if (eat('^')) return e_pow(a, parse_unary());
    return a;
  }

  ExprPtr parse_primary() {
    skip_ws();
    if (pos >= src.size()) throw ParseError("unexpected end of expression", static_cast<int>(pos));
    char c = src[pos];
    if (c == '(') {
      ++pos;
      ExprPtr a = parse_expr();
      if (!eat(')')) throw ParseError("expected ')'", static_cast<int>(pos));
      return a;
    }
    if (std::isdigit(static_cast<unsigned char>(c)) || c == '.') return parse_number();
    if (std::isalpha(static_cast<unsigned char>(c)) || c == '_') return parse_ident();
    throw ParseError(std::string("unexpected character '") + c + "'", static_cast<int>(pos));
  }

  ExprPtr parse_number() {
    const char* start = src.c_str() + pos;
    char* end = nullptr;
    double v = std::strtod(start, &end);
    if (end == start) throw ParseError("malformed number", static_cast<int>(pos));
    pos += static_cast<std::size_t>(end - start);
    return e_num(v);
  }

  ExprPtr parse_ident() {
    std::size_t start = pos;
    while (pos < src.size() &&
           (std::isalnum(static_cast<unsigned char>(src[pos])) || src[pos] == '_'))
      ++pos;
    std::string name = src.substr(start, pos - start);
    static const std::pair<const char*, Fn> fns[] = {
        {"exp", Fn::Exp},   {"log", Fn::Log},   {"sin", Fn::Sin},  {"cos", Fn::Cos},
        {"sinh", Fn::Sinh}, {"cosh", Fn::Cosh}, {"tanh", Fn::Tanh}, {"sqrt", Fn::Sqrt}};
    for (const auto& [fname, f] : fns) {
      if (name == fname) {
        if (!eat('(')) throw ParseError("expected '(' after function " + name, static_cast<int>(pos));
        ExprPtr a = parse_expr();
        if (!eat(')')) throw ParseError("expected ')'", static_cast<int>(pos));
        return e_fn(f, a);
      }
    }
    for (std::size_t i = 0; i < chart->size(); ++i)
      if ((*chart)[i] == name) return e_coord(static_cast<int>(i));
    throw ParseError("undeclared symbol \"" + name + "\"", static_cast<int>(start));
  }
};

int precedence(Expr::Kind k) {
  switch (k) {
    case Expr::Add:
    case Expr::Sub: return 1;
    case Expr::Mul:
    case Expr::Div: return 2;
    case Expr::Neg: return 3;
    case Expr::Pow: return 4;
    default: return 5;
  }
}

const char* fn_name(Fn f) {
  switch (f) {
    case Fn::Exp: return "exp";
    case Fn::Log: return "log";
    case Fn::Sin: return "sin";
    case Fn::Cos: return "cos";
    case Fn::Sinh: return "sinh";
    case Fn::Cosh: return "cosh";
    case Fn::Tanh: return "tanh";
    case Fn::Sqrt: return "sqrt";
  }
  return "?";
}

std::string num_str(double v) {
  char buf[40];
  std::snprintf(buf, sizeof buf, "%.17g", v);
  double back = std::strtod(buf, nullptr);
  if (back == v) {
    // prefer the shortest representation that round-trips
    for (int prec = 1; prec <= 16; ++prec) {
      char b2[40];
      std::snprintf(b2, sizeof b2, "%.*g", prec, v);
      if (std::strtod(b2, nullptr) == v) return b2;
    }
  }
  return buf;
}

void print_rec(const ExprPtr& e, const Chart& chart, int parent_prec, bool right,
               std::string& out) {
  int prec = precedence(e->kind);
  bool need_paren = prec < parent_prec || (prec == parent_prec && right);
  switch (e->kind) {
    case Expr::Num: {
      if (e->num < 0) {
        out += "(" + num_str(e->num) + ")";
      } else {
        out += num_str(e->num);
      }
      return;
    }
    case Expr::Coord:
      out += (*chart)[e->coord];
      return;
    case Expr::Func:
      out += fn_name(e->fn);
      out += "(";
      print_rec(e->a, chart, 0, false, out);
      out += ")";
      return;
    case Expr::Neg:
      if (need_paren) out += "(";
      out += "-";
      print_rec(e->a, chart, prec, true, out);
      if (need_paren) out += ")";
      return;
    default: break;
  }
  const char* op = e->kind == Expr::Add   ? " + "
                   : e->kind == Expr::Sub ? " - "
                   : e->kind == Expr::Mul ? "*"
                   : e->kind == Expr::Div ? "/"
                                          : "^";
  if (need_paren) out += "(";
  bool right_assoc = e->kind == Expr::Pow;
  print_rec(e->a, chart, prec, right_assoc, out);
  out += op;
  print_rec(e->b, chart, prec, !right_assoc, out);
  if (need_paren) out += ")";
}

}  // namespace

ExprPtr parse(const std::string& source, const Chart& chart) {
  if (source.empty()) throw ParseError("empty expression", 0);
  Parser p{source, chart};
  ExprPtr e = p.parse_expr();
  p.skip_ws();
  if (p.pos != source.size())
    throw ParseError("trailing input", static_cast<int>(p.pos));
  return e;
}

std::string print(const ExprPtr& e, const Chart& chart) {
  std::string out;
  print_rec(e, chart, 0, false, out);
  return out;
}

bool expr_equal(const ExprPtr& a, const ExprPtr& b) {
  if (a == b) return true;
  if (a->kind != b->kind) return false;
  switch (a->kind) {
    case Expr::Num: return a->num == b->num;
    case Expr::Coord: return a->coord == b->coord;
    case Expr::Func:
      return a->fn == b->fn && expr_equal(a->a, b->a);
    case Expr::Neg: return expr_equal(a->a, b->a);
    default:
      return expr_equal(a->a, b->a) && expr_equal(a->b, b->b);
  }
}

ExprPtr derive(const ExprPtr& e, int var) {
  switch (e->kind) {
    case Expr::Num: return e_num(0.0);
    case Expr::Coord: return e_num(e->coord == var ? 1.0 : 0.0);
    case Expr::Neg: return e_neg(derive(e->a, var));
    case Expr::Add: return e_add(derive(e->a, var), derive(e->b, var));
    case Expr::Sub: return e_sub(derive(e->a, var), derive(e->b, var));
    case Expr::Mul:
      return e_add(e_mul(derive(e->a, var), e->b), e_mul(e->a, derive(e->b, var)));
    case Expr::Div:
      return e_div(e_sub(e_mul(derive(e->a, var), e->b), e_mul(e->a, derive(e->b, var))),
                   e_pow(e->b, e_num(2.0)));
    case Expr::Pow: {
      if (e->b->kind == Expr::Num) {
        double k = e->b->num;
        return e_mul(e_mul(e_num(k), e_pow(e->a, e_num(k - 1.0))), derive(e->a, var));
      }
      // a^b = exp(b log a)
      ExprPtr da = derive(e->a, var), db = derive(e->b, var);
      ExprPtr t = e_add(e_mul(db, e_fn(Fn::Log, e->a)), e_div(e_mul(e->b, da), e->a));
      return e_mul(e_pow(e->a, e->b), t);
    }
    case Expr::Func: {
      ExprPtr da = derive(e->a, var);
      switch (e->fn) {
        case Fn::Exp: return e_mul(e_fn(Fn::Exp, e->a), da);
        case Fn::Log: return e_div(da, e->a);
        case Fn::Sin: return e_mul(e_fn(Fn::Cos, e->a), da);
        case Fn::Cos: return e_neg(e_mul(e_fn(Fn::Sin, e->a), da));
        case Fn::Sinh: return e_mul(e_fn(Fn::Cosh, e->a), da);
        case Fn::Cosh: return e_mul(e_fn(Fn::Sinh, e->a), da);
        case Fn::Tanh:
          return e_mul(e_sub(e_num(1.0), e_pow(e_fn(Fn::Tanh, e->a), e_num(2.0))), da);
        case Fn::Sqrt:
          return e_div(da, e_mul(e_num(2.0), e_fn(Fn::Sqrt, e->a)));
      }
      throw Error("unknown function in derive");
    }
  }
  throw Error("unknown node in derive");
}

namespace {

Jet eval_rec(const ExprPtr& e, const Chart& chart, std::span<const double> x,
             const JetSpace* sp, int order) {
  switch (e->kind) {
    case Expr::Num: return Jet::constant(sp, order, e->num);
    case Expr::Coord: return Jet::variable(sp, order, e->coord, x[e->coord]);
    case Expr::Neg: return -eval_rec(e->a, chart, x, sp, order);
    case Expr::Add:
      return eval_rec(e->a, chart, x, sp, order) + eval_rec(e->b, chart, x, sp, order);
    case Expr::Sub:
      return eval_rec(e->a, chart, x, sp, order) - eval_rec(e->b, chart, x, sp, order);
    case Expr::Mul:
      return eval_rec(e->a, chart, x, sp, order) * eval_rec(e->b, chart, x, sp, order);
    case Expr::Div: {
      Jet a = eval_rec(e->a, chart, x, sp, order);
      Jet b = eval_rec(e->b, chart, x, sp, order);
      try {
        return a / b;
      } catch (DomainError& err) {
        if (!err.annotated) {
          DomainError wrapped(std::string(err.what()) + " in subexpression \"" +
                              print(e, chart) + "\"");
          wrapped.annotated = true;
          throw wrapped;
        }
        throw;
      }
    }
    case Expr::Pow: {
      Jet a = eval_rec(e->a, chart, x, sp, order);
      Jet b = eval_rec(e->b, chart, x, sp, order);
      try {
        return pow(a, b);
      } catch (DomainError& err) {
        if (!err.annotated) {
          DomainError wrapped(std::string(err.what()) + " in subexpression \"" +
                              print(e, chart) + "\"");
          wrapped.annotated = true;
          throw wrapped;
        }
        throw;
      }
    }
    case Expr::Func: {
      Jet a = eval_rec(e->a, chart, x, sp, order);
      try {
        switch (e->fn) {
          case Fn::Exp: return exp(a);
          case Fn::Log: return log(a);
          case Fn::Sin: return sin(a);
          case Fn::Cos: return cos(a);
          case Fn::Sinh: return sinh(a);
          case Fn::Cosh: return cosh(a);
          case Fn::Tanh: return tanh(a);
          case Fn::Sqrt: return sqrt(a);
        }
      } catch (DomainError& err) {
        if (!err.annotated) {
          DomainError wrapped(std::string(err.what()) + " in subexpression \"" +
                              print(e, chart) + "\"");
          wrapped.annotated = true;
          throw wrapped;
        }
        throw;
      }
      throw Error("unknown function");
    }
  }
  throw Error("unknown node");
}

}  // namespace

Jet evaluate_jet(const ExprPtr& e, const Chart& chart, std::span<const double> at,
                 int order) {
  if (static_cast<int>(at.size()) != static_cast<int>(chart->size()))
    throw Error("point dimension does not match chart");
  if (order < 0) throw Error("negative jet order");
  const JetSpace* sp = JetSpace::get(static_cast<int>(chart->size()), order);
  return eval_rec(e, chart, at, sp, order);
}

ScalarField ScalarField::parse(const std::string& src, const Chart& chart) {
  return ScalarField(chart, bicon::parse(src, chart));
}

ScalarField ScalarField::constant(const Chart& chart, double v) {
  return ScalarField(chart, e_num(v));
}

ScalarField ScalarField::coordinate(const Chart& chart, int i) {
  return ScalarField(chart, e_coord(i));
}

Jet ScalarField::eval(std::span<const double> x, int order) const {
  return evaluate_jet(ast_, chart_, x, order);
}

double ScalarField::value(std::span<const double> x) const {
  return eval(x, 0).value();
}

ScalarField ScalarField::derivative(int var) const {
  return ScalarField(chart_, derive(ast_, var));
}

}  // namespace bicon
