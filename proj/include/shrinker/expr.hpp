#pragma once

#include <memory>
#include <optional>
#include <span>
#include <string>
#include <string_view>
#include <vector>

namespace shrinker {

// Minimal arithmetic expressions over grid coordinates, used for CLI potentials.
//
// Grammar (recursive descent):
//   expr    := term (('+'|'-') term)*
//   term    := factor (('*'|'/') factor)*
//   factor  := ('+'|'-') factor | power
//   power   := atom ('^' factor)?            right-associative
//   atom    := number | variable | func '(' expr ')' | '(' expr ')'
//   func    := 'exp' | 'abs'
//   variable:= 'x' | 'x<k>' | 'y' | 'y<k>'   k >= 1, one-based coordinate index
//
// 'x' and 'y' are aliases for the first coordinate; 'x<k>'/'y<k>' select the
// k-th Euclidean coordinate of the model chart.

struct Expr;
using ExprPtr = std::shared_ptr<const Expr>;

struct Expr {
    enum class Op { Number, Coord, Add, Sub, Mul, Div, Pow, Neg, Exp, Abs };
    Op op = Op::Number;
    double number = 0.0;
    int coord = 0; // zero-based coordinate index for Op::Coord
    ExprPtr lhs, rhs;
};

// Throws Error(Parse) with a character position on malformed input.
ExprPtr parse_expression(std::string_view src);

double eval_expression(const Expr& e, std::span<const double> coords);

// Highest coordinate index referenced, plus one (0 for constant expressions).
int coordinate_count(const Expr& e);

// Dense coefficient list c[0] + c[1] x + ... for single-variable polynomial
// expressions; nullopt if the expression is not a polynomial in coordinate 0
// (uses non-integer powers, exp/abs, division by non-constants, or several
// coordinates).
std::optional<std::vector<double>> extract_polynomial(const Expr& e, int max_degree = 32);

std::string to_string(const Expr& e);

} // namespace shrinker
