#include "shrinker/expr.hpp"

#include <cctype>
#include <cmath>
#include <cstdlib>
#include <sstream>

#include "shrinker/errors.hpp"

namespace shrinker {

namespace {

ExprPtr make(Expr::Op op, ExprPtr lhs = nullptr, ExprPtr rhs = nullptr) {
    auto e = std::make_shared<Expr>();
    e->op = op;
    e->lhs = std::move(lhs);
    e->rhs = std::move(rhs);
    return e;
}

ExprPtr make_number(double v) {
    auto e = std::make_shared<Expr>();
    e->op = Expr::Op::Number;
    e->number = v;
    return e;
}

ExprPtr make_coord(int idx) {
    auto e = std::make_shared<Expr>();
    e->op = Expr::Op::Coord;
    e->coord = idx;
    return e;
}

class Parser {
public:
    explicit Parser(std::string_view src) : src_(src) {}

    ExprPtr parse() {
        ExprPtr e = expr();
        skip_ws();
        if (pos_ != src_.size()) error("trailing input");
        return e;
    }

private:
    [[noreturn]] void error(const std::string& what) {
        std::ostringstream os;
        os << "potential expression: " << what << " at position " << pos_ << " in \"" << src_
           << "\"";
        fail(ErrorKind::Parse, os.str());
    }

    void skip_ws() {
        while (pos_ < src_.size() && std::isspace(static_cast<unsigned char>(src_[pos_]))) ++pos_;
    }

    bool eat(char c) {
        skip_ws();
        if (pos_ < src_.size() && src_[pos_] == c) {
            ++pos_;
            return true;
        }
        return false;
    }

    char peek() {
        skip_ws();
        return pos_ < src_.size() ? src_[pos_] : '\0';
    }

    ExprPtr expr() {
        ExprPtr e = term();
        for (;;) {
            if (eat('+')) e = make(Expr::Op::Add, e, term());
            else if (eat('-')) e = make(Expr::Op::Sub, e, term());
            else return e;
        }
    }

    ExprPtr term() {
        ExprPtr e = factor();
        for (;;) {
            if (eat('*')) e = make(Expr::Op::Mul, e, factor());
            else if (eat('/')) e = make(Expr::Op::Div, e, factor());
            else return e;
        }
    }

    ExprPtr factor() {
        if (eat('-')) return make(Expr::Op::Neg, factor());
        if (eat('+')) return factor();
        return power();
    }

    ExprPtr power() {
        ExprPtr base = atom();
        if (eat('^')) return make(Expr::Op::Pow, base, factor());
        return base;
    }

    ExprPtr atom() {
        skip_ws();
        if (pos_ >= src_.size()) error("unexpected end of input");
        char c = src_[pos_];
        if (c == '(') {
            ++pos_;
            ExprPtr e = expr();
            if (!eat(')')) error("expected ')'");
            return e;
        }
        if (std::isdigit(static_cast<unsigned char>(c)) || c == '.') return number();
        if (std::isalpha(static_cast<unsigned char>(c))) return ident();
        error("unexpected character");
    }

    ExprPtr number() {
        const char* begin = src_.data() + pos_;
        char* end = nullptr;
        double v = std::strtod(begin, &end);
        if (end == begin) error("malformed number");
        pos_ += static_cast<std::size_t>(end - begin);
        return make_number(v);
    }

    ExprPtr ident() {
        std::size_t start = pos_;
        while (pos_ < src_.size() && std::isalnum(static_cast<unsigned char>(src_[pos_]))) ++pos_;
        std::string name(src_.substr(start, pos_ - start));
        if (name == "exp" || name == "abs") {
            if (!eat('(')) error("expected '(' after function name");
            ExprPtr arg = expr();
            if (!eat(')')) error("expected ')'");
            return make(name == "exp" ? Expr::Op::Exp : Expr::Op::Abs, arg);
        }
        if (name[0] == 'x' || name[0] == 'y') {
            if (name.size() == 1) return make_coord(0);
            int idx = 0;
            for (std::size_t i = 1; i < name.size(); ++i) {
                if (!std::isdigit(static_cast<unsigned char>(name[i]))) {
                    pos_ = start;
                    error("unknown identifier '" + name + "'");
                }
                idx = idx * 10 + (name[i] - '0');
            }
            if (idx < 1) {
                pos_ = start;
                error("coordinate indices are one-based");
            }
            return make_coord(idx - 1);
        }
        pos_ = start;
        error("unknown identifier '" + name + "'");
    }

    std::string_view src_;
    std::size_t pos_ = 0;
};

// Polynomial arithmetic for classification; coefficient lists, lowest first.
using Poly = std::vector<double>;

void trim(Poly& p) {
    while (p.size() > 1 && p.back() == 0.0) p.pop_back();
}

Poly poly_add(const Poly& a, const Poly& b, double sign) {
    Poly r(std::max(a.size(), b.size()), 0.0);
    for (std::size_t i = 0; i < a.size(); ++i) r[i] += a[i];
    for (std::size_t i = 0; i < b.size(); ++i) r[i] += sign * b[i];
    trim(r);
    return r;
}

std::optional<Poly> poly_mul(const Poly& a, const Poly& b, std::size_t max_terms) {
    if (a.size() + b.size() > max_terms + 2) return std::nullopt;
    Poly r(a.size() + b.size() - 1, 0.0);
    for (std::size_t i = 0; i < a.size(); ++i)
        for (std::size_t j = 0; j < b.size(); ++j) r[i + j] += a[i] * b[j];
    trim(r);
    return r;
}

std::optional<Poly> to_poly(const Expr& e, int max_degree) {
    const std::size_t cap = static_cast<std::size_t>(max_degree) + 1;
    switch (e.op) {
        case Expr::Op::Number: return Poly{e.number};
        case Expr::Op::Coord:
            if (e.coord != 0) return std::nullopt;
            return Poly{0.0, 1.0};
        case Expr::Op::Add: {
            auto a = to_poly(*e.lhs, max_degree), b = to_poly(*e.rhs, max_degree);
            if (!a || !b) return std::nullopt;
            return poly_add(*a, *b, 1.0);
        }
        case Expr::Op::Sub: {
            auto a = to_poly(*e.lhs, max_degree), b = to_poly(*e.rhs, max_degree);
            if (!a || !b) return std::nullopt;
            return poly_add(*a, *b, -1.0);
        }
        case Expr::Op::Neg: {
            auto a = to_poly(*e.lhs, max_degree);
            if (!a) return std::nullopt;
            for (double& c : *a) c = -c;
            return a;
        }
        case Expr::Op::Mul: {
            auto a = to_poly(*e.lhs, max_degree), b = to_poly(*e.rhs, max_degree);
            if (!a || !b) return std::nullopt;
            return poly_mul(*a, *b, cap);
        }
        case Expr::Op::Div: {
            auto a = to_poly(*e.lhs, max_degree), b = to_poly(*e.rhs, max_degree);
            if (!a || !b || b->size() != 1 || (*b)[0] == 0.0) return std::nullopt;
            for (double& c : *a) c /= (*b)[0];
            return a;
        }
        case Expr::Op::Pow: {
            auto a = to_poly(*e.lhs, max_degree);
            if (!a || e.rhs->op != Expr::Op::Number) return std::nullopt;
            double pe = e.rhs->number;
            if (pe < 0 || pe != std::floor(pe) || pe > max_degree) return std::nullopt;
            int ip = static_cast<int>(pe);
            Poly r{1.0};
            for (int i = 0; i < ip; ++i) {
                auto next = poly_mul(r, *a, cap);
                if (!next) return std::nullopt;
                r = std::move(*next);
            }
            return r;
        }
        case Expr::Op::Exp:
        case Expr::Op::Abs: return std::nullopt;
    }
    return std::nullopt;
}

void print(const Expr& e, std::ostream& os) {
    switch (e.op) {
        case Expr::Op::Number: os << e.number; return;
        case Expr::Op::Coord:
            if (e.coord == 0) os << "x";
            else os << "x" << (e.coord + 1);
            return;
        case Expr::Op::Add: os << '('; print(*e.lhs, os); os << '+'; print(*e.rhs, os); os << ')'; return;
        case Expr::Op::Sub: os << '('; print(*e.lhs, os); os << '-'; print(*e.rhs, os); os << ')'; return;
        case Expr::Op::Mul: os << '('; print(*e.lhs, os); os << '*'; print(*e.rhs, os); os << ')'; return;
        case Expr::Op::Div: os << '('; print(*e.lhs, os); os << '/'; print(*e.rhs, os); os << ')'; return;
        case Expr::Op::Pow: os << '('; print(*e.lhs, os); os << '^'; print(*e.rhs, os); os << ')'; return;
        case Expr::Op::Neg: os << "(-"; print(*e.lhs, os); os << ')'; return;
        case Expr::Op::Exp: os << "exp("; print(*e.lhs, os); os << ')'; return;
        case Expr::Op::Abs: os << "abs("; print(*e.lhs, os); os << ')'; return;
    }
}

} // namespace

ExprPtr parse_expression(std::string_view src) { return Parser(src).parse(); }

double eval_expression(const Expr& e, std::span<const double> coords) {
    switch (e.op) {
        case Expr::Op::Number: return e.number;
        case Expr::Op::Coord:
            if (e.coord >= static_cast<int>(coords.size()))
                fail(ErrorKind::Parameter, "expression references coordinate " +
                                               std::to_string(e.coord + 1) + " but the chart has " +
                                               std::to_string(coords.size()));
            return coords[static_cast<std::size_t>(e.coord)];
        case Expr::Op::Add: return eval_expression(*e.lhs, coords) + eval_expression(*e.rhs, coords);
        case Expr::Op::Sub: return eval_expression(*e.lhs, coords) - eval_expression(*e.rhs, coords);
        case Expr::Op::Mul: return eval_expression(*e.lhs, coords) * eval_expression(*e.rhs, coords);
        case Expr::Op::Div: return eval_expression(*e.lhs, coords) / eval_expression(*e.rhs, coords);
        case Expr::Op::Pow: return std::pow(eval_expression(*e.lhs, coords), eval_expression(*e.rhs, coords));
        case Expr::Op::Neg: return -eval_expression(*e.lhs, coords);
        case Expr::Op::Exp: return std::exp(eval_expression(*e.lhs, coords));
        case Expr::Op::Abs: return std::abs(eval_expression(*e.lhs, coords));
    }
    return 0;
}

int coordinate_count(const Expr& e) {
    int c = 0;
    if (e.op == Expr::Op::Coord) c = e.coord + 1;
    if (e.lhs) c = std::max(c, coordinate_count(*e.lhs));
    if (e.rhs) c = std::max(c, coordinate_count(*e.rhs));
    return c;
}

std::optional<std::vector<double>> extract_polynomial(const Expr& e, int max_degree) {
    if (coordinate_count(e) > 1) return std::nullopt;
    auto p = to_poly(e, max_degree);
    if (p && static_cast<int>(p->size()) > max_degree + 1) return std::nullopt;
    return p;
}

std::string to_string(const Expr& e) {
    std::ostringstream os;
    print(e, os);
    return os.str();
}

} // namespace shrinker
