#pragma once

// Minimal arithmetic expressions for model files. Grammar:
//
//   expr   := term (('+' | '-') term)*
//   term   := unary (('*' | '/') unary)*
//   unary  := '-' unary | power
//   power  := atom ('^' unary)?          right associative
//   atom   := number | variable | func '(' expr ')' | '(' expr ')'
//
// Variables are x1..xN ('x' is an alias for x1); functions are sqrt, sin,
// cos, exp, ln. Deliberately no conditionals and no user functions so model
// files stay auditable and evaluation stays side-effect free.

#include <memory>
#include <span>
#include <string>
#include <string_view>

namespace qest {

class Expr {
public:
    // Throws ValidationError with the byte offset on syntax errors and on
    // unknown identifiers.
    static Expr parse(std::string_view src);

    // IEEE double evaluation; vars[i] is the value of x(i+1). Throws
    // NumericalError naming the offending node on domain violations
    // (sqrt of negative, ln of non-positive, division by zero, negative
    // base raised to a non-integer power).
    double eval(std::span<const double> vars) const;

    // Canonical fully parenthesized form; parse(str()) reproduces the tree.
    std::string str() const;

    // Highest 1-based variable index used, 0 for constant expressions.
    int max_var_index() const;

    struct Node;

private:
    explicit Expr(std::shared_ptr<const Node> root) : root_(std::move(root)) {}
    std::shared_ptr<const Node> root_;
};

}  // namespace qest
