#include "qest/expr.hpp"

#include "qest/errors.hpp"

#include <algorithm>
#include <cctype>
#include <cmath>
#include <cstdio>
#include <cstdlib>
#include <sstream>
#include <utility>
#include <vector>

namespace qest {

namespace {

enum class NodeKind { number, variable, unary_neg, add, sub, mul, div, pow, call };
enum class Func { sqrt_fn, sin_fn, cos_fn, exp_fn, ln_fn };

const char* func_name(Func f) {
    switch (f) {
        case Func::sqrt_fn: return "sqrt";
        case Func::sin_fn: return "sin";
        case Func::cos_fn: return "cos";
        case Func::exp_fn: return "exp";
        case Func::ln_fn: return "ln";
    }
    return "?";
}

}  // namespace

struct Expr::Node {
    NodeKind kind;
    double number = 0.0;
    int var_index = 0;  // 1-based
    Func func = Func::sqrt_fn;
    std::shared_ptr<const Node> lhs, rhs;
};

namespace {

using NodePtr = std::shared_ptr<const Expr::Node>;

NodePtr make_number(double v) {
    auto n = std::make_shared<Expr::Node>();
    n->kind = NodeKind::number;
    n->number = v;
    return n;
}

NodePtr make_var(int index) {
    auto n = std::make_shared<Expr::Node>();
    n->kind = NodeKind::variable;
    n->var_index = index;
    return n;
}

NodePtr make_unary(NodePtr a) {
    auto n = std::make_shared<Expr::Node>();
    n->kind = NodeKind::unary_neg;
    n->lhs = std::move(a);
    return n;
}

NodePtr make_binary(NodeKind kind, NodePtr a, NodePtr b) {
    auto n = std::make_shared<Expr::Node>();
    n->kind = kind;
    n->lhs = std::move(a);
    n->rhs = std::move(b);
    return n;
}

NodePtr make_call(Func f, NodePtr a) {
    auto n = std::make_shared<Expr::Node>();
    n->kind = NodeKind::call;
    n->func = f;
    n->lhs = std::move(a);
    return n;
}

class Parser {
public:
    explicit Parser(std::string_view src) : src_(src) {}

    NodePtr run() {
        NodePtr e = parse_expr();
        skip_ws();
        if (pos_ != src_.size()) fail("unexpected trailing input");
        return e;
    }

private:
    std::string_view src_;
    std::size_t pos_ = 0;

    [[noreturn]] void fail(const std::string& what, std::size_t at) const {
        std::ostringstream os;
        os << "syntax error at offset " << at << ": " << what;
        throw ValidationError(os.str());
    }
    [[noreturn]] void fail(const std::string& what) const { fail(what, pos_); }

    void skip_ws() {
        while (pos_ < src_.size() && std::isspace(static_cast<unsigned char>(src_[pos_]))) ++pos_;
    }

    bool peek_is(char c) {
        skip_ws();
        return pos_ < src_.size() && src_[pos_] == c;
    }

    bool consume(char c) {
        if (peek_is(c)) {
            ++pos_;
            return true;
        }
        return false;
    }

    NodePtr parse_expr() {
        NodePtr lhs = parse_term();
        for (;;) {
            if (consume('+')) {
                lhs = make_binary(NodeKind::add, lhs, parse_term());
            } else if (consume('-')) {
                lhs = make_binary(NodeKind::sub, lhs, parse_term());
            } else {
                return lhs;
            }
        }
    }

    NodePtr parse_term() {
        NodePtr lhs = parse_unary();
        for (;;) {
            if (consume('*')) {
                lhs = make_binary(NodeKind::mul, lhs, parse_unary());
            } else if (consume('/')) {
                lhs = make_binary(NodeKind::div, lhs, parse_unary());
            } else {
                return lhs;
            }
        }
    }

    NodePtr parse_unary() {
        if (consume('-')) return make_unary(parse_unary());
        return parse_power();
    }

    NodePtr parse_power() {
        NodePtr base = parse_atom();
        // '^' binds tighter than unary minus on the left but accepts a signed
        // exponent on the right: -x^2 is -(x^2), 2^-3 is 2^(-3).
        if (consume('^')) return make_binary(NodeKind::pow, base, parse_unary());
        return base;
    }

    NodePtr parse_atom() {
        skip_ws();
        if (pos_ >= src_.size()) fail("unexpected end of input");
        const char c = src_[pos_];
        if (c == '(') {
            ++pos_;
            NodePtr e = parse_expr();
            if (!consume(')')) fail("expected ')'");
            return e;
        }
        if (std::isdigit(static_cast<unsigned char>(c)) || c == '.') return parse_number();
        if (std::isalpha(static_cast<unsigned char>(c)) || c == '_') return parse_identifier();
        fail(std::string("unexpected character '") + c + "'");
    }

    NodePtr parse_number() {
        const std::size_t start = pos_;
        while (pos_ < src_.size() &&
               (std::isdigit(static_cast<unsigned char>(src_[pos_])) || src_[pos_] == '.')) {
            ++pos_;
        }
        if (pos_ < src_.size() && (src_[pos_] == 'e' || src_[pos_] == 'E')) {
            std::size_t exp_pos = pos_ + 1;
            if (exp_pos < src_.size() && (src_[exp_pos] == '+' || src_[exp_pos] == '-')) ++exp_pos;
            if (exp_pos < src_.size() && std::isdigit(static_cast<unsigned char>(src_[exp_pos]))) {
                pos_ = exp_pos;
                while (pos_ < src_.size() && std::isdigit(static_cast<unsigned char>(src_[pos_]))) ++pos_;
            }
        }
        const std::string text(src_.substr(start, pos_ - start));
        try {
            std::size_t used = 0;
            const double v = std::stod(text, &used);
            if (used != text.size()) fail("malformed number", start);
            return make_number(v);
        } catch (const std::exception&) {
            fail("malformed number", start);
        }
    }

    NodePtr parse_identifier() {
        const std::size_t start = pos_;
        while (pos_ < src_.size() &&
               (std::isalnum(static_cast<unsigned char>(src_[pos_])) || src_[pos_] == '_')) {
            ++pos_;
        }
        const std::string name(src_.substr(start, pos_ - start));
        if (name == "x") return make_var(1);
        if (name.size() > 1 && name[0] == 'x') {
            bool digits = true;
            for (std::size_t i = 1; i < name.size(); ++i) {
                if (!std::isdigit(static_cast<unsigned char>(name[i]))) digits = false;
            }
            if (digits) {
                const long idx = std::strtol(name.c_str() + 1, nullptr, 10);
                if (idx < 1 || idx > 1024) fail("variable index out of range", start);
                return make_var(static_cast<int>(idx));
            }
        }
        Func f;
        if (name == "sqrt") f = Func::sqrt_fn;
        else if (name == "sin") f = Func::sin_fn;
        else if (name == "cos") f = Func::cos_fn;
        else if (name == "exp") f = Func::exp_fn;
        else if (name == "ln") f = Func::ln_fn;
        else {
            std::ostringstream os;
            os << "unknown identifier '" << name << "' at offset " << start;
            throw ValidationError(os.str());
        }
        if (!consume('(')) fail(std::string("expected '(' after ") + name);
        NodePtr arg = parse_expr();
        if (!consume(')')) fail("expected ')'");
        return make_call(f, arg);
    }
};

std::string print_node(const Expr::Node& n);

[[noreturn]] void domain_fail(const Expr::Node& n, const std::string& what) {
    throw NumericalError("eval: " + what + " in node " + print_node(n));
}

double eval_node(const Expr::Node& n, std::span<const double> vars) {
    switch (n.kind) {
        case NodeKind::number:
            return n.number;
        case NodeKind::variable:
            if (n.var_index > static_cast<int>(vars.size())) {
                std::ostringstream os;
                os << "eval: variable x" << n.var_index << " needs " << n.var_index
                   << " parameters, got " << vars.size();
                throw ValidationError(os.str());
            }
            return vars[static_cast<std::size_t>(n.var_index - 1)];
        case NodeKind::unary_neg:
            return -eval_node(*n.lhs, vars);
        case NodeKind::add:
            return eval_node(*n.lhs, vars) + eval_node(*n.rhs, vars);
        case NodeKind::sub:
            return eval_node(*n.lhs, vars) - eval_node(*n.rhs, vars);
        case NodeKind::mul:
            return eval_node(*n.lhs, vars) * eval_node(*n.rhs, vars);
        case NodeKind::div: {
            const double den = eval_node(*n.rhs, vars);
            if (den == 0.0) domain_fail(n, "division by zero");
            return eval_node(*n.lhs, vars) / den;
        }
        case NodeKind::pow: {
            const double base = eval_node(*n.lhs, vars);
            const double expo = eval_node(*n.rhs, vars);
            if (base < 0.0 && expo != std::rint(expo)) {
                domain_fail(n, "negative base with non-integer exponent");
            }
            const double r = std::pow(base, expo);
            if (!std::isfinite(r)) domain_fail(n, "non-finite power");
            return r;
        }
        case NodeKind::call: {
            const double a = eval_node(*n.lhs, vars);
            switch (n.func) {
                case Func::sqrt_fn:
                    if (a < 0.0) domain_fail(n, "sqrt of negative value");
                    return std::sqrt(a);
                case Func::sin_fn:
                    return std::sin(a);
                case Func::cos_fn:
                    return std::cos(a);
                case Func::exp_fn:
                    return std::exp(a);
                case Func::ln_fn:
                    if (a <= 0.0) domain_fail(n, "ln of non-positive value");
                    return std::log(a);
            }
            break;
        }
    }
    throw NumericalError("eval: corrupt expression tree");
}

std::string print_number(double v) {
    char buf[40];
    std::snprintf(buf, sizeof(buf), "%.17g", v);
    return buf;
}

std::string print_node(const Expr::Node& n) {
    switch (n.kind) {
        case NodeKind::number:
            return print_number(n.number);
        case NodeKind::variable:
            return "x" + std::to_string(n.var_index);
        case NodeKind::unary_neg:
            return "(-" + print_node(*n.lhs) + ")";
        case NodeKind::add:
            return "(" + print_node(*n.lhs) + "+" + print_node(*n.rhs) + ")";
        case NodeKind::sub:
            return "(" + print_node(*n.lhs) + "-" + print_node(*n.rhs) + ")";
        case NodeKind::mul:
            return "(" + print_node(*n.lhs) + "*" + print_node(*n.rhs) + ")";
        case NodeKind::div:
            return "(" + print_node(*n.lhs) + "/" + print_node(*n.rhs) + ")";
        case NodeKind::pow:
            return "(" + print_node(*n.lhs) + "^" + print_node(*n.rhs) + ")";
        case NodeKind::call:
            return std::string(func_name(n.func)) + "(" + print_node(*n.lhs) + ")";
    }
    return "?";
}

int max_var(const Expr::Node& n) {
    int m = n.kind == NodeKind::variable ? n.var_index : 0;
    if (n.lhs) m = std::max(m, max_var(*n.lhs));
    if (n.rhs) m = std::max(m, max_var(*n.rhs));
    return m;
}

}  // namespace

Expr Expr::parse(std::string_view src) { return Expr(Parser(src).run()); }

double Expr::eval(std::span<const double> vars) const { return eval_node(*root_, vars); }

std::string Expr::str() const { return print_node(*root_); }

int Expr::max_var_index() const { return max_var(*root_); }

}  // namespace qest
