#pragma once
// Radial profile expressions.
//
//   expr   := term (('+'|'-') term)*
//   term   := factor (('*'|'/') factor)*
//   factor := ('+'|'-') factor | base ('^' factor)?
//   base   := number | ident | func '(' expr ')' | '(' expr ')'
//   func   := exp | log | sinh | cosh | sqrt

#include <cctype>
#include <cmath>
#include <cstdio>
#include <map>
#include <set>
#include <string>
#include <string_view>
#include <vector>

#include "ahe/dual.hpp"
#include "ahe/error.hpp"

namespace ahe {

using Params = std::map<std::string, double>;

class Expression {
public:
    enum class Kind { Number, Variable, Negate, Add, Sub, Mul, Div, Pow, Call };
    enum class Func { Exp, Log, Sinh, Cosh, Sqrt };

    struct Node {
        Kind kind;
        double number = 0;
        std::string name;  // variable name
        Func func = Func::Exp;
        int a = -1, b = -1;
    };

    Expression() = default;

    static Expression parse(std::string_view text) {
        Parser p{text, {}};
        Expression e;
        e.source_ = std::string(text);
        p.skip();
        if (p.pos >= text.size()) throw ParseError("empty expression", p.pos);
        e.root_ = p.expr(e.nodes_);
        p.skip();
        if (p.pos != text.size()) throw ParseError("unexpected '" + std::string(1, text[p.pos]) + "'", p.pos);
        return e;
    }

    const std::string& source() const { return source_; }
    bool empty() const { return nodes_.empty(); }

    std::set<std::string> free_variables() const {
        std::set<std::string> s;
        for (const auto& n : nodes_)
            if (n.kind == Kind::Variable) s.insert(n.name);
        return s;
    }

    // Canonical text with minimal parentheses and 17 significant digits.
    std::string to_string() const { return print(root_, 0); }

    // Substitute parameters; the only remaining free variable must be `var`.
    Expression bind(const Params& params, const std::string& var = "r") const {
        Expression e = *this;
        e.var_ = var;
        for (auto& n : e.nodes_) {
            if (n.kind != Kind::Variable || n.name == var) continue;
            auto it = params.find(n.name);
            if (it == params.end()) throw Error("metric_library", "unknown free variable '" + n.name + "' in '" + source_ + "'");
            n.kind = Kind::Number;
            n.number = it->second;
        }
        e.bound_ = true;
        e.analyse();
        return e;
    }

    bool bound() const { return bound_; }

    template <class T>
    T eval(const T& r) const {
        if (!bound_) throw Error("metric_library", "expression '" + source_ + "' evaluated before binding");
        return eval_node(root_, r);
    }

    double operator()(double r) const { return eval(r); }

private:
    struct Parser {
        std::string_view s;
        std::size_t pos;

        void skip() {
            while (pos < s.size() && std::isspace(static_cast<unsigned char>(s[pos]))) ++pos;
        }
        bool accept(char c) {
            skip();
            if (pos < s.size() && s[pos] == c) {
                ++pos;
                return true;
            }
            return false;
        }
        int push(std::vector<Node>& nodes, Node n) {
            nodes.push_back(std::move(n));
            return int(nodes.size()) - 1;
        }
        int expr(std::vector<Node>& nodes) {
            int lhs = term(nodes);
            for (;;) {
                if (accept('+')) lhs = push(nodes, {Kind::Add, 0, {}, Func::Exp, lhs, term(nodes)});
                else if (accept('-')) lhs = push(nodes, {Kind::Sub, 0, {}, Func::Exp, lhs, term(nodes)});
                else return lhs;
            }
        }
        int term(std::vector<Node>& nodes) {
            int lhs = factor(nodes);
            for (;;) {
                if (accept('*')) lhs = push(nodes, {Kind::Mul, 0, {}, Func::Exp, lhs, factor(nodes)});
                else if (accept('/')) lhs = push(nodes, {Kind::Div, 0, {}, Func::Exp, lhs, factor(nodes)});
                else return lhs;
            }
        }
        int factor(std::vector<Node>& nodes) {
            if (accept('-')) return push(nodes, {Kind::Negate, 0, {}, Func::Exp, factor(nodes), -1});
            if (accept('+')) return factor(nodes);
            int b = base(nodes);
            if (accept('^')) return push(nodes, {Kind::Pow, 0, {}, Func::Exp, b, factor(nodes)});
            return b;
        }
        int base(std::vector<Node>& nodes) {
            skip();
            if (pos >= s.size()) throw ParseError("unexpected end of input", pos);
            char c = s[pos];
            if (std::isdigit(static_cast<unsigned char>(c)) || c == '.') return number(nodes);
            if (std::isalpha(static_cast<unsigned char>(c)) || c == '_') {
                std::size_t start = pos;
                while (pos < s.size() && (std::isalnum(static_cast<unsigned char>(s[pos])) || s[pos] == '_')) ++pos;
                std::string id(s.substr(start, pos - start));
                skip();
                if (pos < s.size() && s[pos] == '(') {
                    Func f;
                    if (id == "exp") f = Func::Exp;
                    else if (id == "log") f = Func::Log;
                    else if (id == "sinh") f = Func::Sinh;
                    else if (id == "cosh") f = Func::Cosh;
                    else if (id == "sqrt") f = Func::Sqrt;
                    else throw ParseError("unknown function '" + id + "'", start);
                    ++pos;
                    int arg = expr(nodes);
                    if (!accept(')')) throw ParseError("expected ')'", pos);
                    return push(nodes, {Kind::Call, 0, {}, f, arg, -1});
                }
                if (id == "exp" || id == "log" || id == "sinh" || id == "cosh" || id == "sqrt")
                    throw ParseError("function '" + id + "' needs an argument", start);
                return push(nodes, {Kind::Variable, 0, id, Func::Exp, -1, -1});
            }
            if (c == '(') {
                ++pos;
                int e = expr(nodes);
                if (!accept(')')) throw ParseError("expected ')'", pos);
                return e;
            }
            throw ParseError("unexpected '" + std::string(1, c) + "'", pos);
        }
        int number(std::vector<Node>& nodes) {
            std::size_t start = pos;
            bool digits = false;
            while (pos < s.size() && std::isdigit(static_cast<unsigned char>(s[pos]))) ++pos, digits = true;
            if (pos < s.size() && s[pos] == '.') {
                ++pos;
                while (pos < s.size() && std::isdigit(static_cast<unsigned char>(s[pos]))) ++pos, digits = true;
            }
            if (!digits) throw ParseError("malformed number", start);
            if (pos < s.size() && (s[pos] == 'e' || s[pos] == 'E')) {
                std::size_t save = pos++;
                if (pos < s.size() && (s[pos] == '+' || s[pos] == '-')) ++pos;
                if (pos < s.size() && std::isdigit(static_cast<unsigned char>(s[pos]))) {
                    while (pos < s.size() && std::isdigit(static_cast<unsigned char>(s[pos]))) ++pos;
                } else {
                    pos = save;
                }
            }
            double v = std::stod(std::string(s.substr(start, pos - start)));
            return push(nodes, {Kind::Number, v, {}, Func::Exp, -1, -1});
        }
    };

    static int precedence(const Node& n) {
        switch (n.kind) {
            case Kind::Add:
            case Kind::Sub: return 1;
            case Kind::Mul:
            case Kind::Div: return 2;
            case Kind::Negate: return 3;
            case Kind::Pow: return 4;
            default: return 5;
        }
    }

    static std::string format_number(double v) {
        char buf[64];
        std::snprintf(buf, sizeof buf, "%.17g", v);
        return buf;
    }

    std::string print(int i, int min_prec) const {
        const Node& n = nodes_[i];
        std::string out;
        switch (n.kind) {
            case Kind::Number:
                out = format_number(n.number);
                // a bound negative parameter prints as a negation
                if (n.number < 0 || std::signbit(n.number)) {
                    out = "-" + format_number(-n.number);
                    return min_prec > 3 ? "(" + out + ")" : out;
                }
                break;
            case Kind::Variable: out = n.name; break;
            case Kind::Negate: out = "-" + print(n.a, 3); break;
            case Kind::Add: out = print(n.a, 1) + "+" + print(n.b, 2); break;
            case Kind::Sub: out = print(n.a, 1) + "-" + print(n.b, 2); break;
            case Kind::Mul: out = print(n.a, 2) + "*" + print(n.b, 3); break;
            case Kind::Div: out = print(n.a, 2) + "/" + print(n.b, 3); break;
            case Kind::Pow: out = print(n.a, 5) + "^" + print(n.b, 3); break;
            case Kind::Call: {
                static const char* names[] = {"exp", "log", "sinh", "cosh", "sqrt"};
                out = std::string(names[int(n.func)]) + "(" + print(n.a, 0) + ")";
                break;
            }
        }
        return precedence(n) < min_prec ? "(" + out + ")" : out;
    }

    // Mark subtrees free of the radial variable and cache their value.
    void analyse() {
        constant_.assign(nodes_.size(), false);
        cval_.assign(nodes_.size(), 0.0);
        for (std::size_t i = 0; i < nodes_.size(); ++i) {  // children precede parents
            const Node& n = nodes_[i];
            bool c = n.kind == Kind::Number || (n.kind != Kind::Variable && (n.a < 0 || constant_[n.a]) &&
                                                (n.b < 0 || constant_[n.b]));
            if (c) cval_[i] = eval_node<double>(int(i), 0.0);
            constant_[i] = c;
        }
    }

    template <class T>
    T eval_node(int i, const T& r) const {
        using std::cosh;
        using std::exp;
        using std::log;
        using std::pow;
        using std::sinh;
        using std::sqrt;
        const Node& n = nodes_[i];
        if (!constant_.empty() && constant_[i]) return T(cval_[i]);
        switch (n.kind) {
            case Kind::Number: return T(n.number);
            case Kind::Variable: return r;
            case Kind::Negate: return -eval_node(n.a, r);
            case Kind::Add: return eval_node(n.a, r) + eval_node(n.b, r);
            case Kind::Sub: return eval_node(n.a, r) - eval_node(n.b, r);
            case Kind::Mul: return eval_node(n.a, r) * eval_node(n.b, r);
            case Kind::Div: return eval_node(n.a, r) / eval_node(n.b, r);
            case Kind::Pow: {
                T base = eval_node(n.a, r);
                if (!constant_.empty() && constant_[n.b]) {
                    double p = cval_[n.b];
                    if (p == std::round(p) && std::abs(p) <= 64) return ipow(base, int(p));
                    return pow(base, p);
                }
                return exp(eval_node(n.b, r) * log(base));
            }
            case Kind::Call: {
                T x = eval_node(n.a, r);
                switch (n.func) {
                    case Func::Exp: return exp(x);
                    case Func::Log: return log(x);
                    case Func::Sinh: return sinh(x);
                    case Func::Cosh: return cosh(x);
                    case Func::Sqrt: return sqrt(x);
                }
            }
        }
        return T(0.0);
    }

    std::vector<Node> nodes_;
    int root_ = -1;
    std::string source_;
    std::string var_ = "r";
    bool bound_ = false;
    std::vector<bool> constant_;
    std::vector<double> cval_;
};

}  // namespace ahe
