#include "robinlap/expression.hpp"

#include "robinlap/error.hpp"

#include <algorithm>
#include <cctype>
#include <cmath>
#include <cstdlib>
#include <functional>
#include <map>
#include <vector>

namespace robinlap {

struct Expression::Node {
    enum class Kind { constant, coordinate, radius, unary, binary, call } kind = Kind::constant;
    double value = 0.0;
    int axis = -1;  // -1: "x" alone
    char op = 0;
    std::string name;
    std::vector<std::shared_ptr<const Node>> args;

    double eval(std::span<const double> x) const;
};

namespace {

using NodePtr = std::shared_ptr<const Expression::Node>;
using Kind = Expression::Node::Kind;

double radius(std::span<const double> x)
{
    double s = 0.0;
    for (double v : x)
        s += v * v;
    return std::sqrt(s);
}

const std::map<std::string, int, std::less<>>& arity()
{
    static const std::map<std::string, int, std::less<>> table = {
        {"abs", 1}, {"sqrt", 1}, {"exp", 1}, {"log", 1}, {"sin", 1}, {"cos", 1}, {"tan", 1}, {"sign", 1},
        {"ball", 1}, {"box", 1}, {"step", 1}, {"min", 2}, {"max", 2}, {"pow", 2},
    };
    return table;
}

class Parser {
public:
    explicit Parser(std::string_view text) : s_(text) {}

    NodePtr parse()
    {
        auto e = expr();
        skip();
        if (pos_ != s_.size())
            error("unexpected character");
        return e;
    }

private:
    [[noreturn]] void error(const std::string& what) const
    {
        throw Error(ErrorKind::config_invalid,
                    "expression '" + std::string(s_) + "': " + what + " at position " + std::to_string(pos_));
    }

    void skip()
    {
        while (pos_ < s_.size() && std::isspace(static_cast<unsigned char>(s_[pos_])))
            ++pos_;
    }

    bool accept(char c)
    {
        skip();
        if (pos_ < s_.size() && s_[pos_] == c) {
            ++pos_;
            return true;
        }
        return false;
    }

    void expect(char c)
    {
        if (!accept(c))
            error(std::string("expected '") + c + "'");
    }

    static NodePtr make(Kind k, char op, std::vector<NodePtr> args, std::string name = {})
    {
        auto n = std::make_shared<Expression::Node>();
        n->kind = k;
        n->op = op;
        n->args = std::move(args);
        n->name = std::move(name);
        return n;
    }

    NodePtr expr()
    {
        auto lhs = term();
        for (;;) {
            if (accept('+'))
                lhs = make(Kind::binary, '+', {lhs, term()});
            else if (accept('-'))
                lhs = make(Kind::binary, '-', {lhs, term()});
            else
                return lhs;
        }
    }

    NodePtr term()
    {
        auto lhs = unary();
        for (;;) {
            if (accept('*'))
                lhs = make(Kind::binary, '*', {lhs, unary()});
            else if (accept('/'))
                lhs = make(Kind::binary, '/', {lhs, unary()});
            else
                return lhs;
        }
    }

    NodePtr unary()
    {
        if (accept('-'))
            return make(Kind::unary, '-', {unary()});
        if (accept('+'))
            return unary();
        return power();
    }

    NodePtr power()
    {
        auto base = primary();
        if (accept('^'))
            return make(Kind::binary, '^', {base, unary()});
        return base;
    }

    std::string identifier()
    {
        const std::size_t start = pos_;
        while (pos_ < s_.size() && (std::isalnum(static_cast<unsigned char>(s_[pos_])) || s_[pos_] == '_'))
            ++pos_;
        return std::string(s_.substr(start, pos_ - start));
    }

    NodePtr primary()
    {
        skip();
        if (pos_ >= s_.size())
            error("unexpected end of input");
        const char c = s_[pos_];
        if (std::isdigit(static_cast<unsigned char>(c)) || c == '.') {
            const std::string rest(s_.substr(pos_));
            char* end = nullptr;
            const double v = std::strtod(rest.c_str(), &end);
            if (end == rest.c_str())
                error("malformed number");
            pos_ += static_cast<std::size_t>(end - rest.c_str());
            auto n = std::make_shared<Expression::Node>();
            n->value = v;
            return n;
        }
        if (accept('(')) {
            auto e = expr();
            expect(')');
            return e;
        }
        if (accept('|')) {
            // |x| is the Euclidean norm of the point.
            const std::size_t save = pos_;
            skip();
            if (identifier() == "x" && accept('|'))
                return make(Kind::radius, 0, {});
            pos_ = save;
            auto e = expr();
            expect('|');
            return make(Kind::call, 0, {e}, "abs");
        }
        if (std::isalpha(static_cast<unsigned char>(c))) {
            const std::string id = identifier();
            if (id == "pi" || id == "e") {
                auto n = std::make_shared<Expression::Node>();
                n->value = id == "pi" ? 3.14159265358979323846 : 2.71828182845904523536;
                return n;
            }
            if (id == "r")
                return make(Kind::radius, 0, {});
            if (id == "x" || id == "x1" || id == "x2") {
                auto n = std::make_shared<Expression::Node>();
                n->kind = Kind::coordinate;
                n->axis = id == "x" ? -1 : id[1] - '1';
                return n;
            }
            const auto it = arity().find(id);
            if (it == arity().end())
                error("unknown identifier '" + id + "'");
            expect('(');
            std::vector<NodePtr> args{expr()};
            for (int k = 1; k < it->second; ++k) {
                expect(',');
                args.push_back(expr());
            }
            expect(')');
            return make(Kind::call, 0, std::move(args), id);
        }
        error(std::string("unexpected '") + c + "'");
    }

    std::string_view s_;
    std::size_t pos_ = 0;
};

} // namespace

double Expression::Node::eval(std::span<const double> x) const
{
    switch (kind) {
    case Kind::constant:
        return value;
    case Kind::radius:
        return radius(x);
    case Kind::coordinate: {
        if (axis < 0) {
            if (x.size() != 1)
                throw Error(ErrorKind::invalid_argument, "'x' is ambiguous on a 2-D boundary; use x1, x2 or |x|");
            return x[0];
        }
        if (static_cast<std::size_t>(axis) >= x.size())
            throw Error(ErrorKind::invalid_argument, "coordinate x" + std::to_string(axis + 1) + " does not exist");
        return x[static_cast<std::size_t>(axis)];
    }
    case Kind::unary:
        return -args[0]->eval(x);
    case Kind::binary: {
        const double a = args[0]->eval(x);
        const double b = args[1]->eval(x);
        switch (op) {
        case '+': return a + b;
        case '-': return a - b;
        case '*': return a * b;
        case '/': return a / b;
        default: return std::pow(a, b);
        }
    }
    case Kind::call: {
        const double a = args[0]->eval(x);
        if (name == "abs") return std::abs(a);
        if (name == "sqrt") return std::sqrt(a);
        if (name == "exp") return std::exp(a);
        if (name == "log") return std::log(a);
        if (name == "sin") return std::sin(a);
        if (name == "cos") return std::cos(a);
        if (name == "tan") return std::tan(a);
        if (name == "sign") return static_cast<double>((a > 0.0) - (a < 0.0));
        if (name == "step") return a >= 0.0 ? 1.0 : 0.0;
        if (name == "ball") return radius(x) <= a ? 1.0 : 0.0;
        if (name == "box") {
            double m = 0.0;
            for (double v : x)
                m = std::max(m, std::abs(v));
            return m <= a ? 1.0 : 0.0;
        }
        const double b = args[1]->eval(x);
        if (name == "min") return std::min(a, b);
        if (name == "max") return std::max(a, b);
        return std::pow(a, b);
    }
    }
    return 0.0;
}

Expression Expression::parse(std::string_view text)
{
    Expression e;
    e.root_ = Parser(text).parse();
    e.text_ = std::string(text);
    return e;
}

double Expression::operator()(std::span<const double> x) const { return root_->eval(x); }

} // namespace robinlap
