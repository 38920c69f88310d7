#include "fif/expression.hpp"

#include <cctype>
#include <cmath>
#include <cstdlib>
#include <numbers>
#include <sstream>

#include "fif/errors.hpp"

namespace fif {

struct Expression::Node {
    enum class Kind { Number, Variable, FunctionValue, Negate, Add, Sub, Mul, Div, Pow, Call };
    enum class Builtin { Sin, Cos, Exp, Log, Abs, Sqrt, Min, Max };

    Kind kind;
    double number = 0.0;
    int var = 0;  // 0-based
    Builtin fn = Builtin::Sin;
    std::shared_ptr<const Node> a;
    std::shared_ptr<const Node> b;
};

namespace {

using Node = Expression::Node;
using Kind = Node::Kind;
using Builtin = Node::Builtin;
using NodePtr = std::shared_ptr<const Node>;

NodePtr make_number(double v) {
    auto n = std::make_shared<Node>();
    n->kind = Kind::Number;
    n->number = v;
    return n;
}

NodePtr make_node(Kind kind, NodePtr a, NodePtr b = nullptr) {
    auto n = std::make_shared<Node>();
    n->kind = kind;
    n->a = std::move(a);
    n->b = std::move(b);
    return n;
}

struct BuiltinSpec {
    const char* name;
    Builtin fn;
    int arity;
};

constexpr BuiltinSpec kBuiltins[] = {
    {"sin", Builtin::Sin, 1}, {"cos", Builtin::Cos, 1}, {"exp", Builtin::Exp, 1},
    {"log", Builtin::Log, 1}, {"abs", Builtin::Abs, 1}, {"sqrt", Builtin::Sqrt, 1},
    {"min", Builtin::Min, 2}, {"max", Builtin::Max, 2},
};

class Parser {
public:
    Parser(std::string_view src, bool allow_function_value)
        : src_(src), allow_f_(allow_function_value) {}

    NodePtr parse() {
        NodePtr root = parse_sum();
        skip_spaces();
        if (pos_ != src_.size()) fail("end of input");
        return root;
    }

    int max_variable() const noexcept { return max_variable_; }
    bool uses_function_value() const noexcept { return uses_f_; }

private:
    [[noreturn]] void fail(const std::string& expected) {
        std::ostringstream os;
        os << "at position " << pos_ + 1 << ": expected " << expected;
        if (pos_ < src_.size()) {
            os << ", found '" << src_[pos_] << "'";
        } else {
            os << ", found end of input";
        }
        raise(ErrorCode::SyntaxError, os.str());
    }

    void skip_spaces() {
        while (pos_ < src_.size() && std::isspace(static_cast<unsigned char>(src_[pos_]))) ++pos_;
    }

    bool consume(char c) {
        skip_spaces();
        if (pos_ < src_.size() && src_[pos_] == c) {
            ++pos_;
            return true;
        }
        return false;
    }

    char peek() {
        skip_spaces();
        return pos_ < src_.size() ? src_[pos_] : '\0';
    }

    NodePtr parse_sum() {
        NodePtr lhs = parse_product();
        for (;;) {
            if (consume('+')) {
                lhs = make_node(Kind::Add, lhs, parse_product());
            } else if (consume('-')) {
                lhs = make_node(Kind::Sub, lhs, parse_product());
            } else {
                return lhs;
            }
        }
    }

    NodePtr parse_product() {
        NodePtr lhs = parse_unary();
        for (;;) {
            if (consume('*')) {
                lhs = make_node(Kind::Mul, lhs, parse_unary());
            } else if (consume('/')) {
                lhs = make_node(Kind::Div, lhs, parse_unary());
            } else {
                return lhs;
            }
        }
    }

    NodePtr parse_unary() {
        if (consume('-')) return make_node(Kind::Negate, parse_unary());
        return parse_power();
    }

    NodePtr parse_power() {
        NodePtr base = parse_primary();
        if (consume('^')) {
            // Right-associative; the exponent may carry a unary minus.
            return make_node(Kind::Pow, base, parse_unary());
        }
        return base;
    }

    NodePtr parse_primary() {
        skip_spaces();
        if (pos_ >= src_.size()) fail("a number, variable or '('");
        const char c = src_[pos_];
        if (c == '(') {
            ++pos_;
            NodePtr inner = parse_sum();
            if (!consume(')')) fail("')'");
            return inner;
        }
        if (std::isdigit(static_cast<unsigned char>(c)) || c == '.') return parse_number();
        if (std::isalpha(static_cast<unsigned char>(c)) || c == '_') return parse_identifier();
        fail("a number, variable or '('");
    }

    NodePtr parse_number() {
        const char* begin = src_.data() + pos_;
        char* end = nullptr;
        const double v = std::strtod(begin, &end);
        if (end == begin) fail("a number");
        pos_ += static_cast<std::size_t>(end - begin);
        return make_number(v);
    }

    NodePtr parse_identifier() {
        const std::size_t start = pos_;
        while (pos_ < src_.size() &&
               (std::isalnum(static_cast<unsigned char>(src_[pos_])) || src_[pos_] == '_')) {
            ++pos_;
        }
        const std::string name(src_.substr(start, pos_ - start));
        if (name == "pi") return make_number(std::numbers::pi);
        if (name == "e") return make_number(std::numbers::e);
        if (name == "f") {
            if (!allow_f_) {
                raise(ErrorCode::UnknownIdentifier,
                      "'f' is only available in operator expressions");
            }
            uses_f_ = true;
            auto n = std::make_shared<Node>();
            n->kind = Kind::FunctionValue;
            return n;
        }
        if (name.size() >= 2 && name[0] == 'x') {
            bool digits = true;
            for (std::size_t i = 1; i < name.size(); ++i) {
                if (!std::isdigit(static_cast<unsigned char>(name[i]))) digits = false;
            }
            if (digits) {
                const int index = std::atoi(name.c_str() + 1);
                if (index < 1) {
                    raise(ErrorCode::UnknownIdentifier, "variable indices start at x1");
                }
                max_variable_ = std::max(max_variable_, index);
                auto n = std::make_shared<Node>();
                n->kind = Kind::Variable;
                n->var = index - 1;
                return n;
            }
        }
        for (const BuiltinSpec& spec : kBuiltins) {
            if (name == spec.name) {
                if (!consume('(')) fail("'(' after " + name);
                NodePtr first = parse_sum();
                NodePtr second;
                if (spec.arity == 2) {
                    if (!consume(',')) fail("',' in " + name + "(...)");
                    second = parse_sum();
                }
                if (!consume(')')) fail("')'");
                auto n = std::make_shared<Node>();
                n->kind = Kind::Call;
                n->fn = spec.fn;
                n->a = std::move(first);
                n->b = std::move(second);
                return n;
            }
        }
        raise(ErrorCode::UnknownIdentifier, "unknown identifier '" + name + "'");
    }

    std::string_view src_;
    bool allow_f_;
    std::size_t pos_ = 0;
    int max_variable_ = 0;
    bool uses_f_ = false;
};

double eval_node(const Node& node, std::span<const double> vars, const double* fval) {
    switch (node.kind) {
        case Kind::Number:
            return node.number;
        case Kind::Variable:
            if (static_cast<std::size_t>(node.var) >= vars.size()) {
                raise(ErrorCode::EvalDomainError,
                      "variable x" + std::to_string(node.var + 1) + " not bound (point has " +
                          std::to_string(vars.size()) + " coordinates)");
            }
            return vars[static_cast<std::size_t>(node.var)];
        case Kind::FunctionValue:
            if (fval == nullptr) {
                raise(ErrorCode::EvalDomainError, "'f' has no bound value in this context");
            }
            return *fval;
        case Kind::Negate:
            return -eval_node(*node.a, vars, fval);
        case Kind::Add:
            return eval_node(*node.a, vars, fval) + eval_node(*node.b, vars, fval);
        case Kind::Sub:
            return eval_node(*node.a, vars, fval) - eval_node(*node.b, vars, fval);
        case Kind::Mul:
            return eval_node(*node.a, vars, fval) * eval_node(*node.b, vars, fval);
        case Kind::Div: {
            const double denom = eval_node(*node.b, vars, fval);
            if (denom == 0.0) raise(ErrorCode::EvalDomainError, "division by zero");
            return eval_node(*node.a, vars, fval) / denom;
        }
        case Kind::Pow: {
            const double base = eval_node(*node.a, vars, fval);
            const double exponent = eval_node(*node.b, vars, fval);
            const double value = std::pow(base, exponent);
            if (!std::isfinite(value)) {
                raise(ErrorCode::EvalDomainError, "power produced a non-finite value");
            }
            return value;
        }
        case Kind::Call: {
            const double a = eval_node(*node.a, vars, fval);
            switch (node.fn) {
                case Builtin::Sin: return std::sin(a);
                case Builtin::Cos: return std::cos(a);
                case Builtin::Exp: {
                    const double value = std::exp(a);
                    if (!std::isfinite(value)) {
                        raise(ErrorCode::EvalDomainError, "exp overflow");
                    }
                    return value;
                }
                case Builtin::Log:
                    if (a <= 0.0) raise(ErrorCode::EvalDomainError, "log of a non-positive value");
                    return std::log(a);
                case Builtin::Abs: return std::abs(a);
                case Builtin::Sqrt:
                    if (a < 0.0) raise(ErrorCode::EvalDomainError, "sqrt of a negative value");
                    return std::sqrt(a);
                case Builtin::Min: return std::min(a, eval_node(*node.b, vars, fval));
                case Builtin::Max: return std::max(a, eval_node(*node.b, vars, fval));
            }
            return 0.0;
        }
    }
    return 0.0;
}

int precedence(const Node& node) {
    switch (node.kind) {
        case Kind::Add:
        case Kind::Sub: return 1;
        case Kind::Mul:
        case Kind::Div: return 2;
        case Kind::Negate: return 3;
        case Kind::Pow: return 4;
        default: return 5;
    }
}

void print_node(const Node& node, std::ostream& os);

void print_child(const Node& child, std::ostream& os, int min_prec) {
    const bool parens = precedence(child) < min_prec;
    if (parens) os << "(";
    print_node(child, os);
    if (parens) os << ")";
}

void print_node(const Node& node, std::ostream& os) {
    switch (node.kind) {
        case Kind::Number: {
            char buf[64];
            std::snprintf(buf, sizeof buf, "%.17g", node.number);
            if (node.number < 0) {
                os << "(" << buf << ")";
            } else {
                os << buf;
            }
            return;
        }
        case Kind::Variable:
            os << "x" << node.var + 1;
            return;
        case Kind::FunctionValue:
            os << "f";
            return;
        case Kind::Negate:
            os << "-";
            print_child(*node.a, os, 3);
            return;
        case Kind::Add:
            print_child(*node.a, os, 1);
            os << " + ";
            print_child(*node.b, os, 2);
            return;
        case Kind::Sub:
            print_child(*node.a, os, 1);
            os << " - ";
            print_child(*node.b, os, 2);
            return;
        case Kind::Mul:
            print_child(*node.a, os, 2);
            os << "*";
            print_child(*node.b, os, 3);
            return;
        case Kind::Div:
            print_child(*node.a, os, 2);
            os << "/";
            print_child(*node.b, os, 3);
            return;
        case Kind::Pow:
            print_child(*node.a, os, 5);
            os << "^";
            print_child(*node.b, os, 3);
            return;
        case Kind::Call: {
            const char* name = "";
            for (const BuiltinSpec& spec : kBuiltins) {
                if (spec.fn == node.fn) name = spec.name;
            }
            os << name << "(";
            print_node(*node.a, os);
            if (node.b) {
                os << ", ";
                print_node(*node.b, os);
            }
            os << ")";
            return;
        }
    }
}

}  // namespace

Expression::Expression(std::shared_ptr<const Node> root, int max_variable,
                       bool uses_function_value, std::string source)
    : root_(std::move(root)),
      max_variable_(max_variable),
      uses_function_value_(uses_function_value),
      source_(std::move(source)) {}

Expression Expression::parse(std::string_view src, bool allow_function_value) {
    Parser parser(src, allow_function_value);
    NodePtr root = parser.parse();
    return Expression(std::move(root), parser.max_variable(), parser.uses_function_value(),
                      std::string(src));
}

double Expression::evaluate(std::span<const double> vars) const {
    return eval_node(*root_, vars, nullptr);
}

double Expression::evaluate_with_value(std::span<const double> vars, double function_value) const {
    return eval_node(*root_, vars, &function_value);
}

std::string Expression::to_string() const {
    std::ostringstream os;
    print_node(*root_, os);
    return os.str();
}

RealFunction Expression::to_function() const {
    if (uses_function_value_) {
        raise(ErrorCode::EvalDomainError,
              "expression references 'f'; bind it through an operator");
    }
    Expression copy = *this;
    return RealFunction([copy](std::span<const double> X) { return copy.evaluate(X); },
                        source_);
}

}  // namespace fif
