#pragma once

#include <memory>
#include <span>
#include <string>
#include <string_view>

#include "fif/errors.hpp"
#include "fif/real_function.hpp"

namespace fif {

/// A small, pure arithmetic expression language over variables x1..xn:
/// + - * / ^ (right-associative, binds tighter than unary minus), unary
/// minus, sin cos exp log abs sqrt min max, constants pi and e. Operator
/// expressions may additionally reference `f`, the value of the transformed
/// function at the evaluation point.
class Expression {
public:
    static Expression parse(std::string_view src, bool allow_function_value = false);

    double evaluate(std::span<const double> vars) const;
    double evaluate(std::initializer_list<double> vars) const {
        return evaluate(std::span<const double>(vars.begin(), vars.size()));
    }
    /// Evaluation with the `f` placeholder bound to `function_value`.
    double evaluate_with_value(std::span<const double> vars, double function_value) const;

    /// Highest variable index referenced (x3 -> 3); 0 for constants.
    int variable_count() const noexcept { return max_variable_; }
    bool uses_function_value() const noexcept { return uses_function_value_; }
    const std::string& source() const noexcept { return source_; }

    /// Round-trippable rendering with minimal parentheses.
    std::string to_string() const;

    RealFunction to_function() const;

    struct Node;

private:
    Expression(std::shared_ptr<const Node> root, int max_variable, bool uses_function_value,
               std::string source);
    std::shared_ptr<const Node> root_;
    int max_variable_ = 0;
    bool uses_function_value_ = false;
    std::string source_;
};

}  // namespace fif
