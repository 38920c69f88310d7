#pragma once

#include <functional>
#include <initializer_list>
#include <span>
#include <string>
#include <utility>

namespace fif {

/// A continuous real-valued function on the domain, held as a callable.
/// Copies share the underlying evaluator.
class RealFunction {
public:
    using Evaluator = std::function<double(std::span<const double>)>;

    RealFunction() = default;
    RealFunction(Evaluator eval, std::string label = {})
        : eval_(std::move(eval)), label_(std::move(label)) {}

    double operator()(std::span<const double> X) const { return eval_(X); }
    double operator()(std::initializer_list<double> X) const {
        return eval_(std::span<const double>(X.begin(), X.size()));
    }

    bool valid() const noexcept { return static_cast<bool>(eval_); }
    const std::string& label() const noexcept { return label_; }

    static RealFunction constant(double c) {
        return RealFunction([c](std::span<const double>) { return c; }, std::to_string(c));
    }

private:
    Evaluator eval_;
    std::string label_;
};

}  // namespace fif
