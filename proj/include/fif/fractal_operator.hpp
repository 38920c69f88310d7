#pragma once

#include <functional>
#include <optional>
#include <span>
#include <string>
#include <utility>
#include <vector>

#include "fif/alpha_fractal.hpp"
#include "fif/expression.hpp"
#include "fif/rb.hpp"

namespace fif {

/// A transform L on continuous functions, used to derive base functions
/// b = L(f). Not assumed linear; linearity and a Lipschitz constant are
/// declared capabilities. Admissibility (corner agreement L(f) = f at the
/// 2^n domain corners) is checked per call, not assumed.
class FunctionOperator {
public:
    using Transform = std::function<RealFunction(const RealFunction&, const GridPartition&)>;

    FunctionOperator(std::string name, Transform transform, bool linear = false,
                     std::optional<double> lipschitz = std::nullopt);

    RealFunction operator()(const RealFunction& f, const GridPartition& grid) const {
        return transform_(f, grid);
    }
    const std::string& name() const noexcept { return name_; }
    bool declared_linear() const noexcept { return linear_; }
    std::optional<double> declared_lipschitz() const noexcept { return lipschitz_; }

    static FunctionOperator identity();
    /// Multilinear interpolant of the argument's corner values (linear,
    /// Lipschitz constant 1, always admissible).
    static FunctionOperator corner_interpolant();
    /// f(a + b - x) per axis: a sup-norm isometry, generally not admissible.
    static FunctionOperator reflection();
    /// Pointwise expression over x1..xn and `f` (the argument's value at the
    /// point): L(g)(X) = expr(X, g(X)).
    static FunctionOperator pointwise(Expression expr, bool linear = false,
                                      std::optional<double> lipschitz = std::nullopt);
    /// Built-in operator by name ("identity", "corner", "reflection").
    static FunctionOperator named(const std::string& name);

private:
    std::string name_;
    Transform transform_;
    bool linear_;
    std::optional<double> lipschitz_;
};

struct AdmissibilityReport {
    bool passed = true;
    double max_residual = 0.0;
    double tolerance = 0.0;
    std::vector<std::string> failures;
};

/// Corner agreement of L(f) with f, for every sample function.
AdmissibilityReport check_admissible(const FunctionOperator& op,
                                     std::span<const RealFunction> samples,
                                     const GridPartition& grid, double tol = 1e-10);
AdmissibilityReport verify_admissible(const FunctionOperator& op,
                                      std::span<const RealFunction> samples,
                                      const GridPartition& grid, double tol = 1e-10);

/// The fractal operator: solves the perturbation of f with base b = L(f).
AlphaFractalResult apply_fractal_operator(const FunctionOperator& op, const ScalingFunction& alpha,
                                          const GridPartition& grid, const RealFunction& f,
                                          const SolveOptions& opts = {});

/// Max lattice ratio ||L(f)-L(g)|| / ||f-g|| over the pairs; a lower bound of
/// the Lipschitz constant.
double estimate_lipschitz(const FunctionOperator& op,
                          std::span<const std::pair<RealFunction, RealFunction>> pairs,
                          const GridPartition& grid, int refinement);

struct OperatorBoundReport {
    double alpha_bound = 0.0;
    /// Constants of both inequalities: ||F(f)|| <= a ||f|| + b ||L(f)|| and
    /// ||F(f)-F(g)|| <= a ||f-g|| + b ||L(f)-L(g)||, with a = 1/(1-alpha)
    /// and b = alpha/(1-alpha).
    double constant_a = 0.0;
    double constant_b = 0.0;
    double operator_lipschitz = 0.0;  // declared or estimated |L|
    std::size_t samples_checked = 0;
    std::size_t pairs_checked = 0;
    /// Smallest bound-minus-value margins observed (negative = violation).
    double min_bounded_slack = 0.0;
    double min_lipschitz_slack = 0.0;
    /// Max ratio ||F(f)-F(g)|| / ||f-g|| over the pairs.
    double empirical_operator_lipschitz = 0.0;
    /// (1 + alpha * |L|) / (1 - alpha).
    double operator_lipschitz_bound = 0.0;
    double rho_estimate = 0.0;
    double quasibound_estimate = 0.0;
    double tolerance = 0.0;
    bool passed = true;
    std::vector<std::string> failures;
};

/// Checks the relative-boundedness inequality on every sample and the
/// relative-Lipschitz inequality on every pair, with the explicit constants
/// alpha/(1-alpha) and 1/(1-alpha).
OperatorBoundReport verify_relative_bounds(const FunctionOperator& op,
                                           const ScalingFunction& alpha,
                                           const GridPartition& grid,
                                           std::span<const RealFunction> samples,
                                           std::span<const std::pair<RealFunction, RealFunction>> pairs,
                                           const SolveOptions& opts = {}, double tol = 1e-9);

struct LinearityReport {
    double residual = 0.0;
    double tolerance = 0.0;
    double scalar = 0.0;
    bool passed = true;
};

/// For declared-linear L: solves the three instances and checks
/// ||F(c f + g) - c F(f) - F(g)|| against the combined solver tolerance.
LinearityReport verify_linearity(const FunctionOperator& op, const ScalingFunction& alpha,
                                 const GridPartition& grid, const RealFunction& f,
                                 const RealFunction& g, double scalar,
                                 const SolveOptions& opts = {});

struct OperatorNormEstimates {
    double rho = 0.0;         // max(sup ratio, ||L(0)||), sample lower bound
    double quasibound = 0.0;  // ratio at the largest scale
    std::vector<std::pair<double, double>> scale_table;  // (scale, max ratio)
};

/// Norm- and quasi-boundedness estimates from scaled samples. Estimator only:
/// admissibility is not required here.
OperatorNormEstimates estimate_operator_norms(const FunctionOperator& op,
                                              std::span<const RealFunction> samples,
                                              const GridPartition& grid, int refinement,
                                              std::span<const double> scales = {});

struct InvertOptions {
    double tol = 1e-8;
    int max_iter = 200;
    int refinement = 64;
    /// Use this Lipschitz constant for the contraction gate instead of the
    /// operator's declared/estimated one.
    std::optional<double> lipschitz_override{};
    bool compute_forward_residual = true;
};

struct InvertResult {
    SampledFunction seed;
    int iterations = 0;
    double final_sup_change = 0.0;
    double forward_residual = 0.0;
    /// alpha * |L|; the iteration's contraction factor (gate: < 1).
    double contraction_factor = 0.0;
    /// True when the stronger certificate alpha < 1/(2 + |L|) holds, which
    /// backs the bilipschitz guarantee.
    bool certified_bilipschitz = false;
    /// (1 - alpha) / (1 - alpha (2 + |L|)) when certified.
    double inverse_lipschitz_bound = 0.0;
};

/// Recovers the seed with fractal image `target` by fixed-point iteration of
/// the rearranged self-referential equation. Requires alpha * |L| < 1.
InvertResult invert_fractal_operator(const SampledFunction& target, const FunctionOperator& op,
                                     const ScalingFunction& alpha, const GridPartition& grid,
                                     const InvertOptions& opts = {});

}  // namespace fif
