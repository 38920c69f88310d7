#pragma once

#include <optional>
#include <span>
#include <string>
#include <vector>

#include "fif/rb.hpp"
#include "fif/real_function.hpp"

namespace fif {

/// The vertical-contraction field: a continuous function with a user-declared
/// uniform bound below 1. The bound is the contraction certificate; the
/// library cross-checks it against the lattice max and refuses construction
/// when the samples exceed the declaration.
class ScalingFunction {
public:
    static ScalingFunction constant(double value);
    static ScalingFunction from_function(RealFunction fn, double declared_bound);

    double operator()(std::span<const double> X) const { return fn_(X); }
    double operator()(std::initializer_list<double> X) const {
        return fn_(std::span<const double>(X.begin(), X.size()));
    }
    double declared_bound() const noexcept { return declared_bound_; }
    bool is_constant() const noexcept { return constant_.has_value(); }
    double constant_value() const { return *constant_; }
    const RealFunction& function() const noexcept { return fn_; }
    const std::string& label() const noexcept { return fn_.label(); }

private:
    ScalingFunction(RealFunction fn, double bound, std::optional<double> constant);
    RealFunction fn_;
    double declared_bound_;
    std::optional<double> constant_;
};

/// A continuous function agreeing with the seed at all 2^n domain corners.
class BaseFunction {
public:
    /// Multilinear interpolant of the seed's corner values; the canonical
    /// admissible choice.
    static BaseFunction corner_interpolant(const RealFunction& seed, const GridPartition& grid);
    /// The seed itself (trivially admissible).
    static BaseFunction seed_itself(const RealFunction& seed);
    /// Arbitrary function, corner agreement verified (BaseCornerMismatch).
    static BaseFunction checked(RealFunction fn, const RealFunction& seed,
                                const GridPartition& grid, double tol = 1e-10);

    double operator()(std::span<const double> X) const { return fn_(X); }
    double operator()(std::initializer_list<double> X) const {
        return fn_(std::span<const double>(X.begin(), X.size()));
    }
    const RealFunction& function() const noexcept { return fn_; }
    const std::string& label() const noexcept { return fn_.label(); }

private:
    explicit BaseFunction(RealFunction fn) : fn_(std::move(fn)) {}
    RealFunction fn_;
};

/// Multilinear interpolant through the domain-corner values of `seed`.
RealFunction make_corner_base(const RealFunction& seed, const GridPartition& grid);

/// Assembled scaling-construction system. The base function is represented
/// by its lattice sampling (like every continuous function this library
/// iterates on), which keeps the solved function, the operator identities and
/// the bound checks exactly consistent on the lattice.
struct AlphaAssembly {
    FifSystem system;
    SampledFunction seed_lattice;
    SampledFunction base_lattice;
    double alpha_bound = 0.0;
    double alpha_lattice_max = 0.0;
    /// Per-cell lattice max of the scaling magnitude over the cell image
    /// (diagnostic; the declared bound is the certificate).
    std::vector<double> cell_contraction_lattice;
    int refinement = 1;
};

AlphaAssembly build_alpha_system(const RealFunction& seed, const ScalingFunction& alpha,
                                 const BaseFunction& base, const GridPartition& grid,
                                 int refinement);

struct AlphaFractalResult {
    SampledFunction fractal;
    SolveDiagnostics diagnostics;
    SampledFunction seed_lattice;
    SampledFunction base_lattice;
    double alpha_bound = 0.0;
    std::string seed_label;
    std::string alpha_label;
    std::string base_label;
    std::string grid_label;
};

/// Solves for the fractal perturbation of the seed: the unique fixed point of
/// the assembled system, interpolating the seed at every grid node.
AlphaFractalResult construct_alpha_fractal(const RealFunction& seed, const GridPartition& grid,
                                           const ScalingFunction& alpha, const BaseFunction& base,
                                           const SolveOptions& opts = {});

/// Max node residual |fractal(node) - seed(node)| over all grid nodes.
double node_interpolation_residual(const AlphaFractalResult& result);

struct PerturbationBoundReport {
    double seed_distance = 0.0;       // ||fractal - seed|| on the lattice
    double base_distance = 0.0;       // ||fractal - base||
    double seed_base_distance = 0.0;  // ||seed - base||
    double alpha_bound = 0.0;
    double relative_bound = 0.0;      // alpha * ||fractal - base||
    double absolute_bound = 0.0;      // alpha/(1-alpha) * ||seed - base||
    double relative_slack = 0.0;
    double absolute_slack = 0.0;
    int refinement = 0;
    double tolerance = 0.0;
    bool passed = true;
};

/// Checks the two perturbation inequalities on the solved instance. They are
/// theorems of the construction, so a failure signals a bug.
PerturbationBoundReport check_perturbation_bounds(const AlphaFractalResult& result,
                                                  double tol = 1e-6);
PerturbationBoundReport verify_perturbation_bounds(const AlphaFractalResult& result,
                                                   double tol = 1e-6);

struct StudyRow {
    int index = 0;
    double parameter_norm = 0.0;  // scaling bound (case 1) or ||seed - base_m|| (case 2)
    double error = 0.0;           // ||fractal - seed|| on the lattice
    double bound = 0.0;           // alpha/(1-alpha) * ||seed - base||
};

/// Error table for a sequence of scaling functions with a fixed base.
std::vector<StudyRow> convergence_study(const RealFunction& seed, const GridPartition& grid,
                                        const BaseFunction& base,
                                        std::span<const ScalingFunction> alphas,
                                        const SolveOptions& opts = {});

/// Error table for a sequence of base functions with a fixed scaling.
std::vector<StudyRow> convergence_study(const RealFunction& seed, const GridPartition& grid,
                                        const ScalingFunction& alpha,
                                        std::span<const BaseFunction> bases,
                                        const SolveOptions& opts = {});

}  // namespace fif
