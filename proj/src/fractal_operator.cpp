#include "fif/fractal_operator.hpp"

#include <algorithm>
#include <cmath>
#include <sstream>

namespace fif {

namespace {

std::string point_to_string(std::span<const double> X) {
    std::ostringstream os;
    os << "(";
    for (std::size_t k = 0; k < X.size(); ++k) os << (k ? "," : "") << X[k];
    os << ")";
    return os.str();
}

std::vector<std::pair<RealFunction, RealFunction>> default_probe_pairs() {
    auto sum_sq = RealFunction(
        [](std::span<const double> X) {
            double s = 0.0;
            for (double x : X) s += x * x;
            return s;
        },
        "sum of squares");
    auto sum_lin = RealFunction(
        [](std::span<const double> X) {
            double s = 0.0;
            for (double x : X) s += x;
            return s;
        },
        "sum of coordinates");
    auto wave = RealFunction(
        [](std::span<const double> X) {
            double s = 1.0;
            for (double x : X) s *= std::cos(2.0 * x);
            return s;
        },
        "cosine product");
    return {{sum_sq, sum_lin}, {sum_lin, RealFunction::constant(1.0)}, {wave, sum_sq}};
}

}  // namespace

FunctionOperator::FunctionOperator(std::string name, Transform transform, bool linear,
                                   std::optional<double> lipschitz)
    : name_(std::move(name)), transform_(std::move(transform)), linear_(linear),
      lipschitz_(lipschitz) {}

FunctionOperator FunctionOperator::identity() {
    return FunctionOperator(
        "identity", [](const RealFunction& f, const GridPartition&) { return f; },
        /*linear=*/true, /*lipschitz=*/1.0);
}

FunctionOperator FunctionOperator::corner_interpolant() {
    return FunctionOperator(
        "corner",
        [](const RealFunction& f, const GridPartition& grid) {
            return make_corner_base(f, grid);
        },
        /*linear=*/true, /*lipschitz=*/1.0);
}

FunctionOperator FunctionOperator::reflection() {
    return FunctionOperator(
        "reflection",
        [](const RealFunction& f, const GridPartition& grid) {
            std::vector<double> ends(static_cast<std::size_t>(grid.dimension()));
            for (int k = 0; k < grid.dimension(); ++k) {
                ends[static_cast<std::size_t>(k)] = grid.axis(k).lower() + grid.axis(k).upper();
            }
            RealFunction inner = f;
            return RealFunction(
                [inner, ends](std::span<const double> X) {
                    std::vector<double> mirrored(X.size());
                    for (std::size_t k = 0; k < X.size(); ++k) mirrored[k] = ends[k] - X[k];
                    return inner(std::span<const double>(mirrored));
                },
                "reflection of " + f.label());
        },
        /*linear=*/true, /*lipschitz=*/1.0);
}

FunctionOperator FunctionOperator::pointwise(Expression expr, bool linear,
                                             std::optional<double> lipschitz) {
    const std::string label = expr.source();
    return FunctionOperator(
        "expr:" + label,
        [expr](const RealFunction& f, const GridPartition&) {
            RealFunction inner = f;
            Expression e = expr;
            return RealFunction(
                [inner, e](std::span<const double> X) {
                    return e.evaluate_with_value(X, inner(X));
                },
                "pointwise");
        },
        linear, lipschitz);
}

FunctionOperator FunctionOperator::named(const std::string& name) {
    if (name == "identity") return identity();
    if (name == "corner") return corner_interpolant();
    if (name == "reflection") return reflection();
    raise(ErrorCode::SchemaError, "unknown operator name '" + name + "'");
}

AdmissibilityReport check_admissible(const FunctionOperator& op,
                                     std::span<const RealFunction> samples,
                                     const GridPartition& grid, double tol) {
    AdmissibilityReport report;
    report.tolerance = tol;
    const int n = grid.dimension();
    const std::size_t corners = static_cast<std::size_t>(1) << n;
    std::vector<int> bits(static_cast<std::size_t>(n));
    for (std::size_t s = 0; s < samples.size(); ++s) {
        const RealFunction transformed = op(samples[s], grid);
        for (std::size_t c = 0; c < corners; ++c) {
            for (int k = 0; k < n; ++k) bits[static_cast<std::size_t>(k)] = (c >> k) & 1u;
            const std::vector<double> X = grid.corner_point(bits);
            const double lv = transformed(std::span<const double>(X));
            const double fv = samples[s](std::span<const double>(X));
            const double residual = std::abs(lv - fv);
            report.max_residual = std::max(report.max_residual, residual);
            if (!(residual <= tol)) {
                report.passed = false;
                std::ostringstream os;
                os << "operator " << op.name() << " breaks corner agreement for sample " << s
                   << (samples[s].label().empty() ? "" : " (" + samples[s].label() + ")")
                   << " at " << point_to_string(X) << ": residual " << residual;
                report.failures.push_back(os.str());
            }
        }
    }
    return report;
}

AdmissibilityReport verify_admissible(const FunctionOperator& op,
                                      std::span<const RealFunction> samples,
                                      const GridPartition& grid, double tol) {
    AdmissibilityReport report = check_admissible(op, samples, grid, tol);
    if (!report.passed) raise(ErrorCode::NotAdmissible, report.failures.front());
    return report;
}

AlphaFractalResult apply_fractal_operator(const FunctionOperator& op, const ScalingFunction& alpha,
                                          const GridPartition& grid, const RealFunction& f,
                                          const SolveOptions& opts) {
    verify_admissible(op, std::span<const RealFunction>(&f, 1), grid);
    BaseFunction base = BaseFunction::checked(op(f, grid), f, grid);
    AlphaFractalResult result = construct_alpha_fractal(f, grid, alpha, base, opts);
    result.base_label = "operator:" + op.name();
    return result;
}

double estimate_lipschitz(const FunctionOperator& op,
                          std::span<const std::pair<RealFunction, RealFunction>> pairs,
                          const GridPartition& grid, int refinement) {
    if (pairs.empty()) raise(ErrorCode::DegeneratePair, "no pairs given");
    double max_ratio = 0.0;
    for (const auto& [f, g] : pairs) {
        SampledFunction sf = SampledFunction::from_function(
            grid, refinement, [&](std::span<const double> X) { return f(X); });
        SampledFunction sg = SampledFunction::from_function(
            grid, refinement, [&](std::span<const double> X) { return g(X); });
        const double denom = sup_distance(sf, sg);
        if (denom == 0.0) {
            raise(ErrorCode::DegeneratePair,
                  "pair (" + f.label() + ", " + g.label() + ") coincides on the lattice");
        }
        const RealFunction lf = op(f, grid);
        const RealFunction lg = op(g, grid);
        SampledFunction slf = SampledFunction::from_function(
            grid, refinement, [&](std::span<const double> X) { return lf(X); });
        SampledFunction slg = SampledFunction::from_function(
            grid, refinement, [&](std::span<const double> X) { return lg(X); });
        max_ratio = std::max(max_ratio, sup_distance(slf, slg) / denom);
    }
    return max_ratio;
}

OperatorBoundReport verify_relative_bounds(
    const FunctionOperator& op, const ScalingFunction& alpha, const GridPartition& grid,
    std::span<const RealFunction> samples,
    std::span<const std::pair<RealFunction, RealFunction>> pairs, const SolveOptions& opts,
    double tol) {
    OperatorBoundReport report;
    report.tolerance = tol;
    report.alpha_bound = alpha.declared_bound();
    const double a = alpha.declared_bound();
    const double c_main = 1.0 / (1.0 - a);
    const double c_rel = a / (1.0 - a);
    report.constant_a = c_main;
    report.constant_b = c_rel;
    report.min_bounded_slack = std::numeric_limits<double>::infinity();
    report.min_lipschitz_slack = std::numeric_limits<double>::infinity();

    for (const RealFunction& f : samples) {
        AlphaFractalResult r = apply_fractal_operator(op, alpha, grid, f, opts);
        const double lhs = lattice_sup_norm(r.fractal);
        const double bound =
            c_main * lattice_sup_norm(r.seed_lattice) + c_rel * lattice_sup_norm(r.base_lattice);
        report.samples_checked += 1;
        report.min_bounded_slack = std::min(report.min_bounded_slack, bound - lhs);
        if (!(lhs <= bound + tol)) {
            report.passed = false;
            std::ostringstream os;
            os << "relative boundedness failed for " << f.label() << ": ||F(f)|| = " << lhs
               << " > " << bound;
            report.failures.push_back(os.str());
        }
    }

    double lipschitz_lower = 0.0;
    for (const auto& [f, g] : pairs) {
        AlphaFractalResult rf = apply_fractal_operator(op, alpha, grid, f, opts);
        AlphaFractalResult rg = apply_fractal_operator(op, alpha, grid, g, opts);
        const double df = sup_distance(rf.fractal, rg.fractal);
        const double dfg = sup_distance(rf.seed_lattice, rg.seed_lattice);
        const double dl = sup_distance(rf.base_lattice, rg.base_lattice);
        if (dfg == 0.0) raise(ErrorCode::DegeneratePair, "pair coincides on the lattice");
        const double bound = c_main * dfg + c_rel * dl;
        report.pairs_checked += 1;
        report.min_lipschitz_slack = std::min(report.min_lipschitz_slack, bound - df);
        report.empirical_operator_lipschitz =
            std::max(report.empirical_operator_lipschitz, df / dfg);
        lipschitz_lower = std::max(lipschitz_lower, dl / dfg);
        if (!(df <= bound + tol)) {
            report.passed = false;
            std::ostringstream os;
            os << "relative Lipschitz bound failed for (" << f.label() << ", " << g.label()
               << "): ||F(f)-F(g)|| = " << df << " > " << bound;
            report.failures.push_back(os.str());
        }
    }

    report.operator_lipschitz = op.declared_lipschitz().value_or(lipschitz_lower);
    report.operator_lipschitz_bound = (1.0 + a * report.operator_lipschitz) / (1.0 - a);
    if (!pairs.empty() &&
        !(report.empirical_operator_lipschitz <= report.operator_lipschitz_bound + tol)) {
        report.passed = false;
        std::ostringstream os;
        os << "operator Lipschitz estimate " << report.empirical_operator_lipschitz
           << " exceeds (1 + a|L|)/(1 - a) = " << report.operator_lipschitz_bound;
        report.failures.push_back(os.str());
    }

    OperatorNormEstimates norms = estimate_operator_norms(op, samples, grid, opts.refinement);
    report.rho_estimate = norms.rho;
    report.quasibound_estimate = norms.quasibound;
    return report;
}

LinearityReport verify_linearity(const FunctionOperator& op, const ScalingFunction& alpha,
                                 const GridPartition& grid, const RealFunction& f,
                                 const RealFunction& g, double scalar, const SolveOptions& opts) {
    if (!op.declared_linear()) {
        raise(ErrorCode::OperatorNotDeclaredLinear,
              "operator " + op.name() + " is not declared linear");
    }
    RealFunction ff = f;
    RealFunction gg = g;
    RealFunction combo(
        [ff, gg, scalar](std::span<const double> X) { return scalar * ff(X) + gg(X); },
        "combination");
    const RealFunction all[] = {f, g, combo};
    verify_admissible(op, all, grid);

    AlphaFractalResult rf = apply_fractal_operator(op, alpha, grid, f, opts);
    AlphaFractalResult rg = apply_fractal_operator(op, alpha, grid, g, opts);
    AlphaFractalResult rc = apply_fractal_operator(op, alpha, grid, combo, opts);

    auto cv = rc.fractal.values();
    auto fv = rf.fractal.values();
    auto gv = rg.fractal.values();
    double residual = 0.0;
    for (std::size_t i = 0; i < cv.size(); ++i) {
        residual = std::max(residual, std::abs(cv[i] - scalar * fv[i] - gv[i]));
    }

    LinearityReport report;
    report.residual = residual;
    report.scalar = scalar;
    report.tolerance = (2.0 + std::abs(scalar)) * opts.tol;
    report.passed = residual <= report.tolerance;
    if (!report.passed) {
        std::ostringstream os;
        os << "linearity residual " << residual << " exceeds " << report.tolerance;
        raise(ErrorCode::LinearityViolation, os.str());
    }
    return report;
}

OperatorNormEstimates estimate_operator_norms(const FunctionOperator& op,
                                              std::span<const RealFunction> samples,
                                              const GridPartition& grid, int refinement,
                                              std::span<const double> scales) {
    static const double kDefaultScales[] = {1.0, 10.0, 100.0, 1000.0};
    if (scales.empty()) scales = kDefaultScales;

    OperatorNormEstimates out;
    RealFunction zero = RealFunction::constant(0.0);
    SampledFunction lzero = SampledFunction::from_function(
        grid, refinement,
        [transformed = op(zero, grid)](std::span<const double> X) { return transformed(X); });
    const double l0 = lattice_sup_norm(lzero);
    out.rho = l0;

    for (double scale : scales) {
        double scale_max = 0.0;
        for (const RealFunction& f : samples) {
            RealFunction inner = f;
            RealFunction scaled(
                [inner, scale](std::span<const double> X) { return scale * inner(X); },
                "scaled sample");
            SampledFunction sf = SampledFunction::from_function(
                grid, refinement, [&](std::span<const double> X) { return scaled(X); });
            const double denom = lattice_sup_norm(sf);
            if (denom == 0.0) continue;
            const RealFunction transformed = op(scaled, grid);
            SampledFunction lf = SampledFunction::from_function(
                grid, refinement, [&](std::span<const double> X) { return transformed(X); });
            scale_max = std::max(scale_max, lattice_sup_norm(lf) / denom);
        }
        out.scale_table.emplace_back(scale, scale_max);
        out.rho = std::max(out.rho, scale_max);
    }
    if (!out.scale_table.empty()) out.quasibound = out.scale_table.back().second;
    return out;
}

InvertResult invert_fractal_operator(const SampledFunction& target, const FunctionOperator& op,
                                     const ScalingFunction& alpha, const GridPartition& grid,
                                     const InvertOptions& opts) {
    double lipschitz;
    if (opts.lipschitz_override) {
        lipschitz = *opts.lipschitz_override;
    } else if (op.declared_lipschitz()) {
        lipschitz = *op.declared_lipschitz();
    } else {
        lipschitz = estimate_lipschitz(op, default_probe_pairs(), grid, target.refinement());
    }
    const double a = alpha.declared_bound();
    const double factor = a * lipschitz;
    if (!(factor < 1.0)) {
        std::ostringstream os;
        os << "alpha bound " << a << " times operator Lipschitz constant " << lipschitz
           << " = " << factor << " >= 1; the inversion iteration does not contract";
        raise(ErrorCode::ContractionConditionFailed, os.str());
    }

    const int refinement = target.refinement();
    PullbackPlan plan(grid, refinement);
    const std::size_t total = plan.size();
    std::vector<double> alpha_values(total);
    {
        std::vector<double> X(static_cast<std::size_t>(grid.dimension()));
        for (std::size_t i = 0; i < total; ++i) {
            plan.lattice_point(i, X);
            alpha_values[i] = alpha(X);
        }
    }

    std::vector<double> cur(target.values().begin(), target.values().end());
    std::vector<double> next(total);
    std::vector<double> diff(total);
    InvertResult result{target, 0, 0.0, 0.0, factor, false, 0.0};
    bool converged = false;
    for (int it = 1; it <= opts.max_iter; ++it) {
        SampledFunction current = target.with_values(std::vector<double>(cur));
        const RealFunction transformed = op(current.to_function(), grid);
        SampledFunction lf = SampledFunction::from_function(
            grid, refinement, [&](std::span<const double> X) { return transformed(X); });
        auto tv = target.values();
        auto lv = lf.values();
        for (std::size_t i = 0; i < total; ++i) diff[i] = tv[i] - lv[i];
        for (std::size_t i = 0; i < total; ++i) {
            next[i] = tv[i] - alpha_values[i] * plan.interpolate(diff, i);
        }
        const double change = max_abs_difference(cur, next);
        cur.swap(next);
        result.iterations = it;
        result.final_sup_change = change;
        if (change <= opts.tol) {
            converged = true;
            break;
        }
    }
    if (!converged) {
        raise(ErrorCode::NotConverged, "inversion sup-change " +
                                           std::to_string(result.final_sup_change) +
                                           " above tol after " + std::to_string(opts.max_iter) +
                                           " iterations");
    }
    result.seed = target.with_values(std::move(cur));
    result.certified_bilipschitz = a < 1.0 / (2.0 + lipschitz);
    if (result.certified_bilipschitz) {
        result.inverse_lipschitz_bound = (1.0 - a) / (1.0 - a * (2.0 + lipschitz));
    }

    if (opts.compute_forward_residual) {
        SolveOptions forward;
        forward.tol = opts.tol;
        forward.max_iter = opts.max_iter;
        forward.refinement = refinement;
        AlphaFractalResult round_trip =
            apply_fractal_operator(op, alpha, grid, result.seed.to_function(), forward);
        result.forward_residual = sup_distance(round_trip.fractal, target);
    }
    return result;
}

}  // namespace fif
