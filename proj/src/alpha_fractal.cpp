#include "fif/alpha_fractal.hpp"

#include <algorithm>
#include <cmath>
#include <memory>
#include <sstream>

namespace fif {

ScalingFunction::ScalingFunction(RealFunction fn, double bound, std::optional<double> constant)
    : fn_(std::move(fn)), declared_bound_(bound), constant_(constant) {
    if (!(declared_bound_ >= 0.0) || declared_bound_ >= 1.0) {
        raise(ErrorCode::ScalingBoundViolation,
              "declared scaling bound " + std::to_string(declared_bound_) + " is not in [0, 1)");
    }
}

ScalingFunction ScalingFunction::constant(double value) {
    std::ostringstream os;
    os << value;
    return ScalingFunction(RealFunction([value](std::span<const double>) { return value; },
                                        os.str()),
                           std::abs(value), value);
}

ScalingFunction ScalingFunction::from_function(RealFunction fn, double declared_bound) {
    return ScalingFunction(std::move(fn), declared_bound, std::nullopt);
}

RealFunction make_corner_base(const RealFunction& seed, const GridPartition& grid) {
    const int n = grid.dimension();
    const std::size_t corners = static_cast<std::size_t>(1) << n;
    std::vector<double> corner_values(corners);
    std::vector<int> bits(static_cast<std::size_t>(n));
    for (std::size_t c = 0; c < corners; ++c) {
        for (int k = 0; k < n; ++k) bits[static_cast<std::size_t>(k)] = (c >> k) & 1u;
        corner_values[c] = seed(std::span<const double>(grid.corner_point(bits)));
    }
    std::vector<double> lo(static_cast<std::size_t>(n)), width(static_cast<std::size_t>(n));
    for (int k = 0; k < n; ++k) {
        lo[static_cast<std::size_t>(k)] = grid.axis(k).lower();
        width[static_cast<std::size_t>(k)] = grid.axis(k).width();
    }
    return RealFunction(
        [corner_values, lo, width, corners](std::span<const double> X) {
            double acc = 0.0;
            for (std::size_t c = 0; c < corners; ++c) {
                double w = 1.0;
                for (std::size_t k = 0; k < X.size(); ++k) {
                    const double t = (X[k] - lo[k]) / width[k];
                    w *= ((c >> k) & 1u) ? t : 1.0 - t;
                }
                acc += w * corner_values[c];
            }
            return acc;
        },
        "corner-interpolant");
}

BaseFunction BaseFunction::corner_interpolant(const RealFunction& seed,
                                              const GridPartition& grid) {
    return BaseFunction(make_corner_base(seed, grid));
}

BaseFunction BaseFunction::seed_itself(const RealFunction& seed) {
    RealFunction copy = seed;
    return BaseFunction(RealFunction(
        [copy](std::span<const double> X) { return copy(X); },
        seed.label().empty() ? "seed" : "seed:" + seed.label()));
}

BaseFunction BaseFunction::checked(RealFunction fn, const RealFunction& seed,
                                   const GridPartition& grid, double tol) {
    const int n = grid.dimension();
    const std::size_t corners = static_cast<std::size_t>(1) << n;
    std::vector<int> bits(static_cast<std::size_t>(n));
    for (std::size_t c = 0; c < corners; ++c) {
        for (int k = 0; k < n; ++k) bits[static_cast<std::size_t>(k)] = (c >> k) & 1u;
        const std::vector<double> X = grid.corner_point(bits);
        const double bv = fn(std::span<const double>(X));
        const double fv = seed(std::span<const double>(X));
        if (!(std::abs(bv - fv) <= tol)) {
            std::ostringstream os;
            os << "base disagrees with seed at corner (";
            for (int k = 0; k < n; ++k) os << (k ? "," : "") << X[static_cast<std::size_t>(k)];
            os << "): " << bv << " vs " << fv;
            raise(ErrorCode::BaseCornerMismatch, os.str());
        }
    }
    return BaseFunction(std::move(fn));
}

AlphaAssembly build_alpha_system(const RealFunction& seed, const ScalingFunction& alpha,
                                 const BaseFunction& base, const GridPartition& grid,
                                 int refinement) {
    const int n = grid.dimension();

    DataTensor data = DataTensor::sample(grid, [&](std::span<const double> X) { return seed(X); });

    SampledFunction seed_lattice = SampledFunction::from_function(
        grid, refinement, [&](std::span<const double> X) { return seed(X); });
    SampledFunction base_lattice = SampledFunction::from_function(
        grid, refinement, [&](std::span<const double> X) { return base(X); });
    SampledFunction alpha_lattice = SampledFunction::from_function(
        grid, refinement, [&](std::span<const double> X) { return alpha(X); });

    const double alpha_max = lattice_sup_norm(alpha_lattice);
    if (alpha_max > alpha.declared_bound() + 1e-12) {
        std::ostringstream os;
        os << "lattice max of |scaling| = " << alpha_max << " exceeds declared bound "
           << alpha.declared_bound();
        raise(ErrorCode::ScalingBoundViolation, os.str());
    }

    // Per-cell lattice max of |alpha| over the cell image (diagnostic).
    std::vector<double> cell_gamma(grid.cell_count(), 0.0);
    {
        const std::vector<int> cell_shape = grid.cell_shape();
        std::vector<std::size_t> idx(static_cast<std::size_t>(n));
        for_each_multi_index(cell_shape, 1, [&](std::span<const int> cell) {
            const std::size_t flat = grid.cell_flat_index(cell);
            double m = 0.0;
            // Sub-lattice covering this cell: refinement+1 points per axis.
            std::vector<int> extents(static_cast<std::size_t>(n), refinement + 1);
            for_each_multi_index(extents, 0, [&](std::span<const int> off) {
                for (int k = 0; k < n; ++k) {
                    idx[static_cast<std::size_t>(k)] = static_cast<std::size_t>(
                        (cell[static_cast<std::size_t>(k)] - 1) * refinement +
                        off[static_cast<std::size_t>(k)]);
                }
                m = std::max(m, std::abs(alpha_lattice.value_at(idx)));
            });
            cell_gamma[flat] = m;
        });
    }

    // Vertical maps: F(X, y) = seed(u(X)) + alpha(u(X)) * (y - base(X)), with
    // the base read through its lattice interpolant. The declared contraction
    // is the certificate: exact for constant scaling, the declared bound
    // otherwise.
    auto base_shared = std::make_shared<const SampledFunction>(base_lattice);
    RealFunction seed_fn = seed;
    RealFunction alpha_fn = alpha.function();
    std::vector<std::vector<AffineCellMap>> axis_maps;
    axis_maps.reserve(static_cast<std::size_t>(n));
    for (int k = 0; k < n; ++k) axis_maps.push_back(build_axis_maps(grid.axis(k), k));
    std::vector<VerticalMap> maps;
    maps.reserve(grid.cell_count());
    const double declared_gamma =
        alpha.is_constant() ? std::abs(alpha.constant_value()) : alpha.declared_bound();
    const std::vector<int> cell_shape = grid.cell_shape();
    for_each_multi_index(cell_shape, 1, [&](std::span<const int> cell) {
        auto forward = std::make_shared<const ProductCellMap>([&] {
            std::vector<AffineCellMap> parts;
            parts.reserve(static_cast<std::size_t>(n));
            for (int k = 0; k < n; ++k) {
                parts.push_back(axis_maps[static_cast<std::size_t>(k)][static_cast<std::size_t>(
                    cell[static_cast<std::size_t>(k)] - 1)]);
            }
            return ProductCellMap(std::move(parts));
        }());
        VerticalMap::AffineInY parts;
        parts.offset = [seed_fn, alpha_fn, base_shared, forward](std::span<const double> X) {
            std::vector<double> image(X.size());
            forward->forward_into(X, image);
            return seed_fn(std::span<const double>(image)) -
                   alpha_fn(std::span<const double>(image)) * base_shared->evaluate(X);
        };
        parts.slope = [alpha_fn, forward](std::span<const double> X) {
            std::vector<double> image(X.size());
            forward->forward_into(X, image);
            return alpha_fn(std::span<const double>(image));
        };
        maps.emplace_back(std::vector<int>(cell.begin(), cell.end()), declared_gamma,
                          std::move(parts));
    });

    AlphaAssembly assembly{FifSystem(grid, std::move(data), std::move(maps)),
                           std::move(seed_lattice),
                           std::move(base_lattice),
                           alpha.declared_bound(),
                           alpha_max,
                           std::move(cell_gamma),
                           refinement};
    return assembly;
}

AlphaFractalResult construct_alpha_fractal(const RealFunction& seed, const GridPartition& grid,
                                           const ScalingFunction& alpha, const BaseFunction& base,
                                           const SolveOptions& opts) {
    AlphaAssembly assembly = build_alpha_system(seed, alpha, base, grid, opts.refinement);
    auto [fractal, diagnostics] = solve_fif(assembly.system, opts);
    AlphaFractalResult result{std::move(fractal),
                              std::move(diagnostics),
                              std::move(assembly.seed_lattice),
                              std::move(assembly.base_lattice),
                              alpha.declared_bound(),
                              seed.label(),
                              alpha.label(),
                              base.label(),
                              grid.describe()};
    return result;
}

double node_interpolation_residual(const AlphaFractalResult& result) {
    const GridPartition& grid = result.fractal.grid();
    double max_residual = 0.0;
    const std::vector<int> shape = grid.node_shape();
    for_each_multi_index(shape, 0, [&](std::span<const int> node) {
        const double fractal_value = result.fractal.node_value(node);
        const double seed_value = result.seed_lattice.node_value(node);
        max_residual = std::max(max_residual, std::abs(fractal_value - seed_value));
    });
    return max_residual;
}

PerturbationBoundReport check_perturbation_bounds(const AlphaFractalResult& result, double tol) {
    PerturbationBoundReport report;
    report.tolerance = tol;
    report.refinement = result.fractal.refinement();
    report.alpha_bound = result.alpha_bound;
    report.seed_distance = sup_distance(result.fractal, result.seed_lattice);
    report.base_distance = sup_distance(result.fractal, result.base_lattice);
    report.seed_base_distance = sup_distance(result.seed_lattice, result.base_lattice);
    report.relative_bound = report.alpha_bound * report.base_distance;
    report.absolute_bound =
        report.alpha_bound / (1.0 - report.alpha_bound) * report.seed_base_distance;
    report.relative_slack = report.relative_bound - report.seed_distance;
    report.absolute_slack = report.absolute_bound - report.seed_distance;
    report.passed = report.seed_distance <= report.relative_bound + tol &&
                    report.seed_distance <= report.absolute_bound + tol;
    return report;
}

PerturbationBoundReport verify_perturbation_bounds(const AlphaFractalResult& result, double tol) {
    PerturbationBoundReport report = check_perturbation_bounds(result, tol);
    if (!report.passed) {
        std::ostringstream os;
        os << "perturbation bound exceeded: ||fractal - seed|| = " << report.seed_distance
           << ", relative bound " << report.relative_bound << ", absolute bound "
           << report.absolute_bound;
        raise(ErrorCode::BoundViolation, os.str());
    }
    return report;
}

std::vector<StudyRow> convergence_study(const RealFunction& seed, const GridPartition& grid,
                                        const BaseFunction& base,
                                        std::span<const ScalingFunction> alphas,
                                        const SolveOptions& opts) {
    std::vector<StudyRow> rows;
    rows.reserve(alphas.size());
    int index = 1;
    for (const ScalingFunction& alpha : alphas) {
        AlphaFractalResult result = construct_alpha_fractal(seed, grid, alpha, base, opts);
        StudyRow row;
        row.index = index++;
        row.parameter_norm = alpha.declared_bound();
        row.error = sup_distance(result.fractal, result.seed_lattice);
        const double fb = sup_distance(result.seed_lattice, result.base_lattice);
        row.bound = alpha.declared_bound() / (1.0 - alpha.declared_bound()) * fb;
        rows.push_back(row);
    }
    return rows;
}

std::vector<StudyRow> convergence_study(const RealFunction& seed, const GridPartition& grid,
                                        const ScalingFunction& alpha,
                                        std::span<const BaseFunction> bases,
                                        const SolveOptions& opts) {
    std::vector<StudyRow> rows;
    rows.reserve(bases.size());
    int index = 1;
    for (const BaseFunction& base : bases) {
        AlphaFractalResult result = construct_alpha_fractal(seed, grid, alpha, base, opts);
        StudyRow row;
        row.index = index++;
        row.parameter_norm = sup_distance(result.seed_lattice, result.base_lattice);
        row.error = sup_distance(result.fractal, result.seed_lattice);
        row.bound = alpha.declared_bound() / (1.0 - alpha.declared_bound()) * row.parameter_norm;
        rows.push_back(row);
    }
    return rows;
}

}  // namespace fif
