// Acceptance suite: one pass/fail line per criterion. Each criterion pins its
// tolerance in code; a nonzero exit means at least one criterion failed.

#include <chrono>
#include <cmath>
#include <cstdio>
#include <functional>
#include <iostream>
#include <random>
#include <sstream>
#include <vector>

#include "fif/alpha_fractal.hpp"
#include "fif/expression.hpp"
#include "fif/fractal_operator.hpp"
#include "fif/rb.hpp"

using namespace fif;

namespace {

using Clock = std::chrono::steady_clock;

double seconds_since(Clock::time_point start) {
    return std::chrono::duration<double>(Clock::now() - start).count();
}

// ---------------------------------------------------------------------------
// Randomized instance family

AxisPartition random_axis(std::mt19937_64& rng, int cells) {
    std::uniform_real_distribution<double> unit(0.0, 1.0);
    std::vector<double> interior;
    for (int i = 1; i < cells; ++i) {
        interior.push_back((static_cast<double>(i) + 0.6 * (unit(rng) - 0.5)) /
                           static_cast<double>(cells));
    }
    std::vector<double> knots{0.0};
    knots.insert(knots.end(), interior.begin(), interior.end());
    knots.push_back(1.0);
    return AxisPartition::from_knots(std::move(knots));
}

GridPartition random_grid(std::mt19937_64& rng, int dimension) {
    std::uniform_int_distribution<int> cells(2, dimension == 1 ? 4 : 3);
    std::vector<AxisPartition> axes;
    for (int k = 0; k < dimension; ++k) axes.push_back(random_axis(rng, cells(rng)));
    return GridPartition(std::move(axes));
}

RealFunction random_seed(std::mt19937_64& rng, int dimension) {
    std::uniform_real_distribution<double> coeff(-1.0, 1.0);
    const double a = coeff(rng), b = coeff(rng), c = coeff(rng), d = 2.0 + coeff(rng);
    const int kind = std::uniform_int_distribution<int>(0, 2)(rng);
    (void)dimension;
    switch (kind) {
        case 0:
            return RealFunction(
                [a, b, c](std::span<const double> X) {
                    double s = c;
                    for (double x : X) s += a * x * x + b * x;
                    return s;
                },
                "random polynomial");
        case 1:
            return RealFunction(
                [a, c, d](std::span<const double> X) {
                    double p = 1.0;
                    for (double x : X) p *= std::sin(d * x + 0.4);
                    return a * p + c;
                },
                "random sine product");
        default:
            return RealFunction(
                [a, b, d](std::span<const double> X) {
                    double s = 0.0;
                    for (double x : X) s += std::cos(d * x) * a + b * x * x;
                    return s;
                },
                "random mixed");
    }
}

ScalingFunction random_scaling(std::mt19937_64& rng) {
    std::uniform_real_distribution<double> mag(0.05, 0.8);
    std::uniform_real_distribution<double> sign01(0.0, 1.0);
    const double c = mag(rng) * (sign01(rng) < 0.5 ? -1.0 : 1.0);
    if (sign01(rng) < 0.5) return ScalingFunction::constant(c);
    const double w = 1.0 + 3.0 * sign01(rng);
    return ScalingFunction::from_function(
        RealFunction(
            [c, w](std::span<const double> X) {
                double s = 0.0;
                for (double x : X) s += x;
                return c * std::cos(w * s);
            },
            "cosine scaling"),
        std::abs(c));
}

struct Instance {
    AlphaAssembly assembly;
    SampledFunction fractal;
    SolveDiagnostics diagnostics;
    SampledFunction seed_lattice;
    SampledFunction base_lattice;
    double alpha_bound;
};

Instance make_instance(std::mt19937_64& rng, int dimension, int refinement) {
    GridPartition grid = random_grid(rng, dimension);
    RealFunction f = random_seed(rng, dimension);
    ScalingFunction alpha = random_scaling(rng);
    const bool corner_base = std::uniform_int_distribution<int>(0, 1)(rng) == 0;
    BaseFunction base = corner_base ? BaseFunction::corner_interpolant(f, grid)
                                    : BaseFunction::seed_itself(f);
    AlphaAssembly assembly = build_alpha_system(f, alpha, base, grid, refinement);
    SolveOptions opts;
    opts.tol = 1e-10;
    opts.max_iter = 400;
    opts.refinement = refinement;
    auto [fractal, diagnostics] = solve_fif(assembly.system, opts);
    SampledFunction seed_lattice = assembly.seed_lattice;
    SampledFunction base_lattice = assembly.base_lattice;
    const double bound = assembly.alpha_bound;
    return Instance{std::move(assembly), std::move(fractal),    std::move(diagnostics),
                    std::move(seed_lattice), std::move(base_lattice), bound};
}

double node_residual(const Instance& inst) {
    AlphaFractalResult view{inst.fractal,      inst.diagnostics, inst.seed_lattice,
                            inst.base_lattice, inst.alpha_bound, "",
                            "",                "",               ""};
    return node_interpolation_residual(view);
}

SampledFunction random_corner_pinned(const FifSystem& system, int refinement,
                                     std::mt19937_64& rng) {
    const GridPartition& grid = system.grid();
    std::uniform_real_distribution<double> val(-1.0, 2.0);
    SampledFunction shape = SampledFunction::from_node_data(grid, refinement, system.data());
    std::vector<double> values(shape.size());
    for (double& v : values) v = val(rng);
    const int n = grid.dimension();
    const std::size_t corners = static_cast<std::size_t>(1) << n;
    auto strides = shape.strides();
    auto sh = shape.shape();
    for (std::size_t c = 0; c < corners; ++c) {
        std::vector<int> node(static_cast<std::size_t>(n));
        std::size_t flat = 0;
        for (int k = 0; k < n; ++k) {
            const bool hi = (c >> k) & 1u;
            node[static_cast<std::size_t>(k)] = hi ? grid.axis(k).cell_count() : 0;
            flat += (hi ? sh[static_cast<std::size_t>(k)] - 1 : 0) *
                    strides[static_cast<std::size_t>(k)];
        }
        values[flat] = system.data().at(node);
    }
    return shape.with_values(std::move(values));
}

// The worked 1D instance shared by several criteria.
struct DeskInstance {
    GridPartition grid;
    AlphaFractalResult result;
};

DeskInstance desk_instance(double alpha, int refinement, double tol) {
    GridPartition grid({build_axis_partition({0.0, 0.5, 1.0})});
    RealFunction f([](std::span<const double> X) { return X[0] * X[0]; }, "x^2");
    BaseFunction base = BaseFunction::checked(
        RealFunction([](std::span<const double> X) { return X[0]; }, "x"), f, grid);
    SolveOptions opts;
    opts.tol = tol;
    opts.refinement = refinement;
    opts.max_iter = 400;
    AlphaFractalResult result =
        construct_alpha_fractal(f, grid, ScalingFunction::constant(alpha), base, opts);
    return DeskInstance{std::move(grid), std::move(result)};
}

// ---------------------------------------------------------------------------
// Harness

struct Criterion {
    int id;
    std::string name;
    std::function<bool(std::string&)> run;
};

}  // namespace

int main() {
    std::vector<Instance> instances;  // shared by criteria 1, 2, 3, 5
    double instance_build_seconds = 0.0;

    std::vector<Criterion> criteria;

    criteria.push_back({1, "node interpolation on randomized 1D/2D/3D instances",
                        [&](std::string& detail) {
        const auto start = Clock::now();
        std::mt19937_64 rng(0xacce5501);
        double worst = 0.0;
        for (int i = 0; i < 20; ++i) {
            const int dimension = i < 10 ? 1 : (i < 17 ? 2 : 3);
            const int refinement = dimension == 1 ? 64 : (dimension == 2 ? 16 : 6);
            instances.push_back(make_instance(rng, dimension, refinement));
            worst = std::max(worst, node_residual(instances.back()));
        }
        instance_build_seconds = seconds_since(start);
        std::ostringstream os;
        os << "max node residual " << worst << " over 20 instances, "
           << instance_build_seconds << " s";
        detail = os.str();
        return worst <= 1e-9 && instance_build_seconds < 30.0;
    }});

    criteria.push_back({2, "operator contraction bound on random pairs", [&](std::string& detail) {
        std::mt19937_64 rng(0xacce5502);
        double worst_excess = -1.0;
        for (const Instance& inst : instances) {
            const double gamma = inst.assembly.system.max_contraction();
            for (int pair = 0; pair < 100; ++pair) {
                SampledFunction g =
                    random_corner_pinned(inst.assembly.system, inst.fractal.refinement(), rng);
                SampledFunction h =
                    random_corner_pinned(inst.assembly.system, inst.fractal.refinement(), rng);
                const double lhs = sup_distance(apply_rb_operator(inst.assembly.system, g),
                                                apply_rb_operator(inst.assembly.system, h));
                worst_excess = std::max(worst_excess, lhs - gamma * sup_distance(g, h));
            }
        }
        std::ostringstream os;
        os << "max (|Tg-Th| - gamma |g-h|) = " << worst_excess << " over "
           << instances.size() * 100 << " pairs";
        detail = os.str();
        return worst_excess <= 1e-12;
    }});

    criteria.push_back({3, "well-definedness across adjacent cells on shared faces",
                        [&](std::string& detail) {
        std::mt19937_64 rng(0xacce5503);
        std::uniform_real_distribution<double> unit(0.0, 1.0);
        int probes = 0;
        double worst = 0.0;
        for (const Instance& inst : instances) {
            const GridPartition& grid = inst.assembly.system.grid();
            const int n = grid.dimension();
            for (int k = 0; k < n; ++k) {
                for (int knot = 1; knot < grid.axis(k).cell_count(); ++knot) {
                    for (int s = 0; s < 10; ++s) {
                        std::vector<double> X(static_cast<std::size_t>(n));
                        for (int j = 0; j < n; ++j) {
                            const AxisPartition& ax = grid.axis(j);
                            X[static_cast<std::size_t>(j)] =
                                j == k ? ax.knot(knot) : ax.lower() + ax.width() * unit(rng);
                        }
                        CellLocation loc = locate_cell(grid, X);
                        std::vector<int> left = loc.cell;
                        std::vector<int> right = loc.cell;
                        left[static_cast<std::size_t>(k)] = knot;
                        right[static_cast<std::size_t>(k)] = knot + 1;
                        const double vl =
                            rb_value_via_cell(inst.assembly.system, inst.fractal, X, left);
                        const double vr =
                            rb_value_via_cell(inst.assembly.system, inst.fractal, X, right);
                        worst = std::max(worst, std::abs(vl - vr));
                        ++probes;
                        if (probes >= 200) break;
                    }
                    if (probes >= 200) break;
                }
                if (probes >= 200) break;
            }
        }
        std::ostringstream os;
        os << "max face disagreement " << worst << " over " << probes << " probes";
        detail = os.str();
        return probes >= 200 && worst <= 1e-10;
    }});

    criteria.push_back({4, "closed-form desk check at x = 0.25 and 0.75", [&](std::string& detail) {
        DeskInstance desk = desk_instance(0.4, 64, 1e-10);
        const double at25 = desk.result.fractal.evaluate({0.25});
        const double at75 = desk.result.fractal.evaluate({0.75});
        std::ostringstream os;
        os << "f(0.25) = " << at25 << " (want -0.0375), f(0.75) = " << at75
           << " (want 0.4625)";
        detail = os.str();
        return std::abs(at25 + 0.0375) <= 1e-6 && std::abs(at75 - 0.4625) <= 1e-6;
    }});

    criteria.push_back({5, "perturbation bounds on the randomized suite and desk instance",
                        [&](std::string& detail) {
        double min_abs_slack = std::numeric_limits<double>::infinity();
        double min_rel_slack = std::numeric_limits<double>::infinity();
        bool all = true;
        for (const Instance& inst : instances) {
            AlphaFractalResult view{inst.fractal,      inst.diagnostics, inst.seed_lattice,
                                    inst.base_lattice, inst.alpha_bound, "",
                                    "",                "",               ""};
            PerturbationBoundReport report = check_perturbation_bounds(view, 1e-9);
            all = all && report.passed;
            min_rel_slack = std::min(min_rel_slack, report.relative_slack);
            min_abs_slack = std::min(min_abs_slack, report.absolute_slack);
        }
        DeskInstance desk = desk_instance(0.4, 64, 1e-10);
        PerturbationBoundReport desk_report = check_perturbation_bounds(desk.result, 1e-9);
        const bool desk_ok = desk_report.seed_distance <= 1.0 / 6.0 + 1e-6;
        std::ostringstream os;
        os << "min slack (relative " << min_rel_slack << ", absolute " << min_abs_slack
           << "); desk ||fractal-seed|| = " << desk_report.seed_distance << " <= 1/6";
        detail = os.str();
        return all && desk_ok;
    }});

    criteria.push_back({6, "error decay for a halving scaling sequence", [&](std::string& detail) {
        GridPartition grid({build_axis_partition({0.0, 0.5, 1.0})});
        RealFunction f([](std::span<const double> X) { return X[0] * X[0]; }, "x^2");
        BaseFunction base = BaseFunction::checked(
            RealFunction([](std::span<const double> X) { return X[0]; }, "x"), f, grid);
        std::vector<ScalingFunction> alphas;
        for (int m = 1; m <= 6; ++m) alphas.push_back(ScalingFunction::constant(std::pow(2.0, -m)));
        SolveOptions opts;
        opts.tol = 1e-10;
        opts.refinement = 64;
        auto rows = convergence_study(f, grid, base, alphas, opts);
        bool bounded = true;
        double sum_m = 0.0, sum_log = 0.0, sum_mm = 0.0, sum_mlog = 0.0;
        for (const StudyRow& row : rows) {
            const double am = std::pow(2.0, -row.index);
            bounded = bounded && row.error <= am / (1.0 - am) * 0.25 + 1e-9;
            const double m = static_cast<double>(row.index);
            const double logerr = std::log(row.error);
            sum_m += m;
            sum_log += logerr;
            sum_mm += m * m;
            sum_mlog += m * logerr;
        }
        const double count = static_cast<double>(rows.size());
        const double slope =
            (count * sum_mlog - sum_m * sum_log) / (count * sum_mm - sum_m * sum_m);
        std::ostringstream os;
        os << "log-error slope " << slope << " (need <= -0.65), bounds "
           << (bounded ? "hold" : "VIOLATED");
        detail = os.str();
        return bounded && slope <= -0.65;
    }});

    criteria.push_back({7, "geometric iteration decay at contraction 0.5", [&](std::string& detail) {
        // Non-dyadic knots keep the pullback chain off-lattice, so the
        // sup-change sequence has a genuine geometric tail.
        GridPartition grid({build_axis_partition({0.0, 0.4, 1.0})});
        RealFunction f(
            [](std::span<const double> X) { return std::sin(2.0 * X[0]) + X[0] * X[0]; },
            "mixed");
        AlphaAssembly assembly =
            build_alpha_system(f, ScalingFunction::constant(0.5),
                               BaseFunction::corner_interpolant(f, grid), grid, 64);
        SolveOptions opts;
        opts.tol = 1e-10;
        opts.refinement = 64;
        opts.max_iter = 60;
        auto [fractal, diag] = solve_fif(assembly.system, opts);
        std::ostringstream os;
        os << diag.iterations << " iterations, fitted ratio " << diag.contraction_estimate;
        detail = os.str();
        return diag.iterations <= 40 && std::abs(diag.contraction_estimate - 0.5) <= 0.05;
    }});

    criteria.push_back({8, "operator identities and linearity transfer", [&](std::string& detail) {
        GridPartition grid({build_axis_partition({0.0, 0.5, 1.0})});
        SolveOptions opts;
        opts.tol = 1e-10;
        opts.refinement = 32;
        opts.max_iter = 400;
        RealFunction f(
            [](std::span<const double> X) { return X[0] * X[0] + std::sin(2.0 * X[0]); }, "f");

        AlphaFractalResult identity_result = apply_fractal_operator(
            FunctionOperator::identity(), ScalingFunction::constant(0.4), grid, f, opts);
        const double identity_residual =
            sup_distance(identity_result.fractal, identity_result.seed_lattice);

        AlphaFractalResult zero_result = apply_fractal_operator(
            FunctionOperator::corner_interpolant(), ScalingFunction::constant(0.0), grid, f, opts);
        const double zero_residual = sup_distance(zero_result.fractal, zero_result.seed_lattice);

        std::mt19937_64 rng(0xacce5508);
        std::uniform_real_distribution<double> scalar(-1.0, 1.0);
        double worst_linearity = 0.0;
        for (int trial = 0; trial < 10; ++trial) {
            RealFunction a = random_seed(rng, 1);
            RealFunction b = random_seed(rng, 1);
            LinearityReport report =
                verify_linearity(FunctionOperator::corner_interpolant(),
                                 ScalingFunction::constant(0.3), grid, a, b, scalar(rng), opts);
            worst_linearity = std::max(worst_linearity, report.residual);
        }
        std::ostringstream os;
        os << "identity residual " << identity_residual << ", zero-scaling residual "
           << zero_residual << ", max linearity residual " << worst_linearity;
        detail = os.str();
        return identity_residual <= 1e-9 && zero_residual <= 1e-9 &&
               worst_linearity <= 3.0 * opts.tol;
    }});

    criteria.push_back({9, "relative bounds with explicit constants on 50 pairs",
                        [&](std::string& detail) {
        GridPartition grid({build_axis_partition({0.0, 0.35, 1.0})});
        SolveOptions opts;
        opts.tol = 1e-9;
        opts.refinement = 32;
        opts.max_iter = 400;
        std::mt19937_64 rng(0xacce5509);
        std::vector<RealFunction> samples;
        for (int i = 0; i < 8; ++i) samples.push_back(random_seed(rng, 1));
        std::vector<std::pair<RealFunction, RealFunction>> pairs;
        for (int i = 0; i < 50; ++i) {
            pairs.emplace_back(random_seed(rng, 1), random_seed(rng, 1));
        }
        OperatorBoundReport report =
            verify_relative_bounds(FunctionOperator::corner_interpolant(),
                                   ScalingFunction::constant(0.4), grid, samples, pairs, opts);
        const double cap = (1.0 + 0.4 * 1.0) / (1.0 - 0.4) + 1e-6;
        std::ostringstream os;
        os << "min slacks (" << report.min_bounded_slack << ", " << report.min_lipschitz_slack
           << "), empirical operator Lipschitz " << report.empirical_operator_lipschitz
           << " <= " << cap;
        detail = os.str();
        return report.passed && report.empirical_operator_lipschitz <= cap;
    }});

    criteria.push_back({10, "inverse round trip in the certified regime", [&](std::string& detail) {
        GridPartition grid({build_axis_partition({0.0, 0.5, 1.0})});
        SolveOptions opts;
        opts.tol = 1e-10;
        opts.refinement = 64;
        opts.max_iter = 400;
        std::vector<RealFunction> seeds;
        seeds.emplace_back([](std::span<const double> X) { return X[0] * X[0]; }, "x^2");
        seeds.emplace_back([](std::span<const double> X) { return X[0] * X[0] * X[0]; }, "x^3");
        seeds.emplace_back([](std::span<const double> X) { return std::sin(3.0 * X[0]); },
                           "sin(3x)");
        seeds.emplace_back([](std::span<const double> X) { return std::exp(X[0]) - 1.0; },
                           "exp(x)-1");
        seeds.emplace_back(
            [](std::span<const double> X) { return 0.5 * X[0] + std::cos(2.0 * X[0]); },
            "mixed");
        double worst = 0.0;
        bool certified = true;
        for (const RealFunction& f : seeds) {
            AlphaFractalResult forward =
                apply_fractal_operator(FunctionOperator::corner_interpolant(),
                                       ScalingFunction::constant(0.2), grid, f, opts);
            InvertOptions iopts;
            iopts.tol = 1e-10;
            iopts.max_iter = 400;
            iopts.refinement = 64;
            InvertResult inv =
                invert_fractal_operator(forward.fractal, FunctionOperator::corner_interpolant(),
                                        ScalingFunction::constant(0.2), grid, iopts);
            certified = certified && inv.certified_bilipschitz;
            worst = std::max(worst, sup_distance(inv.seed, forward.seed_lattice));
        }
        std::ostringstream os;
        os << "max round-trip error " << worst << " over 5 seeds, certificate "
           << (certified ? "held" : "MISSING");
        detail = os.str();
        return worst <= 2e-8 && certified;
    }});

    criteria.push_back({11, "attractor consistency at depth 10", [&](std::string& detail) {
        GridPartition grid({build_axis_partition({0.0, 0.5, 1.0})});
        RealFunction f(
            [](std::span<const double> X) { return X[0] * X[0] + 0.2 * std::sin(3.0 * X[0]); },
            "wavy");
        AlphaAssembly assembly =
            build_alpha_system(f, ScalingFunction::constant(0.3),
                               BaseFunction::corner_interpolant(f, grid), grid, 128);
        SolveOptions opts;
        opts.tol = 1e-10;
        opts.refinement = 128;
        opts.max_iter = 400;
        auto [fractal, diag] = solve_fif(assembly.system, opts);
        auto residual_at_depth = [&](int depth) {
            AttractorOptions aopts;
            aopts.depth = depth;
            aopts.seed_point = std::vector<double>{0.3};
            aopts.seed_value = assembly.system.data_max() + 1.0;  // start off the graph
            AttractorSamples points = sample_attractor(assembly.system, aopts);
            double worst = 0.0;
            for (std::size_t p = 0; p < points.point_count(); ++p) {
                const std::vector<double> X{points.coordinates[p]};
                worst = std::max(worst, std::abs(points.values[p] - fractal.evaluate(X)));
            }
            return worst;
        };
        const double at2 = residual_at_depth(2);
        const double at10 = residual_at_depth(10);
        std::ostringstream os;
        os << "max |y - fractal(X)| = " << at10 << " at depth 10 (depth 2: " << at2 << ")";
        detail = os.str();
        return at10 <= 1e-3 && at10 < at2;
    }});

    criteria.push_back({12, "2D solve performance at refinement 128", [&](std::string& detail) {
        GridPartition grid({build_axis_partition({0.0, 1.0 / 3.0, 2.0 / 3.0, 1.0}),
                            build_axis_partition({0.0, 1.0 / 3.0, 2.0 / 3.0, 1.0})});
        RealFunction f(
            [](std::span<const double> X) {
                return std::sin(3.0 * X[0]) * std::cos(2.0 * X[1]) + X[0] * X[1];
            },
            "2D smooth");
        const auto start = Clock::now();
        SolveOptions opts;
        opts.tol = 1e-8;
        opts.refinement = 128;
        opts.max_iter = 200;
        AlphaFractalResult result =
            construct_alpha_fractal(f, grid, ScalingFunction::constant(0.5),
                                    BaseFunction::corner_interpolant(f, grid), opts);
        const double elapsed = seconds_since(start);
        std::ostringstream os;
        os << result.fractal.size() << " lattice points, " << result.diagnostics.iterations
           << " iterations, " << elapsed << " s";
        detail = os.str();
        return elapsed < 5.0 && result.fractal.size() > 140000;
    }});

    int failures = 0;
    for (const Criterion& criterion : criteria) {
        std::string detail;
        bool passed = false;
        try {
            passed = criterion.run(detail);
        } catch (const std::exception& e) {
            detail = std::string("exception: ") + e.what();
        }
        std::printf("[%s] criterion %2d: %s (%s)\n", passed ? "PASS" : "FAIL", criterion.id,
                    criterion.name.c_str(), detail.c_str());
        std::fflush(stdout);
        if (!passed) ++failures;
    }
    if (failures == 0) {
        std::printf("all %zu acceptance criteria passed\n", criteria.size());
    } else {
        std::printf("%d acceptance criteria FAILED\n", failures);
    }
    return failures == 0 ? 0 : 1;
}
