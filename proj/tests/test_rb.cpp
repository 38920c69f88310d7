#include <cmath>
#include <random>

#include "doctest.h"
#include "fif/alpha_fractal.hpp"
#include "fif/rb.hpp"

using namespace fif;

namespace {

GridPartition unit_grid_1d() { return GridPartition({build_axis_partition({0.0, 0.5, 1.0})}); }

RealFunction square() {
    return RealFunction([](std::span<const double> X) { return X[0] * X[0]; }, "x^2");
}

RealFunction line() {
    return RealFunction([](std::span<const double> X) { return X[0]; }, "x");
}

/// The worked 1D instance: seed x^2 on {0, 0.5, 1}, base x, constant scaling.
AlphaAssembly desk_assembly(double alpha_value, int refinement = 64) {
    GridPartition grid = unit_grid_1d();
    RealFunction f = square();
    BaseFunction base = BaseFunction::checked(line(), f, grid);
    return build_alpha_system(f, ScalingFunction::constant(alpha_value), base, grid, refinement);
}

/// Hand-built 1D system with explicit vertical maps (no scaling construction).
FifSystem manual_system(double gamma, double corner_shift, double matching_shift) {
    GridPartition grid = unit_grid_1d();
    DataTensor data = DataTensor::from_values(grid, {0.0, 0.25, 1.0});
    // F1(x, y) = (x/2)^2 + gamma (y - x); F2(x, y) = (1 - x/2)^2 + gamma (y - x).
    auto F1 = [gamma, corner_shift](std::span<const double> X, double y) {
        const double u = 0.5 * X[0];
        return u * u + gamma * (y - X[0]) + corner_shift;
    };
    auto F2 = [gamma, matching_shift](std::span<const double> X, double y) {
        const double u = 1.0 - 0.5 * X[0];
        return u * u + gamma * (y - X[0]) + matching_shift;
    };
    std::vector<VerticalMap> maps;
    maps.emplace_back(std::vector<int>{1}, gamma, VerticalMap::Evaluator(F1));
    maps.emplace_back(std::vector<int>{2}, gamma, VerticalMap::Evaluator(F2));
    return FifSystem(grid, std::move(data), std::move(maps));
}

SampledFunction random_corner_pinned(const FifSystem& system, int refinement,
                                     std::mt19937_64& rng) {
    const GridPartition& grid = system.grid();
    std::uniform_real_distribution<double> val(-1.0, 2.0);
    SampledFunction shape = SampledFunction::from_node_data(grid, refinement, system.data());
    std::vector<double> values(shape.size());
    for (double& v : values) v = val(rng);
    SampledFunction g = shape.with_values(std::move(values));
    // Pin the domain corners to the data (membership in the iteration space).
    std::vector<double> pinned(g.values().begin(), g.values().end());
    const int n = grid.dimension();
    const std::size_t corners = static_cast<std::size_t>(1) << n;
    for (std::size_t c = 0; c < corners; ++c) {
        std::vector<int> node(static_cast<std::size_t>(n));
        std::size_t flat = 0;
        auto strides = g.strides();
        auto sh = g.shape();
        for (int k = 0; k < n; ++k) {
            const bool hi = (c >> k) & 1u;
            node[static_cast<std::size_t>(k)] = hi ? grid.axis(k).cell_count() : 0;
            flat += (hi ? sh[static_cast<std::size_t>(k)] - 1 : 0) *
                    strides[static_cast<std::size_t>(k)];
        }
        pinned[flat] = system.data().at(node);
    }
    return g.with_values(std::move(pinned));
}

}  // namespace

TEST_SUITE_BEGIN("rb");

TEST_CASE("system construction validates the vertical map family") {
    CHECK_THROWS_AS(manual_system(1.0, 0.0, 0.0), FifError);  // gamma not < 1
    FifSystem good = manual_system(0.4, 0.0, 0.0);
    CHECK(good.max_contraction() == 0.4);
}

TEST_CASE("data constraints: worked 1D instance has 4 corner checks") {
    FifSystem system = manual_system(0.4, 0.0, 0.0);
    ConstraintReport report = verify_data_constraints(system);
    CHECK(report.passed);
    CHECK(report.checks == 4);  // 2 cells x 2 corners
    CHECK(report.max_residual <= 1e-12);
}

TEST_CASE("data constraints: perturbed map is reported") {
    FifSystem bad = manual_system(0.4, 0.1, 0.0);
    ConstraintReport report = check_data_constraints(bad);
    CHECK(!report.passed);
    CHECK_THROWS_AS(verify_data_constraints(bad), FifError);
    try {
        verify_data_constraints(bad);
    } catch (const FifError& e) {
        CHECK(e.code() == ErrorCode::DataConstraintViolation);
    }
}

TEST_CASE("scaling-construction systems satisfy the data constraints") {
    AlphaAssembly assembly = desk_assembly(0.4);
    ConstraintReport report = verify_data_constraints(assembly.system);
    CHECK(report.passed);
    CHECK(report.checks == 4);
}

TEST_CASE("y-contraction estimate") {
    SUBCASE("constant scaling 0.4 gives exactly 0.4") {
        AlphaAssembly assembly = desk_assembly(0.4);
        const double est =
            estimate_y_contraction(assembly.system.vertical_map_at(0), assembly.system.grid(), 500);
        CHECK(est == doctest::Approx(0.4).epsilon(1e-12));
    }
    SUBCASE("zero scaling is y-independent") {
        AlphaAssembly assembly = desk_assembly(0.0);
        const double est =
            estimate_y_contraction(assembly.system.vertical_map_at(0), assembly.system.grid(), 200);
        CHECK(est == 0.0);
    }
    SUBCASE("underdeclared contraction is flagged") {
        GridPartition grid = unit_grid_1d();
        DataTensor data = DataTensor::from_values(grid, {0.0, 0.0, 0.0});
        auto F = [](std::span<const double>, double y) { return 0.4 * y; };
        std::vector<VerticalMap> maps;
        maps.emplace_back(std::vector<int>{1}, 0.1, VerticalMap::Evaluator(F));
        maps.emplace_back(std::vector<int>{2}, 0.1, VerticalMap::Evaluator(F));
        FifSystem system(grid, std::move(data), std::move(maps));
        CHECK_THROWS_AS(estimate_y_contraction(system.vertical_map_at(0), grid, 200), FifError);
    }
}

TEST_CASE("matching conditions") {
    SUBCASE("scaling-construction maps match on all faces") {
        AlphaAssembly assembly = desk_assembly(0.4);
        MatchingReport report = verify_matching_conditions(assembly.system);
        CHECK(report.passed);
        CHECK(report.faces_checked == 1);
        CHECK(report.max_residual <= 1e-12);
    }
    SUBCASE("a 2x2 grid has 4 shared faces") {
        GridPartition grid({build_axis_partition({0.0, 0.5, 1.0}),
                            build_axis_partition({0.0, 0.5, 1.0})});
        RealFunction f([](std::span<const double> X) { return X[0] + X[1]; }, "plane");
        AlphaAssembly assembly = build_alpha_system(
            f, ScalingFunction::constant(0.3), BaseFunction::corner_interpolant(f, grid), grid, 8);
        MatchingReport report = verify_matching_conditions(assembly.system, 10, 3);
        CHECK(report.passed);
        CHECK(report.faces_checked == 4);  // 2 interior-knot faces per axis
    }
    SUBCASE("independent affine maps on adjacent cells violate matching") {
        FifSystem bad = manual_system(0.3, 0.0, 0.2);
        MatchingReport report = check_matching_conditions(bad, 20, 3);
        CHECK(!report.passed);
        CHECK_THROWS_AS(verify_matching_conditions(bad, 20, 3), FifError);
    }
}

TEST_CASE("operator sweep: worked values") {
    AlphaAssembly assembly = desk_assembly(0.4);

    SUBCASE("base as start: (Tg)(0.25) = 0.0625") {
        SampledFunction g = SampledFunction::from_function(
            assembly.system.grid(), 64, [](std::span<const double> X) { return X[0]; });
        SampledFunction Tg = apply_rb_operator(assembly.system, g);
        CHECK(Tg.evaluate({0.25}) == doctest::Approx(0.0625).epsilon(1e-12));
        // One more application starts the recursion toward the fixed point.
        SampledFunction TTg = apply_rb_operator(assembly.system, Tg);
        CHECK(TTg.evaluate({0.25}) == doctest::Approx(-0.0375).epsilon(1e-12));
    }
    SUBCASE("seed as base: the seed is an immediate fixed point") {
        GridPartition grid = unit_grid_1d();
        RealFunction f = square();
        AlphaAssembly self = build_alpha_system(f, ScalingFunction::constant(0.5),
                                                BaseFunction::seed_itself(f), grid, 32);
        SampledFunction g = self.seed_lattice;
        SampledFunction Tg = apply_rb_operator(self.system, g);
        CHECK(sup_distance(Tg, g) <= 1e-13);
    }
    SUBCASE("zero scaling maps anything to the seed") {
        AlphaAssembly zero = desk_assembly(0.0, 32);
        std::mt19937_64 rng(3);
        SampledFunction g = random_corner_pinned(zero.system, 32, rng);
        SampledFunction Tg = apply_rb_operator(zero.system, g);
        CHECK(sup_distance(Tg, zero.seed_lattice) <= 1e-13);
    }
}

TEST_CASE("operator contraction on random pairs") {
    for (double a : {0.3, 0.6, 0.85}) {
        AlphaAssembly assembly = desk_assembly(a, 16);
        const double gamma = assembly.system.max_contraction();
        std::mt19937_64 rng(101);
        for (int trial = 0; trial < 25; ++trial) {
            SampledFunction g = random_corner_pinned(assembly.system, 16, rng);
            SampledFunction h = random_corner_pinned(assembly.system, 16, rng);
            const double lhs = sup_distance(apply_rb_operator(assembly.system, g),
                                            apply_rb_operator(assembly.system, h));
            CHECK(lhs <= gamma * sup_distance(g, h) + 1e-12);
        }
    }
}

TEST_CASE("well-definedness: adjacent cells give the same value on shared faces") {
    GridPartition grid({build_axis_partition({0.0, 0.4, 1.0}),
                        build_axis_partition({0.0, 0.5, 1.0})});
    RealFunction f([](std::span<const double> X) { return std::sin(2.0 * X[0]) + X[1] * X[1]; },
                   "wavy");
    AlphaAssembly assembly = build_alpha_system(f, ScalingFunction::constant(0.45),
                                                BaseFunction::corner_interpolant(f, grid), grid, 16);
    std::mt19937_64 rng(5);
    std::uniform_real_distribution<double> unit(0.0, 1.0);
    SampledFunction g = random_corner_pinned(assembly.system, 16, rng);
    for (int s = 0; s < 50; ++s) {
        // Probe on the axis-0 face x = 0.4.
        const std::vector<double> X{0.4, unit(rng)};
        CellLocation loc = locate_cell(grid, X);
        std::vector<int> left = loc.cell;
        std::vector<int> right = loc.cell;
        left[0] = 1;
        right[0] = 2;
        CHECK(std::abs(rb_value_via_cell(assembly.system, g, X, left) -
                       rb_value_via_cell(assembly.system, g, X, right)) <= 1e-10);
    }
}

TEST_CASE("solver basics") {
    SUBCASE("zero scaling converges immediately to the seed values") {
        AlphaAssembly zero = desk_assembly(0.0, 32);
        auto [fif, diag] = solve_fif(zero.system, {.tol = 1e-12, .refinement = 32});
        CHECK(sup_distance(fif, zero.seed_lattice) <= 1e-13);
        CHECK(diag.iterations <= 2);
    }
    SUBCASE("constant data with matching base has the constant as fixed point") {
        GridPartition grid = unit_grid_1d();
        RealFunction c = RealFunction::constant(0.7);
        AlphaAssembly assembly = build_alpha_system(c, ScalingFunction::constant(0.5),
                                                    BaseFunction::seed_itself(c), grid, 16);
        auto [fif, diag] = solve_fif(assembly.system, {.tol = 1e-12, .refinement = 16});
        for (double v : fif.values()) CHECK(v == doctest::Approx(0.7).epsilon(1e-12));
    }
    SUBCASE("geometric decay at the declared contraction") {
        // Non-dyadic knots keep the pullback chain off-lattice, so the decay
        // has a clean infinite geometric tail.
        GridPartition grid({build_axis_partition({0.0, 0.4, 1.0})});
        RealFunction f([](std::span<const double> X) { return std::sin(2.0 * X[0]) + X[0] * X[0]; },
                       "mixed");
        AlphaAssembly assembly = build_alpha_system(f, ScalingFunction::constant(0.5),
                                                    BaseFunction::corner_interpolant(f, grid),
                                                    grid, 64);
        auto [fif, diag] = solve_fif(assembly.system, {.tol = 1e-10, .refinement = 64});
        CHECK(diag.iterations <= 40);
        CHECK(diag.contraction_estimate == doctest::Approx(0.5).epsilon(0.05));
        CHECK(diag.aposteriori_bound <= 1e-9);
        CHECK(diag.max_contraction == 0.5);
    }
    SUBCASE("solved node values equal the data") {
        AlphaAssembly assembly = desk_assembly(0.7);
        auto [fif, diag] = solve_fif(assembly.system, {.tol = 1e-10, .refinement = 64});
        CHECK(fif.node_value(std::vector<int>{0}) == doctest::Approx(0.0).epsilon(1e-13));
        CHECK(fif.node_value(std::vector<int>{1}) == doctest::Approx(0.25).epsilon(1e-13));
        CHECK(fif.node_value(std::vector<int>{2}) == doctest::Approx(1.0).epsilon(1e-13));
    }
    SUBCASE("two admissible starts converge to the same fixed point") {
        AlphaAssembly assembly = desk_assembly(0.5, 32);
        const double tol = 1e-9;
        SolveOptions opts{.tol = tol, .refinement = 32};
        auto [f1, d1] = solve_fif(assembly.system, opts);
        std::mt19937_64 rng(77);
        SolveOptions opts2 = opts;
        opts2.initial = random_corner_pinned(assembly.system, 32, rng);
        auto [f2, d2] = solve_fif(assembly.system, opts2);
        CHECK(sup_distance(f1, f2) <= 2.0 * tol);
    }
    SUBCASE("iteration cap raises NotConverged") {
        AlphaAssembly assembly = desk_assembly(0.5);
        CHECK_THROWS_AS(solve_fif(assembly.system, {.tol = 1e-14, .max_iter = 3}), FifError);
        try {
            solve_fif(assembly.system, {.tol = 1e-14, .max_iter = 3});
        } catch (const FifError& e) {
            CHECK(e.code() == ErrorCode::NotConverged);
        }
    }
    SUBCASE("constraint failures surface as ConstraintsUnverified") {
        FifSystem bad = manual_system(0.3, 0.1, 0.0);
        CHECK_THROWS_AS(solve_fif(bad, {}), FifError);
        try {
            solve_fif(bad, {});
        } catch (const FifError& e) {
            CHECK(e.code() == ErrorCode::ConstraintsUnverified);
        }
        // Waiving the verification lets the iteration run.
        auto [fif, diag] = solve_fif(bad, {.tol = 1e-8, .assume_verified = true});
        CHECK(diag.iterations > 0);
    }
}

TEST_CASE("self-referential residual") {
    AlphaAssembly assembly = desk_assembly(0.4);
    auto [fif, diag] = solve_fif(assembly.system, {.tol = 1e-10, .refinement = 64});

    SUBCASE("node probes are pinned to the data") {
        std::vector<std::vector<double>> probes{{0.0}, {0.5}, {1.0}};
        CHECK(self_referential_residual(fif, assembly.system, probes) <= 1e-10);
    }
    SUBCASE("one-step recursion values from the node data") {
        // Inside cell 1 the pullback of 0.25 is the node 0.5, so the equation
        // pins f(0.25) = 0.0625 + 0.4 (0.25 - 0.5) = -0.0375. In the even
        // cell, the pullback of 0.75 is also 0.5: f(0.75) = 0.4625.
        CHECK(fif.evaluate({0.25}) == doctest::Approx(-0.0375).epsilon(1e-9));
        CHECK(fif.evaluate({0.75}) == doctest::Approx(0.4625).epsilon(1e-9));
        std::vector<std::vector<double>> probes{{0.25}, {0.75}};
        CHECK(self_referential_residual(fif, assembly.system, probes) <= 1e-9);
    }
    SUBCASE("random lattice probes stay near the solver tolerance") {
        std::mt19937_64 rng(55);
        std::uniform_int_distribution<std::size_t> pick(0, fif.size() - 1);
        std::vector<std::vector<double>> probes;
        auto coords = fif.axis_coordinates(0);
        for (int i = 0; i < 64; ++i) probes.push_back({coords[pick(rng) % coords.size()]});
        CHECK(self_referential_residual(fif, assembly.system, probes) <= 1e-9);
    }
}

TEST_CASE("attractor sampling") {
    AlphaAssembly assembly = desk_assembly(0.4, 128);

    SUBCASE("depth 1 fan-out from the node graph points") {
        AttractorSamples points = sample_attractor(assembly.system, {.depth = 1});
        CHECK(points.point_count() == 6);  // 3 nodes x 2 cells
    }
    SUBCASE("zero scaling lands on the seed graph after one step") {
        AlphaAssembly zero = desk_assembly(0.0, 64);
        AttractorSamples points = sample_attractor(zero.system, {.depth = 1});
        for (std::size_t p = 0; p < points.point_count(); ++p) {
            const double x = points.coordinates[p];
            CHECK(points.values[p] == doctest::Approx(x * x).epsilon(1e-12));
        }
    }
    SUBCASE("consistency with the solved function, improving with depth") {
        auto [fif, diag] = solve_fif(assembly.system, {.tol = 1e-10, .refinement = 128});
        AttractorOptions off_graph;
        off_graph.seed_point = std::vector<double>{0.3};
        off_graph.seed_value = 2.0;  // far off the graph
        auto residual = [&](int depth) {
            AttractorOptions o = off_graph;
            o.depth = depth;
            AttractorSamples pts = sample_attractor(assembly.system, o);
            double worst = 0.0;
            for (std::size_t p = 0; p < pts.point_count(); ++p) {
                const std::vector<double> X{pts.coordinates[p]};
                worst = std::max(worst, std::abs(pts.values[p] - fif.evaluate(X)));
            }
            return worst;
        };
        const double at2 = residual(2);
        const double at8 = residual(8);
        CHECK(at8 < at2);
        CHECK(at8 <= 1e-2);
    }
    SUBCASE("output cap raises DepthTooLarge") {
        CHECK_THROWS_AS(sample_attractor(assembly.system, {.depth = 30, .max_points = 1000}),
                        FifError);
    }
    SUBCASE("seed point outside the domain is rejected") {
        AttractorOptions o;
        o.seed_point = std::vector<double>{1.5};
        CHECK_THROWS_AS(sample_attractor(assembly.system, o), FifError);
    }
}

TEST_SUITE_END();
