#include "fif/commands.hpp"

#include <cmath>
#include <fstream>
#include <iomanip>
#include <ostream>
#include <random>
#include <sstream>

#include "json.hpp"

#include "fif/csv.hpp"

namespace fif {

namespace {

using nlohmann::json;

void ensure_dir(const std::filesystem::path& dir) {
    if (dir.empty()) return;
    std::error_code ec;
    std::filesystem::create_directories(dir, ec);
    if (ec) raise(ErrorCode::IoError, "cannot create output directory " + dir.string());
}

void write_json(const json& j, const std::filesystem::path& path) {
    std::ofstream out(path);
    if (!out) raise(ErrorCode::IoError, "cannot write " + path.string());
    out << j.dump(2) << "\n";
}

json diagnostics_json(const SolveDiagnostics& d) {
    return json{{"iterations", d.iterations},
                {"final_sup_change", d.final_sup_change},
                {"contraction_estimate", d.contraction_estimate},
                {"aposteriori_bound", d.aposteriori_bound},
                {"max_contraction", d.max_contraction}};
}

/// One verification line; keeps the command output uniform.
struct CheckLine {
    std::string name;
    bool passed;
    double value;
    double tolerance;
    std::string note;
};

void print_check(std::ostream& os, const CheckLine& line) {
    os << (line.passed ? "[ PASS ] " : "[ FAIL ] ") << line.name << ": " << std::scientific
       << std::setprecision(3) << line.value << " (tolerance " << line.tolerance << ")";
    if (!line.note.empty()) os << " - " << line.note;
    os << "\n" << std::defaultfloat;
}

json check_json(const CheckLine& line) {
    return json{{"name", line.name},
                {"passed", line.passed},
                {"value", line.value},
                {"tolerance", line.tolerance},
                {"note", line.note}};
}

std::vector<std::vector<double>> random_domain_points(const GridPartition& grid, int count,
                                                      std::uint64_t seed) {
    std::mt19937_64 rng(seed);
    std::uniform_real_distribution<double> unit(0.0, 1.0);
    std::vector<std::vector<double>> points;
    points.reserve(static_cast<std::size_t>(count));
    for (int i = 0; i < count; ++i) {
        std::vector<double> X(static_cast<std::size_t>(grid.dimension()));
        for (int k = 0; k < grid.dimension(); ++k) {
            const AxisPartition& ax = grid.axis(k);
            X[static_cast<std::size_t>(k)] = ax.lower() + ax.width() * unit(rng);
        }
        points.push_back(std::move(X));
    }
    return points;
}

std::vector<std::vector<double>> node_points(const GridPartition& grid) {
    std::vector<std::vector<double>> points;
    const std::vector<int> shape = grid.node_shape();
    for_each_multi_index(shape, 0, [&](std::span<const int> node) {
        points.push_back(grid.node_point(node));
    });
    return points;
}

/// Built-in sample functions for operator studies, dimension-agnostic.
std::vector<RealFunction> default_operator_samples() {
    std::vector<RealFunction> samples;
    samples.emplace_back(
        [](std::span<const double> X) {
            double s = 0.0;
            for (double x : X) s += x * x;
            return s;
        },
        "sum of squares");
    samples.emplace_back(
        [](std::span<const double> X) {
            double s = 0.0;
            for (double x : X) s += x;
            return s;
        },
        "sum of coordinates");
    samples.emplace_back(
        [](std::span<const double> X) {
            double s = 1.0;
            for (double x : X) s *= std::sin(x + 0.5);
            return s;
        },
        "sine product");
    samples.push_back(RealFunction::constant(1.0));
    return samples;
}

int run_construct(const RunConfig& cfg, const std::filesystem::path& out_dir, std::ostream& os) {
    ProblemSetup setup = setup_problem(cfg);
    AlphaFractalResult result =
        construct_alpha_fractal(setup.seed, setup.grid, setup.alpha, setup.base, setup.solver);
    const double node_residual = node_interpolation_residual(result);
    PerturbationBoundReport bounds = check_perturbation_bounds(result);

    os << "constructed fractal perturbation on " << setup.grid.describe() << "\n"
       << "  scaling bound " << result.alpha_bound << ", base " << result.base_label
       << ", refinement " << result.fractal.refinement() << "\n"
       << "  iterations " << result.diagnostics.iterations << ", final sup-change "
       << result.diagnostics.final_sup_change << ", error bound "
       << result.diagnostics.aposteriori_bound << "\n"
       << "  node interpolation residual " << node_residual << "\n"
       << "  ||fractal - seed|| = " << bounds.seed_distance << " (bounds " << bounds.relative_bound
       << " / " << bounds.absolute_bound << ")\n";

    if (!out_dir.empty()) {
        ensure_dir(out_dir);
        write_lattice_csv(result.fractal, out_dir / "samples.csv");
        json j{{"grid", setup.grid.describe()},
               {"alpha_bound", result.alpha_bound},
               {"base", result.base_label},
               {"seed", result.seed_label},
               {"refinement", result.fractal.refinement()},
               {"node_interpolation_residual", node_residual},
               {"diagnostics", diagnostics_json(result.diagnostics)},
               {"sup_norms",
                {{"fractal_minus_seed", bounds.seed_distance},
                 {"fractal_minus_base", bounds.base_distance},
                 {"seed_minus_base", bounds.seed_base_distance}}}};
        write_json(j, out_dir / "diagnostics.json");
        os << "  wrote " << (out_dir / "samples.csv").string() << "\n";
    }
    return bounds.passed ? 0 : 2;
}

int run_verify(const RunConfig& cfg, const std::filesystem::path& out_dir, std::ostream& os) {
    ProblemSetup setup = setup_problem(cfg);
    const GridPartition& grid = setup.grid;
    std::vector<CheckLine> checks;

    AlphaAssembly assembly =
        build_alpha_system(setup.seed, setup.alpha, setup.base, grid, setup.solver.refinement);
    const FifSystem& system = assembly.system;

    // Shared inverse images at interior knots.
    {
        double worst = 0.0;
        bool ok = true;
        for (int k = 0; k < grid.dimension(); ++k) {
            SharedPointReport r = check_shared_points(grid.axis(k), system.axis_maps(k));
            worst = std::max(worst, r.max_residual);
            ok = ok && r.passed;
        }
        checks.push_back({"shared inverse images at interior knots", ok, worst, 1e-12, ""});
    }

    // Cell map round trips.
    {
        std::mt19937_64 rng(0xab5fe11);
        std::uniform_real_distribution<double> unit(0.0, 1.0);
        double worst = 0.0;
        for (int k = 0; k < grid.dimension(); ++k) {
            const AxisPartition& ax = grid.axis(k);
            for (const AffineCellMap& map : system.axis_maps(k)) {
                for (int s = 0; s < 64; ++s) {
                    const double x = ax.lower() + ax.width() * unit(rng);
                    worst = std::max(worst, std::abs(map.inverse_unchecked(map.forward_unchecked(x)) - x));
                }
            }
        }
        checks.push_back({"cell map round trip", worst <= 1e-12, worst, 1e-12, ""});
    }

    // Data constraints at cell corners.
    {
        ConstraintReport r = check_data_constraints(system);
        checks.push_back({"node data constraints", r.passed, r.max_residual, r.tolerance,
                          std::to_string(r.checks) + " corner checks"});
    }

    // Declared y-contraction vs samples.
    {
        double worst = 0.0;
        bool ok = true;
        std::string note;
        for (std::size_t c = 0; c < grid.cell_count(); ++c) {
            try {
                worst = std::max(worst, estimate_y_contraction(system.vertical_map_at(c), grid,
                                                               cfg.verify.contraction_samples));
            } catch (const FifError& e) {
                ok = false;
                if (note.empty()) note = e.what();
            }
        }
        checks.push_back({"declared y-contraction dominates samples", ok, worst,
                          system.max_contraction() + 1e-10, note});
    }

    // Matching conditions on shared faces.
    {
        MatchingReport r = check_matching_conditions(system, cfg.verify.samples_per_face,
                                                     cfg.verify.y_samples);
        checks.push_back({"matching conditions on shared faces", r.passed, r.max_residual,
                          r.tolerance,
                          std::to_string(r.faces_checked) + " faces, " +
                              std::to_string(r.points_checked) + " samples"});
    }

    // Solve and check the solved-function properties.
    auto [fractal, diagnostics] = solve_fif(system, setup.solver);
    AlphaFractalResult result{fractal,
                              diagnostics,
                              assembly.seed_lattice,
                              assembly.base_lattice,
                              setup.alpha.declared_bound(),
                              setup.seed.label(),
                              setup.alpha.label(),
                              setup.base.label(),
                              grid.describe()};

    {
        const double r = node_interpolation_residual(result);
        checks.push_back({"solved function interpolates the data at nodes", r <= 1e-9, r, 1e-9, ""});
    }
    {
        const auto probes = node_points(grid);
        const double r = self_referential_residual(fractal, system, probes);
        checks.push_back({"self-referential equation at nodes", r <= 1e-10, r, 1e-10, ""});
    }
    {
        // Lattice probes satisfy the discrete identity up to solver residue;
        // off-lattice probes add interpolation error, reported as a note.
        std::mt19937_64 rng(0x9e11);
        std::vector<std::vector<double>> lattice_probes;
        std::vector<double> X(static_cast<std::size_t>(grid.dimension()));
        for (int i = 0; i < cfg.verify.probe_count; ++i) {
            for (int k = 0; k < grid.dimension(); ++k) {
                auto coords = fractal.axis_coordinates(k);
                X[static_cast<std::size_t>(k)] = coords[std::uniform_int_distribution<std::size_t>(
                    0, coords.size() - 1)(rng)];
            }
            lattice_probes.push_back(X);
        }
        const double r = self_referential_residual(fractal, system, lattice_probes);
        const double tol = 10.0 * setup.solver.tol;
        const double off = self_referential_residual(
            fractal, system, random_domain_points(grid, cfg.verify.probe_count, 0x9e12));
        std::ostringstream note;
        note << "off-lattice residual " << std::scientific << std::setprecision(3) << off
             << " (interpolation-limited)";
        checks.push_back(
            {"self-referential equation at random lattice probes", r <= tol, r, tol, note.str()});
    }
    {
        // Well-definedness: the operator value agrees through both adjacent
        // cells at shared-face probes.
        std::mt19937_64 rng(0xface5);
        std::uniform_real_distribution<double> unit(0.0, 1.0);
        double worst = 0.0;
        int probes = 0;
        for (int k = 0; k < grid.dimension() && probes < 200; ++k) {
            const AxisPartition& ax = grid.axis(k);
            for (int knot = 1; knot < ax.cell_count() && probes < 200; ++knot) {
                for (int s = 0; s < 25 && probes < 200; ++s) {
                    std::vector<double> X(static_cast<std::size_t>(grid.dimension()));
                    for (int j = 0; j < grid.dimension(); ++j) {
                        const AxisPartition& aj = grid.axis(j);
                        X[static_cast<std::size_t>(j)] =
                            j == k ? ax.knot(knot) : aj.lower() + aj.width() * unit(rng);
                    }
                    CellLocation loc = locate_cell(grid, X);
                    std::vector<int> left = loc.cell;
                    std::vector<int> right = loc.cell;
                    left[static_cast<std::size_t>(k)] = knot;
                    right[static_cast<std::size_t>(k)] = knot + 1;
                    const double vl = rb_value_via_cell(system, fractal, X, left);
                    const double vr = rb_value_via_cell(system, fractal, X, right);
                    worst = std::max(worst, std::abs(vl - vr));
                    ++probes;
                }
            }
        }
        checks.push_back({"operator value agrees across adjacent cells", worst <= 1e-10, worst,
                          1e-10, std::to_string(probes) + " face probes"});
    }
    {
        PerturbationBoundReport r = check_perturbation_bounds(result);
        checks.push_back({"perturbation bound (relative form)",
                          r.seed_distance <= r.relative_bound + r.tolerance, r.seed_distance,
                          r.relative_bound + r.tolerance, ""});
        checks.push_back({"perturbation bound (absolute form)",
                          r.seed_distance <= r.absolute_bound + r.tolerance, r.seed_distance,
                          r.absolute_bound + r.tolerance, ""});
    }

    bool all_passed = true;
    for (const CheckLine& line : checks) {
        print_check(os, line);
        all_passed = all_passed && line.passed;
    }
    os << (all_passed ? "verification passed" : "verification FAILED") << " ("
       << checks.size() << " checks)\n";

    if (!out_dir.empty()) {
        ensure_dir(out_dir);
        json j;
        j["passed"] = all_passed;
        j["checks"] = json::array();
        for (const CheckLine& line : checks) j["checks"].push_back(check_json(line));
        j["diagnostics"] = diagnostics_json(diagnostics);
        write_json(j, out_dir / "verify.json");
    }
    return all_passed ? 0 : 2;
}

int run_study(const RunConfig& cfg, const std::filesystem::path& out_dir, std::ostream& os) {
    if (!cfg.study) {
        raise(ErrorCode::CrossFieldError, "study command needs a \"study\" config block");
    }
    ProblemSetup setup = setup_problem(cfg);
    std::vector<StudyRow> rows;
    if (!cfg.study->alphas.empty()) {
        std::vector<ScalingFunction> alphas;
        for (double a : cfg.study->alphas) alphas.push_back(ScalingFunction::constant(a));
        rows = convergence_study(setup.seed, setup.grid, setup.base, alphas, setup.solver);
    } else {
        std::vector<BaseFunction> bases;
        for (const std::string& src : cfg.study->base_exprs) {
            Expression e = Expression::parse(src);
            if (e.variable_count() > setup.grid.dimension()) {
                raise(ErrorCode::CrossFieldError, "study base \"" + src +
                                                      "\" references more variables than axes");
            }
            bases.push_back(BaseFunction::checked(e.to_function(), setup.seed, setup.grid));
        }
        rows = convergence_study(setup.seed, setup.grid, setup.alpha, bases, setup.solver);
    }

    os << "index  parameter      error          bound\n";
    bool ok = true;
    for (const StudyRow& row : rows) {
        const bool row_ok = row.error <= row.bound + 1e-9;
        ok = ok && row_ok;
        os << std::left << std::setw(7) << row.index << std::scientific << std::setprecision(6)
           << row.parameter_norm << "  " << row.error << "  " << row.bound
           << (row_ok ? "" : "  BOUND EXCEEDED") << "\n"
           << std::defaultfloat;
    }
    if (!out_dir.empty()) {
        ensure_dir(out_dir);
        write_study_csv(rows, out_dir / "study.csv");
        os << "wrote " << (out_dir / "study.csv").string() << "\n";
    }
    return ok ? 0 : 2;
}

int run_operator_bounds(const RunConfig& cfg, const std::filesystem::path& out_dir,
                        std::ostream& os) {
    if (!cfg.op) {
        raise(ErrorCode::CrossFieldError, "operator-bounds command needs an \"operator\" field");
    }
    ProblemSetup setup = setup_problem(cfg);
    FunctionOperator op = operator_from(*cfg.op);

    std::vector<RealFunction> samples;
    if (cfg.bounds.sample_exprs.empty()) {
        samples = default_operator_samples();
    } else {
        for (const std::string& src : cfg.bounds.sample_exprs) {
            samples.push_back(Expression::parse(src).to_function());
        }
    }
    std::vector<std::pair<RealFunction, RealFunction>> pairs;
    if (cfg.bounds.pair_exprs.empty()) {
        for (std::size_t i = 0; i + 1 < samples.size(); ++i) {
            pairs.emplace_back(samples[i], samples[i + 1]);
        }
    } else {
        for (const auto& [a, b] : cfg.bounds.pair_exprs) {
            pairs.emplace_back(Expression::parse(a).to_function(),
                               Expression::parse(b).to_function());
        }
    }

    OperatorBoundReport report =
        verify_relative_bounds(op, setup.alpha, setup.grid, samples, pairs, setup.solver);

    os << "operator " << op.name() << ", scaling bound " << report.alpha_bound << "\n"
       << "  relative boundedness: " << report.samples_checked << " samples, min slack "
       << report.min_bounded_slack << "\n"
       << "  relative Lipschitz:   " << report.pairs_checked << " pairs, min slack "
       << report.min_lipschitz_slack << "\n"
       << "  operator Lipschitz estimate " << report.empirical_operator_lipschitz
       << " vs constant " << report.operator_lipschitz_bound << "\n"
       << "  norm-ratio estimate " << report.rho_estimate << ", quasibound estimate "
       << report.quasibound_estimate << "\n";
    for (const std::string& failure : report.failures) os << "  FAIL: " << failure << "\n";

    if (!out_dir.empty()) {
        ensure_dir(out_dir);
        json j{{"operator", op.name()},
               {"alpha_bound", report.alpha_bound},
               {"constant_a", report.constant_a},
               {"constant_b", report.constant_b},
               {"refinement", setup.solver.refinement},
               {"samples_checked", report.samples_checked},
               {"pairs_checked", report.pairs_checked},
               {"min_bounded_slack", report.min_bounded_slack},
               {"min_lipschitz_slack", report.min_lipschitz_slack},
               {"empirical_operator_lipschitz", report.empirical_operator_lipschitz},
               {"operator_lipschitz_bound", report.operator_lipschitz_bound},
               {"rho_estimate", report.rho_estimate},
               {"quasibound_estimate", report.quasibound_estimate},
               {"passed", report.passed},
               {"failures", report.failures}};
        write_json(j, out_dir / "operator_bounds.json");
    }
    return report.passed ? 0 : 2;
}

int run_invert(const RunConfig& cfg, const std::filesystem::path& out_dir, std::ostream& os) {
    if (!cfg.op) {
        raise(ErrorCode::CrossFieldError, "invert command needs an \"operator\" field");
    }
    ProblemSetup setup = setup_problem(cfg);
    FunctionOperator op = operator_from(*cfg.op);

    InvertOptions iopts;
    iopts.tol = setup.solver.tol;
    iopts.max_iter = setup.solver.max_iter;
    iopts.refinement = setup.solver.refinement;

    SampledFunction target = [&] {
        if (cfg.invert.target_csv) {
            std::vector<double> values =
                read_values_csv(*cfg.invert.target_csv, setup.grid.dimension());
            return SampledFunction::from_values(setup.grid, setup.solver.refinement,
                                                std::move(values));
        }
        AlphaFractalResult forward =
            apply_fractal_operator(op, setup.alpha, setup.grid, setup.seed, setup.solver);
        return forward.fractal;
    }();

    InvertResult result = invert_fractal_operator(target, op, setup.alpha, setup.grid, iopts);

    os << "inversion with operator " << op.name() << ": " << result.iterations
       << " iterations, contraction factor " << result.contraction_factor << "\n"
       << "  forward residual ||F(recovered) - target|| = " << result.forward_residual << "\n"
       << "  bilipschitz certificate: "
       << (result.certified_bilipschitz ? "certified" : "not certified") << "\n";
    if (result.certified_bilipschitz) {
        os << "  inverse Lipschitz bound " << result.inverse_lipschitz_bound << "\n";
    }
    double recovery_error = -1.0;
    if (!cfg.invert.target_csv) {
        SampledFunction seed_lattice = SampledFunction::from_function(
            setup.grid, setup.solver.refinement,
            [&](std::span<const double> X) { return setup.seed(X); });
        recovery_error = sup_distance(result.seed, seed_lattice);
        os << "  round-trip recovery error ||recovered - seed|| = " << recovery_error << "\n";
    }

    if (!out_dir.empty()) {
        ensure_dir(out_dir);
        write_lattice_csv(result.seed, out_dir / "recovered.csv");
        json j{{"operator", op.name()},
               {"iterations", result.iterations},
               {"refinement", result.seed.refinement()},
               {"final_sup_change", result.final_sup_change},
               {"forward_residual", result.forward_residual},
               {"contraction_factor", result.contraction_factor},
               {"certified_bilipschitz", result.certified_bilipschitz},
               {"inverse_lipschitz_bound", result.inverse_lipschitz_bound}};
        if (recovery_error >= 0.0) j["recovery_error"] = recovery_error;
        write_json(j, out_dir / "invert.json");
    }
    return 0;
}

int run_attractor(const RunConfig& cfg, const std::filesystem::path& out_dir, std::ostream& os) {
    ProblemSetup setup = setup_problem(cfg);
    AlphaAssembly assembly =
        build_alpha_system(setup.seed, setup.alpha, setup.base, setup.grid,
                           setup.solver.refinement);
    auto [fractal, diagnostics] = solve_fif(assembly.system, setup.solver);

    AttractorOptions aopts;
    aopts.depth = cfg.attractor.depth;
    aopts.max_points = cfg.attractor.max_points;
    aopts.seed_point = cfg.attractor.seed_point;
    aopts.seed_value = cfg.attractor.seed_value;
    AttractorSamples points = sample_attractor(assembly.system, aopts);

    double consistency = 0.0;
    const int n = setup.grid.dimension();
    for (std::size_t p = 0; p < points.point_count(); ++p) {
        const std::span<const double> X(points.coordinates.data() + p * static_cast<std::size_t>(n),
                                        static_cast<std::size_t>(n));
        consistency = std::max(consistency, std::abs(points.values[p] - fractal.evaluate(X)));
    }

    os << "attractor sampling: depth " << aopts.depth << ", " << points.point_count()
       << " points\n"
       << "  max |y - fractal(X)| = " << consistency << " (interpolation-limited)\n";

    if (!out_dir.empty()) {
        ensure_dir(out_dir);
        write_attractor_csv(points, out_dir / "attractor.csv");
        json j{{"depth", aopts.depth},
               {"points", points.point_count()},
               {"max_consistency_residual", consistency},
               {"refinement", fractal.refinement()}};
        write_json(j, out_dir / "attractor.json");
        os << "  wrote " << (out_dir / "attractor.csv").string() << "\n";
    }
    return 0;
}

}  // namespace

const char* command_name(Command cmd) {
    switch (cmd) {
        case Command::Construct: return "construct";
        case Command::Verify: return "verify";
        case Command::Study: return "study";
        case Command::OperatorBounds: return "operator-bounds";
        case Command::Invert: return "invert";
        case Command::Attractor: return "attractor";
    }
    return "?";
}

int run_command(Command cmd, const RunConfig& cfg, const std::filesystem::path& out_dir,
                std::ostream& out) {
    try {
        switch (cmd) {
            case Command::Construct: return run_construct(cfg, out_dir, out);
            case Command::Verify: return run_verify(cfg, out_dir, out);
            case Command::Study: return run_study(cfg, out_dir, out);
            case Command::OperatorBounds: return run_operator_bounds(cfg, out_dir, out);
            case Command::Invert: return run_invert(cfg, out_dir, out);
            case Command::Attractor: return run_attractor(cfg, out_dir, out);
        }
    } catch (const FifError& e) {
        out << "error: " << e.what() << "\n";
        return exit_code_for(e.code());
    }
    return 1;
}

}  // namespace fif
