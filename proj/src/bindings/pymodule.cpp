#include <pybind11/numpy.h>
#include <pybind11/pybind11.h>
#include <pybind11/stl.h>

#include <optional>
#include <variant>

#include "fif/alpha_fractal.hpp"
#include "fif/commands.hpp"
#include "fif/config.hpp"
#include "fif/csv.hpp"
#include "fif/expression.hpp"
#include "fif/fractal_operator.hpp"
#include "fif/rb.hpp"

namespace py = pybind11;

namespace {

using SeedSpec = std::variant<std::string, std::vector<double>>;

fif::GridPartition make_grid(const std::vector<std::vector<double>>& axes) {
    std::vector<fif::AxisPartition> parts;
    parts.reserve(axes.size());
    for (const auto& knots : axes) parts.push_back(fif::build_axis_partition(knots));
    return fif::GridPartition(std::move(parts));
}

fif::RealFunction make_seed(const SeedSpec& seed, const fif::GridPartition& grid) {
    if (std::holds_alternative<std::string>(seed)) {
        return fif::Expression::parse(std::get<std::string>(seed)).to_function();
    }
    fif::DataTensor data = fif::DataTensor::from_values(grid, std::get<std::vector<double>>(seed));
    fif::SampledFunction interp = fif::SampledFunction::from_node_data(grid, 1, data);
    fif::RealFunction fn = interp.to_function();
    return fif::RealFunction([fn](std::span<const double> X) { return fn(X); }, "data");
}

fif::ScalingFunction make_alpha(const std::variant<double, std::string>& alpha,
                                std::optional<double> bound) {
    if (std::holds_alternative<double>(alpha)) {
        return fif::ScalingFunction::constant(std::get<double>(alpha));
    }
    if (!bound) {
        fif::raise(fif::ErrorCode::CrossFieldError,
                   "expression scaling functions need an explicit alpha_bound");
    }
    return fif::ScalingFunction::from_function(
        fif::Expression::parse(std::get<std::string>(alpha)).to_function(), *bound);
}

fif::BaseFunction make_base(const std::string& base, const fif::RealFunction& seed,
                            const fif::GridPartition& grid) {
    if (base == "corner") return fif::BaseFunction::corner_interpolant(seed, grid);
    if (base == "seed") return fif::BaseFunction::seed_itself(seed);
    return fif::BaseFunction::checked(fif::Expression::parse(base).to_function(), seed, grid);
}

fif::FunctionOperator make_operator(const std::string& name) {
    return fif::FunctionOperator::named(name);
}

fif::SolveOptions make_options(double tol, int max_iter, int refinement) {
    fif::SolveOptions opts;
    opts.tol = tol;
    opts.max_iter = max_iter;
    opts.refinement = refinement;
    return opts;
}

py::array_t<double> to_array(std::span<const double> values) {
    py::array_t<double> out(static_cast<py::ssize_t>(values.size()));
    std::copy(values.begin(), values.end(), out.mutable_data());
    return out;
}

py::dict bounds_dict(const fif::PerturbationBoundReport& report) {
    py::dict d;
    d["seed_distance"] = report.seed_distance;
    d["base_distance"] = report.base_distance;
    d["seed_base_distance"] = report.seed_base_distance;
    d["alpha_bound"] = report.alpha_bound;
    d["relative_bound"] = report.relative_bound;
    d["absolute_bound"] = report.absolute_bound;
    d["passed"] = report.passed;
    return d;
}

}  // namespace

PYBIND11_MODULE(_fif, m) {
    m.doc() = "Fractal interpolation on hyperrectangular grids: self-referential perturbations "
              "of continuous functions, their error bounds, and the associated operator layer.";

    py::register_exception<fif::FifError>(m, "FifError");

    py::class_<fif::GridPartition>(m, "Grid")
        .def(py::init(&make_grid), py::arg("axes"))
        .def_property_readonly("dimension", &fif::GridPartition::dimension)
        .def_property_readonly("node_count", &fif::GridPartition::node_count)
        .def_property_readonly("cell_count", &fif::GridPartition::cell_count)
        .def("__repr__", &fif::GridPartition::describe);

    py::class_<fif::Expression>(m, "Expression")
        .def_static("parse", [](const std::string& src) { return fif::Expression::parse(src); },
                    py::arg("source"))
        .def("__call__",
             [](const fif::Expression& e, const std::vector<double>& point) {
                 return e.evaluate(point);
             })
        .def_property_readonly("variable_count", &fif::Expression::variable_count)
        .def("__str__", &fif::Expression::to_string);

    py::class_<fif::SampledFunction>(m, "SampledFunction")
        .def("__call__",
             [](const fif::SampledFunction& s, const std::vector<double>& point) {
                 return s.evaluate(point);
             })
        .def_property_readonly("refinement", &fif::SampledFunction::refinement)
        .def_property_readonly("values",
                               [](const fif::SampledFunction& s) { return to_array(s.values()); })
        .def("axis_coordinates",
             [](const fif::SampledFunction& s, int axis) {
                 return to_array(s.axis_coordinates(axis));
             })
        .def_property_readonly("size", &fif::SampledFunction::size);

    py::class_<fif::SolveDiagnostics>(m, "SolveDiagnostics")
        .def_readonly("iterations", &fif::SolveDiagnostics::iterations)
        .def_readonly("final_sup_change", &fif::SolveDiagnostics::final_sup_change)
        .def_readonly("contraction_estimate", &fif::SolveDiagnostics::contraction_estimate)
        .def_readonly("aposteriori_bound", &fif::SolveDiagnostics::aposteriori_bound)
        .def_readonly("max_contraction", &fif::SolveDiagnostics::max_contraction)
        .def_readonly("sup_change_history", &fif::SolveDiagnostics::sup_change_history);

    py::class_<fif::AlphaFractalResult>(m, "FractalResult")
        .def_readonly("fractal", &fif::AlphaFractalResult::fractal)
        .def_readonly("diagnostics", &fif::AlphaFractalResult::diagnostics)
        .def_readonly("seed_lattice", &fif::AlphaFractalResult::seed_lattice)
        .def_readonly("base_lattice", &fif::AlphaFractalResult::base_lattice)
        .def_readonly("alpha_bound", &fif::AlphaFractalResult::alpha_bound)
        .def("__call__",
             [](const fif::AlphaFractalResult& r, const std::vector<double>& point) {
                 return r.fractal.evaluate(point);
             })
        .def("node_residual",
             [](const fif::AlphaFractalResult& r) { return fif::node_interpolation_residual(r); })
        .def("bounds",
             [](const fif::AlphaFractalResult& r) {
                 return bounds_dict(fif::check_perturbation_bounds(r));
             });

    m.def(
        "construct",
        [](const std::vector<std::vector<double>>& axes, const SeedSpec& seed,
           const std::variant<double, std::string>& alpha, const std::string& base,
           std::optional<double> alpha_bound, double tol, int max_iter, int refinement) {
            fif::GridPartition grid = make_grid(axes);
            fif::RealFunction seed_fn = make_seed(seed, grid);
            fif::ScalingFunction alpha_fn = make_alpha(alpha, alpha_bound);
            fif::BaseFunction base_fn = make_base(base, seed_fn, grid);
            return fif::construct_alpha_fractal(seed_fn, grid, alpha_fn, base_fn,
                                                make_options(tol, max_iter, refinement));
        },
        py::arg("axes"), py::arg("seed"), py::arg("alpha"), py::arg("base") = "corner",
        py::arg("alpha_bound") = std::nullopt, py::arg("tol") = 1e-8, py::arg("max_iter") = 200,
        py::arg("refinement") = 64,
        "Solve the fractal perturbation of the seed on the given grid.");

    m.def(
        "apply_operator",
        [](const std::vector<std::vector<double>>& axes, const SeedSpec& seed,
           const std::variant<double, std::string>& alpha, const std::string& op,
           std::optional<double> alpha_bound, double tol, int max_iter, int refinement) {
            fif::GridPartition grid = make_grid(axes);
            fif::RealFunction seed_fn = make_seed(seed, grid);
            fif::ScalingFunction alpha_fn = make_alpha(alpha, alpha_bound);
            return fif::apply_fractal_operator(make_operator(op), alpha_fn, grid, seed_fn,
                                               make_options(tol, max_iter, refinement));
        },
        py::arg("axes"), py::arg("seed"), py::arg("alpha"), py::arg("operator") = "corner",
        py::arg("alpha_bound") = std::nullopt, py::arg("tol") = 1e-8, py::arg("max_iter") = 200,
        py::arg("refinement") = 64,
        "Apply the fractal operator with the base derived through the named operator.");

    m.def(
        "study",
        [](const std::vector<std::vector<double>>& axes, const SeedSpec& seed,
           const std::vector<double>& alphas, const std::string& base, double tol, int max_iter,
           int refinement) {
            fif::GridPartition grid = make_grid(axes);
            fif::RealFunction seed_fn = make_seed(seed, grid);
            fif::BaseFunction base_fn = make_base(base, seed_fn, grid);
            std::vector<fif::ScalingFunction> scalings;
            for (double a : alphas) scalings.push_back(fif::ScalingFunction::constant(a));
            auto rows = fif::convergence_study(seed_fn, grid, base_fn, scalings,
                                               make_options(tol, max_iter, refinement));
            py::list out;
            for (const auto& row : rows) {
                py::dict d;
                d["index"] = row.index;
                d["parameter_norm"] = row.parameter_norm;
                d["error"] = row.error;
                d["bound"] = row.bound;
                out.append(d);
            }
            return out;
        },
        py::arg("axes"), py::arg("seed"), py::arg("alphas"), py::arg("base") = "corner",
        py::arg("tol") = 1e-8, py::arg("max_iter") = 200, py::arg("refinement") = 64,
        "Error table for a sequence of constant scaling factors.");

    m.def(
        "invert_roundtrip",
        [](const std::vector<std::vector<double>>& axes, const SeedSpec& seed,
           const std::variant<double, std::string>& alpha, const std::string& op,
           std::optional<double> alpha_bound, double tol, int max_iter, int refinement) {
            fif::GridPartition grid = make_grid(axes);
            fif::RealFunction seed_fn = make_seed(seed, grid);
            fif::ScalingFunction alpha_fn = make_alpha(alpha, alpha_bound);
            fif::FunctionOperator L = make_operator(op);
            fif::SolveOptions opts = make_options(tol, max_iter, refinement);
            fif::AlphaFractalResult forward =
                fif::apply_fractal_operator(L, alpha_fn, grid, seed_fn, opts);
            fif::InvertOptions iopts;
            iopts.tol = tol;
            iopts.max_iter = max_iter;
            iopts.refinement = refinement;
            fif::InvertResult inv =
                fif::invert_fractal_operator(forward.fractal, L, alpha_fn, grid, iopts);
            py::dict d;
            d["iterations"] = inv.iterations;
            d["forward_residual"] = inv.forward_residual;
            d["recovery_error"] = fif::sup_distance(inv.seed, forward.seed_lattice);
            d["contraction_factor"] = inv.contraction_factor;
            d["certified_bilipschitz"] = inv.certified_bilipschitz;
            d["inverse_lipschitz_bound"] = inv.inverse_lipschitz_bound;
            return d;
        },
        py::arg("axes"), py::arg("seed"), py::arg("alpha"), py::arg("operator") = "corner",
        py::arg("alpha_bound") = std::nullopt, py::arg("tol") = 1e-8, py::arg("max_iter") = 200,
        py::arg("refinement") = 64,
        "Forward-apply the fractal operator, invert the image, and report the recovery error.");

    m.def(
        "attractor",
        [](const std::vector<std::vector<double>>& axes, const SeedSpec& seed,
           const std::variant<double, std::string>& alpha, const std::string& base, int depth,
           std::optional<double> alpha_bound, int refinement, std::size_t max_points) {
            fif::GridPartition grid = make_grid(axes);
            fif::RealFunction seed_fn = make_seed(seed, grid);
            fif::ScalingFunction alpha_fn = make_alpha(alpha, alpha_bound);
            fif::BaseFunction base_fn = make_base(base, seed_fn, grid);
            fif::AlphaAssembly assembly =
                fif::build_alpha_system(seed_fn, alpha_fn, base_fn, grid, refinement);
            fif::AttractorOptions aopts;
            aopts.depth = depth;
            aopts.max_points = max_points;
            fif::AttractorSamples points = fif::sample_attractor(assembly.system, aopts);
            py::dict d;
            d["dimension"] = points.dimension;
            d["coordinates"] = to_array(points.coordinates);
            d["values"] = to_array(points.values);
            return d;
        },
        py::arg("axes"), py::arg("seed"), py::arg("alpha"), py::arg("base") = "corner",
        py::arg("depth") = 6, py::arg("alpha_bound") = std::nullopt, py::arg("refinement") = 64,
        py::arg("max_points") = static_cast<std::size_t>(2000000),
        "Deterministic IFS iteration from the node graph points.");

#ifdef FIF_VERSION
    m.attr("__version__") = FIF_VERSION;
#else
    m.attr("__version__") = "dev";
#endif
}
