#include "fif/config.hpp"

#include <fstream>
#include <set>
#include <sstream>

#include "json.hpp"

namespace fif {

namespace {

using nlohmann::json;

[[noreturn]] void schema_error(const std::string& path, const std::string& what) {
    raise(ErrorCode::SchemaError, path + ": " + what);
}

void reject_unknown(const json& obj, const std::string& path,
                    std::initializer_list<const char*> allowed) {
    std::set<std::string> names(allowed.begin(), allowed.end());
    for (auto it = obj.begin(); it != obj.end(); ++it) {
        if (names.find(it.key()) == names.end()) {
            schema_error(path.empty() ? it.key() : path + "." + it.key(), "unknown field");
        }
    }
}

double require_number(const json& j, const std::string& path) {
    if (!j.is_number()) schema_error(path, "expected a number");
    return j.get<double>();
}

int require_int(const json& j, const std::string& path) {
    if (!j.is_number_integer()) schema_error(path, "expected an integer");
    return j.get<int>();
}

std::string require_string(const json& j, const std::string& path) {
    if (!j.is_string()) schema_error(path, "expected a string");
    return j.get<std::string>();
}

Expression parse_expr_field(const json& j, const std::string& path,
                            bool allow_function_value = false) {
    const std::string src = require_string(j, path);
    try {
        return Expression::parse(src, allow_function_value);
    } catch (const FifError& e) {
        schema_error(path, std::string("bad expression \"") + src + "\": " + e.what());
    }
}

void check_dimension(const Expression& e, int n, const std::string& path) {
    if (e.variable_count() > n) {
        raise(ErrorCode::CrossFieldError,
              path + ": expression references x" + std::to_string(e.variable_count()) +
                  " but the grid has " + std::to_string(n) + " axes");
    }
}

GridPartition parse_axes(const json& j) {
    if (!j.is_array() || j.empty()) schema_error("axes", "expected a non-empty array of arrays");
    std::vector<AxisPartition> axes;
    for (std::size_t k = 0; k < j.size(); ++k) {
        const json& axis = j[k];
        const std::string path = "axes[" + std::to_string(k) + "]";
        if (!axis.is_array()) schema_error(path, "expected an array of knots");
        std::vector<double> knots;
        knots.reserve(axis.size());
        for (std::size_t i = 0; i < axis.size(); ++i) {
            knots.push_back(require_number(axis[i], path + "[" + std::to_string(i) + "]"));
        }
        axes.push_back(build_axis_partition(std::move(knots)));
    }
    return GridPartition(std::move(axes));
}

}  // namespace

RunConfig parse_config_text(const std::string& text) {
    json root;
    try {
        root = json::parse(text);
    } catch (const json::parse_error& e) {
        raise(ErrorCode::SchemaError, std::string("invalid JSON: ") + e.what());
    }
    if (!root.is_object()) raise(ErrorCode::SchemaError, "top level must be an object");
    reject_unknown(root, "",
                   {"axes", "seed", "alpha", "base", "operator", "solver", "study", "attractor",
                    "invert", "operator_bounds", "verify"});

    RunConfig cfg;
    if (!root.contains("axes")) schema_error("axes", "required field missing");
    cfg.grid = parse_axes(root["axes"]);
    const int n = cfg.grid->dimension();

    // seed
    if (!root.contains("seed")) schema_error("seed", "required field missing");
    const json& seed = root["seed"];
    if (seed.is_string()) {
        cfg.seed_expr = parse_expr_field(seed, "seed");
        check_dimension(*cfg.seed_expr, n, "seed");
    } else if (seed.is_object()) {
        reject_unknown(seed, "seed", {"data"});
        if (!seed.contains("data") || !seed["data"].is_array()) {
            schema_error("seed.data", "expected an array of node values");
        }
        std::vector<double> values;
        for (std::size_t i = 0; i < seed["data"].size(); ++i) {
            values.push_back(
                require_number(seed["data"][i], "seed.data[" + std::to_string(i) + "]"));
        }
        if (values.size() != cfg.grid->node_count()) {
            schema_error("seed.data", "expected " + std::to_string(cfg.grid->node_count()) +
                                          " node values (row-major), got " +
                                          std::to_string(values.size()));
        }
        cfg.seed_data = std::move(values);
    } else {
        schema_error("seed", "expected an expression string or {\"data\": [...]}");
    }

    // alpha
    if (!root.contains("alpha")) schema_error("alpha", "required field missing");
    const json& alpha = root["alpha"];
    if (alpha.is_number()) {
        cfg.alpha_constant = alpha.get<double>();
        cfg.alpha_bound = std::abs(*cfg.alpha_constant);
    } else if (alpha.is_object()) {
        reject_unknown(alpha, "alpha", {"expr", "bound"});
        if (!alpha.contains("expr") || !alpha.contains("bound")) {
            schema_error("alpha", "expression form needs both \"expr\" and \"bound\"");
        }
        cfg.alpha_expr = parse_expr_field(alpha["expr"], "alpha.expr");
        check_dimension(*cfg.alpha_expr, n, "alpha.expr");
        cfg.alpha_bound = require_number(alpha["bound"], "alpha.bound");
    } else {
        schema_error("alpha", "expected a constant or {\"expr\": ..., \"bound\": ...}");
    }
    if (!(cfg.alpha_bound >= 0.0) || cfg.alpha_bound >= 1.0) {
        raise(ErrorCode::CrossFieldError,
              "alpha: declared bound " + std::to_string(cfg.alpha_bound) + " must lie in [0, 1)");
    }

    // base
    if (root.contains("base")) {
        const json& base = root["base"];
        if (base.is_string()) {
            const std::string s = base.get<std::string>();
            if (s == "corner") {
                cfg.base_kind = RunConfig::BaseKind::Corner;
            } else if (s == "seed") {
                cfg.base_kind = RunConfig::BaseKind::Seed;
            } else {
                cfg.base_kind = RunConfig::BaseKind::Expr;
                cfg.base_expr = parse_expr_field(base, "base");
                check_dimension(*cfg.base_expr, n, "base");
            }
        } else if (base.is_object()) {
            reject_unknown(base, "base", {"expr"});
            if (!base.contains("expr")) schema_error("base.expr", "required");
            cfg.base_kind = RunConfig::BaseKind::Expr;
            cfg.base_expr = parse_expr_field(base["expr"], "base.expr");
            check_dimension(*cfg.base_expr, n, "base.expr");
        } else {
            schema_error("base", "expected \"corner\", \"seed\" or an expression");
        }
    }

    // operator
    if (root.contains("operator")) {
        const json& op = root["operator"];
        OperatorConfig oc;
        if (op.is_string()) {
            oc.name = op.get<std::string>();
            if (oc.name != "identity" && oc.name != "corner" && oc.name != "reflection") {
                schema_error("operator", "unknown operator name '" + oc.name + "'");
            }
            oc.linear = true;
            oc.lipschitz = 1.0;
        } else if (op.is_object()) {
            reject_unknown(op, "operator", {"expr", "linear", "lipschitz"});
            if (!op.contains("expr")) schema_error("operator.expr", "required");
            oc.expr = parse_expr_field(op["expr"], "operator.expr", /*allow_function_value=*/true);
            check_dimension(*oc.expr, n, "operator.expr");
            if (op.contains("linear")) {
                if (!op["linear"].is_boolean()) schema_error("operator.linear", "expected a bool");
                oc.linear = op["linear"].get<bool>();
            }
            if (op.contains("lipschitz")) {
                oc.lipschitz = require_number(op["lipschitz"], "operator.lipschitz");
            }
        } else {
            schema_error("operator", "expected a name or {\"expr\": ...}");
        }
        cfg.op = std::move(oc);
    }

    // solver
    if (root.contains("solver")) {
        const json& solver = root["solver"];
        if (!solver.is_object()) schema_error("solver", "expected an object");
        reject_unknown(solver, "solver", {"tol", "max_iter", "refinement"});
        if (solver.contains("tol")) cfg.solver.tol = require_number(solver["tol"], "solver.tol");
        if (solver.contains("max_iter")) {
            cfg.solver.max_iter = require_int(solver["max_iter"], "solver.max_iter");
        }
        if (solver.contains("refinement")) {
            cfg.solver.refinement = require_int(solver["refinement"], "solver.refinement");
        }
        if (cfg.solver.tol <= 0.0) {
            raise(ErrorCode::CrossFieldError, "solver.tol must be positive");
        }
        if (cfg.solver.max_iter < 1 || cfg.solver.refinement < 1) {
            raise(ErrorCode::CrossFieldError, "solver.max_iter and solver.refinement must be >= 1");
        }
    }

    // study
    if (root.contains("study")) {
        const json& study = root["study"];
        if (!study.is_object()) schema_error("study", "expected an object");
        reject_unknown(study, "study", {"alphas", "bases"});
        StudyConfig sc;
        if (study.contains("alphas")) {
            for (std::size_t i = 0; i < study["alphas"].size(); ++i) {
                const double a =
                    require_number(study["alphas"][i], "study.alphas[" + std::to_string(i) + "]");
                if (std::abs(a) >= 1.0) {
                    raise(ErrorCode::CrossFieldError,
                          "study.alphas[" + std::to_string(i) + "]: |alpha| must be < 1");
                }
                sc.alphas.push_back(a);
            }
        }
        if (study.contains("bases")) {
            for (std::size_t i = 0; i < study["bases"].size(); ++i) {
                sc.base_exprs.push_back(
                    require_string(study["bases"][i], "study.bases[" + std::to_string(i) + "]"));
            }
        }
        if (sc.alphas.empty() == sc.base_exprs.empty()) {
            raise(ErrorCode::CrossFieldError,
                  "study: provide exactly one of \"alphas\" or \"bases\"");
        }
        cfg.study = std::move(sc);
    }

    // attractor
    if (root.contains("attractor")) {
        const json& att = root["attractor"];
        if (!att.is_object()) schema_error("attractor", "expected an object");
        reject_unknown(att, "attractor", {"depth", "max_points", "seed_point", "seed_value"});
        if (att.contains("depth")) cfg.attractor.depth = require_int(att["depth"], "attractor.depth");
        if (att.contains("max_points")) {
            cfg.attractor.max_points =
                static_cast<std::size_t>(require_int(att["max_points"], "attractor.max_points"));
        }
        if (att.contains("seed_point")) {
            std::vector<double> p;
            for (std::size_t i = 0; i < att["seed_point"].size(); ++i) {
                p.push_back(require_number(att["seed_point"][i],
                                           "attractor.seed_point[" + std::to_string(i) + "]"));
            }
            cfg.attractor.seed_point = std::move(p);
        }
        if (att.contains("seed_value")) {
            cfg.attractor.seed_value = require_number(att["seed_value"], "attractor.seed_value");
        }
    }

    // invert
    if (root.contains("invert")) {
        const json& inv = root["invert"];
        if (!inv.is_object()) schema_error("invert", "expected an object");
        reject_unknown(inv, "invert", {"target_csv"});
        if (inv.contains("target_csv")) {
            cfg.invert.target_csv = require_string(inv["target_csv"], "invert.target_csv");
        }
    }

    // operator_bounds
    if (root.contains("operator_bounds")) {
        const json& ob = root["operator_bounds"];
        if (!ob.is_object()) schema_error("operator_bounds", "expected an object");
        reject_unknown(ob, "operator_bounds", {"samples", "pairs"});
        if (ob.contains("samples")) {
            for (std::size_t i = 0; i < ob["samples"].size(); ++i) {
                cfg.bounds.sample_exprs.push_back(require_string(
                    ob["samples"][i], "operator_bounds.samples[" + std::to_string(i) + "]"));
            }
        }
        if (ob.contains("pairs")) {
            for (std::size_t i = 0; i < ob["pairs"].size(); ++i) {
                const json& pair = ob["pairs"][i];
                const std::string path = "operator_bounds.pairs[" + std::to_string(i) + "]";
                if (!pair.is_array() || pair.size() != 2) {
                    schema_error(path, "expected [expr, expr]");
                }
                cfg.bounds.pair_exprs.push_back(
                    {require_string(pair[0], path + "[0]"), require_string(pair[1], path + "[1]")});
            }
        }
    }

    // verify
    if (root.contains("verify")) {
        const json& v = root["verify"];
        if (!v.is_object()) schema_error("verify", "expected an object");
        reject_unknown(v, "verify",
                       {"samples_per_face", "y_samples", "contraction_samples", "probe_count"});
        if (v.contains("samples_per_face")) {
            cfg.verify.samples_per_face = require_int(v["samples_per_face"], "verify.samples_per_face");
        }
        if (v.contains("y_samples")) {
            cfg.verify.y_samples = require_int(v["y_samples"], "verify.y_samples");
        }
        if (v.contains("contraction_samples")) {
            cfg.verify.contraction_samples =
                require_int(v["contraction_samples"], "verify.contraction_samples");
        }
        if (v.contains("probe_count")) {
            cfg.verify.probe_count = require_int(v["probe_count"], "verify.probe_count");
        }
    }

    return cfg;
}

RunConfig load_config(const std::filesystem::path& path) {
    std::ifstream in(path);
    if (!in) raise(ErrorCode::IoError, "cannot open config file " + path.string());
    std::ostringstream buffer;
    buffer << in.rdbuf();
    return parse_config_text(buffer.str());
}

ProblemSetup setup_problem(const RunConfig& cfg) {
    const GridPartition& grid = *cfg.grid;

    RealFunction seed;
    if (cfg.seed_expr) {
        seed = cfg.seed_expr->to_function();
    } else {
        DataTensor data = DataTensor::from_values(grid, *cfg.seed_data);
        SampledFunction interp = SampledFunction::from_node_data(grid, 1, data);
        RealFunction fn = interp.to_function();
        seed = RealFunction([fn](std::span<const double> X) { return fn(X); }, "data");
    }

    ScalingFunction alpha = cfg.alpha_constant
                                ? ScalingFunction::constant(*cfg.alpha_constant)
                                : ScalingFunction::from_function(cfg.alpha_expr->to_function(),
                                                                 cfg.alpha_bound);

    BaseFunction base = [&] {
        switch (cfg.base_kind) {
            case RunConfig::BaseKind::Seed:
                return BaseFunction::seed_itself(seed);
            case RunConfig::BaseKind::Expr:
                return BaseFunction::checked(cfg.base_expr->to_function(), seed, grid);
            case RunConfig::BaseKind::Corner:
            default:
                return BaseFunction::corner_interpolant(seed, grid);
        }
    }();

    return ProblemSetup{grid, std::move(seed), std::move(alpha), std::move(base),
                        solve_options_from(cfg)};
}

FunctionOperator operator_from(const OperatorConfig& cfg) {
    if (!cfg.name.empty()) return FunctionOperator::named(cfg.name);
    return FunctionOperator::pointwise(*cfg.expr, cfg.linear, cfg.lipschitz);
}

SolveOptions solve_options_from(const RunConfig& cfg) {
    SolveOptions opts;
    opts.tol = cfg.solver.tol;
    opts.max_iter = cfg.solver.max_iter;
    opts.refinement = cfg.solver.refinement;
    opts.matching_samples_per_face = cfg.verify.samples_per_face;
    opts.matching_y_samples = cfg.verify.y_samples;
    return opts;
}

}  // namespace fif
