#pragma once

#include <array>
#include <filesystem>
#include <optional>
#include <string>
#include <vector>

#include "fif/alpha_fractal.hpp"
#include "fif/expression.hpp"
#include "fif/fractal_operator.hpp"
#include "fif/grid.hpp"

namespace fif {

struct SolverConfig {
    double tol = 1e-8;
    int max_iter = 200;
    int refinement = 64;
};

struct OperatorConfig {
    std::string name;  // "identity" | "corner" | "reflection"; empty when expr
    std::optional<Expression> expr;
    bool linear = false;
    std::optional<double> lipschitz;
};

struct StudyConfig {
    std::vector<double> alphas;            // scaling sweep (constants)
    std::vector<std::string> base_exprs;   // base sweep (expressions)
};

struct AttractorConfig {
    int depth = 8;
    std::size_t max_points = 2000000;
    std::optional<std::vector<double>> seed_point;
    double seed_value = 0.0;
};

struct InvertConfig {
    std::optional<std::string> target_csv;  // absent: forward round-trip mode
};

struct BoundsConfig {
    std::vector<std::string> sample_exprs;  // empty: built-in family
    std::vector<std::array<std::string, 2>> pair_exprs;
};

struct VerifyConfig {
    int samples_per_face = 50;
    int y_samples = 5;
    int contraction_samples = 200;
    int probe_count = 200;
};

/// Parsed and cross-checked run configuration. Field layout mirrors the JSON
/// schema; unknown fields are rejected with their path.
struct RunConfig {
    std::optional<GridPartition> grid;

    std::optional<Expression> seed_expr;
    std::optional<std::vector<double>> seed_data;

    std::optional<double> alpha_constant;
    std::optional<Expression> alpha_expr;
    double alpha_bound = 0.0;

    enum class BaseKind { Corner, Seed, Expr };
    BaseKind base_kind = BaseKind::Corner;
    std::optional<Expression> base_expr;

    std::optional<OperatorConfig> op;

    SolverConfig solver;
    std::optional<StudyConfig> study;
    AttractorConfig attractor;
    InvertConfig invert;
    BoundsConfig bounds;
    VerifyConfig verify;
};

RunConfig load_config(const std::filesystem::path& path);
RunConfig parse_config_text(const std::string& text);

/// Materialized problem pieces shared by the commands.
struct ProblemSetup {
    GridPartition grid;
    RealFunction seed;
    ScalingFunction alpha;
    BaseFunction base;
    SolveOptions solver;
};

ProblemSetup setup_problem(const RunConfig& cfg);
FunctionOperator operator_from(const OperatorConfig& cfg);
SolveOptions solve_options_from(const RunConfig& cfg);

}  // namespace fif
