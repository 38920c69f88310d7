#pragma once

#include <cstdint>
#include <functional>
#include <optional>
#include <span>
#include <string>
#include <utility>
#include <vector>

#include "fif/cell_maps.hpp"
#include "fif/grid.hpp"
#include "fif/sampled_function.hpp"

namespace fif {

/// The vertical component of one IFS map: a continuous F(X, y) on the full
/// domain times the reals, contractive in y with the declared factor. The
/// declared factor is a certificate (it must dominate the true modulus);
/// empirical per-cell estimates live in the system diagnostics.
class VerticalMap {
public:
    using Evaluator = std::function<double(std::span<const double>, double)>;

    /// y-affine decomposition F(X, y) = offset(X) + slope(X) * y, which lets
    /// the solver hoist all X-dependent work out of the iteration loop.
    struct AffineInY {
        std::function<double(std::span<const double>)> offset;
        std::function<double(std::span<const double>)> slope;
    };

    VerticalMap(std::vector<int> cell, double declared_contraction, Evaluator eval);
    VerticalMap(std::vector<int> cell, double declared_contraction, AffineInY parts);

    double operator()(std::span<const double> X, double y) const;
    double declared_contraction() const noexcept { return declared_contraction_; }
    bool affine_in_y() const noexcept { return affine_.has_value(); }
    const AffineInY& affine_parts() const { return *affine_; }
    std::span<const int> cell() const noexcept { return cell_; }

private:
    std::vector<int> cell_;
    double declared_contraction_;
    Evaluator eval_;
    std::optional<AffineInY> affine_;
};

/// The assembled IFS: grid, node data, the affine cell maps per axis, and one
/// vertical map per cell. Immutable after construction.
class FifSystem {
public:
    FifSystem(GridPartition grid, DataTensor data, std::vector<VerticalMap> vertical_maps);

    const GridPartition& grid() const noexcept { return grid_; }
    const DataTensor& data() const noexcept { return data_; }

    std::span<const AffineCellMap> axis_maps(int k) const;
    const AffineCellMap& cell_map(int axis, int cell) const;
    ProductCellMap product_map(std::span<const int> cell) const;

    const VerticalMap& vertical_map_at(std::size_t cell_flat) const;
    const VerticalMap& vertical_map(std::span<const int> cell) const;

    /// Max declared y-contraction over all cells.
    double max_contraction() const noexcept { return max_contraction_; }
    double data_min() const { return data_.min_value(); }
    double data_max() const { return data_.max_value(); }

private:
    GridPartition grid_;
    DataTensor data_;
    std::vector<std::vector<AffineCellMap>> axis_maps_;
    std::vector<VerticalMap> vertical_maps_;
    double max_contraction_ = 0.0;
};

// ---------------------------------------------------------------------------
// Verification

struct ConstraintReport {
    bool passed = true;
    std::size_t checks = 0;
    double max_residual = 0.0;
    double tolerance = 0.0;
    std::vector<std::string> failures;
};

/// Checks the node interpolation constraints of every vertical map: at each
/// corner combination the map must send the corner data value to the data
/// value of the relabeled node.
ConstraintReport check_data_constraints(const FifSystem& system, double tol = 1e-10);
ConstraintReport verify_data_constraints(const FifSystem& system, double tol = 1e-10);

/// Empirical max of |F(X,y)-F(X,y')| / |y-y'| over random samples. Throws
/// ContractionViolation if it exceeds the declared factor + 1e-10.
double estimate_y_contraction(const VerticalMap& map, const GridPartition& grid, int samples,
                              double y_halfwidth = 2.0, std::uint64_t seed = 0x5eedf1f);

struct MatchingReport {
    bool passed = true;
    std::size_t faces_checked = 0;
    std::size_t points_checked = 0;
    double max_residual = 0.0;
    double tolerance = 0.0;
    std::vector<std::string> failures;
};

/// Samples every shared face between adjacent cells and checks that the two
/// vertical maps agree there. A failure is definitive; a pass is sampled
/// evidence (and exact for the scaling-construction family).
MatchingReport check_matching_conditions(const FifSystem& system, int samples_per_face = 50,
                                         int y_samples = 5, double tol = 1e-10,
                                         std::uint64_t seed = 0x5eedfa9e);
MatchingReport verify_matching_conditions(const FifSystem& system, int samples_per_face = 50,
                                          int y_samples = 5, double tol = 1e-10,
                                          std::uint64_t seed = 0x5eedfa9e);

// ---------------------------------------------------------------------------
// The fixed-point machinery

/// Precomputed pullback stencils: for every lattice point X of a refinement
/// lattice, the containing cell (interior knots resolve to the lower cell)
/// and the multilinear stencil interpolating a lattice function at the
/// inverse image of X under that cell's product map.
class PullbackPlan {
public:
    PullbackPlan(const GridPartition& grid, int refinement);

    std::size_t size() const noexcept { return total_; }
    int dimension() const noexcept { return static_cast<int>(axis_cell_.size()); }
    int refinement() const noexcept { return refinement_; }

    /// Interpolates `values` (a lattice vector) at the pullback of lattice
    /// point `flat`.
    double interpolate(std::span<const double> values, std::size_t flat) const;

    std::size_t cell_flat(std::size_t flat) const;
    void lattice_point(std::size_t flat, std::span<double> out) const;
    void pullback_point(std::size_t flat, std::span<double> out) const;

    std::span<const std::size_t> shape() const noexcept { return shape_; }
    std::span<const double> axis_coordinates(int k) const {
        return coords_[static_cast<std::size_t>(k)];
    }

private:
    void decompose(std::size_t flat, std::span<std::size_t> idx) const;

    int refinement_;
    std::size_t total_ = 1;
    std::vector<std::size_t> shape_;
    std::vector<std::size_t> strides_;
    std::vector<std::vector<double>> coords_;      // lattice coordinates per axis
    std::vector<std::vector<int>> axis_cell_;      // containing cell (1-based)
    std::vector<std::vector<std::size_t>> cell_term_;  // (cell-1) * cell_stride
    std::vector<std::vector<double>> pullback_;    // inverse image coordinate
    std::vector<std::vector<std::size_t>> interp_base_;  // lower-neighbor index * stride
    std::vector<std::vector<double>> interp_frac_;
};

struct SolveOptions {
    double tol = 1e-8;
    int max_iter = 200;
    int refinement = 64;
    /// Skip the pre-solve constraint verification (caller takes
    /// responsibility for the hypotheses).
    bool assume_verified = false;
    int matching_samples_per_face = 50;
    int matching_y_samples = 5;
    double verification_tol = 1e-10;
    std::optional<SampledFunction> initial{};
};

struct SolveDiagnostics {
    int iterations = 0;
    double final_sup_change = 0.0;
    /// Geometric ratio fitted to the tail of the sup-change history.
    double contraction_estimate = 0.0;
    /// max_contraction / (1 - max_contraction) * final_sup_change.
    double aposteriori_bound = 0.0;
    double max_contraction = 0.0;
    std::vector<double> sup_change_history;
};

/// One sweep of the fixed-point operator over g's lattice: each output value
/// is the vertical map of the containing cell applied at the pullback of the
/// lattice point, with g read back by multilinear interpolation.
SampledFunction apply_rb_operator(const FifSystem& system, const SampledFunction& g);

/// Same value computed through an explicitly chosen cell (for well-definedness
/// probes on shared faces).
double rb_value_via_cell(const FifSystem& system, const SampledFunction& g,
                         std::span<const double> X, std::span<const int> cell);

/// Iterates the operator from the node-data interpolant (or a caller-supplied
/// start) until the lattice sup-change drops below tol. Unless waived, the
/// data and matching constraints are verified first; a failure surfaces as
/// ConstraintsUnverified naming the violated check.
std::pair<SampledFunction, SolveDiagnostics> solve_fif(const FifSystem& system,
                                                       const SolveOptions& opts = {});

/// Max over probe points of |f(X) - F_cell(u^{-1}(X), f(u^{-1}(X)))|.
double self_referential_residual(const SampledFunction& fif, const FifSystem& system,
                                 std::span<const std::vector<double>> probes);

struct AttractorOptions {
    int depth = 8;
    std::size_t max_points = 2000000;
    /// Optional extra start point (coordinates + value); node graph points
    /// are always included.
    std::optional<std::vector<double>> seed_point{};
    double seed_value = 0.0;
};

/// Point cloud from deterministic IFS iteration, packed n coordinates per
/// point.
struct AttractorSamples {
    int dimension = 0;
    std::vector<double> coordinates;
    std::vector<double> values;
    std::size_t point_count() const {
        return dimension == 0 ? 0 : coordinates.size() / static_cast<std::size_t>(dimension);
    }
};

AttractorSamples sample_attractor(const FifSystem& system, const AttractorOptions& opts = {});

}  // namespace fif
