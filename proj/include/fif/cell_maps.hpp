#pragma once

#include <span>
#include <string>
#include <vector>

#include "fif/grid.hpp"

namespace fif {

/// One orientation-flipping affine contraction mapping the full axis onto a
/// single cell. Odd cells map (a, b) onto (lower knot, upper knot); even
/// cells reverse the orientation, which is what makes the inverse images of
/// adjacent cells agree at the shared knot.
class AffineCellMap {
public:
    AffineCellMap(int axis, int cell, double slope, double offset, double axis_lower,
                  double axis_upper, double cell_lower, double cell_upper)
        : axis_(axis),
          cell_(cell),
          slope_(slope),
          offset_(offset),
          axis_lower_(axis_lower),
          axis_upper_(axis_upper),
          cell_lower_(cell_lower),
          cell_upper_(cell_upper) {}

    /// Domain-checked application; forward expects x in the full axis,
    /// inverse expects x inside this cell.
    double forward(double x) const;
    double inverse(double x) const;

    double forward_unchecked(double x) const noexcept { return slope_ * x + offset_; }
    double inverse_unchecked(double x) const noexcept { return (x - offset_) / slope_; }

    double slope() const noexcept { return slope_; }
    double offset() const noexcept { return offset_; }
    /// Lipschitz constant of the map; strictly below 1 for valid partitions.
    double contraction() const noexcept { return slope_ < 0 ? -slope_ : slope_; }
    bool odd() const noexcept { return cell_ % 2 == 1; }
    int axis() const noexcept { return axis_; }
    int cell() const noexcept { return cell_; }
    double cell_lower() const noexcept { return cell_lower_; }
    double cell_upper() const noexcept { return cell_upper_; }

private:
    int axis_;
    int cell_;
    double slope_;
    double offset_;
    double axis_lower_;
    double axis_upper_;
    double cell_lower_;
    double cell_upper_;
};

enum class MapDirection { forward, inverse };

double apply_map(const AffineCellMap& map, double x, MapDirection direction);

/// Builds the N_k cell maps of one axis in closed form from the endpoint
/// conditions, so knots are reproduced exactly.
std::vector<AffineCellMap> build_axis_maps(const AxisPartition& axis, int axis_index = 0);

/// Component-wise product map for one cell multi-index.
class ProductCellMap {
public:
    explicit ProductCellMap(std::vector<AffineCellMap> components)
        : components_(std::move(components)) {}

    int dimension() const noexcept { return static_cast<int>(components_.size()); }
    const AffineCellMap& component(int k) const { return components_[static_cast<std::size_t>(k)]; }

    std::vector<double> forward(std::span<const double> X) const;
    std::vector<double> inverse(std::span<const double> X) const;
    void forward_into(std::span<const double> X, std::span<double> out) const;
    void inverse_into(std::span<const double> X, std::span<double> out) const;

private:
    std::vector<AffineCellMap> components_;
};

struct SharedPointReport {
    bool passed = true;
    double max_residual = 0.0;
    double tolerance = 0.0;
    /// Common inverse image per interior knot; always one of the axis ends.
    std::vector<double> common_points;
    std::vector<std::string> failures;
};

/// Checks that adjacent cell maps pull every interior knot back to the same
/// point of the full axis.
SharedPointReport check_shared_points(const AxisPartition& axis,
                                      std::span<const AffineCellMap> maps,
                                      double tol = 1e-12);

/// Throwing form of check_shared_points.
SharedPointReport verify_shared_point(const AxisPartition& axis,
                                      std::span<const AffineCellMap> maps,
                                      double tol = 1e-12);

}  // namespace fif
