#pragma once

#include <cstddef>
#include <span>
#include <string>
#include <vector>

#include "fif/errors.hpp"

namespace fif {

/// Strictly increasing knot sequence subdividing one axis of the domain.
/// Requires at least two cells so that every affine cell map is a strict
/// contraction.
class AxisPartition {
public:
    static AxisPartition from_knots(std::vector<double> knots);

    int cell_count() const noexcept { return static_cast<int>(knots_.size()) - 1; }
    double lower() const noexcept { return knots_.front(); }
    double upper() const noexcept { return knots_.back(); }
    double width() const noexcept { return upper() - lower(); }
    double knot(int i) const;
    std::span<const double> knots() const noexcept { return knots_; }

    /// Cell `i` (1-based) spans [knot(i-1), knot(i)].
    double cell_lower(int cell) const { return knot(cell - 1); }
    double cell_upper(int cell) const { return knot(cell); }

private:
    explicit AxisPartition(std::vector<double> knots) : knots_(std::move(knots)) {}
    std::vector<double> knots_;
};

/// Validates and constructs an axis partition from raw knots.
AxisPartition build_axis_partition(std::vector<double> knots);

/// Parity relabeling of cell corners to grid nodes: cell `i` (1-based, odd
/// cells keep orientation, even cells flip) with boundary side `side` in
/// {0, cell_count} lands on node `i-1` or `i`.
int corner_node_index(int cell, int side, int cell_count);

/// Hyperrectangular product of axis partitions. Node multi-indices run over
/// 0..N_k per axis; cell multi-indices are 1-based (1..N_k).
class GridPartition {
public:
    explicit GridPartition(std::vector<AxisPartition> axes);

    int dimension() const noexcept { return static_cast<int>(axes_.size()); }
    const AxisPartition& axis(int k) const;
    std::span<const AxisPartition> axes() const noexcept { return axes_; }

    std::size_t node_count() const noexcept { return node_count_; }
    std::size_t cell_count() const noexcept { return cell_count_; }
    std::vector<int> node_shape() const;
    std::vector<int> cell_shape() const;

    /// Row-major flat index (axis 0 slowest).
    std::size_t node_flat_index(std::span<const int> node) const;
    std::size_t cell_flat_index(std::span<const int> cell) const;

    std::vector<double> node_point(std::span<const int> node) const;
    /// Domain corner from one bit per axis (0 -> a_k, 1 -> b_k).
    std::vector<double> corner_point(std::span<const int> corner_bits) const;

    bool contains(std::span<const double> X, double tol = kDomainTolerance) const;

    std::string describe() const;

    static constexpr double kDomainTolerance = 1e-12;

private:
    std::vector<AxisPartition> axes_;
    std::vector<std::size_t> node_strides_;
    std::vector<std::size_t> cell_strides_;
    std::size_t node_count_ = 1;
    std::size_t cell_count_ = 1;
};

/// Dependent-variable values attached to every grid node, row-major.
class DataTensor {
public:
    static DataTensor from_values(const GridPartition& grid, std::vector<double> values);

    template <typename Fn>
    static DataTensor sample(const GridPartition& grid, Fn&& fn);

    double at(std::span<const int> node) const;
    double at_flat(std::size_t i) const { return values_[i]; }
    std::span<const double> values() const noexcept { return values_; }
    std::span<const int> shape() const noexcept { return shape_; }
    double min_value() const;
    double max_value() const;

private:
    DataTensor() = default;
    std::vector<int> shape_;
    std::vector<std::size_t> strides_;
    std::vector<double> values_;
};

/// Containing cell of a point, with interior knots resolved to the lower
/// cell. `on_interior_knot[k]` marks coordinates where that tie-break fired.
struct CellLocation {
    std::vector<int> cell;
    std::vector<bool> on_interior_knot;
};

CellLocation locate_cell(const GridPartition& grid, std::span<const double> X);

/// Visits every multi-index with per-axis values in [base, base + extent).
template <typename Fn>
void for_each_multi_index(std::span<const int> extents, int base, Fn&& fn) {
    std::vector<int> idx(extents.size(), base);
    for (;;) {
        fn(std::span<const int>(idx));
        int k = static_cast<int>(extents.size()) - 1;
        while (k >= 0) {
            if (++idx[k] < base + extents[k]) break;
            idx[k] = base;
            --k;
        }
        if (k < 0) return;
    }
}

template <typename Fn>
DataTensor DataTensor::sample(const GridPartition& grid, Fn&& fn) {
    std::vector<double> values;
    values.reserve(grid.node_count());
    std::vector<int> shape = grid.node_shape();
    for_each_multi_index(shape, 0, [&](std::span<const int> node) {
        values.push_back(fn(std::span<const double>(grid.node_point(node))));
    });
    return DataTensor::from_values(grid, std::move(values));
}

}  // namespace fif
