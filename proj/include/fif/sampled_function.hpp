#pragma once

#include <memory>
#include <span>
#include <vector>

#include "fif/grid.hpp"
#include "fif/real_function.hpp"

namespace fif {

/// A continuous function represented by values on a refinement lattice: every
/// grid cell is subdivided into `refinement` equal steps per axis, and
/// evaluation anywhere in the domain is multilinear interpolation within the
/// containing lattice cell. This is the computational stand-in for elements
/// of the continuous-function space; all sup-norms reported by the library
/// are lattice sup-norms (lower bounds of the true ones).
class SampledFunction {
public:
    static SampledFunction from_values(GridPartition grid, int refinement,
                                       std::vector<double> values);

    template <typename Fn>
    static SampledFunction from_function(const GridPartition& grid, int refinement, Fn&& fn) {
        SampledFunction s(grid, refinement);
        std::size_t total = 1;
        for (std::size_t d : s.shape_) total *= d;
        std::vector<double> values(total);
        std::vector<double> X(static_cast<std::size_t>(grid.dimension()));
        std::vector<std::size_t> idx(X.size(), 0);
        for (std::size_t flat = 0; flat < values.size(); ++flat) {
            for (std::size_t k = 0; k < X.size(); ++k) X[k] = s.coords_[k][idx[k]];
            values[flat] = fn(std::span<const double>(X));
            int k = static_cast<int>(idx.size()) - 1;
            while (k >= 0) {
                if (++idx[static_cast<std::size_t>(k)] < s.shape_[static_cast<std::size_t>(k)]) break;
                idx[static_cast<std::size_t>(k)] = 0;
                --k;
            }
        }
        s.values_ = std::make_shared<const std::vector<double>>(std::move(values));
        return s;
    }

    /// Multilinear interpolant of the node data (the canonical starting
    /// iterate: it agrees with the data at every grid node).
    static SampledFunction from_node_data(const GridPartition& grid, int refinement,
                                          const DataTensor& data);

    int refinement() const noexcept { return refinement_; }
    const GridPartition& grid() const noexcept { return grid_; }
    std::size_t size() const noexcept { return values_->size(); }
    std::span<const double> values() const noexcept { return *values_; }
    std::span<const double> axis_coordinates(int k) const {
        return coords_[static_cast<std::size_t>(k)];
    }
    std::span<const std::size_t> shape() const noexcept { return shape_; }
    std::span<const std::size_t> strides() const noexcept { return strides_; }

    /// Multilinear interpolation; exact at lattice points.
    double evaluate(std::span<const double> X) const;
    double evaluate(std::initializer_list<double> X) const {
        return evaluate(std::span<const double>(X.begin(), X.size()));
    }

    double value_at(std::span<const std::size_t> lattice_index) const;
    std::vector<double> lattice_point(std::span<const std::size_t> lattice_index) const;
    /// Value at a grid node (nodes are always lattice points).
    double node_value(std::span<const int> node) const;

    /// Same lattice, new values.
    SampledFunction with_values(std::vector<double> values) const;

    /// View as a RealFunction (shares the value storage).
    RealFunction to_function() const;

    bool same_lattice(const SampledFunction& other) const;

private:
    SampledFunction(const GridPartition& grid, int refinement);

    GridPartition grid_;
    int refinement_ = 1;
    std::vector<std::vector<double>> coords_;
    std::vector<std::size_t> shape_;
    std::vector<std::size_t> strides_;
    std::shared_ptr<const std::vector<double>> values_;
};

/// Max over the shared lattice of |S1 - S2|; a lower bound of the true
/// uniform distance.
double sup_distance(const SampledFunction& s1, const SampledFunction& s2);

/// Max over the lattice of |S|.
double lattice_sup_norm(const SampledFunction& s);

double max_abs_difference(std::span<const double> a, std::span<const double> b);

/// Free-function form of SampledFunction::evaluate.
double multilinear_eval(const SampledFunction& s, std::span<const double> X);

namespace detail {
/// Lattice interval containing x on a sorted coordinate axis; clamps points
/// within `tol` of the ends.
struct AxisStencil {
    std::size_t lo;
    double frac;
};
AxisStencil locate_on_axis(std::span<const double> coords, double x, double tol);

/// Lattice coordinates of one axis: `refinement` equal steps per cell, knots
/// included exactly.
std::vector<double> axis_lattice_coordinates(const AxisPartition& axis, int refinement);
}  // namespace detail

}  // namespace fif
