#include "fif/grid.hpp"

#include <algorithm>
#include <cmath>
#include <limits>
#include <sstream>

namespace fif {

AxisPartition AxisPartition::from_knots(std::vector<double> knots) {
    if (knots.size() < 3) {
        raise(ErrorCode::TooFewKnots,
              "axis needs at least 3 knots (2 cells), got " + std::to_string(knots.size()));
    }
    for (double k : knots) {
        if (!std::isfinite(k)) raise(ErrorCode::NonFiniteKnot, "knot is not finite");
    }
    for (std::size_t i = 1; i < knots.size(); ++i) {
        if (!(knots[i - 1] < knots[i])) {
            std::ostringstream os;
            os << "knots must be strictly increasing, got " << knots[i - 1] << " then "
               << knots[i] << " at position " << i;
            raise(ErrorCode::NonMonotonicKnots, os.str());
        }
    }
    return AxisPartition(std::move(knots));
}

double AxisPartition::knot(int i) const {
    if (i < 0 || i >= static_cast<int>(knots_.size())) {
        raise(ErrorCode::IndexOutOfRange, "knot index " + std::to_string(i));
    }
    return knots_[static_cast<std::size_t>(i)];
}

AxisPartition build_axis_partition(std::vector<double> knots) {
    return AxisPartition::from_knots(std::move(knots));
}

int corner_node_index(int cell, int side, int cell_count) {
    if (cell < 1 || cell > cell_count) {
        raise(ErrorCode::IndexOutOfRange,
              "cell " + std::to_string(cell) + " outside 1.." + std::to_string(cell_count));
    }
    if (side != 0 && side != cell_count) {
        raise(ErrorCode::IndexOutOfRange,
              "side " + std::to_string(side) + " must be 0 or " + std::to_string(cell_count));
    }
    const bool odd = (cell % 2) == 1;
    if (side == 0) return odd ? cell - 1 : cell;
    return odd ? cell : cell - 1;
}

GridPartition::GridPartition(std::vector<AxisPartition> axes) : axes_(std::move(axes)) {
    if (axes_.empty()) raise(ErrorCode::IndexOutOfRange, "grid needs at least one axis");
    const int n = dimension();
    node_strides_.assign(static_cast<std::size_t>(n), 1);
    cell_strides_.assign(static_cast<std::size_t>(n), 1);
    for (int k = n - 1; k >= 0; --k) {
        const std::size_t nodes = static_cast<std::size_t>(axes_[static_cast<std::size_t>(k)].cell_count()) + 1;
        const std::size_t cells = nodes - 1;
        if (k < n - 1) {
            node_strides_[static_cast<std::size_t>(k)] =
                node_strides_[static_cast<std::size_t>(k) + 1] *
                (static_cast<std::size_t>(axes_[static_cast<std::size_t>(k) + 1].cell_count()) + 1);
            cell_strides_[static_cast<std::size_t>(k)] =
                cell_strides_[static_cast<std::size_t>(k) + 1] *
                static_cast<std::size_t>(axes_[static_cast<std::size_t>(k) + 1].cell_count());
        }
        node_count_ *= nodes;
        cell_count_ *= cells;
    }
}

const AxisPartition& GridPartition::axis(int k) const {
    if (k < 0 || k >= dimension()) raise(ErrorCode::IndexOutOfRange, "axis " + std::to_string(k));
    return axes_[static_cast<std::size_t>(k)];
}

std::vector<int> GridPartition::node_shape() const {
    std::vector<int> shape(axes_.size());
    for (std::size_t k = 0; k < axes_.size(); ++k) shape[k] = axes_[k].cell_count() + 1;
    return shape;
}

std::vector<int> GridPartition::cell_shape() const {
    std::vector<int> shape(axes_.size());
    for (std::size_t k = 0; k < axes_.size(); ++k) shape[k] = axes_[k].cell_count();
    return shape;
}

std::size_t GridPartition::node_flat_index(std::span<const int> node) const {
    std::size_t flat = 0;
    for (std::size_t k = 0; k < axes_.size(); ++k) {
        const int i = node[k];
        if (i < 0 || i > axes_[k].cell_count()) {
            raise(ErrorCode::IndexOutOfRange, "node index " + std::to_string(i) + " on axis " +
                                                  std::to_string(k));
        }
        flat += static_cast<std::size_t>(i) * node_strides_[k];
    }
    return flat;
}

std::size_t GridPartition::cell_flat_index(std::span<const int> cell) const {
    std::size_t flat = 0;
    for (std::size_t k = 0; k < axes_.size(); ++k) {
        const int i = cell[k];
        if (i < 1 || i > axes_[k].cell_count()) {
            raise(ErrorCode::IndexOutOfRange, "cell index " + std::to_string(i) + " on axis " +
                                                  std::to_string(k));
        }
        flat += static_cast<std::size_t>(i - 1) * cell_strides_[k];
    }
    return flat;
}

std::vector<double> GridPartition::node_point(std::span<const int> node) const {
    std::vector<double> X(axes_.size());
    for (std::size_t k = 0; k < axes_.size(); ++k) X[k] = axes_[k].knot(node[k]);
    return X;
}

std::vector<double> GridPartition::corner_point(std::span<const int> corner_bits) const {
    std::vector<double> X(axes_.size());
    for (std::size_t k = 0; k < axes_.size(); ++k) {
        X[k] = corner_bits[k] == 0 ? axes_[k].lower() : axes_[k].upper();
    }
    return X;
}

bool GridPartition::contains(std::span<const double> X, double tol) const {
    if (X.size() != axes_.size()) return false;
    for (std::size_t k = 0; k < axes_.size(); ++k) {
        if (X[k] < axes_[k].lower() - tol || X[k] > axes_[k].upper() + tol) return false;
    }
    return true;
}

std::string GridPartition::describe() const {
    std::ostringstream os;
    os << dimension() << "D grid, cells";
    for (const auto& ax : axes_) os << " " << ax.cell_count();
    return os.str();
}

DataTensor DataTensor::from_values(const GridPartition& grid, std::vector<double> values) {
    if (values.size() != grid.node_count()) {
        raise(ErrorCode::LatticeMismatch,
              "expected " + std::to_string(grid.node_count()) + " node values, got " +
                  std::to_string(values.size()));
    }
    for (double v : values) {
        if (!std::isfinite(v)) raise(ErrorCode::NonFiniteKnot, "data value is not finite");
    }
    DataTensor t;
    t.shape_ = grid.node_shape();
    t.strides_.assign(t.shape_.size(), 1);
    for (int k = static_cast<int>(t.shape_.size()) - 2; k >= 0; --k) {
        t.strides_[static_cast<std::size_t>(k)] =
            t.strides_[static_cast<std::size_t>(k) + 1] *
            static_cast<std::size_t>(t.shape_[static_cast<std::size_t>(k) + 1]);
    }
    t.values_ = std::move(values);
    return t;
}

double DataTensor::at(std::span<const int> node) const {
    std::size_t flat = 0;
    for (std::size_t k = 0; k < shape_.size(); ++k) {
        if (node[k] < 0 || node[k] >= shape_[k]) {
            raise(ErrorCode::IndexOutOfRange, "node index on axis " + std::to_string(k));
        }
        flat += static_cast<std::size_t>(node[k]) * strides_[k];
    }
    return values_[flat];
}

double DataTensor::min_value() const { return *std::min_element(values_.begin(), values_.end()); }

double DataTensor::max_value() const { return *std::max_element(values_.begin(), values_.end()); }

CellLocation locate_cell(const GridPartition& grid, std::span<const double> X) {
    const int n = grid.dimension();
    if (static_cast<int>(X.size()) != n) {
        raise(ErrorCode::PointOutsideDomain, "point dimension mismatch");
    }
    CellLocation loc;
    loc.cell.resize(static_cast<std::size_t>(n));
    loc.on_interior_knot.assign(static_cast<std::size_t>(n), false);
    for (int k = 0; k < n; ++k) {
        const AxisPartition& ax = grid.axis(k);
        const double x = X[static_cast<std::size_t>(k)];
        const double tol = GridPartition::kDomainTolerance;
        if (x < ax.lower() - tol || x > ax.upper() + tol) {
            std::ostringstream os;
            os << "coordinate " << x << " outside [" << ax.lower() << ", " << ax.upper()
               << "] on axis " << k;
            raise(ErrorCode::PointOutsideDomain, os.str());
        }
        auto knots = ax.knots();
        // Interior knots resolve to the lower cell; matching conditions make
        // the RB value identical on shared faces either way.
        auto it = std::lower_bound(knots.begin(), knots.end(), x);
        int cell;
        bool on_knot = false;
        if (it == knots.end()) {
            cell = ax.cell_count();
        } else {
            int j = static_cast<int>(it - knots.begin());
            if (*it == x) {
                cell = j == 0 ? 1 : j;
                on_knot = j > 0 && j < ax.cell_count();
            } else {
                cell = std::max(1, j);
            }
        }
        cell = std::min(cell, ax.cell_count());
        loc.cell[static_cast<std::size_t>(k)] = cell;
        loc.on_interior_knot[static_cast<std::size_t>(k)] = on_knot;
    }
    return loc;
}

}  // namespace fif
