#include "fif/cell_maps.hpp"

#include <cmath>
#include <sstream>

namespace fif {

namespace {

void check_interval(double x, double lo, double hi, const char* what) {
    const double tol = GridPartition::kDomainTolerance;
    if (x < lo - tol || x > hi + tol) {
        std::ostringstream os;
        os << what << " argument " << x << " outside [" << lo << ", " << hi << "]";
        raise(ErrorCode::OutOfDomain, os.str());
    }
}

}  // namespace

double AffineCellMap::forward(double x) const {
    check_interval(x, axis_lower_, axis_upper_, "forward");
    return forward_unchecked(x);
}

double AffineCellMap::inverse(double x) const {
    check_interval(x, cell_lower_, cell_upper_, "inverse");
    return inverse_unchecked(x);
}

double apply_map(const AffineCellMap& map, double x, MapDirection direction) {
    return direction == MapDirection::forward ? map.forward(x) : map.inverse(x);
}

std::vector<AffineCellMap> build_axis_maps(const AxisPartition& axis, int axis_index) {
    std::vector<AffineCellMap> maps;
    maps.reserve(static_cast<std::size_t>(axis.cell_count()));
    const double a = axis.lower();
    const double b = axis.upper();
    const double width = b - a;
    for (int cell = 1; cell <= axis.cell_count(); ++cell) {
        const double lo = axis.cell_lower(cell);
        const double hi = axis.cell_upper(cell);
        double slope, offset;
        if (cell % 2 == 1) {
            // u(a) = lo, u(b) = hi
            slope = (hi - lo) / width;
            offset = lo - slope * a;
        } else {
            // u(a) = hi, u(b) = lo
            slope = (lo - hi) / width;
            offset = hi - slope * a;
        }
        maps.emplace_back(axis_index, cell, slope, offset, a, b, lo, hi);
    }
    return maps;
}

std::vector<double> ProductCellMap::forward(std::span<const double> X) const {
    std::vector<double> out(components_.size());
    forward_into(X, out);
    return out;
}

std::vector<double> ProductCellMap::inverse(std::span<const double> X) const {
    std::vector<double> out(components_.size());
    inverse_into(X, out);
    return out;
}

void ProductCellMap::forward_into(std::span<const double> X, std::span<double> out) const {
    for (std::size_t k = 0; k < components_.size(); ++k) out[k] = components_[k].forward(X[k]);
}

void ProductCellMap::inverse_into(std::span<const double> X, std::span<double> out) const {
    for (std::size_t k = 0; k < components_.size(); ++k) out[k] = components_[k].inverse(X[k]);
}

SharedPointReport check_shared_points(const AxisPartition& axis,
                                      std::span<const AffineCellMap> maps, double tol) {
    SharedPointReport report;
    report.tolerance = tol;
    for (int i = 1; i < axis.cell_count(); ++i) {
        const double knot = axis.knot(i);
        const double left = maps[static_cast<std::size_t>(i - 1)].inverse_unchecked(knot);
        const double right = maps[static_cast<std::size_t>(i)].inverse_unchecked(knot);
        const double residual = std::abs(left - right);
        report.max_residual = std::max(report.max_residual, residual);
        report.common_points.push_back(left);
        if (residual > tol) {
            report.passed = false;
            std::ostringstream os;
            os << "interior knot " << knot << " on axis " << maps.front().axis()
               << ": inverse images " << left << " vs " << right;
            report.failures.push_back(os.str());
        }
    }
    return report;
}

SharedPointReport verify_shared_point(const AxisPartition& axis,
                                      std::span<const AffineCellMap> maps, double tol) {
    SharedPointReport report = check_shared_points(axis, maps, tol);
    if (!report.passed) {
        raise(ErrorCode::SharedPointViolation, report.failures.front());
    }
    return report;
}

}  // namespace fif
