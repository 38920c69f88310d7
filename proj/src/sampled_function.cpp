#include "fif/sampled_function.hpp"

#include <algorithm>
#include <cmath>
#include <sstream>

namespace fif {

namespace detail {

AxisStencil locate_on_axis(std::span<const double> coords, double x, double tol) {
    const double lo = coords.front();
    const double hi = coords.back();
    if (x < lo || x > hi) {
        if (x >= lo - tol && x < lo) return {0, 0.0};
        if (x <= hi + tol && x > hi) return {coords.size() - 2, 1.0};
        std::ostringstream os;
        os << "coordinate " << x << " outside [" << lo << ", " << hi << "]";
        raise(ErrorCode::PointOutsideDomain, os.str());
    }
    auto it = std::upper_bound(coords.begin(), coords.end(), x);
    std::size_t idx = static_cast<std::size_t>(it - coords.begin());
    if (idx == 0) return {0, 0.0};
    if (idx >= coords.size()) return {coords.size() - 2, 1.0};
    const std::size_t lo_idx = idx - 1;
    const double step = coords[lo_idx + 1] - coords[lo_idx];
    return {lo_idx, (x - coords[lo_idx]) / step};
}

std::vector<double> axis_lattice_coordinates(const AxisPartition& axis, int refinement) {
    std::vector<double> c;
    c.reserve(static_cast<std::size_t>(axis.cell_count()) * static_cast<std::size_t>(refinement) + 1);
    for (int cell = 1; cell <= axis.cell_count(); ++cell) {
        const double lo = axis.cell_lower(cell);
        const double hi = axis.cell_upper(cell);
        c.push_back(lo);
        for (int s = 1; s < refinement; ++s) {
            c.push_back(lo + (hi - lo) * static_cast<double>(s) / static_cast<double>(refinement));
        }
    }
    c.push_back(axis.upper());
    return c;
}

}  // namespace detail

SampledFunction::SampledFunction(const GridPartition& grid, int refinement)
    : grid_(grid), refinement_(refinement) {
    if (refinement < 1) raise(ErrorCode::LatticeMismatch, "refinement must be >= 1");
    const int n = grid_.dimension();
    coords_.resize(static_cast<std::size_t>(n));
    shape_.resize(static_cast<std::size_t>(n));
    for (int k = 0; k < n; ++k) {
        coords_[static_cast<std::size_t>(k)] =
            detail::axis_lattice_coordinates(grid_.axis(k), refinement);
        shape_[static_cast<std::size_t>(k)] = coords_[static_cast<std::size_t>(k)].size();
    }
    strides_.assign(static_cast<std::size_t>(n), 1);
    for (int k = n - 2; k >= 0; --k) {
        strides_[static_cast<std::size_t>(k)] =
            strides_[static_cast<std::size_t>(k) + 1] * shape_[static_cast<std::size_t>(k) + 1];
    }
}

SampledFunction SampledFunction::from_values(GridPartition grid, int refinement,
                                             std::vector<double> values) {
    SampledFunction s(grid, refinement);
    std::size_t total = 1;
    for (std::size_t d : s.shape_) total *= d;
    if (values.size() != total) {
        raise(ErrorCode::LatticeMismatch, "expected " + std::to_string(total) +
                                              " lattice values, got " +
                                              std::to_string(values.size()));
    }
    s.values_ = std::make_shared<const std::vector<double>>(std::move(values));
    return s;
}

SampledFunction SampledFunction::from_node_data(const GridPartition& grid, int refinement,
                                                const DataTensor& data) {
    const int n = grid.dimension();
    std::vector<std::span<const double>> knots(static_cast<std::size_t>(n));
    for (int k = 0; k < n; ++k) knots[static_cast<std::size_t>(k)] = grid.axis(k).knots();
    return SampledFunction::from_function(grid, refinement, [&](std::span<const double> X) {
        // Multilinear blend of the surrounding node values.
        const std::size_t nn = X.size();
        std::vector<detail::AxisStencil> st(nn);
        for (std::size_t k = 0; k < nn; ++k) {
            st[k] = detail::locate_on_axis(knots[k], X[k], GridPartition::kDomainTolerance);
        }
        double acc = 0.0;
        std::vector<int> node(nn);
        const std::size_t corners = static_cast<std::size_t>(1) << nn;
        for (std::size_t c = 0; c < corners; ++c) {
            double w = 1.0;
            for (std::size_t k = 0; k < nn; ++k) {
                const bool hi = (c >> k) & 1u;
                w *= hi ? st[k].frac : 1.0 - st[k].frac;
                node[k] = static_cast<int>(st[k].lo) + (hi ? 1 : 0);
            }
            if (w != 0.0) acc += w * data.at(node);
        }
        return acc;
    });
}

double SampledFunction::evaluate(std::span<const double> X) const {
    const std::size_t n = coords_.size();
    if (X.size() != n) raise(ErrorCode::PointOutsideDomain, "point dimension mismatch");
    double acc = 0.0;
    std::vector<detail::AxisStencil> st(n);
    for (std::size_t k = 0; k < n; ++k) {
        st[k] = detail::locate_on_axis(coords_[k], X[k], GridPartition::kDomainTolerance);
    }
    const std::vector<double>& v = *values_;
    const std::size_t corners = static_cast<std::size_t>(1) << n;
    for (std::size_t c = 0; c < corners; ++c) {
        double w = 1.0;
        std::size_t flat = 0;
        for (std::size_t k = 0; k < n; ++k) {
            const bool hi = (c >> k) & 1u;
            w *= hi ? st[k].frac : 1.0 - st[k].frac;
            flat += (st[k].lo + (hi ? 1 : 0)) * strides_[k];
        }
        if (w != 0.0) acc += w * v[flat];
    }
    return acc;
}

double SampledFunction::value_at(std::span<const std::size_t> lattice_index) const {
    std::size_t flat = 0;
    for (std::size_t k = 0; k < strides_.size(); ++k) {
        if (lattice_index[k] >= shape_[k]) {
            raise(ErrorCode::IndexOutOfRange, "lattice index on axis " + std::to_string(k));
        }
        flat += lattice_index[k] * strides_[k];
    }
    return (*values_)[flat];
}

std::vector<double> SampledFunction::lattice_point(std::span<const std::size_t> lattice_index) const {
    std::vector<double> X(coords_.size());
    for (std::size_t k = 0; k < coords_.size(); ++k) X[k] = coords_[k][lattice_index[k]];
    return X;
}

double SampledFunction::node_value(std::span<const int> node) const {
    std::size_t flat = 0;
    for (std::size_t k = 0; k < strides_.size(); ++k) {
        flat += static_cast<std::size_t>(node[k]) * static_cast<std::size_t>(refinement_) *
                strides_[k];
    }
    return (*values_)[flat];
}

SampledFunction SampledFunction::with_values(std::vector<double> values) const {
    if (values.size() != size()) raise(ErrorCode::LatticeMismatch, "value count mismatch");
    SampledFunction s(*this);
    s.values_ = std::make_shared<const std::vector<double>>(std::move(values));
    return s;
}

RealFunction SampledFunction::to_function() const {
    auto self = std::make_shared<const SampledFunction>(*this);
    return RealFunction([self](std::span<const double> X) { return self->evaluate(X); },
                        "sampled");
}

bool SampledFunction::same_lattice(const SampledFunction& other) const {
    if (refinement_ != other.refinement_) return false;
    if (coords_.size() != other.coords_.size()) return false;
    for (std::size_t k = 0; k < coords_.size(); ++k) {
        if (coords_[k] != other.coords_[k]) return false;
    }
    return true;
}

double sup_distance(const SampledFunction& s1, const SampledFunction& s2) {
    if (!s1.same_lattice(s2)) {
        raise(ErrorCode::LatticeMismatch, "sup_distance requires a shared lattice");
    }
    return max_abs_difference(s1.values(), s2.values());
}

double lattice_sup_norm(const SampledFunction& s) {
    double m = 0.0;
    for (double v : s.values()) m = std::max(m, std::abs(v));
    return m;
}

double max_abs_difference(std::span<const double> a, std::span<const double> b) {
    double m = 0.0;
    for (std::size_t i = 0; i < a.size(); ++i) m = std::max(m, std::abs(a[i] - b[i]));
    return m;
}

double multilinear_eval(const SampledFunction& s, std::span<const double> X) {
    return s.evaluate(X);
}

}  // namespace fif
