#include "fif/rb.hpp"

#include <algorithm>
#include <cmath>
#include <random>
#include <sstream>

#include "fif/parallel.hpp"

namespace fif {

namespace {

constexpr std::size_t kMaxDimension = 16;

void format_index(std::ostringstream& os, std::span<const int> idx) {
    os << "(";
    for (std::size_t k = 0; k < idx.size(); ++k) os << (k ? "," : "") << idx[k];
    os << ")";
}

bool same_grid(const GridPartition& a, const GridPartition& b) {
    if (a.dimension() != b.dimension()) return false;
    for (int k = 0; k < a.dimension(); ++k) {
        auto ka = a.axis(k).knots();
        auto kb = b.axis(k).knots();
        if (!std::equal(ka.begin(), ka.end(), kb.begin(), kb.end())) return false;
    }
    return true;
}

}  // namespace

VerticalMap::VerticalMap(std::vector<int> cell, double declared_contraction, Evaluator eval)
    : cell_(std::move(cell)), declared_contraction_(declared_contraction), eval_(std::move(eval)) {}

VerticalMap::VerticalMap(std::vector<int> cell, double declared_contraction, AffineInY parts)
    : cell_(std::move(cell)),
      declared_contraction_(declared_contraction),
      affine_(std::move(parts)) {
    auto offset = affine_->offset;
    auto slope = affine_->slope;
    eval_ = [offset, slope](std::span<const double> X, double y) {
        return offset(X) + slope(X) * y;
    };
}

double VerticalMap::operator()(std::span<const double> X, double y) const { return eval_(X, y); }

FifSystem::FifSystem(GridPartition grid, DataTensor data, std::vector<VerticalMap> vertical_maps)
    : grid_(std::move(grid)), data_(std::move(data)) {
    const int n = grid_.dimension();
    axis_maps_.reserve(static_cast<std::size_t>(n));
    for (int k = 0; k < n; ++k) axis_maps_.push_back(build_axis_maps(grid_.axis(k), k));

    if (vertical_maps.size() != grid_.cell_count()) {
        raise(ErrorCode::LatticeMismatch,
              "expected " + std::to_string(grid_.cell_count()) + " vertical maps, got " +
                  std::to_string(vertical_maps.size()));
    }
    vertical_maps_.resize(vertical_maps.size(),
                          VerticalMap({}, 0.0, VerticalMap::Evaluator{}));
    std::vector<bool> seen(vertical_maps.size(), false);
    for (auto& map : vertical_maps) {
        const std::size_t flat = grid_.cell_flat_index(map.cell());
        if (seen[flat]) raise(ErrorCode::LatticeMismatch, "duplicate vertical map for a cell");
        seen[flat] = true;
        const double gamma = map.declared_contraction();
        if (!(gamma >= 0.0) || gamma >= 1.0) {
            raise(ErrorCode::ContractionViolation,
                  "declared y-contraction " + std::to_string(gamma) + " is not in [0, 1)");
        }
        max_contraction_ = std::max(max_contraction_, gamma);
        vertical_maps_[flat] = std::move(map);
    }
    for (bool s : seen) {
        if (!s) raise(ErrorCode::LatticeMismatch, "missing vertical map for a cell");
    }
}

std::span<const AffineCellMap> FifSystem::axis_maps(int k) const {
    if (k < 0 || k >= grid_.dimension()) raise(ErrorCode::IndexOutOfRange, "axis");
    return axis_maps_[static_cast<std::size_t>(k)];
}

const AffineCellMap& FifSystem::cell_map(int axis, int cell) const {
    auto maps = axis_maps(axis);
    if (cell < 1 || cell > static_cast<int>(maps.size())) {
        raise(ErrorCode::IndexOutOfRange, "cell " + std::to_string(cell));
    }
    return maps[static_cast<std::size_t>(cell - 1)];
}

ProductCellMap FifSystem::product_map(std::span<const int> cell) const {
    std::vector<AffineCellMap> parts;
    parts.reserve(cell.size());
    for (std::size_t k = 0; k < cell.size(); ++k) {
        parts.push_back(cell_map(static_cast<int>(k), cell[k]));
    }
    return ProductCellMap(std::move(parts));
}

const VerticalMap& FifSystem::vertical_map_at(std::size_t cell_flat) const {
    if (cell_flat >= vertical_maps_.size()) raise(ErrorCode::IndexOutOfRange, "cell index");
    return vertical_maps_[cell_flat];
}

const VerticalMap& FifSystem::vertical_map(std::span<const int> cell) const {
    return vertical_maps_[grid_.cell_flat_index(cell)];
}

// ---------------------------------------------------------------------------

ConstraintReport check_data_constraints(const FifSystem& system, double tol) {
    ConstraintReport report;
    report.tolerance = tol;
    const GridPartition& grid = system.grid();
    const int n = grid.dimension();
    const std::vector<int> cells = grid.cell_shape();
    std::vector<int> corner_node(static_cast<std::size_t>(n));
    std::vector<int> target_node(static_cast<std::size_t>(n));
    std::vector<int> bits(static_cast<std::size_t>(n));
    for_each_multi_index(cells, 1, [&](std::span<const int> cell) {
        const VerticalMap& F = system.vertical_map(cell);
        const std::size_t combos = static_cast<std::size_t>(1) << n;
        for (std::size_t c = 0; c < combos; ++c) {
            for (int k = 0; k < n; ++k) {
                const int N = grid.axis(k).cell_count();
                const int side = ((c >> k) & 1u) ? N : 0;
                bits[static_cast<std::size_t>(k)] = side == 0 ? 0 : 1;
                corner_node[static_cast<std::size_t>(k)] = side;
                target_node[static_cast<std::size_t>(k)] =
                    corner_node_index(cell[static_cast<std::size_t>(k)], side, N);
            }
            const std::vector<double> X = grid.corner_point(bits);
            const double y = system.data().at(corner_node);
            const double expected = system.data().at(target_node);
            const double got = F(X, y);
            const double residual = std::abs(got - expected);
            report.checks += 1;
            report.max_residual = std::max(report.max_residual, residual);
            if (!(residual <= tol)) {
                report.passed = false;
                std::ostringstream os;
                os << "cell ";
                format_index(os, cell);
                os << " corner ";
                format_index(os, corner_node);
                os << ": |F - data| = " << residual;
                report.failures.push_back(os.str());
            }
        }
    });
    return report;
}

ConstraintReport verify_data_constraints(const FifSystem& system, double tol) {
    ConstraintReport report = check_data_constraints(system, tol);
    if (!report.passed) raise(ErrorCode::DataConstraintViolation, report.failures.front());
    return report;
}

double estimate_y_contraction(const VerticalMap& map, const GridPartition& grid, int samples,
                              double y_halfwidth, std::uint64_t seed) {
    if (samples < 1) raise(ErrorCode::IndexOutOfRange, "samples must be >= 1");
    std::mt19937_64 rng(seed);
    std::uniform_real_distribution<double> unit(0.0, 1.0);
    std::uniform_real_distribution<double> ydist(-y_halfwidth, y_halfwidth);
    const int n = grid.dimension();
    std::vector<double> X(static_cast<std::size_t>(n));
    double max_ratio = 0.0;
    for (int s = 0; s < samples; ++s) {
        for (int k = 0; k < n; ++k) {
            const AxisPartition& ax = grid.axis(k);
            X[static_cast<std::size_t>(k)] = ax.lower() + ax.width() * unit(rng);
        }
        double y1 = ydist(rng);
        double y2 = ydist(rng);
        if (std::abs(y1 - y2) < 1e-6) y2 = y1 + 0.5 * y_halfwidth + 1e-3;
        const double ratio = std::abs(map(X, y1) - map(X, y2)) / std::abs(y1 - y2);
        max_ratio = std::max(max_ratio, ratio);
    }
    if (max_ratio > map.declared_contraction() + 1e-10) {
        std::ostringstream os;
        os << "empirical y-contraction " << max_ratio << " exceeds declared "
           << map.declared_contraction();
        raise(ErrorCode::ContractionViolation, os.str());
    }
    return max_ratio;
}

MatchingReport check_matching_conditions(const FifSystem& system, int samples_per_face,
                                         int y_samples, double tol, std::uint64_t seed) {
    MatchingReport report;
    report.tolerance = tol;
    const GridPartition& grid = system.grid();
    const int n = grid.dimension();
    std::mt19937_64 rng(seed);
    std::uniform_real_distribution<double> unit(0.0, 1.0);
    const double y_lo = system.data_min() - 1.0;
    const double y_hi = system.data_max() + 1.0;

    std::vector<double> X(static_cast<std::size_t>(n));
    for (int k = 0; k < n; ++k) {
        const int Nk = grid.axis(k).cell_count();
        // Cells of the other axes; this axis is pinned to the adjacent pair.
        std::vector<int> other_extents;
        for (int j = 0; j < n; ++j) {
            if (j != k) other_extents.push_back(grid.axis(j).cell_count());
        }
        for (int knot = 1; knot < Nk; ++knot) {
            const double x_star = system.cell_map(k, knot).inverse_unchecked(grid.axis(k).knot(knot));
            auto run_face = [&](std::span<const int> other_cells) {
                std::vector<int> left(static_cast<std::size_t>(n));
                std::vector<int> right(static_cast<std::size_t>(n));
                std::size_t pos = 0;
                for (int j = 0; j < n; ++j) {
                    if (j == k) {
                        left[static_cast<std::size_t>(j)] = knot;
                        right[static_cast<std::size_t>(j)] = knot + 1;
                    } else {
                        left[static_cast<std::size_t>(j)] = other_cells[pos];
                        right[static_cast<std::size_t>(j)] = other_cells[pos];
                        ++pos;
                    }
                }
                const VerticalMap& FL = system.vertical_map(left);
                const VerticalMap& FR = system.vertical_map(right);
                report.faces_checked += 1;
                double face_max = 0.0;
                for (int s = 0; s < samples_per_face; ++s) {
                    for (int j = 0; j < n; ++j) {
                        const AxisPartition& ax = grid.axis(j);
                        X[static_cast<std::size_t>(j)] =
                            j == k ? x_star : ax.lower() + ax.width() * unit(rng);
                    }
                    for (int t = 0; t < y_samples; ++t) {
                        const double y =
                            y_lo + (y_hi - y_lo) * (y_samples == 1
                                                        ? 0.5
                                                        : static_cast<double>(t) /
                                                              static_cast<double>(y_samples - 1));
                        const double residual = std::abs(FL(X, y) - FR(X, y));
                        face_max = std::max(face_max, residual);
                        report.points_checked += 1;
                        if (!(residual <= tol) && report.failures.size() < 16) {
                            std::ostringstream os;
                            os << "axis " << k << " knot " << grid.axis(k).knot(knot)
                               << " cells ";
                            format_index(os, left);
                            os << "/";
                            format_index(os, right);
                            os << ": |F_left - F_right| = " << residual << " at y = " << y;
                            report.failures.push_back(os.str());
                        }
                    }
                }
                report.max_residual = std::max(report.max_residual, face_max);
                if (face_max > tol) report.passed = false;
            };
            if (other_extents.empty()) {
                run_face(std::span<const int>{});
            } else {
                for_each_multi_index(other_extents, 1, run_face);
            }
        }
    }
    return report;
}

MatchingReport verify_matching_conditions(const FifSystem& system, int samples_per_face,
                                          int y_samples, double tol, std::uint64_t seed) {
    MatchingReport report = check_matching_conditions(system, samples_per_face, y_samples, tol, seed);
    if (!report.passed) raise(ErrorCode::MatchingViolation, report.failures.front());
    return report;
}

// ---------------------------------------------------------------------------
// PullbackPlan

PullbackPlan::PullbackPlan(const GridPartition& grid, int refinement) : refinement_(refinement) {
    const int n = grid.dimension();
    if (static_cast<std::size_t>(n) > kMaxDimension) {
        raise(ErrorCode::IndexOutOfRange, "dimension too large");
    }
    shape_.resize(static_cast<std::size_t>(n));
    coords_.resize(static_cast<std::size_t>(n));
    axis_cell_.resize(static_cast<std::size_t>(n));
    cell_term_.resize(static_cast<std::size_t>(n));
    pullback_.resize(static_cast<std::size_t>(n));
    interp_base_.resize(static_cast<std::size_t>(n));
    interp_frac_.resize(static_cast<std::size_t>(n));

    // Row-major strides over lattice points and over cells.
    std::vector<std::size_t> cell_strides(static_cast<std::size_t>(n), 1);
    strides_.assign(static_cast<std::size_t>(n), 1);
    for (int k = n - 1; k >= 0; --k) {
        coords_[static_cast<std::size_t>(k)] =
            detail::axis_lattice_coordinates(grid.axis(k), refinement);
        shape_[static_cast<std::size_t>(k)] = coords_[static_cast<std::size_t>(k)].size();
    }
    for (int k = n - 2; k >= 0; --k) {
        strides_[static_cast<std::size_t>(k)] =
            strides_[static_cast<std::size_t>(k) + 1] * shape_[static_cast<std::size_t>(k) + 1];
        cell_strides[static_cast<std::size_t>(k)] =
            cell_strides[static_cast<std::size_t>(k) + 1] *
            static_cast<std::size_t>(grid.axis(k + 1).cell_count());
    }
    total_ = 1;
    for (std::size_t d : shape_) total_ *= d;

    for (int k = 0; k < n; ++k) {
        const AxisPartition& ax = grid.axis(k);
        const std::vector<AffineCellMap> maps = build_axis_maps(ax, k);
        const std::vector<double>& c = coords_[static_cast<std::size_t>(k)];
        const std::size_t L = c.size();
        auto& cell = axis_cell_[static_cast<std::size_t>(k)];
        auto& term = cell_term_[static_cast<std::size_t>(k)];
        auto& pull = pullback_[static_cast<std::size_t>(k)];
        auto& base = interp_base_[static_cast<std::size_t>(k)];
        auto& frac = interp_frac_[static_cast<std::size_t>(k)];
        cell.resize(L);
        term.resize(L);
        pull.resize(L);
        base.resize(L);
        frac.resize(L);
        for (std::size_t l = 0; l < L; ++l) {
            // Lattice index l sits in cell ceil(l / refinement); index 0 in
            // cell 1. Knot points land in the lower cell.
            int ci = l == 0 ? 1
                            : static_cast<int>((l + static_cast<std::size_t>(refinement) - 1) /
                                               static_cast<std::size_t>(refinement));
            ci = std::min(ci, ax.cell_count());
            cell[l] = ci;
            term[l] = static_cast<std::size_t>(ci - 1) * cell_strides[static_cast<std::size_t>(k)];
            double x = maps[static_cast<std::size_t>(ci - 1)].inverse_unchecked(c[l]);
            x = std::clamp(x, ax.lower(), ax.upper());
            pull[l] = x;
            const detail::AxisStencil st =
                detail::locate_on_axis(c, x, GridPartition::kDomainTolerance);
            base[l] = st.lo * strides_[static_cast<std::size_t>(k)];
            frac[l] = st.frac;
        }
    }
}

void PullbackPlan::decompose(std::size_t flat, std::span<std::size_t> idx) const {
    std::size_t rem = flat;
    for (std::size_t k = 0; k < strides_.size(); ++k) {
        idx[k] = rem / strides_[k];
        rem %= strides_[k];
    }
}

double PullbackPlan::interpolate(std::span<const double> values, std::size_t flat) const {
    const std::size_t n = strides_.size();
    double frac[kMaxDimension];
    std::size_t base = 0;
    std::size_t rem = flat;
    for (std::size_t k = 0; k < n; ++k) {
        const std::size_t i = rem / strides_[k];
        rem %= strides_[k];
        base += interp_base_[k][i];
        frac[k] = interp_frac_[k][i];
    }
    double acc = 0.0;
    const std::size_t corners = static_cast<std::size_t>(1) << n;
    for (std::size_t c = 0; c < corners; ++c) {
        double w = 1.0;
        std::size_t idx = base;
        for (std::size_t k = 0; k < n; ++k) {
            if ((c >> k) & 1u) {
                w *= frac[k];
                idx += strides_[k];
            } else {
                w *= 1.0 - frac[k];
            }
        }
        if (w != 0.0) acc += w * values[idx];
    }
    return acc;
}

std::size_t PullbackPlan::cell_flat(std::size_t flat) const {
    std::size_t out = 0;
    std::size_t rem = flat;
    for (std::size_t k = 0; k < strides_.size(); ++k) {
        const std::size_t i = rem / strides_[k];
        rem %= strides_[k];
        out += cell_term_[k][i];
    }
    return out;
}

void PullbackPlan::lattice_point(std::size_t flat, std::span<double> out) const {
    std::size_t rem = flat;
    for (std::size_t k = 0; k < strides_.size(); ++k) {
        const std::size_t i = rem / strides_[k];
        rem %= strides_[k];
        out[k] = coords_[k][i];
    }
}

void PullbackPlan::pullback_point(std::size_t flat, std::span<double> out) const {
    std::size_t rem = flat;
    for (std::size_t k = 0; k < strides_.size(); ++k) {
        const std::size_t i = rem / strides_[k];
        rem %= strides_[k];
        out[k] = pullback_[k][i];
    }
}

// ---------------------------------------------------------------------------
// Sweeps and the solver

namespace {

/// Shared per-solve state: the pullback plan plus, when every vertical map is
/// affine in y, the hoisted per-point offset/slope tables.
struct SweepContext {
    const FifSystem& system;
    PullbackPlan plan;
    bool affine = true;
    std::vector<double> offset;
    std::vector<double> slope;

    SweepContext(const FifSystem& sys, int refinement)
        : system(sys), plan(sys.grid(), refinement) {
        for (std::size_t c = 0; c < sys.grid().cell_count(); ++c) {
            if (!sys.vertical_map_at(c).affine_in_y()) {
                affine = false;
                break;
            }
        }
        if (affine) {
            offset.resize(plan.size());
            slope.resize(plan.size());
            const std::size_t n = static_cast<std::size_t>(plan.dimension());
            parallel_for_chunks(0, plan.size(), [&](std::size_t lo, std::size_t hi) {
                std::vector<double> xin(n);
                for (std::size_t i = lo; i < hi; ++i) {
                    plan.pullback_point(i, xin);
                    const VerticalMap& F = system.vertical_map_at(plan.cell_flat(i));
                    offset[i] = F.affine_parts().offset(xin);
                    slope[i] = F.affine_parts().slope(xin);
                }
            });
        }
    }

    void sweep(std::span<const double> g, std::span<double> out) const {
        const std::size_t n = static_cast<std::size_t>(plan.dimension());
        if (affine) {
            parallel_for_chunks(0, plan.size(), [&](std::size_t lo, std::size_t hi) {
                for (std::size_t i = lo; i < hi; ++i) {
                    out[i] = offset[i] + slope[i] * plan.interpolate(g, i);
                }
            });
        } else {
            parallel_for_chunks(0, plan.size(), [&](std::size_t lo, std::size_t hi) {
                std::vector<double> xin(n);
                for (std::size_t i = lo; i < hi; ++i) {
                    plan.pullback_point(i, xin);
                    const VerticalMap& F = system.vertical_map_at(plan.cell_flat(i));
                    out[i] = F(xin, plan.interpolate(g, i));
                }
            });
        }
    }
};

void require_same_grid(const FifSystem& system, const SampledFunction& g) {
    if (!same_grid(system.grid(), g.grid())) {
        raise(ErrorCode::LatticeMismatch, "function lattice does not match the system grid");
    }
}

double fitted_ratio(const std::vector<double>& history) {
    // Geometric mean of the trailing sup-change ratios.
    if (history.size() < 2) return 0.0;
    double log_sum = 0.0;
    int count = 0;
    const std::size_t first = history.size() > 9 ? history.size() - 9 : 1;
    for (std::size_t i = first; i < history.size(); ++i) {
        if (history[i - 1] > 0.0 && history[i] > 0.0) {
            log_sum += std::log(history[i] / history[i - 1]);
            ++count;
        }
    }
    return count == 0 ? 0.0 : std::exp(log_sum / count);
}

}  // namespace

SampledFunction apply_rb_operator(const FifSystem& system, const SampledFunction& g) {
    require_same_grid(system, g);
    SweepContext ctx(system, g.refinement());
    std::vector<double> out(g.size());
    ctx.sweep(g.values(), out);
    return g.with_values(std::move(out));
}

double rb_value_via_cell(const FifSystem& system, const SampledFunction& g,
                         std::span<const double> X, std::span<const int> cell) {
    const int n = system.grid().dimension();
    std::vector<double> xin(static_cast<std::size_t>(n));
    for (int k = 0; k < n; ++k) {
        const AffineCellMap& map = system.cell_map(k, cell[static_cast<std::size_t>(k)]);
        const AxisPartition& ax = system.grid().axis(k);
        xin[static_cast<std::size_t>(k)] =
            std::clamp(map.inverse(X[static_cast<std::size_t>(k)]), ax.lower(), ax.upper());
    }
    const VerticalMap& F = system.vertical_map(cell);
    return F(xin, g.evaluate(xin));
}

std::pair<SampledFunction, SolveDiagnostics> solve_fif(const FifSystem& system,
                                                       const SolveOptions& opts) {
    if (!opts.assume_verified) {
        ConstraintReport data_report = check_data_constraints(system, opts.verification_tol);
        if (!data_report.passed) {
            raise(ErrorCode::ConstraintsUnverified,
                  "data constraints failed: " + data_report.failures.front());
        }
        MatchingReport matching =
            check_matching_conditions(system, opts.matching_samples_per_face,
                                      opts.matching_y_samples, opts.verification_tol);
        if (!matching.passed) {
            raise(ErrorCode::ConstraintsUnverified,
                  "matching conditions failed: " + matching.failures.front());
        }
    }

    SampledFunction start = opts.initial
                                ? *opts.initial
                                : SampledFunction::from_node_data(system.grid(), opts.refinement,
                                                                  system.data());
    require_same_grid(system, start);
    if (opts.initial && start.refinement() != opts.refinement) {
        raise(ErrorCode::LatticeMismatch, "initial iterate refinement does not match options");
    }

    SweepContext ctx(system, start.refinement());
    std::vector<double> cur(start.values().begin(), start.values().end());
    std::vector<double> next(cur.size());

    SolveDiagnostics diag;
    diag.max_contraction = system.max_contraction();
    double change = 0.0;
    bool converged = false;
    for (int it = 1; it <= opts.max_iter; ++it) {
        ctx.sweep(cur, next);
        change = max_abs_difference(cur, next);
        diag.sup_change_history.push_back(change);
        diag.iterations = it;
        cur.swap(next);
        if (change <= opts.tol) {
            converged = true;
            break;
        }
    }
    diag.final_sup_change = change;
    diag.contraction_estimate = fitted_ratio(diag.sup_change_history);
    const double gamma = diag.max_contraction;
    diag.aposteriori_bound = gamma < 1.0 ? gamma / (1.0 - gamma) * change : change;
    if (!converged) {
        std::ostringstream os;
        os << "sup-change " << change << " still above tol " << opts.tol << " after "
           << opts.max_iter << " iterations";
        raise(ErrorCode::NotConverged, os.str());
    }
    return {start.with_values(std::move(cur)), diag};
}

double self_referential_residual(const SampledFunction& fif, const FifSystem& system,
                                 std::span<const std::vector<double>> probes) {
    require_same_grid(system, fif);
    const int n = system.grid().dimension();
    std::vector<double> xin(static_cast<std::size_t>(n));
    double max_residual = 0.0;
    for (const auto& X : probes) {
        const CellLocation loc = locate_cell(system.grid(), X);
        for (int k = 0; k < n; ++k) {
            const AffineCellMap& map = system.cell_map(k, loc.cell[static_cast<std::size_t>(k)]);
            const AxisPartition& ax = system.grid().axis(k);
            xin[static_cast<std::size_t>(k)] =
                std::clamp(map.inverse_unchecked(X[static_cast<std::size_t>(k)]), ax.lower(),
                           ax.upper());
        }
        const VerticalMap& F = system.vertical_map(loc.cell);
        const double rhs = F(xin, fif.evaluate(xin));
        max_residual = std::max(max_residual, std::abs(fif.evaluate(X) - rhs));
    }
    return max_residual;
}

AttractorSamples sample_attractor(const FifSystem& system, const AttractorOptions& opts) {
    if (opts.depth < 1) raise(ErrorCode::IndexOutOfRange, "depth must be >= 1");
    const GridPartition& grid = system.grid();
    const int n = grid.dimension();

    // All product maps paired with their vertical maps, in cell order.
    std::vector<ProductCellMap> product_maps;
    std::vector<const VerticalMap*> verticals;
    product_maps.reserve(grid.cell_count());
    const std::vector<int> cell_shape = grid.cell_shape();
    for_each_multi_index(cell_shape, 1, [&](std::span<const int> cell) {
        product_maps.push_back(system.product_map(cell));
        verticals.push_back(&system.vertical_map(cell));
    });
    const std::size_t fan_out = product_maps.size();

    AttractorSamples current;
    current.dimension = n;
    const std::vector<int> node_shape = grid.node_shape();
    for_each_multi_index(node_shape, 0, [&](std::span<const int> node) {
        const std::vector<double> X = grid.node_point(node);
        current.coordinates.insert(current.coordinates.end(), X.begin(), X.end());
        current.values.push_back(system.data().at(node));
    });
    if (opts.seed_point) {
        const std::vector<double>& X = *opts.seed_point;
        if (static_cast<int>(X.size()) != n || !grid.contains(X)) {
            raise(ErrorCode::PointOutsideDomain, "attractor seed point outside domain");
        }
        current.coordinates.insert(current.coordinates.end(), X.begin(), X.end());
        current.values.push_back(opts.seed_value);
    }

    std::vector<double> image(static_cast<std::size_t>(n));
    for (int d = 0; d < opts.depth; ++d) {
        const std::size_t points = current.point_count();
        if (points * fan_out > opts.max_points) {
            raise(ErrorCode::DepthTooLarge,
                  "depth " + std::to_string(opts.depth) + " would produce more than " +
                      std::to_string(opts.max_points) + " points");
        }
        AttractorSamples next;
        next.dimension = n;
        next.coordinates.reserve(points * fan_out * static_cast<std::size_t>(n));
        next.values.reserve(points * fan_out);
        for (std::size_t p = 0; p < points; ++p) {
            const std::span<const double> X(current.coordinates.data() +
                                                p * static_cast<std::size_t>(n),
                                            static_cast<std::size_t>(n));
            const double y = current.values[p];
            for (std::size_t c = 0; c < fan_out; ++c) {
                for (int k = 0; k < n; ++k) {
                    image[static_cast<std::size_t>(k)] =
                        product_maps[c].component(k).forward_unchecked(
                            X[static_cast<std::size_t>(k)]);
                }
                next.coordinates.insert(next.coordinates.end(), image.begin(), image.end());
                next.values.push_back((*verticals[c])(X, y));
            }
        }
        current = std::move(next);
    }
    return current;
}

}  // namespace fif
