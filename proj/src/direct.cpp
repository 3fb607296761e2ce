#include "swsynth/direct.hpp"

#include <algorithm>
#include <deque>
#include <optional>
#include <random>

namespace swsynth {

Box cell_image_box(const FlowMap& f, const CellGrid& grid, CellIndex cell) {
    const Vector center = f.post(grid.cell_center(cell));
    const Vector half = f.e().cwiseAbs() * (0.5 * grid.delta());
    return Box(center - half, center + half);
}

namespace {

bool image_inside(const FlowMap& f, const CellGrid& grid, CellIndex cell) {
    const Box image = cell_image_box(f, grid, cell);
    return grid.box().contains(image);
}

bool image_meets(const FlowMap& f, const CellGrid& grid, CellIndex cell, const CellRangeIndex& index) {
    const Box image = cell_image_box(f, grid, cell);
    CellCoord first, last;
    if (!grid.touching_range(image.lower(), image.upper(), first, last)) return false;
    return index.any_in(first, last);
}

void require_grid(const FlowMap& f, const CellGrid& grid) {
    if (f.dimension() != grid.dimension()) throw std::invalid_argument("flow and grid dimensions differ");
}

}  // namespace

GriddySet pre_over(const FlowMap& f, const GriddySet& s) {
    const auto& grid = *s.grid();
    require_grid(f, grid);
    if (s.is_empty()) return GriddySet::empty(s.grid());
    const CellRangeIndex index(s);
    return GriddySet::from_predicate(s.grid(), [&](CellIndex c) { return image_meets(f, grid, c, index); });
}

GriddySet escaping_cells(const FlowMap& f, const GridHandle& grid) {
    require_grid(f, *grid);
    return GriddySet::from_predicate(grid, [&](CellIndex c) { return !image_inside(f, *grid, c); });
}

const GriddySet& ControllableSubspace::control_of(int mode_id) const {
    for (std::size_t i = 0; i < mode_ids.size(); ++i) {
        if (mode_ids[i] == mode_id) return control[i];
    }
    throw std::out_of_range("no control set for mode " + std::to_string(mode_id));
}

ControllableSubspace algorithm1(const SwitchedSystem& sys, const GridHandle& grid, const FixpointOptions& options) {
    if (sys.dimension() != grid->dimension()) throw std::invalid_argument("algorithm1: dimension mismatch");
    const std::size_t m = static_cast<std::size_t>(sys.mode_count());
    const std::size_t bound = options.max_iterations ? options.max_iterations : grid->size() + 1;

    ControllableSubspace out{{}, {}, GriddySet::empty(grid), 0, false};
    for (const auto& mode : sys.modes()) out.mode_ids.push_back(mode.id);
    std::vector<GriddySet> control(m, GriddySet::full(grid));
    GriddySet uncontrol = GriddySet::empty(grid);

    while (out.iterations < bound) {
        ++out.iterations;
        // Only cells still in Control_i need the test; the rest stay removed.
        const std::optional<CellRangeIndex> index =
            uncontrol.is_empty() ? std::nullopt : std::optional<CellRangeIndex>(uncontrol);
        for (std::size_t i = 0; i < m; ++i) {
            const auto& f = sys.flows()[i];
            const auto& current = control[i];
            control[i] = GriddySet::from_predicate(grid, [&](CellIndex c) {
                if (!current.contains(c)) return false;
                if (!image_inside(f, *grid, c)) return false;
                return !(index && image_meets(f, *grid, c, *index));
            });
        }
        GriddySet covered = GriddySet::empty(grid);
        for (const auto& c : control) covered = covered.unite(c);
        GriddySet next = covered.complement();

        if (options.observer) options.observer(FixpointStep{out.iterations, control, next});
        if (next == uncontrol) {
            out.converged = true;
            break;
        }
        uncontrol = std::move(next);
    }

    out.v_prime = GriddySet::empty(grid);
    for (const auto& c : control) out.v_prime = out.v_prime.unite(c);
    out.control = std::move(control);
    return out;
}

InvarianceReport verify_invariance(const SwitchedSystem& sys, const ControllableSubspace& cs,
                                   std::size_t samples_per_cell, std::uint64_t seed) {
    const auto& grid = *cs.grid();
    const auto n = grid.dimension();
    if (sys.dimension() != n) throw std::invalid_argument("verify_invariance: dimension mismatch");
    const CellRangeIndex outside(cs.uncontrollable());
    const std::size_t corners = std::size_t{1} << n;
    const std::size_t fixed = corners + 1;
    const std::size_t extra = samples_per_cell > fixed ? samples_per_cell - fixed : 0;

    InvarianceReport report;
    for (std::size_t mi = 0; mi < cs.mode_ids.size(); ++mi) {
        const int id = cs.mode_ids[mi];
        const FlowMap& f = sys.flow(id);
        const auto cells = cs.control[mi].indices();

        struct CellResult {
            std::vector<InvarianceViolation> violations;
            bool grazing = false;
        };
        std::vector<CellResult> results(cells.size());
        parallel_for(cells.size(), [&](std::size_t begin, std::size_t end) {
            for (std::size_t j = begin; j < end; ++j) {
                const CellIndex c = cells[j];
                auto& r = results[j];
                const Box image = cell_image_box(f, grid, c);
                if (!grid.box().contains(image)) {
                    r.violations.push_back({InvarianceViolation::Kind::ImageLeavesBox, id, c, image.upper()});
                    continue;
                }
                const Box cell = grid.cell_box(c);
                std::vector<Vector> samples;
                samples.reserve(fixed + extra);
                for (std::size_t k = 0; k < corners; ++k) {
                    Vector x(n);
                    for (Eigen::Index i = 0; i < n; ++i) x[i] = (k >> i) & 1u ? cell.upper()[i] : cell.lower()[i];
                    samples.push_back(x);
                }
                samples.push_back(cell.center());
                if (extra) {
                    std::mt19937_64 rng(seed ^ (0x9E3779B97F4A7C15ull * (c + 1)) ^ static_cast<std::uint64_t>(id));
                    std::uniform_real_distribution<double> u(0.0, 1.0);
                    for (std::size_t s = 0; s < extra; ++s) {
                        Vector x(n);
                        for (Eigen::Index i = 0; i < n; ++i) x[i] = cell.lower()[i] + u(rng) * (cell.upper()[i] - cell.lower()[i]);
                        samples.push_back(x);
                    }
                }
                for (const auto& x : samples) {
                    const Vector y = f.post(x);
                    if (!cs.v_prime.contains_point(y)) {
                        r.violations.push_back({InvarianceViolation::Kind::SampleOutsideSubspace, id, c, y});
                    }
                }
                if (r.violations.empty()) {
                    CellCoord first, last;
                    r.grazing = grid.touching_range(image.lower(), image.upper(), first, last) &&
                                outside.any_in(first, last);
                }
            }
        });
        report.cells_checked += cells.size();
        for (auto& r : results) {
            report.violation_count += r.violations.size();
            for (auto& v : r.violations) {
                if (report.violations.size() < InvarianceReport::kMaxListed) report.violations.push_back(std::move(v));
            }
            if (r.grazing) ++report.boundary_grazing;
        }
    }
    return report;
}

int online_select_mode(const Vector& x, const ControllableSubspace& cs, const SwitchedSystem& sys) {
    for (std::size_t i = 0; i < cs.mode_ids.size(); ++i) {
        const int id = cs.mode_ids[i];
        if (!cs.control[i].contains_point(x)) continue;
        if (cs.v_prime.contains_point(sys.flow(id).post(x))) return id;
    }
    throw NoSafeMode("no mode keeps the state in the controllable subspace");
}

std::vector<Zone> connected_zones(const GriddySet& set) {
    const auto& grid = *set.grid();
    const auto n = static_cast<std::size_t>(grid.dimension());
    std::vector<Zone> zones;
    std::vector<bool> seen(grid.size(), false);

    set.for_each([&](CellIndex start) {
        if (seen[start]) return;
        seen[start] = true;
        Vector lo = grid.cell_box(start).lower();
        Vector hi = grid.cell_box(start).upper();
        std::size_t count = 0;
        std::deque<CellIndex> queue{start};
        while (!queue.empty()) {
            const auto c = queue.front();
            queue.pop_front();
            ++count;
            const Box b = grid.cell_box(c);
            lo = lo.cwiseMin(b.lower());
            hi = hi.cwiseMax(b.upper());
            const auto k = grid.coord(c);
            CellCoord first(n), last(n);
            for (std::size_t i = 0; i < n; ++i) {
                first[i] = std::max<std::int64_t>(0, k[i] - 1);
                last[i] = std::min<std::int64_t>(grid.counts()[i] - 1, k[i] + 1);
            }
            CellCoord nb = first;
            do {
                const auto idx = grid.index(nb);
                if (!seen[idx] && set.contains(idx)) {
                    seen[idx] = true;
                    queue.push_back(idx);
                }
            } while (advance_coord(nb, first, last));
        }
        zones.push_back({Box(lo, hi), count});
    });
    std::sort(zones.begin(), zones.end(), [](const Zone& a, const Zone& b) {
        return std::lexicographical_compare(a.bounds.lower().begin(), a.bounds.lower().end(),
                                            b.bounds.lower().begin(), b.bounds.lower().end());
    });
    return zones;
}

}  // namespace swsynth
