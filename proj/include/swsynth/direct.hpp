#pragma once

#include "swsynth/griddy.hpp"

#include <cstdint>
#include <functional>
#include <stdexcept>
#include <string>
#include <vector>

namespace swsynth {

/// Tight axis-aligned bounding box of f(cell): centre E*c + d, half-widths |E|*h.
Box cell_image_box(const FlowMap& f, const CellGrid& grid, CellIndex cell);

/// Cells whose image bounding box meets S (closed cells, touching counts).
/// Contains every cell holding a point that f maps into S.
GriddySet pre_over(const FlowMap& f, const GriddySet& s);

/// Cells whose image bounding box is not inside V.
GriddySet escaping_cells(const FlowMap& f, const GridHandle& grid);

/// Output of the controllable-subspace fixpoint.
struct ControllableSubspace {
    std::vector<int> mode_ids;
    std::vector<GriddySet> control;  // parallel to mode_ids
    GriddySet v_prime;               // union of control
    std::size_t iterations = 0;
    bool converged = false;

    const GridHandle& grid() const { return v_prime.grid(); }
    /// V minus V'.
    GriddySet uncontrollable() const { return v_prime.complement(); }
    const GriddySet& control_of(int mode_id) const;
};

/// Snapshot handed to the per-iteration observer.
struct FixpointStep {
    std::size_t iteration;
    const std::vector<GriddySet>& control;
    const GriddySet& uncontrol;  // inside V; the exterior of V is implicit
};

struct FixpointOptions {
    /// 0 means the termination bound, cell count + 1.
    std::size_t max_iterations = 0;
    std::function<void(const FixpointStep&)> observer;
};

/// Controllable-subspace fixpoint on cells:
///
///   Uncontrol := R^n \ V;  Control_i := V
///   repeat
///     Control_i := Control_i \ Pre_i(Uncontrol)
///     Uncontrol_new := (R^n \ V) u (V \ u_i Control_i)
///   until Uncontrol_new = Uncontrol
///
/// Pre_i is replaced by pre_over plus escaping_cells, so each Control_i
/// under-approximates the exact controllable set of its mode.
ControllableSubspace algorithm1(const SwitchedSystem& sys, const GridHandle& grid,
                                const FixpointOptions& options = {});

struct InvarianceViolation {
    enum class Kind { ImageLeavesBox, SampleOutsideSubspace };
    Kind kind;
    int mode_id;
    CellIndex cell;
    Vector point;  // offending sample image, or the image box corner that left V
};

struct InvarianceReport {
    std::size_t cells_checked = 0;
    std::size_t violation_count = 0;
    std::vector<InvarianceViolation> violations;  // first kMaxListed
    /// Cells whose image box reaches outside V' although every sample stays in it.
    std::size_t boundary_grazing = 0;

    static constexpr std::size_t kMaxListed = 1000;
    bool ok() const { return violation_count == 0; }
};

/// Checks each cell of each Control_i: its image box must lie in V, and the
/// images of the cell corners, the centre, and (samples_per_cell - 2^n - 1)
/// seeded random interior points must lie in V'.
InvarianceReport verify_invariance(const SwitchedSystem& sys, const ControllableSubspace& cs,
                                   std::size_t samples_per_cell = 0, std::uint64_t seed = 0);

class NoSafeMode : public std::runtime_error {
public:
    explicit NoSafeMode(const std::string& what) : std::runtime_error(what) {}
};

/// Smallest mode id i with x in Control_i and post_i(x) in V'. Throws NoSafeMode.
int online_select_mode(const Vector& x, const ControllableSubspace& cs, const SwitchedSystem& sys);

/// Connected piece of V \ V' (cells sharing at least a corner are connected).
struct Zone {
    Box bounds;
    std::size_t cells = 0;
};

/// Components sorted by lower corner.
std::vector<Zone> connected_zones(const GriddySet& set);

/// Textual export: header, then per-mode run-length encoded cell lists.
std::string format_subspace(const ControllableSubspace& cs);
ControllableSubspace parse_subspace(const std::string& text);

/// SVG of the per-mode regions and the uncontrollable zones; n = 2 draws
/// the plane, larger n draws every coordinate-pair projection.
std::string render_regions_svg(const ControllableSubspace& cs, const std::vector<Vector>& trajectory = {});

}  // namespace swsynth
