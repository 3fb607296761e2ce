#pragma once

#include "swsynth/model.hpp"

#include <cstdint>
#include <functional>
#include <memory>
#include <variant>
#include <vector>

namespace swsynth {

using CellIndex = std::uint64_t;
using CellCoord = std::vector<std::int64_t>;

/// Regular partition of a box V into closed cells
///   [origin + k*delta, origin + (k+1)*delta],  0 <= k_i < counts_i,
/// with origin = V.lower(). Cells are numbered row-major, last axis fastest.
class CellGrid {
public:
    /// Default above which sets on this grid are stored sparsely.
    static constexpr CellIndex kDefaultSparseThreshold = CellIndex{1} << 28;

    CellGrid(Box v, std::vector<std::int64_t> counts, CellIndex sparse_threshold = kDefaultSparseThreshold);

    /// Snaps the requested cell size so every edge of V is a whole number of
    /// cells (count_i = max(1, round(edge_i / delta_i))).
    static CellGrid from_cell_size(const Box& v, const Vector& delta,
                                   CellIndex sparse_threshold = kDefaultSparseThreshold);

    const Box& box() const { return box_; }
    const Vector& delta() const { return delta_; }
    const Vector& origin() const { return box_.lower(); }
    const std::vector<std::int64_t>& counts() const { return counts_; }
    Eigen::Index dimension() const { return box_.dimension(); }
    CellIndex size() const { return total_; }
    bool sparse() const { return total_ > sparse_threshold_; }

    CellIndex index(const CellCoord& k) const;
    CellCoord coord(CellIndex idx) const;
    Box cell_box(CellIndex idx) const;
    Vector cell_center(CellIndex idx) const;
    const std::vector<CellIndex>& strides() const { return strides_; }

    /// Inclusive per-axis range of closed cells meeting the closed box b,
    /// clipped to the grid. Returns false when b misses the grid entirely.
    bool touching_range(const Vector& lo, const Vector& hi, CellCoord& first, CellCoord& last) const;

    friend bool operator==(const CellGrid& a, const CellGrid& b) {
        return a.box_ == b.box_ && a.counts_ == b.counts_;
    }

private:
    Box box_;
    std::vector<std::int64_t> counts_;
    Vector delta_;
    std::vector<CellIndex> strides_;
    CellIndex total_;
    CellIndex sparse_threshold_;
};

using GridHandle = std::shared_ptr<const CellGrid>;

/// Odometer step over the inclusive coordinate box [first, last], last axis
/// fastest. Returns false after the final coordinate.
inline bool advance_coord(CellCoord& k, const CellCoord& first, const CellCoord& last) {
    for (std::size_t axis = k.size(); axis-- > 0;) {
        if (++k[axis] <= last[axis]) return true;
        k[axis] = first[axis];
    }
    return false;
}

inline GridHandle make_grid(CellGrid g) { return std::make_shared<const CellGrid>(std::move(g)); }

class GridMismatch : public std::invalid_argument {
public:
    GridMismatch() : std::invalid_argument("griddy sets live on different grids") {}
};

/// Finite union of closed cells of one CellGrid. Stored as a dense bitset, or
/// as a sorted index list when the grid is above its sparse threshold; the
/// interface is the same for both.
class GriddySet {
public:
    static GriddySet empty(GridHandle grid);
    static GriddySet full(GridHandle grid);
    /// Indices need not be sorted or unique.
    static GriddySet from_indices(GridHandle grid, std::vector<CellIndex> indices);
    /// Cells for which keep(idx) holds, evaluated in parallel.
    static GriddySet from_predicate(GridHandle grid, const std::function<bool(CellIndex)>& keep);

    const GridHandle& grid() const { return grid_; }
    bool contains(CellIndex idx) const;
    CellIndex count() const;
    bool is_empty() const { return count() == 0; }

    /// Closed membership of a point: true when x lies in some member cell
    /// (faces shared with a member count).
    bool contains_point(const Vector& x) const;

    /// Visits member cells in increasing index order.
    void for_each(const std::function<void(CellIndex)>& fn) const;
    std::vector<CellIndex> indices() const;

    GriddySet unite(const GriddySet& other) const;
    GriddySet minus(const GriddySet& other) const;
    GriddySet intersect(const GriddySet& other) const;
    GriddySet complement() const;
    bool subset_of(const GriddySet& other) const;

    friend bool operator==(const GriddySet& a, const GriddySet& b);

private:
    struct Dense {
        std::vector<std::uint64_t> words;
    };
    struct Sparse {
        std::vector<CellIndex> cells;  // sorted, unique
    };

    GriddySet(GridHandle grid, std::variant<Dense, Sparse> storage)
        : grid_(std::move(grid)), storage_(std::move(storage)) {}
    void require_same_grid(const GriddySet& other) const;

    GridHandle grid_;
    std::variant<Dense, Sparse> storage_;
};

inline GriddySet set_union(const GriddySet& s, const GriddySet& t) { return s.unite(t); }
inline GriddySet set_difference(const GriddySet& s, const GriddySet& t) { return s.minus(t); }
inline bool set_equals(const GriddySet& s, const GriddySet& t) { return s == t; }

/// Cells whose interior meets b; along an axis where b is flat, cells whose
/// closed extent contains it. b = V gives every cell, a corner point gives
/// the 2^n incident cells. Throws when b is not inside V.
GriddySet griddy_from_box(const Box& b, GridHandle grid);
/// Same, for possibly degenerate bounds (lower <= upper), e.g. a single point.
GriddySet griddy_from_box(const Vector& lower, const Vector& upper, GridHandle grid);

/// Answers "does S have a member in this index range" in O(2^n) through a
/// summed-area table (dense) or by scanning the members (sparse).
class CellRangeIndex {
public:
    explicit CellRangeIndex(const GriddySet& set);
    bool any_in(const CellCoord& first, const CellCoord& last) const;

private:
    GridHandle grid_;
    std::vector<std::int64_t> padded_counts_;
    std::vector<std::uint64_t> padded_strides_;
    std::vector<std::uint32_t> prefix_;
    std::vector<CellIndex> members_;
};

}  // namespace swsynth
