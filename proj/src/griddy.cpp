#include "swsynth/griddy.hpp"

#include <algorithm>
#include <bit>
#include <cmath>
#include <limits>
#include <string>

namespace swsynth {

CellGrid::CellGrid(Box v, std::vector<std::int64_t> counts, CellIndex sparse_threshold)
    : box_(std::move(v)), counts_(std::move(counts)), total_(1), sparse_threshold_(sparse_threshold) {
    const auto n = box_.dimension();
    if (static_cast<Eigen::Index>(counts_.size()) != n) throw std::invalid_argument("CellGrid: one count per dimension required");
    delta_.resize(n);
    strides_.assign(static_cast<std::size_t>(n), 1);
    for (Eigen::Index i = 0; i < n; ++i) {
        const auto c = counts_[static_cast<std::size_t>(i)];
        if (c < 1) throw std::invalid_argument("CellGrid: cell counts must be positive");
        if (total_ > std::numeric_limits<CellIndex>::max() / static_cast<CellIndex>(c)) {
            throw std::invalid_argument("CellGrid: too many cells");
        }
        total_ *= static_cast<CellIndex>(c);
        delta_[i] = (box_.upper()[i] - box_.lower()[i]) / static_cast<double>(c);
    }
    for (std::size_t i = counts_.size(); i-- > 1;) strides_[i - 1] = strides_[i] * static_cast<CellIndex>(counts_[i]);
}

CellGrid CellGrid::from_cell_size(const Box& v, const Vector& delta, CellIndex sparse_threshold) {
    if (delta.size() != v.dimension()) throw std::invalid_argument("CellGrid: delta dimension mismatch");
    std::vector<std::int64_t> counts;
    for (Eigen::Index i = 0; i < delta.size(); ++i) {
        if (!(delta[i] > 0.0) || !std::isfinite(delta[i])) throw std::invalid_argument("CellGrid: delta must be positive");
        const double ratio = (v.upper()[i] - v.lower()[i]) / delta[i];
        if (ratio > 1e12) throw std::invalid_argument("CellGrid: delta too small");
        counts.push_back(std::max<std::int64_t>(1, std::llround(ratio)));
    }
    return CellGrid(v, std::move(counts), sparse_threshold);
}

CellIndex CellGrid::index(const CellCoord& k) const {
    CellIndex idx = 0;
    for (std::size_t i = 0; i < k.size(); ++i) {
        if (k[i] < 0 || k[i] >= counts_[i]) throw std::out_of_range("CellGrid: coordinate outside the grid");
        idx += static_cast<CellIndex>(k[i]) * strides_[i];
    }
    return idx;
}

CellCoord CellGrid::coord(CellIndex idx) const {
    CellCoord k(counts_.size());
    for (std::size_t i = 0; i < counts_.size(); ++i) {
        k[i] = static_cast<std::int64_t>(idx / strides_[i]);
        idx %= strides_[i];
    }
    return k;
}

Box CellGrid::cell_box(CellIndex idx) const {
    const auto k = coord(idx);
    Vector lo(dimension()), hi(dimension());
    for (Eigen::Index i = 0; i < dimension(); ++i) {
        const auto ki = static_cast<double>(k[static_cast<std::size_t>(i)]);
        lo[i] = origin()[i] + ki * delta_[i];
        hi[i] = origin()[i] + (ki + 1.0) * delta_[i];
    }
    return Box(lo, hi);
}

Vector CellGrid::cell_center(CellIndex idx) const {
    const auto k = coord(idx);
    Vector x(dimension());
    for (Eigen::Index i = 0; i < dimension(); ++i) {
        x[i] = origin()[i] + (static_cast<double>(k[static_cast<std::size_t>(i)]) + 0.5) * delta_[i];
    }
    return x;
}

bool CellGrid::touching_range(const Vector& lo, const Vector& hi, CellCoord& first, CellCoord& last) const {
    const auto n = dimension();
    first.resize(static_cast<std::size_t>(n));
    last.resize(static_cast<std::size_t>(n));
    constexpr double slack = NumericPolicy::cell_face_slack;
    for (Eigen::Index i = 0; i < n; ++i) {
        // Cell k meets [lo, hi] iff origin + k*d <= hi and origin + (k+1)*d >= lo.
        const double a = (lo[i] - origin()[i]) / delta_[i];
        const double b = (hi[i] - origin()[i]) / delta_[i];
        const double count = static_cast<double>(counts_[static_cast<std::size_t>(i)]);
        if (!(a - slack <= count) || !(b + slack >= 0.0)) return false;
        const double f = std::max(0.0, std::ceil(a - 1.0 - slack));
        const double l = std::min(count - 1.0, std::floor(b + slack));
        if (f > l) return false;
        first[static_cast<std::size_t>(i)] = static_cast<std::int64_t>(f);
        last[static_cast<std::size_t>(i)] = static_cast<std::int64_t>(l);
    }
    return true;
}

namespace {

constexpr CellIndex word_count(CellIndex cells) { return (cells + 63) / 64; }

void trim_tail(std::vector<std::uint64_t>& words, CellIndex cells) {
    const auto tail = cells % 64;
    if (tail != 0 && !words.empty()) words.back() &= (std::uint64_t{1} << tail) - 1;
}

}  // namespace

GriddySet GriddySet::empty(GridHandle grid) {
    if (grid->sparse()) return GriddySet(std::move(grid), Sparse{});
    const auto words = word_count(grid->size());
    return GriddySet(std::move(grid), Dense{std::vector<std::uint64_t>(words, 0)});
}

GriddySet GriddySet::full(GridHandle grid) {
    if (grid->sparse()) {
        std::vector<CellIndex> all(grid->size());
        for (CellIndex i = 0; i < all.size(); ++i) all[i] = i;
        return GriddySet(std::move(grid), Sparse{std::move(all)});
    }
    std::vector<std::uint64_t> words(word_count(grid->size()), ~std::uint64_t{0});
    trim_tail(words, grid->size());
    return GriddySet(std::move(grid), Dense{std::move(words)});
}

GriddySet GriddySet::from_indices(GridHandle grid, std::vector<CellIndex> indices) {
    for (auto i : indices) {
        if (i >= grid->size()) throw std::out_of_range("GriddySet: cell index " + std::to_string(i) + " outside the grid");
    }
    if (grid->sparse()) {
        std::sort(indices.begin(), indices.end());
        indices.erase(std::unique(indices.begin(), indices.end()), indices.end());
        return GriddySet(std::move(grid), Sparse{std::move(indices)});
    }
    std::vector<std::uint64_t> words(word_count(grid->size()), 0);
    for (auto i : indices) words[i / 64] |= std::uint64_t{1} << (i % 64);
    return GriddySet(std::move(grid), Dense{std::move(words)});
}

GriddySet GriddySet::from_predicate(GridHandle grid, const std::function<bool(CellIndex)>& keep) {
    const CellIndex total = grid->size();
    const CellIndex words = word_count(total);
    if (!grid->sparse()) {
        std::vector<std::uint64_t> bits(words, 0);
        parallel_for(words, [&](std::size_t begin, std::size_t end) {
            for (std::size_t w = begin; w < end; ++w) {
                std::uint64_t word = 0;
                const CellIndex base = static_cast<CellIndex>(w) * 64;
                const CellIndex stop = std::min<CellIndex>(64, total - base);
                for (CellIndex b = 0; b < stop; ++b) {
                    if (keep(base + b)) word |= std::uint64_t{1} << b;
                }
                bits[w] = word;
            }
        });
        return GriddySet(std::move(grid), Dense{std::move(bits)});
    }
    // Per-word buckets merged in order keep the result independent of threading.
    std::vector<std::vector<CellIndex>> buckets(words);
    parallel_for(words, [&](std::size_t begin, std::size_t end) {
        for (std::size_t w = begin; w < end; ++w) {
            const CellIndex base = static_cast<CellIndex>(w) * 64;
            const CellIndex stop = std::min<CellIndex>(64, total - base);
            for (CellIndex b = 0; b < stop; ++b) {
                if (keep(base + b)) buckets[w].push_back(base + b);
            }
        }
    });
    std::vector<CellIndex> cells;
    for (auto& b : buckets) cells.insert(cells.end(), b.begin(), b.end());
    return GriddySet(std::move(grid), Sparse{std::move(cells)});
}

bool GriddySet::contains(CellIndex idx) const {
    if (idx >= grid_->size()) return false;
    if (const auto* d = std::get_if<Dense>(&storage_)) return (d->words[idx / 64] >> (idx % 64)) & 1u;
    const auto& cells = std::get<Sparse>(storage_).cells;
    return std::binary_search(cells.begin(), cells.end(), idx);
}

CellIndex GriddySet::count() const {
    if (const auto* d = std::get_if<Dense>(&storage_)) {
        CellIndex total = 0;
        for (auto w : d->words) total += static_cast<CellIndex>(std::popcount(w));
        return total;
    }
    return std::get<Sparse>(storage_).cells.size();
}

bool GriddySet::contains_point(const Vector& x) const {
    CellCoord first, last;
    if (!grid_->touching_range(x, x, first, last)) return false;
    CellCoord k = first;
    do {
        if (contains(grid_->index(k))) return true;
    } while (advance_coord(k, first, last));
    return false;
}

void GriddySet::for_each(const std::function<void(CellIndex)>& fn) const {
    if (const auto* d = std::get_if<Dense>(&storage_)) {
        for (std::size_t w = 0; w < d->words.size(); ++w) {
            auto word = d->words[w];
            while (word) {
                const int bit = std::countr_zero(word);
                fn(static_cast<CellIndex>(w) * 64 + static_cast<CellIndex>(bit));
                word &= word - 1;
            }
        }
        return;
    }
    for (auto c : std::get<Sparse>(storage_).cells) fn(c);
}

std::vector<CellIndex> GriddySet::indices() const {
    if (const auto* s = std::get_if<Sparse>(&storage_)) return s->cells;
    std::vector<CellIndex> out;
    out.reserve(count());
    for_each([&](CellIndex c) { out.push_back(c); });
    return out;
}

void GriddySet::require_same_grid(const GriddySet& other) const {
    if (grid_ != other.grid_ && !(*grid_ == *other.grid_)) throw GridMismatch();
}

GriddySet GriddySet::unite(const GriddySet& other) const {
    require_same_grid(other);
    if (const auto* d = std::get_if<Dense>(&storage_)) {
        const auto& e = std::get<Dense>(other.storage_);
        std::vector<std::uint64_t> out(d->words.size());
        for (std::size_t i = 0; i < out.size(); ++i) out[i] = d->words[i] | e.words[i];
        return GriddySet(grid_, Dense{std::move(out)});
    }
    const auto& a = std::get<Sparse>(storage_).cells;
    const auto& b = std::get<Sparse>(other.storage_).cells;
    std::vector<CellIndex> out;
    std::set_union(a.begin(), a.end(), b.begin(), b.end(), std::back_inserter(out));
    return GriddySet(grid_, Sparse{std::move(out)});
}

GriddySet GriddySet::minus(const GriddySet& other) const {
    require_same_grid(other);
    if (const auto* d = std::get_if<Dense>(&storage_)) {
        const auto& e = std::get<Dense>(other.storage_);
        std::vector<std::uint64_t> out(d->words.size());
        for (std::size_t i = 0; i < out.size(); ++i) out[i] = d->words[i] & ~e.words[i];
        return GriddySet(grid_, Dense{std::move(out)});
    }
    const auto& a = std::get<Sparse>(storage_).cells;
    const auto& b = std::get<Sparse>(other.storage_).cells;
    std::vector<CellIndex> out;
    std::set_difference(a.begin(), a.end(), b.begin(), b.end(), std::back_inserter(out));
    return GriddySet(grid_, Sparse{std::move(out)});
}

GriddySet GriddySet::intersect(const GriddySet& other) const {
    require_same_grid(other);
    if (const auto* d = std::get_if<Dense>(&storage_)) {
        const auto& e = std::get<Dense>(other.storage_);
        std::vector<std::uint64_t> out(d->words.size());
        for (std::size_t i = 0; i < out.size(); ++i) out[i] = d->words[i] & e.words[i];
        return GriddySet(grid_, Dense{std::move(out)});
    }
    const auto& a = std::get<Sparse>(storage_).cells;
    const auto& b = std::get<Sparse>(other.storage_).cells;
    std::vector<CellIndex> out;
    std::set_intersection(a.begin(), a.end(), b.begin(), b.end(), std::back_inserter(out));
    return GriddySet(grid_, Sparse{std::move(out)});
}

GriddySet GriddySet::complement() const { return full(grid_).minus(*this); }

bool GriddySet::subset_of(const GriddySet& other) const { return minus(other).is_empty(); }

bool operator==(const GriddySet& a, const GriddySet& b) {
    a.require_same_grid(b);
    if (const auto* d = std::get_if<GriddySet::Dense>(&a.storage_)) {
        return d->words == std::get<GriddySet::Dense>(b.storage_).words;
    }
    return std::get<GriddySet::Sparse>(a.storage_).cells == std::get<GriddySet::Sparse>(b.storage_).cells;
}

GriddySet griddy_from_box(const Box& b, GridHandle grid) {
    return griddy_from_box(b.lower(), b.upper(), std::move(grid));
}

GriddySet griddy_from_box(const Vector& lower, const Vector& upper, GridHandle grid) {
    const auto& v = grid->box();
    if (lower.size() != v.dimension() || upper.size() != v.dimension()) {
        throw std::invalid_argument("griddy_from_box: dimension mismatch");
    }
    if ((lower.array() > upper.array()).any()) throw std::invalid_argument("griddy_from_box: lower exceeds upper");
    if (!v.contains(lower) || !v.contains(upper)) throw std::invalid_argument("griddy_from_box: box is not inside V");
    const auto n = v.dimension();
    CellCoord first(static_cast<std::size_t>(n)), last(static_cast<std::size_t>(n));
    constexpr double slack = NumericPolicy::cell_face_slack;
    for (Eigen::Index i = 0; i < n; ++i) {
        const double a = (lower[i] - v.lower()[i]) / grid->delta()[i];
        const double c = (upper[i] - v.lower()[i]) / grid->delta()[i];
        double f, l;
        if (c - a > slack) {
            f = std::floor(a + slack);
            l = std::ceil(c - slack) - 1.0;
        } else {
            f = std::ceil(a - 1.0 - slack);
            l = std::floor(c + slack);
        }
        const double top = static_cast<double>(grid->counts()[static_cast<std::size_t>(i)] - 1);
        first[static_cast<std::size_t>(i)] = static_cast<std::int64_t>(std::clamp(f, 0.0, top));
        last[static_cast<std::size_t>(i)] = static_cast<std::int64_t>(std::clamp(l, 0.0, top));
    }
    std::vector<CellIndex> cells;
    CellCoord k = first;
    do {
        cells.push_back(grid->index(k));
    } while (advance_coord(k, first, last));
    return GriddySet::from_indices(std::move(grid), std::move(cells));
}

CellRangeIndex::CellRangeIndex(const GriddySet& set) : grid_(set.grid()) {
    if (grid_->sparse()) {
        members_ = set.indices();
        return;
    }
    const auto& counts = grid_->counts();
    const std::size_t n = counts.size();
    padded_counts_.resize(n);
    padded_strides_.assign(n, 1);
    std::uint64_t total = 1;
    for (std::size_t i = 0; i < n; ++i) {
        padded_counts_[i] = counts[i] + 1;
        total *= static_cast<std::uint64_t>(padded_counts_[i]);
    }
    for (std::size_t i = n; i-- > 1;) padded_strides_[i - 1] = padded_strides_[i] * static_cast<std::uint64_t>(padded_counts_[i]);

    // prefix_[k + 1] counts members with coordinates <= k on every axis.
    prefix_.assign(total, 0);
    set.for_each([&](CellIndex idx) {
        const auto k = grid_->coord(idx);
        std::uint64_t p = 0;
        for (std::size_t i = 0; i < n; ++i) p += static_cast<std::uint64_t>(k[i] + 1) * padded_strides_[i];
        prefix_[p] = 1;
    });
    for (std::size_t axis = 0; axis < n; ++axis) {
        const auto stride = padded_strides_[axis];
        for (std::uint64_t p = 0; p < total; ++p) {
            const auto along = (p / stride) % static_cast<std::uint64_t>(padded_counts_[axis]);
            if (along > 0) prefix_[p] += prefix_[p - stride];
        }
    }
}

bool CellRangeIndex::any_in(const CellCoord& first, const CellCoord& last) const {
    const std::size_t n = first.size();
    if (!grid_->sparse()) {
        std::int64_t sum = 0;
        for (std::uint32_t corner = 0; corner < (1u << n); ++corner) {
            std::uint64_t p = 0;
            int sign = 1;
            for (std::size_t i = 0; i < n; ++i) {
                if (corner & (1u << i)) {
                    p += static_cast<std::uint64_t>(first[i]) * padded_strides_[i];
                    sign = -sign;
                } else {
                    p += static_cast<std::uint64_t>(last[i] + 1) * padded_strides_[i];
                }
            }
            sum += sign * static_cast<std::int64_t>(prefix_[p]);
        }
        return sum > 0;
    }
    for (auto idx : members_) {
        const auto k = grid_->coord(idx);
        bool inside = true;
        for (std::size_t i = 0; i < n && inside; ++i) inside = k[i] >= first[i] && k[i] <= last[i];
        if (inside) return true;
    }
    return false;
}

}  // namespace swsynth
