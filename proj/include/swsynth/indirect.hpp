#pragma once

#include "swsynth/model.hpp"

#include <compare>
#include <cstdint>
#include <optional>
#include <string>
#include <vector>

namespace swsynth {

/// Uniform inf-norm lattice {x : x_i = 2 eta k_i}. Every point of R^n lies
/// within eta of its nearest lattice point.
class Grid {
public:
    Grid(double eta, Eigen::Index dimension);

    double eta() const { return eta_; }
    double step() const { return 2.0 * eta_; }
    Eigen::Index dimension() const { return n_; }

private:
    double eta_;
    Eigen::Index n_;
};

struct GridPoint {
    std::vector<std::int64_t> k;

    auto operator<=>(const GridPoint&) const = default;
};

/// Represented state 2 eta k.
Vector grid_state(const GridPoint& q, const Grid& g);

/// k_i = round(x_i / (2 eta)), exact halves rounded toward +infinity.
GridPoint nearest_grid_point(const Vector& x, const Grid& g);

/// Outcome of the linear-case bisimulation test.
struct BisimCertificate {
    double beta = 0.0;     // max_p ||e^{A_p tau}||_inf
    double eta = 0.0;
    double epsilon = 0.0;  // eta / (1 - beta); only meaningful when certified()

    bool certified() const { return beta < 1.0; }
};

/// beta = max over modes of the induced inf-norm of the flow matrix. When
/// beta < 1 the smallest precision satisfying beta*eps + eta <= eps is
/// eta / (1 - beta); otherwise the result is marked uncertified and epsilon
/// is +infinity.
BisimCertificate certificate(const SwitchedSystem& sys, double eta);

class EmptyGridError : public std::runtime_error {
public:
    using std::runtime_error::runtime_error;
};

/// Deterministic mode-labelled graph on the lattice points inside V.
/// successor(node, mode_index) is a node index, or kExit when the rounded
/// successor falls outside V.
class AbstractGraph {
public:
    static constexpr std::int64_t kExit = -1;

    AbstractGraph(Grid grid, Box box, std::vector<int> mode_ids, std::vector<GridPoint> nodes,
                  std::vector<std::int64_t> successors);

    const Grid& grid() const { return grid_; }
    const Box& box() const { return box_; }
    const std::vector<int>& mode_ids() const { return mode_ids_; }
    const std::vector<GridPoint>& nodes() const { return nodes_; }
    std::size_t node_count() const { return nodes_.size(); }
    std::size_t mode_count() const { return mode_ids_.size(); }

    std::int64_t successor(std::size_t node, std::size_t mode_index) const {
        return successors_[node * mode_ids_.size() + mode_index];
    }
    bool exits(std::size_t node, std::size_t mode_index) const {
        return successor(node, mode_index) == kExit;
    }
    /// Node index of a lattice point, if it is a node.
    std::optional<std::size_t> find(const GridPoint& q) const;

private:
    Grid grid_;
    Box box_;
    std::vector<int> mode_ids_;
    std::vector<GridPoint> nodes_;  // sorted
    std::vector<std::int64_t> successors_;
};

/// Lattice points in the closed box V, each mode's flow applied to the
/// represented state and rounded back onto the lattice. Successor
/// computation runs in parallel; the result does not depend on thread count.
AbstractGraph build_abstract_graph(const SwitchedSystem& sys, const Box& v, const Grid& g);

struct SafetyResult {
    std::vector<bool> winning;                // per node
    std::vector<std::vector<int>> safe_modes;  // per node, mode ids; empty outside W

    std::size_t winning_count() const;
};

/// Greatest fixpoint of W -> {q : exists p, succ_p(q) in W}.
SafetyResult safety_synthesis(const AbstractGraph& graph);

struct SwitchingPattern {
    std::vector<int> modes;

    auto operator<=>(const SwitchingPattern&) const = default;
};

/// Mode at sampling step k: modes[k mod len].
inline int pattern_mode(const SwitchingPattern& p, std::size_t step) {
    return p.modes[step % p.modes.size()];
}

/// Smallest rotation of the sequence in lexicographic order.
SwitchingPattern canonical_rotation(const SwitchingPattern& p);

/// Elementary cycles of length <= max_len inside W, following only safe
/// modes, as their mode-label sequences. Rotations are merged (each pattern is
/// reported in canonical rotation); output is sorted by length, then
/// lexicographically.
std::vector<SwitchingPattern> find_patterns(const AbstractGraph& graph, const SafetyResult& safety,
                                            std::size_t max_len);

/// "12121212122" (one digit per mode) or separated tokens: "1 2 1", "2.1.1.1", "1,2".
SwitchingPattern parse_pattern(const std::string& text);
/// Digits run together when all ids are single-digit, space separated otherwise.
std::string format_pattern(const SwitchingPattern& p);

// Exports.
std::string format_graph(const AbstractGraph& graph);
std::string format_graph_dot(const AbstractGraph& graph, const SafetyResult* safety = nullptr);
std::string format_patterns(const std::vector<SwitchingPattern>& patterns);
std::string format_certificate(const BisimCertificate& cert);

}  // namespace swsynth
