#include "swsynth/indirect.hpp"

#include <algorithm>
#include <cmath>
#include <deque>
#include <limits>
#include <set>

namespace swsynth {

namespace {

// Lattice points are compared against the box with a slack of a tiny fraction
// of the lattice step, so that 2*eta*k landing one ulp past a face counts as on it.
bool lattice_in_box(const Vector& x, const Box& v, double step) {
    const double slack = NumericPolicy::cell_face_slack * step;
    return (x.array() >= v.lower().array() - slack).all() && (x.array() <= v.upper().array() + slack).all();
}

// Odometer over the integer box [lo, hi], last axis fastest.
bool advance(std::vector<std::int64_t>& k, const std::vector<std::int64_t>& lo,
             const std::vector<std::int64_t>& hi) {
    for (std::size_t axis = k.size(); axis-- > 0;) {
        if (++k[axis] <= hi[axis]) return true;
        k[axis] = lo[axis];
    }
    return false;
}

}  // namespace

Grid::Grid(double eta, Eigen::Index dimension) : eta_(eta), n_(dimension) {
    if (!(eta > 0.0) || !std::isfinite(eta)) throw std::invalid_argument("Grid: eta must be positive");
    if (dimension < 1) throw std::invalid_argument("Grid: dimension must be positive");
}

Vector grid_state(const GridPoint& q, const Grid& g) {
    Vector x(static_cast<Eigen::Index>(q.k.size()));
    for (std::size_t i = 0; i < q.k.size(); ++i) x[static_cast<Eigen::Index>(i)] = g.step() * static_cast<double>(q.k[i]);
    return x;
}

GridPoint nearest_grid_point(const Vector& x, const Grid& g) {
    if (x.size() != g.dimension()) throw std::invalid_argument("nearest_grid_point: dimension mismatch");
    if (!x.allFinite()) throw NumericError("nearest_grid_point: non-finite state");
    GridPoint q;
    q.k.resize(static_cast<std::size_t>(x.size()));
    for (Eigen::Index i = 0; i < x.size(); ++i) {
        q.k[static_cast<std::size_t>(i)] = static_cast<std::int64_t>(std::floor(x[i] / g.step() + 0.5));
    }
    return q;
}

BisimCertificate certificate(const SwitchedSystem& sys, double eta) {
    if (!(eta > 0.0)) throw std::invalid_argument("certificate: eta must be positive");
    BisimCertificate cert;
    cert.eta = eta;
    for (const auto& f : sys.flows()) cert.beta = std::max(cert.beta, induced_inf_norm(f.e()));
    cert.epsilon = cert.certified() ? eta / (1.0 - cert.beta) : std::numeric_limits<double>::infinity();
    return cert;
}

AbstractGraph::AbstractGraph(Grid grid, Box box, std::vector<int> mode_ids, std::vector<GridPoint> nodes,
                             std::vector<std::int64_t> successors)
    : grid_(grid),
      box_(std::move(box)),
      mode_ids_(std::move(mode_ids)),
      nodes_(std::move(nodes)),
      successors_(std::move(successors)) {
    if (successors_.size() != nodes_.size() * mode_ids_.size()) {
        throw std::invalid_argument("AbstractGraph: successor table size mismatch");
    }
    if (!std::is_sorted(nodes_.begin(), nodes_.end())) throw std::invalid_argument("AbstractGraph: nodes must be sorted");
    for (auto s : successors_) {
        if (s != kExit && (s < 0 || static_cast<std::size_t>(s) >= nodes_.size())) {
            throw std::invalid_argument("AbstractGraph: successor out of range");
        }
    }
}

std::optional<std::size_t> AbstractGraph::find(const GridPoint& q) const {
    auto it = std::lower_bound(nodes_.begin(), nodes_.end(), q);
    if (it == nodes_.end() || *it != q) return std::nullopt;
    return static_cast<std::size_t>(it - nodes_.begin());
}

AbstractGraph build_abstract_graph(const SwitchedSystem& sys, const Box& v, const Grid& g) {
    const auto n = sys.dimension();
    if (v.dimension() != n || g.dimension() != n) throw std::invalid_argument("build_abstract_graph: dimension mismatch");

    // Candidate index range per axis, filtered by closed membership below.
    std::vector<std::int64_t> lo(static_cast<std::size_t>(n)), hi(static_cast<std::size_t>(n));
    for (Eigen::Index i = 0; i < n; ++i) {
        lo[static_cast<std::size_t>(i)] = static_cast<std::int64_t>(std::ceil(v.lower()[i] / g.step())) - 1;
        hi[static_cast<std::size_t>(i)] = static_cast<std::int64_t>(std::floor(v.upper()[i] / g.step())) + 1;
    }
    std::vector<GridPoint> nodes;
    GridPoint q{lo};
    do {
        if (lattice_in_box(grid_state(q, g), v, g.step())) nodes.push_back(q);
    } while (advance(q.k, lo, hi));
    if (nodes.empty()) {
        throw EmptyGridError("no lattice point of step " + std::to_string(g.step()) + " lies inside the box");
    }

    const auto m = static_cast<std::size_t>(sys.mode_count());
    std::vector<int> ids;
    for (const auto& mode : sys.modes()) ids.push_back(mode.id);

    // nodes is generated in lexicographic order already.
    std::vector<std::int64_t> succ(nodes.size() * m, AbstractGraph::kExit);
    parallel_for(nodes.size(), [&](std::size_t begin, std::size_t end) {
        for (std::size_t i = begin; i < end; ++i) {
            const Vector x = grid_state(nodes[i], g);
            for (std::size_t p = 0; p < m; ++p) {
                const GridPoint target = nearest_grid_point(sys.flows()[p].post(x), g);
                auto it = std::lower_bound(nodes.begin(), nodes.end(), target);
                if (it != nodes.end() && *it == target) succ[i * m + p] = it - nodes.begin();
            }
        }
    });
    return AbstractGraph(g, v, std::move(ids), std::move(nodes), std::move(succ));
}

std::size_t SafetyResult::winning_count() const {
    return static_cast<std::size_t>(std::count(winning.begin(), winning.end(), true));
}

SafetyResult safety_synthesis(const AbstractGraph& graph) {
    const std::size_t nodes = graph.node_count();
    const std::size_t m = graph.mode_count();

    // Reverse edges and per-node count of modes whose successor is still winning.
    std::vector<std::vector<std::size_t>> preds(nodes);
    std::vector<std::size_t> live(nodes, 0);
    for (std::size_t q = 0; q < nodes; ++q) {
        for (std::size_t p = 0; p < m; ++p) {
            const auto s = graph.successor(q, p);
            if (s == AbstractGraph::kExit) continue;
            preds[static_cast<std::size_t>(s)].push_back(q);
            ++live[q];
        }
    }
    std::vector<bool> winning(nodes, true);
    std::deque<std::size_t> dead;
    for (std::size_t q = 0; q < nodes; ++q) {
        if (live[q] == 0) {
            winning[q] = false;
            dead.push_back(q);
        }
    }
    while (!dead.empty()) {
        const auto q = dead.front();
        dead.pop_front();
        for (auto pred : preds[q]) {
            if (!winning[pred]) continue;
            if (--live[pred] == 0) {
                winning[pred] = false;
                dead.push_back(pred);
            }
        }
    }

    SafetyResult out;
    out.winning = winning;
    out.safe_modes.resize(nodes);
    for (std::size_t q = 0; q < nodes; ++q) {
        if (!winning[q]) continue;
        for (std::size_t p = 0; p < m; ++p) {
            const auto s = graph.successor(q, p);
            if (s != AbstractGraph::kExit && winning[static_cast<std::size_t>(s)]) {
                out.safe_modes[q].push_back(graph.mode_ids()[p]);
            }
        }
    }
    return out;
}

SwitchingPattern canonical_rotation(const SwitchingPattern& p) {
    SwitchingPattern best = p;
    const std::size_t len = p.modes.size();
    for (std::size_t r = 1; r < len; ++r) {
        SwitchingPattern rot;
        rot.modes.reserve(len);
        for (std::size_t i = 0; i < len; ++i) rot.modes.push_back(p.modes[(r + i) % len]);
        if (rot.modes < best.modes) best = std::move(rot);
    }
    return best;
}

std::vector<SwitchingPattern> find_patterns(const AbstractGraph& graph, const SafetyResult& safety,
                                            std::size_t max_len) {
    if (max_len < 1) throw std::invalid_argument("find_patterns: max_len must be at least 1");
    const std::size_t nodes = graph.node_count();
    const std::size_t m = graph.mode_count();

    // Safe edges (target, mode id) per winning node.
    std::vector<std::vector<std::pair<std::size_t, int>>> adj(nodes);
    std::vector<std::vector<std::size_t>> radj(nodes);
    for (std::size_t q = 0; q < nodes; ++q) {
        if (!safety.winning[q]) continue;
        for (std::size_t p = 0; p < m; ++p) {
            const auto s = graph.successor(q, p);
            if (s == AbstractGraph::kExit || !safety.winning[static_cast<std::size_t>(s)]) continue;
            adj[q].emplace_back(static_cast<std::size_t>(s), graph.mode_ids()[p]);
            radj[static_cast<std::size_t>(s)].push_back(q);
        }
    }

    std::set<SwitchingPattern> found;
    std::vector<std::size_t> dist(nodes);
    std::vector<bool> on_path(nodes, false);
    std::vector<int> labels;
    constexpr std::size_t kFar = std::numeric_limits<std::size_t>::max();

    // Each elementary cycle is enumerated once, rooted at its smallest node.
    for (std::size_t root = 0; root < nodes; ++root) {
        if (!safety.winning[root]) continue;

        // Backward BFS: hops from v back to root using nodes >= root only.
        std::fill(dist.begin(), dist.end(), kFar);
        dist[root] = 0;
        std::deque<std::size_t> queue{root};
        while (!queue.empty()) {
            const auto v = queue.front();
            queue.pop_front();
            if (dist[v] >= max_len) continue;
            for (auto u : radj[v]) {
                if (u < root || dist[u] != kFar) continue;
                dist[u] = dist[v] + 1;
                queue.push_back(u);
            }
        }

        auto dfs = [&](auto&& self, std::size_t v) -> void {
            for (const auto& [w, mode] : adj[v]) {
                if (w < root) continue;
                const std::size_t depth = labels.size() + 1;
                if (w == root) {
                    labels.push_back(mode);
                    found.insert(canonical_rotation(SwitchingPattern{labels}));
                    labels.pop_back();
                    continue;
                }
                if (on_path[w] || dist[w] == kFar || depth + dist[w] > max_len) continue;
                on_path[w] = true;
                labels.push_back(mode);
                self(self, w);
                labels.pop_back();
                on_path[w] = false;
            }
        };
        on_path[root] = true;
        dfs(dfs, root);
        on_path[root] = false;
    }

    std::vector<SwitchingPattern> out(found.begin(), found.end());
    std::stable_sort(out.begin(), out.end(), [](const auto& a, const auto& b) {
        if (a.modes.size() != b.modes.size()) return a.modes.size() < b.modes.size();
        return a.modes < b.modes;
    });
    return out;
}

}  // namespace swsynth
