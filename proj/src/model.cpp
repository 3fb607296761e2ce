#include "swsynth/model.hpp"

#include <algorithm>
#include <cmath>
#include <string>

namespace swsynth {

Box::Box(Vector lower, Vector upper) : lower_(std::move(lower)), upper_(std::move(upper)) {
    if (lower_.size() != upper_.size()) throw std::invalid_argument("Box: bound dimensions differ");
    if (lower_.size() == 0) throw std::invalid_argument("Box: empty dimension");
    if (!lower_.allFinite() || !upper_.allFinite()) throw std::invalid_argument("Box: non-finite bound");
    for (Eigen::Index i = 0; i < lower_.size(); ++i) {
        if (!(lower_[i] < upper_[i])) {
            throw std::invalid_argument("Box: lower[" + std::to_string(i) + "] must be < upper[" +
                                        std::to_string(i) + "]");
        }
    }
}

bool Box::contains(const Vector& x) const {
    if (x.size() != lower_.size()) throw std::invalid_argument("Box::contains: dimension mismatch");
    return (x.array() >= lower_.array()).all() && (x.array() <= upper_.array()).all();
}

bool Box::contains(const Box& other) const {
    return (other.lower_.array() >= lower_.array()).all() &&
           (other.upper_.array() <= upper_.array()).all();
}

double Box::distance(const Vector& x) const {
    if (x.size() != lower_.size()) throw std::invalid_argument("Box::distance: dimension mismatch");
    double d = 0.0;
    for (Eigen::Index i = 0; i < x.size(); ++i) {
        d = std::max({d, lower_[i] - x[i], x[i] - upper_[i]});
    }
    return d;
}

Box Box::inflated(double r) const {
    const Vector grow = Vector::Constant(lower_.size(), r);
    return Box(lower_ - grow, upper_ + grow);
}

SwitchedSystem::SwitchedSystem(std::vector<LinearMode> modes, double tau)
    : n_(0), modes_(std::move(modes)), tau_(tau) {
    if (modes_.empty()) throw std::invalid_argument("SwitchedSystem: at least one mode required");
    if (!(tau_ > 0.0) || !std::isfinite(tau_)) throw std::invalid_argument("SwitchedSystem: tau must be positive");
    std::sort(modes_.begin(), modes_.end(), [](const auto& a, const auto& b) { return a.id < b.id; });
    n_ = modes_.front().a.rows();
    if (n_ == 0) throw std::invalid_argument("SwitchedSystem: zero-dimensional state");
    for (std::size_t i = 0; i < modes_.size(); ++i) {
        const auto& m = modes_[i];
        if (m.id <= 0) throw std::invalid_argument("SwitchedSystem: mode ids must be positive");
        if (i > 0 && modes_[i - 1].id == m.id) {
            throw std::invalid_argument("SwitchedSystem: duplicate mode id " + std::to_string(m.id));
        }
        if (m.a.rows() != n_ || m.a.cols() != n_ || m.b.size() != n_) {
            throw std::invalid_argument("SwitchedSystem: mode " + std::to_string(m.id) +
                                        " does not match dimension " + std::to_string(n_));
        }
    }
    flows_.reserve(modes_.size());
    for (const auto& m : modes_) flows_.push_back(affine_flow(m.a, m.b, tau_, m.id));
}

const LinearMode& SwitchedSystem::mode(int id) const {
    for (const auto& m : modes_) {
        if (m.id == id) return m;
    }
    throw std::out_of_range("unknown mode id " + std::to_string(id));
}

const FlowMap& SwitchedSystem::flow(int id) const {
    for (std::size_t i = 0; i < modes_.size(); ++i) {
        if (modes_[i].id == id) return flows_[i];
    }
    throw std::out_of_range("unknown mode id " + std::to_string(id));
}

SwitchedSystem build_boost_1cell(const Boost1CellParams& p, double tau) {
    for (double v : {p.x_c, p.x_l, p.r_c, p.r_l, p.r_0, p.v_s}) {
        if (!std::isfinite(v) || v < 0.0) throw std::invalid_argument("boost1: parameters must be finite and non-negative");
    }
    if (p.x_c <= 0.0 || p.x_l <= 0.0 || p.r_0 + p.r_c <= 0.0) {
        throw std::invalid_argument("boost1: x_c, x_l and r_0 + r_c must be positive");
    }
    const double rr = p.r_0 + p.r_c;

    Matrix a1(2, 2);
    a1 << -p.r_l / p.x_l, 0.0,
          0.0, -(1.0 / p.x_c) * (1.0 / rr);
    Matrix a2(2, 2);
    a2 << -(1.0 / p.x_l) * (p.r_l + p.r_0 * p.r_c / rr), -(1.0 / p.x_l) * (p.r_0 / rr),
          (1.0 / p.x_c) * (p.r_0 / rr), -(1.0 / p.x_c) * (p.r_0 / rr);
    Vector b(2);
    b << p.v_s / p.x_l, 0.0;

    return SwitchedSystem({{1, a1, b}, {2, a2, b}}, tau);
}

int boost3_mode_id(const CellSwitches& s) {
    for (int v : s) {
        if (v != 0 && v != 1) throw std::invalid_argument("boost3: sigma entries must be 0 or 1");
    }
    return 4 * s[0] + 2 * s[1] + s[2] + 1;
}

CellSwitches boost3_sigma(int mode_id) {
    if (mode_id < 1 || mode_id > 8) throw std::invalid_argument("boost3: mode id outside 1..8");
    const int v = mode_id - 1;
    return {(v >> 2) & 1, (v >> 1) & 1, v & 1};
}

std::vector<CellSwitches> all_cell_switches() {
    std::vector<CellSwitches> out;
    for (int id = 1; id <= 8; ++id) out.push_back(boost3_sigma(id));
    return out;
}

SwitchedSystem build_boost_3cell(const Boost3CellParams& p, double tau,
                                 const std::vector<CellSwitches>& available) {
    for (double v : {p.r, p.l, p.c, p.load, p.u}) {
        if (!std::isfinite(v) || v <= 0.0) throw std::invalid_argument("boost3: r, L, C, R, U must be positive");
    }
    if (!std::isfinite(p.m) || p.m < 0.0) throw std::invalid_argument("boost3: M must be non-negative");
    if (available.empty()) throw std::invalid_argument("boost3: empty mode set");

    Matrix m_lc(4, 4);
    m_lc << 2 * p.l, -p.m, -p.m, 0,
            -p.m, 2 * p.l, -p.m, 0,
            -p.m, -p.m, 2 * p.l, 0,
            0, 0, 0, p.c;
    Matrix m_s(4, 4);
    m_s << -2 * p.r, 0, 0, -1,
           0, -2 * p.r, 0, -1,
           0, 0, -2 * p.r, -1,
           1, 1, 1, -1.0 / p.load;

    Eigen::FullPivLU<Matrix> lu(m_lc);
    if (!lu.isInvertible()) throw std::invalid_argument("boost3: M_LC is singular (check L and M)");
    const Matrix a = lu.solve(m_s);

    std::vector<LinearMode> modes;
    for (const auto& s : available) {
        Vector drive(4);
        drive << s[0], s[1], s[2], 0.0;
        const int id = boost3_mode_id(s);
        for (const auto& existing : modes) {
            if (existing.id == id) throw std::invalid_argument("boost3: duplicate sigma vector");
        }
        modes.push_back({id, a, p.u * lu.solve(drive)});
    }
    return SwitchedSystem(std::move(modes), tau);
}

}  // namespace swsynth
