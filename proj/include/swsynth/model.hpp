#pragma once

#include "swsynth/flow.hpp"

#include <array>
#include <set>
#include <vector>

namespace swsynth {

/// One mode x' = A x + b. Ids run 1..m within a system.
struct LinearMode {
    int id = 0;
    Matrix a;
    Vector b;
};

/// Axis-aligned closed box [lower, upper].
class Box {
public:
    Box() = default;
    Box(Vector lower, Vector upper);

    const Vector& lower() const { return lower_; }
    const Vector& upper() const { return upper_; }
    Eigen::Index dimension() const { return lower_.size(); }
    Vector edges() const { return upper_ - lower_; }
    Vector center() const { return 0.5 * (lower_ + upper_); }

    /// Closed membership.
    bool contains(const Vector& x) const;
    bool contains(const Box& other) const;
    /// Inf-norm distance from x to the box (0 inside).
    double distance(const Vector& x) const;
    /// Box grown by r on every side.
    Box inflated(double r) const;

    friend bool operator==(const Box& a, const Box& b) {
        return a.lower_ == b.lower_ && a.upper_ == b.upper_;
    }

private:
    Vector lower_;
    Vector upper_;
};

/// Sampled switched system: modes 1..m sharing dimension n, switching only at
/// multiples of tau. Flow maps are computed once at construction.
class SwitchedSystem {
public:
    SwitchedSystem(std::vector<LinearMode> modes, double tau);

    Eigen::Index dimension() const { return n_; }
    int mode_count() const { return static_cast<int>(modes_.size()); }
    double tau() const { return tau_; }
    const std::vector<LinearMode>& modes() const { return modes_; }
    const LinearMode& mode(int id) const;
    /// Flow map over one period for mode id (1-based).
    const FlowMap& flow(int id) const;
    const std::vector<FlowMap>& flows() const { return flows_; }

    /// Same modes, different sampling period.
    SwitchedSystem with_tau(double tau) const { return SwitchedSystem(modes_, tau); }

private:
    Eigen::Index n_;
    std::vector<LinearMode> modes_;
    double tau_;
    std::vector<FlowMap> flows_;
};

/// Per-unit parameters of the one-cell boost converter.
struct Boost1CellParams {
    double x_c = 70.0;
    double x_l = 3.0;
    double r_c = 0.005;
    double r_l = 0.05;
    double r_0 = 1.0;
    double v_s = 1.0;
};

/// Three-cell interleaved boost converter. The circuit values other than U are
/// placeholders; override them for a real converter.
struct Boost3CellParams {
    double r = 0.1;
    double l = 1e-3;
    double m = 0.0;
    double c = 1e-3;
    double load = 1.0;  // R
    double u = 100.0;
};

using CellSwitches = std::array<int, 3>;  // (sigma1, sigma2, sigma3), each 0 or 1

/// Mode id of a switch configuration: binary value of sigma1 sigma2 sigma3, plus one.
/// (0,0,0) -> 1, (0,0,1) -> 2, ..., (1,1,1) -> 8.
int boost3_mode_id(const CellSwitches& sigma);
CellSwitches boost3_sigma(int mode_id);
std::vector<CellSwitches> all_cell_switches();

/// Two modes, state (i_l, v_c). Throws std::invalid_argument on negative parameters
/// or x_c, x_l, r_0 + r_c not strictly positive.
SwitchedSystem build_boost_1cell(const Boost1CellParams& p, double tau);

/// One mode per available sigma vector, A = M_LC^{-1} M_S, b = U M_LC^{-1} (s1, s2, s3, 0).
/// The mode ids follow boost3_mode_id, so a restricted set keeps its ids
/// (e.g. sigma1 = 0 gives modes 1..4).
SwitchedSystem build_boost_3cell(const Boost3CellParams& p, double tau,
                                 const std::vector<CellSwitches>& available);

}  // namespace swsynth
