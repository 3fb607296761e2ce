#pragma once

#include "swsynth/direct.hpp"
#include "swsynth/indirect.hpp"

#include <optional>
#include <string>
#include <vector>

namespace swsynth {

struct TrajectoryPoint {
    double t = 0.0;
    Vector x;
    int mode = 0;          // mode driving the step this point belongs to; the final sample keeps the last one
    std::size_t step = 0;  // sampling step index k, t in [k tau, (k+1) tau)
    bool sample = false;   // true at t = k tau
};

/// Sampled trajectory with substeps_per_tau - 1 dense points between
/// consecutive samples. The last point is the sample after the final step.
struct Trajectory {
    std::vector<TrajectoryPoint> points;
    std::size_t substeps_per_tau = 1;
    double tau = 0.0;

    std::vector<Vector> sampled_states() const;
    std::vector<int> sampled_modes() const;
};

/// Runs pattern pat open loop: step k uses pat[k mod len]. Sampled states come
/// from the one-period maps; dense points from maps of length tau / substeps
/// restarted at each sample.
Trajectory simulate_pattern(const SwitchedSystem& sys, const Vector& x0, const SwitchingPattern& pat,
                            std::size_t steps, std::size_t substeps = 32);

class X0OutsideControllable : public std::invalid_argument {
public:
    X0OutsideControllable() : std::invalid_argument("initial state is not in the controllable subspace") {}
};

struct ClosedLoopRun {
    Trajectory trajectory;
    std::vector<int> modes;  // chosen mode per completed step
    /// Set when no safe mode existed at this sampling step; the run stops there.
    std::optional<std::size_t> halted_at;
    std::string diagnostic;
    bool completed() const { return !halted_at; }
};

/// Picks the mode at each sample with online_select_mode. Throws
/// X0OutsideControllable when x0 is not in V'.
ClosedLoopRun simulate_closed_loop(const SwitchedSystem& sys, const Vector& x0, const ControllableSubspace& cs,
                                   std::size_t steps, std::size_t substeps = 32);

struct ContainmentViolation {
    std::size_t step;
    double t;
    Vector x;
    double distance;  // inf-norm distance outside V
};

struct ContainmentReport {
    std::vector<ContainmentViolation> violations_at_samples;
    std::vector<ContainmentViolation> violations_between;
    double max_excursion = 0.0;
    double epsilon = 0.0;
    /// Same counts against V inflated by epsilon.
    std::size_t inflated_at_samples = 0;
    std::size_t inflated_between = 0;
};

ContainmentReport check_containment(const Trajectory& t, const Box& v, double epsilon);

/// Header t,mode,x1,...,xn then one row per point.
std::string format_trajectory_csv(const Trajectory& t);
std::string format_containment(const ContainmentReport& r);

}  // namespace swsynth
