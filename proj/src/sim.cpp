#include "swsynth/sim.hpp"

#include <algorithm>
#include <cstdio>
#include <map>
#include <sstream>

namespace swsynth {

std::vector<Vector> Trajectory::sampled_states() const {
    std::vector<Vector> out;
    for (const auto& p : points) {
        if (p.sample) out.push_back(p.x);
    }
    return out;
}

std::vector<int> Trajectory::sampled_modes() const {
    std::vector<int> out;
    for (const auto& p : points) {
        if (p.sample) out.push_back(p.mode);
    }
    return out;
}

namespace {

void require_substeps(std::size_t substeps) {
    if (substeps < 1) throw std::invalid_argument("substeps must be at least 1");
}

/// Full-period and substep maps per mode, built lazily.
class StepMaps {
public:
    StepMaps(const SwitchedSystem& sys, std::size_t substeps) : sys_(sys), substeps_(substeps) {}

    const FlowMap& full(int id) const { return sys_.flow(id); }

    const FlowMap& sub(int id) {
        auto it = sub_.find(id);
        if (it == sub_.end()) {
            const auto& m = sys_.mode(id);
            it = sub_.emplace(id, affine_flow(m.a, m.b, sys_.tau() / static_cast<double>(substeps_), id)).first;
        }
        return it->second;
    }

private:
    const SwitchedSystem& sys_;
    std::size_t substeps_;
    std::map<int, FlowMap> sub_;
};

/// Appends the dense points of step k (excluding both samples) and returns the
/// next sample.
Vector advance_step(Trajectory& tr, StepMaps& maps, const Vector& x, int mode, std::size_t k) {
    const double tau = tr.tau;
    if (tr.substeps_per_tau > 1) {
        const FlowMap& sub = maps.sub(mode);
        Vector y = x;
        for (std::size_t s = 1; s < tr.substeps_per_tau; ++s) {
            y = sub.post(y);
            const double t = tau * (static_cast<double>(k) + static_cast<double>(s) / static_cast<double>(tr.substeps_per_tau));
            tr.points.push_back({t, y, mode, k, false});
        }
    }
    return maps.full(mode).post(x);
}

}  // namespace

Trajectory simulate_pattern(const SwitchedSystem& sys, const Vector& x0, const SwitchingPattern& pat,
                            std::size_t steps, std::size_t substeps) {
    if (x0.size() != sys.dimension()) throw std::invalid_argument("x0 has the wrong dimension");
    if (steps < 1) throw std::invalid_argument("steps must be at least 1");
    require_substeps(substeps);
    if (pat.modes.empty()) throw std::invalid_argument("empty switching pattern");
    for (int id : pat.modes) sys.flow(id);  // throws std::out_of_range on unknown ids

    Trajectory tr;
    tr.substeps_per_tau = substeps;
    tr.tau = sys.tau();
    tr.points.reserve(steps * substeps + 1);
    StepMaps maps(sys, substeps);
    Vector x = x0;
    for (std::size_t k = 0; k < steps; ++k) {
        const int mode = pattern_mode(pat, k);
        tr.points.push_back({tr.tau * static_cast<double>(k), x, mode, k, true});
        x = advance_step(tr, maps, x, mode, k);
    }
    tr.points.push_back({tr.tau * static_cast<double>(steps), x, pattern_mode(pat, steps - 1), steps, true});
    return tr;
}

ClosedLoopRun simulate_closed_loop(const SwitchedSystem& sys, const Vector& x0, const ControllableSubspace& cs,
                                   std::size_t steps, std::size_t substeps) {
    if (x0.size() != sys.dimension()) throw std::invalid_argument("x0 has the wrong dimension");
    require_substeps(substeps);
    if (!cs.v_prime.contains_point(x0)) throw X0OutsideControllable();

    ClosedLoopRun run;
    auto& tr = run.trajectory;
    tr.substeps_per_tau = substeps;
    tr.tau = sys.tau();
    tr.points.reserve(steps * substeps + 1);
    StepMaps maps(sys, substeps);
    Vector x = x0;
    for (std::size_t k = 0; k < steps; ++k) {
        int mode;
        try {
            mode = online_select_mode(x, cs, sys);
        } catch (const NoSafeMode& e) {
            tr.points.push_back({tr.tau * static_cast<double>(k), x, 0, k, true});
            run.halted_at = k;
            run.diagnostic = std::string(e.what()) + " at step " + std::to_string(k);
            return run;
        }
        run.modes.push_back(mode);
        tr.points.push_back({tr.tau * static_cast<double>(k), x, mode, k, true});
        x = advance_step(tr, maps, x, mode, k);
    }
    tr.points.push_back({tr.tau * static_cast<double>(steps), x, run.modes.empty() ? 0 : run.modes.back(), steps, true});
    return run;
}

ContainmentReport check_containment(const Trajectory& t, const Box& v, double epsilon) {
    ContainmentReport r;
    r.epsilon = epsilon;
    for (const auto& p : t.points) {
        const double d = v.distance(p.x);
        if (d <= 0.0) continue;
        auto& list = p.sample ? r.violations_at_samples : r.violations_between;
        list.push_back({p.step, p.t, p.x, d});
        r.max_excursion = std::max(r.max_excursion, d);
        if (d > epsilon) ++(p.sample ? r.inflated_at_samples : r.inflated_between);
    }
    return r;
}

std::string format_trajectory_csv(const Trajectory& t) {
    std::ostringstream out;
    out << "t,mode";
    const Eigen::Index n = t.points.empty() ? 0 : t.points.front().x.size();
    for (Eigen::Index i = 0; i < n; ++i) out << ",x" << i + 1;
    out << '\n';
    char buf[32];
    for (const auto& p : t.points) {
        std::snprintf(buf, sizeof buf, "%.17g", p.t);
        out << buf << ',' << p.mode;
        for (Eigen::Index i = 0; i < n; ++i) {
            std::snprintf(buf, sizeof buf, "%.17g", p.x[i]);
            out << ',' << buf;
        }
        out << '\n';
    }
    return out.str();
}

std::string format_containment(const ContainmentReport& r) {
    std::ostringstream out;
    char buf[64];
    out << "violations_at_samples " << r.violations_at_samples.size() << '\n';
    out << "violations_between " << r.violations_between.size() << '\n';
    std::snprintf(buf, sizeof buf, "%.17g", r.max_excursion);
    out << "max_excursion " << buf << '\n';
    std::snprintf(buf, sizeof buf, "%.17g", r.epsilon);
    out << "epsilon " << buf << '\n';
    out << "inflated_violations_at_samples " << r.inflated_at_samples << '\n';
    out << "inflated_violations_between " << r.inflated_between << '\n';
    auto list = [&](const char* tag, const std::vector<ContainmentViolation>& vs) {
        std::size_t shown = 0;
        for (const auto& v : vs) {
            if (shown++ == 50) {
                out << tag << " ... (" << vs.size() - 50 << " more)\n";
                break;
            }
            std::snprintf(buf, sizeof buf, "%.9g %.9g", v.t, v.distance);
            out << tag << " step " << v.step << " t,distance " << buf << '\n';
        }
    };
    list("sample", r.violations_at_samples);
    list("between", r.violations_between);
    return out.str();
}

}  // namespace swsynth
