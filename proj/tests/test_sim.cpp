#include "oracles.hpp"
#include "swsynth/sim.hpp"

#include <catch_amalgamated.hpp>

#include <sstream>

using namespace swsynth;
using Catch::Matchers::ContainsSubstring;
using Catch::Matchers::WithinAbs;

namespace {

Vector vec2(double a, double b) {
    Vector v(2);
    v << a, b;
    return v;
}

const Box kPaperBox(vec2(3, 1.5), vec2(3.4, 1.8));
const SwitchingPattern kPattern{{1, 2, 1, 2, 1, 2, 1, 2, 1, 2, 2}};

SwitchedSystem translation() { return SwitchedSystem({{1, Matrix::Zero(2, 2), vec2(1, 0)}}, 0.5); }

SwitchedSystem identity2() {
    return SwitchedSystem({{1, Matrix::Zero(2, 2), Vector::Zero(2)}, {2, Matrix::Zero(2, 2), Vector::Zero(2)}}, 0.5);
}

}  // namespace

TEST_CASE("identity dynamics give a constant trajectory") {
    const Trajectory t = simulate_pattern(identity2(), vec2(3.1, 1.6), SwitchingPattern{{1, 2}}, 5, 4);
    CHECK(t.points.size() == 5 * 4 + 1);
    for (const auto& p : t.points) CHECK(p.x == vec2(3.1, 1.6));
    CHECK(t.sampled_modes() == std::vector<int>{1, 2, 1, 2, 1, 1});  // the last sample keeps the mode that reached it
}

TEST_CASE("pure translation samples") {
    const Trajectory t = simulate_pattern(translation(), vec2(3, 1.6), SwitchingPattern{{1}}, 4, 8);
    const auto xs = t.sampled_states();
    REQUIRE(xs.size() == 5);
    for (std::size_t k = 0; k < xs.size(); ++k) CHECK_THAT(xs[k][0], WithinAbs(3.0 + 0.5 * static_cast<double>(k), 1e-14));
    for (std::size_t i = 1; i < t.points.size(); ++i) {
        CHECK(t.points[i].t > t.points[i - 1].t);
        CHECK_THAT(t.points[i].x[0] - t.points[i - 1].x[0], WithinAbs(0.5 / 8, 1e-13));
    }
}

TEST_CASE("simulation rejects bad input") {
    CHECK_THROWS_AS(simulate_pattern(identity2(), vec2(0, 0), SwitchingPattern{{3}}, 2, 1), std::out_of_range);
    CHECK_THROWS_AS(simulate_pattern(identity2(), vec2(0, 0), SwitchingPattern{{1}}, 0, 1), std::invalid_argument);
    CHECK_THROWS_AS(simulate_pattern(identity2(), vec2(0, 0), SwitchingPattern{{1}}, 2, 0), std::invalid_argument);
    CHECK_THROWS_AS(simulate_pattern(identity2(), Vector::Zero(3), SwitchingPattern{{1}}, 2, 1), std::invalid_argument);
}

TEST_CASE("substeps compose to the one-period map") {
    for (const auto& sys : {build_boost_1cell({}, 0.5), build_boost_3cell({}, 1.0 / 60000, all_cell_switches())}) {
        for (const auto& m : sys.modes()) {
            const FlowMap sub = affine_flow(m.a, m.b, sys.tau() / 32);
            FlowMap acc = sub;
            for (int s = 1; s < 32; ++s) acc = acc.then(sub);
            CHECK(induced_inf_norm(acc.e() - sys.flow(m.id).e()) <= 1e-9);
            CHECK(inf_norm(acc.c() - sys.flow(m.id).c()) <= 1e-9);
        }
    }
}

TEST_CASE("pattern run agrees with RK4") {
    const auto sys = build_boost_1cell({}, 0.5);
    const Trajectory t = simulate_pattern(sys, vec2(3.0, 1.79), kPattern, 200, 32);
    const auto xs = t.sampled_states();
    Vector x = vec2(3.0, 1.79);
    double worst = 0;
    for (std::size_t k = 0; k < 200; ++k) {
        const auto& m = sys.mode(pattern_mode(kPattern, k));
        x = oracle::rk4(m.a, m.b, x, 0.5, 10000);
        worst = std::max(worst, inf_norm(x - xs[k + 1]));
    }
    CHECK(worst <= 1e-6);
}

TEST_CASE("three-cell run agrees with RK4") {
    const auto sys = build_boost_3cell({}, 1.0 / 60000, all_cell_switches());
    Vector x0(4);
    x0 << 5.5, 5.5, 5.5, 16;
    const SwitchingPattern pat{{5, 3, 2, 8, 1}};
    const Trajectory t = simulate_pattern(sys, x0, pat, 200, 4);
    const auto xs = t.sampled_states();
    Vector x = x0;
    double worst = 0;
    for (std::size_t k = 0; k < 200; ++k) {
        const auto& m = sys.mode(pattern_mode(pat, k));
        x = oracle::rk4(m.a, m.b, x, sys.tau(), 10000);
        worst = std::max(worst, inf_norm(x - xs[k + 1]));
    }
    CHECK(worst <= 1e-6);
}

TEST_CASE("containment report") {
    const Trajectory inside = simulate_pattern(identity2(), vec2(3.1, 1.6), SwitchingPattern{{1}}, 3, 2);
    const ContainmentReport r0 = check_containment(inside, kPaperBox, 0.0);
    CHECK(r0.violations_at_samples.empty());
    CHECK(r0.violations_between.empty());
    CHECK(r0.max_excursion == 0.0);

    const Trajectory out = simulate_pattern(identity2(), vec2(3.6, 1.6), SwitchingPattern{{1}}, 1, 1);
    const ContainmentReport r1 = check_containment(out, kPaperBox, 0.0);
    CHECK(r1.violations_at_samples.size() == 2);
    CHECK_THAT(r1.max_excursion, WithinAbs(0.2, 1e-15));
    CHECK(r1.inflated_at_samples == 2);
    CHECK(check_containment(out, kPaperBox, 0.25).inflated_at_samples == 0);

    const ContainmentReport r2 = check_containment(
        simulate_pattern(translation(), vec2(3.3, 1.6), SwitchingPattern{{1}}, 1, 4), kPaperBox, 0.0);
    CHECK(r2.violations_between.size() == 3);
    CHECK(r2.violations_at_samples.size() == 1);
    CHECK_THAT(format_containment(r2), ContainsSubstring("violations_between 3"));
}

TEST_CASE("pattern run leaves V but stays within the inflated box") {
    const auto sys = build_boost_1cell({}, 0.5);
    const Trajectory t = simulate_pattern(sys, vec2(3.0, 1.79), kPattern, 200, 32);
    for (double eps : {3.0, 2.6}) {
        const ContainmentReport r = check_containment(t, kPaperBox, eps);
        CHECK_FALSE(r.violations_at_samples.empty());
        CHECK(r.inflated_at_samples == 0);
        CHECK(r.inflated_between == 0);
    }
}

TEST_CASE("closed loop on identity dynamics") {
    const auto sys = identity2();
    const auto g = make_grid(CellGrid(kPaperBox, {8, 8}));
    const auto cs = algorithm1(sys, g);
    const ClosedLoopRun run = simulate_closed_loop(sys, vec2(3.1, 1.6), cs, 100, 2);
    CHECK(run.completed());
    CHECK(run.modes == std::vector<int>(100, 1));
    for (const auto& p : run.trajectory.points) CHECK(p.x == vec2(3.1, 1.6));
    CHECK_THROWS_AS(simulate_closed_loop(sys, vec2(3.5, 1.6), cs, 10, 2), X0OutsideControllable);
}

TEST_CASE("closed loop halts when no mode is safe") {
    const auto sys = translation();
    const auto g = make_grid(CellGrid(kPaperBox, {8, 8}));
    // Claim everything is controllable; the drift soon proves otherwise.
    ControllableSubspace cs{{1}, {GriddySet::full(g)}, GriddySet::full(g), 1, true};
    const ClosedLoopRun run = simulate_closed_loop(sys, vec2(3.0, 1.6), cs, 10, 2);
    CHECK_FALSE(run.completed());
    REQUIRE(run.halted_at);
    CHECK(*run.halted_at == 0);
    CHECK_THAT(run.diagnostic, ContainsSubstring("step 0"));
}

TEST_CASE("one-cell closed loop stays in V") {
    const auto sys = build_boost_1cell({}, 0.5);
    const auto cs = algorithm1(sys, make_grid(CellGrid(kPaperBox, {200, 200})));
    for (const Vector& x0 : {vec2(3.01, 1.79), vec2(3.2, 1.65), vec2(3.39, 1.51)}) {
        if (!cs.v_prime.contains_point(x0)) continue;
        const ClosedLoopRun run = simulate_closed_loop(sys, x0, cs, 2000, 8);
        REQUIRE(run.completed());
        CHECK(check_containment(run.trajectory, kPaperBox, 0.0).violations_at_samples.empty());
    }
}

TEST_CASE("trajectory CSV") {
    const Trajectory t = simulate_pattern(translation(), vec2(3, 1.6), SwitchingPattern{{1}}, 2, 2);
    const std::string csv = format_trajectory_csv(t);
    std::istringstream in(csv);
    std::string line;
    std::getline(in, line);
    CHECK(line == "t,mode,x1,x2");
    std::getline(in, line);
    CHECK(line == "0,1,3,1.6000000000000001");
    std::size_t rows = 0;
    while (std::getline(in, line)) ++rows;
    CHECK(rows + 1 == t.points.size());
}
