#include "oracles.hpp"
#include "swsynth/flow.hpp"
#include "swsynth/model.hpp"

#include <catch_amalgamated.hpp>

#include <cmath>
#include <random>

using namespace swsynth;
using Catch::Matchers::WithinAbs;

namespace {

Matrix mat2(double a, double b, double c, double d) {
    Matrix m(2, 2);
    m << a, b, c, d;
    return m;
}

Vector vec2(double a, double b) {
    Vector v(2);
    v << a, b;
    return v;
}

SwitchedSystem boost1() { return build_boost_1cell({}, 0.5); }
SwitchedSystem boost3() { return build_boost_3cell({}, 1.0 / 60000, all_cell_switches()); }

}  // namespace

TEST_CASE("exponential of zero is the identity") {
    const Matrix e = matrix_exponential(Matrix::Zero(2, 2), 0.5);
    CHECK(e == Matrix::Identity(2, 2));
}

TEST_CASE("exponential of a diagonal matrix is elementwise") {
    const Matrix e = matrix_exponential(mat2(-2, 0, 0, -4), 0.5);
    CHECK_THAT(e(0, 0), WithinAbs(std::exp(-1.0), 1e-15));
    CHECK_THAT(e(1, 1), WithinAbs(std::exp(-2.0), 1e-15));
    CHECK(e(0, 1) == 0.0);
    CHECK(e(1, 0) == 0.0);
}

TEST_CASE("exponential rejects bad input") {
    CHECK_THROWS_AS(matrix_exponential(Matrix::Zero(2, 3), 1.0), std::invalid_argument);
    Matrix bad = Matrix::Zero(2, 2);
    bad(0, 1) = std::nan("");
    CHECK_THROWS_AS(matrix_exponential(bad, 1.0), NumericError);
}

TEST_CASE("exponential agrees with the Taylor oracle on the converter matrices") {
    for (const auto& sys : {boost1(), boost3()}) {
        for (const auto& m : sys.modes()) {
            const Matrix e = matrix_exponential(m.a, sys.tau());
            const Matrix ref = oracle::taylor_exp(m.a, sys.tau());
            CHECK(induced_inf_norm(e - ref) <= NumericPolicy::exp_rel_tol * induced_inf_norm(ref));
        }
    }
    // A larger argument exercises the squaring phase.
    const Matrix a = mat2(-1.3, 4.0, -2.5, 0.2);
    const Matrix ref = oracle::taylor_exp(a, 3.0);
    CHECK(induced_inf_norm(matrix_exponential(a, 3.0) - ref) <= 1e-11 * induced_inf_norm(ref));
}

TEST_CASE("exp(At) exp(-At) is the identity") {
    for (const auto& sys : {boost1(), boost3()}) {
        const auto& a = sys.modes().front().a;
        const Matrix p = matrix_exponential(a, sys.tau()) * matrix_exponential(a, -sys.tau());
        CHECK(induced_inf_norm(p - Matrix::Identity(a.rows(), a.cols())) <= 1e-10);
    }
}

TEST_CASE("affine flow of a pure translation") {
    const FlowMap f = affine_flow(Matrix::Zero(2, 2), vec2(1, 0), 0.5, 1);
    CHECK(f.e() == Matrix::Identity(2, 2));
    CHECK_THAT(f.c()[0], WithinAbs(0.5, 1e-15));
    CHECK_THAT(f.c()[1], WithinAbs(0.0, 1e-15));
    CHECK(f.mode_id() == 1);
    CHECK(f.tau() == 0.5);
    const Vector y = post_point(f, vec2(3, 1.5));
    CHECK_THAT(y[0], WithinAbs(3.5, 1e-15));
    CHECK_THAT(y[1], WithinAbs(1.5, 1e-15));
}

TEST_CASE("affine flow integral term for invertible A") {
    const FlowMap f = affine_flow(mat2(-1, 0, 0, -1), vec2(1, 1), 1.0);
    CHECK_THAT(f.c()[0], WithinAbs(1 - std::exp(-1.0), 1e-14));
    CHECK_THAT(f.c()[1], WithinAbs(1 - std::exp(-1.0), 1e-14));
}

TEST_CASE("affine flow validates arguments") {
    CHECK_THROWS_AS(affine_flow(Matrix::Zero(2, 2), Vector::Zero(3), 1.0), std::invalid_argument);
    CHECK_THROWS_AS(affine_flow(Matrix::Zero(2, 2), Vector::Zero(2), 0.0), std::invalid_argument);
    CHECK_THROWS_AS(affine_flow(Matrix::Zero(2, 2), Vector::Zero(2), -1.0), std::invalid_argument);
}

TEST_CASE("identity flow maps points to themselves") {
    const FlowMap f = affine_flow(Matrix::Zero(2, 2), Vector::Zero(2), 0.5);
    CHECK(post_point(f, vec2(3, 1.5)) == vec2(3, 1.5));
    CHECK(pre_point(f, vec2(1, 2)) == vec2(1, 2));
}

TEST_CASE("flow agrees with RK4 on the one-cell converter") {
    const auto sys = boost1();
    const auto& m1 = sys.mode(1);
    const Vector c_ref = oracle::rk4(m1.a, m1.b, Vector::Zero(2), 0.5, 1000000);
    CHECK(inf_norm(sys.flow(1).c() - c_ref) <= 1e-9);

    const auto& m2 = sys.mode(2);
    const Vector x = vec2(3.0, 1.79);
    const Vector y_ref = oracle::rk4(m2.a, m2.b, x, 0.5, 1000000);
    CHECK(inf_norm(post_point(sys.flow(2), x) - y_ref) <= 1e-9);

    const Vector x1 = vec2(3.2, 1.6);
    const Vector y1 = oracle::rk4(m1.a, m1.b, x1, 0.5, 1000000);
    CHECK(inf_norm(pre_point(sys.flow(1), y1) - x1) <= 1e-9);
}

TEST_CASE("semigroup: two periods equal one double period") {
    for (const auto& sys : {boost1(), boost3()}) {
        for (const auto& m : sys.modes()) {
            const FlowMap one = affine_flow(m.a, m.b, sys.tau());
            const FlowMap two = affine_flow(m.a, m.b, 2 * sys.tau());
            const FlowMap twice = one.then(one);
            CHECK(induced_inf_norm(twice.e() - two.e()) <= 1e-10);
            CHECK(inf_norm(twice.c() - two.c()) <= 1e-10);
        }
    }
}

TEST_CASE("pre inverts post on random points") {
    std::mt19937_64 rng(7);
    const auto check = [&](const SwitchedSystem& sys, const Vector& lo, const Vector& hi) {
        std::uniform_real_distribution<double> u(0.0, 1.0);
        for (int k = 0; k < 1000; ++k) {
            Vector x(lo.size());
            for (Eigen::Index i = 0; i < x.size(); ++i) x[i] = lo[i] + u(rng) * (hi[i] - lo[i]);
            for (const auto& f : sys.flows()) {
                REQUIRE(inf_norm(f.pre(f.post(x)) - x) <= NumericPolicy::flow_abs_tol);
            }
        }
    };
    check(boost1(), vec2(3, 1.5), vec2(3.4, 1.8));
    Vector lo(4), hi(4);
    lo << 4, 4, 4, 15;
    hi << 7, 7, 7, 17;
    check(boost3(), lo, hi);
}

TEST_CASE("distinct points have distinct images") {
    const auto sys = boost1();
    std::mt19937_64 rng(11);
    std::uniform_real_distribution<double> u(-1.0, 1.0);
    for (int k = 0; k < 1000; ++k) {
        const Vector x = vec2(3.2 + 0.2 * u(rng), 1.65 + 0.15 * u(rng));
        const Vector d = vec2(u(rng), u(rng)).normalized() * 1e-6 / 0.70710678;
        const Vector x2 = x + d;
        if (inf_norm(x2 - x) < 1e-6) continue;
        for (const auto& f : sys.flows()) CHECK(inf_norm(f.post(x) - f.post(x2)) > 0.0);
    }
}

TEST_CASE("induced infinity norm") {
    CHECK(induced_inf_norm(Matrix::Identity(2, 2)) == 1.0);
    CHECK(induced_inf_norm(mat2(1, -2, 3, 0.5)) == 3.5);
    const auto sys = boost1();
    const Matrix ref = oracle::taylor_exp(sys.mode(1).a, 0.5);
    CHECK_THAT(induced_inf_norm(sys.flow(1).e()), WithinAbs(oracle::row_sum_norm(ref.cast<long double>()), 1e-14));
}

TEST_CASE("fraction and decimal parsing") {
    CHECK(parse_real("1/40") == 0.025);
    CHECK(parse_real("1/60000") == 1.0 / 60000);
    CHECK(parse_real("-2.5e-3") == -2.5e-3);
    CHECK(parse_real("3") == 3.0);
    CHECK_THROWS_AS(parse_real("abc"), std::invalid_argument);
    CHECK_THROWS_AS(parse_real("1/0"), std::invalid_argument);
    CHECK_THROWS_AS(parse_real(""), std::invalid_argument);
}
