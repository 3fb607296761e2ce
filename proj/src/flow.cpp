#include "swsynth/flow.hpp"

#include <unsupported/Eigen/MatrixFunctions>

#include <cmath>
#include <string>

namespace swsynth {

Matrix matrix_exponential(const Matrix& a, double t) {
    if (a.rows() != a.cols()) {
        throw std::invalid_argument("matrix_exponential: matrix is " + std::to_string(a.rows()) +
                                    "x" + std::to_string(a.cols()) + ", expected square");
    }
    if (!a.allFinite() || !std::isfinite(t)) {
        throw NumericError("matrix_exponential: non-finite input");
    }
    if (a.size() == 0) return a;
    const Matrix scaled = a * t;
    Matrix result = scaled.exp();
    if (!result.allFinite()) throw NumericError("matrix_exponential: overflow");
    return result;
}

FlowMap::FlowMap(Matrix e, Vector c, int mode_id, double tau)
    : e_(std::move(e)), c_(std::move(c)), mode_id_(mode_id), tau_(tau) {
    if (e_.rows() != e_.cols() || e_.rows() != c_.size()) {
        throw std::invalid_argument("FlowMap: E must be n x n and c of length n");
    }
    if (!e_.allFinite() || !c_.allFinite()) throw NumericError("FlowMap: non-finite entries");
    lu_.compute(e_);
    const double rcond = lu_.rcond();
    if (!(rcond > 1.0 / NumericPolicy::max_flow_condition)) {
        throw NumericError("FlowMap: flow matrix is numerically singular (rcond = " +
                           std::to_string(rcond) + ")");
    }
}

Vector FlowMap::post(const Vector& x) const {
    if (x.size() != c_.size()) {
        throw std::invalid_argument("post_point: state has dimension " + std::to_string(x.size()) +
                                    ", flow has " + std::to_string(c_.size()));
    }
    return e_ * x + c_;
}

Vector FlowMap::pre(const Vector& x) const {
    if (x.size() != c_.size()) {
        throw std::invalid_argument("pre_point: state has dimension " + std::to_string(x.size()) +
                                    ", flow has " + std::to_string(c_.size()));
    }
    return lu_.solve(x - c_);
}

FlowMap FlowMap::then(const FlowMap& next) const {
    if (next.dimension() != dimension()) throw std::invalid_argument("FlowMap::then: dimension mismatch");
    return FlowMap(next.e_ * e_, next.e_ * c_ + next.c_, next.mode_id_, tau_ + next.tau_);
}

FlowMap affine_flow(const Matrix& a, const Vector& b, double tau, int mode_id) {
    const auto n = a.rows();
    if (a.cols() != n) throw std::invalid_argument("affine_flow: A is not square");
    if (b.size() != n) {
        throw std::invalid_argument("affine_flow: b has length " + std::to_string(b.size()) +
                                    ", A is " + std::to_string(n) + "x" + std::to_string(n));
    }
    if (!(tau > 0.0) || !std::isfinite(tau)) throw std::invalid_argument("affine_flow: tau must be positive");

    Matrix augmented = Matrix::Zero(n + 1, n + 1);
    augmented.topLeftCorner(n, n) = a;
    augmented.topRightCorner(n, 1) = b;
    const Matrix expm = matrix_exponential(augmented, tau);
    return FlowMap(expm.topLeftCorner(n, n), expm.topRightCorner(n, 1), mode_id, tau);
}

}  // namespace swsynth
