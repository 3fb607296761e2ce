#pragma once

#include "swsynth/numeric.hpp"

namespace swsynth {

/// e^{A t}. A must be square with finite entries.
Matrix matrix_exponential(const Matrix& a, double t);

/// Exact one-period map of x' = A x + b under a fixed mode:
///   x(tau) = E x(0) + c,  E = e^{A tau},  c = int_0^tau e^{A s} ds b.
///
/// Immutable after construction. E is checked to be numerically invertible,
/// which makes post/pre bijections on R^n.
class FlowMap {
public:
    FlowMap(Matrix e, Vector c, int mode_id, double tau);

    const Matrix& e() const { return e_; }
    const Vector& c() const { return c_; }
    int mode_id() const { return mode_id_; }
    double tau() const { return tau_; }
    Eigen::Index dimension() const { return c_.size(); }

    /// E x + c.
    Vector post(const Vector& x) const;
    /// E^{-1} (x - c), by LU solve.
    Vector pre(const Vector& x) const;

    /// Applies this map and then `next` (both must share dimension).
    FlowMap then(const FlowMap& next) const;

private:
    Matrix e_;
    Vector c_;
    int mode_id_;
    double tau_;
    Eigen::PartialPivLU<Matrix> lu_;
};

/// Builds the flow map of x' = A x + b over tau from the exponential of the
/// augmented matrix [[A, b], [0, 0]], which covers singular A without
/// a separate branch.
FlowMap affine_flow(const Matrix& a, const Vector& b, double tau, int mode_id = 0);

inline Vector post_point(const FlowMap& f, const Vector& x) { return f.post(x); }
inline Vector pre_point(const FlowMap& f, const Vector& x) { return f.pre(x); }

}  // namespace swsynth
