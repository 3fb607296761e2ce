#pragma once

#include <Eigen/Dense>

#include <cstddef>
#include <functional>
#include <stdexcept>
#include <string>
#include <string_view>

namespace swsynth {

using Matrix = Eigen::MatrixXd;
using Vector = Eigen::VectorXd;

/// Tolerances used across the library. Tests read the same record so there is
/// exactly one knob per concern.
struct NumericPolicy {
    /// Relative accuracy expected from the matrix exponential (induced inf-norm).
    static constexpr double exp_rel_tol = 1e-12;
    /// Absolute tolerance for flow round trips (pre o post, semigroup checks).
    static constexpr double flow_abs_tol = 1e-9;
    /// Slack on the certificate inequality beta*eps + eta <= eps.
    static constexpr double certificate_slack = 1e-12;
    /// Relative slack when snapping a coordinate onto a cell boundary. Closed
    /// cells are widened by this fraction of a cell so that points computed
    /// on a shared face are reported in both neighbours.
    static constexpr double cell_face_slack = 1e-9;
    /// Largest acceptable 1-norm condition estimate of a flow matrix.
    static constexpr double max_flow_condition = 1e12;
};

class NumericError : public std::runtime_error {
public:
    using std::runtime_error::runtime_error;
};

bool all_finite(const Matrix& m);
bool all_finite(const Vector& v);

/// Row-sum norm: max_i sum_j |m_ij|.
double induced_inf_norm(const Matrix& m);

/// Infinity norm of a vector.
double inf_norm(const Vector& v);

/// Parses a decimal, scientific, or fraction literal ("1/40", "-2.5e-3").
/// Throws std::invalid_argument on anything else.
double parse_real(std::string_view text);

/// Worker count used by the parallel loops. 0 means hardware concurrency.
void set_thread_limit(unsigned threads);
unsigned thread_limit();

/// Runs body(begin, end) over [0, count) split into contiguous chunks. The
/// chunking depends only on count and the thread limit, so callers that write
/// into per-index slots get deterministic output.
void parallel_for(std::size_t count,
                  const std::function<void(std::size_t, std::size_t)>& body);

}  // namespace swsynth
