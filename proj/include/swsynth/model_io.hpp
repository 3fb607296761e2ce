#pragma once

#include "swsynth/model.hpp"

#include <optional>
#include <stdexcept>
#include <string>
#include <string_view>

namespace swsynth {

/// Error in a model document; `line` is 1-based, 0 when the problem is not
/// tied to one line (e.g. a missing key).
class ModelParseError : public std::runtime_error {
public:
    ModelParseError(int line, const std::string& message);
    int line() const { return line_; }

private:
    int line_;
};

/// Synthesis knobs a model file may carry alongside the dynamics.
struct MethodParams {
    std::optional<double> eta;
    std::optional<Vector> delta;          // cell size, one entry per dimension
    std::optional<std::vector<long>> cells;  // cell count per dimension
    std::optional<double> epsilon;
};

struct ModelFile {
    SwitchedSystem system;
    std::optional<Box> box;
    MethodParams params;
};

/// Line-oriented model format:
///
///   # comment
///   dimension: 2
///   tau: 1/2
///   modes: 2
///   mode 1
///   A:
///   -0.0166 0
///   0 -0.0142
///   b:
///   0.333 0
///   ...
///   box:
///   lower: 3 1.5
///   upper: 3.4 1.8
///   eta: 1/40
///
/// A `builder: boost1` or `builder: boost3` line replaces the explicit mode
/// blocks; builder parameters follow as `name = value` lines and boost3 takes
/// `sigma_available: 000 001 010 011`. Numbers accept fractions.
ModelFile parse_model(std::string_view text);
ModelFile load_model(const std::string& path);

/// Writes the explicit (builder-free) form, full precision.
std::string serialize_model(const ModelFile& model);

}  // namespace swsynth
