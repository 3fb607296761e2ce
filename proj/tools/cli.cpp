#include "cli.hpp"

#include "swsynth/direct.hpp"
#include "swsynth/indirect.hpp"
#include "swsynth/model_io.hpp"
#include "swsynth/sim.hpp"

#include <CLI11.hpp>

#include <cmath>
#include <cstdio>
#include <filesystem>
#include <fstream>
#include <iostream>
#include <optional>
#include <sstream>

namespace swsynth {

namespace {

namespace fs = std::filesystem;

/// Usage or input problem; reported on stderr, exit 2.
struct UsageError : std::runtime_error {
    using std::runtime_error::runtime_error;
};

struct RunConfig {
    std::string model;
    std::string out = ".";
    std::string tau;
    std::string lower, upper;
    std::string eta, grid_step;
    std::string delta, cells;
    std::string epsilon;
    std::string pattern;
    std::string subspace;
    std::string x0;
    std::string steps = "200";
    std::string substeps = "32";
    std::string max_len = "12";
    std::string samples = "0";
    std::string seed = "0";
    unsigned threads = 0;
};

double real_arg(const std::string& name, const std::string& text) {
    try {
        return parse_real(text);
    } catch (const std::invalid_argument&) {
        throw UsageError("--" + name + ": not a number: '" + text + "'");
    }
}

double positive_arg(const std::string& name, const std::string& text) {
    const double v = real_arg(name, text);
    if (!(v > 0.0) || !std::isfinite(v)) throw UsageError("--" + name + " must be positive");
    return v;
}

std::size_t count_arg(const std::string& name, const std::string& text, bool allow_zero = false) {
    const double v = real_arg(name, text);
    if (v != std::floor(v) || v < (allow_zero ? 0.0 : 1.0) || v > 1e15) {
        throw UsageError("--" + name + " must be a " + (allow_zero ? "non-negative" : "positive") + " integer");
    }
    return static_cast<std::size_t>(v);
}

/// Comma or whitespace separated reals.
std::vector<double> list_arg(const std::string& name, const std::string& text) {
    std::string cleaned = text;
    for (char& ch : cleaned) {
        if (ch == ',' || ch == ';') ch = ' ';
    }
    std::istringstream in(cleaned);
    std::vector<double> out;
    std::string tok;
    while (in >> tok) out.push_back(real_arg(name, tok));
    if (out.empty()) throw UsageError("--" + name + " is empty");
    return out;
}

Vector vector_arg(const std::string& name, const std::string& text, Eigen::Index n) {
    const auto v = list_arg(name, text);
    if (v.size() == 1 && n > 1) return Vector::Constant(n, v[0]);
    if (static_cast<Eigen::Index>(v.size()) != n) {
        throw UsageError("--" + name + " needs " + std::to_string(n) + " values");
    }
    return Eigen::Map<const Vector>(v.data(), n);
}

struct Loaded {
    SwitchedSystem system;
    Box box;
    MethodParams params;
};

Loaded load(const RunConfig& cfg) {
    if (cfg.model.empty()) throw UsageError("--model is required");
    std::ifstream in(cfg.model);
    if (!in) throw UsageError("cannot read model file '" + cfg.model + "'");
    std::stringstream text;
    text << in.rdbuf();
    ModelFile mf = [&] {
        try {
            return parse_model(text.str());
        } catch (const ModelParseError& e) {
            throw UsageError(cfg.model + ": " + e.what());
        }
    }();
    SwitchedSystem sys = cfg.tau.empty() ? mf.system : mf.system.with_tau(positive_arg("tau", cfg.tau));
    const auto n = sys.dimension();
    std::optional<Box> box = mf.box;
    if (!cfg.lower.empty() || !cfg.upper.empty()) {
        if (cfg.lower.empty() || cfg.upper.empty()) throw UsageError("--lower and --upper go together");
        try {
            box = Box(vector_arg("lower", cfg.lower, n), vector_arg("upper", cfg.upper, n));
        } catch (const std::invalid_argument& e) {
            if (dynamic_cast<const UsageError*>(&e)) throw;
            throw UsageError(std::string("bad box: ") + e.what());
        }
    }
    if (!box) throw UsageError("no box V: give it in the model or with --lower/--upper");
    if (box->dimension() != n) throw UsageError("box dimension differs from the model");
    return {std::move(sys), *box, mf.params};
}

fs::path prepare_out(const RunConfig& cfg) {
    fs::path dir(cfg.out);
    std::error_code ec;
    fs::create_directories(dir, ec);
    if (!fs::is_directory(dir)) throw UsageError("cannot create output directory '" + cfg.out + "'");
    return dir;
}

void write_file(const fs::path& path, const std::string& content) {
    std::ofstream out(path, std::ios::binary);
    out << content;
    if (!out) throw std::runtime_error("cannot write " + path.string());
}

std::string read_file(const std::string& path) {
    std::ifstream in(path, std::ios::binary);
    if (!in) throw UsageError("cannot read '" + path + "'");
    std::stringstream s;
    s << in.rdbuf();
    return s.str();
}

std::string g(double v) {
    char buf[32];
    std::snprintf(buf, sizeof buf, "%.10g", v);
    return buf;
}

std::string describe_box(const Box& b) {
    std::string s = "[";
    for (Eigen::Index i = 0; i < b.dimension(); ++i) {
        s += (i ? ", " : "") + g(b.lower()[i]) + " .. " + g(b.upper()[i]);
    }
    return s + "]";
}

int cmd_synth_indirect(const RunConfig& cfg) {
    const Loaded m = load(cfg);
    double eta;
    if (!cfg.eta.empty() && !cfg.grid_step.empty()) throw UsageError("give --eta or --grid-step, not both");
    if (!cfg.eta.empty()) {
        eta = positive_arg("eta", cfg.eta);
    } else if (!cfg.grid_step.empty()) {
        eta = 0.5 * positive_arg("grid-step", cfg.grid_step);
    } else if (m.params.eta) {
        eta = *m.params.eta;
    } else {
        throw UsageError("no eta: give --eta, --grid-step, or 'eta:' in the model");
    }
    const std::size_t max_len = count_arg("max-len", cfg.max_len);
    const auto dir = prepare_out(cfg);

    const Grid grid(eta, m.system.dimension());
    AbstractGraph graph = [&] {
        try {
            return build_abstract_graph(m.system, m.box, grid);
        } catch (const EmptyGridError& e) {
            throw UsageError(e.what());
        }
    }();
    const SafetyResult safety = safety_synthesis(graph);
    const auto patterns = find_patterns(graph, safety, max_len);
    const BisimCertificate cert = certificate(m.system, eta);

    write_file(dir / "graph.txt", format_graph(graph));
    write_file(dir / "graph.dot", format_graph_dot(graph, &safety));
    write_file(dir / "patterns.txt", format_patterns(patterns));
    write_file(dir / "certificate.txt", format_certificate(cert));

    std::ostringstream report;
    report << "method indirect\n";
    report << "box " << describe_box(m.box) << '\n';
    report << "tau " << g(m.system.tau()) << '\n';
    report << "eta " << g(eta) << '\n';
    report << "nodes " << graph.node_count() << '\n';
    report << "winning " << safety.winning_count() << '\n';
    report << "max_len " << max_len << '\n';
    report << "patterns " << patterns.size() << '\n';
    report << format_certificate(cert);
    write_file(dir / "report.txt", report.str());
    std::cout << report.str();
    return safety.winning_count() ? kExitOk : kExitEmpty;
}

GridHandle direct_grid(const RunConfig& cfg, const Loaded& m) {
    const auto n = m.system.dimension();
    if (!cfg.delta.empty() && !cfg.cells.empty()) throw UsageError("give --delta or --cells, not both");
    try {
        if (!cfg.cells.empty()) {
            const Vector c = vector_arg("cells", cfg.cells, n);
            std::vector<std::int64_t> counts;
            for (Eigen::Index i = 0; i < n; ++i) {
                if (c[i] < 1 || c[i] != std::floor(c[i])) throw UsageError("--cells must be positive integers");
                counts.push_back(static_cast<std::int64_t>(c[i]));
            }
            return make_grid(CellGrid(m.box, counts));
        }
        if (!cfg.delta.empty()) {
            const Vector d = vector_arg("delta", cfg.delta, n);
            if ((d.array() <= 0).any()) throw UsageError("--delta must be positive");
            return make_grid(CellGrid::from_cell_size(m.box, d));
        }
        if (m.params.cells) {
            std::vector<std::int64_t> counts(m.params.cells->begin(), m.params.cells->end());
            return make_grid(CellGrid(m.box, counts));
        }
        if (m.params.delta) return make_grid(CellGrid::from_cell_size(m.box, *m.params.delta));
    } catch (const UsageError&) {
        throw;
    } catch (const std::invalid_argument& e) {
        throw UsageError(std::string("bad cell grid: ") + e.what());
    }
    throw UsageError("no cell size: give --delta, --cells, or 'delta:'/'cells:' in the model");
}

std::string describe_zones(const GriddySet& uncontrollable) {
    std::ostringstream out;
    const auto zones = connected_zones(uncontrollable);
    out << "zones " << zones.size() << '\n';
    for (const auto& z : zones) {
        out << "zone cells " << z.cells << " lower";
        for (double v : z.bounds.lower()) out << ' ' << g(v);
        out << " upper";
        for (double v : z.bounds.upper()) out << ' ' << g(v);
        out << '\n';
    }
    return out.str();
}

std::string describe_invariance(const InvarianceReport& r) {
    std::ostringstream out;
    out << "invariance_cells_checked " << r.cells_checked << '\n';
    out << "invariance_violations " << r.violation_count << '\n';
    out << "invariance_boundary_grazing " << r.boundary_grazing << '\n';
    for (const auto& v : r.violations) {
        out << "violation mode " << v.mode_id << " cell " << v.cell << ' '
            << (v.kind == InvarianceViolation::Kind::ImageLeavesBox ? "image-leaves-box" : "sample-outside-subspace");
        for (double x : v.point) out << ' ' << g(x);
        out << '\n';
    }
    return out.str();
}

int cmd_synth_direct(const RunConfig& cfg) {
    const Loaded m = load(cfg);
    const GridHandle grid = direct_grid(cfg, m);
    const std::size_t samples = count_arg("samples", cfg.samples, true);
    const auto seed = static_cast<std::uint64_t>(count_arg("seed", cfg.seed, true));
    const auto dir = prepare_out(cfg);

    const ControllableSubspace cs = algorithm1(m.system, grid);
    const InvarianceReport inv = verify_invariance(m.system, cs, samples, seed);

    write_file(dir / "subspace.txt", format_subspace(cs));
    write_file(dir / "regions.svg", render_regions_svg(cs));

    std::ostringstream report;
    report << "method direct\n";
    report << "box " << describe_box(m.box) << '\n';
    report << "tau " << g(m.system.tau()) << '\n';
    report << "cells";
    for (auto c : grid->counts()) report << ' ' << c;
    report << "\ndelta";
    for (double d : grid->delta()) report << ' ' << g(d);
    report << "\niterations " << cs.iterations << '\n';
    report << "converged " << (cs.converged ? "yes" : "no") << '\n';
    report << "controllable_cells " << cs.v_prime.count() << " of " << grid->size() << '\n';
    for (std::size_t i = 0; i < cs.mode_ids.size(); ++i) {
        report << "control " << cs.mode_ids[i] << ' ' << cs.control[i].count() << '\n';
    }
    report << describe_zones(cs.uncontrollable());
    report << describe_invariance(inv);
    write_file(dir / "report.txt", report.str());
    std::cout << report.str();

    if (cs.v_prime.is_empty()) return kExitEmpty;
    return inv.ok() ? kExitOk : kExitCheckFailed;
}

ControllableSubspace load_subspace(const std::string& path) {
    try {
        return parse_subspace(read_file(path));
    } catch (const UsageError&) {
        throw;
    } catch (const std::exception& e) {
        throw UsageError(path + ": " + e.what());
    }
}

int cmd_simulate(const RunConfig& cfg) {
    const Loaded m = load(cfg);
    const auto n = m.system.dimension();
    if (cfg.pattern.empty() == cfg.subspace.empty()) throw UsageError("give exactly one of --pattern and --subspace");
    if (cfg.x0.empty()) throw UsageError("--x0 is required");
    const Vector x0 = vector_arg("x0", cfg.x0, n);
    const std::size_t steps = count_arg("steps", cfg.steps);
    const std::size_t substeps = count_arg("substeps", cfg.substeps);
    const auto dir = prepare_out(cfg);

    std::ostringstream report;
    report << "box " << describe_box(m.box) << '\n';
    report << "tau " << g(m.system.tau()) << '\n';
    report << "steps " << steps << '\n';
    report << "substeps " << substeps << '\n';

    if (!cfg.pattern.empty()) {
        SwitchingPattern pat;
        try {
            pat = parse_pattern(cfg.pattern);
        } catch (const std::invalid_argument& e) {
            throw UsageError(std::string("--pattern: ") + e.what());
        }
        double eps = 0.0;
        if (!cfg.epsilon.empty()) {
            eps = real_arg("epsilon", cfg.epsilon);
            if (eps < 0) throw UsageError("--epsilon must be non-negative");
        } else if (m.params.epsilon) {
            eps = *m.params.epsilon;
        }
        Trajectory tr;
        try {
            tr = simulate_pattern(m.system, x0, pat, steps, substeps);
        } catch (const std::out_of_range& e) {
            throw UsageError(std::string("--pattern: ") + e.what());
        }
        const ContainmentReport c = check_containment(tr, m.box, eps);
        write_file(dir / "trajectory.csv", format_trajectory_csv(tr));
        report << "mode pattern\npattern " << format_pattern(pat) << '\n' << format_containment(c);
        write_file(dir / "report.txt", report.str());
        std::cout << report.str();
        return c.inflated_at_samples == 0 ? kExitOk : kExitCheckFailed;
    }

    const ControllableSubspace cs = load_subspace(cfg.subspace);
    if (cs.grid()->dimension() != n) throw UsageError("subspace dimension differs from the model");
    ClosedLoopRun run;
    try {
        run = simulate_closed_loop(m.system, x0, cs, steps, substeps);
    } catch (const X0OutsideControllable& e) {
        throw UsageError(e.what());
    }
    const ContainmentReport c = check_containment(run.trajectory, m.box, 0.0);
    write_file(dir / "trajectory.csv", format_trajectory_csv(run.trajectory));
    report << "mode closed-loop\n";
    report << "completed " << (run.completed() ? "yes" : "no") << '\n';
    if (run.halted_at) report << "halted_at " << *run.halted_at << '\n' << "diagnostic " << run.diagnostic << '\n';
    report << "modes ";
    for (int id : run.modes) report << id << (id > 9 ? " " : "");
    report << '\n' << format_containment(c);
    write_file(dir / "report.txt", report.str());
    std::cout << report.str();
    if (run.halted_at) {
        std::cerr << "swsynth: " << run.diagnostic << '\n';
        return kExitNoSafeMode;
    }
    return c.violations_at_samples.empty() ? kExitOk : kExitCheckFailed;
}

int cmd_verify(const RunConfig& cfg) {
    const Loaded m = load(cfg);
    if (cfg.subspace.empty()) throw UsageError("--subspace is required");
    const ControllableSubspace cs = load_subspace(cfg.subspace);
    if (cs.grid()->dimension() != m.system.dimension()) throw UsageError("subspace dimension differs from the model");
    for (int id : cs.mode_ids) {
        try {
            m.system.flow(id);
        } catch (const std::out_of_range&) {
            throw UsageError("subspace names mode " + std::to_string(id) + " which the model lacks");
        }
    }
    const std::size_t samples = count_arg("samples", cfg.samples, true);
    const auto seed = static_cast<std::uint64_t>(count_arg("seed", cfg.seed, true));
    const auto dir = prepare_out(cfg);
    const InvarianceReport inv = verify_invariance(m.system, cs, samples, seed);
    const std::string text = describe_invariance(inv);
    write_file(dir / "report.txt", text);
    std::cout << text;
    return inv.ok() ? kExitOk : kExitCheckFailed;
}

}  // namespace

int run_cli(int argc, char** argv) {
    CLI::App app{"Safety controller synthesis for sampled switched linear systems"};
    app.require_subcommand(1);
    RunConfig cfg;

    auto common = [&](CLI::App* sub) {
        sub->add_option("--model", cfg.model, "Model file")->required();
        sub->add_option("--out", cfg.out, "Output directory");
        sub->add_option("--tau", cfg.tau, "Sampling period override");
        sub->add_option("--lower", cfg.lower, "Lower corner of V, comma separated");
        sub->add_option("--upper", cfg.upper, "Upper corner of V, comma separated");
        sub->add_option("--threads", cfg.threads, "Worker thread cap (0 = all cores)");
    };

    auto* indirect = app.add_subcommand("synth-indirect", "Grid abstraction, safety game and cycle patterns");
    common(indirect);
    indirect->add_option("--eta", cfg.eta, "Grid half-step eta (lattice step 2 eta)");
    indirect->add_option("--grid-step", cfg.grid_step, "Lattice step (sets eta to half of it)");
    indirect->add_option("--max-len", cfg.max_len, "Longest cycle pattern reported");

    auto* direct = app.add_subcommand("synth-direct", "Controllable subspace on a cell grid");
    common(direct);
    direct->add_option("--delta", cfg.delta, "Cell size, one value or one per axis");
    direct->add_option("--cells", cfg.cells, "Cell count, one value or one per axis");
    direct->add_option("--samples", cfg.samples, "Samples per cell for the invariance check");
    direct->add_option("--seed", cfg.seed, "Seed of the random samples");

    auto* simulate = app.add_subcommand("simulate", "Simulate a pattern or the on-line controller");
    common(simulate);
    simulate->add_option("--pattern", cfg.pattern, "Periodic switching pattern, e.g. 12121212122");
    simulate->add_option("--subspace", cfg.subspace, "subspace.txt for the on-line controller");
    simulate->add_option("--x0", cfg.x0, "Initial state, comma separated")->required();
    simulate->add_option("--steps", cfg.steps, "Sampling steps");
    simulate->add_option("--substeps", cfg.substeps, "Dense points per period");
    simulate->add_option("--epsilon", cfg.epsilon, "Inflation of V for pattern runs");

    auto* verify = app.add_subcommand("verify", "Check invariance of a stored controllable subspace");
    common(verify);
    verify->add_option("--subspace", cfg.subspace, "subspace.txt")->required();
    verify->add_option("--samples", cfg.samples, "Samples per cell");
    verify->add_option("--seed", cfg.seed, "Seed of the random samples");

    try {
        app.parse(argc, argv);
    } catch (const CLI::ParseError& e) {
        const int code = app.exit(e);
        return code == 0 ? kExitOk : kExitUsage;
    }

    set_thread_limit(cfg.threads);
    try {
        if (indirect->parsed()) return cmd_synth_indirect(cfg);
        if (direct->parsed()) return cmd_synth_direct(cfg);
        if (simulate->parsed()) return cmd_simulate(cfg);
        return cmd_verify(cfg);
    } catch (const UsageError& e) {
        std::cerr << "swsynth: " << e.what() << '\n';
        return kExitUsage;
    } catch (const std::exception& e) {
        std::cerr << "swsynth: error: " << e.what() << '\n';
        return kExitUsage;
    }
}

}  // namespace swsynth
