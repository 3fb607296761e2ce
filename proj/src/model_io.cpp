#include "swsynth/model_io.hpp"

#include <cstdio>
#include <fstream>
#include <map>
#include <sstream>
#include <vector>

namespace swsynth {

ModelParseError::ModelParseError(int line, const std::string& message)
    : std::runtime_error(line > 0 ? "line " + std::to_string(line) + ": " + message : message),
      line_(line) {}

namespace {

struct Line {
    int number;
    std::string text;
};

std::string trim(const std::string& s) {
    const auto first = s.find_first_not_of(" \t\r");
    if (first == std::string::npos) return {};
    const auto last = s.find_last_not_of(" \t\r");
    return s.substr(first, last - first + 1);
}

std::vector<std::string> split_ws(const std::string& s) {
    std::istringstream in(s);
    std::vector<std::string> out;
    for (std::string tok; in >> tok;) out.push_back(tok);
    return out;
}

double number(const std::string& tok, int line, const std::string& field) {
    try {
        return parse_real(tok);
    } catch (const std::invalid_argument&) {
        throw ModelParseError(line, field + ": '" + tok + "' is not a number");
    }
}

Vector row(const std::string& text, int line, const std::string& field) {
    const auto toks = split_ws(text);
    Vector v(static_cast<Eigen::Index>(toks.size()));
    for (std::size_t i = 0; i < toks.size(); ++i) v[static_cast<Eigen::Index>(i)] = number(toks[i], line, field);
    return v;
}

std::string fmt(double v) {
    char buf[32];
    std::snprintf(buf, sizeof buf, "%.17g", v);
    return buf;
}

std::string fmt_row(const Vector& v) {
    std::string out;
    for (Eigen::Index i = 0; i < v.size(); ++i) {
        if (i) out += ' ';
        out += fmt(v[i]);
    }
    return out;
}

class Parser {
public:
    explicit Parser(std::string_view text) {
        std::istringstream in{std::string(text)};
        int n = 0;
        for (std::string raw; std::getline(in, raw);) {
            ++n;
            const auto hash = raw.find('#');
            if (hash != std::string::npos) raw.erase(hash);
            raw = trim(raw);
            if (!raw.empty()) lines_.push_back({n, raw});
        }
    }

    ModelFile run() {
        while (pos_ < lines_.size()) statement();
        return finish();
    }

private:
    const Line& next(const std::string& expecting) {
        if (pos_ >= lines_.size()) throw ModelParseError(0, "unexpected end of file, expected " + expecting);
        return lines_[pos_++];
    }

    long require_dimension(int line) const {
        if (!dimension_) throw ModelParseError(line, "'dimension' must be declared before this block");
        return *dimension_;
    }

    Vector vector_field(const std::string& text, int line, const std::string& field) {
        Vector v = row(text, line, field);
        if (v.size() == 0) throw ModelParseError(line, field + ": no values");
        return v;
    }

    void statement() {
        const Line& l = next("a statement");
        const auto toks = split_ws(l.text);
        if (toks[0] == "mode") {
            mode_block(l, toks);
            return;
        }
        if (l.text == "box:") {
            box_block(l);
            return;
        }
        const auto colon = l.text.find(':');
        const auto eq = l.text.find('=');
        if (eq != std::string::npos && (colon == std::string::npos || eq < colon)) {
            const auto key = trim(l.text.substr(0, eq));
            const auto value = trim(l.text.substr(eq + 1));
            if (key.empty() || value.empty()) throw ModelParseError(l.number, "malformed assignment");
            if (builder_params_.count(key)) throw ModelParseError(l.number, "duplicate parameter '" + key + "'");
            builder_params_[key] = {number(value, l.number, key), l.number};
            return;
        }
        if (colon == std::string::npos) throw ModelParseError(l.number, "unrecognized line '" + l.text + "'");
        const auto key = trim(l.text.substr(0, colon));
        const auto value = trim(l.text.substr(colon + 1));
        if (value.empty()) throw ModelParseError(l.number, "'" + key + "' needs a value");

        if (!seen_.insert(key).second) throw ModelParseError(l.number, "duplicate key '" + key + "'");
        if (key == "dimension") {
            const double d = number(value, l.number, key);
            if (d < 1 || d != static_cast<long>(d)) throw ModelParseError(l.number, "dimension must be a positive integer");
            dimension_ = static_cast<long>(d);
        } else if (key == "tau") {
            tau_ = number(value, l.number, key);
            if (!(*tau_ > 0)) throw ModelParseError(l.number, "tau must be positive");
        } else if (key == "modes") {
            const double m = number(value, l.number, key);
            if (m < 1 || m != static_cast<long>(m)) throw ModelParseError(l.number, "modes must be a positive integer");
            mode_count_ = static_cast<long>(m);
        } else if (key == "builder") {
            if (value != "boost1" && value != "boost3") {
                throw ModelParseError(l.number, "unknown builder '" + value + "' (expected boost1 or boost3)");
            }
            builder_ = value;
            builder_line_ = l.number;
        } else if (key == "sigma_available") {
            for (const auto& tok : split_ws(value)) {
                if (tok.size() != 3 || tok.find_first_not_of("01") != std::string::npos) {
                    throw ModelParseError(l.number, "sigma_available: '" + tok + "' is not a 3-bit word");
                }
                sigmas_.push_back({tok[0] - '0', tok[1] - '0', tok[2] - '0'});
            }
            sigma_line_ = l.number;
        } else if (key == "eta") {
            params_.eta = positive(value, l.number, key);
        } else if (key == "epsilon") {
            params_.epsilon = positive(value, l.number, key);
        } else if (key == "delta") {
            Vector d = vector_field(value, l.number, key);
            if ((d.array() <= 0).any()) throw ModelParseError(l.number, "delta entries must be positive");
            params_.delta = d;
            delta_line_ = l.number;
        } else if (key == "cells") {
            Vector c = vector_field(value, l.number, key);
            std::vector<long> counts;
            for (double v : c) {
                if (v < 1 || v != static_cast<long>(v)) throw ModelParseError(l.number, "cells must be positive integers");
                counts.push_back(static_cast<long>(v));
            }
            params_.cells = counts;
            cells_line_ = l.number;
        } else {
            throw ModelParseError(l.number, "unknown key '" + key + "'");
        }
    }

    double positive(const std::string& value, int line, const std::string& key) {
        const double v = number(value, line, key);
        if (!(v > 0)) throw ModelParseError(line, key + " must be positive");
        return v;
    }

    void mode_block(const Line& head, const std::vector<std::string>& toks) {
        const long n = require_dimension(head.number);
        if (toks.size() != 2) throw ModelParseError(head.number, "expected 'mode <id>'");
        const double idv = number(toks[1], head.number, "mode id");
        if (idv < 1 || idv != static_cast<int>(idv)) throw ModelParseError(head.number, "mode id must be a positive integer");
        const int id = static_cast<int>(idv);
        for (const auto& m : modes_) {
            if (m.id == id) throw ModelParseError(head.number, "duplicate mode " + std::to_string(id));
        }
        const std::string field = "mode " + std::to_string(id);

        if (next("'A:'").text != "A:") throw ModelParseError(lines_[pos_ - 1].number, field + ": expected 'A:'");
        Matrix a(n, n);
        for (long r = 0; r < n; ++r) {
            const Line& l = next(field + " A row");
            Vector v = row(l.text, l.number, field + " A");
            if (v.size() != n) {
                throw ModelParseError(l.number, field + " A: row has " + std::to_string(v.size()) +
                                                    " entries, expected " + std::to_string(n));
            }
            a.row(r) = v.transpose();
        }
        if (next("'b:'").text != "b:") throw ModelParseError(lines_[pos_ - 1].number, field + ": expected 'b:'");
        const Line& l = next(field + " b row");
        Vector b = row(l.text, l.number, field + " b");
        if (b.size() != n) {
            throw ModelParseError(l.number, field + " b: has " + std::to_string(b.size()) +
                                                " entries, expected " + std::to_string(n));
        }
        modes_.push_back({id, a, b});
    }

    void box_block(const Line& head) {
        if (box_) throw ModelParseError(head.number, "duplicate box");
        const Line& lo = next("'lower:'");
        if (lo.text.rfind("lower:", 0) != 0) throw ModelParseError(lo.number, "box: expected 'lower:'");
        const Line& hi = next("'upper:'");
        if (hi.text.rfind("upper:", 0) != 0) throw ModelParseError(hi.number, "box: expected 'upper:'");
        Vector lower = vector_field(lo.text.substr(6), lo.number, "box lower");
        Vector upper = vector_field(hi.text.substr(6), hi.number, "box upper");
        try {
            box_ = Box(lower, upper);
        } catch (const std::invalid_argument& e) {
            throw ModelParseError(head.number, e.what());
        }
        box_line_ = head.number;
    }

    double builder_value(const std::string& name, double fallback) {
        auto it = builder_params_.find(name);
        if (it == builder_params_.end()) return fallback;
        used_params_.insert(name);
        return it->second.first;
    }

    SwitchedSystem build_from_builder(double tau) {
        if (!modes_.empty()) throw ModelParseError(builder_line_, "builder and explicit mode blocks are exclusive");
        try {
            if (*builder_ == "boost1") {
                if (!sigmas_.empty()) throw ModelParseError(sigma_line_, "sigma_available only applies to boost3");
                Boost1CellParams p;
                p.x_c = builder_value("x_c", p.x_c);
                p.x_l = builder_value("x_l", p.x_l);
                p.r_c = builder_value("r_c", p.r_c);
                p.r_l = builder_value("r_l", p.r_l);
                p.r_0 = builder_value("r_0", p.r_0);
                p.v_s = builder_value("v_s", p.v_s);
                check_unused();
                return build_boost_1cell(p, tau);
            }
            Boost3CellParams p;
            p.r = builder_value("r", p.r);
            p.l = builder_value("L", p.l);
            p.m = builder_value("M", p.m);
            p.c = builder_value("C", p.c);
            p.load = builder_value("R", p.load);
            p.u = builder_value("U", p.u);
            check_unused();
            return build_boost_3cell(p, tau, sigmas_.empty() ? all_cell_switches() : sigmas_);
        } catch (const std::invalid_argument& e) {
            throw ModelParseError(builder_line_, e.what());
        }
    }

    void check_unused() {
        for (const auto& [name, entry] : builder_params_) {
            if (!used_params_.count(name)) {
                throw ModelParseError(entry.second, "unknown parameter '" + name + "' for builder " + *builder_);
            }
        }
    }

    ModelFile finish() {
        if (!tau_) throw ModelParseError(0, "missing required field 'tau'");
        std::optional<SwitchedSystem> sys;
        if (builder_) {
            sys = build_from_builder(*tau_);
        } else {
            if (!builder_params_.empty()) {
                throw ModelParseError(builder_params_.begin()->second.second, "parameter assignment without a builder");
            }
            if (!sigmas_.empty()) throw ModelParseError(sigma_line_, "sigma_available only applies to boost3");
            if (!dimension_) throw ModelParseError(0, "missing required field 'dimension'");
            if (!mode_count_) throw ModelParseError(0, "missing required field 'modes'");
            if (modes_.empty()) throw ModelParseError(0, "no mode blocks");
            try {
                sys = SwitchedSystem(modes_, *tau_);
            } catch (const std::exception& e) {
                throw ModelParseError(0, e.what());
            }
        }
        if (dimension_ && *dimension_ != sys->dimension()) {
            throw ModelParseError(0, "dimension " + std::to_string(*dimension_) + " does not match the model (" +
                                         std::to_string(sys->dimension()) + ")");
        }
        if (mode_count_ && *mode_count_ != sys->mode_count()) {
            throw ModelParseError(0, "modes: declared " + std::to_string(*mode_count_) + ", found " +
                                         std::to_string(sys->mode_count()));
        }
        const auto n = sys->dimension();
        if (box_ && box_->dimension() != n) throw ModelParseError(box_line_, "box dimension does not match the model");
        if (params_.delta && params_.delta->size() != n) {
            if (params_.delta->size() != 1) throw ModelParseError(delta_line_, "delta needs 1 or n entries");
            params_.delta = Vector::Constant(n, (*params_.delta)[0]);
        }
        if (params_.cells && static_cast<Eigen::Index>(params_.cells->size()) != n) {
            if (params_.cells->size() != 1) throw ModelParseError(cells_line_, "cells needs 1 or n entries");
            params_.cells = std::vector<long>(static_cast<std::size_t>(n), params_.cells->front());
        }
        return ModelFile{std::move(*sys), box_, params_};
    }

    std::vector<Line> lines_;
    std::size_t pos_ = 0;
    std::set<std::string> seen_;
    std::optional<long> dimension_;
    std::optional<double> tau_;
    std::optional<long> mode_count_;
    std::optional<std::string> builder_;
    int builder_line_ = 0;
    std::map<std::string, std::pair<double, int>> builder_params_;
    std::set<std::string> used_params_;
    std::vector<CellSwitches> sigmas_;
    int sigma_line_ = 0;
    std::vector<LinearMode> modes_;
    std::optional<Box> box_;
    int box_line_ = 0;
    int delta_line_ = 0;
    int cells_line_ = 0;
    MethodParams params_;
};

}  // namespace

ModelFile parse_model(std::string_view text) { return Parser(text).run(); }

ModelFile load_model(const std::string& path) {
    std::ifstream in(path);
    if (!in) throw ModelParseError(0, "cannot open model file '" + path + "'");
    std::ostringstream buf;
    buf << in.rdbuf();
    return parse_model(buf.str());
}

std::string serialize_model(const ModelFile& model) {
    const auto& sys = model.system;
    std::ostringstream out;
    out << "dimension: " << sys.dimension() << '\n';
    out << "tau: " << fmt(sys.tau()) << '\n';
    out << "modes: " << sys.mode_count() << '\n';
    for (const auto& m : sys.modes()) {
        out << "\nmode " << m.id << "\nA:\n";
        for (Eigen::Index r = 0; r < m.a.rows(); ++r) out << fmt_row(m.a.row(r).transpose()) << '\n';
        out << "b:\n" << fmt_row(m.b) << '\n';
    }
    if (model.box) {
        out << "\nbox:\nlower: " << fmt_row(model.box->lower()) << "\nupper: " << fmt_row(model.box->upper()) << '\n';
    }
    const auto& p = model.params;
    if (p.eta || p.delta || p.cells || p.epsilon) out << '\n';
    if (p.eta) out << "eta: " << fmt(*p.eta) << '\n';
    if (p.epsilon) out << "epsilon: " << fmt(*p.epsilon) << '\n';
    if (p.delta) out << "delta: " << fmt_row(*p.delta) << '\n';
    if (p.cells) {
        out << "cells:";
        for (long c : *p.cells) out << ' ' << c;
        out << '\n';
    }
    return out.str();
}

}  // namespace swsynth
