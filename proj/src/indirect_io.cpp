#include "swsynth/indirect.hpp"

#include <cctype>
#include <cstdio>
#include <sstream>

namespace swsynth {

namespace {

std::string fmt(double v) {
    char buf[32];
    std::snprintf(buf, sizeof buf, "%.17g", v);
    return buf;
}

std::string point_text(const GridPoint& q) {
    std::string out = "(";
    for (std::size_t i = 0; i < q.k.size(); ++i) {
        if (i) out += ',';
        out += std::to_string(q.k[i]);
    }
    return out + ")";
}

}  // namespace

SwitchingPattern parse_pattern(const std::string& text) {
    SwitchingPattern p;
    const bool separated = text.find_first_of(" \t,.") != std::string::npos;
    if (separated) {
        std::string token;
        auto flush = [&] {
            if (token.empty()) return;
            std::size_t used = 0;
            int id = 0;
            try {
                id = std::stoi(token, &used);
            } catch (const std::exception&) {
                used = 0;
            }
            if (used != token.size() || id <= 0) throw std::invalid_argument("pattern: bad mode id '" + token + "'");
            p.modes.push_back(id);
            token.clear();
        };
        for (char ch : text) {
            if (ch == ' ' || ch == '\t' || ch == ',' || ch == '.') {
                flush();
            } else {
                token += ch;
            }
        }
        flush();
    } else {
        for (char ch : text) {
            if (ch < '1' || ch > '9') throw std::invalid_argument(std::string("pattern: bad mode digit '") + ch + "'");
            p.modes.push_back(ch - '0');
        }
    }
    if (p.modes.empty()) throw std::invalid_argument("pattern: empty");
    return p;
}

std::string format_pattern(const SwitchingPattern& p) {
    bool digits = true;
    for (int id : p.modes) digits = digits && id >= 1 && id <= 9;
    std::string out;
    for (std::size_t i = 0; i < p.modes.size(); ++i) {
        if (!digits && i) out += ' ';
        out += std::to_string(p.modes[i]);
    }
    return out;
}

std::string format_graph(const AbstractGraph& graph) {
    std::ostringstream out;
    for (std::size_t q = 0; q < graph.node_count(); ++q) {
        const auto from = point_text(graph.nodes()[q]);
        for (std::size_t p = 0; p < graph.mode_count(); ++p) {
            const auto s = graph.successor(q, p);
            out << from << ' ' << graph.mode_ids()[p] << ' '
                << (s == AbstractGraph::kExit ? std::string("EXIT") : point_text(graph.nodes()[static_cast<std::size_t>(s)]))
                << '\n';
        }
    }
    return out.str();
}

std::string format_graph_dot(const AbstractGraph& graph, const SafetyResult* safety) {
    std::ostringstream out;
    out << "digraph abstraction {\n  node [shape=circle, fontsize=8];\n";
    for (std::size_t q = 0; q < graph.node_count(); ++q) {
        out << "  n" << q << " [label=\"" << point_text(graph.nodes()[q]) << "\"";
        if (safety && !safety->winning[q]) out << ", style=dashed, color=gray";
        out << "];\n";
    }
    bool any_exit = false;
    for (std::size_t q = 0; q < graph.node_count(); ++q) {
        for (std::size_t p = 0; p < graph.mode_count(); ++p) {
            const auto s = graph.successor(q, p);
            if (s == AbstractGraph::kExit) {
                any_exit = true;
                out << "  n" << q << " -> exit [label=\"" << graph.mode_ids()[p] << "\", color=red];\n";
            } else {
                out << "  n" << q << " -> n" << s << " [label=\"" << graph.mode_ids()[p] << "\"];\n";
            }
        }
    }
    if (any_exit) out << "  exit [shape=box, color=red];\n";
    out << "}\n";
    return out.str();
}

std::string format_patterns(const std::vector<SwitchingPattern>& patterns) {
    std::string out;
    for (const auto& p : patterns) out += format_pattern(p) + '\n';
    return out;
}

std::string format_certificate(const BisimCertificate& cert) {
    std::ostringstream out;
    out << "beta " << fmt(cert.beta) << '\n';
    out << "eta " << fmt(cert.eta) << '\n';
    if (cert.certified()) {
        out << "epsilon " << fmt(cert.epsilon) << '\n' << "status certified\n";
    } else {
        out << "epsilon inf\n" << "status uncertified\n";
    }
    return out.str();
}

}  // namespace swsynth
